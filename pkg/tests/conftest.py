import json
import os
from pathlib import Path

import pytest

from treemover import graph_from_json

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_path(name):
    return FIXTURES / f"{name}.json"


def load_fixture(name):
    with open(fixture_path(name)) as fh:
        return graph_from_json(json.load(fh))


@pytest.fixture
def fixtures_dir():
    return FIXTURES
