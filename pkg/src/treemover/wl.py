"""Color refinement over a shared palette for pairs of attributed graphs.

Iteration 0 colors nodes by exact feature equality; iteration i >= 1 refines
by (own color, sorted multiset of neighbor colors). Both graphs share one
palette, so comparing color histograms decides whether refinement separates
them, and at which iteration.
"""

from __future__ import annotations

from collections import Counter


def _initial_colors(ga, gb):
    palette = {}
    colors = []
    for g in (ga, gb):
        cur = []
        for v in range(g.node_count):
            key = g.features[v].tobytes()
            if key not in palette:
                palette[key] = len(palette)
            cur.append(palette[key])
        colors.append(cur)
    return colors


def _refine(ga, gb, colors):
    palette = {}
    out = []
    for g, cur in zip((ga, gb), colors):
        nxt = []
        for v in range(g.node_count):
            key = (cur[v], tuple(sorted(cur[u] for u in g.neighbors[v])))
            if key not in palette:
                palette[key] = len(palette)
            nxt.append(palette[key])
        out.append(nxt)
    return out


def wl_first_difference(ga, gb, iterations):
    """First refinement iteration whose histograms differ, or None.

    Checks iterations 0..iterations inclusive and stops early once the joint
    partition stabilises (no further iteration can separate the graphs).
    """
    if ga.feature_dim != gb.feature_dim:
        raise ValueError(
            f"feature dimensions differ: {ga.feature_dim} vs {gb.feature_dim}"
        )
    if int(iterations) != iterations or iterations < 0:
        raise ValueError(f"iterations must be an integer >= 0, got {iterations}")
    colors = _initial_colors(ga, gb)
    if Counter(colors[0]) != Counter(colors[1]):
        return 0
    classes = len(set(colors[0]) | set(colors[1]))
    for it in range(1, int(iterations) + 1):
        colors = _refine(ga, gb, colors)
        if Counter(colors[0]) != Counter(colors[1]):
            return it
        new_classes = len(set(colors[0]) | set(colors[1]))
        if new_classes == classes:
            return None
        classes = new_classes
    return None


def wl_distinguishable(ga, gb, iterations):
    """Whether refinement tells the graphs apart within `iterations` rounds."""
    return wl_first_difference(ga, gb, iterations) is not None
