"""Sweep orders: vertex orderings whose prefixes attach along single arcs.

Used to renumber sphere fixtures (so index tie-breaking yields a perfect
function) and to assign drain values inside cancelled super-level patches.
"""

from __future__ import annotations


def sweep_order(mesh, targets, preset=(), key=None):
    """Order ``targets`` so each attaches to preset-plus-earlier contiguously.

    Returns the ordered list.  A vertex qualifies when its already-placed
    link neighbors form exactly one nonempty arc of its link cycle; among
    qualifying vertices the smallest ``key`` wins.  Vertices whose whole
    link is already placed are deferred while any other choice exists.
    """
    targets = set(targets)
    placed = set(preset)
    if key is None:
        key = lambda v: v
    order = []
    if not placed:
        first = min(targets, key=key)
        order.append(first)
        placed.add(first)
        targets.remove(first)

    def arcs(v):
        cycle = mesh.link_cycle(v)
        n = len(cycle)
        flags = [w in placed for w in cycle]
        k = sum(flags)
        if k == 0:
            return 0, False
        if k == n:
            return 1, True
        runs = sum(
            1 for i in range(n) if flags[i] and not flags[i - 1]
        )
        return runs, False

    frontier = {w for v in placed for w in mesh.link_cycle(v) if v in placed} & targets
    for v in list(placed):
        frontier.update(w for w in mesh.link_cycle(v) if w in targets)
    while targets:
        best = None
        best_key = None
        fallback = None
        fallback_key = None
        for v in frontier:
            runs, full = arcs(v)
            if runs != 1:
                continue
            if full:
                if fallback_key is None or key(v) < fallback_key:
                    fallback, fallback_key = v, key(v)
                continue
            if best_key is None or key(v) < best_key:
                best, best_key = v, key(v)
        pick = best if best is not None else fallback
        if pick is None:
            # disconnected or blocked; take any frontier vertex to progress
            pick = min(frontier, key=key) if frontier else min(targets, key=key)
        order.append(pick)
        placed.add(pick)
        targets.discard(pick)
        frontier.discard(pick)
        frontier.update(w for w in mesh.link_cycle(pick) if w in targets)
    return order
