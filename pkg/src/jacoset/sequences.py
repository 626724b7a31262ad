"""Jacobi sequences: monotone chains of regions bounded by BD internal regions."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

SEQUENCE_CAP = 10_000


@dataclass
class Sequence:
    regions: list  # Region objects ordered by increasing g
    schedule: list  # per region: "moved"|"partner" or ("transition", enter, exit)
    wrt: str = "f"
    kappa_total: float = 0.0
    diagnostics: list = dc_field(default_factory=list)

    @property
    def interval(self):
        return (self.regions[0].interval[0], self.regions[-1].interval[1])

    def key(self):
        return tuple(
            (r.rid, (s,) if isinstance(s, str) else tuple(s))
            for r, s in zip(self.regions, self.schedule)
        )

    def roles(self, i):
        """(entry role, exit role) of the moved strand in region i."""
        s = self.schedule[i]
        if isinstance(s, str):
            return s, s
        return s[1], s[2]


def _bd_ends(region, bd_verts):
    lo = region.lo_meet is not None and region.lo_meet in bd_verts
    hi = region.hi_meet is not None and region.hi_meet in bd_verts
    return lo, hi


def _entry_roles(region):
    return ("moved", "partner") if region.mutual else ("moved",)


def _exit_roles(region, entry_role):
    if not region.mutual:
        return (entry_role,)
    other = "partner" if entry_role == "moved" else "moved"
    return (entry_role, other)


def _entry_to_schedule(entry, exit_role):
    if entry == exit_role:
        return entry
    return ("transition", entry, exit_role)


def _edge_at(region, gap, role):
    return (region.moved_edges if role == "moved" else region.partner_edges)[gap]


def grow_sequences(regions):
    """All maximal valid chains between BD internal regions.

    Depth-first from every BD internal seed, monotone in g, branching at
    mutually paired regions; chains meeting any non-regular, non-terminal
    region are discarded.
    """
    if not regions:
        return []
    data = regions[0].data
    js = data.js
    bd_verts = {b.vertex for b in js.bd_points}
    by_entry_up = {}
    by_entry_down = {}
    for r in regions:
        by_entry_up.setdefault(r.gaps[0], []).append(r)
        by_entry_down.setdefault(r.gaps[-1], []).append(r)

    found = {}

    def emit(chain, schedule, direction):
        if direction < 0:
            chain = chain[::-1]
            schedule = [
                s if isinstance(s, str) else ("transition", s[2], s[1])
                for s in schedule[::-1]
            ]
        seq = Sequence(list(chain), list(schedule))
        seq.kappa_total = float(sum(r.kappa_unnorm for r in chain))
        found[seq.key()] = seq

    def grow(chain, schedule, exit_role, direction):
        if len(found) >= SEQUENCE_CAP:
            warnings.warn("sequence enumeration cap reached")
            return
        cur = chain[-1]
        boundary_gap = cur.gaps[-1] if direction > 0 else cur.gaps[0]
        m_edge = _edge_at(cur, boundary_gap, exit_role)
        m_next = data.continue_strand(m_edge, boundary_gap, direction)
        if m_next is None:
            return
        nxt_gap = boundary_gap + direction
        table = by_entry_up if direction > 0 else by_entry_down
        for r2 in table.get(nxt_gap, []):
            if any(r2 is c for c in chain):
                continue
            entry_gap = r2.gaps[0] if direction > 0 else r2.gaps[-1]
            for role in _entry_roles(r2):
                if _edge_at(r2, entry_gap, role) != m_next:
                    continue
                lo_bd, hi_bd = _bd_ends(r2, bd_verts)
                terminal_bd = hi_bd if direction > 0 else lo_bd
                entry_bd = lo_bd if direction > 0 else hi_bd
                if entry_bd:
                    continue  # cannot enter a region through its BD end
                if terminal_bd:
                    emit(chain + [r2], schedule + [role], direction)
                    continue
                if r2.primary != "Regular":
                    continue  # saddle / extremal / BD side obstruction
                for exit_r in _exit_roles(r2, role):
                    grow(
                        chain + [r2],
                        schedule + [_entry_to_schedule(role, exit_r)],
                        exit_r,
                        direction,
                    )

    for seed in regions:
        lo_bd, hi_bd = _bd_ends(seed, bd_verts)
        if not (lo_bd or hi_bd):
            continue
        if lo_bd and hi_bd:
            for role in _entry_roles(seed):
                emit([seed], [role], 1)
            continue
        direction = 1 if lo_bd else -1
        for role in _entry_roles(seed):
            grow([seed], [role], role, direction)
    out = [found[k] for k in sorted(found)]
    for seq in out:
        validate_sequence(seq)
    return [s for s in out if not s.diagnostics]


def validate_sequence(seq):
    """Locality, consistency, and endpoint checks; failures as diagnostics."""
    from .regions import region_of_influence

    data = seq.regions[0].data
    bd_verts = {b.vertex for b in data.js.bd_points}
    diags = []
    lo_ok, _ = _bd_ends(seq.regions[0], bd_verts)
    _, hi_ok = _bd_ends(seq.regions[-1], bd_verts)
    if not lo_ok:
        diags.append("endpoint: first region does not close at a BD point")
    if not hi_ok:
        diags.append("endpoint: last region does not close at a BD point")
    for i, r in enumerate(seq.regions):
        interior = 0 < i < len(seq.regions) - 1
        if interior and r.primary != "Regular":
            diags.append(f"interior region {r.rid} has class {r.primary}")
        if not r.influence and not r.coverage:
            region_of_influence(r)
        if not r.local:
            lvl = r.interval
            diags.append(
                f"locality: foreign Jacobi edge inside influence of region {r.rid}"
                f" over g in ({lvl[0]:.4g}, {lvl[1]:.4g})"
            )
    for a, b in zip(seq.regions, seq.regions[1:]):
        if a.gaps[-1] + 1 != b.gaps[0]:
            diags.append(f"regions {a.rid},{b.rid} not contiguous in g")
    seq.diagnostics = diags
    return not diags


def kappa_sequence(seq):
    """Total modification: the sum of unnormalized kappa over the chain."""
    return float(sum(r.kappa_unnorm for r in seq.regions))
