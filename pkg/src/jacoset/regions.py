"""Jacobi regions: paired segments over g-intervals, classes, kappa, coverage."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

CLASS_PRECEDENCE = ["BDInternal", "Saddle", "BDSide", "BDExternal", "Extremal", "Regular"]


@dataclass
class Region:
    rid: int
    gaps: list
    moved_edges: dict  # gap -> edge (the movable strand)
    partner_edges: dict
    mutual: bool
    data: object = dc_field(repr=False)
    classes: set = dc_field(default_factory=set)
    primary: str = "Regular"
    kappa: float = 0.0
    kappa_unnorm: float = 0.0
    area: float = 0.0
    coverage: set = dc_field(default_factory=set)
    lo_meet: int | None = None  # vertex where the strands meet below, if any
    hi_meet: int | None = None
    influence: set = dc_field(default_factory=set)
    local: bool = True
    zero_area: bool = False

    # -- interval ----------------------------------------------------------

    @property
    def lo_event(self):
        return self.data.events[self.gaps[0]]

    @property
    def hi_event(self):
        k = self.gaps[-1] + 1
        ev = self.data.events
        return ev[k] if k < len(ev) else ev[-1]

    @property
    def interval(self):
        g = self.data.g
        return (g.value(self.lo_event), g.value(self.hi_event))

    def sample(self, gap, role="moved"):
        e = (self.moved_edges if role == "moved" else self.partner_edges)[gap]
        return self.data.samples[(gap, e)]

    def strand_loops(self):
        s0 = self.sample(self.gaps[0], "moved")
        s1 = self.sample(self.gaps[0], "partner")
        return s0.loop, s1.loop

    def end_break(self, side, role):
        """Breakpoint contributed by this region end on one strand, or None.

        Returns (loop, pos, tau, kind, vertex, level) where kind is
        'switch' for the strand whose partner changed and 'image' for the
        point it projects to on the other strand.
        """
        k = self.gaps[0] if side == "lo" else self.gaps[-1]
        direction = -1 if side == "lo" else 1
        w = self.lo_event if side == "lo" else self.hi_event
        meet = self.lo_meet if side == "lo" else self.hi_meet
        if meet is not None:
            return None  # strands merge at a vertex; vertex breaks cover it
        data = self.data
        e = (self.moved_edges if role == "moved" else self.partner_edges)[k]
        cont = data.continue_strand(e, k, direction)
        if cont is None:
            return None  # strand turns at a vertex break
        smp = data.samples.get((k, e))
        level = data.g.value(w)
        # did this strand's partner follow?
        other_role = "partner" if role == "moved" else "moved"
        p = (self.moved_edges if other_role == "moved" else self.partner_edges)[k]
        p_cont = data.continue_strand(p, k, direction)
        nxt = data.samples.get((k + direction, cont))
        kind = "image"
        if nxt is None or nxt.partner != p_cont or p_cont is None:
            kind = "switch"
        js = data.js
        loop, pos = js.edge_loop[e]
        a, b = js.mesh.edges[e]
        lo_v = a if data.g.less(a, b) else b
        gp = Fraction(data.g.value(lo_v))
        hv = b if lo_v == a else a
        gq = Fraction(data.g.value(hv))
        s = (Fraction(level) - gp) / (gq - gp) if gq != gp else Fraction(1, 2)
        start_v = js.loops[loop].vertices[pos]
        tau = s if start_v == lo_v else 1 - s
        return (loop, pos, tau, kind, None, level)


def build_regions_from_data(data):
    """Maximal consistently paired runs of level-set neighbor pairs."""
    js = data.js
    n_gaps = len(data.active_by_gap)
    open_chains = {}
    regions = []

    def close(chain):
        regions.append(chain)

    for k in range(n_gaps):
        pairs = {}
        for e in sorted(data.active_by_gap[k]):
            smp = data.samples.get((k, e))
            if smp is None or smp.partner is None:
                continue
            pairs[(e, smp.partner)] = smp.mutual
        next_open = {}
        for (e0, p0), chain in sorted(open_chains.items()):
            e1 = data.continue_strand(e0, k - 1, 1)
            p1 = data.continue_strand(p0, k - 1, 1)
            key = (e1, p1)
            if (
                e1 is not None
                and p1 is not None
                and key in pairs
                and pairs[key] == chain["mutual"]
                and key not in next_open
            ):
                chain["gaps"].append(k)
                chain["moved"][k] = e1
                chain["partner"][k] = p1
                next_open[key] = chain
                del pairs[key]
            else:
                close(chain)
        for (e, p), mut in sorted(pairs.items()):
            if (e, p) in next_open:
                continue
            chain = {"gaps": [k], "moved": {k: e}, "partner": {k: p}, "mutual": mut}
            next_open[(e, p)] = chain
        open_chains = next_open
    for chain in open_chains.values():
        close(chain)

    # merge mirrored mutual chains
    seen = {}
    out = []
    for chain in regions:
        k0 = chain["gaps"][0]
        key = (
            k0,
            chain["gaps"][-1],
            min(chain["moved"][k0], chain["partner"][k0]),
            max(chain["moved"][k0], chain["partner"][k0]),
        )
        if chain["mutual"] and key in seen:
            continue
        seen[key] = True
        out.append(chain)

    result = []
    for chain in out:
        reg = Region(
            len(result),
            chain["gaps"],
            chain["moved"],
            chain["partner"],
            chain["mutual"],
            data,
        )
        _finish_region(reg)
        result.append(reg)
    return result


def _meet_vertex(data, reg, side):
    """Vertex at the boundary event where the two strands merge, if any."""
    k = reg.gaps[0] if side == "lo" else reg.gaps[-1]
    w = reg.lo_event if side == "lo" else reg.hi_event
    e = reg.moved_edges[k]
    p = reg.partner_edges[k]
    mesh = data.js.mesh
    if w in mesh.edges[e] and w in mesh.edges[p]:
        return w
    return None


def _finish_region(reg):
    data = reg.data
    reg.lo_meet = _meet_vertex(data, reg, "lo")
    reg.hi_meet = _meet_vertex(data, reg, "hi")
    _compute_coverage(reg)
    classify_region(reg)
    kappa_region(reg)


def _arc_to_partner(reg, k):
    """Neighbor record of the moved sample pointing at the partner."""
    smp = reg.sample(k, "moved")
    recs = [r for r in smp.neighbors if r[0] == reg.partner_edges[k]]
    return recs


def _compute_coverage(reg):
    data = reg.data
    tris = set()
    for k in reg.gaps:
        for rec in _arc_to_partner(reg, k):
            tris.update(rec[3])
    # bounded flood closure: stay inside the g-slab; block at every Jacobi
    # edge so the fill cannot leak around the strand end corners
    g = data.g
    mesh = data.js.mesh
    allowed_v = _slab_vertex_mask(g, mesh, reg.lo_event, reg.hi_event)
    tri_ok = allowed_v[mesh.triangles].all(axis=1)
    blocked = data.js.edges

    stack = [t for t in tris if tri_ok[t]]
    seen = set(tris)
    while stack:
        t = stack.pop()
        tri = mesh.triangles[t]
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            e = mesh.edge_id(a, b)
            if e in blocked:
                continue
            for t2 in mesh.edge_tris[e]:
                if t2 not in seen and tri_ok[t2]:
                    seen.add(t2)
                    stack.append(t2)
    reg.coverage = seen
    areas = mesh.triangle_areas()
    reg.area = float(sum(areas[t] for t in seen))


def _slab_vertex_mask(g, mesh, lo_event, hi_event):
    vals = g.values
    idx = np.arange(mesh.n_vertices)
    lo_v, hi_v = g.value(lo_event), g.value(hi_event)
    above_lo = (vals > lo_v) | ((vals == lo_v) & (idx >= lo_event))
    below_hi = (vals < hi_v) | ((vals == hi_v) & (idx <= hi_event))
    return above_lo & below_hi


def classify_region(reg, js=None, g=None):
    """Assign the class set and primary class of one region."""
    data = reg.data
    js = js or data.js
    g = g or data.g
    classes = set()
    bd_verts = {b.vertex for b in js.bd_points}
    for meet in (reg.lo_meet, reg.hi_meet):
        if meet is None:
            continue
        if meet in bd_verts:
            classes.add("BDInternal")
        elif js.is_g_critical(meet):
            kind = js.g_criticals[meet].kind
            classes.add("Extremal" if kind in ("minimum", "maximum") else "Saddle")
    # strand endpoints at boundary events without meeting
    for side in ("lo", "hi"):
        k = reg.gaps[0] if side == "lo" else reg.gaps[-1]
        w = reg.lo_event if side == "lo" else reg.hi_event
        meet = reg.lo_meet if side == "lo" else reg.hi_meet
        if meet is not None:
            continue
        direction = -1 if side == "lo" else 1
        for role in ("moved", "partner"):
            e = (reg.moved_edges if role == "moved" else reg.partner_edges)[k]
            if data.continue_strand(e, k, direction) is None:
                mesh = js.mesh
                if w in mesh.edges[e]:
                    if w in bd_verts:
                        classes.add("BDSide")
                    elif js.is_g_critical(w):
                        kind = js.g_criticals[w].kind
                        classes.add(
                            "Extremal" if kind in ("minimum", "maximum") else "Saddle"
                        )
    # events strictly inside or on the closure but on neither strand
    cov_verts = set()
    mesh = js.mesh
    for t in reg.coverage:
        cov_verts.update(int(v) for v in mesh.triangles[t])
    strand_edges = set(reg.moved_edges.values()) | set(reg.partner_edges.values())
    strand_verts = set()
    for e in strand_edges:
        strand_verts.update(mesh.edges[e])
    for w in (reg.lo_event, reg.hi_event):
        if w in strand_verts or w == reg.lo_meet or w == reg.hi_meet:
            continue
        if w in cov_verts:
            if w in bd_verts:
                classes.add("BDExternal")
            elif js.is_g_critical(w):
                kind = js.g_criticals[w].kind
                classes.add("Extremal" if kind in ("minimum", "maximum") else "Saddle")
    for w in cov_verts - strand_verts - {reg.lo_event, reg.hi_event}:
        if w in js.g_criticals and js.g_criticals[w].kind in ("minimum", "maximum"):
            lo_key = g.key(reg.lo_event)
            hi_key = g.key(reg.hi_event)
            if lo_key < g.key(w) < hi_key:
                classes.add("Extremal")
        if w in bd_verts and g.key(reg.lo_event) < g.key(w) < g.key(reg.hi_event):
            # a foreign birth-death point strictly inside the coverage
            classes.add("BDExternal")
    if not classes:
        classes.add("Regular")
    reg.classes = classes
    for name in CLASS_PRECEDENCE:
        if name in classes:
            reg.primary = name
            break
    return reg.primary


def kappa_region(reg, f=None, g=None):
    """Comparison measure of one region integrated over its bounding segments.

    The integrand is |2f(v) - f(u) - f(w)| with u, w the level-set
    neighbors of v; the measure ||grad g(v)|| dv along a strand is
    exactly dg by the coarea change of variables, so the integral runs
    over the g-extent of each gap.  Integrating the embedded edge length
    instead would keep the PL staircase bias and never converge to the
    area form.
    """
    data = reg.data
    gv = data.g
    total = 0.0
    for k in reg.gaps:
        ev = data.events
        dt = gv.value(ev[k + 1]) - gv.value(ev[k]) if k + 1 < len(ev) else 0.0
        if dt <= 0:
            continue
        for role in ("moved", "partner"):
            smp = reg.sample(k, role)
            nb = smp.neighbors
            if len(nb) >= 2:
                fu, fw = float(nb[0][1].main), float(nb[1][1].main)
            elif nb:
                fu = fw = float(nb[0][1].main)
            else:
                continue
            fv = float(smp.f_sym.main)
            total += abs(2 * fv - fu - fw) * dt
    reg.kappa_unnorm = 0.5 * total
    if reg.area > 0:
        reg.kappa = reg.kappa_unnorm / reg.area
        reg.zero_area = False
    else:
        reg.kappa = reg.kappa_unnorm
        reg.zero_area = True
    return reg.kappa


def region_of_influence(reg):
    """Coverage plus the strip past the moved strand up to reattachment.

    Returns the triangle set; sets ``reg.local`` False when a foreign
    Jacobi crossing blocks the rewrite.
    """
    data = reg.data
    js = data.js
    own = set(reg.moved_edges.values()) | set(reg.partner_edges.values())
    tris = set(reg.coverage)
    local = True
    for k in reg.gaps:
        moved = reg.sample(k, "moved")
        partner = reg.sample(k, "partner")
        fp = partner.f_sym
        crit = moved.criticality
        # walk beyond the moved strand: the neighbor away from the partner
        away = [r for r in moved.neighbors if r[0] != partner.edge]
        for nb_edge, nb_f, _arc, nb_tris in away:
            tris.update(nb_tris)
            if nb_edge in own:
                continue
            # reattachment must come before the next foreign crossing
            if crit == "restricted-max" and not (nb_f < fp):
                local = False
            if crit == "restricted-min" and not (nb_f > fp):
                local = False
        if foreign_hits(js, reg, own):
            local = False
            break
    reg.influence = tris
    reg.local = local
    if "Extremal" in reg.classes:
        reg.influence = set(reg.coverage)
        reg.local = False
    return reg.influence


def foreign_hits(js, reg, own):
    """A foreign Jacobi edge touching the coverage and active in the slab."""
    k_lo, k_hi = reg.gaps[0], reg.gaps[-1]
    span = reg.data.edge_span
    for t in reg.coverage:
        tri = js.mesh.triangles[t]
        for i in range(3):
            a, b = int(tri[i]), int(tri[(i + 1) % 3])
            e = js.mesh.edge_id(a, b)
            if e in js.edges and e not in own:
                lo, hi = span[e]
                if lo <= k_hi and hi > k_lo:
                    return True
    return False


def build_regions(decomp_or_data):
    """Regions from a segment decomposition or pairing data."""
    data = getattr(decomp_or_data, "data", decomp_or_data)
    regs = build_regions_from_data(data)
    for reg in regs:
        region_of_influence(reg)
    return regs
