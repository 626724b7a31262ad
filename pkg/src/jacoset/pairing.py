"""Level-set neighbors, the local pairing function, and slice machinery.

The pairing is evaluated once per event gap: the g-values of the vertices
on the Jacobi set split the range into intervals inside which the slice
combinatorics are constant, and one sample slice per interval suffices.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from ._sos import SymVal
from .core_mesh import Cut


@dataclass
class RestrictedPoint:
    """A restricted critical point: a Jacobi crossing on one level set."""

    edge: int
    s: float
    level: float
    f_value: float
    criticality: str
    vertex: int | None = None  # set for points at mesh vertices


@dataclass
class PairingArrow:
    source: RestrictedPoint
    partner: RestrictedPoint  # equals source (is source) for self-pairs

    @property
    def is_self(self):
        return self.partner is self.source


@dataclass
class SliceCrossing:
    edge: int
    below: int
    above: int
    s: Fraction
    point: np.ndarray = dc_field(repr=False)
    f_sym: SymVal = dc_field(repr=False)


@dataclass
class Circle:
    """One closed level polyline at a sample cut, with its Jacobi crossings."""

    crossings: list  # SliceCrossing, cyclic order, above-on-left
    arc_steps: list  # arc length from crossing i to i+1
    tri_steps: list  # triangles traversed from crossing i to i+1 (inclusive)
    j_indices: list  # indices into crossings that lie on Jacobi edges

    def n(self):
        return len(self.crossings)


def _tri_exit(mesh, tri_id, above):
    tri = mesh.triangles[tri_id]
    a, b, c = (int(x) for x in tri)
    flags = (above(a), above(b), above(c))
    n_above = sum(flags)
    if n_above in (0, 3):
        return None
    verts = (a, b, c)
    if n_above == 1:
        i = flags.index(True)
        w, nx, pv = verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]
        return (w, nx), (pv, w)
    i = flags.index(False)
    w, nx, pv = verts[i], verts[(i + 1) % 3], verts[(i + 2) % 3]
    return (pv, w), (w, nx)


def trace_j_circles(mesh, f, g, cut, active_edges):
    """Trace the level circles through the given Jacobi edges at this cut.

    Walks outward from each crossing instead of scanning the whole mesh;
    every circle of a closed surface carries at least two restricted
    critical points, so seeding from Jacobi edges reaches them all.
    """
    above_cache = {}

    def above(v):
        r = above_cache.get(v)
        if r is None:
            r = cut.is_above(v)
            above_cache[v] = r
        return r

    def entry_triangle(e):
        # the incident triangle whose entry edge is e
        for t in mesh.edge_tris[e]:
            ee = _tri_exit(mesh, t, above)
            if ee is None:
                continue
            (u, v), _ = ee
            if mesh.edge_id(u, v) == e:
                return t
        return None

    def make_crossing(e):
        u, v = mesh.edges[e]
        if above(u):
            bel, abv = v, u
        else:
            bel, abv = u, v
        s = cut.crossing_param(bel, abv)
        pt = (1 - float(s)) * mesh.vertices[bel] + float(s) * mesh.vertices[abv]
        fs = f.sym_interpolate(bel, abv, s)
        return SliceCrossing(e, bel, abv, s, pt, fs)

    circles = []
    visited = set()
    active_set = set(active_edges)
    for e0 in sorted(active_set):
        if e0 in visited:
            continue
        u, v = mesh.edges[e0]
        if above(u) == above(v):
            continue
        chain = []
        arc = []
        tris = []
        e = e0
        while True:
            visited.add(e)
            chain.append(make_crossing(e))
            t = entry_triangle(e)
            if t is None:
                raise RuntimeError(f"no entry triangle for edge {e}")
            _, (xu, xv) = _tri_exit(mesh, t, above)
            e_next = mesh.edge_id(xu, xv)
            tris.append(t)
            e = e_next
            if e == e0:
                break
        n = len(chain)
        j_idx = [i for i in range(n) if chain[i].edge in active_set]
        arc = [
            float(np.linalg.norm(chain[(i + 1) % n].point - chain[i].point))
            for i in range(n)
        ]
        circles.append(Circle(chain, arc, [[t] for t in tris], j_idx))
    return circles


@dataclass
class Sample:
    """One Jacobi crossing inside one event gap."""

    gap: int
    edge: int
    loop: int
    pos: int
    s: Fraction
    point: np.ndarray
    f_sym: SymVal
    criticality: str
    circle: int
    circle_index: int  # index into the circle's j_indices order
    neighbors: list  # [(edge, f_sym, arc_len, tri_chain)]
    partner: int | None = None
    mutual: bool = False
    grad_g_norm: float = 0.0


class PairingData:
    """Per-gap slices, samples, and pairing of one (field, level-field) pass."""

    def __init__(self, js, f, g):
        self.js = js
        self.f = f
        self.g = g
        self.mesh = js.mesh
        self._build_events()
        self._build_gaps()
        self._pair_samples()

    # -- events and spans ---------------------------------------------------

    def _build_events(self):
        verts = set()
        for e in self.js.edges:
            verts.update(self.js.mesh.edges[e])
        self.events = sorted(verts, key=lambda v: self.g.key(v))
        self.rank = {v: i for i, v in enumerate(self.events)}
        # gap k sits between events[k] and events[k+1]
        self.edge_span = {}
        for e in self.js.edges:
            a, b = self.js.mesh.edges[e]
            lo, hi = (a, b) if self.g.less(a, b) else (b, a)
            self.edge_span[e] = (self.rank[lo], self.rank[hi])

    def gap_cut(self, k):
        return Cut.just_above(self.g, self.events[k])

    def gap_level(self, k):
        return float(self.gap_cut(k).t)

    def _edge_grad_norm(self, e):
        t0, t1 = self.mesh.edge_tris[e]
        g0 = np.linalg.norm(self.mesh.pl_gradient(t0, self.g.values))
        g1 = np.linalg.norm(self.mesh.pl_gradient(t1, self.g.values))
        return 0.5 * (g0 + g1)

    def _build_gaps(self):
        mesh = self.mesh
        n_gaps = len(self.events) - 1
        by_gap = [[] for _ in range(max(n_gaps, 0))]
        for e, (lo, hi) in self.edge_span.items():
            for k in range(lo, hi):
                by_gap[k].append(e)
        self.active_by_gap = by_gap
        self.samples = {}
        self.circles = {}
        grad_cache = {}
        for k, active in enumerate(by_gap):
            if not active:
                continue
            cut = self.gap_cut(k)
            circles = trace_j_circles(mesh, self.f, self.g, cut, active)
            self.circles[k] = circles
            for ci, circ in enumerate(circles):
                jn = len(circ.j_indices)
                for jj, idx in enumerate(circ.j_indices):
                    cr = circ.crossings[idx]
                    e = cr.edge
                    loop, pos = self.js.edge_loop[e]
                    nbrs = []
                    for step in (1, -1):
                        jj2 = (jj + step) % jn
                        idx2 = circ.j_indices[jj2]
                        cr2 = circ.crossings[idx2]
                        # arc length and triangles between idx and idx2
                        arc = 0.0
                        tris = []
                        i = idx
                        while i != idx2:
                            nxt = (i + 1) % circ.n() if step == 1 else (i - 1) % circ.n()
                            a_i = i if step == 1 else nxt
                            arc += circ.arc_steps[a_i]
                            tris.extend(circ.tri_steps[a_i])
                            i = nxt
                        nbrs.append((cr2.edge, cr2.f_sym, arc, tris))
                    gn = grad_cache.get(e)
                    if gn is None:
                        gn = self._edge_grad_norm(e)
                        grad_cache[e] = gn
                    self.samples[(k, e)] = Sample(
                        k,
                        e,
                        loop,
                        pos,
                        cr.s,
                        cr.point,
                        cr.f_sym,
                        self.js.edges[e].criticality,
                        ci,
                        jj,
                        nbrs,
                        grad_g_norm=gn,
                    )

    def _pair_samples(self):
        for (k, e), smp in self.samples.items():
            best = None
            best_diff = None
            for nb_edge, nb_f, _arc, _tris in smp.neighbors:
                if nb_edge == e:
                    continue
                diff = nb_f - smp.f_sym
                if best is None or diff.abs_cmp(best_diff) < 0 or (
                    diff.abs_cmp(best_diff) == 0 and nb_edge < best
                ):
                    best = nb_edge
                    best_diff = diff
            smp.partner = best
        for smp in self.samples.values():
            if smp.partner is None:
                smp.mutual = False
                continue
            back = self.samples.get((smp.gap, smp.partner))
            smp.mutual = back is not None and back.partner == smp.edge

    # -- strand continuation ------------------------------------------------

    def continue_strand(self, edge, gap, direction):
        """Edge of the same strand active in the adjacent gap, or None.

        direction +1 walks to gap+1, -1 to gap-1.  Returns None when the
        strand turns (BD point or g-critical fold) or when a boundary
        vertex (critical point of g) is crossed.
        """
        target = gap + direction
        lo, hi = self.edge_span[edge]
        if lo <= target < hi:
            return edge
        js = self.js
        loop, pos = js.edge_loop[edge]
        lp = js.loops[loop]
        m = len(lp.edges)
        # cross the vertex at the event between gap and target
        for walk in (1, -1):
            e_cur, p_cur = edge, pos
            steps = 0
            while steps < m:
                steps += 1
                if walk == 1:
                    vtx = lp.vertices[(p_cur + 1) % m]
                    p_nxt = (p_cur + 1) % m
                else:
                    vtx = lp.vertices[p_cur]
                    p_nxt = (p_cur - 1) % m
                if js.is_g_critical(vtx):
                    break  # boundary point: strand piece ends here
                e_nxt = lp.edges[p_nxt]
                if js.edges[e_nxt].criticality != js.edges[e_cur].criticality:
                    break  # fold: the strand turns at a BD point
                lo2, hi2 = self.edge_span[e_nxt]
                if lo2 <= target < hi2:
                    return e_nxt
                if lo2 <= gap < hi2:
                    # still in the source gap: keep walking this direction
                    e_cur, p_cur = e_nxt, p_nxt
                    continue
                break
        return None

    # -- public views ---------------------------------------------------------

    def arrows(self):
        out = []
        for (k, e), smp in sorted(self.samples.items()):
            level = self.gap_level(k)
            src = RestrictedPoint(
                e, float(smp.s), level, float(smp.f_sym.main), smp.criticality
            )
            if smp.partner is None:
                out.append(PairingArrow(src, src))
                continue
            p = self.samples[(k, smp.partner)]
            dst = RestrictedPoint(
                p.edge, float(p.s), level, float(p.f_sym.main), p.criticality
            )
            out.append(PairingArrow(src, dst))
        # self pairs at BD points and critical points of g on the set
        bd_verts = {b.vertex for b in self.js.bd_points}
        for v in sorted(bd_verts | (set(self.js.g_criticals) & self._verts_on_set())):
            src = RestrictedPoint(
                -1, 0.0, self.g.value(v), self.f.value(v), "degenerate", vertex=v
            )
            out.append(PairingArrow(src, src))
        return out

    def _verts_on_set(self):
        verts = set()
        for e in self.js.edges:
            verts.update(self.mesh.edges[e])
        return verts


def compute_pairing(js, f, g):
    """Pairing arrows at every sample slice plus structural self-pairs."""
    return PairingData(js, f, g).arrows()


def level_set_neighbors(js, g, x, f=None, data=None):
    """Jacobi crossings adjacent to x along the level set of g through x.

    x is either a vertex id or a RestrictedPoint.  Empty at extrema of g,
    up to two points generically, up to four at saddles of g.
    """
    f = f if f is not None else js.f
    mesh = js.mesh
    if isinstance(x, RestrictedPoint) and x.vertex is None:
        a, b = mesh.edges[x.edge]
        lo = a if g.less(a, b) else b
        cut = Cut.just_above(g, lo)
        circles = trace_j_circles(mesh, f, g, cut, list(js.edges))
        for circ in circles:
            for jj, idx in enumerate(circ.j_indices):
                if circ.crossings[idx].edge == x.edge:
                    out = []
                    jn = len(circ.j_indices)
                    for step in (1, -1):
                        idx2 = circ.j_indices[(jj + step) % jn]
                        cr = circ.crossings[idx2]
                        if cr.edge != x.edge:
                            out.append(_crossing_point(js, f, g, cr, float(cut.t)))
                    dedup = {}
                    for rp in out:
                        dedup[rp.edge] = rp
                    return list(dedup.values())
        return []
    v = x if isinstance(x, int) else x.vertex
    kind = js.g_criticals[v].kind if v in js.g_criticals else None
    if kind in ("minimum", "maximum"):
        return []
    out = {}
    incident = {e for e in js.edges if v in mesh.edges[e]}
    for side in ("above", "below"):
        cut = Cut.just_above(g, v) if side == "above" else Cut.just_below(g, v)
        active = [e for e in js.edges if _edge_active(js, g, e, cut)]
        if not active:
            continue
        circles = trace_j_circles(mesh, f, g, cut, active)
        for circ in circles:
            jn = len(circ.j_indices)
            for jj, idx in enumerate(circ.j_indices):
                cr = circ.crossings[idx]
                if cr.edge not in incident:
                    continue
                for step in (1, -1):
                    k = 1
                    while k <= jn:
                        idx2 = circ.j_indices[(jj + step * k) % jn]
                        cr2 = circ.crossings[idx2]
                        if cr2.edge not in incident:
                            out[cr2.edge] = _crossing_point(
                                js, f, g, cr2, g.value(v)
                            )
                            break
                        k += 1
    return [out[e] for e in sorted(out)]


def _edge_active(js, g, e, cut):
    a, b = js.mesh.edges[e]
    return cut.is_above(a) != cut.is_above(b)


def _crossing_point(js, f, g, cr, level):
    return RestrictedPoint(
        cr.edge,
        float(cr.s),
        level,
        float(cr.f_sym.main),
        js.edges[cr.edge].criticality,
    )


# -- segment decomposition --------------------------------------------------

@dataclass
class Segment:
    sid: int
    loop: int
    start: tuple  # (position index, Fraction tau) along the loop
    end: tuple
    gaps: list  # gap indices sampled inside
    edges: dict  # gap -> edge
    partner_sid: int | None = None

    @property
    def interval(self):
        return (self.gaps[0], self.gaps[-1]) if self.gaps else None


@dataclass
class SegmentDecomposition:
    boundary_points: list  # (kind, loop, position, vertex-or-None, level)
    image_points: list
    segments: list
    data: PairingData


def build_segments(js, f, g, data=None):
    """Cut loops at boundary and image points into consistently paired segments."""
    data = data or PairingData(js, f, g)
    from .regions import build_regions_from_data

    regions = build_regions_from_data(data)
    mesh = js.mesh
    # breakpoints per loop: (pos_index, tau, kind, vertex, level)
    brk = {li: [] for li in range(js.n_loops)}

    def add_vertex_break(loop, pos, kind, v):
        brk[loop].append((pos, Fraction(0), kind, v, g.value(v)))

    for b in js.bd_points:
        add_vertex_break(b.loop, b.position, "bd", b.vertex)
    for li, lp in enumerate(js.loops):
        for i, v in enumerate(lp.vertices):
            if js.is_g_critical(v):
                add_vertex_break(li, i, "g-critical", v)
    # region ends contribute switch and image breakpoints
    for reg in regions:
        for side in ("lo", "hi"):
            for role in ("moved", "partner"):
                bp = reg.end_break(side, role)
                if bp is not None:
                    loop, pos, tau, kind, vtx, level = bp
                    brk[loop].append((pos, tau, kind, vtx, level))
    boundary_points = []
    image_points = []
    segments = []
    for li, lp in enumerate(js.loops):
        pts = sorted(set(brk[li]), key=lambda t: (t[0], t[1]))
        for pos, tau, kind, vtx, level in pts:
            rec = (kind, li, (pos, float(tau)), vtx, level)
            if kind == "image":
                image_points.append(rec)
            else:
                boundary_points.append(rec)
        if not pts:
            continue
        m = len(pts)
        for i in range(m):
            p0, p1 = pts[i], pts[(i + 1) % m]
            seg = Segment(len(segments), li, (p0[0], p0[1]), (p1[0], p1[1]), [], {})
            segments.append(seg)
    # attach samples to segments
    def locate(loop, pos, tau):
        pts = sorted(set(brk[loop]), key=lambda t: (t[0], t[1]))
        if not pts:
            return None
        keys = [(p[0], p[1]) for p in pts]
        lo = 0
        for i, k in enumerate(keys):
            if k <= (pos, tau):
                lo = i
        base = sum(1 for s in segments if s.loop < loop)
        return base + lo

    sid_by_loop = {}
    base = 0
    for li in range(js.n_loops):
        cnt = len(set(brk[li]))
        sid_by_loop[li] = base
        base += cnt
    for (k, e), smp in data.samples.items():
        lp = js.loops[smp.loop]
        a, b = mesh.edges[e]
        lo_v = a if g.less(a, b) else b
        start_v = lp.vertices[smp.pos]
        tau = smp.s if start_v == lo_v else 1 - smp.s
        sid = locate(smp.loop, smp.pos, tau)
        if sid is None:
            continue
        seg = segments[sid]
        seg.gaps.append(k)
        seg.edges[k] = e
    for seg in segments:
        seg.gaps.sort()
    # partner segment: through the samples
    for seg in segments:
        target = None
        consistent = True
        for k in seg.gaps:
            e = seg.edges[k]
            smp = data.samples.get((k, e))
            if smp is None or smp.partner is None:
                continue
            p = data.samples[(k, smp.partner)]
            lp = js.loops[p.loop]
            a, b = mesh.edges[p.edge]
            lo_v = a if g.less(a, b) else b
            start_v = lp.vertices[p.pos]
            tau = p.s if start_v == lo_v else 1 - p.s
            sid = locate(p.loop, p.pos, tau)
            if target is None:
                target = sid
            elif target != sid:
                consistent = False
        seg.partner_sid = target if consistent else None
    return SegmentDecomposition(boundary_points, image_points, segments, data)
