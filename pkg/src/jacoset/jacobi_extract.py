"""Jacobi set of a field pair: edge tests, loop assembly, BD points."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._sos import orient_gf
from .core_mesh import classify_critical_points

_FILTER_EPS = 1e-12


class NonGenericPair(ValueError):
    """f and g share a critical vertex."""


class InvariantViolation(RuntimeError):
    """An extracted structure broke a structural invariant."""


@dataclass
class JacobiEdge:
    edge: int
    lam: float
    alignment: str  # aligned | anti-aligned
    criticality: str  # restricted-max | restricted-min


def jacobi_edge_test(mesh, f, g, edge):
    """Edge test of the pair: None when the edge is not on the Jacobi set.

    The edge belongs to the set iff PL f at the two level-set samples
    flanking the edge lies on the same side of f at the edge interior:
    both below means a restricted maximum, both above a restricted minimum.
    """
    a, b = mesh.edges[edge]
    u, v = (a, b) if g.less(a, b) else (b, a)
    w0, w1 = mesh.edge_opposite[edge]
    side0 = _f_above_side(mesh, f, g, u, v, w0)
    side1 = _f_above_side(mesh, f, g, u, v, w1)
    if side0 != side1:
        return None
    criticality = "restricted-min" if side0 > 0 else "restricted-max"
    df = f.value(u) - f.value(v)
    dg = g.value(u) - g.value(v)
    lam = -df / dg if dg != 0.0 else float("-inf") if df > 0 else float("inf")
    aligned = f.less(u, v)  # co-monotone with g along the edge
    return JacobiEdge(edge, lam, "aligned" if aligned else "anti-aligned", criticality)


def _f_above_side(mesh, f, g, u, v, w):
    """+1 when the level-set sample toward w has f above the edge crossing."""
    return orient_gf(
        g.value(u), g.value(v), g.value(w),
        f.value(u), f.value(v), f.value(w),
        (u, v, w), mesh.n_vertices,
    )


def _edge_tests_vectorized(mesh, f, g):
    """Edge test for every mesh edge; exact fallback only near zero."""
    E = mesh.n_edges
    ea = np.fromiter((e[0] for e in mesh.edges), dtype=int, count=E)
    eb = np.fromiter((e[1] for e in mesh.edges), dtype=int, count=E)
    w0 = np.fromiter((o[0] for o in mesh.edge_opposite), dtype=int, count=E)
    w1 = np.fromiter((o[1] for o in mesh.edge_opposite), dtype=int, count=E)
    gv, fv = g.values, f.values
    swap = (gv[ea] > gv[eb]) | ((gv[ea] == gv[eb]) & (ea > eb))
    u = np.where(swap, eb, ea)
    v = np.where(swap, ea, eb)
    dg = gv[v] - gv[u]
    df = fv[v] - fv[u]
    out = {}
    for wcol, store in ((w0, "s0"), (w1, "s1")):
        t1 = dg * (fv[wcol] - fv[u])
        t2 = df * (gv[wcol] - gv[u])
        cp = t1 - t2
        bound = _FILTER_EPS * (np.abs(t1) + np.abs(t2))
        sign = np.where(cp > bound, 1, np.where(cp < -bound, -1, 0))
        out[store] = sign
    s0, s1 = out["s0"], out["s1"]
    undecided = np.flatnonzero((s0 == 0) | (s1 == 0))
    for e in undecided:
        uu, vv = int(u[e]), int(v[e])
        if s0[e] == 0:
            s0[e] = _f_above_side(mesh, f, g, uu, vv, int(w0[e]))
        if s1[e] == 0:
            s1[e] = _f_above_side(mesh, f, g, uu, vv, int(w1[e]))
    jac = np.flatnonzero(s0 == s1)
    result = {}
    for e in jac:
        e = int(e)
        crit = "restricted-min" if s0[e] > 0 else "restricted-max"
        dge, dfe = float(dg[e]), float(df[e])
        lam = -(-dfe) / (-dge) if dge != 0.0 else (float("-inf") if -dfe > 0 else float("inf"))
        lam = -dfe / dge if dge != 0.0 else lam
        aligned = f.less(int(u[e]), int(v[e]))
        result[e] = JacobiEdge(e, lam, "aligned" if aligned else "anti-aligned", crit)
    return result


@dataclass
class Loop:
    edges: list  # cyclic list of edge ids
    vertices: list  # vertices[i] joins edges[i-1] and edges[i]

    def __len__(self):
        return len(self.edges)


@dataclass
class BDPoint:
    loop: int
    position: int  # index into Loop.vertices
    vertex: int


class JacobiSet:
    """Jacobi edges assembled into closed loops, with labels and BD points."""

    def __init__(self, mesh, f, g, edges, loops, f_criticals, g_criticals):
        self.mesh = mesh
        self.f = f
        self.g = g
        self.edges = edges  # edge id -> JacobiEdge
        self.loops = loops
        self.f_criticals = f_criticals  # vertex -> CriticalPoint
        self.g_criticals = g_criticals
        self.bd_points = detect_bd_points(self, g)
        self.edge_loop = {}
        for li, lp in enumerate(self.loops):
            for k, e in enumerate(lp.edges):
                self.edge_loop[e] = (li, k)

    # -- basic queries ----------------------------------------------------

    @property
    def n_loops(self):
        return len(self.loops)

    @property
    def n_bd(self):
        return len(self.bd_points)

    def edge_set(self):
        return frozenset(self.edges)

    def critical_vertices_on_set(self):
        verts = set()
        for e in self.edges:
            verts.update(self.mesh.edges[e])
        out = []
        for v in sorted(set(self.f_criticals) | set(self.g_criticals)):
            if v in verts:
                out.append(v)
        return out

    def vertex_degrees(self):
        deg = {}
        for e in self.edges:
            for v in self.mesh.edges[e]:
                deg[v] = deg.get(v, 0) + 1
        return deg

    def is_g_critical(self, v):
        return v in self.g_criticals

    def is_f_critical(self, v):
        return v in self.f_criticals

    def switch_vertices(self, loop_index):
        """Vertices of one loop where edge criticality flips."""
        lp = self.loops[loop_index]
        out = []
        m = len(lp.edges)
        for i in range(m):
            prev_e = lp.edges[i - 1]
            cur_e = lp.edges[i]
            if self.edges[prev_e].criticality != self.edges[cur_e].criticality:
                out.append((i, lp.vertices[i]))
        return out

    def validate(self):
        """Check every structural invariant; raises InvariantViolation."""
        for v, d in self.vertex_degrees().items():
            if d % 2 != 0:
                raise InvariantViolation(f"odd Jacobi degree {d} at vertex {v}")
        on_set = set(self.critical_vertices_on_set())
        for v in set(self.f_criticals) | set(self.g_criticals):
            if v not in on_set:
                raise InvariantViolation(f"critical vertex {v} off the Jacobi set")
        for li in range(self.n_loops):
            sw = self.switch_vertices(li)
            if len(sw) % 2 != 0:
                raise InvariantViolation(f"odd number of criticality switches on loop {li}")
            for i, v in sw:
                if not self.is_g_critical(v) and (li, i) not in {
                    (b.loop, b.position) for b in self.bd_points
                }:
                    raise InvariantViolation(
                        f"criticality switch at non-BD, non-g-critical vertex {v}"
                    )
            lp = self.loops[li]
            m = len(lp.edges)
            for i in range(m):
                a1 = self.edges[lp.edges[i - 1]].alignment
                a2 = self.edges[lp.edges[i]].alignment
                v = lp.vertices[i]
                if a1 != a2 and not (self.is_f_critical(v) or self.is_g_critical(v)):
                    raise InvariantViolation(
                        f"alignment switch at non-critical vertex {v}"
                    )
        return True

    # -- exports ------------------------------------------------------------

    def to_json(self):
        return {
            "loops": self.n_loops,
            "bd_points": [
                {"loop": b.loop, "position": b.position, "vertex": b.vertex}
                for b in self.bd_points
            ],
            "critical_vertices": self.critical_vertices_on_set(),
            "per_loop_lengths": [len(lp) for lp in self.loops],
            "edges": len(self.edges),
        }

    def export_obj(self, path):
        """OBJ with one `l` polyline element per loop, through loop vertices."""
        with open(path, "w") as fh:
            fh.write("# jacobi set loops\n")
            index = {}
            for lp in self.loops:
                for v in lp.vertices:
                    if v not in index:
                        index[v] = len(index) + 1
                        p = self.mesh.vertices[v]
                        fh.write(f"v {p[0]!r} {p[1]!r} {p[2]!r}\n")
            for lp in self.loops:
                ids = [str(index[v]) for v in lp.vertices]
                fh.write("l " + " ".join(ids + [ids[0]]) + "\n")

    def report_json(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _strand_matching(mesh, g, jedges, v, incident, g_crit_kind, f_critical):
    """Pair incident Jacobi edges at v into pass-through strands.

    Hard constraints: criticality flips exactly at turns (same g-side
    pairs) and at critical points of g; alignment is preserved across any
    vertex critical for neither field.  Among valid matchings prefer the
    saddle sector rule (same-side pairs join different link components),
    then lowest lexicographic order.
    """
    edges = sorted(incident)
    if len(edges) == 2:
        return [(edges[0], edges[1])]
    sides = {}
    comps = {}
    cycle = mesh.link_cycle(v)
    # link components per side, indexed by run of equal side along the cycle
    side_of = {w: g.less(v, w) for w in cycle}
    run_id = {}
    rid = 0
    first_side = side_of[cycle[0]]
    for idx, w in enumerate(cycle):
        if idx and side_of[w] != side_of[cycle[idx - 1]]:
            rid += 1
        run_id[w] = rid
    # merge the wrap-around run
    if len(cycle) > 1 and side_of[cycle[-1]] == first_side:
        last = run_id[cycle[-1]]
        for w in cycle:
            if run_id[w] == last:
                run_id[w] = 0
    for e in edges:
        a, b = mesh.edges[e]
        w = b if a == v else a
        sides[e] = side_of[w]
        comps[e] = run_id[w]

    any_critical = f_critical or g_crit_kind is not None

    def violations(matching):
        bad = 0
        pref = 0
        for e1, e2 in matching:
            same_side = sides[e1] == sides[e2]
            flip = jedges[e1].criticality != jedges[e2].criticality
            align_flip = jedges[e1].alignment != jedges[e2].alignment
            if align_flip and not any_critical:
                bad += 1
            if same_side:
                if not flip:
                    bad += 1
                if comps[e1] == comps[e2] and g_crit_kind == "saddle":
                    pref += 1
            else:
                expected_flip = g_crit_kind is not None
                if flip != expected_flip:
                    bad += 1
            if any_critical and not align_flip:
                pref += 1
        return bad, pref

    def matchings(items):
        if not items:
            yield []
            return
        first = items[0]
        for k in range(1, len(items)):
            rest = items[1:k] + items[k + 1 :]
            for m in matchings(rest):
                yield [(first, items[k])] + m

    best = None
    best_score = None
    for m in matchings(edges):
        score = violations(m) + (tuple(sorted(m)),)
        if best_score is None or score < best_score:
            best_score = score
            best = m
    return best


def assemble_loops(mesh, f, g, jedges, g_criticals, f_criticals):
    """Partition Jacobi edges into closed walks via strand matching."""
    incident = {}
    for e in jedges:
        for v in mesh.edges[e]:
            incident.setdefault(v, []).append(e)
    succ = {}
    for v, inc in sorted(incident.items()):
        if len(inc) % 2 != 0:
            raise InvariantViolation(f"odd Jacobi degree {len(inc)} at vertex {v}")
        kind = g_criticals[v].kind if v in g_criticals else None
        for e1, e2 in _strand_matching(mesh, g, jedges, v, inc, kind, v in f_criticals):
            succ[(e1, v)] = e2
            succ[(e2, v)] = e1
    loops = []
    used = set()
    for e0 in sorted(jedges):
        if e0 in used:
            continue
        a, b = mesh.edges[e0]
        enter = min(a, b)
        edges = []
        verts = []
        e, vin = e0, enter
        while True:
            used.add(e)
            edges.append(e)
            verts.append(vin)
            p, q = mesh.edges[e]
            vout = q if p == vin else p
            e_next = succ[(e, vout)]
            e, vin = e_next, vout
            if e == e0 and vin == enter:
                break
        loops.append(Loop(edges, verts))
    return loops


def detect_bd_points(js, g):
    """Positions along loops where criticality switches away from g-criticals."""
    out = []
    for li in range(js.n_loops):
        for i, v in js.switch_vertices(li):
            if not js.is_g_critical(v):
                out.append(BDPoint(li, i, v))
    return out


def extract_jacobi_set(mesh, f, g, validate=True):
    """Compute the full Jacobi set of the pair (f, g)."""
    f_crit = {c.vertex: c for c in classify_critical_points(mesh, f)}
    g_crit = {c.vertex: c for c in classify_critical_points(mesh, g)}
    shared = set(f_crit) & set(g_crit)
    if shared:
        raise NonGenericPair(f"non-generic pair: shared critical vertices {sorted(shared)}")
    jedges = _edge_tests_vectorized(mesh, f, g)
    loops = assemble_loops(mesh, f, g, jedges, g_crit, f_crit)
    js = JacobiSet(mesh, f, g, jedges, loops, f_crit, g_crit)
    if validate:
        js.validate()
    return js
