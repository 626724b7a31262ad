"""Triangulated 2-manifolds, PL scalar fields, critical points, level sets.

Meshes and fields are immutable after construction; every query is
read-only.  All field comparisons use the symbolic order
(value, field_id, vertex index), so no two vertices ever compare equal.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from ._sos import SymVal


class MeshError(ValueError):
    """Raised when a mesh file violates the closed-orientable contract."""


class FieldError(ValueError):
    """Raised for malformed field files or mismatched vertex counts."""


class TriMesh:
    """Closed orientable triangulated 2-manifold with full adjacency.

    Parameters
    ----------
    vertices : array_like
        (n, 3) float coordinates.
    triangles : array_like
        (m, 3) vertex indices, counterclockwise w.r.t. outward orientation.

    Attributes
    ----------
    vertices : np.ndarray
    triangles : np.ndarray
    edges : list of (u, v) sorted vertex pairs
    edge_index : dict mapping (u, v) -> edge id
    edge_tris : list of (t0, t1) incident triangle ids per edge
    edge_opposite : list of (w0, w1) opposite vertices per edge
    """

    def __init__(self, vertices, triangles):
        self.vertices = np.asarray(vertices, dtype=float)
        self.triangles = np.asarray(triangles, dtype=int)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be an (n, 3) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must be an (m, 3) array")
        n = len(self.vertices)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise MeshError("triangle index out of range")
        self._build_adjacency()
        self._validate()
        self._link_cache = {}

    # -- construction -----------------------------------------------------

    def _build_adjacency(self):
        edge_index = {}
        edges = []
        edge_tris = []
        edge_opposite = []
        edge_dirs = []
        for t, (a, b, c) in enumerate(self.triangles):
            if a == b or b == c or a == c:
                raise MeshError(f"degenerate triangle {t}")
            for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
                key = (u, v) if u < v else (v, u)
                e = edge_index.get(key)
                if e is None:
                    e = len(edges)
                    edge_index[key] = e
                    edges.append(key)
                    edge_tris.append([])
                    edge_opposite.append([])
                    edge_dirs.append([])
                edge_tris[e].append(t)
                edge_opposite[e].append(int(w))
                edge_dirs[e].append(u < v)
        self.edge_index = edge_index
        self.edges = edges
        self.edge_tris = edge_tris
        self.edge_opposite = edge_opposite
        self._edge_dirs = edge_dirs
        vert_tris = [[] for _ in range(len(self.vertices))]
        for t, tri in enumerate(self.triangles):
            for v in tri:
                vert_tris[v].append(t)
        self.vertex_tris = vert_tris

    def _validate(self):
        for e, tris in enumerate(self.edge_tris):
            u, v = self.edges[e]
            if len(tris) > 2:
                raise MeshError(f"non-manifold edge ({u}, {v})")
            if len(tris) < 2:
                raise MeshError(f"boundary edge ({u}, {v})")
            d0, d1 = self._edge_dirs[e]
            if d0 == d1:
                raise MeshError(f"inconsistent orientation at edge ({u}, {v})")
        # connectivity over the triangle adjacency graph
        if len(self.triangles):
            seen = np.zeros(len(self.triangles), dtype=bool)
            stack = [0]
            seen[0] = True
            while stack:
                t = stack.pop()
                for k in range(3):
                    a, b = self.triangles[t][k], self.triangles[t][(k + 1) % 3]
                    e = self.edge_index[(a, b) if a < b else (b, a)]
                    for t2 in self.edge_tris[e]:
                        if not seen[t2]:
                            seen[t2] = True
                            stack.append(t2)
            if not seen.all():
                raise MeshError("disconnected mesh")

    # -- queries -----------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    def edge_id(self, u, v):
        return self.edge_index[(u, v) if u < v else (v, u)]

    def link_cycle(self, v):
        """Neighbors of v in rotational (CCW) order around the vertex."""
        cached = self._link_cache.get(v)
        if cached is not None:
            return cached
        # in triangle (v, a, b) CCW, a -> b is a directed link edge
        nxt = {}
        for t in self.vertex_tris[v]:
            tri = self.triangles[t]
            i = int(np.where(tri == v)[0][0])
            a, b = int(tri[(i + 1) % 3]), int(tri[(i + 2) % 3])
            nxt[a] = b
        start = next(iter(nxt))
        cycle = [start]
        cur = nxt[start]
        while cur != start:
            cycle.append(cur)
            cur = nxt[cur]
        if len(cycle) != len(nxt):
            raise MeshError(f"non-manifold vertex {v}")
        self._link_cache[v] = cycle
        return cycle

    def triangle_area(self, t):
        return float(self.triangle_areas()[t])

    def triangle_areas(self):
        cached = getattr(self, "_areas", None)
        if cached is None:
            v = self.vertices
            t = self.triangles
            n = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
            cached = 0.5 * np.linalg.norm(n, axis=1)
            self._areas = cached
        return cached

    def pl_gradients(self, values):
        """Tangential PL gradients on every triangle, shape (m, 3)."""
        v = self.vertices
        t = self.triangles
        values = np.asarray(values, dtype=float)
        p, q, r = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        n = np.cross(q - p, r - p)
        nn = np.linalg.norm(n, axis=1, keepdims=True)
        nn = np.where(nn == 0, 1.0, nn)
        nhat = n / nn
        g = (
            values[t[:, 0], None] * np.cross(nhat, r - q)
            + values[t[:, 1], None] * np.cross(nhat, p - r)
            + values[t[:, 2], None] * np.cross(nhat, q - p)
        )
        return g / nn

    def pl_gradient(self, t, values):
        """Tangential gradient of the PL interpolant on triangle t."""
        a, b, c = self.triangles[t]
        p, q, r = self.vertices[a], self.vertices[b], self.vertices[c]
        n = np.cross(q - p, r - p)
        area2 = np.linalg.norm(n)
        if area2 == 0:
            return np.zeros(3)
        n = n / area2
        # gradient from edge rotations: sum f_i * (n x opposite edge) / (2A)
        g = (
            values[a] * np.cross(n, r - q)
            + values[b] * np.cross(n, p - r)
            + values[c] * np.cross(n, q - p)
        )
        return g / area2


def genus(mesh):
    """Genus from the Euler characteristic; errors on non-surface counts."""
    chi = mesh.euler_characteristic()
    num = 2 - chi
    if num < 0 or num % 2 != 0:
        raise MeshError("not a closed orientable surface")
    return num // 2


class ScalarField:
    """Per-vertex real values inducing a PL function.

    field_id feeds the symbolic perturbation: ties across vertices are
    broken by (value, field_id, vertex index).
    """

    def __init__(self, values, field_id=0):
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != 1:
            raise FieldError("field values must be a flat list")
        self.field_id = int(field_id)

    def __len__(self):
        return len(self.values)

    def value(self, v):
        return float(self.values[v])

    def key(self, v):
        return (float(self.values[v]), self.field_id, int(v))

    def less(self, u, v):
        """u < v under the symbolic order."""
        return (self.values[u], u) < (self.values[v], v)

    def sym_at_vertex(self, v):
        return SymVal.at_vertex(self.values, self.field_id, int(v))

    def sym_interpolate(self, u, v, s):
        return SymVal.interpolate(self.values, self.field_id, int(u), int(v), s)

    def with_values(self, values):
        return ScalarField(values, self.field_id)

    def next_value_above(self, t):
        """Smallest field value strictly greater than t, or None."""
        import bisect

        su = getattr(self, "_sorted_unique", None)
        if su is None:
            su = np.unique(self.values)
            self._sorted_unique = su
        i = bisect.bisect_right(su, t)
        return float(su[i]) if i < len(su) else None

    def check_total_order(self):
        keys = [self.key(v) for v in range(len(self.values))]
        return len(set(keys)) == len(keys)


class Cut:
    """A level of g positioned symbolically between vertex values.

    ``just_above(v)`` sits infinitesimally above vertex v: a vertex w is
    above the cut iff (g(w), w) > (g(v), v).  ``at_value(t)`` is the plain
    query level t + 0+, so vertices with g == t count as below.
    """

    __slots__ = ("field", "t", "anchor")

    def __init__(self, field, t, anchor):
        self.field = field
        self.t = t
        self.anchor = anchor

    @classmethod
    def just_above(cls, field, v):
        """Cut through the gap above v: symbolic position just past v,
        numeric level at the midpoint of the value gap."""
        gv = float(field.values[v])
        nxt = field.next_value_above(gv)
        if nxt is None:
            t = Fraction(gv) + 1
        else:
            t = (Fraction(gv) + Fraction(nxt)) / 2
        return cls(field, t, int(v))

    @classmethod
    def at_value(cls, field, t):
        return cls(field, Fraction(float(t)), None)

    def is_above(self, w):
        gv = float(self.field.values[w])
        if self.anchor is None:
            return gv > self.t
        ga = float(self.field.values[self.anchor])
        return (gv, w) > (ga, self.anchor)

    def crossing_param(self, p, q):
        """Fraction s such that the cut crosses edge (p, q) at p + s(q - p).

        p must be below and q above.
        """
        gp = Fraction(float(self.field.values[p]))
        gq = Fraction(float(self.field.values[q]))
        if gq == gp:
            return Fraction(1, 2)
        s = (self.t - gp) / (gq - gp)
        if s < 0:
            return Fraction(0)
        if s > 1:
            return Fraction(1)
        return s


@dataclass
class Crossing:
    """One intersection of a cut with a mesh edge."""

    edge: int
    below: int
    above: int
    s: Fraction
    point: np.ndarray = dc_field(repr=False, default=None)

    def key(self):
        return (self.edge, self.s)


@dataclass
class LevelPolyline:
    """Closed component of a level set as an ordered crossing list."""

    crossings: list
    closed: bool = True

    def __len__(self):
        return len(self.crossings)

    def points(self):
        return np.array([c.point for c in self.crossings])


def _triangle_crossing_edges(mesh, tri, above):
    """(entry, exit) edges for the level segment inside one triangle.

    Ordered so that the above side lies to the left of travel, w.r.t. the
    outward orientation.
    """
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


def trace_slice(mesh, field, cut):
    """All closed polylines of the cut's level set, oriented above-on-left."""
    above_cache = {}

    def above(v):
        r = above_cache.get(v)
        if r is None:
            r = cut.is_above(v)
            above_cache[v] = r
        return r

    entry_tri = {}
    exits = {}
    active = []
    for t, tri in enumerate(mesh.triangles):
        ee = _triangle_crossing_edges(mesh, tri, above)
        if ee is None:
            continue
        (en_u, en_v), (ex_u, ex_v) = ee
        e_in = mesh.edge_id(en_u, en_v)
        e_out = mesh.edge_id(ex_u, ex_v)
        entry_tri[e_in] = t
        exits[t] = e_out
        active.append(e_in)

    def make_crossing(e):
        u, v = mesh.edges[e]
        if above(u):
            below_v, above_v = v, u
        else:
            below_v, above_v = u, v
        s = cut.crossing_param(below_v, above_v)
        pt = (1 - float(s)) * mesh.vertices[below_v] + float(s) * mesh.vertices[above_v]
        return Crossing(e, below_v, above_v, s, pt)

    polylines = []
    visited = set()
    for e0 in sorted(active):
        if e0 in visited:
            continue
        chain = []
        e = e0
        while True:
            visited.add(e)
            chain.append(make_crossing(e))
            t = entry_tri[e]
            e_next = exits[t]
            # hop to the neighbor triangle where e_next is the entry
            e = e_next
            if e == e0:
                break
        polylines.append(LevelPolyline(chain))
    return polylines


def trace_level_set(mesh, field, t):
    """Level set of the PL field at value t (symbolically t + 0+)."""
    vals = field.values
    if len(vals) and (t >= vals.max() or t < vals.min()):
        return []
    return trace_slice(mesh, field, Cut.at_value(field, t))


@dataclass
class CriticalPoint:
    vertex: int
    kind: str  # minimum | saddle | maximum
    multiplicity: int = 1

    @property
    def index_contribution(self):
        if self.kind == "saddle":
            return -self.multiplicity
        return 1


def classify_vertex(mesh, field, v):
    """Lower-link classification of one vertex; None when regular."""
    cycle = mesh.link_cycle(v)
    signs = [1 if field.less(v, w) else -1 for w in cycle]
    alt = sum(1 for i in range(len(signs)) if signs[i] != signs[i - 1])
    if alt == 0:
        return CriticalPoint(v, "maximum" if signs[0] < 0 else "minimum")
    if alt == 2:
        return None
    return CriticalPoint(v, "saddle", (alt - 2) // 2)


def classify_critical_points(mesh, field):
    """All non-regular vertices, multi-saddles with multiplicity."""
    out = []
    for v in range(mesh.n_vertices):
        cp = classify_vertex(mesh, field, v)
        if cp is not None:
            out.append(cp)
    return out


# -- file formats ---------------------------------------------------------

FIELD_MAGIC = "jacoset-field"


def load_mesh(path):
    """Read an OFF file and validate the closed-orientable contract."""
    if not os.path.exists(path):
        raise MeshError(f"no such file: {path}")
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError(f"unparseable file (missing OFF header): {path}")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4
        verts = []
        for _ in range(nv):
            verts.append([float(x) for x in tokens[pos : pos + 3]])
            pos += 3
        tris = []
        for _ in range(nf):
            cnt = int(tokens[pos])
            if cnt != 3:
                raise MeshError(f"non-triangular face with {cnt} vertices")
            tris.append([int(x) for x in tokens[pos + 1 : pos + 4]])
            pos += 1 + cnt
    except (ValueError, IndexError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"unparseable file: {path}") from exc
    return TriMesh(np.array(verts), np.array(tris, dtype=int))


def save_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles} {mesh.n_edges}\n")
        for p in mesh.vertices:
            fh.write(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}\n")
        for t in mesh.triangles:
            fh.write(f"3 {int(t[0])} {int(t[1])} {int(t[2])}\n")


def load_field(path, field_id=0, expected_count=None):
    """Read a `jacoset-field v1` file; one decimal value per line."""
    if not os.path.exists(path):
        raise FieldError(f"no such file: {path}")
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != FIELD_MAGIC or header[1] != "v1":
            raise FieldError(f"bad field header in {path}")
        count = int(header[2])
        values = [float(fh.readline()) for _ in range(count)]
    if expected_count is not None and count != expected_count:
        raise FieldError(f"field has {count} values, mesh has {expected_count} vertices")
    return ScalarField(values, field_id)


def save_field(field, path):
    with open(path, "w") as fh:
        fh.write(f"{FIELD_MAGIC} v1 {len(field)}\n")
        for x in field.values:
            fh.write(f"{float(x)!r}\n")
