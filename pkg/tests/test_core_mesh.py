import numpy as np
import pytest

from jacoset.core_mesh import (
    Cut,
    MeshError,
    ScalarField,
    TriMesh,
    classify_critical_points,
    genus,
    load_field,
    load_mesh,
    save_field,
    save_mesh,
    trace_level_set,
)
from jacoset.synth import icosphere, torus_grid

ICOSAHEDRON_OFF = """OFF
12 20 30
0.0 1.618 1.0
0.0 -1.618 1.0
0.0 1.618 -1.0
0.0 -1.618 -1.0
1.0 0.0 1.618
-1.0 0.0 1.618
1.0 0.0 -1.618
-1.0 0.0 -1.618
1.618 1.0 0.0
-1.618 1.0 0.0
1.618 -1.0 0.0
-1.618 -1.0 0.0
3 0 5 4
3 0 4 8
3 0 8 2
3 0 2 9
3 0 9 5
3 1 4 5
3 1 10 4
3 1 3 10
3 1 11 3
3 1 5 11
3 2 6 7
3 2 8 6
3 2 7 9
3 3 6 10
3 3 7 6
3 3 11 7
3 4 10 8
3 5 9 11
3 6 8 10
3 7 11 9
"""


def brute_force_classify(mesh, field):
    """Independent oracle: component counts of upper and lower link graphs."""
    out = {}
    for v in range(mesh.n_vertices):
        nbrs = set()
        link_edges = set()
        for t in mesh.vertex_tris[v]:
            tri = [int(x) for x in mesh.triangles[t]]
            others = [x for x in tri if x != v]
            nbrs.update(others)
            link_edges.add(tuple(sorted(others)))

        def components(subset):
            subset = set(subset)
            comps = 0
            while subset:
                comps += 1
                stack = [subset.pop()]
                while stack:
                    a = stack.pop()
                    for b, c in link_edges:
                        for x, y in ((b, c), (c, b)):
                            if x == a and y in subset:
                                subset.remove(y)
                                stack.append(y)
            return comps

        lower = [w for w in nbrs if (field.values[w], w) < (field.values[v], v)]
        upper = [w for w in nbrs if (field.values[w], w) > (field.values[v], v)]
        nl, nu = components(lower), components(upper)
        if nl == 0 and nu == 0:
            raise AssertionError("isolated vertex")
        if nl == 0:
            out[v] = ("minimum", 1)
        elif nu == 0:
            out[v] = ("maximum", 1)
        elif nl >= 2:
            out[v] = ("saddle", nl - 1)
        elif nu >= 2:
            out[v] = ("saddle", nu - 1)
    return out


def test_icosahedron_off(tmp_path):
    path = tmp_path / "ico.off"
    path.write_text(ICOSAHEDRON_OFF)
    mesh = load_mesh(str(path))
    assert mesh.n_vertices == 12
    assert mesh.n_edges == 30
    assert mesh.n_triangles == 20
    assert genus(mesh) == 0


def test_missing_triangle_is_boundary_error(tmp_path):
    lines = ICOSAHEDRON_OFF.strip().splitlines()
    broken = [lines[0], "12 19 30"] + lines[2:-1]  # drop the last face
    path = tmp_path / "broken.off"
    path.write_text("\n".join(broken) + "\n")
    with pytest.raises(MeshError, match="boundary edge"):
        load_mesh(str(path))


def test_unparseable_file(tmp_path):
    path = tmp_path / "junk.off"
    path.write_text("not a mesh\n")
    with pytest.raises(MeshError, match="unparseable"):
        load_mesh(str(path))


def test_inconsistent_orientation():
    tris = np.array([[0, 1, 2], [0, 1, 3], [0, 3, 2], [3, 1, 2]])
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    with pytest.raises(MeshError, match="orientation"):
        TriMesh(verts, tris)


def test_torus_grid_counts():
    mesh = torus_grid(2.0, 1.0, 16, 16)
    assert mesh.n_vertices == 256
    assert mesh.n_edges == 768
    assert mesh.n_triangles == 512
    assert genus(mesh) == 1


def test_mesh_roundtrip(tmp_path, sphere2):
    path = tmp_path / "s.off"
    save_mesh(sphere2, str(path))
    back = load_mesh(str(path))
    assert np.array_equal(back.triangles, sphere2.triangles)
    assert np.allclose(back.vertices, sphere2.vertices)


def test_field_roundtrip(tmp_path, sphere2):
    f = ScalarField(sphere2.vertices[:, 0], 0)
    path = tmp_path / "f.field"
    save_field(f, str(path))
    back = load_field(str(path), 0, sphere2.n_vertices)
    assert np.array_equal(back.values, f.values)


def test_classify_height_on_sphere(sphere2):
    f = ScalarField(sphere2.vertices[:, 2], 1)
    cps = classify_critical_points(sphere2, f)
    kinds = sorted(c.kind for c in cps)
    assert kinds == ["maximum", "minimum"]


def test_classify_height_on_torus_matches_oracle(torus16):
    f = ScalarField(torus16.vertices[:, 2], 1)
    cps = {c.vertex: (c.kind, c.multiplicity) for c in classify_critical_points(torus16, f)}
    assert sorted(k for k, _ in cps.values()) == ["maximum", "minimum", "saddle", "saddle"]
    assert cps == brute_force_classify(torus16, f)


def test_classify_constant_field(sphere2):
    f = ScalarField(np.zeros(sphere2.n_vertices), 0)
    cps = classify_critical_points(sphere2, f)
    kinds = sorted(c.kind for c in cps)
    assert kinds == ["maximum", "minimum"]
    oracle = brute_force_classify(sphere2, f)
    assert {c.vertex: (c.kind, c.multiplicity) for c in cps} == oracle


def test_morse_sum_random_fields(sphere2, torus16):
    rng = np.random.default_rng(11)
    for mesh in (sphere2, torus16):
        chi = mesh.euler_characteristic()
        for _ in range(100):
            f = ScalarField(rng.normal(size=mesh.n_vertices), 0)
            total = sum(c.index_contribution for c in classify_critical_points(mesh, f))
            assert total == chi


def test_level_set_sphere(sphere2):
    g = ScalarField(sphere2.vertices[:, 2], 1)
    polys = trace_level_set(sphere2, g, 0.0)
    assert len(polys) == 1
    assert polys[0].closed
    # above side (north) on the left means CCW seen from +z
    pts = polys[0].points()
    area2 = np.cross(pts, np.roll(pts, -1, axis=0))[:, 2].sum()
    assert area2 > 0


def test_level_set_above_max_empty(sphere2):
    g = ScalarField(sphere2.vertices[:, 2], 1)
    assert trace_level_set(sphere2, g, 2.0) == []


def test_level_set_torus_between_saddles(torus16):
    g = ScalarField(torus16.vertices[:, 2], 1)
    polys = trace_level_set(torus16, g, 0.5)
    assert len(polys) == 2
    assert all(p.closed for p in polys)


def test_level_set_triangle_crossing_parity(sphere2):
    g = ScalarField(sphere2.vertices[:, 2], 1)
    for t in (-0.63, 0.1, 0.9):
        polys = trace_level_set(sphere2, g, t)
        seen = {}
        for p in polys:
            for c in p.crossings:
                seen[c.edge] = seen.get(c.edge, 0) + 1
        assert all(v == 1 for v in seen.values())
        # per-triangle crossing count is 0 or 2
        per_tri = {}
        cut = Cut.at_value(g, t)
        for e in seen:
            for tri in sphere2.edge_tris[e]:
                per_tri[tri] = per_tri.get(tri, 0) + 1
        assert set(per_tri.values()) <= {2}


def test_symbolic_order_is_strict_total_order():
    vals = np.array([0.5, 0.5, -1.0, 0.5, -1.0])
    f = ScalarField(vals, 0)
    n = len(vals)
    for u in range(n):
        assert not f.less(u, u)
        for v in range(n):
            if u != v:
                assert f.less(u, v) != f.less(v, u)
            for w in range(n):
                if f.less(u, v) and f.less(v, w):
                    assert f.less(u, w)
