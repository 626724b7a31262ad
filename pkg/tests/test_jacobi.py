import numpy as np
import pytest

from jacoset.core_mesh import Cut, ScalarField, trace_slice
from jacoset.jacobi_extract import (
    InvariantViolation,
    NonGenericPair,
    extract_jacobi_set,
    jacobi_edge_test,
)
from jacoset.synth import gen_sphere, gen_torus, icosphere

from conftest import noisy_height_pair


def oracle_edge_test(mesh, f, g, edge):
    """Trace the actual level polyline through the edge and compare PL f
    at the two flanking samples; independent of the sign predicate."""
    a, b = mesh.edges[edge]
    u, v = (a, b) if g.less(a, b) else (b, a)
    cut = Cut.just_above(g, u)
    polys = trace_slice(mesh, g, cut)
    for poly in polys:
        for i, c in enumerate(poly.crossings):
            if c.edge == edge:
                prv = poly.crossings[i - 1]
                nxt = poly.crossings[(i + 1) % len(poly.crossings)]
                fx = f.sym_interpolate(c.below, c.above, c.s)
                fp = f.sym_interpolate(prv.below, prv.above, prv.s)
                fn = f.sym_interpolate(nxt.below, nxt.above, nxt.s)
                if fp < fx and fn < fx:
                    return "restricted-max"
                if fp > fx and fn > fx:
                    return "restricted-min"
                return None
    return None


def _numerically_generic(mesh, f, g, edge):
    a, b = mesh.edges[edge]
    w0, w1 = mesh.edge_opposite[edge]
    for field in (f, g):
        vals = [field.value(x) for x in (a, b, w0, w1)]
        if len(set(vals)) != 4:
            return False
    return True


def test_edge_test_against_oracle_minimal_sphere(sphere4):
    f = ScalarField(sphere4.vertices[:, 0], 0)
    g = ScalarField(sphere4.vertices[:, 2], 1)
    rng = np.random.default_rng(3)
    edges = rng.choice(sphere4.n_edges, size=400, replace=False)
    checked = 0
    for e in edges:
        if not _numerically_generic(sphere4, f, g, int(e)):
            continue  # exact ties: the oracle's interpolation is undefined
        checked += 1
        je = jacobi_edge_test(sphere4, f, g, int(e))
        want = oracle_edge_test(sphere4, f, g, int(e))
        assert (je.criticality if je else None) == want
    assert checked > 200
    # extracted silhouette edges carry max labels on x>0, min on x<0
    js = extract_jacobi_set(sphere4, f, g)
    labelled = 0
    for e, je in js.edges.items():
        mid = sphere4.vertices[list(sphere4.edges[e])].mean(axis=0)
        if mid[0] > 0.1:
            assert je.criticality == "restricted-max"
            labelled += 1
        elif mid[0] < -0.1:
            assert je.criticality == "restricted-min"
            labelled += 1
    assert labelled > 20


def test_edge_test_against_oracle_noisy(sphere2):
    rng = np.random.default_rng(17)
    f, g = noisy_height_pair(sphere2, rng)
    for e in range(sphere2.n_edges):
        je = jacobi_edge_test(sphere2, f, g, e)
        want = oracle_edge_test(sphere2, f, g, e)
        assert (je.criticality if je else None) == want


def test_interior_edge_not_jacobi(sphere4):
    f = ScalarField(sphere4.vertices[:, 0], 0)
    g = ScalarField(sphere4.vertices[:, 2], 1)
    # an edge well inside the front hemisphere, far from the y=0 circle
    target = np.array([0.5, 0.6, 0.2])
    best = min(
        range(sphere4.n_edges),
        key=lambda e: np.linalg.norm(
            sphere4.vertices[list(sphere4.edges[e])].mean(axis=0) - target
        ),
    )
    assert jacobi_edge_test(sphere4, f, g, best) is None


def test_degenerate_pair_rejected(sphere2):
    g = ScalarField(sphere2.vertices[:, 2], 1)
    f = ScalarField(sphere2.vertices[:, 2] + 1.0, 0)
    with pytest.raises(NonGenericPair):
        extract_jacobi_set(sphere2, f, g)


def test_minimal_sphere_structure(sphere4):
    f = ScalarField(sphere4.vertices[:, 0], 0)
    g = ScalarField(sphere4.vertices[:, 2], 1)
    js = extract_jacobi_set(sphere4, f, g)
    assert js.n_loops == 1
    assert js.n_bd == 0
    assert len(js.critical_vertices_on_set()) == 4


def test_torus_height_pair_two_loops():
    mesh, f, g, _ = gen_torus()
    js = extract_jacobi_set(mesh, f, g)
    assert js.n_loops == 2
    assert js.n_bd == 0


def test_wavy_bd_counts():
    for k in (1, 2, 3):
        mesh, f, g, spec = gen_sphere(3, "wavy", k=k)
        js = extract_jacobi_set(mesh, f, g)
        assert js.n_loops == 1
        assert js.n_bd == 2 * k
        assert js.n_bd >= 2 * k  # oracle lower bound from the fold count


def test_bd_parity_against_g_switches():
    mesh, f, g, _ = gen_sphere(3, "wavy", k=3)
    js = extract_jacobi_set(mesh, f, g)
    for li in range(js.n_loops):
        switches = js.switch_vertices(li)
        g_switches = [v for _, v in switches if js.is_g_critical(v)]
        bd_here = [b for b in js.bd_points if b.loop == li]
        assert len(switches) % 2 == 0
        assert (len(bd_here) - len(g_switches)) % 2 == 0


def test_extraction_deterministic(sphere2):
    rng = np.random.default_rng(5)
    f, g = noisy_height_pair(sphere2, rng)
    a = extract_jacobi_set(sphere2, f, g)
    b = extract_jacobi_set(sphere2, f, g)
    assert a.edge_set() == b.edge_set()
    assert [lp.edges for lp in a.loops] == [lp.edges for lp in b.loops]
    assert [(p.loop, p.position) for p in a.bd_points] == [
        (p.loop, p.position) for p in b.bd_points
    ]


def test_symmetry_same_edge_set(sphere2):
    rng = np.random.default_rng(9)
    f, g = noisy_height_pair(sphere2, rng)
    a = extract_jacobi_set(sphere2, f, g)
    b = extract_jacobi_set(sphere2, ScalarField(g.values, 0), ScalarField(f.values, 1))
    assert a.edge_set() == b.edge_set()


def test_even_degree_and_crossing_parity_random(sphere2, torus16):
    rng = np.random.default_rng(23)
    for mesh in (sphere2, torus16):
        for _ in range(20):
            f, g = noisy_height_pair(mesh, rng)
            js = extract_jacobi_set(mesh, f, g)
            for v, d in js.vertex_degrees().items():
                assert d % 2 == 0
            # regular slices cross the set evenly, half maxima half minima
            gvals = np.sort(g.values)
            for q in (0.3, 0.5, 0.7):
                t = float(gvals[int(q * len(gvals))]) + 1e-9
                polys = trace_slice(mesh, g, Cut.at_value(g, t))
                for poly in polys:
                    kinds = [
                        js.edges[c.edge].criticality
                        for c in poly.crossings
                        if c.edge in js.edges
                    ]
                    n_max = sum(1 for k in kinds if k == "restricted-max")
                    n_min = len(kinds) - n_max
                    assert len(kinds) >= 2 and len(kinds) % 2 == 0
                    assert n_max == n_min


def test_minimal_sphere_bd_free_and_wavy_detected():
    mesh, f, g, _ = gen_sphere(3, "height-xz")
    js = extract_jacobi_set(mesh, f, g)
    assert js.n_bd == 0
    mesh, f, g, _ = gen_sphere(3, "wavy", k=3)
    js = extract_jacobi_set(mesh, f, g)
    assert js.n_bd == 6


def test_obj_export(tmp_path):
    mesh, f, g, _ = gen_sphere(2, "height-xz")
    js = extract_jacobi_set(mesh, f, g)
    path = tmp_path / "loops.obj"
    js.export_obj(str(path))
    text = path.read_text()
    assert text.count("\nl ") == js.n_loops
