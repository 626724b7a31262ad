import numpy as np
import pytest

from jacoset.core_mesh import classify_critical_points, genus, load_field, load_mesh
from jacoset.jacobi_extract import extract_jacobi_set
from jacoset.synth import RecipeError, gen_sphere, gen_torus, write_fixture


def test_sphere_height_fixture():
    mesh, f, g, spec = gen_sphere(4, "height-xz")
    assert genus(mesh) == 0
    assert spec.expected["loops"] == 1
    js = extract_jacobi_set(mesh, f, g)
    assert js.n_loops == spec.expected["loops"]
    assert js.n_bd == spec.expected["bd_points"]


def test_wavy_zero_is_height():
    m1, f1, g1, _ = gen_sphere(3, "height-xz")
    m2, f2, g2, _ = gen_sphere(3, "wavy", k=0)
    assert np.array_equal(f1.values, f2.values)
    assert np.array_equal(g1.values, g2.values)


def test_wavy_expected_counts_confirmed():
    for k in (1, 2, 3):
        mesh, f, g, spec = gen_sphere(3, "wavy", k=k)
        js = extract_jacobi_set(mesh, f, g)
        assert js.n_loops == spec.expected["loops"]
        assert js.n_bd == spec.expected["bd_points"]


def test_torus_recipes():
    mesh, f, g, spec = gen_torus()
    assert genus(mesh) == 1
    js = extract_jacobi_set(mesh, f, g)
    assert (js.n_loops, js.n_bd) == (2, 0)
    with pytest.raises(RecipeError, match="too coarse"):
        gen_torus(nu=4, nv=16)
    mesh, f, g, spec = gen_torus(recipe="counterexample", amp=0.0)
    js = extract_jacobi_set(mesh, f, g)
    assert js.n_loops == 2


def test_noisy_recipe_seeded():
    m1, f1, _, _ = gen_sphere(3, "noisy", seed=4)
    m2, f2, _, _ = gen_sphere(3, "noisy", seed=4)
    assert np.array_equal(f1.values, f2.values)
    _, f3, _, _ = gen_sphere(3, "noisy", seed=5)
    assert not np.array_equal(f1.values, f3.values)


def test_subdiv_too_small():
    with pytest.raises(RecipeError):
        gen_sphere(1, "height-xz")


def test_write_fixture_roundtrip(tmp_path):
    mesh, f, g, spec = gen_sphere(2, "height-xz")
    write_fixture(str(tmp_path), mesh, f, g, spec)
    back = load_mesh(str(tmp_path / "mesh.off"))
    assert back.n_vertices == mesh.n_vertices
    fb = load_field(str(tmp_path / "f.field"), 0, mesh.n_vertices)
    assert np.array_equal(fb.values, f.values)
    assert (tmp_path / "fixture.json").exists()


def test_generated_fields_generic():
    for recipe, kw in (("height-xz", {}), ("wavy", {"k": 2}), ("bump", {}), ("bubble", {})):
        mesh, f, g, _ = gen_sphere(3, recipe, **kw)
        fc = {c.vertex for c in classify_critical_points(mesh, f)}
        gc = {c.vertex for c in classify_critical_points(mesh, g)}
        assert not (fc & gc)
