import numpy as np
import pytest

from jacoset.core_mesh import ScalarField
from jacoset.synth import icosphere, torus_grid


@pytest.fixture(scope="session")
def sphere2():
    return icosphere(2)


@pytest.fixture(scope="session")
def sphere4():
    return icosphere(4)


@pytest.fixture(scope="session")
def torus16():
    return torus_grid(2.0, 1.0, 16, 16)


def noisy_height_pair(mesh, rng, amp=0.1):
    """Random rotated height pair with bounded noise; retries until generic."""
    from jacoset.core_mesh import classify_critical_points

    v = mesh.vertices
    scale = np.abs(v).max()
    while True:
        d1 = rng.normal(size=3)
        d1 /= np.linalg.norm(d1)
        d2 = rng.normal(size=3)
        d2 /= np.linalg.norm(d2)
        f = ScalarField(v @ d1 + amp * scale * rng.uniform(-1, 1, mesh.n_vertices), 0)
        g = ScalarField(v @ d2 + amp * scale * rng.uniform(-1, 1, mesh.n_vertices), 1)
        fc = {c.vertex for c in classify_critical_points(mesh, f)}
        gc = {c.vertex for c in classify_critical_points(mesh, g)}
        if not (fc & gc):
            return f, g
