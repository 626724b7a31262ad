"""Fixture meshes and field pairs with known Jacobi ground truth."""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from .core_mesh import TriMesh, ScalarField, save_mesh, save_field


@dataclass
class FixtureSpec:
    surface: str
    recipe: str
    params: dict
    expected: dict = dc_field(default_factory=dict)
    provenance: str = ""

    def to_json(self):
        return {
            "surface": self.surface,
            "recipe": self.recipe,
            "params": self.params,
            "expected": self.expected,
            "provenance": self.provenance,
        }


class RecipeError(ValueError):
    pass


# -- icosphere ------------------------------------------------------------

def _icosahedron():
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts[0])
    tris = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=int,
    )
    return verts, tris


def icosphere(subdiv):
    """Icosahedron with `subdiv` rounds of 1-to-4 subdivision, on the unit sphere.

    Vertices are renumbered by a sweep order, so the index tie-breaking of
    the symbolic order behaves like a clean sweep over the sphere.
    """
    verts, tris = _icosahedron()
    verts = [tuple(v) for v in verts]
    for _ in range(subdiv):
        cache = {}
        vlist = list(verts)

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            m = cache.get(key)
            if m is None:
                p = np.array(vlist[a]) + np.array(vlist[b])
                p /= np.linalg.norm(p)
                m = len(vlist)
                vlist.append(tuple(p))
                cache[key] = m
            return m

        new_tris = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_tris.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        verts = vlist
        tris = np.array(new_tris, dtype=int)
    mesh = TriMesh(np.array(verts), tris)
    from ._shelling import sweep_order

    varr = mesh.vertices
    order = sweep_order(mesh, range(mesh.n_vertices), key=lambda v: (varr[v, 2], v))
    perm = np.empty(mesh.n_vertices, dtype=int)
    perm[np.array(order)] = np.arange(mesh.n_vertices)
    return TriMesh(varr[np.array(order)], perm[tris])


def _mesh_volume(mesh):
    v = mesh.vertices
    t = mesh.triangles
    return float(np.einsum("ij,ij->i", v[t[:, 0]], np.cross(v[t[:, 1]], v[t[:, 2]])).sum() / 6.0)


# fold sites: (height, +1 max side / -1 min side); heights stay clear of
# the poles of both fields so no spurious 2D criticals appear
_WAVE_SLOTS = [(0.5, 1), (-0.5, 1), (0.45, -1), (-0.45, -1), (0.62, 1), (-0.62, 1)]


def _windowed_wave(mesh, k, amp, width=0.22, slope=1.8, half=0.22):
    """x with k tilted valleys carved across the silhouette.

    Each valley segment sweeps across the restricted-critical track as z
    varies, folding the track into an S over its z-band: one birth and
    one death point per fold, all on the original loop.
    """
    v = mesh.vertices
    x, y, z = v.T
    out = x.copy()
    for zc, side in _WAVE_SLOTS[:k]:
        psi = np.arctan2(y, x) if side > 0 else np.arctan2(-y, -x)
        u = (z - zc) / half
        wz = np.where(np.abs(u) < 1.0, np.cos(0.5 * np.pi * np.clip(u, -1, 1)) ** 2, 0.0)
        arg = psi - slope * (z - zc)
        rad2 = np.clip(1.0 - z * z, 1e-9, None)
        out -= side * amp * wz * np.exp(-(arg * arg) * rad2 / width**2)
    return out


def gen_sphere(subdiv, recipe, **params):
    """Icosphere fixtures.

    Recipes: height-xz, wavy(k, amp), noisy(seed, amp), bump(amp, width),
    bubble(amp, width).
    """
    if subdiv < 2:
        raise RecipeError("subdiv must be >= 2")
    mesh = icosphere(subdiv)
    x, y, z = mesh.vertices.T
    expected = {"genus": 0}
    provenance = ""
    g = ScalarField(z, field_id=1)

    if recipe == "height-xz":
        f = ScalarField(x, field_id=0)
        expected.update({"loops": 1, "bd_points": 0})
        provenance = "orthogonal height pair on the sphere; minimal configuration"
    elif recipe == "wavy":
        k = int(params.get("k", 3))
        amp = float(params.get("amp", _default_wavy_amp(subdiv)))
        if k == 0:
            f = ScalarField(x, field_id=0)
            expected.update({"loops": 1, "bd_points": 0})
        else:
            f = ScalarField(_windowed_wave(mesh, k, amp), field_id=0)
            expected.update({"loops": 1, "bd_points": 2 * k})
        params = {"k": k, "amp": amp}
        provenance = "k sinusoidal zig-zag folds along the silhouette; one birth-death pair each"
    elif recipe == "noisy":
        seed = int(params.get("seed", 0))
        amp = float(params.get("amp", 0.05))
        rng = np.random.default_rng(seed)
        f = ScalarField(x + amp * rng.uniform(-1, 1, mesh.n_vertices), field_id=0)
        params = {"seed": seed, "amp": amp}
        expected["fields"] = "unknown"
        provenance = "random perturbation of the height pair"
    elif recipe == "bump":
        # extra bump in g away from the poles: one spurious max + saddle of g
        amp = float(params.get("amp", 0.8))
        width = float(params.get("width", 0.5))
        center = np.array([0.0, np.sqrt(0.5), np.sqrt(0.5)])
        d2 = ((mesh.vertices - center) ** 2).sum(axis=1)
        f = ScalarField(x, field_id=0)
        g = ScalarField(z + amp * np.exp(-d2 / width**2), field_id=1)
        params = {"amp": amp, "width": width}
        expected.update({"g_criticals": 4, "isolated_pairs_g": 1})
        provenance = "one gaussian bump on g: extra saddle-maximum pair"
    elif recipe == "bubble":
        # f-bump away from the silhouette: a separate closed Jacobi loop
        amp = float(params.get("amp", 0.55))
        width = float(params.get("width", 0.42))
        center = np.array([np.sqrt(0.5), np.sqrt(0.5), 0.0])
        d2 = ((mesh.vertices - center) ** 2).sum(axis=1)
        f = ScalarField(x + amp * np.exp(-d2 / width**2), field_id=0)
        params = {"amp": amp, "width": width}
        expected.update({"loops": 2})
        provenance = "f bump off the silhouette: detached Jacobi loop with two BD points"
    else:
        raise RecipeError(f"unknown sphere recipe: {recipe}")

    spec = FixtureSpec("sphere", recipe, {"subdiv": subdiv, **params}, expected, provenance)
    return mesh, f, g, spec


def _default_wavy_amp(subdiv):
    return 0.08


# -- torus ----------------------------------------------------------------

def torus_grid(R, r, nu, nv):
    """Structured torus: theta around the tube, phi around the ring in xz."""
    verts = np.empty((nu * nv, 3))
    for i in range(nu):
        th = 2 * np.pi * i / nu
        for j in range(nv):
            ph = 2 * np.pi * j / nv
            rad = R + r * np.cos(th)
            verts[i * nv + j] = (rad * np.cos(ph), r * np.sin(th), rad * np.sin(ph))
    tris = []
    for i in range(nu):
        for j in range(nv):
            a = i * nv + j
            b = ((i + 1) % nu) * nv + j
            c = ((i + 1) % nu) * nv + (j + 1) % nv
            d = i * nv + (j + 1) % nv
            tris.append((a, b, c))
            tris.append((a, c, d))
    mesh = TriMesh(verts, np.array(tris, dtype=int))
    if _mesh_volume(mesh) < 0:
        mesh = TriMesh(verts, np.array(tris, dtype=int)[:, ::-1])
    return mesh


def gen_torus(R=2.0, r=1.0, nu=16, nv=16, recipe="height-pair", **params):
    """Torus fixtures.  Recipes: height-pair, counterexample(amp, width)."""
    if nu < 8 or nv < 8:
        raise RecipeError("resolution too coarse for recipe")
    if not (R > r > 0):
        raise RecipeError("need R > r > 0")
    mesh = torus_grid(R, r, nu, nv)
    x = mesh.vertices[:, 0]
    z = mesh.vertices[:, 2]
    g = ScalarField(z, field_id=1)
    expected = {"genus": 1}

    if recipe == "height-pair":
        f = ScalarField(x, field_id=0)
        expected.update({"loops": 2, "bd_points": 0})
        provenance = "orthogonal height pair; two silhouette loops"
        params = {}
    elif recipe == "counterexample":
        amp = float(params.get("amp", 0.9))
        width = float(params.get("width", 1.1))
        center = float(params.get("center", 0.35))
        if amp == 0.0:
            f = ScalarField(x, field_id=0)
            expected.update({"loops": 2, "bd_points": 0})
        else:
            y = mesh.vertices[:, 1]
            theta = np.arctan2(y, np.hypot(x, z) - R)
            phi = np.arctan2(z, x)
            dth = np.arctan2(np.sin(theta - center), np.cos(theta - center))
            kernel = np.where(
                np.abs(dth) < width, 0.5 * (1 + np.cos(np.pi * dth / width)), 0.0
            )
            f = ScalarField(x - amp * kernel * np.cos(phi), field_id=0)
            expected.update({"loops": 4, "valid_sequences": 0})
        params = {"amp": amp, "width": width, "center": center}
        provenance = (
            "sinusoidal kernel along the outer silhouette: valley over restricted maxima,"
            " ridge over minima, vanishing at the height criticals"
        )
    else:
        raise RecipeError(f"unknown torus recipe: {recipe}")

    spec = FixtureSpec(
        "torus", recipe, {"R": R, "r": r, "nu": nu, "nv": nv, **params}, expected, provenance
    )
    return mesh, f, g, spec


# -- double torus ---------------------------------------------------------

def _double_torus_mesh(resolution):
    from skimage import measure

    d, R, tube2 = 0.78, 1.0, 0.12
    lim = 2.6
    n = resolution
    ax = np.linspace(-lim, lim, n)
    ay = np.linspace(-1.2, 1.2, max(12, n // 2))
    az = np.linspace(-1.8, 1.8, max(16, (2 * n) // 3))
    X, Y, Z = np.meshgrid(ax, ay, az, indexing="ij")
    q = ((X - d) ** 2 + Z**2 - R**2) * ((X + d) ** 2 + Z**2 - R**2)
    F = q / 4.0 + Y**2 - tube2
    verts, faces, _, _ = measure.marching_cubes(
        F, level=0.0, spacing=(ax[1] - ax[0], ay[1] - ay[0], az[1] - az[0])
    )
    verts = verts + np.array([ax[0], ay[0], az[0]])
    mesh = TriMesh(verts, faces.astype(int))
    if _mesh_volume(mesh) < 0:
        mesh = TriMesh(verts, faces.astype(int)[:, ::-1])
    return mesh


def gen_double_torus(resolution=56, recipe="plain", **params):
    """Genus-2 fixtures.  Recipes: plain (3 loops), twisted (1 loop)."""
    mesh = _double_torus_mesh(resolution)
    x, y, z = mesh.vertices.T
    g = ScalarField(x, field_id=1)
    expected = {"genus": 2}

    if recipe == "plain":
        f = ScalarField(z, field_id=0)
        expected.update({"loops": 3})
        provenance = "silhouette configuration: genus + 1 loops"
        params = {}
    elif recipe == "twisted":
        span = float(params.get("span", 0.55))
        psi = np.clip((x + span) / (2 * span), 0.0, 1.0) * np.pi
        f = ScalarField(np.cos(psi) * z + np.sin(psi) * y, field_id=0)
        expected.update({"loops": 1})
        params = {"span": span}
        provenance = "field direction rotated half a turn across the neck: single loop"
    else:
        raise RecipeError(f"unknown double-torus recipe: {recipe}")

    spec = FixtureSpec(
        "double_torus", recipe, {"resolution": resolution, **params}, expected, provenance
    )
    return mesh, f, g, spec


GENERATORS = {"sphere": gen_sphere, "torus": gen_torus, "double_torus": gen_double_torus}


def write_fixture(outdir, mesh, f, g, spec):
    import os

    os.makedirs(outdir, exist_ok=True)
    save_mesh(mesh, os.path.join(outdir, "mesh.off"))
    save_field(f, os.path.join(outdir, "f.field"))
    save_field(g, os.path.join(outdir, "g.field"))
    with open(os.path.join(outdir, "fixture.json"), "w") as fh:
        json.dump(spec.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
