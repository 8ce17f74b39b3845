import numpy as np
import pytest
import sympy as sp

from swe_esdg.dg import (
    BoundarySpec,
    SemiDiscretization,
    apply_boundary_state,
    bottom_volume_contributions,
    compute_manufactured_source,
    compute_time_derivative,
    manufactured_state,
)
from swe_esdg.geometry import build_geometry
from swe_esdg.mesh import QuadMesh, generate_structured_mesh
from swe_esdg.physics import DryStateError, PhysicsParams, conserved
from swe_esdg.scenarios import box_bottom, build_scenario, curved_box_mesh
from swe_esdg.spectral import operators
from swe_esdg.verification import entropy_contraction, smooth_random_state


def weights2d(geo):
    w = geo.ops.weights
    return np.outer(w, w)[None, :, :, None]


@pytest.mark.parametrize("flux", ["ec", "es"])
@pytest.mark.parametrize("N", [2, 5])
def test_free_stream_preserved_on_curved_mesh(flux, N):
    mesh = curved_box_mesh()
    geo = build_geometry(mesh, operators(N))
    semi = SemiDiscretization(mesh, geo, np.zeros_like(geo.x), PhysicsParams(g=9.81), flux)
    W = np.broadcast_to([2.0, 0.6, -0.4], geo.x.shape + (3,))
    flux_scale = 9.81 * 2.0**2 / 2 + 2.0 * 0.3**2
    assert np.abs(semi.unscaled(semi(0.0, semi.scaled(W)))).max() <= 1e-12 * flux_scale


@pytest.mark.parametrize("flux", ["ec", "es"])
@pytest.mark.parametrize("N", [3, 4, 5])
def test_lake_at_rest_with_discontinuous_bottom(flux, N):
    problem = build_scenario("lake_at_rest_discontinuous", N=N, flux=flux)
    geo, b, W0, semi = problem.setup()
    assert np.abs(b[5]).max() > 1.0
    assert np.abs(semi(0.0, semi.scaled(W0))).max() <= 1e-12


def test_bottom_jump_only_on_discontinuous_element():
    problem = build_scenario("lake_at_rest_discontinuous", N=3)
    _, _, _, semi = problem.setup()
    inner = semi.mesh.interior_edges()
    for e, jump in zip(inner, semi.cache.edge_jump):
        touches = 5 in (e.e1, e.e2)
        assert (np.abs(jump).max() > 0) == touches


@pytest.mark.parametrize("flux", ["ec", "es"])
def test_mass_and_momentum_conserved_flat_bottom(flux):
    rng = np.random.default_rng(0)
    mesh = curved_box_mesh()
    geo = build_geometry(mesh, operators(4))
    semi = SemiDiscretization(mesh, geo, np.zeros_like(geo.x), PhysicsParams(g=1.0), flux)
    r = semi(0.0, semi.scaled(smooth_random_state(geo, rng)))
    totals = np.sum(r * weights2d(geo), axis=(0, 1, 2))
    assert np.abs(totals).max() <= 1e-12


def test_mass_conserved_with_discontinuous_bottom():
    rng = np.random.default_rng(1)
    mesh = curved_box_mesh()
    geo = build_geometry(mesh, operators(4))
    b = np.zeros_like(geo.x)
    b[5] = 0.4
    semi = SemiDiscretization(mesh, geo, b, PhysicsParams(g=1.0), "es")
    r = semi(0.0, semi.scaled(smooth_random_state(geo, rng)))
    assert abs(np.sum(r[..., 0] * weights2d(geo)[..., 0])) <= 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_entropy_conservative_and_stable(seed):
    rng = np.random.default_rng(seed)
    mesh = curved_box_mesh()
    geo = build_geometry(mesh, operators(4))
    b = 0.2 * np.sin(np.pi * geo.x) * np.cos(np.pi * geo.y)
    b[3] += 0.25
    W = smooth_random_state(geo, rng)
    ec, scale = entropy_contraction(SemiDiscretization(mesh, geo, b, PhysicsParams(g=1.0), "ec"), W)
    es, _ = entropy_contraction(SemiDiscretization(mesh, geo, b, PhysicsParams(g=1.0), "es"), W)
    assert abs(ec) <= 1e-12 * scale
    assert es < -1e-8


def test_constant_bottom_has_no_volume_source():
    mesh = curved_box_mesh()
    geo = build_geometry(mesh, operators(5))
    db = bottom_volume_contributions(np.full_like(geo.x, 3.0), geo, geo.ops.D)
    assert np.abs(db).max() <= 1e-12


def test_linear_bottom_gives_pointwise_source():
    # affine mesh: -(g/2) h db reduces to -g h J grad b
    mesh = generate_structured_mesh(3, 2, (0.0, 3.0, 0.0, 1.0))
    geo = build_geometry(mesh, operators(3))
    b = 0.5 * geo.x - 0.25 * geo.y
    db = bottom_volume_contributions(b, geo, geo.ops.D)
    np.testing.assert_allclose(db[..., 1], 2 * geo.J * 0.5, atol=1e-12)
    np.testing.assert_allclose(db[..., 2], 2 * geo.J * -0.25, atol=1e-12)


def test_wall_state_mirrors_normal_momentum():
    w = conserved(2.0, 1.0, 3.0)
    out, b = apply_boundary_state("wall", w, 0.7, normal=np.array([2.0, 0.0]))
    np.testing.assert_allclose(out, conserved(2.0, -1.0, 3.0), atol=1e-15)
    assert b == 0.7
    n = np.array([1.0, 1.0])
    out, _ = apply_boundary_state("wall", w, 0.0, normal=n)
    np.testing.assert_allclose(out[1:] @ n, -(w[1:] @ n), atol=1e-14)
    np.testing.assert_allclose(out[1:] @ [1, -1], w[1:] @ [1, -1], atol=1e-14)


def test_dirichlet_dam_box_ghost_state():
    problem = build_scenario("dam_break_box", N=2, nx=10)
    fn = problem.bc.dirichlet
    x, y = np.array([0.0, 10.0]), np.array([3.0, 3.0])
    out, b = apply_boundary_state("dirichlet", np.zeros((2, 3)), np.zeros(2), x, y, 0.0, state_fn=fn)
    np.testing.assert_allclose(out, [[3.5, 0, 0], [2.5, 0, 0]])


def test_boundary_kind_errors():
    with pytest.raises(ValueError):
        apply_boundary_state("dirichlet", np.ones(3), 0.0)
    with pytest.raises(ValueError):
        apply_boundary_state("slip", np.ones(3), 0.0)


def test_dirichlet_mesh_requires_state_function():
    mesh = curved_box_mesh(2, 2, 0.0, (False, False), ("dirichlet",) * 4)
    geo = build_geometry(mesh, operators(2))
    with pytest.raises(ValueError, match="dirichlet"):
        SemiDiscretization(mesh, geo, 0.0)


def test_invalid_flux_mode():
    mesh = curved_box_mesh(2, 2)
    with pytest.raises(ValueError):
        SemiDiscretization(mesh, build_geometry(mesh, operators(2)), 0.0, flux_mode="roe")


def test_dry_state_names_element():
    mesh = curved_box_mesh(2, 2)
    geo = build_geometry(mesh, operators(2))
    semi = SemiDiscretization(mesh, geo, 0.0)
    W = np.broadcast_to([1.0, 0.0, 0.0], geo.x.shape + (3,)).copy()
    W[2, 1, 0, 0] = -0.1
    with pytest.raises(DryStateError, match="element 2 at node \\(1, 0\\)"):
        semi(0.0, semi.scaled(W))


def test_reversed_edge_orientation_matches_aligned_mesh():
    corners = [(0, 0), (1, 0), (1, 1), (0, 1), (2, 0), (2, 1)]
    walls = {(0, 1): "wall", (3, 0): "wall", (2, 3): "wall", (1, 4): "wall", (4, 5): "wall", (5, 2): "wall"}
    aligned = QuadMesh(corners, [(0, 1, 2, 3), (1, 4, 5, 2)], boundary=walls)
    rotated = QuadMesh(corners, [(0, 1, 2, 3), (5, 2, 1, 4)], boundary=walls)
    assert rotated.interior_edges()[0].reversed
    p = PhysicsParams(g=1.0)
    out = []
    for mesh in (aligned, rotated):
        geo = build_geometry(mesh, operators(4))
        b = 0.1 * geo.x * geo.y
        W = conserved(2 + 0.2 * np.sin(3 * geo.x + geo.y), 0.3 * geo.y, -0.2 * geo.x)
        semi = SemiDiscretization(mesh, geo, b, p, "es")
        out.append(semi(0.0, semi.scaled(W)))
    # the second element of the rotated mesh is the aligned one turned by 180 degrees
    np.testing.assert_allclose(out[1][0], out[0][0], atol=1e-12)
    np.testing.assert_allclose(out[1][1], out[0][1][::-1, ::-1], atol=1e-12)


def test_compute_time_derivative_matches_call():
    problem = build_scenario("dam_break_flat", N=2, nx=2)
    geo, b, W0, semi = problem.setup()
    U = semi.scaled(W0)
    np.testing.assert_array_equal(compute_time_derivative(U, 0.0, semi), semi(0.0, U))


def _symbolic_source():
    x, y, t, g = sp.symbols("x y t g")
    H = 8 + sp.cos(x) * sp.sin(y) * sp.cos(t)
    b = 2 + sp.sin(2 * sp.pi * x) / 2 + sp.cos(2 * sp.pi * y) / 2
    h = H - b
    u, v = sp.Rational(1, 2), sp.Rational(3, 2)
    s = [
        sp.diff(h, t) + sp.diff(h * u, x) + sp.diff(h * v, y),
        sp.diff(h * u, t) + sp.diff(h * u * u + g * h * h / 2, x) + sp.diff(h * u * v, y) + g * h * sp.diff(b, x),
        sp.diff(h * v, t) + sp.diff(h * u * v, x) + sp.diff(h * v * v + g * h * h / 2, y) + g * h * sp.diff(b, y),
    ]
    return sp.lambdify((x, y, t, g), s, "numpy")


@pytest.mark.parametrize("g", [1.0, 9.81])
def test_manufactured_source_matches_symbolic_residual(g):
    oracle = _symbolic_source()
    rng = np.random.default_rng(4)
    x, y, t = rng.uniform(-1, 1, 50), rng.uniform(-1, 1, 50), rng.uniform(0, 2, 50)
    s = compute_manufactured_source(x, y, t, PhysicsParams(g=g))
    ref = np.stack(np.broadcast_arrays(*oracle(x, y, t, g)), axis=-1)
    np.testing.assert_allclose(s, ref, rtol=1e-12, atol=1e-12)


def test_manufactured_state_is_wet():
    X, Y = np.meshgrid(np.linspace(-1, 1, 41), np.linspace(-1, 1, 41))
    assert manufactured_state(X, Y, 0.3)[..., 0].min() > 4.0


def test_manufactured_residual_decays_spectrally():
    # with the exact state inserted, the residual is the truncation error
    t = 0.3
    res = []
    for N in (4, 8, 12):
        problem = build_scenario("manufactured", N=N, nx=4)
        geo, b, W0, semi = problem.setup()
        W = manufactured_state(geo.x, geo.y, t)
        exact = (-np.cos(geo.x) * np.sin(geo.y) * np.sin(t))[..., None] * np.array([1.0, 0.5, 1.5])
        res.append(np.abs(semi.unscaled(semi(t, semi.scaled(W))) - exact).max())
    assert res[0] > 100 * res[1] > 1e4 * res[2]
    assert res[2] <= 1e-4


def test_bottom_box_touches_only_centre_elements():
    mesh = generate_structured_mesh(10, 10, (0.0, 10.0, 0.0, 10.0))
    geo = build_geometry(mesh, operators(2))
    b = box_bottom(mesh, geo)
    nonzero = {k for k in range(mesh.n_elements) if np.abs(b[k]).max() > 0}
    assert nonzero == {44, 45, 54, 55}


def test_boundary_spec_is_optional_for_walls():
    assert BoundarySpec().dirichlet is None
