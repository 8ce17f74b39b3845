import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swe_esdg.config import ConfigError, ScenarioConfig, load_config, parse_config
from swe_esdg.diagnostics import DiagnosticsRecord, compute_totals, l2_error, potential_vorticity
from swe_esdg.geometry import build_geometry
from swe_esdg.io import diagnostics_csv, read_field, write_diagnostics, write_field
from swe_esdg.mesh import generate_structured_mesh
from swe_esdg.physics import DryStateError, PhysicsParams, conserved
from swe_esdg.runner import run_problem
from swe_esdg.scenarios import SCENARIOS, UnknownScenarioError, build_scenario, curved_box_mesh
from swe_esdg.spectral import operators


def curved_geo(N=4):
    return build_geometry(curved_box_mesh(), operators(N))


def test_lake_at_rest_totals():
    geo = curved_geo()
    W = conserved(np.ones_like(geo.x), 0.0, 0.0)
    rec = compute_totals(W, geo, 0.0, PhysicsParams(g=1.0))
    assert rec.mass == pytest.approx(4.0, abs=1e-13)
    assert rec.momx == 0.0 and rec.momy == 0.0
    assert rec.energy == pytest.approx(2.0, abs=1e-13)
    assert rec.minh == 1.0


def test_dam_break_initial_mass():
    geo, b, W0, _ = build_scenario("dam_break_flat").setup()
    assert compute_totals(W0, geo, b, PhysicsParams(g=1.0)).mass == pytest.approx(18.0, abs=1e-12)


def test_manufactured_initial_mass_matches_integral():
    # the integral of H - b over [-1, 1]^2: 32 - 8, the oscillating parts vanish
    errs = []
    for N in (6, 12):
        geo, b, W0, _ = build_scenario("manufactured", N=N).setup()
        errs.append(abs(compute_totals(W0, geo, b, PhysicsParams(g=1.0)).mass - 24.0))
    assert errs[0] <= 1e-6
    assert errs[1] <= 1e-12


def test_totals_reject_dry_state():
    geo = curved_geo(2)
    W = conserved(np.zeros_like(geo.x), 0.0, 0.0)
    with pytest.raises(DryStateError):
        compute_totals(W, geo, 0.0, PhysicsParams())


def test_l2_error_zero_and_offset():
    geo = curved_geo()
    ref = lambda x, y, t: 3.0 + np.sin(x) * y  # noqa: E731
    W = conserved(ref(geo.x, geo.y, 0.0) - 0.5, 0.0, 0.0)
    assert l2_error(W, geo, ref, 0.0, "H", 0.5) <= 1e-14
    assert l2_error(W, geo, ref, 0.0, "H", 0.5 + 1e-3) == pytest.approx(1e-3 * 2.0, rel=1e-10)
    assert l2_error(W, geo, lambda x, y, t: 0.0 * x, quantity="hu") == 0.0
    with pytest.raises(ValueError):
        l2_error(W, geo, ref, quantity="energy")


def test_potential_vorticity_rest_and_rigid_rotation():
    geo = build_geometry(generate_structured_mesh(3, 3, (0.0, 2.0, -1.0, 0.5)), operators(3))
    rest = conserved(np.full_like(geo.x, 2.0), 0.0, 0.0)
    assert np.abs(potential_vorticity(rest, geo, geo.ops)).max() == 0.0
    omega = 0.7
    W = conserved(np.ones_like(geo.x), -omega * geo.y, omega * geo.x)
    np.testing.assert_allclose(potential_vorticity(W, geo, geo.ops), 2 * omega, atol=1e-11)


def test_rigid_rotation_on_curved_mesh():
    geo = curved_geo(5)
    W = conserved(np.full_like(geo.x, 2.0), -geo.y, geo.x)
    np.testing.assert_allclose(potential_vorticity(W, geo, geo.ops), 1.0, atol=1e-11)


def test_gravity_wave_has_no_vorticity_once_resolved():
    # exact vorticity is zero; the discrete value is interpolation error and decays spectrally
    vals = []
    for N, nx in ((3, 20), (6, 20), (9, 20)):
        geo, b, W0, _ = build_scenario("gravity_wave", N=N, nx=nx).setup()
        vals.append(np.abs(potential_vorticity(W0, geo, geo.ops)).max())
    assert vals[0] > 100 * vals[1] > 1e4 * vals[2]
    assert vals[2] <= 1e-10


def test_potential_vorticity_rejects_dry_state():
    geo = curved_geo(2)
    with pytest.raises(DryStateError):
        potential_vorticity(conserved(np.zeros_like(geo.x), 0.0, 0.0), geo, geo.ops, PhysicsParams())


def test_record_row_format():
    rec = DiagnosticsRecord(0.5, 1 / 3, 0.0, -1.0, 2.0, 0.25)
    assert DiagnosticsRecord.header() == "t,mass,momx,momy,energy,minh,l2H"
    assert rec.row() == "0.5,0.33333333333333331,0,-1,2,0.25,nan"


def test_empty_run_writes_one_row(tmp_path):
    result = run_problem(build_scenario("free_stream", N=2), t_end=0.0, dt=1e-3)
    path = write_diagnostics(result.records, tmp_path / "d.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("0,")


def test_runs_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        result = run_problem(build_scenario("dam_break_bump", N=3), t_end=0.005, dt=1e-3)
        write_diagnostics(result.records, tmp_path / f"d{k}.csv")
        write_field(result.W, result.geo, result.bottom, result.t, tmp_path / f"f{k}.txt")
        outs.append(((tmp_path / f"d{k}.csv").read_bytes(), (tmp_path / f"f{k}.txt").read_bytes()))
    assert outs[0] == outs[1]


def test_field_round_trip(tmp_path):
    geo, b, W0, _ = build_scenario("lake_at_rest_discontinuous", N=2).setup()
    path = write_field(W0, geo, b, 0.125, tmp_path / "field.txt")
    t, data = read_field(path)
    assert t == 0.125
    assert data.shape == (16, 9, 6)
    np.testing.assert_array_equal(data[3, :, 2:5], W0[3].reshape(-1, 3))
    np.testing.assert_array_equal(data[5, :, 5], b[5].ravel())
    np.testing.assert_array_equal(data[7, :, 0], geo.x[7].ravel())


def test_unwritable_path_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        write_diagnostics([], blocker / "sub" / "d.csv")


def test_csv_text():
    text = diagnostics_csv([DiagnosticsRecord(0.0, 1.0, 0.0, 0.0, 1.0, 1.0)])
    assert text == "t,mass,momx,momy,energy,minh,l2H\n0,1,0,0,1,1,nan\n"


# -- configuration ---------------------------------------------------------

@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_default_configs_round_trip(name):
    cfg = ScenarioConfig.defaults(name)
    again = parse_config(cfg.to_ini())
    assert again == cfg
    assert again.to_ini() == cfg.to_ini()


@settings(max_examples=50, deadline=None)
@given(name=st.sampled_from(sorted(SCENARIOS)), n=st.integers(1, 12), g=st.floats(0.1, 20.0),
       flux=st.sampled_from(["ec", "es"]), step=st.floats(1e-5, 1.0), use_cfl=st.booleans(),
       t_end=st.floats(0.0, 10.0), every=st.integers(1, 100), fields=st.booleans())
def test_config_round_trip_property(name, n, g, flux, step, use_cfl, t_end, every, fields):
    cfg = ScenarioConfig.defaults(name).override(
        n=n, g=g, flux=flux, t_end=t_end, every=every, fields=fields, **({"cfl": step} if use_cfl else {"dt": step}))
    assert parse_config(cfg.to_ini()) == cfg


def test_partial_config_takes_defaults(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[scenario]\nname = gravity_wave\n[time]\ndt = 0.001\n")
    cfg = load_config(path)
    assert cfg.n == 3 and cfg.dt == 0.001 and cfg.cfl is None


@pytest.mark.parametrize("text, match", [
    ("[scenario]\nname = x\n", "unknown scenario"),
    ("[solver]\nn = 3\n", "missing"),
    ("[scenario]\nname = free_stream\n[extra]\na = 1\n", "unknown section"),
    ("[scenario]\nname = free_stream\n[solver]\ncfl = 1\n", "unknown key"),
    ("[scenario]\nname = free_stream\n[solver]\nn = three\n", "cannot parse"),
    ("[scenario]\nname = free_stream\n[solver]\nflux = lax\n", "flux"),
    ("[scenario]\nname = free_stream\n[time]\ndt = -1\n", "positive"),
    ("not an ini file", "malformed"),
])
def test_bad_configs(text, match):
    with pytest.raises((ConfigError, UnknownScenarioError), match=match):
        parse_config(text)


def test_unknown_scenario():
    with pytest.raises(UnknownScenarioError):
        build_scenario("tsunami")


# -- scenarios -------------------------------------------------------------

def test_discontinuous_bump_on_sixth_element():
    geo, b, W0, _ = build_scenario("lake_at_rest_discontinuous").setup()
    nonzero = [k for k in range(16) if np.abs(b[k]).max() > 0]
    assert nonzero == [5]
    c = curved_box_mesh().centroids()[5]
    assert -0.5 < c[0] < 0 and -0.5 < c[1] < 0
    np.testing.assert_allclose(W0[..., 0] + b, 5.0, atol=1e-14)


def test_dam_break_split_on_interface():
    geo, b, W0, _ = build_scenario("dam_break_flat").setup()
    c = curved_box_mesh().centroids()
    for k in range(16):
        np.testing.assert_array_equal(W0[k, ..., 0], 5.0 if c[k, 0] < 0 else 4.0)


def test_parabolic_dam_layout():
    problem = build_scenario("parabolic_dam")
    mesh = problem.mesh
    kinds = {}
    for e in mesh.edges:
        kinds[e.kind] = kinds.get(e.kind, 0) + 1
    assert kinds["dirichlet"] == 2 * 40 and kinds["periodic"] == 40
    # the dam column of 40 element sides is wall except the 4 sides of the breach
    assert kinds["wall"] == 2 * (40 - 4)
    geo, b, W0, _ = problem.setup()
    H = W0[..., 0] + b
    assert set(np.unique(np.round(H, 12))) == {5.0, 10.0}


def test_gravity_wave_scenario_matches_formula():
    geo, b, W0, _ = build_scenario("gravity_wave").setup()
    k, l = 4 * math.pi, math.pi  # noqa: E741
    om = math.sqrt(k * k + l * l)
    h = 1 + 0.1 * np.sin(l * geo.y) * np.sin(k * geo.x)
    np.testing.assert_allclose(W0[..., 0], h, atol=1e-15)
    np.testing.assert_allclose(W0[..., 2] / W0[..., 0], l * 0.1 / om * np.cos(l * geo.y) * np.cos(k * geo.x), atol=1e-15)
