"""Acceptance checks shared by ``swe-esdg verify`` and the test-suite.

Each check returns a :class:`CheckResult`; thresholds live next to the
code that applies them.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dg import SemiDiscretization, flux_difference_x
from .fluxes import ec_surface_flux, ec_volume_flux, normal_flux
from .geometry import build_geometry, metric_identity_residual
from .physics import PhysicsParams, conserved, entropy_potential, entropy_variables
from .runner import run_problem
from .scenarios import build_scenario, curved_box_mesh, manufactured_bottom
from .spectral import operators
from .timestepping import lsrk54_step


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_short(v)}" for k, v in self.details.items())
        return f"[{status}] {self.number:2d} {self.title} ({self.seconds:.1f}s) {info}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def _timed(number, title, fn) -> CheckResult:
    t0 = time.perf_counter()
    passed, details = fn()
    return CheckResult(number, title, bool(passed), details, time.perf_counter() - t0)


def _order(values):
    return [float(np.log2(abs(values[i]) / abs(values[i + 1]))) for i in range(len(values) - 1)]


# 1 -----------------------------------------------------------------------

def check_sbp(orders=range(1, 17)):
    worst_sbp, worst_quad = 0.0, 0.0
    for N in orders:
        ops = operators(N)
        worst_sbp = max(worst_sbp, float(np.abs(ops.Q + ops.Q.T - ops.B).max()))
        for k in range(2 * N):
            exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
            worst_quad = max(worst_quad, abs(float(ops.weights @ ops.nodes**k) - exact))
    return worst_sbp <= 1e-13 and worst_quad <= 1e-12, {"sbp": worst_sbp, "quadrature": worst_quad}


# 2 -----------------------------------------------------------------------

def check_metric_identities():
    cases = {"curved_4x4_N5": (curved_box_mesh(), 5)}
    for name in ("dam_break_box", "parabolic_dam", "parabolic_dam_at_rest"):
        prob = build_scenario(name)
        cases[f"{name}_N{prob.N}"] = (prob.mesh, prob.N)
    res = {k: metric_identity_residual(build_geometry(m, operators(N)), operators(N)) for k, (m, N) in cases.items()}
    return max(res.values()) <= 1e-12, res


# 3 -----------------------------------------------------------------------

def check_free_stream(N=5, steps=100, dt=1e-3):
    prob = build_scenario("free_stream", N=N)
    geo, b, W0, semi = prob.setup()
    U0 = semi.scaled(W0)
    rhs = float(np.abs(semi.unscaled(semi(0.0, U0))).max())
    U, t = U0, 0.0
    for _ in range(steps):
        U = lsrk54_step(U, semi, t, dt)
        t += dt
    drift = float(np.abs(semi.unscaled(U) - W0).max())
    return rhs <= 1e-12 and drift <= 1e-11, {"max_rhs": rhs, "drift": drift}


# 4 -----------------------------------------------------------------------

def check_well_balanced(orders=(3, 4, 5), dt=1e-3, t_end=1.0):
    errs = {}
    for N in orders:
        for flux in ("ec", "es"):
            r = run_problem(build_scenario("lake_at_rest_discontinuous", N=N, flux=flux), t_end, dt=dt, every=10**9)
            errs[f"{flux}_N{N}"] = r.records[-1].l2H
    return max(errs.values()) <= 1e-11, errs


# 5, 6 -------------------------------------------------------------------

REPORTED_ENERGY_DT1000 = 4.79e-08


def _conservation_runs(name, dts):
    out = []
    for dt in dts:
        r = run_problem(build_scenario(name), 1.0, dt=dt, every=10**9)
        out.append({k: r.drift(k) for k in ("mass", "momx", "momy", "energy")})
    return out


def check_conservation_flat(dts=(1 / 1000, 1 / 2000, 1 / 4000)):
    runs = _conservation_runs("dam_break_flat", dts)
    mass_mom = max(abs(r[k]) for r in runs for k in ("mass", "momx", "momy"))
    energy = [r["energy"] for r in runs]
    orders = _order(energy)
    ratio = abs(energy[0]) / REPORTED_ENERGY_DT1000
    ok = mass_mom <= 1e-11 and all(abs(o - 4.0) <= 0.2 for o in orders) and 0.2 <= ratio <= 5.0
    return ok, {"mass_mom": mass_mom, "energy": energy, "orders": orders, "ratio_to_reported": ratio}


def check_conservation_bump(dts=(1 / 1000, 1 / 2000, 1 / 4000)):
    runs = _conservation_runs("dam_break_bump", dts)
    mass = max(abs(r["mass"]) for r in runs)
    energy = [r["energy"] for r in runs]
    orders = _order(energy)
    ok = mass <= 1e-11 and all(abs(o - 4.0) <= 0.2 for o in orders)
    return ok, {"mass": mass, "energy": energy, "orders": orders}


# 7 -----------------------------------------------------------------------

def convergence_study(flux, orders=range(4, 13), dt=1 / 2000, t_end=0.5):
    errs = []
    for N in orders:
        r = run_problem(build_scenario("manufactured", N=N, flux=flux), t_end, dt=dt, every=10**9)
        errs.append(r.records[-1].l2H)
    return errs


def check_spectral_convergence(orders=range(4, 13), dt=1 / 2000, t_end=0.5):
    details, ok = {}, True
    for flux in ("ec", "es"):
        errs = convergence_study(flux, orders, dt, t_end)
        decreasing = all(errs[i + 1] < errs[i] for i in range(len(errs) - 1))
        drop = errs[0] / errs[-1]
        ok = ok and decreasing and drop >= 1e4
        details[f"{flux}_errors"] = errs
        details[f"{flux}_drop"] = drop
    return ok, details


# 8 -----------------------------------------------------------------------

def random_states(rng, size, h_range=(0.1, 3.0), vel=1.5):
    h = rng.uniform(*h_range, size)
    return conserved(h, rng.uniform(-vel, vel, size), rng.uniform(-vel, vel, size))


def check_entropy_fluxes(samples=10_000, seed=0):
    rng = np.random.default_rng(seed)
    p = PhysicsParams(g=rng.uniform(0.5, 10.0))
    wL, wR = random_states(rng, samples), random_states(rng, samples)
    bL, bR = rng.uniform(-1, 1, samples), rng.uniform(-1, 1, samples)
    dq = entropy_variables(wR, bR, p) - entropy_variables(wL, bL, p)
    phL, phR = entropy_potential(wL, p), entropy_potential(wR, p)
    F = ec_volume_flux(wL, wR, p)
    vol = 0.0
    for c, Fd in enumerate((F.Fx, F.Fy)):
        mom = 0.5 * (wL[:, 1 + c] + wR[:, 1 + c])
        r = np.sum(dq * Fd, axis=-1) - (phR[c] - phL[c]) - p.g * mom * (bR - bL)
        vol = max(vol, float(np.abs(r).max()))
    # surface flux with continuous bottom
    dq0 = entropy_variables(wR, bL, p) - entropy_variables(wL, bL, p)
    S = ec_surface_flux(wL, wR, p)
    tad = max(float(np.abs(np.sum(dq0 * Fd, -1) - (phR[c] - phL[c])).max()) for c, Fd in enumerate(S))
    theta = rng.uniform(0, 2 * np.pi, samples)
    nx, ny = np.cos(theta), np.sin(theta)
    diss = np.sum(dq * (normal_flux(wL, wR, bL, bR, nx, ny, p, "ec") - normal_flux(wL, wR, bL, bR, nx, ny, p, "es")), -1)
    quad = float(diss.min())
    return vol <= 1e-11 and tad <= 1e-12 and quad >= -1e-12, {"volume_identity": vol, "tadmor": tad, "min_dissipation": quad}


# 9 -----------------------------------------------------------------------

def subcell_flux_difference(w, ma, mb, D, weights, p, volume_flux=ec_volume_flux):
    """Test oracle: flux differencing via complementary-grid fluxes, one node line ``w`` of shape ``(n, 3)``."""
    n = len(w)
    Q = weights[:, None] * D
    F = volume_flux(w[:, None, :], w[None, :, :], p)
    a = 0.5 * (ma[:, None] + ma[None, :])
    b = 0.5 * (mb[:, None] + mb[None, :])
    Ft = a[..., None] * F.Fx + b[..., None] * F.Fy
    fbar = np.zeros((n + 1, 3))
    fbar[0] = Ft[0, 0]
    fbar[n] = Ft[n - 1, n - 1]
    for i in range(1, n):
        for k in range(i, n):
            for l in range(i):  # noqa: E741
                fbar[i] += 2.0 * Q[l, k] * Ft[l, k]
    return (fbar[1:] - fbar[:-1]) / weights[:, None]


def central_volume_flux(wL, wR, p):
    from .fluxes import FluxPair
    from .physics import physical_flux_x, physical_flux_y
    return FluxPair(0.5 * (physical_flux_x(wL, p) + physical_flux_x(wR, p)),
                    0.5 * (physical_flux_y(wL, p) + physical_flux_y(wR, p)))


def check_split_form(trials=20, seed=1):
    # O(1) data so that the absolute round-off bounds are meaningful
    rng = np.random.default_rng(seed)
    p = PhysicsParams(g=1.0)
    tele, split = 0.0, 0.0
    for t in range(trials):
        N = int(rng.integers(2, 10))
        ops = operators(N)
        w = random_states(rng, N + 1, (0.5, 2.0), 1.0)
        ma, mb = rng.uniform(0.5, 1.5, N + 1), rng.uniform(-0.5, 0.5, N + 1)
        single = flux_difference_x(w, ma, -mb, ops.D, p)
        oracle = subcell_flux_difference(w, ma, mb, ops.D, ops.weights, p)
        tele = max(tele, float(np.abs(single - oracle).max()))
        cen = flux_difference_x(w, ma, -mb, ops.D, p, central_volume_flux)
        f = ma[:, None] * central_volume_flux(w, w, p).Fx + mb[:, None] * central_volume_flux(w, w, p).Fy
        fx, fy = central_volume_flux(w, w, p)
        D = ops.D
        ref = 0.5 * (D @ f + ma[:, None] * (D @ fx) + mb[:, None] * (D @ fy)
                     + fx * (D @ ma)[:, None] + fy * (D @ mb)[:, None])
        split = max(split, float(np.abs(cen - ref).max()))
    return tele <= 1e-12 and split <= 1e-11, {"telescoping": tele, "split_form": split}


# 10 ----------------------------------------------------------------------

def entropy_contraction(semi: SemiDiscretization, W) -> tuple[float, float]:
    """Returns (sum q . J dw/dt w_i w_j, scale) for one evaluation."""
    r = semi(0.0, semi.scaled(W))
    q = entropy_variables(W, semi.cache.b, semi.params)
    wts = np.outer(semi.ops.weights, semi.ops.weights)[..., None]
    scale = float(np.sum(np.abs(q * r) * wts))
    return float(np.sum(q * r * wts)), scale


def smooth_random_state(geo, rng, h0=2.0):
    x, y = geo.x, geo.y
    k = rng.uniform(0.5, 1.5, 6)
    ph = rng.uniform(0, 2 * np.pi, 6)
    h = h0 + 0.3 * np.sin(np.pi * k[0] * x + ph[0]) * np.cos(np.pi * y + ph[1])
    u = 0.5 * np.sin(np.pi * (x + y) + ph[2]) + 0.2 * np.cos(np.pi * k[3] * y + ph[3])
    v = -0.4 * np.cos(np.pi * x + ph[4]) * np.sin(np.pi * k[5] * y + ph[5])
    return conserved(h, u, v)


def check_entropy_balance(N=5, seed=2):
    rng = np.random.default_rng(seed)
    mesh = curved_box_mesh()
    geo = build_geometry(mesh, operators(N))
    W = smooth_random_state(geo, rng)
    b = 0.1 * manufactured_bottom(geo.x, geo.y)
    b[5] += 0.3  # discontinuous bottom on one element
    out, ok = {}, True
    for flux in ("ec", "es"):
        semi = SemiDiscretization(mesh, geo, b, PhysicsParams(g=1.0), flux)
        val, scale = entropy_contraction(semi, W)
        out[flux] = val
        out[f"{flux}_scale"] = scale
        ok = ok and (abs(val) <= 1e-10 * max(1.0, scale) if flux == "ec" else val <= 1e-10 * max(1.0, scale))
    return ok, out


# 11 ----------------------------------------------------------------------

def plateau_band(result, window=(4.0, 6.4), margin=1.5):
    """max - min of H behind the bore, away from the box (within ``margin`` of y = 0 or y = 10)."""
    H = result.W[..., 0] + result.bottom
    x, y = result.geo.x, result.geo.y
    m = (x >= window[0]) & (x <= window[1]) & ((y <= margin) | (y >= 10.0 - margin))
    return float(H[m].max() - H[m].min())


def check_robustness(cfl=None, parabolic_t_end=0.5):
    details, ok = {}, True
    bands = {}
    for flux in ("es", "ec"):
        prob = build_scenario("dam_break_box", flux=flux)
        try:
            r = run_problem(prob, 1.0, cfl=cfl or 0.25, every=10**9)
        except Exception as exc:  # report instead of aborting the suite
            details[f"{flux}_error"] = type(exc).__name__
            ok = False
            continue
        finite = bool(np.all(np.isfinite(r.W)))
        details[f"{flux}_minh"] = float(r.W[..., 0].min())
        ok = ok and finite and r.W[..., 0].min() > 0
        bands[flux] = plateau_band(r)
        details[f"{flux}_band"] = bands[flux]
    if len(bands) == 2:
        ok = ok and bands["es"] < bands["ec"]
    prob = build_scenario("parabolic_dam", N=3)
    try:
        r = run_problem(prob, parabolic_t_end, dt=1 / 1500, every=10**9)
        details["parabolic_minh"] = float(r.W[..., 0].min())
        ok = ok and bool(np.all(np.isfinite(r.W)))
    except Exception as exc:
        details["parabolic_error"] = type(exc).__name__
        ok = False
    return ok, details


CHECKS: dict[int, tuple[str, Callable]] = {
    1: ("SBP identity and LGL quadrature", check_sbp),
    2: ("discrete metric identities", check_metric_identities),
    3: ("free-stream preservation", check_free_stream),
    4: ("well-balanced lake at rest", check_well_balanced),
    5: ("conservation, flat bottom", check_conservation_flat),
    6: ("conservation, discontinuous bottom", check_conservation_bump),
    7: ("spectral convergence", check_spectral_convergence),
    8: ("entropy flux conditions", check_entropy_fluxes),
    9: ("telescoping and split-form equivalence", check_split_form),
    10: ("semi-discrete entropy balance", check_entropy_balance),
    11: ("ES/EC robustness contrast", check_robustness),
}


def run_check(number: int) -> CheckResult:
    title, fn = CHECKS[number]
    return _timed(number, title, fn)


def run_all(numbers=None, report=print) -> list[CheckResult]:
    results = []
    for k in numbers or sorted(CHECKS):
        res = run_check(k)
        if report is not None:
            report(res.line())
        results.append(res)
    return results
