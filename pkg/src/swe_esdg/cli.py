"""Command-line entry point ``swe-esdg``.

Exit codes: 0 success, 1 failed verification, 2 usage error,
3 invalid input (config, mesh, scenario), 4 solver failure (dry or
non-finite state), 5 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config
from .geometry import build_geometry, check_geometry
from .io import diagnostics_csv, write_diagnostics, write_field
from .mesh import MeshError, SinusoidalPerturbation, generate_structured_mesh, load_mesh, save_mesh
from .physics import DryStateError
from .runner import run_problem
from .scenarios import SCENARIOS, UnknownScenarioError, build_scenario
from .spectral import InvalidOrderError, operators

EXIT_VERIFY, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER, EXIT_IO = 1, 2, 3, 4, 5

log = logging.getLogger("swe_esdg")


def _add_overrides(p: argparse.ArgumentParser):
    p.add_argument("--scenario", choices=sorted(SCENARIOS))
    p.add_argument("--n", type=int, help="polynomial order")
    p.add_argument("--dt", type=float, help="fixed time step (clears --cfl)")
    p.add_argument("--cfl", type=float, help="CFL number (clears --dt)")
    p.add_argument("--tend", type=float, help="final time")
    p.add_argument("--flux", choices=["ec", "es"])
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="swe-esdg", description="Entropy stable DG solver for the shallow water equations")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a config file and/or flags")
    run.add_argument("config", nargs="?", help="INI config file")
    _add_overrides(run)
    run.add_argument("--fields", action="store_true", help="also dump the final field")

    conv = sub.add_parser("convergence", help="error against the manufactured solution for a range of orders")
    conv.add_argument("--n-min", type=int, default=4)
    conv.add_argument("--n-max", type=int, default=12)
    conv.add_argument("--dt", type=float, default=1 / 2000)
    conv.add_argument("--tend", type=float, default=0.5)
    conv.add_argument("--flux", choices=["ec", "es"], default="es")
    conv.add_argument("--out", help="write the table as CSV into this directory")

    ver = sub.add_parser("verify", help="run the acceptance checks")
    ver.add_argument("--only", help="comma separated check numbers, e.g. 1,3,8")

    mesh = sub.add_parser("mesh", help="generate or check mesh files")
    msub = mesh.add_subparsers(dest="mesh_command", required=True)
    gen = msub.add_parser("gen", help="write a structured (optionally curved) mesh")
    gen.add_argument("path")
    gen.add_argument("--nx", type=int, default=4)
    gen.add_argument("--ny", type=int, default=4)
    gen.add_argument("--domain", type=float, nargs=4, default=(-1.0, 1.0, -1.0, 1.0), metavar=("X0", "X1", "Y0", "Y1"))
    gen.add_argument("--amplitude", type=float, default=0.0, help="sinusoidal interior distortion")
    gen.add_argument("--periodic", choices=["none", "x", "y", "xy"], default="xy")
    gen.add_argument("--boundary", choices=["wall", "dirichlet"], default="wall")
    chk = msub.add_parser("check", help="validate a mesh file and report geometry quality")
    chk.add_argument("path")
    chk.add_argument("--n", type=int, default=4)
    return ap


def _cmd_run(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if args.scenario and args.scenario != cfg.name:
            cfg = ScenarioConfig.defaults(args.scenario).override(
                **{k: getattr(cfg, k) for k in ("dir", "fields", "every")})
    elif args.scenario:
        cfg = ScenarioConfig.defaults(args.scenario)
    else:
        raise ConfigError("give a config file or --scenario")
    cfg = cfg.override(n=args.n, dt=args.dt, cfl=args.cfl, t_end=args.tend, flux=args.flux, dir=args.out,
                       fields=True if args.fields else None)
    out = Path(cfg.dir)
    problem = build_scenario(cfg.name, N=cfg.n, g=cfg.g, flux=cfg.flux, nx=cfg.nx, amplitude=cfg.amplitude)
    log.info("running %s: N=%d flux=%s t_end=%g", cfg.name, cfg.n, cfg.flux, cfg.t_end)
    result = run_problem(problem, cfg.t_end, dt=cfg.dt, cfl=cfg.cfl, every=cfg.every)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.ini").write_text(cfg.to_ini())
    write_diagnostics(result.records, out / "diagnostics.csv")
    if cfg.fields:
        write_field(result.W, result.geo, result.bottom, result.t, out / "field_final.txt")
    last = result.records[-1]
    print(f"{cfg.name}: t={last.t:.6g} steps={result.steps} mass={last.mass:.17g} "
          f"energy={last.energy:.17g} minh={last.minh:.6g}")
    return 0


def _cmd_convergence(args) -> int:
    from .verification import convergence_study

    orders = list(range(args.n_min, args.n_max + 1))
    errs = convergence_study(args.flux, orders, args.dt, args.tend)
    lines = ["N,l2H"] + [f"{N},{e:.17g}" for N, e in zip(orders, errs)]
    print("\n".join(lines))
    if args.out:
        path = Path(args.out) / f"convergence_{args.flux}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    return 0


def _cmd_verify(args) -> int:
    from .verification import CHECKS, run_all

    numbers = None
    if args.only:
        try:
            numbers = [int(s) for s in args.only.split(",")]
        except ValueError:
            raise ConfigError(f"--only expects comma separated integers, got {args.only!r}") from None
        unknown = [k for k in numbers if k not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown check numbers {unknown}")
    results = run_all(numbers)
    return 0 if all(r.passed for r in results) else EXIT_VERIFY


def _cmd_mesh(args) -> int:
    if args.mesh_command == "gen":
        periodic = ("x" in args.periodic, "y" in args.periodic)
        pert = SinusoidalPerturbation(args.amplitude, 2) if args.amplitude else None
        mesh = generate_structured_mesh(args.nx, args.ny, tuple(args.domain), pert, periodic, (args.boundary,) * 4)
        save_mesh(mesh, args.path)
        print(f"wrote {args.path}: {mesh.n_elements} elements, {len(mesh.curves)} curved edges")
        return 0
    mesh = load_mesh(args.path)
    report = check_geometry(mesh, build_geometry(mesh, operators(args.n)))
    for key, val in vars(report).items():
        print(f"{key}: {val}")
    return 0 if report.ok else EXIT_INPUT


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": _cmd_run, "convergence": _cmd_convergence, "verify": _cmd_verify, "mesh": _cmd_mesh}
    try:
        return handlers[args.command](args)
    except (ConfigError, MeshError, UnknownScenarioError, InvalidOrderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DryStateError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
