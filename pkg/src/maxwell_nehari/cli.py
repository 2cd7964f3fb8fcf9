"""Command-line front end.

    maxwell-nehari <command> --config <path> [--out-dir DIR] [--seed N] [--threads N]

Exit status: 0 on success, 2 on a controlled refusal (regime or config
error), 1 on an internal failure.  Report files (JSON/CSV) are
deterministic given config and seed; wall-clock timings live only in
``manifest.json``.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import platform
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from .config import ConfigError, RunConfig, build_nonlinearity, parse_config, serialize, solver_config
from .errors import AliasingError, RegimeError

log = logging.getLogger("maxwell_nehari")

THREADS_ENV = "MAXWELL_NEHARI_THREADS"
EXIT_OK, EXIT_INTERNAL, EXIT_REFUSED = 0, 1, 2


class _Stages:
    def __init__(self):
        self.timings = {}

    def __call__(self, name):
        stages = self

        class _T:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                stages.timings[name] = time.perf_counter() - self.t0

        return _T()


def build_basis(cfg: RunConfig):
    from .basis import BoxDomain, enumerate_modes

    d = cfg.domain
    basis = enumerate_modes(BoxDomain(tuple(d.edges)), d.cutoff)
    if d.modes is None and d.gradient_modes is None:
        return basis
    want = set(map(tuple, d.modes)) if d.modes is not None else None
    gwant = set(map(tuple, d.gradient_modes or ()))
    div = [i for i, m in enumerate(basis.divfree_modes) if want is None or tuple(m.k) in want]
    grad = [j for j, m in enumerate(basis.gradient_modes) if tuple(m.k) in gwant]
    missing = (want or set()) - {tuple(basis.divfree_modes[i].k) for i in div}
    if missing:
        raise ConfigError(f"modes {sorted(missing)} are not divergence-free modes below the cutoff")
    return basis.subset(div, grad)


def _box_fields(state, basis, n):
    from .basis import synthesize, synthesize_curl, uniform_grid

    grid = uniform_grid(basis.domain, n)
    E = synthesize(state, basis, grid).values
    C = synthesize_curl(state, basis, grid).values
    h = tuple(L / (n - 1) for L in basis.domain.edges)
    return (0.0, 0.0, 0.0), h, (n, n, n), E, C


def cmd_eigs(cfg, out, stages, threads):
    with stages("basis"):
        basis = build_basis(cfg)
    fio.write_spectrum_csv(out / "spectrum.csv", basis)
    eig = basis.divfree_eigs
    summary = {
        "n_divfree": basis.n_divfree,
        "n_gradient": basis.n_gradient,
        "eigenvalues": [float(e) for e in eig],
        "eigenvalues_hex": [float(e).hex() for e in eig],
        "fingerprint": basis.fingerprint(),
    }
    fio.write_json(out / "spectrum.json", summary)
    return {"fingerprint": basis.fingerprint()}


def _ground_context(cfg):
    from .energy import EnergyContext

    basis = build_basis(cfg)
    nl, lam = build_nonlinearity(cfg)
    return EnergyContext(basis, lam, nl)


def cmd_ground(cfg, out, stages, threads):
    from .basis import boundary_trace_residual

    with stages("setup"):
        ctx = _ground_context(cfg)
    from .nehari import ground_state

    with stages("solve"):
        rep = ground_state(ctx, solver_config(cfg, threads))
    report = rep.to_dict()
    report.update({
        "lambda": ctx.lam,
        "fingerprint": ctx.basis.fingerprint(),
        "trace_residual": boundary_trace_residual(rep.state, ctx.basis),
        "modes": [[*m.k, m.kind, m.polarization] for m in ctx.basis.modes],
    })
    fio.write_json(out / "ground.json", report)
    with stages("vtk"):
        o, h, shape, E, C = _box_fields(rep.state, ctx.basis, cfg.vtk_resolution)
        fio.write_vtk(out / "ground.vtk", o, h, shape, {"E": E, "curlE": C})
    return {"fingerprint": ctx.basis.fingerprint()}


def cmd_oracle(cfg, out, stages, threads):
    from .nehari import ground_state, oracle_dense

    with stages("setup"):
        ctx = _ground_context(cfg)
    scfg = solver_config(cfg, threads)
    with stages("oracle"):
        orc = oracle_dense(ctx, scfg)
    with stages("solve"):
        rep = ground_state(ctx, scfg)
    c, co = rep.c0, orc["c0_oracle"]
    fio.write_json(out / "oracle.json", {
        "c0": c, "c0_hex": float(c).hex(),
        "c0_oracle": co, "c0_oracle_hex": float(co).hex(),
        "relative_difference": abs(c - co) / abs(c),
        "cluster_spread": orc["cluster_spread"],
        "n_directions": orc["n_directions"],
        "dimension": ctx.size,
        "fingerprint": ctx.basis.fingerprint(),
    })
    return {"fingerprint": ctx.basis.fingerprint()}


def cmd_symmetric(cfg, out, stages, threads):
    from .axisym import CylinderDomain, MeridianGrid, lift_to_3d, lifted_energy, lifted_trace_residual, solve_sectors

    d = cfg.domain
    grid = MeridianGrid(CylinderDomain(d.R, d.H), d.Nr, d.Nz)
    nl, lam = build_nonlinearity(cfg)
    with stages("solve"):
        reps = solve_sectors(grid, lam, nl, solver_config(cfg, threads), sectors=cfg.solver.sectors)
    best = min(reps.values(), key=lambda r: r.c)
    with stages("lift"):
        J3 = lifted_energy(best.alpha, lam, nl)
        h, trace = lifted_trace_residual(best.alpha, max(cfg.vtk_resolution, 8))
        lf = lift_to_3d(best.alpha, cfg.vtk_resolution)
    table = {
        "lambda": lam,
        "grid": {"R": d.R, "H": d.H, "Nr": d.Nr, "Nz": d.Nz},
        "sectors": {s: r.to_dict() for s, r in reps.items()},
        "ground_sector": best.sector,
        "lifted_energy": J3,
        "lifted_trace_residual": trace,
        "lifted_h": h,
    }
    fio.write_json(out / "sectors.json", table)
    fio.write_profile_csv(out / "profile.csv", best.alpha)
    fio.write_vtk(out / "lifted.vtk", lf.origin, lf.spacing, lf.shape, {"E": lf.E, "curlE": lf.curlE})
    return {}


def cmd_check(cfg, out, stages, threads):
    from .nonlinearity import check_conditions

    nl, _ = build_nonlinearity(cfg)
    box = tuple(cfg.domain.edges) if cfg.domain.type == "box" else (cfg.domain.R, cfg.domain.R, cfg.domain.H)
    with stages("check"):
        rep = check_conditions(nl, seed=cfg.seed, box=box)
    fio.write_json(out / "conditions.json", rep.to_dict())
    return {"violated": rep.violated}


COMMANDS = {
    "eigs": cmd_eigs,
    "ground": cmd_ground,
    "symmetric": cmd_symmetric,
    "check-nonlinearity": cmd_check,
    "oracle": cmd_oracle,
}


def run(cfg: RunConfig, out_dir, threads=1):
    """Execute a parsed config; returns the exit status and writes artifacts plus manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages = _Stages()
    manifest = {
        "tool": "maxwell-nehari",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "command": cfg.command,
        "seed": cfg.seed,
        "threads": threads,
        "config": serialize(cfg),
        "config_echo": cfg.echo(),
        "provenance": {"c0_single_mode": "closed form 4 pi^3 / 9 for F = |u|^4 / 4, lambda = 0"},
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    t0 = time.perf_counter()
    try:
        extra = COMMANDS[cfg.command](cfg, out, stages, threads)
        manifest.update(extra or {})
        status, manifest["status"] = EXIT_OK, "ok"
    except (RegimeError, AliasingError, ConfigError) as exc:
        status, manifest["status"], manifest["error"] = EXIT_REFUSED, "refused", str(exc)
        log.error("refused: %s", exc)
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        status, manifest["status"] = EXIT_INTERNAL, "error"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        manifest["traceback"] = traceback.format_exc()
        log.error("internal error: %s", exc)
    manifest["timings"] = {**stages.timings, "total": time.perf_counter() - t0}
    manifest["exit_status"] = status
    fio.write_json(out / "manifest.json", manifest)
    return status


def main(argv=None):
    ap = argparse.ArgumentParser(prog="maxwell-nehari", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--out-dir", type=Path, default=Path("out"))
    ap.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
    ap.add_argument("--threads", type=int, default=None, help=f"falls back to ${THREADS_ENV}")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        cfg = parse_config(args.config.read_text())
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        args.out_dir.mkdir(parents=True, exist_ok=True)
        fio.write_json(args.out_dir / "manifest.json", {
            "tool": "maxwell-nehari", "version": __version__, "status": "refused",
            "error": str(exc), "exit_status": EXIT_REFUSED,
        })
        return EXIT_REFUSED
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if cfg.command != args.command:
        print(f"{args.config}: config is for command {cfg.command!r}, not {args.command!r}", file=sys.stderr)
        return EXIT_REFUSED
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, cfg.solver.threads))
    status = run(cfg, args.out_dir, max(1, threads))
    if status == EXIT_REFUSED:
        print(f"refused; see {args.out_dir / 'manifest.json'}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
