"""Command-line runner: one subcommand per experiment kind.

Every run writes its outputs plus ``manifest.json`` into ``--out``.  Exit
codes: 0 success, 2 invalid configuration, 3 numerical failure, 4 I/O error.
Errors are also emitted as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time

import numpy as np
import scipy
import scipy.fft as sfft

from . import __version__
from .config import KINDS, ExperimentConfig, load_config
from .errors import NumericalError, ValidationError
from .evolution import (
    StepperConfig,
    evolve,
    gaussian_data,
    normal_form_residual,
    shell_data,
    wrap_time,
)
from .grid import make_grid, save_snapshot
from .norms import NormParams, budget_check, decay_fit, norm_report, settles_after
from .radial import decay_scan, shell_profile
from .resonance import PhaseContext, delta_rate, dyadic_constants, epsilon_rate, region_sweep
from .scattering import cauchy_blocks, forward_profile_cauchy, wave_operator_roundtrip

__all__ = ["main", "run"]

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x)}")


def _write_csv(path, header, rows):
    np.savetxt(path, np.asarray(rows, float), delimiter=",", header=",".join(header),
               comments="", fmt="%.17g")


def _stepper(cfg):
    return StepperConfig(scheme=cfg.scheme, dt=cfg.dt, coupling=cfg.coupling)


def _initial(cfg, grid):
    if cfg.family == "shell":
        return shell_data(grid, cfg.eps0, cfg.k0, cfg.lam, cfg.width, cfg.seed)
    return gaussian_data(grid, cfg.eps0, cfg.sigma, seed=cfg.seed)


def _grid(cfg):
    return make_grid(cfg.dim, cfg.n, cfg.half_width)


def _params(cfg):
    return NormParams(cfg.alpha, cfg.lam)


def _snapshots(out, tr, stride, alpha):
    if stride <= 0:
        return
    d = os.path.join(out, "snapshots")
    os.makedirs(d, exist_ok=True)
    for i in range(0, len(tr.times), stride):
        save_snapshot(os.path.join(d, f"g_{i:05d}.fnls"), tr.profiles[i], alpha)


def _simulate(cfg, out, stride):
    grid = _grid(cfg)
    u0 = _initial(cfg, grid)
    tr = evolve(u0, cfg.alpha, cfg.t_end, _stepper(cfg), "original", n_out=cfg.n_out,
                params=_params(cfg))
    tr.diagnostics.to_csv(os.path.join(out, "diagnostics.csv"))
    _snapshots(out, tr, stride, cfg.alpha)
    summary = {"meta": tr.meta, "final_time": float(tr.times[-1])}
    _write_json(os.path.join(out, "summary.json"), summary)
    return summary


def _decay_linear(cfg, out, stride):
    ts = np.geomspace(cfg.t_lo, cfg.t_hi, cfg.n_t)
    rows = decay_scan(shell_profile(cfg.shell_k), cfg.alpha, ts)
    _write_csv(os.path.join(out, "decay.csv"), ["t", "sup_norm", "l4", "l6"], rows)
    fit = {name: decay_fit(rows[:, 0], rows[:, i])
           for i, name in ((1, "sup_norm"), (2, "l4"), (3, "l6"))}
    summary = {"alpha": cfg.alpha, "shell_k": cfg.shell_k, "exponent": fit["sup_norm"]["exponent"],
               "fits": fit, "expected": {"sup_norm": -1.5, "l4": -0.75, "l6": -1.0}}
    _write_json(os.path.join(out, "fit.json"), summary)
    return summary


def _decay_nonlinear(cfg, out, stride):
    grid = _grid(cfg)
    u0 = _initial(cfg, grid)
    params = _params(cfg)
    t_end = min(cfg.t_end, wrap_time(grid, cfg.alpha))
    tr = evolve(u0, cfg.alpha, t_end, _stepper(cfg), "original", n_out=cfg.n_out, params=params)
    tr.diagnostics.to_csv(os.path.join(out, "diagnostics.csv"))
    _snapshots(out, tr, stride, cfg.alpha)
    d = tr.diagnostics
    fit = decay_fit(d.times, d.values["u_inf"], window=(cfg.t_fit_min, t_end))
    settle = {k: settles_after(d.times, d.values[k], cfg.t_fit_min)
              for k in ("W1", "W2", "W3", "U1", "U2", "U3")}
    eps = float(d.values["W3"][0] + d.values["U1"][0] + d.values["U3"][0])
    summary = {"fit": fit, "settle_ratio": settle, "budget": budget_check(d, eps).as_dict(),
               "meta": tr.meta}
    _write_json(os.path.join(out, "summary.json"), summary)
    return summary


def _resonance(cfg, out, stride):
    ctx = PhaseContext(cfg.alpha)
    sweep = region_sweep(ctx, cfg.region_kind, range(-cfg.offset_range, cfg.offset_range + 1),
                         sample_count=cfg.samples, seed=cfg.seed)
    ok = all(r["pass"] for r in sweep["reports"])
    summary = {"alpha": cfg.alpha, "kind": cfg.region_kind, "pass": ok,
               "regions": sweep["regions"], "empty": sweep["empty"],
               "ellipticity": sweep["ellipticity"]}
    _write_json(os.path.join(out, "resonance.json"), dict(summary, reports=sweep["reports"]))
    return summary


def _normalform(cfg, out, stride):
    grid = _grid(cfg)
    u0 = _initial(cfg, grid)
    res = normal_form_residual(u0, cfg.alpha, cfg.t_end, list(cfg.dts), cfg.coupling,
                           n_out=cfg.n_out, scheme=cfg.scheme)
    _write_json(os.path.join(out, "normalform.json"), res)
    return res


def _dyadic(cfg, out, stride):
    ts = np.geomspace(cfg.t_grid_min, cfg.t_grid_max, cfg.t_grid_n)
    rows = [(t, *dyadic_constants(cfg.alpha, cfg.lam, t)) for t in ts]
    _write_csv(os.path.join(out, "dyadic.csv"), ["t", "C1", "C2"], rows)
    rows = np.array(rows)
    f1 = decay_fit(rows[:, 0], rows[:, 1])
    f2 = decay_fit(rows[:, 0], rows[:, 2])
    summary = {"alpha": cfg.alpha, "lam": cfg.lam,
               "C1": dict(f1, expected=-(1 + epsilon_rate(cfg.alpha, cfg.lam))),
               "C2": dict(f2, expected=-(1 + delta_rate(cfg.alpha, cfg.lam)))}
    _write_json(os.path.join(out, "dyadic.json"), summary)
    return summary


def _scatter_forward(cfg, out, stride):
    grid = _grid(cfg)
    u0 = _initial(cfg, grid)
    t_end = min(cfg.t_end, wrap_time(grid, cfg.alpha))
    tr = evolve(u0, cfg.alpha, t_end, _stepper(cfg), "original", n_out=cfg.n_out)
    diffs = forward_profile_cauchy(tr)
    _write_csv(os.path.join(out, "cauchy.csv"), ["t", "diff"],
               np.column_stack([tr.times[1:], diffs]))
    _snapshots(out, tr, stride, cfg.alpha)
    summary = {"diffs": diffs, "blocks": cauchy_blocks(tr), "meta": tr.meta}
    _write_json(os.path.join(out, "scatter_forward.json"), summary)
    return summary


def _scatter_final(cfg, out, stride):
    grid = _grid(cfg)
    f_inf = _initial(cfg, grid)
    kw = dict(mesh_step=cfg.mesh_step, max_iters=cfg.max_iters, tol=cfg.tol)
    res = wave_operator_roundtrip(f_inf, cfg.alpha, cfg.t_max, _stepper(cfg), cfg.horizon,
                                  detail=True, **kw)
    _write_json(os.path.join(out, "scatter_final.json"), res)
    return res


def _norms(cfg, out, stride):
    grid = _grid(cfg)
    f = _initial(cfg, grid)
    p = _params(cfg)
    summary = {"W": norm_report(f, p, True).as_dict(), "U": norm_report(f, p, False).as_dict(),
               "delta": p.delta}
    _write_json(os.path.join(out, "norms.json"), summary)
    return summary


_RUNNERS = {
    "simulate": _simulate,
    "decay-linear": _decay_linear,
    "decay-nonlinear": _decay_nonlinear,
    "resonance-check": _resonance,
    "normalform-check": _normalform,
    "dyadic-constants": _dyadic,
    "scatter-forward": _scatter_forward,
    "scatter-final": _scatter_final,
    "norms-report": _norms,
}


def run(cfg, out, snapshot_stride=0, workers=1):
    """Run one experiment and write its artifacts and manifest into ``out``."""
    os.makedirs(out, exist_ok=True)
    start = time.perf_counter()
    with sfft.set_workers(max(1, int(workers))):
        summary = _RUNNERS[cfg.kind](cfg, out, snapshot_stride)
    manifest = {
        "config": cfg.as_dict(),
        "versions": {"fracnls": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_time": time.perf_counter() - start,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return summary


def _parser():
    p = argparse.ArgumentParser(prog="fracnls", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="kind", required=True)
    for k in KINDS:
        s = sub.add_parser(k)
        s.add_argument("--config", help="JSON file of configuration fields")
        s.add_argument("--out", default=os.path.join("runs", k))
        s.add_argument("--seed", type=int)
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--snapshot-stride", type=int, default=0)
        s.add_argument("--set", action="append", default=[], metavar="FIELD=JSON",
                       help="override one configuration field")
    return p


def _error(code, kind, exc):
    print(json.dumps({"error": kind, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def _config_from_args(args):
    overrides = {"kind": args.kind, "seed": args.seed}
    for item in args.set:
        key, _, val = item.partition("=")
        try:
            overrides[key] = json.loads(val)
        except json.JSONDecodeError:
            overrides[key] = val
    if args.workers < 1 or args.snapshot_stride < 0:
        raise ValidationError("--workers must be >= 1 and --snapshot-stride >= 0")
    try:
        if args.config:
            return load_config(args.config, **overrides)
        return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    except TypeError as exc:
        raise ValidationError(str(exc)) from None


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        run(cfg, args.out, args.snapshot_stride, args.workers)
    except ValidationError as exc:
        return _error(EXIT_VALIDATION, "validation", exc)
    except NumericalError as exc:
        return _error(EXIT_NUMERICAL, "numerical", exc)
    except OSError as exc:
        return _error(EXIT_IO, "io", exc)
    print(json.dumps({"kind": cfg.kind, "out": args.out, "status": "ok"}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
