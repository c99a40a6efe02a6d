"""Command-line interface.

Subcommands::

    compsense recover {iht|bp|ds} --transform dct --n 64 --input y.csv ...
    compsense rip --transform dft --n 8 --k 2 --t 2
    compsense bounds --theorem IHT-v1 --c 1 --k 1 --t 1 --n 108 ...
    compsense bench {l0-iht|l0-bp|l2-bp|linf-ds} --trials 500 --out results/
    compsense image in.pgm --k 16 --noise l0 --t 1 --output out.pgm

Vectors are CSV files with one entry per line; complex entries are written
as ``re,im``. ``--transform file:PATH`` loads a dense matrix from a CSV
with one row per line holding interleaved ``re,im`` pairs.

``--config FILE`` reads flat ``key=value`` lines (``#`` starts a comment);
keys are flag names with dashes or underscores, and explicit flags win.

Exit codes: 0 success, 2 invalid configuration, 3 solver non-convergence
above ``--max-fail-rate``.
"""
import argparse
import json
import logging
import sys

import numpy as np

from compsense import bounds, harness, rip
from compsense.iht import IhtConfig, iht
from compsense.l1solve import SolverConfig, basis_pursuit, dantzig_selector
from compsense.measurement import StackedOperator
from compsense.noise import NoiseSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

log = logging.getLogger("compsense")


class _ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# vector IO


def read_vector(path):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p for p in line.split(",") if p.strip()]
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise _ConfigError(f"{path}:{lineno}: not a number: {line!r}")
            if len(vals) == 1:
                rows.append(complex(vals[0], 0.0))
            elif len(vals) == 2:
                rows.append(complex(vals[0], vals[1]))
            else:
                raise _ConfigError(f"{path}:{lineno}: expected 'value' or 're,im'")
    v = np.array(rows, dtype=np.complex128)
    return v.real.copy() if not np.any(v.imag) else v


def write_vector(path, v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        lines = [f"{z.real!r},{z.imag!r}" for z in v.tolist()]
    else:
        lines = [repr(float(x)) for x in v]
    text = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# ---------------------------------------------------------------------------
# config file


def read_config(path):
    """Flat ``key=value`` file; keys normalized to underscores."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _apply_config(parser, args):
    if not getattr(args, "config", None):
        return args
    try:
        values = read_config(args.config)
    except OSError as exc:
        raise _ConfigError(str(exc))
    actions = {a.dest: a for a in parser._actions}
    for key, raw in values.items():
        if key not in actions:
            raise _ConfigError(f"unknown config key {key!r}")
        if getattr(args, key, None) is not None:
            continue  # flag given explicitly
        act = actions[key]
        if act.nargs == 0:
            value = raw.lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            try:
                value = act.type(raw)
            except (TypeError, ValueError) as exc:
                raise _ConfigError(f"config key {key!r}: {exc}")
        else:
            value = raw
        if act.choices is not None and value not in act.choices:
            raise _ConfigError(f"config key {key!r}: {value!r} not in {sorted(act.choices)}")
        setattr(args, key, value)
    return args


def _default(value, fallback):
    return fallback if value is None else value


# ---------------------------------------------------------------------------
# argument parser


def _iter_count(s):
    return s if s == "auto" else int(s)


def _add_common(p, transform=True):
    p.add_argument("--config", help="flat key=value file; flags override")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--n", type=int, help="signal length")
    p.add_argument("--k", type=int, help="sparsity budget of the coefficients")
    if transform:
        p.add_argument("--transform", help="dct | dft | hadamard | file:PATH (default dct)")
    p.add_argument("-v", "--verbose", action="store_true", default=None)


def _add_solver(p):
    p.add_argument("--max-iterations", type=int, help="ADMM iteration cap (default 20000)")
    p.add_argument("--feasibility-tol", type=float, help="ADMM feasibility tolerance (default 1e-7)")


def build_parser():
    parser = argparse.ArgumentParser(prog="compsense", description="Sparse recovery with certified error bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="recover one vector from a CSV observation")
    p.add_argument("algorithm", choices=["iht", "bp", "ds"])
    _add_common(p)
    _add_solver(p)
    p.add_argument("--input", "-i", help="observation y (CSV, one entry per line)")
    p.add_argument("--t", type=int, help="IHT noise budget")
    p.add_argument("--T", type=_iter_count, help="IHT iterations or 'auto' (default auto)")
    p.add_argument("--eta", type=float, help="BP residual radius")
    p.add_argument("--eta1", type=float, help="DS raw residual bound (omit for the classical selector)")
    p.add_argument("--eta2", type=float, help="DS correlated residual bound")
    p.add_argument("--output", "-o", help="recovered coefficients CSV (default stdout)")
    p.add_argument("--diagnostics", help="diagnostics JSON path (default stderr)")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("rip", help="certify the (k,t) restricted isometry constant of [F I]")
    _add_common(p)
    p.add_argument("--t", type=int, help="noise budget")
    p.add_argument("--mode", choices=["enumerate", "sample"], help="default enumerate")
    p.add_argument("--m", type=int, help="supports to sample (default 1000)")
    p.add_argument("--out", help="JSON path (default stdout)")
    p.set_defaults(func=cmd_rip)

    p = sub.add_parser("bounds", help="evaluate a recovery bound and its hypotheses")
    p.add_argument("--config", help="flat key=value file; flags override")
    p.add_argument("--theorem", choices=bounds.THEOREMS)
    for name in ("c", "norm_head", "norm_e", "norm_tail", "eta", "eta2", "eps"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    for name in ("k", "t", "n", "T"):
        p.add_argument("--" + name, dest=name, type=int)
    p.add_argument("--out", help="JSON path (default stdout)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("bench", help="seeded Monte Carlo benchmark against the bounds")
    p.add_argument("bench", choices=sorted(harness.BENCHES))
    _add_common(p)
    _add_solver(p)
    p.add_argument("--t", type=int, help="l0 noise budget t_max")
    p.add_argument("--T", type=_iter_count, help="IHT iterations or 'auto'")
    p.add_argument("--trials", type=int, help="number of trials (default 500)")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--decay", type=float, help="coefficient decay exponent")
    p.add_argument("--dataset", choices=["synthetic-compressible", "image-dir"])
    p.add_argument("--image-dir", help="directory of equally sized PGM/PPM images")
    p.add_argument("--convention", choices=["synthesis", "analysis"])
    p.add_argument("--noise", choices=["l0", "l2", "linf", "none"], help="override the bench's noise model")
    p.add_argument("--random-start", action="store_true", default=None, help="IHT from a seeded random start")
    p.add_argument("--out", help="output directory for reports")
    p.add_argument("--format", help="comma-separated subset of csv,json,svg (default csv,json)")
    p.add_argument("--max-fail-rate", type=float, help="tolerated fraction of non-converged trials (default 0)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("image", help="corrupt and recover a PGM/PPM image")
    p.add_argument("path")
    _add_common(p, transform=False)
    _add_solver(p)
    p.add_argument("--algorithm", choices=["IHT", "BP-L0", "BP", "DS"])
    p.add_argument("--noise", choices=["none", "l0", "l2", "linf"])
    p.add_argument("--t", type=int, help="l0 noise budget")
    p.add_argument("--T", type=_iter_count)
    p.add_argument("--output", "-o", help="reconstructed image path")
    p.add_argument("--out", help="metrics JSON path (default stdout)")
    p.set_defaults(func=cmd_image)
    return parser


def _solver(args):
    d = SolverConfig()
    return SolverConfig(
        max_iterations=_default(getattr(args, "max_iterations", None), d.max_iterations),
        feasibility_tol=_default(getattr(args, "feasibility_tol", None), d.feasibility_tol),
    )


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise _ConfigError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


# ---------------------------------------------------------------------------
# commands


def cmd_recover(args):
    _need(args, "input", "k")
    y = read_vector(args.input)
    n = _default(args.n, y.shape[0])
    if n != y.shape[0]:
        raise _ConfigError(f"--n {n} does not match input length {y.shape[0]}")
    F = harness.build_transform(_default(args.transform, "dct"), n)
    if args.algorithm == "iht":
        _need(args, "t")
        res = iht(y, StackedOperator(F), IhtConfig(args.k, args.t, _default(args.T, "auto")))
        out = res.stacked
        diag = {"iterations": res.iterations, "residual_l2": res.residual_l2, **res.diagnostics}
        ok = True
    elif args.algorithm == "bp":
        _need(args, "eta")
        out, d = basis_pursuit(y, F.matrix, args.eta, _solver(args), gram_scale=1.0)
        diag, ok = d.to_dict(), d.feasible
    else:
        _need(args, "eta2")
        out, d = dantzig_selector(y, F.matrix, args.eta1, args.eta2, _solver(args))
        diag, ok = d.to_dict(), d.feasible
    write_vector(args.output, out)
    diag["algorithm"] = args.algorithm
    if args.diagnostics:
        _emit_json(diag, args.diagnostics)
    else:
        sys.stderr.write(json.dumps(diag, sort_keys=True, default=_json_default) + "\n")
    return EXIT_OK if ok else EXIT_SOLVER


def cmd_rip(args):
    _need(args, "n", "k", "t")
    F = harness.build_transform(_default(args.transform, "dct"), args.n)
    cert = rip.rip_exact(StackedOperator(F), args.k, args.t, _default(args.mode, "enumerate"),
                         m=_default(args.m, 1000), seed=_default(args.seed, 0))
    _emit_json(cert.to_dict(), args.out)
    return EXIT_OK


def cmd_bounds(args):
    _need(args, "theorem")
    names = ("c", "norm_head", "norm_e", "norm_tail", "eta", "eta2", "eps", "k", "t", "n", "T")
    try:
        rep = bounds.bound_report(args.theorem, **{n: getattr(args, n) for n in names})
    except (ValueError, ZeroDivisionError) as exc:
        raise _ConfigError(str(exc))
    _emit_json(rep.to_dict(), args.out)
    return EXIT_OK


def cmd_bench(args):
    formats = tuple(f.strip() for f in _default(args.format, "csv,json").split(",") if f.strip())
    bad = set(formats) - {"csv", "json", "svg"}
    if bad:
        raise _ConfigError(f"unknown format(s): {sorted(bad)}")
    defaults = {"l0-iht": (108, 1), "l0-bp": (64, 2), "l2-bp": (64, 4), "linf-ds": (64, 4)}[args.bench]
    n = _default(args.n, defaults[0])
    k = _default(args.k, defaults[1])
    t = _default(args.t, k)
    try:
        cfg = harness.ExperimentConfig(
            bench=args.bench,
            dataset=_default(args.dataset, "synthetic-compressible"),
            image_dir=args.image_dir,
            transform=_default(args.transform, "dct"),
            n=n, k=k, t=t,
            decay=args.decay,
            trials=_default(args.trials, 500),
            seed=_default(args.seed, 0),
            T=_default(args.T, "auto"),
            random_start=bool(args.random_start),
            convention=_default(args.convention, "synthesis"),
            noise=args.noise,
            solver=_solver(args),
        )
        row, records = harness.run_experiment(cfg, jobs=_default(args.jobs, 1), out=args.out, formats=formats)
    except (harness.ConfigError, ValueError, OSError) as exc:
        raise _ConfigError(str(exc))
    print(f"{cfg.bench}: {harness.table_line(row)}")
    print(f"trials={row.trials} used={row.trials_used} failed={row.trials_failed} "
          f"hypotheses_ok={row.hypotheses_ok} violations={row.violations}")
    if args.out is None:
        sys.stdout.write(harness.summary_json(cfg, row))
    rate = row.trials_failed / row.trials
    if rate > _default(args.max_fail_rate, 0.0):
        log.error("non-convergence rate %.3f exceeds --max-fail-rate", rate)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_image(args):
    _need(args, "k")
    model = _default(args.noise, "none").upper()
    t = args.t
    if model == "L0" and t is None:
        raise _ConfigError("--noise l0 needs --t")
    try:
        spec = NoiseSpec(model, _default(args.seed, 0), t or 0)
        _, report = harness.image_pipeline(args.path, args.k, _default(args.algorithm, "IHT"), spec, t,
                                           args.output, _solver(args), _default(args.T, "auto"))
    except (harness.ConfigError, ValueError, OSError) as exc:
        raise _ConfigError(str(exc))
    _emit_json(report, args.out)
    ok = all(ch["converged"] for ch in report["channels"])
    return EXIT_OK if ok else EXIT_SOLVER


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", None) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _apply_config(sub, args)
        return args.func(args)
    except _ConfigError as exc:
        sys.stderr.write(f"compsense: error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
