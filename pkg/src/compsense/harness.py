"""Experiment driver: seeded trials, recovery-error metrics and reports.

A trial draws ground-truth coefficients ``xhat`` (synthetic compressible
signal or one channel of an image), a noise vector ``e`` and observes
``y = M xhat + e`` where ``M`` is ``F`` (synthesis convention, the default)
or ``F*`` (analysis convention: ``xhat = F x`` for a signal ``x``). It then
recovers ``x#`` and measures ``|x# - head_k(xhat)|_p`` against the theorem's
bound ``upsilon`` computed from ground-truth norms.

Per-trial CSV columns (fixed, blank when not applicable)::

    trial, seed, budget, converged, hypotheses_ok, iterations,
    err_l1, err_l2, err_linf, upsilon_l1, upsilon_l2, upsilon_linf,
    upsilon_v1, upsilon_v2, l1_solution, l1_truth, max_violation

``upsilon_v1`` / ``upsilon_v2`` are the two IHT regimes; ``upsilon_l2`` for
IHT is the smaller valid one. Aggregates follow

    delta_p = mean_i err_i,        Delta_p = mean_i (upsilon_i - err_i)

over converged trials; trials whose solver did not converge are excluded and
counted separately.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import partial
import csv
import io
import json
import logging
import math
import os

import numpy as np

from compsense import bounds
from compsense.iht import FALLBACK_T, IhtConfig, iht, random_start
from compsense.l1solve import SolverConfig, basis_pursuit, bp_l0, dantzig_selector, l1_norm
from compsense.measurement import StackedOperator
from compsense.netpbm import from_unit, read_image, to_unit, write_image
from compsense.noise import NoiseSpec
from compsense.rng import SplitMix64, derive_seed
from compsense.sparsity import head_k, tail_k
from compsense.transform import load_transform, make_transform

log = logging.getLogger(__name__)

BENCHES = {
    "l0-iht": ("IHT", "L0"),
    "l0-bp": ("BP-L0", "L0"),
    "l2-bp": ("BP", "L2"),
    "linf-ds": ("DS", "LINF"),
}
REPORT_NORMS = {
    "l0-iht": ("linf", "l2"),
    "l0-bp": ("l2",),
    "l2-bp": ("l1", "l2"),
    "linf-ds": ("l1", "l2"),
}
BUDGET_NAMES = {"L0": "t_avg", "L2": "l2_avg", "LINF": "linf_avg", "NONE": "linf_avg"}
CSV_COLUMNS = (
    "trial", "seed", "budget", "converged", "hypotheses_ok", "iterations",
    "err_l1", "err_l2", "err_linf", "upsilon_l1", "upsilon_l2", "upsilon_linf",
    "upsilon_v1", "upsilon_v2", "l1_solution", "l1_truth", "max_violation",
)
MAX_IMAGE_SIDE = 64
SOLVER_SLACK = 1e-5


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    bench: str = "l0-iht"
    dataset: str = "synthetic-compressible"
    image_dir: str = None
    transform: str = "dct"
    n: int = 64
    k: int = 1
    t: int = 1
    decay: float = None
    scale: float = None
    trials: int = 500
    seed: int = 0
    T: object = "auto"
    iht_eps: float = 1e-3
    random_start: bool = False
    convention: str = "synthesis"
    noise: str = None
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.bench not in BENCHES:
            raise ConfigError(f"unknown bench {self.bench!r}; expected one of {sorted(BENCHES)}")
        if self.dataset not in ("synthetic-compressible", "image-dir"):
            raise ConfigError(f"unknown dataset {self.dataset!r}")
        if self.dataset == "image-dir" and not self.image_dir:
            raise ConfigError("dataset image-dir needs image_dir")
        if self.convention not in ("synthesis", "analysis"):
            raise ConfigError("convention must be 'synthesis' or 'analysis'")
        if self.noise is not None:
            self.noise = self.noise.upper()
            if self.noise not in ("L0", "L2", "LINF", "NONE"):
                raise ConfigError(f"unknown noise model {self.noise!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n < 1 or not 0 <= self.k <= self.n:
            raise ConfigError(f"need n >= 1 and 0 <= k <= n (n={self.n}, k={self.k})")
        if self.noise_model == "L0" and not 1 <= self.t <= self.n:
            raise ConfigError(f"l0 noise needs 1 <= t <= n, got t={self.t}")
        if not 0 <= self.t <= self.n:
            raise ConfigError(f"t must lie in [0, n], got t={self.t}")
        if self.decay is None:
            self.decay = 1.5 if BENCHES[self.bench][1] == "L0" else math.inf

    @property
    def algorithm(self):
        return BENCHES[self.bench][0]

    @property
    def noise_model(self):
        """The bench's noise model unless ``noise`` overrides it."""
        return self.noise or BENCHES[self.bench][1]


@dataclass
class TrialRecord:
    trial: int
    seed: int
    budget: float
    converged: bool
    hypotheses_ok: bool
    iterations: int
    err_l1: float = None
    err_l2: float = None
    err_linf: float = None
    upsilon_l1: float = None
    upsilon_l2: float = None
    upsilon_linf: float = None
    upsilon_v1: float = None
    upsilon_v2: float = None
    l1_solution: float = None
    l1_truth: float = None
    max_violation: float = None

    def error(self, p):
        return getattr(self, "err_" + p)

    def upsilon(self, p):
        return getattr(self, "upsilon_" + p)


@dataclass
class MetricsRow:
    bench: str
    budget_name: str
    budget_avg: float
    norms: tuple
    delta: dict
    Delta: dict
    mean_upsilon: dict
    violations: dict
    trials: int
    trials_used: int
    trials_failed: int
    hypotheses_ok: bool
    notes: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["norms"] = list(self.norms)
        return d


# ---------------------------------------------------------------------------
# instance construction


def make_compressible(n, k, decay=1.5, seed=0, scale=None):
    """Seeded compressible coefficient vector.

    Magnitudes ``scale * i**-decay`` (``i = 1..n``, ``scale`` defaults to
    ``sqrt(n)``) are placed in a random order with random signs. An infinite
    ``decay`` keeps only the top ``k`` entries, each of magnitude ``scale``,
    giving an exactly k-sparse vector.
    """
    gen = SplitMix64(seed)
    scale = math.sqrt(n) if scale is None else float(scale)
    i = np.arange(1, n + 1, dtype=np.float64)
    if math.isinf(decay):
        mags = np.where(i <= k, scale, 0.0)
    else:
        mags = scale * i ** (-float(decay))
    order = gen.permutation(n)
    x = np.zeros(n)
    x[order] = mags * gen.signs(n)
    return x


def build_transform(spec, n=None, shape=None):
    """Transform from a name: ``dct``, ``dft``, ``hadamard``, ``dct2d`` or ``file:PATH``."""
    if spec.startswith("file:"):
        return load_transform(spec[5:], n)
    if spec == "dct2d" or shape is not None:
        return make_transform("dct2d", n, shape=shape)
    return make_transform(spec, n)


def _image_paths(directory):
    names = sorted(f for f in os.listdir(directory) if f.lower().endswith((".pgm", ".ppm", ".pnm")))
    if not names:
        raise ConfigError(f"no PGM/PPM images in {directory}")
    return [os.path.join(directory, f) for f in names]


class _Instance:
    """Per-configuration state shared by every trial (transform, images)."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.images = None
        shape = None
        if cfg.dataset == "image-dir":
            self.images = [read_image(p) for p in _image_paths(cfg.image_dir)]
            shapes = {img.shape[:2] for img, _ in self.images}
            if len(shapes) != 1:
                raise ConfigError("all images in image_dir must share one size")
            shape = shapes.pop()
            if max(shape) > MAX_IMAGE_SIDE:
                raise ConfigError(f"images are capped at {MAX_IMAGE_SIDE}x{MAX_IMAGE_SIDE}")
            if shape[0] * shape[1] != cfg.n:
                raise ConfigError(f"n={cfg.n} does not match image size {shape}")
        self.F = build_transform(cfg.transform, cfg.n, shape)
        if self.F.n != cfg.n:
            raise ConfigError(f"transform size {self.F.n} does not match n={cfg.n}")
        self.M = self.F if cfg.convention == "synthesis" else self.F.conj_transpose()
        self.A = StackedOperator(self.M)

    def coefficients(self, seed):
        cfg = self.cfg
        if self.images is None:
            return make_compressible(cfg.n, cfg.k, cfg.decay, seed, cfg.scale)
        gen = SplitMix64(seed)
        px, maxval = self.images[gen.below(len(self.images))]
        channel = gen.below(px.shape[2])
        x = to_unit(px[:, :, channel], maxval).ravel()
        # signal x = M xhat  =>  xhat = M* x
        return self.M.conj_transpose().matrix @ x


_INSTANCE_CACHE = {}


def _instance(cfg):
    key = id(cfg)
    inst = _INSTANCE_CACHE.get(key)
    if inst is None or inst.cfg is not cfg:
        _INSTANCE_CACHE.clear()
        inst = _INSTANCE_CACHE[key] = _Instance(cfg)
    return inst


def _norms(v):
    v = np.asarray(v)
    return l1_norm(v), float(np.linalg.norm(v)), float(np.max(np.abs(v))) if v.size else 0.0


def _iht_iterations(cfg, c, norm_head, norm_e):
    if cfg.T != "auto":
        return int(cfg.T)
    d = math.sqrt(c * cfg.k * cfg.t / cfg.n)
    if d == 0.0:
        return 0
    Ts = []
    rho1, rho2 = math.sqrt(27.0) * d, 2.0 * math.sqrt(2.0) * d
    if rho1 < 1.0:
        Ts.append(bounds.min_iterations_v1(cfg.iht_eps, norm_head, norm_e, rho1))
    if rho2 < 1.0:
        Ts.append(bounds.min_iterations_v2(cfg.iht_eps, norm_head, rho2))
    return max(Ts) if Ts else FALLBACK_T


def run_trial(cfg, trial_index, instance=None):
    """Run one seeded trial; returns a :class:`TrialRecord`."""
    inst = instance or _instance(cfg)
    seed = derive_seed(cfg.seed, trial_index)
    xhat = inst.coefficients(derive_seed(seed, 0))
    spec = NoiseSpec(cfg.noise_model, derive_seed(seed, 1), cfg.t if cfg.noise_model == "L0" else 0)
    e = spec.draw(cfg.n)
    M = inst.M
    y = M.matrix @ xhat + e

    target = head_k(xhat, cfg.k)
    norm_head = float(np.linalg.norm(target))
    norm_tail = float(np.linalg.norm(tail_k(xhat, cfg.k)))
    norm_e = float(np.linalg.norm(e))
    c = M.coherence_c
    rec = TrialRecord(trial=trial_index, seed=seed, budget=spec.realized, converged=True,
                      hypotheses_ok=False, iterations=0)

    alg = cfg.algorithm
    if alg == "IHT":
        T = _iht_iterations(cfg, c, norm_head, norm_e)
        x0 = random_start(cfg.n, cfg.k, cfg.t, derive_seed(seed, 2)) if cfg.random_start else None
        res = iht(y, inst.A, IhtConfig(cfg.k, cfg.t, T), x0=x0)
        xs = res.xhat
        rec.iterations = res.iterations
        r1, r2, best = bounds.iht_best_bound(c, cfg.k, cfg.t, cfg.n, norm_head, norm_e, norm_tail, T)
        rec.upsilon_v1, rec.upsilon_v2 = r1.upsilon, r2.upsilon
        if best is not None:
            rec.hypotheses_ok = True
            rec.upsilon_l2 = best.upsilon
            if r1.hypotheses_ok:
                rho = r1.constants["rho"]
                eps = rho ** (T + 1) * math.hypot(norm_head, norm_e)
                rec.upsilon_linf = bounds.iht_secondary_report(c, cfg.k, cfg.t, cfg.n, norm_tail, eps, "inf").upsilon
            else:
                rec.upsilon_linf = best.upsilon
    elif alg == "BP-L0":
        res = bp_l0(y, inst.A, norm_tail, cfg.solver)
        xs = res.xhat
        rec.iterations = res.iterations
        rec.converged = res.diagnostics["feasible"]
        rec.max_violation = res.diagnostics["max_violation"]
        rec.l1_solution = l1_norm(res.stacked)
        rec.l1_truth = l1_norm(target) + l1_norm(e)
        rep = bounds.bp_l0_bound(c, cfg.k, cfg.t, cfg.n, norm_tail)
        rec.hypotheses_ok = rep.hypotheses_ok
        rec.upsilon_l2 = rep.upsilon
    else:
        sparse = int(np.count_nonzero(xhat)) <= cfg.k
        if alg == "BP":
            xs, diag = basis_pursuit(y, M.matrix, norm_e, cfg.solver, gram_scale=1.0)
            b1, b2 = bounds.bp_l2_bounds(cfg.k, norm_e)
        else:
            eta1 = float(np.max(np.abs(e)))
            eta2 = float(np.max(np.abs(M.conj_transpose().matrix @ e)))
            xs, diag = dantzig_selector(y, M.matrix, eta1, eta2, cfg.solver)
            b1, b2 = bounds.ds_bounds(cfg.k, eta2)
        rec.iterations = diag.iterations
        rec.converged = diag.feasible
        rec.max_violation = diag.max_violation
        rec.l1_solution = l1_norm(xs)
        rec.l1_truth = l1_norm(xhat)
        rec.hypotheses_ok = sparse
        if sparse:
            rec.upsilon_l1, rec.upsilon_l2 = b1, b2

    rec.err_l1, rec.err_l2, rec.err_linf = _norms(xs - target)
    return rec


# ---------------------------------------------------------------------------
# aggregation and reports


def _mean(values):
    return math.fsum(values) / len(values) if values else None


def aggregate(cfg, records):
    """Fold trial records into a :class:`MetricsRow`."""
    norms = REPORT_NORMS[cfg.bench]
    used = [r for r in records if r.converged]
    slack = 0.0 if cfg.algorithm == "IHT" else SOLVER_SLACK
    hyp = bool(used) and all(r.hypotheses_ok for r in used)
    delta, Delta, mean_ups, viol = {}, {}, {}, {}
    for p in norms:
        errs = [r.error(p) for r in used]
        delta[p] = _mean(errs)
        if hyp:
            ups = [r.upsilon(p) for r in used]
            Delta[p] = _mean([u - e for u, e in zip(ups, errs)])
            mean_ups[p] = _mean(ups)
            viol[p] = sum(1 for u, e in zip(ups, errs) if e > u + slack)
        else:
            Delta[p] = mean_ups[p] = viol[p] = None
    notes = []
    if not hyp:
        notes.append("out-of-hypothesis: bound columns omitted")
    notes.append("upsilon uses ground-truth norms per trial")
    if cfg.algorithm == "IHT":
        notes.append("IHT upsilon_l2 is the smaller of the two valid regimes (harness choice)")
    return MetricsRow(
        bench=cfg.bench,
        budget_name=BUDGET_NAMES[cfg.noise_model],
        budget_avg=_mean([r.budget for r in used]),
        norms=norms,
        delta=delta,
        Delta=Delta,
        mean_upsilon=mean_ups,
        violations=viol,
        trials=len(records),
        trials_used=len(used),
        trials_failed=len(records) - len(used),
        hypotheses_ok=hyp,
        notes=notes,
    )


def run_trials(cfg, jobs=1):
    inst = _Instance(cfg)
    if jobs <= 1 or cfg.trials == 1:
        return [run_trial(cfg, i, inst) for i in range(cfg.trials)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(partial(run_trial, cfg), range(cfg.trials), chunksize=max(1, cfg.trials // (4 * jobs))))


def run_experiment(cfg, jobs=1, out=None, formats=("csv", "json")):
    """Run every trial, aggregate, and optionally write reports under ``out``.

    Returns ``(MetricsRow, records)``.
    """
    records = run_trials(cfg, jobs)
    row = aggregate(cfg, records)
    failed = row.trials_failed
    if failed:
        log.warning("%d of %d trials did not converge and were excluded", failed, row.trials)
    if out is not None:
        write_reports(cfg, row, records, out, formats)
    return row, records


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def config_dict(cfg):
    d = {f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name != "solver"}
    d["solver"] = asdict(cfg.solver)
    d["decay"] = "inf" if math.isinf(cfg.decay) else cfg.decay
    return d


def summary_json(cfg, row):
    return json.dumps({"config": config_dict(cfg), "metrics": row.to_dict()}, indent=2, sort_keys=True) + "\n"


def _cell(name, value):
    return f"{name}=n/a" if value is None else f"{name}={value:.4g}"


def table_line(row):
    """One report row: budget average, then the delta columns, then the Delta columns."""
    cols = [_cell(row.budget_name, row.budget_avg)]
    cols += [_cell(f"delta_{p}", row.delta[p]) for p in row.norms]
    cols += [_cell(f"Delta_{p}", row.Delta[p]) for p in row.norms]
    return "  ".join(cols)


def scatter_svg(records, p="l2", size=400, pad=40):
    """SVG scatter of (error, upsilon) per trial with the y = x diagonal."""
    pts = [(r.error(p), r.upsilon(p)) for r in records if r.converged and r.upsilon(p) is not None]
    top = max([max(e, u) for e, u in pts], default=1.0) or 1.0
    span = size - 2 * pad

    def px(v):
        return pad + span * v / top

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{pad}" y1="{size - pad}" x2="{size - pad}" y2="{pad}" stroke="#999" stroke-dasharray="4"/>',
        f'<text x="{size / 2}" y="{size - 8}" text-anchor="middle" font-size="12">error ({p})</text>',
        f'<text x="12" y="{size / 2}" font-size="12" transform="rotate(-90 12 {size / 2})" text-anchor="middle">upsilon</text>',
    ]
    for e, u in pts:
        color = "#c00" if e > u else "#06c"
        out.append(f'<circle cx="{px(e):.2f}" cy="{size - px(u):.2f}" r="2.5" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_reports(cfg, row, records, out, formats=("csv", "json")):
    os.makedirs(out, exist_ok=True)
    written = []
    if "csv" in formats:
        path = os.path.join(out, f"{cfg.bench}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(records_csv(records))
        written.append(path)
    if "json" in formats:
        path = os.path.join(out, f"{cfg.bench}.json")
        with open(path, "w") as fh:
            fh.write(summary_json(cfg, row))
        written.append(path)
    if "svg" in formats:
        path = os.path.join(out, f"{cfg.bench}.svg")
        with open(path, "w") as fh:
            fh.write(scatter_svg(records, row.norms[-1]))
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# images


def _recover_channel(algorithm, y, Mt, k, t, e, xhat, solver, T):
    """Recover DCT coefficients of one channel; returns ``(coeffs, BoundReport or None, ok)``."""
    A = StackedOperator(Mt)
    c, n = Mt.coherence_c, Mt.n
    target = head_k(xhat, k)
    norm_tail = float(np.linalg.norm(xhat - target))
    if algorithm == "IHT":
        res = iht(y, A, IhtConfig(k, t, T))
        _, _, best = bounds.iht_best_bound(c, k, t, n, float(np.linalg.norm(target)),
                                           float(np.linalg.norm(e)), norm_tail, res.diagnostics["T"])
        return res.xhat, best, True
    if algorithm == "BP-L0":
        res = bp_l0(y, A, norm_tail, solver)
        rep = bounds.bp_l0_bound(c, k, t, n, norm_tail)
        return res.xhat, rep if rep.hypotheses_ok else None, res.diagnostics["feasible"]
    if algorithm == "BP":
        xs, diag = basis_pursuit(y, Mt.matrix, float(np.linalg.norm(e)), solver, gram_scale=1.0)
        rep = bounds.bp_l2_report(k, float(np.linalg.norm(e)), "l2", int(np.count_nonzero(xhat)) <= k)
        return xs, rep if rep.hypotheses_ok else None, diag.feasible
    if algorithm == "DS":
        eta1 = float(np.max(np.abs(e)))
        eta2 = float(np.max(np.abs(Mt.conj_transpose().matrix @ e)))
        xs, diag = dantzig_selector(y, Mt.matrix, eta1, eta2, solver)
        rep = bounds.ds_report(k, eta2, "l2", int(np.count_nonzero(xhat)) <= k)
        return xs, rep if rep.hypotheses_ok else None, diag.feasible
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def image_pipeline(path, k, algorithm="IHT", noise=None, t=None, out_path=None,
                   solver=None, T="auto"):
    """Corrupt, recover and reconstruct a PGM/PPM image channel by channel.

    Pixels are scaled to [0, 1]; each channel is flattened row-major and
    analysed with the separable orthonormal 2-D DCT (``xhat = F x``). The
    reconstruction is ``F^T head_k(x#)`` clamped to [0, 1].

    Parameters
    ----------
    noise : NoiseSpec, optional
        Channel ``ch`` uses seed ``derive_seed(noise.seed, ch)``; default no noise.
    t : int, optional
        Noise budget given to IHT / BP-L0; defaults to ``noise.t_max`` (0 without noise).

    Returns
    -------
    (ndarray, dict)
        Reconstructed image in [0, 1] with shape ``(h, w, channels)`` and a
        metrics dict with one entry per channel.
    """
    pixels, maxval = read_image(path)
    h, w, channels = pixels.shape
    if max(h, w) > MAX_IMAGE_SIDE:
        raise ConfigError(f"image {w}x{h} exceeds the {MAX_IMAGE_SIDE}x{MAX_IMAGE_SIDE} cap")
    n = h * w
    if not 0 <= k <= n:
        raise ConfigError(f"k must lie in [0, {n}]")
    noise = noise or NoiseSpec("NONE", 0)
    if t is None:
        t = noise.t_max if noise.model == "L0" else 0
    solver = solver or SolverConfig()
    F = make_transform("dct2d", n, shape=(h, w))
    Ft = F.conj_transpose()
    out = np.empty((h, w, channels))
    report = {"shape": [h, w, channels], "k": k, "t": t, "algorithm": algorithm, "channels": []}
    for ch in range(channels):
        x = to_unit(pixels[:, :, ch], maxval).ravel()
        xhat = F.matrix @ x
        sub = NoiseSpec(noise.model, derive_seed(noise.seed, ch), noise.t_max)
        e = sub.draw(n)
        y = x + e
        coeffs, rep, ok = _recover_channel(algorithm, y, Ft, k, t, e, xhat, solver, T)
        kept = head_k(coeffs, k)
        rec = np.clip(np.real(Ft.matrix @ kept), 0.0, 1.0)
        out[:, :, ch] = rec.reshape(h, w)
        best_k = Ft.matrix @ head_k(xhat, k)
        err = float(np.linalg.norm(coeffs - head_k(xhat, k)))
        report["channels"].append({
            "budget": sub.realized,
            "coef_err_l2": err,
            "pixel_err_l2_vs_best_k": float(np.linalg.norm(rec - np.clip(best_k, 0.0, 1.0))),
            "upsilon_l2": None if rep is None else rep.upsilon,
            "theorem": None if rep is None else rep.theorem,
            "hypotheses_ok": rep is not None,
            "converged": bool(ok),
        })
    if out_path is not None:
        write_image(out_path, from_unit(out, maxval), maxval)
    return out, report


def with_overrides(cfg, **kw):
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
