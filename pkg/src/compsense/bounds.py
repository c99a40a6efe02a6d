"""Closed-form recovery-error bounds and their hypothesis checks.

Each ``*_bound`` function returns a :class:`BoundReport` carrying the named
constants, whether the theorem's hypotheses hold, and the bound ``upsilon``
(``None`` when they do not). Hypothesis boundaries are failures: ``rho = 1``
or ``theta = 1`` does not qualify.

IHT (stacked operator ``[F I]``, (k,t)-sparse model), with
``d = sqrt(c k t / n)``:

* variant 1: ``rho = sqrt(27) d``, ``tau = sqrt(3) sqrt(1 + 2 d) / (1 - rho)``,
  ``upsilon = rho**(T+1) sqrt(|head|^2 + |e|^2) + tau |tail|``
* variant 2: ``rho = 2 sqrt(2) d``, ``tau = 2 / (1 - rho)``,
  ``upsilon = rho**(T+1) |head| + tau (|tail| + |e|)``

BP with the stacked operator: ``delta = d``, ``beta = sqrt(max(k,t) c / n)``,
``theta = sqrt(k+t) beta / (1 - delta)``, ``tau = sqrt(1+delta) / (1-delta)``,
``upsilon = (2 tau sqrt(k+t) / (1-theta) (1 + beta/(1-delta)) + 2 tau) |tail|``.

BP with a unitary operator: ``|x# - x|_1 <= 4 sqrt(k) eta``, ``|x# - x|_2 <= 6 eta``.
Dantzig selector: ``|x# - x|_1 <= 4 k eta2``, ``|x# - x|_2 <= 6 sqrt(k) eta2``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

THEOREMS = (
    "IHT-v1",
    "IHT-v2",
    "IHT-inf",
    "IHT-l2b",
    "BP-L0",
    "BP-L2-l1",
    "BP-L2-l2",
    "DS-l1",
    "DS-l2",
)


@dataclass
class BoundReport:
    theorem: str
    constants: dict
    hypotheses_ok: bool
    reasons: list = field(default_factory=list)
    upsilon: float = None

    def __post_init__(self):
        if not self.hypotheses_ok:
            self.upsilon = None

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "constants": dict(self.constants),
            "hypotheses_ok": self.hypotheses_ok,
            "reasons": list(self.reasons),
            "upsilon": self.upsilon,
        }


def _nonneg(**kw):
    for name, v in kw.items():
        if v < 0 or math.isnan(v):
            raise ValueError(f"{name} must be non-negative, got {v}")


def _strict_unit(name, value, reasons):
    if not 0.0 < value < 1.0:
        reasons.append(f"{name} = {value:.6g} is not in (0, 1)")


def iht_bound_v1(c, k, t, n, norm_head, norm_e, norm_tail, T):
    """IHT bound, first (rho, tau) regime."""
    _nonneg(c=c, k=k, t=t, norm_head=norm_head, norm_e=norm_e, norm_tail=norm_tail, T=T)
    d = math.sqrt(c * k * t / n)
    rho = math.sqrt(27.0) * d
    reasons = []
    _strict_unit("rho", rho, reasons)
    ok = not reasons
    tau = math.sqrt(3.0) * math.sqrt(1.0 + 2.0 * d) / (1.0 - rho) if ok else math.nan
    ups = None
    if ok:
        ups = rho ** (T + 1) * math.hypot(norm_head, norm_e) + tau * norm_tail
    return BoundReport("IHT-v1", {"rho": rho, "tau": tau, "T": T}, ok, reasons, ups)


def iht_bound_v2(c, k, t, n, norm_head, norm_e, norm_tail, T):
    """IHT bound, second (rho, tau) regime; admits larger k t at the cost of |e|."""
    _nonneg(c=c, k=k, t=t, norm_head=norm_head, norm_e=norm_e, norm_tail=norm_tail, T=T)
    rho = 2.0 * math.sqrt(2.0) * math.sqrt(c * k * t / n)
    reasons = []
    _strict_unit("rho", rho, reasons)
    ok = not reasons
    tau = 2.0 / (1.0 - rho) if ok else math.nan
    ups = None
    if ok:
        ups = rho ** (T + 1) * norm_head + tau * (norm_tail + norm_e)
    return BoundReport("IHT-v2", {"rho": rho, "tau": tau, "T": T}, ok, reasons, ups)


def iht_best_bound(c, k, t, n, norm_head, norm_e, norm_tail, T):
    """Both IHT regimes plus the smaller of the valid bounds (or None)."""
    r1 = iht_bound_v1(c, k, t, n, norm_head, norm_e, norm_tail, T)
    r2 = iht_bound_v2(c, k, t, n, norm_head, norm_e, norm_tail, T)
    valid = [r for r in (r1, r2) if r.hypotheses_ok]
    best = min(valid, key=lambda r: r.upsilon) if valid else None
    return r1, r2, best


def iht_secondary_bounds(c, k, t, n, tau, norm_tail, eps):
    """ell_inf and ell_2 companions of the first IHT regime.

    ``(sqrt(2 c t / n) (tau |tail| + eps), sqrt(4 c k t / n) (tau |tail| + eps))``
    """
    _nonneg(c=c, k=k, t=t, tau=tau, norm_tail=norm_tail, eps=eps)
    base = tau * norm_tail + eps
    return math.sqrt(2.0 * c * t / n) * base, math.sqrt(4.0 * c * k * t / n) * base


def _min_iterations(eps, scale, rho):
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if scale <= 0:
        return 0
    T = max(0, math.ceil((math.log(1.0 / eps) + math.log(scale)) / math.log(1.0 / rho)))
    # guard the post-condition against rounding in the logs
    while rho ** T * scale > eps:
        T += 1
    return T


def min_iterations_v1(eps, norm_head, norm_e, rho):
    """Smallest ``T >= (log(1/eps) + log sqrt(head^2 + e^2)) / log(1/rho)``, ``T >= 0``.

    The result satisfies ``rho**T * sqrt(head^2 + e^2) <= eps``.
    """
    return _min_iterations(eps, math.hypot(norm_head, norm_e), rho)


def min_iterations_v2(eps, norm_head, rho):
    """Same as :func:`min_iterations_v1` with scale ``|head|`` (second IHT regime)."""
    return _min_iterations(eps, float(norm_head), rho)


def bp_l0_bound(c, k, t, n, norm_tail):
    """Basis pursuit over ``[F I]`` with ``eta = |tail|``."""
    _nonneg(c=c, k=k, t=t, norm_tail=norm_tail)
    delta = math.sqrt(c * k * t / n)
    beta = math.sqrt(max(k, t) * c / n)
    reasons = []
    _strict_unit("delta", delta, reasons)
    if delta < 1.0:
        theta = math.sqrt(k + t) * beta / (1.0 - delta)
        tau = math.sqrt(1.0 + delta) / (1.0 - delta)
        _strict_unit("theta", theta, reasons)
    else:
        theta = tau = math.inf
    ok = not reasons
    coef = None
    ups = None
    if ok:
        coef = 2.0 * tau * math.sqrt(k + t) / (1.0 - theta) * (1.0 + beta / (1.0 - delta)) + 2.0 * tau
        ups = coef * norm_tail
    consts = {"delta": delta, "beta": beta, "theta": theta, "tau": tau, "coefficient": coef}
    return BoundReport("BP-L0", consts, ok, reasons, ups)


def bp_l2_bounds(k, eta):
    """``(4 sqrt(k) eta, 6 eta)``: ell_1 and ell_2 bounds for BP with unitary F."""
    _nonneg(k=k, eta=eta)
    return 4.0 * math.sqrt(k) * eta, 6.0 * eta


def ds_bounds(k, eta2):
    """``(4 k eta2, 6 sqrt(k) eta2)``: ell_1 and ell_2 bounds for the Dantzig selector."""
    _nonneg(k=k, eta2=eta2)
    return 4.0 * k * eta2, 6.0 * math.sqrt(k) * eta2


def bp_l2_report(k, eta, norm="l2", truth_sparse=True, noise_within=True):
    reasons = []
    if not truth_sparse:
        reasons.append("ground truth is not k-sparse")
    if not noise_within:
        reasons.append("noise exceeds eta")
    b1, b2 = bp_l2_bounds(k, eta)
    name = "BP-L2-l1" if norm == "l1" else "BP-L2-l2"
    return BoundReport(name, {"k": k, "eta": eta}, not reasons, reasons, b1 if norm == "l1" else b2)


def ds_report(k, eta2, norm="l2", truth_sparse=True, noise_within=True):
    reasons = []
    if not truth_sparse:
        reasons.append("ground truth is not k-sparse")
    if not noise_within:
        reasons.append("noise exceeds eta1 or eta2")
    b1, b2 = ds_bounds(k, eta2)
    name = "DS-l1" if norm == "l1" else "DS-l2"
    return BoundReport(name, {"k": k, "eta2": eta2}, not reasons, reasons, b1 if norm == "l1" else b2)


def iht_secondary_report(c, k, t, n, norm_tail, eps, norm="inf"):
    """Report form of :func:`iht_secondary_bounds`, tied to the first regime's hypotheses."""
    v1 = iht_bound_v1(c, k, t, n, 0.0, 0.0, norm_tail, 0)
    name = "IHT-inf" if norm == "inf" else "IHT-l2b"
    consts = {"rho": v1.constants["rho"], "tau": v1.constants["tau"], "eps": eps}
    if not v1.hypotheses_ok:
        return BoundReport(name, consts, False, list(v1.reasons))
    b_inf, b_l2 = iht_secondary_bounds(c, k, t, n, v1.constants["tau"], norm_tail, eps)
    return BoundReport(name, consts, True, [], b_inf if norm == "inf" else b_l2)


# ---------------------------------------------------------------------------
# Auxiliary inequalities, checked on random draws


def lp_tail_bound_holds(x, k, p=2.0, q=1.0):
    """``inf_{z k-sparse} |x - z|_p <= |x|_q / k**(1/q - 1/p)`` for ``p > q > 0``."""
    if not p > q > 0 or k < 1:
        raise ValueError("need p > q > 0 and k >= 1")
    mags = np.sort(np.abs(np.asarray(x)))[::-1]
    lhs = float(np.sum(mags[k:] ** p) ** (1.0 / p))
    rhs = float(np.sum(mags ** q) ** (1.0 / q)) / k ** (1.0 / q - 1.0 / p)
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)


@dataclass
class LemmaReport:
    trials: int
    nullspace_violations: int
    lp_tail_violations: int
    worst_nullspace_ratio: float
    worst_lp_ratio: float


def lemma_inequality_suite(F, trials, seed):
    """Randomized checks of two auxiliary inequalities for a unitary ``F``.

    (a) null-space form with ``rho -> 0``: ``|v_S|_2 <= |F v|_2`` for random
    ``v`` and random ``S`` with ``|S| <= k``;
    (b) best k-term ell_2 error ``<= |x|_1 / sqrt(k)``.

    Violation counts are reported; both should be zero.
    """
    from compsense.rng import SplitMix64

    gen = SplitMix64(seed)
    n = F.n
    ns_viol = lp_viol = 0
    worst_ns = worst_lp = 0.0
    for _ in range(int(trials)):
        v = (gen.random(n) - 0.5) + 1j * (gen.random(n) - 0.5)
        k = 1 + gen.below(n)
        S = gen.sample(n, 1 + gen.below(k))
        lhs = float(np.linalg.norm(v[S]))
        rhs = float(np.linalg.norm(F.matrix @ v))
        worst_ns = max(worst_ns, lhs / rhs)
        if lhs > rhs * (1 + 1e-12):
            ns_viol += 1
        x = (gen.random(n) - 0.5) * gen.signs(n) * np.exp(4 * gen.random(n))
        l, r, ok = lp_tail_bound_holds(x, k, 2.0, 1.0)
        worst_lp = max(worst_lp, l / r if r else 0.0)
        lp_viol += not ok
    return LemmaReport(int(trials), ns_viol, lp_viol, worst_ns, worst_lp)


def bound_report(theorem, **p):
    """Dispatch by theorem name; used by the CLI."""
    g = lambda name, default=0.0: float(p.get(name) if p.get(name) is not None else default)  # noqa: E731
    if theorem == "IHT-v1":
        return iht_bound_v1(g("c", 1), int(g("k")), int(g("t")), int(g("n")), g("norm_head"), g("norm_e"), g("norm_tail"), int(g("T")))
    if theorem == "IHT-v2":
        return iht_bound_v2(g("c", 1), int(g("k")), int(g("t")), int(g("n")), g("norm_head"), g("norm_e"), g("norm_tail"), int(g("T")))
    if theorem in ("IHT-inf", "IHT-l2b"):
        return iht_secondary_report(g("c", 1), int(g("k")), int(g("t")), int(g("n")), g("norm_tail"), g("eps"),
                                    "inf" if theorem == "IHT-inf" else "l2")
    if theorem == "BP-L0":
        return bp_l0_bound(g("c", 1), int(g("k")), int(g("t")), int(g("n")), g("norm_tail"))
    if theorem in ("BP-L2-l1", "BP-L2-l2"):
        return bp_l2_report(int(g("k")), g("eta"), "l1" if theorem.endswith("l1") else "l2")
    if theorem in ("DS-l1", "DS-l2"):
        return ds_report(int(g("k")), g("eta2"), "l1" if theorem.endswith("l1") else "l2")
    raise ValueError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
