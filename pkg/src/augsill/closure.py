"""Steep-limit product approximations and finite-closure error measurements.

The lifted dynamics of a conjunctive dictionary stay inside the span of the
dictionary only approximately. This module quantifies that approximation:
pairwise products of members against their steep-limit targets, Lie-derivative
errors of whole dictionaries against staged linearizations, the closed-form
bounds those gaps obey in expectation, and the polynomial counterexample that
motivates bounded dictionaries in the first place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import qmc

from .dictionaries import (
    ConjunctiveFunction,
    Dictionary,
    Family,
    Kind,
    ScalarBasisParams,
    h_function,
    product_limit_logistic,
    scale_steepness,
    stable_logistic,
)
from .errors import (
    DataError,
    DimensionMismatchError,
    HypothesisViolationError,
    ParameterDomainError,
    RateFitError,
    UnsupportedFamilyError,
)

# Below this floor a measured error is treated as underflow, not signal.
RATE_FLOOR = 1e-30
# Product theorems exclude evaluation exactly on a center; this is the radius.
PRODUCT_GAP_MIN = 1e-9
# Lie-derivative fixtures keep a visibly larger guard band around centers.
CLOSURE_GAP_MIN = 1e-3

DEFAULT_ALPHA_SCALES = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)


class PairKind(str, Enum):
    LOG_LOG = "loglog"
    LOG_RBF = "logrbf"
    RBF_RBF = "rbfrbf"


# -- pairwise product errors ----------------------------------------------------


def _batch_values(f: ConjunctiveFunction, pts):
    """Member values at an (r, m) point batch."""
    t = f.steepnesses[None, :] * (pts - f.centers[None, :])
    lam = stable_logistic(t)
    per = lam * (1.0 - lam) if f.kind == Kind.RBF else lam
    return per.prod(axis=1)


def _check_pair_kinds(pair, theta_l, theta_other):
    want = {
        PairKind.LOG_LOG: (Kind.LOGISTIC, Kind.LOGISTIC),
        PairKind.LOG_RBF: (Kind.LOGISTIC, Kind.RBF),
        PairKind.RBF_RBF: (Kind.RBF, Kind.RBF),
    }[pair]
    if (theta_l.kind, theta_other.kind) != want:
        raise ParameterDomainError(
            f"{pair.value} pair expects member kinds {want[0].value}/{want[1].value}"
        )
    if theta_l.m != theta_other.m:
        raise DimensionMismatchError("members have mismatched dimension")


def _pair_errors_batch(pair, theta_l, theta_other, pts, alpha_scale):
    """|product - steep-limit target| at every row of pts.

    Callers must have verified the center-avoidance hypothesis already; this
    core assumes it and vectorizes freely.
    """
    tl = scale_steepness(theta_l, alpha_scale)
    to = scale_steepness(theta_other, alpha_scale)
    prod = _batch_values(tl, pts) * _batch_values(to, pts)
    if pair == PairKind.LOG_LOG:
        # Scaling both members by the same factor commutes with the limit
        # parameters, so the target is the scaled limit member.
        star = scale_steepness(product_limit_logistic(theta_l, theta_other), alpha_scale)
        target = _batch_values(star, pts)
    elif pair == PairKind.LOG_RBF:
        if np.any(theta_other.centers >= theta_l.centers):
            target = _batch_values(to, pts)
        else:
            target = 0.0
    else:
        target = 0.0
    return np.abs(prod - target)


def product_error(pair, y, theta_l, theta_other, alpha_scale=1.0):
    """Gap between a pairwise member product and its steep-limit target.

    The target is the limit logistic for logistic-logistic pairs, the branch
    function (the RBF itself, or zero) for logistic-RBF pairs, and zero for
    RBF-RBF pairs. ``alpha_scale`` multiplies every stored steepness before
    evaluation, so sweeping it traces the convergence toward the limit.
    """
    pair = PairKind(pair)
    _check_pair_kinds(pair, theta_l, theta_other)
    if not np.isfinite(alpha_scale) or alpha_scale <= 0:
        raise ParameterDomainError(f"alpha_scale must be finite and > 0: {alpha_scale}")
    y = np.asarray(y, dtype=float)
    if y.shape != (theta_l.m,):
        raise DimensionMismatchError(f"expected y of shape ({theta_l.m},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ParameterDomainError("y must be finite")
    for f in (theta_l, theta_other):
        if np.min(np.abs(y - f.centers)) < PRODUCT_GAP_MIN:
            raise HypothesisViolationError(
                "evaluation point sits on a member center, which the limit "
                "statements exclude"
            )
    err = _pair_errors_batch(pair, theta_l, theta_other, y[None, :], alpha_scale)
    return float(err[0])


class RateFit(NamedTuple):
    slope: float
    r_squared: float


def convergence_rate(alphas, errors) -> RateFit:
    """Least-squares slope of ln(error) against alpha, with its r-squared.

    Errors are floored at RATE_FLOOR before the log. A constant sweep has no
    variance to explain, so it reports slope 0 with r_squared 1.
    """
    x = np.asarray(alphas, dtype=float)
    e = np.asarray(errors, dtype=float)
    if x.ndim != 1 or e.shape != x.shape:
        raise DimensionMismatchError("alphas and errors must be matching 1-d sequences")
    if x.size < 5:
        raise DataError(f"need >= 5 sweep points, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ParameterDomainError("alphas must be finite")
    floored = np.maximum(e, RATE_FLOOR)
    if not np.all(np.isfinite(floored)) or np.any(floored <= 0):
        raise RateFitError("errors contain nonpositive or non-finite values")
    ln_e = np.log(floored)
    design = np.column_stack([np.ones_like(x), x])
    coef, _, _, _ = np.linalg.lstsq(design, ln_e, rcond=None)
    resid = ln_e - design @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ln_e - ln_e.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(float(coef[1]), float(r2))


# -- theorem sweep suite ---------------------------------------------------------

THEOREM_NAMES = ("loglog", "logrbf_overlap", "logrbf_disjoint", "rbfrbf")

_THEOREM_PAIR = {
    "loglog": PairKind.LOG_LOG,
    "logrbf_overlap": PairKind.LOG_RBF,
    "logrbf_disjoint": PairKind.LOG_RBF,
    "rbfrbf": PairKind.RBF_RBF,
}


@dataclass(frozen=True)
class TheoremConfig:
    theorem: str
    m: int
    config_id: int
    theta_l: ConjunctiveFunction
    theta_other: ConjunctiveFunction

    @property
    def pair(self) -> PairKind:
        return _THEOREM_PAIR[self.theorem]


@dataclass(frozen=True)
class ClosureReport:
    """One configuration's alpha sweep with its fitted decay rate."""

    theorem: str
    m: int
    config_id: int
    alpha_scales: tuple
    sup_errors: tuple
    mean_errors: tuple
    bounds: tuple
    slope: float
    r_squared: float
    n_points: int


def _conjunctive(kind, centers, steeps):
    return ConjunctiveFunction(
        kind, tuple(ScalarBasisParams(float(c), float(a)) for c, a in zip(centers, steeps))
    )


def sample_theorem_config(theorem, config_id, seed=0, gap=0.2) -> TheoremConfig:
    """Random member pair satisfying one limit statement's hypotheses.

    Centers are separated by at least ``gap`` per dimension in the pattern the
    statement requires; steepnesses are drawn near 1 so the alpha sweep starts
    in the pre-asymptotic regime. The dimension cycles through 1..3 with
    config_id.
    """
    if theorem not in THEOREM_NAMES:
        raise ParameterDomainError(f"unknown theorem sweep {theorem!r}")
    t_idx = THEOREM_NAMES.index(theorem)
    m = config_id % 3 + 1
    rng = np.random.default_rng((seed, t_idx, config_id))
    mu_l = rng.uniform(-1.5, 1.5, size=m)
    sep = gap + rng.uniform(0.0, 1.0, size=m)
    if theorem == "loglog":
        mu_o = mu_l + sep
    elif theorem == "logrbf_overlap":
        # RBF center above the logistic center in dimension 0, below elsewhere.
        mu_o = mu_l - sep
        mu_o[0] = mu_l[0] + sep[0]
    elif theorem == "logrbf_disjoint":
        mu_o = mu_l - sep
    else:
        mu_o = mu_l + rng.choice((-1.0, 1.0), size=m) * sep
    a_l = rng.uniform(0.8, 1.25, size=m)
    a_o = rng.uniform(0.8, 1.25, size=m)
    kind_l = Kind.RBF if theorem == "rbfrbf" else Kind.LOGISTIC
    kind_o = Kind.LOGISTIC if theorem == "loglog" else Kind.RBF
    return TheoremConfig(
        theorem, m, config_id, _conjunctive(kind_l, mu_l, a_l), _conjunctive(kind_o, mu_o, a_o)
    )


def _halton_points(m, n_points, lo=-2.5, hi=2.5):
    sampler = qmc.Halton(d=m, scramble=False)
    return lo + (hi - lo) * sampler.random(n_points)


def _filter_near_centers(pts, centers_list, gap):
    keep = np.ones(pts.shape[0], dtype=bool)
    for c in centers_list:
        keep &= np.all(np.abs(pts - c[None, :]) >= gap, axis=1)
    return pts[keep]


def sweep_config(cfg: TheoremConfig, alpha_scales=DEFAULT_ALPHA_SCALES,
                 n_points=10_000, gap=0.2) -> ClosureReport:
    """Alpha sweep of one configuration over a low-discrepancy point set.

    Points come from an unscrambled Halton sequence on the data box with a
    per-dimension guard band of ``gap`` around both centers, so the whole
    report is bitwise reproducible. The bound column is the hypothesis-gap
    envelope 2 m exp(-scale * a_min * gap): every per-dimension factor of the
    product is within exp(-a_min * scale * gap) of its limit on the filtered
    set, and at most 2 m factors differ.
    """
    pts = _halton_points(cfg.m, n_points)
    pts = _filter_near_centers(
        pts, [cfg.theta_l.centers, cfg.theta_other.centers], gap
    )
    if pts.shape[0] < 100:
        raise DataError("center guard bands left too few sample points")
    a_min = float(min(cfg.theta_l.steepnesses.min(), cfg.theta_other.steepnesses.min()))
    sups, means, bounds = [], [], []
    for s in alpha_scales:
        errs = _pair_errors_batch(cfg.pair, cfg.theta_l, cfg.theta_other, pts, s)
        sups.append(float(errs.max()))
        means.append(float(errs.mean()))
        bounds.append(2.0 * cfg.m * math.exp(-s * a_min * gap))
    scales = np.asarray(alpha_scales, dtype=float)
    sup_arr = np.asarray(sups)
    live = sup_arr > RATE_FLOOR
    # Underflowed sweep points carry no rate information; drop them, keeping
    # at least the first five scales so the fit stays well-posed.
    if live.sum() >= 5:
        fit = convergence_rate(scales[live], sup_arr[live])
    else:
        fit = convergence_rate(scales[:5], sup_arr[:5])
    return ClosureReport(
        theorem=cfg.theorem,
        m=cfg.m,
        config_id=cfg.config_id,
        alpha_scales=tuple(float(s) for s in alpha_scales),
        sup_errors=tuple(sups),
        mean_errors=tuple(means),
        bounds=tuple(bounds),
        slope=fit.slope,
        r_squared=fit.r_squared,
        n_points=int(pts.shape[0]),
    )


def theorem_suite(theorems=THEOREM_NAMES, n_configs=50, alpha_scales=DEFAULT_ALPHA_SCALES,
                  seed=0, n_points=10_000, gap=0.2):
    """Sweep every requested limit statement over random valid configurations."""
    reports = []
    for theorem in theorems:
        for config_id in range(n_configs):
            cfg = sample_theorem_config(theorem, config_id, seed=seed, gap=gap)
            reports.append(sweep_config(cfg, alpha_scales, n_points, gap))
    return reports


def write_closure_csv(reports, path):
    lines = ["theorem,m,alpha_scale,sup_error,mean_error,bound"]
    for r in reports:
        for s, sup, mean, bound in zip(r.alpha_scales, r.sup_errors, r.mean_errors, r.bounds):
            lines.append(f"{r.theorem},{r.m},{s!r},{sup!r},{mean!r},{bound!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_rate_csv(reports, path):
    lines = ["theorem,config_id,slope,r_squared"]
    for r in reports:
        lines.append(f"{r.theorem},{r.config_id},{r.slope!r},{r.r_squared!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# -- Lie-derivative closure errors ----------------------------------------------


@dataclass(frozen=True)
class MemberClosureStats:
    """Gaps between a member's exact Lie derivative and staged surrogates.

    Stage (a) is the exact derivative, (b) replaces every pairwise product by
    its steep-limit target, (c) drops the leftover logistic weights from (b)
    so the result is linear in the lifted coordinates, and (products) is the
    other linear route that keeps raw member products instead.
    """

    index: int
    kind: Kind
    sup_exact_vs_limit: float
    mean_exact_vs_limit: float
    sup_limit_vs_linear: float
    mean_limit_vs_linear: float
    sup_exact_vs_linear: float
    mean_exact_vs_linear: float
    sup_exact_vs_products: float
    mean_exact_vs_products: float


def lie_closure_error(d: Dictionary, weights, sample_points):
    """Per-member closure gaps for a synthetic field spanned by the dictionary.

    The field is F_i(y) = sum_q weights[i, q] * member_q(y), so its exact Lie
    action on each member is expressible through the member's own gradient.
    Returns one MemberClosureStats per member, in dictionary order.
    """
    if d.family not in (Family.SILL, Family.AUGSILL):
        raise UnsupportedFamilyError(
            "closure staging needs conjunctive members (sill or augsill)"
        )
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != d.m:
        raise DimensionMismatchError(f"sample points must have shape (r, {d.m})")
    if not np.all(np.isfinite(pts)):
        raise ParameterDomainError("sample points must be finite")
    n = d.n_members
    w = np.asarray(weights, dtype=float)
    if w.shape != (d.m, n):
        raise DimensionMismatchError(f"weights must have shape ({d.m}, {n}), got {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ParameterDomainError("weights must be finite")
    c, a, _ = d._packed()
    gaps = np.abs(pts[:, None, :] - c[None, :, :])
    if n and gaps.min() < CLOSURE_GAP_MIN:
        raise HypothesisViolationError(
            f"sample points must avoid every center coordinate by {CLOSURE_GAP_MIN}"
        )

    n_log = d.n_logistic
    lam = stable_logistic(a[None, :, :] * (pts[:, None, :] - c[None, :, :]))
    lam_log, lam_rbf = lam[:, :n_log, :], lam[:, n_log:, :]
    vals_log = lam_log.prod(axis=2)
    vals_rbf = (lam_rbf * (1.0 - lam_rbf)).prod(axis=2)
    vals = np.concatenate([vals_log, vals_rbf], axis=1)
    field = vals @ w.T  # (r, m)

    # Exact Lie derivative: gradient of each member contracted with the field.
    s_log = (1.0 - lam_log) * vals_log[:, :, None]
    s_rbf = (1.0 - 2.0 * lam_rbf) * vals_rbf[:, :, None]
    sens = np.concatenate([s_log, s_rbf], axis=1)  # (r, n, m)
    exact = np.einsum("nm,rnm,rm->rn", a, sens, field)

    # Products route: same contraction with the member value pulled outside.
    products = vals * np.einsum("rm,nm->rn", field, a)

    c_log, a_log = c[:n_log], a[:n_log]
    c_rbf = c[n_log:]
    # Limit target of every logistic-logistic pair: larger center wins the
    # dimension, larger steepness breaks ties.
    take_l = (c_log[:, None, :] > c_log[None, :, :]) | (
        (c_log[:, None, :] == c_log[None, :, :])
        & (a_log[:, None, :] >= a_log[None, :, :])
    )
    c_star = np.where(take_l, c_log[:, None, :], c_log[None, :, :])
    a_star = np.where(take_l, a_log[:, None, :], a_log[None, :, :])
    lam_star = stable_logistic(
        a_star[None, :, :, :] * (pts[:, None, None, :] - c_star[None, :, :, :])
    )
    limit_star = lam_star.prod(axis=3)  # (r, n_log, n_log)
    # Logistic-RBF limit branch: the RBF survives when its center is at or
    # above the logistic's in some dimension.
    branch = np.any(
        c_rbf[None, :, :] >= c_log[:, None, :], axis=2
    )  # (n_log, n_rbf)
    limit_h = vals_rbf[:, None, :] * branch[None, :, :]  # (r, n_log, n_rbf)
    limit_targets = np.concatenate([limit_star, limit_h], axis=2)  # (r, n_log, n)

    # Logistic members: stage (b) keeps the (1 - lambda) weights, stage (c)
    # drops them.
    coef_b_log = np.einsum("li,rli,iq->rlq", a_log, 1.0 - lam_log, w)
    coef_c_log = np.einsum("li,iq->lq", a_log, w)
    stage_b_log = np.einsum("rlq,rlq->rl", coef_b_log, limit_targets)
    stage_c_log = np.einsum("lq,rlq->rl", coef_c_log, limit_targets)

    # RBF members: only logistic-target terms survive the limit; RBF-RBF
    # products vanish. Stage (b) keeps the (1 - 2 lambda) weights. The limit
    # target of the pair (logistic j, RBF k) is the RBF itself gated by the
    # same branch matrix, transposed to (k, j).
    a_r = a[n_log:]
    coef_b_rbf = np.einsum("ki,rki,ij->rkj", a_r, 1.0 - 2.0 * lam_rbf, w[:, :n_log])
    coef_c_rbf = np.einsum("ki,ij->kj", a_r, w[:, :n_log])
    gate = branch.T  # (n_rbf, n_log)
    stage_b_rbf = vals_rbf * (coef_b_rbf * gate[None, :, :]).sum(axis=2)
    stage_c_rbf = vals_rbf * (coef_c_rbf * gate).sum(axis=1)[None, :]

    stage_b = np.concatenate([stage_b_log, stage_b_rbf], axis=1)
    stage_c = np.concatenate([stage_c_log, stage_c_rbf], axis=1)

    stats = []
    kinds = [f.kind for f in d.members]
    for q in range(n):
        ab = np.abs(exact[:, q] - stage_b[:, q])
        bc = np.abs(stage_b[:, q] - stage_c[:, q])
        ac = np.abs(exact[:, q] - stage_c[:, q])
        ap = np.abs(exact[:, q] - products[:, q])
        stats.append(
            MemberClosureStats(
                index=q,
                kind=kinds[q],
                sup_exact_vs_limit=float(ab.max()),
                mean_exact_vs_limit=float(ab.mean()),
                sup_limit_vs_linear=float(bc.max()),
                mean_limit_vs_linear=float(bc.mean()),
                sup_exact_vs_linear=float(ac.max()),
                mean_exact_vs_linear=float(ac.mean()),
                sup_exact_vs_products=float(ap.max()),
                mean_exact_vs_products=float(ap.mean()),
            )
        )
    return stats


# -- closed-form expectation bounds ----------------------------------------------


class BoundRow(str, Enum):
    """The four error-decomposition rows with closed-form expectation bounds."""

    LOGISTIC_LIMIT = "logistic_limit"
    LOGISTIC_PRODUCTS = "logistic_products"
    RBF_LIMIT = "rbf_limit"
    RBF_PRODUCTS = "rbf_products"


@dataclass(frozen=True)
class ErrorBoundParams:
    m: int
    n_logistic: int
    n_rbf: int
    nu: np.ndarray  # (m, n_logistic + n_rbf) nonnegative scale constants

    def __post_init__(self):
        if self.m < 1 or self.n_logistic < 0 or self.n_rbf < 0:
            raise ParameterDomainError("m must be >= 1 and member counts >= 0")
        nu = np.asarray(self.nu, dtype=float)
        object.__setattr__(self, "nu", nu)
        if nu.shape != (self.m, self.n_logistic + self.n_rbf):
            raise DimensionMismatchError(
                f"nu must have shape ({self.m}, {self.n_logistic + self.n_rbf}), "
                f"got {nu.shape}"
            )
        if not np.all(np.isfinite(nu)) or np.any(nu < 0):
            raise ParameterDomainError("nu entries must be finite and nonnegative")


def error_bound(params: ErrorBoundParams, row) -> float:
    """Closed-form expectation bound for one decomposition row.

    Each summation term is damped by a power of two per measurement dimension:
    one logistic factor contributes 2^-1 in expectation, a limit-branch RBF
    target 2^-2m, and the surviving branch itself 2^-m.
    """
    row = BoundRow(row)
    m = params.m
    nu_l = float(params.nu[:, : params.n_logistic].sum())
    nu_r = float(params.nu[:, params.n_logistic :].sum())
    if row == BoundRow.LOGISTIC_LIMIT:
        return nu_l / 2 ** (m + 1) + nu_r / 2 ** (3 * m + 1)
    if row == BoundRow.LOGISTIC_PRODUCTS:
        return nu_l / 2 ** (2 * m + 1) + nu_r / 2 ** (3 * m + 1)
    if row == BoundRow.RBF_LIMIT:
        return nu_l / 2 ** (3 * m + 1)
    return nu_l / 2 ** (3 * m + 1) + nu_r / 2 ** (4 * m + 1)


# -- polynomial blow-up demonstration ---------------------------------------------


@dataclass(frozen=True)
class ExplosionRow:
    y: float
    residual_at_y: float
    residual_sup: float


def polynomial_explosion_demo(degree, y_values) -> list:
    """Residual of the out-of-span image term for quadratic growth dynamics.

    For the scalar field f(y) = y^2 and the monomial dictionary
    {1, y, ..., y^degree}, the image of the top member is
    degree * y^(degree + 1), one degree beyond the span. Each requested y gets
    its own least-squares fit on [1, y], so the row reports how the
    irreducible residual scales with the domain size.
    """
    if not isinstance(degree, (int, np.integer)) or degree < 1:
        raise ParameterDomainError(f"degree must be an integer >= 1: {degree}")
    ys = [float(v) for v in y_values]
    if not ys or any(not math.isfinite(v) or v <= 1.0 for v in ys):
        raise ParameterDomainError("y_values must all be finite and > 1")
    rows = []
    for y_max in ys:
        grid = np.linspace(1.0, y_max, 1024)
        design = np.vander(grid, degree + 1, increasing=True)
        target = degree * grid ** (degree + 1)
        coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
        resid = target - design @ coef
        rows.append(ExplosionRow(y_max, float(abs(resid[-1])), float(np.abs(resid).max())))
    return rows


def explosion_growth(rows: Sequence[ExplosionRow]) -> RateFit:
    """Log-log growth exponent of the sup residual against the domain size."""
    y = np.log([r.y for r in rows])
    e = [r.residual_sup for r in rows]
    return convergence_rate(y, e)


# -- Monte-Carlo expectation checks ------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    m: int
    n_samples: int
    seed: int
    a: float
    mean_logistic_product: float
    mean_rbf_product: float
    mean_limit_product: float
    bound_logistic: float
    bound_rbf: float
    bound_limit: float

    @property
    def all_within(self) -> bool:
        return (
            self.mean_logistic_product < self.bound_logistic
            and self.mean_rbf_product < self.bound_rbf
            and self.mean_limit_product < self.bound_limit
        )


def expectation_bound_check(m, n_samples=100_000, seed=2, a=2.0) -> BoundCheck:
    """Monte-Carlo means of the conjunctive products under uniform draws.

    Measurements, centers, and steepnesses are all drawn uniformly on [-a, a].
    The limit product keeps the RBF only when its center sits at or below the
    logistic's in every dimension, the measure-2^-m event that the damping
    argument counts; the means are compared against 2^-m, 2^-2m, and 2^-3m.
    """
    if m < 1:
        raise ParameterDomainError(f"m must be >= 1: {m}")
    if n_samples < 1:
        raise ParameterDomainError("n_samples must be >= 1")
    if not np.isfinite(a) or a <= 0:
        raise ParameterDomainError(f"a must be finite and > 0: {a}")
    rng = np.random.default_rng(seed)
    y = rng.uniform(-a, a, size=(n_samples, m))
    mu_l = rng.uniform(-a, a, size=(n_samples, m))
    al_l = rng.uniform(-a, a, size=(n_samples, m))
    mu_k = rng.uniform(-a, a, size=(n_samples, m))
    al_k = rng.uniform(-a, a, size=(n_samples, m))
    lam = stable_logistic(al_l * (y - mu_l))
    big_l = lam.prod(axis=1)
    lam_k = stable_logistic(al_k * (y - mu_k))
    big_p = (lam_k * (1.0 - lam_k)).prod(axis=1)
    survives = np.all(mu_k <= mu_l, axis=1)
    big_h = np.where(survives, big_p, 0.0)
    return BoundCheck(
        m=m,
        n_samples=n_samples,
        seed=seed,
        a=a,
        mean_logistic_product=float(big_l.mean()),
        mean_rbf_product=float(big_p.mean()),
        mean_limit_product=float(big_h.mean()),
        bound_logistic=0.5 ** m,
        bound_rbf=0.25 ** m,
        bound_limit=0.125 ** m,
    )
