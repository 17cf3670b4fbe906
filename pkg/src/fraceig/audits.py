"""Inequality audits for the discrete Gagliardo form.

Inequalities whose proofs transcribe pointwise to the discrete form
(Hardy with its constructive constant, the ground-state Picone bound, the
weighted Holder step, the sign lemma) are asserted as hard invariants;
constants that are not constructive (Hopf, local boundedness) are fitted
and reported only.

All margins are signed RHS - LHS, so nonnegative means the inequality holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import (
    DiscreteGagliardoForm,
    GridFunction,
    energy,
    lq_norm,
    tail,
)
from .domain import OpenSet1D, dist_to_boundary, exterior_cone_params
from .errors import InvalidParameterError
from .lane_emden import LaneEmdenResult
from .report import AuditReport
from .solvers import conjugate_exponent, full_spectrum_q2, make_linear_solver
from .util import Lcg, block_sum


@dataclass(frozen=True)
class HardyConstant:
    """Constructive boundary-weight constant C = 2^(N+2s) N / (2 theta) * max((D/l)^N, 1)."""

    C: float
    theta: float
    ell: float
    D: float
    s: float


def hardy_constant(omega: OpenSet1D, s: float) -> HardyConstant:
    """Assemble the constant from the exterior-cone parameters (N = 1)."""
    if not (0.0 < s < 1.0):
        raise InvalidParameterError(f"s must lie in (0, 1), got {s}")
    ell, theta, D = exterior_cone_params(omega)
    C = 2.0 ** (1.0 + 2.0 * s) / (2.0 * theta) * max(D / ell, 1.0)
    return HardyConstant(C=C, theta=theta, ell=ell, D=D, s=s)


def sample_vectors(form: DiscreteGagliardoForm, samples: int, seed: int):
    """Structured vectors (constant, hat, single-node, alternating) plus
    seeded random draws; yields (label, values)."""
    n = form.n
    yield "constant", np.ones(n)
    lo, hi = form.domain.hull
    c, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    yield "hat", np.maximum(1.0 - np.abs(form.nodes - c) / half, 0.0)
    e = np.zeros(n)
    e[n // 2] = 1.0
    yield "single-node", e
    yield "alternating", (-1.0) ** np.arange(n)
    rng = Lcg(seed)
    for k in range(samples):
        yield f"random-{k}", rng.vector(n)


def hardy_audit(form: DiscreteGagliardoForm, samples: int = 100, seed: int = 1) -> AuditReport:
    """Boundary-weight inequality in two layers.

    (i) Pointwise, zero tolerance: E_i / m_i >= (theta / 2^(1+2s)) *
    min(l/D, 1) * delta_i^(-2s) at every node -- the exact exterior weight
    dominates the cone bound.
    (ii) Functional: sum m_i u_i^2 delta_i^(-2s) <= C * B_h(u) for the
    sample suite.
    """
    hc = hardy_constant(form.domain, form.s)
    s = form.s
    delta = dist_to_boundary(form.domain, form.nodes)
    bound = (hc.theta / 2.0 ** (1.0 + 2.0 * s)) * min(hc.ell / hc.D, 1.0) * delta ** (-2.0 * s)
    pointwise = form.E / form.measures - bound
    worst_point = float(np.min(pointwise))
    weight = delta ** (-2.0 * s)
    worst_func = math.inf
    count = 0
    for _, v in sample_vectors(form, samples, seed):
        count += 1
        u = form.function(v)
        lhs = block_sum(form.measures * v**2 * weight)
        margin = hc.C * energy(form, u) - lhs
        worst_func = min(worst_func, margin)
    return AuditReport(
        name="hardy",
        samples=count,
        worst_margin=min(worst_point, worst_func),
        tolerance=0.0,
        params={
            "domain": str(form.domain),
            "s": s,
            "n": form.n,
            "C": hc.C,
            "theta": hc.theta,
            "ell": hc.ell,
            "D": hc.D,
            "seed": seed,
        },
        details=[
            {"layer": "pointwise", "worst_margin": worst_point, "nodes": form.n},
            {"layer": "functional", "worst_margin": worst_func},
        ],
    )


def picone_lane_emden_audit(
    form: DiscreteGagliardoForm,
    q: float,
    w: LaneEmdenResult,
    samples: int = 200,
    seed: int = 1,
) -> AuditReport:
    """Ground-state weight bound: sum m u^2 w^(q-2) <= B_h(u) + slack.

    Exact modulo the equation residual of w; the slack per sample is
    10 * residual * |u|_inf^2 * n.
    """
    wv = w.w.values
    if not np.all(wv > 0):
        raise InvalidParameterError("ground state must be strictly positive")
    if w.residual > 1e-10:
        raise InvalidParameterError(
            f"ground-state residual {w.residual:.3e} exceeds 1e-10"
        )
    weight = form.measures * wv ** (q - 2.0)
    worst = math.inf
    count = 0
    for _, v in sample_vectors(form, samples, seed):
        count += 1
        u = form.function(v)
        slack = 10.0 * w.residual * float(np.max(np.abs(v))) ** 2 * form.n
        margin = energy(form, u) + slack - block_sum(weight * v**2)
        worst = min(worst, margin)
    return AuditReport(
        name="picone_lane_emden",
        samples=count,
        worst_margin=worst,
        tolerance=0.0,
        params={
            "domain": str(form.domain),
            "s": form.s,
            "q": q,
            "n": form.n,
            "residual": w.residual,
            "seed": seed,
        },
    )


def weighted_holder_audit(
    form: DiscreteGagliardoForm, q: float, samples: int = 200, seed: int = 1
) -> AuditReport:
    """Interpolation step between the boundary weight and the plain mass.

    Checks sum m u^2 d^(s(q-2)) <= (sum m u^2 d^(-2s))^((2-q)/2)
    * (sum m u^2)^(q/2), an exact Holder inequality, to 1e-12 relative;
    the composition with the functional Hardy layer is reported in details.
    """
    if not (1.0 < q < 2.0):
        raise InvalidParameterError(f"q must lie in (1, 2), got {q}")
    s = form.s
    delta = dist_to_boundary(form.domain, form.nodes)
    m = form.measures
    C = hardy_constant(form.domain, s).C
    worst_rel = math.inf
    worst_chain = math.inf
    count = 0
    for _, v in sample_vectors(form, samples, seed):
        count += 1
        lhs = block_sum(m * v**2 * delta ** (s * (q - 2.0)))
        a = block_sum(m * v**2 * delta ** (-2.0 * s))
        b = block_sum(m * v**2)
        rhs = a ** ((2.0 - q) / 2.0) * b ** (q / 2.0)
        worst_rel = min(worst_rel, (rhs - lhs) / max(rhs, 1e-300))
        chain_rhs = (C * energy(form, form.function(v))) ** ((2.0 - q) / 2.0) * b ** (q / 2.0)
        worst_chain = min(worst_chain, (chain_rhs - lhs) / max(chain_rhs, 1e-300))
    return AuditReport(
        name="weighted_holder",
        samples=count,
        worst_margin=worst_rel,
        tolerance=1e-12,
        params={
            "domain": str(form.domain),
            "s": s,
            "q": q,
            "n": form.n,
            "C": C,
            "seed": seed,
        },
        details=[{"layer": "chain_with_hardy", "worst_relative_margin": worst_chain}],
    )


@dataclass
class HopfFit:
    """Fitted boundary-growth constant c_est = min_i w_i / delta_i^s."""

    c_est: float
    ratios: np.ndarray
    s: float

    def to_dict(self) -> dict:
        return {"c_est": self.c_est, "s": self.s, "ratios": self.ratios}


def hopf_fit(w: LaneEmdenResult, omega: OpenSet1D, s: float) -> HopfFit:
    """Report-only: the ground state should grow at least like dist^s."""
    wv = w.w.values
    if not np.all(wv > 0):
        raise InvalidParameterError("ground state must be strictly positive")
    delta = dist_to_boundary(omega, w.w.form.nodes)
    ratios = wv / delta**s
    return HopfFit(c_est=float(np.min(ratios)), ratios=ratios, s=s)


def converse_linf_bound_audit(
    form: DiscreteGagliardoForm, q: float, w: LaneEmdenResult
) -> AuditReport:
    """Linear first eigenvalue dominates |w|_inf^(q-2): the sup of the
    ground state controls lambda_1 at q = 2 from below."""
    if not (1.0 < q < 2.0):
        raise InvalidParameterError(f"q must lie in (1, 2), got {q}")
    lam2 = full_spectrum_q2(form, 1)[0][0]
    bound = float(np.max(w.w.values)) ** (q - 2.0)
    return AuditReport(
        name="converse_linf",
        samples=1,
        worst_margin=lam2 - bound,
        tolerance=1e-8 * bound,
        params={
            "domain": str(form.domain),
            "s": form.s,
            "q": q,
            "n": form.n,
            "lambda_2": lam2,
            "sup_bound": bound,
        },
    )


def linf_ratio_audit(results, q: float, s: float) -> AuditReport:
    """Scale-neutrality of rho = |u|_inf / (lambda^beta |u|_q) with
    beta = 2*_s / (2 (2*_s - q)).

    `results` is a sequence of (label, form, EigenSolveResult) triples for
    the same shape at different scales or resolutions. For s >= 1/2 the
    exponent is not defined (2*_s is infinite) and the audit degrades to a
    report of the raw ratios.
    """
    q_star = conjugate_exponent(1, s)
    rows = []
    if math.isinf(q_star):
        for label, form, res in results:
            rows.append({
                "label": str(label),
                "sup": float(np.max(np.abs(res.u.values))),
                "lambda": res.lam,
            })
        return AuditReport(
            name="linf_ratio",
            samples=len(rows),
            worst_margin=0.0,
            tolerance=0.0,
            params={"s": s, "q": q, "mode": "report-only"},
            details=rows,
        )
    if not (q < q_star):
        raise InvalidParameterError(f"q={q} must be below {q_star}")
    beta = q_star / (2.0 * (q_star - q))
    rhos = []
    for label, form, res in results:
        rho = float(np.max(np.abs(res.u.values))) / (
            res.lam**beta * lq_norm(form, res.u, q)
        )
        rhos.append(rho)
        rows.append({"label": str(label), "rho": rho, "lambda": res.lam})
    dev = max(abs(r / rhos[0] - 1.0) for r in rhos)
    return AuditReport(
        name="linf_ratio",
        samples=len(rhos),
        worst_margin=-dev,
        tolerance=1e-10,
        params={"s": s, "q": q, "beta": beta, "mode": "scale-neutral"},
        details=rows,
    )


@dataclass
class SubsolutionReport:
    """Local sup bound for nonnegative subsolutions: LHS vs the three-term RHS."""

    lhs: float
    rhs: float
    ratio: float
    tail_term: float
    force_term: float
    mean_term: float
    params: dict

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "tail_term": self.tail_term,
            "force_term": self.force_term,
            "mean_term": self.mean_term,
            "params": dict(self.params),
        }


def subsolution_sup_audit(
    form: DiscreteGagliardoForm,
    w: GridFunction,
    f_bound: float,
    x0: float,
    r: float,
    delta_param: float,
) -> SubsolutionReport:
    """Report-only local boundedness check.

    LHS is the sup of w over the half ball B_{r/2}(x0); RHS combines the
    nonlocal tail, the forcing bound and an interior L^2 mean. The unknown
    multiplicative constant is the observed ratio.
    """
    v = w.values
    if np.any(v < 0):
        raise InvalidParameterError("w must be nonnegative")
    if not (0.0 < delta_param <= 1.0):
        raise InvalidParameterError(f"delta_param must lie in (0, 1], got {delta_param}")
    lo, hi = form.domain.hull
    if not (lo <= x0 - r and x0 + r <= hi):
        raise InvalidParameterError(
            f"B_{r}({x0}) does not fit inside the hull ({lo}, {hi})"
        )
    s = form.s
    x = form.nodes
    half = np.abs(x - x0) < r / 2.0
    ball = np.abs(x - x0) < r
    lhs = float(np.max(v[half])) if half.any() else 0.0
    mean_sq = block_sum(form.measures[ball] * v[ball] ** 2) / (2.0 * r)
    tail_term = delta_param * tail(form, w, x0, r / 2.0)
    force_term = delta_param * r ** (2.0 * s) * f_bound
    mean_term = (r ** (1.0 - 2.0 * s) / delta_param) ** (1.0 / (4.0 * s)) * math.sqrt(mean_sq)
    rhs = tail_term + force_term + mean_term
    return SubsolutionReport(
        lhs=lhs,
        rhs=rhs,
        ratio=lhs / rhs if rhs > 0 else 0.0,
        tail_term=tail_term,
        force_term=force_term,
        mean_term=mean_term,
        params={
            "x0": x0,
            "r": r,
            "delta": delta_param,
            "f_bound": f_bound,
            "s": s,
            "domain": str(form.domain),
        },
    )


def sign_lemma_audit(form: DiscreteGagliardoForm, samples: int = 100, seed: int = 1) -> AuditReport:
    """Energy drops under taking absolute values: B_h(|u|) <= B_h(u),
    strictly on mixed-sign vectors, with equality for one-signed ones."""
    worst = math.inf
    count = 0
    for _, v in sample_vectors(form, samples, seed):
        count += 1
        margin = energy(form, form.function(v)) - energy(form, form.function(np.abs(v)))
        worst = min(worst, margin)
    return AuditReport(
        name="sign_lemma",
        samples=count,
        worst_margin=worst,
        tolerance=1e-14,
        params={"domain": str(form.domain), "s": form.s, "n": form.n, "seed": seed},
    )


def min_principle_audit(form: DiscreteGagliardoForm, samples: int = 20, seed: int = 1) -> AuditReport:
    """Inverse positivity: A x = b with b >= 0, b != 0 forces x > 0."""
    try:
        solve = make_linear_solver(form)
    except np.linalg.LinAlgError:
        # the operator is not even positive definite: fail outright
        return AuditReport(
            name="min_principle",
            samples=0,
            worst_margin=-math.inf,
            tolerance=0.0,
            params={"domain": str(form.domain), "s": form.s, "n": form.n,
                    "error": "factorization failed"},
        )
    rng = Lcg(seed)
    worst = math.inf
    count = 0
    vectors = [np.ones(form.n)]
    e = np.zeros(form.n)
    e[0] = 1.0
    vectors.append(e)
    for _ in range(samples):
        vectors.append(rng.vector(form.n, low=0.0, high=1.0))
    for b in vectors:
        count += 1
        x = solve(b)
        worst = min(worst, float(np.min(x)))
    return AuditReport(
        name="min_principle",
        samples=count,
        worst_margin=worst,
        tolerance=0.0,
        params={"domain": str(form.domain), "s": form.s, "n": form.n, "seed": seed},
    )
