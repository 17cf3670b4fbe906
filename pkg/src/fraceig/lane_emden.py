"""Sub-homogeneous ground states (Lane-Emden densities) and their checks.

For q in (1, 2) the density w solves the unconstrained equation
A w = M w^(q-1), w > 0. It is built two independent ways:

* scaling the L^q-normalized first eigenfunction by lambda_1^(1/(q-2));
* minimizing the free energy J(u) = B_h(u)/2 - (1/q) sum m_i |u_i|^q over
  the nonnegative orthant by projected gradient descent.

Uniqueness of the positive ground state makes route agreement a strong
cross-check, and it is enforced in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import (
    DiscreteGagliardoForm,
    GridFunction,
    UniformGridSpec,
    apply_stiffness,
    assemble_form,
    assemble_form_subgrid,
    energy,
)
from .domain import OpenSet1D, intersect_ball
from .errors import (
    ConvergenceError,
    EmptyDomainError,
    InvalidParameterError,
)
from .report import AuditReport
from .solvers import solve_lambda1
from .util import block_sum


@dataclass
class LaneEmdenResult:
    """A positive solution of A w = M w^(q-1) with its construction route."""

    w: GridFunction
    q: float
    s: float
    residual: float
    route: str  # "eigen-scaled" or "free-energy"
    lam: float | None = None
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "s": self.s,
            "residual": self.residual,
            "route": self.route,
            "lambda": self.lam,
            "iterations": self.iterations,
            "w": self.w.values,
        }


def _check_q(q: float) -> None:
    if not (1.0 < q < 2.0):
        raise InvalidParameterError(f"q must lie in (1, 2), got {q}")


def equation_residual(form: DiscreteGagliardoForm, w: GridFunction, q: float) -> float:
    """Euclidean norm of A w - M w^(q-1) (w is assumed nonnegative)."""
    rhs = form.measures * np.maximum(w.values, 0.0) ** (q - 1.0)
    return float(np.linalg.norm(apply_stiffness(form, w).values - rhs))


def lane_emden_density(
    form: DiscreteGagliardoForm,
    q: float,
    tol: float = 1e-8,
    seed: int = 0,
) -> LaneEmdenResult:
    """Ground state via the first eigenpair: w = lambda_1^(1/(q-2)) u_1."""
    _check_q(q)
    eig = solve_lambda1(form, q, tol=min(tol, 1e-12), seed=seed)
    w = form.function(eig.lam ** (1.0 / (q - 2.0)) * eig.u.values)
    res = equation_residual(form, w, q)
    rhs_norm = float(np.linalg.norm(form.measures * w.values ** (q - 1.0)))
    if res > tol * rhs_norm:
        raise ConvergenceError(
            f"ground-state residual {res:.3e} exceeds {tol:.1e} * |rhs|",
            last_result=LaneEmdenResult(w, q, form.s, res, "eigen-scaled", eig.lam),
        )
    return LaneEmdenResult(w, q, form.s, res, "eigen-scaled", eig.lam, eig.iterations)


def free_energy(form: DiscreteGagliardoForm, q: float, u: GridFunction) -> float:
    """J(u) = B_h(u)/2 - (1/q) sum_i m_i |u_i|^q."""
    _check_q(q)
    mass = block_sum(form.measures * np.abs(u.values) ** q)
    return 0.5 * energy(form, u) - mass / q


def minimize_free_energy(
    form: DiscreteGagliardoForm,
    q: float,
    tol: float = 1e-10,
    max_iter: int = 200000,
    seed: int = 0,
) -> LaneEmdenResult:
    """Ground state by projected gradient descent on the nonnegative orthant.

    The projection is a clamp at zero; steps start from the Cauchy length
    for the quadratic part and backtrack with an Armijo test on J. The
    start is the best constant multiple of 1, which is already positive.
    """
    _check_q(q)
    m = form.measures
    ones = form.function(np.ones(form.n))
    b1 = energy(form, ones)
    total = block_sum(m)
    u = np.full(form.n, (total / b1) ** (1.0 / (2.0 - q)))
    Au = apply_stiffness(form, form.function(u)).values

    def value(u, Au):
        return 0.5 * float(np.dot(u, Au)) - block_sum(m * u**q) / q

    J = value(u, Au)
    residual = np.inf
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        g = Au - m * u ** (q - 1.0)
        residual = float(np.linalg.norm(g))
        scale = float(np.linalg.norm(m * u ** (q - 1.0))) or 1.0
        if residual <= tol * scale:
            break
        Ag = apply_stiffness(form, form.function(g)).values
        gAg = float(np.dot(g, Ag))
        alpha = (float(np.dot(g, g)) / gAg) if gAg > 0 else 1.0
        accepted = False
        for _ in range(60):
            trial = np.maximum(u - alpha * g, 0.0)
            step = trial - u
            step_sq = float(np.dot(step, step))
            if step_sq == 0.0:
                break
            At = apply_stiffness(form, form.function(trial)).values
            Jt = value(trial, At)
            if Jt <= J - 1e-4 / max(alpha, 1e-300) * step_sq:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break  # line search at the rounding floor; stationarity checked below
        u, Au, J = trial, At, Jt
    w = form.function(u)
    res = equation_residual(form, w, q)
    scale = float(np.linalg.norm(m * np.maximum(u, 0.0) ** (q - 1.0))) or 1.0
    if res > max(tol, 1e-6) * scale:
        raise ConvergenceError(
            f"free-energy descent stalled at residual {res:.3e}",
            last_result=LaneEmdenResult(w, q, form.s, res, "free-energy"),
        )
    if not np.all(u > 0):
        raise ConvergenceError(
            "free-energy minimizer is not strictly positive",
            last_result=LaneEmdenResult(w, q, form.s, res, "free-energy"),
        )
    return LaneEmdenResult(w, q, form.s, res, "free-energy", None, iterations)


@dataclass
class ExhaustionStep:
    """Density of Omega intersected with one ball, zero-extended to the ambient grid."""

    radius: float
    result: LaneEmdenResult
    ambient_values: np.ndarray
    ambient_indices: np.ndarray


@dataclass
class ExhaustionSequence:
    ambient: DiscreteGagliardoForm
    center: float
    steps: list[ExhaustionStep]
    warnings: list[str] = field(default_factory=list)


def exhaustion_sequence(
    omega: OpenSet1D,
    s: float,
    q: float,
    radii,
    grid: UniformGridSpec,
    center: float = 0.0,
    tol: float = 1e-8,
) -> ExhaustionSequence:
    """Densities of Omega cut by growing balls B_r(center), on one common grid.

    All solves share the ambient lattice of Omega so the nodal values of
    consecutive steps are directly comparable; each step's values are
    extended by zero outside its own cut. Radii with empty intersection
    are skipped with a warning.
    """
    _check_q(q)
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidParameterError(f"radii must be ascending, got {radii}")
    ambient = assemble_form(omega, grid, s)
    steps: list[ExhaustionStep] = []
    warnings: list[str] = []
    for r in radii:
        try:
            cut = intersect_ball(omega, r, center)
        except EmptyDomainError:
            warnings.append(f"radius {r:g}: empty intersection, skipped")
            continue
        if cut == ambient.domain:
            sub, sel = ambient, np.arange(ambient.n)
        else:
            sub, sel = assemble_form_subgrid(ambient, cut)
        res = lane_emden_density(sub, q, tol=tol)
        full = np.zeros(ambient.n)
        full[sel] = res.w.values
        steps.append(ExhaustionStep(r, res, full, sel))
    return ExhaustionSequence(ambient, center, steps, warnings)


def comparison_check(
    omega1: OpenSet1D,
    omega2: OpenSet1D,
    s: float,
    q: float,
    grid: UniformGridSpec,
) -> AuditReport:
    """Ground-state monotonicity under inclusion: w_1 <= w_2 nodally.

    Requires omega1 included in omega2 intervalwise; both densities are
    computed on the common ambient grid of omega2.
    """
    _check_q(q)
    if not omega2.includes(omega1):
        raise InvalidParameterError(
            f"({omega1}) is not included in ({omega2})"
        )
    ambient = assemble_form(omega2, grid, s)
    w2 = lane_emden_density(ambient, q)
    if omega1 == omega2:
        sub, sel = ambient, np.arange(ambient.n)
    else:
        sub, sel = assemble_form_subgrid(ambient, omega1)
    w1 = lane_emden_density(sub, q)
    diff = w2.w.values[sel] - w1.w.values
    tol = 1e-8 * float(np.max(w2.w.values))
    return AuditReport(
        name="comparison_principle",
        samples=int(sel.size),
        worst_margin=float(np.min(diff)),
        tolerance=tol,
        params={
            "domain1": str(omega1),
            "domain2": str(omega2),
            "s": s,
            "q": q,
            "h": grid.h_target,
            "n1": int(sel.size),
            "n2": ambient.n,
        },
    )
