"""Eigenvalue solvers for the constrained Gagliardo energy.

Three independent routes are implemented:

* ``solve_lambda1`` -- sub-homogeneous inverse iteration for q in (1, 2],
  globally convergent from a positive start (the fixed-point map is
  sub-homogeneous of degree q - 1 < 1);
* ``solve_lambda1_general`` -- projected gradient descent on the L^q unit
  sphere with Armijo backtracking, valid for all q in (1, 2*_s);
* ``full_spectrum_q2`` -- dense cyclic Jacobi eigendecomposition of the
  symmetrized stiffness, exact linear (q = 2) spectrum.

The first two must agree with each other and, at q = 2, with the third;
those cross-checks are the backbone of the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import (
    DiscreteGagliardoForm,
    GridFunction,
    UniformGridSpec,
    apply_stiffness,
    assemble_form,
    energy,
    lq_norm,
)
from .domain import OpenSet1D, make_open_set
from .errors import ConvergenceError, InvalidParameterError
from .report import AuditReport
from .util import Lcg

DENSE_CHOLESKY_MAX = 600


def conjugate_exponent(N: int, s: float) -> float:
    """Fractional Sobolev conjugate: 2N/(N - 2s) if 2s < N, +inf otherwise."""
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    if not (0.0 < s < 1.0):
        raise InvalidParameterError(f"s must lie in (0, 1), got {s}")
    if 2.0 * s < N:
        return 2.0 * N / (N - 2.0 * s)
    return math.inf


@dataclass
class EigenSolveResult:
    lam: float
    u: GridFunction
    iterations: int
    residual: float
    q: float
    s: float
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "q": self.q,
            "s": self.s,
            "iterations": self.iterations,
            "residual": self.residual,
            "u": self.u.values,
            "seed": self.seed,
        }


def _phi_q(u: np.ndarray, q: float) -> np.ndarray:
    """|t|^(q-2) t, the constraint gradient density."""
    return np.sign(u) * np.abs(u) ** (q - 1.0)


def orient_sign(values: np.ndarray) -> np.ndarray:
    """Flip so the nodal value of largest magnitude is positive."""
    i = int(np.argmax(np.abs(values)))
    return -values if values[i] < 0 else values


def sign_change_count(values: np.ndarray, tol: float = 0.0) -> int:
    signs = np.sign(values[np.abs(values) > tol])
    if signs.size < 2:
        return 0
    return int(np.sum(signs[1:] != signs[:-1]))


def rayleigh(form: DiscreteGagliardoForm, u: GridFunction, q: float) -> float:
    """energy(u) / lq_norm(u, q)^2."""
    if not (1.0 < q < math.inf):
        raise InvalidParameterError(f"q must lie in (1, inf), got {q}")
    nrm = lq_norm(form, u, q)
    if nrm == 0.0:
        raise InvalidParameterError("Rayleigh quotient of the zero vector")
    return energy(form, u) / nrm**2


def make_linear_solver(form: DiscreteGagliardoForm):
    """solve(A x = b) to relative residual 1e-12.

    Dense Cholesky up to 600 nodes, Jacobi-preconditioned CG above; both
    deterministic.
    """
    A = form.dense_matrix()
    if form.n <= DENSE_CHOLESKY_MAX:
        cho = scipy.linalg.cho_factor(A, lower=True)

        def solve(b: np.ndarray) -> np.ndarray:
            return scipy.linalg.cho_solve(cho, b)

        return solve

    inv_diag = 1.0 / np.diag(A)

    def solve(b: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
        x = np.zeros_like(b)
        r = b.copy()
        z = inv_diag * r
        p = z.copy()
        rz = float(r @ z)
        bnorm = float(np.linalg.norm(b)) or 1.0
        for _ in range(10 * form.n):
            Ap = A @ p
            alpha = rz / float(p @ Ap)
            x += alpha * p
            r -= alpha * Ap
            if np.linalg.norm(r) <= rtol * bnorm:
                break
            z = inv_diag * r
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
        return x

    return solve


def solve_lambda1(
    form: DiscreteGagliardoForm,
    q: float,
    tol: float = 1e-12,
    max_iter: int = 5000,
    seed: int = 0,
) -> EigenSolveResult:
    """First eigenvalue by sub-homogeneous inverse iteration, q in (1, 2].

    Starts from the positive constant normalized in L^q; each step solves
    A v = M phi_q(u) and renormalizes. Stops when the relative Rayleigh
    change is <= tol and the equation residual is <= tol * lambda.
    """
    if not (1.0 < q <= 2.0):
        raise InvalidParameterError(
            f"q={q} outside (1, 2]; use solve_lambda1_general"
        )
    if not (tol > 0):
        raise InvalidParameterError("tol must be positive")
    solve = make_linear_solver(form)
    m = form.measures
    u = form.function(np.ones(form.n))
    u = form.function(u.values / lq_norm(form, u, q))
    lam = rayleigh(form, u, q)
    residual = math.inf
    for it in range(1, max_iter + 1):
        rhs = m * _phi_q(u.values, q)
        v = solve(rhs)
        u_new = form.function(v / lq_norm(form, form.function(v), q))
        lam_new = rayleigh(form, u_new, q)
        res_vec = apply_stiffness(form, u_new).values - lam_new * m * _phi_q(u_new.values, q)
        residual = float(np.linalg.norm(res_vec))
        rel_change = abs(lam_new - lam) / max(lam_new, 1e-300)
        u, lam = u_new, lam_new
        if rel_change <= tol and residual <= tol * lam:
            break
    else:
        raise ConvergenceError(
            f"inverse iteration did not converge in {max_iter} iterations",
            last_result=EigenSolveResult(lam, u, max_iter, residual, q, form.s, seed),
        )
    if not np.all(u.values > 0):
        u = form.function(orient_sign(u.values))
    if not np.all(u.values > 0):
        raise ConvergenceError(
            "first eigenfunction is not strictly positive",
            last_result=EigenSolveResult(lam, u, it, residual, q, form.s, seed),
        )
    return EigenSolveResult(lam, u, it, residual, q, form.s, seed)


def solve_lambda1_general(
    form: DiscreteGagliardoForm,
    q: float,
    tol: float = 1e-10,
    max_iter: int = 50000,
    seed: int = 0,
    init: GridFunction | None = None,
    stabilizer=None,
) -> EigenSolveResult:
    """Critical point of the Rayleigh quotient by projected gradient descent.

    Valid for q in (1, 2*_s). Minimizes R(u) = energy(u) / lq_norm(u, q)^2
    on the L^q unit sphere with Armijo backtracking; the reached critical
    point is not guaranteed global for q > 2. The constraint-gradient
    residual g = A u - R(u) M phi_q(u) (at unit norm) is reported.

    `stabilizer`, if given, maps nodal values to nodal values and is
    applied after every accepted step (e.g. to hold the iterate on a
    symmetry-invariant subspace against floating-point drift). The
    returned residual is always the full-space gradient norm, so
    stationarity is certified independently of the stabilizer.
    """
    q_star = conjugate_exponent(form.domain.dim, form.s)
    if not (1.0 < q < q_star):
        raise InvalidParameterError(f"q={q} outside (1, {q_star})")
    m = form.measures
    if init is None:
        vals = np.ones(form.n)
    else:
        vals = np.asarray(init.values, dtype=float).copy()
    nrm = lq_norm(form, form.function(vals), q)
    if nrm == 0.0:
        raise InvalidParameterError("zero initial vector")
    u = vals / nrm
    Au = apply_stiffness(form, form.function(u)).values
    lam = float(np.dot(u, Au))

    def gradient(u, Au, lam):
        return Au - lam * m * _phi_q(u, q)

    g = gradient(u, Au, lam)
    gnorm = float(np.linalg.norm(g))
    iterations = 0
    if gnorm <= tol * lam:
        res = EigenSolveResult(lam, form.function(orient_sign(u)), 0, gnorm, q, form.s, seed)
        return res
    alpha_prev = None
    for it in range(1, max_iter + 1):
        iterations = it
        if alpha_prev is None:
            # exact Cauchy step for the quadratic part, once at the start
            Ag = apply_stiffness(form, form.function(g)).values
            gAg = float(np.dot(g, Ag))
            alpha = (gnorm**2 / gAg) if gAg > 0 else 1.0 / max(lam, 1e-300)
        else:
            alpha = 2.0 * alpha_prev
        accepted = False
        for _ in range(60):
            trial = u - alpha * g
            tn = lq_norm(form, form.function(trial), q)
            if tn > 0:
                trial = trial / tn
                At = apply_stiffness(form, form.function(trial)).values
                lam_t = float(np.dot(trial, At))
                if lam_t <= lam - 1e-4 * alpha * gnorm**2:
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            break  # no descent direction left; stationarity decided below
        alpha_prev = alpha
        rel_change = (lam - lam_t) / max(lam, 1e-300)
        if stabilizer is not None:
            trial = stabilizer(trial)
            trial = trial / lq_norm(form, form.function(trial), q)
            At = apply_stiffness(form, form.function(trial)).values
            lam_t = float(np.dot(trial, At))
        u, Au, lam = trial, At, lam_t
        g = gradient(u, Au, lam)
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol * lam and rel_change <= tol:
            break
    if q <= 2.0 and gnorm > tol * lam:
        v = orient_sign(u)
        if np.all(v > 0):
            # For q <= 2 the normalized map u -> A^{-1} M phi_q(u) contracts
            # at the positive critical point, so it drives the residual below
            # the line-search rounding floor. It is applied only to one-signed
            # iterates: at sign-changing critical points it is not stable.
            solve = make_linear_solver(form)
            u = v
            for _ in range(200):
                w = solve(m * _phi_q(u, q))
                u = w / lq_norm(form, form.function(w), q)
                Au = apply_stiffness(form, form.function(u)).values
                lam = float(np.dot(u, Au))
                g = gradient(u, Au, lam)
                gnorm = float(np.linalg.norm(g))
                iterations += 1
                if gnorm <= tol * lam:
                    break
    # When the line search exhausts, the iterate sits at the floor where an
    # Armijo decrease is smaller than rounding in the quadratic form. The
    # eigenvalue error is quadratic in the gradient norm, so a residual a
    # few orders above tol is still far more accurate than any tolerance
    # asserted downstream; only genuinely non-stationary exits raise.
    if gnorm > max(10.0 * tol, 1e-6) * max(lam, 1.0):
        raise ConvergenceError(
            f"gradient descent stalled at residual {gnorm:.3e}",
            last_result=EigenSolveResult(
                lam, form.function(orient_sign(u)), iterations, gnorm, q, form.s, seed
            ),
        )
    return EigenSolveResult(
        lam, form.function(orient_sign(u)), iterations, gnorm, q, form.s, seed
    )


def _jacobi_eigensystem(B: np.ndarray, rel_tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi sweeps until the off-diagonal Frobenius norm is small."""
    A = np.array(B, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return np.array([A[0, 0]]), V
    norm = float(np.linalg.norm(A))
    skip = rel_tol * norm / (4.0 * n)
    for _ in range(max_sweeps):
        # measure the off-diagonal part directly; subtracting the diagonal
        # from the full Frobenius norm cancels catastrophically near zero
        off_part = A.copy()
        np.fill_diagonal(off_part, 0.0)
        off = float(np.linalg.norm(off_part))
        if off <= rel_tol * norm:
            break
        for p in range(n - 1):
            for qq in range(p + 1, n):
                apq = A[p, qq]
                if abs(apq) <= skip:
                    continue
                tau = (A[qq, qq] - A[p, p]) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s_ = t * c
                cp = A[:, p].copy()
                cq = A[:, qq].copy()
                A[:, p] = c * cp - s_ * cq
                A[:, qq] = s_ * cp + c * cq
                rp = A[p, :].copy()
                rq = A[qq, :].copy()
                A[p, :] = c * rp - s_ * rq
                A[qq, :] = s_ * rp + c * rq
                A[p, qq] = 0.0
                A[qq, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, qq].copy()
                V[:, p] = c * vp - s_ * vq
                V[:, qq] = s_ * vp + c * vq
    vals = np.diag(A).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], V[:, order]


def full_spectrum_q2(form: DiscreteGagliardoForm, k: int):
    """First k linear eigenpairs, ascending; eigenvectors M-orthonormal."""
    if k > form.n:
        raise InvalidParameterError(f"k={k} exceeds node count {form.n}")
    m = form.measures
    scale = 1.0 / np.sqrt(m)
    B = form.dense_matrix() * np.outer(scale, scale)
    vals, V = _jacobi_eigensystem(B)
    out = []
    for j in range(k):
        u = orient_sign(V[:, j] * scale)
        out.append((float(vals[j]), form.function(u)))
    return out


@dataclass
class CriticalPoint:
    lam: float
    u: GridFunction
    restart_id: int
    sign_changes: int


@dataclass
class CriticalPointSet:
    """Found constrained critical points, sorted by value and clustered."""

    points: list[CriticalPoint]
    cluster_tol: float
    failures: int = 0
    notes: list[str] = field(default_factory=list)

    def clusters(self) -> list[list[CriticalPoint]]:
        if not self.points:
            return []
        groups = [[self.points[0]]]
        for pt in self.points[1:]:
            ref = groups[-1][0].lam
            if pt.lam - ref <= self.cluster_tol * max(1.0, abs(ref)):
                groups[-1].append(pt)
            else:
                groups.append([pt])
        return groups


def restart_init(form: DiscreteGagliardoForm, restart_id: int, seed: int,
                 first: GridFunction | None) -> np.ndarray:
    """Init vector for one restart: random mixed-sign draws plus a quota of
    structured starts (perturbed +/- first eigenfunction, two-bump sign
    patterns obtained by antisymmetrizing a positive draw)."""
    rng = Lcg(seed * 1000003 + restart_id)
    kind = restart_id % 5
    n = form.n
    if kind in (0, 1) or first is None:
        return rng.vector(n)
    if kind == 2:
        return first.values + 0.1 * rng.vector(n)
    if kind == 3:
        return -first.values + 0.1 * rng.vector(n)
    p = rng.vector(n, low=0.2, high=1.2)
    v = p - p[::-1]
    if not np.any(v):
        return p  # antisymmetrization collapses (e.g. a single node)
    return v


def critical_point_search(
    form: DiscreteGagliardoForm,
    q: float,
    restarts: int,
    seed: int = 1,
    tol: float = 1e-8,
    cluster_tol: float = 1e-6,
) -> CriticalPointSet:
    """Deflation-free random-restart search for constrained critical points.

    Each restart runs the projected-descent flow to stationarity; results
    are clustered by eigenvalue. Completeness is never claimed.
    """
    if restarts < 1:
        raise InvalidParameterError("restarts must be >= 1")
    try:
        first = (
            solve_lambda1(form, q, tol=min(tol, 1e-10)).u
            if q <= 2.0
            else solve_lambda1_general(form, q, tol=min(tol, 1e-10)).u
        )
    except ConvergenceError:
        first = None
    sums = form.nodes + form.nodes[::-1]
    mirror = (
        np.allclose(sums, sums[0], rtol=0, atol=1e-12)
        and np.allclose(form.measures, form.measures[::-1], rtol=0, atol=1e-15)
    )

    def antisymmetrize(v: np.ndarray) -> np.ndarray:
        return 0.5 * (v - v[::-1])

    points = []
    failures = 0
    notes = []
    for r in range(restarts):
        init = form.function(restart_init(form, r, seed, first))
        stab = antisymmetrize if (r % 5 == 4 and mirror and form.n > 1) else None
        try:
            res = solve_lambda1_general(
                form, q, tol=tol, seed=seed, init=init, stabilizer=stab
            )
        except ConvergenceError:
            failures += 1
            continue
        points.append(
            CriticalPoint(res.lam, res.u, r, sign_change_count(res.u.values))
        )
    if not points:
        notes.append("no restart converged")
    points.sort(key=lambda p: (p.lam, p.restart_id))
    return CriticalPointSet(points, cluster_tol, failures, notes)


def faber_krahn_check(
    omega: OpenSet1D, s: float, grid: UniformGridSpec
) -> AuditReport:
    """lambda_1(Omega, s, 2) >= lambda_1(I, s, 2) for the equal-measure interval I.

    Grids are matched: the interval is tiled with the same total cell count.
    """
    form = assemble_form(omega, grid, s)
    mu = omega.measure
    n_total = form.n
    ball = make_open_set([(0.0, mu)])
    ball_form = assemble_form(ball, UniformGridSpec(mu / n_total), s)
    lam_omega = solve_lambda1(form, 2.0).lam
    lam_ball = solve_lambda1(ball_form, 2.0).lam
    tol = 1e-8 * lam_ball
    return AuditReport(
        name="faber_krahn",
        samples=1,
        worst_margin=lam_omega - lam_ball,
        tolerance=tol,
        params={
            "domain": str(omega),
            "s": s,
            "lambda_omega": lam_omega,
            "lambda_ball": lam_ball,
            "n": n_total,
        },
    )
