"""Discrete Gagliardo energy on a cell-centered grid over a 1-D open set.

The energy of a nodal vector u is

    B_h(u) = sum_{i != j} (u_i - u_j)^2 K_ij  +  2 sum_i u_i^2 E_i

with midpoint-rule interaction weights K_ij = m_i m_j / |x_i - x_j|^(1+2s)
and *exact* exterior confinement weights

    E_i = m_i * integral over R \\ Omega of |x_i - y|^(-1-2s) dy

evaluated in closed form on each complement component (rays and gaps).
Midpoint weights are used for all pairs, including adjacent cells: exact
piecewise-constant pair integrals diverge on adjacent cells for s >= 1/2,
while the midpoint lattice form is finite, symmetric, positive and exactly
scale-covariant for every s in (0, 1).

Within a component, node distances are computed from cell indices
(|i - j| * h) rather than from positions, so mirror-symmetric domains give
exactly persymmetric matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import OpenSet1D, make_open_set
from .errors import (
    EmptyGridError,
    GridMismatchError,
    InvalidParameterError,
    InvalidScaleError,
)
from .util import block_sum, json_dumps

FORM_VERSION = "fraceig-form-1"


@dataclass(frozen=True)
class UniformGridSpec:
    """Target cell width; each component gets n_j = max(1, round(len_j / h))."""

    h_target: float

    def __post_init__(self):
        if not (self.h_target > 0):
            raise InvalidParameterError(f"h_target must be positive, got {self.h_target}")

    def cell_counts(self, omega: OpenSet1D) -> tuple[int, ...]:
        return tuple(max(1, round((b - a) / self.h_target)) for a, b in omega.intervals)


@dataclass(frozen=True, eq=False)
class DiscreteGagliardoForm:
    """Immutable assembled form: nodes, measures, K, E and the stiffness action."""

    s: float
    domain: OpenSet1D
    nodes: np.ndarray
    measures: np.ndarray
    comp: np.ndarray  # lattice component id per node
    idx: np.ndarray  # integer cell index within the lattice component
    spacing: np.ndarray  # lattice spacing of the node's component
    K: np.ndarray
    E: np.ndarray
    row_k: np.ndarray
    version: str = FORM_VERSION

    @property
    def n(self) -> int:
        return self.nodes.size

    def function(self, values) -> "GridFunction":
        return GridFunction(self, np.asarray(values, dtype=float))

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.n))

    def dense_matrix(self) -> np.ndarray:
        """A = 2 (diag(rowsum(K) + E) - K); SPD by strict diagonal dominance."""
        A = -2.0 * self.K
        np.fill_diagonal(A, 2.0 * (self.row_k + self.E))
        return A


@dataclass(eq=False)
class GridFunction:
    """Nodal values on a form's grid."""

    form: DiscreteGagliardoForm
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.form.n,):
            raise GridMismatchError(
                f"expected {self.form.n} nodal values, got shape {self.values.shape}"
            )

    def copy(self) -> "GridFunction":
        return GridFunction(self.form, self.values.copy())


def _check_member(form: DiscreteGagliardoForm, u: GridFunction) -> np.ndarray:
    if u.form is not form and not (
        u.form.n == form.n and np.array_equal(u.form.nodes, form.nodes)
    ):
        raise GridMismatchError("grid function does not belong to this form")
    return u.values


def _ray_integral(d_near: float, d_far: float, s: float) -> float:
    """Integral of t^(-1-2s) from d_near to d_far (d_far may be inf)."""
    far = 0.0 if math.isinf(d_far) else d_far ** (-2.0 * s)
    return (d_near ** (-2.0 * s) - far) / (2.0 * s)


def _exterior_weights(
    omega: OpenSet1D,
    nodes: np.ndarray,
    measures: np.ndarray,
    comp: np.ndarray,
    idx: np.ndarray,
    spacing: np.ndarray,
    counts,
    s: float,
    lattice_aligned: bool,
) -> np.ndarray:
    """Exact complement integrals, per node.

    When the lattice tiles the domain exactly (`lattice_aligned`), distances
    to the owning component's endpoints come from cell indices, keeping
    symmetric domains exactly symmetric.
    """
    ivs = omega.intervals
    m = len(ivs)
    # complement components: segs[k] lies left of interval k; segs[m] is the right ray
    segs = [(-math.inf, ivs[0][0])]
    segs += [(ivs[j][1], ivs[j + 1][0]) for j in range(m - 1)]
    segs += [(ivs[m - 1][1], math.inf)]
    E = np.zeros(nodes.size)
    for i in range(nodes.size):
        x = nodes[i]
        c = int(comp[i])
        h = spacing[i]
        if lattice_aligned:
            d_left_end = (idx[i] + 0.5) * h  # distance to a_c
            d_right_end = (counts[c] - idx[i] - 0.5) * h  # distance to b_c
        else:
            d_left_end = x - ivs[c][0]
            d_right_end = ivs[c][1] - x
        acc = 0.0
        for k, (lo, hi) in enumerate(segs):
            if k <= c:  # segment to the left of the node
                d_near = d_left_end if k == c else x - hi
                d_far = math.inf if math.isinf(lo) else x - lo
            else:  # segment to the right
                d_near = d_right_end if k == c + 1 else lo - x
                d_far = math.inf if math.isinf(hi) else hi - x
            acc += _ray_integral(d_near, d_far, s)
        E[i] = measures[i] * acc
    return E


def _distance_matrix(nodes, comp, idx, spacing) -> np.ndarray:
    D = np.abs(nodes[:, None] - nodes[None, :])
    for c in np.unique(comp):
        sel = np.flatnonzero(comp == c)
        h = spacing[sel[0]]
        sub = np.abs(idx[sel][:, None] - idx[sel][None, :]) * h
        D[np.ix_(sel, sel)] = sub
    return D


def _row_sums(K: np.ndarray) -> np.ndarray:
    """Row sums in ascending-value order.

    Summing each row's entries sorted by value makes the result invariant
    under any permutation of the nodes, so mirror-symmetric domains get
    bitwise persymmetric stiffness diagonals.
    """
    return np.add.reduce(np.sort(K, axis=1), axis=1)


def _finish_form(s, omega, nodes, measures, comp, idx, spacing) -> DiscreteGagliardoForm:
    D = _distance_matrix(nodes, comp, idx, spacing)
    np.fill_diagonal(D, 1.0)  # placeholder, diagonal of K is zeroed below
    K = np.outer(measures, measures) / D ** (1.0 + 2.0 * s)
    np.fill_diagonal(K, 0.0)
    counts = [int(np.sum(comp == c)) for c in range(int(comp.max()) + 1)]
    E = _exterior_weights(
        omega, nodes, measures, comp, idx, spacing, counts, s,
        lattice_aligned=True,
    )
    row_k = _row_sums(K)
    for arr in (nodes, measures, comp, idx, spacing, K, E, row_k):
        arr.setflags(write=False)
    return DiscreteGagliardoForm(
        s=s, domain=omega, nodes=nodes, measures=measures, comp=comp, idx=idx,
        spacing=spacing, K=K, E=E, row_k=row_k,
    )


def assemble_form(omega: OpenSet1D, grid: UniformGridSpec, s: float) -> DiscreteGagliardoForm:
    """Build the discrete form for omega at the grid's target cell width."""
    if not (0.0 < s < 1.0):
        raise InvalidParameterError(f"s must lie in (0, 1), got {s}")
    counts = grid.cell_counts(omega)
    total = sum(counts)
    if total == 0:
        raise EmptyGridError("grid spec produced zero cells")
    nodes, measures, comp, idx = [], [], [], []
    spacing = []
    for j, ((a, b), n_j) in enumerate(zip(omega.intervals, counts)):
        h_j = (b - a) / n_j
        ii = np.arange(n_j)
        nodes.append(a + (ii + 0.5) * h_j)
        measures.append(np.full(n_j, h_j))
        comp.append(np.full(n_j, j, dtype=int))
        idx.append(ii)
        spacing.append(np.full(n_j, h_j))
    return _finish_form(
        s, omega,
        np.concatenate(nodes), np.concatenate(measures),
        np.concatenate(comp), np.concatenate(idx), np.concatenate(spacing),
    )


def assemble_form_subgrid(
    ambient: DiscreteGagliardoForm, sub: OpenSet1D, tol: float = 1e-12
) -> tuple[DiscreteGagliardoForm, np.ndarray]:
    """Restrict an ambient form's grid to a subdomain.

    Keeps ambient cells whose closed cell lies inside (the closure of) one
    of the subdomain's intervals; exterior weights are recomputed exactly
    for the subdomain's complement. Returns (form, ambient node indices),
    so nodal values are directly comparable with the ambient grid.
    """
    x, m = ambient.nodes, ambient.measures
    keep = np.zeros(ambient.n, dtype=bool)
    for a, b in sub.intervals:
        keep |= (x - m / 2 >= a - tol) & (x + m / 2 <= b + tol)
    sel = np.flatnonzero(keep)
    if sel.size == 0:
        raise EmptyGridError("no ambient cells lie inside the subdomain")
    nodes = x[sel].copy()
    measures = m[sel].copy()
    comp = ambient.comp[sel].copy()
    idx = ambient.idx[sel].copy()
    spacing = ambient.spacing[sel].copy()
    D = _distance_matrix(nodes, comp, idx, spacing)
    np.fill_diagonal(D, 1.0)
    K = np.outer(measures, measures) / D ** (1.0 + 2.0 * ambient.s)
    np.fill_diagonal(K, 0.0)
    # position-based subdomain geometry; sub endpoints need not sit on the lattice
    sub_comp = np.zeros(sel.size, dtype=int)
    for j, (a, b) in enumerate(sub.intervals):
        sub_comp[(nodes > a - tol) & (nodes < b + tol)] = j
    E = _exterior_weights(
        sub, nodes, measures, sub_comp, idx, spacing,
        counts=None, s=ambient.s, lattice_aligned=False,
    )
    row_k = _row_sums(K)
    for arr in (nodes, measures, comp, idx, spacing, K, E, row_k):
        arr.setflags(write=False)
    form = DiscreteGagliardoForm(
        s=ambient.s, domain=sub, nodes=nodes, measures=measures, comp=comp,
        idx=idx, spacing=spacing, K=K, E=E, row_k=row_k,
    )
    return form, sel


def apply_stiffness(form: DiscreteGagliardoForm, u: GridFunction) -> GridFunction:
    """(A u)_i = 2 sum_j K_ij (u_i - u_j) + 2 E_i u_i; <Au, v> is symmetric."""
    v = _check_member(form, u)
    out = 2.0 * (form.row_k * v - form.K @ v + form.E * v)
    return GridFunction(form, out)


def energy(form: DiscreteGagliardoForm, u: GridFunction) -> float:
    """B_h(u) = <A u, u> >= 0, zero only at u = 0."""
    v = _check_member(form, u)
    return block_sum(v * apply_stiffness(form, u).values)


def lq_norm(form: DiscreteGagliardoForm, u: GridFunction, q: float) -> float:
    """(sum_i m_i |u_i|^q)^(1/q)."""
    if q < 1:
        raise InvalidParameterError(f"q must be >= 1, got {q}")
    v = _check_member(form, u)
    return block_sum(form.measures * np.abs(v) ** q) ** (1.0 / q)


def mass_integral(form: DiscreteGagliardoForm, values: np.ndarray) -> float:
    """sum_i m_i values_i with the fixed summation order."""
    return block_sum(form.measures * values)


def tail(form: DiscreteGagliardoForm, w: GridFunction, x0: float, rho: float) -> float:
    """Nonlocal tail rho^(2s) * sum_{|x_i - x0| >= rho} m_i |w_i| / |x_i - x0|^(1+2s).

    w vanishes outside the domain, so the true exterior contributes nothing.
    """
    if not (rho > 0):
        raise InvalidScaleError(f"rho must be positive, got {rho}")
    v = _check_member(form, w)
    d = np.abs(form.nodes - x0)
    far = d >= rho
    if not far.any():
        return 0.0
    contrib = form.measures[far] * np.abs(v[far]) / d[far] ** (1.0 + 2.0 * form.s)
    return rho ** (2.0 * form.s) * block_sum(contrib)


def form_to_json(form: DiscreteGagliardoForm) -> str:
    """Serialize without K (recomputed on load), flagged by a version string."""
    doc = {
        "version": form.version,
        "s": form.s,
        "domain": {"intervals": [list(ab) for ab in form.domain.intervals],
                   "dim": form.domain.dim},
        "nodes": form.nodes,
        "measures": form.measures,
        "comp": [int(c) for c in form.comp],
        "idx": [int(i) for i in form.idx],
        "spacing": form.spacing,
        "E": form.E,
    }
    return json_dumps(doc)


def form_from_json(text: str) -> DiscreteGagliardoForm:
    import json

    doc = json.loads(text)
    if doc.get("version") != FORM_VERSION:
        raise InvalidParameterError(f"unsupported form version {doc.get('version')!r}")
    omega = make_open_set(doc["domain"]["intervals"])
    nodes = np.asarray(doc["nodes"], dtype=float)
    measures = np.asarray(doc["measures"], dtype=float)
    comp = np.asarray(doc["comp"], dtype=int)
    idx = np.asarray(doc["idx"], dtype=int)
    spacing = np.asarray(doc["spacing"], dtype=float)
    s = float(doc["s"])
    D = _distance_matrix(nodes, comp, idx, spacing)
    np.fill_diagonal(D, 1.0)
    K = np.outer(measures, measures) / D ** (1.0 + 2.0 * s)
    np.fill_diagonal(K, 0.0)
    E = np.asarray(doc["E"], dtype=float)
    row_k = _row_sums(K)
    for arr in (nodes, measures, comp, idx, spacing, K, E, row_k):
        arr.setflags(write=False)
    return DiscreteGagliardoForm(
        s=s, domain=omega, nodes=nodes, measures=measures, comp=comp, idx=idx,
        spacing=spacing, K=K, E=E, row_k=row_k,
    )
