"""1-D open sets: finite unions of disjoint open intervals and their geometry.

An :class:`OpenSet1D` is the canonical form of a union of open intervals:
sorted, pairwise disjoint, with touching or overlapping input intervals
merged (an open set and its closure differ on a null set, and the
discretization cannot tell them apart).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDomainError, InvalidDomainError, InvalidScaleError

_MERGE_TOL = 0.0  # touching intervals (b_j == a_{j+1}) are merged exactly


@dataclass(frozen=True)
class OpenSet1D:
    """A finite union of disjoint open intervals, dimension-tagged (N = 1)."""

    intervals: tuple[tuple[float, float], ...]
    dim: int = 1
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def diameter(self) -> float:
        return self.intervals[-1][1] - self.intervals[0][0]

    @property
    def hull(self) -> tuple[float, float]:
        return (self.intervals[0][0], self.intervals[-1][1])

    @property
    def gaps(self) -> tuple[float, ...]:
        """Widths of the interior gaps between consecutive intervals."""
        return tuple(
            self.intervals[j + 1][0] - self.intervals[j][1]
            for j in range(len(self.intervals) - 1)
        )

    def contains(self, x: float) -> bool:
        return any(a < x < b for a, b in self.intervals)

    def includes(self, other: "OpenSet1D", tol: float = 1e-12) -> bool:
        """Intervalwise inclusion: every interval of `other` sits in one of ours."""
        return all(
            any(a - tol <= c and d <= b + tol for a, b in self.intervals)
            for c, d in other.intervals
        )

    def __str__(self) -> str:
        return ";".join(f"{a:g},{b:g}" for a, b in self.intervals)


def make_open_set(pairs) -> OpenSet1D:
    """Canonicalize a sequence of (a, b) pairs into an OpenSet1D.

    Overlapping or touching pairs are merged; the merge is recorded in the
    canonicalization notes. Raises InvalidDomainError on empty input or on
    any degenerate pair a >= b.
    """
    pairs = [(float(a), float(b)) for a, b in pairs]
    if not pairs:
        raise InvalidDomainError("no intervals given")
    for a, b in pairs:
        if not (a < b):
            raise InvalidDomainError(f"degenerate interval ({a}, {b})")
        if not (np.isfinite(a) and np.isfinite(b)):
            raise InvalidDomainError(f"non-finite interval ({a}, {b})")
    pairs.sort()
    merged = [pairs[0]]
    notes = []
    for a, b in pairs[1:]:
        pa, pb = merged[-1]
        if a <= pb + _MERGE_TOL:
            if b > pb:
                merged[-1] = (pa, b)
            notes.append(f"merged ({a:g},{b:g}) into ({pa:g},{max(pb, b):g})")
        else:
            merged.append((a, b))
    return OpenSet1D(intervals=tuple(merged), notes=tuple(notes))


def parse_domain(text: str) -> OpenSet1D:
    """Parse the CLI domain format: semicolon-separated comma pairs, "0,1;2,3.5"."""
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise InvalidDomainError(f"bad interval {chunk!r}; expected 'a,b'")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InvalidDomainError(f"bad interval {chunk!r}") from exc
    return make_open_set(pairs)


def scale_set(omega: OpenSet1D, t: float) -> OpenSet1D:
    """Multiply every endpoint by t > 0."""
    if not (t > 0):
        raise InvalidScaleError(f"scale factor must be positive, got {t}")
    return make_open_set([(t * a, t * b) for a, b in omega.intervals])


def dist_to_boundary(omega: OpenSet1D, x) -> float | np.ndarray:
    """Distance to the boundary for points inside omega, 0 outside.

    Accepts a scalar or an array of positions.
    """
    xs = np.asarray(x, dtype=float)
    endpoints = np.array([e for ab in omega.intervals for e in ab])
    d = np.min(np.abs(xs[..., None] - endpoints), axis=-1)
    inside = np.zeros(xs.shape, dtype=bool)
    for a, b in omega.intervals:
        inside |= (a < xs) & (xs < b)
    out = np.where(inside, d, 0.0)
    if np.isscalar(x) or xs.ndim == 0:
        return float(out)
    return out


def intersect_ball(omega: OpenSet1D, r: float, center: float = 0.0) -> OpenSet1D:
    """Omega intersected with the open ball B_r(center)."""
    if not (r > 0):
        raise InvalidScaleError(f"radius must be positive, got {r}")
    lo, hi = center - r, center + r
    pairs = []
    for a, b in omega.intervals:
        c, d = max(a, lo), min(b, hi)
        if c < d:
            pairs.append((c, d))
    if not pairs:
        raise EmptyDomainError(f"domain does not meet B_{r}({center})")
    return make_open_set(pairs)


def exterior_cone_params(omega: OpenSet1D) -> tuple[float, float, float]:
    """(cone length l, aperture weight theta, diameter D) for the Hardy constant.

    In 1-D a cone is a ray, so theta = 1. The cone length is the smallest
    interior gap if any gap exists; outer boundary points carry infinite
    rays, so with no gaps l is clamped to D (only min(l/D, 1) ever enters
    the constant, so the clamp loses nothing).
    """
    D = omega.diameter
    gaps = omega.gaps
    ell = min(gaps) if gaps else D
    return (min(ell, D), 1.0, D)
