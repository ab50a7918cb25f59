"""Deterministic covering constructions for count vectors.

Three cover families, all with analytically certified radii in the
replacement distance:

- full grid: split [0, n] into t cells per free coordinate (all but the
  last, which is pinned by the sum), pick one integer atom per cell, and
  patch the sum constraint afterwards; at most t**(m-1) centers with
  radius (n/(2t) + 1/2)(m - 1);
- simplex grid: same cells, but only index tuples whose cell indices sum
  to at most t - 1 (the cells actually meeting the feasible region);
  exactly S_{m-1}(t) = C(t + m - 2, m - 1) cells before deduplication;
- typical grid: covers only the typical count vectors of a source,
  splitting each symbol's typical range into t cells; radius
  sqrt(n log n) * m / t.

The certified radius stored on a cover is always the analytic bound.
The achieved radius is a measured quantity reported by verify_cover and
never substituted into any formula. Atom selection inside a cell with m
atoms: odd m takes the central atom, even m behaves as if the cell were
one unit wider and takes that center (the upper-middle atom), so the
per-coordinate error never exceeds (floor(cell length) + 1) / 2.

Everything here is deterministic: same inputs, same centers, same order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import InputError
from .types_core import (
    CountVector,
    SourceDistribution,
    enumerate_types,
    type_probability,
)

__all__ = [
    "CoverKind",
    "CoverSpec",
    "TypicalSetSpec",
    "CoverVerification",
    "GridParameter",
    "simplex_hypercube_count",
    "simplex_hypercube_count_upper",
    "build_full_grid_cover",
    "build_simplex_grid_cover",
    "typical_epsilon",
    "is_typical",
    "typical_mass",
    "build_typical_cover",
    "optimal_grid_parameter",
    "verify_cover",
]


class CoverKind(enum.Enum):
    FULL_GRID = "full_grid"
    SIMPLEX_GRID = "simplex_grid"
    TYPICAL_GRID = "typical_grid"


@dataclass(frozen=True)
class CoverSpec:
    """A finished cover: centers, grid parameter, and its analytic radius.

    typical_epsilon is 0 except for typical-grid covers, where it records
    the typicality threshold the cover was built against.
    """

    centers: tuple[CountVector, ...]
    t: int
    certified_radius: float
    kind: CoverKind
    typical_epsilon: float = 0.0

    def __post_init__(self) -> None:
        if len(self.centers) < 1:
            raise InputError("cover must have at least one center")
        if len(set(self.centers)) != len(self.centers):
            raise InputError("cover centers must be duplicate-free")
        n = self.centers[0].n
        m = self.centers[0].alphabet_size
        for c in self.centers:
            if c.n != n or c.alphabet_size != m:
                raise InputError("cover centers must share one alphabet and length")
        if self.t < 1:
            raise InputError(f"grid parameter must be positive, got {self.t}")

    @property
    def n(self) -> int:
        return self.centers[0].n

    @property
    def alphabet_size(self) -> int:
        return self.centers[0].alphabet_size


@dataclass(frozen=True)
class TypicalSetSpec:
    """A typicality test: source, dataset length, per-symbol threshold."""

    epsilon: float
    source: SourceDistribution = field(compare=False)
    n: int

    def __post_init__(self) -> None:
        if not (self.epsilon > 0):
            raise InputError(f"epsilon must be positive, got {self.epsilon}")
        if self.n < 1:
            raise InputError(f"dataset length must be positive, got {self.n}")


@dataclass(frozen=True)
class CoverVerification:
    """Outcome of an exhaustive radius check."""

    achieved_radius: int
    certified_radius: float
    verified: bool
    checked_vectors: int
    worst: CountVector | None


@dataclass(frozen=True)
class GridParameter:
    """Chosen grid parameter plus how it was obtained."""

    t: int
    clamped: bool
    raw_value: float


def simplex_hypercube_count(k: int, t: int) -> int:
    """Number of k-dimensional grid cells meeting the region under the
    simplex: S_k(t) = C(t + k - 1, k), exact.

    Satisfies S_1(t) = t, S_k(1) = 1, and the recursion
    S_k(t) = sum_{j=1..t} S_{k-1}(j).
    """
    if k < 1:
        raise InputError(f"dimension must be positive, got {k}")
    if t < 1:
        raise InputError(f"grid parameter must be positive, got {t}")
    return math.comb(t + k - 1, k)


def simplex_hypercube_count_upper(k: int, t: int) -> float:
    """Smooth envelope (t + (k-1)/2)**k / k! for the simplex cell count."""
    if k < 1:
        raise InputError(f"dimension must be positive, got {k}")
    if t < 1:
        raise InputError(f"grid parameter must be positive, got {t}")
    return (t + (k - 1) / 2.0) ** k / math.factorial(k)


def _cell_atom_range(length: int, t: int, j: int) -> tuple[int, int]:
    """Integer atoms inside cell j of [0, length] split into t equal cells."""
    lo = Fraction(j * length, t)
    hi = Fraction((j + 1) * length, t)
    return math.ceil(lo), math.floor(hi)


def _cell_center(length: int, t: int, j: int) -> int:
    """Representative atom of a cell: central for an odd atom count,
    center of the one-unit-enlarged cell otherwise."""
    lo, hi = _cell_atom_range(length, t, j)
    m = hi - lo + 1
    if m < 1:
        raise InputError(
            f"cell {j} of [0, {length}] split {t} ways contains no integer atom"
        )
    return lo + m // 2 if m % 2 == 0 else lo + (m - 1) // 2


def _patch_sum(coords: list[int], n: int) -> tuple[int, ...]:
    """Make the free coordinates feasible and append the pinned one.

    If the free coordinates overshoot n, repeatedly decrement the largest
    one; the pinned last coordinate absorbs whatever remains.
    """
    overshoot = sum(coords) - n
    patched = list(coords)
    while overshoot > 0:
        i = max(range(len(patched)), key=lambda a: patched[a])
        patched[i] -= 1
        overshoot -= 1
    return tuple(patched) + (n - sum(patched),)


def _grid_radius(alphabet_size: int, n: int, t: int) -> float:
    return (n / (2.0 * t) + 0.5) * (alphabet_size - 1)


def _check_grid_args(alphabet_size: int, n: int, t: int) -> None:
    if alphabet_size < 2:
        raise InputError(f"alphabet size must be at least 2, got {alphabet_size}")
    if n < 1:
        raise InputError(f"dataset length must be positive, got {n}")
    if not 1 <= t <= n + 1:
        raise InputError(
            f"grid parameter must satisfy 1 <= t <= n + 1, got t={t} for n={n}"
        )


def build_full_grid_cover(alphabet_size: int, n: int, t: int) -> CoverSpec:
    """Cover all count vectors with one center per grid cell.

    Cells are the t**(m-1) products of per-coordinate intervals over the
    free coordinates; centers are patched to valid count vectors and
    deduplicated. Certified radius: (n/(2t) + 1/2)(m - 1), which also
    stays below (n/t)(m - 1).
    """
    _check_grid_args(alphabet_size, n, t)
    k = alphabet_size - 1
    per_dim = [_cell_center(n, t, j) for j in range(t)]
    seen: dict[tuple[int, ...], None] = {}
    for combo in product(per_dim, repeat=k):
        seen.setdefault(_patch_sum(list(combo), n), None)
    centers = tuple(CountVector(c) for c in seen)
    return CoverSpec(centers, t, _grid_radius(alphabet_size, n, t), CoverKind.FULL_GRID)


def build_simplex_grid_cover(alphabet_size: int, n: int, t: int) -> CoverSpec:
    """Full-grid construction restricted to cells meeting the feasible region.

    Keeps exactly the cells whose index tuples sum to at most t - 1, i.e.
    S_{m-1}(t) cells, then patches and deduplicates as the full grid does.
    Same certified radius as the full grid at the same t.
    """
    _check_grid_args(alphabet_size, n, t)
    k = alphabet_size - 1
    per_dim = [_cell_center(n, t, j) for j in range(t)]
    seen: dict[tuple[int, ...], None] = {}
    for idx in product(range(t), repeat=k):
        if sum(idx) > t - 1:
            continue
        combo = [per_dim[j] for j in idx]
        seen.setdefault(_patch_sum(combo, n), None)
    centers = tuple(CountVector(c) for c in seen)
    return CoverSpec(
        centers, t, _grid_radius(alphabet_size, n, t), CoverKind.SIMPLEX_GRID
    )


def typical_epsilon(n: int) -> float:
    """Default typicality threshold sqrt(log(n) / n)."""
    if n < 2:
        raise InputError(f"typicality needs n >= 2, got {n}")
    return math.sqrt(math.log(n) / n)


def is_typical(s: CountVector, source: SourceDistribution, epsilon: float) -> bool:
    """Whether every empirical frequency is within epsilon of the source,
    with zero-probability symbols unseen."""
    if s.alphabet_size != source.alphabet_size:
        raise InputError(
            f"count vector over {s.alphabet_size} symbols does not match "
            f"source over {source.alphabet_size}"
        )
    if not (epsilon > 0):
        raise InputError(f"epsilon must be positive, got {epsilon}")
    n = s.n
    for c, p in zip(s.counts, source.probs):
        if p == 0.0:
            if c != 0:
                return False
        elif abs(c / n - p) > epsilon:
            return False
    return True


def typical_mass(
    source: SourceDistribution, n: int, epsilon: float, cap: int | None = None
) -> float:
    """Exact probability of the typical set: sum of multinomial masses
    over typical count vectors. Enumerates all count vectors, so the
    type-enumeration cap applies."""
    if n < 1:
        raise InputError(f"dataset length must be positive, got {n}")
    masses = [
        type_probability(s, source)
        for s in enumerate_types(source.alphabet_size, n, cap=cap)
        if is_typical(s, source, epsilon)
    ]
    return float(math.fsum(masses))


def _typical_range(n: int, p: float, epsilon: float) -> tuple[int, int]:
    """Smallest and largest count a symbol may take in a typical vector.

    Scans integers with the same predicate is_typical uses, so the cover
    and the membership test can never disagree on borderline counts.
    """
    if p == 0.0:
        return 0, 0
    lo, hi = None, None
    for c in range(n + 1):
        if abs(c / n - p) <= epsilon:
            if lo is None:
                lo = c
            hi = c
    if lo is None:
        # threshold narrower than one lattice step; fall back to the
        # nearest achievable count so the cover still has a center there
        c = min(n, max(0, round(p * n)))
        return c, c
    return lo, hi


def build_typical_cover(source: SourceDistribution, n: int, t: int) -> CoverSpec:
    """Cover the typical set, gridding every symbol's typical count range.

    Works in the full m-dimensional box (one axis per symbol, not m - 1),
    splitting each typical range into t cells and patching centers so the
    counts sum to n. Certified radius: sqrt(n log n) * m / t.
    """
    if n < 2:
        raise InputError(f"typical covers need n >= 2, got {n}")
    eps = typical_epsilon(n)
    t_max = 2.0 * math.sqrt(n * math.log(n))
    if not 1 <= t <= t_max:
        raise InputError(
            f"grid parameter must satisfy 1 <= t <= 2*sqrt(n log n) = {t_max:.3f}, "
            f"got t={t} for n={n}"
        )
    m = source.alphabet_size
    ranges = [_typical_range(n, float(p), eps) for p in source.probs]
    per_dim: list[list[int]] = []
    for lo, hi in ranges:
        if hi == lo:
            per_dim.append([lo] * t)
            continue
        span = hi - lo
        per_dim.append([lo + _cell_center(span, t, j) for j in range(t)])

    seen: dict[tuple[int, ...], None] = {}
    for combo in product(*per_dim):
        coords = list(combo)
        deficit = n - sum(coords)
        while deficit > 0:
            # grow the coordinate with the most room left in its range
            i = max(range(m), key=lambda a: ranges[a][1] - coords[a])
            if coords[i] >= n:
                i = min(range(m), key=lambda a: coords[a])
            coords[i] += 1
            deficit -= 1
        while deficit < 0:
            # shrink the coordinate sticking furthest above its range floor
            i = max(range(m), key=lambda a: coords[a] - ranges[a][0])
            if coords[i] <= 0:
                i = max(range(m), key=lambda a: coords[a])
            coords[i] -= 1
            deficit += 1
        seen.setdefault(tuple(coords), None)
    centers = tuple(CountVector(c) for c in seen)
    radius = math.sqrt(n * math.log(n)) * m / t
    return CoverSpec(centers, t, radius, CoverKind.TYPICAL_GRID, typical_epsilon=eps)


_FULL_REGIMES = {"dp_full", "gdp_full"}
_TYPICAL_REGIMES = {"dp_typical", "gdp_typical"}


def optimal_grid_parameter(
    regime: str, privacy_parameter: float, alphabet_size: int, n: int
) -> GridParameter:
    """Grid parameter minimizing the cover bound's stability + log-count
    trade-off, rounded to an integer and clamped to the valid interval.

    Optimizers: dp_full -> eps*n; gdp_full -> sqrt(m-1)*mu*n;
    dp_typical -> sqrt(n log n)*eps; gdp_typical -> sqrt(m n log n)*mu.
    """
    if regime not in _FULL_REGIMES | _TYPICAL_REGIMES:
        raise InputError(
            f"unknown regime {regime!r}; expected one of dp_full, gdp_full, "
            f"dp_typical, gdp_typical"
        )
    if not (privacy_parameter > 0):
        raise InputError(f"privacy parameter must be positive, got {privacy_parameter}")
    if alphabet_size < 2:
        raise InputError(f"alphabet size must be at least 2, got {alphabet_size}")
    if n < 1:
        raise InputError(f"dataset length must be positive, got {n}")

    if regime == "dp_full":
        raw = privacy_parameter * n
    elif regime == "gdp_full":
        raw = math.sqrt(alphabet_size - 1) * privacy_parameter * n
    elif regime == "dp_typical":
        raw = math.sqrt(n * math.log(n)) * privacy_parameter
    else:
        raw = math.sqrt(alphabet_size * n * math.log(n)) * privacy_parameter

    if regime in _FULL_REGIMES:
        lo, hi = 1, n
    else:
        lo, hi = 1, max(1, math.floor(2.0 * math.sqrt(n * math.log(max(n, 2)))))
    rounded = int(round(raw))
    t = min(max(rounded, lo), hi)
    return GridParameter(t=t, clamped=(t != rounded), raw_value=float(raw))


def verify_cover(
    cover: CoverSpec,
    source: SourceDistribution | None = None,
    cap: int | None = None,
) -> CoverVerification:
    """Exhaustively check that every relevant count vector lies within the
    certified radius of some center.

    Full and simplex covers are checked against every count vector;
    typical covers against the typical set only (a source is required).
    """
    if cover.kind is CoverKind.TYPICAL_GRID:
        if source is None:
            raise InputError("verifying a typical cover requires the source")
        if source.alphabet_size != cover.alphabet_size:
            raise InputError(
                f"source over {source.alphabet_size} symbols does not match "
                f"cover over {cover.alphabet_size}"
            )

    center_counts = [c.counts for c in cover.centers]
    worst: CountVector | None = None
    achieved = 0
    checked = 0
    for s in enumerate_types(cover.alphabet_size, cover.n, cap=cap):
        if cover.kind is CoverKind.TYPICAL_GRID and not is_typical(
            s, source, cover.typical_epsilon
        ):
            continue
        checked += 1
        best = min(
            sum(abs(a - b) for a, b in zip(s.counts, c)) // 2
            for c in center_counts
        )
        if best > achieved:
            achieved = best
            worst = s
    return CoverVerification(
        achieved_radius=achieved,
        certified_radius=cover.certified_radius,
        verified=achieved <= cover.certified_radius + 1e-12,
        checked_vectors=checked,
        worst=worst,
    )
