"""Count-vector primitives on finite alphabets.

A dataset of n symbols drawn from a finite alphabet is summarized by its
count vector (the empirical histogram). Every permutation-invariant
algorithm sees only that summary, so the combinatorics of count vectors
carry the whole analysis. This module provides:

- exact counting and lexicographic enumeration of all count vectors,
- the replacement distance between same-length datasets (half the L1
  gap between their counts),
- multinomial probabilities of count vectors under an i.i.d. source,
- the sub-Gaussian scale of a bounded loss table.

Counting is big-integer exact throughout; floats appear only at the
probability and loss boundaries. Enumeration is guarded by a cap
(default 10**7 vectors) overridable via the GENBOUND_TYPE_CAP
environment variable or a per-call argument.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InputError, ResourceLimitError

__all__ = [
    "DEFAULT_TYPE_CAP",
    "TYPE_CAP_ENV_VAR",
    "Alphabet",
    "CountVector",
    "SourceDistribution",
    "type_enumeration_cap",
    "type_of",
    "dataset_distance",
    "num_types",
    "num_types_upper_bound",
    "enumerate_types",
    "type_index",
    "type_probability",
    "sigma_sub_gaussian",
    "load_source_csv",
    "load_loss_csv",
]

DEFAULT_TYPE_CAP = 10_000_000
TYPE_CAP_ENV_VAR = "GENBOUND_TYPE_CAP"


def type_enumeration_cap() -> int:
    """Current enumeration cap: GENBOUND_TYPE_CAP if set, else 10**7."""
    raw = os.environ.get(TYPE_CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_TYPE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InputError(
            f"{TYPE_CAP_ENV_VAR} must be a positive integer, got {raw!r}"
        ) from exc
    if cap < 1:
        raise InputError(f"{TYPE_CAP_ENV_VAR} must be a positive integer, got {cap}")
    return cap


@dataclass(frozen=True)
class Alphabet:
    """A finite alphabet of at least two symbols.

    Labels are optional display names; when omitted, symbols are named by
    their indices. Labels must be unique so CSV headers stay unambiguous.
    """

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.size < 2:
            raise InputError(f"alphabet size must be at least 2, got {self.size}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.size:
                raise InputError(
                    f"expected {self.size} labels, got {len(labels)}"
                )
            if len(set(labels)) != len(labels):
                raise InputError("alphabet labels must be unique")
            object.__setattr__(self, "labels", labels)

    def symbol_names(self) -> tuple[str, ...]:
        if self.labels is not None:
            return self.labels
        return tuple(str(i) for i in range(self.size))


@dataclass(frozen=True, order=True)
class CountVector:
    """Histogram of a dataset: one non-negative count per symbol.

    Ordering is lexicographic on the counts, matching the public
    enumeration order. Serializes as comma-separated integers.
    """

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 2:
            raise InputError("count vector needs at least two symbols")
        if any(c < 0 for c in counts):
            raise InputError(f"counts must be non-negative, got {counts}")
        if sum(counts) < 1:
            raise InputError("count vector must describe a non-empty dataset")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        """Dataset length this histogram describes."""
        return sum(self.counts)

    @property
    def alphabet_size(self) -> int:
        return len(self.counts)

    def frequencies(self) -> np.ndarray:
        """Empirical distribution counts / n as a float array."""
        return np.asarray(self.counts, dtype=float) / self.n

    def to_csv_field(self) -> str:
        return ",".join(str(c) for c in self.counts)

    @classmethod
    def from_csv_field(cls, field: str) -> "CountVector":
        parts = [p.strip() for p in field.split(",")]
        try:
            counts = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise InputError(f"count vector field is not integer-valued: {field!r}") from exc
        return cls(counts)


class SourceDistribution:
    """An i.i.d. source over the alphabet: one probability per symbol.

    Entries must be non-negative and sum to 1 within 1e-12. Inputs are
    rejected, never renormalized.
    """

    __slots__ = ("probs",)

    def __init__(self, probs: Iterable[float]) -> None:
        arr = np.asarray(list(probs), dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise InputError("source distribution needs at least two probabilities")
        if not np.all(np.isfinite(arr)):
            raise InputError("source probabilities must be finite")
        if np.any(arr < 0):
            raise InputError(f"source probabilities must be non-negative, got {arr.tolist()}")
        total = float(math.fsum(arr.tolist()))
        if abs(total - 1.0) > 1e-12:
            raise InputError(
                f"source probabilities must sum to 1 within 1e-12, got sum {total!r}"
            )
        arr.flags.writeable = False
        self.probs = arr

    @classmethod
    def uniform(cls, size: int) -> "SourceDistribution":
        if size < 2:
            raise InputError(f"alphabet size must be at least 2, got {size}")
        return cls([1.0 / size] * size)

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.size)

    def __repr__(self) -> str:
        return f"SourceDistribution({self.probs.tolist()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SourceDistribution):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(
            np.all(self.probs == other.probs)
        )


def type_of(sequence: Sequence[int], alphabet: Alphabet) -> CountVector:
    """Count vector of a symbol-index sequence.

    Permutation-invariant by construction. Indices outside
    [0, alphabet.size) are rejected.
    """
    if len(sequence) == 0:
        raise InputError("cannot take the type of an empty sequence")
    counts = [0] * alphabet.size
    for idx in sequence:
        i = int(idx)
        if i != idx or not 0 <= i < alphabet.size:
            raise InputError(
                f"symbol index {idx!r} outside alphabet of size {alphabet.size}"
            )
        counts[i] += 1
    return CountVector(tuple(counts))


def dataset_distance(s: CountVector, s2: CountVector) -> int:
    """Minimum number of single-element replacements between two datasets.

    Equals half the L1 distance between the count vectors. Defined only
    for equal alphabet sizes and equal dataset lengths.
    """
    if s.alphabet_size != s2.alphabet_size:
        raise InputError(
            f"alphabet sizes differ: {s.alphabet_size} vs {s2.alphabet_size}"
        )
    if s.n != s2.n:
        raise InputError(f"dataset lengths differ: {s.n} vs {s2.n}")
    gap = sum(abs(a - b) for a, b in zip(s.counts, s2.counts))
    return gap // 2


def num_types(alphabet_size: int, n: int) -> int:
    """Exact number of count vectors: C(n + m - 1, m - 1) for m symbols."""
    if alphabet_size < 1:
        raise InputError(f"alphabet size must be positive, got {alphabet_size}")
    if n < 1:
        raise InputError(f"dataset length must be positive, got {n}")
    return math.comb(n + alphabet_size - 1, alphabet_size - 1)


def num_types_upper_bound(alphabet_size: int, n: int) -> int:
    """Polynomial envelope (n + 1)**(m - 1); tight exactly when m = 2."""
    if alphabet_size < 2:
        raise InputError(f"alphabet size must be at least 2, got {alphabet_size}")
    if n < 1:
        raise InputError(f"dataset length must be positive, got {n}")
    return (n + 1) ** (alphabet_size - 1)


def _check_cap(alphabet_size: int, n: int, cap: int | None) -> int:
    total = num_types(alphabet_size, n)
    limit = type_enumeration_cap() if cap is None else int(cap)
    if total > limit:
        raise ResourceLimitError(
            f"enumerating {total} count vectors (alphabet size {alphabet_size}, "
            f"n={n}) exceeds the enumeration cap of {limit}; raise "
            f"{TYPE_CAP_ENV_VAR} or pass a larger cap to override"
        )
    return total


def enumerate_types(
    alphabet_size: int, n: int, cap: int | None = None
) -> Iterator[CountVector]:
    """Yield every count vector in lexicographic order.

    The order is a public contract: kernel row indices and serialized
    mechanism files both rely on it. Refuses to start when the exact
    count exceeds the cap.
    """
    if alphabet_size < 2:
        raise InputError(f"alphabet size must be at least 2, got {alphabet_size}")
    _check_cap(alphabet_size, n, cap)

    def rec(prefix: tuple[int, ...], remaining: int, dims: int) -> Iterator[tuple[int, ...]]:
        if dims == 1:
            yield prefix + (remaining,)
            return
        for head in range(remaining + 1):
            yield from rec(prefix + (head,), remaining - head, dims - 1)

    for counts in rec((), n, alphabet_size):
        yield CountVector(counts)


def type_index(s: CountVector) -> int:
    """Rank of a count vector in the lexicographic enumeration order."""
    rank = 0
    remaining = s.n
    dims = s.alphabet_size
    for c in s.counts[:-1]:
        # vectors with a smaller value at this position, any tail
        for v in range(c):
            rank += math.comb(remaining - v + dims - 2, dims - 2)
        remaining -= c
        dims -= 1
    return rank


def type_probability(s: CountVector, source: SourceDistribution) -> float:
    """Multinomial probability of observing this count vector.

    n! / prod(counts!) * prod(p_a ** counts_a), with the coefficient in
    exact big-integer arithmetic. Sums to 1 over all count vectors.
    """
    if s.alphabet_size != source.alphabet_size:
        raise InputError(
            f"count vector over {s.alphabet_size} symbols does not match "
            f"source over {source.alphabet_size}"
        )
    coef = 1
    partial = 0
    for c in s.counts:
        partial += c
        coef *= math.comb(partial, c)
    mass = 1.0
    for c, p in zip(s.counts, source.probs):
        if c == 0:
            continue
        if p == 0.0:
            return 0.0
        mass *= float(p) ** c
    try:
        return float(coef) * mass
    except OverflowError:
        # coefficient too large for a float on its own; the product is
        # still a probability, so evaluate in log space
        return math.exp(math.log(coef) + math.fsum(
            c * math.log(p) for c, p in zip(s.counts, source.probs) if c > 0
        ))


def sigma_sub_gaussian(loss_table: np.ndarray) -> float:
    """Sub-Gaussian scale of a bounded loss table via the bounded-range rule.

    For each hypothesis row the loss of a random symbol lies in
    [row.min(), row.max()], so it is (range / 2)-sub-Gaussian; the table's
    scale is the worst row's. Rows index hypotheses, columns symbols.
    """
    table = np.asarray(loss_table, dtype=float)
    if table.ndim != 2 or table.shape[0] < 1 or table.shape[1] < 2:
        raise InputError(
            "loss table must be a 2-D array with at least one hypothesis row "
            "and two symbol columns"
        )
    if not np.all(np.isfinite(table)):
        raise InputError("loss table entries must be finite")
    ranges = table.max(axis=1) - table.min(axis=1)
    return float(ranges.max() / 2.0)


def load_source_csv(path: str) -> tuple[SourceDistribution, tuple[str, ...]]:
    """Load a source distribution from CSV: header names symbols, one data row."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise InputError(f"{path}: expected a header row and one probability row")
    header = tuple(h.strip() for h in rows[0])
    data = rows[1]
    if len(data) != len(header):
        raise InputError(
            f"{path}: probability row has {len(data)} fields, header has {len(header)}"
        )
    try:
        probs = [float(x) for x in data]
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric probability entry") from exc
    return SourceDistribution(probs), header


def load_loss_csv(path: str) -> tuple[np.ndarray, tuple[str, ...]]:
    """Load a loss table from CSV: header names symbols, one row per hypothesis."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise InputError(f"{path}: expected a header row and at least one loss row")
    header = tuple(h.strip() for h in rows[0])
    table = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InputError(
                f"{path}: line {i} has {len(row)} fields, header has {len(header)}"
            )
        try:
            table.append([float(x) for x in row])
        except ValueError as exc:
            raise InputError(f"{path}: non-numeric loss entry on line {i}") from exc
    return np.asarray(table, dtype=float), header
