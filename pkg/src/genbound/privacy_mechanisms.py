"""Privacy parameters, concrete private kernels, and KL stability audits.

A mechanism here is a row-stochastic kernel from count vectors to a
finite hypothesis set; row order is the lexicographic count-vector
order, which is a public contract shared with the serialization format.

Privacy translates into KL stability between neighboring inputs:

- eps-DP at replacement distance k: KL <= min(k*eps*tanh(k*eps/2),
  (k*eps)**2/2, k*eps); the tanh expression is never the loser and the
  quadratic/linear envelopes cross at k*eps = 2;
- mu-GDP at distance k: KL <= (k*mu)**2 / 2.

verify_kl_stability measures the worst observed KL at every distance
and compares it against these envelopes, which is the audit the CLI
exposes.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass

import numpy as np

from .divergence_core import kl_divergence
from .errors import InputError
from .types_core import (
    _check_cap,
    dataset_distance,
    enumerate_types,
    num_types,
)

__all__ = [
    "PrivacyKind",
    "PrivacyParams",
    "Mechanism",
    "StabilityRow",
    "StabilityReport",
    "kl_stability_bound",
    "exponential_mechanism_over_types",
    "identity_mechanism",
    "uniform_mechanism",
    "gaussian_mechanism_neighbor_kl",
    "verify_kl_stability",
    "gdp_param_noisy_sgd",
    "save_mechanism_csv",
    "load_mechanism_csv",
]


class PrivacyKind(enum.Enum):
    EPS_DP = "eps_dp"
    MU_GDP = "mu_gdp"
    NONE = "none"


@dataclass(frozen=True)
class PrivacyParams:
    """A privacy guarantee: kind plus its positive parameter (or none)."""

    kind: PrivacyKind
    value: float | None = None

    def __post_init__(self) -> None:
        if self.kind is PrivacyKind.NONE:
            if self.value is not None:
                raise InputError("privacy kind 'none' takes no parameter")
        else:
            if self.value is None or not (self.value > 0):
                raise InputError(
                    f"privacy parameter must be positive, got {self.value!r}"
                )

    @classmethod
    def eps_dp(cls, epsilon: float) -> "PrivacyParams":
        return cls(PrivacyKind.EPS_DP, float(epsilon))

    @classmethod
    def mu_gdp(cls, mu: float) -> "PrivacyParams":
        return cls(PrivacyKind.MU_GDP, float(mu))

    @classmethod
    def none(cls) -> "PrivacyParams":
        return cls(PrivacyKind.NONE, None)


class Mechanism:
    """Row-stochastic kernel from count vectors to hypothesis indices.

    kernel[i] is the output distribution for the i-th count vector in
    lexicographic order; rows must sum to 1 within 1e-10. The declared
    privacy is an assertion about the kernel, not a derived fact; use
    verify_kl_stability to audit it.
    """

    __slots__ = ("kernel", "alphabet_size", "n", "privacy", "description")

    def __init__(
        self,
        kernel: np.ndarray,
        alphabet_size: int,
        n: int,
        privacy: PrivacyParams,
        description: str = "",
    ) -> None:
        mat = np.asarray(kernel, dtype=float)
        if mat.ndim != 2:
            raise InputError("kernel must be a 2-D array")
        expected_rows = num_types(alphabet_size, n)
        if mat.shape[0] != expected_rows:
            raise InputError(
                f"kernel has {mat.shape[0]} rows; alphabet size {alphabet_size} "
                f"with n={n} has {expected_rows} count vectors"
            )
        if mat.shape[1] < 1:
            raise InputError("kernel needs at least one hypothesis column")
        if np.any(mat < 0) or not np.all(np.isfinite(mat)):
            raise InputError("kernel entries must be finite and non-negative")
        sums = mat.sum(axis=1)
        bad = np.where(np.abs(sums - 1.0) > 1e-10)[0]
        if bad.size:
            raise InputError(
                f"kernel row {int(bad[0])} sums to {sums[bad[0]]!r}, "
                "expected 1 within 1e-10"
            )
        mat = mat.copy()
        mat.flags.writeable = False
        self.kernel = mat
        self.alphabet_size = int(alphabet_size)
        self.n = int(n)
        self.privacy = privacy
        self.description = description

    @property
    def hypothesis_count(self) -> int:
        return int(self.kernel.shape[1])


def kl_stability_bound(privacy: PrivacyParams, k: int) -> float:
    """KL stability envelope at replacement distance k for a declared
    privacy guarantee. Zero distance is zero divergence."""
    if k < 0:
        raise InputError(f"distance must be non-negative, got {k}")
    if privacy.kind is PrivacyKind.NONE:
        raise InputError("no privacy guarantee: stability bound undefined")
    if k == 0:
        return 0.0
    if privacy.kind is PrivacyKind.EPS_DP:
        x = k * privacy.value
        return min(x * math.tanh(x / 2.0), x * x / 2.0, x)
    return 0.5 * (k * privacy.value) ** 2


def exponential_mechanism_over_types(
    alphabet_size: int, n: int, epsilon: float, cap: int | None = None
) -> Mechanism:
    """Exponential mechanism selecting a count vector near the input's.

    Hypothesis set = the count vectors themselves; the row for input s
    weights candidate w proportionally to exp(-eps * d(s, w) / 2). The
    replacement distance has sensitivity 1, so this is eps-DP.
    """
    if not (epsilon > 0):
        raise InputError(f"epsilon must be positive, got {epsilon}")
    types = list(enumerate_types(alphabet_size, n, cap=cap))
    counts = np.array([t.counts for t in types], dtype=float)
    dist = np.abs(counts[:, None, :] - counts[None, :, :]).sum(axis=2) / 2.0
    raw = np.exp(-epsilon * dist / 2.0)
    kernel = raw / raw.sum(axis=1, keepdims=True)
    return Mechanism(
        kernel,
        alphabet_size,
        n,
        PrivacyParams.eps_dp(epsilon),
        description=f"exponential mechanism over count vectors, eps={epsilon}",
    )


def identity_mechanism(alphabet_size: int, n: int, cap: int | None = None) -> Mechanism:
    """Deterministic kernel mapping each count vector to its own index."""
    total = _check_cap(alphabet_size, n, cap)
    kernel = np.eye(total)
    return Mechanism(
        kernel,
        alphabet_size,
        n,
        PrivacyParams.none(),
        description="identity mechanism (reports the input count vector)",
    )


def uniform_mechanism(alphabet_size: int, n: int, cap: int | None = None) -> Mechanism:
    """Input-independent kernel: uniform over the count-vector indices."""
    total = _check_cap(alphabet_size, n, cap)
    kernel = np.full((total, total), 1.0 / total)
    return Mechanism(
        kernel,
        alphabet_size,
        n,
        PrivacyParams.none(),
        description="uniform mechanism (ignores its input)",
    )


def gaussian_mechanism_neighbor_kl(mu: float, k: int) -> float:
    """Worst-case KL between Gaussian-mechanism outputs at distance k.

    Replacing k elements moves the count vector by +-k in two
    coordinates, so the means differ by ||delta||^2 = 2 k^2; with
    per-coordinate noise variance sigma^2 = 2 / mu^2 the Gaussian KL is
    ||delta||^2 / (2 sigma^2). Agrees with kl_stability_bound for mu-GDP.
    """
    if not (mu > 0):
        raise InputError(f"mu must be positive, got {mu}")
    if k < 0:
        raise InputError(f"distance must be non-negative, got {k}")
    delta_sq = 2.0 * k * k
    sigma_sq = 2.0 / (mu * mu)
    return delta_sq / (2.0 * sigma_sq)


@dataclass(frozen=True)
class StabilityRow:
    """Audit result at one replacement distance."""

    k: int
    max_kl: float
    bound: float
    passed: bool
    worst_pair: tuple[int, int]


@dataclass(frozen=True)
class StabilityReport:
    rows: tuple[StabilityRow, ...]
    passed: bool


def verify_kl_stability(
    mech: Mechanism, tol: float = 1e-9, cap: int | None = None
) -> StabilityReport:
    """Measure the worst KL between kernel rows at every distance and
    compare against the declared privacy's stability envelope.

    Scans all ordered row pairs (KL is asymmetric). A distance passes
    when its worst observed KL stays within bound + tol.
    """
    if mech.privacy.kind is PrivacyKind.NONE:
        raise InputError("mechanism declares no privacy guarantee to audit")
    types = list(enumerate_types(mech.alphabet_size, mech.n, cap=cap))
    worst: dict[int, tuple[float, tuple[int, int]]] = {}
    for i, si in enumerate(types):
        for j, sj in enumerate(types):
            if i == j:
                continue
            k = dataset_distance(si, sj)
            val = kl_divergence(mech.kernel[i], mech.kernel[j])
            if k not in worst or val > worst[k][0]:
                worst[k] = (val, (i, j))
    rows = []
    for k in sorted(worst):
        max_kl, pair = worst[k]
        bound = kl_stability_bound(mech.privacy, k)
        rows.append(
            StabilityRow(
                k=k, max_kl=max_kl, bound=bound,
                passed=max_kl <= bound + tol, worst_pair=pair,
            )
        )
    return StabilityReport(rows=tuple(rows), passed=all(r.passed for r in rows))


def gdp_param_noisy_sgd(
    batch_size: float, n: int, iterations: int, noise_scale: float
) -> float:
    """GDP parameter of noisy SGD: (B/n) * sqrt(T * (exp(1/nu^2) - 1))."""
    if not (batch_size > 0):
        raise InputError(f"batch size must be positive, got {batch_size}")
    if n < 1:
        raise InputError(f"dataset length must be positive, got {n}")
    if iterations < 1:
        raise InputError(f"iteration count must be positive, got {iterations}")
    if not (noise_scale > 0):
        raise InputError(f"noise scale must be positive, got {noise_scale}")
    return (batch_size / n) * math.sqrt(
        iterations * math.expm1(1.0 / (noise_scale * noise_scale))
    )


def save_mechanism_csv(mech: Mechanism, path: str) -> str:
    """Write the kernel (one row per line, lexicographic row order) to
    `path` and a key=value sidecar to `path + '.meta'`. Returns the
    sidecar path. Entries use repr precision so loading round-trips."""
    with open(path, "w", newline="") as fh:
        for row in mech.kernel:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")
    meta_path = path + ".meta"
    value = "" if mech.privacy.value is None else repr(mech.privacy.value)
    with open(meta_path, "w", newline="") as fh:
        fh.write(f"alphabet_size={mech.alphabet_size}\n")
        fh.write(f"n={mech.n}\n")
        fh.write(f"hypothesis_count={mech.hypothesis_count}\n")
        fh.write(f"privacy_kind={mech.privacy.kind.value}\n")
        fh.write(f"privacy_value={value}\n")
        fh.write(f"description={mech.description}\n")
    return meta_path


def load_mechanism_csv(path: str) -> Mechanism:
    """Load a kernel written by save_mechanism_csv (sidecar required)."""
    meta_path = path + ".meta"
    if not os.path.exists(meta_path):
        raise InputError(f"mechanism sidecar not found: {meta_path}")
    meta: dict[str, str] = {}
    with open(meta_path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{meta_path}: malformed line {line!r}")
            key, _, val = line.partition("=")
            meta[key.strip()] = val
    for key in ("alphabet_size", "n", "privacy_kind"):
        if key not in meta:
            raise InputError(f"{meta_path}: missing key {key!r}")
    kind = meta["privacy_kind"]
    if kind == PrivacyKind.NONE.value:
        privacy = PrivacyParams.none()
    elif kind == PrivacyKind.EPS_DP.value:
        privacy = PrivacyParams.eps_dp(float(meta["privacy_value"]))
    elif kind == PrivacyKind.MU_GDP.value:
        privacy = PrivacyParams.mu_gdp(float(meta["privacy_value"]))
    else:
        raise InputError(f"{meta_path}: unknown privacy kind {kind!r}")
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(x) for x in line.split(",")])
    return Mechanism(
        np.asarray(rows, dtype=float),
        int(meta["alphabet_size"]),
        int(meta["n"]),
        privacy,
        description=meta.get("description", ""),
    )
