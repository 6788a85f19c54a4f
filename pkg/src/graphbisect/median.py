"""Potential functions and median selection.

Argmin ties are broken toward the lowest vertex id everywhere. Unweighted
potentials are exact integers; weighted potentials are float64 and treat
values within ``TIE_TOL`` (relative) of the minimum as tied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import CandidateSet, DistanceMatrix

TIE_TOL = 1e-12


def _members(S: CandidateSet) -> np.ndarray:
    if not S:
        raise ValueError("candidate set is empty")
    return np.fromiter(S, dtype=np.int64)


def potential(dist: DistanceMatrix, S: CandidateSet, u: int) -> int:
    """Sum of distances from ``u`` to the members of ``S``."""
    return int(dist.d[u, _members(S)].sum())


def potentials(dist: DistanceMatrix, S: CandidateSet) -> np.ndarray:
    """Potential of every vertex with respect to ``S``."""
    return dist.d[:, _members(S)].sum(axis=1)


def median(dist: DistanceMatrix, S: CandidateSet) -> int:
    """A 1-median of ``S`` taken over all vertices (it need not lie in ``S``)."""
    return int(np.argmin(potentials(dist, S)))


@dataclass
class WeightVector:
    """Normalized per-vertex weights plus the log2 of the true total.

    ``mu`` sums to 1 over its support (or is all zero); ``log2_total`` carries
    the scale that normalization removed, so totals like ``(1-p)^K`` never
    underflow.
    """

    mu: np.ndarray
    log2_total: float = 0.0

    @classmethod
    def uniform(cls, S: CandidateSet) -> WeightVector:
        mu = np.zeros(S.n)
        idx = _members(S)
        mu[idx] = 1.0 / len(idx)
        return cls(mu, 0.0)

    @classmethod
    def from_raw(cls, raw) -> WeightVector:
        raw = np.asarray(raw, dtype=np.float64)
        if np.any(raw < 0) or not np.all(np.isfinite(raw)):
            raise ValueError("weights must be finite and non-negative")
        total = raw.sum()
        if total == 0:
            return cls(np.zeros_like(raw), -math.inf)
        return cls(raw / total, math.log2(total))

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def empty(self) -> bool:
        return not np.any(self.mu > 0)

    def support(self) -> CandidateSet:
        return CandidateSet.from_mask(self.mu > 0)

    def scale(self, factors: np.ndarray) -> None:
        """Multiply weights elementwise, then renormalize and fold the total into log2_total."""
        raw = self.mu * factors
        total = raw.sum()
        if total <= 0:
            self.mu = np.zeros_like(self.mu)
            self.log2_total = -math.inf
            return
        self.mu = raw / total
        self.log2_total += math.log2(total)

    def copy(self) -> WeightVector:
        return WeightVector(self.mu.copy(), self.log2_total)


def _check_support(mu: WeightVector) -> None:
    if mu.empty:
        raise ValueError("weight vector has empty support")


def weighted_potentials(dist: DistanceMatrix, mu: WeightVector) -> np.ndarray:
    _check_support(mu)
    idx = np.flatnonzero(mu.mu)
    if len(idx) * 2 < mu.n:
        return dist.as_float[:, idx] @ mu.mu[idx]
    return dist.as_float @ mu.mu


def weighted_potential(dist: DistanceMatrix, mu: WeightVector, u: int) -> float:
    """Weighted sum of distances from ``u`` under the normalized weights."""
    _check_support(mu)
    idx = np.flatnonzero(mu.mu)
    return float(dist.as_float[u, idx] @ mu.mu[idx])


def argmin_tol(values: np.ndarray) -> int:
    """Lowest index whose value is within the relative tie tolerance of the minimum."""
    lo = values.min()
    return int(np.flatnonzero(values <= lo + TIE_TOL * max(1.0, abs(lo)))[0])


def weighted_median(dist: DistanceMatrix, mu: WeightVector) -> int:
    return argmin_tol(weighted_potentials(dist, mu))


def dir_potentials(dist: DistanceMatrix, S: CandidateSet) -> np.ndarray:
    """For every ``v``: least ``l`` such that more than half of ``S`` is within distance ``l`` of ``v``."""
    members = _members(S)
    k = len(members) // 2
    return np.partition(dist.d[:, members], k, axis=1)[:, k]


def dir_potential(dist: DistanceMatrix, S: CandidateSet, v: int) -> int:
    members = _members(S)
    k = len(members) // 2
    return int(np.partition(dist.d[v, members], k)[k])


def dir_median(dist: DistanceMatrix, S: CandidateSet) -> int:
    return int(np.argmin(dir_potentials(dist, S)))
