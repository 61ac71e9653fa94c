"""Renyi entropy profiles (orders 0, 1, 2, inf) in bits, plus direct sparse
joint estimation for small channel subsets.

Everything is plug-in estimation on empirical frequencies: no smoothing, no
bias correction. All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DataError
from .quantize import BinnedChannel, Pmf

_ORDER_TOL = 1e-9
# alpha this close to 1 is routed to the Shannon limit
_SHANNON_WINDOW = 1e-6
# default cap on occupied joint states for direct enumeration
DEFAULT_JOINT_BUDGET = 5e7


@dataclass(frozen=True)
class EntropyProfile:
    """The four orders in bits. Construction enforces hmin <= h2 <= h1 <= h0."""

    h0: float
    h1: float
    h2: float
    hmin: float

    def __post_init__(self):
        seq = (self.hmin, self.h2, self.h1, self.h0)
        for lo, hi in zip(seq, seq[1:]):
            if lo > hi + _ORDER_TOL:
                raise DataError(f"entropy ordering violated: {seq}")

    def as_dict(self) -> dict[str, float]:
        return {"h0": self.h0, "h1": self.h1, "h2": self.h2, "hmin": self.hmin}


@dataclass(frozen=True, eq=False)
class SparseJointPmf:
    """Joint pmf stored as occupied code tuples only."""

    arity: int
    entries: dict[tuple[int, ...], float]
    sample_count: int

    def __post_init__(self):
        if self.arity < 1:
            raise DataError("arity must be positive")
        if not self.entries:
            raise DataError("joint pmf has no entries")
        total = math.fsum(self.entries.values())
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"joint pmf total is {total!r}, not 1")
        if min(self.entries.values()) <= 0:
            raise DataError("joint pmf entries must be strictly positive")


def _shannon_bits(p: np.ndarray) -> float:
    # compensated sum keeps Shannon terms order-independent
    return -math.fsum((p * np.log2(p)).tolist())


def _power_sum_log2(p: np.ndarray, alpha: float) -> float:
    # scale by the max so p**alpha cannot underflow to a zero sum
    pmax = float(p.max())
    s = float(np.sum((p / pmax) ** alpha))
    return alpha * math.log2(pmax) + math.log2(s)


def _renyi_of_probs(p: np.ndarray, alpha: float) -> float:
    if math.isnan(alpha) or alpha < 0:
        raise DataError("alpha must be nonnegative")
    if alpha == 0:
        return math.log2(p.size)
    if math.isinf(alpha):
        return -math.log2(float(p.max()))
    if abs(alpha - 1.0) < _SHANNON_WINDOW:
        return _shannon_bits(p)
    return _power_sum_log2(p, alpha) / (1.0 - alpha)


def _profile_of_probs(p: np.ndarray) -> EntropyProfile:
    return EntropyProfile(
        h0=_renyi_of_probs(p, 0.0),
        h1=_shannon_bits(p),
        h2=_renyi_of_probs(p, 2.0),
        hmin=-math.log2(float(p.max())),
    )


def renyi(pmf: Pmf, alpha) -> float:
    """Renyi entropy of the given order, in bits."""
    return _renyi_of_probs(pmf.p, float(alpha))


def profile(pmf: Pmf) -> EntropyProfile:
    """All four orders of one pmf."""
    return _profile_of_probs(pmf.p)


def complete_row_mask(channels: list[BinnedChannel]) -> np.ndarray:
    """Rows where every listed channel has a non-missing code."""
    if not channels:
        raise DataError("no channels")
    mask = channels[0].codes >= 0
    for ch in channels[1:]:
        if ch.codes.size != mask.size:
            raise DataError("channel code lengths differ")
        mask = mask & (ch.codes >= 0)
    return mask


def joint_direct(channels: list[BinnedChannel], rows=None,
                 budget: float = DEFAULT_JOINT_BUDGET) -> SparseJointPmf:
    """Exact sparse joint pmf over rows complete across all channels.

    rows, when given, preselects row indices (or a boolean mask); incomplete
    rows are still dropped. Raises BudgetError before counting if the
    occupied-state bound min(rows, product of bin counts) exceeds budget.
    """
    if not channels:
        raise DataError("no channels")
    mask = complete_row_mask(channels)
    if rows is not None:
        sel = np.zeros(mask.size, dtype=bool)
        sel[np.asarray(rows)] = True
        mask = mask & sel
    n = int(mask.sum())
    if n == 0:
        raise DataError("no complete rows")

    bin_counts = [ch.spec.bin_count for ch in channels]
    states = math.prod(bin_counts)
    if min(n, states) > budget:
        raise BudgetError(
            f"direct joint needs up to {min(n, states)} occupied states, over "
            f"the budget of {budget:.0f}; use the Chow-Liu tree path"
        )

    cols = [ch.codes[mask] for ch in channels]
    if states <= 2 ** 62:
        # fuse each row's codes into one integer key
        keys = cols[0].astype(np.int64)
        for col, b in zip(cols[1:], bin_counts[1:]):
            keys = keys * b + col
        uniq, counts = np.unique(keys, return_counts=True)
        decoded = np.empty((uniq.size, len(cols)), dtype=np.int64)
        rem = uniq.copy()
        for j in range(len(cols) - 1, -1, -1):
            decoded[:, j] = rem % bin_counts[j]
            rem //= bin_counts[j]
    else:
        stacked = np.stack(cols, axis=1)
        decoded, counts = np.unique(stacked, axis=0, return_counts=True)

    entries = {
        tuple(int(c) for c in row): int(cnt) / n
        for row, cnt in zip(decoded, counts)
    }
    return SparseJointPmf(len(channels), entries, n)


def profile_joint(joint: SparseJointPmf) -> EntropyProfile:
    """Entropy profile of a joint pmf treated as one flat distribution."""
    p = np.fromiter(joint.entries.values(), dtype=float, count=len(joint.entries))
    return _profile_of_probs(p)
