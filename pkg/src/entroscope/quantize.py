"""Channel quantization: bin-width rules, code assignment, empirical pmfs.

Bins are half-open [e_i, e_i+1) with the channel maximum folded into the last
bin. Width rules never fall back silently: zero spread raises so the caller
can choose fixed_count instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateSpreadError

# Code assigned to missing (non-finite) source values. Valid codes are >= 0.
MISSING = -1


@dataclass(frozen=True, eq=False)
class BinningSpec:
    """How one channel was discretized."""

    rule: str  # "freedman_diaconis" | "scott" | "fixed_count"
    bin_count: int
    edges: np.ndarray  # bin_count + 1 strictly increasing edges
    width: float | None = None  # rule width for the width-based rules

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        object.__setattr__(self, "edges", edges)
        if edges.ndim != 1 or edges.size != self.bin_count + 1:
            raise DataError("edge array must hold bin_count + 1 values")
        if self.bin_count < 1:
            raise DataError("bin_count must be positive")
        if not np.all(np.diff(edges) > 0):
            raise DataError("bin edges must be strictly increasing")


@dataclass(frozen=True, eq=False)
class BinnedChannel:
    """A channel's codes, aligned 1:1 with the source rows."""

    name: str
    spec: BinningSpec
    codes: np.ndarray  # int64; MISSING marks rows with no value

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        object.__setattr__(self, "codes", codes)
        if codes.ndim != 1:
            raise DataError("codes must be one-dimensional")
        if codes.size and int(codes.max()) >= self.spec.bin_count:
            raise DataError("code out of range for bin_count")


@dataclass(frozen=True, eq=False)
class Pmf:
    """Empirical pmf over bin indices. Zero-count bins are never stored."""

    bins: np.ndarray  # sorted bin indices
    p: np.ndarray  # matching probabilities, all > 0, total 1 within 1e-9

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.int64)
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "p", p)
        if bins.ndim != 1 or bins.shape != p.shape or p.size == 0:
            raise DataError("pmf needs matching nonempty bins and probabilities")
        if np.any(p <= 0):
            raise DataError("pmf probabilities must be strictly positive")
        total = float(p.sum())
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"pmf total is {total!r}, not 1")

    @property
    def probs(self) -> dict[int, float]:
        """Bin index to probability map."""
        return {int(b): float(q) for b, q in zip(self.bins, self.p)}

    @classmethod
    def from_probs(cls, probs: dict[int, float]) -> "Pmf":
        items = sorted(probs.items())
        return cls(np.array([b for b, _ in items]), np.array([q for _, q in items]))


def _finite_values(values) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    return v[np.isfinite(v)]


def fd_width(values) -> float:
    """Freedman-Diaconis width 2*IQR/n^(1/3).

    IQR uses linear interpolation between order statistics.
    """
    v = _finite_values(values)
    n = v.size
    if n < 2:
        raise DataError("width rules need at least 2 samples")
    q25, q75 = np.percentile(v, [25.0, 75.0])
    iqr = float(q75 - q25)
    if iqr <= 0.0:
        raise DegenerateSpreadError("degenerate spread; use fixed_count")
    return 2.0 * iqr * n ** (-1.0 / 3.0)


def scott_width(values) -> float:
    """Scott width 3.5*sigma/n^(1/3), sigma the sample standard deviation."""
    v = _finite_values(values)
    n = v.size
    if n < 2:
        raise DataError("width rules need at least 2 samples")
    sigma = float(np.std(v, ddof=1))
    if sigma <= 0.0:
        raise DegenerateSpreadError("degenerate spread; use fixed_count")
    return 3.5 * sigma * n ** (-1.0 / 3.0)


def _canonical_rule(rule) -> tuple[str, int | None]:
    if isinstance(rule, str):
        key = rule.strip().lower().replace("-", "_")
        if key in ("fd", "freedman_diaconis"):
            return "freedman_diaconis", None
        if key == "scott":
            return "scott", None
        if key.isdigit():
            return "fixed_count", int(key)
    elif isinstance(rule, (int, np.integer)) and not isinstance(rule, bool):
        return "fixed_count", int(rule)
    raise DataError(f"unknown binning rule {rule!r}")


# refuse to materialize edge arrays past this without an explicit cap
_MAX_AUTO_BINS = 50_000_000


def _width_edges(vmin: float, vmax: float, width: float) -> np.ndarray:
    span = vmax - vmin
    nb = max(1, math.ceil(span / width))
    # float noise in ceil can park the last interior edge on or past vmax;
    # drop it so edges stay strictly increasing
    while nb > 1 and vmin + width * (nb - 1) >= vmax:
        nb -= 1
    edges = vmin + width * np.arange(nb + 1, dtype=float)
    edges[-1] = vmax  # last bin absorbs the rounding remainder
    return edges


def bin_channel(values, rule, name: str = "channel",
                max_bins: int | None = None) -> BinnedChannel:
    """Quantize one channel of raw values.

    Non-finite entries keep their row slot and get the MISSING code. When a
    width rule asks for more than max_bins bins, the channel is rebinned to
    max_bins equal-width bins instead (joint analyses cap blow-up this way).
    """
    raw = np.asarray(values, dtype=float).ravel()
    if raw.size == 0:
        raise DataError("cannot bin an empty channel")
    finite = np.isfinite(raw)
    v = raw[finite]
    if v.size == 0:
        raise DataError("channel has no non-missing values")
    vmin = float(v.min())
    vmax = float(v.max())

    kind, k = _canonical_rule(rule)
    if kind == "fixed_count":
        if k < 1:
            raise DataError("fixed_count needs at least 1 bin")
        if vmax == vmin:
            if k != 1:
                raise DataError("constant channel supports only fixed_count(1)")
            edges = np.array([vmin - 0.5, vmin + 0.5])
        else:
            edges = np.linspace(vmin, vmax, k + 1)
        spec = BinningSpec(kind, k, edges)
    else:
        width = fd_width(v) if kind == "freedman_diaconis" else scott_width(v)
        # size check before allocating: a tiny spread against a huge range
        # can imply astronomically many bins
        estimate = (vmax - vmin) / width
        if max_bins is not None and estimate > max_bins:
            edges = np.linspace(vmin, vmax, max_bins + 1)
            width = (vmax - vmin) / max_bins
        elif estimate > _MAX_AUTO_BINS:
            raise DataError(
                f"channel {name!r}: width {width:g} over range "
                f"[{vmin:g}, {vmax:g}] implies {estimate:.3g} bins; "
                "pass max_bins or use fixed_count"
            )
        else:
            edges = _width_edges(vmin, vmax, width)
        spec = BinningSpec(kind, edges.size - 1, edges, width)

    codes = np.full(raw.shape, MISSING, dtype=np.int64)
    codes[finite] = np.clip(
        np.searchsorted(spec.edges, v, side="right") - 1, 0, spec.bin_count - 1
    )
    return BinnedChannel(name, spec, codes)


def prebinned(name: str, codes, bin_count: int) -> BinnedChannel:
    """Wrap already-discrete codes (synthetic samples) as a BinnedChannel."""
    edges = np.arange(bin_count + 1, dtype=float) - 0.5
    return BinnedChannel(name, BinningSpec("fixed_count", bin_count, edges), codes)


def pmf_of(codes) -> Pmf:
    """Empirical pmf of the non-missing codes: probs[k] = count(k) / n."""
    c = np.asarray(codes, dtype=np.int64).ravel()
    if c.size == 0:
        raise DataError("empty codes")
    c = c[c >= 0]
    if c.size == 0:
        raise DataError("no non-missing codes")
    counts = np.bincount(c)
    bins = np.flatnonzero(counts)
    return Pmf(bins, counts[bins] / c.size)
