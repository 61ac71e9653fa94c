"""Chow-Liu tree models over binned channels.

The tree is the maximum-weight spanning tree under pairwise mutual
information, with plug-in tables. All four entropy orders come out of
message passes over the tree, never from expanding the joint state space:
sum-product in log2 domain for the power sums, max-product for the modal
probability, exact big-integer counting for the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import (
    EntropyProfile,
    _shannon_bits,
    complete_row_mask,
    joint_direct,
    profile_joint,
)
from .errors import DataError
from .quantize import BinnedChannel, Pmf, pmf_of

# int64 stays exact below this; larger support bounds use Python integers
_INT64_SAFE = 2 ** 62


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """p(child | parent) in a CSR-like layout.

    Rows exist only for parent bins seen with nonzero count; probabilities
    within a row are strictly positive and sum to 1.
    """

    parent_bins: np.ndarray  # (P,) strictly increasing parent codes
    indptr: np.ndarray  # (P + 1,) row boundaries into the flat arrays
    child_bins: np.ndarray  # (nnz,) ascending within each row
    probs: np.ndarray  # (nnz,)

    def __post_init__(self):
        if self.parent_bins.size + 1 != self.indptr.size:
            raise DataError("conditional table indptr shape mismatch")
        if np.any(np.diff(self.parent_bins) <= 0):
            raise DataError("parent bins must be strictly increasing")
        if np.any(self.probs <= 0):
            raise DataError("conditional probabilities must be positive")
        sums = np.add.reduceat(self.probs, self.indptr[:-1])
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise DataError("conditional rows must each sum to 1")

    def row(self, parent_bin: int) -> tuple[np.ndarray, np.ndarray]:
        i = int(np.searchsorted(self.parent_bins, parent_bin))
        if i == self.parent_bins.size or self.parent_bins[i] != parent_bin:
            raise DataError(f"no conditional row for parent bin {parent_bin}")
        lo, hi = int(self.indptr[i]), int(self.indptr[i + 1])
        return self.child_bins[lo:hi], self.probs[lo:hi]

    def pmf(self, parent_bin: int) -> Pmf:
        bins, probs = self.row(parent_bin)
        return Pmf(bins, probs)


@dataclass(frozen=True, eq=False)
class ChowLiuModel:
    nodes: tuple[str, ...]
    root: str
    parent: dict[str, str]  # child -> parent; root has no entry
    root_marginal: Pmf
    conditionals: dict[str, ConditionalTable]  # keyed by child
    edge_weights: dict[tuple[str, str], float]  # sorted name pair -> MI bits
    bin_counts: dict[str, int]

    def __post_init__(self):
        if self.root not in self.nodes:
            raise DataError("root is not a node")
        non_root = set(self.nodes) - {self.root}
        if set(self.parent) != non_root or set(self.conditionals) != non_root:
            raise DataError("every non-root node needs a parent and a table")
        # reachability from the root proves the parent map is one tree
        seen = {self.root}
        frontier = [self.root]
        kids = self.children_map()
        while frontier:
            node = frontier.pop()
            for child in kids[node]:
                if child in seen:
                    raise DataError("parent map has a cycle")
                seen.add(child)
                frontier.append(child)
        if seen != set(self.nodes):
            raise DataError("parent map is not connected")

    def children_map(self) -> dict[str, list[str]]:
        kids: dict[str, list[str]] = {name: [] for name in self.nodes}
        for child in self.nodes:
            p = self.parent.get(child)
            if p is not None:
                kids[p].append(child)
        return kids


@dataclass(frozen=True)
class ValidationReport:
    subset: tuple[str, ...]
    n: int
    direct: EntropyProfile
    chowliu: EntropyProfile
    mae: float
    rel_error_pct: float


def _postorder(model: ChowLiuModel) -> list[str]:
    kids = model.children_map()
    order: list[str] = []
    stack = [model.root]
    while stack:
        node = stack.pop()
        order.append(node)
        stack.extend(kids[node])
    order.reverse()  # children now precede their parents
    return order


def _dense_root(model: ChowLiuModel) -> np.ndarray:
    dense = np.zeros(model.bin_counts[model.root])
    dense[model.root_marginal.bins] = model.root_marginal.p
    return dense


def _mi_of_codes(ca: np.ndarray, cb: np.ndarray, b_bins: int) -> float:
    def h(codes):
        counts = np.bincount(codes)
        counts = counts[counts > 0]
        return _shannon_bits(counts / codes.size)

    return max(0.0, h(ca) + h(cb) - h(ca * b_bins + cb))


def _edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _conditional_from_codes(cp: np.ndarray, cc: np.ndarray,
                            child_bin_count: int) -> ConditionalTable:
    keys = cp * child_bin_count + cc
    uniq, counts = np.unique(keys, return_counts=True)
    pb = uniq // child_bin_count
    cb = uniq % child_bin_count
    starts = np.flatnonzero(np.r_[True, pb[1:] != pb[:-1]])
    indptr = np.r_[starts, uniq.size]
    totals = np.add.reduceat(counts, starts)
    probs = counts / np.repeat(totals, np.diff(indptr))
    return ConditionalTable(pb[starts], indptr, cb, probs)


def build_tree(channels: list[BinnedChannel]) -> ChowLiuModel:
    """Fit the maximum-MI spanning tree on rows complete across the subset.

    Weight ties break toward the lexicographically smallest name pair; the
    root is the first channel in input order. Both choices exist purely so
    repeated runs produce the identical model.
    """
    if len(channels) < 2:
        raise DataError("tree needs at least 2 channels")
    names = [ch.name for ch in channels]
    if len(set(names)) != len(names):
        raise DataError("duplicate channel names")
    mask = complete_row_mask(channels)
    if not mask.any():
        raise DataError("no complete rows")
    cols = {ch.name: ch.codes[mask] for ch in channels}
    bins = {ch.name: ch.spec.bin_count for ch in channels}

    weights: dict[tuple[str, str], float] = {}
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = names[i], names[j]
            weights[_edge_key(a, b)] = _mi_of_codes(cols[a], cols[b], bins[b])

    # Kruskal over edges sorted by falling MI, ties by name pair
    index = {name: i for i, name in enumerate(names)}
    uf = list(range(len(names)))

    def find(x: int) -> int:
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    adopted: list[tuple[str, str]] = []
    for (a, b), _w in sorted(weights.items(), key=lambda kv: (-kv[1], kv[0])):
        ra, rb = find(index[a]), find(index[b])
        if ra != rb:
            uf[ra] = rb
            adopted.append((a, b))
            if len(adopted) == len(names) - 1:
                break

    neighbors: dict[str, list[str]] = {name: [] for name in names}
    for a, b in adopted:
        neighbors[a].append(b)
        neighbors[b].append(a)
    for name in names:
        neighbors[name].sort(key=index.__getitem__)

    root = names[0]
    parent: dict[str, str] = {}
    frontier = [root]
    seen = {root}
    while frontier:
        node = frontier.pop(0)
        for nb in neighbors[node]:
            if nb not in seen:
                parent[nb] = node
                seen.add(nb)
                frontier.append(nb)

    conditionals = {
        child: _conditional_from_codes(cols[par], cols[child], bins[child])
        for child, par in parent.items()
    }
    tree_weights = {_edge_key(a, b): weights[_edge_key(a, b)] for a, b in adopted}
    return ChowLiuModel(
        nodes=tuple(names),
        root=root,
        parent=parent,
        root_marginal=pmf_of(cols[root]),
        conditionals=conditionals,
        edge_weights=tree_weights,
        bin_counts=bins,
    )


def tree_shannon(model: ChowLiuModel) -> float:
    """Chain-rule Shannon entropy H(root) + sum of H(child | parent)."""
    kids = model.children_map()
    marginals: dict[str, np.ndarray] = {model.root: _dense_root(model)}
    terms = [_shannon_bits(model.root_marginal.p)]

    frontier = [model.root]
    while frontier:
        node = frontier.pop(0)
        for child in kids[node]:
            cond = model.conditionals[child]
            pm = marginals[node][cond.parent_bins]
            # per-row plug-in entropies, weighted by the parent marginal
            contrib = -(cond.probs * np.log2(cond.probs))
            row_h = np.add.reduceat(contrib, cond.indptr[:-1])
            terms.append(math.fsum((pm * row_h).tolist()))
            dense = np.zeros(model.bin_counts[child])
            np.add.at(dense, cond.child_bins,
                      cond.probs * np.repeat(pm, np.diff(cond.indptr)))
            marginals[child] = dense
            frontier.append(child)
    return math.fsum(terms)


def tree_power_sum(model: ChowLiuModel, alpha: float) -> float:
    """log2 of the power sum over the tree distribution, for alpha > 0.

    Upward sum-product pass carried entirely in log2 domain; H2 is
    -tree_power_sum(model, 2).
    """
    alpha = float(alpha)
    if alpha <= 0 or abs(alpha - 1.0) < 1e-6:
        raise DataError("power sums need alpha > 0 and away from 1")
    kids = model.children_map()
    messages: dict[str, np.ndarray] = {}

    for node in _postorder(model):
        if node == model.root:
            continue
        cond = model.conditionals[node]
        terms = alpha * np.log2(cond.probs)
        for child in kids[node]:
            terms = terms + messages[child][cond.child_bins]
        starts = cond.indptr[:-1]
        peak = np.maximum.reduceat(terms, starts)
        spread = np.exp2(terms - np.repeat(peak, np.diff(cond.indptr)))
        row_log = peak + np.log2(np.add.reduceat(spread, starts))
        msg = np.full(model.bin_counts[model.parent[node]], -np.inf)
        msg[cond.parent_bins] = row_log
        messages[node] = msg

    terms = alpha * np.log2(model.root_marginal.p)
    for child in kids[model.root]:
        terms = terms + messages[child][model.root_marginal.bins]
    peak = float(terms.max())
    return peak + math.log2(float(np.sum(np.exp2(terms - peak))))


def tree_max_prob(model: ChowLiuModel) -> tuple[float, tuple[int, ...]]:
    """Max-product pass: (log2 of the modal probability, argmax code tuple)."""
    kids = model.children_map()
    messages: dict[str, np.ndarray] = {}
    choices: dict[str, np.ndarray] = {}

    for node in _postorder(model):
        if node == model.root:
            continue
        cond = model.conditionals[node]
        terms = np.log2(cond.probs)
        for child in kids[node]:
            terms = terms + messages[child][cond.child_bins]
        msg = np.full(model.bin_counts[model.parent[node]], -np.inf)
        pick = np.zeros(model.bin_counts[model.parent[node]], dtype=np.int64)
        for r in range(cond.parent_bins.size):
            lo, hi = int(cond.indptr[r]), int(cond.indptr[r + 1])
            best = lo + int(np.argmax(terms[lo:hi]))  # first max: smallest bin
            msg[cond.parent_bins[r]] = terms[best]
            pick[cond.parent_bins[r]] = cond.child_bins[best]
        messages[node] = msg
        choices[node] = pick

    terms = np.log2(model.root_marginal.p)
    for child in kids[model.root]:
        terms = terms + messages[child][model.root_marginal.bins]
    best = int(np.argmax(terms))
    log2_max = float(terms[best])

    code: dict[str, int] = {model.root: int(model.root_marginal.bins[best])}
    frontier = [model.root]
    while frontier:
        node = frontier.pop(0)
        for child in kids[node]:
            code[child] = int(choices[child][code[node]])
            frontier.append(child)
    return log2_max, tuple(code[name] for name in model.nodes)


def _subtree_state_bound(model: ChowLiuModel) -> int:
    bound = 1
    for name in model.nodes:
        bound *= model.bin_counts[name]
    return bound


def tree_support_count(model: ChowLiuModel) -> int:
    """Exact number of code tuples with positive tree probability."""
    kids = model.children_map()
    if _subtree_state_bound(model) <= _INT64_SAFE:
        # counts fit int64, so the pass can stay vectorized
        messages: dict[str, np.ndarray] = {}
        for node in _postorder(model):
            if node == model.root:
                continue
            cond = model.conditionals[node]
            w = np.ones(cond.child_bins.size, dtype=np.int64)
            for child in kids[node]:
                w = w * messages[child][cond.child_bins]
            msg = np.zeros(model.bin_counts[model.parent[node]], dtype=np.int64)
            msg[cond.parent_bins] = np.add.reduceat(w, cond.indptr[:-1])
            messages[node] = msg
        w = np.ones(model.root_marginal.bins.size, dtype=np.int64)
        for child in kids[model.root]:
            w = w * messages[child][model.root_marginal.bins]
        return int(w.sum())

    # big-integer path for state spaces past int64
    big: dict[str, list[int]] = {}
    for node in _postorder(model):
        if node == model.root:
            continue
        cond = model.conditionals[node]
        msg = [0] * model.bin_counts[model.parent[node]]
        for r in range(cond.parent_bins.size):
            lo, hi = int(cond.indptr[r]), int(cond.indptr[r + 1])
            total = 0
            for k in range(lo, hi):
                prod = 1
                for child in kids[node]:
                    prod *= big[child][int(cond.child_bins[k])]
                total += prod
            msg[int(cond.parent_bins[r])] = total
        big[node] = msg
    total = 0
    for rb in model.root_marginal.bins:
        prod = 1
        for child in kids[model.root]:
            prod *= big[child][int(rb)]
        total += prod
    return total


def tree_profile(model: ChowLiuModel) -> EntropyProfile:
    """All four orders of the tree distribution, via the message passes."""
    return EntropyProfile(
        h0=math.log2(tree_support_count(model)),
        h1=tree_shannon(model),
        h2=-tree_power_sum(model, 2.0),
        hmin=-tree_max_prob(model)[0],
    )


def validate(channels: list[BinnedChannel]) -> ValidationReport:
    """Direct joint profile against the tree profile on identical rows.

    Only arities 2 and 3 are supported: past that the direct enumeration this
    comparison exists for stops being the trustworthy side.
    """
    if len(channels) < 2:
        raise DataError("validation requires n >= 2")
    if len(channels) > 3:
        raise DataError("validation compares against direct enumeration; use n <= 3")
    direct = profile_joint(joint_direct(channels))
    approx = tree_profile(build_tree(channels))
    pairs = list(zip(
        (direct.h0, direct.h1, direct.h2, direct.hmin),
        (approx.h0, approx.h1, approx.h2, approx.hmin),
    ))
    mae = math.fsum(abs(d - c) for d, c in pairs) / 4.0
    if all(d > 0 for d, _ in pairs):
        rel = 100.0 * math.fsum(abs(d - c) / d for d, c in pairs) / 4.0
    else:
        rel = math.nan
    return ValidationReport(
        subset=tuple(ch.name for ch in channels),
        n=len(channels),
        direct=direct,
        chowliu=approx,
        mae=mae,
        rel_error_pct=rel,
    )


def dump(model: ChowLiuModel) -> str:
    """Stable text rendering of the fitted structure, for logs and goldens."""
    lines = [f"root {model.root}"]
    for name in model.nodes:
        lines.append(f"node {name} bins {model.bin_counts[name]}")
    for (a, b), w in sorted(model.edge_weights.items()):
        lines.append(f"edge {a} -- {b} weight {w!r}")
    for child in model.nodes:
        if child in model.parent:
            lines.append(f"parent {child} <- {model.parent[child]}")
    return "\n".join(lines) + "\n"
