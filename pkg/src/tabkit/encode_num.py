"""Numerical-feature encodings: two binning schemes crossed with four codecs.

Bins come either from empirical quantiles or from the split thresholds of a
single-feature decision tree grown against the labels. A fitted feature is
then rendered as a bin index, a thermometer (unary) code, a Johnson
shift-register code, or a piecewise-linear vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TaskType
from .errors import EncodeError, ShapeError

DEFAULT_N_BINS = 48

NUM_POLICIES = (
    "none",
    "Q_bins", "T_bins",
    "Q_Unary", "T_Unary",
    "Q_Johnson", "T_Johnson",
    "Q_PLE", "T_PLE",
)

_CODEC_BY_SUFFIX = {
    "bins": "bin_index",
    "Unary": "unary",
    "Johnson": "johnson",
    "PLE": "ple",
}


def parse_num_policy(token: str) -> tuple[str, str] | None:
    """Map a policy token to (binning scheme, codec); ``none`` maps to None."""
    if token == "none":
        return None
    if token not in NUM_POLICIES:
        raise ValueError(f"unknown num_policy {token!r}")
    prefix, suffix = token.split("_", 1)
    scheme = "quantile" if prefix == "Q" else "target"
    return scheme, _CODEC_BY_SUFFIX[suffix]


@dataclass(frozen=True)
class BinEdges:
    """Strictly increasing boundaries b_0 < ... < b_B covering the train range."""

    edges: np.ndarray
    scheme: str

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.float64)
        if edges.ndim != 1 or len(edges) < 2:
            raise ValueError("need at least two boundaries")
        if not np.all(np.diff(edges) > 0):
            raise ValueError("boundaries must be strictly increasing")
        object.__setattr__(self, "edges", edges)

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1


def _degenerate_edges(value: float, scheme: str) -> BinEdges:
    return BinEdges(np.array([value - 0.5, value + 0.5]), scheme)


def compute_quantile_bins(train_col: np.ndarray, n_bins: int = DEFAULT_N_BINS) -> BinEdges:
    """Edges at the empirical quantiles k/n_bins; duplicate edges collapse."""
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    edges = np.unique(np.quantile(train_col, np.linspace(0.0, 1.0, n_bins + 1)))
    if len(edges) < 2:
        return _degenerate_edges(float(edges[0]), "quantile")
    return BinEdges(edges, "quantile")


def _node_impurity_parts(ys: np.ndarray, classification: bool):
    """Prefix aggregates for impurity of every left/right split of sorted ys."""
    n = len(ys)
    if classification:
        classes, codes = np.unique(ys, return_inverse=True)
        onehot = np.zeros((n, len(classes)))
        onehot[np.arange(n), codes] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[:-1]
        total = left_counts[-1] + onehot[-1]
        right_counts = total - left_counts
        n_left = np.arange(1, n)
        n_right = n - n_left
        # weighted Gini: n_node - sum(count^2)/n_node
        left = n_left - (left_counts ** 2).sum(axis=1) / n_left
        right = n_right - (right_counts ** 2).sum(axis=1) / n_right
        parent = n - float((total ** 2).sum()) / n
    else:
        csum = np.cumsum(ys)[:-1]
        csum2 = np.cumsum(ys ** 2)[:-1]
        total, total2 = float(np.sum(ys)), float(np.sum(ys ** 2))
        n_left = np.arange(1, n)
        n_right = n - n_left
        # weighted squared error: sum(y^2) - sum(y)^2/n
        left = csum2 - csum ** 2 / n_left
        right = (total2 - csum2) - (total - csum) ** 2 / n_right
        parent = total2 - total ** 2 / n
    return parent, left + right


class _TreeLeaf:
    __slots__ = ("xs", "ys", "gain", "threshold", "split_at")

    def __init__(self, xs, ys, min_leaf, classification):
        self.xs = xs
        self.ys = ys
        self.gain = 0.0
        self.threshold = None
        self.split_at = None
        n = len(xs)
        if n < 2 * min_leaf:
            return
        parent, children = _node_impurity_parts(ys, classification)
        gains = parent - children
        positions = np.arange(1, n)
        valid = (
            (xs[:-1] < xs[1:])
            & (positions >= min_leaf)
            & (n - positions >= min_leaf)
        )
        if not valid.any():
            return
        gains = np.where(valid, gains, -np.inf)
        best = int(np.argmax(gains))  # ties keep the lowest threshold
        if gains[best] <= 1e-12:
            return
        self.gain = float(gains[best])
        self.split_at = best + 1
        self.threshold = float((xs[best] + xs[best + 1]) / 2.0)

    def split(self, min_leaf, classification):
        at = self.split_at
        left = _TreeLeaf(self.xs[:at], self.ys[:at], min_leaf, classification)
        right = _TreeLeaf(self.xs[at:], self.ys[at:], min_leaf, classification)
        return left, right


def compute_target_bins(
    train_col: np.ndarray,
    targets: np.ndarray,
    task: TaskType,
    n_bins: int = DEFAULT_N_BINS,
) -> BinEdges:
    """Edges at the thresholds of a greedy single-feature decision tree.

    The tree minimizes Gini impurity (classification) or squared error
    (regression), grows best-first to at most ``n_bins`` leaves with minimum
    leaf size max(1, floor(N/(4*n_bins))), and a constant target falls back
    to quantile binning.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    if len(train_col) != len(targets):
        raise ShapeError("feature and target lengths differ")
    targets = np.asarray(targets)
    if len(targets) == 0 or np.all(targets == targets[0]):
        return compute_quantile_bins(train_col, n_bins)

    lo, hi = float(np.min(train_col)), float(np.max(train_col))
    if lo == hi:
        return _degenerate_edges(lo, "target")

    classification = task.is_classification
    min_leaf = max(1, len(train_col) // (4 * n_bins))
    order = np.argsort(train_col, kind="stable")
    leaves = [_TreeLeaf(train_col[order], targets[order], min_leaf, classification)]
    thresholds: list[float] = []
    while len(leaves) < n_bins:
        best = max(range(len(leaves)), key=lambda i: leaves[i].gain)
        if leaves[best].gain <= 0.0:
            break
        leaf = leaves.pop(best)
        thresholds.append(leaf.threshold)
        leaves.extend(leaf.split(min_leaf, classification))

    edges = np.unique(np.array([lo, *thresholds, hi]))
    if len(edges) < 2:
        return _degenerate_edges(lo, "target")
    return BinEdges(edges, "target")


def _check_finite(x: np.ndarray) -> None:
    if not np.isfinite(x).all():
        raise EncodeError("cannot encode non-finite values")


def encode_bin_index(edges: BinEdges, x) -> np.ndarray:
    """Bin index k with b_k <= x < b_{k+1}, clamped to [0, B-1] outside."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    _check_finite(arr)
    idx = np.searchsorted(edges.edges, arr, side="right") - 1
    return np.clip(idx, 0, edges.n_bins - 1).astype(np.int64)


def encode_unary(edges: BinEdges, x) -> np.ndarray:
    """Thermometer code of width B-1: bin k sets the first k bits."""
    idx = encode_bin_index(edges, x)
    width = edges.n_bins - 1
    return (np.arange(width) < idx[:, None]).astype(np.float64)


def _johnson_table(n_bins: int) -> np.ndarray:
    width = (n_bins + 1) // 2
    table = np.zeros((n_bins, width))
    for state in range(n_bins):
        if state <= width:
            table[state, :state] = 1.0
        else:
            table[state, state - width:] = 1.0
    return table


def encode_johnson(edges: BinEdges, x) -> np.ndarray:
    """Johnson shift-register code of width ceil(B/2); bin k is state k."""
    idx = encode_bin_index(edges, x)
    return _johnson_table(edges.n_bins)[idx]


def encode_ple(edges: BinEdges, x) -> np.ndarray:
    """Piecewise-linear encoding of width B.

    Component t is the position of x within bin t, clipped to [0, 1] except
    that the first component is not clipped below nor the last above, so
    out-of-range inputs extrapolate linearly.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    _check_finite(arr)
    bounds = edges.edges
    raw = (arr[:, None] - bounds[:-1]) / np.diff(bounds)
    if edges.n_bins == 1:
        return raw
    out = np.clip(raw, 0.0, 1.0)
    out[:, 0] = np.minimum(raw[:, 0], 1.0)
    out[:, -1] = np.maximum(raw[:, -1], 0.0)
    return out


_ENCODERS = {
    "bin_index": lambda edges, x: encode_bin_index(edges, x)[:, None].astype(np.float64),
    "unary": encode_unary,
    "johnson": encode_johnson,
    "ple": encode_ple,
}


@dataclass(frozen=True)
class NumericEncoder:
    """Fitted per-feature bins plus the codec used to render them."""

    bins: tuple[BinEdges, ...]
    codec: str

    @property
    def width(self) -> int:
        widths = {
            "bin_index": lambda b: 1,
            "unary": lambda b: b - 1,
            "johnson": lambda b: (b + 1) // 2,
            "ple": lambda b: b,
        }[self.codec]
        return sum(widths(edges.n_bins) for edges in self.bins)

    def transform(self, num: np.ndarray) -> np.ndarray:
        if num.shape[1] != len(self.bins):
            raise ShapeError(
                f"encoder was fitted on {len(self.bins)} columns, got {num.shape[1]}"
            )
        if not self.bins:
            return np.empty((num.shape[0], 0))
        blocks = [_ENCODERS[self.codec](edges, num[:, j])
                  for j, edges in enumerate(self.bins)]
        return np.hstack(blocks)


def fit_numeric_encoder(
    train_num: np.ndarray,
    policy: str,
    targets: np.ndarray | None = None,
    task: TaskType | None = None,
    n_bins: int = DEFAULT_N_BINS,
) -> NumericEncoder | None:
    """Fit bins for every numerical column under the named policy.

    Returns None for policy ``none`` (columns pass through untouched).
    Target-aware policies require aligned training labels and the task type.
    """
    parsed = parse_num_policy(policy)
    if parsed is None:
        return None
    scheme, codec = parsed
    if scheme == "target" and (targets is None or task is None):
        raise ValueError("target-aware binning needs training labels and task")
    bins = []
    for j in range(train_num.shape[1]):
        col = train_num[:, j]
        if scheme == "quantile":
            bins.append(compute_quantile_bins(col, n_bins))
        else:
            bins.append(compute_target_bins(col, targets, task, n_bins))
    return NumericEncoder(bins=tuple(bins), codec=codec)
