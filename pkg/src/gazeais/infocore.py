"""Plug-in information estimators over discrete contingency tables.

Entropy, conditional entropy, mutual information, conditional mutual
information, active information storage (AIS), local AIS, and gaze
transition entropy (GTE), all in bits (log base 2), with small-sample bias
correction of the Miller-Madow family.

Every quantity for one computation is derived from a single shared
contingency table, so the chain-rule identities

    H(X|Y) = H(X,Y) - H(Y)
    I(X;Y) = H(X) + H(Y) - H(X,Y)
    I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)

hold exactly on plug-in values, not just asymptotically.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sequences import PastState, StateVectorSeries, SymbolSequence, embed

LN2 = math.log(2.0)


@dataclass
class ContingencyTable:
    """Empirical joint counts over symbol tuples.

    `counts` is an integer array whose shape gives the per-axis
    cardinalities; `total` is the number of tallied observations.
    """

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if not np.issubdtype(self.counts.dtype, np.integer):
            if not np.all(self.counts == np.floor(self.counts)):
                raise ValueError("cell counts must be integers")
            self.counts = self.counts.astype(np.int64)
        else:
            self.counts = self.counts.astype(np.int64)
        if self.counts.ndim < 1:
            raise ValueError("table needs at least one axis")
        if np.any(self.counts < 0):
            raise ValueError("cell counts must be nonnegative")
        if self.total < 1:
            raise ValueError("table must contain at least one observation")

    @property
    def dimensions(self) -> tuple:
        return tuple(self.counts.shape)

    @property
    def n_axes(self) -> int:
        return self.counts.ndim

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def marginal(self, axes: Sequence[int]) -> np.ndarray:
        """Marginal counts over `axes` (returned in ascending axis order)."""
        axes = tuple(axes)
        drop = tuple(i for i in range(self.n_axes) if i not in axes)
        return self.counts.sum(axis=drop) if drop else self.counts


@dataclass(frozen=True)
class InfoEstimate:
    """A plug-in information value plus its additive bias correction.

    `corrected_value == plugin_value + bias_correction` always; for entropy
    the correction is nonnegative (the plug-in underestimates), for MI-like
    quantities it is typically negative (the plug-in overestimates).
    """

    plugin_value: float
    bias_correction: float
    corrected_value: float
    sample_count: int
    kind: str = "entropy"


def empirical_distribution(samples, dimensions) -> ContingencyTable:
    """Tally symbol tuples into a contingency table.

    `samples` is a sequence of equal-length tuples (or a 2-D array) and
    `dimensions` the per-axis cardinalities. Empty input and out-of-range
    symbols are errors.
    """
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples)
    dims = tuple(int(d) for d in dimensions)
    if arr.size == 0:
        raise ValueError("cannot build a distribution from zero samples")
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != len(dims):
        raise ValueError(
            f"samples have {arr.shape[1] if arr.ndim == 2 else '?'} axes, "
            f"expected {len(dims)}"
        )
    if any(d < 1 for d in dims):
        raise ValueError("every axis cardinality must be >= 1")
    arr = arr.astype(np.int64)
    for axis, d in enumerate(dims):
        col = arr[:, axis]
        if col.min() < 0 or col.max() >= d:
            raise ValueError(f"axis {axis}: symbol out of range [0, {d})")
    flat = np.ravel_multi_index(tuple(arr.T), dims)
    counts = np.bincount(flat, minlength=int(np.prod(dims))).reshape(dims)
    return ContingencyTable(counts)


def table_from_series(series: StateVectorSeries) -> ContingencyTable:
    """Joint table over (target, past...) rows; axis 0 is the target."""
    m = series.alphabet_size
    dims = (m,) * (1 + len(series.lags))
    cols = np.column_stack([series.targets, series.pasts]) if series.lags else \
        series.targets[:, None]
    flat = np.ravel_multi_index(tuple(cols.T), dims)
    counts = np.bincount(flat, minlength=int(np.prod(dims))).reshape(dims)
    return ContingencyTable(counts)


# ---------------------------------------------------------------------------
# internal helpers
# ---------------------------------------------------------------------------

def _check_axes(table, axes, name, allow_empty=False):
    axes = tuple(int(a) for a in axes)
    if not axes and not allow_empty:
        raise ValueError(f"{name}: axis subset must not be empty")
    if len(set(axes)) != len(axes):
        raise ValueError(f"{name}: duplicate axes {axes}")
    for a in axes:
        if a < 0 or a >= table.n_axes:
            raise ValueError(f"{name}: axis {a} out of range for {table.n_axes}-axis table")
    return tuple(sorted(axes))


def _plugin_entropy(counts: np.ndarray, total: int) -> float:
    nz = counts[counts > 0]
    p = nz / float(total)
    return float(-(p * np.log2(p)).sum())


def _entropy_from_codes(codes: np.ndarray) -> float:
    """Plug-in entropy (bits) of integer-coded samples; hot-path variant."""
    counts = np.bincount(codes)
    nz = counts[counts > 0]
    p = nz / float(codes.size)
    return float(-(p * np.log2(p)).sum())


def _encode_columns(cols: np.ndarray, base: int) -> np.ndarray:
    """Mixed-radix encode rows of `cols` (uniform base) into int64 codes."""
    n = cols.shape[0]
    code = np.zeros(n, dtype=np.int64)
    for j in range(cols.shape[1]):
        code = code * base + cols[:, j]
    return code


def _occupied_bins(marginal: np.ndarray, total: int, occupancy: str) -> float:
    """Estimated number of occupied bins for the bias correction.

    "observed" counts nonzero cells (Miller-Madow baseline). "expected"
    solves for the bin count R whose expected occupancy after `total`
    equiprobable draws matches the observed count, a Bayesian-style
    refinement of the naive count.
    """
    r_obs = int(np.count_nonzero(marginal))
    if occupancy == "observed":
        return float(r_obs)
    if occupancy != "expected":
        raise ValueError(f"unknown occupancy estimator {occupancy!r}")
    if r_obs <= 1:
        return float(r_obs)
    n_cells = int(marginal.size)

    def expected_occupied(r):
        return r * (1.0 - (1.0 - 1.0 / r) ** total)

    if expected_occupied(n_cells) <= r_obs:
        return float(n_cells)
    lo, hi = float(r_obs), float(n_cells)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if expected_occupied(mid) < r_obs:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _entropy_correction(table, axes, occupancy) -> float:
    """Miller-Madow additive term (R - 1) / (2 N ln 2) for one marginal."""
    marginal = table.marginal(axes) if axes else np.asarray(table.total)
    r_hat = _occupied_bins(np.atleast_1d(marginal), table.total, occupancy)
    return (r_hat - 1.0) / (2.0 * table.total * LN2)


# ---------------------------------------------------------------------------
# table operations
# ---------------------------------------------------------------------------

def entropy(table: ContingencyTable, axes=None, occupancy="observed") -> InfoEstimate:
    """Shannon entropy H = -sum p log2 p of the marginal over `axes`.

    `axes=None` means all axes. Cells with zero count contribute nothing
    (0 log 0 = 0 by continuity).
    """
    if axes is None:
        axes = tuple(range(table.n_axes))
    axes = _check_axes(table, axes, "entropy")
    plugin = _plugin_entropy(table.marginal(axes), table.total)
    corr = _entropy_correction(table, axes, occupancy)
    return InfoEstimate(plugin, corr, plugin + corr, table.total, kind="entropy")


def conditional_entropy(table, target_axes, cond_axes, occupancy="observed") -> InfoEstimate:
    """H(target | cond) = H(target, cond) - H(cond) on plug-in values."""
    target_axes = _check_axes(table, target_axes, "conditional_entropy target")
    cond_axes = _check_axes(table, cond_axes, "conditional_entropy conditioning",
                            allow_empty=True)
    if set(target_axes) & set(cond_axes):
        raise ValueError("target and conditioning axes must be disjoint")
    joint = tuple(sorted(target_axes + cond_axes))
    plugin = (_plugin_entropy(table.marginal(joint), table.total)
              - _plugin_entropy(table.marginal(cond_axes) if cond_axes
                                else np.asarray([table.total]), table.total))
    corr = (_entropy_correction(table, joint, occupancy)
            - _entropy_correction(table, cond_axes, occupancy))
    return InfoEstimate(plugin, corr, plugin + corr, table.total,
                        kind="conditional_entropy")


def mutual_information(table, axes_a, axes_b, occupancy="observed") -> InfoEstimate:
    """I(A;B) = H(A) + H(B) - H(A,B) on plug-in values (symmetric in A, B)."""
    axes_a = _check_axes(table, axes_a, "mutual_information A")
    axes_b = _check_axes(table, axes_b, "mutual_information B")
    if set(axes_a) & set(axes_b):
        raise ValueError("axis sets must be disjoint")
    joint = tuple(sorted(axes_a + axes_b))
    t = table.total
    plugin = (_plugin_entropy(table.marginal(axes_a), t)
              + _plugin_entropy(table.marginal(axes_b), t)
              - _plugin_entropy(table.marginal(joint), t))
    corr = (_entropy_correction(table, axes_a, occupancy)
            + _entropy_correction(table, axes_b, occupancy)
            - _entropy_correction(table, joint, occupancy))
    return InfoEstimate(plugin, corr, plugin + corr, t, kind="mutual_information")


def conditional_mutual_information(table, axes_a, axes_b, cond_axes=(),
                                   occupancy="observed") -> InfoEstimate:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C); reduces to MI for C = {}."""
    axes_a = _check_axes(table, axes_a, "cmi A")
    axes_b = _check_axes(table, axes_b, "cmi B")
    cond_axes = _check_axes(table, cond_axes, "cmi conditioning", allow_empty=True)
    groups = [set(axes_a), set(axes_b), set(cond_axes)]
    for i in range(3):
        for j in range(i + 1, 3):
            if groups[i] & groups[j]:
                raise ValueError("axis sets must be pairwise disjoint")
    t = table.total
    ac = tuple(sorted(axes_a + cond_axes))
    bc = tuple(sorted(axes_b + cond_axes))
    abc = tuple(sorted(axes_a + axes_b + cond_axes))
    h_c = _plugin_entropy(table.marginal(cond_axes), t) if cond_axes else 0.0
    plugin = (_plugin_entropy(table.marginal(ac), t)
              + _plugin_entropy(table.marginal(bc), t)
              - _plugin_entropy(table.marginal(abc), t)
              - h_c)
    corr = (_entropy_correction(table, ac, occupancy)
            + _entropy_correction(table, bc, occupancy)
            - _entropy_correction(table, abc, occupancy)
            - _entropy_correction(table, cond_axes, occupancy))
    return InfoEstimate(plugin, corr, plugin + corr, t,
                        kind="conditional_mutual_information")


def bias_correction(table, kind, axes_a=None, axes_b=None,
                    occupancy="observed") -> float:
    """Additive Miller-Madow correction term, in bits.

    kind="entropy": (R - 1) / (2 N ln 2) over `axes_a` (default: all axes).
    kind="mi": -(R_AB - R_A - R_B + 1) / (2 N ln 2), the combination of the
    three per-marginal entropy corrections of I = H(A) + H(B) - H(A,B).
    The returned value is meant to be *added* to the plug-in estimate.
    """
    if kind == "entropy":
        axes = tuple(range(table.n_axes)) if axes_a is None else \
            _check_axes(table, axes_a, "bias_correction")
        return _entropy_correction(table, axes, occupancy)
    if kind == "mi":
        if axes_a is None or axes_b is None:
            raise ValueError("mi correction needs axes_a and axes_b")
        axes_a = _check_axes(table, axes_a, "bias_correction A")
        axes_b = _check_axes(table, axes_b, "bias_correction B")
        if set(axes_a) & set(axes_b):
            raise ValueError("axis sets must be disjoint")
        joint = tuple(sorted(axes_a + axes_b))
        return (_entropy_correction(table, axes_a, occupancy)
                + _entropy_correction(table, axes_b, occupancy)
                - _entropy_correction(table, joint, occupancy))
    raise ValueError(f"unknown correction kind {kind!r}")


# ---------------------------------------------------------------------------
# sequence operations
# ---------------------------------------------------------------------------

def active_information_storage(seq: SymbolSequence, lags, k_max_offset: int,
                               occupancy="observed") -> InfoEstimate:
    """AIS: mutual information between the past state and the next value.

    The sequence is embedded at `k_max_offset` with the given lags; AIS is
    the plug-in MI between the target column and all past columns of the
    resulting joint table. Zero for memoryless processes, bounded above by
    both H(next value) and H(past state).
    """
    lag_t = lags.lags if isinstance(lags, PastState) else tuple(sorted({int(l) for l in lags}))
    if not lag_t:
        raise ValueError("AIS needs a nonempty past state; "
                         "with no memory the caller should report AIS = 0")
    series = embed(seq, lag_t, k_max_offset)
    table = table_from_series(series)
    past_axes = tuple(range(1, 1 + len(lag_t)))
    est = mutual_information(table, (0,), past_axes, occupancy=occupancy)
    return InfoEstimate(est.plugin_value, est.bias_correction,
                        est.corrected_value, est.sample_count,
                        kind="active_information_storage")


def local_ais(seq: SymbolSequence, lags, k_max_offset: int) -> np.ndarray:
    """Per-row local AIS, log2( p(x_t | past) / p(x_t) ), in bits.

    Uses plug-in probabilities from the embedded rows' own table, so the
    arithmetic mean of the local values equals the plug-in AIS.
    """
    lag_t = lags.lags if isinstance(lags, PastState) else tuple(sorted({int(l) for l in lags}))
    if not lag_t:
        raise ValueError("local AIS needs a nonempty past state")
    series = embed(seq, lag_t, k_max_offset)
    m = series.alphabet_size
    n = series.n_rows
    t = series.targets
    p_code = _encode_columns(series.pasts, m)
    p_size = m ** len(lag_t)
    tp_code = t * p_size + p_code
    c_t = np.bincount(t, minlength=m)
    c_p = np.bincount(p_code)
    c_tp = np.bincount(tp_code)
    return np.log2(c_tp[tp_code] * float(n) / (c_p[p_code] * c_t[t]))


def gaze_transition_entropy(seq: SymbolSequence, occupancy="observed") -> InfoEstimate:
    """GTE: H(X_t | X_{t-1}) over the lag-1 embedded rows.

    Complementary to lag-1 AIS: on the same embedded rows,
    H(X_t) = AIS({1}) + GTE on plug-in values.
    """
    if len(seq) < 2:
        raise ValueError("GTE needs a sequence of length >= 2")
    series = embed(seq, (1,), 1)
    table = table_from_series(series)
    est = conditional_entropy(table, (0,), (1,), occupancy=occupancy)
    return InfoEstimate(est.plugin_value, est.bias_correction,
                        est.corrected_value, est.sample_count,
                        kind="gaze_transition_entropy")
