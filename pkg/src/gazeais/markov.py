"""Order-k Markov chains with exact analytic information values.

These are the validation oracles: a fully specified chain whose stationary
distribution, AIS, and transition entropy can be computed exactly, against
which the plug-in estimators are checked.
"""

import itertools
import json
from bisect import bisect_right
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .sequences import PastState, SymbolSequence

_PI_TOL = 1e-12
_PI_MAX_ITER = 10 ** 6


@dataclass
class MarkovSpec:
    """An order-k chain: one probability vector over symbols per history.

    `transition` maps every length-`order` history tuple (oldest symbol
    first) to a probability vector of length `alphabet_size`. Order 0 means
    i.i.d. sampling and uses the single empty-tuple history.
    """

    order: int
    alphabet_size: int
    transition: Dict[Tuple[int, ...], np.ndarray]

    def __post_init__(self):
        self.order = int(self.order)
        self.alphabet_size = int(self.alphabet_size)
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")
        m = self.alphabet_size
        clean = {}
        for hist, vec in self.transition.items():
            key = tuple(int(s) for s in hist)
            if len(key) != self.order:
                raise ValueError(f"history {key} has length {len(key)}, expected {self.order}")
            if any(s < 0 or s >= m for s in key):
                raise ValueError(f"history {key} contains out-of-range symbols")
            v = np.asarray(vec, dtype=np.float64)
            if v.shape != (m,):
                raise ValueError(f"history {key}: probability vector must have length {m}")
            if np.any(v < -1e-15):
                raise ValueError(f"history {key}: negative probability")
            if abs(v.sum() - 1.0) > 1e-12:
                raise ValueError(f"history {key}: probabilities sum to {v.sum()}, not 1")
            clean[key] = np.clip(v, 0.0, None)
        expected = m ** self.order
        if len(clean) != expected:
            raise ValueError(
                f"transition table covers {len(clean)} histories, expected {expected}"
            )
        self.transition = clean

    # Order-0 chains are lifted to an equivalent order-1 chain whose rows
    # are all identical, so the history state space is never degenerate.
    @property
    def effective_order(self) -> int:
        return max(self.order, 1)

    def _row_matrix(self) -> np.ndarray:
        """Rows indexed by encoded history, columns by next symbol."""
        m = self.alphabet_size
        k = self.effective_order
        rows = np.empty((m ** k, m), dtype=np.float64)
        if self.order == 0:
            rows[:] = self.transition[()]
            return rows
        for hist, vec in self.transition.items():
            idx = 0
            for s in hist:
                idx = idx * m + s
            rows[idx] = vec
        return rows

    def to_json_dict(self) -> dict:
        return {
            "order": self.order,
            "alphabet_size": self.alphabet_size,
            "transition": {
                ",".join(str(s) for s in hist): [float(p) for p in vec]
                for hist, vec in sorted(self.transition.items())
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MarkovSpec":
        transition = {}
        for key, vec in doc["transition"].items():
            hist = tuple(int(s) for s in key.split(",")) if key else ()
            transition[hist] = vec
        return cls(order=doc["order"], alphabet_size=doc["alphabet_size"],
                   transition=transition)


def load_markov_spec(path) -> MarkovSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return MarkovSpec.from_json_dict(json.load(fh))


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def generate(spec: MarkovSpec, length: int, seed: int,
             burn_in: int = 1000) -> SymbolSequence:
    """Sample the chain from a uniform random initial history.

    Discards `burn_in` symbols, then records exactly `length`. Deterministic
    given the seed.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    m = spec.alphabet_size
    k = spec.effective_order
    rows = spec._row_matrix()
    cums = [list(np.cumsum(row)) for row in rows]
    rng = np.random.default_rng(seed)
    h = int(rng.integers(m ** k))
    mod_base = m ** (k - 1)
    draws = rng.random(burn_in + length)
    out = np.empty(length, dtype=np.int64)
    for i in range(burn_in + length):
        a = bisect_right(cums[h], draws[i])
        if a >= m:  # cumulative sum may fall a few ulp short of 1.0
            a = m - 1
        if i >= burn_in:
            out[i - burn_in] = a
        h = (h % mod_base) * m + a
    return SymbolSequence(out, m)


# ---------------------------------------------------------------------------
# exact analytic values
# ---------------------------------------------------------------------------

def _check_irreducible(rows: np.ndarray, m: int):
    """Reject chains whose history graph is not strongly connected."""
    n_states = rows.shape[0]
    mod_base = n_states // m
    succ = [[(h % mod_base) * m + a for a in range(m) if rows[h, a] > 0.0]
            for h in range(n_states)]
    pred = [[] for _ in range(n_states)]
    for h, targets in enumerate(succ):
        for t in targets:
            pred[t].append(h)

    def reaches_all(adj):
        seen = [False] * n_states
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        return count == n_states

    if not (reaches_all(succ) and reaches_all(pred)):
        raise ValueError(
            "chain is reducible: the history graph is not strongly connected"
        )


def stationary_distribution(spec: MarkovSpec) -> np.ndarray:
    """Stationary distribution over the m^k history states.

    Computed by power iteration on the half-lazy kernel (P + I)/2, which has
    the same fixed point as P but converges geometrically even for periodic
    chains (e.g. deterministic cycles). Reducible chains are rejected.
    For order 0 the history space is the single last symbol, so the result
    is the i.i.d. symbol distribution itself.
    """
    m = spec.alphabet_size
    rows = spec._row_matrix()
    n_states = rows.shape[0]
    if n_states == 1:
        return np.ones(1)
    _check_irreducible(rows, m)
    mod_base = n_states // m
    # Dense history-to-history operator.
    P = np.zeros((n_states, n_states))
    for h in range(n_states):
        base = (h % mod_base) * m
        for a in range(m):
            P[h, base + a] += rows[h, a]
    x = np.full(n_states, 1.0 / n_states)
    for _ in range(_PI_MAX_ITER):
        y = 0.5 * (x + x @ P)
        resid = float(np.abs(y - x).sum())
        x = y
        if resid < _PI_TOL:
            break
    else:
        raise ValueError(
            f"power iteration did not reach residual {_PI_TOL} "
            f"within {_PI_MAX_ITER} iterations"
        )
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def _window_joint(spec: MarkovSpec, window: int) -> np.ndarray:
    """Exact stationary joint over `window` consecutive symbols.

    Axis j holds the symbol at position j of the window, oldest first, so
    the last axis is x_t.
    """
    m = spec.alphabet_size
    k = spec.effective_order
    pi = stationary_distribution(spec)
    joint = pi.reshape((m,) * k)
    if window <= k:
        drop = tuple(range(k - window))
        return joint.sum(axis=drop) if drop else joint
    T = spec._row_matrix().reshape((m,) * k + (m,))
    for j in range(k, window):
        T_b = T.reshape((1,) * (j - k) + (m,) * (k + 1))
        joint = joint[..., None] * T_b
    return joint


def _dist_entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def analytic_entropy(spec: MarkovSpec) -> float:
    """Exact entropy of the stationary symbol distribution, in bits."""
    return _dist_entropy(_window_joint(spec, 1))


def analytic_ais(spec: MarkovSpec, lags) -> float:
    """Exact AIS for the given lag set, in bits.

    Marginalizes the stationary process over the full contiguous window
    [t - max(lags), t] and then drops unused coordinates, which keeps the
    joint correct for non-contiguous lag sets. For lags covering [1, k]
    this equals H(X_t) - H(X_t | full order-k history).
    """
    lag_t = lags.lags if isinstance(lags, PastState) else tuple(sorted({int(l) for l in lags}))
    if not lag_t:
        raise ValueError("analytic AIS needs a nonempty lag set")
    if lag_t[0] < 1:
        raise ValueError("lags must be positive")
    w = lag_t[-1] + 1
    joint = _window_joint(spec, w)
    target_axis = w - 1
    keep = sorted({target_axis} | {target_axis - l for l in lag_t})
    drop = tuple(a for a in range(w) if a not in keep)
    sub = joint.sum(axis=drop) if drop else joint
    # After dropping, the target is the last remaining axis.
    h_joint = _dist_entropy(sub)
    h_t = _dist_entropy(sub.sum(axis=tuple(range(sub.ndim - 1))))
    h_p = _dist_entropy(sub.sum(axis=-1))
    return h_t + h_p - h_joint


def analytic_gte(spec: MarkovSpec) -> float:
    """Exact H(X_t | X_{t-1}) of the stationary chain, in bits."""
    joint = _window_joint(spec, 2)
    return _dist_entropy(joint) - _dist_entropy(joint.sum(axis=1))


# ---------------------------------------------------------------------------
# benchmark chains used by tests, the validate command, and simulations
# ---------------------------------------------------------------------------

def uniform_iid_spec(m: int) -> MarkovSpec:
    """Order-0 uniform i.i.d. source over m symbols (zero memory)."""
    return MarkovSpec(0, m, {(): np.full(m, 1.0 / m)})


def cycle_spec(m: int) -> MarkovSpec:
    """Deterministic m-cycle 0 -> 1 -> ... -> m-1 -> 0 (fully predictable)."""
    transition = {}
    for s in range(m):
        vec = np.zeros(m)
        vec[(s + 1) % m] = 1.0
        transition[(s,)] = vec
    return MarkovSpec(1, m, transition)


def persistence_spec(p_stay: float, m: int = 2) -> MarkovSpec:
    """Order-1 chain that repeats its last symbol with probability p_stay."""
    if not (0.0 < p_stay < 1.0):
        raise ValueError("p_stay must lie in (0, 1)")
    off = (1.0 - p_stay) / (m - 1) if m > 1 else 0.0
    transition = {}
    for s in range(m):
        vec = np.full(m, off)
        vec[s] = p_stay
        transition[(s,)] = vec
    return MarkovSpec(1, m, transition)


def lagged_copy_spec(lag: int, p_copy: float, m: int = 2) -> MarkovSpec:
    """Order-`lag` chain copying the symbol `lag` steps back with p_copy.

    With the other symbols equiprobable. For lag 2 on a binary alphabet the
    even and odd sub-sequences are independent persistence chains, so the
    immediate past carries no information and only lag 2 is informative.
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    if not (0.0 < p_copy < 1.0):
        raise ValueError("p_copy must lie in (0, 1)")
    off = (1.0 - p_copy) / (m - 1) if m > 1 else 0.0
    transition = {}
    for hist in itertools.product(range(m), repeat=lag):
        vec = np.full(m, off)
        vec[hist[0]] = p_copy  # hist[0] is the oldest symbol = lag steps back
        transition[hist] = vec
    return MarkovSpec(lag, m, transition)
