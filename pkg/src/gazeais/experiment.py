"""End-to-end analysis protocol over trial scanpaths.

Per trial: optimize the past state, estimate bias-corrected AIS and the
next-symbol entropy H(X_t), normalize, and test final AIS significance.
Per participant: pool the selected lags into a union past state, equalize
trial lengths by discarding symbols from the beginning, re-estimate every
trial with the shared past state and sample count (holding estimation bias
constant across groups), and contrast the two conditions with independent
samples permutation tests on AIS, entropy, and normalized AIS.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .embedding import (EmbeddingConfig, MIN_EMBEDDED_ROWS, SelectionTrace,
                        optimize_past_state)
from .gaze import ScanpathRecord
from .infocore import (InfoEstimate, active_information_storage, entropy,
                       table_from_series)
from .rng import derive_seed
from .sequences import PastState, SymbolSequence, embed
from .stats import independent_samples_permutation_test, test_final_ais

log = logging.getLogger(__name__)

MEASURES = ("ais", "entropy", "normalized_ais")


@dataclass
class RunConfig:
    """Run-level settings, loadable from a plain key-value file."""

    k_max: int = 5
    alpha: float = 0.05
    n_perm_selection: int = 200
    n_perm_comparison: int = 5000
    seed: int = 0
    collapse_repeats: bool = False
    tail: str = "two_sided"

    def embedding_config(self) -> EmbeddingConfig:
        return EmbeddingConfig(k_max=self.k_max, alpha=self.alpha,
                               n_perm=self.n_perm_selection, seed=self.seed)


def parse_run_config(path) -> RunConfig:
    """Parse `key = value` lines; '#' starts a comment; unknown keys error."""
    cfg = RunConfig()
    converters = {
        "k_max": int, "alpha": float, "n_perm_selection": int,
        "n_perm_comparison": int, "seed": int, "tail": str,
        "collapse_repeats": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
    }
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {line_no}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in converters:
                raise ValueError(f"config line {line_no}: unknown key {key!r}")
            try:
                setattr(cfg, key, converters[key](value))
            except ValueError as exc:
                raise ValueError(f"config line {line_no}: {exc}") from None
    return cfg


@dataclass
class TrialResult:
    trial_id: str
    participant_id: str
    condition: str
    sample_count: int
    skipped: bool = False
    skip_reason: Optional[str] = None
    selected_lags: Optional[PastState] = None
    ais: Optional[InfoEstimate] = None
    entropy_next: Optional[InfoEstimate] = None
    normalized_ais: Optional[float] = None
    normalized_clamped: bool = False
    ais_p_value: Optional[float] = None
    trace: Optional[SelectionTrace] = None

    def to_dict(self) -> dict:
        def est(e):
            if e is None:
                return None
            return {"plugin_value": e.plugin_value,
                    "bias_correction": e.bias_correction,
                    "corrected_value": e.corrected_value,
                    "sample_count": e.sample_count,
                    "kind": e.kind}

        return {
            "trial_id": self.trial_id,
            "participant_id": self.participant_id,
            "condition": self.condition,
            "sample_count": self.sample_count,
            "skipped": self.skipped,
            "skip_reason": self.skip_reason,
            "selected_lags": list(self.selected_lags.lags) if self.selected_lags is not None else None,
            "k_max": self.selected_lags.k_max if self.selected_lags is not None else None,
            "ais": est(self.ais),
            "entropy_next": est(self.entropy_next),
            "normalized_ais": self.normalized_ais,
            "normalized_clamped": self.normalized_clamped,
            "ais_p_value": self.ais_p_value,
        }


@dataclass
class ContrastResult:
    measure: str
    condition_a: str
    condition_b: str
    n_a: int
    n_b: int
    observed_diff: Optional[float]    # mean(a) - mean(b)
    p_value: Optional[float]
    direction: Optional[str]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ParticipantComparison:
    participant_id: str
    conditions: Tuple[str, str]
    union_lags: PastState
    trial_counts: Dict[str, int]
    equalized_length: int
    equalized_sample_count: int
    means: Dict[str, Dict[str, Optional[float]]]
    sems: Dict[str, Dict[str, Optional[float]]]
    contrasts: Dict[str, ContrastResult]
    excluded_normalized: Dict[str, int]
    n_perm: int
    tail: str
    seed: int
    trial_results: List[TrialResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "conditions": list(self.conditions),
            "union_lags": list(self.union_lags.lags),
            "k_max": self.union_lags.k_max,
            "trial_counts": dict(self.trial_counts),
            "equalized_length": self.equalized_length,
            "equalized_sample_count": self.equalized_sample_count,
            "means": {m: dict(v) for m, v in self.means.items()},
            "sems": {m: dict(v) for m, v in self.sems.items()},
            "contrasts": {m: c.to_dict() for m, c in self.contrasts.items()},
            "excluded_normalized": dict(self.excluded_normalized),
            "n_perm": self.n_perm,
            "tail": self.tail,
            "seed": self.seed,
            "trials": [t.to_dict() for t in self.trial_results],
        }


# ---------------------------------------------------------------------------
# per-trial analysis
# ---------------------------------------------------------------------------

def _entropy_next(scanpath: SymbolSequence, k_max: int, occupancy) -> InfoEstimate:
    """Bias-corrected H(X_t) over the embedded target column."""
    series = embed(scanpath, (), k_max)
    return entropy(table_from_series(series), occupancy=occupancy)


def _normalize(ais_est, entropy_est):
    """Corrected AIS / corrected H(X_t), clamped into [0, 1].

    Undefined (None) when the plug-in H(X_t) is zero, i.e. there is nothing
    to predict.
    """
    if entropy_est.plugin_value == 0.0:
        return None, False
    raw = ais_est.corrected_value / entropy_est.corrected_value
    clamped = float(min(1.0, max(0.0, raw)))
    return clamped, clamped != raw


def analyze_trial(scanpath: SymbolSequence, cfg: EmbeddingConfig, *,
                  trial_id: str = "", participant_id: str = "",
                  condition: str = "", n_perm_final: Optional[int] = None,
                  seed: Optional[int] = None, n_jobs: int = 1,
                  occupancy: str = "observed") -> TrialResult:
    """Optimize the past state of one trial and estimate its AIS.

    Too-short scanpaths yield a skip record rather than an error. When the
    optimization selects no lags, AIS is reported as 0 with p = 1.
    """
    seed = cfg.seed if seed is None else seed
    n = len(scanpath) - cfg.k_max
    if n < MIN_EMBEDDED_ROWS:
        return TrialResult(
            trial_id=trial_id, participant_id=participant_id,
            condition=condition, sample_count=max(n, 0), skipped=True,
            skip_reason=(f"{max(n, 0)} embedded rows at k_max={cfg.k_max}; "
                         f"need at least {MIN_EMBEDDED_ROWS}"),
        )
    local_cfg = replace(cfg, seed=seed)
    lags, trace = optimize_past_state(scanpath, local_cfg, n_jobs=n_jobs)
    entropy_next = _entropy_next(scanpath, cfg.k_max, occupancy)
    if lags:
        ais = active_information_storage(scanpath, lags, cfg.k_max,
                                         occupancy=occupancy)
        series = embed(scanpath, lags, cfg.k_max)
        test = test_final_ais(series, n_perm_final or cfg.n_perm,
                              seed=derive_seed(seed, "final-ais"),
                              n_jobs=n_jobs)
        p_value = test.p_value
    else:
        ais = InfoEstimate(0.0, 0.0, 0.0, n, kind="active_information_storage")
        p_value = 1.0
    normalized, clamped = _normalize(ais, entropy_next)
    if clamped:
        log.info("trial %s: normalized AIS clamped into [0, 1]", trial_id)
    return TrialResult(
        trial_id=trial_id, participant_id=participant_id, condition=condition,
        sample_count=n, selected_lags=lags, ais=ais,
        entropy_next=entropy_next, normalized_ais=normalized,
        normalized_clamped=clamped, ais_p_value=p_value, trace=trace,
    )


# ---------------------------------------------------------------------------
# participant-level protocol
# ---------------------------------------------------------------------------

def union_past_state(results: Sequence[TrialResult],
                     k_max: Optional[int] = None) -> PastState:
    """Union of the selected lags over all (non-skipped) trial results."""
    if not results:
        raise ValueError("need at least one trial result")
    lags = set()
    k_seen = []
    for res in results:
        if res.skipped or res.selected_lags is None:
            continue
        lags.update(res.selected_lags.lags)
        k_seen.append(res.selected_lags.k_max)
    if k_max is None:
        if not k_seen:
            raise ValueError("no analyzable results and no k_max given")
        k_max = max(k_seen)
    return PastState(tuple(sorted(lags)), k_max)


def equalize_samples(scanpaths: Sequence[SymbolSequence]) -> List[SymbolSequence]:
    """Truncate every scanpath to the minimum length, keeping suffixes.

    Discarding from the beginning of a trial fixes the sample count, which
    keeps estimation bias comparable across the trials being contrasted.
    """
    if not scanpaths:
        raise ValueError("need at least one scanpath")
    target = min(len(s) for s in scanpaths)
    return [SymbolSequence(s.symbols[len(s) - target:], s.alphabet_size)
            for s in scanpaths]


def _mean_sem(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    arr = np.asarray(vals, dtype=np.float64)
    mean = float(arr.mean())
    sem = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else None
    return mean, sem


def compare_conditions(records: Sequence[ScanpathRecord], cfg: EmbeddingConfig,
                       n_perm: int = 5000, tail: str = "two_sided",
                       seed: Optional[int] = None, n_jobs: int = 1,
                       occupancy: str = "observed") -> ParticipantComparison:
    """Contrast one participant's two conditions on equalized estimates.

    Per-trial past states are optimized first; all trials are then
    re-estimated with the union past state on length-equalized scanpaths,
    so every value entering a contrast shares the same sample count and
    past-state dimensionality. Trials with H(X_t) = 0 are excluded from the
    normalized-AIS contrast only.
    """
    if not records:
        raise ValueError("need at least one trial record")
    participants = sorted({r.participant_id for r in records})
    if len(participants) > 1:
        raise ValueError(f"records span multiple participants: {participants}")
    participant_id = participants[0]
    seed = cfg.seed if seed is None else seed

    results = [
        analyze_trial(
            rec.sequence, cfg,
            trial_id=rec.trial_id, participant_id=rec.participant_id,
            condition=rec.condition,
            seed=derive_seed(seed, "trial", rec.condition, rec.trial_id),
            n_jobs=n_jobs, occupancy=occupancy,
        )
        for rec in records
    ]
    analyzable = [(rec, res) for rec, res in zip(records, results)
                  if not res.skipped]
    for rec, res in zip(records, results):
        if res.skipped:
            log.info("trial %s excluded: %s", rec.trial_id, res.skip_reason)

    conditions = tuple(sorted({rec.condition for rec, _ in analyzable}))
    if len(conditions) != 2:
        raise ValueError(
            f"expected exactly 2 conditions, found {list(conditions)}"
        )
    counts = {c: sum(1 for rec, _ in analyzable if rec.condition == c)
              for c in conditions}
    for c in conditions:
        if counts[c] < 2:
            raise ValueError(
                f"condition {c!r} has {counts[c]} analyzable trial(s); need >= 2"
            )

    union = union_past_state([res for _, res in analyzable], k_max=cfg.k_max)
    eq_seqs = equalize_samples([rec.sequence for rec, _ in analyzable])
    eq_length = len(eq_seqs[0])
    eq_rows = eq_length - cfg.k_max
    if eq_rows < MIN_EMBEDDED_ROWS:
        # Cannot happen when every analyzable trial met the minimum, since
        # the equalized length is the minimum over those trials.
        raise ValueError("equalized trials fall below the embedding minimum")

    values = {m: {c: [] for c in conditions} for m in MEASURES}
    excluded_normalized = {c: 0 for c in conditions}
    for (rec, _), seq in zip(analyzable, eq_seqs):
        h_est = _entropy_next(seq, cfg.k_max, occupancy)
        if union:
            ais_est = active_information_storage(seq, union, cfg.k_max,
                                                 occupancy=occupancy)
        else:
            ais_est = InfoEstimate(0.0, 0.0, 0.0, eq_rows,
                                   kind="active_information_storage")
        normalized, _ = _normalize(ais_est, h_est)
        cond = rec.condition
        values["ais"][cond].append(ais_est.corrected_value)
        values["entropy"][cond].append(h_est.corrected_value)
        if normalized is None:
            excluded_normalized[cond] += 1
            log.info("trial %s: H(X_t)=0, excluded from normalized contrast",
                     rec.trial_id)
        else:
            values["normalized_ais"][cond].append(normalized)

    cond_a, cond_b = conditions
    means = {}
    sems = {}
    contrasts = {}
    for measure in MEASURES:
        group_a = values[measure][cond_a]
        group_b = values[measure][cond_b]
        mean_a, sem_a = _mean_sem(group_a)
        mean_b, sem_b = _mean_sem(group_b)
        means[measure] = {cond_a: mean_a, cond_b: mean_b}
        sems[measure] = {cond_a: sem_a, cond_b: sem_b}
        if group_a and group_b:
            test = independent_samples_permutation_test(
                group_a, group_b, n_perm=n_perm, tail=tail,
                seed=derive_seed(seed, "contrast", measure), n_jobs=n_jobs,
            )
            diff = test.observed_statistic
            if diff > 0:
                direction = f"{cond_a}>{cond_b}"
            elif diff < 0:
                direction = f"{cond_a}<{cond_b}"
            else:
                direction = "equal"
            contrasts[measure] = ContrastResult(
                measure, cond_a, cond_b, len(group_a), len(group_b),
                diff, test.p_value, direction,
            )
        else:
            contrasts[measure] = ContrastResult(
                measure, cond_a, cond_b, len(group_a), len(group_b),
                None, None, None,
            )

    return ParticipantComparison(
        participant_id=participant_id,
        conditions=conditions,
        union_lags=union,
        trial_counts=counts,
        equalized_length=eq_length,
        equalized_sample_count=eq_rows,
        means=means,
        sems=sems,
        contrasts=contrasts,
        excluded_normalized=excluded_normalized,
        n_perm=n_perm,
        tail=tail,
        seed=seed,
        trial_results=results,
    )


@dataclass
class LagHistogram:
    counts: Dict[int, int]
    n_trials: int              # analyzable (non-skipped) trials
    n_selected: int            # trials with a nonempty selection
    multi_lag_trials: int      # trials containing any lag >= 2
    fraction_multi_all: Optional[float]
    fraction_multi_selected: Optional[float]

    def to_dict(self) -> dict:
        return {
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "n_trials": self.n_trials,
            "n_selected": self.n_selected,
            "multi_lag_trials": self.multi_lag_trials,
            "fraction_multi_all": self.fraction_multi_all,
            "fraction_multi_selected": self.fraction_multi_selected,
        }


def lag_histogram(results: Sequence[TrialResult],
                  k_max: Optional[int] = None) -> LagHistogram:
    """Tally selected lags over trials plus the share of lag > 1 trials.

    The fraction is reported with both denominators (all analyzable trials,
    and only trials with a nonempty selection) since either convention is
    defensible.
    """
    usable = [r for r in results if not r.skipped and r.selected_lags is not None]
    if k_max is None:
        k_max = max((r.selected_lags.k_max for r in usable), default=1)
    counts = {lag: 0 for lag in range(1, k_max + 1)}
    n_selected = 0
    multi = 0
    for r in usable:
        lags = r.selected_lags.lags
        if lags:
            n_selected += 1
        if any(l >= 2 for l in lags):
            multi += 1
        for lag in lags:
            counts[lag] = counts.get(lag, 0) + 1
    n_trials = len(usable)
    return LagHistogram(
        counts=counts,
        n_trials=n_trials,
        n_selected=n_selected,
        multi_lag_trials=multi,
        fraction_multi_all=(multi / n_trials) if n_trials else None,
        fraction_multi_selected=(multi / n_selected) if n_selected else None,
    )
