"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s`. Every tolerance is pinned
here; the oracles (closed forms, exhaustive enumeration, planted traces)
are computed inside the tests, independently of the code paths they check.
"""

import itertools
import json
import math

import numpy as np
import pytest

from gazeais import (ContingencyTable, EmbeddingConfig, GazeSample,
                     ScanpathRecord, SymbolSequence,
                     active_information_storage, analytic_ais, analyze_trial,
                     compare_conditions, conditional_entropy,
                     conditional_mutual_information, derive_seed,
                     detect_fixations_idt, embed, empirical_distribution,
                     entropy, filter_fixations, gaze_transition_entropy,
                     generate, independent_samples_permutation_test,
                     lagged_copy_spec, local_ais, max_statistic_test,
                     mutual_information, optimize_past_state,
                     persistence_spec, table_from_series, uniform_iid_spec)
from gazeais import test_final_ais as final_ais_test
from gazeais.cli import main as cli_main
from gazeais.gaze import Fixation

IDENTITY_TOL = 1e-12


def _report(num, name, passed, detail):
    print(f"\nACCEPTANCE {num} {name}: {'PASS' if passed else 'FAIL'} ({detail})",
          flush=True)
    assert passed, f"criterion {num} failed: {detail}"


def binary_entropy(p):
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def test_criterion_1_algebraic_identities():
    rng = np.random.default_rng(20240501)
    worst = 0.0
    for _ in range(1000):
        n_axes = int(rng.integers(2, 4))
        dims = tuple(int(rng.integers(2, 5)) for _ in range(n_axes))
        counts = rng.integers(0, 6, size=dims)
        if counts.sum() == 0:
            counts.flat[0] = 1
        table = ContingencyTable(counts)
        a, b = (0,), (1,)
        rest = tuple(range(2, n_axes))
        h_a = entropy(table, a).plugin_value
        h_b = entropy(table, b).plugin_value
        h_ab = entropy(table, a + b).plugin_value
        worst = max(worst, abs(conditional_entropy(table, a, b).plugin_value
                               - (h_ab - h_b)))
        worst = max(worst, abs(mutual_information(table, a, b).plugin_value
                               - (h_a + h_b - h_ab)))
        worst = max(worst, abs(
            conditional_mutual_information(table, a, b, ()).plugin_value
            - mutual_information(table, a, b).plugin_value))
        if rest:
            h_ac = entropy(table, a + rest).plugin_value
            h_bc = entropy(table, b + rest).plugin_value
            h_abc = entropy(table, a + b + rest).plugin_value
            h_c = entropy(table, rest).plugin_value
            worst = max(worst, abs(
                conditional_mutual_information(table, a, b, rest).plugin_value
                - (h_ac + h_bc - h_abc - h_c)))
        # complementarity and local-AIS consistency on a random sequence
        m = int(rng.integers(2, 5))
        seq = SymbolSequence(rng.integers(0, m, size=int(rng.integers(10, 120))), m)
        ais = active_information_storage(seq, (1,), 1).plugin_value
        gte = gaze_transition_entropy(seq).plugin_value
        h_t = entropy(table_from_series(embed(seq, (1,), 1)), (0,)).plugin_value
        worst = max(worst, abs(h_t - ais - gte))
        worst = max(worst, abs(float(np.mean(local_ais(seq, (1,), 1))) - ais))
    _report(1, "algebraic identities", worst <= IDENTITY_TOL,
            f"max deviation {worst:.3e} over 1000 randomized cases")


def test_criterion_2_oracle_convergence():
    p_stay = 0.9
    target = 1.0 - binary_entropy(p_stay)  # closed form, computed here
    spec = persistence_spec(p_stay)
    assert analytic_ais(spec, (1,)) == pytest.approx(target, abs=1e-12)
    medians = []
    for n in (1000, 10_000, 100_000):
        errs = []
        for s in range(20):
            seq = generate(spec, n, seed=derive_seed(812, n, s))
            est = active_information_storage(seq, (1,), 1).plugin_value
            errs.append(abs(est - target))
        medians.append(float(np.median(errs)))
    monotone = medians[0] >= medians[1] >= medians[2]
    close = medians[2] < 0.005
    _report(2, "oracle convergence", monotone and close,
            f"median errors {[f'{m:.4f}' for m in medians]} "
            f"for N in 1e3/1e4/1e5; target {target:.5f}")


def test_criterion_3_embedding_recovery():
    cfg = EmbeddingConfig(k_max=5, alpha=0.05, n_perm=200, seed=0)

    order1_hits = 0
    for s in range(20):
        seq = generate(persistence_spec(0.9), 10_000, seed=derive_seed(31, s))
        lags, _ = optimize_past_state(seq, cfg)
        order1_hits += lags.lags == (1,)

    order2_hits = 0
    for s in range(20):
        seq = generate(lagged_copy_spec(2, 0.9), 10_000, seed=derive_seed(32, s))
        lags, _ = optimize_past_state(seq, cfg)
        order2_hits += 2 in lags.lags

    false_positives = 0
    for s in range(100):
        seq = generate(uniform_iid_spec(4), 10_000, seed=derive_seed(33, s))
        lags, _ = optimize_past_state(seq, cfg)
        false_positives += bool(lags)

    passed = order1_hits >= 18 and order2_hits >= 18 and false_positives <= 10
    _report(3, "embedding recovery", passed,
            f"order-1 {order1_hits}/20, planted lag-2 {order2_hits}/20, "
            f"iid false positives {false_positives}/100")


def _condition_records(spec, condition, n_trials, length, seed):
    records = []
    for i in range(n_trials):
        seq = generate(spec, length, seed=derive_seed(seed, condition, i))
        records.append(ScanpathRecord(
            trial_id=f"{condition}-t{i:02d}", participant_id="p0",
            condition=condition, symbols=seq.symbols,
            alphabet_size=seq.alphabet_size))
    return records


def test_criterion_4_protocol_pipeline():
    spec_hi = persistence_spec(0.95)   # analytic AIS ~ 0.714 bits
    spec_lo = persistence_spec(0.60)   # analytic AIS ~ 0.029 bits
    gap = analytic_ais(spec_hi, (1,)) - analytic_ais(spec_lo, (1,))
    assert gap >= 0.3
    cfg = EmbeddingConfig(k_max=5, alpha=0.05, n_perm=200, seed=0)

    correct = 0
    for run in range(100):
        hi = _condition_records(spec_hi, "hi", 22, 300, derive_seed(41, run))
        lo = _condition_records(spec_lo, "lo", 22, 300, derive_seed(42, run))
        comp = compare_conditions(hi + lo, cfg, n_perm=5000, tail="two_sided",
                                  seed=derive_seed(43, run))
        contrast = comp.contrasts["ais"]
        if contrast.observed_diff > 0 and contrast.p_value <= 0.01:
            correct += 1

    spec_null = persistence_spec(0.75)
    null_rejections = 0
    for run in range(100):
        a = _condition_records(spec_null, "A", 22, 300, derive_seed(44, run))
        b = _condition_records(spec_null, "B", 22, 300, derive_seed(45, run))
        comp = compare_conditions(a + b, cfg, n_perm=5000, tail="two_sided",
                                  seed=derive_seed(46, run))
        if comp.contrasts["ais"].p_value <= 0.01:
            null_rejections += 1

    passed = correct >= 95 and null_rejections <= 7
    _report(4, "condition-contrast protocol", passed,
            f"separated direction+p<=0.01 in {correct}/100, "
            f"identical-spec rejections {null_rejections}/100, "
            f"analytic gap {gap:.3f} bits")


def test_criterion_5_bias_correction():
    rng = np.random.default_rng(55)
    plugin_err, corrected_err = [], []
    for _ in range(1000):
        draws = rng.integers(0, 4, size=50)
        est = entropy(empirical_distribution(draws[:, None], (4,)))
        plugin_err.append(abs(est.plugin_value - 2.0))
        corrected_err.append(abs(est.corrected_value - 2.0))
    mp, mc = float(np.mean(plugin_err)), float(np.mean(corrected_err))
    _report(5, "bias correction", mc < mp,
            f"corrected MAE {mc:.4f} < plug-in MAE {mp:.4f} over 1000 draws")


def test_criterion_6_idt_correctness():
    ok = True
    details = []

    # planted clusters joined by saccade transits
    samples = []
    t = 0.0
    for _ in range(25):
        samples.append(GazeSample(t, 100.0, 200.0, 1.0))
        t += 1 / 120.0
    for x in (240.0, 400.0, 560.0):
        samples.append(GazeSample(t, x, 200.0, 1.0))
        t += 1 / 120.0
    for _ in range(25):
        samples.append(GazeSample(t, 700.0, 200.0, 1.0))
        t += 1 / 120.0
    fixations = detect_fixations_idt(samples, 50.0, 100.0)
    ok &= len(fixations) == 2
    if len(fixations) == 2:
        ok &= abs(fixations[0].centroid_x - 100.0) < 1.0
        ok &= abs(fixations[1].centroid_x - 700.0) < 1.0
    details.append(f"planted clusters -> {len(fixations)} fixations")

    # dispersion exactly at the threshold stays a single fixation
    boundary = [GazeSample(i / 120.0, 300.0 + 50.0 * (i % 2), 100.0, 1.0)
                for i in range(30)]
    ok &= len(detect_fixations_idt(boundary, 50.0, 100.0)) == 1
    over = [GazeSample(i / 120.0, 300.0 + 50.0001 * (i % 2), 100.0, 1.0)
            for i in range(30)]
    ok &= len(detect_fixations_idt(over, 50.0, 100.0)) == 0
    details.append("dispersion 50 px inclusive")

    # duration exactly 100 ms qualifies; just below does not
    exact = [GazeSample(v, 0.0, 0.0, 1.0) for v in (0.0, 0.05, 0.100)]
    ok &= len(detect_fixations_idt(exact, 50.0, 100.0)) == 1
    short = [GazeSample(v, 0.0, 0.0, 1.0) for v in (0.0, 0.05, 0.099)]
    ok &= len(detect_fixations_idt(short, 50.0, 100.0)) == 0
    details.append("duration 100 ms inclusive")

    # duration filter: 1500 ms retained, strictly above removed
    keep = Fixation(0.0, 1500.0, 0.0, 0.0, 5)
    drop = Fixation(0.0, 1500.0001, 0.0, 0.0, 5)
    ok &= filter_fixations([keep, drop]) == [keep]
    details.append("max duration 1500 ms exclusive-above")

    _report(6, "IDT correctness", bool(ok), "; ".join(details))


def test_criterion_7_determinism(tmp_path):
    checks = []

    seq = generate(persistence_spec(0.85), 2000, seed=71)
    checks.append(np.array_equal(
        generate(persistence_spec(0.85), 2000, seed=71).symbols, seq.symbols))

    cfg = EmbeddingConfig(k_max=5, n_perm=100, seed=72)
    out1 = optimize_past_state(seq, cfg, n_jobs=1)
    out8 = optimize_past_state(seq, cfg, n_jobs=8)
    checks.append(out1[0] == out8[0])
    checks.append([s.p_value for s in out1[1].steps]
                  == [s.p_value for s in out8[1].steps])

    series = embed(seq, (1, 2, 3), 5)
    checks.append(
        max_statistic_test(0.005, (1, 2, 3), series, 200, seed=73, n_jobs=1)
        == max_statistic_test(0.005, (1, 2, 3), series, 200, seed=73, n_jobs=8))
    checks.append(final_ais_test(series, 200, seed=74, n_jobs=1)
                  == final_ais_test(series, 200, seed=74, n_jobs=8))

    rng = np.random.default_rng(75)
    a, b = rng.normal(size=15).tolist(), rng.normal(0.4, 1.0, size=12).tolist()
    checks.append(
        independent_samples_permutation_test(a, b, 500, "two_sided", 76, n_jobs=1)
        == independent_samples_permutation_test(a, b, 500, "two_sided", 76, n_jobs=8))

    res1 = analyze_trial(seq, cfg, trial_id="d", n_jobs=1)
    res8 = analyze_trial(seq, cfg, trial_id="d", n_jobs=8)
    checks.append(res1.ais == res8.ais and res1.ais_p_value == res8.ais_p_value)

    # CLI: simulate -> ais -> compare, --jobs 1 vs --jobs 8, byte identical
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(persistence_spec(0.9, m=4).to_json_dict()))
    sims = {}
    for cond, seed in (("TC", 771), ("TUC", 772)):
        path = tmp_path / f"sims_{cond}.json"
        cli_main(["simulate", str(spec_path), "--length", "150", "--trials", "4",
                  "--seed", str(seed), "--condition", cond,
                  "--participant", "p0", "--out", str(path)])
        sims[cond] = json.loads(path.read_text())["trials"]
    scan_path = tmp_path / "scan.json"
    scan_path.write_text(json.dumps(
        {"schema_version": 1, "trials": sims["TC"] + sims["TUC"]}))
    ais_outputs = []
    for jobs in ("1", "8"):
        out = tmp_path / f"results_j{jobs}.json"
        cli_main(["ais", str(scan_path), "--seed", "77", "--nperm", "100",
                  "--jobs", jobs, "--out", str(out)])
        ais_outputs.append(out.read_bytes())
    checks.append(ais_outputs[0] == ais_outputs[1])
    cmp_outputs = []
    for jobs in ("1", "8"):
        out = tmp_path / f"cmp_j{jobs}"
        cli_main(["compare", str(tmp_path / "results_j1.json"), "--seed", "78",
                  "--nperm-comparison", "400", "--jobs", jobs,
                  "--out", str(out)])
        cmp_outputs.append((out / "comparison.json").read_bytes())
    checks.append(cmp_outputs[0] == cmp_outputs[1])

    _report(7, "determinism", all(checks),
            f"{sum(checks)}/{len(checks)} determinism checks identical")


def test_criterion_8_exact_small_group_test():
    rng = np.random.default_rng(81)
    worst = 0.0
    for case in range(5):
        if case == 0:
            a, b = [10.0, 10.0, 10.0], [0.0, 0.0, 0.0]
        else:
            a = rng.normal(0.5, 1.0, size=3).tolist()
            b = rng.normal(0.0, 1.0, size=3).tolist()
        pooled = np.asarray(a + b)
        obs = abs(np.mean(sorted(a)) - np.mean(sorted(b)))
        exceed = 0
        splits = list(itertools.combinations(range(6), 3))
        for idx in splits:
            mask = np.zeros(6, dtype=bool)
            mask[list(idx)] = True
            s = np.sort(pooled[mask])
            rest = np.sort(pooled[~mask])
            if abs(s.mean() - rest.mean()) >= obs:
                exceed += 1
        exact = exceed / len(splits)
        mc = independent_samples_permutation_test(a, b, 10_000, "two_sided",
                                                  seed=derive_seed(82, case))
        worst = max(worst, abs(mc.p_value - exact))
    _report(8, "exact small-group permutation", worst <= 0.02,
            f"max |MC - exact| = {worst:.4f} over 5 group pairs")
