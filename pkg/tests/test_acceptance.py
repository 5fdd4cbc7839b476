"""Acceptance suite: one test per release criterion, each printing a PASS line
with its measured runtime. Tolerances are pinned here, not configurable."""

import json
import math
import time
import warnings

import numpy as np
import pytest

import srocmeta as sm
from srocmeta import phm
from srocmeta.cli import main
from srocmeta.report import (
    RELATION_HUMAN_EXCLUDES_AI,
    RELATION_OVERLAP,
    compare_auc,
)
from srocmeta.simulate import SimConfig, coverage_experiment, generate
from srocmeta.tables import ContingencyTable, ReaderRecord, StudyDataset, logit_pair


def _report(n, message, t0, budget):
    elapsed = time.time() - t0
    assert elapsed < budget, f"criterion {n} exceeded its {budget}s runtime budget"
    print(f"[criterion {n:2d}] PASS {message} ({elapsed:.2f}s)")


def fit_phm_random(dataset, correction="affected", level=0.95):
    corrected = dataset.corrected(correction)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        thetas = [phm.reader_theta(rec.table, rec.reader_id) for rec in corrected.records]
    return phm.fit_random(thetas, level=level)


def test_criterion_01_lehmann_auc_identity():
    t0 = time.time()
    worst = 0.0
    for theta in (0.05, 0.1, 0.25, 0.5, 1.0, 2.0):
        curve = sm.sroc_curve(theta, 10001)
        area = math.fsum((x1 - x0) * (y1 + y0) / 2.0
                         for (x0, y0), (x1, y1) in zip(curve, curve[1:]))
        err = abs(area - sm.auc_from_theta(theta))
        worst = max(worst, err)
        assert err < 1e-6, f"theta={theta}: trapezoid error {err:.2e}"
    _report(1, f"trapezoid vs 1/(1+theta), worst |err| = {worst:.2e} < 1e-6", t0, 1.0)


def test_criterion_02_on_curve_exactness():
    t0 = time.time()
    rng = np.random.default_rng(20240817)
    worst = 0.0
    for _ in range(100):
        theta = float(rng.uniform(0.02, 0.98))
        fpr = float(rng.uniform(0.02, 0.98))
        se = fpr**theta
        table = ContingencyTable(tp=se * 100, fp=fpr * 100,
                                 fn=(1 - se) * 100, tn=(1 - fpr) * 100)
        err = abs(sm.reader_theta(table).theta - theta)
        worst = max(worst, err)
        assert err < 1e-12
    _report(2, f"theta recovered on 100 on-curve points, worst |err| = {worst:.2e} < 1e-12",
            t0, 1.0)


def test_criterion_03_dersimonian_laird_hand_oracle():
    t0 = time.time()
    readers = [sm.ReaderTheta(f"r{i}", math.exp(v), 0.04)
               for i, v in enumerate((-2.0, -1.6, -1.2))]
    fit = sm.fit_random(readers)
    assert abs(fit.tau2 - 0.12) < 1e-6
    assert abs(math.log(fit.theta_pooled) - (-1.6)) < 1e-6
    assert abs(fit.se_ln_theta - 0.230940) < 1e-6
    _report(3, "DL worked example: tau2=0.12, pooled ln theta=-1.6, se=0.230940", t0, 1.0)


REML_FIXTURES = [
    [(54, 20, 46, 130), (73, 14, 27, 136), (47, 6, 53, 144), (60, 42, 40, 108)],
    [(79, 22, 21, 128), (65, 15, 35, 135), (59, 27, 41, 123), (72, 52, 28, 98)],
    [(62, 57, 38, 93), (54, 16, 46, 134), (67, 35, 33, 115), (77, 14, 23, 136)],
    [(60, 14, 40, 136), (41, 23, 59, 127), (47, 17, 53, 133), (65, 33, 35, 117)],
    [(70, 41, 30, 109), (73, 13, 27, 137), (74, 36, 26, 114), (60, 28, 40, 122)],
]


def _grid_search_reml_max(dataset):
    """Brute-force REML maximum over (sd_A, sd_B, rho) at resolution 0.01,
    written straight from the model definition (independent of the engine)."""
    ys, cs = zip(*[logit_pair(r.table) for r in dataset.corrected("affected").records])
    y1 = np.array([y[0] for y in ys])
    y2 = np.array([y[1] for y in ys])
    c1 = np.array([c[0] for c in cs])
    c2 = np.array([c[1] for c in cs])
    k = len(y1)
    sds = np.arange(1, 201) * 0.01      # 0.01 .. 2.00
    rhos = np.arange(-95, 96) * 0.01    # -0.95 .. 0.95
    sb_g, rho_g = np.meshgrid(sds, rhos, indexing="ij")
    sb_f = sb_g.ravel()
    rho_f = rho_g.ravel()
    b_f = sb_f**2
    const = (2 * k - 2) * math.log(2 * math.pi)
    best = -np.inf
    for sa in sds:  # chunk over the sd_A axis to bound memory
        a = sa * sa
        c12 = rho_f * sa * sb_f
        ld = np.zeros_like(b_f)
        w11 = np.zeros_like(b_f)
        w12 = np.zeros_like(b_f)
        w22 = np.zeros_like(b_f)
        wy1 = np.zeros_like(b_f)
        wy2 = np.zeros_like(b_f)
        for i in range(k):
            v11 = a + c1[i]
            v22 = b_f + c2[i]
            det = v11 * v22 - c12 * c12
            ld += np.log(det)
            w11 += v22 / det
            w12 += -c12 / det
            w22 += v11 / det
            wy1 += (v22 * y1[i] - c12 * y2[i]) / det
            wy2 += (-c12 * y1[i] + v11 * y2[i]) / det
        det_sw = w11 * w22 - w12 * w12
        mu1 = (w22 * wy1 - w12 * wy2) / det_sw
        mu2 = (w11 * wy2 - w12 * wy1) / det_sw
        quad = np.zeros_like(b_f)
        for i in range(k):
            v11 = a + c1[i]
            v22 = b_f + c2[i]
            det = v11 * v22 - c12 * c12
            r1 = y1[i] - mu1
            r2 = y2[i] - mu2
            quad += (v22 * r1 * r1 - 2 * c12 * r1 * r2 + v11 * r2 * r2) / det
        ll = -0.5 * (const + ld + np.log(det_sw) + quad)
        best = max(best, float(ll.max()))
    return best


def test_criterion_04_reml_brute_force_equivalence():
    t0 = time.time()
    worst = 0.0
    for idx, tables in enumerate(REML_FIXTURES):
        ds = StudyDataset(tuple(ReaderRecord(f"r{i}", ContingencyTable(*t))
                                for i, t in enumerate(tables)), label=f"fixture{idx}")
        fit = sm.fit_reml(ds)
        grid_max = _grid_search_reml_max(ds)
        diff = abs(fit.loglik - grid_max)
        worst = max(worst, diff)
        assert diff < 1e-3, f"fixture {idx}: |engine - grid| = {diff:.2e}"
    _report(4, f"REML within 1e-3 of 7.6M-point grid max on 5 fixtures, "
               f"worst |diff| = {worst:.2e}", t0, 120.0)


def test_criterion_05_phm_coverage():
    t0 = time.time()
    cfg = SimConfig(n_readers=10, n_diseased=200, n_healthy=200, theta_true=0.25,
                    tau=0.2, fpr_logit_mean=-1.734601, fpr_logit_sd=0.5, seed=123)
    rep = coverage_experiment(cfg, n_sims=500, engine="phm", effects_mode="random",
                              level=0.95)
    assert rep.n_failed == 0
    assert 0.91 <= rep.coverage <= 0.99, f"coverage {rep.coverage:.4f} outside [0.91, 0.99]"
    _report(5, f"95% CI coverage of true theta = {rep.coverage:.3f} in [0.91, 0.99] "
               f"(500 sims, k=10, 200+200)", t0, 60.0)


def test_criterion_06_jensen_gap():
    t0 = time.time()
    rng = np.random.default_rng(6)
    for trial in range(50):
        theta = float(rng.uniform(0.05, 0.9))
        k = int(rng.integers(3, 9))
        fprs = np.sort(rng.uniform(0.02, 0.95, size=k))
        while np.min(np.diff(fprs)) < 1e-3:  # distinct operating points
            fprs = np.sort(rng.uniform(0.02, 0.95, size=k))
        records = []
        for i, fpr in enumerate(fprs):
            se = fpr**theta
            records.append(ReaderRecord(
                reader_id=f"r{i}",
                table=ContingencyTable(tp=se * 1000, fp=fpr * 1000,
                                       fn=(1 - se) * 1000, tn=(1 - fpr) * 1000)))
        ds = StudyDataset(tuple(records), label=f"jensen{trial}")
        fit = fit_phm_random(ds, correction="none")
        point = sm.pooled_point(list(ds.records))
        mean_fpr = 1.0 - point.mean_sp
        curve_value = mean_fpr**fit.theta_pooled
        assert point.mean_se < curve_value, (
            f"trial {trial}: pooled point not strictly below the fitted curve")
    # two-reader closed form: readers at FPR 0.04 and 0.64 on the theta=0.5 curve
    ds2 = StudyDataset(tuple(
        ReaderRecord(f"r{i}", ContingencyTable(tp=f**0.5 * 1000, fp=f * 1000,
                                               fn=(1 - f**0.5) * 1000, tn=(1 - f) * 1000))
        for i, f in enumerate((0.04, 0.64))), label="pair")
    fit2 = fit_phm_random(ds2, correction="none")
    point2 = sm.pooled_point(list(ds2.records))
    gap = (1.0 - point2.mean_sp)**fit2.theta_pooled - point2.mean_se
    assert abs(gap - 0.083) < 1e-3
    _report(6, f"pooled point strictly inside the SROC curve in 50/50 configs; "
               f"two-reader gap = {gap:.6f}", t0, 5.0)


def test_criterion_07_reader_count_widens_interval():
    t0 = time.time()
    wins = 0
    n_pairs = 200
    for r in range(n_pairs):
        seed = 7_000_000 + r
        width = {}
        for k in (4, 22):
            cfg = SimConfig(n_readers=k, n_diseased=60, n_healthy=360, theta_true=0.25,
                            tau=0.2, fpr_logit_mean=-1.734601, fpr_logit_sd=0.4,
                            seed=seed)
            fit = fit_phm_random(generate(cfg))
            width[k] = fit.auc_ci[1] - fit.auc_ci[0]
        if width[4] > width[22]:
            wins += 1
    assert wins >= 0.95 * n_pairs, f"k=4 wider in only {wins}/{n_pairs} pairs"
    _report(7, f"AUC CI wider at k=4 than k=22 in {wins}/{n_pairs} paired replicates "
               f"(60 positive cases each)", t0, 60.0)


def test_criterion_08_cross_engine_agreement():
    t0 = time.time()
    diffs = []
    for r in range(20):
        cfg = SimConfig(n_readers=50, n_diseased=500, n_healthy=500, theta_true=0.25,
                        tau=0.0, fpr_logit_mean=-1.734601, fpr_logit_sd=0.9,
                        seed=8_000_000 + r)
        ds = generate(cfg)
        phm_fit = fit_phm_random(ds)
        biv_fit = sm.fit_reml(ds)
        diffs.append(abs(sm.bivariate_auc(biv_fit) - phm_fit.auc))
    mean_diff = sum(diffs) / len(diffs)
    assert mean_diff < 0.02, f"mean |bivariate - phm| AUC gap {mean_diff:.4f}"
    _report(8, f"mean |bivariate AUC - phm AUC| = {mean_diff:.4f} < 0.02 "
               f"(tau=0, k=50, 500+500, 20 replicates)", t0, 30.0)


def test_criterion_09_published_comparisons():
    t0 = time.time()
    # skin-cancer study: human 0.97 (0.96, 0.98) vs AI 0.94 without an interval
    esteva = compare_auc((0.97, (0.96, 0.98)), (0.94, None))
    assert esteva.relation == RELATION_HUMAN_EXCLUDES_AI
    # knee-MRI study: overlapping intervals
    bien = compare_auc((0.953, (0.937, 0.969)), (0.937, (0.895, 0.980)))
    assert bien.relation == RELATION_OVERLAP
    # chest-x-ray study: AI point inside the human interval
    chexnet = compare_auc((0.73, (0.66, 0.83)), (0.77, None))
    assert chexnet.relation == RELATION_OVERLAP
    _report(9, "three published human-vs-AI comparisons classified as "
               "excludes/overlap/overlap", t0, 1.0)


def test_criterion_10_determinism(tmp_path, fixture_csv_text, capsys):
    t0 = time.time()
    csv_path = tmp_path / "readers.csv"
    csv_path.write_text(fixture_csv_text, encoding="utf-8")

    outputs = []
    for run in ("one", "two"):
        json_out = tmp_path / f"{run}.json"
        svg_out = tmp_path / f"{run}.svg"
        code = main(["analyze", str(csv_path), "--group-column", "group",
                     "--bootstrap-b", "100", "--seed", "9",
                     "--json-out", str(json_out), "--svg-out", str(svg_out)])
        assert code == 0
        outputs.append((json_out.read_bytes(), svg_out.read_bytes()))
    assert outputs[0] == outputs[1], "repeated analyze runs differ"

    coverage_argv = ["coverage", "--n-readers", "6", "--n-diseased", "80",
                     "--n-healthy", "80", "--theta-true", "0.25", "--tau", "0.15",
                     "--fpr-logit-sd", "0.4", "--seed", "9", "--n-sims", "40"]
    assert main(coverage_argv) == 0
    first = capsys.readouterr().out
    assert main(coverage_argv) == 0
    assert capsys.readouterr().out == first, "repeated coverage runs differ"

    # thread-count invariance at the library level (the CLI stays single-threaded)
    cfg = SimConfig(n_readers=6, n_diseased=80, n_healthy=80, theta_true=0.25,
                    tau=0.15, fpr_logit_sd=0.4, seed=9)
    assert coverage_experiment(cfg, n_sims=40, engine="phm", workers=1) == \
        coverage_experiment(cfg, n_sims=40, engine="phm", workers=4)
    ds = generate(cfg)
    boot1 = sm.auc_ci_bootstrap(ds, b=100, seed=9, workers=1)
    boot4 = sm.auc_ci_bootstrap(ds, b=100, seed=9, workers=4)
    assert (boot1.lower, boot1.upper) == (boot4.lower, boot4.upper)
    _report(10, "byte-identical JSON/SVG and coverage output across repeated runs "
                "and 1 vs 4 worker threads", t0, 30.0)
