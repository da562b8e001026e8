"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (visible even
without ``-s``) and then asserts, so the summary survives a failing run.
"""

import json
import math
import time

import numpy as np
import pytest

from memeaffect.classifier import TrainConfig, fit, loss_and_gradient, predict
from memeaffect.cli import main
from memeaffect.corpus import distribution_report, kfold, load_dataset
from memeaffect.evaluation import cross_validate, randolph_kappa, score
from memeaffect.fixtures import generate_fixtures, table1_dataset
from memeaffect.image import PixelGrid, colourfulness, hsv_means, pad_scores, rms_contrast
from memeaffect.image import load_emotion_table
from memeaffect.pipeline import PipelineConfig, Resources
from memeaffect.rebalance import class_weights, smote
from oracles import accuracy_bf, knn_bf, macro_f1_bf, point_on_segment, randolph_kappa_bf


@pytest.fixture
def report(capsys):
    def _report(n, title, ok, detail=""):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {title}" + (f" [{detail}]" if detail else ""))
        assert ok, f"criterion {n} failed: {detail}"

    return _report


def test_01_metric_oracle_equivalence(report):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(1, 80))
        gold, pred = rng.integers(0, k, n), rng.integers(0, k, n)
        m = score(gold, pred, k)
        worst = max(worst, abs(m.accuracy - accuracy_bf(gold, pred)))
        worst = max(worst, abs(m.macro_f1 - macro_f1_bf(gold.tolist(), pred.tolist(), k)))
    for _ in range(200):
        k, raters = int(rng.integers(2, 6)), int(rng.integers(2, 7))
        r = rng.integers(0, k, size=(int(rng.integers(1, 60)), raters))
        worst = max(worst, abs(randolph_kappa(r, k) - randolph_kappa_bf(r.tolist(), k)))
    elapsed = time.perf_counter() - start
    report(1, "accuracy / macro-F1 / kappa match brute-force oracles",
           worst <= 1e-12 and elapsed < 10, f"max |diff| {worst:.1e}, {elapsed:.2f} s")


def test_02_gradient_check(report):
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    eps = 1e-5
    worst = 0.0
    for _ in range(20):
        n, d, k = int(rng.integers(5, 51)), int(rng.integers(4, 21)), int(rng.integers(2, 5))
        X = rng.normal(size=(n, d))
        y = rng.integers(0, k, n)
        w = rng.uniform(0.1, 3.0, n)
        lam = float(rng.uniform(0, 1))
        W = rng.normal(scale=0.5, size=(k, d))
        b = rng.normal(size=k)
        _, gW, gb = loss_and_gradient(W, b, X, y, w, lam)
        params = [W, b]
        analytic = [gW, gb]
        num = []
        for P in params:
            G = np.zeros_like(P)
            for idx in np.ndindex(P.shape):
                old = P[idx]
                P[idx] = old + eps
                hi = loss_and_gradient(W, b, X, y, w, lam, check=False)[0]
                P[idx] = old - eps
                lo = loss_and_gradient(W, b, X, y, w, lam, check=False)[0]
                P[idx] = old
                G[idx] = (hi - lo) / (2 * eps)
            num.append(G)
        a = np.concatenate([g.ravel() for g in analytic])
        f = np.concatenate([g.ravel() for g in num])
        # norm-wise relative error; per-entry ratios are meaningless near zero
        worst = max(worst, float(np.max(np.abs(a - f)) / max(np.max(np.abs(f)), 1e-12)))
    elapsed = time.perf_counter() - start
    report(2, "analytic gradient vs central differences (eps=1e-5)",
           worst < 1e-5 and elapsed < 10, f"max rel err {worst:.2e}, {elapsed:.2f} s")


def test_03_trainer_sanity(report):
    rng = np.random.default_rng(303)
    centres = np.array([[0.0, 4.0], [-4.0, -2.0], [4.0, -2.0]])
    X = np.vstack([rng.normal(c, 0.7, size=(100, 2)) for c in centres])
    y = np.repeat(np.arange(3), 100)
    start = time.perf_counter()
    m = fit(X, y, TrainConfig(lam=1e-3))
    elapsed = time.perf_counter() - start
    acc = float(np.mean(predict(m, X) == y))
    monotone = all(b <= a for a, b in zip(m.trace, m.trace[1:]))
    report(3, "3-blob trainer accuracy and monotone loss trace",
           acc >= 0.95 and monotone and elapsed < 5, f"acc {acc:.3f}, monotone {monotone}, {elapsed:.2f} s")


def test_04_colour_math(report):
    checks = {
        "gray colourfulness == 0": colourfulness(PixelGrid.solid((90, 90, 90))) == 0.0,
        "red HSV == (0,1,1)": hsv_means(PixelGrid.solid((255, 0, 0))) == (0.0, 1.0, 1.0),
        "red colourfulness": abs(colourfulness(PixelGrid.solid((255, 0, 0))) - 0.3 * math.sqrt(255**2 + 127.5**2)) <= 1e-9,
        "constant contrast == 0": rms_contrast(PixelGrid.solid((12, 200, 77))) == 0.0,
        "PAD(1,1)": max(abs(a - b) for a, b in zip(pad_scores(1.0, 1.0), (0.91, 0.29, 1.08))) <= 1e-12,
    }
    failed = [k for k, ok in checks.items() if not ok]
    report(4, "colour math exactness", not failed, "failed: " + ", ".join(failed) if failed else "5/5 checks")


def test_05_table1_arithmetic(report):
    d = table1_dataset(seed=0)
    rep = distribution_report(d)
    neg = rep.by_level()["sentiment"]["negative"]
    w = class_weights(d.labels("sentiment"), 3)
    ok = neg == {"count": 631, "pct": 9.01} and abs(w[0] - 3.6983) <= 1e-3
    report(5, "Table-1 sentiment: negative 9.01 % and weight 3.6983",
           ok, f"negative {neg}, weight {w[0]:.4f}")


def test_06_smote_properties(report):
    rng = np.random.default_rng(606)
    X = np.vstack([rng.normal(0, 1, size=(10, 2)), rng.normal(4, 1, size=(200, 2))])
    y = np.array([1] * 10 + [0] * 200)
    X_before = X.copy()
    start = time.perf_counter()
    Xr, yr = smote(X, y, k_neighbors=5, seed=6)
    minority = X[:10].tolist()
    neighbours = {i: knn_bf(minority, i, 5) for i in range(10)}
    off = sum(
        not any(point_on_segment(p, minority[i], minority[j]) for i in range(10) for j in neighbours[i])
        for p in Xr[len(X):]
    )
    elapsed = time.perf_counter() - start
    counts = np.bincount(yr).tolist()
    preserved = Xr[: len(X)].tobytes() == X_before.tobytes() and X.tobytes() == X_before.tobytes()
    report(6, "SMOTE balance, kNN segments and preserved originals",
           counts == [200, 200] and off == 0 and preserved and elapsed < 5,
           f"counts {counts}, off-segment {off}, preserved {preserved}, {elapsed:.2f} s")


def test_07_kappa_behaviour(report):
    perfect = randolph_kappa(np.tile(np.array([[0], [1], [2], [1]]), (1, 4)), 3)
    chance = randolph_kappa(np.random.default_rng(707).integers(0, 3, size=(10000, 4)), 3)
    report(7, "kappa: perfect agreement and chance-level raters",
           perfect == 1.0 and abs(chance) < 0.05, f"perfect {perfect}, random {chance:+.4f}")


def test_08_leakage_guard(report, tmp_path):
    generate_fixtures(tmp_path, n_samples=100, seed=8)
    d = load_dataset(tmp_path / "corpus.csv", tmp_path / "images")
    res = Resources(emotions=load_emotion_table(tmp_path / "emotions.csv"))
    cfg = PipelineConfig(image=True, emotion=True, balanced=True, augment=True, smote=True)
    folds = kfold(d, 10, stratify_on="sentiment", seed=8)
    calls, violations = [], []

    def hook(fold, stage, indices):
        calls.append((fold, stage))
        train = set(folds[fold][0].tolist())
        bad = set(np.asarray(indices).tolist()) - train
        if bad:
            violations.append((fold, stage, sorted(bad)))

    cross_validate(d, "sentiment", cfg, k=10, seed=8, resources=res, hook=hook)
    stages = sorted({s for _, s in calls})
    covered = len({f for f, _ in calls}) == 10 and len(stages) == 5
    report(8, "no fitted statistic sees test-fold rows",
           not violations and covered, f"{len(calls)} fits over stages {stages}, {len(violations)} violations")


def test_09_end_to_end_ablation(report, tmp_path, capsys):
    start = time.perf_counter()
    fx = tmp_path / "fx"
    codes = [main(["gen-fixtures", "--out", str(fx), "--seed", "0"])]
    outs = []
    for i in range(2):
        out = tmp_path / f"ablate{i}.json"
        codes.append(main(["ablate", "--data", str(fx / "corpus.csv"), "--images", str(fx / "images"),
                           "--emotions", str(fx / "emotions.csv"), "--seed", "0", "--out", str(out)]))
        outs.append(out.read_bytes() if out.exists() else b"")
    capsys.readouterr()
    elapsed = time.perf_counter() - start
    rows = json.loads(outs[0])["rows"] if outs[0] else []
    full = len(rows) == 8 and all(len(r["scores"]) == 5 for r in rows)
    same = outs[0] == outs[1]
    report(9, "gen-fixtures + ablate: 8 rows x 5 categories, deterministic",
           codes == [0, 0, 0] and full and same and elapsed < 60,
           f"{len(rows)} rows, identical {same}, {elapsed:.1f} s for two runs")


def test_10_cv_determinism(report, fixture_dir, tmp_path, capsys):
    blobs = []
    for i in range(2):
        out = tmp_path / f"cv{i}.json"
        code = main(["cv", "--data", str(fixture_dir / "corpus.csv"), "--images", str(fixture_dir / "images"),
                     "--emotions", str(fixture_dir / "emotions.csv"), "--seed", "7", "--out", str(out)])
        blobs.append((code, out.read_bytes() + out.with_suffix(".txt").read_bytes() if code == 0 else b""))
    capsys.readouterr()
    ok = blobs[0][0] == blobs[1][0] == 0 and blobs[0][1] == blobs[1][1] and blobs[0][1]
    report(10, "repeated `cv --seed 7` reports are byte-identical", bool(ok), f"{len(blobs[0][1])} bytes")
