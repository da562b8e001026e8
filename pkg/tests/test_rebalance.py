import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memeaffect.corpus import Sample
from memeaffect.errors import BadK, ClassTooSmall, MissingClass, ValidationError
from memeaffect.rebalance import (
    augment,
    class_weights,
    load_paraphrases,
    nearest_neighbours,
    paraphrase,
    smote,
)
from oracles import knn_bf, point_on_segment


class TestClassWeights:
    def test_table1_sentiment(self):
        y = [0] * 631 + [1] * 2205 + [2] * 4165
        w = class_weights(y, 3)
        assert w == pytest.approx([3.698, 1.058, 0.560], abs=1e-3)
        assert w[0] == pytest.approx(7001 / (3 * 631), abs=1e-12)

    def test_balanced_is_one(self):
        assert class_weights([0, 1, 2, 0, 1, 2], 3).tolist() == [1.0, 1.0, 1.0]

    def test_ninety_ten(self):
        assert class_weights([0] * 90 + [1] * 10, 2) == pytest.approx([0.5556, 5.0], abs=1e-4)

    def test_missing_class(self):
        with pytest.raises(MissingClass):
            class_weights([0, 0, 2], 3)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(1, 50), min_size=2, max_size=5))
    def test_mass_preserved(self, counts):
        y = np.repeat(np.arange(len(counts)), counts)
        w = class_weights(y, len(counts))
        assert float(np.dot(counts, w)) == pytest.approx(len(y), abs=1e-9)
        assert np.all(np.isfinite(w)) and np.all(w > 0)


class TestNearestNeighbours:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        pts = rng.integers(0, 5, size=(60, 2)).astype(float)  # many ties
        got = nearest_neighbours(pts, 4, chunk=7)
        for i in range(len(pts)):
            assert got[i].tolist() == knn_bf(pts.tolist(), i, 4)


class TestSmote:
    def test_pair_on_diagonal(self):
        X = np.array([[0, 0], [1, 1]] + [[5, 5 + i] for i in range(8)], dtype=float)
        y = np.array([1, 1] + [0] * 8)
        Xr, yr = smote(X, y, k_neighbors=5, seed=3)
        syn = Xr[len(X):]
        assert len(syn) == 6 and set(yr[len(X):]) == {1}
        assert np.allclose(syn[:, 0], syn[:, 1]) and syn.min() >= 0 and syn.max() <= 1

    def test_identical_points(self):
        X = np.array([[2.5, -1.0]] * 3 + [[0, 0]] * 7)
        y = np.array([1] * 3 + [0] * 7)
        Xr, _ = smote(X, y, seed=0)
        assert np.array_equal(Xr[len(X):], np.tile([2.5, -1.0], (4, 1)))

    def test_originals_preserved_and_counts_equal(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(40, 3))
        y = np.array([0] * 25 + [1] * 10 + [2] * 5)
        X0 = X.copy()
        Xr, yr = smote(X, y, k_neighbors=3, seed=1)
        assert np.array_equal(X, X0)  # input untouched
        assert np.array_equal(Xr[:40], X) and np.array_equal(yr[:40], y)
        assert np.bincount(yr).tolist() == [25, 25, 25]

    def test_segment_to_knn_brute_force(self):
        rng = np.random.default_rng(2)
        X = np.vstack([rng.normal(size=(12, 2)), rng.normal(3, 1, size=(50, 2))])
        y = np.array([1] * 12 + [0] * 50)
        Xr, _ = smote(X, y, k_neighbors=3, seed=9)
        minority = X[:12].tolist()
        for p in Xr[len(X):]:
            assert any(
                point_on_segment(p, minority[i], minority[j])
                for i in range(12)
                for j in knn_bf(minority, i, 3)
            )

    def test_deterministic(self):
        X = np.random.default_rng(0).normal(size=(20, 2))
        y = np.array([0] * 15 + [1] * 5)
        a, b = smote(X, y, seed=4), smote(X, y, seed=4)
        assert np.array_equal(a[0], b[0])
        assert not np.array_equal(a[0], smote(X, y, seed=5)[0])

    def test_distance_columns(self):
        # neighbours chosen on column 0 only; column 1 is noise
        X = np.array([[0, 100], [1, -100], [10, 0], [0, 0], [0, 1], [0, 2], [0, 3], [0, 4]], dtype=float)
        y = np.array([1, 1, 1, 0, 0, 0, 0, 0])
        Xr, _ = smote(X, y, k_neighbors=1, seed=0, distance_columns=[0])
        for p in Xr[len(X):]:
            assert point_on_segment(p, X[0], X[1]) or point_on_segment(p, X[2], X[1])

    def test_errors(self):
        with pytest.raises(ClassTooSmall):
            smote(np.zeros((4, 2)), np.array([0, 0, 0, 1]))
        with pytest.raises(BadK):
            smote(np.zeros((4, 2)), np.array([0, 0, 1, 1]), k_neighbors=0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 12), st.integers(13, 40), st.integers(1, 6), st.integers(0, 2**31))
    def test_bounding_box(self, n_min, n_maj, k, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n_min + n_maj, 3))
        y = np.array([1] * n_min + [0] * n_maj)
        Xr, yr = smote(X, y, k_neighbors=k, seed=seed)
        assert np.bincount(yr).tolist() == [n_maj, n_maj]
        lo, hi = X[:n_min].min(axis=0), X[:n_min].max(axis=0)
        syn = Xr[len(X):]
        assert np.all(syn >= lo - 1e-12) and np.all(syn <= hi + 1e-12)


def make_samples(texts):
    return [Sample(f"s{i}", t, None, {"sentiment": 2}) for i, t in enumerate(texts)]


class TestParaphrase:
    LEX = {("good",): (("great",),), ("a", "lot"): (("plenty",),), ("a",): (("one",),)}

    def test_longest_match(self):
        out, n = paraphrase(["a", "lot", "of", "good"], self.LEX, 1.0, np.random.default_rng(0))
        assert out == ["plenty", "of", "great"] and n == 2

    def test_p_zero(self):
        out, n = paraphrase(["a", "lot"], self.LEX, 0.0, np.random.default_rng(0))
        assert out == ["a", "lot"] and n == 0

    def test_bundled_lexicon(self):
        lex = load_paraphrases()
        assert lex and all(1 <= len(k) <= 3 for k in lex)
        for key, reps in lex.items():
            assert all(r and r != key for r in reps)
            assert all(t == t.lower() for t in key)


class TestAugment:
    LEX = {("happy",): (("glad",),)}

    def test_p_zero_is_identity(self):
        samples = make_samples(["so happy", "very happy today"])
        dense = np.arange(4.0).reshape(2, 2)
        out = augment(samples, dense, self.LEX, p_replace=0.0, copies=3, seed=0)
        assert list(out.samples) == samples and np.array_equal(out.dense, dense)

    def test_single_replacement(self):
        samples = make_samples(["so happy today", "nothing here"])
        dense = np.array([[0.1, np.pi, -7.25], [1.0, 2.0, 3.0]])
        out = augment(samples, dense, self.LEX, p_replace=1.0, copies=1, seed=0)
        assert len(out.samples) == 3
        new = out.samples[2]
        assert new.id == "s0#aug0" and new.text == "so glad today"
        assert new.labels == samples[0].labels and new.image_ref == samples[0].image_ref
        assert out.dense[2].tobytes() == dense[0].tobytes()
        assert out.source.tolist() == [0, 1, 0]

    def test_deterministic_and_order_independent(self):
        lex = load_paraphrases()
        texts = ["i am very happy and a lot of fun", "good times with my friend", "this is so funny lol"]
        samples = make_samples(texts)
        dense = np.random.default_rng(0).normal(size=(3, 4))
        a = augment(samples, dense, lex, p_replace=0.5, copies=4, seed=11)
        b = augment(samples, dense, lex, p_replace=0.5, copies=4, seed=11)
        assert a.samples == b.samples and np.array_equal(a.dense, b.dense)
        # each sample's copies depend only on (seed, id, copy), not on its position
        rev = augment(samples[::-1], dense[::-1], lex, p_replace=0.5, copies=4, seed=11)
        assert {s.text for s in a.samples} == {s.text for s in rev.samples}

    def test_dense_and_labels_never_altered(self):
        lex = load_paraphrases()
        samples = [Sample(f"x{i}", "good friend very happy", None, {"humour": 1}) for i in range(10)]
        dense = np.random.default_rng(3).normal(size=(10, 5))
        out = augment(samples, dense, lex, p_replace=0.7, copies=2, seed=0)
        for row, src, s in zip(out.dense, out.source, out.samples):
            assert row.tobytes() == dense[src].tobytes()
            assert s.labels == samples[src].labels

    @pytest.mark.parametrize("kwargs", [{"p_replace": 1.5}, {"p_replace": -0.1}, {"copies": -1}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            augment(make_samples(["x"]), np.zeros((1, 1)), {}, **kwargs)
