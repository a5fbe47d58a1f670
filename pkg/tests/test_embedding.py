import numpy as np
import pytest

from prognote import SkipGramEmbedding, build_vocab, cosine
from prognote.text import tokenize


class TestBuildVocab:
    def test_min_count_filters(self):
        assert build_vocab([["a", "b", "a"]], min_count=2) == {"a": 0}

    def test_ordering_by_frequency_then_lexicographic(self):
        vocab = build_vocab([["a", "b", "a"]], min_count=1)
        assert vocab == {"a": 0, "b": 1}
        vocab = build_vocab([["b", "a", "b", "a"]], min_count=1)
        assert vocab == {"a": 0, "b": 1}  # tie broken lexicographically

    def test_min_count_above_max_frequency(self):
        assert build_vocab([["a", "b"]], min_count=5) == {}

    def test_empty_corpus(self):
        assert build_vocab([], min_count=1) == {}

    def test_rejects_nonpositive_min_count(self):
        with pytest.raises(ValueError):
            build_vocab([["a"]], min_count=0)


class TestCosine:
    def test_self_similarity(self, rng):
        v = rng.normal(size=8)
        assert cosine(v, v) == pytest.approx(1.0)

    def test_antisymmetry(self, rng):
        v = rng.normal(size=8)
        assert cosine(v, -v) == pytest.approx(-1.0)

    def test_zero_norm_rule(self, rng):
        assert cosine(np.zeros(4), rng.normal(size=4)) == 0.0


def planted_corpus(seed, n_notes=300):
    """Notes where alpha and beta always co-occur while gamma lives in
    disjoint notes over an unrelated filler vocabulary."""
    rng = np.random.default_rng(seed)
    filler_ab = [f"a{k}" for k in range(20)]
    filler_g = [f"g{k}" for k in range(20)]
    notes = []
    for i in range(n_notes):
        if i % 2 == 0:
            notes.append(["alpha", "beta"] + list(rng.choice(filler_ab, size=4)))
        else:
            notes.append(["gamma"] + list(rng.choice(filler_g, size=5)))
    return notes


class TestTrainSkipGram:
    def test_deterministic_for_fixed_seed(self):
        corpus = planted_corpus(0, n_notes=60)
        a = SkipGramEmbedding(dim=16, min_count=1, epochs=2, seed=7).fit(corpus)
        b = SkipGramEmbedding(dim=16, min_count=1, epochs=2, seed=7).fit(corpus)
        assert np.array_equal(a.in_vectors_, b.in_vectors_)
        assert np.array_equal(a.out_vectors_, b.out_vectors_)

    def test_different_seeds_differ(self):
        corpus = planted_corpus(0, n_notes=60)
        a = SkipGramEmbedding(dim=16, min_count=1, epochs=2, seed=1).fit(corpus)
        b = SkipGramEmbedding(dim=16, min_count=1, epochs=2, seed=2).fit(corpus)
        assert not np.array_equal(a.in_vectors_, b.in_vectors_)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_planted_cooccurrence_signal(self, seed):
        corpus = planted_corpus(seed)
        est = SkipGramEmbedding(dim=24, window=5, negatives=5, min_count=1,
                                epochs=5, seed=seed).fit(corpus)
        planted = cosine(est.token_vector("alpha"), est.token_vector("beta"))
        control = cosine(est.token_vector("alpha"), est.token_vector("gamma"))
        assert planted > control

    def test_empty_vocab_rejected(self):
        with pytest.raises(ValueError, match="no trainable vocabulary"):
            SkipGramEmbedding(min_count=5).fit([["a", "b"]])

    def test_epochs_zero_rejected(self):
        with pytest.raises(ValueError, match="epochs"):
            SkipGramEmbedding(epochs=0, min_count=1).fit([["a", "b"]])

    def test_all_vectors_finite(self):
        est = SkipGramEmbedding(dim=8, min_count=1, epochs=3, seed=0)
        est.fit(planted_corpus(0, n_notes=40))
        assert np.isfinite(est.in_vectors_).all()
        assert np.isfinite(est.out_vectors_).all()

    def test_sklearn_params_roundtrip(self):
        est = SkipGramEmbedding(dim=12, window=3)
        params = est.get_params()
        assert params["dim"] == 12 and params["window"] == 3
        est.set_params(dim=20)
        assert est.dim == 20


class TestEmbedNote:
    @pytest.fixture(scope="class")
    @staticmethod
    def fitted():
        return SkipGramEmbedding(dim=8, min_count=1, epochs=1, seed=3).fit(
            planted_corpus(3, n_notes=30))

    def test_empty_note_is_zero_with_coverage_zero(self, fitted):
        nv = fitted.embed_note([])
        assert np.array_equal(nv.values, np.zeros(8))
        assert nv.coverage == 0.0

    def test_all_oov_note_is_zero(self, fitted):
        nv = fitted.embed_note(["zzz", "qqq"])
        assert np.array_equal(nv.values, np.zeros(8))
        assert nv.coverage == 0.0

    def test_single_token_returns_its_vector(self, fitted):
        nv = fitted.embed_note(["alpha"])
        assert np.array_equal(nv.values, fitted.token_vector("alpha"))
        assert nv.coverage == 1.0

    def test_two_tokens_average_elementwise(self, fitted):
        nv = fitted.embed_note(["alpha", "beta"])
        expected = (fitted.token_vector("alpha") + fitted.token_vector("beta")) / 2.0
        np.testing.assert_allclose(nv.values, expected, atol=1e-15)

    def test_oov_skipped_in_mean_and_coverage(self, fitted):
        nv = fitted.embed_note(["alpha", "zzz", "beta", "qqq"])
        expected = (fitted.token_vector("alpha") + fitted.token_vector("beta")) / 2.0
        np.testing.assert_allclose(nv.values, expected, atol=1e-15)
        assert nv.coverage == 0.5

    def test_mean_norm_bounded_by_max_token_norm(self, fitted, rng):
        tokens = ["alpha", "beta", "gamma", "a0", "g0"]
        nv = fitted.embed_note(tokens)
        max_norm = max(np.linalg.norm(fitted.token_vector(t)) for t in tokens)
        assert np.linalg.norm(nv.values) <= max_norm + 1e-12

    def test_accepts_tokenized_note(self, fitted):
        note = tokenize("alpha beta")
        nv = fitted.embed_note(note)
        assert nv.coverage == 1.0

    def test_transform_stacks_note_vectors(self, fitted):
        out = fitted.transform([["alpha"], ["beta"]])
        assert out.shape == (2, 8)
        assert np.array_equal(out[0], fitted.token_vector("alpha"))


def test_synonym_collapse_gives_identical_note_vectors():
    """Two notes that normalize to the same concept sequence embed identically."""
    from prognote import ControlledDictionary, normalize_text

    d = ControlledDictionary.from_pairs([
        ("sob", "dyspnea"), ("short of breath", "dyspnea"), ("c/o", "complains_of"),
    ])
    corpus = [normalize_text(t, d) for t in
              ["pt c/o sob today", "dyspnea again", "resting well today"] * 8]
    est = SkipGramEmbedding(dim=6, min_count=1, epochs=1, seed=0).fit(corpus)
    a = est.embed_note(normalize_text("pt c/o SOB today", d))
    b = est.embed_note(normalize_text("pt c/o short of breath today", d))
    assert np.array_equal(a.values, b.values)
    assert a.coverage == b.coverage
