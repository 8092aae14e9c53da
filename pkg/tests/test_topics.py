import itertools

import numpy as np
import pytest

from emocascade.exceptions import InvalidInput
from emocascade.topics import (
    Corpus,
    LDATopics,
    TopicModel,
    doc_topics,
    fit_lda,
    perplexity,
    preprocess,
    select_k,
)


def planted(K, n_docs=200, length=60, words_per_topic=20, seed=0, mixed=False):
    """Disjoint-vocabulary corpus; returns token lists and the true topic of each token."""
    rng = np.random.default_rng(seed)
    docs, truth = [], []
    for _ in range(n_docs):
        theta = rng.dirichlet(np.full(K, 0.1)) if mixed else np.eye(K)[rng.integers(K)]
        z = rng.choice(K, size=length, p=theta)
        docs.append([f"t{k}w{rng.integers(words_per_topic)}" for k in z])
        truth.append(z)
    return docs, truth


def best_match_accuracy(model, corpus, docs, truth):
    true_z = np.concatenate(truth)
    index = corpus.word_index
    flat = [t for d in docs for t in d]
    assert len(flat) == len(model.assignments)
    assert all(t in index for t in flat)
    K = model.K
    best = 0.0
    for perm in itertools.permutations(range(K)):
        best = max(best, float(np.mean(np.array(perm)[model.assignments] == true_z)))
    return best


def test_preprocess_examples():
    with pytest.raises(InvalidInput):
        preprocess([["happy", "sad"], ["sad"]], lexicon={"happy", "sad"})
    docs = [["common"] for _ in range(2000)]
    docs[0] = ["common", "rare"]
    c = preprocess(docs, min_doc_freq=0.001)
    assert "rare" not in c.vocabulary and c.vocabulary == ["common"]
    docs = [["a", "b"], ["b", "c"], ["c", "a"]]
    c = preprocess(docs, lexicon={"x"}, min_doc_freq=0.001)
    assert [[c.vocabulary[i] for i in d] for d in c.documents] == docs
    assert c.doc_freq == {"a": 2, "b": 2, "c": 2}


def test_preprocess_flags_empty_documents():
    c = preprocess([["a", "joy"], ["joy"], ["a"]], lexicon={"joy"})
    assert c.empty == [1]
    assert len(c.documents) == 3


def test_k1_gives_unit_distribution():
    docs, _ = planted(2, n_docs=20)
    c = preprocess(docs)
    m = fit_lda(c, 1, iterations=5)
    np.testing.assert_allclose(doc_topics(m, docs[:5]), 1.0)


def test_fit_errors_and_invariants():
    c = preprocess([["a", "b"]])
    with pytest.raises(InvalidInput):
        fit_lda(c, 3, iterations=5)
    with pytest.raises(InvalidInput):
        fit_lda(c, 1, iterations=0)
    docs, _ = planted(3, n_docs=50)
    c = preprocess(docs)
    m = fit_lda(c, 3, iterations=20, seed=1)
    np.testing.assert_allclose(m.phi.sum(axis=1), 1.0, atol=1e-8)
    assert (m.phi >= 0).all()
    assert m.doc_topic_counts.sum() == c.n_tokens
    np.testing.assert_array_equal(m.doc_topic_counts.sum(axis=1), [len(d) for d in c.documents])


def test_seed_determinism():
    docs, _ = planted(3, n_docs=60)
    c = preprocess(docs)
    a = fit_lda(c, 3, iterations=30, seed=5)
    b = fit_lda(c, 3, iterations=30, seed=5)
    assert (a.assignments == b.assignments).all() and (a.phi == b.phi).all()
    assert (doc_topics(a, docs[:10], seed=2) == doc_topics(b, docs[:10], seed=2)).all()


def test_planted_two_topic_recovery():
    docs, truth = planted(2, mixed=True, seed=3)
    c = preprocess(docs)
    m = fit_lda(c, 2, iterations=200, seed=0, alpha_prior=0.1)
    assert best_match_accuracy(m, c, docs, truth) >= 0.9


def test_uniform_model_perplexity_is_vocabulary_size():
    vocab = [f"w{i}" for i in range(37)]
    rng = np.random.default_rng(0)
    docs = [list(rng.choice(vocab, 30)) for _ in range(10)]
    for K in (1, 4):
        m = TopicModel.uniform(vocab, K)
        assert perplexity(m, docs) == pytest.approx(37, rel=1e-12)
    with pytest.raises(InvalidInput):
        perplexity(TopicModel.uniform(vocab), [["zzz"], []])


def test_perplexity_true_k_beats_one_and_is_at_least_one():
    docs, _ = planted(4, mixed=True, seed=4)
    c = preprocess(docs)
    m4 = fit_lda(c, 4, iterations=150, seed=0)
    m1 = fit_lda(c, 1, iterations=20, seed=0)
    p4 = perplexity(m4, c)
    assert p4 < perplexity(m1, c)
    assert p4 >= 1.0


def test_select_k():
    docs, _ = planted(3, mixed=True, seed=6)
    c = preprocess(docs)
    best, curve = select_k(c, [1, 3], seed=0, iterations=150)
    assert best == 3 and set(curve) == {1, 3}
    best, curve = select_k(c, [2], seed=0, iterations=10)
    assert best == 2


def test_doc_topics_oov_and_planted_document():
    docs, _ = planted(3, n_docs=150, seed=7)
    c = preprocess(docs)
    m = fit_lda(c, 3, iterations=150, seed=0)
    np.testing.assert_allclose(doc_topics(m, [["nothing", "known"]]), [[1 / 3] * 3])
    rng = np.random.default_rng(1)
    # long enough that the default prior (50/K) does not dominate
    one = [[f"t1w{rng.integers(20)}" for _ in range(300)]]
    theta = doc_topics(m, one)
    assert theta.max() >= 0.8
    np.testing.assert_allclose(theta.sum(axis=1), 1.0, atol=1e-12)


def test_model_roundtrip(tmp_path):
    docs, _ = planted(2, n_docs=30)
    m = fit_lda(preprocess(docs), 2, iterations=10)
    m.save(tmp_path / "model")
    back = TopicModel.load(tmp_path / "model")
    assert back.vocabulary == m.vocabulary and (back.phi == m.phi).all()
    assert (back.K, back.alpha, back.beta) == (m.K, m.alpha, m.beta)
    np.testing.assert_array_equal(doc_topics(back, docs[:3]), doc_topics(m, docs[:3]))


def test_estimator_interface():
    docs, _ = planted(2, n_docs=40)
    est = LDATopics(n_topics=2, lexicon={"t0w0"}, iterations=20, min_doc_freq=0.0)
    out = est.fit_transform(docs)
    assert out.shape == (40, 2)
    assert "t0w0" not in est.model_.vocabulary
    assert list(est.get_feature_names_out()) == ["topic_1", "topic_2"]
    est = LDATopics(n_topics=[1, 2], iterations=40).fit(docs)
    assert set(est.perplexity_curve_) == {1, 2}
    assert isinstance(est.corpus_, Corpus)
