import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from emocascade.emotions import EMOTION_INDEX, EMOTIONS, emotion_vector
from emocascade.exceptions import DegenerateColumn, InvalidInput
from emocascade.lexicon import Lexicon, LexiconEntry
from emocascade.scoring import (
    Document,
    EmotionScorer,
    ModifierDictionaries,
    correlation_matrix,
    degree_of_emotion,
    score_document,
    score_documents,
    score_tokens,
    standardize,
)

JOY = EMOTION_INDEX["joy"]
LEX = Lexicon([LexiconEntry("happy", emotion_vector(joy=0.8)),
               LexiconEntry("glad", emotion_vector(joy=0.5)),
               LexiconEntry("pleased", emotion_vector(joy=0.3)),
               LexiconEntry("afraid", emotion_vector(anxiety=0.6, sadness=0.2))])
MODS = ModifierDictionaries({"not", "never"}, {"very": 1.5, "slightly": 0.5, "most": 2.0})


def test_negation_and_degree_example():
    out = score_document(Document("d", tokens=["not", "very", "happy"]), LEX, MODS)
    assert out[JOY] == pytest.approx(-1.2)


def test_no_emotion_words_gives_zero():
    assert not score_document(Document("d", tokens=["the", "cat"]), LEX, MODS).any()
    assert not score_document(Document("d", tokens=[]), LEX, MODS).any()


def test_additive_plain_words():
    assert score_document(["glad", "pleased"], LEX, MODS)[JOY] == pytest.approx(0.8)


def test_window_limits_and_start_of_document():
    # 'not' sits four tokens before 'happy', outside a window of three
    assert score_document(["not", "a", "b", "c", "happy"], LEX, MODS)[JOY] == pytest.approx(0.8)
    assert score_document(["not", "happy"], LEX, MODS)[JOY] == pytest.approx(-0.8)
    assert score_document(["not", "happy"], LEX, MODS, window=0)[JOY] == pytest.approx(0.8)


def test_degree_values_are_averaged():
    out = score_document(["very", "slightly", "happy"], LEX, MODS)
    assert out[JOY] == pytest.approx(0.8 * 1.0)
    out = score_document(["most", "very", "happy"], LEX, MODS)
    assert out[JOY] == pytest.approx(0.8 * 1.75)


def test_modifier_shared_by_consecutive_emotion_words():
    # 'not' precedes both emotion words within their windows
    out = score_document(["not", "happy", "glad"], LEX, MODS)
    assert out[JOY] == pytest.approx(-0.8 - 0.5)


def test_modifier_dictionaries_validation(tmp_path):
    with pytest.raises(InvalidInput):
        ModifierDictionaries({"x"}, {"x": 1.0})
    with pytest.raises(InvalidInput):
        ModifierDictionaries(set(), {"x": 0.0})
    (tmp_path / "neg.txt").write_text("not\nnever\n")
    (tmp_path / "deg.tsv").write_text("very\t1.5\n")
    m = ModifierDictionaries.load(tmp_path / "neg.txt", tmp_path / "deg.tsv")
    assert m.negations == {"not", "never"} and m.degrees == {"very": 1.5}
    assert ModifierDictionaries({"happy"}, {}).conflicts(LEX.words) == ["happy"]


def test_conflicting_modifier_counts_as_emotion_word():
    mods = ModifierDictionaries({"glad"}, {})
    assert score_document(["glad", "happy"], LEX, mods)[JOY] == pytest.approx(1.3)


# -- property checks against the brute-force oracle ---------------------------------

VOCAB = ["happy", "glad", "pleased", "afraid", "not", "never", "very", "slightly", "most",
         "the", "cat", "sat"]
token_lists = st.lists(st.sampled_from(VOCAB), max_size=40)


@settings(max_examples=200)
@given(token_lists, st.integers(0, 5))
def test_matches_oracle(tokens, window):
    table = LEX.as_dict()
    want = oracles.eq3_score(tokens, table, MODS.negations, MODS.degrees, window)
    np.testing.assert_allclose(score_tokens(tokens, table, MODS, window), want, atol=1e-12)


@settings(max_examples=100)
@given(token_lists, token_lists)
def test_additivity_with_padding(a, b):
    pad = ["the"] * 3
    joined = score_document(a + pad + b, LEX, MODS)
    np.testing.assert_allclose(joined, score_document(a, LEX, MODS)
                               + score_document(pad + b, LEX, MODS), atol=1e-12)


# -- standardization and aggregates -------------------------------------------------

def test_standardize_example():
    z = standardize(np.array([[1.0], [2.0], [3.0]]), names=("x",))
    np.testing.assert_allclose(z[:, 0], [-1.22474, 0, 1.22474], atol=1e-5)


def test_standardize_constant_column_named():
    m = np.column_stack([np.arange(3.0), np.full(3, 5.0)] + [np.arange(3.0)] * 6)
    with pytest.raises(DegenerateColumn) as info:
        standardize(m)
    assert info.value.column == "anxiety"


def test_standardize_needs_two_rows():
    with pytest.raises(InvalidInput):
        standardize(np.ones((1, 8)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_standardize_moments(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(3, 2, size=(50, 8)) * rng.uniform(0.1, 100)
    Z = standardize(X)
    np.testing.assert_allclose(Z.mean(axis=0), 0, atol=1e-8)
    np.testing.assert_allclose(Z.std(axis=0), 1, atol=1e-8)


def test_standardize_independent_of_row_order():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 8)) * 1e6 + 1e9
    perm = rng.permutation(200)
    _, m1, s1 = standardize(X, return_stats=True)
    _, m2, s2 = standardize(X[perm], return_stats=True)
    assert (m1 == m2).all() and (s1 == s2).all()


def test_degree_of_emotion():
    raw = np.zeros((3, 8))
    raw[:, 0] = [0.5, 1.0, 1.5]
    raw[:, 4] = [0.5, 1.0, 1.5]
    np.testing.assert_allclose(degree_of_emotion(raw), [-1.22474, 0, 1.22474], atol=1e-5)
    with pytest.raises(DegenerateColumn):
        degree_of_emotion(np.zeros((4, 8)))
    single = np.zeros((3, 8))
    single[:, 2] = [2.0, 0.0, 7.0]
    np.testing.assert_allclose(degree_of_emotion(single),
                               standardize(single[:, [2]], names=("s",))[:, 0])


def test_correlation_examples():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(30, 8))
    m[:, 1] = m[:, 0]
    m[:, 3] = -m[:, 2]
    C = correlation_matrix(m)
    assert C[0, 1] == pytest.approx(1.0)
    assert C[2, 3] == pytest.approx(-1.0)
    assert (C == C.T).all()
    np.testing.assert_allclose(np.diag(C), 1.0)
    assert np.linalg.eigvalsh(C).min() >= -1e-8
    x = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 4.0]])
    assert correlation_matrix(x, names=("x", "y"))[0, 1] == pytest.approx(0.98198, abs=1e-5)
    np.testing.assert_allclose(correlation_matrix(m), np.corrcoef(m.T), atol=1e-12)


def test_document_record_roundtrip():
    rec = {"id": 7, "publisher_id": "p1", "tokens": ["a", "b"], "n_images": 2, "topic": "x"}
    d = Document.from_record(rec)
    assert d.id == "7" and d.char_length == 2 and d.extra == {"topic": "x"}
    assert Document.from_record(d.to_record()) == d
    with pytest.raises(InvalidInput):
        Document("x", n_images=-1)


def test_scorer_estimator():
    lex = Lexicon(LexiconEntry(e, emotion_vector(**{e: 0.5 + 0.05 * k}))
                  for k, e in enumerate(EMOTIONS))
    rng = np.random.default_rng(2)
    docs = [Document(str(i), tokens=list(rng.choice(list(EMOTIONS) + ["not", "x"], 12)))
            for i in range(40)]
    sc = EmotionScorer(lex, MODS, window=3)
    assert sc.get_params() == {"lexicon": lex, "modifiers": MODS, "window": 3}
    z = sc.fit_transform(docs)
    np.testing.assert_allclose(z, standardize(score_documents(docs, lex, MODS)), atol=1e-12)
    assert list(sc.get_feature_names_out()) == [f"{e}_z" for e in EMOTIONS]
    with pytest.raises(DegenerateColumn):
        EmotionScorer(LEX, MODS).fit(docs)
