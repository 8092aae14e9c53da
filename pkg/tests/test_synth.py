import json
from collections import Counter

import numpy as np
import pytest

from emocascade.cascade import build_cascade, group_events, weak_tie_proportion
from emocascade.emotions import EMOTION_INDEX, EMOTIONS
from emocascade.exceptions import InvalidInput
from emocascade.lexicon import nearest_words
from emocascade.scoring import score_documents
from emocascade.stats import DesignMatrix, fit_random_intercept
from emocascade.synth import (
    SynthConfig,
    gen_cascades,
    gen_comments,
    gen_corpus,
    gen_embeddings,
    gen_modifiers,
    gen_users,
    synth_all,
)

SMALL = dict(vocab_size=1500, dim=24, n_clusters=16, n_publishers=10, articles_per_publisher=8,
             n_users=3000, node_cap=2000)


def small(**kw):
    return SynthConfig(**{**SMALL, **kw})


def test_config_validation_and_roundtrip(tmp_path):
    with pytest.raises(InvalidInput):
        SynthConfig(weak_prob=1.5)
    with pytest.raises(InvalidInput):
        SynthConfig(coefficients={"boredom": 1.0})
    with pytest.raises(InvalidInput):
        SynthConfig(seeds_per_cluster=0)
    with pytest.raises(InvalidInput):
        SynthConfig.from_dict({"colour": "red"})
    cfg = small(seed=4)
    (tmp_path / "c.json").write_text(json.dumps(cfg.to_dict()))
    assert SynthConfig.load(tmp_path / "c.json") == cfg
    assert SynthConfig.bundled().n_articles > 0


def test_vocab_too_small():
    with pytest.raises(InvalidInput):
        gen_embeddings(SynthConfig(vocab_size=100, n_clusters=10))


def test_embeddings_deterministic(tmp_path):
    a, b = gen_embeddings(small(seed=9)), gen_embeddings(small(seed=9))
    a.store.save(tmp_path / "a.txt")
    b.store.save(tmp_path / "b.txt")
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
    assert a.basic == b.basic and a.full == b.full
    c = gen_embeddings(small(seed=10))
    assert not np.array_equal(c.store.vectors, a.store.vectors)


def test_radius_zero_members_equal_seed_direction():
    p = gen_embeddings(small(cluster_radius=0.0))
    per = p.store.vectors
    for word, c in list(p.cluster_of.items())[:50]:
        mates = [w for w, k in p.cluster_of.items() if k == c and w != word]
        np.testing.assert_allclose(p.store.vector(word), p.store.vector(mates[0]))
        near = [w for w, _ in nearest_words(p.store, word, len(mates))]
        assert sorted(near) == sorted(mates)
    assert per.shape[1] == 24


def test_planted_lexicon_truth():
    cfg = small()
    p = gen_embeddings(cfg)
    assert len(p.basic) == cfg.n_clusters * cfg.seeds_per_cluster
    assert len(p.members) == cfg.n_clusters * cfg.members_per_cluster
    for w, c in p.cluster_of.items():
        assert int(np.argmax(p.full[w].emotions)) == c % 8


def test_zero_emotion_rate_gives_zero_truth():
    cfg = small(emotion_rate=0.0)
    p = gen_embeddings(cfg)
    corpus = gen_corpus(cfg, p.full)
    assert not corpus.raw.any()
    assert all(t >= 0 for topics in corpus.token_topics for t in topics)


def test_scorer_reproduces_recorded_truth():
    cfg = small(seed=2, emotion_rate=0.2, negation_rate=0.4, degree_rate=0.5)
    p = gen_embeddings(cfg)
    mods = gen_modifiers(cfg)
    corpus = gen_corpus(cfg, p.full, mods)
    got = score_documents(corpus.documents, p.full, mods, window=cfg.window)
    np.testing.assert_allclose(got, corpus.raw, rtol=0, atol=1e-12)
    comments, raw = gen_comments(cfg, corpus.documents, corpus.emotion_profiles, p.full, mods)
    np.testing.assert_allclose(score_documents(comments, p.full, mods), raw, atol=1e-12)
    assert corpus.raw.any() and (corpus.raw < 0).any()


def test_topic_tokens_follow_planted_vocabularies():
    cfg = small(emotion_rate=0.0)
    corpus = gen_corpus(cfg, gen_embeddings(cfg).full)
    for doc, topics in zip(corpus.documents[:20], corpus.token_topics):
        for tok, k in zip(doc.tokens, topics):
            assert tok in corpus.topic_words[k]
    np.testing.assert_allclose(corpus.theta.sum(axis=1), 1.0)


def _cascades(cfg, n_articles=300, z=None):
    users = gen_users(cfg)
    aids = [f"x{i:05d}" for i in range(n_articles)]
    pids = [f"p{i % 30:03d}" for i in range(n_articles)]
    if z is None:
        z = np.random.default_rng(0).normal(size=(n_articles, 8))
    return aids, pids, z, gen_cascades(cfg, aids, pids, z, users=users)


def test_cascades_deterministic_and_valid():
    cfg = small(seed=3)
    aids, _, _, a = _cascades(cfg)
    _, _, _, b = _cascades(cfg)
    assert a.events == b.events and a.friendships == b.friendships
    groups = group_events(a.events)
    assert set(groups) == set(aids)
    for aid, evs in groups.items():
        tree = build_cascade(evs, a.publish_times[aid])
        assert tree.size == len(evs)
    assert not a.truncated.any()


def test_zero_hop_offspring_gives_depth_one():
    _, _, _, c = _cascades(small(hop_max=0.0))
    for aid, evs in group_events(c.events).items():
        assert build_cascade(evs, c.publish_times[aid]).max_depth == 1


def test_zero_weak_prob_gives_zero_weak_share():
    _, _, _, c = _cascades(small(weak_prob=0.0, hop_max=0.9, base_log_mean=1.5))
    seen = 0
    for aid, evs in group_events(c.events).items():
        w = weak_tie_proportion(build_cascade(evs, c.publish_times[aid]))
        if not np.isnan(w):
            assert w == 0.0
            seen += 1
    assert seen > 50


def test_node_cap_truncation_flag():
    cfg = small(hop_max=5.0, base_log_mean=3.0, node_cap=200)
    _, _, _, c = _cascades(cfg, n_articles=20)
    assert c.truncated.any()
    sizes = Counter(e.article_id for e in c.events)
    assert max(sizes.values()) <= 200
    for aid, evs in group_events(c.events).items():
        build_cascade(evs, c.publish_times[aid])


def test_user_moments_match_laws():
    cfg = SynthConfig(n_users=10_000, seed=5)
    users = gen_users(cfg)
    n = len(users)
    age = np.array([u.age for u in users])
    female = np.array([u.gender == "F" for u in users], dtype=float)
    friends = np.array([u.friend_count for u in users], dtype=float)
    assert abs(age.mean() - cfg.age_mean) <= 3 * cfg.age_sd / np.sqrt(n)
    assert abs(age.std() - cfg.age_sd) <= 3 * cfg.age_sd / np.sqrt(2 * n)
    p = cfg.female_prob
    assert abs(female.mean() - p) <= 3 * np.sqrt(p * (1 - p) / n)
    assert abs(friends.mean() - cfg.friend_mean) <= 3 * np.sqrt(cfg.friend_mean / n)


def test_cascade_moments_match_laws():
    cfg = small(seed=6, n_users=20000, weak_prob=0.3, base_log_mean=1.0)
    aids, _, _, c = _cascades(cfg, n_articles=1500, z=np.zeros((1500, 8)))
    delays, ties = [], []
    for aid, evs in group_events(c.events).items():
        tree = build_cascade(evs, c.publish_times[aid])
        delays.extend(tree.time[1:] - tree.time[tree.parent[1:]])
        ties.extend(t == "weak" for t in tree.tie if t in ("weak", "strong"))
    delays = np.array(delays)
    assert len(delays) >= 10_000
    assert abs(delays.mean() - cfg.delay_mean) <= 3 * cfg.delay_mean / np.sqrt(len(delays))
    ties = np.array(ties, dtype=float)
    assert len(ties) >= 2000
    assert abs(ties.mean() - 0.3) <= 3 * np.sqrt(0.21 / len(ties))
    # seed count is 1 + Poisson(root_scale * mu) with mu = e at zero scores
    seeds = np.array([sum(e.sender_id == "PUBLISHER" for e in evs)
                      for evs in group_events(c.events).values()])
    mu = np.exp(cfg.base_log_mean)
    assert abs(seeds.mean() - 1 - mu) <= 3 * np.sqrt(mu / len(seeds))


def test_anxiety_sign_recovered():
    cfg = SynthConfig(n_users=20000)
    users = gen_users(cfg)
    G, n = 500, 20
    aids = [f"a{g:04d}_{i:03d}" for g in range(G) for i in range(n)]
    pids = [f"p{g:04d}" for g in range(G) for i in range(n)]
    hits = 0
    runs = 20
    for seed in range(runs):
        rng = np.random.default_rng(seed)
        z = rng.normal(size=(G * n, 8))
        effects = {f"p{g:04d}": rng.normal(0, cfg.publisher_sd) for g in range(G)}
        c = gen_cascades(SynthConfig(**{**cfg.to_dict(), "seed": seed}), aids, pids, z, effects,
                         users)
        size = Counter(e.article_id for e in c.events)
        y = np.log([size[a] for a in aids])
        fit = fit_random_intercept(DesignMatrix(y, z, [f"{e}_z" for e in EMOTIONS], pids))
        hits += fit["anxiety_z"] > 0 and fit.p_of("anxiety_z") < 0.05
    assert hits >= 0.95 * runs


def test_synth_all_bundle(tmp_path):
    cfg = small(seed=8)
    m1 = synth_all(cfg, tmp_path / "a")
    synth_all(cfg, tmp_path / "b")
    for name in ("embeddings.txt", "basic_lexicon.tsv", "articles.jsonl", "comments.jsonl",
                 "events.jsonl", "profiles.tsv", "friendships.tsv", "publishers.tsv",
                 "manifest.json", "truth/params.json", "truth/emotions.tsv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    assert m1["truth"] == "truth"
    params = json.loads((tmp_path / "a" / "truth" / "params.json").read_text())
    assert params["coefficients"] == cfg.coefficients
    assert EMOTION_INDEX["anxiety"] == EMOTIONS.index("anxiety")
