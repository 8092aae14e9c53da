"""Synthetic data with planted ground truth for every stage of the kit.

All generators are deterministic under ``SynthConfig.seed``. Per-article
randomness is drawn from streams keyed by ``(seed, crc32(article_id))``
so articles can be generated independently and in any order.
"""

import json
import logging
import math
import zlib
from importlib import resources
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd

from ._io import write_jsonl, write_table
from .cascade import PUBLISHER, ShareEvent, UserProfile
from .emotions import EMOTION_INDEX, EMOTIONS, N_EMOTIONS
from .exceptions import InvalidInput
from .lexicon import EmbeddingStore, Lexicon, LexiconEntry
from .scoring import Document, ModifierDictionaries, standardize
from .stats import DesignMatrix

logger = logging.getLogger(__name__)


@dataclass
class SynthConfig:
    seed: int = 0
    # embeddings and lexicon
    vocab_size: int = 6000
    dim: int = 48
    n_clusters: int = 80
    seeds_per_cluster: int = 15
    members_per_cluster: int = 10
    cluster_radius: float = 0.35
    intensity_low: float = 0.5
    intensity_high: float = 1.0
    seed_jitter: float = 0.05
    filler_group_size: int = 20
    # modifiers
    n_negations: int = 31
    n_degrees: int = 60
    degree_values: tuple = (0.5, 0.8, 1.2, 1.5, 2.0)
    # corpus
    n_publishers: int = 100
    articles_per_publisher: int = 20
    n_topics: int = 5
    words_per_topic: int = 40
    doc_length: int = 80
    topic_alpha: float = 0.2
    emotion_rate: float = 0.08
    emotion_concentration: float = 0.3
    negation_rate: float = 0.15
    degree_rate: float = 0.2
    window: int = 3
    comments_per_article: int = 3
    comment_length: int = 25
    comment_emotion_rate: float = 0.3
    # cascades: offspring mean is exp(base + coefficients . z + publisher effect)
    base_log_mean: float = 0.5
    coefficients: dict = field(default_factory=lambda: {"anxiety": 0.25, "love": 0.15,
                                                        "sadness": -0.25})
    publisher_sd: float = 0.3
    root_scale: float = 1.0
    hop_max: float = 0.8
    node_cap: int = 10000
    weak_prob: float = 0.3
    weak_coefficients: dict = field(default_factory=dict)
    weak_boost: float = 0.0
    delay_mean: float = 2.0
    # user population
    n_users: int = 50000
    age_mean: float = 35.0
    age_sd: float = 10.0
    female_prob: float = 0.5
    friend_mean: float = 150.0
    seed_friend_prob: float = 0.2

    def __post_init__(self):
        self.degree_values = tuple(self.degree_values)
        for name in ("weak_prob", "female_prob", "seed_friend_prob", "negation_rate",
                     "degree_rate", "emotion_rate", "comment_emotion_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidInput(f"{name} must be a probability, got {v}")
        if self.filler_group_size < 1:
            raise InvalidInput("filler_group_size must be >= 1")
        if self.seeds_per_cluster < 1:
            raise InvalidInput("each cluster needs at least one seed word")
        unknown = (set(self.coefficients) | set(self.weak_coefficients)) - set(EMOTIONS)
        if unknown:
            raise InvalidInput(f"unknown emotions in coefficients: {sorted(unknown)}")
        if not all(math.isfinite(v) for v in self.coefficients.values()):
            raise InvalidInput("coefficients must be finite")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidInput(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    @classmethod
    def bundled(cls):
        """The configuration shipped with the package for the end-to-end demo run."""
        text = resources.files("emocascade").joinpath("data/synthetic.json").read_text()
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        d = asdict(self)
        d["degree_values"] = list(self.degree_values)
        return d

    @property
    def n_articles(self):
        return self.n_publishers * self.articles_per_publisher


def _stream(seed, *keys):
    words = [int(seed)]
    for k in keys:
        words.append(zlib.crc32(str(k).encode()) if not isinstance(k, (int, np.integer)) else int(k))
    return np.random.default_rng(words)


# -- embeddings -------------------------------------------------------------

@dataclass
class PlantedLexicon:
    store: EmbeddingStore
    basic: Lexicon
    members: dict
    full: Lexicon
    cluster_of: dict


def gen_embeddings(config):
    """Clustered embedding store, the seed lexicon and planted member intensities.

    Cluster ``c`` expresses emotion ``c mod 8``. Its seed and member words
    lie within ``cluster_radius`` of a random centre. Remaining words form
    emotion-free groups of ``filler_group_size`` around their own random
    centres (size 1 gives isotropic fillers).
    """
    per = config.seeds_per_cluster + config.members_per_cluster
    if config.n_clusters * per > config.vocab_size:
        raise InvalidInput(f"vocab_size {config.vocab_size} cannot hold {config.n_clusters} "
                           f"clusters of {per} words")
    rng = _stream(config.seed, "embeddings")
    D = config.dim
    words, vecs = [], []
    basic, members, cluster_of = [], {}, {}
    for c in range(config.n_clusters):
        center = rng.normal(size=D)
        center /= np.linalg.norm(center)
        k = c % N_EMOTIONS
        level = rng.uniform(config.intensity_low, config.intensity_high)
        for j in range(config.seeds_per_cluster):
            w = f"e{c:03d}s{j:02d}"
            vecs.append(center + config.cluster_radius * rng.normal(size=D) / np.sqrt(D))
            words.append(w)
            inten = np.zeros(N_EMOTIONS)
            inten[k] = float(np.clip(level + rng.uniform(-config.seed_jitter, config.seed_jitter),
                                     0.01, 1.0))
            basic.append(LexiconEntry(w, tuple(inten)))
            cluster_of[w] = c
        for j in range(config.members_per_cluster):
            w = f"e{c:03d}m{j:02d}"
            vecs.append(center + config.cluster_radius * rng.normal(size=D) / np.sqrt(D))
            words.append(w)
            inten = np.zeros(N_EMOTIONS)
            inten[k] = level
            members[w] = inten
            cluster_of[w] = c
    n_fill = config.vocab_size - len(words)
    size = max(1, config.filler_group_size)
    n_groups = -(-n_fill // size)
    centers = rng.normal(size=(n_groups, D))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    fill = centers[np.arange(n_fill) // size]
    if size > 1:
        fill = fill + config.cluster_radius * rng.normal(size=(n_fill, D)) / np.sqrt(D)
    vecs.extend(fill)
    words.extend(f"f{i:05d}" for i in range(n_fill))
    store = EmbeddingStore(words, np.array(vecs))
    basic_lex = Lexicon(basic)
    full_lex = Lexicon(list(basic) + [LexiconEntry(w, tuple(v)) for w, v in members.items()])
    return PlantedLexicon(store, basic_lex, members, full_lex, cluster_of)


def gen_modifiers(config):
    negs = [f"neg{i:02d}" for i in range(config.n_negations)]
    degs = {f"deg{i:02d}": config.degree_values[i % len(config.degree_values)]
            for i in range(config.n_degrees)}
    return ModifierDictionaries(negs, degs)


# -- corpus -----------------------------------------------------------------

@dataclass
class PlantedCorpus:
    documents: list
    raw: np.ndarray
    theta: np.ndarray
    token_topics: list
    emotion_profiles: np.ndarray
    topic_words: list


def topic_vocabulary(config):
    return [[f"t{k:02d}w{j:03d}" for j in range(config.words_per_topic)]
            for k in range(config.n_topics)]


def _emotion_pools(lexicon):
    pools = [[] for _ in range(N_EMOTIONS)]
    for e in lexicon:
        v = np.asarray(e.emotions)
        if v.max() > 0:
            pools[int(np.argmax(v))].append(e.word)
    return pools


def _compose(rng, length, theta, profile, pools, table, modifiers_lists, config, emotion_rate):
    """Token stream for one document plus its exact emotion truth and token topics."""
    negs, degs, deg_values = modifiers_lists
    topic_words = config._topic_words
    window = config.window
    tokens, topics = [], []
    truth = np.zeros(N_EMOTIONS)
    last_mod = -10**9
    available = [k for k in range(N_EMOTIONS) if pools[k]]
    prof = profile[available] / profile[available].sum() if available else None
    cum = np.cumsum(theta)
    cum[-1] = 1.0

    def topic_token():
        k = min(int(np.searchsorted(cum, rng.random(), side="right")), len(cum) - 1)
        tokens.append(topic_words[k][int(rng.integers(len(topic_words[k])))])
        topics.append(k)

    while len(tokens) < length:
        if available and rng.random() < emotion_rate:
            emo = available[int(rng.choice(len(available), p=prof))]
            word = pools[emo][int(rng.integers(len(pools[emo])))]
            mods = []
            if window >= 1 and rng.random() < config.negation_rate:
                mods.append(("neg", negs[int(rng.integers(len(negs)))]))
                if window >= 2 and rng.random() < config.negation_rate:
                    mods.append(("neg", negs[int(rng.integers(len(negs)))]))
            if len(mods) < window and rng.random() < config.degree_rate:
                j = int(rng.integers(len(degs)))
                mods.append(("deg", j))
            rng.shuffle(mods)
            # keep earlier modifiers out of this word's look-back window
            while last_mod >= len(tokens) + len(mods) - window:
                topic_token()
            n_neg, deg_sum, n_deg = 0, 0.0, 0
            for kind, item in mods:
                if kind == "neg":
                    tokens.append(item)
                    n_neg += 1
                else:
                    tokens.append(degs[item])
                    deg_sum += deg_values[item]
                    n_deg += 1
                topics.append(-1)
            if mods:
                last_mod = len(tokens) - 1
            tokens.append(word)
            topics.append(-1)
            truth += (-1.0) ** n_neg * (deg_sum / n_deg if n_deg else 1.0) * table[word]
        else:
            topic_token()
    return tokens, topics, truth


def gen_corpus(config, lexicon, modifiers=None):
    """Articles mixing planted topics with emotion words and modifiers.

    Returns a :class:`PlantedCorpus` whose ``raw`` matrix is the exact
    document-level emotion truth under the scoring rule, computed while the
    text is composed.
    """
    modifiers = modifiers or gen_modifiers(config)
    config._topic_words = topic_vocabulary(config)
    pools = _emotion_pools(lexicon)
    table = lexicon.as_dict()
    degs = sorted(modifiers.degrees)
    mod_lists = (sorted(modifiers.negations), degs, [modifiers.degrees[d] for d in degs])
    docs, raws, thetas, token_topics, profiles = [], [], [], [], []
    for p in range(config.n_publishers):
        for a in range(config.articles_per_publisher):
            aid = f"a{p:04d}_{a:03d}"
            rng = _stream(config.seed, "article", aid)
            theta = rng.dirichlet(np.full(config.n_topics, config.topic_alpha))
            theta = np.maximum(theta, 1e-12)
            theta /= theta.sum()
            profile = rng.dirichlet(np.full(N_EMOTIONS, config.emotion_concentration))
            length = int(rng.poisson(config.doc_length)) + 10
            tokens, topics, truth = _compose(rng, length, theta, profile, pools, table, mod_lists,
                                             config, config.emotion_rate)
            doc = Document(
                id=aid, publisher_id=f"p{p:04d}", tokens=tokens,
                n_images=int(rng.poisson(2.0)), n_videos=int(rng.random() < 0.1),
                posted_weekend=bool(rng.random() < 2 / 7), n_comments=int(rng.poisson(5.0)),
                original=bool(rng.random() < 0.6),
                char_length=int(np.exp(rng.normal(7.0, 0.8))) + 1,
            )
            docs.append(doc)
            raws.append(truth)
            thetas.append(theta)
            token_topics.append(topics)
            profiles.append(profile)
    return PlantedCorpus(docs, np.array(raws), np.array(thetas), token_topics, np.array(profiles),
                         config._topic_words)


def gen_comments(config, articles, profiles, lexicon, modifiers=None):
    """Comments whose emotion mix follows their article's dominant emotion."""
    modifiers = modifiers or gen_modifiers(config)
    config._topic_words = topic_vocabulary(config)
    pools = _emotion_pools(lexicon)
    table = lexicon.as_dict()
    degs = sorted(modifiers.degrees)
    mod_lists = (sorted(modifiers.negations), degs, [modifiers.degrees[d] for d in degs])
    comments, raws = [], []
    for doc, prof in zip(articles, profiles):
        rng = _stream(config.seed, "comments", doc.id)
        focus = np.full(N_EMOTIONS, 0.02)
        focus[int(np.argmax(prof))] = 1.0
        focus /= focus.sum()
        theta = np.full(config.n_topics, 1.0 / config.n_topics)
        for c in range(config.comments_per_article):
            length = int(rng.poisson(config.comment_length)) + 5
            tokens, _, truth = _compose(rng, length, theta, focus, pools, table, mod_lists, config,
                                        config.comment_emotion_rate)
            comments.append(Document(id=f"{doc.id}_c{c}", publisher_id=doc.publisher_id,
                                     tokens=tokens, extra={"article_id": doc.id}))
            raws.append(truth)
    return comments, np.array(raws).reshape(len(raws), N_EMOTIONS)


# -- users and cascades ------------------------------------------------------

def gen_users(config):
    rng = _stream(config.seed, "users")
    n = config.n_users
    ages = np.clip(rng.normal(config.age_mean, config.age_sd, n), 0.0, None)
    female = rng.random(n) < config.female_prob
    friends = rng.poisson(config.friend_mean, n)
    return [UserProfile(f"u{i:06d}", float(round(ages[i], 2)), "F" if female[i] else "M",
                        int(friends[i])) for i in range(n)]


def gen_publishers(config):
    rng = _stream(config.seed, "publishers")
    rows = []
    for p in range(config.n_publishers):
        rows.append({
            "publisher_id": f"p{p:04d}",
            "ln_followers": float(rng.normal(10.0, 1.0)),
            "articles_per_day": float(np.exp(rng.normal(0.0, 0.5))),
            "publisher_type": ["individual", "media", "business", "government", "other"][
                int(rng.integers(5))],
            "effect": float(rng.normal(0.0, config.publisher_sd)),
        })
    return pd.DataFrame(rows)


@dataclass
class PlantedCascades:
    events: list
    publish_times: dict
    profiles: list
    friendships: list
    log_mean: np.ndarray
    truncated: np.ndarray


def _logistic(x):
    return 1.0 / (1.0 + math.exp(-x))


def gen_cascades(config, article_ids, publisher_ids, z, publisher_effects=None, users=None):
    """Galton-Watson share trees whose offspring mean is log-linear in emotion z-scores.

    Seeds number ``1 + Poisson(root_scale * mu)``; every later sharer has
    ``Poisson(hop_max * b / (1 + b))`` children with ``b = mu * exp(weak_boost * weak)``,
    so trees stay subcritical when ``hop_max < 1``. Here
    ``mu = exp(base_log_mean + coefficients . z + publisher effect)``. Trees
    stop at ``node_cap`` nodes and are then flagged as truncated.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (len(article_ids), N_EMOTIONS):
        raise InvalidInput("z must be an (n_articles, 8) array")
    users = users if users is not None else gen_users(config)
    if config.node_cap > len(users):
        raise InvalidInput("node_cap exceeds the user population")
    publisher_effects = publisher_effects or {}
    coef = np.zeros(N_EMOTIONS)
    for name, v in config.coefficients.items():
        coef[EMOTION_INDEX[name]] = v
    wcoef = np.zeros(N_EMOTIONS)
    for name, v in config.weak_coefficients.items():
        wcoef[EMOTION_INDEX[name]] = v
    base_logit = math.log(config.weak_prob / (1 - config.weak_prob)) \
        if 0 < config.weak_prob < 1 else None

    events, friends = [], set()
    publish_times, log_means, truncated = {}, [], []
    n_users = len(users)
    for j, (aid, pid) in enumerate(zip(article_ids, publisher_ids)):
        rng = _stream(config.seed, "cascade", aid)
        eta = config.base_log_mean + float(coef @ z[j]) + publisher_effects.get(pid, 0.0)
        mu = math.exp(eta)
        if base_logit is None:
            p_weak = config.weak_prob
        else:
            p_weak = _logistic(base_logit + float(wcoef @ z[j]))
        t0 = float(j % 1000) * 0.5
        publish_times[aid] = t0
        n_seeds = 1 + int(rng.poisson(config.root_scale * mu))
        # node: (parent position, time, weak flag); position 0 is the publisher
        nodes = [(-1, t0, False)]
        frontier = []
        cut = False
        for _ in range(n_seeds):
            if len(nodes) > config.node_cap:
                cut = True
                break
            nodes.append((0, t0 + rng.exponential(config.delay_mean), False))
            frontier.append(len(nodes) - 1)
        while frontier and not cut:
            nxt = []
            for v in frontier:
                boost = mu * (math.exp(config.weak_boost) if nodes[v][2] else 1.0)
                lam = config.hop_max * boost / (1.0 + boost)
                for _ in range(int(rng.poisson(lam))):
                    if len(nodes) > config.node_cap:
                        cut = True
                        break
                    weak = bool(rng.random() < p_weak)
                    nodes.append((v, nodes[v][1] + rng.exponential(config.delay_mean), weak))
                    nxt.append(len(nodes) - 1)
                if cut:
                    break
            frontier = nxt
        picks = rng.choice(n_users, size=len(nodes) - 1, replace=False)
        ids = [PUBLISHER] + [users[i].user_id for i in picks]
        seeds = []
        for pos in range(1, len(nodes)):
            parent, t, weak = nodes[pos]
            if parent == 0:
                events.append(ShareEvent(aid, PUBLISHER, ids[pos], t, "publisher"))
                seeds.append(ids[pos])
            else:
                tie = "weak" if weak else "strong"
                events.append(ShareEvent(aid, ids[parent], ids[pos], t, tie))
                if not weak:
                    friends.add(tuple(sorted((ids[parent], ids[pos]))))
        for a in range(len(seeds)):
            for b in range(a + 1, len(seeds)):
                if rng.random() < config.seed_friend_prob:
                    friends.add(tuple(sorted((seeds[a], seeds[b]))))
        log_means.append(eta)
        truncated.append(cut)
    return PlantedCascades(events, publish_times, users, sorted(friends), np.array(log_means),
                           np.array(truncated))


# -- regression fixtures -----------------------------------------------------

def gen_panel(n_groups, n_per_group, beta, sigma_mu=1.0, sigma_eps=1.0, seed=0, intercept=1.0,
              endogeneity=0.0, slope_sd=0.0, slope_column=0, names=None):
    """Two-level linear data with planted coefficients and variance components.

    ``endogeneity`` adds ``endogeneity * u_g`` to the first predictor so it
    correlates with the group effect. ``slope_sd`` gives ``slope_column`` a
    group-specific slope deviation. Returns ``(DesignMatrix, truth dict)``.
    """
    rng = np.random.default_rng(seed)
    beta = np.asarray(beta, dtype=float)
    p = beta.size
    N = n_groups * n_per_group
    g = np.repeat(np.arange(n_groups), n_per_group)
    u = rng.normal(0.0, sigma_mu, n_groups)
    X = rng.normal(size=(N, p))
    if endogeneity:
        X[:, 0] += endogeneity * u[g]
    slopes = rng.normal(0.0, slope_sd, n_groups) if slope_sd else np.zeros(n_groups)
    y = intercept + X @ beta + u[g] + slopes[g] * X[:, slope_column] \
        + rng.normal(0.0, sigma_eps, N)
    names = names or [f"x{i + 1}" for i in range(p)]
    truth = {"beta": dict(zip(names, beta.tolist())), "intercept": intercept,
             "sigma_mu": sigma_mu, "sigma_eps": sigma_eps, "slope_sd": slope_sd}
    return DesignMatrix(y, X, names, g), truth


def gen_mediation(scenario, n_groups=200, n_per_group=20, seed=0, effect=0.3, sigma_mu=0.5):
    """Table with an emotion, a second emotion, a control, a mediator and an outcome.

    ``scenario`` is ``'complete'`` (emotion acts only through the mediator),
    ``'partial'`` (half direct, half indirect) or ``'none'`` (mediator
    unrelated to the emotion).
    """
    if scenario not in ("complete", "partial", "none"):
        raise InvalidInput(f"unknown scenario {scenario!r}")
    rng = np.random.default_rng(seed)
    N = n_groups * n_per_group
    g = np.repeat(np.arange(n_groups), n_per_group)
    anxiety = rng.normal(size=N)
    joy = rng.normal(size=N)
    control = rng.normal(size=N)
    u_m = rng.normal(0, sigma_mu, n_groups)[g]
    u_y = rng.normal(0, sigma_mu, n_groups)[g]
    a = 0.0 if scenario == "none" else effect
    mediator = a * anxiety + 0.2 * control + u_m + rng.normal(size=N)
    if scenario == "complete":
        direct, b = 0.0, effect / a * 1.0
    elif scenario == "partial":
        direct, b = effect / 2, effect / 2 / a
    else:
        direct, b = effect, 0.0
    y = direct * anxiety + b * mediator + 0.1 * joy + 0.2 * control + u_y + rng.normal(size=N)
    return pd.DataFrame({"publisher_id": [f"p{i:04d}" for i in g], "anxiety": anxiety,
                         "joy": joy, "ln_char_length": control, "mediator": mediator,
                         "outcome": y})


# -- bundle -----------------------------------------------------------------

def synth_all(config, out_dir, write_manifest=True):
    """Write every input file of the pipeline plus ``truth/``; returns the manifest dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    planted = gen_embeddings(config)
    mods = gen_modifiers(config)
    corpus = gen_corpus(config, planted.full, mods)
    comments, comment_raw = gen_comments(config, corpus.documents, corpus.emotion_profiles,
                                         planted.full, mods)
    z_true = standardize(corpus.raw)
    pubs = gen_publishers(config)
    effects = dict(zip(pubs.publisher_id, pubs.effect))
    casc = gen_cascades(config, [d.id for d in corpus.documents],
                        [d.publisher_id for d in corpus.documents], z_true, effects)

    planted.store.save(out / "embeddings.txt")
    planted.basic.save(out / "basic_lexicon.tsv")
    (out / "negations.txt").write_text("\n".join(sorted(mods.negations)) + "\n")
    (out / "degrees.tsv").write_text(
        "\n".join(f"{w}\t{v:g}" for w, v in sorted(mods.degrees.items())) + "\n")
    write_jsonl(out / "articles.jsonl", [d.to_record() for d in corpus.documents])
    write_jsonl(out / "comments.jsonl", [d.to_record() for d in comments])
    write_jsonl(out / "events.jsonl", [e.to_record() for e in casc.events])
    write_table(out / "publish_times.tsv",
                pd.DataFrame(sorted(casc.publish_times.items()), columns=["article_id", "publish_time"]))
    sharers = sorted({e.receiver_id for e in casc.events})
    by_id = {u.user_id: u for u in casc.profiles}
    write_table(out / "profiles.tsv", pd.DataFrame(
        [(u, by_id[u].age, by_id[u].gender, by_id[u].friend_count) for u in sharers],
        columns=["user_id", "age", "gender", "friend_count"]))
    write_table(out / "friendships.tsv", pd.DataFrame(casc.friendships, columns=["user_a", "user_b"]))
    write_table(out / "publishers.tsv", pubs.drop(columns=["effect"]))

    truth = out / "truth"
    truth.mkdir(exist_ok=True)
    planted.full.save(truth / "full_lexicon.tsv")
    emo = pd.DataFrame(corpus.raw, columns=[f"{e}_raw" for e in EMOTIONS])
    for i, e in enumerate(EMOTIONS):
        emo[f"{e}_z"] = z_true[:, i]
    emo.insert(0, "article_id", [d.id for d in corpus.documents])
    write_table(truth / "emotions.tsv", emo)
    write_table(truth / "cascades.tsv", pd.DataFrame({
        "article_id": [d.id for d in corpus.documents], "log_mean": casc.log_mean,
        "truncated": casc.truncated}))
    write_table(truth / "publisher_effects.tsv", pubs[["publisher_id", "effect"]])
    (truth / "params.json").write_text(json.dumps({
        "config": config.to_dict(), "coefficients": config.coefficients,
        "publisher_sd": config.publisher_sd, "n_topics": config.n_topics,
    }, indent=2, sort_keys=True) + "\n")

    manifest = {
        "embeddings": "embeddings.txt",
        "basic_lexicon": "basic_lexicon.tsv",
        "negations": "negations.txt",
        "degrees": "degrees.tsv",
        "articles": "articles.jsonl",
        "comments": "comments.jsonl",
        "events": "events.jsonl",
        "publish_times": "publish_times.tsv",
        "profiles": "profiles.tsv",
        "friendships": "friendships.tsv",
        "publishers": "publishers.tsv",
        "output_dir": "run",
        "seed": config.seed,
        "params": {"topics": {"k": config.n_topics, "iterations": 300},
                   "lexicon": {"n": 12, "m": 10, "alpha": 1.2}},
        "truth": "truth",
    }
    if write_manifest:
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
