"""Manifest-driven end-to-end run with content-hash stage caching.

Stages run in dependency order::

    lexicon -> score -> topics -> cascades -> join -> analyze

Each stage's cache key hashes its parameters, the bytes of the input files
it reads and the keys of its upstream stages. A stage whose key already has
a complete cache entry is reported ``cached`` and its files are copied
instead of recomputed. Downstream stages always read the serialized files,
so cold and warm runs produce byte-identical outputs.

The cache lives in ``$EMOCASCADE_CACHE_DIR`` when set, otherwise in
``<output_dir>/.cache``.
"""

import hashlib
import json
import logging
import os
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import analysis
from ._io import file_sha256, read_jsonl, read_table, write_table
from .cascade import (
    ShareEvent,
    UserProfile,
    build_cascade,
    group_events,
    metrics,
    normalize_pairs,
)
from .emotions import EMOTIONS
from .exceptions import EmoCascadeError, ManifestError, StageError
from .lexicon import EmbeddingStore, ExpansionParams, Lexicon, expand_lexicon
from .scoring import Document, ModifierDictionaries, score_documents
from .stats import hausman_test, mediation_analysis
from .topics import doc_topics, fit_lda, preprocess, select_k

logger = logging.getLogger(__name__)

CACHE_ENV = "EMOCASCADE_CACHE_DIR"
STAGES = ("lexicon", "score", "topics", "cascades", "join", "analyze")
_VERSION = "1"

_FILE_FIELDS = ("embeddings", "basic_lexicon", "negations", "degrees", "articles", "comments",
                "events", "publish_times", "profiles", "friendships", "publishers")
_REQUIRED = ("embeddings", "basic_lexicon", "articles")

DEFAULT_PARAMS = {
    "lexicon": {"n_candidates": 100, "n": 12, "m": 10, "alpha": 1.2, "max_iterations": 50},
    "score": {"window": 3, "z_threshold": 1.96},
    "topics": {"k": 30, "ks": None, "iterations": 800, "min_doc_freq": 0.001,
               "infer_iterations": 50},
    "regress": {"outcomes": list(analysis.OUTCOMES), "specs": ["main", "degree", "fe"],
                "method": "REML"},
    "mediate": {"mediators": ["avg_age", "avg_friends", "weak_tie_prop"],
                "outcomes": list(analysis.OUTCOMES)},
    "ccdf": {"columns": list(analysis.CCDF_COLUMNS)},
}


@dataclass
class Manifest:
    base: Path
    paths: dict
    params: dict
    output_dir: Path
    seed: int = 0
    truth: Path = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ManifestError(f"manifest {path} not found", "manifest") from None
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest {path} is not valid JSON: {exc}", "manifest") from None
        return cls.from_dict(raw, path.parent)

    @classmethod
    def from_dict(cls, raw, base="."):
        base = Path(base)
        if not isinstance(raw, dict):
            raise ManifestError("manifest must be a JSON object", "manifest")
        unknown = set(raw) - set(_FILE_FIELDS) - {"params", "output_dir", "seed", "truth"}
        if unknown:
            raise ManifestError(f"unknown manifest fields: {sorted(unknown)}", sorted(unknown)[0])
        for name in _REQUIRED:
            if not raw.get(name):
                raise ManifestError(f"manifest lacks required field '{name}'", name)
        paths = {}
        for name in _FILE_FIELDS:
            if raw.get(name):
                p = base / raw[name]
                if not p.is_file():
                    raise ManifestError(f"'{name}' points to a missing file: {p}", name)
                paths[name] = p
        params = json.loads(json.dumps(DEFAULT_PARAMS))
        for stage, over in (raw.get("params") or {}).items():
            if stage not in params:
                raise ManifestError(f"unknown parameter group '{stage}'", f"params.{stage}")
            if not isinstance(over, dict):
                raise ManifestError(f"params.{stage} must be an object", f"params.{stage}")
            bad = set(over) - set(params[stage])
            if bad:
                raise ManifestError(f"unknown parameters in params.{stage}: {sorted(bad)}",
                                    f"params.{stage}.{sorted(bad)[0]}")
            params[stage].update(over)
        wants_cascades = bool(params["regress"]["outcomes"]) or bool(params["mediate"]["mediators"]) \
            or bool(params["ccdf"]["columns"])
        if wants_cascades and "events" not in paths:
            raise ManifestError("cascade outcomes are requested but the manifest has no 'events' "
                                "path", "events")
        out = base / raw.get("output_dir", "run")
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ManifestError(f"output_dir {out} is not writable: {exc}", "output_dir") from None
        if not os.access(out, os.W_OK):
            raise ManifestError(f"output_dir {out} is not writable", "output_dir")
        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ManifestError("seed must be an integer", "seed")
        truth = base / raw["truth"] if raw.get("truth") else None
        return cls(base, paths, params, out, seed, truth, raw)

    def cache_dir(self):
        env = os.environ.get(CACHE_ENV)
        return Path(env) if env else self.output_dir / ".cache"


# -- stage bodies ------------------------------------------------------------
# Each takes (manifest, inputs dir map, work dir) and writes its files into work.

def _load_docs(path):
    return [Document.from_record(r) for r in read_jsonl(path)]


def _modifiers(m):
    return ModifierDictionaries.load(m.paths.get("negations"), m.paths.get("degrees"))


def _stage_lexicon(m, up, work):
    p = m.params["lexicon"]
    params = ExpansionParams(n_candidates=p["n_candidates"], n=p["n"], m=p["m"], alpha=p["alpha"],
                             max_iterations=p["max_iterations"])
    store = EmbeddingStore.load(m.paths["embeddings"])
    basic = Lexicon.load(m.paths["basic_lexicon"])
    lex, log = expand_lexicon(store, basic, params)
    lex.save(work / "lexicon.tsv")
    write_table(work / "lexicon_log.tsv", pd.DataFrame(log))


def _stage_score(m, up, work):
    lex = Lexicon.load(up["lexicon"] / "lexicon.tsv")
    mods = _modifiers(m)
    window = m.params["score"]["window"]
    docs = _load_docs(m.paths["articles"])
    raw = score_documents(docs, lex, mods, window)
    emo = analysis.emotion_table([d.id for d in docs], raw)
    write_table(work / "emotions.tsv", emo)
    write_table(work / "correlation.tsv", analysis.correlation_table(emo))
    if "comments" in m.paths:
        comments = _load_docs(m.paths["comments"])
        craw = score_documents(comments, lex, mods, window)
        cemo = analysis.emotion_table([c.id for c in comments], craw)
        cemo.insert(1, "article_id", [str(c.extra.get("article_id", "")) for c in comments])
        write_table(work / "comment_emotions.tsv", cemo)
        report = analysis.comment_consistency(
            emo[[f"{e}_z" for e in EMOTIONS]].to_numpy(),
            cemo[[f"{e}_z" for e in EMOTIONS]].to_numpy(),
            cemo["article_id"].tolist(), m.params["score"]["z_threshold"],
            article_ids=emo["id"].tolist())
        write_table(work / "comment_consistency.tsv", report)


def _stage_topics(m, up, work):
    p = m.params["topics"]
    lex = Lexicon.load(up["lexicon"] / "lexicon.tsv")
    docs = _load_docs(m.paths["articles"])
    tokens = [d.tokens for d in docs]
    corpus = preprocess(tokens, lex.words, p["min_doc_freq"])
    k = p["k"]
    if p.get("ks"):
        k, curve = select_k(corpus, p["ks"], m.seed, p["iterations"])
        write_table(work / "perplexity.tsv",
                    pd.DataFrame(sorted(curve.items()), columns=["k", "perplexity"]))
    model = fit_lda(corpus, k, p["iterations"], m.seed)
    model.save(work / "model")
    theta = doc_topics(model, tokens, p["infer_iterations"], m.seed)
    frame = pd.DataFrame(theta, columns=[f"topic_{i + 1}" for i in range(model.K)])
    frame.insert(0, "id", [d.id for d in docs])
    write_table(work / "topics.tsv", frame)


def _read_profiles(path):
    t = read_table(path)
    return {str(r.user_id): UserProfile(str(r.user_id), float(r.age), str(r.gender),
                                        int(r.friend_count))
            for r in t.itertuples(index=False)}


def _read_pairs(path):
    t = read_table(path)
    return normalize_pairs(t.iloc[:, :2].astype(str).itertuples(index=False, name=None))


def _stage_cascades(m, up, work):
    events = [ShareEvent.from_record(r) for r in read_jsonl(m.paths["events"])]
    publish = {}
    if "publish_times" in m.paths:
        t = read_table(m.paths["publish_times"])
        publish = dict(zip(t.iloc[:, 0].astype(str), t.iloc[:, 1].astype(float)))
    profiles = _read_profiles(m.paths["profiles"]) if "profiles" in m.paths else {}
    pairs = _read_pairs(m.paths["friendships"]) if "friendships" in m.paths else set()
    rows = []
    for aid, evs in sorted(group_events(events).items()):
        tree = build_cascade(evs, publish.get(aid))
        rows.append(metrics(tree, profiles, pairs).as_row())
    write_table(work / "cascades.tsv", pd.DataFrame(rows))


def _stage_join(m, up, work):
    docs = _load_docs(m.paths["articles"])
    controls = analysis.article_controls(docs)
    emo = read_table(up["score"] / "emotions.tsv", sep="\t")
    emo["id"] = emo["id"].astype(str)
    topics = read_table(up["topics"] / "topics.tsv")
    topics["id"] = topics["id"].astype(str)
    casc = None
    if "cascades" in up:
        casc = read_table(up["cascades"] / "cascades.tsv")
        casc["article_id"] = casc["article_id"].astype(str)
    pubs = read_table(m.paths["publishers"]) if "publishers" in m.paths else None
    write_table(work / "analysis.tsv", analysis.join_tables(controls, emo, topics, casc, pubs))


def _fit_rows(fit, outcome, spec):
    t = fit.table()
    t.insert(0, "spec", spec)
    t.insert(0, "outcome", outcome)
    return t


def _stage_analyze(m, up, work):
    table = read_table(up["join"] / "analysis.tsv")
    table["publisher_id"] = table["publisher_id"].astype(str)
    reg = m.params["regress"]
    summary, variances, haus = [], [], []
    fits = {}
    for outcome in reg["outcomes"]:
        for spec in reg["specs"]:
            fit = analysis.regress(table, outcome, spec, method=reg["method"])
            fits[(outcome, spec)] = fit
            write_table(work / f"regress_{outcome}_{spec}.tsv", fit.table())
            summary.append(_fit_rows(fit, outcome, spec))
            v = fit.variance_table()
            v.insert(0, "spec", spec)
            v.insert(0, "outcome", outcome)
            variances.append(v)
        if "fe" in reg["specs"] and "main" in reg["specs"]:
            stat, dof, p = hausman_test(fits[(outcome, "fe")], fits[(outcome, "main")],
                                        names=list(EMOTIONS))
            haus.append({"outcome": outcome, "statistic": stat, "dof": dof, "p": p})
    if summary:
        write_table(work / "regressions.tsv", pd.concat(summary, ignore_index=True))
        write_table(work / "variance_components.tsv", pd.concat(variances, ignore_index=True))
    if haus:
        write_table(work / "hausman.tsv", pd.DataFrame(haus))

    med = m.params["mediate"]
    frames = []
    _, predictors, pubs = analysis.model_columns(table, "main")
    controls = [c for c in predictors if c not in EMOTIONS]
    for mediator in med["mediators"]:
        for outcome in med["outcomes"]:
            rep = mediation_analysis(table, outcome, mediator, list(EMOTIONS), controls,
                                     publisher_columns=pubs, method=reg["method"])
            f = rep.to_frame()
            f["dropped"] = rep.dropped
            frames.append(f)
    if frames:
        write_table(work / "mediation.tsv", pd.concat(frames, ignore_index=True))

    for col in m.params["ccdf"]["columns"]:
        if col in table.columns:
            write_table(work / f"ccdf_{col}.tsv", analysis.ccdf_table(table[col], col))

    if m.truth is not None and (m.truth / "params.json").is_file() and ("ln_size", "main") in fits:
        planted = json.loads((m.truth / "params.json").read_text())["coefficients"]
        fit = fits[("ln_size", "main")]
        rows = []
        for e, beta in sorted(planted.items()):
            est, p = fit[e], fit.p_of(e)
            rows.append({"emotion": e, "planted": beta, "estimate": est, "p": p,
                         "recovered": bool(np.sign(est) == np.sign(beta) and p < 0.05)})
        write_table(work / "recovery.tsv", pd.DataFrame(rows))


_BODIES = {
    "lexicon": (_stage_lexicon, ("embeddings", "basic_lexicon"), ()),
    "score": (_stage_score, ("negations", "degrees", "articles", "comments"), ("lexicon",)),
    "topics": (_stage_topics, ("articles",), ("lexicon",)),
    "cascades": (_stage_cascades, ("events", "publish_times", "profiles", "friendships"), ()),
    "join": (_stage_join, ("articles", "publishers"), ("score", "topics", "cascades")),
    "analyze": (_stage_analyze, (), ("join",)),
}
_STAGE_PARAMS = {"lexicon": ("lexicon",), "score": ("score",), "topics": ("topics",),
                 "cascades": (), "join": (), "analyze": ("regress", "mediate", "ccdf")}


def _active_stages(m):
    return [s for s in STAGES if s != "cascades" or "events" in m.paths]


def stage_keys(m):
    """Cache key of every active stage, computed from inputs alone."""
    keys = {}
    active = _active_stages(m)
    for stage in active:
        _, files, ups = _BODIES[stage]
        payload = {
            "stage": stage,
            "version": _VERSION,
            "seed": m.seed,
            "params": {g: m.params[g] for g in _STAGE_PARAMS[stage]},
            "files": {f: file_sha256(m.paths[f]) for f in files if f in m.paths},
            "upstream": {u: keys[u] for u in ups if u in keys},
        }
        if stage == "analyze" and m.truth is not None and (m.truth / "params.json").is_file():
            payload["truth"] = file_sha256(m.truth / "params.json")
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        keys[stage] = hashlib.sha256(blob).hexdigest()
    return keys


def _entry(cache, stage, key):
    return cache / f"{stage}-{key[:24]}"


def _complete(entry):
    return (entry / ".complete").is_file()


def _publish(entry, out):
    for src in sorted(entry.rglob("*")):
        if src.is_file() and src.name != ".complete":
            dst = out / src.relative_to(entry)
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(src, dst)


@dataclass
class RunReport:
    stages: dict
    output_dir: Path
    seconds: dict = field(default_factory=dict)

    def lines(self):
        return [f"{s}\t{status}" for s, status in self.stages.items()]


def run_pipeline(manifest, force=False):
    """Execute every stage; returns a :class:`RunReport` mapping stage -> 'ran' | 'cached'.

    Errors inside a stage are re-raised as ``StageError`` naming the stage.
    """
    m = manifest if isinstance(manifest, Manifest) else Manifest.load(manifest)
    cache = m.cache_dir()
    cache.mkdir(parents=True, exist_ok=True)
    keys = stage_keys(m)
    entries = {s: _entry(cache, s, k) for s, k in keys.items()}
    status, seconds = {}, {}
    for stage in _active_stages(m):
        entry = entries[stage]
        if _complete(entry) and not force:
            status[stage] = "cached"
        else:
            t0 = time.perf_counter()
            if entry.exists():
                shutil.rmtree(entry)
            tmp = entry.with_name(entry.name + ".tmp")
            if tmp.exists():
                shutil.rmtree(tmp)
            tmp.mkdir(parents=True)
            body, _, ups = _BODIES[stage]
            try:
                body(m, {u: entries[u] for u in ups if u in entries}, tmp)
            except EmoCascadeError as exc:
                shutil.rmtree(tmp, ignore_errors=True)
                raise StageError(stage, exc) from exc
            except (OSError, ValueError, KeyError) as exc:
                shutil.rmtree(tmp, ignore_errors=True)
                raise StageError(stage, exc) from exc
            (tmp / ".complete").write_text(keys[stage] + "\n")
            tmp.rename(entry)
            status[stage] = "ran"
            seconds[stage] = time.perf_counter() - t0
        _publish(entry, m.output_dir)
        logger.info("stage %s: %s", stage, status[stage])
    state = {"keys": keys, "stages": status}
    (m.output_dir / "run.json").write_text(json.dumps({"keys": keys}, indent=1, sort_keys=True)
                                           + "\n")
    logger.debug("run state %s", state)
    return RunReport(status, m.output_dir, seconds)


def pipeline_status(manifest):
    """Per-stage ``cached`` (reusable entry exists) or ``stale`` (would run)."""
    m = manifest if isinstance(manifest, Manifest) else Manifest.load(manifest)
    cache = m.cache_dir()
    return {s: "cached" if _complete(_entry(cache, s, k)) else "stale"
            for s, k in stage_keys(m).items()}
