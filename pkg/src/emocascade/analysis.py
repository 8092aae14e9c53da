"""Analysis-table conventions shared by the pipeline and the command line.

The joined table has one row per article. Emotion z-scores sit in columns
named after the emotions, topic shares in ``topic_1 .. topic_K``, article
controls and publisher covariates under the names in ``CONTROLS`` and
``PUBLISHER_COLUMNS`` (plus ``ptype_*`` indicators).
"""

import math
import re

import numpy as np
import pandas as pd

from .cascade import ccdf
from .emotions import EMOTIONS
from .exceptions import InvalidInput
from .scoring import correlation_matrix, degree_of_emotion, standardize
from .stats import (
    DesignMatrix,
    fit_fixed_effects,
    fit_random_intercept,
    fit_random_slopes,
)

CONTROLS = ("ln_char_length", "n_images", "n_videos", "posted_weekend", "n_comments", "original")
PUBLISHER_COLUMNS = ("ln_followers", "articles_per_day")
OUTCOMES = ("depth", "ln_size", "ln_max_breadth", "time_per_level", "structural_virality")
MEDIATORS = {"avg_age": "avg_age", "avg_friends": "avg_friends", "weak_tie_prop": "weak_tie_prop"}
SPECS = ("main", "degree", "random-slopes", "fe")
CCDF_COLUMNS = ("size", "depth", "max_breadth", "structural_virality", "time_per_level")
_TOPIC = re.compile(r"^topic_(\d+)$")


def emotion_table(ids, raw):
    """``id``, raw intensities, population z-scores and degree of emotion."""
    raw = np.asarray(raw, dtype=float)
    z = standardize(raw)
    frame = pd.DataFrame({"id": list(ids)})
    for i, e in enumerate(EMOTIONS):
        frame[f"{e}_raw"] = raw[:, i]
    for i, e in enumerate(EMOTIONS):
        frame[f"{e}_z"] = z[:, i]
    frame["degree_of_emotion"] = degree_of_emotion(raw)
    return frame


def article_controls(docs):
    rows = []
    for d in docs:
        rows.append({
            "article_id": d.id,
            "publisher_id": d.publisher_id,
            "ln_char_length": math.log(max(d.char_length, 1)),
            "n_images": d.n_images,
            "n_videos": d.n_videos,
            "posted_weekend": int(bool(d.posted_weekend)),
            "n_comments": d.n_comments,
            "original": int(bool(d.original)),
        })
    return pd.DataFrame(rows)


def publisher_covariates(frame):
    """Publisher table with ``ptype_*`` indicators; the alphabetically first type is the reference."""
    out = frame.copy()
    out["publisher_id"] = out["publisher_id"].astype(str)
    if "publisher_type" in out.columns:
        types = sorted(out["publisher_type"].astype(str).unique())
        for t in types[1:]:
            out[f"ptype_{t}"] = (out["publisher_type"].astype(str) == t).astype(int)
        out = out.drop(columns=["publisher_type"])
    return out


def _log_positive(values, name):
    v = np.asarray(values, dtype=float)
    bad = np.isfinite(v) & (v <= 0)
    if bad.any():
        raise InvalidInput(f"{name} must be positive before the log transform "
                           f"({int(bad.sum())} nonpositive values)")
    with np.errstate(invalid="ignore"):
        return np.log(v)


def join_tables(controls, emotions, topics=None, cascades=None, publishers=None):
    """Merge per-article pieces into the analysis table (left join on articles)."""
    emo = emotions.rename(columns={"id": "article_id"})
    emo = emo[["article_id"] + [f"{e}_z" for e in EMOTIONS] + ["degree_of_emotion"]]
    emo = emo.rename(columns={f"{e}_z": e for e in EMOTIONS})
    table = controls.merge(emo, on="article_id", how="left", validate="one_to_one")
    if topics is not None:
        table = table.merge(topics.rename(columns={"id": "article_id"}), on="article_id",
                            how="left", validate="one_to_one")
    if cascades is not None:
        c = cascades.rename(columns={"avg_friend_count": "avg_friends",
                                     "weak_tie_proportion": "weak_tie_prop"})
        table = table.merge(c, on="article_id", how="left", validate="one_to_one")
        table["ln_size"] = _log_positive(table["size"], "size")
        table["ln_max_breadth"] = _log_positive(table["max_breadth"], "max_breadth")
    if publishers is not None:
        table = table.merge(publisher_covariates(publishers), on="publisher_id", how="left",
                            validate="many_to_one")
    return table


def topic_columns(frame):
    cols = sorted((c for c in frame.columns if _TOPIC.match(c)),
                  key=lambda c: int(_TOPIC.match(c).group(1)))
    # shares sum to one, so the last topic is the omitted reference category
    return cols[:-1]


def publisher_columns(frame):
    cols = [c for c in PUBLISHER_COLUMNS if c in frame.columns]
    cols += sorted(c for c in frame.columns if c.startswith("ptype_"))
    return cols


def model_columns(frame, spec="main", controls=None):
    """Predictor names and publisher-level names for a regression specification."""
    if spec not in SPECS:
        raise InvalidInput(f"spec must be one of {SPECS}, got {spec!r}")
    if spec == "degree":
        emo = ["degree_of_emotion"]
    else:
        emo = [e for e in EMOTIONS if e in frame.columns]
    missing = [e for e in emo if e not in frame.columns]
    if missing or not emo:
        raise InvalidInput(f"table lacks emotion columns: {missing or list(EMOTIONS)}")
    ctrl = [c for c in (CONTROLS if controls is None else controls) if c in frame.columns]
    pubs = publisher_columns(frame)
    # columns with no variation (e.g. a control that is constant in the sample) are left out
    varied = [c for c in topic_columns(frame) + ctrl + pubs
              if pd.to_numeric(frame[c], errors="coerce").nunique(dropna=True) > 1]
    predictors = emo + varied
    return emo, predictors, [c for c in pubs if c in varied]


def regress(frame, outcome, spec="main", controls=None, method="REML", group="publisher_id"):
    """Fit one outcome under one specification; returns a ``FitResult``."""
    if outcome not in frame.columns:
        raise InvalidInput(f"outcome column {outcome!r} not in table")
    emo, predictors, pubs = model_columns(frame, spec, controls)
    design = DesignMatrix.from_frame(frame, outcome, predictors, group, tuple(pubs))
    if spec == "fe":
        return fit_fixed_effects(design)
    if spec == "random-slopes":
        return fit_random_slopes(design, emo)
    return fit_random_intercept(design, method)


def comment_consistency(article_z, comment_z, comment_article, z_threshold=1.96,
                        article_ids=None):
    """Mean comment z per emotion among articles extreme in exactly one emotion.

    ``article_z`` is (n_articles, 8); ``comment_z`` is (n_comments, 8) with
    ``comment_article`` giving each comment's article index (or id when
    ``article_ids`` is supplied). Returns one row per emotion: group sizes,
    the mean comment z for each emotion, the top emotion and whether it
    matches the group's emotion. Empty groups carry NA means and no match.
    """
    A = np.asarray(article_z, dtype=float)
    C = np.asarray(comment_z, dtype=float).reshape(-1, len(EMOTIONS))
    if article_ids is not None:
        pos = {a: i for i, a in enumerate(article_ids)}
        owner = np.array([pos.get(a, -1) for a in comment_article], dtype=int)
    else:
        owner = np.asarray(comment_article, dtype=int)
    above = A > z_threshold
    single = above.sum(axis=1) == 1
    rows = []
    for k, e in enumerate(EMOTIONS):
        group = np.flatnonzero(single & above[:, k])
        mask = np.isin(owner, group)
        row = {"emotion": e, "n_articles": int(group.size), "n_comments": int(mask.sum())}
        if mask.any():
            means = C[mask].mean(axis=0)
            top = EMOTIONS[int(np.argmax(means))]
            row.update({f"mean_{x}": float(m) for x, m in zip(EMOTIONS, means)})
            row.update({"top_emotion": top, "match": top == e})
        else:
            row.update({f"mean_{x}": float("nan") for x in EMOTIONS})
            row.update({"top_emotion": "NA", "match": False})
        rows.append(row)
    return pd.DataFrame(rows)


def ccdf_table(values, column):
    pts = ccdf(values)
    return pd.DataFrame(pts, columns=[column, "ccdf"])


def correlation_table(frame):
    cols = [f"{e}_raw" for e in EMOTIONS]
    C = correlation_matrix(frame[cols].to_numpy(dtype=float))
    out = pd.DataFrame(C, columns=list(EMOTIONS))
    out.insert(0, "emotion", list(EMOTIONS))
    return out
