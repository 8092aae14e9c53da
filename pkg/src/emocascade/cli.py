"""Command-line entry point: ``emocascade <command> ...``.

Exit status is 0 on success, 1 on a library error (message on stderr) and
2 on a usage error.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__, analysis
from ._io import read_jsonl, read_table, write_table
from .cascade import ShareEvent, build_cascade, group_events, is_complete, metrics
from .emotions import EMOTIONS
from .exceptions import EmoCascadeError
from .lexicon import (
    EmbeddingStore,
    ExpansionParams,
    Lexicon,
    expand_lexicon,
    random_search,
    validate_holdout,
)
from .pipeline import Manifest, _read_pairs, _read_profiles, pipeline_status, run_pipeline
from .scoring import Document, ModifierDictionaries, score_documents
from .stats import FitResult, hausman_test, mediation_analysis, welch_t_test
from .synth import SynthConfig, synth_all
from .topics import TopicModel, doc_topics, fit_lda, preprocess, select_k

logger = logging.getLogger("emocascade")


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _expansion_args(p):
    p.add_argument("--n", type=int, default=12, help="neighbours scored by EO-SD")
    p.add_argument("--m", type=int, default=10, help="neighbours averaged for intensities")
    p.add_argument("--alpha", type=float, default=1.2, help="EO-SD acceptance threshold")
    p.add_argument("--n-candidates", type=int, default=100)
    p.add_argument("--max-iter", type=int, default=50)


def _params(a):
    return ExpansionParams(n_candidates=a.n_candidates, n=a.n, m=a.m, alpha=a.alpha,
                           max_iterations=a.max_iter)


def _load_docs(path, min_chars=0, drop_video=False):
    docs = [Document.from_record(r) for r in read_jsonl(path)]
    if min_chars:
        docs = [d for d in docs if d.char_length >= min_chars]
    if drop_video:
        docs = [d for d in docs if d.n_videos == 0]
    return docs


# -- handlers ----------------------------------------------------------------

def cmd_lexicon_expand(a):
    store = EmbeddingStore.load(a.embeddings)
    lex, log = expand_lexicon(store, Lexicon.load(a.basic), _params(a))
    lex.save(a.out)
    if a.log:
        write_table(a.log, pd.DataFrame(log))
    print(f"{len(lex)} words after {len(log)} iterations -> {a.out}")


def cmd_lexicon_validate(a):
    store = EmbeddingStore.load(a.embeddings)
    lex = Lexicon.load(a.lexicon)
    if a.search:
        res = random_search(store, lex, n_trials=a.search, seed=a.seed)
        b = res["best"]
        print(f"best n={b['n']} m={b['m']} alpha={b['alpha']:.4g}")
        print(f"validation_mae\t{res['validation_mae']:.6g}")
        print(f"test_mae\t{res['test_mae']:.6g}")
        if a.out:
            write_table(a.out, pd.DataFrame(res["trials"]))
    else:
        mae = validate_holdout(store, lex, a.holdout_frac, a.seed, _params(a))
        print(f"holdout_mae\t{mae:.6g}")


def cmd_score(a):
    docs = _load_docs(a.articles, a.min_chars, a.drop_video)
    mods = ModifierDictionaries.load(a.negations, a.degrees)
    raw = score_documents(docs, Lexicon.load(a.lexicon), mods, a.window)
    write_table(a.out, analysis.emotion_table([d.id for d in docs], raw))
    print(f"scored {len(docs)} documents -> {a.out}")


def cmd_cascade_metrics(a):
    events = [ShareEvent.from_record(r) for r in read_jsonl(a.events)]
    publish = {}
    if a.publish_times:
        t = read_table(a.publish_times)
        publish = dict(zip(t.iloc[:, 0].astype(str), t.iloc[:, 1].astype(float)))
    profiles = _read_profiles(a.profiles) if a.profiles else {}
    pairs = _read_pairs(a.friends) if a.friends else set()
    rows = []
    for aid, evs in sorted(group_events(events).items()):
        tree = build_cascade(evs, publish.get(aid))
        row = metrics(tree, profiles, pairs).as_row()
        if a.observed_until is not None:
            row["complete"] = int(is_complete(tree, a.observed_until, a.quiet_hours))
        rows.append(row)
    write_table(a.out, pd.DataFrame(rows))
    print(f"{len(rows)} cascades -> {a.out}")


def cmd_cascade_ccdf(a):
    t = read_table(a.table)
    if a.column not in t.columns:
        raise EmoCascadeError(f"column {a.column!r} not in {a.table}")
    out = analysis.ccdf_table(t[a.column], a.column)
    if a.out:
        write_table(a.out, out)
    else:
        sys.stdout.write(out.to_csv(sep="\t", index=False))


def _corpus_tokens(a):
    docs = _load_docs(a.corpus)
    words = Lexicon.load(a.lexicon).words if a.lexicon else ()
    return docs, preprocess([d.tokens for d in docs], words, a.min_doc_freq)


def cmd_topics_fit(a):
    _, corpus = _corpus_tokens(a)
    model = fit_lda(corpus, a.k, a.iterations, a.seed)
    model.save(a.out)
    print(f"K={a.k} over {len(corpus.vocabulary)} words -> {a.out}")


def cmd_topics_select(a):
    _, corpus = _corpus_tokens(a)
    best, curve = select_k(corpus, a.ks, a.seed, a.iterations)
    frame = pd.DataFrame(sorted(curve.items()), columns=["k", "perplexity"])
    if a.out:
        write_table(a.out, frame)
    sys.stdout.write(frame.to_csv(sep="\t", index=False))
    print(f"best_k\t{best}")


def cmd_topics_infer(a):
    model = TopicModel.load(a.model)
    docs = _load_docs(a.articles)
    theta = doc_topics(model, [d.tokens for d in docs], a.iterations, a.seed)
    frame = pd.DataFrame(theta, columns=[f"topic_{k + 1}" for k in range(model.K)])
    frame.insert(0, "id", [d.id for d in docs])
    write_table(a.out, frame)
    print(f"{len(docs)} documents x {model.K} topics -> {a.out}")


def _table(path):
    t = read_table(path)
    if "publisher_id" not in t.columns:
        raise EmoCascadeError(f"{path} has no publisher_id column")
    t["publisher_id"] = t["publisher_id"].astype(str)
    return t


def cmd_regress(a):
    fit = analysis.regress(_table(a.table), a.outcome, a.spec, method=a.method)
    tab = fit.table()
    write_table(a.out, tab)
    fit.save(str(a.out) + ".fit.json")
    write_table(str(a.out) + ".variance.tsv", fit.variance_table())
    sys.stdout.write(tab.to_csv(sep="\t", index=False, float_format="%.6g"))


def cmd_mediate(a):
    t = _table(a.table)
    _, predictors, pubs = analysis.model_columns(t, "main")
    controls = [c for c in predictors if c not in EMOTIONS]
    emotions = [e for e in EMOTIONS if e in t.columns]
    rows = []
    for outcome in a.outcome:
        rep = mediation_analysis(t, outcome, a.mediator, emotions, controls,
                                 publisher_columns=pubs, mode=a.mode, method=a.method)
        f = rep.to_frame()
        f["dropped"] = rep.dropped
        rows.append(f)
    out = pd.concat(rows, ignore_index=True)
    if a.out:
        write_table(a.out, out)
    sys.stdout.write(out[["emotion", "outcome", "path_a", "total", "direct", "classification"]]
                     .to_csv(sep="\t", index=False, float_format="%.6g"))


def cmd_hausman(a):
    stat, dof, p = hausman_test(FitResult.load(a.fe), FitResult.load(a.re), robust=a.robust)
    print(f"statistic\t{stat:.6g}\ndof\t{dof}\np\t{p:.6g}")


def _sample(path):
    p = Path(path)
    if p.suffix.lower() in (".tsv", ".csv"):
        t = read_table(p)
        col = t.select_dtypes("number").columns
        if not len(col):
            raise EmoCascadeError(f"{path} has no numeric column")
        return t[col[0]].dropna().to_numpy(float)
    return np.loadtxt(p, dtype=float, ndmin=1)


def cmd_ttest(a):
    t, dof, p = welch_t_test(_sample(a.a), _sample(a.b))
    print(f"t\t{t:.6g}\ndof\t{dof:.6g}\np\t{p:.6g}")


def cmd_synth_all(a):
    cfg = SynthConfig.load(a.config) if a.config else SynthConfig.bundled()
    if a.seed is not None:
        cfg.seed = a.seed
    synth_all(cfg, a.out_dir)
    print(f"synthetic bundle -> {a.out_dir}")


def cmd_pipeline_run(a):
    report = run_pipeline(Manifest.load(a.manifest), force=a.force)
    for line in report.lines():
        print(line)


def cmd_pipeline_status(a):
    for stage, status in pipeline_status(Manifest.load(a.manifest)).items():
        print(f"{stage}\t{status}")


# -- parser ------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="emocascade",
                                 description="Emotion lexicons, cascade metrics and regressions.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    lex = sub.add_parser("lexicon", help="expand or validate an emotion lexicon")
    ls = lex.add_subparsers(dest="action", required=True)
    p = ls.add_parser("expand")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--basic", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="per-iteration growth table")
    _expansion_args(p)
    p.set_defaults(func=cmd_lexicon_expand)
    p = ls.add_parser("validate")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--holdout-frac", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--search", type=int, default=0, metavar="TRIALS",
                   help="random search over (n, m, alpha) instead of a single hold-out")
    p.add_argument("--out", help="trial table for --search")
    _expansion_args(p)
    p.set_defaults(func=cmd_lexicon_validate)

    p = sub.add_parser("score", help="score articles with a lexicon")
    p.add_argument("--articles", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--negations")
    p.add_argument("--degrees")
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--min-chars", type=int, default=0)
    p.add_argument("--drop-video", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    casc = sub.add_parser("cascade", help="cascade reconstruction and metrics")
    cs = casc.add_subparsers(dest="action", required=True)
    p = cs.add_parser("metrics")
    p.add_argument("--events", required=True)
    p.add_argument("--publish-times")
    p.add_argument("--profiles")
    p.add_argument("--friends")
    p.add_argument("--observed-until", type=float,
                   help="end of observation (hours); adds a 'complete' column")
    p.add_argument("--quiet-hours", type=float, default=168.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cascade_metrics)
    p = cs.add_parser("ccdf")
    p.add_argument("--table", required=True)
    p.add_argument("--column", default="size")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cascade_ccdf)

    top = sub.add_parser("topics", help="LDA topic controls")
    ts = top.add_subparsers(dest="action", required=True)
    for name, func in (("fit", cmd_topics_fit), ("select", cmd_topics_select)):
        p = ts.add_parser(name)
        p.add_argument("--corpus", required=True)
        p.add_argument("--lexicon", help="emotion words to exclude")
        p.add_argument("--min-doc-freq", type=float, default=0.001)
        p.add_argument("--iterations", type=int, default=800)
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
        if name == "fit":
            p.add_argument("--k", type=int, default=30)
            p.add_argument("--out", required=True, help="model directory")
        else:
            p.add_argument("--ks", type=_ints, default=list(range(5, 65, 5)))
            p.add_argument("--out")
    p = ts.add_parser("infer")
    p.add_argument("--model", required=True)
    p.add_argument("--articles", required=True)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_topics_infer)

    p = sub.add_parser("regress", help="fit one outcome on the analysis table")
    p.add_argument("--table", required=True)
    p.add_argument("--outcome", default="depth")
    p.add_argument("--spec", choices=analysis.SPECS, default="main")
    p.add_argument("--method", choices=("REML", "ML"), default="REML")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("mediate", help="three-step mediation per emotion")
    p.add_argument("--table", required=True)
    p.add_argument("--mediator", required=True, choices=sorted(analysis.MEDIATORS))
    p.add_argument("--outcome", action="append", default=None,
                   help="repeatable; defaults to every cascade outcome")
    p.add_argument("--mode", choices=("mixed", "ols"), default="mixed")
    p.add_argument("--method", choices=("REML", "ML"), default="REML")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mediate)

    p = sub.add_parser("hausman", help="FE vs RE contrast from saved fits")
    p.add_argument("--fe", required=True, help="FE fit JSON written by regress")
    p.add_argument("--re", required=True, help="random-intercept fit JSON")
    p.add_argument("--robust", action="store_true", help="use the clustered FE covariance")
    p.set_defaults(func=cmd_hausman)

    p = sub.add_parser("ttest", help="Welch two-sample t-test")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_ttest)

    syn = sub.add_parser("synth", help="synthetic data with planted truth")
    ss = syn.add_subparsers(dest="action", required=True)
    p = ss.add_parser("all")
    p.add_argument("--config", help="JSON config; defaults to the bundled one")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth_all)

    pipe = sub.add_parser("pipeline", help="manifest-driven end-to-end run")
    ps = pipe.add_subparsers(dest="action", required=True)
    p = ps.add_parser("run")
    p.add_argument("--manifest", required=True)
    p.add_argument("--force", action="store_true", help="ignore cached stage outputs")
    p.set_defaults(func=cmd_pipeline_run)
    p = ps.add_parser("status")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_pipeline_status)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "outcome", None) is None and args.command == "mediate":
        args.outcome = list(analysis.OUTCOMES)
    try:
        args.func(args)
    except EmoCascadeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
