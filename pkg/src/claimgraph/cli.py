"""Batch front door for the offline workflows plus launching the service.

Exit codes: 0 success, 1 usage error, 2 data error. Results go to files;
log lines go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .core import Category, Metric
from .cluster import dbscan
from .detection import (
    ClaimClassifier,
    categorize,
    evaluate_prf,
    filter_categories,
    load_labeled_corpus,
    predict,
    split_sentences,
    train_classifier,
)
from .embeddings import (
    StoreProvider,
    TfidfProvider,
    VectorStore,
    fit_tfidf,
    load_tfidf_model,
    save_tfidf_model,
)
from .errors import ClaimgraphError
from .evaluation import (
    QualityParams,
    distance_histogram,
    grid_search_epsilon,
    load_pairs_csv,
    load_story_claims_jsonl,
    threshold_sweep,
    write_report_csv,
)

log = logging.getLogger("claimgraph")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="claimgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("detect-train", "train the claim classifier on a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tfidf-out", default=None, help="where to save the fitted TF-IDF model")
    p.add_argument("--hash-dim", type=int, default=256)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--threshold", type=float, default=0.5)

    p = add("detect-eval", "evaluate a trained classifier on a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--tfidf-model", required=True)
    p.add_argument("--out", required=True)

    p = add("detect-run", "detect claims in a plain-text article")
    p.add_argument("--article", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--tfidf-model", required=True)
    p.add_argument("--out", required=True)

    p = add("cluster-batch", "batch-cluster story-labeled claims at one epsilon")
    p.add_argument("--claims", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--min-size", type=int, default=1)
    p.add_argument("--vectors", default=None, help="precomputed vector store (JSONL)")
    p.add_argument("--hash-dim", type=int, default=4096)
    p.add_argument("--metric", choices=[m.value for m in Metric], default=None)
    p.add_argument("--out", required=True)

    p = add("grid-search", "epsilon grid search with a Table-style report row")
    p.add_argument("--claims", required=True)
    p.add_argument("--grid", required=True, help="start:stop:step, e.g. 0.4:1.6:0.05")
    p.add_argument("--min-size", type=int, default=2)
    p.add_argument("--vectors", default=None)
    p.add_argument("--hash-dim", type=int, default=4096)
    p.add_argument("--metric", choices=[m.value for m in Metric], default=None)
    p.add_argument("--quality-a", type=float, default=None)
    p.add_argument("--quality-b", type=float, default=None)
    p.add_argument("--quality-c", type=float, default=None)
    p.add_argument("--out-dir", required=True)

    p = add("eval-duplicates", "threshold sweep + histogram on a labeled pair corpus")
    p.add_argument("--pairs", required=True)
    p.add_argument("--vectors", default=None)
    p.add_argument("--hash-dim", type=int, default=4096)
    p.add_argument("--metric", choices=[m.value for m in Metric], default=None)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--column-map", default=None, help="JSON column mapping for the CSV")
    p.add_argument("--out-dir", required=True)

    p = add("histogram", "duplicate/non-duplicate distance histogram only")
    p.add_argument("--pairs", required=True)
    p.add_argument("--vectors", default=None)
    p.add_argument("--hash-dim", type=int, default=4096)
    p.add_argument("--metric", choices=[m.value for m in Metric], default=None)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--column-map", default=None)
    p.add_argument("--out-dir", required=True)

    p = add("serve", "run the HTTP service")
    p.add_argument("--config", default=None, help="path to the service config JSON")

    p = add("replay", "rebuild engine state from the event log and snapshot it")
    p.add_argument("--config", default=None)
    p.add_argument("--snapshot-out", required=True)

    p = add("bench-insert", "insertion latency curve versus graph size")
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--epsilon", type=float, default=4.0)
    p.add_argument("--blob-size", type=int, default=50)
    p.add_argument("--blob-std", type=float, default=0.1)
    p.add_argument("--checkpoints", default="1000,5000,10000")
    p.add_argument("--out-dir", required=True)

    return parser


def _pair_provider(args):
    if args.vectors:
        provider = StoreProvider(store=VectorStore.load(args.vectors))
    else:
        # self-contained default: fit the TF-IDF baseline on the input texts
        provider = None
    return provider


def _texts_provider(args, texts: List[str]):
    provider = _pair_provider(args)
    if provider is None:
        model = fit_tfidf(texts, hash_dim=args.hash_dim)
        provider = TfidfProvider(model=model)
    return provider


def _metric(args) -> Optional[Metric]:
    return Metric(args.metric) if args.metric else None


def _parse_grid(spec: str) -> List[float]:
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise _UsageError(f"bad --grid spec {spec!r}, expected start:stop:step")
    if step <= 0 or stop < start:
        raise _UsageError(f"bad --grid range {spec!r}")
    return [float(x) for x in np.arange(start, stop + step / 2, step)]


def _features(tfidf_model, corpus):
    provider = TfidfProvider(model=tfidf_model)
    texts = [t for t, _ in corpus]
    labels = [1 if cat == Category.CHECKABLE else 0 for _, cat in corpus]
    return provider.embed(texts), labels


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_detect_train(args) -> int:
    corpus = load_labeled_corpus(args.corpus)
    model = fit_tfidf([t for t, _ in corpus], hash_dim=args.hash_dim)
    vectors, labels = _features(model, corpus)
    clf = train_classifier(
        list(zip(vectors, labels)),
        l2_lambda=args.l2,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        threshold=args.threshold,
    )
    clf.save(args.out)
    tfidf_out = args.tfidf_out or str(Path(args.out).with_suffix(".tfidf.json"))
    save_tfidf_model(model, tfidf_out)
    log.info("trained classifier on %d sentences -> %s", len(corpus), args.out)
    return 0


def _cmd_detect_eval(args) -> int:
    corpus = load_labeled_corpus(args.corpus)
    clf = ClaimClassifier.load(args.model)
    model = load_tfidf_model(args.tfidf_model)
    vectors, labels = _features(model, corpus)
    predicted = [predict(clf, v)[1] for v in vectors]
    precision, recall, f1 = evaluate_prf(predicted, [bool(x) for x in labels])
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump({"precision": precision, "recall": recall, "f1": f1, "n": len(corpus)}, f)
    log.info("detect-eval P=%.3f R=%.3f F1=%.3f", precision, recall, f1)
    return 0


def _cmd_detect_run(args) -> int:
    text = Path(args.article).read_text(encoding="utf-8")
    clf = ClaimClassifier.load(args.model)
    model = load_tfidf_model(args.tfidf_model)
    provider = TfidfProvider(model=model)
    sentences = split_sentences(text, article_id=args.article)
    with open(args.out, "w", encoding="utf-8") as f:
        for sent, vec in zip(sentences, provider.embed([s.text for s in sentences])):
            score, is_claim = predict(clf, vec)
            category = categorize(sent.text)
            f.write(
                json.dumps(
                    {
                        "text": sent.text,
                        "char_start": sent.char_start,
                        "char_end": sent.char_end,
                        "score": score,
                        "is_claim": is_claim
                        and category
                        not in (Category.PREDICTION, Category.PERSONAL_EXPERIENCE),
                        "category": category.value,
                    }
                )
                + "\n"
            )
    log.info("detect-run: %d sentences -> %s", len(sentences), args.out)
    return 0


def _cmd_cluster_batch(args) -> int:
    claims = load_story_claims_jsonl(args.claims)
    provider = _texts_provider(args, [c.text for c in claims])
    metric = _metric(args) or provider.metric
    vectors = provider.embed([c.text for c in claims])
    result = dbscan(vectors, epsilon=args.epsilon, min_size=args.min_size, metric=metric)
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(
            {
                "epsilon": args.epsilon,
                "min_size": args.min_size,
                "metric": metric.value,
                "labels": result.labels,
                "cluster_count": result.cluster_count,
            },
            f,
        )
    log.info("cluster-batch: %d claims, %d clusters", len(claims), result.cluster_count)
    return 0


def _cmd_grid_search(args) -> int:
    from .plots import emit_html, plot_curve

    claims = load_story_claims_jsonl(args.claims)
    provider = _texts_provider(args, [c.text for c in claims])
    grid = _parse_grid(args.grid)
    params = None
    if args.quality_a or args.quality_b or args.quality_c:
        params = QualityParams(
            A=args.quality_a or 1.0,
            B=args.quality_b or 1.0,
            C=args.quality_c or 1.0 / len(claims),
        )
    result = grid_search_epsilon(
        claims, provider, grid, min_size=args.min_size, params=params, metric=_metric(args)
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report_csv([result.report_row], out / "report.csv")
    with open(out / "grid.json", "w", encoding="utf-8") as f:
        json.dump(
            {"best_epsilon": result.best_epsilon, "curve": result.curve_json_obj()}, f
        )
    fig = plot_curve(
        [(eps, s.score) for eps, s in result.curve],
        xlabel="epsilon",
        ylabel="cluster quality score",
        out_png=out / "grid_curve.png",
        title="Cluster quality vs epsilon",
    )
    emit_html("Epsilon grid search", [fig], out / "report.html")
    log.info("grid-search: best epsilon %.4f score %.4f", result.best_epsilon, result.best_score.score)
    return 0


def _load_pairs(args):
    column_map = json.loads(args.column_map) if args.column_map else None
    return load_pairs_csv(args.pairs, column_map=column_map)


def _cmd_eval_duplicates(args) -> int:
    from .plots import emit_html, plot_curve, plot_histogram

    pairs = _load_pairs(args)
    texts = [p.text_a for p in pairs] + [p.text_b for p in pairs]
    provider = _texts_provider(args, texts)
    metric = _metric(args)
    sweep = threshold_sweep(pairs, provider, metric)
    hist = distance_histogram(pairs, provider, metric, bins=args.bins)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "duplicates.json", "w", encoding="utf-8") as f:
        json.dump(
            {
                "best_threshold": sweep.best_threshold,
                "best_f1": sweep.best_f1,
                "curve": sweep.curve,
                "histogram": hist.to_json_obj(),
            },
            f,
        )
    figs = [
        plot_histogram(hist, out / "distance_histogram.png", "Pair distances by label"),
        plot_curve(
            sweep.curve,
            xlabel="threshold",
            ylabel="F1",
            out_png=out / "threshold_sweep.png",
            title="F1 vs duplicate threshold",
        ),
    ]
    emit_html("Duplicate-pair evaluation", figs, out / "report.html")
    log.info("eval-duplicates: best F1 %.4f at threshold %.4f", sweep.best_f1, sweep.best_threshold)
    return 0


def _cmd_histogram(args) -> int:
    from .plots import emit_html, plot_histogram

    pairs = _load_pairs(args)
    texts = [p.text_a for p in pairs] + [p.text_b for p in pairs]
    provider = _texts_provider(args, texts)
    hist = distance_histogram(pairs, provider, _metric(args), bins=args.bins)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "histogram.json", "w", encoding="utf-8") as f:
        json.dump(hist.to_json_obj(), f)
    fig = plot_histogram(hist, out / "distance_histogram.png", "Pair distances by label")
    emit_html("Distance histogram", [fig], out / "report.html")
    return 0


def _service_config(args):
    import os

    from .service import ServiceConfig

    path = args.config or os.environ.get("CLAIMGRAPH_CONFIG")
    if not path:
        raise _UsageError("--config or CLAIMGRAPH_CONFIG required")
    return ServiceConfig.load(path)


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    cfg = _service_config(args)
    state = ServiceState(cfg)
    app = create_app(state)
    host, _, port = cfg.listen_address.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080))
    return 0


def _cmd_replay(args) -> int:
    from .service import ServiceState

    cfg = _service_config(args)
    state = ServiceState(cfg)
    state.engine.save_snapshot(args.snapshot_out)
    state.close()
    log.info(
        "replay: %d claims, %d clusters -> %s",
        len(state.engine),
        len(set(state.engine.communities.values())),
        args.snapshot_out,
    )
    return 0


def _cmd_bench_insert(args) -> int:
    from .bench import run_bench
    from .plots import emit_html, plot_curve

    checkpoints = [int(x) for x in args.checkpoints.split(",") if x]
    result = run_bench(
        n=args.count,
        dim=args.dim,
        epsilon=args.epsilon,
        blob_size=args.blob_size,
        blob_std=args.blob_std,
        seed=args.seed,
        checkpoints=checkpoints,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bench.json", "w", encoding="utf-8") as f:
        json.dump(result.to_json_obj(), f)
    fig = plot_curve(
        [(c.size, c.median_ms) for c in result.checkpoints],
        xlabel="stored claims",
        ylabel="median insert latency (ms)",
        out_png=out / "latency_curve.png",
        title=f"Insert latency vs graph size (dim {args.dim})",
    )
    emit_html("Insertion latency", [fig], out / "report.html")
    for c in result.checkpoints:
        log.info(
            "bench-insert size=%d median=%.1fms p95=%.1fms", c.size, c.median_ms, c.p95_ms
        )
    return 0


_COMMANDS = {
    "detect-train": _cmd_detect_train,
    "detect-eval": _cmd_detect_eval,
    "detect-run": _cmd_detect_run,
    "cluster-batch": _cmd_cluster_batch,
    "grid-search": _cmd_grid_search,
    "eval-duplicates": _cmd_eval_duplicates,
    "histogram": _cmd_histogram,
    "serve": _cmd_serve,
    "replay": _cmd_replay,
    "bench-insert": _cmd_bench_insert,
}


def run(argv: Sequence[str]) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s %(message)s"
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise _UsageError("a subcommand is required")
        return _COMMANDS[args.command](args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (ClaimgraphError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
