"""Batch command-line interface.

Typical pipeline:

    concernlens synth --passages 2000 --seed 7 --out corpus.jsonl \\
        --teacher-script script.json --gold gold.jsonl
    concernlens ingest raw.jsonl --format jsonl --out corpus.jsonl
    concernlens annotate --mode multilabel --teacher mock \\
        --script script.json --in corpus.jsonl --out annotations.jsonl
    concernlens train --task multilabel --scheme log1p --seed 7 \\
        --annotations annotations.jsonl --corpus corpus.jsonl --out model.clm
    concernlens classify --model model.clm --in corpus.jsonl \\
        --out labels.jsonl --report timing
    concernlens trend --corpus corpus.jsonl --labels labels.jsonl \\
        --window 500 --out trends.csv
    concernlens evaluate --gold gold.jsonl --pred labels.jsonl

Every command exits 0 on success and nonzero with a message on failure;
all randomness is controlled by --seed flags.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from .analytics import ArticleLabel, rolling_average, trends_to_csv
from .errors import ConcernLensError
from .features import FeaturizerConfig
from .ingest import iter_ingest_file, IngestSummary
from .metrics import binary_metrics, multilabel_report
from .pipeline import (
    classify_documents,
    read_annotations,
    read_corpus,
    write_annotations,
    write_corpus,
)
from .storage import DataStore, StoreCache
from .students import (
    WeightingScheme,
    load_model,
    save_model,
    select_thresholds,
    train_on_texts,
)
from .synthetic import LookupTeacher, SyntheticConfig, generate
from .taxonomy import default_taxonomy, load_taxonomy_file
from .teacher import HttpTeacher, TeacherConfig, annotate_corpus, annotation_report


def _taxonomy(path: str | None):
    return load_taxonomy_file(path) if path else default_taxonomy()


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(2)


@click.group()
def main() -> None:
    """Classify text corpora against a hierarchical concern taxonomy."""


@main.command()
@click.option("--passages", "n_passages", default=2000, show_default=True,
              help="Approximate number of passages to generate.")
@click.option("--passages-per-article", default=14, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--taxonomy", "taxonomy_path", type=click.Path(exists=True), default=None)
@click.option("--out", "corpus_out", required=True, type=click.Path())
@click.option("--teacher-script", "script_out", type=click.Path(), default=None,
              help="Write the mock-teacher answer table here.")
@click.option("--gold", "gold_out", type=click.Path(), default=None,
              help="Write gold per-passage labels (annotation JSONL) here.")
def synth(n_passages, passages_per_article, seed, taxonomy_path, corpus_out, script_out, gold_out):
    """Generate a seeded synthetic corpus with planted labels."""
    tax = _taxonomy(taxonomy_path)
    n_articles = max(1, round(n_passages / passages_per_article))
    corpus = generate(
        SyntheticConfig(
            n_articles=n_articles, passages_per_article=passages_per_article, seed=seed
        ),
        tax,
    )
    with open(corpus_out, "w", encoding="utf-8") as f:
        count = write_corpus(corpus.documents, f)
    click.echo(f"wrote {count} documents / {len(corpus.passages)} passages to {corpus_out}")
    if script_out:
        with open(script_out, "w", encoding="utf-8") as f:
            json.dump(corpus.teacher_script(), f)
        click.echo(f"wrote teacher script to {script_out}")
    if gold_out:
        with open(gold_out, "w", encoding="utf-8") as f:
            for p in corpus.passages:
                labels = corpus.gold_labels[p.passage_id]
                f.write(json.dumps({
                    "passage_id": p.passage_id,
                    "labels": {nid: int(labels[i]) for i, nid in enumerate(tax.ids)},
                    "relevance": corpus.gold_relevance[p.passage_id],
                    "provenance": "human",
                    "valid": True,
                }, sort_keys=True) + "\n")
        click.echo(f"wrote gold labels to {gold_out}")


@main.command()
@click.argument("input_file", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv", "plain"]), default="jsonl",
              show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--max-passage-len", default=1200, show_default=True)
def ingest(input_file, fmt, out_path, max_passage_len):
    """Segment an uploaded file into a corpus of documents."""
    summary = IngestSummary()
    with open(input_file, "rb") as src, open(out_path, "w", encoding="utf-8") as dst:
        count = write_corpus(
            iter_ingest_file(src, fmt, summary=summary, max_passage_len=max_passage_len),
            dst,
        )
    click.echo(f"ingested {count} documents to {out_path}")
    if summary.skipped:
        click.echo(f"skipped {len(summary.skipped)} malformed records:", err=True)
        for line, reason in summary.skipped[:20]:
            click.echo(f"  line {line}: {reason}", err=True)
        sys.exit(1)


@main.command()
@click.option("--mode", type=click.Choice(["relevance", "multilabel"]), required=True)
@click.option("--teacher", "teacher_kind", type=click.Choice(["mock", "http"]), default="mock",
              show_default=True)
@click.option("--script", "script_path", type=click.Path(exists=True), default=None,
              help="Mock teacher answer table (from `synth --teacher-script`).")
@click.option("--endpoint", default=None, help="HTTP teacher chat endpoint.")
@click.option("--model-name", default="gpt-teacher", show_default=True)
@click.option("--api-key-env", default="CONCERNLENS_TEACHER_KEY", show_default=True,
              help="Environment variable holding the teacher API key.")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--cache-dir", type=click.Path(), default=None,
              help="Teacher response cache directory (default: <out>.cache).")
@click.option("--taxonomy", "taxonomy_path", type=click.Path(exists=True), default=None)
@click.option("--max-parallel", default=4, show_default=True)
@click.option("--retry-limit", default=2, show_default=True)
def annotate(mode, teacher_kind, script_path, endpoint, model_name, api_key_env,
             in_path, out_path, cache_dir, taxonomy_path, max_parallel, retry_limit):
    """Label a corpus with the teacher (scripted mock or live HTTP)."""
    import os

    tax = _taxonomy(taxonomy_path)
    with open(in_path, "r", encoding="utf-8") as f:
        passages = [p for doc in read_corpus(f) for p in doc.passages]
    cfg = TeacherConfig(
        endpoint=endpoint or "",
        model_name=model_name,
        api_key=os.environ.get(api_key_env, ""),
        max_parallel=max_parallel,
        retry_limit=retry_limit,
        backoff_base=0.0 if teacher_kind == "mock" else 0.5,
    )
    if teacher_kind == "mock":
        if not script_path:
            raise _fail("--teacher mock requires --script")
        teacher = LookupTeacher.from_file(script_path, tax)
    else:
        if not endpoint:
            raise _fail("--teacher http requires --endpoint")
        teacher = HttpTeacher(cfg)
    cache_root = Path(cache_dir) if cache_dir else Path(str(out_path) + ".cache")
    cache = StoreCache(DataStore(cache_root))
    records = annotate_corpus(passages, mode, cfg, teacher, tax, cache=cache)
    node_ids = ["relevance"] if mode == "relevance" else list(tax.ids)
    with open(out_path, "w", encoding="utf-8") as f:
        write_annotations(records, node_ids, f)
    report = annotation_report(records)
    report["cache_hits"] = cache.hits
    click.echo(json.dumps(report, indent=2))
    if report["valid"] == 0:
        raise _fail("no valid annotations produced")


@main.command()
@click.option("--task", type=click.Choice(["relevance", "multilabel"]), required=True)
@click.option("--scheme", default="baseline", show_default=True,
              help="baseline | clamp(K) | no_clamp | log1p")
@click.option("--seed", default=0, show_default=True)
@click.option("--annotations", "ann_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--taxonomy", "taxonomy_path", type=click.Path(exists=True), default=None)
@click.option("--epochs", default=10, show_default=True)
@click.option("--lr", default=0.1, show_default=True)
@click.option("--batch", default=64, show_default=True)
@click.option("--l2", default=1e-6, show_default=True)
@click.option("--hash-dims", default=2**18, show_default=True)
@click.option("--ngram-max", default=2, show_default=True)
@click.option("--val-frac", default=0.1, show_default=True,
              help="Trailing fraction held out for per-label threshold tuning.")
@click.option("--skip-invalid/--keep-invalid", default=True, show_default=True,
              help="Drop teacher annotations flagged valid=false.")
def train(task, scheme, seed, ann_path, corpus_path, out_path, taxonomy_path,
          epochs, lr, batch, l2, hash_dims, ngram_max, val_frac, skip_invalid):
    """Distill teacher annotations into a student model."""
    tax = _taxonomy(taxonomy_path)
    with open(corpus_path, "r", encoding="utf-8") as f:
        text_by_passage = {
            p.passage_id: p.text for doc in read_corpus(f) for p in doc.passages
        }
    with open(ann_path, "r", encoding="utf-8") as f:
        annotations = read_annotations(f)
    node_ids = ["relevance"] if task == "relevance" else list(tax.ids)
    texts, rows = [], []
    for rec in annotations:
        if skip_invalid and not rec.get("valid", True):
            continue
        pid = rec["passage_id"]
        if pid not in text_by_passage:
            raise _fail(f"annotation references unknown passage {pid!r}")
        labels = rec["labels"]
        try:
            rows.append([int(labels[nid]) for nid in node_ids])
        except KeyError as exc:
            raise _fail(f"annotation for {pid!r} lacks label {exc}")
        texts.append(text_by_passage[pid])
    if not texts:
        raise _fail("no usable annotations")
    Y = np.asarray(rows, dtype=float)
    featurizer = FeaturizerConfig(hash_dims=hash_dims, n_gram_range=(1, ngram_max))
    val_n = int(len(texts) * val_frac)
    fit_texts, fit_Y = (texts[:-val_n], Y[:-val_n]) if val_n else (texts, Y)
    model = train_on_texts(
        fit_texts, fit_Y, WeightingScheme.parse(scheme),
        featurizer=featurizer, taxonomy_version=tax.version,
        epochs=epochs, lr=lr, batch_size=batch, seed=seed, l2=l2,
    )
    if val_n:
        model = select_thresholds(model, texts[-val_n:], Y[-val_n:])
    with open(out_path, "wb") as f:
        f.write(save_model(model))
    click.echo(
        f"trained {task} student ({scheme}, seed {seed}) on {len(fit_texts)} passages"
        + (f", thresholds tuned on {val_n}" if val_n else "")
        + f"; saved to {out_path}"
    )


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--taxonomy", "taxonomy_path", type=click.Path(exists=True), default=None)
@click.option("--report", "report_kind", type=click.Choice(["none", "timing"]), default="none")
def classify(model_path, in_path, out_path, taxonomy_path, report_kind):
    """Classify every passage of a corpus with a trained student."""
    tax = _taxonomy(taxonomy_path)
    try:
        with open(model_path, "rb") as f:
            model = load_model(f.read(), tax.version)
    except FileNotFoundError:
        raise _fail(f"model file not found: {model_path}")
    with open(in_path, "r", encoding="utf-8") as f:
        docs = list(read_corpus(f))
    node_ids = list(tax.ids) if model.num_labels == len(tax) else ["relevance"]
    started = time.perf_counter()
    classified = classify_documents(model, docs, tax) if model.num_labels == len(tax) else None
    if classified is None:
        from .students import predict_batch

        texts = [p.text for doc in docs for p in doc.passages]
        scores, labels = predict_batch(model, texts)
    elapsed = time.perf_counter() - started
    n_passages = sum(len(d.passages) for d in docs)
    with open(out_path, "w", encoding="utf-8") as f:
        if classified is not None:
            for cdoc in classified:
                for p in cdoc.passages:
                    f.write(json.dumps({
                        "doc_id": cdoc.doc_id,
                        "passage_id": p.passage_id,
                        "labels": {nid: p.labels[i] for i, nid in enumerate(node_ids)},
                        "scores": {nid: p.scores[i] for i, nid in enumerate(node_ids)},
                    }, sort_keys=True) + "\n")
        else:
            i = 0
            for doc in docs:
                for p in doc.passages:
                    f.write(json.dumps({
                        "doc_id": doc.doc_id,
                        "passage_id": p.passage_id,
                        "labels": {"relevance": int(labels[i, 0])},
                        "scores": {"relevance": float(scores[i, 0])},
                    }, sort_keys=True) + "\n")
                    i += 1
    click.echo(f"classified {n_passages} passages from {len(docs)} documents to {out_path}")
    if report_kind == "timing":
        rate = n_passages / elapsed if elapsed > 0 else float("inf")
        click.echo(f"timing: {elapsed:.2f}s predict time, {rate:.0f} passages/s")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True))
@click.option("--window", default=500, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--taxonomy", "taxonomy_path", type=click.Path(exists=True), default=None)
@click.option("--emit-partial", is_flag=True, default=False,
              help="Emit warm-up points averaged over the available prefix.")
def trend(corpus_path, labels_path, window, out_path, taxonomy_path, emit_partial):
    """Aggregate passage labels by article and export rolling-average trends."""
    from .analytics import aggregate_article
    from .taxonomy import LabelVector

    tax = _taxonomy(taxonomy_path)
    with open(labels_path, "r", encoding="utf-8") as f:
        by_passage = {rec["passage_id"]: rec["labels"] for rec in read_annotations(f)}
    articles = []
    with open(corpus_path, "r", encoding="utf-8") as f:
        for doc in read_corpus(f):
            vectors = []
            for p in doc.passages:
                labels = by_passage.get(p.passage_id)
                if labels is None:
                    raise _fail(f"labels file lacks passage {p.passage_id!r}")
                vectors.append(
                    LabelVector(values=tuple(int(labels[nid]) for nid in tax.ids))
                )
            if doc.published_at is None:
                raise _fail(f"document {doc.doc_id!r} has no date; trends need dates")
            articles.append(
                ArticleLabel(doc_id=doc.doc_id, labels=aggregate_article(vectors),
                             date=doc.published_at)
            )
    articles.sort(key=lambda a: (a.date, a.doc_id))
    series = rolling_average(articles, window=window, concern_ids=list(tax.ids),
                             emit_partial=emit_partial)
    csv_text = trends_to_csv(series)
    with open(out_path, "w", encoding="utf-8") as f:
        f.write(csv_text)
    n_points = len(series[0].points) if series else 0
    click.echo(f"wrote {n_points} trend points x {len(series)} concerns to {out_path}")


@main.command()
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--taxonomy", "taxonomy_path", type=click.Path(exists=True), default=None)
def evaluate(gold_path, pred_path, taxonomy_path):
    """Score predicted labels against gold labels (joined on passage_id)."""
    tax = _taxonomy(taxonomy_path)
    with open(gold_path, "r", encoding="utf-8") as f:
        gold = {r["passage_id"]: r["labels"] for r in read_annotations(f)}
    with open(pred_path, "r", encoding="utf-8") as f:
        pred = {r["passage_id"]: r["labels"] for r in read_annotations(f)}
    shared = sorted(set(gold) & set(pred))
    if not shared:
        raise _fail("gold and pred share no passage ids")
    sample = gold[shared[0]]
    if set(sample.keys()) == {"relevance"}:
        g = [bool(gold[pid]["relevance"]) for pid in shared]
        p = [bool(pred[pid]["relevance"]) for pid in shared]
        click.echo(json.dumps(binary_metrics(p, g).to_dict(), indent=2))
        return
    node_ids = [nid for nid in tax.ids if nid in sample]
    G = np.array([[int(gold[pid][nid]) for nid in node_ids] for pid in shared])
    P = np.array([[int(pred[pid][nid]) for nid in node_ids] for pid in shared])
    report = multilabel_report(P, G, label_ids=node_ids)
    click.echo(report.to_json())


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
def serve(config_path, host, port):
    """Run the HTTP service (configuration file + environment overrides)."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.from_file(config_path)
    if host:
        config.host = host
    if port:
        config.port = port
    uvicorn.run(create_app(config), host=config.host, port=config.port)


def _wrap_errors() -> None:
    """Convert domain errors into exit-code-2 messages."""
    original = main.invoke

    def invoke(ctx):
        try:
            return original(ctx)
        except ConcernLensError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    main.invoke = invoke


_wrap_errors()


if __name__ == "__main__":
    main()
