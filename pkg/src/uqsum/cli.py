"""Command-line frontend: score, evaluate, correlate, and report emitters.

Exit codes: 0 on success, 2 on usage errors, 1 on data errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

from uqsum import analysis, render, scoring
from uqsum.config import ConfigError, RunConfig
from uqsum.nlg import (
    Dimension,
    JudgePromptBatch,
    JudgeTemplateConfig,
    JudgeVariant,
    MetricDescriptor,
    MetricSource,
    emit_judge_prompts,
    ingest_metric_scores,
    load_judge_batch,
    parse_judge_responses,
    parse_probability_responses,
)
from uqsum.records import SchemaError, ScoreKind, parse_record_file

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    pass


def _safe_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def _load_manifest(scores_dir: Path) -> dict:
    manifest_path = scores_dir / "manifest.json"
    if not manifest_path.exists():
        raise SchemaError(f"no manifest.json in {scores_dir}")
    return json.loads(manifest_path.read_text(encoding="utf-8"))


def _write_manifest(scores_dir: Path, manifest: dict) -> None:
    render.atomic_write(scores_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def _manifest_vectors(scores_dir: Path, manifest: dict, kind: ScoreKind) -> list:
    vectors = []
    for entry in manifest["entries"]:
        if entry["kind"] != kind.value:
            continue
        vectors.append(
            scoring.read_score_file(
                scores_dir / entry["file"], entry["name"], ScoreKind(entry["kind"]), entry["higher_is_better"]
            )
        )
    return vectors


def cmd_score(args) -> int:
    cfg = RunConfig.from_sources(
        args.config, corpus=args.corpus, out=args.out, seed=args.seed, alpha=args.alpha
    )
    cfg.validate()
    if cfg.corpus is None:
        raise UsageError("a corpus path is required (config key corpus or --corpus)")
    records = parse_record_file(cfg.corpus)
    if not records:
        raise SchemaError(f"{cfg.corpus}: empty corpus")

    train_embeddings = (
        scoring.load_embedding_file(cfg.train_embeddings) if cfg.train_embeddings else None
    )
    reference_embeddings = (
        scoring.load_keyed_embedding_file(cfg.reference_embeddings) if cfg.reference_embeddings else None
    )
    p_true = (
        parse_probability_responses(cfg.p_true_responses, [r.id for r in records])
        if cfg.p_true_responses
        else None
    )

    method_vectors, method_skips = scoring.compute_method_scores(
        records,
        cfg.methods,
        train_embeddings=train_embeddings,
        p_true=p_true,
        set_threshold=cfg.set_threshold,
        variance_kept=cfg.variance_kept,
    )
    metric_vectors, metric_skips = scoring.compute_native_metric_scores(
        records, cfg.metrics, reference_embeddings=reference_embeddings
    )

    scores_dir = Path(cfg.out) / "scores"
    entries = []
    for vector in method_vectors + metric_vectors:
        filename = _safe_filename(vector.name) + ".jsonl"
        scoring.write_score_file(vector, scores_dir / filename)
        entries.append(
            {
                "name": vector.name,
                "kind": vector.kind.value,
                "higher_is_better": vector.higher_is_better,
                "file": filename,
            }
        )
    manifest = {"seed": cfg.seed, "alpha": cfg.alpha, "entries": entries}
    _write_manifest(scores_dir, manifest)

    skips = [vars(s) for s in method_skips + metric_skips]
    render.atomic_write(scores_dir / "skips.json", json.dumps(skips, indent=2) + "\n")
    for skip in method_skips + metric_skips:
        print(f"skipped {skip.name}: {skip.reason_code}" + (f" ({skip.detail})" if skip.detail else ""))
    print(f"wrote {len(entries)} score files to {scores_dir}")
    return 0


def cmd_evaluate(args) -> int:
    scores_dir = Path(args.scores)
    manifest = _load_manifest(scores_dir)
    seed = args.seed if args.seed is not None else manifest.get("seed", 42)
    alpha = args.alpha if args.alpha is not None else manifest.get("alpha", 1000)
    ue_vectors = _manifest_vectors(scores_dir, manifest, ScoreKind.UNCERTAINTY)
    nlg_vectors = _manifest_vectors(scores_dir, manifest, ScoreKind.NLG)
    if not ue_vectors:
        raise UsageError("no uncertainty score files found in the scores directory")
    if not nlg_vectors:
        raise UsageError("no quality-metric score files found in the scores directory")
    table = analysis.build_prr_table(ue_vectors, nlg_vectors, alpha=alpha, seed=seed)
    out = Path(args.out) / "tables"
    render.atomic_write(out / "ue_nlg.csv", render.table_to_csv(table))
    render.atomic_write(out / "ue_nlg.md", render.table_to_markdown(table))
    render.atomic_write(out / "ue_nlg.json", render.table_to_json(table))
    print(f"wrote PRR table ({len(table.row_names)}x{len(table.col_names)}) to {out}")
    return 0


def cmd_correlate(args) -> int:
    table = render.load_table_json(args.table)
    names, matrix = analysis.correlation_matrix(table, args.axis)
    out = Path(args.out) / "correlation"
    stem = args.axis
    render.atomic_write(out / f"{stem}.csv", render.matrix_to_csv(names, matrix))
    render.atomic_write(out / f"{stem}.json", render.matrix_to_json(names, matrix))
    render.atomic_write(
        out / f"{stem}.svg",
        render.heatmap_svg(names, names, matrix, title=f"Spearman correlation ({stem})"),
    )
    print(f"wrote correlation outputs to {out}")
    return 0


def cmd_emit_prompts(args) -> int:
    cfg = RunConfig.from_sources(args.config, corpus=args.corpus)
    if cfg.corpus is None:
        raise UsageError("a corpus path is required (config key corpus or --corpus)")
    records = parse_record_file(cfg.corpus)
    template = JudgeTemplateConfig(scale_min=cfg.judge_scale_min, scale_max=cfg.judge_scale_max)
    batch = emit_judge_prompts(
        records,
        JudgeVariant(args.variant),
        Dimension(args.dimension),
        config=template,
        path=args.out,
    )
    print(f"wrote {len(batch.items)} prompts for {batch.metric_name} to {args.out}")
    if args.execute:
        if not (cfg.judge_base_url and cfg.judge_model):
            raise UsageError("--execute needs judge_base_url and judge_model in the config")
        from uqsum.judge_http import JudgeClient, JudgeClientConfig

        client = JudgeClient(
            JudgeClientConfig(base_url=cfg.judge_base_url, model=cfg.judge_model, api_key=cfg.judge_api_key)
        )
        client.run_batch(batch, args.responses_out)
        print(f"wrote judge responses to {args.responses_out}")
    return 0


def cmd_ingest_scores(args) -> int:
    records = parse_record_file(args.corpus)
    ids = [r.id for r in records]
    if args.batch:
        batch: JudgePromptBatch = load_judge_batch(args.batch)
        result = parse_judge_responses(args.file, batch)
        vector = result.scores
        if len(vector.ids) != len(ids):
            logger.warning("judge scores cover %d of %d records", len(vector.ids), len(ids))
    else:
        descriptor = MetricDescriptor(
            name=args.name, dimension=Dimension(args.dimension), source=MetricSource.INGESTED
        )
        vector = ingest_metric_scores(args.file, descriptor, ids)
    scores_dir = Path(args.scores)
    filename = _safe_filename(vector.name) + ".jsonl"
    scoring.write_score_file(vector, scores_dir / filename)
    manifest = (
        _load_manifest(scores_dir)
        if (scores_dir / "manifest.json").exists()
        else {"seed": 42, "alpha": 1000, "entries": []}
    )
    manifest["entries"] = [e for e in manifest["entries"] if e["name"] != vector.name]
    manifest["entries"].append(
        {"name": vector.name, "kind": vector.kind.value, "higher_is_better": True, "file": filename}
    )
    _write_manifest(scores_dir, manifest)
    print(f"ingested {vector.name!r} ({len(vector.ids)} scores) into {scores_dir}")
    return 0


def cmd_human_eval(args) -> int:
    scores_dir = Path(args.scores)
    manifest = _load_manifest(scores_dir)
    seed = args.seed if args.seed is not None else manifest.get("seed", 42)
    alpha = args.alpha if args.alpha is not None else manifest.get("alpha", 1000)
    annotations = analysis.parse_annotation_file(args.annotations)
    kind = analysis.ExperimentKind(args.kind)
    if kind is analysis.ExperimentKind.UE_HUM:
        vectors = _manifest_vectors(scores_dir, manifest, ScoreKind.UNCERTAINTY)
        if not vectors:
            raise UsageError("UE_HUM needs uncertainty score files")
        table = analysis.run_experiment(kind, ue_scores=vectors, annotations=annotations, alpha=alpha, seed=seed)
    elif kind is analysis.ExperimentKind.NLG_HUM:
        vectors = _manifest_vectors(scores_dir, manifest, ScoreKind.NLG)
        if not vectors:
            raise UsageError("NLG_HUM needs quality-metric score files")
        table = analysis.run_experiment(kind, nlg_scores=vectors, annotations=annotations, alpha=alpha, seed=seed)
    else:
        raise UsageError("human-eval supports UE_HUM and NLG_HUM; use evaluate for UE_NLG")
    out = Path(args.out) / "tables"
    stem = kind.value.lower()
    render.atomic_write(out / f"{stem}.csv", render.table_to_csv(table))
    render.atomic_write(out / f"{stem}.md", render.table_to_markdown(table))
    render.atomic_write(out / f"{stem}.json", render.table_to_json(table))
    print(f"wrote {kind.value} table to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uqsum", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="compute method and metric score files")
    p_score.add_argument("--config", type=Path, default=None)
    p_score.add_argument("--corpus", type=Path, default=None)
    p_score.add_argument("--seed", type=int, default=None)
    p_score.add_argument("--alpha", type=int, default=None)
    p_score.add_argument("--out", type=Path, default=None)
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("evaluate", help="build the PRR table from score files")
    p_eval.add_argument("--scores", type=Path, required=True)
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.add_argument("--alpha", type=int, default=None)
    p_eval.add_argument("--out", type=Path, required=True)
    p_eval.set_defaults(func=cmd_evaluate)

    p_corr = sub.add_parser("correlate", help="correlation matrix and heatmap from a table file")
    p_corr.add_argument("--table", type=Path, required=True)
    p_corr.add_argument("--axis", choices=["between_methods", "between_metrics"], required=True)
    p_corr.add_argument("--out", type=Path, required=True)
    p_corr.set_defaults(func=cmd_correlate)

    p_emit = sub.add_parser("emit-prompts", help="render a judge prompt batch")
    p_emit.add_argument("--config", type=Path, default=None)
    p_emit.add_argument("--corpus", type=Path, default=None)
    p_emit.add_argument("--variant", choices=[v.value for v in JudgeVariant], required=True)
    p_emit.add_argument("--dimension", choices=[d.value for d in Dimension], required=True)
    p_emit.add_argument("--out", type=Path, required=True)
    p_emit.add_argument("--execute", action="store_true", help="run the batch via the HTTP judge client")
    p_emit.add_argument("--responses-out", type=Path, default=None)
    p_emit.set_defaults(func=cmd_emit_prompts)

    p_ingest = sub.add_parser("ingest-scores", help="ingest external metric scores or judge responses")
    p_ingest.add_argument("--corpus", type=Path, required=True)
    p_ingest.add_argument("--file", type=Path, required=True)
    p_ingest.add_argument("--scores", type=Path, required=True)
    p_ingest.add_argument("--name", default=None, help="metric name for id->score files")
    p_ingest.add_argument("--dimension", choices=[d.value for d in Dimension], default="overall")
    p_ingest.add_argument("--batch", type=Path, default=None, help="judge batch file for reply parsing")
    p_ingest.set_defaults(func=cmd_ingest_scores)

    p_human = sub.add_parser("human-eval", help="PRR tables against human annotations")
    p_human.add_argument("--scores", type=Path, required=True)
    p_human.add_argument("--annotations", type=Path, required=True)
    p_human.add_argument("--kind", choices=["UE_HUM", "NLG_HUM"], required=True)
    p_human.add_argument("--seed", type=int, default=None)
    p_human.add_argument("--alpha", type=int, default=None)
    p_human.add_argument("--out", type=Path, required=True)
    p_human.set_defaults(func=cmd_human_eval)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "ingest-scores" and not args.batch and not args.name:
        parser.error("ingest-scores needs --name (or --batch for judge replies)")
    if args.command == "emit-prompts" and args.execute and args.responses_out is None:
        parser.error("--execute needs --responses-out")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
