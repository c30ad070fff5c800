"""Command line for extraction and self-checking of record files."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from record_extractor.config import DEFAULT_PROMPT_TEMPLATE, ExtractionConfig
from record_extractor.extract import ExtractionError, extract_to_file, read_documents
from record_extractor.schema import self_check

logger = logging.getLogger(__name__)


def cmd_extract(args) -> int:
    config = ExtractionConfig(
        model=args.model,
        prompt_template=args.prompt_template,
        samples=args.samples,
        members=args.members,
        temperature=args.temperature,
        top_k=args.top_k,
        seed=args.seed,
        max_new_tokens=args.max_new_tokens,
        device=args.device,
    )
    documents = read_documents(args.inputs)
    result = extract_to_file(config, documents, args.out, manifest_path=args.manifest)
    print(f"wrote {len(result.records)} records to {args.out} ({len(result.skipped)} skipped)")
    return 0


def cmd_self_check(args) -> int:
    report = self_check(args.file)
    for line in report.coverage_lines():
        print(line)
    if report.total == 0:
        print("error: file contains no records", file=sys.stderr)
        return 1
    if report.invalid:
        for line_no, violations in sorted(report.invalid.items()):
            print(f"line {line_no}: " + "; ".join(violations), file=sys.stderr)
        return 1
    print("all records valid")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="record-extractor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="generate records from input documents")
    p_extract.add_argument("--model", required=True, help="model path or identifier")
    p_extract.add_argument("--inputs", type=Path, required=True, help="JSONL of {id?, text, reference?}")
    p_extract.add_argument("--out", type=Path, required=True)
    p_extract.add_argument("--manifest", type=Path, default=None)
    p_extract.add_argument("--samples", type=int, default=3)
    p_extract.add_argument("--members", type=int, default=2)
    p_extract.add_argument("--temperature", type=float, default=1.0)
    p_extract.add_argument("--top-k", type=int, default=3)
    p_extract.add_argument("--seed", type=int, default=42)
    p_extract.add_argument("--max-new-tokens", type=int, default=16)
    p_extract.add_argument("--prompt-template", default=DEFAULT_PROMPT_TEMPLATE)
    p_extract.add_argument("--device", default="cpu")
    p_extract.set_defaults(func=cmd_extract)

    p_check = sub.add_parser("self-check", help="re-validate an emitted record file")
    p_check.add_argument("--file", type=Path, required=True)
    p_check.set_defaults(func=cmd_self_check)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ExtractionError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
