"""Regenerate the deterministic fixture corpus under data/fixture/.

The corpus stands in for real summarization outputs: 24 records with greedy
log-probabilities and entropies, sampled generations, embeddings, two-member
ensembles, plus the auxiliary files the CLI consumes (training and reference
embeddings, human annotations, external metric scores, judge replies,
truthfulness probabilities).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from uqsum.nlg import Dimension, JudgeVariant, emit_judge_prompts  # noqa: E402
from uqsum.records import parse_record_file  # noqa: E402

OUT_DIR = ROOT / "data" / "fixture"
SEED = 20240601
N_RECORDS = 24
EMBED_DIM = 8
N_SAMPLES = 4
N_MEMBERS = 2
TOP_K = 3

TOPICS = [
    ("the river flooded the northern valley after heavy rain", "flood hits northern valley"),
    ("the council approved a new tram line through the old town", "council approves tram line"),
    ("a local bakery won the national bread award this spring", "bakery wins national award"),
    ("engineers finished the bridge repairs two weeks early", "bridge repairs finish early"),
    ("the museum opened a hall devoted to polar expeditions", "museum opens polar hall"),
    ("farmers reported a record harvest of winter wheat", "farmers report record harvest"),
    ("the port added a second crane to cut loading delays", "port adds second crane"),
    ("volunteers cleared invasive weeds from the coastal dunes", "volunteers clear coastal dunes"),
]

FILLER = [
    "officials said the work took months of planning",
    "residents welcomed the announcement on monday",
    "the project was funded by a regional grant",
    "observers called the outcome better than expected",
    "a follow-up review is scheduled for next year",
    "several delays had pushed the timeline back",
]


def _round6(values):
    return [round(float(v), 6) for v in values]


def make_record(i: int, rng: np.random.Generator) -> dict:
    topic, summary = TOPICS[i % len(TOPICS)]
    extra = FILLER[i % len(FILLER)]
    input_text = f"{topic}. {extra}. " + FILLER[(i + 3) % len(FILLER)] + "."
    greedy_text = summary if i % 3 else summary + " says report"
    greedy_tokens = greedy_text.split()
    n_tokens = len(greedy_tokens)

    logprobs = _round6(-rng.gamma(shape=1.5, scale=0.4, size=n_tokens))
    entropies = _round6(rng.gamma(shape=2.0, scale=0.5, size=n_tokens))

    # Sample texts: diverse for every third record, near-identical otherwise.
    samples = []
    for s in range(N_SAMPLES):
        if i % 3 == 0 and s >= 2:
            alt_topic, alt_summary = TOPICS[(i + s) % len(TOPICS)]
            text = alt_summary
        else:
            text = summary if s % 2 == 0 else summary + " this year"
        token_lps = _round6(-rng.gamma(shape=1.5, scale=0.5, size=max(len(text.split()), 1)))
        total = sum(token_lps)
        member_lps = _round6([min(total + rng.normal(0, 0.3), -0.01) for _ in range(N_MEMBERS)])
        samples.append(
            {"text": text, "token_logprobs": token_lps, "ensemble_seq_logprobs": member_lps}
        )

    center = np.zeros(EMBED_DIM)
    center[i % EMBED_DIM] = 2.0
    embedding = _round6(center + rng.normal(0, 0.5, size=EMBED_DIM))

    distributions = []
    for _ in range(n_tokens):
        token_ids = sorted(int(t) for t in rng.choice(500, size=TOP_K, replace=False))
        member_probs = []
        tail_mass = []
        for _m in range(N_MEMBERS):
            raw = rng.dirichlet(np.ones(TOP_K + 1) * 2.0)
            probs = _round6(raw[:TOP_K])
            member_probs.append(probs)
            tail_mass.append(round(1.0 - sum(probs), 6))
        distributions.append(
            {"token_ids": token_ids, "member_probs": member_probs, "tail_mass": tail_mass}
        )

    return {
        "id": f"rec{i:03d}",
        "input_text": input_text,
        "reference_summary": summary + " after long effort",
        "greedy_text": greedy_text,
        "greedy_token_logprobs": logprobs,
        "greedy_token_entropies": entropies,
        "samples": samples,
        "embedding": embedding,
        "ensemble": {"member_count": N_MEMBERS, "token_distributions": distributions},
    }


def write_jsonl(path: Path, objects) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for obj in objects:
            fh.write(json.dumps(obj) + "\n")


def main() -> None:
    rng = np.random.default_rng(SEED)
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    records = [make_record(i, rng) for i in range(N_RECORDS)]
    write_jsonl(OUT_DIR / "corpus.jsonl", records)

    train = []
    for j in range(64):
        center = np.zeros(EMBED_DIM)
        center[j % EMBED_DIM] = 2.0
        train.append({"embedding": _round6(center + rng.normal(0, 0.5, size=EMBED_DIM))})
    write_jsonl(OUT_DIR / "train_embeddings.jsonl", train)

    ref_embeddings = []
    for record in records:
        base = np.asarray(record["embedding"])
        ref_embeddings.append(
            {"id": record["id"], "embedding": _round6(base + rng.normal(0, 0.8, size=EMBED_DIM))}
        )
    write_jsonl(OUT_DIR / "reference_embeddings.jsonl", ref_embeddings)

    annotations = []
    for record in records:
        total = max(len(record["greedy_text"].split()), 4)
        errors = {}
        for t in ("EI", "MR", "SOAF", "RE", "TME", "CO", "NMS"):
            errors[t] = int(rng.integers(0, max(total // 3, 2)))
        annotations.append({"id": record["id"], "total_words": total, "errors": errors})
    write_jsonl(OUT_DIR / "annotations.jsonl", annotations)

    external = [
        {"id": r["id"], "score": round(float(rng.uniform(-3.0, 0.0)), 6)} for r in records
    ]
    write_jsonl(OUT_DIR / "external_scores.jsonl", external)

    p_true = [
        {"id": r["id"], "reply": f"{rng.uniform(0.05, 0.95):.3f}"} for r in records
    ]
    write_jsonl(OUT_DIR / "p_true_responses.jsonl", p_true)

    parsed = parse_record_file(OUT_DIR / "corpus.jsonl")
    emit_judge_prompts(
        parsed,
        JudgeVariant.WI_INGT,
        Dimension.CONSISTENCY,
        path=OUT_DIR / "judge_batch_wi_ingt_consistency.json",
    )
    judge_replies = []
    for record in parsed:
        score = int(rng.integers(1, 6))
        judge_replies.append({"id": record.id, "reply": f"Score: {score}"})
    write_jsonl(OUT_DIR / "judge_responses.jsonl", judge_replies)

    print(f"wrote fixtures for {len(parsed)} records to {OUT_DIR}")


if __name__ == "__main__":
    main()
