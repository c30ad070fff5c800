"""Extraction of generation records from a causal language model.

For each input document the extractor emits one JSONL record: the greedy
summary with per-token log-probabilities and predictive entropies, a mean
pooled final-layer embedding of the generated tokens, temperature-sampled
generations with their token log-probabilities, and an ensemble block built
from distinct dropout seeds (per-position distributions truncated to a shared
top-K vocabulary plus an explicit tail mass, and per-member total sequence
log-probabilities for every sample).
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from record_extractor.config import ExtractionConfig
from record_extractor.schema import validate_record_object

logger = logging.getLogger(__name__)

MAX_SKIP_FRACTION = 0.10


class ExtractionError(RuntimeError):
    pass


@dataclass
class ExtractionResult:
    records: list[dict]
    skipped: list[tuple[str, str]]
    manifest: dict = field(default_factory=dict)


def _derive_seed(base: int, doc_index: int, role: int, member: int) -> int:
    # Distinct multipliers keep the per-(document, role, member) streams apart.
    return (base * 1_000_003 + doc_index * 8_191 + role * 131_071 + member * 257 + 1) % (2**63)


def _load(config: ExtractionConfig):
    from transformers import AutoModelForCausalLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.model)
    model = AutoModelForCausalLM.from_pretrained(config.model)
    model.to(config.device)
    model.eval()
    if tokenizer.pad_token_id is None and tokenizer.eos_token_id is not None:
        tokenizer.pad_token = tokenizer.eos_token
    return tokenizer, model


def _has_active_dropout(model) -> bool:
    return any(isinstance(m, torch.nn.Dropout) and m.p > 0 for m in model.modules())


def _model_hash(model) -> str:
    digest = hashlib.sha256()
    for name, tensor in sorted(model.state_dict().items()):
        digest.update(name.encode("utf-8"))
        digest.update(tensor.detach().cpu().numpy().tobytes())
    return digest.hexdigest()


def _encode_prompt(tokenizer, model, config: ExtractionConfig, text: str) -> torch.Tensor:
    prompt = config.prompt_template.format(text=text)
    cap = getattr(model.config, "max_position_embeddings", None) or getattr(
        model.config, "n_positions", None
    )
    kwargs = {}
    if cap:
        kwargs = {"truncation": True, "max_length": max(int(cap) - config.max_new_tokens - 1, 1)}
    return tokenizer(prompt, return_tensors="pt", **kwargs)["input_ids"].to(config.device)


def _generate(model, tokenizer, input_ids, config: ExtractionConfig, do_sample: bool):
    with torch.no_grad():
        out = model.generate(
            input_ids,
            attention_mask=torch.ones_like(input_ids),
            max_new_tokens=config.max_new_tokens,
            min_new_tokens=1,
            do_sample=do_sample,
            temperature=config.temperature if do_sample else None,
            return_dict_in_generate=True,
            output_logits=True,
            pad_token_id=tokenizer.pad_token_id,
        )
    generated = out.sequences[0, input_ids.shape[1] :]
    # Raw (unwarped) per-step logits, in float64 for the numeric fields.
    logits = torch.stack([step[0] for step in out.logits]).double()
    log_probs = torch.log_softmax(logits, dim=-1)
    token_logprobs = [
        min(float(log_probs[i, token]), 0.0) for i, token in enumerate(generated.tolist())
    ]
    return generated, token_logprobs, log_probs


def _entropies(log_probs: torch.Tensor) -> list[float]:
    probs = log_probs.exp()
    return [max(float(-(p * lp).sum()), 0.0) for p, lp in zip(probs, log_probs)]


def _pooled_embedding(model, full_ids: torch.Tensor, prompt_len: int) -> list[float]:
    with torch.no_grad():
        hidden = model(
            full_ids, attention_mask=torch.ones_like(full_ids), output_hidden_states=True
        ).hidden_states[-1]
    return hidden[0, prompt_len:, :].double().mean(dim=0).tolist()


def _member_token_probs(model, full_ids: torch.Tensor, prompt_len: int, seed: int) -> np.ndarray:
    """Distributions over the vocabulary at each generated position, for one
    dropout member realized by `seed`."""
    model.train()
    torch.manual_seed(seed)
    with torch.no_grad():
        logits = model(full_ids, attention_mask=torch.ones_like(full_ids)).logits[0].double()
    model.eval()
    rows = logits[prompt_len - 1 : full_ids.shape[1] - 1]
    return torch.softmax(rows, dim=-1).numpy()


def _member_sequence_logprob(model, full_ids: torch.Tensor, prompt_len: int, seed: int) -> float:
    model.train()
    torch.manual_seed(seed)
    with torch.no_grad():
        logits = model(full_ids, attention_mask=torch.ones_like(full_ids)).logits[0].double()
    model.eval()
    log_probs = torch.log_softmax(logits[prompt_len - 1 : full_ids.shape[1] - 1], dim=-1)
    tokens = full_ids[0, prompt_len:]
    total = float(log_probs[torch.arange(tokens.shape[0]), tokens].sum())
    return min(total, 0.0)


def _ensemble_block(member_probs: list[np.ndarray], top_k: int) -> dict:
    mean_probs = np.mean(member_probs, axis=0)
    k = min(top_k, mean_probs.shape[1])
    distributions = []
    for pos in range(mean_probs.shape[0]):
        ids = np.argsort(mean_probs[pos])[::-1][:k]
        ids = np.sort(ids)
        rows = []
        tails = []
        for probs in member_probs:
            selected = probs[pos][ids]
            rows.append([float(v) for v in selected])
            tails.append(max(float(1.0 - selected.sum()), 0.0))
        distributions.append(
            {"token_ids": [int(i) for i in ids], "member_probs": rows, "tail_mass": tails}
        )
    return {"member_count": len(member_probs), "token_distributions": distributions}


def extract_record(
    tokenizer, model, config: ExtractionConfig, doc_index: int, doc: dict
) -> dict:
    record_id = doc.get("id") or f"doc{doc_index:04d}"
    text = doc["text"]
    prompt_ids = _encode_prompt(tokenizer, model, config, text)
    prompt_len = prompt_ids.shape[1]

    greedy_ids, greedy_logprobs, greedy_logdist = _generate(
        model, tokenizer, prompt_ids, config, do_sample=False
    )
    greedy_text = tokenizer.decode(greedy_ids, skip_special_tokens=True)
    greedy_full = torch.cat([prompt_ids, greedy_ids.unsqueeze(0)], dim=1)

    samples = []
    sample_full_ids = []
    for s in range(config.samples):
        torch.manual_seed(_derive_seed(config.seed, doc_index, 1, s))
        sampled_ids, sampled_logprobs, _ = _generate(
            model, tokenizer, prompt_ids, config, do_sample=True
        )
        samples.append(
            {
                "text": tokenizer.decode(sampled_ids, skip_special_tokens=True),
                "token_logprobs": sampled_logprobs,
            }
        )
        sample_full_ids.append(torch.cat([prompt_ids, sampled_ids.unsqueeze(0)], dim=1))

    record = {
        "id": record_id,
        "input_text": text,
        "greedy_text": greedy_text,
        "greedy_token_logprobs": greedy_logprobs,
        "greedy_token_entropies": _entropies(greedy_logdist),
        "embedding": _pooled_embedding(model, greedy_full, prompt_len),
    }
    if doc.get("reference") is not None:
        record["reference_summary"] = doc["reference"]
    if samples:
        record["samples"] = samples

    if config.members >= 2:
        member_seeds = [
            _derive_seed(config.seed, doc_index, 2, m) for m in range(config.members)
        ]
        member_probs = [
            _member_token_probs(model, greedy_full, prompt_len, seed) for seed in member_seeds
        ]
        record["ensemble"] = _ensemble_block(member_probs, config.top_k)
        for sample, full_ids in zip(samples, sample_full_ids):
            sample["ensemble_seq_logprobs"] = [
                _member_sequence_logprob(model, full_ids, prompt_len, seed)
                for seed in member_seeds
            ]
    return record


def run_extraction(config: ExtractionConfig, documents: list[dict]) -> ExtractionResult:
    """Extract one record per document, in input order.

    Documents that fail to generate are skipped and logged; more than 10%
    skipped raises ExtractionError after processing the rest.
    """
    if not documents:
        raise ExtractionError("no input documents")
    ids = [doc.get("id") or f"doc{i:04d}" for i, doc in enumerate(documents)]
    if len(set(ids)) != len(ids):
        raise ExtractionError("duplicate document ids in input")

    tokenizer, model = _load(config)
    if config.members >= 2 and not _has_active_dropout(model):
        logger.warning(
            "model has no active dropout; ensemble members will coincide (seeds still differ)"
        )

    records = []
    skipped: list[tuple[str, str]] = []
    for i, doc in enumerate(documents):
        if "text" not in doc or not doc["text"]:
            skipped.append((ids[i], "empty text"))
            logger.error("skipping %s: empty text", ids[i])
            continue
        try:
            record = extract_record(tokenizer, model, config, i, doc)
        except Exception as exc:  # generation failures must not kill the run
            skipped.append((ids[i], str(exc)))
            logger.error("skipping %s: %s", ids[i], exc)
            continue
        violations = validate_record_object(record)
        if violations:
            skipped.append((ids[i], "; ".join(violations)))
            logger.error("skipping %s: %s", ids[i], violations)
            continue
        records.append(record)

    manifest = {
        "config": config.to_dict(),
        "model_hash": _model_hash(model),
        "embedding_pooling": "mean of final-layer hidden states over generated tokens",
        "ensemble_realization": "dropout members, one forward seed per member",
        "records": len(records),
        "skipped": [{"id": rid, "reason": reason} for rid, reason in skipped],
    }
    result = ExtractionResult(records=records, skipped=skipped, manifest=manifest)
    if len(skipped) > MAX_SKIP_FRACTION * len(documents):
        raise ExtractionError(
            f"{len(skipped)}/{len(documents)} documents skipped (limit 10%): {skipped}"
        )
    return result


def read_documents(path) -> list[dict]:
    """Input JSONL: one {"id"?, "text", "reference"?} object per line."""
    documents = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExtractionError(f"{path} line {line_no}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "text" not in obj:
                raise ExtractionError(f"{path} line {line_no}: expected an object with a text field")
            documents.append(obj)
    return documents


def extract_to_file(config: ExtractionConfig, documents: list[dict], out_path, manifest_path=None) -> ExtractionResult:
    result = run_extraction(config, documents)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as fh:
        for record in result.records:
            fh.write(json.dumps(record) + "\n")
    manifest_path = Path(manifest_path) if manifest_path else out_path.with_suffix(".manifest.json")
    manifest_path.write_text(json.dumps(result.manifest, indent=2) + "\n", encoding="utf-8")
    return result
