"""Self-contained tiny model and document set for offline extractor tests."""

from __future__ import annotations

from pathlib import Path

import torch
from tokenizers import Tokenizer, decoders, models, pre_tokenizers
from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

DOCS = [
    {"id": "d0", "text": "the river flooded the valley after heavy rain", "reference": "river floods valley"},
    {"id": "d1", "text": "a dog ran fast across the field", "reference": "dog runs fast"},
    {"id": "d2", "text": "the cat sat on a mat near the door", "reference": "cat sits on mat"},
    {"id": "d3", "text": "workers repaired the old bridge over the river", "reference": "bridge repaired"},
    {"id": "d4", "text": "the market opened early on monday morning", "reference": "market opens early"},
    {"id": "d5", "text": "heavy snow closed the mountain road", "reference": "snow closes road"},
    {"id": "d6", "text": "the choir sang in the town hall", "reference": "choir sings"},
    {"id": "d7", "text": "farmers harvested wheat before the storm", "reference": "wheat harvested"},
]

_WORDS = sorted(
    {
        word
        for doc in DOCS
        for text in (doc["text"], doc["reference"])
        for word in text.split()
    }
    | {"summarize", "summary", "report", "news", "end"}
)


def build_tiny_model(target: Path) -> None:
    """Save a small self-contained causal LM (word-level tokenizer, 2-layer GPT-2)."""
    vocab = {"<unk>": 0, "<eos>": 1}
    for word in _WORDS:
        vocab["▁" + word] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.Metaspace(replacement="▁", prepend_scheme="always")
    tok.decoder = decoders.Metaspace(replacement="▁", prepend_scheme="always")
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="<unk>", eos_token="<eos>", pad_token="<eos>"
    )
    fast.save_pretrained(target)

    config = GPT2Config(
        vocab_size=len(vocab),
        n_positions=96,
        n_embd=32,
        n_layer=2,
        n_head=2,
        bos_token_id=1,
        eos_token_id=1,
        resid_pdrop=0.1,
        embd_pdrop=0.1,
        attn_pdrop=0.1,
    )
    torch.manual_seed(1234)
    model = GPT2LMHeadModel(config)
    model.save_pretrained(target)
