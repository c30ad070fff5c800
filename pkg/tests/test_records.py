from __future__ import annotations

import json

import pytest

from builders import make_ensemble, make_record
from uqsum.records import (
    ScoreKind,
    ScoreVector,
    SchemaError,
    parse_record_file,
    record_to_dict,
    validate_record,
    write_record_file,
)


def _minimal_line(rid="a", **extra):
    obj = {
        "id": rid,
        "input_text": "doc",
        "greedy_text": "sum",
        "greedy_token_logprobs": [-0.5, -0.1],
    }
    obj.update(extra)
    return json.dumps(obj)


class TestParseRecordFile:
    def test_three_line_file_yields_three_records(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text("\n".join(_minimal_line(r) for r in ("a", "b", "c")) + "\n")
        records = parse_record_file(path)
        assert [r.id for r in records] == ["a", "b", "c"]

    def test_positive_logprob_is_schema_error(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(_minimal_line(greedy_token_logprobs=[0.1]) + "\n")
        with pytest.raises(SchemaError, match="greedy_token_logprobs"):
            parse_record_file(path)

    def test_duplicate_id_is_error(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(_minimal_line("a") + "\n" + _minimal_line("a") + "\n")
        with pytest.raises(SchemaError, match="duplicate id"):
            parse_record_file(path)

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(_minimal_line("a") + "\n{not json\n")
        with pytest.raises(SchemaError, match="line 2"):
            parse_record_file(path)

    def test_missing_required_field_named(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "a", "input_text": "doc", "greedy_text": "sum"}\n')
        with pytest.raises(SchemaError, match="greedy_token_logprobs"):
            parse_record_file(path)

    def test_inconsistent_embedding_dims_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(
            _minimal_line("a", embedding=[1.0] * 8)
            + "\n"
            + _minimal_line("b", embedding=[1.0] * 5)
            + "\n"
        )
        with pytest.raises(SchemaError, match="embedding dimension"):
            parse_record_file(path)

    def test_fixture_corpus_round_trips(self, fixture_corpus, tmp_path):
        out = tmp_path / "copy.jsonl"
        write_record_file(fixture_corpus, out)
        assert parse_record_file(out) == fixture_corpus

    def test_round_trip_preserves_serialized_bytes(self, fixture_corpus, tmp_path):
        first = tmp_path / "one.jsonl"
        second = tmp_path / "two.jsonl"
        write_record_file(fixture_corpus, first)
        write_record_file(parse_record_file(first), second)
        assert first.read_bytes() == second.read_bytes()


class TestValidateRecord:
    def test_valid_record_is_ok(self):
        report = validate_record(make_record())
        assert report.ok and report.violations == []

    def test_ensemble_mass_violation(self):
        ensemble = make_ensemble([[[0.5, 0.3]]])  # tail forced to 0.2, then broken below
        ensemble.token_distributions[0].tail_mass[0] = 0.1
        report = validate_record(make_record(ensemble=ensemble))
        # member_count 1 is also flagged; the mass violation must be present
        assert any("distribution mass" in v for v in report.violations)

    def test_embedding_dimension_violation(self):
        report = validate_record(make_record(embedding=[1.0] * 5), expected_embedding_dim=8)
        assert any("embedding dimension" in v for v in report.violations)

    def test_entropy_length_mismatch(self):
        record = make_record(greedy_token_logprobs=[-1.0, -1.0], greedy_token_entropies=[0.5])
        report = validate_record(record)
        assert any("greedy_token_entropies" in v for v in report.violations)

    def test_member_count_below_two_flagged(self):
        ensemble = make_ensemble([[[1.0]]])
        report = validate_record(make_record(ensemble=ensemble))
        assert any("member_count" in v for v in report.violations)

    def test_mismatched_member_counts_across_positions(self):
        ensemble = make_ensemble([[[0.7, 0.2], [0.4, 0.5]]])
        ensemble.token_distributions.append(ensemble.token_distributions[0])
        ensemble.token_distributions[0] = type(ensemble.token_distributions[0])(
            token_ids=[0, 1], member_probs=[[0.7, 0.2]], tail_mass=[0.1]
        )
        report = validate_record(make_record(ensemble=ensemble))
        assert any("member_count members" in v for v in report.violations)

    def test_serialization_omits_absent_optionals(self):
        obj = record_to_dict(make_record(greedy_token_entropies=None, embedding=None))
        assert "greedy_token_entropies" not in obj
        assert "embedding" not in obj
        assert "ensemble" not in obj


class TestScoreVector:
    def test_rejects_nan(self):
        with pytest.raises(SchemaError, match="NaN"):
            ScoreVector("m", ScoreKind.NLG, ("a",), [float("nan")], True)

    def test_rejects_length_mismatch(self):
        with pytest.raises(SchemaError, match="values"):
            ScoreVector("m", ScoreKind.NLG, ("a", "b"), [1.0], True)
