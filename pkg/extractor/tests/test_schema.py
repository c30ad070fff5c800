from __future__ import annotations

import json

from record_extractor.schema import self_check, validate_record_object


def _valid_record(rid="a"):
    return {
        "id": rid,
        "input_text": "doc",
        "greedy_text": "sum",
        "greedy_token_logprobs": [-0.5, -0.2],
        "greedy_token_entropies": [0.1, 0.3],
        "samples": [
            {"text": "s", "token_logprobs": [-0.7], "ensemble_seq_logprobs": [-1.0, -2.0]}
        ],
        "embedding": [0.1, 0.2],
        "ensemble": {
            "member_count": 2,
            "token_distributions": [
                {
                    "token_ids": [3, 5],
                    "member_probs": [[0.6, 0.3], [0.2, 0.7]],
                    "tail_mass": [0.1, 0.1],
                }
            ],
        },
    }


class TestValidateRecordObject:
    def test_valid_record_has_no_violations(self):
        assert validate_record_object(_valid_record()) == []

    def test_positive_logprob_flagged(self):
        record = _valid_record()
        record["greedy_token_logprobs"] = [0.5]
        assert any("greedy_token_logprobs" in v for v in validate_record_object(record))

    def test_bad_distribution_mass_flagged(self):
        record = _valid_record()
        record["ensemble"]["token_distributions"][0]["tail_mass"][0] = 0.3
        assert any("mass" in v for v in validate_record_object(record))

    def test_member_count_mismatch_flagged(self):
        record = _valid_record()
        record["samples"][0]["ensemble_seq_logprobs"] = [-1.0]
        assert any("ensemble_seq_logprobs" in v for v in validate_record_object(record))

    def test_embedding_dim_mismatch_flagged(self):
        violations = validate_record_object(_valid_record(), embedding_dim=5)
        assert any("dimension" in v for v in violations)

    def test_missing_required_field_flagged(self):
        record = _valid_record()
        record.pop("greedy_text")
        assert any("greedy_text" in v for v in validate_record_object(record))


class TestSelfCheck:
    def test_all_valid_report(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text(json.dumps(_valid_record("a")) + "\n" + json.dumps(_valid_record("b")) + "\n")
        report = self_check(path)
        assert report.ok
        assert report.total == 2
        assert report.with_ensemble == 2
        assert "2/2" in report.coverage_lines()[1]

    def test_corrupted_line_named(self, tmp_path):
        bad = _valid_record("b")
        bad["greedy_token_logprobs"] = []
        path = tmp_path / "records.jsonl"
        path.write_text(json.dumps(_valid_record("a")) + "\n" + json.dumps(bad) + "\n")
        report = self_check(path)
        assert not report.ok
        assert 2 in report.invalid

    def test_duplicate_id_named(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text(json.dumps(_valid_record("a")) + "\n" + json.dumps(_valid_record("a")) + "\n")
        report = self_check(path)
        assert any("duplicate id" in v for vs in report.invalid.values() for v in vs)

    def test_empty_file_not_ok(self, tmp_path):
        path = tmp_path / "records.jsonl"
        path.write_text("")
        assert not self_check(path).ok
