import csv

import pytest

import campaign as campaign_module
from campaign import campaign, conjecture1_targets, conjecture2_targets, run_one
from datacollector import CampaignCollector
from errors import CheckpointError, DomainError, PrecisionError, RefusalError
from json_manager import load_fixture, load_json, write_json_atomic


def test_targets():
    assert conjecture1_targets(3, 50) == [3, 7, 11, 19, 23, 31, 43, 47]
    assert 15 in conjecture1_targets(3, 50, composites=True)
    assert 27 not in conjecture1_targets(3, 50, composites=True)
    assert conjecture2_targets(3, 100) == [11, 19, 35, 43, 59, 67, 83, 91]


def test_limits(tmp_path):
    with pytest.raises(RefusalError):
        campaign(1, 3, 10_000, tmp_path / "c.json")
    with pytest.raises(DomainError):
        campaign(3, 3, 10, tmp_path / "c.json")


def test_conjecture1_small_range_and_resume(tmp_path, monkeypatch):
    checkpoint = tmp_path / "c1.json"
    summary = campaign(1, 3, 20, checkpoint)
    assert summary["count"] == 4
    assert summary["by_status"] == {"pass": 4}
    assert set(load_json(checkpoint)["records"]) == {"3", "7", "11", "19"}
    assert (tmp_path / "campaign_records.csv").exists()
    assert (tmp_path / "campaign.png").exists()

    def fail(*args, **kwargs):
        raise AssertionError("resumed campaign recomputed a finished N")

    monkeypatch.setattr(campaign_module, "run_one", fail)
    assert campaign(1, 3, 20, checkpoint) == summary


def test_resume_retries_error_and_inconclusive_records(tmp_path, monkeypatch):
    checkpoint = tmp_path / "c1.json"
    records = {
        "3": {"N": 3, "h": 1, "status": "pass"},
        "7": {"N": 7, "status": "error", "note": "PrecisionError: lost"},
        "11": {"N": 11, "h": 1, "status": "inconclusive", "note": "lambda was not recognized"},
        "19": {"N": 19, "h": 1, "status": "pass"},
    }
    write_json_atomic(checkpoint, {"conjecture": 1, "range": [3, 20], "records": records})
    recomputed = []
    original = campaign_module.run_one

    def tracking(conjecture, N, digits):
        recomputed.append(N)
        return original(conjecture, N, digits)

    monkeypatch.setattr(campaign_module, "run_one", tracking)
    summary = campaign(1, 3, 20, checkpoint)
    assert recomputed == [7, 11]
    assert summary["by_status"] == {"pass": 4}
    assert load_json(checkpoint)["records"]["7"]["status"] == "pass"


def test_corrupt_checkpoint(tmp_path):
    checkpoint = tmp_path / "c.json"
    checkpoint.write_text('{"conjecture": 1, "range": [3, 20], "records": {"7": {"N": 7}}}')
    with pytest.raises(CheckpointError):
        campaign(1, 3, 20, checkpoint)
    checkpoint.write_text("{")
    with pytest.raises(CheckpointError):
        campaign(1, 3, 20, checkpoint)


def test_run_one_turns_errors_into_records(monkeypatch):
    def broken(N, digits):
        raise PrecisionError("lost", N=N)

    monkeypatch.setattr(campaign_module, "conjecture1_record", broken)
    record = run_one(1, 23, 60)
    assert record["status"] == "error"
    assert "PrecisionError" in record["note"]


def test_conjecture2_small_range(tmp_path):
    summary = campaign(2, 3, 100, tmp_path / "c2.json", outdir=tmp_path / "out")
    expected = load_fixture("conjecture2")
    assert summary["exceptions"] == [N for N in expected["exceptions"] if N <= 100]
    assert summary["by_status"]["integer"] == 4
    assert summary["by_status"]["pass"] == 2
    with open(tmp_path / "out" / "campaign_records.csv") as f:
        rows = list(csv.DictReader(f))
    assert [int(row["N"]) for row in rows] == [11, 19, 35, 43, 59, 67, 83, 91]


def test_collector_summary(tmp_path):
    collector = CampaignCollector(tmp_path, 1)
    collector.collect({"N": 23, "h": 3, "status": "pass"})
    collector.collect({"N": 31, "h": 3, "status": "inconclusive"})
    assert collector.summary() == {
        "conjecture": 1,
        "count": 2,
        "by_status": {"inconclusive": 1, "pass": 1},
        "flagged": [31],
        "exceptions": [],
    }
    collector.save()
    assert collector.csv_file.exists()
    assert collector.figure.exists()


@pytest.mark.slow
def test_conjecture1_primes_below_500(tmp_path):
    summary = campaign(1, 3, 499, tmp_path / "c1.json")
    assert summary["count"] == len(conjecture1_targets(3, 499))
    assert set(summary["by_status"]) == {"pass"}


@pytest.mark.slow
def test_conjecture2_exceptions_up_to_1099(tmp_path):
    expected = load_fixture("conjecture2")
    summary = campaign(2, 3, expected["max_N"], tmp_path / "c2.json", workers=2)
    assert summary["exceptions"] == expected["exceptions"]
    assert "fail" not in summary["by_status"]
