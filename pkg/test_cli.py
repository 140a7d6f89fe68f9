import json

import pytest

import cli
from errors import UsageError
from verification import Check


@pytest.fixture(autouse=True)
def cache_dir(tmp_path, monkeypatch):
    path = tmp_path / "cache"
    monkeypatch.setenv("CLASSINV_CACHE_DIR", str(path))
    return path


def _envelope(capsys):
    return json.loads(capsys.readouterr().out)


def test_usage_errors(capsys):
    assert cli.run([]) == 64
    assert cli.run(["bogus"]) == 64
    assert cli.run(["classgroup"]) == 64
    assert cli.run(["classgroup", "-N", "23", "--prec", "10"]) == 64
    assert capsys.readouterr().out == ""


def test_classgroup_envelope(capsys):
    assert cli.run(["classgroup", "-N", "1571", "--no-cache"]) == 0
    envelope = _envelope(capsys)
    cli.validate_envelope(envelope)
    assert envelope["status"] == "ok"
    assert envelope["outputs"]["h"] == 17
    assert envelope["outputs"]["is_cyclic"]
    assert envelope["certificates"]["kronecker_class_number"] == 17
    assert envelope["inputs"]["N"] == 1571
    assert "text" not in envelope["inputs"]


def test_text_output(capsys, tmp_path):
    out = tmp_path / "envelope.json"
    assert cli.run(["classgroup", "-N", "23", "--text", "--no-cache", "-o", str(out)]) == 0
    text = capsys.readouterr().out
    assert "status: ok" in text
    assert "h: 3" in text
    assert json.loads(out.read_text())["outputs"]["h"] == 3


def test_domain_error_exit_code(capsys):
    assert cli.run(["invariant", "-N", "21", "--no-cache"]) == 1
    envelope = _envelope(capsys)
    cli.validate_envelope(envelope)
    assert envelope["status"] == "error"
    assert envelope["error"]["type"] == "DomainError"


def test_cache_round_trip(capsys, cache_dir, monkeypatch):
    assert cli.run(["classgroup", "-N", "47"]) == 0
    first = _envelope(capsys)
    assert len(list(cache_dir.iterdir())) == 1

    def fail(args, ctx):
        raise AssertionError("cache was not used")

    monkeypatch.setitem(cli.HANDLERS, "classgroup", fail)
    assert cli.run(["classgroup", "-N", "47", "--text"]) == 0
    capsys.readouterr()
    assert cli.run(["classgroup", "-N", "47"]) == 0
    assert _envelope(capsys) == first


def test_cache_key_ignores_presentation():
    assert cli.cache_key("classgroup", {"N": 47, "prec": 60}) == cli.cache_key("classgroup", {"prec": 60, "N": 47})
    assert cli.cache_key("classgroup", {"N": 47}) != cli.cache_key("classgroup", {"N": 43})


def test_failed_verification_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_paper_suite", lambda N, ctx: [Check("class_number", False, {})])
    assert cli.run(["verify", "-N", "23"]) == 3
    envelope = _envelope(capsys)
    assert envelope["status"] == "failed"
    assert not envelope["outputs"]["all_passed"]


def test_run_command_invariant():
    envelope = cli.run_command("invariant", N=163, no_cache=True)
    assert envelope["outputs"]["f_integer"] == "3"
    assert envelope["outputs"]["g_integer"] == "-2"
    assert envelope["outputs"]["signature"] == [-1, -1, -1]


def test_radical_command(capsys):
    fixture = cli.SCHEMA_FILE.parent.parent / "fixtures" / "radical_q3.json"
    assert cli.run(["radical", "--fixture", str(fixture), "--prec", "38"]) == 0
    envelope = _envelope(capsys)
    assert envelope["outputs"]["u"] == "1/3"
    assert envelope["outputs"]["B"] == "2317723/108"


def test_polys_command(capsys):
    assert cli.run(["polys", "-N", "163", "--which", "weber", "--no-cache"]) == 0
    envelope = _envelope(capsys)
    assert envelope["outputs"]["poly"]["coeffs"] == ["-2", "4", "-6", "1"]
    assert envelope["outputs"]["height"] == "6"


def test_unexpected_exception_exit_code(capsys, monkeypatch):
    def broken(args, ctx):
        raise ZeroDivisionError("division by zero")

    monkeypatch.setitem(cli.HANDLERS, "classgroup", broken)
    assert cli.run(["classgroup", "-N", "23", "--no-cache"]) == 3
    envelope = _envelope(capsys)
    cli.validate_envelope(envelope)
    assert envelope["status"] == "error"
    assert envelope["error"]["type"] == "ZeroDivisionError"


def test_run_command_requires_N():
    with pytest.raises(UsageError):
        cli.run_command("invariant", no_cache=True)
