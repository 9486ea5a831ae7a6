import json

import pytest

from ddeperiodic.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_degree_cubic_prints_minus_one(capsys):
    code, out, _ = run(capsys, "degree", "--example", "cubic1d")
    assert code == 0 and out.splitlines()[0] == "-1"
    assert "+1" in out and out.count("-1") >= 3


def test_degree_quiet_prints_only_integer(capsys):
    code, out, _ = run(capsys, "degree", "--example", "cubic1d", "--quiet")
    assert code == 0 and out.strip() == "-1"


def test_branch_resonance_vertical(capsys, tmp_path):
    path = tmp_path / "r.jsonl"
    code, out, _ = run(capsys, "branch", "--example", "resonance", "--out", str(path))
    assert code == 0 and "Vertical" in out
    recs = [json.loads(line) for line in path.read_text().splitlines()]
    assert recs[0]["index"] == 0 and recs[0]["branch"] == 0
    assert set(recs[0]) == {"branch", "index", "lambda", "arclength", "sup_norm", "residual", "loop"}


def test_branch_records_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["branch", "--example", "resonance", "--out", str(a), "--quiet"]) == 0
    assert main(["branch", "--example", "resonance", "--out", str(b), "--quiet"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_flow_records_on_stdout_text_on_stderr(capsys):
    code, out, err = run(capsys, "flow", "--example", "delay_oscillator", "--lambda", "1", "--t1", "1")
    assert code == 0 and "DDE flow" in err
    rec = json.loads(out.splitlines()[-1])
    assert set(rec) == {"t", "x"} and abs(rec["t"] - 1.0) < 1e-12


def test_periodic_oscillator(capsys):
    code, out, err = run(capsys, "periodic", "--example", "delay_oscillator")
    rec = json.loads(out)
    assert code == 0 and rec["lambda"] == 1.0 and abs(rec["sup_norm"] - 1.0) < 1e-6


def test_index_cubic(capsys):
    code, out, _ = run(capsys, "index", "--example", "cubic1d")
    assert code == 0 and out.count("pass") == 4


def test_index_correspondence(capsys):
    code, out, _ = run(capsys, "index", "--example", "planar_rotation", "--correspondence")
    assert code == 0 and "NOT in W_check" in out


def test_domain_error_exit_one(capsys):
    code, _, err = run(capsys, "degree", "--example", "degenerate")
    assert code == 1 and "DegenerateZero" in err


def test_config_errors_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[system]\ng = x1\ncolour = red\n")
    code, _, err = run(capsys, "degree", "--config", str(bad))
    assert code == 2 and "line 3" in err
    assert run(capsys, "degree", "--example", "nope")[0] == 2
    assert run(capsys, "degree")[0] == 2
    assert run(capsys, "degree", "--config", str(tmp_path / "missing.ini"))[0] == 2


def test_config_file_runs(capsys, tmp_path):
    cfg = tmp_path / "osc.ini"
    cfg.write_text("[system]\ng = -x1\nf = sin(t) - y1\nperiod = 2*pi\ndelay = pi/2\n"
                   "[periodic]\nlambda = 1\nguess = sin(t)\n"
                   )
    code, out, _ = run(capsys, "periodic", "--config", str(cfg))
    assert code == 0 and abs(json.loads(out)["sup_norm"] - 1.0) < 1e-6


def test_anomaly_exit_code(monkeypatch, capsys):
    import ddeperiodic.cli as cli

    class Fake:
        branches = []
        anomalies = [object()]

        def __str__(self):
            return "ANOMALY"

    monkeypatch.setattr(cli, "branch_certificate", lambda *a, **k: Fake())
    assert run(capsys, "branch", "--example", "cubic1d")[0] == 3


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for name in ("degree", "index", "flow", "periodic", "branch", "verify"):
        assert name in out
