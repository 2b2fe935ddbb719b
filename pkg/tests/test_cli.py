import io
import json

import pytest

from conic_lab.cli import FIELDS, Splitmix64, emit, run


def run_capture(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_count_roundtrip(capsys):
    code, out, _ = run_capture(
        ["count", "--p", "7", "--n", "2", "--coeffs", "1,1,-1", "--N", "5", "--sharp"], capsys
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "p,n,q,a1,a2,a3,N,weight,observed,schema_version"
    assert lines[1].split(",") == ["7", "2", "49", "1", "1", "-1", "5", "sharp", "24", "1"]


def test_scan_header_and_rows(capsys):
    code, out, _ = run_capture(
        ["scan", "--p", "7", "--n", "2..3", "--theta", "0.62", "--coeffs", "1,1,-1"], capsys
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "p,n,q,N,theta,observed,predicted,ratio,schema_version"
    assert len(lines) == 3


def test_smallest_absent_maps_to_zero(capsys):
    code, out, _ = run_capture(
        ["smallest", "--p", "5", "--n", "1", "--coeffs", "1,1,-1"], capsys
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "p,n,q,a1,a2,a3,m,x1,x2,x3,schema_version"
    assert lines[1] == "5,1,5,1,1,-1,0,,,,1"


def test_exit_codes(capsys):
    code, _, err = run_capture(
        ["count", "--p", "4", "--n", "1", "--coeffs", "1,1,-1", "--N", "2"], capsys
    )
    assert code == 2 and "odd prime" in err
    code, _, err = run_capture(
        ["count", "--p", "7", "--n", "2", "--coeffs", "1,1,-1", "--N", "1e7"], capsys
    )
    assert code == 2 and "budget" in err
    code, _, err = run_capture(["count", "--p", "7", "--n", "2", "--N", "2"], capsys)
    assert code == 2 and "coeffs" in err


def test_dry_run(capsys):
    code, out, _ = run_capture(
        ["scan", "--p", "7", "--n", "2..3", "--coeffs", "1,1,-1", "--dry-run"], capsys
    )
    assert code == 0
    assert out.startswith("dry-run: estimated work units")


def test_selftest(capsys):
    code, out, _ = run_capture(["selftest"], capsys)
    assert code == 0
    assert "FAIL" not in out


def test_jsonl_round_trip(capsys, tmp_path):
    code, out, _ = run_capture(
        ["predict", "--p", "7", "--n", "4", "--coeffs", "1,1,-1", "--N", "100",
         "--format", "jsonl"], capsys
    )
    assert code == 0
    doc = json.loads(out.strip())
    assert doc["p"] == 7 and doc["schema_version"] == 1
    # a jsonl record doubles as a config file for the same subcommand
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": doc["p"], "n": doc["n"], "N": doc["N"],
                               "coeffs": "1,1,-1"}))
    code2, out2, _ = run_capture(["predict", "--config", str(cfg)], capsys)
    assert code2 == 0
    doc_line = out2.strip().splitlines()[1]
    assert doc_line.split(",")[8] == f"{doc['predicted']:.12g}"


def test_config_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": 7, "n": 1, "coeffs": "1,1,-1", "N": 3, "sharp": True}))
    code, out, _ = run_capture(["count", "--config", str(cfg)], capsys)
    assert code == 0 and out.strip().splitlines()[1].endswith("sharp,24,1")
    # explicit flag overrides the file value
    code, out, _ = run_capture(["count", "--config", str(cfg), "--N", "0"], capsys)
    assert code == 0
    assert out.strip().splitlines()[1].split(",")[8] == "0"
    cfg.write_text(json.dumps({"no_such_field": 1}))
    code, _, err = run_capture(["count", "--config", str(cfg), "--p", "7", "--n", "1",
                                "--coeffs", "1,1,-1", "--N", "1"], capsys)
    assert code == 2 and "unknown field" in err


def test_identical_seed_identical_bytes(capsys):
    argv = ["scan", "--p", "7", "--n", "2..3", "--sample", "2", "--seed", "42"]
    code1, out1, _ = run_capture(argv + ["--workers", "1"], capsys)
    code2, out2, _ = run_capture(argv + ["--workers", "8"], capsys)
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical across worker counts
    assert out1.startswith("# seed=42\n")


def test_emit_float_formatting():
    buf = io.StringIO()
    emit([dict(mode="x", inputs="i", result=1 / 3)], FIELDS["dioph"], "csv", buf)
    assert "0.333333333333" in buf.getvalue()
    with pytest.raises(Exception):
        emit([], FIELDS["dioph"], "yaml", io.StringIO())


def test_splitmix_determinism():
    a = Splitmix64(7)
    b = Splitmix64(7)
    assert [a.next() for _ in range(5)] == [b.next() for _ in range(5)]
    assert all(1 <= Splitmix64(1).unit(7) <= 6 for _ in range(10))


def test_expsum_check_subcommand(capsys):
    code, out, _ = run_capture(
        ["expsum-check", "--p", "7", "--n", "3", "--count", "5", "--seed", "3"], capsys
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("p,n,q,source,k1,k2,x3,alpha,status,rel_err")
    for line in lines[1:]:
        cells = line.split(",")
        status, rel = cells[8], cells[9]
        if status == "ok":
            assert float(rel) < 1e-6


def test_dioph_subcommand(capsys):
    code, out, _ = run_capture(
        ["dioph", "--mode", "params", "--q", str(7**6), "--M", "343"], capsys
    )
    assert code == 0
    assert "R=4" in out
    code, out, _ = run_capture(
        ["dioph", "--mode", "approx", "--beta", "7", "--q", "10", "--Q", "3"], capsys
    )
    assert code == 0 and "a=2;r=3" in out
