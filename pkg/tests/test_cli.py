"""Command-line driver: configs, exit codes, emitted files and manifests."""
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from shiftconv import cli


def test_verify_kernel_exit_zero(tmp_path):
    out = tmp_path / "v.csv"
    assert cli.main(["verify", "--suite", "kernel", "-o", str(out)]) == 0
    rows = cli.parse(out)
    assert rows and all(r["passed"] is True for r in rows)
    assert {r["suite"] for r in rows} == {"kernel"}


def test_module_entry_point(tmp_path):
    out = tmp_path / "v.json"
    r = subprocess.run([sys.executable, "-m", "shiftconv", "verify", "--suite", "amplifier",
                        "--format", "json", "-o", str(out)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert all(row["passed"] for row in json.loads(out.read_text()))


def test_malformed_config_exit_two(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{\n  "command": "kernel",\n  "params": {,}\n}\n')
    assert cli.main(["-c", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "line 3" in err and "column" in err


def test_config_errors_exit_two(tmp_path):
    assert cli.main(["--param", "x=1", "-o", str(tmp_path / "a.csv")]) == 2  # no command
    assert cli.main(["verify", "--suite", "nope", "-o", str(tmp_path / "a.csv")]) == 2
    assert cli.main(["kernel", "-p", "noequals", "-o", str(tmp_path / "a.csv")]) == 2
    cfg = tmp_path / "list.json"
    cfg.write_text("[1, 2]")
    assert cli.main(["-c", str(cfg)]) == 2


def test_shifted_scan_rows_and_manifest(tmp_path):
    out = tmp_path / "scan.csv"
    assert cli.main(["shifted-scan", "-o", str(out)]) == 0
    rows = cli.parse(out)
    assert len(rows) == 8
    assert [r["x"] for r in rows] == [2.0 ** e for e in range(10, 18)]
    assert out.read_text().splitlines()[0] == "x,h,S_re,S_im,absS,logx,logabsS"
    man = json.loads((tmp_path / "scan.csv.manifest.json").read_text())
    assert man["rows"] == 8 and man["command"] == "shifted-scan"
    assert 0.35 <= man["parameters"]["slope"] <= 0.65


def test_manifest_completeness(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["poincare-check", "-o", str(out), "-p", "Y=8", "-p", "tol_fourier=1e-7"]) == 0
    man = json.loads((tmp_path / "p.csv.manifest.json").read_text())
    for key in ("config", "config_hash", "version", "seed", "threads", "wall_time_s", "columns"):
        assert key in man
    assert man["parameters"] == {"Y": 8.0, "delta": 0.5, "tol_invariance": 1e-12, "tol_fourier": 1e-7}
    assert man["config_hash"] == cli.config_hash(man["config"])


def test_empty_rows_header_only(tmp_path):
    p = tmp_path / "e.csv"
    cli.emit([], "csv", str(p), columns=("a", "b_re", "b_im"))
    assert p.read_text() == "a,b_re,b_im\n"
    assert cli.parse(p) == []


def test_emit_parse_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    rows = [{"n": int(i), "v": complex(*rng.normal(size=2)), "x": float(rng.normal()) * 10.0 ** int(i),
             "ok": bool(i % 2), "tag": f"t{i}"} for i in range(-5, 6)]
    flat = [cli._flatten(r) for r in rows]
    for fmt in ("csv", "json"):
        p = tmp_path / f"rt.{fmt}"
        cli.emit(rows, fmt, str(p))
        assert cli.parse(p, fmt) == flat


def test_nonfinite_values_survive(tmp_path):
    p = tmp_path / "n.csv"
    cli.emit([{"a": math.nan, "b": math.inf}], "csv", str(p))
    back = cli.parse(p)[0]
    assert math.isnan(back["a"]) and back["b"] == math.inf


@pytest.mark.parametrize("cmd,extra", [("kernel", ["-p", "n_random=6"]),
                                       ("zq", ["-p", "M2=100", "-p", "H=100"]),
                                       ("dseries", ["-p", 's=[2, [2.5, 1]]'])])
def test_determinism_byte_identical(tmp_path, cmd, extra):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main([cmd, "--seed", "7", "-o", str(a), *extra]) == 0
    assert cli.main([cmd, "--seed", "7", "-o", str(b), *extra]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_thread_count_does_not_change_output(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    monkeypatch.setenv("SHIFTCONV_THREADS", "1")
    assert cli.main(["kernel", "--seed", "3", "-o", str(a)]) == 0
    monkeypatch.setenv("SHIFTCONV_THREADS", "4")
    assert cli.main(["kernel", "--seed", "3", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    out = tmp_path / "from_cfg.json"
    cfg.write_text(json.dumps({"command": "eisenstein-check", "format": "json", "output_path": str(out),
                               "params": {"N": [1], "n_max": 3}}))
    assert cli.main(["-c", str(cfg)]) == 0
    assert len(json.loads(out.read_text())) == 3
    assert cli.main(["-c", str(cfg), "-p", "n_max=2"]) == 0
    assert len(json.loads(out.read_text())) == 2


def test_data_error_exit_four(tmp_path):
    short = tmp_path / "short.txt"
    short.write_text("1 1 0\n2 -24 0\n")
    out = str(tmp_path / "o.csv")
    assert cli.main(["dseries", "-o", out, "-p", f"form={short}"]) == 4
    assert cli.main(["dseries", "-o", out, "-p", f"form={tmp_path / 'missing.txt'}"]) == 4


def test_numeric_error_exit_three(tmp_path):
    pts = json.dumps([{"s": [0.5, 0.3], "z": [0, 0.3], "delta": 0.4}])
    out = str(tmp_path / "o.csv")
    assert cli.main(["kernel", "-o", out, "-p", f"points={pts}", "-p", 'regimes=["hypergeom"]']) == 3


def test_failed_check_exit_three(tmp_path):
    # an impossible tolerance marks the rows failed and the run exits with the numeric code
    out = tmp_path / "e.csv"
    assert cli.main(["eisenstein-check", "-o", str(out), "-p", "tol=0", "-p", "N=[1]", "-p", "n_max=2"]) == 3
    man = json.loads((tmp_path / "e.csv.manifest.json").read_text())
    assert man["failed_checks"] == 2
