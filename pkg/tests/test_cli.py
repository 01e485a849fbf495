from __future__ import annotations

import json
import math
from pathlib import Path

import pytest
from conftest import build_contracting, build_golden23, write_map

from dynspec import cli
from dynspec.bounds import BoundsVerdict
from dynspec.cli import main
from dynspec.errors import NoConvergence
from dynspec.mapfile import load_map


def _json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_validate_ok(capsys) -> None:
    assert main(["validate", "example:golden23"]) == 0
    out = capsys.readouterr().out
    assert "Validation OK" in out
    assert "mixing power: 2" in out


def test_validate_failure(tmp_path: Path, capsys) -> None:
    path = write_map(tmp_path, build_contracting())
    assert main(["validate", str(path)]) == 2
    assert "Validation failed" in capsys.readouterr().out


def test_spectrum_rejects_contracting_map(tmp_path: Path, capsys) -> None:
    path = write_map(tmp_path, build_contracting(), "bad.json")
    assert main(["spectrum", str(path)]) == 2
    assert "NotExpanding" in capsys.readouterr().err


def test_spectrum_json(capsys) -> None:
    assert main(["spectrum", "example:golden23"]) == 0
    payload = _json(capsys)
    assert payload["mixing_rate"] == pytest.approx(0.47352, abs=1e-3)
    assert payload["lyapunov"] == pytest.approx(0.477386, abs=1e-6)
    assert payload["subleading"][2] == 1


def test_spectrum_other_beta_and_csv(capsys) -> None:
    assert main(["spectrum", "example:golden23", "--beta", "2"]) == 0
    assert _json(capsys)["leading"] == pytest.approx(0.62284, abs=1e-5)

    assert main(["spectrum", "example:tent", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "m,re,im,modulus"
    assert len(lines) == 7


def test_spectrum_dumps(tmp_path: Path, capsys) -> None:
    matrix = tmp_path / "T.csv"
    blocks = tmp_path / "blocks.csv"
    out = tmp_path / "spectrum.json"
    code = main(
        [
            "spectrum",
            "example:golden23",
            "--dump-matrix",
            str(matrix),
            "--dump-blocks",
            str(blocks),
            "--output",
            str(out),
            "--pretty",
        ]
    )
    assert code == 0
    assert matrix.read_text().startswith("row,col,value\n")
    assert blocks.read_text().startswith("m,n,k,l,value\n")
    assert json.loads(out.read_text())["degree"] == 2
    assert f"Wrote {out}" in capsys.readouterr().out


def test_pressure(capsys) -> None:
    assert main(["pressure", "example:doubling", "--betas", "0,1,2", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "beta,P"
    beta, value = lines[2].split(",")
    assert float(beta) == 1.0
    assert float(value) == pytest.approx(0.0, abs=1e-12)
    assert main(["pressure", "example:moebius"]) == 2
    assert main(["pressure", "example:golden23", "--betas", "0,x"]) == 2


def test_threads_flag(capsys) -> None:
    assert main(["--threads", "0", "pressure", "example:doubling"]) == 2
    assert "threads" in capsys.readouterr().err
    assert main(["--threads", "2", "pressure", "example:doubling"]) == 0


def test_lyapunov(capsys) -> None:
    assert main(["lyapunov", "example:golden23"]) == 0
    assert _json(capsys)["lyapunov"] == pytest.approx(0.477386, abs=1e-6)
    assert main(["lyapunov", "example:moebius", "--orbit", "2000"]) == 0
    payload = _json(capsys)
    assert payload["lyapunov"] == pytest.approx(0.685, abs=5e-3)
    assert payload["orbit"]["orbits"] == 100
    assert main(["lyapunov", "example:moebius", "--orbit", "10"]) == 2


def test_linearize(tmp_path: Path, capsys) -> None:
    emitted = tmp_path / "f2.json"
    assert main(["linearize", "example:moebius", "--level", "2", "--emit", str(emitted)]) == 0
    fn = load_map(str(emitted))
    assert fn.size == 4
    assert f"Wrote {emitted}" in capsys.readouterr().out

    assert main(["linearize", "example:moebius", "--level", "3"]) == 0
    payload = _json(capsys)
    assert payload["branches"] == 8

    assert main(["linearize", "example:moebius", "--level", "3", "--trace", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("level,nu0_subl,nu1,nu2")
    assert len(lines) == 4

    assert main(["linearize", "example:moebius", "--level", "2", "--eigenfunctions", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("level,x,u\n")
    assert main(["linearize", "example:golden23"]) == 2


def test_cheb(capsys) -> None:
    assert main(["cheb", "example:moebius", "--order", "25", "--beta", "1"]) == 0
    payload = _json(capsys)
    assert payload["subleading_modulus"] == pytest.approx(0.10415, abs=5e-4)
    assert payload["mixing_rate"] == pytest.approx(2.2619, abs=5e-3)
    assert len(payload["eigenvalues"]) == 8

    assert main(["cheb", "example:moebius", "--density", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("x,h(x)\n")
    assert main(["cheb", "example:moebius", "--order", "3"]) == 2


def test_sweep(capsys) -> None:
    args = ["sweep", "--c-min", "-0.11", "--c-max", "0.0", "--c-step", "0.11"]
    assert main(args + ["--order", "20", "--top", "2"]) == 0
    payload = _json(capsys)
    assert payload["minimum"]["c"] == -0.11
    assert len(payload["rows"]) == 4
    assert main(["sweep", "--c-step", "0"]) == 2


def test_correlate(capsys) -> None:
    args = [
        "correlate",
        "example:doubling",
        "--n-max",
        "3",
        "--ensemble",
        "2000",
        "--length",
        "30",
        "--shards",
        "4",
    ]
    assert main(args + ["--fit", "none", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,C,Cnorm,stderr"
    assert len(lines) == 5

    assert main(args) == 0
    payload = _json(capsys)
    assert payload["observable"] == "identity"
    assert payload["series"]["transient"] == 100
    assert payload["series"]["C"][0] == pytest.approx(1.0 / 12.0, rel=0.1)
    assert "fit" in payload


def test_verify_tent_passes(capsys) -> None:
    assert main(["verify", "example:tent", "--degree", "4"]) == 0
    payload = _json(capsys)
    assert payload["ok"] is True
    assert payload["failures"] == []


def test_verify_smooth_reports_finding(capsys) -> None:
    assert main(["verify", "example:moebius", "--k-max", "2"]) == 0
    payload = _json(capsys)
    assert payload["kind"] == "smooth"
    assert payload["analytic_violation"] is True


def test_verify_failure_exit_code(monkeypatch, capsys) -> None:
    def failing(fmap, degree=2):
        return BoundsVerdict(
            alpha=1.0,
            lambda_exp=0.4,
            minus_p3=0.8,
            minus_log_nu2=0.8,
            bound_2L=False,
            jensen_chain=False,
            nu_identity=0.0,
            block_bound=0.0,
            failures=["alpha exceeds 2*Lambda"],
        )

    monkeypatch.setattr(cli, "verify_bounds", failing)
    assert main(["verify", "example:golden23"]) == 1
    assert _json(capsys)["failures"] == ["alpha exceeds 2*Lambda"]


def test_numeric_failure_exit_code(monkeypatch, capsys) -> None:
    def broken(fmap, degree=2):
        raise NoConvergence("eigensolver failed")

    monkeypatch.setattr(cli, "mixing_rate", broken)
    assert main(["spectrum", "example:golden23"]) == 3
    assert "NoConvergence" in capsys.readouterr().err


def test_missing_file(tmp_path: Path, capsys) -> None:
    assert main(["spectrum", str(tmp_path / "nope.json")]) == 2


def test_argparse_errors() -> None:
    with pytest.raises(SystemExit) as exc:
        main(["spectrum"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["spectrum", "example:tent", "--unknown"])


def test_golden_map_file_round_trip(tmp_path: Path, capsys) -> None:
    path = write_map(tmp_path, build_golden23())
    assert main(["lyapunov", str(path)]) == 0
    assert _json(capsys)["lyapunov"] == pytest.approx(
        0.75 * math.log(1.5) + 0.25 * math.log(2.0)
    )
