from __future__ import annotations

import csv
import io
import json
from dataclasses import replace
from pathlib import Path

import pytest

import braess.cli as cli
from braess.cli import main, parse_document, run_verify
from braess.core import FourNodeConfig
from braess.equilibrium import equilibrium_Nplus
from braess.reduction import absorb_external_flow

DATA = Path(__file__).resolve().parent.parent / "data"


def write(tmp_path, doc, name="doc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def four(alpha, beta):
    return {"four_node": {"alpha": list(alpha), "beta": list(beta)}}


# ------------------------------------------------------------------ reduce


def test_reduce_identity(tmp_path, capsys):
    path = write(tmp_path, four((2, 36, 6, 40, 2), (30, 32, 3, 8, 19)))
    assert main(["reduce", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"alpha": [2, 36, 6, 40, 2], "beta": [30, 32, 3, 8, 19], "has_bc": True}


def test_reduce_generalised(capsys):
    assert main(["reduce", str(DATA / "generalised.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    doc = json.loads((DATA / "generalised.json").read_text())
    expected = {}
    for l in doc["links"]:
        a = absorb_external_flow(l["alpha"], l["beta"], l.get("external_flow", 0))
        ea, eb = expected.get(l["role"], (0.0, 0.0))
        expected[l["role"]] = (ea + a, eb + l["beta"])
    order = ["AB", "BD", "BC", "AC", "CD"]
    assert out["alpha"] == [expected[r][0] for r in order]
    assert out["beta"] == [expected[r][1] for r in order]


def test_reduce_missing_role(tmp_path, capsys):
    doc = json.loads((DATA / "generalised.json").read_text())
    doc["links"] = [l for l in doc["links"] if l["role"] != "CD"]
    assert main(["reduce", write(tmp_path, doc)]) == 2
    assert "CD" in capsys.readouterr().err


def test_reduce_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(four((1,) * 5, (1,) * 5))))
    assert main(["reduce", "-"]) == 0
    assert json.loads(capsys.readouterr().out)["has_bc"] is True


def test_bridgeless_document(tmp_path, capsys):
    path = write(tmp_path, four((2, 36, None, 40, 2), (30, 32, None, 8, 19)))
    assert main(["reduce", path]) == 0
    assert json.loads(capsys.readouterr().out)["has_bc"] is False
    assert main(["eq", path, "--Q", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["case"] == "N.c"


@pytest.mark.parametrize(
    "text",
    ["{not json", "[1, 2]", json.dumps({"four_node": {"alpha": [1, 2]}}), json.dumps({"links": []})],
)
def test_parse_errors(tmp_path, text):
    assert main(["reduce", write(tmp_path, text)]) == 1


def test_missing_file(tmp_path):
    assert main(["reduce", str(tmp_path / "nope.json")]) == 1


def test_negative_parameter(tmp_path):
    assert main(["reduce", write(tmp_path, four((1, 1, 1, 1, -1), (1,) * 5))]) == 1


# ---------------------------------------------------------------------- eq


def test_eq(capsys):
    assert main(["eq", str(DATA / "section5.json"), "--Q", "5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["case"] == "Nplus.g"
    assert out["T"] == pytest.approx(equilibrium_Nplus(FourNodeConfig((2, 36, 6, 40, 2), (30, 32, 3, 8, 19)), 5).T)
    assert main(["eq", str(DATA / "section5.json"), "--Q", "0.05", "--no-bc"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["case"] == "N.b" and out["T"] == pytest.approx(41.1)


def test_eq_bad_q(capsys):
    assert main(["eq", str(DATA / "section5.json"), "--Q", "-1"]) == 1


# ----------------------------------------------------------------- paradox


def test_paradox_text(capsys):
    assert main(["paradox", str(DATA / "section5.json")]) == 0
    out = capsys.readouterr().out
    assert "paradox region: (0.93, 8.59)" in out
    assert "pseudo-paradox region: [8.59, inf)" in out
    assert "theorem 4" in out and "no interval" in out


def test_paradox_arnott_small_relaxed(capsys):
    assert main(["paradox", "--relaxed", str(DATA / "arnott_small.json")]) == 0
    assert "paradox region: (500.00, 1500.00)" in capsys.readouterr().out


def test_paradox_arnott_small_strict_rejected():
    assert main(["paradox", str(DATA / "arnott_small.json")]) == 1


def test_paradox_asymmetric(capsys):
    assert main(["paradox", str(DATA / "asymmetric.json")]) == 0
    assert capsys.readouterr().out.strip().endswith("no paradox for any Q; pseudo-paradox for all Q>0")


def test_paradox_zero_over_zero(tmp_path):
    path = write(tmp_path, four((1, 2, 1, 2, 1), (1, 1, 0, 1, 0)))
    assert main(["paradox", "--relaxed", path]) == 3


def test_paradox_json_full_precision(capsys):
    assert main(["paradox", "--json", str(DATA / "section5.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    (region,) = out["paradox_region"]
    assert region["lo"] == pytest.approx(2740 / 2954, abs=1e-12)
    assert region["hi"] == pytest.approx(1348 / 157, abs=1e-12)
    assert out["pseudo_paradox_region"][0]["hi"] == "inf"
    assert [t["interval"] is None for t in out["theorems"]] == [False, False, False, True]


def test_paradox_json_round_trip(tmp_path, capsys):
    assert main(["paradox", "--json", str(DATA / "section5.json")]) == 0
    first = capsys.readouterr().out
    again = write(tmp_path, first, "again.json")
    assert main(["paradox", "--json", again]) == 0
    assert capsys.readouterr().out == first


# ------------------------------------------------------------------- sweep


def sweep(args, capsys):
    assert main(["sweep", str(DATA / "section5.json"), *args]) == 0
    return capsys.readouterr().out


def test_sweep_rows(capsys):
    out = sweep(["--qmin", "0.5", "--qmax", "20", "--steps", "40"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["Q", "T_N", "case_N", "T_Nplus", "case_Nplus", "delta", "classification"]
    by_q = {float(r["Q"]): r for r in rows}
    assert by_q[0.5]["classification"] == "improvement"
    assert float(by_q[20.0]["delta"]) == 0.0 and by_q[20.0]["classification"] == "equal"
    out = sweep(["--qmin", "5", "--qmax", "6", "--steps", "2"], capsys)
    row = next(csv.DictReader(io.StringIO(out)))
    # reference values come from 2-decimal coefficients: error up to 0.005 * (1 + Q)
    assert float(row["T_N"]) == pytest.approx(134.83, abs=0.03)
    assert float(row["T_Nplus"]) == pytest.approx(136.65, abs=0.03)
    assert row["classification"] == "paradox"


def test_sweep_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["sweep", str(DATA / "section5.json"), "--qmin", "0.1", "--qmax", "10",
                     "--steps", "25", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()
    assert a.read_bytes() == sweep(["--qmin", "0.1", "--qmax", "10", "--steps", "25"], capsys).encode()


def test_sweep_bad_args(tmp_path):
    path = str(DATA / "section5.json")
    assert main(["sweep", path, "--qmin", "2", "--qmax", "1"]) == 1
    assert main(["sweep", path, "--qmin", "1", "--qmax", "2", "--steps", "1"]) == 1
    assert main(["sweep", path, "--qmin", "1", "--qmax", "2", "--out", str(tmp_path / "no" / "x.csv")]) == 1


# ------------------------------------------------------------------ verify


def test_verify_pass(capsys):
    assert main(["verify", str(DATA / "section5.json"), "--samples", "500", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    worst = float(out.split("max_residual=")[1].split()[0])
    assert worst < 1e-6


def test_verify_perturbed_section5():
    cfg = FourNodeConfig((2.3, 35.1, 6.4, 41.0, 1.7), (29.5, 32.8, 3.2, 7.7, 19.4))
    worst, offender = run_verify(cfg, 300, seed=5)
    assert offender is None and worst < 1e-6


def test_verify_fault_injection_direct():
    cfg = FourNodeConfig((2, 36, 6, 40, 2), (30, 32, 3, 8, 19))

    def corrupted(c, q, d=None):
        sol = equilibrium_Nplus(c, q, d)
        return replace(sol, T=sol.T * (1 + 1e-4))

    worst, offender = run_verify(cfg, 50, seed=1, nplus_solver=corrupted)
    assert worst > 1e-6 and offender is not None


def test_verify_fault_injection_exit_code(monkeypatch, capsys):
    real = cli.equilibrium_Nplus

    def corrupted(c, q, d=None):
        sol = real(c, q, d)
        return replace(sol, T=sol.T + 1.0)

    monkeypatch.setattr(cli, "equilibrium_Nplus", corrupted)
    assert main(["verify", str(DATA / "section5.json"), "--samples", "20"]) == 4
    assert "FAIL" in capsys.readouterr().out


def test_help_lists_exit_codes(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "exit codes" in capsys.readouterr().out


def test_parse_document_network_and_four_node():
    doc = json.loads((DATA / "generalised.json").read_text())
    cfg = parse_document(doc)
    assert cfg.alpha == (2, 6, 3, 2, 2)
    assert parse_document(four((1,) * 5, (1,) * 5)).has_bc


def test_log_env(monkeypatch, capsys):
    monkeypatch.setenv("BRAESS_LOG", "debug")
    assert main(["reduce", str(DATA / "section5.json")]) == 0
