import csv
import io
import json
import subprocess
import sys

import pytest

from bergconc.report import (NON_CONVERGENT, PASS, VIOLATION, CheckRecord,
                             VerificationReport)

BASE = [sys.executable, "-m", "bergconc"]


def run_cli(*args, timeout=300):
    return subprocess.run(BASE + list(args), capture_output=True, text=True,
                          timeout=timeout)


def test_verify_exact_small():
    out = run_cli("verify-exact", "--n", "1..2", "--alpha", "2,5/2",
                  "--l-max", "25", "--k-max", "25")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert doc["summary"]["VIOLATION"] == 0
    assert doc["summary"]["total"] == len(doc["checks"])
    assert doc["config"]["alpha"] == ["2/1", "5/2"]
    names = {c["name"] for c in doc["checks"]}
    assert {"symmetric-scan", "c-coefficient-scan", "b-weight-identities",
            "roots-residues", "moment-bound-scan",
            "terminating-sum-identity"} <= names


def test_exploratory_exit_zero():
    out = run_cli("verify-exact", "--n", "4..4", "--alpha", "3",
                  "--l-max", "30", "--k-max", "10")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    scans = [c for c in doc["checks"] if c["name"] == "symmetric-scan"]
    assert scans and all("EXPLORATORY" in c["detail"] for c in scans)


def test_profile_csv_columns():
    out = run_cli("profile", "--functions", "one", "--n", "0", "--alpha", "2",
                  "--variant", "mu", "--s-grid", "0.5:20:5", "--format", "csv")
    assert out.returncode == 0
    rows = list(csv.reader(io.StringIO(out.stdout)))
    assert rows[0] == ["function", "n", "alpha", "variant",
                       "s", "I_raw", "I_hat", "theta", "margin", "err"]
    assert len(rows) == 6
    for row in rows[1:]:
        margin, err = float(row[8]), float(row[9])
        assert margin >= -err  # equality baseline


def test_profile_json_verdicts():
    out = run_cli("profile", "--functions", "monomial:1", "--n", "1",
                  "--alpha", "2", "--variant", "both", "--s-grid", "0.5:20:5")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    recs = [c for c in doc["checks"] if c["name"] == "profile"]
    assert len(recs) == 2
    assert all(c["verdict"] == PASS and c["values"]["strict"] for c in recs)


def test_fock_small():
    out = run_cli("fock", "--n", "0..1", "--k-max", "3")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert doc["summary"]["VIOLATION"] == 0
    assert any(c["name"] == "fock-convergence" for c in doc["checks"])


def test_lemma22_small():
    out = run_cli("lemma22", "--n", "0..3", "--alpha", "2,5/2")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    recs = [c for c in doc["checks"] if c["name"] == "curvature-margin"]
    assert len(recs) == 8
    assert all(c["values"]["margin_at_zero"] == "0/1" for c in recs)


def test_isoperimetry():
    out = run_cli("isoperimetry")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    recs = [c for c in doc["checks"] if c["name"] == "isoperimetry"]
    assert len(recs) == 19
    assert all(c["values"]["exact_residual"] == "0/1" for c in recs)


def test_usage_error_exit_64():
    out = run_cli("verify-exact", "--alpha", "abc")
    assert out.returncode == 64
    out = run_cli("nonsense-command")
    assert out.returncode == 64
    out = run_cli("profile", "--functions", "weird:thing")
    assert out.returncode == 64
    out = run_cli("profile", "--s-grid", "5")
    assert out.returncode == 64


def test_deterministic_bodies_and_parallel_merge(tmp_path):
    args = ("verify-exact", "--n", "1..2", "--alpha", "2,5/2",
            "--l-max", "20", "--k-max", "20")
    f1, f2, f3 = (tmp_path / n for n in ("a.json", "b.json", "c.json"))
    assert run_cli(*args, "--out", str(f1)).returncode == 0
    assert run_cli(*args, "--out", str(f2)).returncode == 0
    assert run_cli(*args, "--jobs", "2", "--out", str(f3)).returncode == 0
    docs = [json.loads(p.read_text()) for p in (f1, f2, f3)]
    for d in docs:
        d.pop("timings")
    # identical config: byte-identical bodies
    assert json.dumps(docs[0], sort_keys=True) == json.dumps(docs[1], sort_keys=True)
    # parallel run: identical checks merged in the same order
    assert json.dumps(docs[0]["checks"]) == json.dumps(docs[2]["checks"])
    assert docs[0]["summary"] == docs[2]["summary"]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 1..1\nalpha = 2\nl-max = 15\nk-max = 15\n")
    out = run_cli("verify-exact", "--config", str(cfg), "--k-max", "10")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert doc["config"]["l_max"] == 15
    assert doc["config"]["k_max"] == 10  # flag wins over file


def test_exit_code_contract_unit():
    rec_pass = CheckRecord("x", {}, PASS)
    rec_violation = CheckRecord("x", {}, VIOLATION)
    rec_nc = CheckRecord("x", {}, NON_CONVERGENT)
    assert VerificationReport("t", {}, [rec_pass]).exit_code() == 0
    assert VerificationReport("t", {}, [rec_pass, rec_nc]).exit_code() == 2
    assert VerificationReport("t", {}, [rec_nc, rec_violation]).exit_code() == 1


def test_report_counts_match_records():
    recs = [CheckRecord("a", {"i": i}, PASS) for i in range(5)]
    rep = VerificationReport("t", {}, recs)
    assert rep.summary["total"] == 5 == rep.summary[PASS]
    body = rep.body()
    assert len(body["checks"]) == 5
