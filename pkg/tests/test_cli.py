import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from corrbc.cli import RunReport, load_scenario, main, scenario_from_dict, scenario_to_dict

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_info_table_and_verdict(capsys):
    code, out = run(capsys, "info", "I(S1;Y1)", "--scenario", str(SCEN / "identity2.json"))
    assert code == 0
    assert "verdict: 1.000000000000" in out.out


def test_info_v_macro(capsys):
    code, out = run(capsys, "info", "v1", "--scenario", str(SCEN / "identity2.json"))
    assert code == 0 and "verdict: 1.000000000000" in out.out


def test_input_errors_exit_2(capsys, tmp_path):
    assert run(capsys, "info", "I(S1;", "--scenario", str(SCEN / "identity2.json"))[0] == 2
    assert run(capsys, "info", "H(S1)", "--scenario", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alphabets": {"S1": 2, "S2": 1, "X": 2, "Y1": 2, "Y2": 2},
                               "source": [[0.5], [0.6]], "channel": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}))
    code, out = run(capsys, "region", "thm2", "--scenario", str(bad))
    assert code == 2 and "error" in out.err
    assert run(capsys, "info", "H(S1) >= 0", "--scenario", str(SCEN / "identity2.json"))[0] == 2
    assert run(capsys, "region", "cover", "--scenario", str(SCEN / "identity2.json"))[0] == 2


def test_prove_exit_codes(capsys):
    code, out = run(capsys, "prove", "I(A;B)")
    assert code == 0 and "Proven" in out.out
    code, out = run(capsys, "prove", "I(A;B) - I(A;B|C)")
    assert code == 1 and "NotProvable" in out.out


def test_prove_with_constraints(capsys, tmp_path):
    cons = tmp_path / "c.txt"
    cons.write_text("H(Y|X) = 0\n")
    assert run(capsys, "prove", "H(X) >= H(Y)")[0] == 1
    assert run(capsys, "prove", "H(X) >= H(Y)", "--constraints", str(cons))[0] == 0


def test_fm_matches(capsys):
    code, out = run(capsys, "fm")
    assert code == 0
    assert "reduced rows: 8" in out.out and "verdict: match" in out.out
    code, out = run(capsys, "fm", "--order", "R2,R1,R0", "--no-s3")
    assert code == 0


def test_region_thm2_ber02(capsys):
    code, out = run(capsys, "region", "thm2", "--scenario", str(SCEN / "ber02.json"),
                    "--format", "records")
    assert code == 0
    head = RunReport.loads(out.out)
    margins = [r["margin"] for r in head.rows]
    assert margins == pytest.approx([0.278072, 1.0, 0.278072, 0.278072, 0.278072], abs=1e-6)
    assert head.verdict == "satisfied"


def test_region_cover_zero_bounds_unsatisfied(capsys):
    code, out = run(capsys, "region", "cover", "--scenario", str(SCEN / "identity2.json"),
                    "--rates", "1.2,0,0")
    assert code == 1
    code, _ = run(capsys, "region", "cover", "--scenario", str(SCEN / "identity2.json"),
                  "--rates", "1.2,0.1,0.1")
    assert code == 0


def test_simulate_records_round_trip(capsys):
    argv = ["simulate", "e2e", "--scenario", str(SCEN / "identity2.json"), "--rates", "1.2,0,0",
            "--n", "6", "--trials", "4", "--eps", "0.6", "--eps-prime", "0.5", "--format", "records"]
    code, out = run(capsys, *argv)
    assert code == 0
    report = RunReport.loads(out.out)
    rows = report.rows
    assert len(rows) == 4 and {"trial", "decode1", "decode2", "messages", "seed"} <= set(rows[0])
    assert len(report.seeds) == 4
    assert RunReport.loads(report.dumps()) == report
    # same inputs, same configuration hash and the same trials
    _, out2 = run(capsys, *argv)
    report2 = RunReport.loads(out2.out)
    assert report2.config_hash == report.config_hash and report2.rows == rows


def test_simulate_budget_exceeded(capsys):
    code, out = run(capsys, "simulate", "cover", "--scenario", str(SCEN / "identity2.json"),
                    "--rates", "1.2,0,0", "--n", "6", "--eps", "0.6", "--eps-prime", "0.5",
                    "--budget", "10")
    assert code == 2 and "budget" in out.err


def test_config_hash_depends_on_config_only():
    a = RunReport("x", {"b": 1, "a": [1, 2]}, [], "ok", [], 0.1)
    b = RunReport("y", {"a": [1, 2], "b": 1}, [{"r": 1}], "no", [3], 9.0)
    c = RunReport("x", {"a": [1, 2], "b": 2}, [], "ok", [], 0.1)
    assert a.config_hash == b.config_hash != c.config_hash
    assert len(a.config_hash) == 16


def test_search_writes_scenario(capsys, tmp_path):
    out_path = tmp_path / "best.json"
    code, out = run(capsys, "search", "--scenario", str(SCEN / "ber02.json"), "--cards", "2,2,1",
                    "--budget", "600", "--out", str(out_path))
    assert code == 0
    scen, aux, _ = load_scenario(out_path)
    from corrbc.regions import eval_theorem2
    assert eval_theorem2(scen, aux).min_margin >= 0.27


def test_scenario_dict_round_trip():
    scen, aux, doc = load_scenario(SCEN / "ber02.json")
    s2, a2 = scenario_from_dict(scenario_to_dict(scen, aux))
    assert np.array_equal(s2.channel, scen.channel)
    assert np.allclose(a2.aux, aux.aux) and np.array_equal(a2.x_map, aux.x_map)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "corrbc", "prove", "I(A;B)"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "Proven" in res.stdout
