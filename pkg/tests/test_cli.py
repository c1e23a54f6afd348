import json
import subprocess
import sys

from jetcalc.cli import main, run


def run_json(argv):
    code, text = run(argv + ["--format", "json"])
    return code, json.loads(text)


def test_euler_subcommand():
    code, report = run_json(
        ["euler", "--m", "1", "--deps", "v", "--expr", "1/2*u[v;(1)]^2"]
    )
    assert code == 0
    assert report["result"]["source_form"] == {"v": "-u[v;(2)]"}
    assert report["schema"] == "jetcalc-report/1"
    # the certificate exhibits the d_H-primitive witness of the reduction
    assert report["certificate"]["dh_primitive"]["terms"] == [
        {"v": [["v", [0]]], "h": [], "coeff": "-u[v;(1)]"}
    ]


def test_total_derivative_inline_multi_index():
    code, report = run_json(
        ["total-derivative", "--m", "2", "--deps", "v", "--expr", "x1*x2",
         "--index", "(1,1)"]
    )
    assert code == 0
    assert report["result"]["expr"] == "1"


def test_verdict_exit_codes():
    code_true, _ = run_json(
        ["divergence-test", "--m", "1", "--deps", "v", "--expr", "2*u[v]*u[v;(1)]"]
    )
    assert code_true == 0
    code_false, report = run_json(
        ["divergence-test", "--m", "1", "--deps", "v", "--expr", "u[v;(1)]^2"]
    )
    assert code_false == 1
    assert report["verdict"] is False
    assert report["certificate"]["euler_coefficients"] == {"v": "-2*u[v;(2)]"}


def test_decompose_with_problem_file(tmp_path):
    problem = {
        "context": {"m": 1, "deps": ["v"]},
        "task": "decompose",
        "payload": {
            "field": {
                "components": [
                    {"dep": "v", "index": [0], "expr": "u[v;(1)]"}
                ]
            }
        },
    }
    path = tmp_path / "field.json"
    path.write_text(json.dumps(problem))
    code, report = run_json(["decompose", "--file", str(path), "--cutoff", "2"])
    assert code == 0
    generators = report["result"]["generators"]["generators"]
    table = {tuple(g["index"]): g["phi"] for g in generators}
    assert table[(0,)] == {"v": "u[v;(1)]"}
    assert table[(1,)] == {"v": "-u[v;(2)]"}
    assert table[(2,)] == {"v": "u[v;(3)]"}
    assert "round_trip" in report["certificate"]


def test_prolong_and_nabla_roundtrip(tmp_path):
    problem = {
        "context": {"m": 1, "deps": ["v"]},
        "task": "prolong",
        "payload": {"phi": {"v": "u[v;(1)]"}, "window": 2},
    }
    path = tmp_path / "prolong.json"
    path.write_text(json.dumps(problem))
    code, report = run_json(["prolong", "--file", str(path)])
    assert code == 0
    field = report["result"]["field"]
    problem2 = {
        "context": {"m": 1, "deps": ["v"]},
        "task": "nabla",
        "payload": {"field": field, "mu": 1},
    }
    path2 = tmp_path / "nabla.json"
    path2.write_text(json.dumps(problem2))
    code2, report2 = run_json(["nabla", "--file", str(path2)])
    assert code2 == 0
    # truncated prolongation: nabla vanishes below the window boundary
    comps = {
        tuple(entry["index"]): entry["expr"]
        for entry in report2["result"]["field"]["components"]
    }
    assert (0,) not in comps and (1,) not in comps


def test_conservation_law_and_report_roundtrip(tmp_path):
    problem = {
        "context": {"m": 2, "deps": ["v"]},
        "task": "conservation-law",
        "payload": {
            "current": ["-3*u[v]^2 - u[v;(2,0)]", "u[v]"],
            "system": ["u[v;(0,1)] - 6*u[v]*u[v;(1,0)] - u[v;(3,0)]"],
            "cofactors": [{"sigma": 0, "index": [0, 0], "expr": "1"}],
        },
    }
    path = tmp_path / "kdv.json"
    path.write_text(json.dumps(problem))
    code, text = run(["conservation-law", "--file", str(path), "--format", "json"])
    assert code == 0
    report = json.loads(text)
    assert report["verdict"] is True and report["certificate"]["residual"] == "0"
    # feeding the report back reproduces it byte for byte
    report_path = tmp_path / "report.json"
    report_path.write_text(text)
    code2, text2 = run(
        ["conservation-law", "--file", str(report_path), "--format", "json"]
    )
    assert code2 == 0 and text2 == text


def test_noether_subcommand(tmp_path):
    problem = {
        "context": {"m": 1, "deps": ["v"]},
        "task": "noether",
        "payload": {
            "phi": {"v": "u[v;(1)]"},
            "lagrangian": "1/2*u[v;(1)]^2",
            "window": 3,
        },
    }
    path = tmp_path / "noether.json"
    path.write_text(json.dumps(problem))
    code, report = run_json(["noether", "--file", str(path)])
    assert code == 0 and report["verdict"] is True


def test_dv_dh_lie_interior(tmp_path):
    code, report = run_json(["dv", "--m", "1", "--deps", "v", "--expr", "u[v;(1)]^2"])
    assert code == 0
    assert report["result"]["form"]["terms"] == [
        {"v": [["v", [1]]], "h": [], "coeff": "2*u[v;(1)]"}
    ]
    code, report = run_json(["dh", "--m", "1", "--deps", "v", "--expr", "x1^2"])
    assert code == 0
    assert report["result"]["form"]["terms"] == [
        {"v": [], "h": [1], "coeff": "2*x1"}
    ]
    problem = {
        "context": {"m": 1, "deps": ["v"]},
        "task": "lie",
        "payload": {
            "field": {"phi": {"v": "u[v]"}, "window": 3},
            "form": {"terms": [{"v": [], "h": [1], "coeff": "1"}]},
        },
    }
    path = tmp_path / "lie.json"
    path.write_text(json.dumps(problem))
    code, report = run_json(["lie", "--file", str(path)])
    assert code == 0 and report["result"]["form"]["terms"] == []
    problem["task"] = "interior"
    problem["payload"]["field"] = {"horizontal": {"1": "u[v]"}}
    path2 = tmp_path / "interior.json"
    path2.write_text(json.dumps(problem))
    code, report = run_json(["interior", "--file", str(path2)])
    assert code == 0
    assert report["result"]["form"]["terms"] == [{"v": [], "h": [], "coeff": "u[v]"}]


def test_specseq_and_bicomplex_pages(tmp_path):
    bicomplex = {
        "dims": [[0, 1], [1, 1], [1, 0]],
        "d_v": {"0,1": [["1"]], "1,0": [["1"]]},
        "d_h": {"1,0": [["-1"]]},
    }
    problem = {"task": "bicomplex", "payload": {"bicomplex": bicomplex}}
    path = tmp_path / "bi.json"
    path.write_text(json.dumps(problem))
    code, report = run_json(["bicomplex", "--file", str(path)])
    assert code == 0
    pages = report["result"]["pages"]
    assert pages["0,1"]["dims_by_r"]["2"] == 1
    assert pages["0,1"]["e_infinity"] == 0
    assert pages["0,1"]["stable_from"] == 3
    assert report["result"]["total_cohomology"] == {"0": 0, "1": 0, "2": 0, "3": 0}

    from jetcalc import Bicomplex

    complex_obj = Bicomplex.from_json_obj(bicomplex).totalize().to_json_obj()
    problem2 = {"task": "specseq", "payload": {"complex": complex_obj}}
    path2 = tmp_path / "complex.json"
    path2.write_text(json.dumps(problem2))
    code2, report2 = run_json(["specseq", "--file", str(path2), "--jobs", "2"])
    assert code2 == 0
    assert report2["result"]["pages"] == pages


def test_determinism_same_seed_byte_identical():
    argv = ["euler", "--m", "1", "--deps", "v", "--expr", "u[v]^3", "--seed", "5",
            "--format", "json"]
    first = run(list(argv))
    second = run(list(argv))
    assert first == second


def test_task_mismatch_is_an_input_error(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"task": "euler", "payload": {"expr": "u[v]"},
                                "context": {"m": 1, "deps": ["v"]}}))
    assert main(["decompose", "--file", str(path)]) == 2


def test_input_errors_exit_2(capsys):
    assert main(["euler", "--m", "1", "--deps", "v", "--expr", "u[zz]"]) == 2
    assert main(["euler", "--expr", "u[v]"]) == 2
    captured = capsys.readouterr()
    assert "error" in captured.err


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "jetcalc.cli", "euler", "--m", "1", "--deps", "v",
         "--expr", "u[v]^2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "2*u[v]" in proc.stdout


def test_text_format_is_deterministic():
    code, text1 = run(["euler", "--m", "1", "--deps", "v", "--expr", "u[v]^2"])
    _, text2 = run(["euler", "--m", "1", "--deps", "v", "--expr", "u[v]^2"])
    assert code == 0 and text1 == text2
    assert text1.startswith("task: euler")
