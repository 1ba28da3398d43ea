"""Command-line interface: reports, exit codes and determinism."""

import csv
import json
import subprocess
import sys

import pytest

from torex import classify
from torex.cli import EXIT_CONSISTENCY, EXIT_INPUT, EXIT_OK, SCHEMA, run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None), out


class TestAnalyze:
    @pytest.mark.parametrize("argv, final", [
        (("--preset", "hirzebruch", "--m", "2", "--a", "3", "--cusp", "s-infinity"), "PoincareExtremal"),
        (("--preset", "hirzebruch", "--m", "2", "--a", "3", "--cusp", "fibre"), "DonaldsonOnly"),
        (("--preset", "simplex", "--cusp", "x1,x2"), "Unstable"),
    ])
    def test_verdicts(self, capsys, argv, final):
        code, doc, _ = call(capsys, "analyze", "--grid", "8", *argv)
        assert code == EXIT_OK
        assert doc["schema"] == SCHEMA and doc["command"] == "analyze"
        assert doc["result"]["classification"]["final"] == final

    def test_rationals_are_strings(self, capsys):
        _, doc, _ = call(capsys, "analyze", "--preset", "hirzebruch", "--m", "2", "--a", "5/2",
                         "--cusp", "s-infinity", "--grid", "8")
        assert doc["input"]["params"]["a"] == "5/2"
        assert all(isinstance(c, str) for v in doc["result"]["vertices"] for c in v)

    def test_byte_identical(self, capsys):
        argv = ("analyze", "--preset", "hirzebruch", "--m", "1", "--a", "2", "--cusp", "s-0", "--grid", "8")
        _, _, first = call(capsys, *argv)
        _, _, second = call(capsys, *argv)
        assert first == second

    def test_input_document(self, capsys, tmp_path):
        doc = {"dimension": 2, "facets": [
            {"normal": [1, 0], "offset": "0", "weight": "0"},
            {"normal": [0, 1], "offset": "0", "weight": "1"},
            {"normal": [-1, -1], "offset": "1", "weight": "1"},
        ]}
        path = tmp_path / "tri.json"
        path.write_text(json.dumps(doc))
        code, rep, _ = call(capsys, "analyze", "--input", str(path), "--grid", "8")
        assert code == EXIT_OK and rep["result"]["classification"]["final"] == "PoincareExtremal"

    @pytest.mark.parametrize("argv", [
        ("analyze",),
        ("analyze", "--preset", "hirzebruch", "--m", "0", "--a", "2"),
        ("analyze", "--preset", "hirzebruch", "--m", "1", "--a", "1"),
        ("analyze", "--preset", "simplex", "--cusp", "nope"),
        ("analyze", "--preset", "square", "--grid", "4"),
        ("analyze", "--preset", "square", "--fd-step", "0.5"),
        ("analyze", "--preset", "square", "--a", "1.5"),
        ("nonsense",),
    ])
    def test_input_errors(self, capsys, argv):
        assert run(list(argv)) == EXIT_INPUT

    def test_missing_file(self, tmp_path):
        assert run(["analyze", "--input", str(tmp_path / "missing.json")]) == EXIT_INPUT

    def test_cross_check_failure(self, capsys, monkeypatch):
        monkeypatch.setattr(classify, "RESIDUAL_GUARD", 0.0)
        code, doc, _ = call(capsys, "analyze", "--preset", "hirzebruch", "--m", "2", "--a", "3",
                            "--cusp", "s-infinity", "--grid", "8")
        assert code == EXIT_CONSISTENCY


class TestConstruct:
    def test_calabi(self, capsys):
        code, doc, _ = call(capsys, "construct", "--preset", "hirzebruch", "--m", "2", "--a", "3",
                            "--cusp", "s-0,s-infinity", "--grid", "8")
        assert code == EXIT_OK

    def test_no_ansatz(self, capsys):
        assert run(["construct", "--preset", "simplex", "--cusp", "x1,x2"]) == EXIT_INPUT


class TestFchi:
    def test_first_piece(self, capsys, tmp_path):
        out = tmp_path / "f.json"
        code = run(["fchi", "--preset", "hirzebruch", "--m", "2", "--a", "3", "--cusp", "s-infinity",
                    "--grid", "8", "--out", str(out)])
        assert code == EXIT_OK
        res = json.loads(out.read_text())["result"]
        assert res["value_at_0"] == "0"
        assert res["second_derivative_equals_szekelyhidi"]
        assert all(d == "0" for d in res["continuity_defects"])
        assert res["samples"][-1] == [res["c_max"], "0"]
        rows = list(csv.reader(out.with_suffix(".csv").open()))
        assert len(rows) == 8 + 2

    def test_bad_facet(self):
        assert run(["fchi", "--preset", "square", "--facet", "middle"]) == EXIT_INPUT
        assert run(["fchi", "--preset", "square"]) == EXIT_INPUT


class TestPlot:
    def test_files(self, capsys, tmp_path):
        out = tmp_path / "plot"
        code = run(["plot", "--preset", "hirzebruch", "--m", "1", "--a", "2", "--grid", "8", "--out", str(out)])
        assert code == EXIT_OK
        outline = list(csv.reader((out / "outline.csv").open()))
        assert len(outline) == 1 + 5
        scalar = list(csv.reader((out / "scalar.csv").open()))
        assert len(scalar) == 1 + 64
        panels = list(csv.reader((out / "panels.csv").open()))
        assert len({r[0] for r in panels[1:]}) == 6
        report = json.loads((out / "report.json").read_text())
        assert "panels.csv" in report["result"]["files"]

    def test_cusp_given_skips_panels(self, tmp_path):
        out = tmp_path / "plot"
        run(["plot", "--preset", "square", "--cusp", "left", "--grid", "8", "--out", str(out)])
        assert (out / "facets.csv").exists() and not (out / "panels.csv").exists()


class TestSweep:
    def test_qk(self, capsys):
        code, doc, _ = call(capsys, "sweep", "--preset", "hirzebruch", "--q", "2,3,4", "--k", "1,2")
        assert code == EXIT_OK
        for row in doc["result"]["rows"]:
            q, k = int(row["q"]), int(row["k"])
            if q > k:
                assert row["adjacent"]["signs"] == [1, 1]
            if q == k:
                assert row["opposite"]["sign"] == 0

    def test_jobs_do_not_change_output(self, capsys):
        argv = ["sweep", "--preset", "hirzebruch", "--m", "1,2", "--a", "2,3", "--cusp", "s-0;fibre"]
        _, _, serial = call(capsys, *argv)
        _, _, parallel = call(capsys, *argv, "--jobs", "4")
        assert serial == parallel
        assert len(json.loads(serial)["result"]["rows"]) == 8

    def test_dk_signs(self, capsys):
        code, doc, _ = call(capsys, "sweep", "--preset", "hirzebruch", "--d", "1,2", "--k", "1",
                            "--convention", "appendix")
        assert code == EXIT_OK
        for row in doc["result"]["rows"]:
            assert row["K_signs"] == [1, 0, -1, 0] and row["K_adjacent_sign"] == 1

    def test_needs_family(self):
        assert run(["sweep", "--preset", "square"]) == EXIT_INPUT


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "torex", "analyze", "--preset", "simplex", "--cusp", "x1,x2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["result"]["classification"]["final"] == "Unstable"
