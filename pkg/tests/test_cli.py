from __future__ import annotations

import json
import subprocess
import sys

import pytest

from exmo.cli import main

EMERGENCY_RENDERED = ("The manoeuvre was aborted, because an emergency "
                      "vehicle has the right of way")


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def pipeline(tmp_path, capsys):
    """em1..em4 files produced through the actual subcommands."""
    paths = {stage: str(tmp_path / f"{stage}.json")
             for stage in ("em1", "em2", "em3", "em4")}
    steps = [
        ("extract", "--model", "bundle:crossing", "--out", paths["em1"]),
        ("slice", "--em", paths["em1"], "--purpose", "bundle:driving",
         "--out", paths["em2"]),
        ("tailor", "--em", paths["em2"], "--profile", "bundle:end_user",
         "--out", paths["em3"]),
        ("annotate", "--em", paths["em3"], "--annotations",
         "bundle:crossing", "--out", paths["em4"]),
    ]
    for step in steps:
        code, _, _ = run_cli(capsys, *step)
        assert code == 0
    return paths


class TestPipeline:

    def test_extract_to_stdout(self, capsys):
        code, out, err = run_cli(capsys, "extract", "--model",
                                 "bundle:crossing")
        assert code == 0
        doc = json.loads(out)
        assert doc["stage"] == "EM1"
        assert len(doc["roots"]) == 7
        assert err == ""

    def test_stage_progression(self, pipeline):
        for stage, path in zip(("EM1", "EM2", "EM3", "EM4"),
                               pipeline.values()):
            with open(path, encoding="utf-8") as fh:
                assert json.load(fh)["stage"] == stage

    def test_extract_options_change_output(self, capsys):
        _, plain, _ = run_cli(capsys, "extract", "--model",
                              "bundle:crossing")
        _, with_resets, _ = run_cli(capsys, "extract", "--model",
                                    "bundle:crossing",
                                    "--include-clock-resets")
        names = {(r["kind"], r["name"])
                 for r in json.loads(with_resets)["roots"]}
        assert ("reset", "x") in names
        assert len(json.loads(with_resets)["roots"]) == \
            len(json.loads(plain)["roots"]) + 1

    def test_annotate_coverage_sidecar(self, pipeline, tmp_path, capsys):
        coverage_path = str(tmp_path / "coverage.json")
        code, _, err = run_cli(capsys, "annotate", "--em", pipeline["em3"],
                               "--annotations", "bundle:crossing",
                               "--out", str(tmp_path / "em4b.json"),
                               "--coverage", coverage_path)
        assert code == 0
        with open(coverage_path, encoding="utf-8") as fh:
            coverage = json.load(fh)
        assert coverage["annotated"] == 5
        assert coverage["unannotated"]
        assert coverage["warnings"] == []
        assert "coverage:" in err

    def test_stage_mismatch_is_user_error(self, pipeline, capsys):
        code, out, err = run_cli(capsys, "slice", "--em", pipeline["em3"],
                                 "--purpose", "bundle:driving")
        assert code == 1
        assert out == ""
        assert err.startswith("error:")


class TestExplain:

    def test_brief_text(self, pipeline, capsys):
        code, out, _ = run_cli(capsys, "explain",
                               "--em", pipeline["em4"],
                               "--model", "bundle:crossing",
                               "--profile", "bundle:end_user",
                               "--trace", "bundle:emergency",
                               "--query", "abort")
        assert code == 0
        assert out == EMERGENCY_RENDERED + "\n"

    def test_detailed_json(self, pipeline, capsys):
        code, out, _ = run_cli(capsys, "explain",
                               "--em", pipeline["em4"],
                               "--model", "bundle:crossing",
                               "--profile", "bundle:end_user",
                               "--trace", "bundle:emergency",
                               "--query", "abort",
                               "--verbosity", "detailed", "--json")
        assert code == 0
        doc = json.loads(out)
        assert "pc = 100 >= pE + s = 55" in doc["rendered"]
        assert doc["occurrence"] == {"timestamp": 6,
                                     "transition": "t_emergency_yield"}

    def test_unobserved_query_is_user_error(self, pipeline, capsys):
        code, _, err = run_cli(capsys, "explain",
                               "--em", pipeline["em4"],
                               "--model", "bundle:crossing",
                               "--profile", "bundle:end_user",
                               "--trace", "bundle:emergency",
                               "--query", "start")
        assert code == 1
        assert "error:" in err


class TestSimulate:

    def test_emergency_steps(self, capsys):
        code, out, _ = run_cli(capsys, "simulate",
                               "--model", "bundle:crossing",
                               "--trace", "bundle:emergency",
                               "--triggers", "abort",
                               "--horizon", "10")
        assert code == 0
        doc = json.loads(out)
        assert len(doc["steps"]) == 3
        final = doc["steps"][-1]
        assert final["time"] == 6
        assert final["taken"][0]["transition"] == "t_emergency_yield"
        assert doc["explanation_need"]["name"] == "abort"
        assert doc["explanation_need"]["occurrence"]["timestamp"] == 6
        assert isinstance(doc["lookahead"], list)

    def test_without_triggers_no_need(self, capsys):
        code, out, _ = run_cli(capsys, "simulate",
                               "--model", "bundle:crossing",
                               "--trace", "bundle:clear_crossing")
        assert code == 0
        doc = json.loads(out)
        assert doc["explanation_need"] is None
        assert "lookahead" not in doc


class TestErrorHandling:

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, "extract", "--model", "no-such.json")
        assert code == 1
        assert "error:" in err

    def test_unknown_bundle_name(self, capsys):
        code, _, err = run_cli(capsys, "extract", "--model", "bundle:ghost")
        assert code == 1
        assert "ghost" in err

    def test_invalid_model_content(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"name\": \"x\"}", encoding="utf-8")
        code, _, err = run_cli(capsys, "extract", "--model", str(bad))
        assert code == 1
        assert "error:" in err

    def test_unknown_subcommand_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["transmogrify"])
        assert exc.value.code == 1

    def test_missing_required_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["extract"])
        assert exc.value.code == 1


class TestDeterminism:

    def test_extract_byte_identical(self, capsys):
        _, first, _ = run_cli(capsys, "extract", "--model",
                              "bundle:crossing")
        _, second, _ = run_cli(capsys, "extract", "--model",
                               "bundle:crossing")
        assert first == second

    def test_simulate_byte_identical(self, capsys):
        argv = ("simulate", "--model", "bundle:crossing",
                "--trace", "bundle:emergency", "--horizon", "12")
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        assert first == second


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "exmo.cli", "extract",
         "--model", "bundle:crossing", "--out", "-"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["stage"] == "EM1"
