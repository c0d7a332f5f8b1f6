"""Tests for the command-line entry point."""

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, 'src')
from petriproof.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from petriproof.solver import SOLVER_ENV
from tests.conftest import make_fake_solver
from tests.test_cpn_parser import RELAY

GOLDEN = Path("src/petriproof/golden")


@pytest.fixture
def run(tmp_path, capsys, monkeypatch):
    """Run the CLI against a scratch data directory; returns (code, stdout, stderr)."""
    monkeypatch.delenv(SOLVER_ENV, raising=False)

    def invoke(*argv):
        code = main(["--data-dir", str(tmp_path / "data"), *argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return invoke


class TestUsage:
    """Argument handling and exit codes."""

    def test_no_command(self, run):
        """A command is required."""
        code, _, err = run()
        assert code == EXIT_USAGE
        assert "petriproof: error" in err

    def test_help(self, run):
        """--help exits cleanly."""
        code, out, _ = run("--help")
        assert code == EXIT_OK
        assert "smt-check" in out

    def test_unknown_model(self, run):
        """Unknown ids are usage errors."""
        code, _, err = run("show", "ecdsa-keysmith")
        assert code == EXIT_USAGE
        assert "Invalid model" in err

    def test_bad_flag_value(self, run):
        """argparse type errors are usage errors."""
        assert run("simulate", "ecdsa-keygen", "--firings", "many")[0] == EXIT_USAGE

    def test_invalid_config(self, run):
        """Out-of-range settings fail validation."""
        assert run("simulate", "ecdsa-keygen", "--alpha", "1.5")[0] == EXIT_USAGE


class TestModels:
    """list, show, validate and incidence."""

    def test_list(self, run):
        """Eighteen entries, twenty with composites."""
        code, out, _ = run("list")
        assert code == EXIT_OK
        assert out.splitlines()[0] == "ecdsa-keygen/hlpn"
        assert len(out.splitlines()) == 18
        assert len(run("list", "--composites")[1].splitlines()) == 20

    def test_show(self, run):
        """Sources are printed verbatim; composites are printed from the fused net."""
        code, out, _ = run("show", "ecdsa-keygen/cpn")
        assert code == EXIT_OK
        assert 'net "ecdsa-keygen" kind cpn' in out
        code, out, _ = run("show", "ecdsa-full")
        assert code == EXIT_OK
        assert "siggen.ComputeHash" in out

    def test_validate_file(self, run, tmp_path):
        """A .pnet file on disk."""
        path = tmp_path / "relay.pnet"
        path.write_text(RELAY)
        code, out, _ = run("validate", str(path))
        assert code == EXIT_OK
        assert out == "ok relay (cpn): 4 places, 2 transitions, 4 arcs\n"

    def test_validate_broken_file(self, run, tmp_path):
        """Syntax errors are analysis failures with their position."""
        path = tmp_path / "broken.pnet"
        path.write_text('net "broken" kind cpn\nplace P : \n')
        code, _, err = run("validate", str(path))
        assert code == EXIT_FAILURE
        assert "PnetSyntaxError" in err

    def test_validate_builtin(self, run):
        """A catalog id."""
        code, out, _ = run("validate", "lps-calc-location")
        assert code == EXIT_OK
        assert out.startswith("ok lps-calc-location (hlpn): ")

    @pytest.mark.parametrize("name", ["ecdsa-keygen", "lps-verify-proof"])
    def test_incidence_check(self, run, name):
        """The printed CSV is the golden file and the check passes."""
        code, out, _ = run("incidence", name, "--check")
        assert code == EXIT_OK
        assert out == (GOLDEN / f"{name}.csv").read_text()

    def test_incidence_json(self, run):
        """JSON output carries the labels."""
        code, out, _ = run("incidence", "ecdsa-keygen", "--format", "json")
        assert code == EXIT_OK
        assert json.loads(out)["col_labels"] == ["Start", "GenerateDomainParameters", "GenerateKeys"]


class TestRuns:
    """simulate, explore and cpn-run."""

    def test_simulate(self, run):
        """A JSON report with the requested replications."""
        code, out, _ = run("--seed", "3", "simulate", "lps-calc-location", "--firings", "10", "--replications", "3")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["config"]["seed"] == 3
        assert len(report["trace_lengths"]) == 3

    def test_simulate_cpn_refused(self, run):
        """Only HLPNs are simulated."""
        assert run("simulate", "ecdsa-keygen/cpn")[0] == EXIT_USAGE

    def test_explore(self, run):
        """Key generation explores without deadlocks."""
        code, out, _ = run("explore", "ecdsa-keygen")
        assert code == EXIT_OK
        assert json.loads(out)["deadlocks"] == []

    def test_cpn_run_csv(self, run):
        """One monitor row per place."""
        code, out, _ = run("cpn-run", "ecdsa-keygen", "--steps", "10")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "place,kind,count,sum,average,min,max"
        assert [line.split(",")[0] for line in lines[1:]] == ["Inputs", "DomainParametersStore", "KeysStore"]
        assert all(line.split(",")[2] == "11" for line in lines[1:])

    def test_cpn_run_timed_json(self, run):
        """--timed picks the timed variant."""
        code, out, _ = run("cpn-run", "ecdsa-keygen", "--timed", "--format", "json", "--kind", "time")
        assert code == EXIT_OK
        result = json.loads(out)
        assert result["final_clock"] >= 1
        assert {s["kind"] for s in result["stats"]} == {"time"}

    def test_cpn_run_conflicting_timing(self, run):
        """--timed and --untimed exclude each other."""
        assert run("cpn-run", "ecdsa-keygen", "--timed", "--untimed")[0] == EXIT_USAGE


class TestSmt:
    """smt-emit and smt-check."""

    def test_emit_rule(self, run):
        """A single rule fragment."""
        code, out, _ = run("smt-emit", "R2")
        assert code == EXIT_OK
        assert "|Generate Keys|" in out
        assert out.rstrip().endswith("(check-sat)")

    def test_emit_all_to_directory(self, run, tmp_path):
        """--all --out writes one script per property."""
        code, out, _ = run("smt-emit", "--all", "--out", str(tmp_path / "smt"))
        assert code == EXIT_OK
        assert len(out.splitlines()) == 6
        assert sorted(p.name for p in (tmp_path / "smt").iterdir()) == sorted([
            "calculate-location.smt2", "generate-location-proof.smt2", "key-generation.smt2",
            "signature-generation.smt2", "signature-verification.smt2", "verify-location-proof.smt2",
        ])

    def test_emit_needs_names(self, run):
        """Nothing to emit."""
        assert run("smt-emit")[0] == EXIT_USAGE
        assert run("smt-emit", "key-generation", "--all")[0] == EXIT_USAGE

    def test_emit_unknown(self, run):
        """Unknown property names are usage errors."""
        assert run("smt-emit", "liveness")[0] == EXIT_USAGE

    @pytest.mark.skipif(sys.platform == "win32", reason="shell-script solver stand-in")
    @pytest.mark.parametrize("answer,flags,expected", [
        ("unsat", (), EXIT_OK),
        ("sat", (), EXIT_FAILURE),
        ("sat", ("--no-bindings",), EXIT_OK),
    ])
    def test_check(self, run, tmp_path, answer, flags, expected):
        """The exit code says whether every verdict was the expected one."""
        fake = make_fake_solver(tmp_path, f"echo {answer}")
        code, out, _ = run("smt-check", "--all", "--solver", fake, *flags)
        assert code == expected
        lines = out.splitlines()
        assert lines[0] == "property,execution_time,verdict,error"
        assert len(lines) == 7
        assert all(line.split(",")[2] == answer for line in lines[1:])

    def test_check_missing_solver(self, run):
        """A missing solver shows up as error rows and a failing exit code."""
        code, out, _ = run("smt-check", "key-generation", "--solver", "definitely-not-a-solver-binary")
        assert code == EXIT_FAILURE
        assert "SolverNotFoundError" in out


class TestReport:
    """The reproducible output bundle."""

    def test_bundle_without_solver(self, run, tmp_path):
        """Scripts are written; verdicts only with a solver."""
        out_dir = tmp_path / "bundle"
        code, out, _ = run("report", "ecdsa-keygen", "lps-calc-location", "--out", str(out_dir),
                           "--firings", "5", "--replications", "2", "--steps", "5")
        assert code == EXIT_OK
        assert out.strip() == str(out_dir)
        for name in ("ecdsa-keygen", "lps-calc-location"):
            assert (out_dir / "incidence" / f"{name}.csv").read_text() == (GOLDEN / f"{name}.csv").read_text()
            assert json.loads((out_dir / "simulation" / f"{name}.json").read_text())["model"] == name
            assert (out_dir / "cpn" / f"{name}-untimed.csv").exists()
            assert (out_dir / "cpn" / f"{name}-timed.csv").exists()
        assert (out_dir / "smt" / "key-generation.smt2").exists()
        assert (out_dir / "smt" / "calculate-location.smt2").exists()
        assert not (out_dir / "smt" / "verdicts.csv").exists()

    @pytest.mark.skipif(sys.platform == "win32", reason="shell-script solver stand-in")
    def test_bundle_with_solver(self, run, tmp_path):
        """A configured solver adds the verdict table."""
        fake = make_fake_solver(tmp_path, "echo unsat")
        out_dir = tmp_path / "bundle"
        code, _, _ = run("report", "lps-gen-proof", "--out", str(out_dir), "--firings", "5",
                         "--replications", "2", "--steps", "5", "--solver", fake)
        assert code == EXIT_OK
        verdicts = (out_dir / "smt" / "verdicts.csv").read_text().splitlines()
        assert verdicts[1].startswith("generate-location-proof,")
        assert verdicts[1].endswith(",unsat,")

    def test_needs_models(self, run, tmp_path):
        """No models and no --all."""
        assert run("report", "--out", str(tmp_path / "x"))[0] == EXIT_USAGE

    def test_composites_refused(self, run, tmp_path):
        """Reports cover the six workflows only."""
        assert run("report", "ecdsa-full", "--out", str(tmp_path / "x"))[0] == EXIT_USAGE
