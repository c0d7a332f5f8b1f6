"""Tests for the SMT solver harness."""

import os
import sys

import pytest

sys.path.insert(0, 'src')
from petriproof.exceptions import SmtValidationError, SolverNotFoundError, SolverTimeoutError, UnparseableOutputError
from petriproof.models.smt import VerdictRow
from petriproof.smtgen import emit_property, property_names
from petriproof.solver import SOLVER_ENV, max_parallel, resolve_solver, run_solver, verdicts_to_csv, verify_all
from tests.conftest import find_solver, make_fake_solver, requires_solver

SAT = "(set-logic QF_LIA)\n(declare-fun |x| () Int)\n(assert (> |x| 1))\n(check-sat)\n"
UNSAT = "(set-logic QF_LIA)\n(declare-fun |x| () Int)\n(assert (> |x| 1))\n(assert (< |x| 0))\n(check-sat)\n"


class TestResolve:
    """Locating the solver binary."""

    def test_missing(self):
        """A name that is not on PATH."""
        with pytest.raises(SolverNotFoundError) as exc_info:
            resolve_solver("definitely-not-a-solver-binary")
        assert exc_info.value.solver_path == "definitely-not-a-solver-binary"

    def test_environment(self, tmp_path, monkeypatch):
        """PETRIPROOF_SOLVER is used when no path is given."""
        fake = make_fake_solver(tmp_path, "echo unsat")
        monkeypatch.setenv(SOLVER_ENV, fake)
        assert resolve_solver() == fake

    def test_parallelism(self):
        """At most six solver processes, at least one."""
        assert 1 <= max_parallel() <= 6
        assert max_parallel() == min(6, os.cpu_count() or 1)


@pytest.mark.skipif(sys.platform == "win32", reason="shell-script solver stand-in")
class TestFakeSolver:
    """The harness against scripted solver behaviour."""

    @pytest.mark.asyncio
    async def test_verdict_after_banner(self, tmp_path):
        """Banner lines before the verdict are skipped."""
        fake = make_fake_solver(tmp_path, 'echo "fake solver 1.0"; echo unsat')
        verdict = await run_solver(UNSAT, fake, timeout_s=10)
        assert verdict.result == "unsat"
        assert verdict.elapsed_seconds >= 0

    @pytest.mark.asyncio
    async def test_timeout(self, tmp_path):
        """A solver that hangs is killed."""
        fake = make_fake_solver(tmp_path, "sleep 5; echo sat")
        with pytest.raises(SolverTimeoutError):
            await run_solver(SAT, fake, timeout_s=0.2)

    @pytest.mark.asyncio
    async def test_unparseable(self, tmp_path):
        """Output without a verdict line."""
        fake = make_fake_solver(tmp_path, 'echo "(error oops)"')
        with pytest.raises(UnparseableOutputError):
            await run_solver(SAT, fake, timeout_s=10)

    @pytest.mark.asyncio
    async def test_invalid_script_never_reaches_solver(self, tmp_path):
        """Validation runs first."""
        fake = make_fake_solver(tmp_path, "echo sat")
        with pytest.raises(SmtValidationError):
            await run_solver("(assert (= |x| 1))\n(check-sat)\n", fake)

    @pytest.mark.asyncio
    async def test_script_written_to_work_dir(self, tmp_path):
        """The .smt2 file lands in the work directory under the script name."""
        fake = make_fake_solver(tmp_path, "echo unsat")
        await run_solver(emit_property("key-generation"), fake, timeout_s=10, work_dir=tmp_path / "smt")
        assert (tmp_path / "smt" / "key-generation.smt2").exists()

    @pytest.mark.asyncio
    async def test_verify_all_reports_errors_per_row(self, tmp_path):
        """Failures become rows, never exceptions."""
        fake = make_fake_solver(tmp_path, "echo garbage")
        rows = await verify_all(fake, 10, properties=["key-generation", "calculate-location"], work_dir=tmp_path)
        assert [row.property for row in rows] == ["key-generation", "calculate-location"]
        assert all(row.error and row.error.startswith("UnparseableOutputError") for row in rows)
        assert not any(row.ok for row in rows)


class TestCsv:
    """Verdict tables."""

    def test_columns(self):
        """property,execution_time,verdict,error with empty cells for missing values."""
        rows = [
            VerdictRow(property="key-generation", execution_time=0.01234, verdict="unsat"),
            VerdictRow(property="calculate-location", error="SolverTimeoutError: slow"),
        ]
        assert verdicts_to_csv(rows) == (
            "property,execution_time,verdict,error\n"
            "key-generation,0.0123,unsat,\n"
            "calculate-location,,,SolverTimeoutError: slow\n"
        )


@requires_solver
class TestRealSolver:
    """End-to-end runs against an installed solver."""

    @pytest.mark.asyncio
    async def test_trivial_scripts(self):
        """The solver answers sat and unsat."""
        solver = find_solver()
        assert (await run_solver(SAT, solver)).result == "sat"
        assert (await run_solver(UNSAT, solver)).result == "unsat"

    @pytest.mark.asyncio
    async def test_every_property_holds(self, tmp_path):
        """Bound properties are unsat."""
        rows = await verify_all(find_solver(), 60, work_dir=tmp_path)
        assert [row.property for row in rows] == property_names()
        assert all(row.verdict == "unsat" for row in rows), rows

    @pytest.mark.asyncio
    async def test_unbound_properties_are_satisfiable(self, tmp_path):
        """Without bindings the arrays are free."""
        rows = await verify_all(find_solver(), 60, with_bindings=False, work_dir=tmp_path)
        assert all(row.verdict == "sat" for row in rows), rows
