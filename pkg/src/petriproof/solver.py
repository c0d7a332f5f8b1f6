"""
External SMT solver harness.

Scripts are validated, written to a `.smt2` file and handed to the solver as
a subprocess; the first verdict line of its output is the answer.
"""

import asyncio
import csv
import io
import logging
import os
import shutil
import tempfile
import time
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from .exceptions import SolverError, SolverNotFoundError, SolverTimeoutError
from .models.smt import SmtScript, SolverVerdict, VerdictRow
from .smtgen import emit_property, parse_verdict, property_names, render_script, validate_script

logger = logging.getLogger(__name__)

SOLVER_ENV = "PETRIPROOF_SOLVER"
DEFAULT_SOLVER = "z3"


def resolve_solver(solver_path: Optional[str] = None) -> str:
    """
    Locate the solver binary.

    Tries the explicit path, then the PETRIPROOF_SOLVER environment variable,
    then `z3` on PATH.

    Raises:
        SolverNotFoundError: If none of them names an executable
    """
    candidate = solver_path or os.getenv(SOLVER_ENV) or DEFAULT_SOLVER
    found = shutil.which(candidate)
    if found is None:
        raise SolverNotFoundError(f"solver not found: {candidate}", solver_path=candidate)
    return found


def _script_text(script: Union[SmtScript, str]) -> str:
    return render_script(script) if isinstance(script, SmtScript) else script


async def run_solver(
    script: Union[SmtScript, str],
    solver_path: Optional[str] = None,
    timeout_s: float = 30.0,
    work_dir: Optional[Path] = None,
) -> SolverVerdict:
    """
    Run one script through the solver.

    Args:
        script: SmtScript or SMT-LIB2 text
        solver_path: Solver binary; resolved with `resolve_solver` when omitted
        timeout_s: Wall-clock limit in seconds
        work_dir: Directory for the `.smt2` file; a temporary one when omitted

    Returns:
        SolverVerdict with the verdict and elapsed wall time

    Raises:
        SmtValidationError: The script is malformed
        SolverNotFoundError: The solver cannot be started
        SolverTimeoutError: The solver ran past `timeout_s` and was killed
        UnparseableOutputError: The output holds no verdict
    """
    text = _script_text(script)
    validate_script(text)
    solver = resolve_solver(solver_path)

    with tempfile.TemporaryDirectory() as scratch:
        directory = Path(work_dir) if work_dir is not None else Path(scratch)
        directory.mkdir(parents=True, exist_ok=True)
        name = script.name if isinstance(script, SmtScript) and script.name else "script"
        path = directory / f"{name}.smt2"
        path.write_text(text, encoding="utf-8")

        logger.debug("Running %s %s", solver, path)
        started = time.perf_counter()
        try:
            process = await asyncio.create_subprocess_exec(
                solver, str(path), stdout=asyncio.subprocess.PIPE, stderr=asyncio.subprocess.PIPE,
            )
        except OSError as e:
            raise SolverNotFoundError(f"cannot start solver {solver}: {e}", solver_path=solver) from e
        try:
            stdout, stderr = await asyncio.wait_for(process.communicate(), timeout=timeout_s)
        except asyncio.TimeoutError:
            process.kill()
            await process.wait()
            logger.warning("Solver %s timed out after %.1fs on %s", solver, timeout_s, path.name)
            raise SolverTimeoutError(f"{path.name}: no answer within {timeout_s}s", solver_path=solver)
        elapsed = time.perf_counter() - started

    output = stdout.decode("utf-8", errors="replace")
    if stderr:
        logger.debug("Solver stderr: %s", stderr.decode("utf-8", errors="replace").strip())
    try:
        verdict = parse_verdict(output)
    except SolverError as e:
        e.solver_path = solver
        raise
    return SolverVerdict(result=verdict, elapsed_seconds=elapsed, raw_output=output)


def run_solver_sync(script: Union[SmtScript, str], solver_path: Optional[str] = None,
                    timeout_s: float = 30.0, work_dir: Optional[Path] = None) -> SolverVerdict:
    """Blocking wrapper around `run_solver`."""
    return asyncio.run(run_solver(script, solver_path, timeout_s, work_dir))


def max_parallel() -> int:
    """Solver processes allowed at once: min(6, cores)."""
    return min(6, os.cpu_count() or 1)


async def verify_all(
    solver_path: Optional[str] = None,
    timeout_s: float = 30.0,
    properties: Optional[Sequence[str]] = None,
    with_bindings: bool = True,
    work_dir: Optional[Path] = None,
) -> List[VerdictRow]:
    """
    Check every property, at most min(6, cores) solver processes at a time.

    Failures are reported per row in `error`, never raised.

    Returns:
        One VerdictRow per property, in property order
    """
    names = list(properties) if properties is not None else property_names()
    semaphore = asyncio.Semaphore(max_parallel())

    async def check(name: str) -> VerdictRow:
        async with semaphore:
            try:
                script = emit_property(name, with_bindings=with_bindings)
                verdict = await run_solver(script, solver_path, timeout_s, work_dir)
            except SolverError as e:
                return VerdictRow(property=name, error=f"{type(e).__name__}: {e}")
            return VerdictRow(property=script.name, execution_time=verdict.elapsed_seconds, verdict=verdict.result)

    rows = await asyncio.gather(*(check(name) for name in names))
    logger.info("Verified %d properties: %s", len(rows), [row.verdict or "error" for row in rows])
    return list(rows)


def verdicts_to_csv(rows: Iterable[VerdictRow]) -> str:
    """CSV with columns property,execution_time,verdict,error."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["property", "execution_time", "verdict", "error"])
    for row in rows:
        elapsed = "" if row.execution_time is None else f"{row.execution_time:.4f}"
        writer.writerow([row.property, elapsed, row.verdict or "", row.error or ""])
    return buffer.getvalue()
