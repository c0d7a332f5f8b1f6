"""Shared test configuration."""

import os
import shutil
import stat
import sys

import pytest
from dotenv import load_dotenv

sys.path.insert(0, 'src')

# A local .env may point PETRIPROOF_SOLVER at a solver binary
load_dotenv()


def find_solver():
    """Solver binary from PETRIPROOF_SOLVER or z3 on PATH, else None."""
    candidate = os.getenv("PETRIPROOF_SOLVER") or "z3"
    return shutil.which(candidate)


requires_solver = pytest.mark.skipif(find_solver() is None, reason="no SMT solver available")


def make_fake_solver(directory, body):
    """An executable shell script standing in for a solver."""
    path = directory / "fake-solver"
    path.write_text(f"#!/bin/sh\n{body}\n")
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return str(path)
