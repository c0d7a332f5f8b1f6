"""
Incidence-matrix analysis.

Rows follow place declaration order and columns follow transition
declaration order, so the CSV output diffs directly against the reference
tables bundled under `golden/`.
"""

import logging
from importlib import resources
from typing import List

import numpy as np

from .exceptions import UnknownModelError
from .models.incidence import IncidenceMatrices
from .models.net import PetriStructure

logger = logging.getLogger(__name__)


def _matrix(net: PetriStructure, place_to_transition: bool, kind: str) -> np.ndarray:
    rows = {p: i for i, p in enumerate(net.place_ids)}
    cols = {t: j for j, t in enumerate(net.transition_ids)}
    matrix = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for arc in net.arcs:
        if arc.kind != kind:
            continue
        if place_to_transition and arc.source in rows:
            matrix[rows[arc.source], cols[arc.target]] += arc.multiplicity
        elif not place_to_transition and arc.target in rows:
            matrix[rows[arc.target], cols[arc.source]] += arc.multiplicity
    return matrix


def forward_matrix(net: PetriStructure) -> np.ndarray:
    """I+[p][t] = multiplicity of the arc t -> p."""
    return _matrix(net, place_to_transition=False, kind="normal")


def backward_matrix(net: PetriStructure) -> np.ndarray:
    """I-[p][t] = multiplicity of the arc p -> t."""
    return _matrix(net, place_to_transition=True, kind="normal")


def combined_matrix(net: PetriStructure) -> np.ndarray:
    """I = I+ - I-."""
    return forward_matrix(net) - backward_matrix(net)


def inhibition_matrix(net: PetriStructure) -> np.ndarray:
    """H[p][t] = weight of the inhibitor arc p -o t, else 0."""
    return _matrix(net, place_to_transition=True, kind="inhibitor")


def incidence_matrices(net: PetriStructure) -> IncidenceMatrices:
    """Bundle all four matrices with their row and column labels."""
    forward = forward_matrix(net)
    backward = backward_matrix(net)
    return IncidenceMatrices(
        row_labels=net.place_ids,
        col_labels=net.transition_ids,
        forward=forward.tolist(),
        backward=backward.tolist(),
        combined=(forward - backward).tolist(),
        inhibition=inhibition_matrix(net).tolist(),
    )


def golden_matrices(model: str) -> IncidenceMatrices:
    """
    Load the reference matrices bundled for a built-in HLPN model.

    Args:
        model: Model name, e.g. 'ecdsa-keygen'

    Raises:
        UnknownModelError: If no golden table ships for the model
    """
    resource = resources.files("petriproof") / "golden" / f"{model}.csv"
    if not resource.is_file():
        raise UnknownModelError(f"no golden incidence table for {model}")
    return IncidenceMatrices.from_csv(resource.read_text(encoding="utf-8"))


def compare(actual: IncidenceMatrices, expected: IncidenceMatrices) -> List[str]:
    """
    List every difference between two matrix bundles.

    Returns:
        Human-readable mismatch descriptions; empty when identical
    """
    mismatches: List[str] = []
    if actual.row_labels != expected.row_labels:
        mismatches.append(f"places differ: {actual.row_labels} != {expected.row_labels}")
    if actual.col_labels != expected.col_labels:
        mismatches.append(f"transitions differ: {actual.col_labels} != {expected.col_labels}")
    if mismatches:
        return mismatches
    for section, matrix in actual.sections().items():
        other = expected.sections()[section]
        for i, place in enumerate(actual.row_labels):
            for j, transition in enumerate(actual.col_labels):
                if matrix[i][j] != other[i][j]:
                    mismatches.append(f"{section}[{place}][{transition}]: {matrix[i][j]} != {other[i][j]}")
    if mismatches:
        logger.debug("%d incidence mismatches", len(mismatches))
    return mismatches
