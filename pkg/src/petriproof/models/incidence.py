"""Pydantic model for incidence matrices."""

from typing import Dict, List

from pydantic import BaseModel, Field, model_validator

SECTIONS = ("FORWARD", "BACKWARD", "COMBINED", "INHIBITION")


class IncidenceMatrices(BaseModel):
    """Forward, backward, combined and inhibition matrices over (place x transition)."""
    row_labels: List[str]
    col_labels: List[str]
    forward: List[List[int]] = Field(default_factory=list)
    backward: List[List[int]] = Field(default_factory=list)
    combined: List[List[int]] = Field(default_factory=list)
    inhibition: List[List[int]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_shape(self) -> "IncidenceMatrices":
        rows, cols = len(self.row_labels), len(self.col_labels)
        for section, matrix in self.sections().items():
            if len(matrix) != rows or any(len(row) != cols for row in matrix):
                raise ValueError(f"{section} matrix is not {rows}x{cols}")
        return self

    def sections(self) -> Dict[str, List[List[int]]]:
        """The four matrices keyed by CSV section name."""
        return {
            "FORWARD": self.forward,
            "BACKWARD": self.backward,
            "COMBINED": self.combined,
            "INHIBITION": self.inhibition,
        }

    def to_csv(self) -> str:
        """
        Render the four-section CSV.

        Each section is its name on one line, a header `place,<transitions>`
        and one row per place; sections are separated by a blank line.
        """
        blocks = []
        for section, matrix in self.sections().items():
            lines = [section, ",".join(["place", *self.col_labels])]
            for label, row in zip(self.row_labels, matrix):
                lines.append(",".join([label, *(str(v) for v in row)]))
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "IncidenceMatrices":
        """
        Parse the output of `to_csv`.

        Raises:
            ValueError: If a section is missing or malformed
        """
        parsed: Dict[str, List[List[int]]] = {}
        header: List[str] = []
        rows: List[str] = []
        for block in text.strip().split("\n\n"):
            lines = [line.strip() for line in block.strip().splitlines() if line.strip()]
            if len(lines) < 2 or lines[0] not in SECTIONS:
                raise ValueError(f"malformed incidence section: {lines[:1]}")
            section_header = lines[1].split(",")
            if section_header[0] != "place":
                raise ValueError(f"section {lines[0]} lacks the place header")
            if header and section_header[1:] != header:
                raise ValueError(f"section {lines[0]} has different transition labels")
            header = section_header[1:]
            matrix, labels = [], []
            for line in lines[2:]:
                cells = line.split(",")
                labels.append(cells[0])
                matrix.append([int(c) for c in cells[1:]])
            if rows and labels != rows:
                raise ValueError(f"section {lines[0]} has different place labels")
            rows = labels
            parsed[lines[0].lower()] = matrix
        missing = [s for s in SECTIONS if s.lower() not in parsed]
        if missing:
            raise ValueError(f"incidence CSV lacks sections {missing}")
        return cls(row_labels=rows, col_labels=header, **parsed)
