"""Deterministic lattice test model.

A test is a walk over a triangular lattice: the student answers one node
per step, a correct node moves them one column to the right, a wrong one
leaves the column unchanged. Item difficulty level is a function of the
current column only, so harder items are reachable only by answering
enough easier ones correctly. After ``rows`` nodes the final column is
the grade.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass


class TestKind(enum.Enum):
    __test__ = False  # keep pytest from collecting this as a test class

    COMPLETION = "completion"
    MULTIPLE_CHOICE = "multiple_choice"


class LatticeError(ValueError):
    """Invalid configuration or an operation on an impossible state."""


@dataclass(frozen=True)
class LatticeConfig:
    """Geometry and kind of a lattice test.

    ``rows`` is the number of nodes every student answers; each node asks
    ``items_per_node`` items and counts as correct when at least
    ``threshold`` of them were answered correctly. Columns are split into
    ``n_levels`` contiguous difficulty segments. Multiple-choice tests
    additionally carry the number of options per item (``n_choices``).
    """

    n_levels: int
    rows: int
    items_per_node: int
    threshold: int
    kind: TestKind = TestKind.COMPLETION
    n_choices: int | None = None

    def __post_init__(self) -> None:
        for name in ("n_levels", "rows", "items_per_node", "threshold"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise LatticeError(f"{name} must be a positive integer, got {value!r}")
        if self.n_levels > self.rows:
            raise LatticeError(
                f"n_levels ({self.n_levels}) cannot exceed rows ({self.rows})"
            )
        if self.threshold > self.items_per_node:
            raise LatticeError(
                f"threshold ({self.threshold}) cannot exceed items_per_node "
                f"({self.items_per_node})"
            )
        if self.kind is TestKind.MULTIPLE_CHOICE:
            if not isinstance(self.n_choices, int) or self.n_choices < 2:
                raise LatticeError("multiple choice tests need n_choices >= 2")
        elif self.n_choices is not None:
            raise LatticeError("n_choices is only valid for multiple choice tests")

    @property
    def total_items(self) -> int:
        return self.rows * self.items_per_node

    @property
    def level_width(self) -> int:
        """Columns per difficulty segment (last segment may be narrower)."""
        return math.ceil(self.rows / self.n_levels)

    def to_dict(self) -> dict:
        doc = {
            "n_levels": self.n_levels,
            "rows": self.rows,
            "items_per_node": self.items_per_node,
            "threshold": self.threshold,
            "kind": self.kind.value,
        }
        if self.n_choices is not None:
            doc["n_choices"] = self.n_choices
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> LatticeConfig:
        try:
            kind = TestKind(doc.get("kind", "completion"))
        except ValueError:
            raise LatticeError(f"unknown test kind {doc.get('kind')!r}") from None
        return cls(
            n_levels=doc["n_levels"],
            rows=doc["rows"],
            items_per_node=doc["items_per_node"],
            threshold=doc["threshold"],
            kind=kind,
            n_choices=doc.get("n_choices"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> LatticeConfig:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class PathState:
    """Position in the lattice: nodes answered so far and correct ones among them."""

    row: int = 0
    col: int = 0

    def __post_init__(self) -> None:
        if self.row < 0 or self.col < 0 or self.col > self.row:
            raise LatticeError(f"impossible path state (row={self.row}, col={self.col})")


def is_terminal(config: LatticeConfig, state: PathState) -> bool:
    return state.row == config.rows


def level_of_column(config: LatticeConfig, col: int) -> int:
    """Difficulty level (1-based) of the items served at a column.

    Levels increase from left to right in equal-width segments and cap at
    ``n_levels``, so level is constant while the student keeps failing and
    can only rise by answering correctly.
    """
    if not 0 <= col <= config.rows:
        raise LatticeError(f"column {col} out of range 0..{config.rows}")
    return min(config.n_levels, col // config.level_width + 1)


def advance(config: LatticeConfig, state: PathState, node_correct: bool) -> PathState:
    """One lattice transition: down for wrong, down-and-right for correct."""
    if is_terminal(config, state):
        raise LatticeError("cannot advance a finished path")
    return PathState(row=state.row + 1, col=state.col + (1 if node_correct else 0))


def node_outcome(config: LatticeConfig, answers: list[bool]) -> bool:
    """Whether a node counts as correct: at least ``threshold`` of its items were."""
    if len(answers) != config.items_per_node:
        raise LatticeError(
            f"expected {config.items_per_node} answers, got {len(answers)}"
        )
    return sum(answers) >= config.threshold


def formula_score(fraction_correct: float, n_choices: int) -> float:
    """Guessing-corrected score (Na*C - 1)/(Na - 1); negative below chance level."""
    if not 0.0 <= fraction_correct <= 1.0:
        raise LatticeError(f"fraction correct {fraction_correct} outside [0, 1]")
    if n_choices < 2:
        raise LatticeError("n_choices must be at least 2")
    return (n_choices * fraction_correct - 1.0) / (n_choices - 1.0)


def grade(config: LatticeConfig, final_col: int) -> float:
    """Grade in [0, 1] for a terminal column.

    Completion tests grade linearly. Multiple-choice tests apply formula
    scoring to correct for guessing, clamped into [0, 1] so below-chance
    columns all score 0.
    """
    if not 0 <= final_col <= config.rows:
        raise LatticeError(f"column {final_col} out of range 0..{config.rows}")
    fraction = final_col / config.rows
    if config.kind is TestKind.COMPLETION:
        return fraction
    assert config.n_choices is not None
    return min(1.0, max(0.0, formula_score(fraction, config.n_choices)))


def distinct_grade_count(config: LatticeConfig) -> int:
    """Number of attainable final grades: one per terminal column."""
    return config.rows + 1


def walk(config: LatticeConfig, node_results: list[bool]) -> int:
    """Fold a full sequence of node outcomes into the final column."""
    state = PathState()
    for correct in node_results:
        state = advance(config, state, correct)
    if not is_terminal(config, state):
        raise LatticeError(
            f"expected {config.rows} node outcomes, got {len(node_results)}"
        )
    return state.col
