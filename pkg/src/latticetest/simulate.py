"""Archetype student models, Monte Carlo cohorts, and an exact oracle.

Students are modeled by one correct-answer probability per difficulty
level. A cohort run walks many such students through the lattice; the
exact dynamic program computes the same final-column distribution in
closed form, which makes the Monte Carlo testable without sampling noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from latticetest.model import LatticeConfig, LatticeError, TestKind, grade, level_of_column

MCQ_CHANCE = 1.0 / 3.0

#: Correct-answer probability per level for the four archetypes, per test kind.
_PRESETS: dict[TestKind, list[tuple[str, tuple[float, float, float]]]] = {
    TestKind.COMPLETION: [
        ("good", (0.9, 0.8, 0.7)),
        ("bad", (0.2, 0.2, 0.2)),
        ("direct", (0.9, 0.5, 0.1)),
        ("inverse", (0.1, 0.5, 0.9)),
    ],
    TestKind.MULTIPLE_CHOICE: [
        ("good", (0.95, 0.95, 0.95)),
        ("bad", (MCQ_CHANCE, MCQ_CHANCE, MCQ_CHANCE)),
        ("direct", (0.95, 0.70, 0.45)),
        ("inverse", (0.45, 0.70, 0.95)),
    ],
}


@dataclass(frozen=True)
class StudentProfile:
    """Per-level probabilities of answering a single item correctly."""

    name: str
    p_correct: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.p_correct:
            raise LatticeError("profile needs at least one level probability")
        if any(not 0.0 <= p <= 1.0 for p in self.p_correct):
            raise LatticeError(f"profile probabilities must lie in [0, 1]: {self.p_correct}")


def preset_profiles(kind: TestKind) -> list[StudentProfile]:
    """The four archetypes (good, bad, direct, inverse) for a test kind.

    Direct and inverse share the same probabilities in opposite level
    order, so only a level-aware test can tell them apart.
    """
    return [StudentProfile(name, probs) for name, probs in _PRESETS[kind]]


def preset_profile(kind: TestKind, name: str) -> StudentProfile:
    for profile in preset_profiles(kind):
        if profile.name == name:
            return profile
    known = ", ".join(p.name for p in preset_profiles(kind))
    raise LatticeError(f"unknown preset profile {name!r} (known: {known})")


def node_success_prob(p: float, items_per_node: int, threshold: int) -> float:
    """P(at least ``threshold`` of ``items_per_node`` independent items succeed)."""
    if not 0.0 <= p <= 1.0:
        raise LatticeError(f"probability {p} outside [0, 1]")
    if not 1 <= threshold <= items_per_node:
        raise LatticeError("need 1 <= threshold <= items_per_node")
    return sum(
        math.comb(items_per_node, i) * p**i * (1.0 - p) ** (items_per_node - i)
        for i in range(threshold, items_per_node + 1)
    )


@dataclass(frozen=True)
class GradeDistribution:
    """Probability mass over final columns 0..rows.

    ``sample_count`` is 0 for exact distributions and the cohort size for
    empirical ones.
    """

    mass: tuple[float, ...]
    sample_count: int = 0

    def __post_init__(self) -> None:
        if self.sample_count < 0:
            raise LatticeError("sample_count cannot be negative")
        if any(m < 0 for m in self.mass):
            raise LatticeError("probability mass cannot be negative")
        total = sum(self.mass)
        if abs(total - 1.0) > 1e-9:
            raise LatticeError(f"mass sums to {total}, not 1")

    @property
    def rows(self) -> int:
        return len(self.mass) - 1

    def counts(self) -> tuple[int, ...]:
        return tuple(round(m * self.sample_count) for m in self.mass)


def tv_distance(a: GradeDistribution, b: GradeDistribution) -> float:
    """Total variation distance: half the L1 distance between mass vectors."""
    if len(a.mass) != len(b.mass):
        raise LatticeError("distributions cover different column ranges")
    return 0.5 * sum(abs(x - y) for x, y in zip(a.mass, b.mass))


def _check_profile(config: LatticeConfig, profile: StudentProfile) -> np.ndarray:
    if len(profile.p_correct) != config.n_levels:
        raise LatticeError(
            f"profile {profile.name!r} has {len(profile.p_correct)} level "
            f"probabilities but the test has {config.n_levels} levels"
        )
    return np.asarray(profile.p_correct, dtype=np.float64)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------
#
# Reproducibility scheme: one counter-based Philox stream per cohort seed;
# student i owns the i-th block of rows*items_per_node uniform draws. A
# student's numbers therefore depend only on (seed, index, geometry), never
# on evaluation order, so cohorts can be sliced up or vectorized freely and
# still reproduce bit-identically.

def student_uniforms(seed: int, student_index: int, config: LatticeConfig) -> np.ndarray:
    """Uniform draws owned by one cohort member, shape (rows, items_per_node).

    Recomputes the stream prefix, so it is meant for spot checks rather
    than bulk use; cohorts draw all blocks in one pass.
    """
    if student_index < 0:
        raise LatticeError("student_index cannot be negative")
    block = config.rows * config.items_per_node
    rng = np.random.Generator(np.random.Philox(seed))
    flat = rng.random((student_index + 1) * block)
    return flat[student_index * block :].reshape(config.rows, config.items_per_node)


def _walk_columns(config: LatticeConfig, p_levels: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Walk a batch of students; uniforms has shape (n, rows, items_per_node)."""
    n = uniforms.shape[0]
    width = config.level_width
    top = config.n_levels - 1
    col = np.zeros(n, dtype=np.int64)
    for r in range(config.rows):
        p = p_levels[np.minimum(col // width, top)]
        hits = (uniforms[:, r, :] < p[:, None]).sum(axis=1)
        col += hits >= config.threshold
    return col


def simulate_student(
    config: LatticeConfig, profile: StudentProfile, rng: np.random.Generator
) -> int:
    """Walk one student through the lattice and return the final column.

    At every node the item level is the level of the current column; the
    node's items succeed independently with that level's probability.
    """
    p_levels = _check_profile(config, profile)
    uniforms = rng.random((config.rows, config.items_per_node))
    return int(_walk_columns(config, p_levels, uniforms[np.newaxis])[0])


def simulate_cohort(
    config: LatticeConfig, profile: StudentProfile, n_students: int, seed: int
) -> GradeDistribution:
    """Empirical final-column distribution of ``n_students`` independent walks."""
    if n_students < 1:
        raise LatticeError("need at least one student")
    p_levels = _check_profile(config, profile)
    block = config.rows * config.items_per_node
    rng = np.random.Generator(np.random.Philox(seed))
    uniforms = rng.random(n_students * block).reshape(
        n_students, config.rows, config.items_per_node
    )
    cols = _walk_columns(config, p_levels, uniforms)
    counts = np.bincount(cols, minlength=config.rows + 1)
    return GradeDistribution(
        mass=tuple((counts / n_students).tolist()), sample_count=n_students
    )


# ---------------------------------------------------------------------------
# Exact oracle
# ---------------------------------------------------------------------------

def exact_distribution(config: LatticeConfig, profile: StudentProfile) -> GradeDistribution:
    """Exact final-column distribution by dynamic programming over (row, col).

    Mass flows right with the column's node success probability and stays
    put otherwise; after ``rows`` steps the vector is the terminal
    distribution. No sampling noise, so it serves as the oracle for the
    Monte Carlo runs.
    """
    _check_profile(config, profile)
    q = np.array(
        [
            node_success_prob(
                profile.p_correct[level_of_column(config, c) - 1],
                config.items_per_node,
                config.threshold,
            )
            for c in range(config.rows + 1)
        ]
    )
    mass = np.zeros(config.rows + 1)
    mass[0] = 1.0
    for _ in range(config.rows):
        stay = mass * (1.0 - q)
        stay[1:] += (mass * q)[:-1]
        mass = stay
    return GradeDistribution(mass=tuple(mass.tolist()), sample_count=0)


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HistogramRow:
    column: int
    grade: float
    mass: float
    count: int


@dataclass(frozen=True)
class DistributionSummary:
    mean_grade: float
    variance: float
    quantiles: dict[float, float]
    rows: tuple[HistogramRow, ...]


QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)


def summarize(distribution: GradeDistribution, config: LatticeConfig) -> DistributionSummary:
    """Mean/variance/quantiles on the grade axis plus per-column histogram rows."""
    if distribution.rows != config.rows:
        raise LatticeError("distribution does not match the test geometry")
    grades = [grade(config, c) for c in range(config.rows + 1)]
    mean = sum(m * g for m, g in zip(distribution.mass, grades))
    second = sum(m * g * g for m, g in zip(distribution.mass, grades))
    variance = max(0.0, second - mean * mean)

    quantiles: dict[float, float] = {}
    for q in QUANTILE_LEVELS:
        cdf = 0.0
        for m, g in zip(distribution.mass, grades):
            cdf += m
            if cdf >= q - 1e-12:
                quantiles[q] = g
                break

    counts = distribution.counts()
    rows = tuple(
        HistogramRow(column=c, grade=grades[c], mass=distribution.mass[c], count=counts[c])
        for c in range(config.rows + 1)
    )
    return DistributionSummary(mean_grade=mean, variance=variance, quantiles=quantiles, rows=rows)


def mean_grade(distribution: GradeDistribution, config: LatticeConfig) -> float:
    return summarize(distribution, config).mean_grade
