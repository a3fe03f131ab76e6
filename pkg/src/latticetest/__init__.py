"""Adaptive lattice testing toolkit.

The lattice model (`model`), archetype simulation and exact oracle
(`simulate`), parameterized items (`expr`, `items`), correlation
statistics (`stats`), and the live session service (`session`, `server`,
`cli`).
"""

from latticetest.model import (
    LatticeConfig,
    LatticeError,
    PathState,
    TestKind,
    advance,
    distinct_grade_count,
    formula_score,
    grade,
    is_terminal,
    level_of_column,
    node_outcome,
    walk,
)
from latticetest.simulate import (
    GradeDistribution,
    StudentProfile,
    exact_distribution,
    node_success_prob,
    preset_profile,
    preset_profiles,
    simulate_cohort,
    simulate_student,
    summarize,
    tv_distance,
)
from latticetest.expr import eval_expr, midpoint_sum, parse_expr
from latticetest.items import (
    ItemInstance,
    ItemTemplate,
    Tolerance,
    check_answer,
    instantiate,
    parse_template,
)
from latticetest.stats import (
    CorrelationReport,
    correlation_report,
    p_two_tailed,
    pearson,
    spearman,
    t_statistic,
)
from latticetest.session import ItemBank, SessionStore

__all__ = [
    "LatticeConfig",
    "LatticeError",
    "PathState",
    "TestKind",
    "advance",
    "distinct_grade_count",
    "formula_score",
    "grade",
    "is_terminal",
    "level_of_column",
    "node_outcome",
    "walk",
    "GradeDistribution",
    "StudentProfile",
    "exact_distribution",
    "node_success_prob",
    "preset_profile",
    "preset_profiles",
    "simulate_cohort",
    "simulate_student",
    "summarize",
    "tv_distance",
    "eval_expr",
    "midpoint_sum",
    "parse_expr",
    "ItemInstance",
    "ItemTemplate",
    "Tolerance",
    "check_answer",
    "instantiate",
    "parse_template",
    "CorrelationReport",
    "correlation_report",
    "p_two_tailed",
    "pearson",
    "spearman",
    "t_statistic",
    "ItemBank",
    "SessionStore",
]
