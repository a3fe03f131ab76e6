import json

import pytest

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


def completion(rows=36, n_levels=3, m=1, k=1):
    return LatticeConfig(n_levels=n_levels, rows=rows, items_per_node=m, threshold=k)


def mcq(rows=36, n_levels=3, m=1, k=1, n_choices=3):
    return LatticeConfig(
        n_levels=n_levels,
        rows=rows,
        items_per_node=m,
        threshold=k,
        kind=TestKind.MULTIPLE_CHOICE,
        n_choices=n_choices,
    )


class TestConfig:
    def test_standard_completion_config(self):
        cfg = completion()
        assert cfg.total_items == 36
        assert cfg.level_width == 12

    def test_three_item_mcq_config(self):
        cfg = mcq(rows=12, m=3, k=3)
        assert cfg.total_items == 36
        assert cfg.level_width == 4

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n_levels=3, rows=2, items_per_node=1, threshold=1),  # levels > rows
            dict(n_levels=1, rows=1, items_per_node=1, threshold=2),  # threshold > items
            dict(n_levels=0, rows=1, items_per_node=1, threshold=1),
            dict(n_levels=1, rows=0, items_per_node=1, threshold=1),
            dict(n_levels=1, rows=1, items_per_node=0, threshold=1),
            dict(n_levels=1, rows=1, items_per_node=1, threshold=0),
        ],
    )
    def test_rejects_bad_geometry(self, kwargs):
        with pytest.raises(LatticeError):
            LatticeConfig(**kwargs)

    def test_rejects_mcq_with_too_few_choices(self):
        with pytest.raises(LatticeError):
            mcq(n_choices=1)

    def test_rejects_choices_on_completion(self):
        with pytest.raises(LatticeError):
            LatticeConfig(n_levels=1, rows=1, items_per_node=1, threshold=1, n_choices=4)

    def test_json_round_trip(self):
        for cfg in (completion(), mcq(rows=12, m=3, k=2)):
            assert LatticeConfig.from_json(cfg.to_json()) == cfg

    def test_json_keys(self):
        doc = json.loads(mcq().to_json())
        assert doc == {
            "n_levels": 3,
            "rows": 36,
            "items_per_node": 1,
            "threshold": 1,
            "kind": "multiple_choice",
            "n_choices": 3,
        }


class TestLevels:
    def test_starts_at_level_one(self):
        assert level_of_column(completion(), 0) == 1

    def test_twelve_correct_reach_level_two(self):
        assert level_of_column(completion(), 12) == 2

    def test_caps_at_top_level(self):
        assert level_of_column(completion(), 36) == 3

    def test_uneven_segments(self):
        # width = ceil(12/3) = 4
        cfg = completion(rows=12)
        assert level_of_column(cfg, 3) == 1
        assert level_of_column(cfg, 4) == 2

    def test_monotone_and_reaches_top(self):
        for cfg in (completion(), completion(rows=11, n_levels=3), completion(rows=7, n_levels=4)):
            levels = [level_of_column(cfg, c) for c in range(cfg.rows + 1)]
            assert levels == sorted(levels)
            assert levels[0] == 1
            assert max(levels) == cfg.n_levels
            first_top = levels.index(cfg.n_levels)
            assert first_top == (cfg.n_levels - 1) * cfg.level_width

    def test_out_of_range(self):
        with pytest.raises(LatticeError):
            level_of_column(completion(), 37)
        with pytest.raises(LatticeError):
            level_of_column(completion(), -1)


class TestAdvance:
    def test_correct_moves_right(self):
        assert advance(completion(), PathState(0, 0), True) == PathState(1, 1)

    def test_wrong_keeps_column(self):
        assert advance(completion(), PathState(5, 2), False) == PathState(6, 2)

    def test_terminal_rejects_advance(self):
        cfg = completion(rows=2, n_levels=1)
        with pytest.raises(LatticeError):
            advance(cfg, PathState(2, 1), True)

    def test_impossible_state_rejected(self):
        with pytest.raises(LatticeError):
            PathState(1, 2)

    def test_path_invariant(self):
        # after n transitions: row = n, col = number of correct outcomes
        cfg = completion(rows=12)
        outcomes = [True, False, True, True, False, False, True, False, True, True, True, False]
        state = PathState()
        for i, ok in enumerate(outcomes):
            state = advance(cfg, state, ok)
            assert state.row == i + 1
            assert state.col == sum(outcomes[: i + 1])
            assert state.col <= state.row
        assert is_terminal(cfg, state)
        assert walk(cfg, outcomes) == state.col


class TestNodeOutcome:
    def test_single_item(self):
        assert node_outcome(completion(), [True]) is True
        assert node_outcome(completion(), [False]) is False

    def test_two_of_three(self):
        cfg = completion(rows=12, m=3, k=2)
        assert node_outcome(cfg, [True, False, True]) is True

    def test_three_of_three(self):
        cfg = completion(rows=12, m=3, k=3)
        assert node_outcome(cfg, [True, True, False]) is False

    def test_wrong_length(self):
        with pytest.raises(LatticeError):
            node_outcome(completion(rows=12, m=3, k=2), [True])


class TestScoring:
    def test_full_marks(self):
        assert formula_score(1.0, 3) == 1.0

    def test_chance_level_is_zero(self):
        assert formula_score(1 / 3, 3) == 0.0

    def test_direct_substitution(self):
        assert formula_score(0.7, 4) == pytest.approx(0.6)

    def test_below_chance_is_negative(self):
        assert formula_score(0.2, 3) == pytest.approx(-0.2)

    def test_anchors_exact_for_small_choice_counts(self):
        for n in range(2, 11):
            assert formula_score(1 / n, n) == 0.0
            assert formula_score(1.0, n) == 1.0

    def test_rejects_out_of_range(self):
        with pytest.raises(LatticeError):
            formula_score(1.2, 3)
        with pytest.raises(LatticeError):
            formula_score(0.5, 1)

    def test_completion_grade_is_linear(self):
        assert grade(completion(), 18) == 0.5

    def test_mcq_grade_clamps_at_chance(self):
        cfg = mcq()
        assert grade(cfg, 36) == 1.0
        assert grade(cfg, 12) == 0.0
        assert grade(cfg, 6) == 0.0  # below chance clamps to 0

    def test_grade_monotone(self):
        for cfg in (completion(), mcq(), mcq(rows=12, m=3, k=3)):
            grades = [grade(cfg, c) for c in range(cfg.rows + 1)]
            assert grades == sorted(grades)

    def test_grade_out_of_range(self):
        with pytest.raises(LatticeError):
            grade(completion(), 37)


class TestGradeCount:
    def test_single_item_nodes(self):
        assert distinct_grade_count(completion()) == 37

    def test_three_item_nodes_reduce_by_factor_three(self):
        assert distinct_grade_count(completion(rows=12, m=3, k=2)) == 13

    def test_minimal(self):
        assert distinct_grade_count(completion(rows=1, n_levels=1)) == 2
