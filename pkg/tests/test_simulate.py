import itertools
import math
import random

import numpy as np
import pytest

from latticetest.model import LatticeConfig, LatticeError, TestKind, level_of_column
from latticetest.simulate import (
    GradeDistribution,
    StudentProfile,
    exact_distribution,
    mean_grade,
    node_success_prob,
    preset_profile,
    preset_profiles,
    simulate_cohort,
    simulate_student,
    student_uniforms,
    summarize,
    tv_distance,
)

FIG2A = LatticeConfig(n_levels=3, rows=36, items_per_node=1, threshold=1)


def enumeration_oracle(config, profile):
    """Weigh every one of the 2^rows node-outcome paths individually."""
    q = [
        node_success_prob(
            profile.p_correct[level_of_column(config, c) - 1],
            config.items_per_node,
            config.threshold,
        )
        for c in range(config.rows + 1)
    ]
    mass = [0.0] * (config.rows + 1)
    for bits in itertools.product((False, True), repeat=config.rows):
        col, prob = 0, 1.0
        for correct in bits:
            prob *= q[col] if correct else 1.0 - q[col]
            col += correct
        mass[col] += prob
    return mass


def binomial_tail_oracle(p, m, k):
    """P(Binomial(m, p) >= k) by enumerating all 2^m item outcomes."""
    total = 0.0
    for bits in itertools.product((False, True), repeat=m):
        if sum(bits) >= k:
            total += math.prod(p if b else 1 - p for b in bits)
    return total


class TestPresets:
    def test_completion_table(self):
        profiles = {p.name: p.p_correct for p in preset_profiles(TestKind.COMPLETION)}
        assert profiles == {
            "good": (0.9, 0.8, 0.7),
            "bad": (0.2, 0.2, 0.2),
            "direct": (0.9, 0.5, 0.1),
            "inverse": (0.1, 0.5, 0.9),
        }

    def test_multiple_choice_table(self):
        profiles = {p.name: p.p_correct for p in preset_profiles(TestKind.MULTIPLE_CHOICE)}
        assert profiles == {
            "good": (0.95, 0.95, 0.95),
            "bad": (1 / 3, 1 / 3, 1 / 3),
            "direct": (0.95, 0.70, 0.45),
            "inverse": (0.45, 0.70, 0.95),
        }

    def test_direct_inverse_are_reversed(self):
        for kind in TestKind:
            direct = preset_profile(kind, "direct")
            inverse = preset_profile(kind, "inverse")
            assert direct.p_correct == inverse.p_correct[::-1]

    def test_unknown_preset(self):
        with pytest.raises(LatticeError):
            preset_profile(TestKind.COMPLETION, "mediocre")

    def test_profile_validation(self):
        with pytest.raises(LatticeError):
            StudentProfile("p", (0.5, 1.5))
        with pytest.raises(LatticeError):
            StudentProfile("p", ())


class TestNodeSuccessProb:
    def test_single_item_is_identity(self):
        for p in (0.0, 0.3, 1.0):
            assert node_success_prob(p, 1, 1) == p

    def test_two_of_three(self):
        # 3 * 0.64 * 0.2 + 0.512, confirmed by enumerating all 8 outcomes
        assert node_success_prob(0.8, 3, 2) == pytest.approx(0.896, abs=1e-12)
        assert node_success_prob(0.8, 3, 2) == pytest.approx(
            binomial_tail_oracle(0.8, 3, 2), abs=1e-12
        )

    def test_three_of_three(self):
        assert node_success_prob(0.95, 3, 3) == pytest.approx(0.857375, abs=1e-12)
        assert node_success_prob(0.95, 3, 3) == pytest.approx(
            binomial_tail_oracle(0.95, 3, 3), abs=1e-12
        )

    def test_matches_enumeration_on_grid(self):
        for p in (0.1, 1 / 3, 0.5, 0.9):
            for m in (1, 2, 3, 4):
                for k in range(1, m + 1):
                    assert node_success_prob(p, m, k) == pytest.approx(
                        binomial_tail_oracle(p, m, k), abs=1e-12
                    )

    def test_bad_arguments(self):
        with pytest.raises(LatticeError):
            node_success_prob(1.5, 3, 2)
        with pytest.raises(LatticeError):
            node_success_prob(0.5, 3, 4)


class TestSimulateStudent:
    def test_perfect_student_ends_rightmost(self):
        profile = StudentProfile("perfect", (1.0, 1.0, 1.0))
        assert simulate_student(FIG2A, profile, np.random.default_rng(0)) == 36

    def test_hopeless_student_stays_left(self):
        profile = StudentProfile("hopeless", (0.0, 0.0, 0.0))
        assert simulate_student(FIG2A, profile, np.random.default_rng(0)) == 0

    def test_same_seed_same_column(self):
        profile = preset_profile(TestKind.COMPLETION, "direct")
        cols = {simulate_student(FIG2A, profile, np.random.default_rng(99)) for _ in range(5)}
        assert len(cols) == 1

    def test_profile_length_mismatch(self):
        with pytest.raises(LatticeError):
            simulate_student(FIG2A, StudentProfile("short", (0.5,)), np.random.default_rng(0))


class TestSimulateCohort:
    def test_all_ones_profile_masses_at_rows(self):
        dist = simulate_cohort(FIG2A, StudentProfile("perfect", (1.0, 1.0, 1.0)), 1000, seed=1)
        assert dist.mass[36] == 1.0
        assert dist.sample_count == 1000

    def test_deterministic_for_fixed_seed(self):
        profile = preset_profile(TestKind.COMPLETION, "good")
        a = simulate_cohort(FIG2A, profile, 5000, seed=7)
        b = simulate_cohort(FIG2A, profile, 5000, seed=7)
        assert a == b

    def test_substreams_independent_of_cohort_size(self):
        # student i's numbers depend on (seed, i) only: the first k students
        # of a bigger cohort reproduce the smaller cohort exactly
        profile = preset_profile(TestKind.COMPLETION, "direct")
        small = simulate_cohort(FIG2A, profile, 200, seed=5)
        big = simulate_cohort(FIG2A, profile, 400, seed=5)
        # recompute the small cohort's counts from the big run's first 200 blocks
        from latticetest.simulate import _walk_columns

        uniforms = np.stack([student_uniforms(5, i, FIG2A) for i in range(200)])
        cols = _walk_columns(FIG2A, np.array(profile.p_correct), uniforms)
        counts = np.bincount(cols, minlength=37)
        assert tuple((counts / 200).tolist()) == small.mass
        assert big.sample_count == 400

    def test_close_to_exact_at_large_n(self):
        profile = preset_profile(TestKind.COMPLETION, "good")
        exact = exact_distribution(FIG2A, profile)
        empirical = simulate_cohort(FIG2A, profile, 100_000, seed=11)
        assert tv_distance(empirical, exact) < 0.02

    def test_seed_averaged_convergence(self):
        profile = preset_profile(TestKind.COMPLETION, "direct")
        exact = exact_distribution(FIG2A, profile)
        distances = [
            tv_distance(simulate_cohort(FIG2A, profile, 100_000, seed=s), exact)
            for s in (1, 2, 3)
        ]
        assert sum(distances) / len(distances) < 0.02

    def test_needs_students(self):
        with pytest.raises(LatticeError):
            simulate_cohort(FIG2A, preset_profile(TestKind.COMPLETION, "bad"), 0, seed=1)


class TestExactDistribution:
    def test_two_row_hand_enumeration(self):
        cfg = LatticeConfig(n_levels=2, rows=2, items_per_node=1, threshold=1)
        dist = exact_distribution(cfg, StudentProfile("hand", (0.9, 0.5)))
        assert dist.mass[0] == pytest.approx(0.01, abs=1e-15)
        assert dist.mass[1] == pytest.approx(0.54, abs=1e-15)
        assert dist.mass[2] == pytest.approx(0.45, abs=1e-15)
        assert dist.sample_count == 0

    def test_constant_profile_is_binomial(self):
        for p in (0.2, 1 / 3, 0.7):
            dist = exact_distribution(FIG2A, StudentProfile("flat", (p, p, p)))
            for c in range(37):
                expected = math.comb(36, c) * p**c * (1 - p) ** (36 - c)
                assert dist.mass[c] == pytest.approx(expected, abs=1e-12)

    def test_perfect_profile(self):
        dist = exact_distribution(FIG2A, StudentProfile("perfect", (1.0, 1.0, 1.0)))
        assert dist.mass[36] == 1.0

    def test_mass_sums_to_one(self):
        for profile in preset_profiles(TestKind.COMPLETION):
            assert sum(exact_distribution(FIG2A, profile).mass) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize(
        "cfg",
        [
            LatticeConfig(n_levels=3, rows=9, items_per_node=1, threshold=1),
            LatticeConfig(n_levels=2, rows=7, items_per_node=3, threshold=2),
            LatticeConfig(
                n_levels=3, rows=10, items_per_node=3, threshold=3,
                kind=TestKind.MULTIPLE_CHOICE, n_choices=3,
            ),
        ],
    )
    def test_matches_path_enumeration(self, cfg):
        rng = random.Random(2024)
        for _ in range(3):
            profile = StudentProfile(
                "random", tuple(rng.uniform(0.05, 0.95) for _ in range(cfg.n_levels))
            )
            dist = exact_distribution(cfg, profile)
            oracle = enumeration_oracle(cfg, profile)
            assert max(abs(a - b) for a, b in zip(dist.mass, oracle)) < 1e-12

    def test_single_probability_bump_never_hurts(self):
        rng = random.Random(9)
        cfg = LatticeConfig(n_levels=3, rows=12, items_per_node=1, threshold=1)
        for _ in range(20):
            probs = [rng.uniform(0.05, 0.9) for _ in range(3)]
            base = mean_grade(exact_distribution(cfg, StudentProfile("p", tuple(probs))), cfg)
            lvl = rng.randrange(3)
            bumped = list(probs)
            bumped[lvl] = min(1.0, bumped[lvl] + 0.05)
            improved = mean_grade(
                exact_distribution(cfg, StudentProfile("p", tuple(bumped))), cfg
            )
            assert improved >= base - 1e-12

    def test_direct_beats_inverse(self):
        direct = mean_grade(
            exact_distribution(FIG2A, preset_profile(TestKind.COMPLETION, "direct")), FIG2A
        )
        inverse = mean_grade(
            exact_distribution(FIG2A, preset_profile(TestKind.COMPLETION, "inverse")), FIG2A
        )
        assert direct > inverse


class TestDistributionType:
    def test_rejects_negative_mass(self):
        with pytest.raises(LatticeError):
            GradeDistribution(mass=(-0.1, 1.1))

    def test_rejects_unnormalized(self):
        with pytest.raises(LatticeError):
            GradeDistribution(mass=(0.4, 0.4))

    def test_tv_distance(self):
        a = GradeDistribution(mass=(1.0, 0.0))
        b = GradeDistribution(mass=(0.0, 1.0))
        assert tv_distance(a, b) == 1.0
        assert tv_distance(a, a) == 0.0
        with pytest.raises(LatticeError):
            tv_distance(a, GradeDistribution(mass=(0.5, 0.25, 0.25)))


class TestSummarize:
    def test_point_mass_at_top(self):
        dist = exact_distribution(FIG2A, StudentProfile("perfect", (1.0, 1.0, 1.0)))
        summary = summarize(dist, FIG2A)
        assert summary.mean_grade == 1.0
        assert summary.variance == 0.0
        assert summary.quantiles[0.5] == 1.0

    def test_binomial_mean_by_linearity(self):
        dist = exact_distribution(FIG2A, preset_profile(TestKind.COMPLETION, "bad"))
        summary = summarize(dist, FIG2A)
        assert summary.mean_grade == pytest.approx(0.2, abs=1e-12)

    def test_hand_example_mean(self):
        cfg = LatticeConfig(n_levels=2, rows=2, items_per_node=1, threshold=1)
        dist = exact_distribution(cfg, StudentProfile("hand", (0.9, 0.5)))
        assert summarize(dist, cfg).mean_grade == pytest.approx(0.72, abs=1e-12)

    def test_histogram_rows_carry_counts(self):
        dist = simulate_cohort(FIG2A, preset_profile(TestKind.COMPLETION, "good"), 1000, seed=3)
        rows = summarize(dist, FIG2A).rows
        assert len(rows) == 37
        assert sum(r.count for r in rows) == 1000
        assert all(r.grade == r.column / 36 for r in rows)

    def test_geometry_mismatch(self):
        cfg = LatticeConfig(n_levels=2, rows=2, items_per_node=1, threshold=1)
        dist = exact_distribution(cfg, StudentProfile("hand", (0.9, 0.5)))
        with pytest.raises(LatticeError):
            summarize(dist, FIG2A)
