"""Tests for the weighted matrix geometric mean and its SDP encoding."""

from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from renyi_sharp.errors import NotDyadicError, OutOfRangeError, SupportViolationError
from renyi_sharp.meanrep import (
    as_dyadic,
    build_mean_constraint,
    dyadic_approx,
    mean_eval,
    mean_eval_regularized,
)
from renyi_sharp.models import DyadicWeight, SolverStatus
from renyi_sharp.quantum import random_psd
from renyi_sharp.sdp import ProgramBuilder, Trace, check_certificate, solve


class TestMeanEval:
    """Test cases for direct evaluation of A #_β B."""

    def test_commuting_operands(self) -> None:
        a, b = np.diag([1.0, 4.0]), np.diag([9.0, 1.0])
        mean = mean_eval(a, b, 0.5).entries
        assert np.allclose(mean, np.diag([3.0, 2.0]))

    def test_endpoints(self, rng: np.random.Generator) -> None:
        a, b = random_psd(3, rng), random_psd(3, rng)
        assert np.allclose(mean_eval(a, b, 0).entries, a)
        assert np.allclose(mean_eval(a, b, 1).entries, b)

    def test_half_solves_riccati_equation(self, rng: np.random.Generator) -> None:
        a, b = random_psd(3, rng), random_psd(3, rng)
        g = mean_eval(a, b, 0.5).entries
        assert np.allclose(g @ np.linalg.inv(a) @ g, b, atol=1e-8)

    def test_symmetry_under_weight_swap(self, rng: np.random.Generator) -> None:
        a, b = random_psd(3, rng), random_psd(3, rng)
        assert np.allclose(
            mean_eval(a, b, 0.25).entries, mean_eval(b, a, 0.75).entries, atol=1e-9
        )

    def test_singular_first_argument_within_support(self) -> None:
        a, b = np.diag([2.0, 0.0]), np.diag([8.0, 0.0])
        assert np.allclose(mean_eval(a, b, 0.5).entries, np.diag([4.0, 0.0]))

    def test_support_violation(self) -> None:
        with pytest.raises(SupportViolationError):
            mean_eval(np.diag([1.0, 0.0]), np.eye(2), 0.5)

    def test_negative_weight(self) -> None:
        with pytest.raises(OutOfRangeError):
            mean_eval(np.eye(2), np.eye(2), -0.1)

    def test_regularized_decreases_to_limit(self) -> None:
        a, b = np.diag([1.0, 0.0]), np.diag([4.0, 0.0])
        coarse = mean_eval_regularized(a, b, 0.5, 1e-2).entries
        fine = mean_eval_regularized(a, b, 0.5, 1e-6).entries
        assert np.trace(coarse).real >= np.trace(fine).real - 1e-12
        assert np.allclose(fine, np.diag([2.0, 0.0]), atol=1e-5)


class TestDyadicWeights:
    """Test cases for dyadic weights and their approximation."""

    def test_dyadic_approx_brackets(self) -> None:
        lo, hi = dyadic_approx(Fraction(2, 3), 8)
        assert lo.fraction == Fraction(170, 256)
        assert hi.fraction == Fraction(171, 256)

    def test_dyadic_approx_exact(self) -> None:
        lo, hi = dyadic_approx(0.75, 4)
        assert lo == hi
        assert lo.fraction == Fraction(3, 4)

    def test_weight_reduced_to_lowest_terms(self) -> None:
        weight = DyadicWeight(numerator=4, level=3)
        assert (weight.numerator, weight.level) == (1, 1)
        assert str(weight) == "1/2"

    def test_weight_out_of_range(self) -> None:
        with pytest.raises(ValidationError):
            DyadicWeight(numerator=5, level=2)

    def test_non_dyadic_rejected(self) -> None:
        with pytest.raises(NotDyadicError):
            as_dyadic(Fraction(1, 3))

    def test_doubling(self) -> None:
        weight = as_dyadic(Fraction(3, 8))
        assert weight.doubled().fraction == Fraction(3, 4)
        assert as_dyadic(Fraction(3, 4)).doubled_minus_one().fraction == Fraction(1, 2)


def _max_trace_below_mean(a: np.ndarray, b: np.ndarray, beta: Fraction) -> float:
    builder = ProgramBuilder("mean-test")
    t = builder.variable("T", a.shape[0])
    block = build_mean_constraint(
        builder, builder.constant(a), builder.constant(b), t, beta
    )
    assert len(block.aux_names) == block.level or block.level == 0
    builder.minimize(-1.0 * t.map(Trace(a.shape[0])))
    program = builder.build()
    solution = solve(program)
    assert solution.status == SolverStatus.OPTIMAL
    assert check_certificate(program, solution).passed(1e-6)
    return -solution.primal_obj


class TestMeanConstraint:
    """Test cases for the dyadic tower encoding of T ⪯ A #_β B."""

    @pytest.mark.parametrize(
        "beta", [Fraction(1, 2), Fraction(1, 4), Fraction(3, 4), Fraction(5, 8)]
    )
    def test_maximal_trace_matches_mean(
        self, rng: np.random.Generator, beta: Fraction
    ) -> None:
        a, b = random_psd(2, rng) + np.eye(2), random_psd(2, rng) + np.eye(2)
        expected = np.trace(mean_eval(a, b, float(beta)).entries).real
        assert _max_trace_below_mean(a, b, beta) == pytest.approx(expected, rel=1e-5)

    def test_trivial_weights_add_no_blocks(self) -> None:
        builder = ProgramBuilder()
        t = builder.variable("T", 2)
        block = build_mean_constraint(
            builder, builder.constant(np.eye(2)), builder.constant(np.eye(2)), t, 0
        )
        assert block.aux_names == []
        assert block.labels == ["mean.lower"]

    def test_block_count_equals_binary_length(self) -> None:
        builder = ProgramBuilder()
        t = builder.variable("T", 2)
        block = build_mean_constraint(
            builder,
            builder.constant(np.eye(2)),
            builder.constant(np.eye(2)),
            t,
            Fraction(5, 16),
        )
        assert block.level == 4
        assert block.block_dims == [4, 4, 4, 4]

    def test_rejects_non_dyadic(self) -> None:
        builder = ProgramBuilder()
        t = builder.variable("T", 2)
        with pytest.raises(NotDyadicError):
            build_mean_constraint(
                builder,
                builder.constant(np.eye(2)),
                builder.constant(np.eye(2)),
                t,
                Fraction(1, 3),
            )
