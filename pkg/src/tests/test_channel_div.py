"""Tests for channel divergences, the hierarchy and capacity bounds."""

import logging
import math
from typing import Any, Optional

import numpy as np
import pytest
from hermitian_ops import DimensionMismatchError

from renyi_sharp.channel_div import (
    capacity_bound,
    capacity_curve,
    capacity_refinement,
    copies_for_accuracy,
    d_geometric_channel,
    d_sharp_channel,
    diamond_norm_transposed,
    hierarchy_bound,
    hierarchy_correction,
    max_rains_bound,
    rate_correction,
    sandwiched_channel_lower_bound,
    strong_converse_curve,
    two_way_rate_bound,
)
from renyi_sharp.config import SolverConfig
from renyi_sharp.divergence import d_classical, d_from_q, d_sharp_state
from renyi_sharp.errors import OutOfRangeError, SizeBudgetError, SolverFailureError
from renyi_sharp.models import CapacityResult, CellStatus, DyadicWeight, HierarchyBound
from renyi_sharp.quantum import (
    QChannel,
    amplitude_damping,
    apply_channel,
    classical_channel,
    depolarizing,
    identity_channel,
    random_channel,
    random_density,
    replacer,
    tensor_product,
)


class TestSharpChannel:
    """Test cases for the D#_α channel program."""

    def test_identical_channels(self) -> None:
        channel = amplitude_damping(0.3)
        result = d_sharp_channel(channel, channel, 2.0)
        assert result.value_D == pytest.approx(0.0, abs=1e-5)
        assert result.epigraph_t == pytest.approx(1.0, abs=1e-5)

    def test_replacer_channels_reduce_to_states(self) -> None:
        p, q = np.array([0.7, 0.3]), np.array([0.4, 0.6])
        n, m = replacer(np.diag(p), 2), replacer(np.diag(q), 2)
        result = d_sharp_channel(n, m, 2.0)
        assert result.value_D == pytest.approx(d_classical(p, q, 2.0), abs=1e-5)

    def test_lower_bounded_by_sandwiched(self) -> None:
        n, m = amplitude_damping(0.2), depolarizing(0.5)
        value = d_sharp_channel(n, m, 2.0).value_D
        lower = sandwiched_channel_lower_bound(
            n, m, 2.0, samples=8, rng=np.random.default_rng(3)
        )
        assert lower <= value + 1e-5

    def test_support_violation_is_infinite(self) -> None:
        n = amplitude_damping(0.5)
        m = replacer(np.diag([1.0, 0.0]), 2)
        result = d_sharp_channel(n, m, 2.0)
        assert result.is_infinite
        assert result.status == CellStatus.INFINITE.value

    def test_mismatched_channels(self) -> None:
        with pytest.raises(DimensionMismatchError):
            d_sharp_channel(identity_channel(2), identity_channel(3), 2.0)

    def test_power_respects_size_budget(self) -> None:
        channel = amplitude_damping(0.1)
        with pytest.raises(SizeBudgetError):
            d_sharp_channel(
                channel, channel, 2.0, SolverConfig(size_budget=32), power=3
            )

    def test_geometric_channel_of_identical_pair(self) -> None:
        channel = amplitude_damping(0.4)
        assert d_geometric_channel(channel, channel, 1.5) == pytest.approx(
            0.0, abs=1e-9
        )


class TestHierarchy:
    """Test cases for the tensor-power hierarchy."""

    def test_correction_formula(self) -> None:
        assert hierarchy_correction(2.0, 4, 1) == pytest.approx(40 * math.log2(5))

    def test_bound_for_identical_channels(self) -> None:
        channel = amplitude_damping(0.3)
        bound = hierarchy_bound(channel, channel, 1.5, 1)
        assert bound.upper == pytest.approx(0.0, abs=1e-4)
        assert bound.lower == pytest.approx(-bound.correction, abs=1e-4)
        assert bound.d == 4

    def test_rejects_zero_copies(self) -> None:
        channel = amplitude_damping(0.3)
        with pytest.raises(OutOfRangeError):
            hierarchy_bound(channel, channel, 2.0, 0)

    def test_copies_for_accuracy_is_minimal(self) -> None:
        m = copies_for_accuracy(2.0, 4, 10.0)
        assert hierarchy_correction(2.0, 4, m) < 10.0
        assert hierarchy_correction(2.0, 4, m - 1) >= 10.0

    def test_copies_for_accuracy_rejects_bad_delta(self) -> None:
        with pytest.raises(OutOfRangeError):
            copies_for_accuracy(2.0, 4, 0.0)

    def test_strong_converse_curve_is_clamped(self) -> None:
        channel = amplitude_damping(0.3)
        rows = strong_converse_curve(channel, channel, [0.5, -0.5], [2.0], jobs=1)
        assert [row.r for row in rows] == [-0.5, 0.5]
        assert rows[0].exponent == 0.0 and rows[0].best_alpha is None
        assert rows[1].exponent == pytest.approx(0.25, abs=1e-4)
        assert rows[1].best_alpha == 2.0


class TestDiamond:
    """Test cases for the transposed diamond-norm program."""

    def test_identity_has_norm_two(self) -> None:
        choi = identity_channel(2).choi.entries
        assert diamond_norm_transposed(choi, 2, 2) == pytest.approx(2.0, abs=1e-5)

    def test_entanglement_breaking_has_norm_one(self) -> None:
        choi = replacer(np.eye(2) / 2, 2).choi.entries
        assert diamond_norm_transposed(choi, 2, 2) == pytest.approx(1.0, abs=1e-5)

    def test_max_rains_amplitude_damping(self) -> None:
        value = max_rains_bound(amplitude_damping(0.5))
        assert value == pytest.approx(math.log2(1.5), abs=1e-3)


class TestCapacity:
    """Test cases for the joint capacity-bound program."""

    def test_bracket_and_minimizer(self) -> None:
        result = capacity_bound(amplitude_damping(0.5), 1.5, bits=6)
        assert result.beta_used.level == 6
        assert result.minimizer_choi is not None
        assert result.value <= math.log2(1.5) + 1e-3

    def test_identity_channel_bound(self) -> None:
        result = capacity_bound(amplitude_damping(0.0), 2.0)
        assert result.value == pytest.approx(1.0, abs=1e-3)

    def test_rate_correction(self) -> None:
        assert rate_correction(2.0, 0.5, 1) == pytest.approx(2.0)
        assert rate_correction(2.0, 0.0, 5) == 0.0

    def test_two_way_rate_bound_rejects_bad_epsilon(self) -> None:
        with pytest.raises(OutOfRangeError):
            two_way_rate_bound(amplitude_damping(0.5), [2.0], 1.0, 10)

    def test_two_way_rate_bound_adds_correction(self) -> None:
        channel = amplitude_damping(0.5)
        bound = two_way_rate_bound(channel, [2.0], 0.5, 4, jobs=1)
        single = capacity_bound(channel, 2.0).value
        assert bound.best_alpha == 2.0
        assert bound.value == pytest.approx(single + 0.5, abs=1e-4)

    @pytest.mark.slow
    def test_capacity_curve_golden(self) -> None:
        alphas = [1.1 + 0.1 * k for k in range(10)]
        rows = capacity_curve([0.3, 0.5], alphas)
        assert [row.gamma for row in rows] == [0.3, 0.5]
        assert rows[0].value == pytest.approx(0.720122479705461, abs=1e-2)
        assert rows[1].value == pytest.approx(0.548461571846658, abs=1e-2)
        assert all(row.status == CellStatus.OK for row in rows)

    @pytest.mark.slow
    def test_capacity_endpoints(self) -> None:
        rows = capacity_curve([0.0, 1.0], [1.5, 2.0])
        assert rows[0].value == pytest.approx(1.0, abs=1e-2)
        assert rows[1].value == pytest.approx(0.0, abs=1e-2)

    @pytest.mark.slow
    def test_refinement_with_three_copies(self) -> None:
        bound = capacity_refinement(amplitude_damping(0.5), 2.0, 3)
        assert bound.upper == pytest.approx(0.533858545349676, abs=1e-2)


def mixed_channel(rng: np.random.Generator) -> QChannel:
    choi = 0.5 * random_channel(2, 2, rng, n_kraus=4).choi.entries
    choi = choi + 0.5 * depolarizing(1.0).choi.entries
    return QChannel.from_choi(choi, 2, 2, name="mixed")


class TestChannelProperties:
    """Structural properties of the channel program."""

    def test_value_uses_requested_alpha(self) -> None:
        result = d_sharp_channel(amplitude_damping(0.2), depolarizing(0.5), 1.5, bits=6)
        assert result.value_D == math.log2(result.value_Q) / (result.alpha - 1)
        assert result.alpha_effective == pytest.approx(1 / result.beta_used.value)
        assert result.d_bracket[1] == result.value_D

    def test_subadditive_under_tensor_products(self, rng: np.random.Generator) -> None:
        n1, m1 = random_channel(2, 2, rng), mixed_channel(rng)
        n2, m2 = random_channel(2, 2, rng), mixed_channel(rng)
        joint = d_sharp_channel(
            tensor_product(n1, n2), tensor_product(m1, m2), 2.0
        ).value_D
        first = d_sharp_channel(n1, m1, 2.0).value_D
        second = d_sharp_channel(n2, m2, 2.0).value_D
        parts = first + second
        assert joint <= parts + 1e-4

    def test_chain_rule(self, rng: np.random.Generator) -> None:
        rho, sigma = random_density(2, rng), random_density(2, rng)
        n, m = random_channel(2, 2, rng), mixed_channel(rng)
        after = d_sharp_state(apply_channel(n, rho), apply_channel(m, sigma), 2.0)
        states = d_sharp_state(rho, sigma, 2.0).value_D
        bound = states + d_sharp_channel(n, m, 2.0).value_D
        assert after.value_D <= bound + 1e-4

    @pytest.mark.parametrize("dim_in", [1, 3])
    def test_replacer_matches_state_value(
        self, rng: np.random.Generator, dim_in: int
    ) -> None:
        rho, sigma = random_density(2, rng), random_density(2, rng)
        state = d_sharp_state(rho, sigma, 1.5, bits=8).value_D
        channel = d_sharp_channel(
            replacer(rho, dim_in), replacer(sigma, dim_in), 1.5, bits=8
        ).value_D
        assert channel == pytest.approx(state, abs=1e-4)

    def test_second_level_does_not_exceed_first(self) -> None:
        n, m = amplitude_damping(0.3), depolarizing(0.5)
        single = hierarchy_bound(n, m, 2.0, 1)
        double = hierarchy_bound(n, m, 2.0, 2)
        assert double.upper <= single.upper + 1e-4
        assert double.correction < single.correction

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
    def test_classical_channels_take_worst_input(
        self, rng: np.random.Generator, alpha: float
    ) -> None:
        w_n = rng.dirichlet(np.ones(3), size=2).T
        w_m = rng.dirichlet(np.ones(3), size=2).T
        result = d_sharp_channel(classical_channel(w_n), classical_channel(w_m), alpha)
        exponent = result.alpha_effective
        worst = np.max(np.sum(w_n**exponent * w_m ** (1 - exponent), axis=0))
        assert result.value_D == pytest.approx(d_from_q(worst, alpha), abs=1e-5)
        per_input = max(
            d_classical(w_n[:, x], w_m[:, x], alpha) for x in range(w_n.shape[1])
        )
        assert result.value_D == pytest.approx(per_input, abs=1e-2)


class TestMinimizerCheck:
    """The capacity minimizer is re-checked against ‖Θ∘M‖⋄ ≤ 1."""

    def test_minimizer_is_feasible(self) -> None:
        result = capacity_bound(amplitude_damping(0.5), 2.0)
        assert result.minimizer_feasible
        assert result.minimizer_diamond <= 1 + 1e-5
        assert result.value == math.log2(result.value_Q) / (result.alpha - 1)
        assert result.alpha_effective == 2.0

    def test_violation_is_flagged(
        self, monkeypatch: pytest.MonkeyPatch, caplog: pytest.LogCaptureFixture
    ) -> None:
        monkeypatch.setattr(
            "renyi_sharp.channel_div.diamond_norm_transposed",
            lambda *args, **kwargs: 1.1,
        )
        with caplog.at_level(logging.WARNING, logger="renyi_sharp.channel_div"):
            result = capacity_bound(amplitude_damping(0.5), 2.0)
        assert not result.minimizer_feasible
        assert result.minimizer_diamond == 1.1
        assert any("‖Θ∘M‖⋄" in r.getMessage() for r in caplog.records)

    def test_failed_check_is_flagged(self, monkeypatch: pytest.MonkeyPatch) -> None:
        def stalled(*args: Any, **kwargs: Any) -> float:
            raise SolverFailureError("diamond: solver ended with status max_iter")

        monkeypatch.setattr("renyi_sharp.channel_div.diamond_norm_transposed", stalled)
        result = capacity_bound(amplitude_damping(0.5), 2.0)
        assert not result.minimizer_feasible
        assert result.minimizer_diamond is None


def flaky_hierarchy(failing: float) -> Any:
    def fake(
        n: QChannel,
        m_channel: QChannel,
        alpha: float,
        m: int,
        options: Optional[SolverConfig] = None,
        bits: Optional[int] = None,
    ) -> HierarchyBound:
        if alpha == failing:
            raise SolverFailureError(f"alpha={alpha}: solver ended with max_iter")
        return HierarchyBound(
            m=m, alpha=alpha, d=4, upper=0.1 * alpha, lower=0.0, correction=0.1
        )

    return fake


def flaky_capacity(failing: float) -> Any:
    def fake(
        channel: QChannel,
        alpha: float,
        options: Optional[SolverConfig] = None,
        bits: Optional[int] = None,
    ) -> CapacityResult:
        if alpha == failing:
            raise SolverFailureError(f"alpha={alpha}: solver ended with max_iter")
        return CapacityResult(
            alpha=alpha,
            value=0.5 * alpha,
            value_Q=1.0,
            beta_used=DyadicWeight(numerator=1, level=1),
            d_bracket=(0.5 * alpha, 0.5 * alpha),
        )

    return fake


class TestPartialGrids:
    """A solver failure in one alpha cell leaves the other cells usable."""

    def test_exponent_rows_report_partial(
        self, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setattr(
            "renyi_sharp.channel_div.hierarchy_bound", flaky_hierarchy(3.0)
        )
        channel = amplitude_damping(0.3)
        rows = strong_converse_curve(channel, channel, [1.0], [2.0, 3.0], jobs=1)
        assert rows[0].status == CellStatus.PARTIAL
        assert rows[0].failed_alphas == [3.0]
        assert rows[0].best_alpha == 2.0
        assert rows[0].exponent == pytest.approx(0.5 * (1.0 - 0.2))

    def test_exponent_rows_report_failed(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(
            "renyi_sharp.channel_div.hierarchy_bound", flaky_hierarchy(2.0)
        )
        channel = amplitude_damping(0.3)
        rows = strong_converse_curve(channel, channel, [0.5, 1.0], [2.0], jobs=1)
        assert [row.status for row in rows] == [CellStatus.FAILED] * 2
        assert all(math.isnan(row.exponent) for row in rows)

    def test_other_errors_still_raise(self, monkeypatch: pytest.MonkeyPatch) -> None:
        def broken(*args: Any, **kwargs: Any) -> HierarchyBound:
            raise DimensionMismatchError("channels act on different systems")

        monkeypatch.setattr("renyi_sharp.channel_div.hierarchy_bound", broken)
        channel = amplitude_damping(0.3)
        with pytest.raises(DimensionMismatchError):
            strong_converse_curve(channel, channel, [1.0], [2.0], jobs=1)

    def test_rate_bound_reports_partial(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(
            "renyi_sharp.channel_div.capacity_bound", flaky_capacity(3.0)
        )
        bound = two_way_rate_bound(amplitude_damping(0.5), [2.0, 3.0], 0.0, 4, jobs=1)
        assert bound.status == CellStatus.PARTIAL
        assert bound.failed_alphas == [3.0]
        assert bound.best_alpha == 2.0
        assert bound.value == pytest.approx(1.0)

    def test_rate_bound_reports_failed(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(
            "renyi_sharp.channel_div.capacity_bound", flaky_capacity(2.0)
        )
        bound = two_way_rate_bound(amplitude_damping(0.5), [2.0], 0.0, 4, jobs=1)
        assert bound.status == CellStatus.FAILED
        assert bound.best_alpha is None
        assert math.isnan(bound.value)
