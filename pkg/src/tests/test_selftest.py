"""Tests for the property and golden-value suites."""

import json

import pytest

from renyi_sharp.selftest import (
    DEFAULT_COUNTS,
    ENTANGLED_TABLE,
    GOLDEN,
    SUITES,
    run_selftest,
)


class TestSelftest:
    """Test cases for run_selftest."""

    def test_every_suite_has_a_count(self) -> None:
        assert set(DEFAULT_COUNTS) == set(SUITES)

    def test_unknown_suite(self) -> None:
        with pytest.raises(KeyError):
            run_selftest(suites=["nope"])

    def test_small_run_passes(self) -> None:
        report = run_selftest(seed=3, suites=["commuting", "mean_identities"], count=2)
        assert report.passed, report.to_json()
        assert [s.name for s in report.suites] == ["commuting", "mean_identities"]
        assert all(s.instances == 2 for s in report.suites)

    def test_report_is_deterministic(self) -> None:
        first = run_selftest(seed=5, suites=["ordering"], count=2).to_json()
        second = run_selftest(seed=5, suites=["ordering"], count=2).to_json()
        assert first == second
        assert "time" not in first

    def test_filter_keeps_suite_streams(self) -> None:
        alone = run_selftest(seed=1, suites=["pinching"], count=2)
        together = run_selftest(seed=1, suites=["mean_identities", "pinching"], count=2)
        assert alone.suites[0] == together.suites[1]

    def test_suites_run_in_fixed_order(self) -> None:
        report = run_selftest(seed=0, suites=["pinching", "commuting"], count=1)
        assert [s.name for s in report.suites] == ["commuting", "pinching"]

    def test_json_keys_sorted(self) -> None:
        text = run_selftest(seed=0, suites=["commuting"], count=1).to_json()
        data = json.loads(text)
        assert list(data) == sorted(data)

    @pytest.mark.parametrize(
        "suite", ["homogeneity", "cq_direct_sum", "convergence", "envelope"]
    )
    def test_state_suites_pass(self, suite: str) -> None:
        report = run_selftest(seed=2, suites=[suite], count=1)
        assert report.passed, report.to_json()
        assert report.suites[0].instances == 1

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "suite",
        ["channel_subadditivity", "chain_rule", "replacer", "hierarchy"]
        + ["classical_channels"],
    )
    def test_channel_suites_pass(self, suite: str) -> None:
        report = run_selftest(seed=2, suites=[suite], count=1)
        assert report.passed, report.to_json()

    def test_golden_covers_entangled_table(self) -> None:
        names = {golden.what for golden in GOLDEN}
        for eps, _, _ in ENTANGLED_TABLE:
            assert f"entangled D# alpha=1.5 eps={eps:.3g}" in names
            assert f"entangled D~ alpha=1.5 eps={eps:.3g}" in names

    @pytest.mark.slow
    def test_golden_suite(self) -> None:
        report = run_selftest(suites=["golden"])
        assert report.passed, report.to_json()

    @pytest.mark.slow
    def test_default_run(self) -> None:
        assert run_selftest(seed=0).passed
