"""
Tests for robustness decompositions, smoothing, superchannels and conversions.
"""
import math

import numpy as np
import pytest

from cqstein.core.errors import InfiniteRobustness, PreconditionViolated, ShapeMismatch
from cqstein.services import catalogue
from cqstein.services.channel_divergences import diamond_distance
from cqstein.services.divergences import hypothesis_test
from cqstein.services.free_sets import FreeSetDescriptor, membership
from cqstein.services.qstate import DensityMatrix, random_channel, random_density
from cqstein.services.resource_ops import (
    PreprocessingSuperchannel,
    all_ones_preprocessing,
    arng_deficit,
    build_superchannel,
    conversion_trace,
    cut_weight_bound,
    dmax_sum_check,
    gentle_measurement_check,
    robustness_decompose,
    smooth_channel,
)


class TestRobustnessDecomposition:
    """Test (E + r E') / (1 + r) = F."""

    def test_flip_against_replacer(self, flip, qubit_replacer):
        """r = 1/2 and the reconstruction is exact."""
        dec = robustness_decompose(flip, qubit_replacer)
        assert math.isclose(dec.r, 0.5, abs_tol=1e-12)
        assert math.isclose(dec.s, math.log(1.5), abs_tol=1e-12)
        assert dec.reconstruction_residual(flip) <= 1e-9
        assert membership(dec.free_channel, qubit_replacer)[1] <= 1e-9

    def test_constant_zero_against_depolarizing(self, constant_zero, depolarizing_set):
        """r = 1 with complement |1><1| on every letter."""
        dec = robustness_decompose(constant_zero, depolarizing_set)
        assert math.isclose(dec.r, 1.0, abs_tol=1e-12)
        assert np.allclose(dec.complement.outputs[0], np.diag([0.0, 1.0]), atol=1e-12)

    def test_free_channel_has_zero_robustness(self, depolarizing, qubit_replacer):
        """A free channel decomposes with r = 0."""
        dec = robustness_decompose(depolarizing, qubit_replacer)
        assert dec.r == 0.0
        assert dec.reconstruction_residual(depolarizing) <= 1e-12

    @pytest.mark.parametrize("kind", ["singleton", "replacer"])
    def test_random_channels(self, rng, kind):
        """Residual and membership stay below 1e-9 on random two-letter channels."""
        for _ in range(10):
            e = random_channel(2, 2, rng)
            if kind == "replacer":
                s = FreeSetDescriptor.replacer(2, 2)
            else:
                s = FreeSetDescriptor.singleton_iid(random_channel(2, 2, rng))
            dec = robustness_decompose(e, s)
            assert dec.reconstruction_residual(e) <= 1e-9
            assert membership(dec.free_channel, s)[1] <= 1e-9

    def test_infinite_robustness(self, flip, constant_zero):
        """No decomposition exists when E is not dominated."""
        with pytest.raises(InfiniteRobustness):
            robustness_decompose(flip, FreeSetDescriptor.singleton_iid(constant_zero))


class TestSmoothing:
    """Test the D_max smoothing of channel powers."""

    def test_bounds_hold_on_commuting_instance(self):
        """D_max <= kmR + log|spec| and cut weights <= e^{-kmR} for k = 1..3."""
        e, f, R = catalogue.smoothing_instance()
        previous = math.inf
        for k in (1, 2, 3):
            smoothed = smooth_channel(e, f, R, k)
            assert smoothed.dmax_value <= smoothed.dmax_bound + 1e-8
            assert max(cut_weight_bound(smoothed, f)) <= math.exp(-k * R) + 1e-12
            diamond = diamond_distance(e.tensor_power(k), smoothed.channel)
            assert diamond <= previous + 1e-12
            previous = diamond

    def test_first_cut_by_hand(self):
        """k = 1 cuts |1><1| and refills with F: diag(0.999, 0.001)."""
        e, f, R = catalogue.smoothing_instance()
        smoothed = smooth_channel(e, f, R, 1)
        assert np.allclose(smoothed.channel.outputs[0], np.diag([0.999, 0.001]), atol=1e-12)
        assert smoothed.spectrum == 2

    def test_large_rate_cuts_nothing(self):
        """R above D_max(E || F) leaves E^k untouched."""
        e, f, _ = catalogue.smoothing_instance()
        smoothed = smooth_channel(e, f, 3.0, 2)
        assert diamond_distance(e.tensor_power(2), smoothed.channel) <= 1e-12

    def test_rate_must_be_positive(self):
        """R <= 0 is rejected."""
        e, f, _ = catalogue.smoothing_instance()
        with pytest.raises(PreconditionViolated):
            smooth_channel(e, f, 0.0, 1)

    def test_smoothed_outputs_are_states(self):
        """The refill keeps every output a unit-trace PSD matrix."""
        e, f, R = catalogue.smoothing_instance()
        smoothed = smooth_channel(e, f, R, 2)
        for omega in smoothed.channel.outputs:
            assert math.isclose(np.trace(omega).real, 1.0, abs_tol=1e-12)
            assert np.linalg.eigvalsh(omega)[0] >= -1e-12


class TestSuperchannels:
    """Test test-and-prepare and preprocessing superchannels."""

    def test_recipe_mixes_pass_and_fail(self, flip, constant_zero, depolarizing):
        """Theta(N) = t pass + (1 - t) fail with t = Tr[Lambda N(probe)]."""
        lam = np.diag([1.0, 0.0])
        theta = build_superchannel(lam, 1, constant_zero, depolarizing)
        assert math.isclose(theta.acceptance(flip), 0.5)
        out = theta.apply(flip)
        assert np.allclose(out.outputs[0], 0.5 * np.diag([1.0, 0.0]) + 0.25 * np.eye(2))

    def test_accepts_test_result(self, flip, constant_zero, depolarizing):
        """An optimal test from the solver is a valid test operator."""
        result = hypothesis_test(flip.output(0), depolarizing.output(0), 0.1)
        theta = build_superchannel(result, 0, constant_zero, depolarizing)
        assert math.isclose(theta.acceptance(flip), 0.9, abs_tol=1e-12)

    def test_rejects_invalid_test(self, constant_zero, depolarizing):
        """Test operators must satisfy 0 <= Lambda <= 1."""
        with pytest.raises(ShapeMismatch):
            build_superchannel(np.diag([1.5, 0.0]), 0, constant_zero, depolarizing)

    def test_rejects_mismatched_probe(self, constant_zero, depolarizing):
        """The probe must be a letter of the channel tested."""
        theta = build_superchannel(np.eye(2), 0, constant_zero, depolarizing)
        with pytest.raises(ShapeMismatch):
            theta.acceptance(catalogue.bell_channel())

    def test_all_ones_preprocessing(self):
        """Every string is relabelled to 1...1."""
        theta = all_ones_preprocessing(2)
        assert isinstance(theta, PreprocessingSuperchannel)
        assert theta.relabel == (3, 3, 3, 3)


class TestDeficit:
    """Test the resource deficit of superchannels."""

    def test_preprocessing_deficit_is_zero(self):
        """Relabelling the depolarizing power keeps it free."""
        s3 = catalogue.depolarizing_singleton(3)
        report = arng_deficit(all_ones_preprocessing(3), s3.channel, s3)
        assert report.deficit <= 1e-12
        assert report.bound is None

    def test_bound_needs_small_acceptance(self, constant_zero, depolarizing, depolarizing_set):
        """t > e^{-s} violates the precondition of the deficit bound."""
        theta = build_superchannel(np.eye(2), 0, constant_zero, depolarizing, decomposition_s=math.log(2.0))
        with pytest.raises(PreconditionViolated):
            arng_deficit(theta, depolarizing, depolarizing_set)

    def test_decomposition_bound_is_met(self, constant_zero, depolarizing, depolarizing_set):
        """For a decomposition recipe the deficit stays within log((1 - t)/(1 - e^{-s}))."""
        dec = robustness_decompose(constant_zero, depolarizing_set)
        theta = build_superchannel(np.diag([0.4, 0.0]), 0, constant_zero, dec.complement, dec.s)
        report = arng_deficit(theta, depolarizing, depolarizing_set)
        assert math.isclose(report.t, 0.2)
        assert report.deficit <= report.bound + 1e-9

    def test_zero_robustness_gives_infinite_bound(self, constant_zero, depolarizing, depolarizing_set):
        """With s = 0 the denominator 1 - e^{-s} vanishes and the bound is +inf."""
        theta = build_superchannel(np.diag([0.4, 0.0]), 0, constant_zero, depolarizing, decomposition_s=0.0)
        report = arng_deficit(theta, depolarizing, depolarizing_set)
        assert report.bound == math.inf
        assert math.isclose(report.deficit, math.log(1.2), abs_tol=1e-9)


class TestStateInequalities:
    """Test the gentle-measurement and D_max-of-sums checks."""

    def test_gentle_measurement(self, rng):
        """(1/2)||rho - sqrt(L) rho sqrt(L)||_1 <= sqrt(eps) + eps/2."""
        for _ in range(20):
            rho = random_density(3, rng)
            lam = random_density(3, rng).matrix
            lam = lam / np.linalg.eigvalsh(lam)[-1]
            lhs, rhs = gentle_measurement_check(rho, lam)
            assert lhs <= rhs + 1e-9

    def test_dmax_of_sum(self, rng):
        """D_max(rho1 + rho2 || sigma) <= log(e^{D_max(rho1)} + e^{D_max(rho2)})."""
        for _ in range(20):
            rho1, rho2 = random_density(3, rng).matrix, random_density(3, rng).matrix
            sigma = random_density(3, rng)
            lhs, rhs = dmax_sum_check(rho1, rho2, sigma)
            assert lhs <= rhs + 1e-9

    def test_dmax_of_sum_is_tight_for_equal_states(self):
        """Both sides are log 2 when rho1 = rho2 = sigma."""
        sigma = DensityMatrix(np.eye(2, dtype=complex) / 2)
        lhs, rhs = dmax_sum_check(sigma.matrix, sigma.matrix, sigma)
        assert math.isclose(lhs, math.log(2.0), abs_tol=1e-12)
        assert math.isclose(rhs, math.log(2.0), abs_tol=1e-12)


class TestConversionTrace:
    """Test the finite-n conversion pipeline."""

    def test_flip_to_constant_zero(self, flip, constant_zero, depolarizing_set):
        """Per n: type-I error eps, diamond error within 2 eps, deficit within its bound."""
        rows = conversion_trace(flip, constant_zero, depolarizing_set, depolarizing_set, 0.5, 0.05, 3)
        assert [r.n for r in rows] == [1, 2, 3]
        assert [r.target_copies for r in rows] == [1, 1, 2]
        for row in rows:
            assert row.probe == (0,) * row.n
            assert math.isclose(row.type1_error, 0.05, abs_tol=1e-9)
            assert row.diamond_error <= row.diamond_bound + 1e-9
            assert row.deficit_bound is not None
            assert row.deficit <= row.deficit_bound + 1e-9
            assert row.details["membership"] <= 1e-9
            assert row.recipe is not None
