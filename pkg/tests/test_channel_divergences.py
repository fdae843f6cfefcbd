"""
Tests for channel divergences, Choi distances and divergences to free sets.
"""
import math

import numpy as np
import pytest

from cqstein.core.errors import ShapeMismatch, UnsupportedSetKind
from cqstein.services import catalogue
from cqstein.services.channel_divergences import (
    DivergenceKind,
    InputMode,
    channel_divergence,
    choi_divergence,
    choi_trace_distance,
    diamond_distance,
    divergence_to_set,
    dmax_at_maximally_entangled,
    hypothesis_test_channel,
    minimax_gap,
    sampled_input_reduction,
    state_divergence,
    subadditivity_check,
)
from cqstein.services.free_sets import FreeSetDescriptor, choi_min_eigenvalue, holevo_capacity
from cqstein.services.qstate import DensityMatrix, cq_apply, random_channel

LN2 = math.log(2.0)


class TestChannelDivergence:
    """Test letterwise channel divergences."""

    def test_flip_against_depolarizing(self, flip, depolarizing):
        """D(E || F) = ln 2, attained on letter 0."""
        result = channel_divergence(DivergenceKind.UMEGAKI, flip, depolarizing)
        assert math.isclose(result.value, LN2, abs_tol=1e-12)
        assert result.arg_input == 0

    def test_choi_variant_halves_the_flip_value(self, flip, constant_zero, depolarizing):
        """The Choi-state divergence averages letters; the channel divergence maximizes."""
        assert math.isclose(choi_divergence(DivergenceKind.UMEGAKI, flip, depolarizing), 0.5 * LN2, abs_tol=1e-12)
        assert math.isclose(choi_divergence(DivergenceKind.UMEGAKI, constant_zero, depolarizing), LN2, abs_tol=1e-12)

    def test_same_channel_gives_zero(self, rng):
        """Every kind vanishes on identical channels."""
        e = random_channel(3, 2, rng)
        for kind in DivergenceKind:
            assert abs(channel_divergence(kind, e, e).value) < 1e-9
        assert diamond_distance(e, e) < 1e-12
        assert choi_trace_distance(e, e) < 1e-12

    def test_entangled_input_does_not_beat_letters(self, rng):
        """D_max at the maximally entangled input is at most the letterwise maximum."""
        e, f = random_channel(2, 2, rng), random_channel(2, 2, rng)
        top = channel_divergence(DivergenceKind.DMAX, e, f).value
        assert dmax_at_maximally_entangled(e, f) <= top + 1e-9

    @pytest.mark.parametrize("kind", list(DivergenceKind))
    def test_entangled_supremum_is_the_letter_maximum(self, rng, kind):
        """Over inputs on R (x) X the supremum is attained at |0>_R (x) |x*> and equals the letter maximum."""
        for _ in range(10):
            k = int(rng.integers(2, 4))
            e, f = random_channel(k, 2, rng), random_channel(k, 2, rng)
            top = channel_divergence(kind, e, f, 1.5)
            product = np.zeros(k * k, dtype=complex)
            product[top.arg_input] = 1.0
            nu = DensityMatrix(np.outer(product, product.conj()))
            attained = state_divergence(kind, cq_apply(e, nu, ref_dim=k), cq_apply(f, nu, ref_dim=k), 1.5)
            assert math.isclose(attained, top.value, abs_tol=1e-9)
            assert sampled_input_reduction(kind, e, f, 20, rng, 1.5).excess <= 1e-9

    def test_dmax_bounded_by_choi_eigenvalue(self, rng):
        """D_max(E || F) <= -log lambda_min(J(F)) for full-rank F."""
        for _ in range(50):
            k, d = int(rng.integers(2, 5)), int(rng.integers(2, 4))
            e, f = random_channel(k, d, rng), random_channel(k, d, rng)
            bound = -math.log(choi_min_eigenvalue(f))
            assert channel_divergence(DivergenceKind.DMAX, e, f).value <= bound + 1e-9

    def test_shape_mismatch(self, flip):
        """Channels must share alphabet and output dimension."""
        with pytest.raises(ShapeMismatch):
            channel_divergence(DivergenceKind.UMEGAKI, flip, catalogue.bell_channel())


class TestChoiBlindPair:
    """Test the pair whose Choi states converge while the channels stay apart."""

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_choi_distance_shrinks(self, n):
        """||J(E1) - J(E2)||_1 = 2^(1-n) while the diamond distance is 2."""
        e1, e2 = catalogue.choi_blind_pair(n)
        assert math.isclose(choi_trace_distance(e1, e2), 2.0 ** (1 - n), abs_tol=1e-12)
        assert math.isclose(diamond_distance(e1, e2), 2.0, abs_tol=1e-12)

    def test_preprocessing_restores_distance(self):
        """After relabelling every string to 1...1 the Choi distance is 2."""
        e1, e2 = catalogue.choi_blind_pair(3)
        theta = catalogue.choi_blind_superchannel(3)
        assert math.isclose(choi_trace_distance(theta.apply(e1), theta.apply(e2)), 2.0, abs_tol=1e-12)


class TestDivergenceToSet:
    """Test infima over free sets."""

    def test_replacer_gives_capacity(self, classical_copy):
        """D(E || replacer) is the Holevo capacity."""
        s = FreeSetDescriptor.replacer(2, 2)
        result = divergence_to_set(DivergenceKind.UMEGAKI, classical_copy, s)
        assert math.isclose(result.value, LN2, abs_tol=1e-6)
        assert result.bracket[1] - result.bracket[0] <= 1e-8

    def test_capacity_identity_on_random_channels(self, rng):
        """The replacer divergence matches an independent capacity run."""
        for _ in range(5):
            e = random_channel(int(rng.integers(2, 5)), int(rng.integers(2, 4)), rng)
            s = FreeSetDescriptor.replacer(e.alphabet_size, e.out_dim)
            value = divergence_to_set(DivergenceKind.UMEGAKI, e, s).value
            assert abs(value - holevo_capacity(e).lower) <= 1e-6

    def test_singleton_reduces_to_channel_divergence(self, flip, depolarizing_set):
        """A singleton set is the channel divergence to its member."""
        result = divergence_to_set(DivergenceKind.UMEGAKI, flip, depolarizing_set)
        assert math.isclose(result.value, LN2, abs_tol=1e-12)

    def test_incoherent_family(self):
        """|+> has relative entropy of coherence ln 2."""
        s = FreeSetDescriptor.lifted("incoherent", 2, 2)
        result = divergence_to_set(DivergenceKind.UMEGAKI, catalogue.plus_channel(), s)
        assert math.isclose(result.value, LN2, abs_tol=1e-9)
        assert result.arg_input == 0

    def test_ppt_bell_state(self):
        """The Bell output is ln 2 away from PPT states."""
        s = FreeSetDescriptor.ppt_output(2)
        result = divergence_to_set(DivergenceKind.UMEGAKI, catalogue.bell_channel(), s)
        assert math.isclose(result.value, LN2, abs_tol=1e-6)

    def test_renyi_against_replacer_unsupported(self, flip, qubit_replacer):
        """Only certified routines are offered."""
        with pytest.raises(UnsupportedSetKind):
            divergence_to_set(DivergenceKind.RENYI, flip, qubit_replacer)


class TestHypothesisTestChannel:
    """Test D_H against free sets over classical inputs."""

    def test_replacer_value(self, flip, qubit_replacer):
        """Against the replacer set every letter gives -log(1 - eps)."""
        result = hypothesis_test_channel(flip, qubit_replacer, 0.1)
        assert math.isclose(result.value, -math.log(0.9), abs_tol=1e-12)
        assert result.lower_bound is True

    def test_types_match_exhaustive(self, flip, depolarizing_set):
        """On i.i.d. powers one representative per type attains the maximum."""
        e2 = flip.tensor_power(2)
        s2 = depolarizing_set.with_copies(2)
        by_type = hypothesis_test_channel(e2, s2, 0.05, InputMode.CLASSICAL_TYPES)
        exhaustive = hypothesis_test_channel(e2, s2, 0.05, InputMode.CLASSICAL_EXHAUSTIVE)
        assert math.isclose(by_type.value, exhaustive.value, abs_tol=1e-9)
        assert by_type.details["evaluated"] == 3
        assert exhaustive.details["evaluated"] == 4

    def test_best_input_is_all_zero(self, flip, depolarizing_set):
        """The pure all-zero output is the easiest to tell from noise."""
        result = hypothesis_test_channel(flip.tensor_power(2), depolarizing_set.with_copies(2), 0.05)
        assert result.arg_input == (0, 0)
        assert math.isclose(result.value, -math.log(0.95 / 4), abs_tol=1e-9)


class TestReductionsAndMinimax:
    """Test input reduction, minimax exchange and subadditivity."""

    @pytest.mark.parametrize("kind", ["umegaki", "renyi", "dmax", "trace"])
    def test_entangled_samples_never_exceed_classical(self, rng, kind):
        """Random entangled inputs stay below the letterwise maximum."""
        for _ in range(3):
            e, f = random_channel(2, 2, rng), random_channel(2, 2, rng)
            check = sampled_input_reduction(kind, e, f, 10, rng)
            assert check.excess <= 1e-9

    def test_minimax_gap_closes(self, rng):
        """max-min and min-max agree for the replacer set."""
        for _ in range(3):
            e = random_channel(3, 2, rng)
            assert minimax_gap(e, FreeSetDescriptor.replacer(3, 2)) <= 1e-6

    def test_subadditivity_of_singleton_sets(self, flip, depolarizing_set):
        """D is additive on i.i.d. singleton sets, so the slack vanishes."""
        check = subadditivity_check(flip, depolarizing_set, 1, 2)
        assert abs(check.slack) <= 1e-9
        assert math.isclose(check.joint, 3 * LN2, abs_tol=1e-9)
