"""
Tests for free-set descriptors, membership, capacity and log robustness.
"""
import math

import numpy as np
import pytest

from cqstein.core.config import settings
from cqstein.core.errors import InputError, NonConvergence, ShapeMismatch, UnsupportedDimension, UnsupportedSetKind
from cqstein.services import catalogue
from cqstein.services.free_sets import (
    FreeSetDescriptor,
    SetKind,
    axioms_report,
    choi_min_eigenvalue,
    free_member,
    holevo_capacity,
    log_robustness,
    membership,
    min_relative_entropy_to_set,
    replacer_channel,
)
from cqstein.services.qstate import DensityMatrix, random_channel, random_density

LN2 = math.log(2.0)


class TestDescriptors:
    """Test construction and lifting of free sets."""

    def test_with_copies_shape(self, qubit_replacer):
        """S_n acts on |X|^n letters with output dimension d^n."""
        s3 = qubit_replacer.with_copies(3)
        assert s3.shape == (8, 8)
        assert s3.kind == SetKind.REPLACER

    def test_singleton_member_is_the_power(self, depolarizing_set):
        """The singleton member of S_n is F^(x)n."""
        member = depolarizing_set.with_copies(2).channel
        assert np.allclose(member.outputs[3], np.eye(4) / 4)

    def test_on_types_shapes(self, qubit_replacer, depolarizing_set):
        """Restricting S_n to type representatives keeps d^n and has n + 1 letters for |X| = 2."""
        assert qubit_replacer.on_types(5).shape == (6, 32)
        singleton = depolarizing_set.on_types(3)
        assert singleton.kind == SetKind.SINGLETON_IID
        assert singleton.shape == (4, 8)
        assert np.allclose(singleton.channel.outputs[2], np.eye(8) / 8)
        incoherent = FreeSetDescriptor.lifted("incoherent", 2, 2).on_types(2)
        assert incoherent.shape == (3, 4)
        assert incoherent.family.dim == 4

    def test_replacer_has_no_single_member(self, qubit_replacer):
        """Only singleton sets expose `.channel`."""
        with pytest.raises(UnsupportedSetKind):
            _ = qubit_replacer.channel

    def test_ppt_only_on_one_copy(self):
        """PPT output sets are not lifted beyond a single 2x2 copy."""
        with pytest.raises(UnsupportedDimension):
            FreeSetDescriptor.ppt_output(2).with_copies(2)

    def test_unknown_family(self):
        """Family tags are resolved through the factory."""
        with pytest.raises(UnsupportedSetKind):
            FreeSetDescriptor.lifted("magic", 2, 2)

    def test_shape_check(self, flip):
        """A set of another shape is rejected."""
        with pytest.raises(ShapeMismatch):
            membership(flip, FreeSetDescriptor.replacer(3, 2))


class TestMembership:
    """Test membership and the designated full-rank member."""

    def test_replacer_membership(self, depolarizing, flip, qubit_replacer):
        """Constant channels are replacers; the flip channel is not."""
        assert membership(depolarizing, qubit_replacer)[0]
        ok, violation = membership(flip, qubit_replacer)
        assert not ok
        assert math.isclose(violation, 1.0, abs_tol=1e-12)

    def test_incoherent_membership(self, classical_copy):
        """Diagonal outputs are incoherent, |+> is not."""
        s = FreeSetDescriptor.lifted("incoherent", 2, 2)
        assert membership(classical_copy, s)[0]
        assert not membership(catalogue.plus_channel(), s)[0]

    def test_family_contains_tolerance(self):
        """tol=None falls back to MEMBERSHIP_TOL; an explicit tol overrides it."""
        family = FreeSetDescriptor.lifted("incoherent", 2, 2).family
        rho = DensityMatrix(np.array([[0.5, 1e-6], [1e-6, 0.5]], dtype=complex))
        assert not family.contains(rho)
        assert not family.contains(rho, tol=None)
        assert family.contains(rho, tol=1e-3)

    @pytest.mark.parametrize("make", [
        lambda: FreeSetDescriptor.replacer(3, 2),
        lambda: FreeSetDescriptor.lifted("incoherent", 2, 3),
        lambda: FreeSetDescriptor.ppt_output(2),
        lambda: catalogue.depolarizing_singleton(),
    ])
    def test_free_member_is_full_rank(self, make):
        """F_* lies in the set and has a full-rank Choi state."""
        s = make()
        member = free_member(s)
        assert membership(member, s)[0]
        assert choi_min_eigenvalue(member) > 1e-12


class TestAxioms:
    """Test the structural assumptions on free sets."""

    @pytest.mark.parametrize("make", [
        lambda: FreeSetDescriptor.replacer(2, 2),
        lambda: FreeSetDescriptor.lifted("incoherent", 2, 2),
        lambda: FreeSetDescriptor.lifted("fixed_state", 2, 2),
        lambda: catalogue.depolarizing_singleton(),
    ])
    def test_all_axioms_hold(self, make, rng):
        """Convexity, permutation closure, tensor closure and a full-rank member."""
        verdicts = axioms_report(make(), rng)
        assert [v.axiom for v in verdicts] == [
            "convex", "permutation_closed", "tensor_closed", "full_rank_member",
        ]
        assert all(v.holds for v in verdicts), [v for v in verdicts if not v.holds]


class TestCapacity:
    """Test the Blahut-Arimoto bracket."""

    def test_classical_copy(self, classical_copy):
        """Orthogonal pure outputs carry one bit."""
        cap = holevo_capacity(classical_copy)
        assert math.isclose(cap.lower, LN2, abs_tol=1e-8)
        assert cap.gap <= 1e-8
        assert np.allclose(cap.optimal_p, [0.5, 0.5], atol=1e-6)

    def test_constant_channel_has_zero_capacity(self, depolarizing):
        """A replacer carries nothing."""
        cap = holevo_capacity(depolarizing)
        assert cap.upper <= 1e-12

    def test_bracket_closes_on_random_channels(self, rng):
        """lower <= upper and the gap closes to the tolerance."""
        for _ in range(5):
            cap = holevo_capacity(random_channel(4, 3, rng), 1e-8)
            assert 0.0 <= cap.gap <= 1e-8

    def test_lower_bound_is_monotone(self, rng):
        """The recorded lower bounds never decrease from one step to the next."""
        for _ in range(5):
            cap = holevo_capacity(random_channel(4, 3, rng), 1e-10)
            history = np.array(cap.lower_history)
            assert len(history) == cap.iterations
            assert np.all(np.diff(history) >= -1e-12)
            assert history[-1] <= cap.upper + 1e-12

    def test_lower_bound_drop_raises(self, monkeypatch, rng):
        """A decrease beyond the tolerance stops the iteration with NonConvergence."""
        monkeypatch.setattr(settings, "CAPACITY_MONOTONE_TOL", -1.0)
        with pytest.raises(NonConvergence) as exc:
            holevo_capacity(random_channel(4, 3, rng), 1e-14)
        assert exc.value.details["iteration"] == 2

    @pytest.mark.parametrize("tol", [0.0, -1e-8])
    def test_nonpositive_tolerance_is_input_error(self, classical_copy, tol):
        """A tolerance <= 0 is a bad argument (exit code 2), not a convergence failure."""
        with pytest.raises(InputError) as exc:
            holevo_capacity(classical_copy, tol)
        assert exc.value.exit_code == 2

    def test_iteration_cap(self, rng):
        """An unreachable tolerance with one iteration raises NonConvergence."""
        with pytest.raises(NonConvergence):
            holevo_capacity(random_channel(4, 3, rng), 1e-14, max_iter=1)


class TestLogRobustness:
    """Test D_max to free sets."""

    def test_flip_against_replacer(self, flip, qubit_replacer):
        """Two letters: log(1 + (1/2)||omega_0 - omega_1||_1) = log 1.5."""
        rob = log_robustness(flip, qubit_replacer)
        assert math.isclose(rob.value, math.log(1.5), abs_tol=1e-12)
        assert rob.is_point
        assert rob.certificate >= -1e-12

    def test_constant_zero_against_depolarizing(self, constant_zero, depolarizing_set):
        """D_max(|0><0| || 1/2) = ln 2."""
        rob = log_robustness(constant_zero, depolarizing_set)
        assert math.isclose(rob.value, LN2, abs_tol=1e-12)

    def test_unsupported_member_is_infinite(self, flip, constant_zero):
        """1/2 is not dominated by |0><0|."""
        rob = log_robustness(flip, FreeSetDescriptor.singleton_iid(constant_zero))
        assert math.isinf(rob.value)

    def test_witness_is_free_and_certified(self, rng, qubit_replacer):
        """The replacer witness is a member and e^R F - E is PSD."""
        for _ in range(5):
            e = random_channel(2, 2, rng)
            rob = log_robustness(e, qubit_replacer)
            assert membership(rob.witness, qubit_replacer)[0]
            assert rob.certificate >= -1e-9

    def test_bracket_for_larger_alphabets(self, rng):
        """Three or more letters give a valid bracket around the value."""
        e = random_channel(3, 2, rng)
        rob = log_robustness(e, FreeSetDescriptor.replacer(3, 2))
        assert rob.lower <= rob.upper + 1e-12
        assert rob.certificate >= -1e-9

    def test_fixed_state_robustness(self, flip):
        """A fixed free state reduces to the letterwise D_max against it."""
        rob = log_robustness(flip, FreeSetDescriptor.lifted("fixed_state", 2, 2))
        assert math.isclose(rob.value, LN2, abs_tol=1e-12)

    def test_incoherent_robustness_is_not_certified(self):
        """Families without a certified D_max routine say so."""
        with pytest.raises(UnsupportedSetKind):
            log_robustness(catalogue.plus_channel(), FreeSetDescriptor.lifted("incoherent", 2, 2))

    def test_ppt_output_has_no_robustness_routine(self):
        """PPT output sets only support relative entropy."""
        with pytest.raises(UnsupportedSetKind):
            log_robustness(catalogue.bell_channel(), FreeSetDescriptor.ppt_output(2))


class TestStateSets:
    """Test relative entropy to state sets."""

    def test_product_with_fixed_marginal_is_mutual_information(self, rng):
        """A product state has zero distance to product states."""
        rho = random_density(2, rng).tensor(random_density(2, rng))
        value, _ = min_relative_entropy_to_set(rho, "product_with_fixed_marginal", (2, 2))
        assert abs(value) < 1e-10

    def test_replacer_channel_shape(self, rng):
        """replacer_channel repeats one state on every letter."""
        sigma = random_density(2, rng).matrix
        f = replacer_channel(sigma, 3)
        assert f.shape == (3, 2)
        assert np.allclose(f.outputs[2], sigma)
