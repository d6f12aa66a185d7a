import math

import numpy as np
import pytest
from scipy.stats import chisquare, poisson

from coqsim import CoherentDensity, CoherentKet, fidelity_pure, number_amplitude, overlap
from coqsim.states import TruncationError

from conftest import random_state


class TestOverlap:
    def test_self_overlap_is_one(self):
        assert overlap([1.3 + 0.4j], [1.3 + 0.4j]) == pytest.approx(1.0)

    def test_opposite_amplitudes(self):
        # <−α|α> = exp(−2 α²), the basis non-orthogonality scale
        assert overlap([-2.0], [2.0]) == pytest.approx(math.exp(-8.0), abs=1e-16)

    def test_vacuum_against_coherent(self):
        assert overlap([0.0], [1.0]) == pytest.approx(math.exp(-0.5))

    def test_multimode_is_a_product(self):
        a, b = 0.7 - 0.1j, -1.2 + 0.9j
        assert overlap([a, b], [b, a]) == pytest.approx(
            overlap([a], [b]) * overlap([b], [a]))

    def test_magnitude_bounded_by_one(self, rng):
        for _ in range(50):
            x = rng.normal(size=3) + 1j * rng.normal(size=3)
            y = rng.normal(size=3) + 1j * rng.normal(size=3)
            assert abs(overlap(x, y)) <= 1.0 + 1e-12

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            overlap([1.0], [1.0, 2.0])


class TestDisplacement:
    def test_vacuum_to_coherent(self):
        s = CoherentKet.vacuum().displace(0, 1.2 + 0.3j)
        assert s.amps[0, 0] == pytest.approx(1.2 + 0.3j)
        assert s.coeffs[0] == pytest.approx(1.0)

    def test_inverse_pair_is_coefficient_exact(self, rng):
        s = random_state(rng, modes=2, terms=4)
        g = 0.8 - 1.1j
        back = s.displace(0, g).displace(0, -g)
        assert np.allclose(back.coeffs, s.coeffs, atol=1e-14)
        assert np.allclose(back.amps, s.amps, atol=1e-14)

    def test_real_displacement_has_no_phase(self):
        s = CoherentKet.product([-1.5]).displace(0, 3.0)
        assert s.amps[0, 0] == pytest.approx(1.5)
        assert s.coeffs[0] == pytest.approx(1.0)

    def test_composition_phase_law(self, rng):
        for _ in range(10):
            g = complex(rng.normal(), rng.normal())
            d = complex(rng.normal(), rng.normal())
            s = random_state(rng, modes=1, terms=3)
            two = s.displace(0, g).displace(0, d)
            one = s.displace(0, g + d)
            phase = np.exp(0.5 * (d * np.conj(g) - np.conj(d) * g))
            assert np.allclose(two.coeffs, phase * one.coeffs, atol=1e-12)

    def test_unitary(self, rng):
        s = random_state(rng, modes=2, terms=5)
        assert s.displace(1, 2.0 - 0.7j).norm_sq() == pytest.approx(1.0, abs=1e-12)


class TestBeamSplitter:
    def test_zero_angle_is_identity(self, rng):
        s = random_state(rng, modes=2, terms=4)
        out = s.beam_splitter(0, 1, 0.0)
        assert np.allclose(out.amps, s.amps) and np.allclose(out.coeffs, s.coeffs)

    def test_transmissivity_action(self):
        # |α>|β> -> |√η α − √(1−η) β> |√η β + √(1−η) α>
        eta = 0.7
        theta = math.acos(math.sqrt(eta))
        s = CoherentKet.product([1.5, -0.6 + 0.2j]).beam_splitter(0, 1, theta)
        t, r = math.sqrt(eta), math.sqrt(1 - eta)
        assert s.amps[0, 0] == pytest.approx(t * 1.5 - r * (-0.6 + 0.2j))
        assert s.amps[0, 1] == pytest.approx(t * (-0.6 + 0.2j) + r * 1.5)

    def test_cat_and_vacuum_make_bell(self):
        a = 1.3
        cat = CoherentKet.superposition([(1.0, [-math.sqrt(2) * a]),
                                         (1.0, [math.sqrt(2) * a])])
        bell = cat.tensor(CoherentKet.vacuum()).beam_splitter(0, 1, math.pi / 4)
        target = CoherentKet.superposition([(1.0, [-a, -a]), (1.0, [a, a])])
        assert abs(bell.inner(target)) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_angle_addition(self, rng):
        s = random_state(rng, modes=2, terms=4)
        a = s.beam_splitter(0, 1, 0.3).beam_splitter(0, 1, 0.9)
        b = s.beam_splitter(0, 1, 1.2)
        assert np.allclose(a.amps, b.amps, atol=1e-12)
        assert np.allclose(a.coeffs, b.coeffs, atol=1e-12)

    def test_same_mode_rejected(self, rng):
        with pytest.raises(ValueError):
            random_state(rng, modes=2).beam_splitter(1, 1, 0.3)


class TestIBeamSplitter:
    def test_zero_angle_is_identity(self, rng):
        s = random_state(rng, modes=2, terms=3)
        out = s.ibeam_splitter(0, 1, 0.0)
        assert np.allclose(out.amps, s.amps)

    def test_half_pi_swaps_with_i(self):
        s = CoherentKet.product([0.8, -0.3]).ibeam_splitter(0, 1, math.pi / 2)
        assert s.amps[0, 0] == pytest.approx(-0.3j)
        assert s.amps[0, 1] == pytest.approx(0.8j)

    def test_small_angle_amplitudes(self):
        # the angle used by the Hadamard gate at alpha = 2
        alpha, theta = 2.0, math.pi / 8
        s = CoherentKet.product([2 * alpha, 2 * alpha]).ibeam_splitter(0, 1, theta)
        expect = 2 * alpha * math.cos(theta) + 2j * alpha * math.sin(theta)
        assert s.amps[0, 0] == pytest.approx(expect)
        assert s.amps[0, 1] == pytest.approx(expect)

    def test_unitary(self, rng):
        s = random_state(rng, modes=3, terms=5)
        assert s.ibeam_splitter(0, 2, 0.77).norm_sq() == pytest.approx(1.0, abs=1e-12)


class TestPhaseRotation:
    def test_pi_negates_amplitude(self):
        s = CoherentKet.product([1.7]).phase_rotation(0, math.pi)
        assert s.amps[0, 0] == pytest.approx(-1.7)

    def test_two_pi_is_identity(self, rng):
        s = random_state(rng, modes=1, terms=3)
        out = s.phase_rotation(0, 2 * math.pi)
        assert np.allclose(out.amps, s.amps, atol=1e-12)

    def test_pi_twice_is_identity(self, rng):
        s = random_state(rng, modes=2, terms=3)
        out = s.phase_rotation(1, math.pi).phase_rotation(1, math.pi)
        assert abs(out.inner(s)) ** 2 == pytest.approx(1.0, abs=1e-12)


class TestNumberAmplitude:
    def test_vacuum_overlap(self):
        assert number_amplitude(0.0, 0) == pytest.approx(1.0)
        assert number_amplitude(0.0, 3) == 0.0

    def test_normalization_sums_to_one(self):
        total = sum(abs(number_amplitude(2.0, n)) ** 2 for n in range(61))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_poisson_statistics(self):
        alpha = 1.3 + 0.6j
        mean = abs(alpha) ** 2
        for n in (0, 2, 7, 25):
            assert abs(number_amplitude(alpha, n)) ** 2 == pytest.approx(
                poisson.pmf(n, mean), rel=1e-10)

    def test_large_count_stays_finite(self):
        val = number_amplitude(3.0, 400)
        assert np.isfinite(val) and abs(val) < 1e-200 or val == 0.0

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            number_amplitude(1.0, -1)


class TestPhotonCountDistribution:
    def test_vacuum_mode(self):
        probs, tail = CoherentKet.vacuum(2).photon_count_distribution(0)
        assert probs[0] == pytest.approx(1.0)
        assert probs[1:].sum() == pytest.approx(0.0, abs=1e-14)

    def test_even_cat_has_no_odd_counts(self):
        cat = CoherentKet.superposition([(1.0, [-1.5]), (1.0, [1.5])])
        probs, _ = cat.photon_count_distribution(0)
        assert probs[1::2].sum() == pytest.approx(0.0, abs=1e-14)

    def test_odd_cat_has_no_even_counts(self):
        cat = CoherentKet.superposition([(1.0, [-1.5]), (-1.0, [1.5])])
        probs, _ = cat.photon_count_distribution(0)
        assert probs[0::2].sum() == pytest.approx(0.0, abs=1e-14)

    def test_completeness_with_reported_tail(self, rng):
        s = random_state(rng, modes=2, terms=4, amp=2.0)
        probs, tail = s.photon_count_distribution(1)
        assert probs.sum() + tail == pytest.approx(1.0, abs=1e-12)
        assert tail < 1e-12

    def test_small_cutoff_raises(self):
        s = CoherentKet.product([3.0, 0.0])
        with pytest.raises(TruncationError):
            s.photon_count_distribution(0, n_max=2, max_tail=1e-9)


class TestProjection:
    def test_vacuum_half(self):
        s = CoherentKet.product([1.2, 0.0])
        p, out = s.project_photon_count(1, 0)
        assert p == pytest.approx(1.0)
        assert out.amps[0, 0] == pytest.approx(1.2)

    def test_completeness(self, rng):
        s = random_state(rng, modes=2, terms=4, amp=1.5)
        probs, tail = s.photon_count_distribution(0)
        total = 0.0
        for n in range(probs.size):
            p, _ = s.project_photon_count(0, n)
            total += p
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_zero_probability_outcome(self):
        cat = CoherentKet.superposition([(1.0, [-1.0, 0.3]), (1.0, [1.0, 0.3])])
        p, out = cat.project_photon_count(0, 1)  # even cat: odd count impossible
        assert p == 0.0 and out is None

    def test_unnormalized_state_rejected(self):
        s = CoherentKet([2.0], np.array([[1.0, 0.5]]))
        with pytest.raises(ValueError):
            s.project_photon_count(0, 0)

    def test_measure_count_matches_projection(self, rng):
        s = random_state(rng, modes=2, terms=3, amp=1.5)
        n, p, out = s.measure_count(0, rng)
        p_ref, out_ref = s.project_photon_count(0, n)
        assert p == pytest.approx(p_ref, rel=1e-12)
        assert abs(out.inner(out_ref)) ** 2 == pytest.approx(1.0, abs=1e-12)


class TestParity:
    def test_coherent_state_closed_form(self):
        s = CoherentKet.product([1.0])
        pe, po = s.parity_probabilities(0)
        assert pe == pytest.approx((1 + math.exp(-2)) / 2, abs=1e-14)
        assert pe + po == pytest.approx(1.0, abs=1e-12)

    def test_even_cat(self):
        cat = CoherentKet.superposition([(1.0, [-2.0]), (1.0, [2.0])])
        pe, po = cat.parity_probabilities(0)
        assert pe == pytest.approx(1.0, abs=1e-12)
        assert po == pytest.approx(0.0, abs=1e-12)

    def test_odd_cat(self):
        cat = CoherentKet.superposition([(1.0, [-2.0]), (-1.0, [2.0])])
        pe, po = cat.parity_probabilities(0)
        assert po == pytest.approx(1.0, abs=1e-12)

    def test_matches_count_distribution(self, rng):
        s = random_state(rng, modes=2, terms=4, amp=2.0)
        pe, po = s.parity_probabilities(0)
        probs, tail = s.photon_count_distribution(0)
        assert pe == pytest.approx(probs[0::2].sum(), abs=1e-10)
        assert po == pytest.approx(probs[1::2].sum(), abs=1e-10)

    def test_parity_project_consistency(self, rng):
        s = random_state(rng, modes=2, terms=3, amp=1.5)
        pe, even = s.parity_project(0, 0)
        po, odd = s.parity_project(0, 1)
        assert pe + po == pytest.approx(1.0, abs=1e-12)
        probs = even.photon_count_distribution(0)[0]
        assert probs[1::2].sum() == pytest.approx(0.0, abs=1e-12)
        probs = odd.photon_count_distribution(0)[0]
        assert probs[0::2].sum() == pytest.approx(0.0, abs=1e-12)


class TestTraceOut:
    def test_vacuum_environment_leaves_pure_dyad(self, rng):
        q = random_state(rng, modes=1, terms=3)
        joint = q.tensor(CoherentKet.vacuum())
        rho = joint.trace_out(1)
        assert rho.trace().real == pytest.approx(1.0, abs=1e-10)
        assert rho.fidelity(q) == pytest.approx(1.0, abs=1e-10)

    def test_trace_and_hermiticity(self, rng):
        s = random_state(rng, modes=3, terms=4, amp=2.0)
        rho = s.trace_out(2)
        assert rho.trace().real == pytest.approx(1.0, abs=1e-10)
        assert rho.herm_defect() < 1e-10

    def test_nested_trace(self, rng):
        s = random_state(rng, modes=3, terms=3, amp=1.5)
        rho = s.trace_out(2).trace_out(1)
        assert rho.trace().real == pytest.approx(1.0, abs=1e-10)

    def test_mean_photon_of_coherent(self):
        s = CoherentKet.product([1.7, 0.4])
        assert s.mean_photon(0) == pytest.approx(1.7**2, abs=1e-12)
        rho = s.trace_out(1)
        assert rho.mean_photon(0) == pytest.approx(1.7**2, abs=1e-10)


class TestFidelityPure:
    def test_self_dyad(self, rng):
        q = random_state(rng, modes=2, terms=3)
        rho = CoherentDensity.from_ket(q)
        assert fidelity_pure(rho, q) == pytest.approx(1.0, abs=1e-10)

    def test_mode_mismatch_rejected(self, rng):
        rho = CoherentDensity.from_ket(random_state(rng, modes=2, terms=2))
        with pytest.raises(ValueError):
            fidelity_pure(rho, CoherentKet.vacuum(1))

    def test_bounded(self, rng):
        for _ in range(10):
            s = random_state(rng, modes=2, terms=4, amp=2.0)
            rho = s.trace_out(1)
            probe = random_state(rng, modes=1, terms=2, amp=2.0)
            f = fidelity_pure(rho, probe)
            assert -1e-10 <= f <= 1.0 + 1e-10


class TestSampling:
    def test_vacuum_always_zero(self, rng):
        s = CoherentKet.vacuum(1)
        assert all(s.sample_photon_count(0, rng) == 0 for _ in range(20))

    def test_even_cat_never_odd(self, rng):
        cat = CoherentKet.superposition([(1.0, [-2.0]), (1.0, [2.0])])
        draws = [cat.sample_photon_count(0, rng) for _ in range(500)]
        assert all(d % 2 == 0 for d in draws)

    def test_poisson_chi_square(self):
        rng = np.random.default_rng(7)
        s = CoherentKet.product([2.0])
        draws = np.array([s.sample_photon_count(0, rng) for _ in range(10_000)])
        edges = np.arange(12)
        observed = np.array([(draws == n).sum() for n in edges[:-1]]
                            + [(draws >= 11).sum()])
        expected = np.array([poisson.pmf(n, 4.0) for n in edges[:-1]]
                            + [poisson.sf(10, 4.0)]) * draws.size
        assert chisquare(observed, expected).pvalue > 0.01

    def test_deterministic_given_seed(self):
        s = CoherentKet.superposition([(1.0, [-1.5]), (0.5j, [1.5])])
        a = [s.sample_photon_count(0, np.random.default_rng(3)) for _ in range(5)]
        b = [s.sample_photon_count(0, np.random.default_rng(3)) for _ in range(5)]
        assert a == b


class TestStructure:
    def test_term_order_never_matters(self, rng):
        c = rng.normal(size=5) + 1j * rng.normal(size=5)
        a = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
        s1 = CoherentKet(c, a).normalize()
        perm = rng.permutation(5)
        s2 = CoherentKet(c[perm], a[perm]).normalize()
        assert s1.norm_sq() == pytest.approx(s2.norm_sq(), abs=1e-13)
        assert abs(s1.inner(s2)) ** 2 == pytest.approx(1.0, abs=1e-12)
        assert s1.parity_probabilities(0)[0] == pytest.approx(
            s2.parity_probabilities(0)[0], abs=1e-12)

    def test_duplicate_terms_merge(self):
        s = CoherentKet([1.0, 1.0], np.array([[0.5], [0.5]]))
        assert s.num_terms == 1
        assert s.coeffs[0] == pytest.approx(2.0)

    def test_near_duplicates_merge(self):
        s = CoherentKet([1.0, 1.0], np.array([[0.5], [0.5 + 1e-14]]))
        assert s.num_terms == 1

    def test_negligible_terms_pruned(self):
        s = CoherentKet([1.0, 1e-16], np.array([[0.5], [1.5]]))
        assert s.num_terms == 1

    def test_cancelling_terms_rejected_as_null(self):
        with pytest.raises(ValueError):
            CoherentKet([1.0, -1.0], np.array([[0.7], [0.7]]))

    def test_immutable(self, rng):
        s = random_state(rng)
        with pytest.raises(AttributeError):
            s.coeffs = None
        with pytest.raises((ValueError, RuntimeError)):
            s.amps[0, 0] = 99.0

    def test_permute_modes(self, rng):
        s = random_state(rng, modes=3, terms=3)
        p = s.permute_modes([2, 0, 1])
        assert np.allclose(p.amps[:, 0], s.amps[:, 2])
        assert p.permute_modes([1, 2, 0]).amps == pytest.approx(s.amps)

    def test_dump_format(self):
        s = CoherentKet([0.5 + 0.25j], np.array([[1.0 - 2.0j, 0.0 + 0.0j]]))
        assert s.dump() == "0.5 0.25 : 1.0 -2.0 ; 0.0 0.0"

    def test_partial_inner(self, rng):
        s = random_state(rng, modes=2, terms=3, amp=1.5)
        probe = random_state(rng, modes=1, terms=2, amp=1.5)
        rest = s.partial_inner(0, probe)
        # completeness: |<probe ⊗ .|s>|^2 summed over an orthonormal-ish
        # photon basis of the other mode equals the contracted norm
        total = rest.norm_sq()
        direct = 0.0
        probs, _ = s.photon_count_distribution(1)
        for n in range(probs.size):
            p, collapsed = s.project_photon_count(1, n)
            if collapsed is None:
                continue
            amp2 = abs(probe.inner(collapsed)) ** 2 * p
            direct += amp2
        assert total == pytest.approx(direct, abs=1e-10)
