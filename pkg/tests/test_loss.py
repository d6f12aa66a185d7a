import math

import numpy as np
import pytest

from coqsim import (
    ChannelParams,
    CoherentKet,
    QubitSpec,
    channel_mixture,
    encoding_equivalence_witness,
    error_prob,
    fidelity_pure,
    make_qubit,
    multi_mode_transmit,
    transmit,
)
from coqsim.encodings import PM, ZERO_ALPHA
from coqsim.loss import DEFAULT_LOSS_PER_KM

R = 1 / math.sqrt(2)


class TestChannelParams:
    def test_fiber_form(self):
        p = ChannelParams.from_fiber(0.06, 10.0)
        assert p.eta == pytest.approx(math.exp(-0.6))
        assert p.lambda_l == pytest.approx(0.6)

    def test_eta_form_round_trips(self):
        p = ChannelParams.from_eta(0.37)
        assert p.eta == 0.37
        assert math.exp(-p.lam * p.length) == pytest.approx(0.37, abs=1e-15)

    def test_inconsistent_eta_rejected(self):
        with pytest.raises(ValueError):
            ChannelParams(lam=0.06, length=10.0, eta=0.9)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            ChannelParams.from_eta(0.0)
        with pytest.raises(ValueError):
            ChannelParams.from_eta(1.2)

    def test_default_loss_coefficient(self):
        assert DEFAULT_LOSS_PER_KM == 0.06


class TestTransmit:
    def test_lossless_channel_is_identity(self):
        q = make_qubit(QubitSpec(R, R, 2.0, PM))
        out, env = transmit(q, 0, ChannelParams.from_eta(1.0))
        assert np.allclose(out.amps[:, env], 0.0)
        assert abs(out.trace_out(env).fidelity(q) - 1.0) < 1e-12

    def test_pm_two_branch_structure(self):
        # mu |-a sqrt(eta)>|-a sqrt(1-eta)> + nu |a sqrt(eta)>|a sqrt(1-eta)>
        eta = 0.7
        q = make_qubit(QubitSpec(0.6, 0.8, 2.0, PM))
        out, env = transmit(q, 0, ChannelParams.from_eta(eta))
        t, r = 2.0 * math.sqrt(eta), 2.0 * math.sqrt(1 - eta)
        assert sorted(np.round(out.amps[:, 0].real, 10)) == pytest.approx([-t, t])
        assert sorted(np.round(out.amps[:, env].real, 10)) == pytest.approx([-r, r])

    def test_zeroalpha_keeps_vacuum_branch_dark(self):
        eta = 0.6
        q = make_qubit(QubitSpec(0.6, 0.8, 1.5, ZERO_ALPHA))
        out, env = transmit(q, 0, ChannelParams.from_eta(eta))
        dark = np.abs(out.amps[:, 0]) < 1e-12
        assert dark.sum() == 1
        assert abs(out.amps[dark, env][0]) < 1e-12

    def test_multi_mode_appends_one_env_each(self):
        st = CoherentKet.product([1.0, -1.0])
        out, envs = multi_mode_transmit(st, [0, 1], ChannelParams.from_eta(0.8))
        assert out.modes == 4 and envs == [2, 3]


class TestErrorProb:
    def test_lossless_is_errorless(self):
        assert error_prob(2.0, 1.0) == 0.0

    def test_large_alpha_limit(self):
        assert error_prob(40.0, 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_fiber_example(self):
        eta = math.exp(-0.6)
        expected = 0.5 * (1 - math.exp(-8.0 * (1 - eta)))
        assert error_prob(2.0, eta) == pytest.approx(expected, abs=1e-15)

    def test_bounded_below_half(self):
        for alpha in (0.3, 1.0, 3.0):
            for eta in (0.01, 0.5, 0.99):
                assert 0.0 <= error_prob(alpha, eta) < 0.5


class TestChannelMixture:
    def test_lossless_weights(self):
        mix, _, _, _ = channel_mixture(QubitSpec(R, R, 2.0, PM), 1.0)
        assert mix.p_no_error == 1.0 and mix.p_z_error == 0.0

    def test_weight_equals_closed_form_on_grid(self):
        for alpha in (0.5, 1.0, 1.5, 2.0, 3.0):
            for eta in (0.3, 0.5, 0.8, 0.95, 1.0):
                mix, _, _, _ = channel_mixture(QubitSpec(0.6, 0.8, alpha, PM), eta)
                assert mix.p_z_error == pytest.approx(error_prob(alpha, eta), abs=1e-12)
                assert mix.p_no_error + mix.p_z_error == pytest.approx(1.0, abs=1e-12)

    def test_density_equals_traced_purification(self):
        for spec in (QubitSpec(R, R, 1.5, PM), QubitSpec(0.6, 0.8j, 2.0, PM)):
            eta = 0.7
            _, _, _, rho = channel_mixture(spec, eta)
            st, env = transmit(make_qubit(spec), 0, ChannelParams.from_eta(eta))
            traced = st.trace_out(env)
            a = spec.alpha * math.sqrt(eta)
            for x in (-a, a, 0.4):
                for y in (-a, a, 0.4):
                    assert rho.matrix_element([x], [y]) == pytest.approx(
                        traced.matrix_element([x], [y]), abs=1e-10)
            assert rho.trace().real == pytest.approx(1.0, abs=1e-10)

    def test_encodings_share_weights(self):
        pm, _, _, _ = channel_mixture(QubitSpec(R, R, 1.5, PM), 0.7)
        za, _, _, _ = channel_mixture(QubitSpec(R, R, 1.5, ZERO_ALPHA), 0.7)
        assert pm.p_z_error == pytest.approx(za.p_z_error, abs=1e-15)
        assert pm.surviving_alpha == pytest.approx(za.surviving_alpha)

    def test_branch_states_are_z_images(self):
        spec = QubitSpec(0.6, 0.8, 2.0, PM)
        _, plus, z_branch, _ = channel_mixture(spec, 0.8)
        a = 2.0 * math.sqrt(0.8)
        assert abs(plus.inner(make_qubit(spec.with_alpha(a)))) ** 2 == pytest.approx(1.0)
        assert abs(z_branch.inner(
            make_qubit(spec.with_alpha(a).z_flipped()))) ** 2 == pytest.approx(1.0)

    def test_equals_error_free_fidelity_structure(self):
        # weights (1-p, p) on the exactly built normalized branches give the
        # textbook survival fidelity for equator qubits at every alpha
        for alpha, eta in ((1.0, 0.6), (2.0, 0.8), (3.0, 0.9)):
            spec = QubitSpec(R, R, alpha, PM)
            mix, plus, z_branch, _ = channel_mixture(spec, eta)
            target = make_qubit(spec.with_alpha(alpha * math.sqrt(eta)))
            f = (mix.p_no_error * abs(target.inner(plus)) ** 2
                 + mix.p_z_error * abs(target.inner(z_branch)) ** 2)
            assert f == pytest.approx(1.0 - mix.p_z_error, abs=1e-12)

    def test_traced_fidelity_near_orthogonal_regime(self):
        # the exact traced state reproduces 1 - P_e once the carriers are
        # effectively orthogonal (corrections scale as exp(-2 eta alpha^2))
        alpha, eta = 4.0, 0.8
        spec = QubitSpec(R, R, alpha, PM)
        st, env = transmit(make_qubit(spec), 0, ChannelParams.from_eta(eta))
        rho = st.trace_out(env)
        target = make_qubit(spec.with_alpha(alpha * math.sqrt(eta)))
        assert fidelity_pure(rho, target) == pytest.approx(
            1.0 - error_prob(alpha, eta), abs=1e-10)


class TestEncodingEquivalence:
    def test_lossless(self):
        assert encoding_equivalence_witness(2.0, 1.0, R, R) < 1e-12

    def test_paper_grid(self):
        for alpha in (0.8, 1.5, 2.0, 3.0):
            for eta in (0.3, 0.5, 0.8, 0.99):
                for mu, nu in ((R, R), (0.6, 0.8), (0.28, math.sqrt(1 - 0.28**2))):
                    assert encoding_equivalence_witness(alpha, eta, mu, nu) < 1e-12


class TestMultiplicativity:
    def test_two_segments_compose(self):
        # eta1 then eta2 equals the single eta1*eta2 channel after tracing
        spec = QubitSpec(0.6, 0.8j, 1.5, PM)
        eta1, eta2 = 0.8, 0.7
        st, e1 = transmit(make_qubit(spec), 0, ChannelParams.from_eta(eta1))
        st, e2 = transmit(st, 0, ChannelParams.from_eta(eta2))
        two = st.trace_out(e2).trace_out(e1)
        single, env = transmit(make_qubit(spec), 0, ChannelParams.from_eta(eta1 * eta2))
        one = single.trace_out(env)
        a = 1.5 * math.sqrt(eta1 * eta2)
        for x in (-a, a, 0.2 - 0.1j):
            for y in (-a, a, 0.2 - 0.1j):
                assert two.matrix_element([x], [y]) == pytest.approx(
                    one.matrix_element([x], [y]), abs=1e-10)

    def test_energy_scales_with_eta(self):
        for eta in (0.35, 0.8):
            st = CoherentKet.product([1.7])
            out, env = transmit(st, 0, ChannelParams.from_eta(eta))
            assert out.trace_out(env).mean_photon(0) == pytest.approx(
                eta * 1.7**2, abs=1e-10)
            assert out.mean_photon(0) == pytest.approx(eta * 1.7**2, abs=1e-10)
