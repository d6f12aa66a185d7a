"""Photon-loss channel: beam-splitter coupling to a vacuum environment.

A fiber of length L with loss coefficient lam transmits the fraction
eta = exp(-lam L) of the energy.  A single beam splitter with
transmissivity eta captures any number of loss events, because the loss
mode is traced out afterwards.  The channel shrinks the carrier amplitude
from alpha to alpha sqrt(eta) and applies a logical phase flip with
probability p = (1 - exp(-2 (1-eta) alpha^2)) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import encodings as enc
from .states import CoherentDensity, CoherentKet

#: typical loss of high-grade commercial fiber, 1/km
DEFAULT_LOSS_PER_KM = 0.06


@dataclass(frozen=True)
class ChannelParams:
    """Fiber loss parameters; eta is kept consistent with lam and length."""

    lam: float = DEFAULT_LOSS_PER_KM
    length: float = 0.0
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if abs(self.eta - math.exp(-self.lam * self.length)) > 1e-15:
            raise ValueError("eta inconsistent with lam and length")

    @classmethod
    def from_fiber(cls, lam: float, length: float) -> "ChannelParams":
        if lam < 0 or length < 0:
            raise ValueError("lam and length must be nonnegative")
        return cls(lam=lam, length=length, eta=math.exp(-lam * length))

    @classmethod
    def from_eta(cls, eta: float) -> "ChannelParams":
        if not 0.0 < eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if eta == 1.0:
            return cls(lam=0.0, length=0.0, eta=1.0)
        # represent as the default fiber at the equivalent length
        return cls(lam=DEFAULT_LOSS_PER_KM, length=-math.log(eta) / DEFAULT_LOSS_PER_KM,
                   eta=eta)

    @property
    def lambda_l(self) -> float:
        return self.lam * self.length


@dataclass(frozen=True)
class ZErrorMixture:
    """Closed-form channel output: amplitude shrink plus a Bernoulli phase flip."""

    p_no_error: float
    p_z_error: float
    surviving_alpha: float

    def __post_init__(self):
        for p in (self.p_no_error, self.p_z_error):
            if not -1e-12 <= p <= 1.0 + 1e-12:
                raise ValueError("probabilities must lie in [0, 1]")
        if abs(self.p_no_error + self.p_z_error - 1.0) > 1e-12:
            raise ValueError("branch probabilities must sum to 1")


def error_prob(alpha: float, eta: float) -> float:
    """Phase-flip probability (1 - exp(-2 (1-eta) alpha^2)) / 2; in [0, 1/2)."""
    return 0.5 * (1.0 - math.exp(-2.0 * (1.0 - eta) * alpha * alpha))


def transmit(state: CoherentKet, mode: int, params: ChannelParams) -> tuple[CoherentKet, int]:
    """Send one mode through the loss channel, keeping the purification.

    Appends a vacuum environment mode and couples it to `mode` with a beam
    splitter of transmissivity eta.  Returns (state, environment mode index);
    the environment is kept so that all downstream statistics stay exact,
    and can be traced out when a mixed-state view is needed.
    """
    out = state.tensor(CoherentKet.vacuum(1))
    env = out.modes - 1
    theta = math.acos(math.sqrt(params.eta))
    return out.beam_splitter(mode, env, theta), env


def multi_mode_transmit(state: CoherentKet, modes: list[int],
                        params: ChannelParams) -> tuple[CoherentKet, list[int]]:
    """Independent loss on each listed mode; one environment mode per fiber."""
    envs = []
    for m in modes:
        state, e = transmit(state, m, params)
        envs.append(e)
    return state, envs


def channel_mixture(spec: enc.QubitSpec, eta: float) -> tuple[ZErrorMixture, CoherentKet, CoherentKet, CoherentDensity]:
    """Exact decomposition of the transmitted qubit into no-error/Z branches.

    Returns the branch probabilities, both normalized branch states at the
    surviving amplitude, and the dyad-form density

        rho = [ (1-p) u+ x u+^dag  +  p uZ x uZ^dag ] / N(alpha)

    built from the unnormalized branch kets.  That density equals the
    partial trace of transmit(...) exactly, for every alpha and eta.
    """
    p = error_prob(spec.alpha, eta)
    surv = spec.alpha * math.sqrt(eta)
    spec_s = spec.with_alpha(surv)
    branch_plus = enc.make_qubit(spec_s)
    branch_z = enc.make_qubit(spec_s.z_flipped())
    mix = ZErrorMixture(1.0 - p, p, surv)

    a0, a1 = spec_s.logical_amps()
    n_in = enc.norm_factor(spec.alpha, spec.mu, spec.nu)
    mu, nu = spec.mu, spec.nu
    amps = np.array([[a0], [a1]], dtype=complex)
    weights = []
    kets = []
    bras = []
    for w, sgn in ((1.0 - p, 1.0), (p, -1.0)):
        c = np.array([mu, sgn * nu], dtype=complex)
        for j in range(2):
            for k in range(2):
                weights.append(w * c[j] * np.conj(c[k]) / n_in)
                kets.append(amps[j])
                bras.append(amps[k])
    rho = CoherentDensity(np.array(weights), np.array(kets), np.array(bras))
    return mix, branch_plus, branch_z, rho


def encoding_equivalence_witness(alpha: float, eta: float, mu: complex, nu: complex) -> float:
    """Deviation 1 - |<lhs|rhs>|^2 between the two transmitted encodings.

    lhs: transmit the pm qubit, then displace the carrier by alpha sqrt(eta)
    and the environment by alpha sqrt(1-eta).  rhs: transmit the zeroalpha
    qubit directly.  The displacements are unitary, so the information
    content agrees; the witness is ~0 at machine precision.
    """
    params = ChannelParams.from_eta(eta)
    pm = enc.make_qubit(enc.QubitSpec(mu, nu, alpha, enc.PM))
    lhs, env = transmit(pm, 0, params)
    lhs = lhs.displace(0, alpha * math.sqrt(eta)).displace(env, alpha * math.sqrt(1.0 - eta))
    za = enc.make_qubit(enc.QubitSpec(mu, nu, alpha, enc.ZERO_ALPHA))
    rhs, _ = transmit(za, 0, params)
    return 1.0 - abs(lhs.inner(rhs)) ** 2
