"""Invariant suite behind `coqsim validate`.

Each check reproduces one of the library's structural guarantees and
returns its measured deviation next to the allowed bound, so a regression
shows up as a number, not just a boolean.  The checks mirror the pytest
suite at smoke-test sizes; the full suite remains the reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ecc, encodings as enc, fock, protocols as pr
from .loss import ChannelParams, channel_mixture, error_prob, transmit
from .states import CoherentKet


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.bound


_CHECKS: list[tuple[str, Callable[[], tuple[float, float]]]] = []


def _check(name: str):
    def wrap(fn):
        _CHECKS.append((name, fn))
        return fn
    return wrap


def _random_state(rng, modes=3, terms=5, amp=3.0) -> CoherentKet:
    c = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    a = amp * (rng.uniform(-1, 1, size=(terms, modes))
               + 1j * rng.uniform(-1, 1, size=(terms, modes)))
    return CoherentKet(c, a).normalize()


def _random_spec(rng, alpha=None, encoding=enc.PM) -> enc.QubitSpec:
    v = rng.normal(size=4)
    mu, nu = complex(v[0], v[1]), complex(v[2], v[3])
    n = math.sqrt(abs(mu) ** 2 + abs(nu) ** 2)
    a = float(rng.uniform(1.0, 4.0)) if alpha is None else alpha
    return enc.QubitSpec(mu / n, nu / n, a, encoding)


@_check("unitaries preserve the Gram norm")
def _unitarity():
    rng = np.random.default_rng(101)
    dev = 0.0
    for _ in range(20):
        s = _random_state(rng, modes=4, terms=8, amp=4.0)
        s = s.displace(0, complex(rng.normal(), rng.normal()))
        s = s.beam_splitter(1, 2, rng.uniform(0, math.pi))
        s = s.ibeam_splitter(0, 3, rng.uniform(0, math.pi))
        s = s.phase_rotation(2, rng.uniform(0, 2 * math.pi))
        dev = max(dev, abs(s.norm_sq() - 1.0))
    return dev, 1e-12


@_check("beam splitters compose by angle addition")
def _bs_compose():
    rng = np.random.default_rng(102)
    dev = 0.0
    for _ in range(10):
        s = _random_state(rng, modes=2, terms=4)
        t1, t2 = rng.uniform(0, 1.2, size=2)
        a = s.beam_splitter(0, 1, t1).beam_splitter(0, 1, t2)
        b = s.beam_splitter(0, 1, t1 + t2)
        dev = max(dev, float(np.max(np.abs(a.amps - b.amps))),
                  float(np.max(np.abs(a.coeffs - b.coeffs))))
    return dev, 1e-12


@_check("displacements compose with the canonical phase")
def _disp_phase():
    rng = np.random.default_rng(103)
    dev = 0.0
    for _ in range(10):
        g = complex(rng.normal(), rng.normal())
        d = complex(rng.normal(), rng.normal())
        s = _random_state(rng, modes=1, terms=3)
        two = s.displace(0, g).displace(0, d)
        one = s.displace(0, g + d)
        phase = np.exp(0.5 * (d * np.conj(g) - np.conj(d) * g))
        dev = max(dev, float(np.max(np.abs(two.coeffs - phase * one.coeffs))))
    return dev, 1e-12


@_check("photon-count probabilities are complete")
def _completeness():
    rng = np.random.default_rng(104)
    s = _random_state(rng, modes=2, terms=5, amp=2.0)
    probs, tail = s.photon_count_distribution(0)
    return abs(probs.sum() + tail - 1.0) + tail, 2e-12


@_check("parity equals the even/odd count sums")
def _parity_sums():
    rng = np.random.default_rng(105)
    dev = 0.0
    for _ in range(5):
        s = _random_state(rng, modes=2, terms=4, amp=2.0)
        pe, po = s.parity_probabilities(0)
        probs, tail = s.photon_count_distribution(0)
        dev = max(dev, abs(pe - probs[0::2].sum()), abs(po - probs[1::2].sum()))
    return dev, 1e-10


@_check("coherent algebra matches the Fock oracle on random states")
def _oracle_random_ops():
    rng = np.random.default_rng(106)
    dev = 0.0
    for _ in range(4):
        s = _random_state(rng, modes=2, terms=3, amp=1.5)
        s2 = s.beam_splitter(0, 1, 0.7).displace(0, 0.3 - 0.2j).phase_rotation(1, 1.1)
        f, _ = fock.from_coherent_ket(s)
        f = f.apply_beam_splitter(0, 1, 0.7)
        f = f.displace(0, 0.3 - 0.2j).phase_rotation(1, 1.1)
        ref, _ = fock.from_coherent_ket(s2, cutoff=f.cutoff)
        dev = max(dev, abs(abs(f.inner(ref)) - 1.0))
    return dev, 1e-8


@_check("oracle beam splitter is unitary on the low block")
def _oracle_unitary():
    n = 25
    u = fock.beam_splitter_matrix(0.9, n)
    low = (n + 1) * (n + 1) // 2
    defect = u.conj().T @ u - np.eye(u.shape[0])
    return float(np.max(np.abs(defect[:low, :low]))), 1e-10


@_check("teleport outcome statistics match the Fock oracle")
def _oracle_teleport():
    alpha = 1.2
    spec = enc.QubitSpec(0.6, 0.8, alpha, enc.PM)
    q = enc.make_qubit(spec)
    st = q.tensor(pr.make_bell(pr.BellSpec("symmetric", alpha)))
    st = st.beam_splitter(1, 0, math.pi / 4)
    fv, _ = fock.from_coherent_ket(st)
    dev = 0.0
    probs0, _ = st.photon_count_distribution(0, 12, max_tail=1.0)
    dist_f = fv.number_distribution(0)
    for n in range(12):
        dev = max(dev, abs(probs0[n] - dist_f[n]))
    return dev, 1e-6


@_check("normalization factor is encoding independent and near 1")
def _norm_factor():
    dev = 0.0
    for alpha in (2.0, 2.5, 3.0, 4.0):
        for mu, nu in ((0.6, 0.8), (1 / math.sqrt(2), 1 / math.sqrt(2))):
            dev = max(dev, abs(enc.norm_factor(alpha, mu, nu) - 1.0))
    return dev, 7e-4


@_check("encoding conversion commutes with the Paulis")
def _convert_commute():
    rng = np.random.default_rng(107)
    dev = 0.0
    for _ in range(6):
        spec = _random_spec(rng)
        q = enc.make_qubit(spec)
        a = spec.alpha
        lhs = enc.convert_encoding(enc.logical_X(q, enc.PM, a), enc.PM, enc.ZERO_ALPHA, a)
        rhs = enc.logical_X(enc.convert_encoding(q, enc.PM, enc.ZERO_ALPHA, a),
                            enc.ZERO_ALPHA, a)
        dev = max(dev, 1.0 - abs(lhs.normalize().inner(rhs.normalize())) ** 2)
    return dev, 1e-10


@_check("channel mixture weight equals the closed-form flip probability")
def _pe_grid():
    dev = 0.0
    for alpha in (0.5, 1.0, 2.0, 3.0):
        for eta in (0.3, 0.5, 0.8, 1.0):
            mix, _, _, rho = channel_mixture(
                enc.QubitSpec(0.6, 0.8, alpha, enc.PM), eta)
            dev = max(dev, abs(mix.p_z_error - error_prob(alpha, eta)))
            dev = max(dev, abs(rho.trace().real - 1.0))
    return dev, 1e-12


@_check("traced channel output equals the dyad mixture")
def _mixture_equals_trace():
    dev = 0.0
    for alpha, eta in ((1.5, 0.7), (2.0, 0.5)):
        spec = enc.QubitSpec(0.6, 0.8j, alpha, enc.PM)
        _, _, _, rho = channel_mixture(spec, eta)
        st, env = transmit(enc.make_qubit(spec), 0, ChannelParams.from_eta(eta))
        rho2 = st.trace_out(env)
        a = alpha * math.sqrt(eta)
        for x in (-a, a, 0.3):
            for y in (-a, a, 0.3):
                dev = max(dev, abs(rho.matrix_element([x], [y])
                                   - rho2.matrix_element([x], [y])))
    return dev, 1e-10


@_check("channel energy scales with the transmissivity")
def _energy():
    dev = 0.0
    for eta in (0.4, 0.9):
        st = CoherentKet.product([1.7])
        out, env = transmit(st, 0, ChannelParams.from_eta(eta))
        rho = out.trace_out(env)
        dev = max(dev, abs(rho.mean_photon(0) - eta * 1.7**2))
    return dev, 1e-10


@_check("successful teleportation is exact")
def _teleport_exact():
    rng = np.random.default_rng(108)
    dev = 0.0
    for _ in range(10):
        spec = _random_spec(rng)
        q = enc.make_qubit(spec)
        rec, out = pr.teleport(q, pr.BellSpec("symmetric", spec.alpha), enc.PM, rng)
        if rec.succeeded:
            dev = max(dev, 1.0 - abs(q.inner(out.normalize())) ** 2)
    return dev, 1e-12


@_check("the two teleportation detectors never both fire")
def _exclusivity():
    spec = enc.QubitSpec(0.6, 0.8, 2.0, enc.PM)
    st = enc.make_qubit(spec).tensor(pr.make_bell(pr.BellSpec("symmetric", 2.0)))
    st = st.beam_splitter(1, 0, math.pi / 4)
    p_both = 0.0
    for n1 in range(1, 14):
        p1, c1 = st.project_photon_count(0, n1)
        if c1 is None:
            continue
        d, _ = c1.photon_count_distribution(0)
        p_both += p1 * max(0.0, 1.0 - d[0])
    return p_both, 1e-12


@_check("teleportation success grows with amplitude")
def _success_monotone():
    r = 1 / math.sqrt(2)
    vals = [pr.teleport_success_prob(a, r, r, enc.PM)
            for a in np.arange(0.5, 4.05, 0.1)]
    worst = max(0.0, float(np.max(-np.diff(vals))))
    return worst, 0.0


@_check("both encodings share the success probability")
def _pm_equals_za():
    dev = 0.0
    for a, mu, nu in ((1.3, 0.6, 0.8), (2.0, 1 / math.sqrt(2), 1 / math.sqrt(2))):
        dev = max(dev, abs(pr.teleport_success_prob(a, mu, nu, enc.PM)
                           - pr.teleport_success_prob(a, mu, nu, enc.ZERO_ALPHA)))
    return dev, 1e-12


@_check("Hadamard report is self-consistent")
def _hadamard_self():
    spec = enc.QubitSpec(0.0, 1.0, 2.5, enc.ZERO_ALPHA)
    rep = pr.hadamard_report(2.5, spec)
    total = sum(p * f for _, _, p, f in rep.per_outcome)
    return abs(total - rep.average_fidelity), 1e-12


@_check("Bell states are swap symmetric")
def _bell_swap():
    b = pr.make_bell(pr.BellSpec("symmetric", 1.7))
    return 1.0 - abs(b.inner(b.permute_modes([1, 0]))) ** 2, 1e-12


@_check("encoder is linear on the logical branches")
def _encoder_linear():
    a = 1.4
    mu, nu = 0.6, 0.8j
    spec = enc.QubitSpec(mu, nu, math.sqrt(3) * a, enc.PM)
    whole = ecc.encode(enc.make_qubit(spec), 3)
    n = enc.norm_factor(math.sqrt(3) * a, mu, nu)
    minus = ecc.encode(CoherentKet.product([-math.sqrt(3) * a]), 3)
    plus = ecc.encode(CoherentKet.product([math.sqrt(3) * a]), 3)
    combo = CoherentKet(
        np.concatenate([mu / math.sqrt(n) * minus.coeffs, nu / math.sqrt(n) * plus.coeffs]),
        np.vstack([minus.amps, plus.amps]))
    return 1.0 - abs(whole.inner(combo)) ** 2, 1e-12


@_check("encoder conserves energy")
def _encoder_energy():
    a = 1.3
    spec = enc.QubitSpec(0.8, 0.6, math.sqrt(3) * a, enc.PM)
    qubit = enc.make_qubit(spec)
    st = ecc.encode(qubit, 3)
    total = sum(st.mean_photon(m) for m in range(3))
    # splitters conserve photon number; the input mean sits within the
    # basis-overlap correction of the nominal 3 a^2
    dev = abs(total - qubit.mean_photon(0))
    if abs(total - 3 * a * a) > 0.05:
        dev = max(dev, abs(total - 3 * a * a))
    return dev, 1e-10


@_check("a single flip fires exactly one comparison")
def _syndrome_local():
    a = 2.0
    spec = enc.QubitSpec(0.6, 0.8, math.sqrt(3) * a, enc.PM)
    st = ecc.encode(enc.make_qubit(spec), 3)
    st = ecc.apply_logical_H_blockwise(st, [0, 1, 2], a)
    st = enc.logical_Z_physical(st, enc.PM, a, mode=2)
    st = ecc.apply_logical_H_blockwise(st, [0, 1, 2], a)
    st = st.beam_splitter(1, 0, math.pi / 4)
    probs, _ = st.photon_count_distribution(1)
    return 1.0 - probs[0], 1e-12


@_check("block success probability reduces to the cubic form")
def _code_formula():
    rng = np.random.default_rng(109)
    dev = 0.0
    for p in rng.uniform(0, 1, size=50):
        dev = max(dev, abs(ecc.general_code_success(1, p) - ecc.code_success_prob(p)))
    return dev, 1e-15


@_check("larger blocks help below half and hurt above")
def _code_monotone():
    worst = 0.0
    for p in (0.05, 0.2, 0.35):
        vals = [ecc.general_code_success(n, p) for n in range(1, 5)]
        worst = max(worst, float(np.max(-np.diff(vals))))
    for p in (0.65, 0.9):
        vals = [ecc.general_code_success(n, p) for n in range(1, 5)]
        worst = max(worst, float(np.max(np.diff(vals))))
    return worst, 0.0


def run_all(verbose: bool = True) -> list[CheckResult]:
    results = []
    for name, fn in _CHECKS:
        dev, bound = fn()
        res = CheckResult(name, dev, bound)
        results.append(res)
        if verbose:
            flag = "PASS" if res.passed else "FAIL"
            print(f"[{flag}] {name}: deviation {dev:.3e} (bound {bound:.1e})")
    return results
