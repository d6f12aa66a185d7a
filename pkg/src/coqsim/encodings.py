"""Logical qubits on coherent states.

Two encodings are supported: logical 0/1 as |-alpha>/|alpha> ("pm") and as
vacuum/|2 alpha> ("zeroalpha").  Both need the same normalization factor
because the displacement D(alpha) translates one into the other exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import CoherentDensity, CoherentKet

PM = "pm"
ZERO_ALPHA = "zeroalpha"
ENCODINGS = (PM, ZERO_ALPHA)

#: below this the requested qubit is numerically the null state
DEGENERATE_TOL = 1e-14
#: tolerance for deciding a term amplitude sits on a logical basis point
SPAN_TOL = 1e-12


class DegenerateQubitError(ValueError):
    """(mu, nu, alpha) describe a state with vanishing norm, not a qubit."""


class UnsupportedStateError(ValueError):
    """State is not in the logical span the operation is defined on."""


@dataclass(frozen=True)
class QubitSpec:
    """Logical content (mu, nu), carrier amplitude and encoding of one qubit.

    mu multiplies logical 0, nu logical 1; |mu|^2 + |nu|^2 must be 1.
    alpha is stored per qubit because protocols change it mid-flight.
    """

    mu: complex
    nu: complex
    alpha: float
    encoding: str = PM

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if abs(abs(self.mu) ** 2 + abs(self.nu) ** 2 - 1.0) > 1e-12:
            raise ValueError("|mu|^2 + |nu|^2 must equal 1")

    def logical_amps(self) -> tuple[complex, complex]:
        """Carrier amplitudes of logical 0 and logical 1."""
        if self.encoding == PM:
            return -self.alpha, self.alpha
        return 0.0, 2.0 * self.alpha

    def with_alpha(self, alpha: float) -> "QubitSpec":
        return QubitSpec(self.mu, self.nu, alpha, self.encoding)

    def z_flipped(self) -> "QubitSpec":
        """Logical Z at the spec level: nu -> -nu."""
        return QubitSpec(self.mu, -self.nu, self.alpha, self.encoding)

    def x_flipped(self) -> "QubitSpec":
        return QubitSpec(self.nu, self.mu, self.alpha, self.encoding)

    def to_text(self) -> str:
        """CLI text form `mu_re,mu_im,nu_re,nu_im,alpha,encoding`."""
        m, n = complex(self.mu), complex(self.nu)
        return f"{m.real:.17g},{m.imag:.17g},{n.real:.17g},{n.imag:.17g},{self.alpha:.17g},{self.encoding}"

    @classmethod
    def from_text(cls, text: str) -> "QubitSpec":
        parts = text.strip().split(",")
        if len(parts) != 6:
            raise ValueError("expected mu_re,mu_im,nu_re,nu_im,alpha,encoding")
        mr, mi, nr, ni, a = (float(p) for p in parts[:5])
        return cls(complex(mr, mi), complex(nr, ni), a, parts[5].strip().lower())


def norm_factor(alpha: float, mu: complex, nu: complex) -> float:
    """N = 1 + exp(-2 alpha^2) (mu conj(nu) + conj(mu) nu); same for both encodings."""
    return 1.0 + math.exp(-2.0 * alpha * alpha) * 2.0 * (mu * np.conj(nu)).real


def make_qubit(spec: QubitSpec) -> CoherentKet:
    """Build the normalized one-mode carrier state for a qubit spec."""
    n = norm_factor(spec.alpha, spec.mu, spec.nu)
    if n <= DEGENERATE_TOL:
        raise DegenerateQubitError(
            f"norm factor {n:.3e} vanishes for (mu={spec.mu}, nu={spec.nu}, alpha={spec.alpha})")
    a0, a1 = spec.logical_amps()
    coeffs = np.array([spec.mu, spec.nu], dtype=complex) / math.sqrt(n)
    return CoherentKet(coeffs, np.array([[a0], [a1]], dtype=complex))


def convert_encoding(state: CoherentKet, source: str, target: str, alpha: float,
                     mode: int = 0) -> CoherentKet:
    """Translate between the two encodings by displacing the carrier mode."""
    for e in (source, target):
        if e not in ENCODINGS:
            raise ValueError(f"unknown encoding {e!r}")
    if source == target:
        return state
    if source == PM:  # -alpha -> 0, +alpha -> 2 alpha
        return state.displace(mode, alpha)
    return state.displace(mode, -alpha)


def logical_X(state: CoherentKet, encoding: str, alpha: float, mode: int = 0) -> CoherentKet:
    """Physical bit flip.

    pm: half-cycle rotation exp(i pi n).  zeroalpha: displace by -2 alpha,
    then the same rotation; both are exact unitaries on the carrier.
    """
    if encoding == PM:
        return state.phase_rotation(mode, math.pi)
    if encoding == ZERO_ALPHA:
        return state.displace(mode, -2.0 * alpha).phase_rotation(mode, math.pi)
    raise ValueError(f"unknown encoding {encoding!r}")


def logical_Z(spec: QubitSpec) -> QubitSpec:
    """Z at the spec level (nu sign flip)."""
    return spec.z_flipped()


def _on_point(values: np.ndarray, point: complex) -> np.ndarray:
    return np.abs(values - point) <= SPAN_TOL


def logical_Z_physical(state: CoherentKet, encoding: str, alpha: float,
                       mode: int = 0, strict: bool = True) -> CoherentKet:
    """Coefficient-level Z on a state lying in the logical span.

    Negates the coefficient of every term whose carrier amplitude is the
    logical-1 point.  With strict=True (the default) any term outside the
    span raises UnsupportedStateError; strict=False leaves such terms
    untouched, which is what the teleportation-based Z does to the
    exponentially suppressed residue left behind by an undetected error.
    """
    if encoding == PM:
        zero_pt, one_pt = -alpha + 0j, alpha + 0j
    elif encoding == ZERO_ALPHA:
        zero_pt, one_pt = 0j, 2.0 * alpha + 0j
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    a = state.amps[:, mode]
    on_one = _on_point(a, one_pt)
    if strict and not np.all(on_one | _on_point(a, zero_pt)):
        raise UnsupportedStateError(
            "state has carrier amplitudes outside the logical span")
    coeffs = state.coeffs.copy()
    coeffs[on_one] *= -1.0
    return CoherentKet(coeffs, state.amps)


def qubit_fidelity(state: CoherentKet | CoherentDensity, spec: QubitSpec) -> float:
    """Overlap of a state (pure or dyad-form mixed) with the spec's carrier.

    Ket inputs are normalized first: coefficient-level maps like the
    physical Z change the norm slightly because the carriers overlap.
    """
    target = make_qubit(spec)
    if isinstance(state, CoherentDensity):
        return state.fidelity(target)
    return abs(target.inner(state.normalize())) ** 2
