"""Brute-force engine in a truncated photon-number basis.

Everything here is dense linear algebra on arrays of shape (N+1,)**modes,
independent of the coherent-superposition algebra in `states`; the two are
cross-checked against each other throughout the test suite.  The supported
envelope is desk scale: at most 3 modes, cutoffs up to ~80 per mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.stats import poisson

from .states import CoherentDensity, CoherentKet, _number_amps


def coherent_tail(alpha: complex, cutoff: int) -> float:
    """Probability mass of |alpha> above photon number `cutoff`."""
    return float(poisson.sf(cutoff, abs(alpha) ** 2))


@dataclass(frozen=True)
class CutoffPolicy:
    """Rule mapping the largest amplitude in play to a per-mode cutoff."""

    tail_tolerance: float = 1e-12

    def cutoff_for(self, max_abs_alpha: float) -> int:
        m = float(max_abs_alpha) ** 2
        n = math.ceil(m + 10.0 * math.sqrt(m) + 20.0)
        while coherent_tail(max_abs_alpha, n) >= self.tail_tolerance:
            n = int(n * 1.2) + 5
        return n


def coherent_coeffs(alpha: complex, cutoff: int) -> np.ndarray:
    """Raw truncated number-basis coefficients of |alpha> (not renormalized)."""
    return _number_amps(np.array([alpha]), cutoff)[:, 0]


def coherent_fock(alpha: complex, cutoff: int) -> "FockVector":
    """|alpha> truncated at `cutoff` and renormalized."""
    return FockVector(coherent_coeffs(alpha, cutoff), cutoff, 1).normalize()


def destroy(cutoff: int) -> np.ndarray:
    """Annihilation operator on the truncated single-mode space."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1).astype(complex)


def displacement_matrix(gamma: complex, cutoff: int) -> np.ndarray:
    """exp(gamma a† - conj(gamma) a) on the truncated space."""
    a = destroy(cutoff)
    return expm(gamma * a.conj().T - np.conj(gamma) * a)


def _bs_blocks(theta: float, cutoff: int, variant: str):
    """Per-total-photon-number blocks of the two-mode beam-splitter unitary.

    Yields (indices into the flattened two-mode space, block unitary).  The
    generator conserves n1+n2, so each block is exponentiated separately;
    blocks with total n <= cutoff are exactly unitary.
    """
    if variant not in ("standard", "i"):
        raise ValueError("variant must be 'standard' or 'i'")
    d = cutoff + 1
    for n in range(0, 2 * cutoff + 1):
        ks = np.arange(max(0, n - cutoff), min(n, cutoff) + 1)
        size = ks.size
        if size == 1:
            yield ks * d + (n - ks), np.ones((1, 1), dtype=complex)
            continue
        # lower[r, r+1] = sqrt(k (n-k+1)) maps (k, n-k) -> (k-1, n-k+1)
        amp = np.sqrt(ks[1:] * (n - ks[1:] + 1.0))
        lower = np.zeros((size, size), dtype=complex)
        lower[np.arange(size - 1), np.arange(1, size)] = amp
        if variant == "standard":
            gen = theta * (lower - lower.conj().T)
        else:
            gen = 1j * theta * (lower + lower.conj().T)
        yield ks * d + (n - ks), expm(gen)


def beam_splitter_matrix(theta: float, cutoff: int, variant: str = "standard") -> np.ndarray:
    """Full two-mode beam-splitter unitary (mode-1-major flattening)."""
    d = cutoff + 1
    u = np.zeros((d * d, d * d), dtype=complex)
    for idx, block in _bs_blocks(theta, cutoff, variant):
        u[np.ix_(idx, idx)] = block
    return u


class FockVector:
    """Dense state vector over `modes` truncated oscillators."""

    __slots__ = ("data", "cutoff", "modes")

    def __init__(self, data, cutoff: int, modes: int):
        d = cutoff + 1
        arr = np.asarray(data, dtype=complex).reshape((d,) * modes)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "modes", modes)

    def __setattr__(self, name, value):
        raise AttributeError("FockVector is immutable")

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2))

    def normalize(self) -> "FockVector":
        n = math.sqrt(self.norm_sq())
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.data / n, self.cutoff, self.modes)

    def inner(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.data, other.data))

    def tensor(self, other: "FockVector") -> "FockVector":
        if other.cutoff != self.cutoff:
            raise ValueError("cutoff mismatch")
        data = np.tensordot(self.data, other.data, axes=0)
        return FockVector(data, self.cutoff, self.modes + other.modes)

    def apply_single(self, mode: int, op: np.ndarray) -> "FockVector":
        data = np.tensordot(op, self.data, axes=([1], [mode]))
        data = np.moveaxis(data, 0, mode)
        return FockVector(data, self.cutoff, self.modes)

    def apply_beam_splitter(self, i: int, j: int, theta: float,
                            variant: str = "standard") -> "FockVector":
        """Blockwise beam splitter; avoids materializing the (d^2)^2 matrix."""
        if i == j:
            raise ValueError("need two distinct modes")
        d = self.cutoff + 1
        moved = np.moveaxis(self.data, (i, j), (0, 1)).reshape(d * d, -1).copy()
        for idx, block in _bs_blocks(theta, self.cutoff, variant):
            moved[idx] = block @ moved[idx]
        out = moved.reshape((d, d) + (d,) * (self.modes - 2))
        out = np.moveaxis(out, (0, 1), (i, j))
        return FockVector(out, self.cutoff, self.modes)

    def displace(self, mode: int, gamma: complex) -> "FockVector":
        return self.apply_single(mode, displacement_matrix(gamma, self.cutoff))

    def phase_rotation(self, mode: int, phi: float) -> "FockVector":
        op = np.diag(np.exp(1j * phi * np.arange(self.cutoff + 1)))
        return self.apply_single(mode, op)

    def number_distribution(self, mode: int) -> np.ndarray:
        axes = tuple(m for m in range(self.modes) if m != mode)
        return np.sum(np.abs(self.data) ** 2, axis=axes)

    def project_count(self, mode: int, n: int) -> tuple[float, "FockVector | None"]:
        """Collapse one mode onto |n> and remove it."""
        if self.modes == 1:
            raise ValueError("cannot remove the only mode")
        sl = np.take(self.data, n, axis=mode)
        p = float(np.sum(np.abs(sl) ** 2))
        if p <= 1e-300:
            return 0.0, None
        return p, FockVector(sl / math.sqrt(p), self.cutoff, self.modes - 1)

    def parity_probabilities(self, mode: int) -> tuple[float, float]:
        dist = self.number_distribution(mode)
        n2 = self.norm_sq()
        even = float(dist[0::2].sum()) / n2
        odd = float(dist[1::2].sum()) / n2
        return even, odd

    def parity_project(self, mode: int, parity: int) -> tuple[float, "FockVector | None"]:
        mask = (np.arange(self.cutoff + 1) % 2) == parity
        shape = [1] * self.modes
        shape[mode] = self.cutoff + 1
        data = self.data * mask.reshape(shape)
        p = float(np.sum(np.abs(data) ** 2)) / self.norm_sq()
        if p <= 1e-300:
            return 0.0, None
        return p, FockVector(data, self.cutoff, self.modes).normalize()

    def to_density(self) -> "FockDensity":
        flat = self.data.ravel()
        return FockDensity(np.outer(flat, flat.conj()), self.cutoff, self.modes)

    def __repr__(self) -> str:
        return f"FockVector(modes={self.modes}, cutoff={self.cutoff})"


class FockDensity:
    """Dense density matrix over `modes` truncated oscillators."""

    __slots__ = ("matrix", "cutoff", "modes")

    def __init__(self, matrix, cutoff: int, modes: int):
        d = (cutoff + 1) ** modes
        arr = np.asarray(matrix, dtype=complex).reshape(d, d)
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "modes", modes)

    def __setattr__(self, name, value):
        raise AttributeError("FockDensity is immutable")

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalize(self) -> "FockDensity":
        return FockDensity(self.matrix / self.trace(), self.cutoff, self.modes)

    def herm_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def fidelity(self, psi: FockVector) -> float:
        v = psi.data.ravel()
        return float(np.real(np.vdot(v, self.matrix @ v)))

    def eigenweights(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (descending) and eigenvectors of the matrix."""
        vals, vecs = np.linalg.eigh(self.matrix)
        order = np.argsort(vals)[::-1]
        return vals[order], vecs[:, order]

    def mean_photon(self, mode: int) -> float:
        d = self.cutoff + 1
        diag = np.real(np.diag(self.matrix)).reshape((d,) * self.modes)
        axes = tuple(m for m in range(self.modes) if m != mode)
        marg = diag.sum(axis=axes) if axes else diag
        return float(np.dot(np.arange(d), marg)) / self.trace()


def partial_trace(rho: FockDensity, mode: int) -> FockDensity:
    """Trace one mode out of a dense density matrix."""
    d = rho.cutoff + 1
    m = rho.modes
    if not 0 <= mode < m:
        raise ValueError("mode out of range")
    if m == 1:
        raise ValueError("cannot trace out the only mode")
    t = rho.matrix.reshape((d,) * (2 * m))
    t = np.trace(t, axis1=mode, axis2=m + mode)
    return FockDensity(t.reshape(d ** (m - 1), d ** (m - 1)), rho.cutoff, m - 1)


def number_projection(state: FockVector, mode: int, n: int) -> tuple[float, FockVector | None]:
    """Module-level alias of FockVector.project_count."""
    return state.project_count(mode, n)


def from_coherent_ket(state: CoherentKet, policy: CutoffPolicy | None = None,
                      cutoff: int | None = None) -> tuple[FockVector, float]:
    """Bridge a coherent superposition into the truncated number basis.

    Raw (unnormalized) truncated coherent vectors keep the map linear, so
    relative weights and phases are preserved exactly; the reported value
    is the worst per-mode tail mass over all terms.
    """
    policy = policy or CutoffPolicy()
    max_amp = float(np.max(np.abs(state.amps))) if state.amps.size else 0.0
    n = cutoff if cutoff is not None else policy.cutoff_for(max_amp)
    worst_tail = 0.0
    total = None
    for c, row in zip(state.coeffs, state.amps):
        vecs = []
        for a in row:
            vecs.append(coherent_coeffs(a, n))
            worst_tail = max(worst_tail, coherent_tail(a, n))
        term = vecs[0]
        for v in vecs[1:]:
            term = np.tensordot(term, v, axes=0)
        total = c * term if total is None else total + c * term
    return FockVector(total, n, state.modes), worst_tail


def from_coherent_density(rho: CoherentDensity, policy: CutoffPolicy | None = None,
                          cutoff: int | None = None) -> tuple[FockDensity, float]:
    """Dyad-form density -> dense truncated matrix (same linear-bridge rules)."""
    policy = policy or CutoffPolicy()
    max_amp = float(max(np.max(np.abs(rho.kets)), np.max(np.abs(rho.bras))))
    n = cutoff if cutoff is not None else policy.cutoff_for(max_amp)
    worst_tail = 0.0
    total = None

    def col(amps_row):
        nonlocal worst_tail
        vec = coherent_coeffs(amps_row[0], n)
        worst_tail = max(worst_tail, coherent_tail(amps_row[0], n))
        for a in amps_row[1:]:
            vec = np.tensordot(vec, coherent_coeffs(a, n), axes=0)
            worst_tail = max(worst_tail, coherent_tail(a, n))
        return vec.ravel()

    for w, kk, bb in zip(rho.weights, rho.kets, rho.bras):
        term = w * np.outer(col(kk), col(bb).conj())
        total = term if total is None else total + term
    return FockDensity(total, n, rho.modes), worst_tail
