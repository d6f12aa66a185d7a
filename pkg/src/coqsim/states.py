"""Exact algebra for finite superpositions of multimode coherent states.

A pure state is stored as a weighted sum of products of coherent states,
one complex amplitude per mode.  Displacements, beam splitters, phase
rotations, photon-number projections, parity measurements and partial
traces all map such superpositions to superpositions, so every
probability and fidelity computed here is exact up to floating point --
there is no basis truncation anywhere in this module.

All state objects are immutable; operations return new values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

#: terms with |coeff| below this are dropped after every operation
PRUNE_TOL = 1e-15
#: terms whose amplitude vectors agree within this are merged
MERGE_TOL = 1e-13


class TruncationError(RuntimeError):
    """A photon-count enumeration left more tail mass than allowed."""


def overlap(bra: Sequence[complex], ket: Sequence[complex]) -> complex:
    """Inner product of two products of coherent states.

    Per mode this is exp(-|a|^2/2 - |b|^2/2 + conj(b) a); the product over
    modes is evaluated as exp(-|a-b|^2/2 + i Im(conj(b) a)), which stays
    accurate for large amplitudes where the naive form cancels
    catastrophically.
    """
    b = np.asarray(bra, dtype=complex)
    k = np.asarray(ket, dtype=complex)
    if b.shape != k.shape:
        raise ValueError(f"mode count mismatch: {b.shape} vs {k.shape}")
    expo = -0.5 * np.sum(np.abs(k - b) ** 2) + 1j * np.sum((np.conj(b) * k).imag)
    return complex(np.exp(expo))


def _gram(bra_rows: np.ndarray, ket_rows: np.ndarray) -> np.ndarray:
    """Matrix of overlaps G[j, k] = <bra_rows[j] | ket_rows[k]>.

    The exponent is S - (|bra|^2 + |ket|^2)/2 with S = conj(bra) ket^T, one
    BLAS product.  For large amplitudes that difference cancels badly in
    floating point, so the pairwise |a-b|^2 form takes over there.
    """
    rb = np.sum(np.abs(bra_rows) ** 2, axis=1)
    rk = np.sum(np.abs(ket_rows) ** 2, axis=1)
    if max(rb.max(initial=0.0), rk.max(initial=0.0)) < 400.0:
        s = np.conj(bra_rows) @ ket_rows.T
        return np.exp(s - 0.5 * (rb[:, None] + rk[None, :]))
    d2 = np.abs(bra_rows[:, None, :] - ket_rows[None, :, :]) ** 2
    cross = np.conj(bra_rows)[:, None, :] * ket_rows[None, :, :]
    return np.exp(-0.5 * d2.sum(axis=2) + 1j * cross.imag.sum(axis=2))


def number_amplitude(alpha: complex, n: int) -> complex:
    """Number-basis coefficient <n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!).

    Evaluated in log space for n > 20 so large counts neither overflow nor
    lose precision; magnitudes below the double-precision floor underflow
    to an exact 0.
    """
    if n < 0:
        raise ValueError("photon count must be nonnegative")
    return complex(_number_amps(np.array([alpha]), n)[n, 0])


_SQRT_FACT = np.sqrt(np.array([math.factorial(n) for n in range(21)], dtype=float))


def _number_amps(alphas: np.ndarray, n_max: int) -> np.ndarray:
    """<n|alpha> for n = 0..n_max and each alpha; shape (n_max+1, len(alphas))."""
    a = np.asarray(alphas, dtype=complex)
    ns = np.arange(n_max + 1)
    out = np.zeros((n_max + 1, a.size), dtype=complex)
    lo = ns[ns <= 20]
    with np.errstate(invalid="ignore"):
        out[lo] = a[None, :] ** lo[:, None] / _SQRT_FACT[lo, None]
    if n_max > 20:
        hi = ns[ns > 20]
        nz = np.abs(a) > 0
        log_a = np.zeros(a.size, dtype=complex)
        log_a[nz] = np.log(a[nz])
        vals = np.exp(hi[:, None] * log_a[None, :] - 0.5 * gammaln(hi + 1)[:, None])
        vals[:, ~nz] = 0.0
        out[hi] = vals
    out *= np.exp(-0.5 * np.abs(a) ** 2)[None, :]
    return out


def default_count_cutoff(max_amp_sq: float) -> int:
    """Photon-count cutoff with >10 sigma Poisson headroom above the mean."""
    m = float(max_amp_sq)
    return max(20, math.ceil(m + 10.0 * math.sqrt(m) + 10.0))


@dataclass(frozen=True)
class CoherentTerm:
    """One term of a superposition: coeff * |amps[0]> ⊗ ... ⊗ |amps[-1]>."""

    coeff: complex
    amps: np.ndarray


def _canonical(coeffs: np.ndarray, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Prune negligible terms and merge terms with matching amplitude vectors.

    Terms are grouped by their amplitude vectors rounded to 13 decimals, so
    vectors agreeing within ~1e-13 share a bucket and their coefficients
    add (groups straddling a rounding boundary stay split, which only costs
    a redundant term, never correctness).
    """
    keep = np.abs(coeffs) > PRUNE_TOL
    coeffs, amps = coeffs[keep], amps[keep]
    n = len(coeffs)
    if n > 1:
        key = np.round(amps, 13)
        _, first, inverse = np.unique(key, axis=0, return_index=True,
                                      return_inverse=True)
        if first.size < n:
            merged = np.zeros(first.size, dtype=complex)
            np.add.at(merged, inverse, coeffs)
            coeffs, amps = merged, amps[first]
            keep = np.abs(coeffs) > PRUNE_TOL
            coeffs, amps = coeffs[keep], amps[keep]
    return coeffs, amps


class CoherentKet:
    """Pure state: sum_k coeffs[k] |amps[k,0]> ⊗ ... ⊗ |amps[k,modes-1]>.

    Immutable.  `coeffs` has shape (terms,), `amps` shape (terms, modes).
    """

    __slots__ = ("coeffs", "amps", "_norm2")

    def __init__(self, coeffs, amps):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        a = np.asarray(amps, dtype=complex)
        if a.ndim == 1:
            a = a.reshape(1, -1) if c.size == 1 else a.reshape(c.size, 1)
        if a.ndim != 2 or a.shape[0] != c.size:
            raise ValueError("coeffs and amps shapes do not match")
        if a.shape[1] < 1:
            raise ValueError("a state needs at least one mode")
        c, a = _canonical(c, a)
        if c.size == 0:
            raise ValueError("state has no terms left (all coefficients ~ 0)")
        c.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "amps", a)
        object.__setattr__(self, "_norm2", None)

    def __setattr__(self, name, value):
        raise AttributeError("CoherentKet is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def _raw(cls, coeffs: np.ndarray, amps: np.ndarray) -> "CoherentKet":
        """Bypass canonicalization for maps that preserve term structure
        (unitaries permute/rephase terms; they cannot create duplicates
        or zero coefficients)."""
        obj = object.__new__(cls)
        coeffs.flags.writeable = False
        amps.flags.writeable = False
        object.__setattr__(obj, "coeffs", coeffs)
        object.__setattr__(obj, "amps", amps)
        object.__setattr__(obj, "_norm2", None)
        return obj

    @classmethod
    def vacuum(cls, modes: int = 1) -> "CoherentKet":
        return cls([1.0], np.zeros((1, modes)))

    @classmethod
    def product(cls, amps: Sequence[complex]) -> "CoherentKet":
        """Single product of coherent states |amps[0]> ⊗ ... ⊗ |amps[-1]>."""
        return cls([1.0], np.asarray(amps, dtype=complex).reshape(1, -1))

    @classmethod
    def superposition(cls, terms: Sequence[tuple[complex, Sequence[complex]]],
                      normalized: bool = True) -> "CoherentKet":
        coeffs = [t[0] for t in terms]
        amps = [np.asarray(t[1], dtype=complex) for t in terms]
        state = cls(np.array(coeffs), np.array(amps))
        return state.normalize() if normalized else state

    # -- basic structure ---------------------------------------------------

    @property
    def modes(self) -> int:
        return self.amps.shape[1]

    @property
    def num_terms(self) -> int:
        return self.coeffs.size

    @property
    def terms(self) -> list[CoherentTerm]:
        return [CoherentTerm(complex(c), a.copy()) for c, a in zip(self.coeffs, self.amps)]

    def _check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.modes:
            raise ValueError(f"mode {mode} out of range for {self.modes}-mode state")

    def gram(self) -> np.ndarray:
        return _gram(self.amps, self.amps)

    def norm_sq(self) -> float:
        if self._norm2 is None:
            g = self.gram()
            n2 = float(np.real(np.conj(self.coeffs) @ g @ self.coeffs))
            object.__setattr__(self, "_norm2", n2)
        return self._norm2

    def normalize(self) -> "CoherentKet":
        n2 = self.norm_sq()
        if n2 <= PRUNE_TOL**2:
            raise ValueError("cannot normalize a (numerically) null state")
        out = CoherentKet._raw(self.coeffs / math.sqrt(n2), self.amps)
        object.__setattr__(out, "_norm2", 1.0)
        return out

    def inner(self, other: "CoherentKet") -> complex:
        """<self|other>."""
        if other.modes != self.modes:
            raise ValueError("mode count mismatch")
        g = _gram(self.amps, other.amps)
        return complex(np.conj(self.coeffs) @ g @ other.coeffs)

    def fidelity(self, other: "CoherentKet") -> float:
        """|<self|other>|^2 (global-phase insensitive)."""
        return abs(self.inner(other)) ** 2

    def tensor(self, other: "CoherentKet") -> "CoherentKet":
        """Tensor product; other's modes are appended after self's."""
        c = np.outer(self.coeffs, other.coeffs).ravel()
        left = np.repeat(self.amps, other.num_terms, axis=0)
        right = np.tile(other.amps, (self.num_terms, 1))
        return CoherentKet(c, np.hstack([left, right]))

    def permute_modes(self, order: Sequence[int]) -> "CoherentKet":
        """Reorder modes so that new mode i is old mode order[i]."""
        order = list(order)
        if sorted(order) != list(range(self.modes)):
            raise ValueError("order must be a permutation of the mode indices")
        return CoherentKet._raw(self.coeffs.copy(), self.amps[:, order].copy())

    # -- Gaussian-preserving unitaries --------------------------------------

    def displace(self, mode: int, gamma: complex) -> "CoherentKet":
        """Displacement on one mode: |a> -> exp((g conj(a) - conj(g) a)/2) |a+g>."""
        self._check_mode(mode)
        a = self.amps[:, mode]
        phase = np.exp(0.5 * (gamma * np.conj(a) - np.conj(gamma) * a))
        amps = self.amps.copy()
        amps[:, mode] = a + gamma
        return CoherentKet._raw(self.coeffs * phase, amps)

    def beam_splitter(self, i: int, j: int, theta: float) -> "CoherentKet":
        """Two-mode mixing with transmissivity cos^2(theta):

        (a_i, a_j) -> (cos t a_i - sin t a_j, cos t a_j + sin t a_i).
        """
        self._check_mode(i)
        self._check_mode(j)
        if i == j:
            raise ValueError("beam splitter needs two distinct modes")
        c, s = math.cos(theta), math.sin(theta)
        amps = self.amps.copy()
        ai, aj = self.amps[:, i], self.amps[:, j]
        amps[:, i] = c * ai - s * aj
        amps[:, j] = c * aj + s * ai
        return CoherentKet._raw(self.coeffs.copy(), amps)

    def ibeam_splitter(self, i: int, j: int, theta: float) -> "CoherentKet":
        """Symmetric i-type mixing: (a_i, a_j) -> (c a_i + i s a_j, c a_j + i s a_i)."""
        self._check_mode(i)
        self._check_mode(j)
        if i == j:
            raise ValueError("beam splitter needs two distinct modes")
        c, s = math.cos(theta), math.sin(theta)
        amps = self.amps.copy()
        ai, aj = self.amps[:, i], self.amps[:, j]
        amps[:, i] = c * ai + 1j * s * aj
        amps[:, j] = c * aj + 1j * s * ai
        return CoherentKet._raw(self.coeffs.copy(), amps)

    def phase_rotation(self, mode: int, phi: float) -> "CoherentKet":
        """Free rotation exp(i phi n): |a> -> |exp(i phi) a|; phi=pi flips the sign."""
        self._check_mode(mode)
        amps = self.amps.copy()
        amps[:, mode] = np.exp(1j * phi) * amps[:, mode]
        return CoherentKet._raw(self.coeffs.copy(), amps)

    def flip_mode(self, mode: int) -> "CoherentKet":
        """Parity image of one mode (amplitude negated); used by parity projections."""
        return self.phase_rotation(mode, math.pi)

    # -- measurement statistics ---------------------------------------------

    def _rest_gram(self, mode: int) -> np.ndarray:
        rest = np.delete(self.amps, mode, axis=1)
        if rest.shape[1] == 0:
            return np.ones((self.num_terms, self.num_terms), dtype=complex)
        return _gram(rest, rest)

    def photon_count_distribution(self, mode: int, n_max: int | None = None,
                                  max_tail: float = 1e-9) -> tuple[np.ndarray, float]:
        """Exact photon-count probabilities P(0..n_max) for one mode.

        Returns (probabilities, tail) where tail = 1 - sum(P).  The default
        cutoff gives >10 sigma of headroom over the largest per-term mean;
        an explicit cutoff that leaves more than `max_tail` raises
        TruncationError.
        """
        self._check_mode(mode)
        a = self.amps[:, mode]
        if n_max is None:
            n_max = default_count_cutoff(np.max(np.abs(a) ** 2))
        g_rest = self._rest_gram(mode)
        w = _number_amps(a, n_max) * self.coeffs[None, :]
        probs = np.sum((np.conj(w) @ g_rest) * w, axis=1).real
        probs = np.clip(probs, 0.0, None)
        tail = max(0.0, 1.0 - float(probs.sum()))
        if tail > max_tail:
            raise TruncationError(
                f"count cutoff n_max={n_max} leaves tail {tail:.3e} > {max_tail:.3e}")
        return probs, tail

    def project_photon_count(self, mode: int, n: int) -> tuple[float, "CoherentKet | None"]:
        """Collapse one mode onto |n><n| and remove it.

        Returns (outcome probability, normalized post-measurement state).
        A zero-probability outcome returns (0.0, None).  The state must be
        normalized, and the projected mode may not be the only one.
        """
        self._check_mode(mode)
        if abs(self.norm_sq() - 1.0) > 1e-9:
            raise ValueError("project_photon_count requires a normalized state")
        if self.modes == 1:
            raise ValueError("cannot remove the only mode; use photon_count_distribution")
        f = _number_amps(self.amps[:, mode], n)[n, :]
        coeffs = self.coeffs * f
        amps = np.delete(self.amps, mode, axis=1)
        try:
            collapsed = CoherentKet(coeffs, amps)
        except ValueError:  # every contribution cancelled or vanished
            return 0.0, None
        p = collapsed.norm_sq()
        if p <= 1e-300:
            return 0.0, None
        return float(p), CoherentKet(collapsed.coeffs / math.sqrt(p), collapsed.amps)

    def sample_photon_count(self, mode: int, rng: np.random.Generator) -> int:
        """Draw one photon count from the exact distribution (tail < 1e-12)."""
        n_max = default_count_cutoff(float(np.max(np.abs(self.amps[:, mode]) ** 2)))
        while True:
            try:
                probs, tail = self.photon_count_distribution(mode, n_max, max_tail=1e-12)
                break
            except TruncationError:
                n_max = int(n_max * 1.5) + 10
        return int(rng.choice(probs.size, p=probs / probs.sum()))

    def measure_count(self, mode: int, rng: np.random.Generator,
                      ) -> tuple[int, float, "CoherentKet | None"]:
        """Sample a photon count on one mode and collapse it in one pass.

        Returns (count, probability, normalized post-measurement state with
        the mode removed).  The squared norm of the collapsed branch is the
        outcome probability itself, so no extra Gram evaluation is needed.
        """
        self._check_mode(mode)
        if self.modes == 1:
            raise ValueError("cannot remove the only mode")
        n_max = default_count_cutoff(float(np.max(np.abs(self.amps[:, mode]) ** 2)))
        while True:
            try:
                probs, _ = self.photon_count_distribution(mode, n_max, max_tail=1e-12)
                break
            except TruncationError:
                n_max = int(n_max * 1.5) + 10
        n = int(rng.choice(probs.size, p=probs / probs.sum()))
        p = float(probs[n])
        f = _number_amps(self.amps[:, mode], n)[n, :]
        coeffs = self.coeffs * f / math.sqrt(p)
        amps = np.delete(self.amps, mode, axis=1)
        out = CoherentKet(coeffs, amps)
        object.__setattr__(out, "_norm2", 1.0)
        return n, p, out

    def parity_probabilities(self, mode: int) -> tuple[float, float]:
        """(P(even), P(odd)) photon count on a mode, in closed form.

        Uses <b|Pi|a> = <b|-a>, so no photon-number sum is involved.
        """
        self._check_mode(mode)
        flipped = self.amps.copy()
        flipped[:, mode] = -flipped[:, mode]
        g_flip = _gram(self.amps, flipped)
        exp_parity = float(np.real(np.conj(self.coeffs) @ g_flip @ self.coeffs))
        n2 = self.norm_sq()
        exp_parity /= n2
        p_even = 0.5 * (1.0 + exp_parity)
        p_odd = 0.5 * (1.0 - exp_parity)
        return p_even, p_odd

    def parity_project(self, mode: int, parity: int) -> tuple[float, "CoherentKet | None"]:
        """Project one mode onto even (0) or odd (1) photon number.

        The mode is kept (parity projection is not rank one).  Returns
        (probability, normalized projected state | None).
        """
        self._check_mode(mode)
        if parity not in (0, 1):
            raise ValueError("parity must be 0 (even) or 1 (odd)")
        sign = 1.0 if parity == 0 else -1.0
        flipped = self.flip_mode(mode)
        coeffs = np.concatenate([0.5 * self.coeffs, 0.5 * sign * flipped.coeffs])
        amps = np.vstack([self.amps, flipped.amps])
        if np.all(np.abs(coeffs) <= PRUNE_TOL):
            return 0.0, None
        proj = CoherentKet(coeffs, amps)
        p = proj.norm_sq() / self.norm_sq()
        if p <= 1e-300:
            return 0.0, None
        return float(p), proj.normalize()

    def partial_inner(self, mode: int, probe: "CoherentKet") -> "CoherentKet | None":
        """Contract one mode with a single-mode ket: (<probe|_mode ⊗ I)|self>.

        Returns the (unnormalized) state on the remaining modes, or None if
        it vanishes.
        """
        self._check_mode(mode)
        if probe.modes != 1:
            raise ValueError("probe must be a single-mode state")
        if self.modes == 1:
            raise ValueError("cannot remove the only mode")
        # ov[j, k] = <probe term j | mode amplitude of self term k>
        ov = _gram(probe.amps, self.amps[:, mode].reshape(-1, 1))
        coeffs = (np.conj(probe.coeffs)[:, None] * ov * self.coeffs[None, :]).sum(axis=0)
        amps = np.delete(self.amps, mode, axis=1)
        if np.all(np.abs(coeffs) <= PRUNE_TOL):
            return None
        return CoherentKet(coeffs, amps)

    def mean_photon(self, mode: int) -> float:
        """<n> on one mode (state need not be normalized; value is per unit norm)."""
        self._check_mode(mode)
        g = self.gram()
        a = self.amps[:, mode]
        num = np.einsum("j,k,j,k,jk->", np.conj(self.coeffs), self.coeffs,
                        np.conj(a), a, g)
        return float(np.real(num)) / self.norm_sq()

    def trace_out(self, mode: int) -> "CoherentDensity":
        """Partial trace over one mode, in closed dyad form."""
        self._check_mode(mode)
        a = self.amps[:, mode].reshape(-1, 1)
        ov = _gram(a, a)  # ov[x, y] = <a_x | a_y>
        k = self.num_terms
        weights = (self.coeffs[:, None] * np.conj(self.coeffs)[None, :] * ov.T).ravel()
        rest = np.delete(self.amps, mode, axis=1)
        if rest.shape[1] == 0:
            raise ValueError("cannot trace out the only mode")
        kets = np.repeat(rest, k, axis=0)
        bras = np.tile(rest, (k, 1))
        return CoherentDensity(weights, kets, bras)

    # -- debugging -----------------------------------------------------------

    def dump(self) -> str:
        """One term per line: `c_re c_im : a1_re a1_im ; a2_re a2_im ; ...`."""
        lines = []
        for c, row in zip(self.coeffs, self.amps):
            amps = " ; ".join(f"{float(a.real)!r} {float(a.imag)!r}" for a in row)
            lines.append(f"{float(c.real)!r} {float(c.imag)!r} : {amps}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"CoherentKet(modes={self.modes}, terms={self.num_terms})"


class CoherentDensity:
    """Mixed state as a weighted sum of coherent dyads |ket><bra|.

    Produced by tracing environment modes out of a CoherentKet.  Immutable.
    """

    __slots__ = ("weights", "kets", "bras")

    def __init__(self, weights, kets, bras):
        w = np.atleast_1d(np.asarray(weights, dtype=complex))
        kk = np.asarray(kets, dtype=complex)
        bb = np.asarray(bras, dtype=complex)
        if kk.ndim == 1:
            kk = kk.reshape(w.size, -1)
        if bb.ndim == 1:
            bb = bb.reshape(w.size, -1)
        if kk.shape != bb.shape or kk.shape[0] != w.size:
            raise ValueError("weights, kets and bras shapes do not match")
        keep = np.abs(w) > PRUNE_TOL**2
        if not np.any(keep):
            raise ValueError("density has no dyads left")
        w, kk, bb = w[keep], kk[keep], bb[keep]
        for arr in (w, kk, bb):
            arr.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "kets", kk)
        object.__setattr__(self, "bras", bb)

    def __setattr__(self, name, value):
        raise AttributeError("CoherentDensity is immutable")

    @classmethod
    def from_ket(cls, state: CoherentKet) -> "CoherentDensity":
        k = state.num_terms
        w = (state.coeffs[:, None] * np.conj(state.coeffs)[None, :]).ravel()
        kets = np.repeat(state.amps, k, axis=0)
        bras = np.tile(state.amps, (k, 1))
        return cls(w, kets, bras)

    @property
    def modes(self) -> int:
        return self.kets.shape[1]

    @property
    def num_dyads(self) -> int:
        return self.weights.size

    def _dyad_overlaps(self) -> np.ndarray:
        """<bra_d|ket_d> for each dyad."""
        d2 = np.abs(self.kets - self.bras) ** 2
        cross = np.conj(self.bras) * self.kets
        return np.exp(-0.5 * d2.sum(axis=1) + 1j * cross.imag.sum(axis=1))

    def trace(self) -> complex:
        return complex(np.sum(self.weights * self._dyad_overlaps()))

    def normalize(self) -> "CoherentDensity":
        t = self.trace()
        if abs(t) <= PRUNE_TOL:
            raise ValueError("cannot normalize a traceless density")
        return CoherentDensity(self.weights / t.real, self.kets, self.bras)

    def herm_defect(self) -> float:
        """max_x |<x|rho|x> - conj(<x|rho|x>)| over a probe set; 0 for Hermitian."""
        probes = np.concatenate([self.kets, self.bras], axis=0)
        vals = [self.matrix_element(p, p) for p in probes]
        return max((abs(v.imag) for v in vals), default=0.0)

    def matrix_element(self, bra_amps: np.ndarray, ket_amps: np.ndarray) -> complex:
        """<bra|rho|ket> for products of coherent states."""
        b = np.asarray(bra_amps, dtype=complex).reshape(1, -1)
        k = np.asarray(ket_amps, dtype=complex).reshape(1, -1)
        left = _gram(b, self.kets)[0]          # <bra | ket_d>
        right = _gram(self.bras, k)[:, 0]      # <bra_d | ket>
        return complex(np.sum(self.weights * left * right))

    def fidelity(self, psi: CoherentKet) -> float:
        """<psi|rho|psi>."""
        if psi.modes != self.modes:
            raise ValueError("mode count mismatch")
        left = np.conj(psi.coeffs) @ _gram(psi.amps, self.kets)    # <psi|ket_d>
        right = _gram(self.bras, psi.amps) @ psi.coeffs            # <bra_d|psi>
        val = float(np.real(np.sum(self.weights * left * right)))
        return val

    def mean_photon(self, mode: int) -> float:
        if not 0 <= mode < self.modes:
            raise ValueError("mode out of range")
        ov = self._dyad_overlaps()
        val = np.sum(self.weights * np.conj(self.bras[:, mode]) * self.kets[:, mode] * ov)
        return float(np.real(val)) / float(np.real(self.trace()))

    def trace_out(self, mode: int) -> "CoherentDensity":
        if not 0 <= mode < self.modes:
            raise ValueError("mode out of range")
        if self.modes == 1:
            raise ValueError("cannot trace out the only mode")
        k = self.kets[:, mode]
        b = self.bras[:, mode]
        ov = np.exp(-0.5 * np.abs(k - b) ** 2 + 1j * (np.conj(b) * k).imag)
        w = self.weights * ov
        return CoherentDensity(w, np.delete(self.kets, mode, axis=1),
                               np.delete(self.bras, mode, axis=1))

    def __repr__(self) -> str:
        return f"CoherentDensity(modes={self.modes}, dyads={self.num_dyads})"


def fidelity_pure(rho: CoherentDensity, psi: CoherentKet) -> float:
    """<psi|rho|psi> for a dyad-form density and a pure state."""
    return rho.fidelity(psi)
