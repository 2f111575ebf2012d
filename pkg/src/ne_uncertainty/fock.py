"""Truncated Fock-space states, operators and dense kernels.

Conventions: hbar = 1, [x, p] = i, vacuum quadrature variance 1/2.
Two-mode objects live on the d*d space with row-major index n_A * d + n_B.

Unitaries are built on a padded internal basis and cropped back to the
requested cutoff, so matrix elements on the retained block are accurate even
though the cropped matrix is only unitary on its low-number block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg as sla

from . import config
from .errors import InvalidCutoff, ModeMismatch, NotPositiveSemidefinite, TruncationError


def _readonly(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _split_dim(dim, modes):
    if modes == 1:
        return dim
    d = math.isqrt(dim)
    if d * d != dim:
        raise ModeMismatch(f"two-mode dimension {dim} is not a perfect square")
    return d


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure state given by its number-basis amplitudes."""

    amps: np.ndarray
    modes: int = 1
    leakage: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amps", _readonly(self.amps).ravel())
        _split_dim(self.amps.shape[0], self.modes)

    @property
    def dim(self):
        return self.amps.shape[0]

    @property
    def cutoff(self):
        return _split_dim(self.dim, self.modes)

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def density(self):
        return DensityMatrix(np.outer(self.amps, self.amps.conj()), modes=self.modes, leakage=self.leakage)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace matrix on the truncated basis.

    Positivity is not verified at construction (it costs a full
    eigendecomposition); operations that need it check it themselves.
    ``maybe_nonpositive`` marks partial transposes, for which entropy and
    fidelity are refused.
    """

    mat: np.ndarray
    modes: int = 1
    maybe_nonpositive: bool = False
    leakage: float = 0.0

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        _split_dim(mat.shape[0], self.modes)
        t = config.tol()
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > t.herm:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > t.norm:
            raise ValueError(f"density matrix trace {tr!r} differs from 1")
        object.__setattr__(self, "mat", _readonly(0.5 * (mat + mat.conj().T)))

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def cutoff(self):
        return _split_dim(self.dim, self.modes)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    mat: np.ndarray
    label: str = ""
    modes: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mat", _readonly(self.mat))
        _split_dim(self.mat.shape[0], self.modes)

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def cutoff(self):
        return _split_dim(self.dim, self.modes)

    def dag(self):
        return ModeOperator(self.mat.conj().T, f"({self.label})†", self.modes)

    def __matmul__(self, other):
        if isinstance(other, ModeOperator):
            if other.modes != self.modes:
                raise ModeMismatch("operators act on different mode counts")
            return ModeOperator(self.mat @ other.mat, f"{self.label}·{other.label}", self.modes)
        return NotImplemented


def _check_cutoff(d):
    if int(d) != d or d < 2:
        raise InvalidCutoff(f"cutoff must be an integer >= 2, got {d!r}")
    return int(d)


def _pad(d, pad):
    return d if pad is None else pad


# ----------------------------------------------------------------------------
# ladder operators and quadratures


def _ladder(d):
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def annihilation(d):
    d = _check_cutoff(d)
    return ModeOperator(_ladder(d), "a")


def creation(d):
    d = _check_cutoff(d)
    return ModeOperator(_ladder(d).T, "a†")


def number_operator(d):
    d = _check_cutoff(d)
    return ModeOperator(np.diag(np.arange(d, dtype=float)), "n")


def quadratures(d):
    """Return ``(x, p)`` with ``a = (x + i p) / sqrt(2)``."""
    d = _check_cutoff(d)
    a = _ladder(d)
    x = (a + a.T) / np.sqrt(2)
    p = (a - a.T) / (1j * np.sqrt(2))
    return ModeOperator(x, "x"), ModeOperator(p, "p")


# ----------------------------------------------------------------------------
# dense kernels


def matrix_exponential(m):
    return sla.expm(np.asarray(m))


def _check_hermitian(h):
    h = np.asarray(h)
    if np.max(np.abs(h - h.conj().T), initial=0.0) > config.tol().herm:
        raise ValueError("matrix is not Hermitian")
    return 0.5 * (h + h.conj().T)


def hermitian_eig(h):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix."""
    return np.linalg.eigh(_check_hermitian(h))


def clamped_spectrum(h):
    """Eigendecomposition with eigenvalues in [-psd_tol, 0] set to zero.

    Raises NotPositiveSemidefinite for anything more negative.
    """
    w, v = hermitian_eig(h)
    if w.size and w[0] < -config.tol().psd:
        raise NotPositiveSemidefinite(f"eigenvalue {w[0]:.3e} below -psd_tol")
    return np.clip(w, 0.0, None), v


def matrix_sqrt_psd(h):
    w, v = clamped_spectrum(h)
    return (v * np.sqrt(w)) @ v.conj().T


# ----------------------------------------------------------------------------
# Gaussian unitaries


@lru_cache(maxsize=64)
def _displacement(alpha, d, pad):
    if alpha == 0:
        return _readonly(np.eye(d))
    n = d + pad
    # alpha a† - alpha* a = -i|alpha| C (a + a†) C†, C = diag(exp(i k (arg alpha + pi/2)))
    k = np.arange(n)
    w, v = sla.eigh_tridiagonal(np.zeros(n), abs(alpha) * np.sqrt(k[1:]))
    vk = v[:d]
    ph = np.exp(1j * (np.angle(alpha) + np.pi / 2) * k[:d])
    return _readonly(ph[:, None] * ((vk * np.exp(-1j * w)) @ vk.T) * ph.conj()[None, :])


def displacement(alpha, d, pad=None):
    """D(alpha) = exp(alpha a† - alpha* a)."""
    d = _check_cutoff(d)
    return ModeOperator(_displacement(complex(alpha), d, _pad(d, pad)), f"D({alpha})")


@lru_cache(maxsize=64)
def _squeeze(xi, d, pad):
    n = d + pad
    u = np.zeros((d, d), dtype=complex)
    if xi == 0:
        return _readonly(np.eye(d))
    # the generator couples n to n +- 2 only: one tridiagonal chain per
    # parity, made real symmetric by a diagonal phase, then diagonalized
    phase = np.exp(1j * (np.angle(xi) + np.pi / 2))
    for parity in (0, 1):
        k = np.arange(parity, n, 2)
        off = 0.5 * abs(xi) * np.sqrt((k[:-1] + 1.0) * (k[:-1] + 2.0))
        w, v = sla.eigh_tridiagonal(np.zeros(len(k)), off)
        keep = k < d
        vk = v[keep]
        block = (vk * np.exp(-1j * w)) @ vk.T
        ph = phase ** np.arange(keep.sum())
        idx = k[keep]
        u[np.ix_(idx, idx)] = ph[:, None] * block * ph.conj()[None, :]
    return _readonly(u)


def squeeze(xi, d, pad=None):
    """S(xi) = exp[(xi a†² - xi* a²)/2]; real positive xi stretches x."""
    d = _check_cutoff(d)
    return ModeOperator(_squeeze(complex(xi), d, _pad(d, pad)), f"S({xi})")


def phase_rotation(theta, d):
    """R(theta) = exp(-i theta a†a), which maps a -> a exp(-i theta)."""
    d = _check_cutoff(d)
    return ModeOperator(np.diag(np.exp(-1j * theta * np.arange(d))), f"R({theta})")


@lru_cache(maxsize=8)
def _two_mode_squeeze(xi, d, pad):
    u = np.zeros((d * d, d * d), dtype=complex)
    # exp(xi a†b† - xi* ab) preserves n_A - n_B: one tridiagonal chain per difference
    for k in range(-(d - 1), d):
        ka, kb = max(k, 0), max(-k, 0)
        keep = d - abs(k)
        length = keep + pad
        m = np.arange(length - 1)
        off = np.sqrt((m + ka + 1.0) * (m + kb + 1.0))
        g = np.zeros((length, length), dtype=complex)
        g[m + 1, m] = xi * off
        g[m, m + 1] = -np.conj(xi) * off
        block = sla.expm(g)[:keep, :keep]
        j = np.arange(keep)
        idx = (j + ka) * d + (j + kb)
        u[np.ix_(idx, idx)] = block
    return _readonly(u)


def two_mode_squeeze(xi, d, pad=None):
    """S_AB(xi) = exp(xi a†b† - xi* a b) on the d*d space."""
    d = _check_cutoff(d)
    return ModeOperator(_two_mode_squeeze(complex(xi), d, _pad(d, pad)), f"S_AB({xi})", modes=2)


def _beamsplitter_blocks(theta, phi, d):
    """(indices, block) pairs of B(theta, phi) on the d*d space.

    Total photon number is conserved, so each block is exact before the
    crop to pairs with both occupations below d.
    """
    e = np.exp(1j * phi)
    for total in range(2 * d - 1):
        n = np.arange(total)
        amp = theta * np.sqrt((n + 1.0) * (total - n))
        g = np.zeros((total + 1, total + 1), dtype=complex)
        g[n + 1, n] = e * amp
        g[n, n + 1] = -np.conj(e) * amp
        block = sla.expm(g)
        na = np.arange(max(0, total - d + 1), min(total, d - 1) + 1)
        yield na * d + (total - na), block[np.ix_(na, na)]


@lru_cache(maxsize=16)
def _beamsplitter(theta, phi, d):
    u = np.zeros((d * d, d * d), dtype=complex)
    for idx, block in _beamsplitter_blocks(theta, phi, d):
        u[np.ix_(idx, idx)] = block
    return _readonly(u)


@lru_cache(maxsize=16)
def beamsplitter_blocks(theta, phi, d):
    """B(theta, phi) in block form for large cutoffs.

    Returns ``(perm, bounds, blocks)``: reordering the d*d basis by ``perm``
    (grouping by total photon number) makes B block diagonal, block k
    spanning positions ``bounds[k]:bounds[k + 1]``.
    """
    d = _check_cutoff(d)
    perm, blocks, bounds = [], [], [0]
    for idx, block in _beamsplitter_blocks(float(theta), float(phi), d):
        perm.append(idx)
        blocks.append(_readonly(block))
        bounds.append(bounds[-1] + len(idx))
    return _readonly(np.concatenate(perm), dtype=np.intp), tuple(bounds), tuple(blocks)


def beamsplitter(theta, phi, d):
    """B(theta, phi) = exp[theta (e^{i phi} a†b - e^{-i phi} a b†)].

    Heisenberg action: a -> a cos(theta) + e^{i phi} b sin(theta),
    b -> b cos(theta) - e^{-i phi} a sin(theta).  With this convention
    B(pi/4, 0)|1,0> = (|1,0> - |0,1>)/sqrt(2).
    """
    d = _check_cutoff(d)
    return ModeOperator(_beamsplitter(float(theta), float(phi), d), f"BS({theta},{phi})", modes=2)


# ----------------------------------------------------------------------------
# states


def _coherent_amps(alpha, d):
    n = np.arange(d)
    amps = np.empty(d, dtype=complex)
    amps[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, d):
        amps[k] = amps[k - 1] * alpha / np.sqrt(k)
    return amps, n


def normalized(amps, modes=1, leakage=0.0):
    """Renormalize an amplitude vector, booking the lost norm as leakage."""
    norm2 = float(np.vdot(amps, amps).real)
    return FockVector(amps / np.sqrt(norm2), modes=modes, leakage=leakage + max(0.0, 1.0 - norm2))


def coherent_state(alpha, d):
    d = _check_cutoff(d)
    amps, _ = _coherent_amps(complex(alpha), d)
    return normalized(amps)


def number_state(n, d):
    d = _check_cutoff(d)
    if not 0 <= n < d:
        raise InvalidCutoff(f"|{n}> does not fit below cutoff {d}")
    amps = np.zeros(d, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps)


def vacuum(d):
    return number_state(0, d)


def thermal_weights(nbar, d):
    """Occupation probabilities of a thermal state truncated at ``d`` and the
    discarded tail weight."""
    if nbar < 0:
        raise ValueError("mean photon number must be non-negative")
    if nbar == 0:
        w = np.zeros(d)
        w[0] = 1.0
        return w, 0.0
    q = nbar / (1.0 + nbar)
    w = (1.0 - q) * q ** np.arange(d)
    return w, float(q**d)


def thermal_state(nbar, d, trunc_tol=None):
    d = _check_cutoff(d)
    trunc_tol = config.tol().trunc if trunc_tol is None else trunc_tol
    w, tail = thermal_weights(nbar, d)
    if tail > trunc_tol:
        raise TruncationError(f"thermal tail {tail:.3e} beyond cutoff {d}", leakage=tail)
    return DensityMatrix(np.diag(w / w.sum()), leakage=tail)


# ----------------------------------------------------------------------------
# composition


def as_density(state):
    if isinstance(state, FockVector):
        return state.density()
    return state


def embed(state, d):
    """Zero-pad a state to a larger per-mode cutoff ``d``."""
    if state.cutoff == d:
        return state
    old = state.cutoff
    if d < old:
        raise InvalidCutoff("embed only enlarges the basis")
    if isinstance(state, FockVector):
        if state.modes == 1:
            amps = np.zeros(d, dtype=complex)
            amps[:old] = state.amps
        else:
            amps = np.zeros((d, d), dtype=complex)
            amps[:old, :old] = state.amps.reshape(old, old)
        return FockVector(amps.ravel(), modes=state.modes, leakage=state.leakage)
    if state.modes == 1:
        mat = np.zeros((d, d), dtype=complex)
        mat[:old, :old] = state.mat
    else:
        mat = np.zeros((d, d, d, d), dtype=complex)
        mat[:old, :old, :old, :old] = state.mat.reshape(old, old, old, old)
        mat = mat.reshape(d * d, d * d)
    return DensityMatrix(mat, modes=state.modes, maybe_nonpositive=state.maybe_nonpositive, leakage=state.leakage)


def tensor(a, b):
    if type(a) is not type(b):
        raise ModeMismatch("tensor needs two objects of the same kind")
    if a.modes != 1 or b.modes != 1:
        raise ModeMismatch("tensor composes two single-mode objects")
    if a.dim != b.dim:
        raise ModeMismatch("tensor factors need matching cutoffs")
    if isinstance(a, FockVector):
        return FockVector(np.kron(a.amps, b.amps), modes=2, leakage=a.leakage + b.leakage)
    if isinstance(a, DensityMatrix):
        return DensityMatrix(
            np.kron(a.mat, b.mat),
            modes=2,
            maybe_nonpositive=a.maybe_nonpositive or b.maybe_nonpositive,
            leakage=a.leakage + b.leakage,
        )
    return ModeOperator(np.kron(a.mat, b.mat), f"{a.label}⊗{b.label}", modes=2)


def local(op, mode):
    """Lift a single-mode operator to mode 0 (A) or 1 (B)."""
    eye = np.eye(op.dim)
    mat = np.kron(op.mat, eye) if mode == 0 else np.kron(eye, op.mat)
    return ModeOperator(mat, f"{op.label}_{'AB'[mode]}", modes=2)


def _four_index(rho):
    if rho.modes != 2:
        raise ModeMismatch("operation needs a two-mode state")
    d = rho.cutoff
    return rho.mat.reshape(d, d, d, d)


def partial_trace(rho, keep):
    """Reduced state on ``keep`` ('A' or 'B')."""
    r = _four_index(rho)
    if keep == "A":
        red = np.einsum("ikjk->ij", r)
    elif keep == "B":
        red = np.einsum("kikj->ij", r)
    else:
        raise ValueError("keep must be 'A' or 'B'")
    return DensityMatrix(red, maybe_nonpositive=rho.maybe_nonpositive, leakage=rho.leakage)


def partial_transpose_B(rho):
    d = rho.cutoff
    r = _four_index(rho).transpose(0, 3, 2, 1).reshape(d * d, d * d)
    return DensityMatrix(r, modes=2, maybe_nonpositive=True, leakage=rho.leakage)


def apply(u, state, renormalize=True):
    """Act with ``u`` on a vector or conjugate a density matrix.

    Cropped unitaries lose a little weight; with ``renormalize`` the loss is
    added to the result's leakage and the norm restored.
    """
    mat = u.mat if isinstance(u, ModeOperator) else np.asarray(u)
    if isinstance(state, FockVector):
        out = mat @ state.amps
        if not renormalize:
            return FockVector(out, modes=state.modes, leakage=state.leakage)
        return normalized(out, modes=state.modes, leakage=state.leakage)
    out = mat @ state.mat @ mat.conj().T
    out = 0.5 * (out + out.conj().T)
    tr = np.trace(out).real
    leak = state.leakage
    if renormalize:
        leak += abs(1.0 - tr)
        out = out / tr
    return DensityMatrix(out, modes=state.modes, maybe_nonpositive=state.maybe_nonpositive, leakage=leak)


@dataclass(frozen=True)
class TruncationReport:
    deficit: float
    tail: float
    cutoff: int
    marginal_tails: tuple = field(default=())

    @property
    def leakage(self):
        return max(self.deficit, self.tail)

    def passes(self, trunc_tol=None):
        trunc_tol = config.tol().trunc if trunc_tol is None else trunc_tol
        return self.leakage <= trunc_tol


def _top_slice(d):
    return slice(d - max(1, math.ceil(d / 10)), d)


def check_truncation(obj):
    """Norm deficit and the weight carried by the top 10% of the basis."""
    if isinstance(obj, FockVector):
        probs = np.abs(obj.amps) ** 2
        deficit = max(abs(1.0 - probs.sum()), obj.leakage)
    else:
        probs = np.abs(np.diag(obj.mat).real)
        deficit = max(abs(1.0 - np.trace(obj.mat).real), obj.leakage)
    d = obj.cutoff
    top = _top_slice(d)
    if obj.modes == 1:
        tails = (float(probs[top].sum()),)
    else:
        grid = probs.reshape(d, d)
        tails = (float(grid.sum(axis=1)[top].sum()), float(grid.sum(axis=0)[top].sum()))
    return TruncationReport(float(deficit), max(tails), d, tails)


def require_truncation(obj, trunc_tol=None):
    report = check_truncation(obj)
    if not report.passes(trunc_tol):
        raise TruncationError(
            f"leakage {report.leakage:.3e} (deficit {report.deficit:.3e}, tail {report.tail:.3e}) "
            f"at cutoff {report.cutoff}",
            leakage=report.leakage,
        )
    return report
