"""Moments, symplectic algebra and reference Gaussian states.

Phase-space ordering is (x_A, p_A, x_B, p_B) and the symplectic form is the
block-diagonal ``omega`` with blocks [[0, 1], [-1, 0]].  A Fock unitary U
realizes the symplectic matrix S when U† r U = S r, so that the state
U rho U† has mean S m and covariance S V S^T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from . import config, fock
from .errors import ModeMismatch, NoPhysicalReference, NotPositiveSemidefinite, NumericInconsistency


@dataclass(frozen=True, eq=False)
class MomentData:
    mean: np.ndarray
    cov: np.ndarray
    modes: int = 1

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        cov = np.array(self.cov, dtype=float)
        n = 2 * self.modes
        if mean.shape != (n,) or cov.shape != (n, n):
            raise ModeMismatch(f"moments of {self.modes} mode(s) need shapes ({n},) and ({n},{n})")
        if np.max(np.abs(cov - cov.T)) > 1e-10:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def sqrt_det(self):
        return float(np.sqrt(max(np.linalg.det(self.cov), 0.0)))

    def block(self, mode):
        """Single-mode marginal moments."""
        s = slice(2 * mode, 2 * mode + 2)
        return MomentData(self.mean[s], self.cov[s, s])


@dataclass(frozen=True, eq=False)
class WilliamsonResult:
    S: np.ndarray
    nu: np.ndarray


@dataclass(frozen=True, eq=False)
class BlochMessiahResult:
    O1: np.ndarray
    O2: np.ndarray
    r: np.ndarray

    def reconstruct(self):
        k = np.repeat(self.r, 2) * np.tile([1.0, -1.0], len(self.r))
        return self.O1 @ np.diag(np.exp(k)) @ self.O2


def omega(n_modes):
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def is_bona_fide(m, tol=None):
    """V + i/2 Omega >= 0."""
    tol = config.tol().psd if tol is None else tol
    w = np.linalg.eigvalsh(m.cov + 0.5j * omega(m.modes))
    return bool(w[0] >= -tol)


# ----------------------------------------------------------------------------
# moments


def _quadrature_blocks(d):
    # exact truncated matrices of x, p, x², p² and (xp + px)/2: products are
    # formed one level up so the last row and column are right
    x1, p1 = (op.mat for op in fock.quadratures(d + 1))
    crop = (slice(0, d), slice(0, d))
    return {
        "x": x1[crop],
        "p": p1[crop],
        "xx": (x1 @ x1)[crop],
        "pp": (p1 @ p1)[crop],
        "xp": (0.5 * (x1 @ p1 + p1 @ x1))[crop],
    }


def _expect(rho, op):
    return float(np.einsum("ij,ji->", rho, op).real)


def moments_of(state, trunc_tol=None, check=True):
    """First moments and symmetrized covariance matrix of a state."""
    rho = fock.as_density(state)
    if check:
        fock.require_truncation(rho, trunc_tol)
    d = rho.cutoff
    q = _quadrature_blocks(d)
    if rho.modes == 1:
        blocks = [rho.mat]
    else:
        r4 = rho.mat.reshape(d, d, d, d)
        blocks = [np.einsum("ikjk->ij", r4), np.einsum("kikj->ij", r4)]

    n = 2 * rho.modes
    mean = np.zeros(n)
    second = np.zeros((n, n))
    for k, red in enumerate(blocks):
        i = 2 * k
        mean[i] = _expect(red, q["x"])
        mean[i + 1] = _expect(red, q["p"])
        second[i, i] = _expect(red, q["xx"])
        second[i + 1, i + 1] = _expect(red, q["pp"])
        second[i, i + 1] = second[i + 1, i] = _expect(red, q["xp"])
    if rho.modes == 2:
        ops = (q["x"], q["p"])
        for ia, oa in enumerate(ops):
            for ib, ob in enumerate(ops):
                # Tr[rho (oa ⊗ ob)]
                val = np.einsum("ijkl,ki,lj->", r4, oa, ob).real
                second[ia, 2 + ib] = second[2 + ib, ia] = val
    cov = second - np.outer(mean, mean)
    return MomentData(mean, cov, modes=rho.modes)


# ----------------------------------------------------------------------------
# invariants and symplectic spectra


def symplectic_invariants(m):
    """``(det V, Delta)`` with Delta = det A + det B + 2 det C."""
    if m.modes != 2:
        raise ModeMismatch("symplectic invariants are defined here for two modes")
    v = m.cov
    a, b, c = v[:2, :2], v[2:, 2:], v[:2, 2:]
    return float(np.linalg.det(v)), float(np.linalg.det(a) + np.linalg.det(b) + 2 * np.linalg.det(c))


def symplectic_eigenvalues(m):
    """``(nu_+, nu_-)`` for two modes, ``(nu,)`` for one."""
    if m.modes == 1:
        return (m.sqrt_det,)
    det_v, delta = symplectic_invariants(m)
    disc = delta**2 - 4 * det_v
    if disc < -1e-10:
        raise NumericInconsistency(f"negative discriminant {disc:.3e} in symplectic spectrum")
    root = np.sqrt(max(disc, 0.0))
    plus = np.sqrt(max((delta + root) / 2, 0.0))
    minus = np.sqrt(max((delta - root) / 2, 0.0))
    return float(plus), float(minus)


def williamson(m):
    """Symplectic S with S V S^T = diag(nu_1, nu_1, ..., nu_N, nu_N), nu descending.

    Works from the Hermitian form i V^{1/2} Omega V^{1/2}, which is similar to
    i Omega V; each eigenvector with eigenvalue +nu supplies the (x, p) pair of
    one normal mode.  Eigenvectors of a degenerate nu come back orthonormal,
    which is all the construction needs.
    """
    v = np.asarray(m.cov if isinstance(m, MomentData) else m, dtype=float)
    n = v.shape[0] // 2
    w, q = np.linalg.eigh(v)
    if w[0] <= 0:
        raise NotPositiveSemidefinite("Williamson decomposition needs a positive-definite matrix")
    root = (q * np.sqrt(w)) @ q.T
    inv_root = (q / np.sqrt(w)) @ q.T
    k = root @ omega(n) @ root
    lam, vecs = np.linalg.eigh(1j * k)
    order = np.argsort(-lam, kind="stable")[:n]
    nu = lam[order]
    basis = np.zeros((2 * n, 2 * n))
    for mode, idx in enumerate(order):
        vec = vecs[:, idx]
        basis[:, 2 * mode] = np.sqrt(2) * vec.imag
        basis[:, 2 * mode + 1] = np.sqrt(2) * vec.real
    scale = np.repeat(np.sqrt(nu), 2)
    s = scale[:, None] * (basis.T @ inv_root)
    return WilliamsonResult(S=s, nu=nu)


def is_symplectic(s, tol=1e-8):
    n = s.shape[0] // 2
    om = omega(n)
    return bool(np.max(np.abs(s @ om @ s.T - om)) <= tol * max(1.0, np.max(np.abs(s)) ** 2))


def _symplectic_basis(vectors, om):
    """Symplectic Gram-Schmidt inside an Omega-invariant subspace."""
    cols = []
    pool = [vectors[:, i] for i in range(vectors.shape[1])]
    while pool:
        v = pool.pop(0)
        for c in cols:
            v = v - (c @ v) * c
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            continue
        v = v / norm
        cols.extend([v, -om @ v])
    return cols


def bloch_messiah(s, tol=1e-8):
    """Factor S = O1 diag(e^{r_1}, e^{-r_1}, ...) O2 with passive O1, O2."""
    s = np.asarray(s, dtype=float)
    if not is_symplectic(s, tol):
        raise ValueError("matrix is not symplectic")
    n = s.shape[0] // 2
    om = omega(n)
    u, p = sla.polar(s)
    lam, vecs = np.linalg.eigh(0.5 * (p + p.T))
    lam, vecs = lam[::-1], vecs[:, ::-1]
    big = [i for i in range(n) if lam[i] > 1.0 + 1e-10]
    n_big = len(big)
    cols = []
    for i in big:
        v = vecs[:, i]
        cols.append((v, -om @ v))
    middle = vecs[:, n_big : 2 * n - n_big]
    flat = _symplectic_basis(middle, om)
    cols.extend(zip(flat[0::2], flat[1::2]))
    if len(cols) != n:
        raise NumericInconsistency("could not build a symplectic eigenbasis")
    w = np.column_stack([c for pair in cols for c in pair])
    r = np.array([np.log(lam[i]) for i in big] + [0.0] * (n - n_big))
    return BlochMessiahResult(O1=u @ w, O2=w.T, r=r)


# ----------------------------------------------------------------------------
# lifting symplectic maps to Fock unitaries


def passive_to_mode_matrix(o):
    """Complex matrix u with a_j -> sum_k u_jk a_k for an orthogonal symplectic O."""
    n = o.shape[0] // 2
    return np.array([[o[2 * j, 2 * k] + 1j * o[2 * j + 1, 2 * k] for k in range(n)] for j in range(n)])


def mode_matrix_to_passive(u):
    n = u.shape[0]
    o = np.zeros((2 * n, 2 * n))
    for j in range(n):
        for k in range(n):
            z = u[j, k]
            o[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = [[z.real, -z.imag], [z.imag, z.real]]
    return o


def _rotation_angle(o):
    # [[c, s], [-s, c]] is the symplectic matrix of phase_rotation(theta)
    return float(np.arctan2(o[0, 1], o[0, 0]))


def decompose_two_mode_passive(u, atol=1e-12):
    """Angles with u = P(a1, a2) B(theta) P(b1, 0).

    P(c1, c2) = diag(e^{-i c1}, e^{-i c2}) is a pair of phase rotations and
    B(theta) = [[cos, sin], [-sin, cos]] the phi = 0 beamsplitter.
    """
    c, s = abs(u[0, 0]), abs(u[0, 1])
    theta = float(np.arctan2(s, c))
    if s < atol:
        a1, b1, a2 = -np.angle(u[0, 0]), 0.0, -np.angle(u[1, 1])
    elif c < atol:
        a1, b1 = -np.angle(u[0, 1]), 0.0
        a2 = -np.angle(-u[1, 0])
    else:
        a1 = -np.angle(u[0, 1])
        b1 = -np.angle(u[0, 0]) - a1
        a2 = -np.angle(u[1, 1])
    return float(a1), float(a2), theta, float(b1)


def _passive_unitary(o, d):
    if o.shape[0] == 2:
        return fock.phase_rotation(_rotation_angle(o), d).mat
    a1, a2, theta, b1 = decompose_two_mode_passive(passive_to_mode_matrix(o))
    phase = np.arange(d)
    left = np.exp(-1j * (a1 * phase[:, None] + a2 * phase[None, :])).ravel()
    right = np.exp(-1j * b1 * np.repeat(phase, d))
    bs = fock.beamsplitter(theta, 0.0, d).mat
    return left[:, None] * bs * right[None, :]


def _squeeze_unitary(r, d, pad):
    if len(r) == 1:
        return fock.squeeze(r[0], d, pad).mat
    return np.kron(fock.squeeze(r[0], d, pad).mat, fock.squeeze(r[1], d, pad).mat)


def symplectic_to_unitary(s, d, pad=None):
    """Fock unitary on the truncated space realizing symplectic ``s``."""
    s = np.asarray(s, dtype=float)
    n = s.shape[0] // 2
    bm = bloch_messiah(s)
    u = _passive_unitary(bm.O1, d) @ _squeeze_unitary(bm.r, d, pad) @ _passive_unitary(bm.O2, d)
    return fock.ModeOperator(u, "U_S", modes=n)


def _local_conj(t, op, mode):
    # t[ia, ib, ja, jb] -> (op on ``mode``) t (op on ``mode``)†
    t = np.moveaxis(np.tensordot(op, t, axes=(1, mode)), 0, mode)
    return np.moveaxis(np.tensordot(t, op.conj(), axes=(2 + mode, 1)), 3, 2 + mode)


def _passive_conj(mat, o, d):
    a1, a2, theta, b1 = decompose_two_mode_passive(passive_to_mode_matrix(o))
    n = np.arange(d)
    right = np.exp(-1j * b1 * np.repeat(n, d))
    left = np.exp(-1j * (a1 * n[:, None] + a2 * n[None, :])).ravel()
    perm, bounds, blocks = fock.beamsplitter_blocks(theta, 0.0, d)
    # in the permuted basis the beamsplitter is block diagonal
    work = (right[perm, None] * mat[np.ix_(perm, perm)]) * right.conj()[None, perm]
    for k, block in enumerate(blocks):
        s = slice(bounds[k], bounds[k + 1])
        work[s] = block @ work[s]
    work = work.T.copy()
    for k, block in enumerate(blocks):
        s = slice(bounds[k], bounds[k + 1])
        work[s] = block.conj() @ work[s]
    out = np.empty_like(work)
    out[np.ix_(perm, perm)] = work.T
    return left[:, None] * out * left.conj()[None, :]


def conjugate_two_mode(s, mat, d):
    """U_S X U_S† for a two-mode operator X given as a (d², d²) matrix.

    Same result as conjugating with ``symplectic_to_unitary(s, d)`` but
    applied layer by layer: local squeezers by tensor contraction and the
    beamsplitter as a sparse matrix, so no d²-by-d² unitary is formed.
    """
    bm = bloch_messiah(np.asarray(s, dtype=float))
    mat = _passive_conj(np.asarray(mat, dtype=complex), bm.O2, d)
    t = mat.reshape(d, d, d, d)
    for mode in (0, 1):
        t = _local_conj(t, fock.squeeze(bm.r[mode], d).mat, mode)
    return _passive_conj(t.reshape(d * d, d * d), bm.O1, d)


# ----------------------------------------------------------------------------
# reference Gaussian state


def single_mode_parameters(m):
    """``(alpha, theta, r, nbar)`` with V realized by D(alpha) R(theta) S(r) tau(nbar).

    The squeezing axis is the principal eigenvector of V, taken at an angle
    in [0, pi).
    """
    nu = m.sqrt_det
    if nu < 0.5 - 1e-10:
        raise NoPhysicalReference(f"sqrt(det V) = {nu:.6g} below 1/2")
    nbar = max(nu - 0.5, 0.0)
    w, vecs = np.linalg.eigh(m.cov / nu)
    r = 0.25 * np.log(w[1] / w[0])
    phi = np.arctan2(vecs[1, 1], vecs[0, 1]) % np.pi
    alpha = (m.mean[0] + 1j * m.mean[1]) / np.sqrt(2)
    return complex(alpha), float(-phi), float(r), float(nbar)


def _crop(mat, d, big, modes):
    if modes == 1:
        return mat[:d, :d]
    return mat.reshape(big, big, big, big)[:d, :d, :d, :d].reshape(d * d, d * d)


def _finish(mat, d, big, modes):
    out = _crop(mat, d, big, modes)
    out = 0.5 * (out + out.conj().T)
    tr = np.trace(out).real
    return fock.DensityMatrix(out / tr, modes=modes, leakage=abs(1.0 - tr))


def gaussian_state(alpha, theta, r, nbar, d, pad=None):
    """D(alpha) R(theta) S(r) tau(nbar) S† R† D†, built padded and cropped to ``d``."""
    big = d + (d if pad is None else pad)
    w, _ = fock.thermal_weights(nbar, big)
    u = fock.displacement(alpha, big).mat @ fock.phase_rotation(theta, big).mat @ fock.squeeze(r, big).mat
    return _finish((u * w) @ u.conj().T, d, big, 1)


def reference_gaussian(m, d, pad=None):
    """Gaussian state with the first and second moments in ``m``.

    The state is synthesized on a padded basis and cropped; weight lost in
    the crop is recorded as leakage rather than raised.
    """
    if m.modes == 1:
        return gaussian_state(*single_mode_parameters(m), d, pad=pad)
    nu_plus, nu_minus = symplectic_eigenvalues(m)
    if nu_minus < 0.5 - 1e-10:
        raise NoPhysicalReference(f"smallest symplectic eigenvalue {nu_minus:.6g} below 1/2")
    big = d + (max(d // 2, 4) if pad is None else pad)
    wl = williamson(m)
    t = np.linalg.inv(wl.S)
    wa, _ = fock.thermal_weights(max(wl.nu[0] - 0.5, 0.0), big)
    wb, _ = fock.thermal_weights(max(wl.nu[1] - 0.5, 0.0), big)
    u = symplectic_to_unitary(t, big).mat
    alphas = [(m.mean[0] + 1j * m.mean[1]) / np.sqrt(2), (m.mean[2] + 1j * m.mean[3]) / np.sqrt(2)]
    if any(abs(a) > 0 for a in alphas):
        disp = np.kron(fock.displacement(alphas[0], big).mat, fock.displacement(alphas[1], big).mat)
        u = disp @ u
    weights = np.kron(wa, wb)
    return _finish((u * weights) @ u.conj().T, d, big, 2)
