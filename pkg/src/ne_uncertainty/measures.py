"""Entropy, purity, fidelity-type overlaps and the non-Gaussianity measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config, fock, gaussian
from .errors import DomainError, EntropyUndefined, NumericInconsistency, NumericsError

# eigenvalues below this are treated as numerically zero when factoring states
RANK_EPS = 1e-14


class GSquaredNegative(NumericsError):
    """Superfidelity argument is negative: one input is not a state."""

    def __init__(self, message, value):
        super().__init__(message)
        self.value = value


@dataclass(frozen=True)
class MeasureSet:
    entropy: float
    purity: float
    ng_fidelity: float
    ng_super: float
    gaussianity: float


def _mat(state):
    return fock.as_density(state).mat


def _require_state(rho):
    if isinstance(rho, fock.DensityMatrix) and rho.maybe_nonpositive:
        raise EntropyUndefined("operation needs a positive semidefinite state")


def purity(state):
    if isinstance(state, fock.FockVector):
        return float(np.vdot(state.amps, state.amps).real ** 2)
    m = state.mat
    return float(np.vdot(m, m).real)


def overlap(rho, sigma):
    """Tr[rho sigma]."""
    if isinstance(rho, fock.FockVector):
        return float(np.vdot(rho.amps, _mat(sigma) @ rho.amps).real)
    if isinstance(sigma, fock.FockVector):
        return overlap(sigma, rho)
    return float(np.vdot(sigma.mat, rho.mat).real)


def von_neumann_entropy(state):
    """-Tr[rho ln rho] in nats."""
    if isinstance(state, fock.FockVector):
        return 0.0
    _require_state(state)
    w, _ = fock.clamped_spectrum(state.mat)
    w = w[w > 0]
    return float(max(-np.sum(w * np.log(w)), 0.0))


def _factor(state):
    """Matrix A with rho = A A† keeping only the numerically nonzero spectrum."""
    if isinstance(state, fock.FockVector):
        return state.amps[:, None]
    _require_state(state)
    w, v = fock.clamped_spectrum(state.mat)
    keep = w > RANK_EPS
    return v[:, keep] * np.sqrt(w[keep])


def _clamp_unit(f):
    if f > 1.0 + 1e-9:
        raise NumericInconsistency(f"fidelity {f!r} exceeds 1")
    return min(max(f, 0.0), 1.0)


def uhlmann_fidelity(rho, sigma):
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)).

    Computed as the trace norm of A† B for factorizations rho = A A†,
    sigma = B B†, which avoids square roots of round-off eigenvalues.
    """
    if isinstance(rho, fock.FockVector) or isinstance(sigma, fock.FockVector):
        _require_state(rho)
        _require_state(sigma)
        return _clamp_unit(float(np.sqrt(max(overlap(rho, sigma), 0.0))))
    a, b = _factor(rho), _factor(sigma)
    sv = np.linalg.svd(a.conj().T @ b, compute_uv=False)
    return _clamp_unit(float(sv.sum()))


def superfidelity(rho, sigma):
    """G = sqrt(Tr[rho sigma] + sqrt(1 - Tr rho²) sqrt(1 - Tr sigma²)).

    Only trace formulas are involved, so non-positive inputs are accepted;
    a negative argument anywhere raises GSquaredNegative.
    """

    def root(x):
        if x < -1e-9:
            raise GSquaredNegative(f"negative purity deficit {x:.3e}", x)
        return np.sqrt(max(x, 0.0))

    g2 = overlap(rho, sigma) + root(1.0 - purity(rho)) * root(1.0 - purity(sigma))
    if g2 < 0:
        raise GSquaredNegative(f"G² = {g2:.3e} < 0", g2)
    return float(np.sqrt(g2))


def renyi_relative_entropy(rho, sigma, alpha):
    """Sandwiched Rényi relative entropy S_alpha(rho || sigma), alpha >= 1/2.

    ``alpha == 1`` gives Tr[rho ln rho - rho ln sigma].  For alpha >= 1 a
    support violation (weight of rho beyond psd_tol on the kernel of sigma)
    returns +inf; for 1/2 <= alpha < 1 the trace formula is evaluated as is.
    """
    if alpha < 0.5:
        raise DomainError("Rényi order below 1/2 is not supported")
    r = fock.as_density(rho)
    s = fock.as_density(sigma)
    _require_state(r)
    _require_state(s)
    ws, vs = fock.clamped_spectrum(s.mat)
    kernel = ws <= RANK_EPS
    if alpha >= 1 and kernel.any():
        weight = np.einsum("ik,ij,jk->", vs[:, kernel].conj(), r.mat, vs[:, kernel]).real
        if weight > config.tol().psd:
            return float("inf")
    if alpha == 1:
        wr, _ = fock.clamped_spectrum(r.mat)
        wr = wr[wr > 0]
        log_s = np.log(np.where(kernel, 1.0, ws))
        # kernel directions carry no weight of rho here and are dropped
        log_s[kernel] = 0.0
        cross = np.einsum("ik,ij,jk,k->", vs.conj(), r.mat, vs, log_s).real
        return float(np.sum(wr * np.log(wr)) - cross)
    e = (1.0 - alpha) / (2.0 * alpha)
    if e < 0:
        # pseudo-inverse power on the support of sigma
        powered = np.where(kernel, 0.0, np.where(kernel, 1.0, ws) ** e)
    else:
        powered = ws**e
    half = (vs * powered) @ vs.conj().T
    # eigenvalues of half rho half are the squared singular values of half A;
    # taking them this way keeps round-off at 1e-16 instead of its square root
    sv = np.linalg.svd(half @ _factor(r), compute_uv=False)
    q = float(np.sum(sv ** (2.0 * alpha)))
    return float(np.log(q) / (alpha - 1.0))


# ----------------------------------------------------------------------------
# measures against the reference Gaussian state


MAX_REFERENCE_CUTOFF = 400


def reference_of(state, trunc_tol=None, max_cutoff=None):
    """Reference Gaussian sharing the state's first and second moments.

    The reference usually spreads further in number space than the state
    itself, so for one mode it is built on a basis enlarged until its own
    leakage drops below ``trunc_tol`` (capped at ``max_cutoff``).  Two-mode
    references stay at the state's cutoff unless ``max_cutoff`` says otherwise.
    """
    t = config.tol().trunc if trunc_tol is None else trunc_tol
    m = gaussian.moments_of(state, trunc_tol)
    d = state.cutoff
    if max_cutoff is None:
        max_cutoff = min(4 * d, MAX_REFERENCE_CUTOFF) if state.modes == 1 else d
    cut = d
    while True:
        ref = gaussian.reference_gaussian(m, cut)
        if ref.leakage <= t or cut >= max_cutoff:
            return ref
        cut = min(max_cutoff, cut + max(cut // 2, 2))


def _aligned(state, ref):
    d = max(state.cutoff, ref.cutoff)
    return fock.embed(state, d), fock.embed(ref, d)


def non_gaussianity(state, reference=None):
    """-2 ln F(rho, rho_G)."""
    ref = reference_of(state) if reference is None else reference
    f = uhlmann_fidelity(*_aligned(state, ref))
    return float(max(-2.0 * np.log(f), 0.0))


def non_gaussianity_g(state, reference=None):
    """-2 ln G(rho, rho_G), the superfidelity lower bound of the measure above."""
    ref = reference_of(state) if reference is None else reference
    val = -2.0 * np.log(superfidelity(*_aligned(state, ref)))
    if -1e-9 < val < 0:
        val = 0.0
    return float(val)


def gaussianity(state, reference=None):
    """Tr[rho rho_G] / Tr[rho_G²]."""
    ref = reference_of(state) if reference is None else reference
    return overlap(*_aligned(state, ref)) / purity(ref)


def measure_set(state, reference=None):
    ref = reference_of(state) if reference is None else reference
    return MeasureSet(
        entropy=von_neumann_entropy(state),
        purity=purity(state),
        ng_fidelity=non_gaussianity(state, ref),
        ng_super=non_gaussianity_g(state, ref),
        gaussianity=gaussianity(state, ref),
    )
