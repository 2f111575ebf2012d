"""Partial-transposition entanglement tests on two-mode states.

Two criteria are provided: the covariance-matrix (Simon-Duan) test and the
non-Gaussianity/entropy test, which carries the partially transposed state
to its symplectic normal form, traces out mode A and checks the single-mode
bound on what is left of mode B.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bounds, config, fock, gaussian, measures, states
from .errors import ModeMismatch, NumericInconsistency, NumericsError, TruncationError

HEISENBERG = "heisenberg-violation"
UNPHYSICAL = "unphysical-purity"
NE_VIOLATION = "ne-violation"
UNDETECTED = "undetected"

SELF_CHECK_TOL = 1e-4
# trace allowed to fall off the enlarged basis while lifting U_S: the larger
# of a floor and a share of what truncating the state already lost
LIFT_LOSS = 1e-7
LIFT_SHARE = 0.01


@dataclass(frozen=True)
class EntanglementVerdict:
    detected: bool
    branch: str
    criterion: str
    nu_tilde: tuple
    mu_b: Optional[float] = None
    ng_b: Optional[float] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    g_squared_negative: bool = False
    strong_detected: Optional[bool] = None
    strong_rhs: Optional[float] = None

    @property
    def margin(self):
        """lhs - rhs of the single-mode test on sigma_B, when it was reached."""
        if self.lhs is None or self.rhs is None:
            return None
        return self.lhs - self.rhs


def pt_covariance(m):
    """Mirror reflection p_B -> -p_B of the moments."""
    if m.modes != 2:
        raise ModeMismatch("partial transposition needs two modes")
    flip = np.array([1.0, 1.0, 1.0, -1.0])
    return gaussian.MomentData(flip * m.mean, flip[:, None] * m.cov * flip[None, :], modes=2)


def simon_duan(m, bound_tol=None):
    bound_tol = config.tol().bound if bound_tol is None else bound_tol
    nu = gaussian.symplectic_eigenvalues(pt_covariance(m))
    detected = nu[1] < 0.5 - bound_tol
    return EntanglementVerdict(
        detected=detected, branch=HEISENBERG if detected else UNDETECTED, criterion="simon-duan", nu_tilde=nu
    )


def _pad_two_mode(mat, c, big):
    out = np.zeros((big, big, big, big), dtype=complex)
    out[:c, :c, :c, :c] = mat.reshape(c, c, c, c)
    return out.reshape(big * big, big * big)


def transformed_mode_b(rho, m_tilde, d=None, lift_loss=LIFT_LOSS):
    """sigma_B = Tr_A[U_S rho^{T_B} U_S†] with S the Williamson map of the
    partially transposed covariance (smaller eigenvalue on mode B).

    U_S moves weight upward in number, so the product is formed on an
    enlarged basis: 1.5x the state's cutoff, then 2x if the trace that
    falls off the edge exceeds ``lift_loss`` or a hundredth of the state's own
    leakage, whichever is larger.  An explicit ``d`` fixes the basis instead.
    """
    wl = gaussian.williamson(m_tilde)
    c = rho.cutoff
    sizes = (c + max(c // 2, 8), 2 * c) if d is None else (d,)
    allowed = max(lift_loss, LIFT_SHARE * rho.leakage)
    pt = fock.partial_transpose_B(rho).mat
    for big in sizes:
        mat = gaussian.conjugate_two_mode(wl.S, _pad_two_mode(pt, c, big), big)
        loss = abs(1.0 - np.trace(mat).real)
        if loss <= allowed:
            break
    sigma = np.einsum("abac->bc", mat.reshape(big, big, big, big))
    sigma = fock.DensityMatrix(sigma / np.trace(sigma).real, maybe_nonpositive=True, leakage=rho.leakage + loss)
    return sigma, wl


def _thermal_reference(sigma, nu_minus):
    m = gaussian.moments_of(sigma, check=False)
    alpha = (m.mean[0] + 1j * m.mean[1]) / math.sqrt(2)
    nbar = max(nu_minus - 0.5, 0.0)
    d = sigma.cutoff
    t = config.tol().trunc
    cut = d
    while True:
        ref = gaussian.gaussian_state(alpha, 0.0, 0.0, nbar, cut)
        if ref.leakage <= t or cut >= 4 * d:
            return ref, m
        cut += max(cut // 2, 2)


def ne_criterion(rho, strong=False, trunc_tol=None, bound_tol=None, self_check_tol=SELF_CHECK_TOL):
    """Non-Gaussianity and entropy based entanglement test.

    Branches are tried in order and the first that fires decides:
    Heisenberg violation of the transposed covariance, purity above one,
    a negative superfidelity argument (reported as unphysical purity too),
    and finally h(nu_-) < -ln(mu) + N_g(sigma_B).
    """
    t = config.tol()
    bound_tol = t.bound if bound_tol is None else bound_tol
    if rho.modes != 2:
        raise ModeMismatch("entanglement test needs a two-mode state")
    m_tilde = pt_covariance(gaussian.moments_of(rho, trunc_tol))
    nu = gaussian.symplectic_eigenvalues(m_tilde)
    if nu[1] < 0.5 - bound_tol:
        return EntanglementVerdict(True, HEISENBERG, "ne-weak", nu)

    sigma, wl = transformed_mode_b(rho, m_tilde)
    nu_minus = float(wl.nu[1])
    mu = measures.purity(sigma)
    if mu > 1 + bound_tol:
        return EntanglementVerdict(True, UNPHYSICAL, "ne-weak", nu, mu_b=mu)

    ref, m_sigma = _thermal_reference(sigma, nu_minus)
    drift = np.max(np.abs(m_sigma.cov - nu_minus * np.eye(2)))
    if drift > self_check_tol:
        raise NumericInconsistency(f"covariance of sigma_B is off its normal form by {drift:.3e}")
    lhs = bounds.h(max(nu_minus, 0.5))
    big = max(sigma.cutoff, ref.cutoff)
    try:
        g = measures.superfidelity(fock.embed(sigma, big), ref)
    except measures.GSquaredNegative:
        return EntanglementVerdict(True, UNPHYSICAL, "ne-weak", nu, mu_b=mu, lhs=lhs, g_squared_negative=True)
    ng = -2.0 * math.log(g)
    if -1e-9 < ng < 0:
        ng = 0.0
    rhs = -math.log(mu) + ng
    detected = lhs < rhs - bound_tol

    strong_detected = strong_rhs = None
    if strong:
        w = np.linalg.eigvalsh(sigma.mat)
        if w[0] >= -t.psd:
            psd = fock.DensityMatrix(sigma.mat, leakage=sigma.leakage)
            f = measures.uhlmann_fidelity(fock.embed(psd, big), ref)
            strong_rhs = measures.von_neumann_entropy(psd) + max(-2.0 * math.log(f), 0.0)
            strong_detected = lhs < strong_rhs - bound_tol
    return EntanglementVerdict(
        detected,
        NE_VIOLATION if detected else UNDETECTED,
        "ne-strong" if strong_detected else "ne-weak",
        nu,
        mu_b=mu,
        ng_b=ng,
        lhs=lhs,
        rhs=rhs,
        strong_detected=strong_detected,
        strong_rhs=strong_rhs,
    )


# ----------------------------------------------------------------------------
# sweeps over the coupled cat-thermal family


@dataclass(frozen=True)
class SweepCell:
    r: float
    nbar: float
    cutoff: Optional[int]
    simon_duan: Optional[EntanglementVerdict]
    ne: Optional[EntanglementVerdict]
    error: Optional[str] = None
    leakage: Optional[float] = None

    @property
    def failed(self):
        return self.error is not None


def evaluate_cell(alpha, r, nbar, cutoffs=(24, 28), strong=False, trunc_tol=None, bound_tol=None):
    """Both verdicts for one (r, nbar) point of the coupled cat-thermal family.

    When the exact moments already violate nu_- >= 1/2 the cell is settled
    without a Fock-space state (``cutoff`` is None); both tests stop at the
    covariance branch there.  Otherwise the state is built and both verdicts
    come from its truncated moments, with one cutoff escalation on
    truncation failure.
    """
    trunc_tol = config.tol().sweep_trunc if trunc_tol is None else trunc_tol
    exact = simon_duan(states.cat_thermal_tms_moments(alpha, nbar, r), bound_tol)
    if exact.detected:
        ne = EntanglementVerdict(True, HEISENBERG, "ne-weak", exact.nu_tilde)
        return SweepCell(r, nbar, None, exact, ne, leakage=0.0)
    last = None
    for d in cutoffs:
        try:
            rho = states.cat_thermal_tms(alpha, nbar, r, d, trunc_tol=trunc_tol)
            sd = simon_duan(gaussian.moments_of(rho, trunc_tol), bound_tol)
            ne = ne_criterion(rho, strong=strong, trunc_tol=trunc_tol, bound_tol=bound_tol)
            return SweepCell(r, nbar, d, sd, ne, leakage=rho.leakage)
        except TruncationError as exc:
            last = f"truncation: {exc}"
        except NumericsError as exc:
            return SweepCell(r, nbar, d, None, None, error=f"{type(exc).__name__}: {exc}")
    return SweepCell(r, nbar, None, None, None, error=last)


def _cell_task(args):
    alpha, r, nbar, cutoffs, strong, tolerances = args
    config.set_tolerances(tolerances)
    return evaluate_cell(alpha, r, nbar, cutoffs, strong)


def criterion_sweep(alpha, r_values, nbar_values, cutoffs=(24, 28), strong=False, jobs=1):
    """Verdicts on the (r, nbar) grid, r-major, in deterministic order."""
    tasks = [
        (float(alpha), float(r), float(n), tuple(cutoffs), strong, config.tol()) for r in r_values for n in nbar_values
    ]
    if jobs <= 1:
        return [_cell_task(t) for t in tasks]
    # contiguous chunks keep the two-mode squeezer cache warm in each worker
    chunk = max(1, len(nbar_values))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_cell_task, tasks, chunksize=chunk))
