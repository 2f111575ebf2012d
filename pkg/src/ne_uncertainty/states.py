"""Constructors for the state families and the StateSpec schema."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config, fock, gaussian
from .errors import TruncationError

FAMILIES = (
    "vacuum",
    "number",
    "coherent",
    "thermal",
    "squeezed-thermal",
    "even-cat",
    "odd-cat",
    "pacs",
    "cat-thermal-tms",
    "dense",
)

DEFAULT_CUTOFF = 40
DEFAULT_TWO_MODE_CUTOFF = 24


def _cat(alpha, d, sign):
    amps, _ = fock._coherent_amps(complex(alpha), d)
    parity = (-1.0) ** np.arange(d)
    raw = amps + sign * parity * amps
    if sign > 0:
        norm2 = 2.0 * (1.0 + math.exp(-2 * abs(alpha) ** 2))
    else:
        norm2 = -2.0 * math.expm1(-2 * abs(alpha) ** 2)
    return fock.normalized(raw / math.sqrt(norm2))


def even_cat(alpha, d):
    """(|alpha> + |-alpha>) / sqrt(2 (1 + exp(-2|alpha|²)))."""
    d = fock._check_cutoff(d)
    return _cat(alpha, d, +1)


def odd_cat(alpha, d):
    """(|alpha> - |-alpha>) / sqrt(2 (1 - exp(-2|alpha|²))); |1> at alpha = 0."""
    d = fock._check_cutoff(d)
    if alpha == 0:
        return fock.number_state(1, d)
    return _cat(alpha, d, -1)


def pacs(alpha, d):
    """Photon-added coherent state a†|alpha> / sqrt(1 + |alpha|²)."""
    d = fock._check_cutoff(d)
    amps, n = fock._coherent_amps(complex(alpha), d)
    raw = np.zeros(d, dtype=complex)
    raw[1:] = np.sqrt(n[1:]) * amps[:-1]
    return fock.normalized(raw / math.sqrt(1 + abs(alpha) ** 2))


def squeezed_thermal(r, nbar, d, alpha=0.0, theta=0.0):
    """D(alpha) R(theta) S(r) tau(nbar) S(r)† R(theta)† D(alpha)†."""
    d = fock._check_cutoff(d)
    return gaussian.gaussian_state(complex(alpha), theta, r, nbar, d)


def cat_moments(alpha, odd=True):
    """Closed-form moments of a cat state; a²|psi±> = alpha²|psi±> fixes them."""
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    if odd:
        n = 1.0 if x == 0 else x / math.tanh(x)
    else:
        n = x * math.tanh(x)
    a2 = alpha**2
    cov = np.array([[0.5 + n + a2.real, a2.imag], [a2.imag, 0.5 + n - a2.real]])
    return gaussian.MomentData(np.zeros(2), cov)


def tms_symplectic(r):
    """Symplectic matrix of S_AB(r) for real r: a -> a cosh r + b† sinh r."""
    c, s = math.cosh(r), math.sinh(r)
    return np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])


def cat_thermal_tms_moments(alpha, nbar, r):
    """Exact moments of the coupled cat-thermal state, free of truncation."""
    cat = cat_moments(alpha, odd=True)
    cov = np.zeros((4, 4))
    cov[:2, :2] = cat.cov
    cov[2:, 2:] = (nbar + 0.5) * np.eye(2)
    s = tms_symplectic(r)
    return gaussian.MomentData(np.zeros(4), s @ cov @ s.T, modes=2)


def cat_thermal_tms(alpha, nbar, r, d, trunc_tol=None):
    """S_AB(r) (|psi_-><psi_-| ⊗ tau(nbar)) S_AB(r)†.

    The odd cat sits on mode A, the thermal state on mode B.  Raises
    TruncationError when the total leakage exceeds ``trunc_tol``.
    """
    d = fock._check_cutoff(d)
    trunc_tol = config.tol().trunc if trunc_tol is None else trunc_tol
    psi = odd_cat(alpha, d)
    weights, tail = fock.thermal_weights(nbar, d)
    u = fock.two_mode_squeeze(r, d).mat
    # columns are S_AB |psi> ⊗ |k>
    cols = u @ np.kron(psi.amps[:, None], np.eye(d))
    mat = (cols * (weights / weights.sum())) @ cols.conj().T
    tr = np.trace(mat).real
    leakage = psi.leakage + tail + abs(1.0 - tr)
    if leakage > trunc_tol:
        raise TruncationError(f"cat-thermal state leaks {leakage:.3e} at cutoff {d}", leakage=leakage)
    rho = fock.DensityMatrix(mat / tr, modes=2, leakage=leakage)
    fock.require_truncation(rho, trunc_tol)
    return rho


@dataclass(frozen=True)
class StateSpec:
    family: str
    params: dict = field(default_factory=dict)
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown state family {self.family!r}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ValueError(f"invalid cutoff {self.cutoff!r}")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ValueError("state description must be a mapping")
        family = data.get("family")
        params = {k: _parse_number(v) if k != "matrix" else v for k, v in dict(data.get("params", {})).items()}
        default = DEFAULT_TWO_MODE_CUTOFF if family == "cat-thermal-tms" else DEFAULT_CUTOFF
        return cls(family=family, params=params, cutoff=int(data.get("cutoff", default)))

    def to_dict(self):
        out = {}
        for k, v in self.params.items():
            if isinstance(v, complex):
                out[k] = [v.real, v.imag]
            else:
                out[k] = v
        return {"schema_version": 1, "family": self.family, "params": out, "cutoff": self.cutoff}


def _parse_number(v):
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"parameter value {v!r} is not a number or [re, im] pair")
    return v


def _dense(params):
    m = params["matrix"]
    dim = int(m["dim"])
    re = np.asarray(m["re"], dtype=float)
    im = np.asarray(m.get("im", np.zeros(dim * dim)), dtype=float)
    if re.size != dim * dim or im.size != dim * dim:
        raise ValueError("dense matrix payload does not match its dimension")
    modes = int(params.get("modes", 1))
    mat = (re + 1j * im).reshape(dim, dim)
    rho = fock.DensityMatrix(mat, modes=modes)
    if np.linalg.eigvalsh(rho.mat)[0] < -config.tol().psd:
        raise ValueError("dense payload is not positive semidefinite")
    return rho


def build(spec):
    """Construct the state a StateSpec describes."""
    p, d = spec.params, spec.cutoff
    fam = spec.family
    try:
        if fam == "vacuum":
            return fock.vacuum(d)
        if fam == "number":
            return fock.number_state(int(p["n"]), d)
        if fam == "coherent":
            return fock.coherent_state(p["alpha"], d)
        if fam == "thermal":
            return fock.thermal_state(float(p["nbar"]), d)
        if fam == "squeezed-thermal":
            return squeezed_thermal(
                float(p.get("r", 0.0)), float(p.get("nbar", 0.0)), d, p.get("alpha", 0.0), float(p.get("theta", 0.0))
            )
        if fam == "even-cat":
            return even_cat(p["alpha"], d)
        if fam == "odd-cat":
            return odd_cat(p["alpha"], d)
        if fam == "pacs":
            return pacs(p["alpha"], d)
        if fam == "cat-thermal-tms":
            return cat_thermal_tms(float(p["alpha"]), float(p["nbar"]), float(p["r"]), d)
        return _dense(p)
    except KeyError as exc:
        raise ValueError(f"family {fam!r} is missing parameter {exc.args[0]!r}") from None
