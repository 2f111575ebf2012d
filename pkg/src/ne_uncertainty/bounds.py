"""The entropy function h and the uncertainty bounds built on it.

Every single-mode bound is expressed on the sqrt(det V) axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import config, gaussian, measures
from .errors import DomainError

RS = 0.5
PG_LOWER_G = 2.0 / math.e


def h(x):
    """Entropy of a thermal state whose sqrt(det V) is ``x``."""
    if x < 0.5 - 1e-12:
        raise DomainError(f"h is defined for x >= 1/2, got {x!r}")
    n = x - 0.5
    if n <= 0:
        return 0.0
    # (n+1) ln(n+1) - n ln n without cancellation at large n
    return math.log1p(n) + n * math.log1p(1.0 / n)


def h_inverse(y, tol=1e-12):
    """Unique x >= 1/2 with h(x) = y, by bisection."""
    if y < 0:
        raise DomainError(f"h_inverse needs y >= 0, got {y!r}")
    if y == 0:
        return 0.5
    lo, hi = 0.5, 0.5 + math.exp(y)
    while h(hi) < y:
        hi = 0.5 + 2 * (hi - 0.5)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def rs_check(m):
    """Margin of sqrt(det V) >= 1/2."""
    return m.sqrt_det - RS


def eb_bound(entropy):
    return h_inverse(entropy)


def ne_bound(entropy, ng):
    return h_inverse(entropy + ng)


def ne_weak_bound(mu, ng_g):
    if not 0 < mu <= 1 + 1e-12:
        raise DomainError(f"purity must lie in (0, 1], got {mu!r}")
    if ng_g < 0:
        raise DomainError("non-Gaussianity must be non-negative")
    return h_inverse(max(-math.log(mu), 0.0) + ng_g)


def pg_bound_pure(g):
    """Pure-state purity-and-Gaussianity bound as a sqrt(det V) value.

    Returns None when g <= 2/e, outside the branches where the bound is
    known; callers fall back to the RS value there.
    """
    if g <= 0:
        raise DomainError(f"Gaussianity must be positive, got {g!r}")
    if g > 1:
        return g / (2 * (2 - g)) if g < 2 else math.inf
    if g > PG_LOWER_G:
        return (2 + 2 * math.sqrt(1 - g) - g) / (2 * g)
    return None


def two_mode_ne_check(nu_plus, nu_minus, entropy, ng):
    """h(nu+) + h(nu-) - S - N."""
    return h(nu_plus) + h(nu_minus) - entropy - ng


def ne_region(b, nu_grid):
    """Mask over (nu_+, nu_-) pairs allowed by h(nu+) + h(nu-) >= B.

    ``mask[i, j]`` refers to nu_+ = nu_grid[i], nu_- = nu_grid[j].
    """
    if b < 0:
        raise DomainError("B must be non-negative")
    nu = np.asarray(nu_grid, dtype=float)
    hv = np.array([h(x) if x >= 0.5 else -np.inf for x in nu])
    plus, minus = np.meshgrid(nu, nu, indexing="ij")
    total = hv[:, None] + hv[None, :]
    return (total >= b) & (plus >= minus) & (minus >= 0.5)


@dataclass(frozen=True)
class BoundReport:
    sqrt_det_v: float
    rs: float
    eb: float
    ne: float
    ne_weak: float
    pg: Optional[float]
    margins: dict = field(default_factory=dict)


def bound_report(state, reference=None, pure_tol=1e-6):
    """All single-mode bounds for ``state`` together with their margins."""
    m = gaussian.moments_of(state)
    ref = measures.reference_of(state) if reference is None else reference
    ms = measures.measure_set(state, ref)
    sqrt_det = m.sqrt_det
    pg = None
    if ms.purity >= 1 - pure_tol:
        pg = pg_bound_pure(ms.gaussianity)
    values = {
        "rs": RS,
        "eb": eb_bound(ms.entropy),
        "ne": ne_bound(ms.entropy, ms.ng_fidelity),
        "ne_weak": ne_weak_bound(min(ms.purity, 1.0), ms.ng_super),
    }
    if pg is not None:
        values["pg"] = pg
    margins = {k: sqrt_det - v for k, v in values.items()}
    return BoundReport(sqrt_det_v=sqrt_det, pg=pg, margins=margins, **{k: values[k] for k in ("rs", "eb", "ne", "ne_weak")}), ms


def violations(report, bound_tol=None):
    bound_tol = config.tol().bound if bound_tol is None else bound_tol
    return {k: v for k, v in report.margins.items() if v < -bound_tol}
