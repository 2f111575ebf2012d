"""Numerical tolerances used across the library.

The active set lives in a module-level variable so that the CLI (or a test)
can swap it for the duration of a run::

    with config.override(psd=1e-7):
        ...
"""

from __future__ import annotations

import contextlib
import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    psd: float = 1e-8
    norm: float = 1e-8
    unitary: float = 1e-6
    trunc: float = 1e-10
    bound: float = 1e-6
    # two-mode sweeps at desk-scale cutoffs cannot reach `trunc`
    sweep_trunc: float = 1e-3


_active = Tolerances()


def tol() -> Tolerances:
    return _active


@contextlib.contextmanager
def override(**changes):
    global _active
    previous = _active
    _active = dataclasses.replace(previous, **changes)
    try:
        yield _active
    finally:
        _active = previous


def set_tolerances(t: Tolerances) -> None:
    global _active
    _active = t
