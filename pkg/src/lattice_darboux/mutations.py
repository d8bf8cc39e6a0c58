"""Seeded single-formula mutations for suite-sensitivity testing.

Each registered site multiplies one formula by a factor slightly off 1.0 when
its mutation is active.  The demo suite must fail under every one of these;
that guards the test battery against silently vacuous checks.  Production
runs never activate a mutation (``factor`` returns exactly 1.0).
"""

from __future__ import annotations

from contextlib import contextmanager

#: the five seeded mutation sites, one per major module
SITES = (
    "oned.charlier",        # annihilation coefficient of the shifted oscillator
    "hyperbolic.k1",        # first gauge invariant of 4-point operators
    "elliptic.x",           # diagonal factor of the triangular factorization
    "groundstate.k2",       # Gaussian form of explicit zero modes
    "tetra.x",              # diagonal factor of the tetrahedral factorization
)

_active: dict[str, float] = {}


def factor(site: str) -> float:
    """Multiplier for a formula site: 1.0 unless the mutation is active."""
    return _active.get(site, 1.0)


@contextmanager
def mutated(site: str, scale: float = 1.001):
    """Activate one mutation site inside the context."""
    if site not in SITES:
        raise KeyError(f"unknown mutation site {site!r}; known: {SITES}")
    _active[site] = scale
    try:
        yield
    finally:
        _active.pop(site, None)
