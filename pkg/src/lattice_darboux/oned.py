"""One-dimensional tridiagonal operators: factorization, Darboux transforms,
the discrete shifted oscillator and the q-deformed oscillator.

The factorization of ``L = c_{n-1} T^{-1} + v_n + c_n T`` into first-order
pieces ``Q = a_n + b_n T`` runs through a discrete Riccati recursion; Darboux
transforms exchange the factors.  Two explicitly solvable families live here:
the square-root-coefficient oscillator whose ground state squares to a
Poisson weight, and the exponential-coefficient q-oscillator with geometric
levels ``1 - a^{±2k}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import mutations
from .stencil import StencilOperator, interior_equal
from .window import Field, LatticeError, Window


class FactorizationError(ValueError):
    """Riccati recursion failed (negative discriminant or zero pivot)."""

    def __init__(self, message: str, site: int | None = None):
        super().__init__(message)
        self.site = site


# --------------------------------------------------------------------- types
@dataclass(frozen=True)
class Jacobi1D:
    """Real tridiagonal operator; ``c[i]`` couples site ``lo+i`` to ``lo+i+1``."""

    window: Window
    c: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.window.dims != 1:
            raise LatticeError("Jacobi1D lives on a 1D window")
        c = np.asarray(self.c, dtype=float)
        v = np.asarray(self.v, dtype=float)
        n = self.window.shape[0]
        if c.shape != (n,) or v.shape != (n,):
            raise LatticeError("coefficient arrays must match the window size")
        if np.any(c[:-1] == 0.0):
            raise LatticeError("off-diagonal c must be nonvanishing on the window")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "v", v)

    def as_stencil(self) -> StencilOperator:
        cm = np.empty_like(self.c)
        cm[1:] = self.c[:-1]
        cm[0] = 0.0          # value at the edge is never used by interior sums
        return StencilOperator(self.window, {(0,): self.v, (1,): self.c, (-1,): cm})


@dataclass(frozen=True)
class FirstOrder1D:
    """``Q = a_n + b_n T`` with its adjoint ``Q^+ = a_n + b_{n-1} T^{-1}``."""

    window: Window
    a: np.ndarray
    b: np.ndarray

    def as_stencil(self) -> StencilOperator:
        return StencilOperator(self.window, {(0,): self.a, (1,): self.b})

    def adjoint_stencil(self) -> StencilOperator:
        return self.as_stencil().adjoint()


# ------------------------------------------------------------- factorization
def riccati_factorize(L: Jacobi1D, alpha: float, b0: float,
                      signs: np.ndarray | None = None,
                      check_tol: float = 1e-12) -> FirstOrder1D:
    """Solve ``v_n + alpha = a_n^2 + b_n^2``, ``a_{n+1} b_n = c_n`` forward.

    ``b0`` seeds ``b`` at the left edge; ``signs[i]`` picks the square-root
    branch at site ``lo+i`` (``signs[0]`` applies to the edge value of ``a``).
    Returns ``Q`` with ``Q Q^+ == L + alpha`` verified on the interior.
    """
    if b0 == 0:
        raise FactorizationError("b0 must be nonzero")
    n = L.window.shape[0]
    sg = np.ones(n) if signs is None else np.asarray(signs, dtype=float)
    if sg.shape != (n,) or np.any(np.abs(sg) != 1.0):
        raise FactorizationError("signs must be +-1 per site")
    a = np.empty(n)
    b = np.empty(n)
    b[0] = b0
    disc = L.v[0] + alpha - b0 * b0
    if disc < 0:
        raise FactorizationError(f"negative discriminant at left edge: {disc}",
                                 site=L.window.lo[0])
    a[0] = sg[0] * np.sqrt(disc)
    for i in range(1, n):
        if b[i - 1] == 0.0:
            raise FactorizationError("zero pivot b; factorization fails for this seed",
                                     site=L.window.lo[0] + i - 1)
        a[i] = L.c[i - 1] / b[i - 1]
        disc = L.v[i] + alpha - a[i] * a[i]
        if disc < 0:
            raise FactorizationError(f"negative discriminant {disc}",
                                     site=L.window.lo[0] + i)
        b[i] = sg[i] * np.sqrt(disc)
    q = FirstOrder1D(L.window, a, b)
    prod = q.as_stencil() @ q.adjoint_stencil()
    target = L.as_stencil() + alpha * StencilOperator.identity(L.window)
    rep = interior_equal(prod, target, check_tol, relative=True)
    if not rep.equal:
        raise FactorizationError(f"factorization check failed: rel dev {rep.rel_dev:.3e}")
    return q


def riccati_factorize_b(L: Jacobi1D, alpha: float, b_seed: float,
                        signs: np.ndarray | None = None) -> FirstOrder1D:
    """Mirror factorization ``L + alpha = Q^+ Q`` from a left seed for ``b_{lo-1}``.

    The recursion is ``a_n^2 = v_n + alpha - b_{n-1}^2``, ``b_n = c_n / a_n``;
    the returned ``Q = a_n + b_n T`` satisfies ``Q^+ Q == L + alpha`` on the
    interior (the seed plays the role of the coupling just left of the window).
    """
    n = L.window.shape[0]
    sg = np.ones(n) if signs is None else np.asarray(signs, dtype=float)
    a = np.empty(n)
    b = np.empty(n)
    prev_b = b_seed
    for i in range(n):
        disc = L.v[i] + alpha - prev_b * prev_b
        if disc < 0:
            raise FactorizationError(f"negative discriminant {disc}",
                                     site=L.window.lo[0] + i)
        a[i] = sg[i] * np.sqrt(disc)
        if a[i] == 0.0:
            raise FactorizationError("zero pivot a", site=L.window.lo[0] + i)
        b[i] = L.c[i] / a[i]
        prev_b = b[i]
    return FirstOrder1D(L.window, a, b)


def darboux(q: FirstOrder1D, alpha: float) -> Jacobi1D:
    """Exchange the factors: the operator with ``Q^+ Q == (result) + alpha``.

    Coefficients: ``c~_n = a_n b_n`` and ``v~_n = a_n^2 + b_{n-1}^2 - alpha``;
    the window loses its left edge where ``b_{n-1}`` is unavailable.
    """
    w = Window((q.window.lo[0] + 1,), (q.window.hi[0],))
    c = (q.a * q.b)[1:]
    v = (q.a[1:] ** 2 + q.b[:-1] ** 2) - alpha
    return Jacobi1D(w, c, v)


# ------------------------------------------------- shifted oscillator family
@dataclass(frozen=True)
class CharlierParams:
    """Square-root coefficient family ``1 + sqrt(b (n0 + n)) T`` with b > 0."""

    b: float
    n0: int = 0

    def __post_init__(self):
        if self.b <= 0:
            raise LatticeError("slope b must be positive")

    def admissible(self, window: Window) -> bool:
        return window.lo[0] + self.n0 >= 1


def _check_admissible(p: CharlierParams, window: Window):
    if window.dims != 1:
        raise LatticeError("expected a 1D window")
    if not p.admissible(window):
        raise LatticeError(
            f"window {window} leaves the admissible half-line n + n0 >= 1")


def _annihilation_ext(p: CharlierParams, window: Window) -> StencilOperator:
    # sqrt coefficient clamped at the half-line edge: on the invariant
    # subspace (psi = 0 for n + n0 <= 0) this agrees with the operator itself
    k = window.axis_range(0) + p.n0
    coeff = np.sqrt(p.b * np.maximum(k, 0)) * mutations.factor("oned.charlier")
    return StencilOperator(window, {(0,): np.ones(window.shape), (1,): coeff})


def charlier_annihilation(p: CharlierParams, window: Window) -> StencilOperator:
    """``A = 1 + sqrt(b (n0 + n)) T``; kills the ground state."""
    _check_admissible(p, window)
    return _annihilation_ext(p, window)


def charlier_creation(p: CharlierParams, window: Window) -> StencilOperator:
    return charlier_annihilation(p, window).adjoint()


def charlier_hamiltonian(p: CharlierParams, window: Window) -> StencilOperator:
    """``H = A^+ A`` (creation times annihilation); spectrum ``k * b``, k >= 0."""
    return charlier_creation(p, window) @ charlier_annihilation(p, window)


def charlier_ground_state(p: CharlierParams, window: Window) -> Field:
    """Solution of ``A psi = 0`` normalized to ``psi = 1`` at ``k = n + n0 = 1``.

    Closed form: ``psi_k = (-1)^(k-1) / sqrt(b^(k-1) (k-1)!)``, so the squares
    follow a Poisson-type weight with rate ``1/b``.
    """
    _check_admissible(p, window)
    k = window.axis_range(0) + p.n0
    logmag = -0.5 * ((k - 1) * np.log(p.b) + gammaln(k))
    sign = np.where((k - 1) % 2 == 0, 1.0, -1.0)
    return Field(window, sign * np.exp(logmag))


def charlier_polynomials(p: CharlierParams, kmax: int, window: Window) -> list[Field]:
    """``P_k = (A^+)^k psi_0 / psi_0`` for k = 0..kmax, all on ``window``.

    The creation operator shrinks windows on the left, so the iteration runs
    on the window extended below the half-line edge, where the ground state
    vanishes identically and the clamped coefficients act on the invariant
    subspace; the ratios are then restricted back to the requested window.
    """
    _check_admissible(p, window)
    ext = Window((window.lo[0] - kmax,), (window.hi[0],))
    k = ext.axis_range(0) + p.n0
    logmag = np.where(k >= 1, -0.5 * ((k - 1) * np.log(p.b) + gammaln(np.maximum(k, 1))), 0.0)
    vals = np.where(k >= 1, np.where((k - 1) % 2 == 0, 1.0, -1.0) * np.exp(logmag), 0.0)
    psi0_ext = Field(ext, vals)
    cre = _annihilation_ext(p, ext).adjoint()
    psi0 = psi0_ext.restrict(window)
    out = [Field.constant(window, 1.0)]
    cur = psi0_ext
    for _ in range(kmax):
        cur = cre.apply(cur)
        out.append(cur.restrict(window) / psi0)
    return out


def heisenberg_residual(p: CharlierParams, alpha: float, window: Window) -> float:
    """Max interior deviation of ``A A^+ - A^+ A - alpha``.

    Expanding the products gives ``A A^+ - A^+ A = b`` identically, so the
    residual vanishes exactly when ``alpha == b``.
    """
    ann = charlier_annihilation(p, window)
    cre = charlier_creation(p, window)
    comm = ann @ cre - cre @ ann - alpha * StencilOperator.identity(window)
    return max(float(np.max(np.abs(a))) for a in comm.terms.values())


# --------------------------------------------------------- q-oscillator family
@dataclass(frozen=True)
class ExpQ1D:
    """Geometric-coefficient first-order operator ``Q = 1 + c a^n T``."""

    c: float
    a: float

    def __post_init__(self):
        if self.a == 0 or self.c == 0:
            raise LatticeError("parameters a and c must be nonzero")

    def stencil(self, window: Window) -> StencilOperator:
        n = window.axis_range(0).astype(float)
        # c * a^n in log space; the sign alternates for negative a
        mag = np.exp(n * np.log(abs(self.a)))
        sign = np.sign(self.a) ** np.mod(n, 2).astype(int)
        return StencilOperator(window, {(0,): np.ones(window.shape),
                                        (1,): self.c * sign * mag})


def q_osc_relation_residual(q: ExpQ1D, window: Window) -> float:
    """Relative deviation of ``Q Q^+ - 1 = a^-2 (Q1^+ Q1 - 1)``, ``c1 = c a^2``.

    This is the verified form of the shift relation between the two operator
    orderings (the scale factor is the reciprocal of the naive transcription;
    it matches the 2D pattern ``q = u^-2``).
    """
    a = q.a
    Q = q.stencil(window)
    Q1 = ExpQ1D(q.c * a * a, a).stencil(window)
    one = StencilOperator.identity(window)
    lhs = Q @ Q.adjoint() - one
    rhs = (a ** -2.0) * (Q1.adjoint() @ Q1 - one)
    rep = interior_equal(lhs, rhs, np.inf, relative=True)
    return rep.rel_dev


def tau_conjugate_residual(q: ExpQ1D, window: Window) -> float:
    """Deviation of the reflection identity ``tau Q_{c,a} tau = Q^+_{c,1/a}``.

    ``tau`` is the involution ``n -> 1 - n``; the window must be symmetric
    under it (``lo + hi == 1``).
    """
    if window.lo[0] + window.hi[0] != 1:
        raise LatticeError("window must be symmetric under n -> 1 - n")
    reflected = q.stencil(window).reflect((True,)).conjugate_by_shift((-1,))
    # reflect about 0 then shift: together realize n -> 1 - n
    target = ExpQ1D(q.c, 1.0 / q.a).stencil(window).adjoint()
    rep = interior_equal(reflected, target, np.inf, relative=True)
    return rep.rel_dev


def q_osc_levels(a: float, count: int, branch: str = "L") -> np.ndarray:
    """Predicted low-lying levels ``1 - a^(-2n)`` (|a|>1) or ``1 - a^(2n)`` (|a|<1).

    Branch table: "L" starts at n = 0 for |a| > 1 and at n = 1 for |a| < 1;
    "Ltilde" is the complement.  Numerically the "L"-labeled sequence is the
    spectrum of the anti-ordered product ``Q^+ Q`` and "Ltilde" of ``Q Q^+``
    (the operator carrying the zero mode swaps with the regime of ``a``).
    """
    if abs(a) == 1.0:
        raise LatticeError("|a| = 1 has no discrete low-lying ladder")
    if branch not in ("L", "Ltilde"):
        raise LatticeError(f"unknown branch {branch!r}")
    zero_included = (abs(a) > 1.0) == (branch == "L")
    start = 0 if zero_included else 1
    ns = np.arange(start, start + count)
    exponent = -2.0 * ns if abs(a) > 1 else 2.0 * ns
    return 1.0 - np.abs(a) ** exponent      # even powers, sign of a drops out


def q_osc_operator(q: ExpQ1D, window: Window, branch: str = "L") -> StencilOperator:
    """The truncated operator realizing the requested branch's level sequence."""
    Q = q.stencil(window)
    return (Q.adjoint() @ Q) if branch == "L" else (Q @ Q.adjoint())
