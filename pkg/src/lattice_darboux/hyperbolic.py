"""Hyperbolic 4-point operators on the square lattice.

``L = a_n + b_n T1 + c_n T2 + d_n T1 T2`` factors uniquely through either
axis order; exchanging the factors with a potential-dressed middle term gives
the two Laplace transformations.  The complete gauge invariants are the two
coefficient cross-ratios K1, K2, equivalently a potential/curvature pair
(w, H) on which the transformation closes; iterating it produces a fully
discrete Toda-type chain.

All transformation formulas on invariants below are the forms validated
against the compose-expand-recompute oracle (several printed displays of
this material circulate with shifted sites); the test suite pins them by the
two-path consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mutations
from .stencil import StencilOperator, interior_equal
from .window import Field, LatticeError, Window

T1 = (1, 0)
T2 = (0, 1)
T12 = (1, 1)
ZERO = (0, 0)


class DegenerateOperatorError(ValueError):
    """A zero appeared where the transformation needs a nonzero value."""


@dataclass(frozen=True)
class QuadOp:
    """4-point operator with nonvanishing coefficient fields a, b, c, d."""

    window: Window
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        if self.window.dims != 2:
            raise LatticeError("QuadOp lives on a 2D window")
        for name in "abcd":
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.window.shape:
                raise LatticeError(f"coefficient {name} has wrong shape")
            object.__setattr__(self, name, arr)
            Field(self.window, arr).assert_nonvanishing(f"coefficient {name}")

    @classmethod
    def random(cls, window: Window, rng: np.random.Generator,
               lo: float = 0.5, hi: float = 2.0) -> "QuadOp":
        vals = [np.exp(rng.uniform(np.log(lo), np.log(hi), size=window.shape))
                for _ in range(4)]
        return cls(window, *vals)

    @classmethod
    def constant(cls, window: Window, a: float, b: float, c: float, d: float) -> "QuadOp":
        return cls(window, *(np.full(window.shape, x, dtype=float) for x in (a, b, c, d)))

    @classmethod
    def from_stencil(cls, op: StencilOperator) -> "QuadOp":
        extra = set(op.offsets) - {ZERO, T1, T2, T12}
        if extra:
            raise LatticeError(f"not a 4-point operator; extra offsets {sorted(extra)}")
        return cls(op.window, op.terms[ZERO], op.terms[T1], op.terms[T2], op.terms[T12])

    def as_stencil(self) -> StencilOperator:
        return StencilOperator(self.window, {ZERO: self.a, T1: self.b,
                                             T2: self.c, T12: self.d})

    def field(self, name: str) -> Field:
        return Field(self.window, getattr(self, name))


@dataclass(frozen=True)
class HypFactorization:
    """First-order factors and potential: ``L = f ((1+u Ti)(1+v Tj) + w)``."""

    form: str                 # "a": T1 first; "b": T2 first
    window: Window
    f: Field
    u: Field
    v: Field
    w: Field

    def reconstruct(self) -> QuadOp:
        w = self.window
        f, u, v = self.f.values, self.u.values, self.v.values
        if self.form == "a":
            inner = w.shrink([T1])
            d = (self.f * self.u).restrict(inner).values * self.v.sample(T1, inner).values
            win = inner
        else:
            inner = w.shrink([T2])
            d = (self.f * self.v).restrict(inner).values * self.u.sample(T2, inner).values
            win = inner
        sl = win.slice_in(w)
        return QuadOp(win, (f * (1 + self.w.values))[sl], (f * u)[sl], (f * v)[sl], d)


@dataclass(frozen=True)
class HypInvariants:
    """Gauge invariants: cross-ratios K1, K2 and the (w, H) basis."""

    K1: Field
    K2: Field
    w: Field
    H: Field


# -------------------------------------------------------------- factorization
def factorize_a(L: QuadOp) -> HypFactorization:
    """Unique representation ``f ((1 + u T1)(1 + v T2) + w)``.

    Formulas: ``v_{n+T1} = d_n / b_n``, ``f = c / v``, ``u = b / f``,
    ``w = a / f - 1``; validated by re-expansion to 1e-13 relative.
    """
    win = L.window.shrink([(-1, 0)])
    d_m = L.field("d").sample((-1, 0), win)
    b_m = L.field("b").sample((-1, 0), win)
    v = d_m / b_m
    f = L.field("c").restrict(win) / v
    u = L.field("b").restrict(win) / f
    w = L.field("a").restrict(win) / f - 1.0
    fac = HypFactorization("a", win, f, u, v, w)
    _check_reconstruction(L, fac)
    return fac


def factorize_b(L: QuadOp) -> HypFactorization:
    """Mirror representation ``f' ((1 + v' T2)(1 + u' T1) + w')``.

    Obtained by matching coefficients: ``u'_{n+T2} = d_n / c_n``,
    ``f' = b / u'``, ``v' = c / f'``, ``w' = a / f' - 1``.
    """
    win = L.window.shrink([(0, -1)])
    d_m = L.field("d").sample((0, -1), win)
    c_m = L.field("c").sample((0, -1), win)
    u = d_m / c_m
    f = L.field("b").restrict(win) / u
    v = L.field("c").restrict(win) / f
    w = L.field("a").restrict(win) / f - 1.0
    fac = HypFactorization("b", win, f, u, v, w)
    _check_reconstruction(L, fac)
    return fac


def _check_reconstruction(L: QuadOp, fac: HypFactorization, tol: float = 1e-13):
    back = fac.reconstruct()
    rep = interior_equal(back.as_stencil(), L.as_stencil(), tol, relative=True)
    if not rep.equal:
        raise LatticeError(f"factorization re-expansion failed: rel dev {rep.rel_dev:.2e}")


# ------------------------------------------------------ Laplace transformations
def _require_nonvanishing(w: Field, label: str):
    zeros = w.where_zero()
    if zeros:
        raise DegenerateOperatorError(f"{label} vanishes at {zeros[:4]}"
                                      + ("..." if len(zeros) > 4 else ""))


def laplace_first_with_transport(L: QuadOp) -> tuple[QuadOp, StencilOperator]:
    """First-type transformation and its solution map ``psi -> (1 + v T2) psi``.

    The new operator is ``w (1 + v T2) w^{-1} (1 + u T1) + w`` expanded by the
    generic composition kernel; the representative is normalized so the
    prefactor is 1 (identity coefficient ``1 + w~``).
    """
    fac = factorize_a(L)
    _require_nonvanishing(fac.w, "potential w of form a")
    win = fac.window
    one = StencilOperator.identity(win)
    q1 = one + StencilOperator(win, {T1: fac.u.values})
    q2 = one + StencilOperator(win, {T2: fac.v.values})
    wd = StencilOperator.diagonal(fac.w)
    winv = StencilOperator.diagonal(1.0 / fac.w)
    lt = wd @ q2 @ winv @ q1 + wd
    return QuadOp.from_stencil(lt), q2


def laplace_first(L: QuadOp) -> QuadOp:
    return laplace_first_with_transport(L)[0]


def laplace_second_with_transport(L: QuadOp) -> tuple[QuadOp, StencilOperator]:
    """Second-type transformation, mirror of the first on form b."""
    fac = factorize_b(L)
    _require_nonvanishing(fac.w, "potential w of form b")
    win = fac.window
    one = StencilOperator.identity(win)
    q1 = one + StencilOperator(win, {T1: fac.u.values})
    q2 = one + StencilOperator(win, {T2: fac.v.values})
    wd = StencilOperator.diagonal(fac.w)
    winv = StencilOperator.diagonal(1.0 / fac.w)
    lt = wd @ q1 @ winv @ q2 + wd
    return QuadOp.from_stencil(lt), q1


def laplace_second(L: QuadOp) -> QuadOp:
    return laplace_second_with_transport(L)[0]


def gauge_transform(L: QuadOp, f: Field, g: Field) -> QuadOp:
    """Equivalence ``L -> f L g``: coefficient of T^s gains ``f_n g_{n+s}``."""
    f.assert_nonvanishing("gauge factor f")
    g.assert_nonvanishing("gauge factor g")
    st = L.as_stencil()
    # build on the window shrunk so g_{n+s} exists for every offset
    win = L.window.shrink(st.offsets)
    terms = {}
    for s in st.offsets:
        terms[s] = (f.restrict(win).values * st.terms[s][win.slice_in(L.window)]
                    * g.sample(s, win).values)
    return QuadOp.from_stencil(StencilOperator(win, terms))


def invariants(L: QuadOp) -> HypInvariants:
    """Complete local gauge invariants.

    ``K1_n = b_n c_{n+T1} / (d_n a_{n+T1})``,
    ``K2_n = c_n b_{n+T2} / (d_n a_{n+T2})``; the equivalent potential /
    curvature basis is ``w = 1/K1 - 1`` and ``H_n = K2_n / K1_{n+T2-T1}``.
    """
    a, b, c, d = (L.field(x) for x in "abcd")
    w1 = L.window.shrink([T1])
    K1 = Field(w1, b.restrict(w1).values * c.sample(T1, w1).values
               / (d.restrict(w1).values * a.sample(T1, w1).values)
               * mutations.factor("hyperbolic.k1"))
    w2 = L.window.shrink([T2])
    K2 = Field(w2, c.restrict(w2).values * b.sample(T2, w2).values
               / (d.restrict(w2).values * a.sample(T2, w2).values))
    w = 1.0 / K1 - 1.0
    hw = K2.window.intersect(K1.window.translate((1, -1)))
    H = K2.restrict(hw) / K1.sample((-1, 1), hw)
    return HypInvariants(K1, K2, w, H)


def laplace_on_invariants(w: Field, H: Field) -> tuple[Field, Field]:
    """Transformation law on the (w, H) basis, validated by the two-path oracle.

    With G_n = w_{n-T1} w_{n+T2} / (w_n w_{n+T2-T1}):
        1 + w~_n = (1 + w_n) G_n H_n
        H~_n = (1 + w~_{n+T2-T1}) / (1 + w_{n+T2-T1})
    """
    _require_nonvanishing(w, "potential w")
    base = w.window.shrink([(-1, 0), (0, 1), (-1, 1)]).intersect(H.window)
    ww = w.restrict(base)
    G = (w.sample((-1, 0), base) * w.sample((0, 1), base)
         / (ww * w.sample((-1, 1), base)))
    wt = (1.0 + ww) * G * H.restrict(base) - 1.0
    hwin = base.shrink([(-1, 1)], within=base)
    _require_nonvanishing(1.0 + w.sample((-1, 1), hwin), "1 + w")
    Ht = (1.0 + wt.sample((-1, 1), hwin)) / (1.0 + w.sample((-1, 1), hwin))
    return wt, Ht


def toda_residual(chain: list[Field], tol_window: int = 0) -> float:
    """Deviation of the discrete Toda relation along a Laplace chain.

    For three consecutive potentials the validated relation reads
        (1+w^{k+2}_n)(1+w^k_{n+T2-T1})
            = (1+w^{k+1}_n)(1+w^{k+1}_{n+T2-T1}) G^{k+1}_n
    with ``G`` as in :func:`laplace_on_invariants`.
    """
    if len(chain) < 3:
        raise LatticeError("Toda residual needs a chain of at least 3 potentials")
    worst = 0.0
    for wk, wk1, wk2 in zip(chain, chain[1:], chain[2:]):
        base = wk1.window.shrink([(-1, 0), (0, 1), (-1, 1)])
        base = base.intersect(wk.window.shrink([(-1, 1)], within=wk.window))
        base = base.intersect(wk2.window)
        G = (wk1.sample((-1, 0), base) * wk1.sample((0, 1), base)
             / (wk1.restrict(base) * wk1.sample((-1, 1), base)))
        lhs = (1.0 + wk2.restrict(base)) * (1.0 + wk.sample((-1, 1), base))
        rhs = (1.0 + wk1.restrict(base)) * (1.0 + wk1.sample((-1, 1), base)) * G
        worst = max(worst, float(np.max(np.abs((lhs - rhs).values))))
    return worst


def cyclic2_residual(w: Field, C: float) -> Field:
    """Pointwise deviation of the period-2 closure condition for ``w1 = C / w``.

    The condition (one Toda step with the period-2 identification) is
        (1 + C/w_n)(1 + C/w_{n+T2-T1})
            = (1 + w_n)(1 + w_{n+T2-T1}) w_{n-T1} w_{n+T2} / (w_n w_{n+T2-T1}).
    """
    _require_nonvanishing(w, "w")
    base = w.window.shrink([(-1, 0), (0, 1), (-1, 1)])
    wn = w.restrict(base)
    wdiag = w.sample((-1, 1), base)
    G = w.sample((-1, 0), base) * w.sample((0, 1), base) / (wn * wdiag)
    lhs = (1.0 + C / wn) * (1.0 + C / wdiag)
    rhs = (1.0 + wn) * (1.0 + wdiag) * G
    return lhs - rhs


def cyclic2_start_curvature(w: Field, C: float) -> Field:
    """The curvature H0 forced by ``w1 = C/w`` through the transformation law."""
    base = w.window.shrink([(-1, 0), (0, 1), (-1, 1)])
    wn = w.restrict(base)
    G = (w.sample((-1, 0), base) * w.sample((0, 1), base)
         / (wn * w.sample((-1, 1), base)))
    return (1.0 + C / wn) / ((1.0 + wn) * G)


# ------------------------------------------------------------ variant family
def _reflect_quad(L: QuadOp, eps: int, sig: int) -> QuadOp:
    """Conjugate by axis reflections and renormalize to the standard stencil."""
    st = L.as_stencil().reflect((eps < 0, sig < 0))
    shift = (1 if eps < 0 else 0, 1 if sig < 0 else 0)
    return QuadOp.from_stencil(st.translate_offsets(shift))


def _unreflect_quad(L: QuadOp, eps: int, sig: int) -> QuadOp:
    shift = (-1 if eps < 0 else 0, -1 if sig < 0 else 0)
    return QuadOp.from_stencil(L.as_stencil().translate_offsets(shift).reflect(
        (eps < 0, sig < 0)))


def laplace_variant(L: QuadOp, eps: int, sig: int, order: str = "12") -> QuadOp:
    """Transformation attached to an orthonormal basis pair of translations.

    Order "12" means the pair ``(T1^eps, T2^sig)`` with the first-type map;
    order "21" means ``(T2^eps, T1^sig)`` with the second-type map (superscripts
    follow the listed pair, so the "21" variant with swapped flags inverts the
    "12" one).  Realized by reflecting the flagged axes, transforming in the
    standard frame, and reflecting back; (+,+,"12") coincides with
    :func:`laplace_first` exactly.
    """
    if eps not in (1, -1) or sig not in (1, -1):
        raise LatticeError("eps and sig must be +-1")
    if order == "12":
        ax1, ax2 = eps, sig
    elif order == "21":
        ax1, ax2 = sig, eps
    else:
        raise LatticeError("order must be '12' or '21'")
    reflected = _reflect_quad(L, ax1, ax2)
    out = laplace_first(reflected) if order == "12" else laplace_second(reflected)
    return _unreflect_quad(out, ax1, ax2)
