"""Seven-point self-adjoint operators on the equilateral triangular lattice.

The six-neighbor stencil {±T1, ±T2, ±(T1-T2)} carries a diagonal field and a
connection on the edges.  Such an operator factors as ``Q Q^+ + w`` through
any of the six anticlockwise basis pairs of neighboring translations; each
factorization generates a Laplace transformation that dresses the exchanged
product with the potential.  For complex (Hermitian) coefficients the
obstruction to reducing the operator to real form by a phase gauge is the
flux: the phase of the coefficient product around each triangle.

The exponential-coefficient family ``Q = 1 + c u^{n1} v^{n2} T1 +
d (u^2/v)^{n1} u^{n2} T2`` plays the role of a lattice Landau operator; its
shift relation with ratio ``u^{-2}`` generates the geometric level ladder
``1 - u^{2k}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mutations
from .stencil import StencilOperator, interior_equal
from .window import Field, LatticeError, Window

T1 = (1, 0)
T2 = (0, 1)
CROSS = (-1, 1)          # T2 T1^{-1}
SIX_NEIGHBORS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

#: anticlockwise basis pairs (T1*, T2*) indexing the six factorizations
BASIS_PAIRS = {
    1: ((1, 0), (0, 1)),
    2: ((0, 1), (-1, 1)),
    3: ((-1, 1), (-1, 0)),
    4: ((-1, 0), (0, -1)),
    5: ((0, -1), (1, -1)),
    6: ((1, -1), (1, 0)),
}


class EllipticFactorizationError(ValueError):
    def __init__(self, message, site=None, kind=None):
        super().__init__(message)
        self.site = site
        self.kind = kind


class NontrivialFluxError(ValueError):
    def __init__(self, message, sites):
        super().__init__(message)
        self.sites = sites


# ---------------------------------------------------------------------- TriOp
@dataclass(frozen=True)
class TriOp:
    """Self-adjoint seven-point operator, stored by its connection fields.

    Layout: diagonal ``a_n``; ``b_n`` on the edge ``n -> n+T1``; ``c_n`` on
    ``n+T2 -> n`` (the T2 stencil coefficient is ``conj(c)_n``); ``d_n`` on
    ``n+T1 -> n+T2``.  Real positive fields give the real self-adjoint class;
    unit-modulus complex connections give the Hermitian (magnetic) class.
    """

    window: Window
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        if self.window.dims != 2:
            raise LatticeError("TriOp lives on a 2D window")
        a = np.asarray(self.a)
        if a.dtype.kind == "c" and np.max(np.abs(a.imag)) > 1e-13 * max(1.0, np.max(np.abs(a))):
            raise LatticeError("diagonal field must be real")
        object.__setattr__(self, "a", a.real.astype(float))
        for name in "bcd":
            arr = np.asarray(getattr(self, name))
            if arr.dtype.kind not in "fc":
                arr = arr.astype(float)
            if arr.shape != self.window.shape:
                raise LatticeError(f"connection {name} has wrong shape")
            Field(self.window, arr).assert_nonvanishing(f"connection {name}")
            object.__setattr__(self, name, arr)

    @property
    def is_complex(self) -> bool:
        return any(getattr(self, n).dtype.kind == "c" for n in "bcd")

    @classmethod
    def constant(cls, window: Window, a: float, b: float, c: float, d: float) -> "TriOp":
        return cls(window, *(np.full(window.shape, v) for v in (a, b, c, d)))

    @classmethod
    def random_positive(cls, window: Window, rng: np.random.Generator,
                        diag: float = 6.0, spread: float = 0.3) -> "TriOp":
        def smooth():
            x = rng.uniform(-spread, spread, size=window.shape)
            for ax in (0, 1):
                x = 0.5 * x + 0.25 * (np.roll(x, 1, ax) + np.roll(x, -1, ax))
            return np.exp(x)
        return cls(window, diag * smooth(), smooth(), smooth(), smooth())

    def field(self, name: str) -> Field:
        return Field(self.window, getattr(self, name))

    def as_stencil(self) -> StencilOperator:
        w = self.window
        b, c, d = (Field(w, x) for x in (self.b, self.c, self.d))
        pad = _padded_sample
        terms = {
            (0, 0): self.a,
            (1, 0): self.b,
            (0, 1): np.conj(self.c),
            (-1, 0): pad(b.conj(), (-1, 0)),
            (0, -1): pad(c, (0, -1)),
            (-1, 1): pad(d, (-1, 0)),
            (1, -1): pad(d.conj(), (0, -1)),
        }
        if not self.is_complex:
            terms = {s: np.real(v) for s, v in terms.items()}
        return StencilOperator(w, terms)

    @classmethod
    def from_stencil(cls, op: StencilOperator, check: bool = True,
                     tol: float = 1e-11) -> "TriOp":
        extra = set(op.offsets) - ({(0, 0)} | set(SIX_NEIGHBORS))
        if extra:
            raise LatticeError(f"not a seven-point triangular operator: {sorted(extra)}")
        if check:
            rep = interior_equal(op, op.adjoint(), tol, relative=True)
            if not rep.equal:
                raise LatticeError(f"stencil is not self-adjoint: rel dev {rep.rel_dev:.2e}")
        w = op.window
        a = np.real(op.terms[(0, 0)])
        b = op.terms[(1, 0)]
        c = np.conj(op.terms[(0, 1)])
        # two reads of d cover the whole window except one corner (never used)
        d = np.zeros(w.shape, dtype=complex)
        d[:-1, :] = op.terms[(-1, 1)][1:, :]
        d[-1, :-1] = np.conj(op.terms[(1, -1)])[-1, 1:]
        d[-1, -1] = 1.0
        if not (np.iscomplexobj(b) or np.iscomplexobj(c)
                or np.max(np.abs(d.imag)) > 0):
            b, c, d = np.real(b), np.real(c), np.real(d)
        if np.max(np.abs(d.imag)) == 0.0:
            d = np.real(d)
        return cls(w, a, b, c, d)


def _padded_sample(f: Field, offset, fill=0.0) -> np.ndarray:
    """Values of f at n+offset on f's own window; ``fill`` outside.

    The filled sites only ever sit on edges excluded from every interior
    computation and from Dirichlet assembly.
    """
    out = np.full(f.window.shape, fill, dtype=f.values.dtype)
    win = f.window.shrink([tuple(offset)])
    out[win.slice_in(f.window)] = f.sample(tuple(offset), win).values
    return out


# -------------------------------------------------------------- factorization
@dataclass(frozen=True)
class TriQ:
    """First-order factor ``Q = x + y T^P + z T^R`` for a basis pair (P, R)."""

    window: Window
    pair: tuple
    x: Field
    y: Field
    z: Field

    def as_stencil(self) -> StencilOperator:
        P, R = self.pair
        return StencilOperator.from_fields(self.window,
                                           {(0, 0): self.x, P: self.y, R: self.z})


def factorize_elliptic(L: TriOp, j: int, check: bool = True) -> tuple[TriQ, Field]:
    """Factor ``L = Q_j Q_j^+ + w_j`` through basis pair number ``j``.

    The diagonal factor solves ``x_n^2 = B_n C_n / D_n`` with B, C, D the
    connection coefficients of the three edges of the triangle attached at n
    opposite to the pair; negative products are reported with site and type.
    """
    if j not in BASIS_PAIRS:
        raise LatticeError("factorization type j must be 1..6")
    P, R = BASIS_PAIRS[j]
    st = L.as_stencil()
    mP = tuple(-x for x in P)
    mR = tuple(-x for x in R)
    PR = tuple(p - r for p, r in zip(P, R))
    win_x = L.window.shrink([mP, mR])
    B = st.coefficient(P).sample(mP, win_x)
    C = st.coefficient(R).sample(mR, win_x)
    D = st.coefficient(PR).sample(mP, win_x)
    x2 = (B * C / D).values * mutations.factor("elliptic.x")
    if np.iscomplexobj(x2):
        if np.max(np.abs(x2.imag)) > 1e-12 * np.max(np.abs(x2)):
            raise EllipticFactorizationError(
                f"complex product in diagonal factor (type {j}); operator "
                "does not factor through real first-order terms", kind="complex")
        x2 = x2.real
    bad = x2 <= 0
    if np.any(bad):
        site = tuple(int(i + l) for i, l in zip(np.argwhere(bad)[0], win_x.lo))
        raise EllipticFactorizationError(
            f"nonpositive square {x2[np.argwhere(bad)[0][0]]} for type {j} at {site}",
            site=site, kind="negative-square")
    x = Field(win_x, np.sqrt(x2))
    win_y = L.window.shrink([P], within=win_x)
    y = st.coefficient(P).restrict(win_y) / x.sample(P, win_y)
    win_z = L.window.shrink([R], within=win_x)
    z = st.coefficient(R).restrict(win_z) / x.sample(R, win_z)
    win = win_x.intersect(win_y).intersect(win_z)
    x, y, z = x.restrict(win), y.restrict(win), z.restrict(win)
    w = Field(win, L.a[win.slice_in(L.window)]) - (x * x + y * y + z * z)
    q = TriQ(win, (P, R), x, y, z)
    if check:
        prod = q.as_stencil() @ q.as_stencil().adjoint() + StencilOperator.diagonal(w)
        rep = interior_equal(prod, st, 1e-12, relative=True)
        if not rep.equal:
            raise EllipticFactorizationError(
                f"factorization type {j} failed re-expansion: rel dev {rep.rel_dev:.2e}")
    return q, w


# ------------------------------------------------------ Laplace transformations
def laplace_P_with_transport(L: TriOp, j: int, variant: str = "sqrt",
                             allow_nonpositive_w: bool = False
                             ) -> tuple[TriOp, StencilOperator]:
    """Laplace transformation of type j and its zero-mode transport operator.

    variant "sqrt": ``L~ = w^{1/2} Q^+ w^{-1} Q w^{1/2} + w`` with transport
    ``psi -> w^{-1/2} Q^+ psi`` (requires w > 0).  variant "plain":
    ``L~ = Q^+ w^{-1} Q + 1`` with transport ``Q^+`` (requires w != 0); the
    two differ only within the diagonal equivalence class.
    """
    q, w = factorize_elliptic(L, j)
    if variant not in ("sqrt", "plain"):
        raise LatticeError("variant must be 'sqrt' or 'plain'")
    if allow_nonpositive_w:
        variant = "plain"          # the sign-indefinite form of the transform
    zeros = w.where_zero()
    if zeros:
        raise EllipticFactorizationError(f"potential w vanishes at {zeros[:4]}",
                                         kind="zero-w")
    if variant == "sqrt" and np.any(w.values <= 0):
        site = np.argwhere(w.values <= 0)[0]
        raise EllipticFactorizationError(
            f"potential w of type {j} is not positive at offset {tuple(site)}; "
            "pass allow_nonpositive_w for the sign-indefinite variant",
            kind="nonpositive-w")
    qs = q.as_stencil()
    winv = StencilOperator.diagonal(1.0 / w)
    if variant == "sqrt":
        root = StencilOperator.diagonal(Field(w.window, np.sqrt(w.values)))
        lt = root @ qs.adjoint() @ winv @ qs @ root + StencilOperator.diagonal(w)
        transport = StencilOperator.diagonal(
            Field(w.window, 1.0 / np.sqrt(w.values))) @ qs.adjoint()
    else:
        lt = qs.adjoint() @ winv @ qs + StencilOperator.identity(w.window)
        transport = qs.adjoint()
    return TriOp.from_stencil(lt), transport


def laplace_P(L: TriOp, j: int, variant: str = "sqrt",
              allow_nonpositive_w: bool = False) -> TriOp:
    return laplace_P_with_transport(L, j, variant, allow_nonpositive_w)[0]


@dataclass(frozen=True)
class OddRelationsReport:
    """Deviations of the identities tying factorizations 1, 3, 5 together."""

    w_dev: float                   # w1 = w3 = w5
    q_dev: float                   # Q1 = Q3 T1 = Q5 T2
    conj_dev: float                # L~1 vs shift-conjugated, w-dressed L~3 / L~5

    def max_dev(self) -> float:
        return max(self.w_dev, self.q_dev, self.conj_dev)


def odd_factorization_relations(L: TriOp) -> OddRelationsReport:
    """Check the coupled structure of the three odd-type factorizations."""
    q1, w1 = factorize_elliptic(L, 1)
    q3, w3 = factorize_elliptic(L, 3)
    q5, w5 = factorize_elliptic(L, 5)
    w_dev = 0.0
    for other in (w3, w5):
        W = w1.window.intersect(other.window)
        w_dev = max(w_dev, float(np.max(np.abs(
            w1.restrict(W).values - other.restrict(W).values))))
    q_dev = max(
        interior_equal(q3.as_stencil().translate_offsets(T1), q1.as_stencil(),
                       np.inf, relative=True).rel_dev,
        interior_equal(q5.as_stencil().translate_offsets(T2), q1.as_stencil(),
                       np.inf, relative=True).rel_dev)
    lt1 = laplace_P(L, 1).as_stencil()
    conj_dev = 0.0
    for jj, shift in ((3, (1, 0)), (5, (0, 1))):
        ltj = laplace_P(L, jj).as_stencil()
        minus = tuple(-x for x in shift)
        conj = ltj.conjugate_by_shift(minus)
        gw = conj.window.intersect(w1.window.shrink([minus]))
        ratio = w1.restrict(gw) / w1.sample(minus, gw)
        gdiag = StencilOperator.diagonal(Field(gw, np.sqrt(ratio.values)))
        dressed = gdiag @ conj @ gdiag
        conj_dev = max(conj_dev, interior_equal(dressed, lt1, np.inf,
                                                relative=True).rel_dev)
    return OddRelationsReport(w_dev, q_dev, conj_dev)


# ------------------------------------------- non-self-adjoint and Hermitian tests
def nonsa_fields(op: StencilOperator) -> dict:
    """Edge fields of a general 7-point operator in the standard layout."""
    need = {(0, 0), (1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)}
    if set(op.offsets) - need:
        raise LatticeError("not a 7-point triangular operator")
    w = op.window
    return {
        "b": op.coefficient((1, 0)),
        "c": op.coefficient((0, 1)),
        "d": op.coefficient((-1, 1)).sample(T1, w.shrink([T1])),
        "e": op.coefficient((-1, 0)).sample(T1, w.shrink([T1])),
        "f": op.coefficient((0, -1)).sample(T2, w.shrink([T2])),
        "g": op.coefficient((1, -1)).sample(T2, w.shrink([T2])),
    }


def factor_condition_nonsa(op: StencilOperator, form: str = "a",
                           tol: float = 1e-12) -> tuple[np.ndarray, Field]:
    """Pointwise solvability test for one-sided factorization of 7-point operators.

    Form "a" checks ``b_{n+T2} d_n f_{n+T1} = g_n e_{n+T2} c_{n+T1}``;
    form "b" checks ``f_n d_n b_n = c_n e_n g_n``.  Returns the boolean field
    and the relative residual field.
    """
    F = nonsa_fields(op)
    if form == "a":
        win = F["d"].window.intersect(F["g"].window).shrink([T1, T2])
        lhs = (F["b"].sample(T2, win) * F["d"].restrict(win) * F["f"].sample(T1, win))
        rhs = (F["g"].restrict(win) * F["e"].sample(T2, win) * F["c"].sample(T1, win))
    elif form == "b":
        win = F["d"].window.intersect(F["g"].window)
        lhs = F["f"].restrict(win) * F["d"].restrict(win) * F["b"].restrict(win)
        rhs = F["c"].restrict(win) * F["e"].restrict(win) * F["g"].restrict(win)
    else:
        raise LatticeError("form must be 'a' or 'b'")
    scale = np.maximum(np.abs(lhs.values), np.abs(rhs.values))
    resid = Field(win, np.abs(lhs.values - rhs.values) / np.where(scale > 0, scale, 1.0))
    return resid.values <= tol, resid


def factor_condition_hermitian(L: TriOp, tol: float = 1e-12
                               ) -> tuple[np.ndarray, np.ndarray, Field, Field]:
    """Reality test of the two triangle coefficient products.

    Form "a" demands ``b_{n-T1} c_{n-T2} d_{n-T1-T2}`` real, form "b"
    demands ``d_n c_n b_n`` real; returns the boolean fields and the relative
    imaginary parts.
    """
    b, c, d = L.field("b"), L.field("c"), L.field("d")
    win_a = L.window.shrink([(-1, 0), (0, -1), (-1, -1)])
    prod_a = (b.sample((-1, 0), win_a) * c.sample((0, -1), win_a)
              * d.sample((-1, -1), win_a))
    prod_b = b * c * d
    rel_a = Field(win_a, np.abs(prod_a.values.imag) / np.abs(prod_a.values))
    rel_b = Field(L.window, np.abs(np.imag(prod_b.values)) / np.abs(prod_b.values))
    return rel_a.values <= tol, rel_b.values <= tol, rel_a, rel_b


# ----------------------------------------------------------------- flux, gauge
@dataclass(frozen=True)
class FluxField:
    """Per-triangle phases of the connection products, in (-pi, pi]."""

    up: Field        # triangles <n, n+T1, n+T2>
    down: Field      # triangles <n, n-T1, n-T2>

    def max_abs(self) -> float:
        return max(self.up.max_abs(), self.down.max_abs())


def _canonical_angle(theta: np.ndarray) -> np.ndarray:
    out = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
    return np.where(out == -np.pi, np.pi, out)


def magnetic_flux(L: TriOp) -> FluxField:
    """Anticlockwise circulation of the connection phases per triangle.

    ``exp(i Phi_up(n)) = D_n C_n B_n`` over the upward triangle at n and
    ``exp(-i Phi_down(n)) = B_{n-T1} C_{n-T2} D_{n-T1-T2}`` over the downward
    one; unit phases are taken with the positive-modulus convention.
    """
    b, c, d = (L.field(x) for x in "bcd")
    B = b / Field(L.window, np.abs(b.values))
    C = c / Field(L.window, np.abs(c.values))
    D = d / Field(L.window, np.abs(d.values))
    up = Field(L.window, _canonical_angle(np.angle(
        (D * C * B).values.astype(complex))))
    win = L.window.shrink([(-1, 0), (0, -1), (-1, -1)])
    down = Field(win, _canonical_angle(-np.angle(
        (B.sample((-1, 0), win) * C.sample((0, -1), win)
         * D.sample((-1, -1), win)).values.astype(complex))))
    return FluxField(up=up, down=down)


def phase_gauge(L: TriOp, f: Field) -> TriOp:
    """Conjugation ``exp(i f) L exp(-i f)`` with a real phase field."""
    if f.is_complex:
        raise LatticeError("phase field must be real")
    st = L.as_stencil()
    win = L.window.shrink(st.offsets)
    terms = {}
    for s in st.offsets:
        terms[s] = (np.exp(1j * f.restrict(win).values) * st.terms[s][win.slice_in(L.window)]
                    * np.exp(-1j * f.sample(s, win).values))
    return TriOp.from_stencil(StencilOperator(win, terms))


def gauge_reduce_to_real(L: TriOp, tol: float = 1e-9) -> tuple[Field, TriOp]:
    """Phase field removing all connection phases, when every flux vanishes.

    Phases are propagated along a spanning tree from the lower corner (first
    along axis 1, then up each column); closure of all other edges is exactly
    the zero-flux condition, re-checked on the result.
    """
    flux = magnetic_flux(L)
    bad_up = [tuple(int(v + l) for v, l in zip(idx, flux.up.window.lo))
              for idx in np.argwhere(np.abs(flux.up.values) > tol)]
    bad_down = [tuple(int(v + l) for v, l in zip(idx, flux.down.window.lo))
                for idx in np.argwhere(np.abs(flux.down.values) > tol)]
    if bad_up or bad_down:
        raise NontrivialFluxError(
            f"nonzero flux at {(bad_up + bad_down)[:6]} (|Phi|max = {flux.max_abs():.3e})",
            sites=bad_up + bad_down)
    sh = L.window.shape
    f = np.zeros(sh)
    argb = np.angle(np.asarray(L.b, dtype=complex))
    argc = np.angle(np.asarray(L.c, dtype=complex))
    for i in range(sh[0] - 1):
        f[i + 1, 0] = f[i, 0] + argb[i, 0]
    for j in range(sh[1] - 1):
        f[:, j + 1] = f[:, j] - argc[:, j]
    phases = Field(L.window, f)
    reduced = phase_gauge(L, phases)
    scale = max(np.max(np.abs(reduced.b)), np.max(np.abs(reduced.c)),
                np.max(np.abs(reduced.d)))
    imag = max(np.max(np.abs(np.imag(reduced.b))), np.max(np.abs(np.imag(reduced.c))),
               np.max(np.abs(np.imag(reduced.d))))
    if imag > 1e-10 * scale:
        raise NontrivialFluxError(
            f"residual phases {imag / scale:.2e} after tree reduction", sites=[])
    real_op = TriOp(reduced.window, reduced.a, np.real(reduced.b),
                    np.real(reduced.c), np.real(reduced.d))
    return phases, real_op


def homogeneous_magnetic_operator(phi: float, window: Window) -> TriOp:
    """Unit-modulus connection pattern with uniform field per lattice cell.

    Diagonal 6 with six phase hops ``-exp(+-i phi * linear form)``; at
    ``phi = 0`` this is ``6 - (sum of the six unit shifts)``.
    """
    n1, n2 = window.grids()
    a = np.full(window.shape, 6.0)
    b = -np.exp(1j * phi * n2)
    c = -np.exp(1j * phi * n1)
    d = -np.exp(1j * phi * (n1 + n2 + 1))
    return TriOp(window, a, b, c, d)


# ------------------------------------------------------------ Landau q-family
@dataclass(frozen=True)
class ExpQ2D:
    """Exponential-coefficient first-order operator on the triangular lattice.

    ``Q = 1 + c e^{l_1(n)} T1 + d e^{l_2(n)} T2`` with linear forms given by
    the rows of ``l``.  The Landau subfamily has ``2 l11 = 2 l22 = l12 + l21``
    and is parameterized by ``u = e^{l11}``, ``v = e^{l12}``.
    """

    c: float
    d: float
    l: tuple

    def __post_init__(self):
        if self.c == 0 or self.d == 0:
            raise LatticeError("constants c, d must be nonzero")
        l = np.asarray(self.l, dtype=float)
        if l.shape != (2, 2):
            raise LatticeError("exponent matrix must be 2x2")
        object.__setattr__(self, "l", tuple(map(tuple, l)))

    @classmethod
    def from_uv(cls, c: float, d: float, u: float, v: float) -> "ExpQ2D":
        if u <= 0 or v <= 0:
            raise LatticeError("u and v must be positive")
        l11, l12 = np.log(u), np.log(v)
        return cls(c, d, ((l11, l12), (2 * l11 - l12, l11)))

    @property
    def lmat(self) -> np.ndarray:
        return np.asarray(self.l, dtype=float)

    @property
    def u(self) -> float:
        return float(np.exp(self.lmat[0, 0]))

    @property
    def v(self) -> float:
        return float(np.exp(self.lmat[0, 1]))

    def landau_constraint_dev(self) -> float:
        l = self.lmat
        return max(abs(2 * l[0, 0] - l[0, 1] - l[1, 0]),
                   abs(2 * l[1, 1] - l[0, 1] - l[1, 0]))

    def stencil(self, window: Window) -> StencilOperator:
        from .stencil import exponential_first_order
        return exponential_first_order(window, (self.c, self.d), self.lmat)

    def shifted(self, factor: float) -> "ExpQ2D":
        return ExpQ2D(self.c * factor, self.d * factor, self.l)


def q_landau_Q(p: ExpQ2D, window: Window) -> StencilOperator:
    """The first-order operator of the family as a stencil on the window."""
    return p.stencil(window)


def q_landau_relation_residual(p: ExpQ2D, window: Window) -> float:
    """Relative deviation of ``Q Q^+ - 1 = u^-2 (Q'^+ Q' - 1)``, ``c' = u^2 c``.

    Exact precisely on the Landau subfamily; generic exponent matrices give
    an O(1) deviation.
    """
    u2 = float(np.exp(2 * p.lmat[0, 0]))
    Q = p.stencil(window)
    Qp = p.shifted(u2).stencil(window)
    one = StencilOperator.identity(window)
    lhs = Q @ Q.adjoint() - one
    rhs = (1.0 / u2) * (Qp.adjoint() @ Qp - one)
    return interior_equal(lhs, rhs, np.inf, relative=True).rel_dev


@dataclass(frozen=True)
class CovarianceReport:
    shift1_dev: float
    shift2_dev: float

    def max_dev(self) -> float:
        return max(self.shift1_dev, self.shift2_dev)


def translation_covariance(p: ExpQ2D, window: Window) -> CovarianceReport:
    """Conjugation by unit shifts reproduces the family with scaled constants.

    ``T1 Q_{c,d} T1^{-1} = Q_{c e^{l11}, d e^{l21}}`` and
    ``T2 Q^+_{c,d} T2^{-1} = Q^+_{c e^{l12}, d e^{l22}}`` (constants read off
    by direct conjugation; both checked as stencil identities).
    """
    l = p.lmat
    Q = p.stencil(window)
    lhs1 = Q.conjugate_by_shift(T1)
    rhs1 = ExpQ2D(p.c * np.exp(l[0, 0]), p.d * np.exp(l[1, 0]), p.l).stencil(window)
    dev1 = interior_equal(lhs1, rhs1, np.inf, relative=True).rel_dev
    lhs2 = Q.adjoint().conjugate_by_shift(T2)
    rhs2 = ExpQ2D(p.c * np.exp(l[0, 1]), p.d * np.exp(l[1, 1]), p.l).stencil(window).adjoint()
    dev2 = interior_equal(lhs2, rhs2, np.inf, relative=True).rel_dev
    return CovarianceReport(dev1, dev2)
