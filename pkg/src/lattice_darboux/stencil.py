"""Difference operators as finite stencils with per-point coefficient fields.

A :class:`StencilOperator` is a finite map ``offset -> coefficient field`` over
a window: ``(L psi)(n) = sum_s  coeff_s(n) * psi(n + s)``.  Composition,
adjoint and comparison are exact coefficient arithmetic; application and all
identities are restricted to the interior where every offset stays inside the
window, so truncation never fabricates equations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .window import Field, LatticeError, Window

Offset = tuple[int, ...]


def _as_offset(s: Sequence[int], dims: int) -> Offset:
    t = tuple(int(x) for x in s)
    if len(t) != dims:
        raise LatticeError(f"offset {t} has wrong rank for a {dims}D window")
    return t


@dataclass(frozen=True)
class StencilOperator:
    """Finite-stencil difference operator with dense coefficient fields."""

    window: Window
    terms: dict

    def __post_init__(self):
        clean = {}
        for s, c in self.terms.items():
            s = _as_offset(s, self.window.dims)
            arr = np.asarray(c)
            if arr.ndim == 0:
                arr = np.full(self.window.shape, complex(arr) if arr.dtype.kind == "c" else float(arr))
            if arr.dtype.kind not in "fc":
                arr = arr.astype(float)
            if arr.shape != self.window.shape:
                raise LatticeError(f"coefficient for offset {s} has shape {arr.shape}, "
                                   f"window is {self.window}")
            clean[s] = arr
        object.__setattr__(self, "terms", clean)

    # ---------------------------------------------------------- constructors
    @classmethod
    def identity(cls, window: Window) -> "StencilOperator":
        return cls(window, {(0,) * window.dims: np.ones(window.shape)})

    @classmethod
    def shift(cls, window: Window, offset: Sequence[int]) -> "StencilOperator":
        return cls(window, {tuple(offset): np.ones(window.shape)})

    @classmethod
    def diagonal(cls, f: Field) -> "StencilOperator":
        return cls(f.window, {(0,) * f.window.dims: f.values})

    @classmethod
    def from_fields(cls, window: Window, terms: Mapping) -> "StencilOperator":
        built = {}
        for s, c in terms.items():
            if isinstance(c, Field):
                c = c.restrict(window).values
            built[s] = c
        return cls(window, built)

    # ------------------------------------------------------------ inspection
    @property
    def dims(self) -> int:
        return self.window.dims

    @property
    def offsets(self) -> list[Offset]:
        return sorted(self.terms.keys())

    @property
    def is_complex(self) -> bool:
        return any(a.dtype.kind == "c" for a in self.terms.values())

    @property
    def radius(self) -> int:
        return max((max(abs(x) for x in s) for s in self.terms), default=0)

    def coefficient(self, offset: Sequence[int]) -> Field:
        s = _as_offset(offset, self.dims)
        if s in self.terms:
            return Field(self.window, self.terms[s])
        return Field.constant(self.window, 0.0)

    def scale(self) -> float:
        """Largest coefficient magnitude, for relative comparisons."""
        return max((float(np.max(np.abs(a))) for a in self.terms.values()), default=0.0)

    def interior(self, within: Window | None = None) -> Window:
        """Sub-window where every offset stays inside ``within`` (default: own window)."""
        return self.window.shrink(self.offsets, within=within or self.window)

    # ------------------------------------------------------------- operations
    def apply(self, f: Field) -> Field:
        """Evaluate the operator on a field.

        The result lives on the interior of the common window: the set of
        points from which every stencil offset lands inside ``f.window``.
        Operator and field windows may differ (composed operators shrink);
        both are restricted to their intersection first.
        """
        base = self.window.intersect(f.window)
        w = base.shrink(self.offsets, within=f.window)
        dtype = complex if (self.is_complex or f.is_complex) else float
        out = np.zeros(w.shape, dtype=dtype)
        for s in self.offsets:
            out += self.terms[s][w.slice_in(self.window)] * f.sample(s, w).values
        return Field(w, out)

    def compose(self, other: "StencilOperator") -> "StencilOperator":
        """Operator product self @ other, exact in the coefficients.

        The result's window shrinks so that every coefficient lookup of
        ``other`` at ``n + s`` stays inside ``other.window``.
        """
        if self.dims != other.dims:
            raise LatticeError("rank mismatch in composition")
        w = self.window.intersect(other.window)
        w = Window(w.lo, w.hi).shrink(self.offsets, within=other.window)
        new: dict[Offset, np.ndarray] = {}
        for sa in self.offsets:
            ca = self.terms[sa][w.slice_in(self.window)]
            cb_window = w.translate(sa)
            for sb in other.offsets:
                t = tuple(a + b for a, b in zip(sa, sb))
                cb = other.terms[sb][cb_window.slice_in(other.window)]
                contrib = ca * cb
                if t in new:
                    new[t] = new[t] + contrib
                else:
                    new[t] = contrib
        return StencilOperator(w, new)

    def __matmul__(self, other: "StencilOperator") -> "StencilOperator":
        return self.compose(other)

    def adjoint(self) -> "StencilOperator":
        """Formal l2 adjoint: the term ``c_n T^s`` becomes ``conj(c)_{n-s} T^{-s}``."""
        w = self.window.shrink([tuple(-x for x in s) for s in self.offsets])
        new = {}
        for s in self.offsets:
            minus = tuple(-x for x in s)
            shifted = Field(self.window, self.terms[s]).sample(minus, w)
            new[minus] = np.conj(shifted.values)
        return StencilOperator(w, new)

    def translate_offsets(self, t: Sequence[int]) -> "StencilOperator":
        """Right-multiplication by the pure shift ``T^t`` (coefficients unchanged)."""
        t = _as_offset(t, self.dims)
        return StencilOperator(self.window,
                               {tuple(a + b for a, b in zip(s, t)): c
                                for s, c in self.terms.items()})

    def conjugate_by_shift(self, t: Sequence[int]) -> "StencilOperator":
        """``T^t L T^{-t}``: same offsets, coefficients sampled at ``n + t``."""
        t = _as_offset(t, self.dims)
        w = self.window.shrink([t])
        return StencilOperator(w, {s: Field(self.window, c).sample(t, w).values
                                   for s, c in self.terms.items()})

    def reflect(self, axes: Sequence[bool]) -> "StencilOperator":
        """Conjugation by the reflection ``n[k] -> -n[k]`` on flagged axes."""
        w = self.window.reflect(axes)
        flips = [k for k, f in enumerate(axes) if f]
        new = {}
        for s, c in self.terms.items():
            rs = tuple(-x if f else x for x, f in zip(s, axes))
            new[rs] = np.flip(c, axis=flips) if flips else c.copy()
        return StencilOperator(w, new)

    def restrict(self, window: Window) -> "StencilOperator":
        sl = window.slice_in(self.window)
        return StencilOperator(window, {s: c[sl] for s, c in self.terms.items()})

    def map_coefficients(self, fn: Callable[[np.ndarray], np.ndarray]) -> "StencilOperator":
        return StencilOperator(self.window, {s: fn(c) for s, c in self.terms.items()})

    # ------------------------------------------------------------ arithmetic
    def __add__(self, other):
        if isinstance(other, StencilOperator):
            w = self.window.intersect(other.window)
            new = {s: c[w.slice_in(self.window)].copy() for s, c in self.terms.items()}
            for s, c in other.terms.items():
                c = c[w.slice_in(other.window)]
                new[s] = new[s] + c if s in new else c
            return StencilOperator(w, new)
        if np.isscalar(other):
            return self + StencilOperator(self.window,
                                          {(0,) * self.dims: np.full(self.window.shape, other)})
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other if isinstance(other, StencilOperator) else self + (-other)

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return StencilOperator(self.window, {s: c * scalar for s, c in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    # ----------------------------------------------------------------- (de)serialization
    def to_json_dict(self) -> dict:
        return {
            "dims": self.dims,
            "window": [[l, h] for l, h in zip(self.window.lo, self.window.hi)],
            "terms": [
                {"offset": list(s), "coeffs": _encode_values(self.terms[s])}
                for s in self.offsets
            ],
            "scalar": "complex" if self.is_complex else "real",
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_dict(), **kw)

    @classmethod
    def from_json_dict(cls, data: dict) -> "StencilOperator":
        try:
            dims = int(data["dims"])
            bounds = data["window"]
            window = Window(tuple(int(b[0]) for b in bounds), tuple(int(b[1]) for b in bounds))
            if window.dims != dims:
                raise LatticeError(f"dims={dims} inconsistent with window of rank {window.dims}")
            scalar = data.get("scalar", "real")
            terms = {}
            for item in data["terms"]:
                offset = tuple(int(x) for x in item["offset"])
                values = _decode_values(item["coeffs"], scalar)
                terms[offset] = np.reshape(values, window.shape)
        except (KeyError, TypeError, IndexError) as exc:
            raise LatticeError(f"malformed operator JSON (field {exc})") from exc
        return cls(window, terms)

    @classmethod
    def from_json(cls, text: str) -> "StencilOperator":
        return cls.from_json_dict(json.loads(text))


def _encode_values(arr: np.ndarray) -> list:
    flat = arr.ravel(order="C")
    if arr.dtype.kind == "c":
        return [[float(z.real), float(z.imag)] for z in flat]
    return [float(x) for x in flat]


def _decode_values(coeffs: list, scalar: str) -> np.ndarray:
    if scalar == "complex":
        return np.array([complex(re, im) for re, im in coeffs])
    return np.array([float(x) for x in coeffs])


# ---------------------------------------------------------------- comparison
@dataclass(frozen=True)
class EqualityReport:
    equal: bool
    max_dev: float
    rel_dev: float
    scale: float
    worst_offset: Offset | None
    window: Window | None

    def __bool__(self):
        return self.equal


def interior_equal(a: StencilOperator, b: StencilOperator, tol: float,
                   relative: bool = False) -> EqualityReport:
    """Compare two operators coefficient-wise on their common interior.

    The common interior is the window intersection shrunk by the union of
    offsets, i.e. exactly the sites whose coefficients both operators would
    use when applied; edge sites where a coefficient is only a placeholder
    never participate.  Offsets present in only one operand are compared
    against zero.  With ``relative=True`` the tolerance applies to the
    deviation divided by the largest coefficient magnitude of either operand.
    """
    w = a.window.intersect(b.window)
    w = w.shrink(sorted(set(a.offsets) | set(b.offsets)), within=w)
    scale = max(a.scale(), b.scale())
    max_dev = 0.0
    worst = None
    for s in sorted(set(a.offsets) | set(b.offsets)):
        ca = a.terms.get(s)
        cb = b.terms.get(s)
        va = ca[w.slice_in(a.window)] if ca is not None else 0.0
        vb = cb[w.slice_in(b.window)] if cb is not None else 0.0
        dev = float(np.max(np.abs(va - vb))) if w.npoints else 0.0
        if dev > max_dev:
            max_dev, worst = dev, s
    rel = max_dev / scale if scale > 0 else max_dev
    equal = (rel if relative else max_dev) <= tol
    return EqualityReport(equal, max_dev, rel, scale, worst, w)


# --------------------------------------------------- exponential first-order
def exponential_first_order(window: Window, consts: Sequence[float],
                            l: np.ndarray) -> StencilOperator:
    """``Q = 1 + sum_j consts[j] * exp(l[j] . n) * T_j`` on the window.

    ``l`` is the (dims x dims) matrix of linear-form coefficients; row ``j``
    weights the coefficient attached to the unit shift along axis ``j``.
    """
    l = np.asarray(l, dtype=float)
    d = window.dims
    if l.shape != (d, d) or len(consts) != d:
        raise LatticeError(f"need {d} constants and a {d}x{d} exponent matrix")
    grids = window.grids()
    terms: dict = {(0,) * d: np.ones(window.shape)}
    for j in range(d):
        phase = sum(l[j, i] * grids[i] for i in range(d))
        offset = tuple(1 if i == j else 0 for i in range(d))
        terms[offset] = consts[j] * np.exp(phase)
    return StencilOperator(window, terms)
