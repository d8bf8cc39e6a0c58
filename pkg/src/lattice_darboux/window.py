"""Rectangular lattice windows and scalar fields living on them.

A :class:`Window` is a finite axis-aligned box of lattice points in Z^d
(d = 1, 2, 3) with inclusive integer bounds.  A :class:`Field` is a real- or
complex-valued function on a window, stored densely in row-major order.
Everything downstream (difference operators, factorizations, transforms)
manipulates these two types; all identities are asserted only on interiors,
never by inventing ghost values outside the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

#: hard cap on the number of points in a single window (3D sweeps are the
#: main memory consumers; raise deliberately if a bigger run is wanted)
MAX_POINTS = 10**7


class LatticeError(ValueError):
    """Invalid window/field construction or incompatible operands."""


@dataclass(frozen=True)
class Window:
    """Axis-aligned box ``lo[k] <= n[k] <= hi[k]`` of lattice points."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(x) for x in self.lo)
        hi = tuple(int(x) for x in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise LatticeError(f"lo/hi rank mismatch: {lo} vs {hi}")
        if len(lo) not in (1, 2, 3):
            raise LatticeError(f"only 1D/2D/3D windows supported, got {len(lo)}D")
        if any(h < l for l, h in zip(lo, hi)):
            raise LatticeError(f"empty window: lo={lo} hi={hi}")
        if self.npoints > MAX_POINTS:
            raise LatticeError(f"window with {self.npoints} points exceeds cap {MAX_POINTS}")

    @property
    def dims(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def npoints(self) -> int:
        n = 1
        for l, h in zip(self.lo, self.hi):
            n *= h - l + 1
        return n

    def __contains__(self, point: Sequence[int]) -> bool:
        return all(l <= p <= h for l, p, h in zip(self.lo, point, self.hi))

    def axis_range(self, k: int) -> np.ndarray:
        return np.arange(self.lo[k], self.hi[k] + 1)

    def grids(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        return np.meshgrid(*[self.axis_range(k) for k in range(self.dims)], indexing="ij")

    def points(self) -> np.ndarray:
        """All points as an ``(npoints, dims)`` array, row-major order."""
        grids = self.grids()
        return np.stack([g.ravel(order="C") for g in grids], axis=-1)

    def shrink(self, offsets: Iterable[Sequence[int]], within: "Window | None" = None) -> "Window":
        """Largest sub-window whose every point stays in ``within`` under all offsets."""
        within = within or self
        lo = list(self.lo)
        hi = list(self.hi)
        for s in offsets:
            for k in range(self.dims):
                lo[k] = max(lo[k], within.lo[k] - s[k])
                hi[k] = min(hi[k], within.hi[k] - s[k])
        if any(h < l for l, h in zip(lo, hi)):
            raise LatticeError(f"interior of {self} under offsets {list(offsets)} is empty")
        return Window(tuple(lo), tuple(hi))

    def intersect(self, other: "Window") -> "Window":
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(h < l for l, h in zip(lo, hi)):
            raise LatticeError(f"windows {self} and {other} do not intersect")
        return Window(lo, hi)

    def contains_window(self, other: "Window") -> bool:
        return all(sl <= ol and oh <= sh
                   for sl, ol, oh, sh in zip(self.lo, other.lo, other.hi, self.hi))

    def translate(self, offset: Sequence[int]) -> "Window":
        return Window(tuple(l + s for l, s in zip(self.lo, offset)),
                      tuple(h + s for h, s in zip(self.hi, offset)))

    def reflect(self, axes: Sequence[bool]) -> "Window":
        """Image of the window under ``n[k] -> -n[k]`` on the flagged axes."""
        lo = tuple(-h if flag else l for l, h, flag in zip(self.lo, self.hi, axes))
        hi = tuple(-l if flag else h for l, h, flag in zip(self.lo, self.hi, axes))
        return Window(lo, hi)

    def boundary_mask(self, depth: int = 1) -> np.ndarray:
        """Boolean array marking points within ``depth`` of the window edge."""
        mask = np.zeros(self.shape, dtype=bool)
        for k in range(self.dims):
            sl = [slice(None)] * self.dims
            sl[k] = slice(0, depth)
            mask[tuple(sl)] = True
            sl[k] = slice(self.shape[k] - depth, self.shape[k])
            mask[tuple(sl)] = True
        return mask

    def slice_in(self, outer: "Window") -> tuple[slice, ...]:
        """Index slices selecting this window inside an enclosing one."""
        if not outer.contains_window(self):
            raise LatticeError(f"{self} is not contained in {outer}")
        return tuple(slice(l - ol, h - ol + 1)
                     for l, h, ol in zip(self.lo, self.hi, outer.lo))

    def __str__(self):
        return "x".join(f"[{l},{h}]" for l, h in zip(self.lo, self.hi))


@dataclass(frozen=True)
class Field:
    """Scalar function on a window, stored as a dense array of window shape."""

    window: Window
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.dtype.kind not in "fc":
            values = values.astype(float)
        if values.shape != self.window.shape:
            raise LatticeError(
                f"field shape {values.shape} does not match window {self.window}")
        object.__setattr__(self, "values", values)

    # ---------------------------------------------------------- constructors
    @classmethod
    def constant(cls, window: Window, value) -> "Field":
        dtype = complex if isinstance(value, complex) else float
        return cls(window, np.full(window.shape, value, dtype=dtype))

    @classmethod
    def from_function(cls, window: Window, fn: Callable) -> "Field":
        """Evaluate ``fn(n1, ..., nd)`` vectorized on coordinate grids."""
        return cls(window, np.asarray(fn(*window.grids())) + np.zeros(window.shape))

    # -------------------------------------------------------------- sampling
    def restrict(self, window: Window) -> "Field":
        return Field(window, self.values[window.slice_in(self.window)])

    def sample(self, offset: Sequence[int], window: Window | None = None) -> "Field":
        """Field of values at ``n + offset``, on ``window`` (or the largest valid one)."""
        if window is None:
            window = self.window.shrink([tuple(offset)])
        shifted = window.translate(offset)
        return Field(window, self.values[shifted.slice_in(self.window)])

    # ------------------------------------------------------------ arithmetic
    def _binary(self, other, op) -> "Field":
        if isinstance(other, Field):
            if other.window != self.window:
                w = self.window.intersect(other.window)
                return Field(w, op(self.restrict(w).values, other.restrict(w).values))
            return Field(self.window, op(self.values, other.values))
        return Field(self.window, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __radd__(self, other):
        return self._binary(other, lambda a, b: np.add(b, a))

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: np.subtract(b, a))

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: np.divide(b, a))

    def __neg__(self):
        return Field(self.window, -self.values)

    def conj(self) -> "Field":
        return Field(self.window, np.conj(self.values))

    # ------------------------------------------------------------ inspection
    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def assert_nonvanishing(self, what: str = "field", tol: float = 0.0):
        bad = np.abs(self.values) <= tol
        if np.any(bad):
            site = tuple(int(i + l) for i, l in zip(
                np.argwhere(bad)[0], self.window.lo))
            raise LatticeError(f"{what} vanishes at site {site}")

    def where_zero(self, tol: float = 0.0) -> list[tuple[int, ...]]:
        out = []
        for idx in np.argwhere(np.abs(self.values) <= tol):
            out.append(tuple(int(i + l) for i, l in zip(idx, self.window.lo)))
        return out
