"""Bistable nonlinearities and their extensions beyond [0, 1].

The canonical family is the cubic ``f(s) = a s (s - theta) (1 - s)``,
which satisfies all the structural requirements for ``theta < 1/2`` and
has closed forms for every derived constant. A generic callable profile
is accepted as well but is validated purely numerically.

Validation is by dense scan (1e4 points, tolerance 1e-10) plus closed-form
critical points; every rejection names the violated clause.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import PreconditionError

__all__ = [
    "Bistable",
    "Stiffness",
    "ExtendedNonlinearity",
    "make_bistable",
    "bistable_from_callables",
    "stiffness",
    "extend",
    "EXTENSION_MODES",
]

_SCAN_POINTS = 10_000
_SCAN_TOL = 1e-10

EXTENSION_MODES = ("odd", "linear-tails", "zero-left")


@dataclass(frozen=True)
class Bistable:
    """Validated bistable nonlinearity with zeros at 0, theta, 1."""

    theta: float
    amplitude: float
    kind: str = "cubic"
    f_fn: Callable | None = None
    fp_fn: Callable | None = None

    def f(self, s):
        s = np.asarray(s, dtype=np.float64)
        if self.kind == "cubic":
            a, th = self.amplitude, self.theta
            # factored form: zeros at 0, theta, 1 are exact in floats
            return a * s * (s - th) * (1.0 - s)
        return self.f_fn(s)

    def fprime(self, s):
        s = np.asarray(s, dtype=np.float64)
        if self.kind == "cubic":
            a, th = self.amplitude, self.theta
            return a * (-3.0 * s**2 + 2.0 * (1.0 + th) * s - th)
        return self.fp_fn(s)

    def antiderivative(self, t):
        """F(t) = int_0^t f, valid on [0, 1]."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "cubic":
            a, th = self.amplitude, self.theta
            return a * (-(t**4) / 4.0 + (1.0 + th) * t**3 / 3.0 - th * t**2 / 2.0)
        # generic: fine Simpson on a cached lattice
        return _simpson_cumulative(self.f, t)

    @property
    def int_f(self) -> float:
        if self.kind == "cubic":
            return self.amplitude * (1.0 - 2.0 * self.theta) / 12.0
        return float(self.antiderivative(1.0))


def _simpson_cumulative(fn, t):
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        n = 2000
        xs = np.linspace(0.0, ti, n + 1)
        ys = np.asarray(fn(xs), dtype=np.float64)
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        out[i] = (ti / n / 3.0) * float(np.dot(w, ys)) if ti != 0.0 else 0.0
    return out if out.size > 1 else float(out[0])


def _validate_bistable(b: Bistable) -> None:
    th = b.theta
    s = np.linspace(0.0, 1.0, _SCAN_POINTS)
    fs = np.asarray(b.f(s), dtype=np.float64)

    def reject(clause: str, detail: str = ""):
        raise PreconditionError(f"bistable structure violated: {clause}{detail}")

    for point, label in ((0.0, "f(0) = 0"), (th, "f(theta) = 0"), (1.0, "f(1) = 0")):
        if abs(float(b.f(point))) > _SCAN_TOL:
            reject(label, f" fails: f({point}) = {float(b.f(point)):.3e}")
    inner = s[(s > _SCAN_TOL) & (s < th - _SCAN_TOL)]
    if inner.size and float(np.max(b.f(inner))) >= 0.0:
        reject("f < 0 on (0, theta)")
    outer = s[(s > th + _SCAN_TOL) & (s < 1.0 - _SCAN_TOL)]
    if outer.size and float(np.min(b.f(outer))) <= 0.0:
        reject("f > 0 on (theta, 1)")
    if b.int_f <= 0.0:
        reject("int_0^1 f > 0", f" fails: integral = {b.int_f:.3e}")
    if float(b.fprime(0.0)) >= 0.0:
        reject("f'(0) < 0")
    if float(b.fprime(th)) <= 0.0:
        reject("f'(theta) > 0")
    if float(b.fprime(1.0)) >= 0.0:
        reject("f'(1) < 0")
    if _max_fprime(b) >= 1.0:
        reject("f' < 1 on [0, 1]", f" fails: max f' = {_max_fprime(b):.6g}")


def _max_fprime(b: Bistable) -> float:
    """max f' on [0, 1]; closed form for the cubic, refined scan otherwise."""
    if b.kind == "cubic":
        th = b.theta
        return b.amplitude * (1.0 - th + th * th) / 3.0
    s = np.linspace(0.0, 1.0, _SCAN_POINTS)
    fp = np.asarray(b.fprime(s), dtype=np.float64)
    i = int(np.argmax(fp))
    lo = s[max(i - 1, 0)]
    hi = s[min(i + 1, s.size - 1)]
    return _golden_max(lambda x: float(b.fprime(x)), lo, hi)


def _golden_max(fn, lo, hi, tol=1e-10):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    while abs(b - a) > tol:
        if fn(c) > fn(d):
            b = d
        else:
            a = c
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
    return fn(0.5 * (a + b))


def make_bistable(theta: float, amplitude: float = 1.0) -> Bistable:
    """Validated cubic ``a s (s - theta)(1 - s)``.

    The scan rejects with the violated structural clause; theta >= 1/2 surfaces
    as a negative integral, matching the structural reason it fails.
    """
    if not (0.0 < theta < 1.0):
        raise PreconditionError(f"theta must lie in (0, 1), got {theta}")
    if not (amplitude > 0.0):
        raise PreconditionError(f"amplitude must be positive, got {amplitude}")
    b = Bistable(theta=float(theta), amplitude=float(amplitude))
    _validate_bistable(b)
    return b


def bistable_from_callables(f, fprime, theta: float) -> Bistable:
    """Generic nonlinearity accepted after the same numerical validation."""
    if not (0.0 < theta < 1.0):
        raise PreconditionError(f"theta must lie in (0, 1), got {theta}")
    b = Bistable(theta=float(theta), amplitude=1.0, kind="generic", f_fn=f, fp_fn=fprime)
    _validate_bistable(b)
    return b


@dataclass(frozen=True)
class Stiffness:
    """Derived constants: max f', gamma = min (s - f(s))', F, int_0^1 f."""

    maxfp: float
    gamma: float
    intF: float
    F: Callable

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise PreconditionError(
                f"gamma = 1 - max f' must be positive, got {self.gamma}"
            )


def stiffness(b: Bistable) -> Stiffness:
    maxfp = _max_fprime(b)
    if maxfp >= 1.0:
        raise PreconditionError(f"max f' = {maxfp:.6g} >= 1 breaks the slope bound f' < 1")
    return Stiffness(
        maxfp=maxfp, gamma=1.0 - maxfp, intF=b.int_f, F=b.antiderivative
    )


@dataclass(frozen=True)
class ExtendedNonlinearity:
    """Extension of a bistable f to the whole line.

    Modes: ``odd`` (-f(-s) to the left, f'(1)(s-1) to the right),
    ``linear-tails`` (f'(0) s / f'(1)(s-1)), and ``zero-left``
    (0 to the left, f'(1)(s-1) to the right). All agree with the base
    on [0, 1] exactly.
    """

    base: Bistable
    mode: str

    def __post_init__(self):
        if self.mode not in EXTENSION_MODES:
            raise PreconditionError(f"unknown extension mode {self.mode!r}")

    def _upper(self, s):
        # shared right tail: f'(1) (s - 1)
        fp1 = float(self.base.fprime(1.0))
        return fp1 * (s - 1.0)

    def f(self, s):
        s = np.asarray(s, dtype=np.float64)
        base = self.base
        fp0 = float(base.fprime(0.0))
        mid = base.f(np.clip(s, 0.0, 1.0))
        hi = self._upper(s)
        out = np.where(s > 1.0, hi, mid)
        if self.mode == "odd":
            # reflect the full upper-half extension
            refl = np.where(-s > 1.0, self._upper(-s), base.f(np.clip(-s, 0.0, 1.0)))
            lo = -refl
        elif self.mode == "linear-tails":
            lo = fp0 * s
        else:
            lo = np.zeros_like(s)
        out = np.where(s < 0.0, lo, out)
        return out if out.ndim else float(out)

    def fprime(self, s):
        s = np.asarray(s, dtype=np.float64)
        base = self.base
        fp1 = float(base.fprime(1.0))
        fp0 = float(base.fprime(0.0))
        mid = base.fprime(np.clip(s, 0.0, 1.0))
        out = np.where(s > 1.0, fp1, mid)
        if self.mode == "odd":
            refl = np.where(-s > 1.0, fp1, base.fprime(np.clip(-s, 0.0, 1.0)))
            lo = refl
        elif self.mode == "linear-tails":
            lo = np.full_like(s, fp0)
        else:
            lo = np.zeros_like(s)
        out = np.where(s < 0.0, lo, out)
        return out if out.ndim else float(out)

    def antiderivative(self, t):
        """F(t) = int_0^t of this extension; even in t for the odd mode."""
        t = np.asarray(t, dtype=np.float64)
        base = self.base
        F1 = base.int_f
        fp1 = float(base.fprime(1.0))
        fp0 = float(base.fprime(0.0))
        tc = np.clip(np.abs(t) if self.mode == "odd" else t, 0.0, 1.0)
        mid = base.antiderivative(tc)
        s_eff = np.abs(t) if self.mode == "odd" else t
        hi = F1 + 0.5 * fp1 * (s_eff - 1.0) ** 2
        out = np.where(s_eff > 1.0, hi, mid)
        if self.mode == "linear-tails":
            out = np.where(t < 0.0, 0.5 * fp0 * t**2, out)
        elif self.mode == "zero-left":
            out = np.where(t < 0.0, 0.0, out)
        return out if out.ndim else float(out)

    def max_abs_fprime(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """max |f'| over [lo, hi]; used by explicit-step CFL bounds."""
        pts = np.linspace(lo, hi, 4001)
        vals = np.abs(self.fprime(pts))
        coarse = float(np.max(vals))
        # the maximum of |f'| on [0,1] for the cubic is at an endpoint or
        # at the interior critical point, all of which the scan brackets
        return coarse

    def max_fprime_signed(self, lo: float = 0.0, hi: float = 1.0) -> float:
        if self.base.kind == "cubic" and lo <= 0.0 and hi >= 1.0:
            inner = _max_fprime(self.base)
            tails = {"odd": max(0.0, inner), "linear-tails": 0.0, "zero-left": 0.0}
            return max(inner, tails[self.mode])
        pts = np.linspace(lo, hi, 4001)
        return float(np.max(self.fprime(pts)))


def extend(b: Bistable, mode: str) -> ExtendedNonlinearity:
    return ExtendedNonlinearity(base=b, mode=mode)
