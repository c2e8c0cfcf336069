"""Independent oracles used to freeze expected values in the tests.

Everything here is deliberately written against the mathematical
definitions (plain loops, elementary quadrature, dense linear algebra),
not against the package's own fast paths, so each check compares two
genuinely different routes to the same number.
"""

from __future__ import annotations

import math

import numpy as np


def simpson(fn, a: float, b: float, n: int = 4000) -> float:
    """Composite Simpson quadrature (n even)."""
    if n % 2:
        n += 1
    xs = np.linspace(a, b, n + 1)
    ys = np.asarray(fn(xs), dtype=np.float64)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((b - a) / n / 3.0 * np.dot(w, ys))


def radial_integral_2d(fn, r_hi: float, n: int = 4000) -> float:
    """integral over R^2 of a radial function: int_0^R fn(r) 2 pi r dr."""
    return simpson(lambda r: fn(r) * 2.0 * math.pi * r, 0.0, r_hi, n)


def conv_at(arr: np.ndarray, kernel, idx) -> float:
    """(J * arr)(idx) by a plain Python accumulation over the offset table."""
    m = kernel.reach
    w = kernel.weights
    total = 0.0
    if arr.ndim == 1:
        (i0,) = idx
        for u in range(2 * m + 1):
            j = i0 + (u - m)
            if 0 <= j < arr.shape[0]:
                total += w[u] * arr[j]
        return total * kernel.h
    i0, j0 = idx
    for u in range(2 * m + 1):
        for v in range(2 * m + 1):
            ii, jj = i0 + (u - m), j0 + (v - m)
            if 0 <= ii < arr.shape[0] and 0 <= jj < arr.shape[1]:
                total += w[u, v] * arr[ii, jj]
    return total * kernel.h**2


def dense_ball_operator(kernel, grid, center, radius) -> tuple:
    """Dense matrix of L_B on a 1-D ball (for eigen oracles; <= ~200 cells)."""
    xs = grid.axis_centers(0)
    sel = np.abs(xs - center) <= radius
    pts = xs[sel]
    n = pts.size
    M = np.zeros((n, n))
    m = kernel.reach
    for i in range(n):
        for j in range(n):
            d = round((pts[j] - pts[i]) / grid.h)
            if abs(d) <= m:
                M[i, j] = kernel.weights[d + m] * grid.h
    return M, sel


def brute_distance_mask(grid, src_mask: np.ndarray, delta: float) -> np.ndarray:
    """Cells within Euclidean distance delta of a source cell (plain loops)."""
    meshes = grid.meshes()
    pts = np.stack([m.ravel() for m in meshes], axis=1)
    kpts = np.stack([m[src_mask] for m in meshes], axis=1)
    out = np.zeros(pts.shape[0], dtype=bool)
    for i in range(pts.shape[0]):
        d2 = np.min(np.sum((kpts - pts[i]) ** 2, axis=1))
        out[i] = d2 <= delta * delta
    return out.reshape(grid.shape)


def parabolic_front(j1, f, line_length: float, tol: float = 1e-11, dt=None,
                    max_steps: int = 400_000):
    """Independent explicit-Euler march of the clamped 1-D problem.

    Returns (coords, values). Written with a hand-rolled convolution loop
    so it shares nothing with the package solver except numpy."""
    h = j1.h
    n = int(round(line_length / h))
    m = j1.reach
    w = np.asarray(j1.weights)
    band = max(int(round(j1.radius / h)), 1)
    xs = (np.arange(n) + 0.5) * h - 0.5 * n * h
    u = np.where(xs < 0.0, 0.0, 1.0)
    u[:band] = 0.0
    u[-band:] = 1.0
    if dt is None:
        fp = np.abs(f.fprime(np.linspace(0, 1, 2001)))
        dt = 0.45 / (1.0 + float(np.max(fp)))
    inter = np.zeros(n, dtype=bool)
    inter[band:-band] = True
    for _ in range(max_steps):
        conv = np.zeros(n)
        for uoff in range(2 * m + 1):
            d = uoff - m
            c = w[uoff]
            if c == 0.0:
                continue
            lo_s, hi_s = max(0, d), n + min(0, d)
            conv[max(0, -d): n + min(0, -d)] += c * u[lo_s:hi_s]
        conv *= h
        r = conv - u + f.f(u)
        if float(np.max(np.abs(r[inter]))) <= tol:
            return xs, u
        u = np.where(inter, u + dt * r, u)
    raise RuntimeError("front oracle did not converge")


def d0_threshold(radius: float, dim: int, int_f: float) -> float:
    """Independent bisection for the energy-sign threshold radius."""

    def lhs(R):
        return 0.5 * (1.0 - (1.0 - radius / R) ** dim)

    lo, hi = radius * (1 + 1e-12), radius * 1e9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lhs(mid) >= int_f:
            lo = mid
        else:
            hi = mid
    return hi


def shifted_l1_tophat_axis(kernel, cells: int) -> float:
    """||J(. + s) - J||_1 for an axis shift of `cells` cells, plain loops."""
    w = kernel.weights
    pad = cells
    big = np.zeros((w.shape[0] + 2 * pad, w.shape[1] + 2 * pad))
    big[pad:-pad, pad:-pad] = w
    moved = np.zeros_like(big)
    moved[cells:, :] = big[:-cells, :]
    return float(np.sum(np.abs(moved - big))) * kernel.h**2
