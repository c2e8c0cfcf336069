"""Compact obstacle geometry on the lattice.

Set membership is decided at cell centers, so the discrete problem is an
exact instance of the continuum framework with piecewise-constant
geometry. Convexity of a mask is certified by idempotence under the
convex hull of its cell centers (a convex set contains the hull of any of
its points, so the two masks agree exactly for convex families).

Families: ``none``, ``ball``, ``ellipse``, ``polygon`` (convex), the
``annulus`` counterexample, ``star`` (exploratory, nothing asserted), and
``deformed`` (Hoelder deformations of a disk).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convolve import convolve
from .errors import PreconditionError
from .grid import Field, Grid
from .kernels import Kernel

__all__ = [
    "Obstacle",
    "PsiSpec",
    "DeformationFamily",
    "build_obstacle",
    "thicken",
    "deformation_family",
    "jmass",
    "convex_hull_mask",
]

CONVEX_FAMILIES = {"none", "ball", "ellipse", "polygon"}


@dataclass(frozen=True)
class Obstacle:
    grid: Grid
    mask_K: np.ndarray
    family: str
    params: dict
    convex: bool

    def __post_init__(self):
        m = np.array(self.mask_K, dtype=bool, copy=True)
        m.setflags(write=False)
        object.__setattr__(self, "mask_K", m)

    @property
    def domain_mask(self) -> np.ndarray:
        return ~self.mask_K

    def cell_count(self) -> int:
        return int(np.count_nonzero(self.mask_K))


def _boundary_distance(grid: Grid, mask: np.ndarray) -> float:
    """Distance from the nearest masked cell center to the box boundary."""
    if not np.any(mask):
        return math.inf
    meshes = grid.meshes()
    best = math.inf
    for a in range(grid.dim):
        x = meshes[a][mask]
        best = min(best, float(np.min(x - grid.lo[a])), float(np.min(grid.hi[a] - x)))
    return best


def _check_margin(grid: Grid, mask: np.ndarray, margin: float, what: str) -> None:
    d = _boundary_distance(grid, mask)
    if d < margin:
        raise PreconditionError(
            f"{what} comes within {d:.6g} of the box boundary (margin {margin:.6g})"
        )


# ---------------------------------------------------------------------------
# convex hull of cell centers (2-D monotone chain) and hull membership


def _hull(points: np.ndarray) -> np.ndarray:
    pts = points[np.lexsort((points[:, 1], points[:, 0]))]
    if len(pts) <= 2:
        return pts

    def cross2(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross2(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def convex_hull_mask(grid: Grid, mask: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Cells whose centers lie in the convex hull of the masked centers."""
    if not np.any(mask):
        return mask.copy()
    if grid.dim == 1:
        idx = np.flatnonzero(mask)
        out = np.zeros_like(mask)
        out[idx.min() : idx.max() + 1] = True
        return out
    meshes = grid.meshes()
    pts = np.stack([m[mask] for m in meshes], axis=1)
    hull = _hull(pts)
    if len(hull) <= 2:
        return mask.copy()
    xs = np.stack([m.ravel() for m in meshes], axis=1)
    inside = np.ones(xs.shape[0], dtype=bool)
    for i in range(len(hull)):
        a = hull[i]
        b = hull[(i + 1) % len(hull)]
        e = b - a
        cross = e[0] * (xs[:, 1] - a[1]) - e[1] * (xs[:, 0] - a[0])
        inside &= cross >= -tol
    return inside.reshape(grid.shape)


def _is_discrete_convex(grid: Grid, mask: np.ndarray) -> bool:
    return bool(np.array_equal(mask, convex_hull_mask(grid, mask)))


# ---------------------------------------------------------------------------
# shape indicator functions


def _shape_mask(family: str, params: dict, grid: Grid) -> np.ndarray:
    meshes = grid.meshes()
    if family == "none":
        return np.zeros(grid.shape, dtype=bool)
    if family == "ball":
        c = np.atleast_1d(params.get("center", np.zeros(grid.dim)))
        r = float(params["radius"])
        d2 = sum((m - c[a]) ** 2 for a, m in enumerate(meshes))
        return d2 <= r * r
    if grid.dim == 1:
        raise PreconditionError(f"family {family!r} needs dim 2")
    X, Y = meshes
    if family == "ellipse":
        c = np.atleast_1d(params.get("center", (0.0, 0.0)))
        a, b = float(params["a"]), float(params["b"])
        return ((X - c[0]) / a) ** 2 + ((Y - c[1]) / b) ** 2 <= 1.0
    if family == "polygon":
        verts = np.asarray(params["vertices"], dtype=np.float64)
        if len(verts) < 3:
            raise PreconditionError("polygon needs at least 3 vertices")
        # orient counter-clockwise and insist on convexity
        area = 0.0
        for i in range(len(verts)):
            x1, y1 = verts[i]
            x2, y2 = verts[(i + 1) % len(verts)]
            area += x1 * y2 - x2 * y1
        if area < 0:
            verts = verts[::-1]
        inside = np.ones(grid.shape, dtype=bool)
        for i in range(len(verts)):
            a0 = verts[i]
            b0 = verts[(i + 1) % len(verts)]
            e = b0 - a0
            nxt = verts[(i + 2) % len(verts)]
            if e[0] * (nxt[1] - a0[1]) - e[1] * (nxt[0] - a0[0]) < 0:
                raise PreconditionError("polygon vertices are not convex")
            inside &= e[0] * (Y - a0[1]) - e[1] * (X - a0[0]) >= 0.0
        return inside
    if family == "annulus":
        r1, r2 = float(params["r1"]), float(params["r2"])
        if not (0.0 < r1 < r2):
            raise PreconditionError("annulus needs 0 < r1 < r2")
        rr = np.hypot(X, Y)
        return (rr >= r1) & (rr <= r2)
    if family == "star":
        r0 = float(params.get("r0", 1.0))
        r1 = float(params.get("r1", 0.4))
        kk = int(params.get("points", 5))
        phi = np.arctan2(Y, X)
        return np.hypot(X, Y) <= r0 + r1 * np.cos(kk * phi)
    if family == "deformed":
        base_r = float(params["radius"])
        eps = float(params.get("epsilon", 0.0))
        psi = params.get("psi") or PsiSpec()
        phi = np.arctan2(Y, X)
        return np.hypot(X, Y) <= base_r + eps * psi(phi)
    raise PreconditionError(f"unknown obstacle family {family!r}")


def build_obstacle(family: str, params: dict, grid: Grid, margin: float = 1.5) -> Obstacle:
    """Mask a shape at cell centers; convexity is asserted for convex
    families via the hull fixed-point test."""
    mask = _shape_mask(family, dict(params), grid)
    if family != "none" and not np.any(mask):
        raise PreconditionError(f"obstacle {family!r} contains no cell centers")
    _check_margin(grid, mask, margin, f"obstacle {family!r}")
    convex = family in CONVEX_FAMILIES
    if family == "deformed" and float(params.get("epsilon", 0.0)) == 0.0:
        convex = True  # the eps -> 0 limit is the base disk
    if convex and np.any(mask) and not _is_discrete_convex(grid, mask):
        raise PreconditionError(f"family {family!r} mask failed the hull test")
    return Obstacle(grid=grid, mask_K=mask, family=family, params=dict(params), convex=convex)


def thicken(K: Obstacle, delta: float, margin: float = 1.5) -> Obstacle:
    """K_delta: cells within Euclidean distance delta of a K cell center."""
    if delta < 0.0:
        raise PreconditionError(f"thickening width must be >= 0, got {delta}")
    if delta == 0.0 or not np.any(K.mask_K):
        return Obstacle(K.grid, K.mask_K, K.family, dict(K.params, delta=0.0), K.convex)
    grid = K.grid
    meshes = grid.meshes()
    pts = np.stack([m.ravel() for m in meshes], axis=1)
    kpts = np.stack([m[K.mask_K] for m in meshes], axis=1)
    out = np.zeros(pts.shape[0], dtype=bool)
    chunk = max(1, int(2e7) // max(kpts.shape[0], 1))
    for s in range(0, pts.shape[0], chunk):
        e = min(s + chunk, pts.shape[0])
        d2 = np.min(
            np.sum((pts[s:e, None, :] - kpts[None, :, :]) ** 2, axis=2), axis=1
        )
        out[s:e] = d2 <= delta * delta
    mask = out.reshape(grid.shape)
    _check_margin(grid, mask, margin, "thickened obstacle")
    convex = K.convex and _is_discrete_convex(grid, mask)
    return Obstacle(grid, mask, K.family, dict(K.params, delta=float(delta)), convex)


@dataclass(frozen=True)
class PsiSpec:
    """Angular bump for deformations: amp * max(0, 1 + cos(k phi)) >= 0."""

    kind: str = "cos_clipped"
    k: int = 6
    amp: float = 1.0
    fn: object = None

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=np.float64)
        if self.kind == "cos_clipped":
            return self.amp * np.clip(1.0 + np.cos(self.k * phi), 0.0, None)
        vals = np.asarray(self.fn(phi), dtype=np.float64)
        return vals

    def validate(self) -> None:
        probe = np.linspace(-math.pi, math.pi, 14401)
        if float(np.min(self(probe))) < 0.0:
            raise PreconditionError("psi takes negative values; K would not contain K_eps")


@dataclass(frozen=True)
class DeformationFamily:
    """K_eps = {r <= rho + eps psi(phi)} around a base disk; monotone in eps."""

    base_radius: float
    psi: PsiSpec

    def __post_init__(self):
        self.psi.validate()

    def obstacle(self, eps: float, grid: Grid, margin: float = 1.5) -> Obstacle:
        if not (0.0 <= eps <= 1.0):
            raise PreconditionError(f"epsilon must lie in [0, 1], got {eps}")
        if eps == 0.0:
            return build_obstacle("ball", {"radius": self.base_radius}, grid, margin)
        return build_obstacle(
            "deformed",
            {"radius": self.base_radius, "epsilon": eps, "psi": self.psi},
            grid,
            margin,
        )


def deformation_family(base_radius: float, psi: PsiSpec | None = None) -> DeformationFamily:
    return DeformationFamily(base_radius=float(base_radius), psi=psi or PsiSpec())


def jmass(k: Kernel, K: Obstacle, path: str = "direct") -> Field:
    """Mass map J(x) = 1 - int_K J(x - y) dy, the kernel mass visible from x.

    Computed through the complement so the value is exact for every cell,
    including those near the box edge (the far part of the domain carries
    the missing mass). Values are certified to lie in [0, 1] within 1e-12.
    """
    kk = convolve(K.mask_K.astype(np.float64), k, path=path)
    vals = 1.0 - kk
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if lo < -1e-12 or hi > 1.0 + 1e-12:
        raise PreconditionError(f"mass map escaped [0,1]: [{lo:.3e}, {hi:.3e}]")
    vals = np.clip(vals, 0.0, 1.0)
    return Field(K.grid, vals, K.domain_mask)
