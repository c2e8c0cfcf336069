"""The discrete nonlocal operators.

``apply_L`` realizes Lu(x) = sum_y J(x-y) (u(y) - u(x)) h^dim over the
masked domain as (J * u m)(x) - (J * m)(x) u(x), so constants are
annihilated exactly and the comparison structure (monotonicity in
off-diagonal values) holds cell by cell.

The condition "u -> 1 at infinity" is realized by a clamp band of width
>= R_J along the box boundary where fields are held at the far-field
value and residuals are not evaluated; every interior cell then sees its
full kernel mass inside the box, making the truncated operator exact
there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convolve import convolve
from .errors import PreconditionError
from .grid import Field, Grid
from .kernels import Kernel
from .nonlinearity import ExtendedNonlinearity
from .obstacles import Obstacle

__all__ = ["Problem", "apply_L", "apply_L_ball", "residual", "ball_mask"]


def ball_mask(grid: Grid, center, radius: float) -> np.ndarray:
    """Cells with center in the closed Euclidean ball."""
    c = np.atleast_1d(np.asarray(center, dtype=np.float64))
    if c.size != grid.dim:
        raise PreconditionError("ball center dimension does not match the grid")
    meshes = grid.meshes()
    d2 = sum((m - c[a]) ** 2 for a, m in enumerate(meshes))
    return d2 <= radius * radius


@dataclass
class Problem:
    """Kernel + obstacle + extended nonlinearity + far-field clamp."""

    kernel: Kernel
    obstacle: Obstacle
    f: ExtendedNonlinearity
    far_field: float = 1.0
    clamp_width: float | None = None
    conv_path: str = "fast"

    def __post_init__(self):
        grid = self.obstacle.grid
        if abs(self.kernel.h - grid.h) > 1e-15 or self.kernel.dim != grid.dim:
            raise PreconditionError("kernel lattice does not match the grid")
        if self.clamp_width is None:
            self.clamp_width = self.kernel.radius
        if self.clamp_width < self.kernel.radius:
            raise PreconditionError(
                f"clamp band width {self.clamp_width} below kernel radius "
                f"{self.kernel.radius}"
            )
        meshes = grid.meshes()
        near_edge = np.zeros(grid.shape, dtype=bool)
        for a in range(grid.dim):
            near_edge |= (meshes[a] - grid.lo[a]) < self.clamp_width
            near_edge |= (grid.hi[a] - meshes[a]) < self.clamp_width
        self.grid = grid
        self.domain_mask = self.obstacle.domain_mask
        self.clamp_mask = near_edge & self.domain_mask
        self.interior_mask = self.domain_mask & ~near_edge
        if np.any(self.obstacle.mask_K & near_edge):
            raise PreconditionError("obstacle intersects the clamp band")
        if not np.any(self.interior_mask):
            raise PreconditionError("clamp band leaves no interior cells")
        # diagonal mass seen from each cell, restricted to the box
        self.jself = convolve(self.domain_mask.astype(np.float64), self.kernel, "direct")

    def hostile_datum(self) -> Field:
        """0 in the interior, far-field value on the clamp band."""
        vals = np.zeros(self.grid.shape)
        vals[self.clamp_mask] = self.far_field
        return Field(self.grid, vals, self.domain_mask)

    def constant_datum(self, value: float) -> Field:
        vals = np.full(self.grid.shape, float(value))
        vals[self.clamp_mask] = self.far_field
        return Field(self.grid, vals, self.domain_mask)

    def clamp(self, values: np.ndarray) -> np.ndarray:
        values[self.clamp_mask] = self.far_field
        values[~self.domain_mask] = 0.0
        return values

    def check_clamped(self, u: Field) -> None:
        if u.grid != self.grid or not np.array_equal(u.mask, self.domain_mask):
            raise PreconditionError("field does not live on this problem's domain")
        if not np.all(u.values[self.clamp_mask] == self.far_field):
            raise PreconditionError("clamp band does not hold the far-field value")


def apply_L(p: Problem, u: Field, path: str | None = None) -> Field:
    """Lu on the masked domain (meaningful off the clamp band).

    Defined for any masked field; the far-field clamp precondition is
    enforced where it matters, in :func:`residual` and the solvers.
    """
    if u.grid != p.grid or not np.array_equal(u.mask, p.domain_mask):
        raise PreconditionError("field does not live on this problem's domain")
    path = path or p.conv_path
    conv = convolve(u.values, p.kernel, path)
    vals = conv - p.jself * u.values
    vals[~p.domain_mask] = 0.0
    return Field(p.grid, vals, p.domain_mask)


def apply_L_ball(
    k: Kernel,
    center,
    radius: float,
    v: Field,
    path: str = "fast",
    eval_everywhere: bool = False,
) -> Field:
    """Ball-restricted operator: (L_B v)(x) = sum_{y in B} J(x-y) v(y) h^dim.

    No diagonal term. By default the result is masked to the closed ball;
    ``eval_everywhere`` exposes the convolution on the whole box (used by
    the sub-solution certificate, whose inequality is global).
    """
    bmask = ball_mask(v.grid, center, radius)
    vals = convolve(v.values * bmask, k, path)
    if eval_everywhere:
        return Field(v.grid, vals, np.ones(v.grid.shape, dtype=bool))
    vals = np.where(bmask, vals, 0.0)
    return Field(v.grid, vals, bmask)


def residual(p: Problem, u: Field, path: str | None = None):
    """r = Lu + f(u) on interior (non-clamp) domain cells, plus its sup.

    Requires the clamp band to hold the far-field value exactly.
    """
    p.check_clamped(u)
    Lu = apply_L(p, u, path)
    vals = Lu.values + p.f.f(u.values)
    vals[~p.interior_mask] = 0.0
    r = Field(p.grid, vals, p.interior_mask)
    sup = float(np.max(np.abs(vals[p.interior_mask]))) if np.any(p.interior_mask) else 0.0
    return r, sup
