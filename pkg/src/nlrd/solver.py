"""Constructive schemes: parabolic relaxation, the monotone resolvent
iteration for maximal ball solutions, the energy functional, principal
eigenvalue estimates, 1-D front profiles, and compactly supported
sub-solutions.

Scheme notes
------------
* ``evolve`` is explicit Euler with clipping to [0, 1]. Under the step
  bound dt <= 0.9 / (max J_box + max |f'|) the update map is monotone in
  every cell value, so discrete comparison is preserved exactly; clipping
  is a no-op for order-respecting data and only guards float drift.
* ``maximal_solution`` runs the resolvent scheme
  L_B[v_{n+1}] - (k+1) v_{n+1} = -k v_n - f(v_n), v_0 = 1, with
  k = ceil(max |f'|) + 1. Monotone descent of the iterates needs
  s -> k s + f(s) increasing, i.e. k >= -min f' (the steep downhill side
  of f is the binding constraint); the inner linear solve then contracts
  with factor <= 1/(k+1).
* ``front_profile`` relaxes the clamped truncated-line problem. The
  damped iteration preserves monotonicity in x and converges to the
  stationary profile of the clamped line; the translation is fixed
  afterwards by anchoring the coordinate origin at the cell where the
  profile crosses theta.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .convolve import convolve
from .errors import NumericalFailure, PreconditionError
from .grid import Field, Grid, make_grid
from .kernels import Kernel, KernelConstants
from .nonlinearity import Bistable, ExtendedNonlinearity, extend
from .operators import Problem, ball_mask
from .reduction import pairwise_sum

__all__ = [
    "EvolveResult",
    "FrontProfile",
    "MaximalSolution",
    "SubSolution",
    "EnergyResult",
    "evolve",
    "evolve_ball",
    "resolvent_solve",
    "maximal_solution",
    "energy",
    "principal_eigenvalue",
    "front_profile",
    "build_subsolution",
    "ball_grid",
]


# ---------------------------------------------------------------------------
# parabolic relaxation on the obstacle domain


@dataclass
class EvolveResult:
    u: Field
    steps: int
    converged: bool
    residual_sup: float
    dt: float
    log_rows: list


def max_step(p: Problem) -> float:
    """Comparison-preserving explicit-Euler bound 0.9/(max J + max |f'|)."""
    max_j = float(np.max(p.jself[p.domain_mask]))
    return 0.9 / (max_j + p.f.max_abs_fprime(0.0, 1.0))


def evolve(
    p: Problem,
    u0: Field,
    dt: float | None = None,
    max_steps: int = 200_000,
    residual_tol: float = 1e-8,
    path: str | None = None,
    log_every: int = 0,
) -> EvolveResult:
    """March u' = Lu + f(u) to a stationary point.

    Stops at the first iterate whose interior residual sup falls below
    ``residual_tol`` (a fixed point therefore stops at step 0), or returns
    the ``max_steps`` iterate flagged unconverged.
    """
    p.check_clamped(u0)
    bound = max_step(p)
    if dt is None:
        dt = bound
    elif dt > bound * (1.0 + 1e-12):
        raise PreconditionError(f"dt = {dt} above the comparison bound {bound:.6g}")
    if np.any(u0.values[p.domain_mask] < 0.0) or np.any(u0.values[p.domain_mask] > 1.0):
        raise PreconditionError("initial datum must take values in [0, 1]")
    path = path or p.conv_path
    u = u0.values.copy()
    inter = p.interior_mask
    log_rows: list = []
    steps = 0
    while True:
        conv = convolve(u, p.kernel, path)
        r = conv - p.jself * u + p.f.f(u)
        sup = float(np.max(np.abs(r[inter])))
        if not math.isfinite(sup):
            raise NumericalFailure(f"non-finite residual at step {steps}")
        row = (steps, sup, float(np.min(u[p.domain_mask])), float(np.max(u[p.domain_mask])))
        if log_every and (steps % log_every == 0):
            log_rows.append(row)
        if sup <= residual_tol or steps >= max_steps:
            if not log_rows or log_rows[-1][0] != steps:
                log_rows.append(row)
            return EvolveResult(
                Field(p.grid, u, p.domain_mask), steps, sup <= residual_tol, sup, dt, log_rows
            )
        u = np.clip(u + dt * r, 0.0, 1.0)
        u = p.clamp(u)
        steps += 1


# ---------------------------------------------------------------------------
# ball problems


def ball_grid(center, radius: float, h: float, pad: float = 0.0) -> Grid:
    """Tight box around a ball, aligned so cell centers sit at
    center + (i + 1/2 - n) h; translated balls then share one lattice."""
    c = np.atleast_1d(np.asarray(center, dtype=np.float64))
    n = int(math.ceil((radius + pad) / h - 1e-12))
    lo = [ci - n * h for ci in c]
    hi = [ci + n * h for ci in c]
    return make_grid(lo, hi, h)


def evolve_ball(
    k: Kernel,
    f: ExtendedNonlinearity,
    center,
    radius: float,
    grid: Grid | None = None,
    u0: np.ndarray | None = None,
    dt: float | None = None,
    residual_tol: float = 1e-9,
    max_steps: int = 500_000,
    path: str = "fast",
):
    """Parabolic route to the ball equation: u' = L_B u - u + f(u) from 1.

    From the constant super-solution 1 the iterates decrease monotonically
    to the maximal solution; this is the independent oracle for
    :func:`maximal_solution`.
    """
    grid = grid or ball_grid(center, radius, k.h)
    bmask = ball_mask(grid, center, radius)
    if dt is None:
        dt = 0.9 / (1.0 + f.max_abs_fprime(0.0, 1.0))
    u = np.where(bmask, 1.0, 0.0) if u0 is None else np.asarray(u0, dtype=np.float64).copy()
    steps = 0
    while True:
        conv = convolve(u * bmask, k, path)
        r = np.where(bmask, conv - u + f.f(u), 0.0)
        sup = float(np.max(np.abs(r[bmask])))
        if not math.isfinite(sup):
            raise NumericalFailure(f"non-finite ball residual at step {steps}")
        if sup <= residual_tol or steps >= max_steps:
            return Field(grid, np.where(bmask, u, 0.0), bmask), steps, sup <= residual_tol, sup
        u = u + dt * r
        steps += 1


def resolvent_solve(
    k: Kernel,
    bmask: np.ndarray,
    kshift: float,
    rhs: np.ndarray,
    w0: np.ndarray | None = None,
    tol: float = 1e-13,
    max_sweeps: int = 100_000,
    path: str = "fast",
) -> np.ndarray:
    """Solve L_B[w] - (kshift+1) w = rhs by the contraction
    w <- (L_B[w] - rhs) / (kshift+1); factor <= 1/(kshift+1) since the
    operator's row sums are at most 1."""
    if kshift <= 0.0:
        raise PreconditionError("resolvent shift must be positive for contraction")
    w = np.zeros(bmask.shape) if w0 is None else np.asarray(w0, dtype=np.float64).copy()
    w[~bmask] = 0.0
    denom = kshift + 1.0
    for _ in range(max_sweeps):
        new = (convolve(w * bmask, k, path) - rhs) / denom
        new[~bmask] = 0.0
        inc = float(np.max(np.abs(new - w)))
        w = new
        if inc <= tol:
            break
    else:
        raise NumericalFailure("resolvent contraction did not converge")
    lin = convolve(w * bmask, k, path) - denom * w - rhs
    lin_sup = float(np.max(np.abs(lin[bmask])))
    if lin_sup > 1e-11:
        raise NumericalFailure(f"resolvent residual {lin_sup:.3e} > 1e-11")
    return w


@dataclass
class MaximalSolution:
    center: tuple
    radius: float
    field: Field
    iterations: int
    final_increment: float
    kshift: float
    f: ExtendedNonlinearity
    kernel: Kernel
    history: list = dc_field(default_factory=list)  # (iter, decrease, worst rise)

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def bmask(self) -> np.ndarray:
        return self.field.mask


def maximal_solution(
    k: Kernel,
    f: ExtendedNonlinearity,
    center,
    radius: float,
    d0: float,
    grid: Grid | None = None,
    tol: float = 1e-10,
    path: str = "fast",
    max_outer: int = 20_000,
) -> MaximalSolution:
    """Monotone resolvent iteration from v_0 = 1 on the closed ball.

    Requires R >= d0 (existence threshold from ``kernel_constants``) and the
    zero-left extension, under which every iterate stays nonnegative. The
    sequence is checked to be non-increasing to 1e-12 at every step; the
    final field solves the ball equation to 1e-9 and exceeds theta
    somewhere, else the run is reported as collapsed.
    """
    if f.mode != "zero-left":
        raise PreconditionError("maximal_solution requires the zero-left extension")
    if radius < d0:
        raise PreconditionError(f"R = {radius} below existence threshold d0 = {d0:.6g}")
    if radius < k.radius:
        raise PreconditionError("ball smaller than the kernel support")
    grid = grid or ball_grid(center, radius, k.h)
    bmask = ball_mask(grid, center, radius)
    # iterates stay in [0, 1]; k must dominate the steepest descent of f
    # there or the scheme loses its ordering
    kshift = float(math.ceil(f.max_abs_fprime(0.0, 1.0))) + 1.0
    v = np.where(bmask, 1.0, 0.0)
    iterations = 0
    inc = math.inf
    history: list = []
    while iterations < max_outer:
        rhs = np.where(bmask, -kshift * v - f.f(v), 0.0)
        new = resolvent_solve(k, bmask, kshift, rhs, w0=v, path=path)
        # 1 is a super-solution, so exact iterates stay <= 1; trimming the
        # odd ulp of convolution roundoff keeps the invariant checkable
        np.minimum(new, 1.0, out=new)
        rise = float(np.max((new - v)[bmask]))
        if rise > 1e-12:
            raise NumericalFailure(
                f"monotonicity violated by {rise:.3e}; resolvent shift too small"
            )
        inc = float(np.max((v - new)[bmask]))
        v = new
        iterations += 1
        history.append((iterations, inc, rise))
        if inc <= tol:
            break
    else:
        raise NumericalFailure("monotone scheme did not reach its tolerance")
    res = convolve(v * bmask, k, path) - v + f.f(v)
    res_sup = float(np.max(np.abs(res[bmask])))
    if res_sup > 1e-9:
        raise NumericalFailure(f"ball-equation residual {res_sup:.3e} > 1e-9")
    vmax = float(np.max(v[bmask]))
    vmin = float(np.min(v[bmask]))
    # v < 1 holds strictly in exact arithmetic, but 1 - v decays like
    # exp(-kappa dist) from the ball boundary and saturates to 0.0 in
    # float64 deep inside large balls; only overshoot is an error
    if not (0.0 < vmin and vmax <= 1.0):
        raise NumericalFailure(f"solution escaped (0, 1]: [{vmin:.3e}, {vmax:.17g}]")
    theta = f.base.theta
    if vmax <= theta:
        raise NumericalFailure(
            f"collapsed to trivial branch: max v = {vmax:.6f} <= theta = {theta}"
        )
    return MaximalSolution(
        center=tuple(np.atleast_1d(center).astype(float)),
        radius=float(radius),
        field=Field(grid, np.where(bmask, v, 0.0), bmask),
        iterations=iterations,
        final_increment=inc,
        kshift=kshift,
        f=f,
        kernel=k,
        history=history,
    )


# ---------------------------------------------------------------------------
# energy functional on a ball


@dataclass
class EnergyResult:
    value: float       # quadratic-difference form
    cross_form: float  # correlation form
    pair_term: float
    mass_term: float
    potential_term: float


def energy(k: Kernel, f: ExtendedNonlinearity, center, radius: float, u: Field) -> EnergyResult:
    """E(u) over the ball, computed by two independent summation routes.

    Route 1 sums J(x-y)(u(y)-u(x))^2 pair by pair over the offset table
    plus the boundary-leak mass term; route 2 uses the correlation form
    -1/2 <u, L_B u> + 1/2 <u, u> - sum F(u). The two must agree to
    1e-9 relative, which cross-checks the convolution machinery inside a
    genuinely different reduction order.
    """
    if f.mode != "odd":
        raise PreconditionError("energy requires the odd extension (even antiderivative)")
    grid = u.grid
    bmask = ball_mask(grid, center, radius)
    if not np.array_equal(bmask, u.mask):
        raise PreconditionError("field mask is not the requested ball")
    hd = grid.h**grid.dim
    vals = u.values
    m = k.reach
    w = k.weights

    pair_sums = []
    bm = bmask.astype(np.float64)
    if grid.dim == 1:
        n0 = vals.shape[0]
        for uu in range(2 * m + 1):
            c = w[uu]
            if c == 0.0:
                continue
            d = uu - m
            a_sl = slice(max(0, d), n0 + min(0, d))
            b_sl = slice(max(0, -d), n0 + min(0, -d))
            both = bmask[a_sl] & bmask[b_sl]
            diff2 = (vals[a_sl] - vals[b_sl]) ** 2
            pair_sums.append(c * pairwise_sum(diff2 * both))
    else:
        n0, n1 = vals.shape
        for uu in range(2 * m + 1):
            di = uu - m
            for vv in range(2 * m + 1):
                c = w[uu, vv]
                if c == 0.0:
                    continue
                dj = vv - m
                a_sl = (slice(max(0, di), n0 + min(0, di)), slice(max(0, dj), n1 + min(0, dj)))
                b_sl = (slice(max(0, -di), n0 + min(0, -di)), slice(max(0, -dj), n1 + min(0, -dj)))
                both = bmask[a_sl] & bmask[b_sl]
                diff2 = (vals[a_sl] - vals[b_sl]) ** 2
                pair_sums.append(c * pairwise_sum(diff2 * both))
    pair_term = 0.25 * hd * hd * pairwise_sum(np.asarray(pair_sums))

    mass_in_ball = convolve(bm, k, "fast")
    cvals = np.where(bmask, 1.0 - mass_in_ball, 0.0)
    mass_term = 0.5 * hd * pairwise_sum(cvals * vals * vals)
    Fvals = np.where(bmask, f.antiderivative(vals), 0.0)
    potential_term = hd * pairwise_sum(Fvals)
    form1 = pair_term + mass_term - potential_term

    Lu = convolve(vals * bm, k, "fast")
    form2 = (
        -0.5 * hd * pairwise_sum(np.where(bmask, vals * Lu, 0.0))
        + 0.5 * hd * pairwise_sum(np.where(bmask, vals * vals, 0.0))
        - potential_term
    )
    if abs(form1 - form2) > 1e-9 * (1.0 + abs(form1)):
        raise NumericalFailure(
            f"energy forms disagree: {form1!r} vs {form2!r}"
        )
    return EnergyResult(form1, form2, pair_term, mass_term, potential_term)


def principal_eigenvalue(
    k: Kernel,
    center,
    radius: float,
    grid: Grid | None = None,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    path: str = "fast",
):
    """lambda_p of L_B - Id by power iteration on the shifted operator
    L_B + Id (nonnegative spectrum, so the Perron mode dominates)."""
    grid = grid or ball_grid(center, radius, k.h)
    bmask = ball_mask(grid, center, radius)
    x = np.where(bmask, 1.0, 0.0)
    x /= math.sqrt(pairwise_sum(x * x))
    lam_shifted = 0.0
    for it in range(max_iter):
        ax = np.where(bmask, convolve(x * bmask, k, path) + x, 0.0)
        new_lam = pairwise_sum(x * ax)  # Rayleigh quotient, ||x|| = 1
        ax /= math.sqrt(pairwise_sum(ax * ax))
        x = ax
        if it > 0 and abs(new_lam - lam_shifted) <= tol:
            lam_shifted = new_lam
            break
        lam_shifted = new_lam
    else:
        raise NumericalFailure("power iteration did not converge")
    lam_p = lam_shifted - 2.0  # spectrum was shifted by +1, Id subtracts 1 more
    if lam_p >= 0.0:
        raise NumericalFailure(f"principal eigenvalue {lam_p:.3e} not negative")
    if float(np.min(x[bmask])) <= 0.0:
        raise NumericalFailure("Perron vector lost positivity")
    return lam_p, Field(grid, np.where(bmask, x, 0.0), bmask)


# ---------------------------------------------------------------------------
# 1-D front profiles


@dataclass
class FrontProfile:
    """Clamped-line stationary profile with the theta crossing at x = 0."""

    grid: Grid
    values: np.ndarray
    pin_index: int
    residual_sup: float      # over cells at least 2 R_J from the ends
    window: tuple            # coordinate range where the residual is certified
    left_value: float
    right_value: float
    limits: tuple = (0.0, 1.0)
    source_kernel: Kernel | None = None  # the 1-D kernel it solves against

    def coords(self) -> np.ndarray:
        return self.grid.axis_centers(0)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.interp(t, self.coords(), self.values,
                        left=self.limits[0], right=self.limits[1])
        return out if out.ndim else float(out)


def front_profile(
    j1: Kernel,
    f: Bistable,
    line_length: float | None = None,
    tol: float = 1e-12,
    max_sweeps: int = 400_000,
    residual_tol: float = 1e-8,
    level_shift_delta: float | None = None,
    path: str = "direct",
) -> FrontProfile:
    """Damped fixed-point iteration for the clamped-line front.

    phi <- phi + tau (J_1 * phi - phi + f(phi)) from a step datum, with the
    end bands clamped to the stable states and tau = 0.5/(1 + max |f'|).
    The layer drifts to its equilibrium near the invaded end and the
    iteration converges there; the coordinate origin is finally anchored
    at the theta crossing, which removes the translation degree of freedom
    without touching the samples.

    ``level_shift_delta`` builds the shifted profile for
    f_delta(s) = f(s) - f(1 - delta/2), whose limits are (s_delta,
    1 - delta/2); used by the uniform-lower-bound machinery.
    """
    if j1.dim != 1:
        raise PreconditionError("front_profile needs a 1-D kernel (use marginal_j1)")
    h = j1.h
    RJ = j1.radius
    L = float(line_length) if line_length is not None else 200.0 * RJ
    if L < 200.0 * RJ - 1e-12:
        raise PreconditionError(f"truncated line must be at least 200 R_J = {200*RJ}")
    n = int(round(L / h))
    grid = make_grid([-0.5 * n * h], [0.5 * n * h], h)

    if level_shift_delta is None:
        lo_state, hi_state = 0.0, 1.0
        fd = f.f
        theta_level = f.theta
        fp_scan = np.abs(f.fprime(np.linspace(0.0, 1.0, 4001)))
    else:
        delta = float(level_shift_delta)
        if not (0.0 < delta < 1.0):
            raise PreconditionError("level shift delta must lie in (0, 1)")
        fl = extend(f, "linear-tails")
        shift = float(f.f(1.0 - delta / 2.0))
        s_delta = shift / float(f.fprime(0.0))
        lo_state, hi_state = s_delta, 1.0 - delta / 2.0

        def fd(s):
            return fl.f(s) - shift

        theta_level = 0.0  # the shifted family is normalized by its zero crossing
        fp_scan = np.abs(fl.fprime(np.linspace(lo_state, hi_state, 4001)))

    tau = 0.5 / (1.0 + float(np.max(fp_scan)))
    band = max(int(round(RJ / h)), 1)
    interior = np.zeros(n, dtype=bool)
    interior[band:-band] = True

    x = grid.axis_centers(0)
    phi = np.where(x < 0.0, lo_state, hi_state)
    phi[:band] = lo_state
    phi[-band:] = hi_state

    sweeps = 0
    while True:
        r = convolve(phi, j1, path) - phi + fd(phi)
        inc = tau * float(np.max(np.abs(r[interior])))
        if not math.isfinite(inc):
            raise NumericalFailure(f"front iteration lost finiteness at sweep {sweeps}")
        if inc <= tol:
            break
        if sweeps >= max_sweeps:
            raise NumericalFailure(
                f"front residual plateau: increment {inc:.3e} after {sweeps} sweeps"
            )
        phi = np.where(interior, phi + tau * r, phi)
        sweeps += 1

    diffs = np.diff(phi)
    if float(np.min(diffs)) <= -1e-12:
        raise NumericalFailure("profile not monotone; refine grid")

    wide = np.zeros(n, dtype=bool)
    wide[2 * band : -2 * band] = True
    r = convolve(phi, j1, path) - phi + fd(phi)
    res_sup = float(np.max(np.abs(r[wide])))
    if res_sup > residual_tol:
        raise NumericalFailure(f"front residual {res_sup:.3e} > {residual_tol}")

    pin = int(np.searchsorted(phi, theta_level))
    pin = min(max(pin, 0), n - 1)
    anchored = make_grid([-(pin + 0.5) * h], [(n - pin - 0.5) * h], h)
    xs = anchored.axis_centers(0)
    return FrontProfile(
        grid=anchored,
        values=phi,
        pin_index=pin,
        residual_sup=res_sup,
        window=(float(xs[2 * band]), float(xs[-2 * band - 1])),
        left_value=float(phi[0]),
        right_value=float(phi[-1]),
        limits=(lo_state, hi_state),
        source_kernel=j1,
    )


# ---------------------------------------------------------------------------
# compactly supported sub-solutions


@dataclass
class SubSolution:
    base: MaximalSolution
    delta: float
    field: Field
    verify_min: float
    tol_geom: float


def build_subsolution(
    v: MaximalSolution,
    delta: float,
    kc: KernelConstants,
    grid: Grid | None = None,
    path: str = "fast",
) -> SubSolution:
    """w(x) = max(v(P(x)) - dist(x, B)/delta, 0): v inside the ball,
    a cone of slope 1/delta on the shell, zero past B_{R+delta}.

    Verifies L_{B_{R+delta}}[w] - w + f(w) >= -tol_geom at every box cell,
    with tol_geom = 2 h w11 absorbing the lattice quadrature error of the
    projection (P lands between cell centers). Requires delta <= delta0 =
    gamma / w11, hence a W^{1,1} kernel profile.
    """
    if kc.delta0 is None:
        raise PreconditionError(
            "delta0 undefined: kernel profile is not W^{1,1} (use the quartic bump)"
        )
    if not (0.0 < delta <= kc.delta0):
        raise PreconditionError(f"delta = {delta} outside (0, delta0 = {kc.delta0:.6g}]")
    k = v.kernel
    h = k.h
    c = np.asarray(v.center)
    R = v.radius
    if grid is None:
        grid = ball_grid(v.center, R + delta + k.radius, h, pad=2 * h)
    # both grids are h-lattices with box corners on multiples of h; the
    # integer cell offset lets ball values be copied over exactly
    off = [(grid.lo[a] - v.field.grid.lo[a]) / h for a in range(grid.dim)]
    ioff = [int(round(o)) for o in off]
    if any(abs(o - i) > 1e-9 for o, i in zip(off, ioff)):
        raise PreconditionError("target grid is not lattice-aligned with the ball grid")

    meshes = grid.meshes()
    dist = np.sqrt(sum((m - c[a]) ** 2 for a, m in enumerate(meshes)))
    tau = np.clip(dist - R, 0.0, None)
    inside = dist <= R

    w = np.zeros(grid.shape)
    src_grid = v.field.grid
    # copy v on the overlap of the two index boxes
    src_slices, dst_slices = [], []
    for a in range(grid.dim):
        s0 = max(0, ioff[a])
        d0 = max(0, -ioff[a])
        span = min(src_grid.counts[a] - s0, grid.counts[a] - d0)
        src_slices.append(slice(s0, s0 + span))
        dst_slices.append(slice(d0, d0 + span))
    w[tuple(dst_slices)] = v.values[tuple(src_slices)]
    w[~inside] = 0.0

    shell = (~inside) & (tau <= delta)
    if np.any(shell):
        pts = np.stack([m[shell] for m in meshes], axis=1)
        d = dist[shell][:, None]
        proj = c[None, :] + R * (pts - c[None, :]) / d
        fi = (proj - np.asarray(src_grid.lo)[None, :]) / h - 0.5
        idx = np.rint(fi).astype(np.int64)
        for a in range(grid.dim):
            np.clip(idx[:, a], 0, src_grid.counts[a] - 1, out=idx[:, a])
        vmask = v.bmask
        vvals = v.values
        picked = np.empty(idx.shape[0])
        for row in range(idx.shape[0]):
            ii = tuple(idx[row])
            if vmask[ii]:
                picked[row] = vvals[ii]
                continue
            # nearest cell center fell just off the discrete ball: take the
            # closest masked neighbor in the 3x3 box around the projection
            best = None
            bestd = math.inf
            ranges = [range(max(0, ii[a] - 1), min(src_grid.counts[a], ii[a] + 2))
                      for a in range(grid.dim)]
            for nb in itertools.product(*ranges):
                if not vmask[nb]:
                    continue
                ctr = src_grid.cell_center(nb)
                dd = sum((ctr[a] - proj[row, a]) ** 2 for a in range(grid.dim))
                if dd < bestd:
                    bestd = dd
                    best = nb
            if best is None:
                raise NumericalFailure("projection found no ball cell nearby")
            picked[row] = vvals[best]
        w[shell] = np.clip(picked - tau[shell] / delta, 0.0, None)

    rprime = R + delta
    big = ball_mask(grid, v.center, rprime)
    Lw = convolve(w * big, k, path)
    certificate = Lw - w + v.f.f(w)
    verify_min = float(np.min(certificate))
    tol_geom = 2.0 * h * kc.w11
    if verify_min < -tol_geom:
        raise NumericalFailure(
            f"sub-solution certificate {verify_min:.3e} below -{tol_geom:.3e}"
        )
    return SubSolution(
        base=v,
        delta=float(delta),
        field=Field(grid, w, np.ones(grid.shape, dtype=bool)),
        verify_min=verify_min,
        tol_geom=tol_geom,
    )
