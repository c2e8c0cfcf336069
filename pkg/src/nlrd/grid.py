"""Uniform cell-centered grids, masked fields, and discrete seminorms.

A :class:`Grid` is a uniform Cartesian lattice over a box in one or two
dimensions; samples live at cell centers ``lo + (i + 1/2) h``. A
:class:`Field` pairs samples with a boolean domain mask (``True`` = the
cell belongs to the computational domain). Masked-out cells always store
``0.0`` and no operation reads them.

Fields are immutable after construction: the backing arrays are marked
read-only and every operation returns a new ``Field``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import PreconditionError
from .reduction import pairwise_sum

__all__ = [
    "Grid",
    "Field",
    "HalfSpace",
    "HolderEstimate",
    "make_grid",
    "make_field",
    "sup_metrics",
    "holder_quotient",
    "field_to_csv",
]


@dataclass(frozen=True)
class Grid:
    """Uniform lattice: per-axis extents, spacing ``h`` and cell counts."""

    lo: tuple
    hi: tuple
    h: float
    counts: tuple

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def ncells(self) -> int:
        return int(np.prod(self.counts))

    def axis_centers(self, a: int) -> np.ndarray:
        n = self.counts[a]
        return self.lo[a] + (np.arange(n) + 0.5) * self.h

    def meshes(self):
        """Coordinate arrays broadcast to ``self.shape`` (C-order, axis 0 = x0)."""
        axes = [self.axis_centers(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def cell_center(self, idx) -> tuple:
        idx = np.atleast_1d(idx)
        return tuple(self.lo[a] + (int(idx[a]) + 0.5) * self.h for a in range(self.dim))


def make_grid(lo, hi, h: float) -> Grid:
    """Build a grid, rejecting extents that are not integral multiples of ``h``.

    Reconstruction guard: ``|lo + counts*h - hi| < 1e-12 * h`` per axis.
    """
    lo = tuple(float(v) for v in np.atleast_1d(lo))
    hi = tuple(float(v) for v in np.atleast_1d(hi))
    if len(lo) != len(hi):
        raise PreconditionError("grid extents have mismatched dimensions")
    if len(lo) not in (1, 2):
        raise PreconditionError(f"dim must be 1 or 2, got {len(lo)}")
    if not (h > 0):
        raise PreconditionError(f"grid spacing must be positive, got {h}")
    counts = []
    for a, (l, u) in enumerate(zip(lo, hi)):
        if not u > l:
            raise PreconditionError(f"axis {a}: hi must exceed lo")
        n = int(round((u - l) / h))
        if n < 1 or abs(l + n * h - u) >= 1e-12 * h:
            raise PreconditionError(
                f"axis {a}: extent [{l}, {u}] is not an integral multiple of h={h}"
            )
        counts.append(n)
    return Grid(lo=lo, hi=hi, h=float(h), counts=tuple(counts))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Field:
    """Real samples on a grid plus a domain mask; masked-out cells hold 0."""

    grid: Grid
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        m = np.array(self.mask, dtype=bool, copy=True)
        if v.shape != self.grid.shape or m.shape != self.grid.shape:
            raise PreconditionError("field arrays do not match the grid shape")
        v[~m] = 0.0
        object.__setattr__(self, "values", _freeze(v))
        object.__setattr__(self, "mask", _freeze(m))

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values, self.mask)

    def masked_in(self) -> np.ndarray:
        return self.values[self.mask]

    @property
    def n_masked(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass(frozen=True)
class HalfSpace:
    """Open affine half-space ``{x : x . e > offset}`` with |e| = 1."""

    normal: tuple
    offset: float

    def __post_init__(self):
        e = np.asarray(self.normal, dtype=np.float64)
        if abs(float(np.linalg.norm(e)) - 1.0) > 1e-12:
            raise PreconditionError("half-space normal must be a unit vector")
        object.__setattr__(self, "normal", tuple(float(c) for c in e))

    def contains(self, grid: Grid) -> np.ndarray:
        """Boolean mask of cells with center strictly inside the half-space."""
        meshes = grid.meshes()
        dot = sum(c * m for c, m in zip(self.normal, meshes))
        return dot > self.offset


def make_field(grid: Grid, fn: Callable, mask: Callable | np.ndarray | None = None) -> Field:
    """Sample ``fn`` at cell centers under an optional domain mask.

    ``fn`` and ``mask`` receive the broadcast coordinate arrays (one per
    axis). A non-finite sample at a masked-in cell is rejected with the
    offending coordinate.
    """
    meshes = grid.meshes()
    vals = np.broadcast_to(np.asarray(fn(*meshes), dtype=np.float64), grid.shape).copy()
    if mask is None:
        m = np.ones(grid.shape, dtype=bool)
    elif callable(mask):
        m = np.broadcast_to(np.asarray(mask(*meshes), dtype=bool), grid.shape).copy()
    else:
        m = np.asarray(mask, dtype=bool).copy()
    bad = m & ~np.isfinite(vals)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise PreconditionError(
            f"non-finite sample at cell center {grid.cell_center(idx)}"
        )
    return Field(grid, vals, m)


def sup_metrics(a: Field, b: Field) -> dict:
    """Sup-norm of a-b plus min/max of ``a``, all over masked-in cells."""
    if a.grid != b.grid or not np.array_equal(a.mask, b.mask):
        raise PreconditionError("sup_metrics requires identical grids and masks")
    av = a.masked_in()
    bv = b.masked_in()
    if av.size == 0:
        raise PreconditionError("sup_metrics on an empty mask")
    return {
        "sup_diff": float(np.max(np.abs(av - bv))),
        "min_a": float(np.min(av)),
        "max_a": float(np.max(av)),
    }


@dataclass(frozen=True)
class HolderEstimate:
    """Discrete Hoelder quotient; ``exact`` is False on a subsampled pair set
    (the value is then a lower bound of the full discrete seminorm)."""

    value: float
    exact: bool
    pairs_used: int


def _pair_decode(k: np.ndarray, n: int) -> tuple:
    # inverse of the triangular enumeration of pairs (i<j) of range(n)
    i = (2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * k)) // 2
    i = i.astype(np.int64)
    # guard rounding at block edges
    base = i * (2 * n - i - 1) // 2
    over = base > k
    i[over] -= 1
    base = i * (2 * n - i - 1) // 2
    j = (k - base) + i + 1
    return i, j.astype(np.int64)


def _lcg_prefix(total: int, count: int) -> np.ndarray:
    """First ``count`` members of a fixed full-period LCG permutation of
    ``range(2**m >= total)``, filtered to ``< total``. Nested as a prefix:
    growing ``count`` only appends pairs, keeping the estimate monotone."""
    m = max(4, int(np.ceil(np.log2(max(total, 2)))))
    modulus = 1 << m
    a = 5  # a ≡ 1 (mod 4) gives full period with odd increment
    c = 12345
    out = np.empty(count, dtype=np.int64)
    got = 0
    x = 0
    while got < count:
        take = min(4 * (count - got) + 64, modulus)
        seq = np.empty(take, dtype=np.int64)
        for t in range(take):
            seq[t] = x
            x = (a * x + c) % modulus
        seq = seq[seq < total]
        k = min(seq.size, count - got)
        out[got : got + k] = seq[:k]
        got += k
    return out


def holder_quotient(u: Field, alpha: float, max_pairs: int = 2_000_000) -> HolderEstimate:
    """Discrete C^{0,alpha} seminorm: sup |u(x)-u(y)| / |x-y|^alpha over
    masked-in pairs.

    Exact when the pair count fits in ``max_pairs``; otherwise the maximum
    is taken over a deterministic subsample (all axis-adjacent pairs first,
    then a fixed pseudo-random prefix of the remaining enumeration) and the
    result is flagged as a lower bound.
    """
    if not (0.0 < alpha <= 1.0):
        raise PreconditionError(f"alpha must lie in (0, 1], got {alpha}")
    idx = np.argwhere(u.mask)
    n = idx.shape[0]
    if n < 2:
        raise PreconditionError("holder_quotient needs at least 2 masked-in cells")
    vals = u.values[u.mask].astype(np.float64)
    coords = idx.astype(np.float64) * u.grid.h  # offsets cancel in differences
    total = n * (n - 1) // 2

    def quotient(i: np.ndarray, j: np.ndarray) -> float:
        d = np.sqrt(np.sum((coords[i] - coords[j]) ** 2, axis=1))
        q = np.abs(vals[i] - vals[j]) / d**alpha
        return float(np.max(q)) if q.size else 0.0

    if total <= max_pairs:
        best = 0.0
        used = 0
        block = 4096
        for s in range(0, n, block):
            e = min(s + block, n)
            for i0 in range(s, e):
                j = np.arange(i0 + 1, n)
                if j.size:
                    best = max(best, quotient(np.full(j.size, i0), j))
                    used += j.size
        return HolderEstimate(best, True, used)

    # subsample: adjacency pairs, then a fixed LCG prefix of all pairs
    pos_of = -np.ones(u.grid.shape, dtype=np.int64)
    pos_of[tuple(idx.T)] = np.arange(n)
    adj_i, adj_j = [], []
    for a in range(u.grid.dim):
        nb = idx.copy()
        nb[:, a] += 1
        ok = nb[:, a] < u.grid.shape[a]
        if not np.any(ok):
            continue
        q = pos_of[tuple(nb[ok].T)]
        keep = q >= 0
        adj_i.append(np.arange(n)[ok][keep])
        adj_j.append(q[keep])
    best = 0.0
    used = 0
    if adj_i:
        i = np.concatenate(adj_i)
        j = np.concatenate(adj_j)
        if i.size > max_pairs:
            i, j = i[:max_pairs], j[:max_pairs]
        best = quotient(i, j)
        used = i.size
    remaining = max_pairs - used
    if remaining > 0:
        ks = _lcg_prefix(total, remaining)
        i, j = _pair_decode(ks.astype(np.float64), n)
        best = max(best, quotient(i, j))
        used += ks.size
    return HolderEstimate(best, False, used)


def field_to_csv(f: Field, path) -> None:
    """Write ``x0[,x1],value,mask`` rows, 17 significant digits, C-order."""
    meshes = [m.ravel() for m in f.grid.meshes()]
    heads = [f"x{a}" for a in range(f.grid.dim)]
    vals = f.values.ravel()
    mask = f.mask.ravel().astype(int)
    with open(path, "w") as fh:
        fh.write(",".join(heads + ["value", "mask"]) + "\n")
        for r in range(vals.size):
            cols = [f"{m[r]:.17g}" for m in meshes]
            fh.write(",".join(cols + [f"{vals[r]:.17g}", str(mask[r])]) + "\n")


def mass(f: Field) -> float:
    """Deterministic sum of masked-in values times the cell volume."""
    return pairwise_sum(f.values) * f.grid.h**f.grid.dim
