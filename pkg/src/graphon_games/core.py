"""Grids, graphon kernels, quadrature, iterated kernels, and the Neumann-series resolvent.

The agent space (0,1] is modeled by a uniform grid of half-open cells, so every
step graphon / step profile is represented exactly and all integrals reduce to
cell-average quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_QUADRATURE = 4  # sub-samples per axis when averaging analytic kernels
MAX_GRID_CELLS = 8192   # cap on common refinements of mixed resolutions


class GridCompatibilityError(ValueError):
    """Mixed step resolutions share no common refinement within the size cap."""


class ContractionError(ValueError):
    """The Neumann series diverges because lambda * ||W||_inf >= 1."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform partition of (0,1] into N half-open cells ((i-1)/N, i/N]."""

    n_cells: int

    def __post_init__(self):
        if not isinstance(self.n_cells, (int, np.integer)) or self.n_cells < 1:
            raise ValueError(f"grid needs a positive integer cell count, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def cell_measure(self) -> float:
        return 1.0 / self.n_cells

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) / self.n_cells

    def cell_index(self, t):
        """0-based index of the cell containing t, for t in (0,1]."""
        idx = np.ceil(np.asarray(t) * self.n_cells).astype(int) - 1
        return np.clip(idx, 0, self.n_cells - 1)


@dataclass(frozen=True, eq=False)
class StepProfile:
    """Piecewise-constant function on the uniform grid, one value per cell.

    Represents strategy profiles, source functions, and per-agent parameters.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        # stored as a private copy so profiles are safe to share across threads
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n_cells,):
            raise ValueError(
                f"profile needs {self.grid.n_cells} values, got shape {vals.shape}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value: float, grid: GridSpec) -> "StepProfile":
        return cls(grid, np.full(grid.n_cells, float(value)))

    def at(self, t):
        """Evaluate the step function at points of (0,1]."""
        return self.values[self.grid.cell_index(t)]

    def refine(self, n_cells: int) -> "StepProfile":
        """Re-express on a finer grid whose size is a multiple of the current one."""
        n = self.grid.n_cells
        if n_cells % n:
            raise GridCompatibilityError(f"{n_cells} is not a multiple of {n}")
        return StepProfile(GridSpec(n_cells), np.repeat(self.values, n_cells // n))

    def average_to(self, n_cells: int) -> "StepProfile":
        """Exact cell averages on another uniform grid, via the common refinement."""
        return StepProfile(GridSpec(n_cells), regrid_step_values(self.values, n_cells))


def regrid_step_values(values: np.ndarray, n_cells: int,
                       max_cells: int = MAX_GRID_CELLS) -> np.ndarray:
    """Cell averages of a step vector on a (possibly incommensurate) uniform grid."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n_cells == n:
        return values.copy()
    common = math.lcm(n, n_cells)
    if common > max_cells:
        raise GridCompatibilityError(
            f"common refinement of {n} and {n_cells} needs {common} cells (cap {max_cells})"
        )
    refined = np.repeat(values, common // n)
    return refined.reshape(n_cells, common // n_cells).mean(axis=1)


def common_grid(f: "StepProfile", g: "StepProfile",
                max_cells: int = MAX_GRID_CELLS):
    """Values of both profiles on their common refinement, plus that grid."""
    if f.grid == g.grid:
        return f.values, g.values, f.grid
    common = math.lcm(f.grid.n_cells, g.grid.n_cells)
    if common > max_cells:
        raise GridCompatibilityError(
            f"grids {f.grid.n_cells} and {g.grid.n_cells} need {common} cells (cap {max_cells})"
        )
    return (
        np.repeat(f.values, common // f.grid.n_cells),
        np.repeat(g.values, common // g.grid.n_cells),
        GridSpec(common),
    )


class Graphon:
    """Interaction kernel W on (0,1]^2 with values in [0,1]; symmetry is not assumed."""

    family: str = "graphon"

    def evaluate(self, t, s):
        """Pointwise kernel values; broadcasts over numpy arrays."""
        raise NotImplementedError

    def sup_norm(self) -> float:
        """Exact sup of the kernel: analytic for built-in families, max entry for steps."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        """JSON-style {"family": ..., "params": ...} description."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantGraphon(Graphon):
    c: float
    family = "constant"

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"constant graphon value {self.c} outside [0, 1]")

    def evaluate(self, t, s):
        return np.full(np.broadcast_shapes(np.shape(t), np.shape(s)), self.c)

    def sup_norm(self) -> float:
        return self.c

    def descriptor(self) -> dict:
        return {"family": "constant", "params": {"c": self.c}}


@dataclass(frozen=True)
class ProductGraphon(Graphon):
    """W(t, s) = t * s."""

    family = "product"

    def evaluate(self, t, s):
        return np.asarray(t, dtype=float) * np.asarray(s, dtype=float)

    def sup_norm(self) -> float:
        return 1.0

    def descriptor(self) -> dict:
        return {"family": "product", "params": {}}


@dataclass(frozen=True)
class SeparablePowerGraphon(Graphon):
    """W(t, s) = t^alpha * s^(1-alpha) with alpha in (0, 1); not symmetric."""

    alpha: float
    family = "separable_power"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def evaluate(self, t, s):
        return np.asarray(t, dtype=float) ** self.alpha * np.asarray(s, dtype=float) ** (1.0 - self.alpha)

    def sup_norm(self) -> float:
        return 1.0

    def descriptor(self) -> dict:
        return {"family": "separable_power", "params": {"alpha": self.alpha}}


@dataclass(frozen=True, eq=False)
class StepGraphon(Graphon):
    """Graphon constant on each rectangle of the uniform n x n grid.

    Entry (i, j) is the value on cell(i) x cell(j); this is the exact embedding
    of an n-player adjacency matrix.
    """

    values: np.ndarray
    family = "step"

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError(f"step graphon needs a square matrix, got shape {vals.shape}")
        if vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12:
            raise ValueError("step graphon entries must lie in [0, 1]")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def evaluate(self, t, s):
        grid = GridSpec(self.n)
        return self.values[grid.cell_index(t), grid.cell_index(s)]

    def sup_norm(self) -> float:
        return float(self.values.max())

    def descriptor(self) -> dict:
        return {"family": "step", "params": {"n": self.n, "values": self.values.tolist()}}


def _overlap_weights(n: int, p: int) -> np.ndarray:
    """weights[i, a] = n * |cell_i^(n) ∩ cell_a^(p)|, computed on the integer lcm grid."""
    common = math.lcm(n, p)
    fine = np.arange(n + 1) * (common // n)
    coarse = np.arange(p + 1) * (common // p)
    lo = np.maximum(fine[:-1, None], coarse[None, :-1])
    hi = np.minimum(fine[1:, None], coarse[None, 1:])
    return np.maximum(hi - lo, 0) * (n / common)


def step_approximation(W: Graphon, n: int, m: int = DEFAULT_QUADRATURE) -> StepGraphon:
    """Project a graphon onto the n-step grid by per-rectangle averaging.

    Analytic kernels are averaged with an m x m midpoint rule per cell (m = 1
    evaluates at the cell midpoint); step graphons are averaged exactly through
    rectangle overlaps, so an input that is already n-step comes back unchanged.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if isinstance(W, StepGraphon):
        if W.n == n:
            return StepGraphon(W.values)
        weights = _overlap_weights(n, W.n)
        return StepGraphon(np.clip(weights @ W.values @ weights.T, 0.0, 1.0))
    if m < 1:
        raise ValueError(f"need m >= 1 sub-samples, got {m}")
    pts = (np.arange(n * m) + 0.5) / (n * m)
    samples = np.asarray(W.evaluate(pts[:, None], pts[None, :]), dtype=float)
    vals = samples.reshape(n, m, n, m).mean(axis=(1, 3))
    return StepGraphon(np.clip(vals, 0.0, 1.0))


def local_aggregate(W: Graphon, f: StepProfile, m: int = DEFAULT_QUADRATURE,
                    max_cells: int = MAX_GRID_CELLS) -> StepProfile:
    """Cell-average quadrature of the externality integral e(t) = ∫ W(t,s) f(s) ds.

    For a step graphon the result is exact: both operands are refined to their
    common grid (identity when the kernel resolution divides the profile's) and
    e = (V @ f) / N there.  Analytic kernels are first step-approximated at the
    profile's resolution.
    """
    n_prof = f.grid.n_cells
    if isinstance(W, StepGraphon):
        common = math.lcm(W.n, n_prof)
        if common > max_cells:
            raise GridCompatibilityError(
                f"kernel ({W.n}) and profile ({n_prof}) need {common} cells (cap {max_cells})"
            )
        matrix = W.values
        if common != W.n:
            matrix = np.repeat(np.repeat(matrix, common // W.n, axis=0), common // W.n, axis=1)
        vals = f.values if common == n_prof else np.repeat(f.values, common // n_prof)
        return StepProfile(GridSpec(common), matrix @ vals / common)
    wbar = step_approximation(W, n_prof, m)
    return StepProfile(f.grid, wbar.values @ f.values / n_prof)


def iterated_kernel(W: Graphon, n: int, grid: GridSpec,
                    m: int = DEFAULT_QUADRATURE) -> StepGraphon:
    """n-fold integral composition of the kernel, W_n(t,s) = ∫ W(t,x) W_{n-1}(x,s) dx,
    at grid resolution: W_1 is the step approximation and each composition is a
    matrix product scaled by the cell measure."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    wbar = step_approximation(W, grid.n_cells, m).values
    kernel = wbar.copy()
    for _ in range(n - 1):
        kernel = wbar @ kernel / grid.n_cells
    return StepGraphon(np.clip(kernel, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class ResolventKernel:
    """Truncated Neumann-series kernel Gamma(t,s,lambda) on a grid.

    gamma[i, j] approximates Gamma at cell pairs; tail_bound is the geometric
    bound on the dropped series tail at truncation_order terms, and sup_norm is
    the kernel sup used to compute it.
    """

    grid: GridSpec
    gamma: np.ndarray
    lam: float
    truncation_order: int
    tail_bound: float
    sup_norm: float

    def apply(self, f) -> StepProfile:
        """Cell quadrature of ∫ Gamma(t,s) f(s) ds."""
        vals = f.values if isinstance(f, StepProfile) else np.asarray(f, dtype=float)
        if vals.shape != (self.grid.n_cells,):
            raise ValueError(f"expected {self.grid.n_cells} values, got shape {vals.shape}")
        return StepProfile(self.grid, self.gamma @ vals / self.grid.n_cells)

    def entry_bound(self) -> float:
        """Upper bound c/(1 - lambda*c) that every Gamma entry must satisfy."""
        return self.sup_norm / (1.0 - self.lam * self.sup_norm)


def resolvent(W: Graphon, lam: float, grid: GridSpec, tol: float,
              m: int = DEFAULT_QUADRATURE) -> ResolventKernel:
    """Truncated Neumann series Gamma = sum_{k=1}^{K} lambda^(k-1) W_k.

    K is the smallest order whose geometric tail sum_{k>K} lambda^(k-1) c^k is
    <= tol, with c the kernel sup.  Requires the contraction condition
    lambda * c < 1; with it, (I - lambda*K)^(-1) = I + lambda*Gamma holds on the
    grid up to the recorded tail bound.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    c = W.sup_norm()
    rho = lam * c
    if rho >= 1.0:
        raise ContractionError(
            f"contraction violated: lambda * ||W||_inf = {rho:.6g} >= 1"
        )

    def tail(k: int) -> float:
        return c * rho ** k / (1.0 - rho)

    order = 1
    while tail(order) > tol:
        order += 1

    n = grid.n_cells
    wbar = step_approximation(W, n, m).values
    gamma = wbar.copy()
    term = wbar
    for _ in range(order - 1):
        term = lam * (wbar @ term) / n
        gamma = gamma + term
    return ResolventKernel(grid, gamma, lam, order, tail(order), c)


def graphon_l1_distance(W1: Graphon, W2: Graphon, resolution: int | None = None,
                        max_cells: int = MAX_GRID_CELLS) -> float:
    """L1 distance ∫∫ |W1 - W2| estimated by midpoint sampling.

    The default sampling grid refines every step resolution involved (making the
    distance exact between step graphons) and is at least 1024 cells per axis
    when an analytic kernel is present.
    """
    base = 1
    analytic = False
    for W in (W1, W2):
        if isinstance(W, StepGraphon):
            base = math.lcm(base, W.n)
        else:
            analytic = True
    if resolution is None:
        resolution = base
        if analytic:
            resolution = base * math.ceil(1024 / base)
            if resolution > max_cells:
                resolution = base
        if resolution > max_cells:
            raise GridCompatibilityError(
                f"exact sampling of step resolutions needs {resolution} cells "
                f"(cap {max_cells}); pass an explicit resolution to approximate"
            )
    mids = (np.arange(resolution) + 0.5) / resolution
    diff = np.abs(
        np.asarray(W1.evaluate(mids[:, None], mids[None, :]), dtype=float)
        - np.asarray(W2.evaluate(mids[:, None], mids[None, :]), dtype=float)
    )
    return float(diff.mean())
