"""Game records for network and graphon games, the step embeddings between them,
and the epsilon-Nash certifier built on the per-agent regret profile."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    GridSpec,
    StepProfile,
    Graphon,
    StepGraphon,
    local_aggregate,
)

BEST_RESPONSE_TOL = 1e-8

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(fun, lo, hi, tol: float = BEST_RESPONSE_TOL):
    """Maximize a quasi-concave function on [lo, hi] by golden-section search.

    ``fun`` maps arrays to arrays elementwise, so a whole profile of
    one-dimensional maximizations runs in lockstep.  Returns (argmax, value)
    with the argmax located to within tol.
    """
    a, b = np.broadcast_arrays(np.asarray(lo, float), np.asarray(hi, float))
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = np.asarray(fun(x1), float)
    f2 = np.asarray(fun(x2), float)
    while np.max(b - a) > tol:
        left = f1 >= f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        x1_next = np.where(left, b - _INVPHI * (b - a), x2)
        x2_next = np.where(left, x1, a + _INVPHI * (b - a))
        carried = np.where(left, f1, f2)
        fresh = np.asarray(fun(np.where(left, x1_next, x2_next)), float)
        f1 = np.where(left, fresh, carried)
        f2 = np.where(left, carried, fresh)
        x1, x2 = x1_next, x2_next
    best = f1 >= f2
    return np.where(best, x1, x2), np.maximum(f1, f2)


class UtilitySpec:
    """Per-agent utility family: a tag plus one step profile per scalar parameter.

    Contract: u(a, e) is continuous in (a, e) and quasi-concave in a on the
    strategy interval, so unimodal line search is a valid inner maximizer
    whenever a family does not supply closed forms.
    """

    family: str = "abstract"
    param_names: tuple[str, ...] = ()

    def __init__(self, params: dict[str, StepProfile]):
        if set(params) != set(self.param_names):
            raise ValueError(
                f"{self.family} utility needs parameters {self.param_names}, got {sorted(params)}"
            )
        sizes = {p.grid.n_cells for p in params.values()}
        if len(sizes) != 1:
            raise ValueError(f"parameter profiles must share one grid, got sizes {sorted(sizes)}")
        self.params = dict(params)
        self.grid = next(iter(params.values())).grid

    @classmethod
    def from_values(cls, grid: GridSpec, **values) -> "UtilitySpec":
        """Build from scalars (constant across agents) or per-agent vectors."""
        params = {}
        for name in cls.param_names:
            v = values[name]
            if np.isscalar(v):
                params[name] = StepProfile.constant(float(v), grid)
            else:
                params[name] = StepProfile(grid, np.asarray(v, float))
        return cls(params)

    def evaluate(self, a, e):
        """Utility of each agent playing a under aggregate e (arrays aligned with cells)."""
        raise NotImplementedError

    def best_response(self, e, cap):
        """Closed-form best-response interval (lo, hi) per cell over [0, cap], or None."""
        return None

    def best_value(self, e, cap):
        """Closed-form maximal utility per cell over [0, cap], or None."""
        return None

    def regrid(self, n_cells: int) -> "UtilitySpec":
        """Exact interval averages of every parameter profile on the n-cell grid."""
        return type(self)({k: p.average_to(n_cells) for k, p in self.params.items()})

    def descriptor(self) -> dict:
        out = {}
        for name, prof in self.params.items():
            vals = prof.values
            out[name] = float(vals[0]) if np.ptp(vals) == 0 else vals.tolist()
        return {"family": self.family, "params": out}


class PlateauUtility(UtilitySpec):
    """Linear-quadratic utility whose best response is a unit-length plateau.

    u(a, e) is quadratic below lam*e, flat on [lam*e, lam*e + 1], and quadratic
    above, so the best-response correspondence is interval-valued.
    """

    family = "plateau_lq"
    param_names = ("lam",)

    @property
    def lam(self) -> np.ndarray:
        return self.params["lam"].values

    @staticmethod
    def utility_values(a, e, lam):
        a = np.asarray(a, float)
        anchor = np.asarray(lam, float) * np.asarray(e, float)
        below = -0.5 * a ** 2 + anchor * a
        flat = 0.5 * anchor ** 2
        above = -0.5 * (a - 1.0) ** 2 + anchor * (a - 1.0)
        return np.where(a < anchor, below, np.where(a <= anchor + 1.0, flat, above))

    @staticmethod
    def response_interval(e, lam, cap):
        """The correspondence {0} / {cap} / [lam*e, lam*e+1] ∩ [0, cap] as (lo, hi)."""
        anchor = np.asarray(lam, float) * np.asarray(e, float)
        lo = np.where(anchor + 1.0 < 0.0, 0.0,
                      np.where(cap < anchor, cap, np.maximum(anchor, 0.0)))
        hi = np.where(anchor + 1.0 < 0.0, 0.0,
                      np.where(cap < anchor, cap, np.minimum(anchor + 1.0, cap)))
        return lo, hi

    @staticmethod
    def max_values(e, lam, cap):
        anchor = np.asarray(lam, float) * np.asarray(e, float)
        # plateau value when reachable; otherwise the boundary a = cap (resp. 0)
        return np.where(anchor + 1.0 < 0.0, -0.5 - anchor,
                        np.where(anchor <= cap, 0.5 * anchor ** 2,
                                 cap * (anchor - 0.5 * cap)))

    def evaluate(self, a, e):
        return self.utility_values(a, e, self.lam)

    def best_response(self, e, cap):
        return self.response_interval(e, self.lam, cap)

    def best_value(self, e, cap):
        return self.max_values(e, self.lam, cap)


class QuadraticUtility(UtilitySpec):
    """Strictly concave single-peaked utility u(a, e) = -(a - beta - delta*e)^2 / 2."""

    family = "quadratic"
    param_names = ("beta", "delta")

    def _target(self, e):
        return self.params["beta"].values + self.params["delta"].values * np.asarray(e, float)

    def evaluate(self, a, e):
        return -0.5 * (np.asarray(a, float) - self._target(e)) ** 2

    def best_response(self, e, cap):
        point = np.clip(self._target(e), 0.0, cap)
        return point, point

    def best_value(self, e, cap):
        point = np.clip(self._target(e), 0.0, cap)
        return -0.5 * (point - self._target(e)) ** 2


UTILITY_FAMILIES = {
    PlateauUtility.family: PlateauUtility,
    QuadraticUtility.family: QuadraticUtility,
}


@dataclass(frozen=True, eq=False)
class GraphonGame:
    """Continuum game: kernel, per-agent utilities, and the common interval [0, cap]."""

    graphon: Graphon
    utilities: UtilitySpec
    cap: float
    grid: GridSpec

    def __post_init__(self):
        if self.cap <= 0:
            raise ValueError(f"strategy cap must be positive, got {self.cap}")
        if self.utilities.grid != self.grid:
            raise ValueError("utility profiles must live on the game grid")
        if isinstance(self.graphon, StepGraphon) and self.grid.n_cells % self.graphon.n:
            raise ValueError(
                f"step graphon resolution {self.graphon.n} must divide the game grid "
                f"{self.grid.n_cells}"
            )

    @property
    def strategy_interval(self) -> tuple[float, float]:
        return 0.0, self.cap


@dataclass(frozen=True, eq=False)
class NetworkGame:
    """Finite game on a weighted directed network with local-aggregate externalities."""

    adjacency: np.ndarray
    utilities: UtilitySpec
    cap: float

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if adj.min() < -1e-12 or adj.max() > 1.0 + 1e-12:
            raise ValueError("adjacency entries must lie in [0, 1] so the step embedding is a graphon")
        if self.cap <= 0:
            raise ValueError(f"strategy cap must be positive, got {self.cap}")
        if self.utilities.grid.n_cells != adj.shape[0]:
            raise ValueError("utility profiles must have one entry per player")
        object.__setattr__(self, "adjacency", adj)

    @property
    def n_players(self) -> int:
        return self.adjacency.shape[0]

    @property
    def strategy_interval(self) -> tuple[float, float]:
        return 0.0, self.cap


def embed_network(game: NetworkGame) -> GraphonGame:
    """Step embedding of an n-player game as a graphon game on n cells:
    adjacency becomes the n-step graphon, parameter vectors become n-step profiles."""
    return GraphonGame(
        StepGraphon(game.adjacency),
        game.utilities,
        game.cap,
        GridSpec(game.n_players),
    )


def embed_strategy(s, n: int | None = None,
                   interval: tuple[float, float] | None = None) -> StepProfile:
    """The n-step profile taking value s[i] on cell i."""
    s = np.asarray(s, dtype=float)
    if n is None:
        n = s.size
    if s.shape != (n,):
        raise ValueError(f"expected {n} strategies, got shape {s.shape}")
    if interval is not None:
        lo, hi = interval
        if s.min() < lo - 1e-12 or s.max() > hi + 1e-12:
            raise ValueError(f"strategy leaves the interval [{lo}, {hi}]")
    return StepProfile(GridSpec(n), s)


def network_local_aggregate(game: NetworkGame, s) -> np.ndarray:
    """e(i) = (1/n) * sum_j A[i, j] s[j].

    The 1/n normalization makes this identical, bit for bit, to the graphon
    local aggregate of the embedded objects evaluated on cell i.
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (game.n_players,):
        raise ValueError(f"expected {game.n_players} strategies, got shape {s.shape}")
    return game.adjacency @ s / game.n_players


@dataclass(frozen=True, eq=False)
class RegretReport:
    """Per-agent regrets h >= 0 with the certified epsilon* of the profile.

    strategy and aggregate record the inputs the regrets were computed from
    (they are what the report CSV tabulates).
    """

    regrets: StepProfile
    epsilon_star: float
    best_response_tolerance: float
    strategy: StepProfile
    aggregate: StepProfile


def epsilon_star(regrets) -> float:
    """Smallest eps such that at least a (1 - eps) fraction of cells has regret <= eps.

    Equals min over k of max(k/N, r_(k+1)) where r_(1) >= ... >= r_(N) is the
    descending sort and r_(N+1) = 0: allow the k worst cells to violate, and eps
    must cover both that fraction and the next-largest regret.
    """
    r = np.asarray(regrets, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError(f"regrets must be a nonempty vector, got shape {r.shape}")
    if r.min() < 0:
        raise ValueError(f"negative regret {r.min()} in input")
    n = r.size
    thresholds = np.concatenate([np.sort(r)[::-1], [0.0]])
    return float(np.min(np.maximum(np.arange(n + 1) / n, thresholds)))


def regret_profile(game, profile, br_tol: float = BEST_RESPONSE_TOL) -> RegretReport:
    """Regret h(i) = max_a u_i(a, e_i) - u_i(f_i, e_i) per cell, plus epsilon*.

    Accepts a graphon game with a step profile or a network game with a strategy
    vector.  The inner maximum uses the family's closed form when available and
    golden-section search on the quasi-concave utility otherwise.
    """
    if isinstance(game, NetworkGame):
        values = np.asarray(profile.values if isinstance(profile, StepProfile) else profile, float)
        grid = GridSpec(game.n_players)
        if values.shape != (grid.n_cells,):
            raise ValueError(f"expected {grid.n_cells} strategies, got shape {values.shape}")
        agg = network_local_aggregate(game, values)
    else:
        f = profile if isinstance(profile, StepProfile) else StepProfile(game.grid, profile)
        if f.grid != game.grid:
            raise ValueError(
                f"profile grid {f.grid.n_cells} does not match game grid {game.grid.n_cells}"
            )
        values = f.values
        grid = game.grid
        agg = local_aggregate(game.graphon, f).values
    if values.min() < -1e-12 or values.max() > game.cap + 1e-12:
        raise ValueError(f"profile leaves the strategy interval [0, {game.cap}]")

    current = np.asarray(game.utilities.evaluate(values, agg), float)
    best = game.utilities.best_value(agg, game.cap)
    if best is None:
        _, best = golden_section_max(
            lambda a: game.utilities.evaluate(a, agg), 0.0, game.cap, br_tol
        )
    h = np.maximum(np.asarray(best, float) - current, 0.0)
    return RegretReport(
        regrets=StepProfile(grid, h),
        epsilon_star=epsilon_star(h),
        best_response_tolerance=br_tol,
        strategy=StepProfile(grid, values),
        aggregate=StepProfile(grid, np.asarray(agg, float)),
    )


def is_epsilon_nash(game, profile, eps: float, br_tol: float = BEST_RESPONSE_TOL) -> bool:
    """True iff the fraction of agents with regret <= eps is at least 1 - eps."""
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    report = regret_profile(game, profile, br_tol)
    return bool(np.mean(report.regrets.values <= eps) >= 1.0 - eps)
