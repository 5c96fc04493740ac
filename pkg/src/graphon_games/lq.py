"""The plateau linear-quadratic game: closed-form utility and best response,
the resolvent equilibrium constructor s_g, its certification, and the
injection (multiplicity) check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_QUADRATURE,
    ContractionError,
    Graphon,
    GridSpec,
    StepProfile,
    resolvent,
    step_approximation,
)
from .games import (
    BEST_RESPONSE_TOL,
    GraphonGame,
    PlateauUtility,
    RegretReport,
    regret_profile,
)


@dataclass(frozen=True)
class LQParams:
    """Network-effect strength lam >= 0 and strategy cap > 0 of the plateau game."""

    lam: float
    cap: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.cap <= 0:
            raise ValueError(f"cap must be positive, got {self.cap}")

    def min_admissible_cap(self, sup_norm: float) -> float:
        """Smallest cap for which both sufficiency bounds hold at this lam."""
        margin = 1.0 - self.lam * sup_norm
        if margin <= 0:
            raise ContractionError(
                f"contraction violated: lam * ||W||_inf = {self.lam * sup_norm:.6g} >= 1"
            )
        return max(1.0 / margin, self.lam / margin + 1.0)

    def validate_for_equilibrium(self, sup_norm: float) -> None:
        """Check lam*||W|| < 1 and both cap bounds, reporting the required minimum."""
        needed = self.min_admissible_cap(sup_norm)  # raises on contraction failure
        margin = 1.0 - self.lam * sup_norm
        if 1.0 / margin > self.cap:
            raise ValueError(
                f"cap {self.cap} violates the bound 1/(1 - lam*||W||) = {1.0 / margin:.6g}; "
                f"need cap >= {needed:.6g}"
            )
        if self.lam / margin + 1.0 > self.cap:
            raise ValueError(
                f"cap {self.cap} violates the bound lam/(1 - lam*||W||) + 1 = "
                f"{self.lam / margin + 1.0:.6g}; need cap >= {needed:.6g}"
            )

    def utility_spec(self, grid: GridSpec) -> PlateauUtility:
        """The plateau family with this lam constant across agents."""
        return PlateauUtility.from_values(grid, lam=self.lam)


@dataclass(frozen=True, eq=False)
class SourceFunction:
    """Source profile g with values in [0, 1]; each one generates its own equilibrium."""

    profile: StepProfile

    def __post_init__(self):
        v = self.profile.values
        if v.min() < -1e-12 or v.max() > 1.0 + 1e-12:
            raise ValueError("source values must lie in [0, 1]")

    @classmethod
    def constant(cls, value: float, grid: GridSpec) -> "SourceFunction":
        return cls(StepProfile.constant(value, grid))

    @property
    def values(self) -> np.ndarray:
        return self.profile.values

    @property
    def grid(self) -> GridSpec:
        return self.profile.grid


def lq_utility(a: float, e: float, params: LQParams) -> float:
    """Three-branch plateau utility: quadratic below lam*e, flat up to lam*e + 1,
    quadratic above; continuous at both branch boundaries."""
    out = PlateauUtility.utility_values(a, e, params.lam)
    return float(out) if np.ndim(out) == 0 else out


def lq_best_response(e: float, params: LQParams) -> tuple[float, float]:
    """Best-response set under aggregate e, as a closed interval [lo, hi].

    {0} if lam*e + 1 < 0 (unreachable for lam, e >= 0, kept for totality),
    {cap} if cap < lam*e, else [lam*e, lam*e + 1] ∩ [0, cap].
    """
    lo, hi = PlateauUtility.response_interval(e, params.lam, params.cap)
    return float(lo), float(hi)


def lq_game(W: Graphon, params: LQParams, grid: GridSpec) -> GraphonGame:
    """The graphon game with the plateau utility at these parameters."""
    return GraphonGame(W, params.utility_spec(grid), params.cap, grid)


def equilibrium_from_source(W: Graphon, params: LQParams, g: SourceFunction,
                            tol: float = 1e-8, m: int = DEFAULT_QUADRATURE) -> StepProfile:
    """Equilibrium s_g = g + lam * (Gamma g) from a source g with values in [0, 1].

    Gamma is the truncated Neumann-series resolvent; s_g solves the second-kind
    Fredholm equation s = lam * (K s) + g.  As a cross-check the same discretized
    system is solved densely and the two answers must agree within 10 * tol; the
    returned profile obeys the a priori bound 0 <= s_g <= 1/(1 - lam*||W||).

    Requires lam * ||W||_inf < 1 and a cap passing both sufficiency bounds.
    """
    c = W.sup_norm()
    params.validate_for_equilibrium(c)
    grid = g.grid
    kernel = resolvent(W, params.lam, grid, tol, m=m)
    series = g.values + params.lam * kernel.apply(g.values).values

    n = grid.n_cells
    wbar = step_approximation(W, n, m).values
    direct = np.linalg.solve(np.eye(n) - params.lam * wbar / n, g.values)
    gap = float(np.abs(series - direct).max())
    if gap > 10.0 * tol:
        raise ArithmeticError(
            f"Neumann-series and direct solutions disagree by {gap:.3g} (> 10*tol = {10 * tol:.3g})"
        )

    upper = 1.0 / (1.0 - params.lam * c)
    if series.min() < -10.0 * tol or series.max() > upper + 10.0 * tol:
        raise ArithmeticError(
            f"solution leaves the a priori range [0, {upper:.6g}]: "
            f"min {series.min():.6g}, max {series.max():.6g}"
        )
    return StepProfile(grid, series)


@dataclass(frozen=True, eq=False)
class CertificationReport:
    """Outcome of the three plateau containments plus the regret certification.

    The boolean arrays flag, per cell: (i) s in [0, cap]; (ii) the plateau
    [lam*e, lam*e + 1] fits inside [0, cap]; (iii) s sits on the plateau.
    """

    report: RegretReport
    in_interval: np.ndarray
    plateau_fits: np.ndarray
    on_plateau: np.ndarray
    certified: bool
    tolerance: float

    def violating_cells(self) -> dict[str, np.ndarray]:
        return {
            "in_interval": np.flatnonzero(~self.in_interval),
            "plateau_fits": np.flatnonzero(~self.plateau_fits),
            "on_plateau": np.flatnonzero(~self.on_plateau),
        }


def verify_equilibrium(W: Graphon, params: LQParams, s: StepProfile,
                       tol: float = 1e-6,
                       br_tol: float = BEST_RESPONSE_TOL) -> CertificationReport:
    """Certify a candidate equilibrium of the plateau game.

    Checks cellwise, with e the local aggregate of s: (i) s(i) in [0, cap];
    (ii) 0 <= lam*e(i) <= lam*e(i) + 1 <= cap; (iii) s(i) in [lam*e(i), lam*e(i)+1];
    and computes the regret report.  Certified iff all three hold up to tol and
    epsilon* <= tol.  Violations are reported, never raised.
    """
    game = lq_game(W, params, s.grid)
    rep = regret_profile(game, s, br_tol)
    anchor = params.lam * rep.aggregate.values
    in_interval = (s.values >= -tol) & (s.values <= params.cap + tol)
    plateau_fits = (anchor >= -tol) & (anchor + 1.0 <= params.cap + tol)
    on_plateau = (s.values >= anchor - tol) & (s.values <= anchor + 1.0 + tol)
    certified = bool(
        in_interval.all() and plateau_fits.all() and on_plateau.all()
        and rep.epsilon_star <= tol
    )
    return CertificationReport(rep, in_interval, plateau_fits, on_plateau, certified, tol)


def injection_check(W: Graphon, params: LQParams, g1: SourceFunction, g2: SourceFunction,
                    tol: float = 1e-8, slack: float = 1e-6,
                    m: int = DEFAULT_QUADRATURE) -> tuple[bool, float]:
    """Distinct sources generate separated equilibria; returns (passed, L1 distance).

    Since g = (I - lam*K) s_g and the operator I - lam*K has L1 norm at most
    1 + lam*||W||, the equilibria satisfy
    ||s_g1 - s_g2||_1 >= ||g1 - g2||_1 / (1 + lam*||W||); passed is that bound
    up to numerical slack.
    """
    if g1.grid != g2.grid:
        raise ValueError("sources must share a grid")
    s1 = equilibrium_from_source(W, params, g1, tol, m)
    s2 = equilibrium_from_source(W, params, g2, tol, m)
    distance = float(np.abs(s1.values - s2.values).mean())
    source_distance = float(np.abs(g1.values - g2.values).mean())
    bound = source_distance / (1.0 + params.lam * W.sup_norm())
    return distance >= bound - slack, distance
