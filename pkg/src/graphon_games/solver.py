"""Damped best-response iteration for discretized games with quasi-concave
scalar utilities, plus profile distances used as convergence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MAX_GRID_CELLS, StepProfile, common_grid, local_aggregate
from .games import (
    BEST_RESPONSE_TOL,
    GraphonGame,
    RegretReport,
    epsilon_star,
    golden_section_max,
    regret_profile,
)

SELECTION_RULES = ("nearest-point", "interval-midpoint", "lower-endpoint")


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 10000
    damping: float = 0.5
    step_tolerance: float = 1e-9
    regret_target: float = 1e-7
    selection_rule: str = "nearest-point"
    best_response_tolerance: float = BEST_RESPONSE_TOL

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if self.step_tolerance <= 0 or self.regret_target <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.selection_rule not in SELECTION_RULES:
            raise ValueError(
                f"unknown selection rule {self.selection_rule!r}; choose from {SELECTION_RULES}"
            )


@dataclass(eq=False)
class SolveTrace:
    """Iteration diagnostics: converged implies the final epsilon* met the regret
    target or the last sup-norm step was at most step_tolerance."""

    iterations: int
    step_sizes: np.ndarray
    final_report: RegretReport
    converged: bool


def _select(lo: np.ndarray, hi: np.ndarray, current: np.ndarray, rule: str) -> np.ndarray:
    if rule == "nearest-point":
        return np.clip(current, lo, hi)
    if rule == "interval-midpoint":
        return 0.5 * (lo + hi)
    if rule == "lower-endpoint":
        return np.array(lo, dtype=float)
    raise ValueError(f"unknown selection rule {rule!r}")


def _response_data(game: GraphonGame, values: np.ndarray, br_tol: float):
    """Aggregate, best-response interval, and max utility for the current profile."""
    agg = local_aggregate(game.graphon, StepProfile(game.grid, values)).values
    interval = game.utilities.best_response(agg, game.cap)
    best = game.utilities.best_value(agg, game.cap)
    if interval is None or best is None:
        point, value = golden_section_max(
            lambda a: game.utilities.evaluate(a, agg), 0.0, game.cap, br_tol
        )
        if interval is None:
            interval = (point, point)
        if best is None:
            best = value
    return agg, interval, np.asarray(best, float)


def best_response_map(game: GraphonGame, f: StepProfile, rule: str = "nearest-point",
                      br_tol: float = BEST_RESPONSE_TOL) -> StepProfile:
    """One synchronous best response: per cell, compute the best-response set and
    select a point by the rule (nearest-point projects the current strategy
    onto the set, so fixed points are exactly the equilibria)."""
    _, (lo, hi), _ = _response_data(game, f.values, br_tol)
    return StepProfile(f.grid, _select(lo, hi, f.values, rule))


def solve(game: GraphonGame, f0: StepProfile,
          config: SolverConfig = SolverConfig()) -> tuple[StepProfile, SolveTrace]:
    """Damped best-response iteration f <- (1 - d) f + d * B(f).

    Stops when the certified epsilon* meets the regret target, the sup-norm step
    falls below step_tolerance, or max_iters runs out.  No general convergence
    guarantee exists; non-convergence is reported through converged=False,
    not raised.
    """
    if f0.grid != game.grid:
        raise ValueError("initial profile must live on the game grid")
    if f0.values.min() < -1e-12 or f0.values.max() > game.cap + 1e-12:
        raise ValueError(f"initial profile leaves [0, {game.cap}]")

    f = f0.values.copy()
    steps = []
    converged = False
    iterations = 0
    for _ in range(config.max_iters):
        iterations += 1
        agg, (lo, hi), best = _response_data(game, f, config.best_response_tolerance)
        current = np.asarray(game.utilities.evaluate(f, agg), float)
        regrets = np.maximum(best - current, 0.0)
        if epsilon_star(regrets) <= config.regret_target:
            converged = True
            break
        update = _select(lo, hi, f, config.selection_rule)
        f_next = (1.0 - config.damping) * f + config.damping * update
        step = float(np.abs(f_next - f).max())
        steps.append(step)
        f = f_next
        if step <= config.step_tolerance:
            converged = True
            break

    profile = StepProfile(game.grid, f)
    final_report = regret_profile(game, profile, config.best_response_tolerance)
    return profile, SolveTrace(iterations, np.asarray(steps), final_report, converged)


def profile_distance(f1: StepProfile, f2: StepProfile, mode: str = "l1",
                     delta: float = 1e-2, max_cells: int = MAX_GRID_CELLS) -> float:
    """Distance between step profiles, computed on their common refinement.

    Modes: "l1" is ∫|f1 - f2|; "sup" the max gap; "exceed-fraction" the measure
    of cells differing by more than delta (the a.e.-convergence surrogate).
    """
    v1, v2, _ = common_grid(f1, f2, max_cells)
    gap = np.abs(v1 - v2)
    if mode == "l1":
        return float(gap.mean())
    if mode == "sup":
        return float(gap.max())
    if mode == "exceed-fraction":
        return float(np.mean(gap > delta))
    raise ValueError(f"unknown distance mode {mode!r}")
