"""Convergence experiments: build network-game sequences that converge to a
graphon game, push equilibria across the embedding in both directions, and
emit convergence tables.

Two experiment directions are implemented.  The coarsened-equilibrium run takes
a certified equilibrium of the target graphon game, interval-averages it onto
each finite game of the sequence, and certifies the epsilon_n of the coarsened
profile there: the epsilon_n should shrink along the sequence.  The
limit-equilibrium run goes the other way: it solves each finite game
independently, checks the solutions settle toward a limit profile, and
certifies that limit in the target graphon game.  The characterization suite
composes both directions on two differently built sequences.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import io
from .core import (
    GridCompatibilityError,
    GridSpec,
    StepGraphon,
    StepProfile,
    graphon_l1_distance,
    step_approximation,
)
from .games import (
    GraphonGame,
    NetworkGame,
    PlateauUtility,
    RegretReport,
    UtilitySpec,
    embed_network,
    embed_strategy,
    regret_profile,
)
from .lq import LQParams, SourceFunction, equilibrium_from_source
from .solver import SolverConfig, profile_distance, solve

ROW_HEADER = (
    "n",
    "w_l1_error",
    "u_l1_error",
    "profile_l1",
    "profile_exceed_fraction",
    "epsilon_n",
)


class CertificationError(RuntimeError):
    """An experiment's prerequisite equilibrium failed certification."""


@dataclass(frozen=True)
class ExperimentPlan:
    """Target game, the sequence sizes, where its equilibrium comes from, and the
    tolerances every threshold is checked against (never hard-coded downstream)."""

    game: GraphonGame
    n_list: tuple[int, ...] = (8, 16, 32, 64, 128, 256)
    equilibrium_source: str = "resolvent"  # or "solver"
    source_value: float = 1.0
    source_profile: StepProfile | None = None
    resolvent_tol: float = 1e-8
    certification_tol: float = 1e-6
    eps_tolerance: float = 0.05
    limit_l1_tolerance: float = 1e-2
    limit_eps_tolerance: float = 0.02
    exceed_delta: float = 1e-2
    solver: SolverConfig = field(default_factory=SolverConfig)
    solver_init: str = "const:L"
    alt_n_list: tuple[int, ...] = (12, 24, 48, 96, 192)
    alt_grid: int = 768
    cross_l1_tolerance: float = 2e-2
    out_dir: str | None = None

    def __post_init__(self):
        _check_sizes(self.n_list, self.game.grid.n_cells)
        if self.equilibrium_source not in ("resolvent", "solver"):
            raise ValueError(f"unknown equilibrium source {self.equilibrium_source!r}")


def _check_sizes(n_list, n_ref: int) -> None:
    if not n_list:
        raise ValueError("n_list must be nonempty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError(f"n_list must be strictly increasing, got {n_list}")
    bad = [n for n in n_list if n < 1 or n_ref % n]
    if bad:
        raise GridCompatibilityError(
            f"sizes {bad} do not divide the reference grid {n_ref}, so averaging "
            "would not be exact"
        )


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    w_l1_error: float
    u_l1_error: float
    profile_l1: float
    profile_exceed_fraction: float
    epsilon_n: float

    def astuple(self):
        return (self.n, self.w_l1_error, self.u_l1_error, self.profile_l1,
                self.profile_exceed_fraction, self.epsilon_n)


def build_network_sequence(game: GraphonGame, n_list) -> list[NetworkGame]:
    """One n-player game per size: adjacency = rectangle averages of the kernel,
    per-player parameters = interval averages of the parameter profiles, and the
    strategy interval carries over."""
    games = []
    for n in n_list:
        adjacency = step_approximation(game.graphon, n).values
        utilities = game.utilities.regrid(n)
        games.append(NetworkGame(adjacency, utilities, game.cap))
    return games


def approximate_profile(f: StepProfile, n: int) -> np.ndarray:
    """Strategy vector of interval averages of f over the n-cell partition.

    Averaging is convex, so values stay inside the strategy interval.
    """
    n_ref = f.grid.n_cells
    if n < 1 or n_ref % n:
        raise GridCompatibilityError(f"{n} does not divide the reference grid {n_ref}")
    return f.values.reshape(n, n_ref // n).mean(axis=1)


def regrid_game(game: GraphonGame, n_cells: int) -> GraphonGame:
    """The same game expressed on another uniform grid (exact for its step data)."""
    return GraphonGame(game.graphon, game.utilities.regrid(n_cells), game.cap,
                       GridSpec(n_cells))


def _reference_equilibrium(plan: ExperimentPlan) -> tuple[StepProfile, RegretReport]:
    """Compute and certify the target game's equilibrium per the plan's source."""
    game = plan.game
    if plan.equilibrium_source == "resolvent":
        params = _plateau_params(game)
        if plan.source_profile is not None:
            prof = plan.source_profile
            if prof.grid != game.grid:
                prof = prof.average_to(game.grid.n_cells)
            g = SourceFunction(prof)
        else:
            g = SourceFunction.constant(plan.source_value, game.grid)
        profile = equilibrium_from_source(game.graphon, params, g, plan.resolvent_tol)
    else:
        f0 = _initial_profile(plan.solver_init, game)
        profile, trace = solve(game, f0, plan.solver)
        if not trace.converged:
            raise CertificationError("solver source did not converge on the target game")
    report = regret_profile(game, profile)
    if report.epsilon_star > plan.certification_tol:
        raise CertificationError(
            f"target equilibrium failed certification: epsilon* = "
            f"{report.epsilon_star:.3g} > {plan.certification_tol:.3g}"
        )
    return profile, report


def _plateau_params(game: GraphonGame) -> LQParams:
    if not isinstance(game.utilities, PlateauUtility):
        raise ValueError("the resolvent equilibrium source needs the plateau_lq family")
    lam = game.utilities.lam
    if np.ptp(lam) != 0:
        raise ValueError("the resolvent equilibrium source needs a uniform lam")
    return LQParams(float(lam[0]), game.cap)


def _initial_profile(init: str, game: GraphonGame) -> StepProfile:
    if init == "const:L":
        return StepProfile.constant(game.cap, game.grid)
    if init.startswith("const:"):
        return StepProfile.constant(float(init.split(":", 1)[1]), game.grid)
    return io.parse_profile_source(init, game.grid, game.cap)


def _utility_l1_error(target: UtilitySpec, coarse: UtilitySpec) -> float:
    return sum(
        profile_distance(target.params[name], coarse.params[name], "l1")
        for name in target.param_names
    )


def _row(plan: ExperimentPlan, net: NetworkGame, profile_n: StepProfile,
         reference: StepProfile, eps_n: float) -> ConvergenceRow:
    return ConvergenceRow(
        n=net.n_players,
        w_l1_error=graphon_l1_distance(
            plan.game.graphon, StepGraphon(net.adjacency),
            resolution=plan.game.grid.n_cells,
        ),
        u_l1_error=_utility_l1_error(plan.game.utilities, net.utilities),
        profile_l1=profile_distance(profile_n, reference, "l1"),
        profile_exceed_fraction=profile_distance(
            profile_n, reference, "exceed-fraction", plan.exceed_delta
        ),
        epsilon_n=eps_n,
    )


@dataclass(frozen=True, eq=False)
class CoarsenedResult:
    rows: list[ConvergenceRow]
    reference: StepProfile
    reference_epsilon: float
    epsilon_at_max_n: float
    eps_tolerance: float
    trend_ok: bool
    passed: bool

    def summary(self) -> dict:
        return {
            "experiment": "coarsened_equilibrium",
            "reference_epsilon": self.reference_epsilon,
            "epsilon_at_max_n": self.epsilon_at_max_n,
            "eps_tolerance": self.eps_tolerance,
            "trend_ok": self.trend_ok,
            "passed": self.passed,
        }


def run_coarsened_equilibrium_experiment(plan: ExperimentPlan) -> CoarsenedResult:
    """Interval-average the certified equilibrium onto each finite game and
    certify its epsilon_n there; passes when epsilon_n at the largest size is
    below the plan tolerance (the trend across sizes is also recorded)."""
    reference, ref_report = _reference_equilibrium(plan)
    rows = []
    for net in build_network_sequence(plan.game, plan.n_list):
        s_n = approximate_profile(reference, net.n_players)
        eps_n = regret_profile(net, s_n).epsilon_star
        rows.append(_row(plan, net, embed_strategy(s_n), reference, eps_n))
    eps_last = rows[-1].epsilon_n
    result = CoarsenedResult(
        rows=rows,
        reference=reference,
        reference_epsilon=ref_report.epsilon_star,
        epsilon_at_max_n=eps_last,
        eps_tolerance=plan.eps_tolerance,
        trend_ok=rows[0].epsilon_n >= eps_last,
        passed=eps_last <= plan.eps_tolerance,
    )
    if plan.out_dir:
        _write_rows(plan.out_dir, "coarsened_equilibrium.csv", rows)
        io.save_profile_csv(
            os.path.join(plan.out_dir, "reference_profile.csv"), reference
        )
    return result


@dataclass(frozen=True, eq=False)
class LimitResult:
    rows: list[ConvergenceRow]
    skipped: list[int]
    limit_profile: StepProfile
    distances_to_limit: list[float]
    exceed_to_limit: list[float]
    converging: bool
    l1_to_reference: float
    l1_tolerance: float
    epsilon_star_in_target: float
    eps_tolerance: float
    passed: bool

    def summary(self) -> dict:
        return {
            "experiment": "limit_equilibrium",
            "skipped": self.skipped,
            "converging": self.converging,
            "l1_to_reference": self.l1_to_reference,
            "l1_within_tolerance": self.l1_to_reference <= self.l1_tolerance,
            "epsilon_star_in_target": self.epsilon_star_in_target,
            "eps_tolerance": self.eps_tolerance,
            "passed": self.passed,
        }


def run_limit_equilibrium_experiment(plan: ExperimentPlan) -> LimitResult:
    """Solve each finite game of the sequence independently, check the solved
    profiles settle toward the largest game's profile (refined to the reference
    grid), and certify that limit in the target graphon game."""
    reference, _ = _reference_equilibrium(plan)
    solved = []
    skipped = []
    for net in build_network_sequence(plan.game, plan.n_list):
        embedded = embed_network(net)
        f0 = _initial_profile(plan.solver_init, embedded)
        profile, trace = solve(embedded, f0, plan.solver)
        if not trace.converged:
            skipped.append(net.n_players)
            continue
        solved.append((net, profile, trace))
    if not solved:
        raise CertificationError("no game in the sequence produced a converged solve")

    limit = solved[-1][1].refine(plan.game.grid.n_cells)
    rows, d_l1, d_exceed = [], [], []
    for net, profile, trace in solved:
        rows.append(_row(plan, net, profile, reference, trace.final_report.epsilon_star))
        d_l1.append(profile_distance(profile, limit, "l1"))
        d_exceed.append(profile_distance(profile, limit, "exceed-fraction", plan.exceed_delta))
    converging = _nonincreasing(d_l1) and _nonincreasing(d_exceed)
    target_report = regret_profile(plan.game, limit)
    l1_ref = profile_distance(limit, reference, "l1")
    result = LimitResult(
        rows=rows,
        skipped=skipped,
        limit_profile=limit,
        distances_to_limit=d_l1,
        exceed_to_limit=d_exceed,
        converging=converging,
        l1_to_reference=l1_ref,
        l1_tolerance=plan.limit_l1_tolerance,
        epsilon_star_in_target=target_report.epsilon_star,
        eps_tolerance=plan.limit_eps_tolerance,
        passed=converging and target_report.epsilon_star <= plan.limit_eps_tolerance,
    )
    if plan.out_dir:
        _write_rows(plan.out_dir, "limit_equilibrium.csv", rows)
        io.save_profile_csv(os.path.join(plan.out_dir, "limit_profile.csv"), limit)
    return result


def _nonincreasing(seq, slack: float = 1e-12) -> bool:
    return all(b <= a + slack for a, b in zip(seq, seq[1:]))


@dataclass(frozen=True, eq=False)
class CharacterizationReport:
    primary_coarsened: CoarsenedResult
    alt_coarsened: CoarsenedResult
    primary_limit: LimitResult
    alt_limit: LimitResult
    cross_l1: float
    cross_l1_tolerance: float
    passed: bool

    def summary(self) -> dict:
        return {
            "experiment": "characterization",
            "primary_coarsened": self.primary_coarsened.summary(),
            "alt_coarsened": self.alt_coarsened.summary(),
            "primary_limit": self.primary_limit.summary(),
            "alt_limit": self.alt_limit.summary(),
            "cross_l1": self.cross_l1,
            "cross_l1_within_tolerance": self.cross_l1 <= self.cross_l1_tolerance,
            "passed": self.passed,
        }


def run_characterization_suite(plan: ExperimentPlan) -> CharacterizationReport:
    """Both experiment directions on two differently built converging sequences.

    The primary sequence uses the plan as given; the alternate sequence uses the
    plan's alt sizes on a re-gridded copy of the game (so incommensurate sizes,
    e.g. multiples of 3, still average exactly).  Coarsened equilibria must pass
    on both sequences, each sequence's independently solved limit must certify
    in the target game, and the two limits must agree in L1.
    """
    _check_sizes(plan.alt_n_list, plan.alt_grid)
    alt_plan = replace(
        plan,
        game=regrid_game(plan.game, plan.alt_grid),
        n_list=plan.alt_n_list,
        source_profile=(plan.source_profile.average_to(plan.alt_grid)
                        if plan.source_profile is not None else None),
        out_dir=None,
    )
    primary_coarsened = run_coarsened_equilibrium_experiment(replace(plan, out_dir=None))
    alt_coarsened = run_coarsened_equilibrium_experiment(alt_plan)
    primary_limit = run_limit_equilibrium_experiment(replace(plan, out_dir=None))
    alt_limit = run_limit_equilibrium_experiment(alt_plan)
    cross_l1 = profile_distance(primary_limit.limit_profile, alt_limit.limit_profile, "l1")
    passed = (
        primary_coarsened.passed and alt_coarsened.passed
        and primary_limit.passed and alt_limit.passed
        and cross_l1 <= plan.cross_l1_tolerance
    )
    report = CharacterizationReport(
        primary_coarsened, alt_coarsened, primary_limit, alt_limit,
        cross_l1, plan.cross_l1_tolerance, passed,
    )
    if plan.out_dir:
        _write_rows(plan.out_dir, "primary_coarsened.csv", primary_coarsened.rows)
        _write_rows(plan.out_dir, "alt_coarsened.csv", alt_coarsened.rows)
        _write_rows(plan.out_dir, "primary_limit.csv", primary_limit.rows)
        _write_rows(plan.out_dir, "alt_limit.csv", alt_limit.rows)
        io.save_profile_csv(
            os.path.join(plan.out_dir, "primary_limit_profile.csv"),
            primary_limit.limit_profile,
        )
        io.save_profile_csv(
            os.path.join(plan.out_dir, "alt_limit_profile.csv"),
            alt_limit.limit_profile,
        )
    return report


def _write_rows(out_dir: str, name: str, rows) -> None:
    os.makedirs(out_dir, exist_ok=True)
    io.write_table_csv(os.path.join(out_dir, name), ROW_HEADER,
                       [row.astuple() for row in rows])


def plan_from_descriptor(d: dict, base_dir: str = ".") -> tuple[ExperimentPlan, str]:
    """Parse a plan file into (plan, experiment name).

    The experiment name is one of "coarsened", "limit", or "characterization"
    (default).  Thresholds absent from the file fall back to the plan defaults
    and are echoed back in summaries.
    """
    game = io.game_from_descriptor(d["game"])
    kwargs: dict = {"game": game}
    if "n_list" in d:
        kwargs["n_list"] = tuple(int(n) for n in d["n_list"])
    for key in (
        "equilibrium_source", "resolvent_tol", "certification_tol", "eps_tolerance",
        "limit_l1_tolerance", "limit_eps_tolerance", "exceed_delta", "solver_init",
        "cross_l1_tolerance", "alt_grid",
    ):
        if key in d:
            kwargs[key] = d[key]
    if "alt_n_list" in d:
        kwargs["alt_n_list"] = tuple(int(n) for n in d["alt_n_list"])
    if "solver" in d:
        kwargs["solver"] = SolverConfig(**d["solver"])
    source = d.get("source_g")
    if source is not None:
        if isinstance(source, (int, float)):
            kwargs["source_value"] = float(source)
        elif source.startswith("const:"):
            kwargs["source_value"] = float(source.split(":", 1)[1])
        else:
            kwargs["source_profile"] = io.load_profile_csv(os.path.join(base_dir, source))
    plan = ExperimentPlan(**kwargs)
    return plan, d.get("experiment", "characterization")


def run_plan(plan: ExperimentPlan, experiment: str):
    """Dispatch an experiment by name; returns the experiment's result object."""
    if experiment in ("coarsened", "coarsened_equilibrium"):
        return run_coarsened_equilibrium_experiment(plan)
    if experiment in ("limit", "limit_equilibrium"):
        return run_limit_equilibrium_experiment(plan)
    if experiment == "characterization":
        return run_characterization_suite(plan)
    raise ValueError(f"unknown experiment {experiment!r}")
