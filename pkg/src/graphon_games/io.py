"""CSV and JSON serialization: profiles, step graphons, kernel descriptors,
game descriptors, and report tables."""

from __future__ import annotations

import json
import os

import numpy as np

from .core import (
    ConstantGraphon,
    Graphon,
    GridSpec,
    ProductGraphon,
    SeparablePowerGraphon,
    StepGraphon,
    StepProfile,
)
from .games import UTILITY_FAMILIES, GraphonGame, NetworkGame, RegretReport, UtilitySpec

# JSON parameter keys per utility family (code name -> file name)
_PARAM_KEYS = {"lam": "lambda"}


def save_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def save_profile_csv(path, profile: StepProfile) -> None:
    """One value per line."""
    np.savetxt(path, profile.values, fmt="%.17g")


def load_profile_csv(path) -> StepProfile:
    values = np.atleast_1d(np.loadtxt(path, dtype=float))
    return StepProfile(GridSpec(values.size), values)


def save_matrix_csv(path, matrix) -> None:
    """Row-major, comma separated."""
    np.savetxt(path, np.asarray(matrix, float), delimiter=",", fmt="%.17g")


def load_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))


def profile_to_envelope(profile: StepProfile) -> dict:
    return {"n": profile.grid.n_cells, "values": profile.values.tolist()}


def profile_from_envelope(d: dict) -> StepProfile:
    values = np.asarray(d["values"], dtype=float)
    return StepProfile(GridSpec(int(d["n"])), values)


def step_graphon_to_envelope(W: StepGraphon) -> dict:
    return {"n": W.n, "values": W.values.ravel().tolist()}


def step_graphon_from_envelope(d: dict) -> StepGraphon:
    n = int(d["n"])
    values = np.asarray(d["values"], dtype=float)
    if values.ndim == 1:
        values = values.reshape(n, n)
    return StepGraphon(values)


def graphon_from_descriptor(d: dict) -> Graphon:
    """Build a kernel from {"family": ..., "params": {...}}; "block" is an alias
    for a uniform-block step graphon."""
    family = d["family"]
    params = d.get("params", {})
    if family == "constant":
        return ConstantGraphon(float(params["c"]))
    if family == "product":
        return ProductGraphon()
    if family == "separable_power":
        return SeparablePowerGraphon(float(params["alpha"]))
    if family in ("step", "block"):
        values = np.asarray(params["values"], dtype=float)
        if values.ndim == 1:
            n = int(params["n"])
            values = values.reshape(n, n)
        return StepGraphon(values)
    raise ValueError(f"unknown graphon family {family!r}")


def graphon_to_descriptor(W: Graphon) -> dict:
    return W.descriptor()


def utility_from_descriptor(d: dict, grid: GridSpec) -> UtilitySpec:
    family = d["family"]
    if family not in UTILITY_FAMILIES:
        raise ValueError(f"unknown utility family {family!r}; have {sorted(UTILITY_FAMILIES)}")
    cls = UTILITY_FAMILIES[family]
    raw = d.get("params", {})
    values = {}
    for name in cls.param_names:
        key = _PARAM_KEYS.get(name, name)
        if key in raw:
            values[name] = raw[key]
        elif name in raw:
            values[name] = raw[name]
        else:
            raise ValueError(f"utility family {family!r} needs parameter {key!r}")
    return cls.from_values(grid, **values)


def utility_to_descriptor(spec: UtilitySpec) -> dict:
    desc = spec.descriptor()
    params = {_PARAM_KEYS.get(k, k): v for k, v in desc["params"].items()}
    return {"family": desc["family"], "params": params}


def game_from_descriptor(d: dict) -> GraphonGame:
    """{"graphon": {...}, "utility": {"family": ..., "params": {...}}, "L": ..., "grid_n": ...}"""
    grid = GridSpec(int(d["grid_n"]))
    graphon = graphon_from_descriptor(d["graphon"])
    utilities = utility_from_descriptor(d["utility"], grid)
    return GraphonGame(graphon, utilities, float(d["L"]), grid)


def game_to_descriptor(game: GraphonGame) -> dict:
    return {
        "graphon": graphon_to_descriptor(game.graphon),
        "utility": utility_to_descriptor(game.utilities),
        "L": game.cap,
        "grid_n": game.grid.n_cells,
    }


def network_game_from_descriptor(d: dict, base_dir: str = ".") -> NetworkGame:
    """Like a game descriptor, with the adjacency inline ("adjacency") or in a
    CSV file ("adjacency_csv", resolved relative to base_dir)."""
    if "adjacency" in d:
        adjacency = np.asarray(d["adjacency"], dtype=float)
    elif "adjacency_csv" in d:
        adjacency = load_matrix_csv(os.path.join(base_dir, d["adjacency_csv"]))
    else:
        raise ValueError("network game needs 'adjacency' or 'adjacency_csv'")
    n = adjacency.shape[0]
    utilities = utility_from_descriptor(d["utility"], GridSpec(n))
    return NetworkGame(adjacency, utilities, float(d["L"]))


def write_regret_csv(path, report: RegretReport) -> None:
    """Summary line, then (cell_index, midpoint, strategy, aggregate, regret) rows."""
    grid = report.regrets.grid
    mids = grid.midpoints()
    with open(path, "w") as fh:
        fh.write(f"# epsilon_star,{report.epsilon_star:.17g}\n")
        fh.write("cell_index,midpoint,strategy,aggregate,regret\n")
        for i in range(grid.n_cells):
            fh.write(
                f"{i + 1},{mids[i]:.17g},{report.strategy.values[i]:.17g},"
                f"{report.aggregate.values[i]:.17g},{report.regrets.values[i]:.17g}\n"
            )


def write_table_csv(path, header, rows) -> None:
    """Plain CSV table from an iterable of row tuples."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_field(x) for x in row) + "\n")


def _format_field(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def parse_profile_source(text: str, grid: GridSpec | None = None,
                         cap: float | None = None) -> StepProfile:
    """Resolve a CLI profile argument: "const:v" (needs a grid) or a CSV path."""
    if text.startswith("const:"):
        raw = text.split(":", 1)[1]
        value = cap if raw == "L" and cap is not None else float(raw)
        if grid is None:
            raise ValueError("constant profiles need an explicit grid size")
        return StepProfile.constant(value, grid)
    profile = load_profile_csv(text)
    if grid is not None and profile.grid != grid:
        raise ValueError(
            f"profile {text} has {profile.grid.n_cells} cells, expected {grid.n_cells}"
        )
    return profile
