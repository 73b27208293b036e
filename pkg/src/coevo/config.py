"""Experiment configuration: one JSON document describing params, network,
schedule, initial state, and run budget.

Example:

    {
      "params": {"n": 4, "r": 2.0, "alpha": 0.3333333333333333,
                 "beta": 0.3333333333333333},
      "network": {"type": "complete"},
      "schedule": {"kind": "round-robin", "seed": 0},
      "initial_state": "all-coop-consensus",
      "run": {"max_steps": 1000000, "fixed_point_tol": 1e-10}
    }

Weights may be scalars (shared by all players) or length-n lists. "lambda"
(accepted spelling: "lam") defaults to 1 - alpha - beta per player. The
optional "sweep" section supplies the grid for the sweep command:
{"r": [...], "alpha": [...], "beta": [...], "trials": 20}.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .dynamics import SCHEDULE_KINDS, RevisionSchedule, make_schedule
from .model import ModelParams, Network, SystemState
from . import networks


class ConfigError(ValueError):
    """A configuration file failed to parse or violated a model invariant."""


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated experiment: every invariant already checked at load."""

    params: ModelParams
    network: Network
    schedule: RevisionSchedule
    initial_state: SystemState
    max_steps: int
    fixed_point_tol: float
    sweep_grid: dict | None
    sweep_trials: int
    raw: dict


def _vector(section: dict, key: str, n: int, default=None, alias: str | None = None):
    present = key in section or (alias is not None and alias in section)
    if not present:
        if default is None:
            raise ConfigError(f"params.{key} is required")
        value = default
    else:
        value = section[key] if key in section else section[alias]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return np.full(n, float(value))
    if isinstance(value, list):
        if len(value) != n:
            raise ConfigError(f"params.{key} must have {n} entries, got {len(value)}")
        try:
            return np.array([float(v) for v in value])
        except (TypeError, ValueError):
            raise ConfigError(f"params.{key} entries must be numbers") from None
    raise ConfigError(f"params.{key} must be a number or a list of {n} numbers")


def _build_params(section) -> ModelParams:
    if not isinstance(section, dict):
        raise ConfigError("params must be an object")
    for key in ("n", "r"):
        if key not in section:
            raise ConfigError(f"params.{key} is required")
    try:
        n = int(section["n"])
        r = float(section["r"])
    except (TypeError, ValueError):
        raise ConfigError("params.n must be an integer and params.r a number") from None
    alpha = _vector(section, "alpha", n)
    beta = _vector(section, "beta", n)
    if "lambda" in section or "lam" in section:
        lam = _vector(section, "lambda", n, alias="lam")
    else:
        lam = 1.0 - alpha - beta
    gamma = _vector(section, "gamma", n, default=0.0)
    prejudice = _vector(section, "prejudice", n, default=0.5, alias="u")
    try:
        return ModelParams(
            n=n, r=r, alpha=alpha, beta=beta, lam=lam, gamma=gamma, prejudice=prejudice
        )
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None


def _build_network(section, n: int, base_dir: str) -> Network:
    if not isinstance(section, dict) or "type" not in section:
        raise ConfigError('network must be an object with a "type" field')
    kind = section["type"]
    try:
        if kind == "complete":
            return networks.complete_network(n)
        if kind == "ring":
            return networks.ring_network(n)
        if kind == "grid":
            rows = int(section.get("rows", 0))
            cols = int(section.get("cols", 0))
            if rows * cols != n:
                raise ConfigError(
                    f"grid network is {rows}x{cols} = {rows * cols} nodes "
                    f"but params.n = {n}"
                )
            return networks.grid_network(rows, cols)
        if kind == "random":
            return networks.random_network(
                n,
                float(section.get("edge_probability", 0.5)),
                int(section.get("seed", 0)),
                require_irreducible=bool(section.get("require_irreducible", True)),
            )
        if kind == "random-symmetric":
            return networks.random_symmetric_network(
                n,
                float(section.get("edge_probability", 0.5)),
                int(section.get("seed", 0)),
            )
        if kind == "inline":
            if "matrix" not in section:
                raise ConfigError("inline network needs a matrix field")
            net = Network.from_matrix(
                np.array(section["matrix"], dtype=float),
                normalise=bool(section.get("normalise", False)),
            )
        elif kind == "file":
            if "path" not in section:
                raise ConfigError("file network needs a path field")
            path = section["path"]
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            net = networks.load_network(
                path,
                format=section.get("format", "edge-list"),
                normalise=bool(section.get("normalise", False)),
            )
        else:
            raise ConfigError(
                f"unknown network type {kind!r}; use complete, ring, grid, random, "
                f"random-symmetric, inline, or file"
            )
    except (ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"network: {exc}") from None
    if net.n != n:
        raise ConfigError(f"network has {net.n} nodes but params.n = {n}")
    return net


def _build_schedule(section, n: int, seed_override: int | None) -> RevisionSchedule:
    section = section if section is not None else {}
    if not isinstance(section, dict):
        raise ConfigError("schedule must be an object")
    kind = section.get("kind", "round-robin")
    if kind not in SCHEDULE_KINDS:
        raise ConfigError(f"unknown schedule kind {kind!r}; choose one of {SCHEDULE_KINDS}")
    seed = seed_override if seed_override is not None else int(section.get("seed", 0))
    return make_schedule(kind, n, seed=seed)


def _build_initial(section, n: int, seed_override: int | None) -> SystemState:
    if section is None:
        section = "all-defect-consensus"
    if isinstance(section, str):
        if section == "all-defect-consensus":
            return SystemState.all_defection(n)
        if section == "all-coop-consensus":
            return SystemState.all_cooperation(n)
        raise ConfigError(
            f"unknown initial_state preset {section!r}; use all-defect-consensus, "
            f"all-coop-consensus, or an object"
        )
    if not isinstance(section, dict):
        raise ConfigError("initial_state must be a preset name or an object")
    if section.get("preset") == "random":
        seed = seed_override if seed_override is not None else int(section.get("seed", 0))
        rng = np.random.default_rng(seed)
        return SystemState(rng.integers(0, 2, size=n).astype(np.int64), rng.random(n))
    if "x" in section and "y" in section:
        try:
            return SystemState(
                np.array(section["x"], dtype=np.int64),
                np.array(section["y"], dtype=float),
            )
        except ValueError as exc:
            raise ConfigError(f"initial_state: {exc}") from None
    raise ConfigError(
        'initial_state object needs either {"preset": "random", "seed": k} '
        'or explicit "x" and "y" vectors'
    )


def load_config(path: str, seed_override: int | None = None) -> ExperimentConfig:
    """Load and fully validate an experiment configuration file.

    ``seed_override`` replaces every seed in the document (schedule and random
    initial state), which is what the CLI's --seed flag does.
    """
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if "params" not in raw:
        raise ConfigError(f"{path}: missing params section")

    params = _build_params(raw["params"])
    base_dir = os.path.dirname(os.path.abspath(path))
    network = _build_network(raw.get("network", {"type": "complete"}), params.n, base_dir)
    schedule = _build_schedule(raw.get("schedule"), params.n, seed_override)
    initial = _build_initial(raw.get("initial_state"), params.n, seed_override)

    run_section = raw.get("run", {})
    if not isinstance(run_section, dict):
        raise ConfigError("run must be an object")
    try:
        max_steps = int(run_section.get("max_steps", 1_000_000))
        fixed_point_tol = float(run_section.get("fixed_point_tol", 1e-10))
    except (TypeError, ValueError):
        raise ConfigError("run.max_steps must be an integer, run.fixed_point_tol a number") from None
    if max_steps < 1:
        raise ConfigError(f"run.max_steps must be >= 1, got {max_steps}")
    if fixed_point_tol <= 0.0:
        raise ConfigError(f"run.fixed_point_tol must be positive, got {fixed_point_tol}")

    sweep_grid = None
    sweep_trials = 20
    if "sweep" in raw:
        sweep_section = raw["sweep"]
        if not isinstance(sweep_section, dict):
            raise ConfigError("sweep must be an object")
        sweep_grid = {
            axis: list(sweep_section[axis])
            for axis in ("r", "alpha", "beta")
            if axis in sweep_section
        }
        sweep_trials = int(sweep_section.get("trials", 20))
        if sweep_trials < 1:
            raise ConfigError(f"sweep.trials must be >= 1, got {sweep_trials}")

    return ExperimentConfig(
        params=params,
        network=network,
        schedule=schedule,
        initial_state=initial,
        max_steps=max_steps,
        fixed_point_tol=fixed_point_tol,
        sweep_grid=sweep_grid,
        sweep_trials=sweep_trials,
        raw=raw,
    )
