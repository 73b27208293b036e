"""Equilibrium analysis: consensus condition checks, exact opinion solves,
Nash verification, exhaustive small-n enumeration, and parameter sweeps.

The central facts this module operationalises, all for zero-prejudice
players:

* all-defection consensus (0, 0) is always an equilibrium;
* it is the unique equilibrium when every player's opinion-consistency
  coupling beta*lam/(beta+lam) is at most 2*alpha*(1 - r/n);
* all-cooperation consensus (1, 1) is also an equilibrium when that coupling
  strictly exceeds the same threshold for every player;
* for a frozen action profile the stationary opinions solve a linear system
  that is uniquely solvable whenever every lam is positive.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    StateClass,
    classify_state,
    make_schedule,
    run,
)
from .model import (
    DISCRIMINANT_TIE_TOL,
    ModelParams,
    Network,
    SystemState,
    best_response,
)

CONDITION_ALL_DEFECTION_UNIQUE = "all_defection_unique"
CONDITION_ALL_COOPERATION_EXISTS = "all_cooperation_exists"


@dataclass(frozen=True)
class ConditionReport:
    """Per-player evaluation of one of the two consensus conditions.

    Each per_player row is (lhs, rhs, holds) with lhs = beta*lam/(beta+lam)
    and rhs = 2*alpha*(1 - r/n). The defection-uniqueness condition holds at
    lhs <= rhs; the cooperation-existence condition needs strict lhs > rhs,
    so on the boundary lhs = rhs the first holds and the second does not.
    """

    condition_id: str
    per_player: tuple[tuple[float, float, bool], ...]
    all_hold: bool


def _require_strict_interior(params: ModelParams, what: str) -> None:
    if not params.strict_interior:
        raise ValueError(
            f"{what} is stated for players with alpha, beta, lam strictly inside "
            f"(0, 1) and zero prejudice attachment; these params fall outside that "
            f"regime (strict_interior is False)"
        )


def _condition_sides(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    lhs = params.beta * params.lam / (params.beta + params.lam)
    rhs = 2.0 * params.alpha * (1.0 - params.r / params.n)
    return lhs, rhs


def check_all_defection_unique(params: ModelParams) -> ConditionReport:
    """Per-player check of the condition making (0, 0) the unique equilibrium.

    Holds for player i iff beta*lam/(beta+lam) <= 2*alpha*(1 - r/n).
    """
    _require_strict_interior(params, "the defection-uniqueness condition")
    lhs, rhs = _condition_sides(params)
    holds = lhs <= rhs
    return ConditionReport(
        condition_id=CONDITION_ALL_DEFECTION_UNIQUE,
        per_player=tuple(
            (float(a), float(b), bool(h)) for a, b, h in zip(lhs, rhs, holds)
        ),
        all_hold=bool(holds.all()),
    )


def check_all_cooperation_exists(params: ModelParams) -> ConditionReport:
    """Per-player check of the condition making (1, 1) an equilibrium too.

    Holds for player i iff beta*lam/(beta+lam) > 2*alpha*(1 - r/n), the strict
    complement of the defection-uniqueness condition.
    """
    _require_strict_interior(params, "the cooperation-existence condition")
    lhs, rhs = _condition_sides(params)
    holds = lhs > rhs
    return ConditionReport(
        condition_id=CONDITION_ALL_COOPERATION_EXISTS,
        per_player=tuple(
            (float(a), float(b), bool(h)) for a, b, h in zip(lhs, rhs, holds)
        ),
        all_hold=bool(holds.all()),
    )


def _require_solvable(params: ModelParams) -> None:
    if (params.gamma != 0.0).any():
        bad = int(np.argmax(params.gamma != 0.0))
        raise ValueError(
            f"player {bad + 1}: stationary opinions are solved for zero prejudice "
            f"attachment only, got gamma={params.gamma[bad]}"
        )
    if (params.lam <= 0.0).any():
        bad = int(np.argmax(params.lam <= 0.0))
        raise ValueError(
            f"player {bad + 1}: lam must be positive so the opinion system contracts "
            f"(beta/(beta+lam) < 1), got lam={params.lam[bad]}"
        )


def _opinion_system(params: ModelParams, net: Network) -> tuple[np.ndarray, np.ndarray]:
    """(M, psi) with M y = psi * x characterising stationary opinions."""
    denom = params.beta + params.lam
    phi = params.beta / denom
    psi = params.lam / denom
    M = np.eye(params.n) - phi[:, None] * net.W
    return M, psi


def solve_opinion_equilibrium(
    x,
    params: ModelParams,
    net: Network,
    method: str = "direct",
) -> np.ndarray:
    """Stationary opinions for a frozen action profile ``x``.

    Solves y_i = (beta_i * sum_j w_ij y_j + lam_i * x_i) / (beta_i + lam_i)
    for all i. ``method`` is "direct" (dense linear solve) or
    "fixed-point-iteration" (contraction mapping, rate max beta/(beta+lam));
    the two agree to 1e-10. The system matrix is invertible under the
    preconditions, so a singular solve is an internal fault.
    """
    _require_solvable(params)
    x = np.asarray(x, dtype=float)
    if x.shape != (params.n,):
        raise ValueError(f"action vector must have length {params.n}, got shape {x.shape}")
    if not np.isin(x, (0.0, 1.0)).all():
        raise ValueError("action vector entries must be 0 or 1")
    if net.n != params.n:
        raise ValueError(f"network has {net.n} nodes but params describe {params.n} players")
    M, psi = _opinion_system(params, net)
    rhs = psi * x
    if method == "direct":
        try:
            y = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(
                "internal fault: the stationary-opinion system is singular despite "
                "contraction preconditions"
            ) from exc
    elif method == "fixed-point-iteration":
        phi = params.beta / (params.beta + params.lam)
        y = np.full(params.n, 0.5)
        for _ in range(100_000):
            y_next = phi * (net.W @ y) + rhs
            if np.max(np.abs(y_next - y)) <= 1e-13:
                y = y_next
                break
            y = y_next
        else:
            raise RuntimeError(
                "internal fault: fixed-point iteration failed to contract within "
                "100000 sweeps"
            )
    else:
        raise ValueError(
            f"unknown method {method!r}; use 'direct' or 'fixed-point-iteration'"
        )
    return np.clip(y, 0.0, 1.0)


@dataclass(frozen=True)
class NashCheck:
    """Outcome of exact Nash verification.

    On failure, ``deviating_player`` is the first player (0-based) holding a
    strategy outside their best-response set and ``improving_response`` is a
    best (action, opinion) pair for them.
    """

    is_nash: bool
    deviating_player: int | None = None
    improving_response: tuple[int, float] | None = None


def verify_nash(
    state: SystemState,
    params: ModelParams,
    net: Network,
    tol: float = 1e-9,
) -> NashCheck:
    """Check that every player's (action, opinion) is a best response.

    Action membership is exact, with a discriminant tie admitting either
    action; opinions must match the action-conditional optimum within
    ``tol``.
    """
    if state.n != params.n or net.n != params.n:
        raise ValueError(
            f"size mismatch: state has {state.n} players, params {params.n}, "
            f"network {net.n}"
        )
    for i in range(params.n):
        br = best_response(i, state.y, params, net)
        xi = int(state.x[i])
        if xi not in br.actions:
            return NashCheck(False, i, br.entries[0])
        if abs(state.y[i] - br.opinion_for(xi)) > tol:
            return NashCheck(False, i, (xi, br.opinion_for(xi)))
    return NashCheck(True)


@dataclass(frozen=True)
class Equilibrium:
    """One enumerated equilibrium with its classification and solve residual."""

    state: SystemState
    state_class: StateClass
    residual: float


@dataclass(frozen=True)
class EquilibriumReport:
    """Complete equilibrium set from exhaustive action-profile enumeration.

    ``equilibria`` holds the states stationary under the dynamics (whose tie
    rule maps a zero discriminant to defect). ``boundary_equilibria`` holds
    states that are Nash equilibria only by the tie rule admitting
    cooperation at a zero discriminant; the dynamics would move off them.
    ``solver_residuals`` is the max stationarity residual among accepted
    equilibria (0.0 when none).
    """

    equilibria: tuple[Equilibrium, ...]
    boundary_equilibria: tuple[Equilibrium, ...]
    action_profiles_scanned: int
    solver_residuals: float


def enumerate_equilibria(
    params: ModelParams,
    net: Network,
    max_n: int = 16,
) -> EquilibriumReport:
    """Enumerate all equilibria by scanning every one of the 2^n action profiles.

    For each profile the stationary opinions are solved exactly; the profile
    is accepted when every action agrees with its discriminant sign there
    (cooperation needs a strictly positive discriminant, ties defect).
    Profiles consistent only under the looser Nash tie rule are reported
    separately as boundary equilibria.
    """
    _require_solvable(params)
    if params.n > max_n:
        raise ValueError(
            f"enumeration over n={params.n} means {2**params.n} action profiles "
            f"and linear solves; raise max_n above {max_n} to allow it"
        )
    if net.n != params.n:
        raise ValueError(f"network has {net.n} nodes but params describe {params.n} players")
    n = params.n
    profiles = 1 << n
    codes = np.arange(profiles, dtype=np.uint32)
    # bit k of the code is player k's action
    X = ((codes[:, None] >> np.arange(n, dtype=np.uint32)) & 1).astype(float)

    M, psi = _opinion_system(params, net)
    Y = np.linalg.solve(M, (psi[:, None] * X.T)).T

    social = Y @ net.W.T
    coupling = params.beta * params.lam / (params.beta + params.lam)
    delta = params.alpha * (params.r / params.n - 1.0) + coupling * (social - 0.5)

    eps = DISCRIMINANT_TIE_TOL
    coop = X == 1.0
    dyn_ok = np.where(coop, delta > eps, delta <= eps).all(axis=1)
    nash_ok = np.where(coop, delta >= -eps, delta <= eps).all(axis=1)

    residual = np.abs(
        Y - ((params.beta * social) + params.lam * X) / (params.beta + params.lam)
    ).max(axis=1)

    def build(mask: np.ndarray) -> tuple[Equilibrium, ...]:
        found = []
        for k in np.flatnonzero(mask):
            state = SystemState(X[k].astype(np.int64), np.clip(Y[k], 0.0, 1.0))
            found.append(
                Equilibrium(
                    state=state,
                    state_class=classify_state(state),
                    residual=float(residual[k]),
                )
            )
        found.sort(key=lambda e: (int(e.state.x.sum()), tuple(e.state.x)))
        return tuple(found)

    equilibria = build(dyn_ok)
    boundary = build(nash_ok & ~dyn_ok)
    return EquilibriumReport(
        equilibria=equilibria,
        boundary_equilibria=boundary,
        action_profiles_scanned=profiles,
        solver_residuals=float(max((e.residual for e in equilibria), default=0.0)),
    )


@dataclass(frozen=True)
class SweepCell:
    """Analysis of one parameter-grid cell.

    ``outcome_frequencies`` maps a final-state full consensus class to its
    fraction over the cell's random-initial-state trials.
    """

    r: float
    alpha: float
    beta: float
    lam: float
    all_defection_unique: bool
    all_cooperation_exists: bool
    equilibrium_count: int | None
    boundary_count: int | None
    outcome_frequencies: dict[str, float]
    trials: int


@dataclass(frozen=True)
class SweepTable:
    """Results of a parameter sweep plus the invalid cells that were skipped."""

    cells: tuple[SweepCell, ...]
    invalid_cells: tuple[tuple[dict, str], ...]
    schedule_kind: str
    seed: int
    trials_per_cell: int


def sweep(
    grid: dict,
    net: Network,
    schedule_kind: str = "round-robin",
    trials: int = 20,
    seed: int = 0,
    max_steps: int = 100_000,
    fixed_point_tol: float = 1e-10,
    max_n: int = 16,
    opinion_tol: float = 1e-6,
) -> SweepTable:
    """Run condition checks, enumeration, and random-start simulations per cell.

    ``grid`` maps axis names to value lists; axes are ``r``, ``alpha``,
    ``beta``, combined by cartesian product. Every player shares the cell's
    weights, with lam = 1 - alpha - beta and zero prejudice attachment. Cells
    that violate the model's invariants are reported in ``invalid_cells`` and
    skipped. Enumeration is skipped (count None) when n exceeds ``max_n``.
    """
    unknown = set(grid) - {"r", "alpha", "beta"}
    if unknown:
        raise ValueError(f"unknown grid axes {sorted(unknown)}; use r, alpha, beta")
    missing = {"r", "alpha", "beta"} - set(grid)
    if missing:
        raise ValueError(f"grid is missing axes {sorted(missing)}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if schedule_kind == "iid-random":
        warnings.warn(
            "the iid-random schedule does not guarantee that every player revises "
            "within a fixed window; convergence conclusions do not apply to it",
            stacklevel=2,
        )
    rs = [float(v) for v in grid.get("r", [])]
    alphas = [float(v) for v in grid.get("alpha", [])]
    betas = [float(v) for v in grid.get("beta", [])]
    n = net.n

    cell_specs = list(itertools.product(rs, alphas, betas))
    master = np.random.SeedSequence(seed)
    cell_seqs = master.spawn(len(cell_specs)) if cell_specs else []

    cells: list[SweepCell] = []
    invalid: list[tuple[dict, str]] = []
    for (r, a, b), seq in zip(cell_specs, cell_seqs):
        spec_dict = {"r": r, "alpha": a, "beta": b}
        lam = 1.0 - a - b
        try:
            params = ModelParams.uniform(n, r, a, b, lam)
        except ValueError as exc:
            invalid.append((spec_dict, str(exc)))
            continue
        if not params.strict_interior:
            invalid.append(
                (spec_dict, "weights must lie strictly inside (0, 1) for analysis")
            )
            continue
        cond_defect = check_all_defection_unique(params)
        cond_coop = check_all_cooperation_exists(params)
        if n <= max_n:
            report = enumerate_equilibria(params, net, max_n=max_n)
            eq_count: int | None = len(report.equilibria)
            boundary_count: int | None = len(report.boundary_equilibria)
        else:
            eq_count = None
            boundary_count = None

        counts: dict[str, int] = {}
        trial_seqs = seq.spawn(trials)
        for trial_seq in trial_seqs:
            rng = np.random.default_rng(trial_seq)
            initial = SystemState(
                rng.integers(0, 2, size=n).astype(np.int64), rng.random(n)
            )
            schedule = make_schedule(
                schedule_kind, n, seed=int(rng.integers(2**63 - 1))
            )
            traj = run(
                initial,
                schedule,
                params,
                net,
                max_steps=max_steps,
                fixed_point_tol=fixed_point_tol,
            )
            label = classify_state(traj.final, opinion_tol=opinion_tol).full_class
            counts[label] = counts.get(label, 0) + 1
        freqs = {label: count / trials for label, count in sorted(counts.items())}
        cells.append(
            SweepCell(
                r=r,
                alpha=a,
                beta=b,
                lam=lam,
                all_defection_unique=cond_defect.all_hold,
                all_cooperation_exists=cond_coop.all_hold,
                equilibrium_count=eq_count,
                boundary_count=boundary_count,
                outcome_frequencies=freqs,
                trials=trials,
            )
        )
    return SweepTable(
        cells=tuple(cells),
        invalid_cells=tuple(invalid),
        schedule_kind=schedule_kind,
        seed=seed,
        trials_per_cell=trials,
    )
