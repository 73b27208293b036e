"""Domain types and pure payoff maps for the coupled action-opinion game.

Each of ``n`` players holds a binary action (0 = defect, 1 = cooperate and
contribute one unit to a public pool multiplied by ``r``) and a continuous
opinion in [0, 1] expressing support for cooperation. A player's payoff is a
convex combination of their public-goods share, a quadratic disagreement cost
against neighbours' opinions on a row-stochastic influence network, and a
self-consistency penalty for holding an action that contradicts their own
opinion.

Everything in this module is a pure function of its arguments; the types are
immutable value objects, safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

#: |discriminant| at or below this tolerance is treated as an exact tie
#: between the two actions, in which case both are best responses.
DISCRIMINANT_TIE_TOL = 1e-12

#: Per-player payoff weights must sum to 1 within this absolute tolerance.
WEIGHT_SUM_TOL = 1e-12

#: Influence-matrix rows must sum to 1 within this absolute tolerance.
ROW_SUM_TOL = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


def _check_weight_vector(name: str, values: np.ndarray, n: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {values.shape}")
    if not np.isfinite(values).all():
        raise ValueError(f"{name} contains non-finite entries")
    if (values < 0.0).any() or (values > 1.0).any():
        bad = int(np.argmax((values < 0.0) | (values > 1.0)))
        raise ValueError(
            f"player {bad + 1}: {name} must lie in [0, 1], got {values[bad]!r}"
        )
    return values


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Per-player parameters of the game.

    Attributes:
        n: number of players, at least 2.
        r: public good multiplier, strictly between 1 and n.
        alpha: weight on the public-goods payoff, per player, in [0, 1].
        beta: weight on the opinion payoff, per player, in [0, 1].
        lam: weight on the action-opinion consistency penalty, per player.
        gamma: attachment to the constant prejudice, per player, in [0, 1].
        prejudice: the prejudice value each player is attached to, in [0, 1].

    For every player, ``alpha + beta + lam`` must equal 1 (tolerance
    ``WEIGHT_SUM_TOL``).
    """

    n: int
    r: float
    alpha: np.ndarray
    beta: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray
    prejudice: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise ValueError(f"need at least 2 players, got n={n}")
        r = float(self.r)
        if not np.isfinite(r) or not (1.0 < r < n):
            raise ValueError(f"public good multiplier must satisfy 1 < r < n, got r={r} with n={n}")
        alpha = _check_weight_vector("alpha", self.alpha, n)
        beta = _check_weight_vector("beta", self.beta, n)
        lam = _check_weight_vector("lam", self.lam, n)
        gamma = _check_weight_vector("gamma", self.gamma, n)
        prejudice = _check_weight_vector("prejudice", self.prejudice, n)
        sums = alpha + beta + lam
        off = np.abs(sums - 1.0)
        if (off > WEIGHT_SUM_TOL).any():
            bad = int(np.argmax(off))
            raise ValueError(
                f"player {bad + 1}: alpha + beta + lam must sum to 1, got {sums[bad]!r}"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "alpha", _frozen_array(alpha))
        object.__setattr__(self, "beta", _frozen_array(beta))
        object.__setattr__(self, "lam", _frozen_array(lam))
        object.__setattr__(self, "gamma", _frozen_array(gamma))
        object.__setattr__(self, "prejudice", _frozen_array(prejudice))

    @classmethod
    def uniform(
        cls,
        n: int,
        r: float,
        alpha: float,
        beta: float,
        lam: float | None = None,
        gamma: float = 0.0,
        prejudice: float = 0.5,
    ) -> "ModelParams":
        """Build parameters shared by all players; ``lam`` defaults to 1 - alpha - beta."""
        if lam is None:
            lam = 1.0 - alpha - beta
        return cls(
            n=n,
            r=r,
            alpha=np.full(n, float(alpha)),
            beta=np.full(n, float(beta)),
            lam=np.full(n, float(lam)),
            gamma=np.full(n, float(gamma)),
            prejudice=np.full(n, float(prejudice)),
        )

    @property
    def strict_interior(self) -> bool:
        """True when all of alpha, beta, lam lie strictly inside (0, 1) and gamma is 0.

        The closed-form analysis of the consensus equilibria is stated under
        this regime; analysis routines that rely on it check this flag.
        """
        for w in (self.alpha, self.beta, self.lam):
            if (w <= 0.0).any() or (w >= 1.0).any():
                return False
        return bool((self.gamma == 0.0).all())


@dataclass(frozen=True, eq=False)
class Network:
    """A weighted influence network with a row-stochastic weight matrix.

    ``W[i, j]`` is the influence of player j on player i. Rows must be
    nonnegative and sum to 1 within ``ROW_SUM_TOL``. Self-loops
    (``W[i, i] > 0``) are permitted.
    """

    W: np.ndarray
    n: int = field(init=False)
    is_symmetric: bool = field(init=False)
    is_irreducible: bool = field(init=False)

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"influence matrix must be square, got shape {W.shape}")
        n = W.shape[0]
        if n < 1:
            raise ValueError("influence matrix must have at least one node")
        if not np.isfinite(W).all():
            raise ValueError("influence matrix contains non-finite entries")
        if (W < 0.0).any():
            i, j = np.unravel_index(int(np.argmin(W)), W.shape)
            raise ValueError(f"negative weight W[{i + 1}, {j + 1}] = {W[i, j]!r}")
        sums = W.sum(axis=1)
        off = np.abs(sums - 1.0)
        if (off > ROW_SUM_TOL).any():
            bad = int(np.argmax(off))
            raise ValueError(
                f"row {bad + 1} of the influence matrix sums to {sums[bad]!r}, must be 1"
            )
        object.__setattr__(self, "W", _frozen_array(W))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "is_symmetric", bool(np.array_equal(W, W.T)))
        n_comp, _ = connected_components(
            csr_matrix(W > 0.0), directed=True, connection="strong"
        )
        object.__setattr__(self, "is_irreducible", bool(n_comp == 1))

    @classmethod
    def from_matrix(cls, W, normalise: bool = False) -> "Network":
        """Build a network, optionally dividing each row by its sum first.

        Normalisation rejects rows that sum to zero.
        """
        W = np.asarray(W, dtype=float)
        if normalise:
            if W.ndim != 2 or W.shape[0] != W.shape[1]:
                raise ValueError(f"influence matrix must be square, got shape {W.shape}")
            sums = W.sum(axis=1)
            if (sums == 0.0).any():
                bad = int(np.argmax(sums == 0.0))
                raise ValueError(f"row {bad + 1} sums to zero and cannot be normalised")
            W = W / sums[:, None]
        return cls(W)


@dataclass(frozen=True, eq=False)
class SystemState:
    """Joint state: action vector x in {0,1}^n and opinion vector y in [0,1]^n."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x)
        if not np.issubdtype(x.dtype, np.number):
            raise ValueError("actions must be numeric 0/1 values")
        x = x.astype(np.int64)
        if x.ndim != 1:
            raise ValueError(f"action vector must be 1-d, got shape {x.shape}")
        if not np.isin(x, (0, 1)).all():
            bad = int(np.argmax(~np.isin(x, (0, 1))))
            raise ValueError(f"player {bad + 1}: action must be 0 or 1, got {x[bad]!r}")
        y = np.asarray(self.y, dtype=float)
        if y.shape != x.shape:
            raise ValueError(
                f"action and opinion vectors differ in length: {x.shape} vs {y.shape}"
            )
        if not np.isfinite(y).all() or (y < 0.0).any() or (y > 1.0).any():
            bad = int(np.argmax(~((y >= 0.0) & (y <= 1.0))))
            raise ValueError(f"player {bad + 1}: opinion must lie in [0, 1], got {y[bad]!r}")
        object.__setattr__(self, "x", _frozen_array(x, dtype=np.int64))
        object.__setattr__(self, "y", _frozen_array(y))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SystemState):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    @classmethod
    def all_defection(cls, n: int) -> "SystemState":
        """The state with every action 0 and every opinion 0."""
        return cls(np.zeros(n, dtype=np.int64), np.zeros(n))

    @classmethod
    def all_cooperation(cls, n: int) -> "SystemState":
        """The state with every action 1 and every opinion 1."""
        return cls(np.ones(n, dtype=np.int64), np.ones(n))


@dataclass(frozen=True, eq=False)
class BestResponseSet:
    """The set of payoff-maximising (action, opinion) pairs for one player.

    Holds one entry when the discriminant is nonzero, and two entries (one per
    action, defect first) when the discriminant ties at zero.
    """

    entries: tuple[tuple[int, float], ...]
    discriminant_value: float

    def __post_init__(self):
        if len(self.entries) not in (1, 2):
            raise ValueError("a best-response set holds one or two entries")

    @property
    def actions(self) -> tuple[int, ...]:
        return tuple(action for action, _ in self.entries)

    def opinion_for(self, action: int) -> float:
        for a, opinion in self.entries:
            if a == action:
                return opinion
        raise KeyError(f"action {action} is not a best response")


def _check_player(i: int, n: int) -> int:
    i = int(i)
    if not 0 <= i < n:
        raise IndexError(f"player index {i} out of range for n={n} (indices are 0-based)")
    return i


def _check_vector(name: str, values, n: int) -> np.ndarray:
    out = np.asarray(values, dtype=float)
    if out.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {out.shape}")
    return out


def pgg_payoff(i: int, x, params: ModelParams) -> float:
    """Public-goods payoff of player ``i`` under action vector ``x``.

    A cooperator receives r * (number of cooperators) / n minus their unit
    contribution; a defector receives the same pool share without
    contributing.
    """
    i = _check_player(i, params.n)
    x = _check_vector("action vector", x, params.n)
    if not np.isin(x, (0.0, 1.0)).all():
        raise ValueError("action vector entries must be 0 or 1")
    others = float(x.sum() - x[i])
    if x[i]:
        return params.r * (others + 1.0) / params.n - 1.0
    return (params.r / params.n) * others


def opinion_payoff(i: int, y, params: ModelParams, net: Network) -> float:
    """Opinion payoff of player ``i``: negative quadratic disagreement.

    Penalises squared differences with neighbours' opinions (weight
    ``1 - gamma``) and with the player's own prejudice (weight ``gamma``).
    """
    i = _check_player(i, params.n)
    y = _check_vector("opinion vector", y, params.n)
    if net.n != params.n:
        raise ValueError(f"network has {net.n} nodes but params describe {params.n} players")
    g = params.gamma[i]
    disagreement = float(np.dot(net.W[i], (y[i] - y) ** 2))
    return -0.5 * (1.0 - g) * disagreement - 0.5 * g * (y[i] - params.prejudice[i]) ** 2


def total_payoff(i: int, state: SystemState, params: ModelParams, net: Network) -> float:
    """Joint payoff: alpha * game share + beta * opinion payoff - lam/2 * (x - y)^2."""
    i = _check_player(i, params.n)
    if state.n != params.n:
        raise ValueError(f"state has {state.n} players but params describe {params.n}")
    consistency = 0.5 * params.lam[i] * float(state.x[i] - state.y[i]) ** 2
    return (
        params.alpha[i] * pgg_payoff(i, state.x, params)
        + params.beta[i] * opinion_payoff(i, state.y, params, net)
        - consistency
    )


def social_term(i: int, y, net: Network) -> float:
    """Influence-weighted average of opinions as seen by player ``i``.

    Lies in [0, 1] whenever the opinions do, because rows of W sum to 1.
    """
    i = _check_player(i, net.n)
    y = _check_vector("opinion vector", y, net.n)
    return float(np.dot(net.W[i], y))


def _consistency_coupling(i: int, params: ModelParams) -> float:
    denom = params.beta[i] + params.lam[i]
    if denom <= 0.0:
        raise ValueError(
            f"player {i + 1}: beta + lam must be positive (got beta={params.beta[i]}, "
            f"lam={params.lam[i]}); the best response is undefined otherwise"
        )
    return params.beta[i] * params.lam[i] / denom


def _discriminant_from_social(i: int, social: float, params: ModelParams) -> float:
    coupling = _consistency_coupling(i, params)
    g = params.gamma[i]
    pull = g * params.prejudice[i] + (1.0 - g) * social - 0.5
    return params.alpha[i] * (params.r / params.n - 1.0) + coupling * pull


def discriminant(i: int, y, params: ModelParams, net: Network) -> float:
    """Scalar whose sign determines player ``i``'s best-response action.

    Positive favours cooperation, negative favours defection, zero ties.
    Depends on opinions only, never on any action vector, which is why this
    function takes no actions.
    """
    return _discriminant_from_social(i, social_term(i, y, net), params)


def best_response(
    i: int,
    y,
    params: ModelParams,
    net: Network,
    tie_tol: float = DISCRIMINANT_TIE_TOL,
) -> BestResponseSet:
    """All payoff-maximising (action, opinion) pairs for player ``i`` given opinions ``y``.

    The optimal opinion for a chosen action ``s`` is the convex combination
    ``(beta * ((1 - gamma) * social + gamma * prejudice) + s * lam) / (beta + lam)``,
    so it always lies in [0, 1]. A discriminant within ``tie_tol`` of zero
    yields both actions, each with its own optimal opinion.

    The one-shot payoff-optimality of the returned pairs is exact when
    ``w_ii = 0``. With a positive self-weight the social term keeps the
    player's own current opinion inside it, making the returned opinion a
    damped step toward the true argmax rather than the argmax itself; fixed
    points of the two maps coincide, so equilibrium analyses are unaffected.
    """
    i = _check_player(i, params.n)
    social = social_term(i, y, net)
    disc = _discriminant_from_social(i, social, params)
    if abs(disc) <= tie_tol:
        actions: tuple[int, ...] = (0, 1)
    elif disc > 0.0:
        actions = (1,)
    else:
        actions = (0,)
    beta = params.beta[i]
    lam = params.lam[i]
    g = params.gamma[i]
    pulled = (1.0 - g) * social + g * params.prejudice[i]
    entries = tuple(
        (s, (beta * pulled + s * lam) / (beta + lam)) for s in actions
    )
    return BestResponseSet(entries=entries, discriminant_value=disc)
