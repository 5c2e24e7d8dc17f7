"""Steady states of the two leader systems and the average opinion.

Absolute leaders are pinned at their party value (0 or 1) and followers
settle at ``x_F = -(L_FF)^{-1} L_FS x_S``. Influenced leaders keep averaging
with their neighbors while being pulled toward their party value with
stubbornness ``kappa``; all nodes settle at
``x = (L + E^S K)^{-1} E^{S1} K 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .graph import (EquivalentGraph, LeaderConfig, Model, WeightedDigraph, as_kappa,
                    is_strongly_connected)
from .numerics import pinv, solve
from .walks import WalkKernel


@dataclass(frozen=True)
class SteadyState:
    x_hat: np.ndarray
    mu: float
    model: Model
    config: LeaderConfig

    def f(self, alpha: float) -> float:
        """Distance ``|mu - alpha|`` of the average opinion from a target."""
        return abs(self.mu - alpha)


def average_opinion(x_hat) -> float:
    return float(np.mean(x_hat))


def _check_strongly_connected(g):
    if not is_strongly_connected(g):
        raise ValidationError("steady state requires a strongly connected graph")


def steady_state_absolute(g: WeightedDigraph, s0, s1) -> SteadyState:
    """Steady state with absolute leaders.

    An empty ``s1`` yields the all-zero state (every walk is absorbed by S0).
    """
    cfg = LeaderConfig.for_graph(g, s0, s1, Model.ABSOLUTE)
    _check_strongly_connected(g)
    x = np.zeros(g.n)
    s1_list = sorted(cfg.s1)
    x[s1_list] = 1.0
    followers = cfg.followers(g.n)
    if s1_list and followers:
        lap = g.laplacian()
        rhs = -lap[np.ix_(followers, s1_list)].sum(axis=1)
        x[followers] = solve(lap[np.ix_(followers, followers)], rhs)
    return SteadyState(x, average_opinion(x), Model.ABSOLUTE, cfg)


def steady_state_influenced(g: WeightedDigraph, cfg: LeaderConfig) -> SteadyState:
    if cfg.model is not Model.INFLUENCED:
        raise ValidationError("steady_state_influenced needs an influenced leader configuration")
    cfg.check(g)
    _check_strongly_connected(g)
    x = np.zeros(g.n)
    if cfg.s1:
        kappa = cfg.kappa
        grounded = np.zeros(g.n)
        lead = sorted(cfg.leaders)
        grounded[lead] = kappa[lead]
        rhs = np.zeros(g.n)
        s1_list = sorted(cfg.s1)
        rhs[s1_list] = kappa[s1_list]
        x = solve(g.laplacian() + np.diag(grounded), rhs)
    return SteadyState(x, average_opinion(x), Model.INFLUENCED, cfg)


def steady_state(g: WeightedDigraph, cfg: LeaderConfig) -> SteadyState:
    if cfg.model is Model.ABSOLUTE:
        return steady_state_absolute(g, cfg.s0, cfg.s1)
    return steady_state_influenced(g, cfg)


def steady_state_via_walks(eq: EquivalentGraph, formula: str = "scriptR") -> np.ndarray:
    """Steady state of every node of a leader-equivalent graph from random-walk matrices.

    ``x_v = b(v, s0)^T M b(s1, s0) / b(s1, s0)^T M b(s1, s0)`` where ``M`` is
    ``(I - W^T)^+ Pi^{-1}`` (``formula="scriptR"``), the pseudoinverse of
    ``Pi (I - W^T)`` (``"scriptL"``), or, for undirected graphs only, the
    Laplacian pseudoinverse (``"laplacian"``).
    """
    s0, s1 = eq.s0_id, eq.s1_id
    if s0 == s1:
        raise ValidationError("degenerate equivalent graph: both leaders coincide")
    if formula == "laplacian":
        if not eq.graph.is_symmetric():
            raise ValidationError("the Laplacian form applies to undirected graphs only")
        m = pinv(eq.graph.laplacian())
    else:
        kernel = WalkKernel(eq.graph)
        if formula == "scriptR":
            m = kernel.scriptR
        elif formula == "scriptL":
            m = kernel.scriptL_pinv
        else:
            raise ValidationError(f"unknown formula {formula!r}")
    z = m[:, s1] - m[:, s0]
    denom = z[s1] - z[s0]
    if abs(denom) <= 1e-300:
        raise NumericalError("degenerate denominator in the steady-state formula")
    return (z - z[s0]) / denom


def equivalent_to_original(eq: EquivalentGraph, x_eq, n: int) -> np.ndarray:
    """Pull a state over the equivalent graph back to the ``n`` original nodes."""
    return np.array([x_eq[eq.origin_map[v]] for v in range(n)])


# -- transient dynamics ----------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]


def _rhs_factory(g: WeightedDigraph, cfg: LeaderConfig):
    lap = g.laplacian()
    if cfg.model is Model.ABSOLUTE:
        free = np.ones(g.n)
        free[list(cfg.leaders)] = 0.0
        return lambda x: -free * (lap @ x)
    kappa = cfg.kappa
    grounded = np.zeros(g.n)
    lead = sorted(cfg.leaders)
    grounded[lead] = kappa[lead]
    drive = np.zeros(g.n)
    s1_list = sorted(cfg.s1)
    drive[s1_list] = kappa[s1_list]
    system = lap + np.diag(grounded)
    return lambda x: drive - system @ x


def integrate_transient(g: WeightedDigraph, cfg: LeaderConfig, x0, horizon: float,
                        step: float) -> Trajectory:
    """Integrate the opinion ODE with the classical fixed-step Runge-Kutta method.

    In the absolute model leader entries are reset to their party value
    before integration and never move.
    """
    if step <= 0 or horizon < 0:
        raise ValidationError("step must be positive and horizon non-negative")
    cfg.check(g)
    x = np.array(x0, dtype=float)
    if x.shape != (g.n,):
        raise ValidationError(f"initial state must have length {g.n}")
    if cfg.model is Model.ABSOLUTE:
        x[list(cfg.s0)] = 0.0
        x[list(cfg.s1)] = 1.0
    rhs = _rhs_factory(g, cfg)
    nsteps = int(np.ceil(horizon / step - 1e-12))
    times = [0.0]
    states = [x.copy()]
    t = 0.0
    # Divergence is reported below, so silence the intermediate overflow warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(nsteps):
            h = min(step, horizon - t)
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * h * k1)
            k3 = rhs(x + 0.5 * h * k2)
            k4 = rhs(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t = (i + 1) * step if i + 1 < nsteps else horizon
            if not np.all(np.isfinite(x)):
                raise NumericalError(f"integration diverged at t={t:.6g}; reduce the step")
            times.append(t)
            states.append(x.copy())
    return Trajectory(np.array(times), np.array(states))


def slowest_rate(g: WeightedDigraph, cfg: LeaderConfig) -> float:
    """Smallest real part among the decay rates of the opinion ODE."""
    lap = g.laplacian()
    if cfg.model is Model.ABSOLUTE:
        f = cfg.followers(g.n)
        if not f:
            return np.inf
        mat = lap[np.ix_(f, f)]
    else:
        grounded = np.zeros(g.n)
        lead = sorted(cfg.leaders)
        grounded[lead] = cfg.kappa[lead]
        mat = lap + np.diag(grounded)
    return float(np.min(np.linalg.eigvals(mat).real))


# -- participation sampling ------------------------------------------------


def sample_participation(ss: SteadyState, seed=None) -> float:
    """Draw ``X_v ~ Bernoulli(x_v)`` independently and return their mean."""
    rng = np.random.default_rng(seed)
    p = np.clip(ss.x_hat, 0.0, 1.0)
    return float(np.mean(rng.random(p.shape) < p))


def sample_participation_many(ss: SteadyState, samples: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    p = np.clip(ss.x_hat, 0.0, 1.0)
    draws = rng.random((samples, p.size)) < p
    return draws.mean(axis=1)


def hoeffding_radius(n: int) -> float:
    return float(np.sqrt(np.log(n) / n))


def hoeffding_violation_rate(ss: SteadyState, samples: int, seed=None) -> tuple[float, float]:
    """Empirical ``Pr[|Xbar - mu| >= sqrt(ln n / n)]`` and its bound ``2 / n^2``."""
    n = ss.x_hat.size
    xbar = sample_participation_many(ss, samples, seed)
    rate = float(np.mean(np.abs(xbar - ss.mu) >= hoeffding_radius(n)))
    return rate, 2.0 / n ** 2


# -- set-function evaluator ------------------------------------------------


class OpinionObjective:
    """Average opinion ``mu(S1)`` for a fixed graph, ``S0`` and model.

    Validates once and then evaluates many leader sets, singly or in batches
    of equal size.
    """

    def __init__(self, g: WeightedDigraph, s0, model=Model.ABSOLUTE, kappa=None):
        self.graph = g
        self.model = Model(model)
        self.s0 = frozenset(int(v) for v in s0)
        if not self.s0:
            raise ValidationError("leader set S0 must be nonempty")
        for v in self.s0:
            if not 0 <= v < g.n:
                raise ValidationError(f"leader id {v} is outside 0..{g.n - 1}")
        _check_strongly_connected(g)
        self.kappa = as_kappa(kappa, g.n) if self.model is Model.INFLUENCED else None
        self.laplacian = g.laplacian()
        self.adjacency = np.asarray(g.adjacency())
        self._s0_list = sorted(self.s0)
        if self.kappa is not None:
            self._base = self.laplacian.copy()
            self._base[self._s0_list, self._s0_list] += self.kappa[self._s0_list]

    @property
    def n(self) -> int:
        return self.graph.n

    def config(self, s1) -> LeaderConfig:
        return LeaderConfig.for_graph(self.graph, self.s0, s1, self.model, self.kappa)

    def x_hat(self, s1) -> np.ndarray:
        s1 = sorted(int(v) for v in s1)
        if set(s1) & self.s0:
            raise ValidationError("S1 overlaps S0")
        n = self.n
        x = np.zeros(n)
        if not s1:
            return x
        if self.model is Model.ABSOLUTE:
            x[s1] = 1.0
            lead = self.s0.union(s1)
            f = [v for v in range(n) if v not in lead]
            if f:
                rhs = self.adjacency[np.ix_(f, s1)].sum(axis=1)
                x[f] = solve(self.laplacian[np.ix_(f, f)], rhs)
            return x
        mat = self._base.copy()
        mat[s1, s1] += self.kappa[s1]
        rhs = np.zeros(n)
        rhs[s1] = self.kappa[s1]
        return solve(mat, rhs)

    def mu(self, s1) -> float:
        return average_opinion(self.x_hat(s1))

    def __call__(self, s1) -> float:
        return self.mu(s1)

    def mu_batch(self, subsets, chunk: int = 2048) -> np.ndarray:
        """``mu`` for each row of an integer array of equal-size leader sets."""
        subsets = np.asarray(subsets, dtype=np.intp)
        if subsets.ndim != 2:
            raise ValueError("subsets must be a 2-D array")
        count, size = subsets.shape
        out = np.empty(count)
        if size == 0:
            out[:] = 0.0
            return out
        for start in range(0, count, chunk):
            block = subsets[start:start + chunk]
            out[start:start + len(block)] = self._mu_block(block)
        return out

    def _mu_block(self, block):
        b, size = block.shape
        n = self.n
        rows = np.arange(b)[:, None]
        if self.model is Model.ABSOLUTE:
            mask = np.ones((b, n), dtype=bool)
            mask[:, self._s0_list] = False
            mask[rows, block] = False
            fsize = n - len(self._s0_list) - size
            if fsize == 0:
                return np.full(b, size / n)
            fidx = np.nonzero(mask)[1].reshape(b, fsize)
            mats = self.laplacian[fidx[:, :, None], fidx[:, None, :]]
            rhs = self.adjacency[fidx[:, :, None], block[:, None, :]].sum(axis=2)
            x = np.linalg.solve(mats, rhs[:, :, None])[:, :, 0]
            return (size + x.sum(axis=1)) / n
        mats = np.broadcast_to(self._base, (b, n, n)).copy()
        kap = self.kappa[block]
        mats[rows, block, block] += kap
        rhs = np.zeros((b, n))
        rhs[rows, block] = kap
        x = np.linalg.solve(mats, rhs[:, :, None])[:, :, 0]
        return x.sum(axis=1) / n
