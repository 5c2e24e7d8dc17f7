"""Random-walk analytics on strongly connected digraphs.

A walker at ``u`` moves to out-neighbor ``v`` with probability
``w(u, v) / d_u``. The column-stochastic transition matrix is ``W = A^T D^-1``
and ``pi`` is its stationary distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .graph import WeightedDigraph, is_strongly_connected
from .numerics import pinv, solve


def transition_matrix(g: WeightedDigraph) -> np.ndarray:
    """Column-stochastic ``W = A^T D^{-1}``."""
    d = g.out_degree()
    if np.any(d <= 0):
        raise ValidationError("every node needs at least one out-edge")
    return g.adjacency().T / d


def stationary(g: WeightedDigraph) -> np.ndarray:
    """Stationary distribution ``pi`` with ``W pi = pi`` and ``sum(pi) = 1``.

    Solves ``(I - W) pi = 0`` with the last equation replaced by the
    normalization.
    """
    if not is_strongly_connected(g):
        raise ValidationError("stationary distribution requires a strongly connected graph")
    w = transition_matrix(g)
    a = np.eye(g.n) - w
    a[-1, :] = 1.0
    rhs = np.zeros(g.n)
    rhs[-1] = 1.0
    pi = solve(a, rhs)
    if np.any(pi <= 0):
        raise ValidationError("stationary distribution is not positive")
    return pi


class WalkKernel:
    """Cached random-walk matrices of one strongly connected graph.

    Attributes
    ----------
    W : ndarray
        Column-stochastic transition matrix.
    pi : ndarray
        Stationary distribution.
    scriptL : ndarray
        ``Pi (I - W^T)``; its rows and columns both sum to zero.
    scriptR : ndarray
        ``(I - W^T)^+ Pi^{-1}``.
    """

    def __init__(self, g: WeightedDigraph):
        self.graph = g
        self.pi = stationary(g)
        self.W = transition_matrix(g)
        self.Pi = np.diag(self.pi)
        self.scriptL = self.Pi @ (np.eye(g.n) - self.W.T)

    @cached_property
    def scriptR(self) -> np.ndarray:
        return pinv(np.eye(self.graph.n) - self.W.T) / self.pi

    @cached_property
    def scriptL_pinv(self) -> np.ndarray:
        return pinv(self.scriptL)

    @property
    def n(self) -> int:
        return self.graph.n

    def _check_pair(self, u, v):
        for x in (u, v):
            if not 0 <= x < self.n:
                raise ValidationError(f"node id {x} is outside 0..{self.n - 1}")

    def hitting_time(self, u: int, v: int) -> float:
        """Expected number of steps for a walker started at ``u`` to first reach ``v``.

        Zero when ``u == v``.
        """
        self._check_pair(u, v)
        if u == v:
            return 0.0
        r = self.scriptR
        target = self.pi.copy()
        target[v] -= 1.0
        return float((r[u] - r[v]) @ target)

    def commute_time(self, u: int, v: int) -> float:
        self._check_pair(u, v)
        if u == v:
            return 0.0
        r = self.scriptR
        return float(r[u, u] - r[u, v] - r[v, u] + r[v, v])

    def domination_score(self, u: int, v: int) -> float:
        """Domination score of ``u`` over ``v``: ``Lp[v, v] - Lp[v, u]``."""
        self._check_pair(u, v)
        if u == v:
            return 0.0
        lp = self.scriptL_pinv
        return float(lp[v, v] - lp[v, u])


def hitting_times_first_step(g: WeightedDigraph, target: int) -> np.ndarray:
    """Expected steps to reach ``target`` from every node, by first-step analysis.

    Solves ``h_t = 0`` and ``h_u = 1 + sum_v P[u, v] h_v`` otherwise.
    """
    p = g.adjacency() / g.out_degree()[:, None]
    rest = [i for i in range(g.n) if i != target]
    h = np.zeros(g.n)
    h[rest] = solve(np.eye(len(rest)) - p[np.ix_(rest, rest)], np.ones(len(rest)))
    return h


# -- undirected specializations -------------------------------------------


def _undirected_laplacian_pinv(g: WeightedDigraph) -> np.ndarray:
    if not g.is_symmetric():
        raise ValidationError("effective resistance is defined for undirected graphs only")
    if not is_strongly_connected(g):
        raise ValidationError("effective resistance requires a connected graph")
    return pinv(g.laplacian())


def effective_resistance(g: WeightedDigraph, u: int, v: int, l_pinv=None) -> float:
    lp = _undirected_laplacian_pinv(g) if l_pinv is None else l_pinv
    return float(lp[v, v] - 2.0 * lp[v, u] + lp[u, u])


def resistance_matrix(g: WeightedDigraph, l_pinv=None) -> np.ndarray:
    """All pairwise effective resistances."""
    lp = _undirected_laplacian_pinv(g) if l_pinv is None else l_pinv
    diag = np.diag(lp)
    return diag[:, None] + diag[None, :] - lp - lp.T


def information_centrality(g: WeightedDigraph, u: int | None = None, l_pinv=None):
    """Information centrality ``n / sum_v R(u, v)``.

    Uses ``sum_v R(u, v) = n Lp[u, u] + tr(Lp)``. Returns a vector for all
    nodes when ``u`` is None.
    """
    lp = _undirected_laplacian_pinv(g) if l_pinv is None else l_pinv
    n = g.n
    totals = n * np.diag(lp) + np.trace(lp)
    theta = n / totals
    return theta if u is None else float(theta[u])


# -- absorbing chains ------------------------------------------------------


@dataclass(frozen=True)
class AbsorbingChain:
    """Walk on ``g`` absorbed at ``S0`` and ``S1``.

    ``R`` holds transition probabilities from transient to absorbing states
    and ``Q`` among transient states (rows sum to one jointly).
    """

    graph: WeightedDigraph
    s0: frozenset
    s1: frozenset

    def __post_init__(self):
        object.__setattr__(self, "s0", frozenset(self.s0))
        object.__setattr__(self, "s1", frozenset(self.s1))
        if not self.s0 and not self.s1:
            raise ValidationError("an absorbing chain needs at least one absorbing node")
        if self.s0 & self.s1:
            raise ValidationError("absorbing sets S0 and S1 must be disjoint")

    @cached_property
    def transient(self) -> list[int]:
        absorbing = self.s0 | self.s1
        return [v for v in range(self.graph.n) if v not in absorbing]

    @cached_property
    def absorbing(self) -> list[int]:
        return sorted(self.s0 | self.s1)

    @cached_property
    def _row_stochastic(self):
        return self.graph.adjacency() / self.graph.out_degree()[:, None]

    @property
    def R(self) -> np.ndarray:
        return self._row_stochastic[np.ix_(self.transient, self.absorbing)]

    @property
    def Q(self) -> np.ndarray:
        return self._row_stochastic[np.ix_(self.transient, self.transient)]

    def escape_probability(self) -> np.ndarray:
        """Probability of reaching ``S1`` before ``S0`` from every node.

        Absorbing nodes report their own boundary value (1 on ``S1``, else 0).
        """
        y = np.zeros(self.graph.n)
        y[list(self.s1)] = 1.0
        f = self.transient
        if f:
            boundary = y[self.absorbing]
            y[f] = solve(np.eye(len(f)) - self.Q, self.R @ boundary)
        return y


def _cumulative_rows(g: WeightedDigraph):
    p = g.adjacency() / g.out_degree()[:, None]
    cum = np.cumsum(p, axis=1)
    cum[:, -1] = 1.0
    return cum


def _step(cum, pos, rng):
    u = rng.random(len(pos))
    rows = cum[pos]
    nxt = (rows <= u[:, None]).sum(axis=1)
    return np.minimum(nxt, cum.shape[1] - 1)


def escape_probability_mc(chain: AbsorbingChain, v: int, trials: int, seed=None,
                          max_steps: int = 1_000_000) -> tuple[float, float]:
    """Monte-Carlo estimate of the probability of hitting ``S1`` before ``S0`` from ``v``.

    Walkers advance in lockstep; each step samples the next node by inverting
    the cumulative out-edge weights. Returns ``(estimate, standard_error)``.
    """
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if v in chain.s0 or v in chain.s1:
        raise ValidationError(f"start node {v} is absorbing")
    rng = np.random.default_rng(seed)
    cum = _cumulative_rows(chain.graph)
    state = np.zeros(chain.graph.n, dtype=np.int8)
    state[list(chain.s0)] = 1
    state[list(chain.s1)] = 2
    pos = np.full(trials, v, dtype=np.intp)
    result = np.zeros(trials, dtype=np.int8)
    live = np.arange(trials)
    for _ in range(max_steps):
        if live.size == 0:
            break
        pos[live] = _step(cum, pos[live], rng)
        hit = state[pos[live]]
        done = hit > 0
        result[live[done]] = hit[done]
        live = live[~done]
    else:
        raise ValidationError("walkers failed to absorb; is the graph strongly connected?")
    successes = (result == 2).astype(float)
    est = successes.mean()
    stderr = successes.std(ddof=1) / np.sqrt(trials) if trials > 1 else 0.0
    return float(est), float(stderr)


def hitting_time_mc(g: WeightedDigraph, u: int, v: int, trials: int, seed=None,
                    max_steps: int = 1_000_000) -> tuple[float, float]:
    """Monte-Carlo estimate of the steps from ``u`` until ``v`` is first reached."""
    if u == v:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    cum = _cumulative_rows(g)
    pos = np.full(trials, u, dtype=np.intp)
    steps = np.zeros(trials)
    live = np.arange(trials)
    for t in range(1, max_steps + 1):
        if live.size == 0:
            break
        pos[live] = _step(cum, pos[live], rng)
        done = pos[live] == v
        steps[live[done]] = t
        live = live[~done]
    est = steps.mean()
    stderr = steps.std(ddof=1) / np.sqrt(trials) if trials > 1 else 0.0
    return float(est), float(stderr)


def hitting_time(k: WalkKernel, u: int, v: int) -> float:
    return k.hitting_time(u, v)


def commute_time(k: WalkKernel, u: int, v: int) -> float:
    return k.commute_time(u, v)


def domination_score(k: WalkKernel, u: int, v: int) -> float:
    return k.domination_score(u, v)
