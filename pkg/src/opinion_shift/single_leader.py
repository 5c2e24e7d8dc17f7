"""Closed forms and heuristics when each party has exactly one leader.

With absolute leaders ``s0`` and ``s1`` the average opinion is
``D(s1, s0) / (D(s0, s1) + D(s1, s0))`` where ``D`` is the domination score.
Influenced leaders add a stubbornness term ``d_s / (kappa_s pi_s)`` to each
side of the balance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import Model, WeightedDigraph
from .walks import WalkKernel, effective_resistance, information_centrality, _undirected_laplacian_pinv


@dataclass(frozen=True)
class BalanceReport:
    s0: int
    s1: int
    numerator: float
    denominator: float
    mu: float
    f: float


def _pair_check(k: WalkKernel, s0, s1):
    if s0 == s1:
        raise ValidationError("the two leaders must differ")
    for v in (s0, s1):
        if not 0 <= v < k.n:
            raise ValidationError(f"node id {v} is outside 0..{k.n - 1}")


def _report(s0, s1, a0, a1, alpha):
    # a0 pulls toward party 1 (s1 dominating s0); a1 toward party 0.
    denom = a0 + a1
    numerator = (1.0 - alpha) * a0 - alpha * a1
    return BalanceReport(s0, s1, numerator, denom, a0 / denom, abs(numerator) / denom)


def balance_absolute(k: WalkKernel, s0: int, s1: int, alpha: float) -> BalanceReport:
    """Deviation ``|(1-a) D(s1,s0) - a D(s0,s1)| / (D(s0,s1) + D(s1,s0))``."""
    _pair_check(k, s0, s1)
    return _report(s0, s1, k.domination_score(s1, s0), k.domination_score(s0, s1), alpha)


def stubbornness_term(k: WalkKernel, s: int, kappa: float) -> float:
    d = k.graph.out_degree()[s]
    return float(d / (kappa * k.pi[s]))


def balance_influenced(k: WalkKernel, s0: int, s1: int, kappa0: float, kappa1: float,
                       alpha: float) -> BalanceReport:
    _pair_check(k, s0, s1)
    if kappa0 <= 0 or kappa1 <= 0:
        raise ValidationError("stubbornness must be positive")
    a0 = stubbornness_term(k, s0, kappa0) + k.domination_score(s1, s0)
    a1 = stubbornness_term(k, s1, kappa1) + k.domination_score(s0, s1)
    return _report(s0, s1, a0, a1, alpha)


def centrality_balance(g: WeightedDigraph, s0: int, s1: int, kappa=None) -> float:
    """Deviation from 1/2 on an undirected graph via information centrality.

    ``kappa`` is an optional ``(kappa0, kappa1)`` pair selecting the
    influenced model.
    """
    if s0 == s1:
        raise ValidationError("the two leaders must differ")
    lp = _undirected_laplacian_pinv(g)
    theta = information_centrality(g, l_pinv=lp)
    r = effective_resistance(g, s0, s1, l_pinv=lp)
    if kappa is None:
        return abs(1.0 / theta[s0] - 1.0 / theta[s1]) / (2.0 * r)
    k0, k1 = kappa
    num = 1.0 / theta[s0] + 1.0 / k0 - 1.0 / theta[s1] - 1.0 / k1
    return abs(num) / (2.0 * (r + 1.0 / k0 + 1.0 / k1))


class Heuristic(str, enum.Enum):
    OPTIMAL = "optimal"
    DS = "ds"
    ER = "er"
    DSK = "dsk"
    RANDOM = "random"


TIE_RTOL = 1e-12


def _argbest(values, candidates, minimize=True):
    values = np.asarray(values) if minimize else -np.asarray(values)
    tol = TIE_RTOL * max(1.0, float(np.max(np.abs(values))))
    # candidates are sorted, so the first near-tie is the smallest id
    return candidates[int(np.flatnonzero(values <= values.min() + tol)[0])]


def single_leader_scores(k: WalkKernel, s0: int, candidates, alpha: float,
                         model=Model.ABSOLUTE, kappa=None) -> dict[str, np.ndarray]:
    """Per-candidate balance quantities used by the heuristics.

    Returns arrays aligned with ``candidates``: ``f`` (exact deviation under
    ``model``), ``ds`` (absolute numerator magnitude), ``er`` (commute-style
    denominator) and ``dsk`` (influenced numerator magnitude).
    """
    model = Model(model)
    lp = k.scriptL_pinv
    c = np.asarray(candidates, dtype=np.intp)
    d10 = lp[s0, s0] - lp[s0, c]
    d01 = lp[c, c] - lp[c, s0]
    denom_abs = d01 + d10
    ds = np.abs((1 - alpha) * d10 - alpha * d01)
    out = {"ds": ds, "er": denom_abs}
    if kappa is None:
        kappa = np.ones(k.n)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (k.n,))
    deg = k.graph.out_degree()
    t0 = deg[s0] / (kappa[s0] * k.pi[s0])
    t1 = deg[c] / (kappa[c] * k.pi[c])
    a0 = t0 + d10
    a1 = t1 + d01
    out["dsk"] = np.abs((1 - alpha) * a0 - alpha * a1)
    if model is Model.ABSOLUTE:
        out["f"] = ds / denom_abs
        out["mu"] = d10 / denom_abs
    else:
        out["f"] = out["dsk"] / (a0 + a1)
        out["mu"] = a0 / (a0 + a1)
    return out


def select_single(k: WalkKernel, s0: int, alpha: float, heuristic=Heuristic.OPTIMAL,
                  model=Model.ABSOLUTE, kappa=None, candidates=None, seed=None) -> int:
    """Choose one party-1 leader against the fixed party-0 leader ``s0``.

    OPTIMAL minimizes the exact deviation, DS the absolute numerator, ER
    maximizes the commute-style denominator, DSK minimizes the influenced
    numerator and RANDOM draws uniformly with ``seed``. Ties go to the
    smallest node id.
    """
    heuristic = Heuristic(heuristic)
    if candidates is None:
        candidates = [v for v in range(k.n) if v != s0]
    candidates = sorted(int(v) for v in candidates if v != s0)
    if not candidates:
        raise ValidationError("no candidates to choose from")
    if heuristic is Heuristic.RANDOM:
        rng = np.random.default_rng(seed)
        return candidates[int(rng.integers(len(candidates)))]
    scores = single_leader_scores(k, s0, candidates, alpha, model, kappa)
    if heuristic is Heuristic.OPTIMAL:
        return _argbest(scores["f"], candidates)
    if heuristic is Heuristic.DS:
        return _argbest(scores["ds"], candidates)
    if heuristic is Heuristic.ER:
        return _argbest(scores["er"], candidates, minimize=False)
    return _argbest(scores["dsk"], candidates)


def evaluate_single(k: WalkKernel, s0: int, s1: int, alpha: float, model=Model.ABSOLUTE,
                    kappa=None) -> BalanceReport:
    model = Model(model)
    if model is Model.ABSOLUTE:
        return balance_absolute(k, s0, s1, alpha)
    kappa = np.ones(k.n) if kappa is None else np.broadcast_to(np.asarray(kappa, float), (k.n,))
    return balance_influenced(k, s0, s1, float(kappa[s0]), float(kappa[s1]), alpha)
