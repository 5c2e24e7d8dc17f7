"""Choosing party-1 leaders so the average opinion lands near a target.

The search runs a bounded greedy (maximize ``mu`` subject to ``mu <= b`` and
``|S1| <= k``) inside a bisection over the bound ``b``. Both a naive greedy
and an incremental one (block-removal / Sherman-Morrison updates, O(n^2) per
step) are provided; they select the same sets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .dynamics import OpinionObjective
from .errors import BudgetExceededError, NumericalError, ValidationError
from .graph import Model, WeightedDigraph, as_kappa
from .numerics import block_remove_inverse, sherman_morrison_update
from .single_leader import single_leader_scores
from .walks import WalkKernel

# Scores within this relative gap count as tied; the smaller node id wins.
TIE_RTOL = 1e-12
DEFAULT_BUDGET = 2_000_000


@dataclass(frozen=True)
class SelectionProblem:
    graph: WeightedDigraph
    s0: frozenset
    alpha: float
    k: int
    candidates: tuple = None
    model: Model = Model.ABSOLUTE
    kappa: np.ndarray | None = field(default=None, compare=False)
    delta: float = 1e-4

    def __post_init__(self):
        g = self.graph
        s0 = frozenset(int(v) for v in self.s0)
        object.__setattr__(self, "s0", s0)
        object.__setattr__(self, "model", Model(self.model))
        if not s0:
            raise ValidationError("leader set S0 must be nonempty")
        if self.candidates is None:
            cand = tuple(v for v in range(g.n) if v not in s0)
        else:
            cand = tuple(sorted({int(v) for v in self.candidates}))
        object.__setattr__(self, "candidates", cand)
        if set(cand) & s0:
            raise ValidationError("candidate set must not intersect S0")
        for v in set(cand) | s0:
            if not 0 <= v < g.n:
                raise ValidationError(f"node id {v} is outside 0..{g.n - 1}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 1 <= self.k <= len(cand):
            raise ValidationError(f"k must satisfy 1 <= k <= |Q| = {len(cand)}, got {self.k}")
        if self.model is Model.INFLUENCED:
            object.__setattr__(self, "kappa", as_kappa(self.kappa, g.n))
        else:
            object.__setattr__(self, "kappa", None)

    @cached_property
    def objective(self) -> OpinionObjective:
        return OpinionObjective(self.graph, self.s0, self.model, self.kappa)

    def mu(self, s1) -> float:
        return self.objective.mu(s1)


@dataclass(frozen=True)
class TraceEntry:
    b_hat: float
    mu: float
    accepted: bool
    d_min: float
    b_min: float
    b_max: float


@dataclass(frozen=True)
class SelectionResult:
    s1: frozenset
    mu: float
    f: float
    alpha: float
    trace: tuple = ()
    iterations: int = 0
    best_bound: float | None = None

    def to_dict(self, labels=None):
        ids = sorted(self.s1)
        return {
            "s1": [labels[v] for v in ids] if labels is not None else ids,
            "mu": self.mu,
            "f": self.f,
            "alpha": self.alpha,
            "iterations": self.iterations,
            "best_bound": self.best_bound,
            "trace": [vars(t) for t in self.trace],
        }


def _pick(scores, ids):
    """Index of the best score, preferring the smallest id among near-ties."""
    scores = np.asarray(scores)
    best = scores.max()
    tied = np.flatnonzero(scores >= best - TIE_RTOL * (1.0 + abs(best)))
    return int(min(tied, key=lambda i: ids[i]))


# -- greedy ------------------------------------------------------------------


def greedy(problem: SelectionProblem, b_hat: float) -> tuple[frozenset, float]:
    """Bounded greedy by direct re-solves of every candidate at every step.

    The candidate maximizing ``mu(P + u)`` is removed from the pool each step
    and kept only if it respects the bound.
    """
    obj = problem.objective
    pool = list(problem.candidates)
    chosen: list[int] = []
    while pool and len(chosen) < problem.k:
        scores = [obj.mu(chosen + [u]) for u in pool]
        i = _pick(scores, pool)
        if scores[i] <= b_hat:
            chosen.append(pool[i])
        del pool[i]
    return frozenset(chosen), obj.mu(chosen)


def greedy_fast(problem: SelectionProblem, b_hat: float, *, return_scores=False):
    """Same contract as :func:`greedy` with incremental inverse updates.

    With ``return_scores`` the per-step candidate scores are also returned as
    a list of ``(pool, mu_values)`` pairs.
    """
    if problem.model is Model.ABSOLUTE:
        return _greedy_fast_absolute(problem, b_hat, return_scores)
    return _greedy_fast_influenced(problem, b_hat, return_scores)


def _inverse(mat):
    try:
        inv = np.linalg.inv(mat)
    except np.linalg.LinAlgError:
        raise NumericalError("system matrix is singular") from None
    if not np.all(np.isfinite(inv)):
        raise NumericalError("system matrix is singular")
    return inv


def _greedy_fast_absolute(problem, b_hat, return_scores):
    obj = problem.objective
    n = obj.n
    adj = obj.adjacency
    followers = [v for v in range(n) if v not in problem.s0]
    inv = _inverse(obj.laplacian[np.ix_(followers, followers)])
    a_ff = adj[np.ix_(followers, followers)]
    drive = np.zeros(len(followers))  # weight from each follower into S1
    x = np.zeros(len(followers))
    pool = list(problem.candidates)
    chosen: list[int] = []
    history = []
    while pool and len(chosen) < problem.k:
        pos = {v: i for i, v in enumerate(followers)}
        idx = np.array([pos[u] for u in pool], dtype=np.intp)
        colsum = inv.sum(axis=0)
        gain_in = colsum @ a_ff
        diag_ma = np.einsum("ij,ji->i", inv, a_ff)
        pivots = inv[idx, idx]
        total = x.sum()
        with np.errstate(divide="ignore", invalid="ignore"):
            sums = (total + gain_in[idx]
                    - colsum[idx] * (x[idx] + diag_ma[idx]) / pivots)
        scores = (len(chosen) + 1 + sums) / n
        bad = ~(np.abs(pivots) > 1e-14) | ~np.isfinite(scores)
        for j in np.flatnonzero(bad):
            # degenerate pivot: fall back to a direct solve for this candidate
            scores[j] = obj.mu(chosen + [pool[j]])
        if return_scores:
            history.append((list(pool), scores.copy()))
        i = _pick(scores, pool)
        s = pool[i]
        if scores[i] <= b_hat:
            chosen.append(s)
            j = pos[s]
            drive = drive + a_ff[:, j]
            try:
                inv = block_remove_inverse(inv, j)
            except NumericalError:
                inv = None
            followers.pop(j)
            drive = np.delete(drive, j)
            a_ff = np.delete(np.delete(a_ff, j, axis=0), j, axis=1)
            if inv is None:
                inv = _inverse(obj.laplacian[np.ix_(followers, followers)])
            x = inv @ drive
        del pool[i]
    mu = (len(chosen) + x.sum()) / n
    result = (frozenset(chosen), float(mu))
    return (result, history) if return_scores else result


def _greedy_fast_influenced(problem, b_hat, return_scores):
    obj = problem.objective
    n = obj.n
    kappa = obj.kappa
    inv = _inverse(obj._base)
    drive = np.zeros(n)
    x = np.zeros(n)
    pool = list(problem.candidates)
    chosen: list[int] = []
    history = []
    while pool and len(chosen) < problem.k:
        idx = np.array(pool, dtype=np.intp)
        colsum = inv.sum(axis=0)
        kap = kappa[idx]
        sums = x.sum() + kap * colsum[idx] * (1.0 - x[idx]) / (1.0 + kap * inv[idx, idx])
        scores = sums / n
        if return_scores:
            history.append((list(pool), scores.copy()))
        i = _pick(scores, pool)
        s = pool[i]
        if scores[i] <= b_hat:
            chosen.append(s)
            e = np.zeros(n)
            e[s] = 1.0
            try:
                inv = sherman_morrison_update(inv, kappa[s] * e, e)
            except NumericalError:
                mat = obj._base.copy()
                mat[chosen, chosen] += kappa[chosen]
                inv = _inverse(mat)
            drive[s] = kappa[s]
            x = inv @ drive
        del pool[i]
    mu = x.sum() / n
    result = (frozenset(chosen), float(mu))
    return (result, history) if return_scores else result


# -- bound search --------------------------------------------------------------


def max_greedy_calls(delta: float) -> int:
    return 64 * max(1, math.ceil(math.log(1.0 / delta)))


def bound_search(problem: SelectionProblem, greedy_fn: Callable | None = None,
                 delta: float | None = None) -> SelectionResult:
    """Bisection over the greedy upper bound until ``b_max / b_min <= exp(delta)``.

    Returns the best set seen across all greedy calls. ``alpha == 0`` is
    answered by the empty set directly.
    """
    delta = problem.delta if delta is None else delta
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    greedy_fn = greedy_fast if greedy_fn is None else greedy_fn
    alpha = problem.alpha
    if alpha == 0.0:
        return SelectionResult(frozenset(), 0.0, 0.0, alpha, (), 0, None)

    best, best_mu = frozenset(), 0.0
    b_min, b_max = alpha, 1.0
    b_hat = 1.0
    b_best = b_hat
    d_min = alpha
    trace = []
    cap = max_greedy_calls(delta)
    limit = math.exp(delta)
    while True:
        if len(trace) >= cap:
            raise BudgetExceededError(
                f"bound search exceeded {cap} greedy calls", trace=tuple(trace))
        used = b_hat
        s, mu = greedy_fn(problem, used)
        d_hat = abs(mu - alpha)
        improved = d_hat < d_min
        if improved:
            best, best_mu, d_min, b_best = s, mu, d_hat, used
        if mu > alpha:
            while mu <= (b_min + b_max) / 2:
                b_max = (b_min + b_max) / 2
            b_hat = (b_min + b_max) / 2
        else:
            b_min = used
            if alpha + d_hat < b_max:
                b_max = alpha + d_hat
                b_hat = b_max
            else:
                b_hat = (b_min + b_max) / 2
        trace.append(TraceEntry(used, mu, improved, d_min, b_min, b_max))
        if not b_max / b_min > limit:
            break
    return SelectionResult(best, float(best_mu), float(abs(best_mu - alpha)), alpha,
                           tuple(trace), len(trace), b_best)


# -- exhaustive search ---------------------------------------------------------


class ExhaustiveSearch:
    """Enumerates leader sets by size, then lexicographically, caching ``mu``.

    Every distinct set counts once against ``budget``.
    """

    def __init__(self, problem: SelectionProblem, budget: int = DEFAULT_BUDGET):
        self.problem = problem
        self.budget = budget
        self.evaluations = 0
        self._tables: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _reserve(self, size):
        count = math.comb(len(self.problem.candidates), size)
        if self.evaluations + count > self.budget:
            raise BudgetExceededError(
                f"exhaustive search needs more than {self.budget} evaluations; "
                "use bound_search for instances this large")
        self.evaluations += count
        return count

    def table(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        if size not in self._tables:
            count = self._reserve(size)
            cand = self.problem.candidates
            flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(cand, size)),
                               dtype=np.intp, count=count * size)
            subsets = flat.reshape(count, size)
            self._tables[size] = (subsets, self.problem.objective.mu_batch(subsets))
        return self._tables[size]

    def check_budget(self, max_size: int):
        needed = sum(math.comb(len(self.problem.candidates), j)
                     for j in range(max_size + 1) if j not in self._tables)
        if self.evaluations + needed > self.budget:
            raise BudgetExceededError(
                f"exhaustive search over sets of size <= {max_size} needs {needed} "
                f"evaluations (budget {self.budget}); use bound_search instead")

    def best(self, alpha: float | None = None, k: int | None = None) -> tuple[frozenset, float]:
        alpha = self.problem.alpha if alpha is None else alpha
        k = self.problem.k if k is None else k
        self.check_budget(k)
        best_set, best_mu, best_f = (), 0.0, abs(alpha)
        for size in range(1, k + 1):
            subsets, mus = self.table(size)
            fs = np.abs(mus - alpha)
            i = int(np.argmin(fs))
            if fs[i] < best_f:
                best_set, best_mu, best_f = tuple(subsets[i]), float(mus[i]), fs[i]
        return frozenset(int(v) for v in best_set), best_mu

    def min_cover(self, b: float, max_size: int | None = None) -> float:
        """Smallest ``|S|`` with ``mu(S) >= b``; ``inf`` when even ``Q`` falls short.

        With ``max_size`` the scan stops early and returns ``inf`` if no set of
        at most that size reaches ``b`` (useful when only small values matter).
        """
        if b <= 0:
            return 0
        q = len(self.problem.candidates)
        if self.problem.mu(self.problem.candidates) < b:
            return math.inf
        top = q if max_size is None else min(q, max_size)
        for size in range(1, top + 1):
            _, mus = self.table(size)
            if np.any(mus >= b):
                return size
        return math.inf


def brute_force(problem: SelectionProblem, budget: int = DEFAULT_BUDGET) -> tuple[frozenset, float]:
    """Exact minimizer of ``|mu(P) - alpha|`` over ``P`` in ``Q`` with ``|P| <= k``.

    Ties go to the smaller set, then the lexicographically smaller one.
    """
    return ExhaustiveSearch(problem, budget).best()


def min_cover_number(problem: SelectionProblem, b: float, budget: int = DEFAULT_BUDGET):
    return ExhaustiveSearch(problem, budget).min_cover(b)


def approximation_zeta(problem: SelectionProblem, search: ExhaustiveSearch | None = None) -> float:
    """``max(1/e, 1/k)`` with ``k`` the minimum cover number of ``alpha``.

    Only covers of size one or two can beat ``1/e``, so larger sizes are
    never enumerated.
    """
    search = ExhaustiveSearch(problem) if search is None else search
    cover = search.min_cover(problem.alpha, max_size=2)
    if cover == 0:
        return 1.0
    return max(1.0 / math.e, 1.0 / cover)


def approximation_band(mu_star: float, zeta: float, delta: float) -> tuple[float, float]:
    """Interval guaranteed to contain the bound-search ``mu`` around the optimum."""
    lo = (1.0 - zeta) * math.exp(-delta) * mu_star
    hi = math.inf if zeta >= 1.0 else math.exp(delta) * mu_star / (1.0 - zeta)
    return lo, hi


def is_eps_approx(a: float, b: float, eps: float) -> bool:
    """``exp(-eps) a <= b <= exp(eps) a``."""
    return math.exp(-eps) * a <= b <= math.exp(eps) * a


# -- structural checks -------------------------------------------------------


@dataclass(frozen=True)
class SubmodularityReport:
    trials: int
    monotone_violations: int
    submodular_violations: int
    worst_gap: float


def check_submodularity(g: WeightedDigraph, s0, model=Model.ABSOLUTE, kappa=None,
                        trials: int = 200, seed=None, candidates=None,
                        slack: float = 1e-9) -> SubmodularityReport:
    """Random checks of ``mu(T) >= mu(S)`` and diminishing returns for ``S <= T``."""
    obj = OpinionObjective(g, s0, model, kappa)
    pool = sorted(set(range(g.n)) - obj.s0 if candidates is None else set(candidates))
    if len(pool) < 1:
        raise ValidationError("need at least one candidate")
    rng = np.random.default_rng(seed)
    mono = sub = 0
    worst = 0.0
    for _ in range(trials):
        u = pool[int(rng.integers(len(pool)))]
        rest = [v for v in pool if v != u]
        t = [v for v in rest if rng.random() < rng.random()]
        s = [v for v in t if rng.random() < 0.5]
        mu_s, mu_t = obj.mu(s), obj.mu(t)
        gain_s = obj.mu(s + [u]) - mu_s
        gain_t = obj.mu(t + [u]) - mu_t
        if mu_t < mu_s - slack:
            mono += 1
        if gain_s < gain_t - slack:
            sub += 1
        worst = max(worst, mu_s - mu_t, gain_t - gain_s)
    return SubmodularityReport(trials, mono, sub, worst)


# -- baselines ---------------------------------------------------------------


def propositional_domination(problem: SelectionProblem) -> tuple[frozenset, float]:
    """Pair each party-0 leader, in id order, with its best single-leader match.

    Each match minimizes the single-pair deviation among the remaining
    candidates; at most ``k`` leaders are picked.
    """
    kernel = WalkKernel(problem.graph)
    remaining = list(problem.candidates)
    chosen = []
    for s in sorted(problem.s0):
        if len(chosen) >= problem.k or not remaining:
            break
        f = single_leader_scores(kernel, s, remaining, problem.alpha, problem.model,
                                 problem.kappa)["f"]
        i = int(np.flatnonzero(f == f.min())[0])
        chosen.append(remaining.pop(i))
    return frozenset(chosen), problem.mu(chosen)


def random_selection(problem: SelectionProblem, seed=None) -> tuple[frozenset, float]:
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(problem.candidates), size=problem.k, replace=False)
    s1 = frozenset(problem.candidates[i] for i in picks)
    return s1, problem.mu(s1)
