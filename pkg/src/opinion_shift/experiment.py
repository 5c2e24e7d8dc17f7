"""Random graph generation and the experiment harness behind ``opinion-shift experiment``."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import OpinionShiftError, ValidationError
from .graph import (CUBIC_GRAPHS, Model, WeightedDigraph, gadget_graph, is_strongly_connected,
                    load_edge_list)
from .selector import (ExhaustiveSearch, SelectionProblem, bound_search, greedy_fast,
                       propositional_domination, random_selection)
from .single_leader import Heuristic, evaluate_single, select_single
from .walks import WalkKernel

THREADS_ENV = "OPINION_SHIFT_THREADS"


def substream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Independent generator for a named purpose derived from one master seed."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode()), *extra]))


def generate_er(n: int, p: float, seed=None, require_connected: bool = True,
                max_tries: int = 100) -> WeightedDigraph:
    """Undirected G(n, p) with unit weights, stored as a bidirectional digraph.

    With ``require_connected`` the draw is repeated (same generator stream)
    until it is connected, at most ``max_tries`` times.
    """
    if not 0 < p <= 1:
        raise ValidationError(f"edge probability must lie in (0, 1], got {p}")
    if n < 1:
        raise ValidationError("n must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    for _ in range(max_tries):
        keep = rng.random(len(iu[0])) < p
        edges = [(int(u), int(v)) for u, v in zip(iu[0][keep], iu[1][keep])]
        g = WeightedDigraph.from_undirected(n, edges)
        if not require_connected or is_strongly_connected(g):
            return g
    raise ValidationError(f"G({n}, {p}) was not connected in {max_tries} draws")


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


@dataclass
class ExperimentSpec:
    """Declarative description of one experiment.

    ``kind`` is ``selection`` (methods against each other over an alpha x k
    grid), ``delta-sweep`` (bound search for each delta) or ``single`` (one
    leader per party, every heuristic). ``generator`` is a mapping with
    ``type`` in ``er`` (``n``, ``p``), ``edge-list`` (``path``,
    ``undirected``, ``dedupe``) or ``gadget`` (``cubic``).
    """

    kind: str = "selection"
    generator: dict = field(default_factory=lambda: {"type": "er", "n": 30, "p": 0.1})
    model: str = "absolute"
    s0: dict = field(default_factory=lambda: {"random": 3})
    alphas: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    ks: list = field(default_factory=lambda: [1, 2, 3, 4, 5])
    deltas: list = field(default_factory=lambda: [0.25, 0.1, 0.01, 0.001, 0.0001])
    delta: float = 1e-4
    kappa: float = 1.0
    repetitions: int = 1
    methods: list = field(default_factory=lambda: ["bound-search", "brute-force"])
    heuristics: list = field(default_factory=lambda: [h.value for h in Heuristic])
    seed: int = 0
    output: str | None = None
    brute_force_budget: int = 2_000_000

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown experiment fields: {sorted(unknown)}")
        spec = cls(**data)
        spec.validate()
        return spec

    def validate(self):
        if self.kind not in ("selection", "delta-sweep", "single"):
            raise ValidationError(f"unknown experiment kind {self.kind!r}")
        Model(self.model)
        if self.repetitions < 1:
            raise ValidationError("repetitions must be at least 1")
        if self.generator.get("type") not in ("er", "edge-list", "gadget"):
            raise ValidationError(f"unknown generator {self.generator!r}")
        allowed = {"bound-search", "greedy", "brute-force", "pds", "random"}
        bad = set(self.methods) - allowed
        if bad:
            raise ValidationError(f"unknown methods {sorted(bad)}")
        for h in self.heuristics:
            Heuristic(h)


def _build_graph(spec: ExperimentSpec, rep: int):
    gen = spec.generator
    kind = gen["type"]
    if kind == "er":
        return generate_er(int(gen["n"]), float(gen["p"]), substream(spec.seed, "graph", rep)), None
    if kind == "edge-list":
        with open(gen["path"], encoding="utf-8") as fh:
            g = load_edge_list(fh, bool(gen.get("undirected", False)), bool(gen.get("dedupe", False)))
        return g, None
    cubic = CUBIC_GRAPHS[gen.get("cubic", "petersen")]()
    return gadget_graph(cubic, float(gen.get("star_weight", 3.0)))


def _choose_s0(spec: ExperimentSpec, g: WeightedDigraph, rep: int, center):
    if "explicit" in spec.s0:
        return frozenset(g.index(lab) for lab in spec.s0["explicit"])
    if spec.s0.get("center") and center is not None:
        return frozenset([center])
    count = int(spec.s0.get("random", 1))
    rng = substream(spec.seed, "s0", rep)
    return frozenset(int(v) for v in rng.choice(g.n, size=count, replace=False))


def _fmt_set(g, s1):
    return " ".join(g.label(v) for v in sorted(s1))


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, (time.perf_counter() - t0) * 1000.0


def _selection_rows(spec, rep, g, s0):
    rows = []
    kmax = max(spec.ks)
    base = SelectionProblem(g, s0, spec.alphas[0], kmax, model=spec.model,
                            kappa=spec.kappa, delta=spec.delta)
    search = ExhaustiveSearch(base, spec.brute_force_budget)
    deltas = spec.deltas if spec.kind == "delta-sweep" else [spec.delta]
    for alpha in spec.alphas:
        for k in spec.ks:
            for delta in deltas:
                problem = SelectionProblem(g, s0, alpha, k, model=spec.model,
                                           kappa=spec.kappa, delta=delta)
                for method in spec.methods:
                    if method == "brute-force" and delta != deltas[0]:
                        continue
                    row = {"rep": rep, "alpha": alpha, "k": k, "delta": delta, "method": method}
                    try:
                        if method == "bound-search":
                            res, ms = _timed(lambda: bound_search(problem))
                            s1, mu = res.s1, res.mu
                        elif method == "greedy":
                            (s1, mu), ms = _timed(lambda: greedy_fast(problem, 1.0))
                        elif method == "brute-force":
                            (s1, mu), ms = _timed(lambda: search.best(alpha, k))
                        elif method == "pds":
                            (s1, mu), ms = _timed(lambda: propositional_domination(problem))
                        else:
                            rng_seed = substream(spec.seed, "heuristics", rep, k).integers(2**63)
                            (s1, mu), ms = _timed(lambda: random_selection(problem, rng_seed))
                        row.update(mu=mu, f=abs(mu - alpha), s1=_fmt_set(g, s1),
                                   runtime_ms=ms, error="")
                    except OpinionShiftError as exc:
                        row.update(mu=math.nan, f=math.nan, s1="", runtime_ms=0.0, error=str(exc))
                    rows.append(row)
    return rows


def _single_rows(spec, rep, g, s0):
    rows = []
    if len(s0) != 1:
        raise ValidationError("single-leader experiments need exactly one S0 leader")
    (s,) = tuple(s0)
    kernel = WalkKernel(g)
    kappa = np.full(g.n, float(spec.kappa))
    for alpha in spec.alphas:
        for h in spec.heuristics:
            row = {"rep": rep, "alpha": alpha, "k": 1, "delta": 0.0, "method": h}
            try:
                rng_seed = substream(spec.seed, "heuristics", rep).integers(2**63)
                node, ms = _timed(lambda: select_single(kernel, s, alpha, h, spec.model, kappa,
                                                        seed=rng_seed))
                report = evaluate_single(kernel, s, node, alpha, spec.model, kappa)
                row.update(mu=report.mu, f=abs(report.mu - alpha), s1=g.label(node),
                           runtime_ms=ms, error="")
            except OpinionShiftError as exc:
                row.update(mu=math.nan, f=math.nan, s1="", runtime_ms=0.0, error=str(exc))
            rows.append(row)
    return rows


def _run_rep(spec, rep):
    g, center = _build_graph(spec, rep)
    s0 = _choose_s0(spec, g, rep, center)
    if spec.kind == "single":
        rows = _single_rows(spec, rep, g, s0)
    else:
        rows = _selection_rows(spec, rep, g, s0)
    s0_text = _fmt_set(g, s0)
    for row in rows:
        row["model"] = spec.model
        row["s0"] = s0_text
    return rows


COLUMNS = ["rep", "model", "alpha", "k", "delta", "method", "mu", "f", "s0", "s1",
           "runtime_ms", "error"]


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list
    aggregates: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows + self.aggregates:
            writer.writerow({k: _fmt(row.get(k, "")) for k in COLUMNS})
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {"spec": asdict(self.spec), "rows": self.rows, "aggregates": self.aggregates}
        return json.dumps(payload, indent=2, sort_keys=True, default=str)


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _sort_key(row):
    return (row["rep"] if isinstance(row["rep"], int) else 1 << 30, row["alpha"], row["k"],
            row["delta"], row["method"])


def aggregate(rows) -> list:
    groups: dict = {}
    for row in rows:
        if row.get("error"):
            continue
        groups.setdefault((row["alpha"], row["k"], row["delta"], row["method"]), []).append(row)
    out = []
    for (alpha, k, delta, method), members in sorted(groups.items()):
        out.append({
            "rep": "mean", "model": members[0]["model"], "alpha": alpha, "k": k,
            "delta": delta, "method": method,
            "mu": float(np.mean([r["mu"] for r in members])),
            "f": float(np.mean([r["f"] for r in members])),
            "s0": "", "s1": "",
            "runtime_ms": float(np.mean([r["runtime_ms"] for r in members])),
            "error": "",
        })
    return out


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run every repetition, one row per (alpha, k, delta, method) plus mean rows.

    Failures are recorded on their row and the run continues. Rows are sorted
    before they are returned, so output order does not depend on threading.
    """
    spec.validate()
    reps = range(spec.repetitions)
    workers = min(worker_count(), spec.repetitions)
    rows = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(lambda r: _run_rep(spec, r), reps):
                rows.extend(chunk)
    else:
        for rep in reps:
            rows.extend(_run_rep(spec, rep))
    rows.sort(key=_sort_key)
    result = ExperimentResult(spec, rows, aggregate(rows))
    if spec.output:
        with open(spec.output + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(result.to_csv())
        with open(spec.output + ".json", "w", encoding="utf-8") as fh:
            fh.write(result.to_json())
    return result
