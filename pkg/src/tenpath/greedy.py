"""Three-phase greedy path construction and the multi-cost-function driver.

A single greedy pass works in three phases:

1. fold tensors with identical index sets (elementwise products),
2. repeatedly contract the cheapest pair among terms sharing at least one
   index, using a min-heap with lazy invalidation of stale entries,
3. pair off the remaining mutually disjoint terms, smallest sizes first.

:func:`optimize` runs one deterministic pass per cost function, picks the
function whose path scores best under the configured objective, then spends
the remaining budget on randomized passes with that function.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import math
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .costs import CostFnSpec, default_cost_fn_set, resolve
from .evaluate import evaluate
from .model import ContractionPath, PathStats, TensorNetwork

__all__ = [
    "BudgetConfigError",
    "OptimizeConfig",
    "OptimizeReport",
    "derive_trial_seed",
    "greedy_path",
    "optimize",
]

_MASK64 = (1 << 64) - 1


class BudgetConfigError(ValueError):
    """The optimizer budget is missing, doubled, or out of range."""


def derive_trial_seed(seed: int, trial: int) -> int:
    """Mix ``(seed, trial)`` into an independent 64-bit stream seed.

    Splitmix-style finalizer over a golden-ratio increment, so trials are
    reproducible and independent of execution order.
    """
    z = (seed + (trial + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _ssa_to_linear(ssa_path: list[tuple[int, int]], n: int) -> ContractionPath:
    """Convert append-only term ids to positions into the shrinking list."""
    ids = list(range(n))
    path = []
    ssa = n
    for pair in ssa_path:
        pos = sorted(bisect.bisect_left(ids, s) for s in pair)
        for p in reversed(pos):
            ids.pop(p)
        ids.append(ssa)
        ssa += 1
        path.append((pos[0], pos[1]))
    return tuple(path)


def _sample_pop(heap, nodes, rng, top_b, tau):
    """Pop one candidate, drawn among the up-to-``top_b`` cheapest alive ones.

    Weights follow exp(-(cost - cost_min) / (tau * scale)) with scale
    normalized by ``max(1, |cost_min|)`` since raw costs span many orders of
    magnitude. Unchosen candidates go back on the heap.
    """
    choices = []
    while heap and len(choices) < top_b:
        entry = heapq.heappop(heap)
        if entry[2] not in nodes or entry[3] not in nodes:
            continue
        choices.append(entry)
    if not choices:
        return None
    if len(choices) == 1:
        return choices[0]
    cost_min = choices[0][0]
    scale = max(1.0, abs(cost_min))
    weights = []
    for entry in choices:
        delta = entry[0] - cost_min
        if math.isnan(delta):  # inf - inf: indistinguishable, weigh equally
            delta = 0.0
        weights.append(math.exp(-delta / (tau * scale)))
    pick = rng.choices(range(len(choices)), weights=weights)[0]
    chosen = choices.pop(pick)
    for entry in choices:
        heapq.heappush(heap, entry)
    return chosen


def greedy_path(
    network: TensorNetwork,
    cost_fn: CostFnSpec,
    rng: random.Random | None = None,
    top_b: int = 4,
    tau: float = 1.0,
) -> ContractionPath:
    """Build one contraction path with the three-phase greedy algorithm.

    With ``rng=None`` the pass is deterministic: heap ties break by smaller
    result size, then smaller positions, so results are reproducible across
    platforms. With an ``rng``, phase-2 pops sample among the ``top_b``
    cheapest candidates (see :func:`_sample_pop`); phases 1 and 3 stay
    deterministic.
    """
    n = network.num_terms
    if n <= 1:
        return ()
    score = resolve(cost_fn)

    # Intern labels as ints; all bookkeeping below works on int sets.
    ix_of: dict[str, int] = {}
    sizes_f: list[float] = []
    terms: list[frozenset[int]] = []
    for term in network.inputs:
        legs = set()
        for label in term:
            ix = ix_of.get(label)
            if ix is None:
                ix = ix_of[label] = len(sizes_f)
                sizes_f.append(float(network.sizes[label]))
            legs.add(ix)
        terms.append(frozenset(legs))
    output = frozenset(ix_of[label] for label in network.output)

    nodes: dict[int, frozenset[int]] = {}  # live term id -> index set
    edges: dict[int, set[int]] = {}  # index -> live term ids containing it
    node_size: dict[int, float] = {}
    ssa_path: list[tuple[int, int]] = []
    next_id = n

    def add_node(term_id: int, legs: frozenset[int], size: float) -> None:
        nodes[term_id] = legs
        node_size[term_id] = size
        for ix in legs:
            edges.setdefault(ix, set()).add(term_id)

    def pop_node(term_id: int) -> frozenset[int]:
        legs = nodes.pop(term_id)
        del node_size[term_id]
        for ix in legs:
            group = edges[ix]
            group.discard(term_id)
            if not group:
                del edges[ix]
        return legs

    def contract(i: int, j: int) -> int:
        # Recompute retention from live state; used off the hot path.
        nonlocal next_id
        legs_i = pop_node(i)
        legs_j = pop_node(j)
        size = 1.0
        keep = set()
        for ix in legs_i | legs_j:
            if ix in output or edges.get(ix):
                keep.add(ix)
                size *= sizes_f[ix]
        k = next_id
        next_id += 1
        add_node(k, frozenset(keep), size)
        ssa_path.append((i, j) if i < j else (j, i))
        return k

    for term_id, legs in enumerate(terms):
        size = 1.0
        for ix in legs:
            size *= sizes_f[ix]
        add_node(term_id, legs, size)

    # Phase 1: fold terms with identical index sets, in position order.
    group_rep: dict[frozenset[int], int] = {}
    for term_id in range(n):
        key = terms[term_id]
        rep = group_rep.get(key)
        if rep is None:
            group_rep[key] = term_id
        else:
            group_rep[key] = contract(rep, term_id)

    # Phase 2: cheapest pair among terms sharing an index, lazy stale entries.
    #
    # Candidates are scored from the shared indices alone: every non-shared
    # index of a live term is necessarily retained (it sits in the output or
    # some other live term, an invariant the retention rule maintains), so
    # size12 follows from the cached term sizes by dividing shared extents
    # back out. The divisions are exact for integral doubles because each
    # divisor is a sub-product of its dividend. The retained index set is
    # only recomputed for the winning pair of each step, which keeps per-step
    # work proportional to the new candidates generated.
    heap: list[tuple[float, float, int, int]] = []

    def push_candidate(i: int, j: int) -> None:
        if i > j:
            i, j = j, i
        shared = nodes[i] & nodes[j]
        dup = 1.0  # shared extents, counted twice in size_i * size_j
        summed = 1.0  # extents summed away entirely
        removed = 0
        for ix in shared:
            extent = sizes_f[ix]
            dup *= extent
            if len(edges[ix]) == 2 and ix not in output:
                summed *= extent
                removed += 1
        size12 = (node_size[i] / dup) * (node_size[j] / summed)
        if math.isnan(size12):  # both factors saturated
            size12 = math.inf
        cost = score(node_size[i], node_size[j], size12, removed)
        heapq.heappush(heap, (cost, size12, i, j))

    def neighbors(term_id: int) -> set[int]:
        near: set[int] = set()
        for ix in nodes[term_id]:
            near.update(edges[ix])
        near.discard(term_id)
        return near

    for i in sorted(nodes):
        for j in neighbors(i):
            if j > i:
                push_candidate(i, j)

    while heap:
        if rng is None:
            entry = heapq.heappop(heap)
            if entry[2] not in nodes or entry[3] not in nodes:
                continue
        else:
            entry = _sample_pop(heap, nodes, rng, top_b, tau)
            if entry is None:
                break
        k = contract(entry[2], entry[3])
        for other in neighbors(k):
            push_candidate(k, other)

    # Phase 3: outer products, smallest pair of term sizes first.
    if len(nodes) > 1:
        outer = [(node_size[i], i) for i in nodes]
        heapq.heapify(outer)
        while len(outer) > 1:
            _, i = heapq.heappop(outer)
            _, j = heapq.heappop(outer)
            k = contract(i, j)
            heapq.heappush(outer, (node_size[k], k))

    return _ssa_to_linear(ssa_path, n)


@dataclass
class OptimizeConfig:
    """Settings for :func:`optimize`.

    Exactly one of ``path_count`` and ``wall_clock_ms`` must be set.
    ``cost_fns`` is either the string ``"auto"`` (the full default set) or an
    explicit sequence of specs. ``top_b`` and ``tau`` steer the randomized
    phase-2 sampling of stage 2.
    """

    objective: str = "flops"
    path_count: int | None = None
    wall_clock_ms: int | None = None
    seed: int = 0
    cost_fns: Sequence[CostFnSpec] | str = "auto"
    top_b: int = 4
    tau: float = 1.0
    threads: int = 1

    def __post_init__(self) -> None:
        if self.objective == "max-size":
            self.objective = "size"
        if self.objective not in ("flops", "size"):
            raise BudgetConfigError(
                f"objective must be 'flops' or 'size', got {self.objective!r}"
            )
        given = (self.path_count is not None) + (self.wall_clock_ms is not None)
        if given != 1:
            raise BudgetConfigError(
                "exactly one of path_count and wall_clock_ms must be set"
            )
        if self.path_count is not None and self.path_count < 1:
            raise BudgetConfigError("path_count must be >= 1")
        if self.wall_clock_ms is not None and self.wall_clock_ms < 1:
            raise BudgetConfigError("wall_clock_ms must be >= 1")
        if self.top_b < 1:
            raise BudgetConfigError("sampling top_b must be >= 1")
        if not self.tau > 0:
            raise BudgetConfigError("sampling tau must be > 0")
        if self.threads < 1:
            raise BudgetConfigError("threads must be >= 1")
        if not isinstance(self.cost_fns, str):
            self.cost_fns = tuple(self.cost_fns)
            if not self.cost_fns:
                raise BudgetConfigError("cost_fns must not be empty")
        elif self.cost_fns != "auto":
            raise BudgetConfigError(
                f"cost_fns must be 'auto' or a sequence of specs, got {self.cost_fns!r}"
            )


@dataclass
class OptimizeReport:
    """Outcome of one :func:`optimize` run."""

    best: PathStats
    per_cost_fn: dict[str, PathStats]
    paths_evaluated: int
    elapsed_ms: int
    selected_cost_fn: str
    objective: str


def _metric(stats: PathStats, objective: str) -> float:
    return stats.total_flops if objective == "flops" else stats.max_intermediate_size


def optimize(network: TensorNetwork, config: OptimizeConfig) -> OptimizeReport:
    """Search for a good contraction path under the configured budget.

    Stage 1 sweeps one deterministic greedy pass per cost function and
    selects the function whose path is best under the objective (ties break
    toward earlier entries). Stage 2 spends the rest of the budget on
    randomized passes with the selected function; trial ``t`` draws its
    randomness from ``derive_trial_seed(config.seed, t)``, so reports are
    reproducible regardless of thread count. A wall-clock budget is checked
    between passes only; a running pass is never aborted.
    """
    start = time.perf_counter()
    deadline = (
        start + config.wall_clock_ms / 1000.0
        if config.wall_clock_ms is not None
        else None
    )
    specs = (
        default_cost_fn_set() if config.cost_fns == "auto" else tuple(config.cost_fns)
    )
    objective = config.objective

    per_cost_fn: dict[str, PathStats] = {}
    paths_evaluated = 0
    best: PathStats | None = None
    selected: CostFnSpec | None = None

    # Stage 1: one deterministic pass per cost function. The first entry
    # always runs so a best path exists even under a tiny time budget.
    for spec in specs:
        if deadline is not None and per_cost_fn and time.perf_counter() > deadline:
            break
        stats = evaluate(
            network, greedy_path(network, spec), cost_fn_used=spec.name
        )
        paths_evaluated += 1
        prev = per_cost_fn.get(spec.name)
        if prev is None or _metric(stats, objective) < _metric(prev, objective):
            per_cost_fn[spec.name] = stats
        if best is None or _metric(stats, objective) < _metric(best, objective):
            best = stats
            selected = spec

    assert best is not None and selected is not None

    def run_trial(trial: int) -> PathStats:
        rng = random.Random(derive_trial_seed(config.seed, trial))
        path = greedy_path(
            network, selected, rng=rng, top_b=config.top_b, tau=config.tau
        )
        return evaluate(network, path, cost_fn_used=selected.name)

    # Stage 2: randomized passes with the selected cost function.
    trial_stats: dict[int, PathStats] = {}
    if config.path_count is not None:
        n_trials = max(0, config.path_count - paths_evaluated)
        if n_trials:
            if config.threads > 1:
                with ThreadPoolExecutor(max_workers=config.threads) as pool:
                    for trial, stats in enumerate(pool.map(run_trial, range(n_trials))):
                        trial_stats[trial] = stats
            else:
                for trial in range(n_trials):
                    trial_stats[trial] = run_trial(trial)
    else:
        counter = itertools.count()
        lock = threading.Lock()

        def worker() -> None:
            while True:
                with lock:
                    if time.perf_counter() > deadline:
                        return
                    trial = next(counter)
                stats = run_trial(trial)
                with lock:
                    trial_stats[trial] = stats

        if config.threads > 1:
            workers = [
                threading.Thread(target=worker) for _ in range(config.threads)
            ]
            for w in workers:
                w.start()
            for w in workers:
                w.join()
        else:
            worker()

    paths_evaluated += len(trial_stats)
    # Merge trials in index order so the report is schedule-independent.
    for trial in sorted(trial_stats):
        stats = trial_stats[trial]
        if _metric(stats, objective) < _metric(best, objective):
            best = stats
        prev = per_cost_fn[selected.name]
        if _metric(stats, objective) < _metric(prev, objective):
            per_cost_fn[selected.name] = stats

    elapsed_ms = int(round((time.perf_counter() - start) * 1000.0))
    return OptimizeReport(
        best=best,
        per_cost_fn=per_cost_fn,
        paths_evaluated=paths_evaluated,
        elapsed_ms=elapsed_ms,
        selected_cost_fn=selected.name,
        objective=objective,
    )
