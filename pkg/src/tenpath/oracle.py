"""Ground-truth engines for testing: exact optimal paths and naive execution.

These are deliberately slow and simple. :func:`optimal_path` does dynamic
programming over subsets of input terms, :func:`naive_contract` evaluates
the expression by brute-force iteration over every joint index assignment,
and :func:`contract_along_path` executes a path on real data so its result
can be compared against the naive value.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .evaluate import _check_length, _normalize, _replay, evaluate
from .model import PathStats, TensorNetwork, pairwise_flops, term_size

__all__ = [
    "OracleLimitError",
    "contract_along_path",
    "naive_contract",
    "optimal_path",
    "random_tensor_data",
]

_NAIVE_SPACE_LIMIT = 10**7
_REL_SLACK = 1e-12


class OracleLimitError(ValueError):
    """The instance is too large for a brute-force oracle."""


def _result_indices_fn(network: TensorNetwork):
    """Return ``result(mask) -> tuple[str, ...]`` for subsets of input terms.

    For two or more terms, a label survives the full contraction of the
    subset exactly when it occurs in the output or in some term outside the
    subset; this is independent of the contraction order within the subset.
    A single-bit mask is an uncontracted input, so its term is returned
    verbatim (labels whose holders all sit inside a subset are only summed
    away once the term takes part in a contraction).
    """
    label_mask: dict[str, int] = {}
    for pos, term in enumerate(network.inputs):
        for label in term:
            label_mask[label] = label_mask.get(label, 0) | (1 << pos)
    out_set = frozenset(network.output)
    cache: dict[int, tuple[str, ...]] = {}

    def result(mask: int) -> tuple[str, ...]:
        cached = cache.get(mask)
        if cached is not None:
            return cached
        if mask & (mask - 1) == 0:
            term = network.inputs[mask.bit_length() - 1]
            cache[mask] = term
            return term
        labels = set()
        for pos, term in enumerate(network.inputs):
            if mask & (1 << pos):
                labels.update(term)
        kept = tuple(
            sorted(
                label
                for label in labels
                if label in out_set or label_mask[label] & ~mask
            )
        )
        cache[mask] = kept
        return kept

    return result


def optimal_path(
    network: TensorNetwork, objective: str = "flops", limit: int = 10
) -> PathStats:
    """Exact minimum over all pairwise contraction orders.

    Dynamic programming over subsets of input terms: the cost of a subset is
    the best way to split it into two disjoint halves plus the cost of
    contracting the halves' results. Under ``objective="size"`` the combined
    value is the max over produced term sizes instead of the flop sum. Among
    equally optimal paths the lexicographically smallest one is returned.
    Refuses networks with more than ``limit`` terms.
    """
    if objective == "max-size":
        objective = "size"
    if objective not in ("flops", "size"):
        raise ValueError(f"objective must be 'flops' or 'size', got {objective!r}")
    n = network.num_terms
    if n > limit:
        raise OracleLimitError(
            f"exhaustive search limited to {limit} terms, network has {n}"
        )
    if n == 1:
        return evaluate(network, (), cost_fn_used="optimal")

    sizes = network.sizes
    result = _result_indices_fn(network)
    flops_objective = objective == "flops"

    def step_value(mask_a: int, mask_b: int) -> float:
        out = result(mask_a | mask_b)
        if flops_objective:
            return pairwise_flops(result(mask_a), result(mask_b), out, sizes)
        return term_size(out, sizes)

    solve_cache: dict[tuple[int, ...], float] = {}

    def solve(bases: tuple[int, ...]) -> float:
        """Optimal completion value for live terms given as term-set masks."""
        key = tuple(sorted(bases))
        cached = solve_cache.get(key)
        if cached is not None:
            return cached
        m = len(bases)
        full = (1 << m) - 1
        # orig[s]: union of base masks selected by the bit set s.
        orig = [0] * (full + 1)
        for s in range(1, full + 1):
            low = s & -s
            orig[s] = orig[s ^ low] | bases[low.bit_length() - 1]
        value: dict[int, float] = {1 << i: 0.0 for i in range(m)}
        for s in sorted(range(1, full + 1), key=int.bit_count):
            if s.bit_count() < 2:
                continue
            anchor = s & -s
            best = math.inf
            sub = (s - 1) & s
            while sub:
                if sub & anchor:
                    rest = s ^ sub
                    if flops_objective:
                        v = (
                            value[sub]
                            + value[rest]
                            + step_value(orig[sub], orig[rest])
                        )
                    else:
                        v = max(
                            value[sub], value[rest], term_size(result(orig[s]), sizes)
                        )
                    if v < best:
                        best = v
                sub = (sub - 1) & s
            value[s] = best
        total = value[full]
        solve_cache[key] = total
        return total

    groups = [1 << i for i in range(n)]
    target = solve(tuple(groups))
    spent = 0.0
    path: list[tuple[int, int]] = []
    for _ in range(n - 1):
        chosen = None
        width = len(groups)
        for i in range(width - 1):
            for j in range(i + 1, width):
                cost = step_value(groups[i], groups[j])
                new_spent = spent + cost if flops_objective else max(spent, cost)
                rest = [g for p, g in enumerate(groups) if p not in (i, j)]
                rest.append(groups[i] | groups[j])
                completion = solve(tuple(rest))
                total = (
                    new_spent + completion
                    if flops_objective
                    else max(new_spent, completion)
                )
                if total <= target + _REL_SLACK * abs(target) + _REL_SLACK:
                    chosen = (i, j, new_spent, rest)
                    break
            if chosen:
                break
        if chosen is None:  # pragma: no cover - DP and replay disagree
            raise AssertionError("no step preserves the optimal completion value")
        i, j, spent, groups = chosen
        path.append((i, j))

    stats = evaluate(network, tuple(path), cost_fn_used="optimal")
    return stats


def _check_data(network: TensorNetwork, tensor_data: Sequence[np.ndarray]) -> list[np.ndarray]:
    if len(tensor_data) != network.num_terms:
        raise ValueError(
            f"expected {network.num_terms} arrays, got {len(tensor_data)}"
        )
    arrays = []
    for pos, (term, arr) in enumerate(zip(network.inputs, tensor_data)):
        arr = np.asarray(arr, dtype=np.float64)
        expected = tuple(network.sizes[label] for label in term)
        if arr.shape != expected:
            raise ValueError(
                f"tensor {pos} has shape {arr.shape}, expected {expected} for indices {term}"
            )
        arrays.append(arr)
    return arrays


def naive_contract(
    network: TensorNetwork, tensor_data: Sequence[np.ndarray]
) -> np.ndarray:
    """Evaluate the expression by iterating every joint index assignment.

    This is the definitional semantics of the expression and involves no
    contraction path at all, which makes it a trustworthy reference for tiny
    instances. Refuses joint assignment spaces above 1e7.
    """
    arrays = _check_data(network, tensor_data)
    labels = sorted({label for term in network.inputs for label in term})
    extents = [network.sizes[label] for label in labels]
    space = 1
    for e in extents:
        space *= e
    if space > _NAIVE_SPACE_LIMIT:
        raise OracleLimitError(
            f"joint index space {space} exceeds the naive limit {_NAIVE_SPACE_LIMIT}"
        )
    axis_of = {label: pos for pos, label in enumerate(labels)}
    term_axes = [tuple(axis_of[label] for label in term) for term in network.inputs]
    out_axes = tuple(axis_of[label] for label in network.output)
    out_shape = tuple(network.sizes[label] for label in network.output)

    # Row-major strides into a flat accumulator; nested lists beat ndarray
    # scalar indexing by a wide margin in this all-Python loop.
    out_strides = []
    acc_len = 1
    for e in reversed(out_shape):
        out_strides.append(acc_len)
        acc_len *= e
    out_strides.reverse()
    acc = [0.0] * acc_len
    nested = [arr.tolist() for arr in arrays]

    for assign in itertools.product(*(range(e) for e in extents)):
        prod = 1.0
        for data, axes in zip(nested, term_axes):
            value = data
            for a in axes:
                value = value[assign[a]]
            prod *= value
        flat = 0
        for a, stride in zip(out_axes, out_strides):
            flat += assign[a] * stride
        acc[flat] += prod
    return np.array(acc, dtype=np.float64).reshape(out_shape)


def _pair_contract(
    a: np.ndarray,
    a_ix: Sequence[str],
    b: np.ndarray,
    b_ix: Sequence[str],
    out_ix: Sequence[str],
) -> np.ndarray:
    """Contract two dense tensors: align axes, multiply, sum removed ones."""
    union = sorted(set(a_ix) | set(b_ix))
    pos = {label: k for k, label in enumerate(union)}

    def align(arr: np.ndarray, ix: Sequence[str]) -> np.ndarray:
        order = sorted(range(len(ix)), key=lambda q: pos[ix[q]])
        arr = np.transpose(arr, order)
        shape = [1] * len(union)
        for axis, q in enumerate(order):
            shape[pos[ix[q]]] = arr.shape[axis]
        return arr.reshape(shape)

    prod = align(a, a_ix) * align(b, b_ix)
    keep = set(out_ix)
    summed = tuple(pos[label] for label in union if label not in keep)
    return prod.sum(axis=summed) if summed else prod


def contract_along_path(
    network: TensorNetwork, tensor_data: Sequence[np.ndarray], path
) -> np.ndarray:
    """Execute ``path`` on real data; must agree with :func:`naive_contract`."""
    arrays = _check_data(network, tensor_data)
    path = _normalize(path)
    _check_length(network, path)
    if network.num_terms == 1:
        term = network.inputs[0]
        keep = set(network.output)
        summed = tuple(ax for ax, label in enumerate(term) if label not in keep)
        arr = arrays[0].sum(axis=summed) if summed else arrays[0]
        remaining = [label for label in term if label in keep]
        order = [remaining.index(label) for label in network.output]
        return np.transpose(arr, order)
    live = [(term, arr) for term, arr in zip(network.inputs, arrays)]
    for step, i, j, t1, t2, result in _replay(network, path):
        value = _pair_contract(live[i][1], t1, live[j][1], t2, result)
        for pos in sorted((i, j), reverse=True):
            live.pop(pos)
        live.append((result, value))
    final_ix, final = live[0]
    order = [final_ix.index(label) for label in network.output]
    return np.transpose(final, order)


def random_tensor_data(network: TensorNetwork, seed: int = 0) -> list[np.ndarray]:
    """Seeded uniform [-1, 1] data matching every input term's extents."""
    rng = np.random.default_rng(seed)
    return [
        rng.uniform(-1.0, 1.0, size=tuple(network.sizes[label] for label in term))
        for term in network.inputs
    ]
