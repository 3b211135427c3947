"""Shared fixtures and independent reference implementations for the tests.

``iter_all_paths`` / ``brute_force_best`` enumerate every pairwise
contraction order and score it through the evaluator only; they exist so the
optimizer and the subset-DP oracle can be checked against something that
shares no search logic with either.
"""

from __future__ import annotations

import random

import pytest

from tenpath import TensorNetwork, evaluate, parse_einsum_string

EXAMPLE_SIZES = {"i": 3, "j": 2, "k": 3, "m": 2}


@pytest.fixture
def chain4() -> TensorNetwork:
    """The four-tensor vector/matrix chain contracted to a vector."""
    return parse_einsum_string("i,ij,jk,km->m", EXAMPLE_SIZES)


def iter_all_paths(n: int):
    """Yield every complete pairwise path for ``n`` terms, lexicographically."""

    def rec(width: int):
        if width <= 1:
            yield ()
            return
        for i in range(width - 1):
            for j in range(i + 1, width):
                for rest in rec(width - 1):
                    yield ((i, j),) + rest

    return rec(n)


def brute_force_best(network: TensorNetwork, objective: str):
    """Exhaustively find the best (value, path); first winner is lex-smallest."""
    best_value = None
    best_path = None
    for path in iter_all_paths(network.num_terms):
        stats = evaluate(network, path)
        value = (
            stats.total_flops if objective == "flops" else stats.max_intermediate_size
        )
        if best_value is None or value < best_value:
            best_value = value
            best_path = path
    return best_value, best_path


def random_network(
    rng: random.Random,
    n_terms: int | None = None,
    max_terms: int = 7,
    max_labels: int = 8,
    extents: tuple[int, int] = (2, 6),
    max_output: int = 3,
) -> TensorNetwork:
    """Sample a small random instance (hyperedges, scalars, and all).

    Every label lands in one to three distinct terms, so the result may be
    disconnected and may contain hyperedges; the output is a random subset of
    the labels.
    """
    n = n_terms if n_terms is not None else rng.randint(3, max_terms)
    num_labels = rng.randint(max(2, n - 1), max_labels)
    labels = [f"x{k}" for k in range(num_labels)]
    terms: list[list[str]] = [[] for _ in range(n)]
    for label in labels:
        holders = rng.sample(range(n), rng.randint(1, min(3, n)))
        for holder in sorted(holders):
            terms[holder].append(label)
    output = sorted(rng.sample(labels, rng.randint(0, min(max_output, num_labels))))
    sizes = {label: rng.randint(*extents) for label in labels}
    return TensorNetwork(
        inputs=tuple(tuple(term) for term in terms),
        output=tuple(output),
        sizes=sizes,
    )
