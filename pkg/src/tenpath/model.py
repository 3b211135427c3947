"""Core types for einsum contraction problems: networks, sizes, paths, trees.

A *term* is a tuple of index labels, a *network* is the list of input terms
plus an output term and an extent for every label. Sizes and flop counts are
carried as double-precision floats so that very large instances saturate to
``inf`` (which still compares correctly for minimization) instead of
overflowing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "ContractionPath",
    "ContractionTree",
    "NetworkValidationError",
    "PairCandidate",
    "PathStats",
    "TensorNetwork",
    "TreeNode",
    "pair_output_indices",
    "pairwise_flops",
    "term_size",
    "validate_label",
]

# A contraction path is a sequence of position pairs into a shrinking term
# list: after each step the two terms are removed and the result is appended.
ContractionPath = tuple[tuple[int, int], ...]

# Characters that would collide with the text formats (term separators, the
# output arrow, and whitespace).
_FORBIDDEN_LABEL_CHARS = frozenset(", \t\n\r\v\f->")


class NetworkValidationError(ValueError):
    """An expression or network violates a structural invariant."""


def validate_label(label: str) -> str:
    """Check that ``label`` is a usable index label and return it."""
    if not isinstance(label, str) or not label:
        raise NetworkValidationError(f"index label must be a nonempty string, got {label!r}")
    bad = _FORBIDDEN_LABEL_CHARS.intersection(label)
    if bad:
        raise NetworkValidationError(
            f"index label {label!r} contains reserved character(s) {sorted(bad)!r}"
        )
    return label


def term_size(indices: Iterable[str], sizes: Mapping[str, int]) -> float:
    """Product of the extents of ``indices``, as a float.

    Saturates to ``inf`` on overflow; the empty product is 1.0.
    """
    size = 1.0
    for label in indices:
        try:
            size *= sizes[label]
        except KeyError:
            raise NetworkValidationError(f"no extent known for index {label!r}") from None
    return size


def pair_output_indices(
    t1: Sequence[str],
    t2: Sequence[str],
    live_counts: Mapping[str, int],
    output: Iterable[str],
) -> tuple[str, ...]:
    """Indices retained when contracting terms ``t1`` and ``t2``.

    A label of either term survives when it appears in the network output or
    in at least one other live term (``live_counts`` counts occurrences among
    live terms excluding ``t1`` and ``t2``); everything else is summed away.
    The result is in canonical (ascending lexicographic) order.
    """
    out_set = set(output)
    kept = [
        label
        for label in set(t1) | set(t2)
        if label in out_set or live_counts.get(label, 0) > 0
    ]
    kept.sort()
    return tuple(kept)


def pairwise_flops(
    t1: Sequence[str],
    t2: Sequence[str],
    out: Sequence[str],
    sizes: Mapping[str, int],
) -> float:
    """Flop cost of contracting ``t1`` with ``t2`` into ``out``.

    Counts one multiply per joint index assignment, doubled when at least one
    index is summed away (multiply plus add); a pure outer product or
    Hadamard product costs the plain extent product of the union.
    """
    union = set(t1) | set(t2)
    cost = term_size(union, sizes)
    if union - set(out):
        cost *= 2.0
    return cost


@dataclass(frozen=True)
class TensorNetwork:
    """An einsum problem instance: input terms, output term, index extents.

    Instances are validated on construction and immutable afterwards, so they
    are safe to share across threads. Repeated labels within a single input
    term (diagonals) are rejected; a scalar (empty) term is valid.
    """

    inputs: tuple[tuple[str, ...], ...]
    output: tuple[str, ...]
    sizes: Mapping[str, int]

    def __post_init__(self) -> None:
        inputs = tuple(tuple(term) for term in self.inputs)
        output = tuple(self.output)
        sizes = dict(self.sizes)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "output", output)
        object.__setattr__(self, "sizes", sizes)

        if not inputs:
            raise NetworkValidationError("a network needs at least one input term")
        referenced: set[str] = set()
        for pos, term in enumerate(inputs):
            seen: set[str] = set()
            for label in term:
                validate_label(label)
                if label in seen:
                    raise NetworkValidationError(
                        f"index {label!r} repeats within input term {pos} (diagonals are not supported)"
                    )
                seen.add(label)
            referenced |= seen
        out_seen: set[str] = set()
        for label in output:
            validate_label(label)
            if label in out_seen:
                raise NetworkValidationError(f"index {label!r} repeats in the output term")
            out_seen.add(label)
            if label not in referenced:
                raise NetworkValidationError(
                    f"output index {label!r} does not occur in any input term"
                )
        for label in referenced:
            if label not in sizes:
                raise NetworkValidationError(f"no extent given for index {label!r}")
        for label, extent in sizes.items():
            if not isinstance(extent, int) or isinstance(extent, bool) or extent < 1:
                raise NetworkValidationError(
                    f"extent of index {label!r} must be an integer >= 1, got {extent!r}"
                )

    @property
    def num_terms(self) -> int:
        return len(self.inputs)

    def refcounts(self) -> dict[str, int]:
        """Number of input terms containing each referenced label."""
        counts: dict[str, int] = {}
        for term in self.inputs:
            for label in term:
                counts[label] = counts.get(label, 0) + 1
        return counts


@dataclass(frozen=True)
class PairCandidate:
    """A possible pairwise contraction considered by the greedy search.

    ``pos1``/``pos2`` are term positions, ``size1``/``size2``/``size12`` the
    extent products of the two inputs and the result, ``removed`` the number
    of indices summed away, and ``cost`` the score assigned by a cost
    function (lower is better).
    """

    pos1: int
    pos2: int
    indices_out: tuple[str, ...]
    size1: float
    size2: float
    size12: float
    removed: int
    cost: float = 0.0


@dataclass(frozen=True)
class PathStats:
    """Aggregate statistics of one contraction path."""

    total_flops: float
    max_intermediate_size: float
    path: ContractionPath
    cost_fn_used: str
    tree_depth: int


@dataclass(frozen=True)
class TreeNode:
    """One node of a contraction tree.

    Leaves carry the position of an input term (``children is None``);
    internal nodes carry the indices of the term they produce.
    """

    node_id: int
    children: tuple[int, int] | None
    leaf_term: int | None
    indices: tuple[str, ...]


@dataclass(frozen=True)
class ContractionTree:
    """Binary tree induced by a contraction path.

    ``depth`` is the longest leaf-to-root edge count and ``leaf_depths``
    gives that distance per input-term position.
    """

    nodes: tuple[TreeNode, ...]
    root: int
    depth: int
    leaf_depths: tuple[int, ...]

    @property
    def num_leaves(self) -> int:
        return len(self.leaf_depths)
