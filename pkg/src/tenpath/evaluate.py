"""Replay, validate, and score contraction paths; derive contraction trees."""

from __future__ import annotations

from collections import Counter
from typing import Iterator, Sequence

from .model import (
    ContractionPath,
    ContractionTree,
    PathStats,
    TensorNetwork,
    TreeNode,
    pair_output_indices,
    pairwise_flops,
    term_size,
)

__all__ = [
    "PathValidationError",
    "contraction_tree",
    "evaluate",
    "format_tree",
]


class PathValidationError(ValueError):
    """A path does not fit the network it is applied to."""


def _normalize(path) -> ContractionPath:
    try:
        return tuple((int(i), int(j)) for i, j in path)
    except (TypeError, ValueError) as exc:
        raise PathValidationError(f"malformed path {path!r}") from exc


def _replay(
    network: TensorNetwork, path: ContractionPath
) -> Iterator[tuple[int, int, int, tuple[str, ...], tuple[str, ...], tuple[str, ...]]]:
    """Yield ``(step, i, j, term_i, term_j, result)`` for each path step.

    Maintains live refcounts so the retention rule sees exactly the terms
    that are still alive. Raises :class:`PathValidationError` on an invalid
    position and, after the last step, when the surviving term does not match
    the network output.
    """
    live: list[tuple[str, ...]] = list(network.inputs)
    counts = Counter(label for term in live for label in term)
    out_set = frozenset(network.output)
    for step, (i, j) in enumerate(path):
        width = len(live)
        if i == j or not (0 <= i < width) or not (0 <= j < width):
            raise PathValidationError(
                f"step {step}: positions ({i}, {j}) invalid for {width} live terms"
            )
        t1, t2 = live[i], live[j]
        s1, s2 = set(t1), set(t2)
        others = {
            label: counts[label] - (label in s1) - (label in s2)
            for label in s1 | s2
        }
        result = pair_output_indices(t1, t2, others, out_set)
        yield step, i, j, t1, t2, result
        for pos in sorted((i, j), reverse=True):
            live.pop(pos)
        live.append(result)
        for label in s1:
            counts[label] -= 1
        for label in s2:
            counts[label] -= 1
        for label in result:
            counts[label] += 1
    if set(live[0]) != out_set:
        raise PathValidationError(
            f"final term {sorted(live[0])} does not match the network output "
            f"{sorted(out_set)}"
        )


def _check_length(network: TensorNetwork, path: ContractionPath) -> None:
    expected = max(0, network.num_terms - 1)
    if len(path) != expected:
        raise PathValidationError(
            f"path has {len(path)} steps; a {network.num_terms}-term network needs {expected}"
        )


def evaluate(
    network: TensorNetwork, path, cost_fn_used: str = ""
) -> PathStats:
    """Score a contraction path.

    Total flops are accumulated per step; the largest intermediate size is
    the maximum extent product over all produced terms, the final output
    included. A single-term network has an empty path; it costs the extent
    product of its term when any index is summed away, and nothing when the
    path is a pure transposition.
    """
    path = _normalize(path)
    _check_length(network, path)
    sizes = network.sizes
    if network.num_terms == 1:
        # Network validation guarantees output labels occur in the sole term,
        # so the path is a reduction (sum-only) or a pure transposition.
        term = network.inputs[0]
        out_set = set(network.output)
        flops = term_size(term, sizes) if set(term) - out_set else 0.0
        return PathStats(
            total_flops=flops,
            max_intermediate_size=term_size(network.output, sizes),
            path=(),
            cost_fn_used=cost_fn_used,
            tree_depth=0,
        )
    total = 0.0
    max_size = 0.0
    heights = [0] * network.num_terms
    for step, i, j, t1, t2, result in _replay(network, path):
        total += pairwise_flops(t1, t2, result, sizes)
        size12 = term_size(result, sizes)
        if size12 > max_size:
            max_size = size12
        merged = max(heights[i], heights[j]) + 1
        for pos in sorted((i, j), reverse=True):
            heights.pop(pos)
        heights.append(merged)
    return PathStats(
        total_flops=total,
        max_intermediate_size=max_size,
        path=path,
        cost_fn_used=cost_fn_used,
        tree_depth=heights[0],
    )


def contraction_tree(network: TensorNetwork, path) -> ContractionTree:
    """Build the binary tree induced by ``path``.

    Leaves correspond to input-term positions; each internal node carries the
    index list of the term it produces. ``depth`` is the longest leaf-to-root
    edge count.
    """
    path = _normalize(path)
    _check_length(network, path)
    nodes = [
        TreeNode(node_id=pos, children=None, leaf_term=pos, indices=term)
        for pos, term in enumerate(network.inputs)
    ]
    live_ids = list(range(network.num_terms))
    for step, i, j, _t1, _t2, result in _replay(network, path):
        node_id = len(nodes)
        nodes.append(
            TreeNode(
                node_id=node_id,
                children=(live_ids[i], live_ids[j]),
                leaf_term=None,
                indices=result,
            )
        )
        for pos in sorted((i, j), reverse=True):
            live_ids.pop(pos)
        live_ids.append(node_id)
    root = live_ids[0]
    depth_of = {root: 0}
    stack = [root]
    while stack:
        node = nodes[stack.pop()]
        if node.children is None:
            continue
        for child in node.children:
            depth_of[child] = depth_of[node.node_id] + 1
            stack.append(child)
    leaf_depths = tuple(depth_of[pos] for pos in range(network.num_terms))
    return ContractionTree(
        nodes=tuple(nodes),
        root=root,
        depth=max(leaf_depths),
        leaf_depths=leaf_depths,
    )


def format_tree(tree: ContractionTree) -> str:
    """Render a tree as text, one node per line.

    Each line is ``<id> <child1> <child2> <indices...>`` with ``-`` in the
    child columns for leaves, suitable for external visualization tools.
    """
    lines = []
    for node in tree.nodes:
        if node.children is None:
            c1 = c2 = "-"
        else:
            c1, c2 = (str(c) for c in node.children)
        lines.append(" ".join([str(node.node_id), c1, c2, *node.indices]).rstrip())
    return "\n".join(lines) + "\n"
