"""Parse and serialize einsum expressions, paths, and instance documents.

Two input formats exist: a compact einsum string with single-character
labels ("ijk,kln->ijln") for small cases, and a JSON instance document with
arbitrary label tokens for large instances. Both produce a validated
:class:`~tenpath.model.TensorNetwork`.

The instance document is a single JSON object::

    {"inputs": [["x1", "x2"], ["x2", "x3"]],
     "output": ["x1", "x3"],
     "index_sizes": {"x1": 2, "x2": 4, "x3": 2},
     "name": "optional"}

A path is serialized as a JSON array of 2-element position arrays, e.g.
``[[2,3],[0,1],[0,1]]``, positions counting into the shrinking term list
with each step's result appended at the end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import networkx as nx

from .model import ContractionPath, NetworkValidationError, TensorNetwork

__all__ = [
    "InstanceDocument",
    "InstanceFormatError",
    "gen_grid_network",
    "gen_random_network",
    "gen_regular_network",
    "parse_einsum_string",
    "parse_instance_document",
    "parse_instance_file",
    "parse_path",
    "serialize_instance",
    "serialize_path",
]


class InstanceFormatError(ValueError):
    """A document or expression cannot be parsed."""


def parse_einsum_string(text: str, sizes: Mapping[str, int]) -> TensorNetwork:
    """Parse a compact einsum expression like ``"ijk,kln->ijln"``.

    Terms are comma-separated strings of single-character labels, followed by
    ``->`` and the output labels; whitespace is ignored. Every referenced
    label must have an extent in ``sizes``.
    """
    compact = "".join(text.split())
    if "->" not in compact:
        raise InstanceFormatError(
            f"expression {text!r} has no '->' separating inputs from the output"
        )
    lhs, _, rhs = compact.partition("->")
    if "->" in rhs:
        raise InstanceFormatError(f"expression {text!r} contains more than one '->'")
    inputs = tuple(tuple(term) for term in lhs.split(","))
    output = tuple(rhs)
    referenced = {label for term in inputs for label in term} | set(output)
    extents = {}
    for label in sorted(referenced):
        if label not in sizes:
            raise InstanceFormatError(f"no extent given for index {label!r}")
        extents[label] = sizes[label]
    return TensorNetwork(inputs=inputs, output=output, sizes=extents)


@dataclass(frozen=True)
class InstanceDocument:
    """On-disk form of a problem instance; round-trips losslessly."""

    inputs: tuple[tuple[str, ...], ...]
    output: tuple[str, ...]
    index_sizes: Mapping[str, int]
    name: str | None = None
    family: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "inputs", tuple(tuple(term) for term in self.inputs)
        )
        object.__setattr__(self, "output", tuple(self.output))
        object.__setattr__(self, "index_sizes", dict(self.index_sizes))

    def to_network(self) -> TensorNetwork:
        return TensorNetwork(
            inputs=self.inputs, output=self.output, sizes=self.index_sizes
        )

    @classmethod
    def from_network(
        cls,
        network: TensorNetwork,
        name: str | None = None,
        family: str | None = None,
    ) -> "InstanceDocument":
        return cls(
            inputs=network.inputs,
            output=network.output,
            index_sizes=network.sizes,
            name=name,
            family=family,
        )

    def to_json_dict(self) -> dict:
        doc: dict = {
            "inputs": [list(term) for term in self.inputs],
            "output": list(self.output),
            "index_sizes": dict(self.index_sizes),
        }
        if self.name is not None:
            doc["name"] = self.name
        if self.family is not None:
            doc["family"] = self.family
        return doc


_DOC_KEYS = {"inputs", "output", "index_sizes", "name", "family"}


def _string_list(value, where: str) -> list[str]:
    if not isinstance(value, list):
        raise InstanceFormatError(f"{where}: expected an array of strings")
    for pos, item in enumerate(value):
        if not isinstance(item, str):
            raise InstanceFormatError(f"{where}[{pos}]: expected a string")
    return value


def parse_instance_document(data: bytes | str) -> InstanceDocument:
    """Parse and schema-check an instance document from JSON text."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InstanceFormatError("instance document: expected a JSON object")
    for key in ("inputs", "output", "index_sizes"):
        if key not in obj:
            raise InstanceFormatError(f"{key}: required key is missing")
    for key in obj:
        if key not in _DOC_KEYS:
            raise InstanceFormatError(f"{key}: unknown key")
    if not isinstance(obj["inputs"], list):
        raise InstanceFormatError("inputs: expected an array of arrays of strings")
    inputs = [
        _string_list(term, f"inputs[{pos}]") for pos, term in enumerate(obj["inputs"])
    ]
    output = _string_list(obj["output"], "output")
    raw_sizes = obj["index_sizes"]
    if not isinstance(raw_sizes, dict):
        raise InstanceFormatError("index_sizes: expected an object of integers")
    for label, extent in raw_sizes.items():
        if not isinstance(extent, int) or isinstance(extent, bool) or extent < 1:
            raise InstanceFormatError(
                f"index_sizes[{label!r}]: expected an integer >= 1, got {extent!r}"
            )
    for key in ("name", "family"):
        if key in obj and not isinstance(obj[key], str):
            raise InstanceFormatError(f"{key}: expected a string")
    return InstanceDocument(
        inputs=inputs,
        output=output,
        index_sizes=raw_sizes,
        name=obj.get("name"),
        family=obj.get("family"),
    )


def parse_instance_file(data: bytes | str) -> TensorNetwork:
    """Parse an instance document and validate it as a network."""
    return parse_instance_document(data).to_network()


def serialize_instance(doc: InstanceDocument) -> str:
    """Render a document as JSON text (UTF-8 friendly, trailing newline)."""
    return json.dumps(doc.to_json_dict(), indent=2, ensure_ascii=False) + "\n"


def serialize_path(path) -> str:
    """Render a path in the linear pair-list text form, e.g. ``[[2,3],[0,1]]``."""
    return json.dumps([[int(i), int(j)] for i, j in path], separators=(",", ":"))


def parse_path(text: str) -> ContractionPath:
    """Parse the linear pair-list text form back into a path."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid path text: {exc}") from exc
    if not isinstance(obj, list):
        raise InstanceFormatError("path: expected an array of position pairs")
    steps = []
    for pos, step in enumerate(obj):
        if (
            not isinstance(step, list)
            or len(step) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in step)
        ):
            raise InstanceFormatError(
                f"path[{pos}]: expected a pair of integer positions, got {step!r}"
            )
        steps.append((step[0], step[1]))
    return tuple(steps)


def _network_from_graph(num_nodes: int, edge_list, extent: int) -> TensorNetwork:
    """One tensor per graph node, one shared index per edge, scalar output."""
    inputs: list[list[str]] = [[] for _ in range(num_nodes)]
    sizes: dict[str, int] = {}
    for k, (u, v) in enumerate(edge_list):
        label = f"e{k}"
        inputs[u].append(label)
        inputs[v].append(label)
        sizes[label] = extent
    return TensorNetwork(
        inputs=tuple(tuple(term) for term in inputs), output=(), sizes=sizes
    )


def _check_extent(extent: int) -> None:
    if extent < 2:
        raise ValueError(f"index extent must be >= 2, got {extent}")


def gen_grid_network(rows: int, cols: int, extent: int, seed: int = 0) -> TensorNetwork:
    """Square-grid instance: nodes on a rows x cols lattice, edges to the
    right and downward neighbors. The structure is fully determined by the
    parameters; ``seed`` is accepted for interface uniformity."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid needs rows, cols >= 1, got {rows} x {cols}")
    _check_extent(extent)
    edges = []
    for r in range(rows):
        for c in range(cols):
            node = r * cols + c
            if c + 1 < cols:
                edges.append((node, node + 1))
            if r + 1 < rows:
                edges.append((node, node + cols))
    return _network_from_graph(rows * cols, edges, extent)


def gen_regular_network(
    n: int, degree: int, extent: int, seed: int = 0
) -> TensorNetwork:
    """Random d-regular instance with one rank-``degree`` tensor per node."""
    if n < 1 or degree < 0 or degree >= n or (n * degree) % 2 != 0:
        raise ValueError(
            f"no {degree}-regular graph on {n} nodes (need 0 <= degree < n and n*degree even)"
        )
    _check_extent(extent)
    graph = nx.random_regular_graph(degree, n, seed=seed)
    edges = sorted(tuple(sorted(e)) for e in graph.edges())
    return _network_from_graph(n, edges, extent)


def gen_random_network(
    n: int, edge_prob: float, extent: int, seed: int = 0
) -> TensorNetwork:
    """Erdos-Renyi G(n, p) instance; isolated nodes become scalar terms."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {edge_prob}")
    _check_extent(extent)
    graph = nx.gnp_random_graph(n, edge_prob, seed=seed)
    edges = sorted(tuple(sorted(e)) for e in graph.edges())
    return _network_from_graph(n, edges, extent)
