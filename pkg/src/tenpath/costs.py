"""Cost functions that score candidate pairwise contractions.

Every cost function maps the candidate features ``(size1, size2, size12,
removed)`` to a real score where lower is better. Scores may be negative;
only the relative order within one greedy run matters. The registry is fixed
per release so that automatic selection is reproducible.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .model import PairCandidate

__all__ = [
    "CostFnSpec",
    "UnknownCostFnError",
    "default_cost_fn_set",
    "pair_cost",
    "registered_names",
    "resolve",
    "spec_from_name",
]

# Raw scorer signature: (size1, size2, size12, removed) -> cost.
Scorer = Callable[[float, float, float, int], float]

_FLOAT_MAX = sys.float_info.max


class UnknownCostFnError(ValueError):
    """A cost-function name or parameter is not registered."""


@dataclass(frozen=True)
class CostFnSpec:
    """A named, parameterized cost function."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)


def _clamped(raw: Scorer) -> Scorer:
    # Saturated sizes can produce nan (inf - inf) or -inf; keep the score
    # totally ordered for the heap.
    def scorer(size1: float, size2: float, size12: float, removed: int) -> float:
        cost = raw(size1, size2, size12, removed)
        if math.isnan(cost):
            return math.inf
        if cost == -math.inf:
            return -_FLOAT_MAX
        return cost

    return scorer


def _check_params(spec: CostFnSpec, allowed: dict[str, float]) -> dict[str, float]:
    params = dict(allowed)
    for key, value in spec.params.items():
        if key not in allowed:
            raise UnknownCostFnError(
                f"cost function {spec.name!r} takes no parameter {key!r}"
            )
        value = float(value)
        if value < 0 or math.isnan(value):
            raise UnknownCostFnError(
                f"parameter {key!r} of cost function {spec.name!r} must be >= 0, got {value!r}"
            )
        params[key] = value
    return params


def _make_standard(spec: CostFnSpec) -> Scorer:
    _check_params(spec, {})
    return lambda s1, s2, s12, removed: s12 - (s1 + s2)


def _make_balanced_min(spec: CostFnSpec) -> Scorer:
    _check_params(spec, {})
    return lambda s1, s2, s12, removed: s12 - min(s1, s2)


def _make_skewed_max(spec: CostFnSpec) -> Scorer:
    _check_params(spec, {})
    return lambda s1, s2, s12, removed: s12 - max(s1, s2)


def _make_weighted(spec: CostFnSpec) -> Scorer:
    params = _check_params(spec, {"alpha": 1.0, "beta": 1.0})
    alpha, beta = params["alpha"], params["beta"]
    return lambda s1, s2, s12, removed: s12 - alpha * max(s1, s2) - beta * min(s1, s2)


def _make_log_ratio(spec: CostFnSpec) -> Scorer:
    _check_params(spec, {})
    return lambda s1, s2, s12, removed: math.log2(s12) - math.log2(s1 + s2)


def _make_removal_bonus(spec: CostFnSpec) -> Scorer:
    params = _check_params(spec, {"gamma": 1.0})
    gamma = params["gamma"]
    return lambda s1, s2, s12, removed: s12 - (s1 + s2) - gamma * removed


_FAMILIES: dict[str, Callable[[CostFnSpec], Scorer]] = {
    "standard": _make_standard,
    "balanced-min": _make_balanced_min,
    "skewed-max": _make_skewed_max,
    "weighted": _make_weighted,
    "log-ratio": _make_log_ratio,
    "removal-bonus": _make_removal_bonus,
}

# Grid of (alpha, beta) weights swept by the default set. Combinations that
# replicate standard, balanced-min, or skewed-max are skipped there.
_WEIGHT_GRID = (0.0, 0.5, 1.0, 2.0)
_WEIGHT_DUPLICATES = {(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}


def _family_of(name: str) -> str:
    if name in _FAMILIES:
        return name
    if name.startswith("weighted-"):
        return "weighted"
    if name.startswith("removal-bonus-"):
        return "removal-bonus"
    raise UnknownCostFnError(
        f"unknown cost function {name!r}; registered: {', '.join(registered_names())}"
    )


def resolve(spec: CostFnSpec) -> Scorer:
    """Turn a spec into a plain scoring callable, validating name and params."""
    family = _family_of(spec.name)
    return _clamped(_FAMILIES[family](spec))


def pair_cost(spec: CostFnSpec, candidate: PairCandidate) -> float:
    """Score one candidate under ``spec``; lower is better."""
    return resolve(spec)(
        candidate.size1, candidate.size2, candidate.size12, candidate.removed
    )


def default_cost_fn_set() -> tuple[CostFnSpec, ...]:
    """The fixed, ordered cost-function set used by automatic selection.

    The ordering is part of the contract: ties during selection break toward
    earlier entries.
    """
    specs = [
        CostFnSpec("standard"),
        CostFnSpec("balanced-min"),
        CostFnSpec("skewed-max"),
    ]
    for alpha in _WEIGHT_GRID:
        for beta in _WEIGHT_GRID:
            if (alpha, beta) in _WEIGHT_DUPLICATES:
                continue
            specs.append(
                CostFnSpec(
                    f"weighted-a{alpha:g}-b{beta:g}",
                    {"alpha": alpha, "beta": beta},
                )
            )
    specs.append(CostFnSpec("log-ratio"))
    specs.append(CostFnSpec("removal-bonus", {"gamma": 1.0}))
    return tuple(specs)


def registered_names() -> tuple[str, ...]:
    """Names accepted by :func:`spec_from_name`, in default-set order."""
    return tuple(spec.name for spec in default_cost_fn_set())


def spec_from_name(name: str) -> CostFnSpec:
    """Look up a member of the default set by name."""
    for spec in default_cost_fn_set():
        if spec.name == name:
            return spec
    raise UnknownCostFnError(
        f"unknown cost function {name!r}; registered: {', '.join(registered_names())}"
    )
