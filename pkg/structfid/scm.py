"""
Structural causal models and forward sampling.

Two mechanism families are supported:

* categorical nodes draw from a conditional probability table indexed by the
  joint configuration of their (categorical) parents;
* numerical nodes follow ``intercept + g(sum(w * numerical parents) + offset) + eps``
  where the offset depends on the categorical-parent configuration,
  ``g`` is identity or tanh and ``eps`` is Gaussian.
"""

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .data import ColumnSpec, Table
from .exceptions import InvalidSpec
from .graph import CausalGraph, topological_order
from .utils import reject_unknown_keys

logger = logging.getLogger(__name__)

CPT_TOLERANCE = 1e-9


class Nonlinearity(str, Enum):
    IDENTITY = "identity"
    TANH = "tanh"

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.tanh(x) if self is Nonlinearity.TANH else x


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class CategoricalMechanism:
    """
    Conditional probability table.

    Row ``r`` of ``table`` is the distribution of the node given the parent
    configuration whose mixed-radix index (parents in ascending index order,
    last parent fastest) is ``r``.
    """

    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", _frozen(self.table))
        if self.table.ndim != 2:
            raise InvalidSpec("A CPT must be a 2-D array")


@dataclass(frozen=True, eq=False)
class LinearGaussianMechanism:
    intercept: float
    noise_std: float
    weights: Tuple[Tuple[int, float], ...] = ()
    offsets: Optional[np.ndarray] = None
    nonlinearity: Nonlinearity = Nonlinearity.IDENTITY

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple((int(p), float(w)) for p, w in self.weights))
        object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))
        if self.offsets is not None:
            object.__setattr__(self, "offsets", _frozen(self.offsets))


Mechanism = Union[CategoricalMechanism, LinearGaussianMechanism]


@dataclass(frozen=True, eq=False)
class ScmSpec:
    graph: CausalGraph
    variables: Tuple[ColumnSpec, ...]
    mechanisms: Tuple[Optional[Mechanism], ...]
    target_index: int

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        n = self.graph.node_count
        if len(self.variables) != n:
            raise InvalidSpec(f"Expected {n} variables, got {len(self.variables)}")
        if len(self.mechanisms) != n:
            raise InvalidSpec(f"Expected {n} mechanisms, got {len(self.mechanisms)}")
        if not 0 <= self.target_index < n:
            raise InvalidSpec(f"Target index {self.target_index} is out of range")
        for node in range(n):
            self._validate_node(node)

    def _validate_node(self, node: int):
        variable = self.variables[node]
        mechanism = self.mechanisms[node]
        if mechanism is None:
            raise InvalidSpec(f"Mechanism missing for node {variable.name!r}")
        cat_parents = self.categorical_parents(node)
        configs = self.config_count(node)

        if variable.is_categorical:
            if not isinstance(mechanism, CategoricalMechanism):
                raise InvalidSpec(f"Categorical node {variable.name!r} needs a CPT")
            if len(cat_parents) != len(self.graph.parents[node]):
                raise InvalidSpec(f"Categorical node {variable.name!r} has a numerical parent")
            expected = (configs, variable.cardinality)
            if mechanism.table.shape != expected:
                raise InvalidSpec(
                    f"CPT of {variable.name!r} has shape {mechanism.table.shape}, "
                    f"expected {expected}"
                )
            if (mechanism.table < 0).any() or not np.isfinite(mechanism.table).all():
                raise InvalidSpec(f"CPT of {variable.name!r} has negative or non-finite entries")
            sums = mechanism.table.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > CPT_TOLERANCE):
                raise InvalidSpec(f"CPT rows of {variable.name!r} do not sum to 1")
            return

        if not isinstance(mechanism, LinearGaussianMechanism):
            raise InvalidSpec(f"Numerical node {variable.name!r} needs a linear-Gaussian mechanism")
        if not (math.isfinite(mechanism.noise_std) and mechanism.noise_std > 0):
            raise InvalidSpec(f"Noise std of {variable.name!r} must be positive")
        if not math.isfinite(mechanism.intercept):
            raise InvalidSpec(f"Intercept of {variable.name!r} must be finite")
        weighted = sorted(p for p, _ in mechanism.weights)
        if weighted != list(self.numerical_parents(node)):
            raise InvalidSpec(f"Node {variable.name!r} needs one weight per numerical parent")
        if not all(math.isfinite(w) for _, w in mechanism.weights):
            raise InvalidSpec(f"Weights of {variable.name!r} must be finite")
        if mechanism.offsets is not None:
            if mechanism.offsets.shape != (configs,):
                raise InvalidSpec(
                    f"Offsets of {variable.name!r} must cover all {configs} parent configurations"
                )
            if not np.isfinite(mechanism.offsets).all():
                raise InvalidSpec(f"Offsets of {variable.name!r} must be finite")

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    @property
    def names(self) -> List[str]:
        return [v.name for v in self.variables]

    def categorical_parents(self, node: int) -> Tuple[int, ...]:
        return tuple(p for p in self.graph.parents[node] if self.variables[p].is_categorical)

    def numerical_parents(self, node: int) -> Tuple[int, ...]:
        return tuple(p for p in self.graph.parents[node] if not self.variables[p].is_categorical)

    def config_count(self, node: int) -> int:
        return int(np.prod([self.variables[p].cardinality for p in self.categorical_parents(node)]))

    def parent_configurations(self, node: int) -> List[Tuple[int, ...]]:
        """Categorical-parent configurations in mixed-radix row order."""
        ranges = [range(self.variables[p].cardinality) for p in self.categorical_parents(node)]
        return list(product(*ranges))

    def to_dict(self) -> Dict:
        names = self.names
        mechanisms = {}
        for node, mechanism in enumerate(self.mechanisms):
            cat_parents = self.categorical_parents(node)
            rows = []
            for r, configuration in enumerate(self.parent_configurations(node)):
                given = {
                    names[p]: self.variables[p].categories[c]
                    for p, c in zip(cat_parents, configuration)
                }
                rows.append((given, r))
            if isinstance(mechanism, CategoricalMechanism):
                mechanisms[names[node]] = {
                    "cpt": [
                        {"given": given, "probs": mechanism.table[r].tolist()} for given, r in rows
                    ]
                }
            else:
                entry = {
                    "intercept": mechanism.intercept,
                    "noise_std": mechanism.noise_std,
                    "weights": {names[p]: w for p, w in mechanism.weights},
                    "nonlinearity": mechanism.nonlinearity.value,
                }
                if mechanism.offsets is not None:
                    entry["offsets"] = [
                        {"given": given, "value": float(mechanism.offsets[r])} for given, r in rows
                    ]
                mechanisms[names[node]] = entry
        return {
            "variables": [v.to_dict() for v in self.variables],
            "edges": [[p, c] for p, c in self.graph.edges],
            "mechanisms": mechanisms,
            "target": self.target_index,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ScmSpec":
        """
        Build a spec from its JSON document.

        Expected layout::

            {"variables": [{"name", "kind", "categories"?}],
             "edges": [[parent, child], ...],
             "mechanisms": {name: {"cpt": [{"given": {parent: label}, "probs": [...]}]}
                            | {name: {"intercept", "noise_std", "weights"?, "offsets"?,
                                      "nonlinearity"?}},
             "target": index}

        Edge endpoints may be indices or variable names. Unknown fields are rejected.
        """
        reject_unknown_keys(
            data, {"variables", "edges", "mechanisms", "target"}, "SCM spec", InvalidSpec
        )
        for key in ("variables", "edges", "mechanisms", "target"):
            if key not in data:
                raise InvalidSpec(f"SCM spec is missing {key!r}")
        variables = tuple(ColumnSpec.from_dict(v) for v in data["variables"])
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise InvalidSpec("Variable names must be unique")
        index = {name: i for i, name in enumerate(names)}

        def resolve(endpoint) -> int:
            if isinstance(endpoint, str):
                if endpoint not in index:
                    raise InvalidSpec(f"Unknown variable {endpoint!r}")
                return index[endpoint]
            return int(endpoint)

        edges = [(resolve(p), resolve(c)) for p, c in data["edges"]]
        if len(set(edges)) != len(edges):
            raise InvalidSpec("Edge list contains duplicates")
        graph = CausalGraph.from_edges(len(variables), edges)
        unknown = set(data["mechanisms"]) - set(names)
        if unknown:
            raise InvalidSpec(f"Mechanisms for unknown variables: {sorted(unknown)}")

        shell = _SpecShell(graph, variables)
        mechanisms = [
            shell.parse_mechanism(node, data["mechanisms"].get(names[node]))
            for node in range(len(variables))
        ]
        target = data["target"]
        if isinstance(target, str):
            if target not in index:
                raise InvalidSpec(f"Unknown target variable {target!r}")
            target = index[target]
        elif isinstance(target, bool) or not isinstance(target, (int, np.integer)):
            raise InvalidSpec(f"Target must be a variable name or index, got {target!r}")
        return cls(graph, variables, tuple(mechanisms), int(target))

    def relabel(self, permutation: Sequence[int]) -> "ScmSpec":
        """
        Move node ``v`` to index ``permutation[v]``, keeping every mechanism.
        """
        data = self.to_dict()
        order = sorted(range(self.node_count), key=lambda v: permutation[v])
        data["variables"] = [data["variables"][v] for v in order]
        data["edges"] = [[permutation[p], permutation[c]] for p, c in data["edges"]]
        data["target"] = permutation[self.target_index]
        return ScmSpec.from_dict(data)


class _SpecShell:
    """Resolves parent configurations while a spec is being parsed."""

    def __init__(self, graph: CausalGraph, variables: Tuple[ColumnSpec, ...]):
        self.graph = graph
        self.variables = variables

    def _cat_parents(self, node: int) -> Tuple[int, ...]:
        return tuple(p for p in self.graph.parents[node] if self.variables[p].is_categorical)

    def _row_index(self, node: int, given: Dict, where: str) -> int:
        cat_parents = self._cat_parents(node)
        names = {self.variables[p].name: p for p in cat_parents}
        if not isinstance(given, dict) or set(given) != set(names):
            raise InvalidSpec(f"{where} must name exactly the categorical parents {sorted(names)}")
        codes, dims = [], []
        for p in cat_parents:
            label = str(given[self.variables[p].name])
            categories = self.variables[p].categories
            if label not in categories:
                raise InvalidSpec(
                    f"{where}: unknown category {label!r} of {self.variables[p].name!r}"
                )
            codes.append(categories.index(label))
            dims.append(len(categories))
        return int(np.ravel_multi_index(codes, dims)) if dims else 0

    def _config_count(self, node: int) -> int:
        return int(np.prod([self.variables[p].cardinality for p in self._cat_parents(node)]))

    def parse_mechanism(self, node: int, entry: Optional[Dict]) -> Optional[Mechanism]:
        if entry is None:
            return None
        variable = self.variables[node]
        configs = self._config_count(node)
        where = f"mechanism of {variable.name!r}"

        if variable.is_categorical:
            reject_unknown_keys(entry, {"cpt"}, where, InvalidSpec)
            table = np.full((configs, variable.cardinality), np.nan)
            for row in entry["cpt"]:
                reject_unknown_keys(row, {"given", "probs"}, where, InvalidSpec)
                r = self._row_index(node, row.get("given", {}), where)
                if not np.isnan(table[r]).all():
                    raise InvalidSpec(f"{where} repeats a parent configuration")
                probs = np.asarray(row["probs"], dtype=np.float64)
                if probs.shape != (variable.cardinality,):
                    raise InvalidSpec(f"{where} has a row of the wrong length")
                table[r] = probs
            if np.isnan(table).any():
                raise InvalidSpec(f"{where} does not cover every parent configuration")
            return CategoricalMechanism(table)

        reject_unknown_keys(
            entry,
            {"intercept", "noise_std", "weights", "offsets", "nonlinearity"},
            where,
            InvalidSpec,
        )
        names = {v.name: i for i, v in enumerate(self.variables)}
        weights = []
        for parent_name, weight in entry.get("weights", {}).items():
            if parent_name not in names:
                raise InvalidSpec(f"{where} weights unknown variable {parent_name!r}")
            weights.append((names[parent_name], float(weight)))
        offsets = None
        if "offsets" in entry:
            offsets = np.full(configs, np.nan)
            for row in entry["offsets"]:
                reject_unknown_keys(row, {"given", "value"}, where, InvalidSpec)
                r = self._row_index(node, row.get("given", {}), where)
                offsets[r] = float(row["value"])
            if np.isnan(offsets).any():
                raise InvalidSpec(f"{where} offsets do not cover every parent configuration")
        try:
            nonlinearity = Nonlinearity(entry.get("nonlinearity", "identity"))
        except ValueError as e:
            raise InvalidSpec(f"{where}: {e}") from e
        return LinearGaussianMechanism(
            intercept=float(entry.get("intercept", 0.0)),
            noise_std=float(entry["noise_std"]) if "noise_std" in entry else float("nan"),
            weights=tuple(weights),
            offsets=offsets,
            nonlinearity=nonlinearity,
        )


def load_scm_spec(path) -> ScmSpec:
    return ScmSpec.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_scm_spec(spec: ScmSpec, path):
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n", encoding="utf-8")


def _config_rows(
    spec: ScmSpec, node: int, columns: List[Optional[np.ndarray]], n: int
) -> np.ndarray:
    cat_parents = spec.categorical_parents(node)
    if not cat_parents:
        return np.zeros(n, dtype=np.int64)
    codes = [columns[p].astype(np.int64) for p in cat_parents]
    dims = [spec.variables[p].cardinality for p in cat_parents]
    return np.ravel_multi_index(codes, dims)


def sample_scm(spec: ScmSpec, n: int, seed: int) -> Table:
    """
    Forward-sample ``n`` rows from an SCM.

    Nodes are visited in topological order; each node draws its own block of
    ``n`` random numbers from a single generator seeded with ``seed``, so the
    output is bit-identical for identical inputs.

    Args:
        spec: Structural causal model
        n: Number of rows (the full-dataset size is the ``n_full`` setting)
        seed: 64-bit seed

    Returns:
        Table with one column per node in spec order

    Raises:
        InvalidSpec: if ``seed`` is negative
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if seed < 0:
        raise InvalidSpec(f"Seeds must be non-negative, got {seed}")
    rng = np.random.default_rng(seed)
    columns: List[Optional[np.ndarray]] = [None] * spec.node_count

    for node in topological_order(spec.graph):
        mechanism = spec.mechanisms[node]
        rows = _config_rows(spec, node, columns, n)
        if isinstance(mechanism, CategoricalMechanism):
            cumulative = np.cumsum(mechanism.table, axis=1)[rows]
            u = rng.random(n)
            draws = (cumulative <= u[:, None]).sum(axis=1)
            columns[node] = np.minimum(draws, mechanism.table.shape[1] - 1).astype(np.float64)
        else:
            signal = np.zeros(n)
            for parent, weight in mechanism.weights:
                signal = signal + weight * columns[parent]
            if mechanism.offsets is not None:
                signal = signal + mechanism.offsets[rows]
            noise = rng.standard_normal(n) * mechanism.noise_std
            columns[node] = mechanism.intercept + mechanism.nonlinearity.apply(signal) + noise

    logger.debug("Sampled %d rows from a %d-node SCM (seed=%d)", n, spec.node_count, seed)
    return Table(spec.variables, np.column_stack(columns), spec.target_index)
