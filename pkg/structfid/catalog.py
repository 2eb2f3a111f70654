"""
Conditional-independence catalogs derived from a causal graph.

A catalog lists every independence statement ``j _||_ k | S`` implied by
d-separation, plus the dependence statements ``j not _||_ k | S - {v}`` obtained
by dropping one element of a separator when that opens the pair again.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Tuple

from . import config
from .exceptions import BudgetExceeded, CatalogScopeError, InvalidSpec, OverlappingSet
from .graph import CausalGraph, is_d_separated
from .utils import reject_unknown_keys

logger = logging.getLogger(__name__)


class CiKind(str, Enum):
    INDEPENDENT = "independent"
    DEPENDENT = "dependent"


class CatalogScope(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class CiStatement:
    j: int
    k: int
    conditioning_set: Tuple[int, ...]
    kind: CiKind

    def __post_init__(self):
        if self.j == self.k:
            raise OverlappingSet(f"A statement needs two distinct nodes, got {self.j} twice")
        cond = tuple(sorted(set(self.conditioning_set)))
        if self.j in cond or self.k in cond:
            raise OverlappingSet(f"Conditioning set {cond} intersects {{{self.j}, {self.k}}}")
        j, k = sorted((self.j, self.k))
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "conditioning_set", cond)
        object.__setattr__(self, "kind", CiKind(self.kind))

    @property
    def pair(self) -> Tuple[int, int]:
        return (self.j, self.k)

    @property
    def variables(self) -> Tuple[int, ...]:
        return (self.j, self.k, *self.conditioning_set)

    def sort_key(self):
        return (self.pair, self.conditioning_set, 0 if self.kind is CiKind.INDEPENDENT else 1)

    def to_dict(self) -> Dict:
        return {
            "pair": [self.j, self.k],
            "conditioning_set": list(self.conditioning_set),
            "kind": self.kind.value,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "CiStatement":
        reject_unknown_keys(data, {"pair", "conditioning_set", "kind"}, "CI statement", InvalidSpec)
        j, k = data["pair"]
        return cls(j, k, tuple(data["conditioning_set"]), CiKind(data["kind"]))

    def __str__(self):
        symbol = "_||_" if self.kind is CiKind.INDEPENDENT else "not _||_"
        cond = ", ".join(str(v) for v in self.conditioning_set)
        return f"{self.j} {symbol} {self.k} | {{{cond}}}"


@dataclass(frozen=True)
class CiCatalog:
    statements: Tuple[CiStatement, ...]
    scope: CatalogScope = CatalogScope.GLOBAL
    target: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "statements", tuple(self.statements))
        object.__setattr__(self, "scope", CatalogScope(self.scope))
        if len(set(self.statements)) != len(self.statements):
            raise InvalidSpec("Catalog contains duplicate statements")
        if self.scope is CatalogScope.LOCAL:
            if self.target is None:
                raise CatalogScopeError("A local catalog needs a target")
            for statement in self.statements:
                if self.target not in statement.pair:
                    raise CatalogScopeError(
                        f"Statement {statement} does not involve target {self.target}"
                    )

    def __len__(self):
        return len(self.statements)

    def __iter__(self):
        return iter(self.statements)

    @property
    def independent(self) -> List[CiStatement]:
        return [s for s in self.statements if s.kind is CiKind.INDEPENDENT]

    @property
    def dependent(self) -> List[CiStatement]:
        return [s for s in self.statements if s.kind is CiKind.DEPENDENT]

    def relabel(self, permutation) -> "CiCatalog":
        relabelled = [
            CiStatement(
                permutation[s.j],
                permutation[s.k],
                tuple(permutation[v] for v in s.conditioning_set),
                s.kind,
            )
            for s in self.statements
        ]
        target = None if self.target is None else permutation[self.target]
        return CiCatalog(
            tuple(sorted(relabelled, key=CiStatement.sort_key)), self.scope, target
        )

    def to_dict(self) -> Dict:
        return {
            "scope": self.scope.value,
            "target": self.target,
            "statements": [s.to_dict() for s in self.statements],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "CiCatalog":
        reject_unknown_keys(data, {"scope", "target", "statements"}, "CI catalog", InvalidSpec)
        return cls(
            tuple(CiStatement.from_dict(s) for s in data["statements"]),
            CatalogScope(data.get("scope", "global")),
            data.get("target"),
        )


def derive_ci_catalog(
    graph: CausalGraph,
    max_cond_size: Optional[int] = None,
    max_statements: Optional[int] = None,
) -> CiCatalog:
    """
    Enumerate every CI statement implied by ``graph``.

    For each unordered pair, every conditioning set of size at most
    ``max_cond_size`` that d-separates the pair gives an INDEPENDENT
    statement; removing any single element from such a separator gives a
    DEPENDENT statement when the smaller set no longer separates the pair.

    Args:
        graph: Ground-truth causal graph
        max_cond_size: Largest conditioning set to enumerate (None for no cap)
        max_statements: Hard cap on the catalog size (defaults to the
            ``max_statements`` setting)

    Returns:
        GLOBAL catalog in pair, set, kind order

    Raises:
        BudgetExceeded: if the catalog would exceed ``max_statements``
    """
    if max_statements is None:
        max_statements = config.max_statements
    cap = graph.node_count if max_cond_size is None else max_cond_size
    if cap < 0:
        raise ValueError(f"max_cond_size must be non-negative, got {max_cond_size}")

    found = set()
    for j, k in combinations(range(graph.node_count), 2):
        others = [v for v in range(graph.node_count) if v not in (j, k)]
        separated: Dict[Tuple[int, ...], bool] = {}

        def separates(cond: Tuple[int, ...]) -> bool:
            if cond not in separated:
                separated[cond] = is_d_separated(graph, j, k, cond)
            return separated[cond]

        for size in range(min(cap, len(others)) + 1):
            for cond in combinations(others, size):
                if not separates(cond):
                    continue
                found.add(CiStatement(j, k, cond, CiKind.INDEPENDENT))
                for v in cond:
                    reduced = tuple(x for x in cond if x != v)
                    if not separates(reduced):
                        found.add(CiStatement(j, k, reduced, CiKind.DEPENDENT))
                if len(found) > max_statements:
                    raise BudgetExceeded(
                        f"Catalog exceeds {max_statements} statements; "
                        "set max_cond_size to bound the enumeration"
                    )

    statements = tuple(sorted(found, key=CiStatement.sort_key))
    logger.debug(
        "Derived %d statements (%d independent) over %d nodes",
        len(statements),
        sum(s.kind is CiKind.INDEPENDENT for s in statements),
        graph.node_count,
    )
    return CiCatalog(statements, CatalogScope.GLOBAL)


def local_filter(catalog: CiCatalog, target: int) -> CiCatalog:
    """
    Keep the statements whose pair involves ``target``.
    """
    if catalog.scope is not CatalogScope.GLOBAL:
        raise CatalogScopeError("Only a global catalog can be filtered to a target")
    kept = tuple(s for s in catalog.statements if target in s.pair)
    return CiCatalog(kept, CatalogScope.LOCAL, target)


def statements_from(items: Iterable[Tuple[int, int, Iterable[int], str]]) -> List[CiStatement]:
    """
    Build statements from ``(j, k, conditioning_set, kind)`` tuples.
    """
    return [CiStatement(j, k, tuple(cond), CiKind(kind)) for j, k, cond, kind in items]
