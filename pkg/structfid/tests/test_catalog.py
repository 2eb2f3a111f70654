"""
Tests for CI catalog derivation and filtering.
"""

from itertools import combinations

import pytest

from structfid.catalog import (
    CatalogScope,
    CiCatalog,
    CiKind,
    CiStatement,
    derive_ci_catalog,
    local_filter,
    statements_from,
)
from structfid.exceptions import BudgetExceeded, CatalogScopeError, InvalidSpec, OverlappingSet
from structfid.graph import is_d_separated

from .fixtures.factories import GraphFactory


def enumerate_catalog(graph):
    """Brute-force catalog built straight from the d-separation oracle."""
    found = set()
    nodes = range(graph.node_count)
    for j, k in combinations(nodes, 2):
        others = [v for v in nodes if v not in (j, k)]
        for size in range(len(others) + 1):
            for cond in combinations(others, size):
                if not is_d_separated(graph, j, k, cond):
                    continue
                found.add((j, k, cond, "independent"))
                for v in cond:
                    smaller = tuple(x for x in cond if x != v)
                    if not is_d_separated(graph, j, k, smaller):
                        found.add((j, k, smaller, "dependent"))
    return found


def as_tuples(catalog):
    return {(s.j, s.k, s.conditioning_set, s.kind.value) for s in catalog}


@pytest.mark.unit
class TestCiStatement:
    """Test CI statement normalisation."""

    def test_pair_is_ordered(self):
        statement = CiStatement(4, 1, (3, 2), CiKind.INDEPENDENT)

        assert statement.pair == (1, 4)
        assert statement.conditioning_set == (2, 3)

    def test_overlap_rejected(self):
        with pytest.raises(OverlappingSet):
            CiStatement(0, 1, (1,), CiKind.DEPENDENT)

    def test_str(self):
        statement = CiStatement(0, 2, (1,), "independent")

        assert str(statement) == "0 _||_ 2 | {1}"


@pytest.mark.unit
class TestDeriveCatalog:
    """Test catalog derivation on small graphs."""

    def test_chain(self, chain_graph):
        catalog = derive_ci_catalog(chain_graph)

        assert list(catalog) == statements_from(
            [(0, 2, (), "dependent"), (0, 2, (1,), "independent")]
        )
        assert catalog.scope is CatalogScope.GLOBAL

    def test_fork(self):
        catalog = derive_ci_catalog(GraphFactory.fork())

        assert list(catalog) == statements_from(
            [(1, 2, (), "dependent"), (1, 2, (0,), "independent")]
        )

    def test_collider(self):
        catalog = derive_ci_catalog(GraphFactory.collider())

        assert list(catalog) == statements_from([(0, 1, (), "independent")])

    def test_gravity_contains_known_statements(self, gravity_graph):
        catalog = derive_ci_catalog(gravity_graph)

        assert CiStatement(0, 5, (2,), CiKind.INDEPENDENT) in catalog.statements
        assert CiStatement(0, 5, (), CiKind.DEPENDENT) in catalog.statements
        assert CiStatement(0, 1, (), CiKind.INDEPENDENT) in catalog.statements

    def test_gravity_matches_brute_force(self, gravity_graph):
        catalog = derive_ci_catalog(gravity_graph)

        assert as_tuples(catalog) == enumerate_catalog(gravity_graph)

    def test_statements_are_sorted_and_unique(self, gravity_graph):
        catalog = derive_ci_catalog(gravity_graph)
        keys = [s.sort_key() for s in catalog]

        assert keys == sorted(keys)
        assert len(set(catalog.statements)) == len(catalog)

    def test_adjacent_pairs_never_appear(self, gravity_graph):
        catalog = derive_ci_catalog(gravity_graph)
        edges = {tuple(sorted(e)) for e in gravity_graph.edges}

        assert not any(s.pair in edges and s.kind is CiKind.INDEPENDENT for s in catalog)

    def test_max_cond_size_caps_sets(self, gravity_graph):
        full = derive_ci_catalog(gravity_graph)
        capped = derive_ci_catalog(gravity_graph, max_cond_size=1)

        assert all(len(s.conditioning_set) <= 1 for s in capped.independent)
        assert set(capped.statements) <= set(full.statements)
        assert len(capped) < len(full)

    def test_budget_exceeded(self, gravity_graph):
        with pytest.raises(BudgetExceeded):
            derive_ci_catalog(gravity_graph, max_statements=5)

    def test_negative_cap_rejected(self, chain_graph):
        with pytest.raises(ValueError):
            derive_ci_catalog(chain_graph, max_cond_size=-1)

    def test_relabel_equivariance(self, gravity_graph):
        permutation = [3, 0, 6, 1, 5, 2, 4]
        catalog = derive_ci_catalog(gravity_graph)

        direct = derive_ci_catalog(gravity_graph.relabel(permutation))

        assert catalog.relabel(permutation) == direct

    def test_deterministic(self, gravity_graph):
        assert derive_ci_catalog(gravity_graph) == derive_ci_catalog(gravity_graph)


@pytest.mark.unit
class TestLocalFilter:
    """Test filtering a catalog to statements about the target."""

    def test_keeps_target_pairs(self, gravity_graph):
        catalog = derive_ci_catalog(gravity_graph)

        local = local_filter(catalog, 5)

        assert local.scope is CatalogScope.LOCAL
        assert local.target == 5
        assert local.statements == tuple(s for s in catalog if 5 in s.pair)
        assert len(local) > 0

    def test_local_catalog_cannot_be_filtered(self, gravity_graph):
        local = local_filter(derive_ci_catalog(gravity_graph), 5)

        with pytest.raises(CatalogScopeError):
            local_filter(local, 5)

    def test_local_requires_target_statements(self):
        statements = statements_from([(0, 2, (1,), "independent")])

        with pytest.raises(CatalogScopeError):
            CiCatalog(tuple(statements), CatalogScope.LOCAL, 1)


@pytest.mark.unit
class TestCatalogSerialisation:
    """Test catalog dict conversion."""

    def test_from_dict_restores_catalog(self, gravity_graph):
        catalog = local_filter(derive_ci_catalog(gravity_graph), 6)

        assert CiCatalog.from_dict(catalog.to_dict()) == catalog

    def test_unknown_key_rejected(self, chain_graph):
        data = derive_ci_catalog(chain_graph).to_dict()
        data["variables"] = ["a", "b", "c"]

        with pytest.raises(InvalidSpec):
            CiCatalog.from_dict(data)

    def test_duplicates_rejected(self):
        statement = CiStatement(0, 1, (), CiKind.INDEPENDENT)

        with pytest.raises(InvalidSpec):
            CiCatalog((statement, statement))
