"""
Tests for the conditional-independence tests and the CI score.
"""

import math

import numpy as np
import pytest

from structfid.catalog import CatalogScope, CiCatalog, CiKind, CiStatement, derive_ci_catalog
from structfid.ci_tests import (
    chi_square_ci,
    ci_score,
    evaluate_catalog,
    partial_corr_ci,
    residual_ci,
    select_test,
)
from structfid.exceptions import (
    EmptyCatalog,
    InsufficientRows,
    NonCategoricalColumn,
    NonNumericalColumn,
)
from structfid.scm import sample_scm

from .fixtures.factories import ScmSpecFactory, TableFactory


def rows_from_counts(counts_by_stratum):
    """Expand {stratum: 2x2 count matrix} into (j, k, s) rows."""
    rows = []
    for stratum, counts in counts_by_stratum.items():
        for a in range(2):
            for b in range(2):
                rows.extend([[a, b, stratum]] * counts[a][b])
    return np.array(rows, dtype=float)


def pearson_statistic(counts):
    observed = np.asarray(counts, dtype=float)
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / observed.sum()
    return float(((observed - expected) ** 2 / expected).sum())


def categorical_table(values):
    width = values.shape[1]
    return TableFactory.create(values, kinds=["categorical"] * width)


def numerical_table(values):
    return TableFactory.create(values)


@pytest.mark.unit
class TestChiSquare:
    """Test the stratified chi-square test."""

    def test_matches_pearson_statistic(self):
        strata = {0: [[10, 20], [30, 5]], 1: [[8, 8], [4, 12]]}
        table = categorical_table(rows_from_counts(strata))

        result = chi_square_ci(table, 0, 1, [2], alpha=0.01)

        expected = pearson_statistic(strata[0]) + pearson_statistic(strata[1])
        assert result.statistic == pytest.approx(expected)
        assert result.dof == 2
        # The chi-square survival function with two degrees of freedom is exp(-x / 2).
        assert result.p_value == pytest.approx(math.exp(-expected / 2))
        assert result.rejected

    def test_unconditional(self):
        table = categorical_table(rows_from_counts({0: [[25, 25], [25, 25]]}))

        result = chi_square_ci(table, 0, 1, [], alpha=0.05)

        assert result.statistic == pytest.approx(0.0)
        assert result.p_value == pytest.approx(1.0)
        assert not result.rejected

    def test_degenerate_stratum_is_skipped(self):
        strata = {0: [[10, 20], [30, 5]], 1: [[6, 9], [0, 0]]}
        table = categorical_table(rows_from_counts(strata))

        result = chi_square_ci(table, 0, 1, [2], alpha=0.01)

        assert result.dof == 1
        assert result.statistic == pytest.approx(pearson_statistic(strata[0]))

    def test_no_degrees_of_freedom(self):
        table = categorical_table(np.array([[0.0, 0.0], [0.0, 1.0], [0.0, 1.0]]))

        result = chi_square_ci(table, 0, 1, [], alpha=0.01)

        assert result.dof == 0
        assert result.p_value == 1.0

    def test_rejects_numerical(self, classification_table):
        with pytest.raises(NonCategoricalColumn):
            chi_square_ci(classification_table, 0, 2, [], alpha=0.01)


@pytest.mark.unit
class TestPartialCorrelation:
    """Test the Fisher-z partial correlation test."""

    def test_unconditional_p_value(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(100)
        y = 0.2 * x + rng.standard_normal(100)
        table = numerical_table(np.column_stack([x, y]))

        result = partial_corr_ci(table, 0, 1, [], alpha=0.01)

        r = np.corrcoef(x, y)[0, 1]
        z = math.sqrt(100 - 3) * math.atanh(r)
        assert result.statistic == pytest.approx(z)
        assert result.p_value == pytest.approx(math.erfc(abs(z) / math.sqrt(2)))

    def test_conditioning_removes_chain_dependence(self, linear_chain_scm):
        table = sample_scm(linear_chain_scm, 3000, seed=8)

        marginal = partial_corr_ci(table, 0, 2, [], alpha=0.01)
        conditional = partial_corr_ci(table, 0, 2, [1], alpha=0.01)

        assert marginal.rejected
        assert conditional.p_value > 0.001
        assert conditional.dof == 1

    def test_rejects_categorical(self, classification_table):
        with pytest.raises(NonNumericalColumn):
            partial_corr_ci(classification_table, 2, 3, [1], alpha=0.01)

    def test_insufficient_rows(self):
        table = numerical_table(np.arange(9.0).reshape(3, 3))

        with pytest.raises(InsufficientRows):
            partial_corr_ci(table, 0, 1, [], alpha=0.01)

    def test_constant_column_is_independent(self):
        rng = np.random.default_rng(1)
        table = numerical_table(np.column_stack([np.ones(50), rng.standard_normal(50)]))

        result = partial_corr_ci(table, 0, 1, [], alpha=0.01)

        assert result.statistic == 0.0
        assert not result.rejected


@pytest.mark.unit
class TestResidualTest:
    """Test the mixed-kind residualisation test."""

    def test_dependent_pair_rejected(self, classification_table):
        result = residual_ci(classification_table, 1, 3, [], alpha=0.01)

        assert result.rejected

    def test_mediated_pair_not_rejected(self, classification_table):
        result = residual_ci(classification_table, 1, 3, [2], alpha=0.01)

        assert result.p_value > 0.001
        assert result.dof == 1

    def test_categorical_conditioning_width(self, classification_table):
        result = residual_ci(classification_table, 0, 2, [1], alpha=0.01)

        assert result.dof == 1


@pytest.mark.unit
class TestSelectTest:
    """Test test-family selection by variable kind."""

    def test_families(self, classification_table):
        def name(j, k, s):
            statement = CiStatement(j, k, s, CiKind.INDEPENDENT)
            return select_test(classification_table, statement)[0]

        assert name(0, 1, ()) == "chi_square"
        assert name(2, 3, ()) == "partial_corr"
        assert name(2, 4, (1,)) == "residual"
        assert name(0, 1, (2,)) == "residual"


@pytest.mark.unit
class TestCiScore:
    """Test catalog evaluation and the CI score."""

    def test_empty_catalog(self, classification_table):
        with pytest.raises(EmptyCatalog):
            ci_score(CiCatalog((), CatalogScope.GLOBAL), classification_table)

    def test_score_is_fraction_holding(self, classification_scm, classification_table):
        catalog = derive_ci_catalog(classification_scm.graph, max_cond_size=1)

        outcomes = evaluate_catalog(catalog, classification_table, alpha=0.01)
        score = ci_score(catalog, classification_table, alpha=0.01)

        assert [o.statement for o in outcomes] == list(catalog)
        assert score == pytest.approx(sum(o.holds for o in outcomes) / len(catalog))
        assert 0.0 <= score <= 1.0

    def test_parallel_matches_serial(self, classification_scm, classification_table):
        catalog = derive_ci_catalog(classification_scm.graph, max_cond_size=1)

        serial = evaluate_catalog(catalog, classification_table, alpha=0.01)
        parallel = evaluate_catalog(catalog, classification_table, alpha=0.01, max_workers=3)

        assert serial == parallel

    def test_dependent_statement_holds_when_rejected(self, classification_table):
        statement = CiStatement(1, 3, (), CiKind.DEPENDENT)
        catalog = CiCatalog((statement,))

        assert ci_score(catalog, classification_table, alpha=0.01) == 1.0

    def test_catalog_out_of_range(self, classification_table):
        catalog = CiCatalog((CiStatement(0, 9, (), CiKind.INDEPENDENT),))

        with pytest.raises(IndexError):
            evaluate_catalog(catalog, classification_table)


CALIBRATION_CASES = {
    # test, SCM factory, null statement, strong alternative
    "chi_square": (
        chi_square_ci,
        lambda: ScmSpecFactory.categorical_chain(3, 0.9),
        (0, 2, (1,)),
        (0, 1, (2,)),
    ),
    "partial_corr": (
        partial_corr_ci,
        lambda: ScmSpecFactory.linear_chain(3),
        (0, 2, (1,)),
        (0, 1, (2,)),
    ),
    "residual": (residual_ci, ScmSpecFactory.fork_classification, (2, 3, (0,)), (2, 3, (1,))),
}


@pytest.mark.slow
class TestCalibration:
    """Check error rates of the tests on simulated data at alpha 0.01."""

    @pytest.mark.parametrize("case", sorted(CALIBRATION_CASES))
    def test_type_one_error_and_power(self, case):
        test, make_scm, null, alternative = CALIBRATION_CASES[case]
        scm = make_scm()
        false_rejections = detections = 0
        for seed in range(200):
            table = sample_scm(scm, 5000, seed)
            false_rejections += test(table, *null, alpha=0.01).rejected
            detections += test(table, *alternative, alpha=0.01).rejected

        assert false_rejections / 200 <= 0.05
        assert detections / 200 >= 0.95

    def test_selected_test_matches_case(self):
        for case, (_, make_scm, null, _) in CALIBRATION_CASES.items():
            table = sample_scm(make_scm(), 20, 0)
            j, k, s = null

            assert select_test(table, CiStatement(j, k, s, CiKind.INDEPENDENT))[0] == case

    def test_reference_sample_scores_high(self, categorical_chain_scm):
        catalog = derive_ci_catalog(categorical_chain_scm.graph)
        scores = [
            ci_score(catalog, sample_scm(categorical_chain_scm, 20000, seed=seed), alpha=0.01)
            for seed in range(10)
        ]

        assert sum(score >= 0.9 for score in scores) >= 9, scores
