"""
Pytest configuration and fixtures for structfid tests.
"""

import pytest

from structfid.data import split
from structfid.predictors import PredictorConfig, PredictorKind
from structfid.scm import sample_scm

from .fixtures.factories import GraphFactory, ScmSpecFactory, TableFactory


@pytest.fixture
def chain_graph():
    """Create the chain 0 -> 1 -> 2."""
    return GraphFactory.chain(3)


@pytest.fixture
def gravity_graph():
    """Create the 7-node gravity graph."""
    return GraphFactory.gravity()


@pytest.fixture
def classification_scm():
    """Create the 5-node mixed classification SCM."""
    return ScmSpecFactory.classification()


@pytest.fixture
def fork_classification_scm():
    """Create the 5-node classification SCM with a categorical fork root."""
    return ScmSpecFactory.fork_classification()


@pytest.fixture
def categorical_chain_scm():
    """Create a 6-node categorical chain SCM with strong CPTs."""
    return ScmSpecFactory.categorical_chain(6, 0.9)


@pytest.fixture
def linear_chain_scm():
    """Create a 4-node linear-Gaussian chain SCM."""
    return ScmSpecFactory.linear_chain(4)


@pytest.fixture
def classification_table(classification_scm):
    """Sample 600 rows from the classification SCM."""
    return sample_scm(classification_scm, 600, seed=11)


@pytest.fixture
def classification_split(classification_table):
    """Reference, validation and test tables of the classification sample."""
    return split(classification_table, seed=3, repeat_id=0).tables(classification_table)


@pytest.fixture
def blobs_table():
    """Create a separable two-blob classification table."""
    return TableFactory.blobs()


@pytest.fixture
def fast_predictors():
    """Predictor config without the boosted trees, for quicker tests."""
    return PredictorConfig(roster=(PredictorKind.KNN, PredictorKind.LINEAR))
