"""
Conventional fidelity metrics and cross-run aggregation.

Shape and Trend follow the usual column-shape and column-pair-trend
definitions; DCR is the median distance of synthetic rows to their closest
reference row. ADTM rescales a metric across competing generators and
Spearman correlates metrics across runs.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np
from scipy.stats import ks_2samp, spearmanr
from sklearn.neighbors import NearestNeighbors

from . import config
from .data import Table, fit_preprocessor
from .exceptions import ConstantVector, EmptyTable, LengthMismatch, NonFiniteValue

logger = logging.getLogger(__name__)


class MetricDirection(str, Enum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


METRIC_DIRECTIONS = {
    "shape": MetricDirection.HIGHER_BETTER,
    "trend": MetricDirection.HIGHER_BETTER,
    "dcr": MetricDirection.HIGHER_BETTER,
    "local_utility": MetricDirection.HIGHER_BETTER,
    "global_utility": MetricDirection.HIGHER_BETTER,
    "local_ci": MetricDirection.HIGHER_BETTER,
    "global_ci": MetricDirection.HIGHER_BETTER,
}

METRIC_NAMES = tuple(METRIC_DIRECTIONS)


@dataclass(frozen=True)
class MetricValue:
    name: str
    value: float
    direction: MetricDirection

    @classmethod
    def of(cls, name: str, value: float) -> "MetricValue":
        return cls(name, float(value), METRIC_DIRECTIONS[name])


def _check_pair(ref: Table, syn: Table):
    ref.require_schema(syn)
    if ref.n_rows == 0 or syn.n_rows == 0:
        raise EmptyTable("Both tables need at least one row")


def _present(cells: np.ndarray) -> np.ndarray:
    return cells[~np.isnan(cells)]


def _frequencies(codes: np.ndarray, cardinality: int) -> np.ndarray:
    counts = np.bincount(codes.astype(np.int64), minlength=cardinality).astype(np.float64)
    total = counts.sum()
    return counts / total if total else counts


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def column_shape(ref: Table, syn: Table, j: int) -> float:
    a, b = _present(ref.column(j)), _present(syn.column(j))
    if a.size == 0 or b.size == 0:
        return 1.0 if a.size == b.size else 0.0
    column = ref.columns[j]
    if column.is_categorical:
        return 1.0 - total_variation(
            _frequencies(a, column.cardinality), _frequencies(b, column.cardinality)
        )
    return 1.0 - float(ks_2samp(a, b).statistic)


def shape_score(ref: Table, syn: Table) -> float:
    """
    Mean column-shape similarity in [0, 1].

    Numerical columns score 1 - KS statistic, categorical columns
    1 - total variation distance of category frequencies.
    """
    _check_pair(ref, syn)
    return float(np.mean([column_shape(ref, syn, j) for j in range(ref.n_cols)]))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation over complete rows; 0 when either side is constant."""
    keep = ~(np.isnan(x) | np.isnan(y))
    x, y = x[keep], y[keep]
    if x.size < 2:
        return 0.0
    x = x - x.mean()
    y = y - y.mean()
    denominator = math.sqrt(float(x @ x) * float(y @ y))
    if denominator == 0.0:
        return 0.0
    return float(np.clip((x @ y) / denominator, -1.0, 1.0))


def quantile_edges(cells: np.ndarray, bins: int) -> np.ndarray:
    """Inner bin edges at the reference quantiles 1/bins, ..., (bins-1)/bins."""
    cells = _present(cells)
    if cells.size == 0:
        return np.zeros(0)
    return np.quantile(cells, np.linspace(0.0, 1.0, bins + 1)[1:-1])


def _discretize(table: Table, j: int, edges) -> Tuple[np.ndarray, int]:
    """Category codes, or bin indices (count of inner edges <= value)."""
    cells = table.column(j)
    column = table.columns[j]
    if column.is_categorical:
        return cells, column.cardinality
    binned = np.searchsorted(edges, cells, side="right").astype(np.float64)
    binned[np.isnan(cells)] = np.nan
    return binned, len(edges) + 1


def _joint_frequencies(table: Table, i: int, j: int, edges_i, edges_j) -> np.ndarray:
    a, size_a = _discretize(table, i, edges_i)
    b, size_b = _discretize(table, j, edges_j)
    keep = ~(np.isnan(a) | np.isnan(b))
    joint = np.zeros((size_a, size_b))
    np.add.at(joint, (a[keep].astype(np.int64), b[keep].astype(np.int64)), 1.0)
    total = joint.sum()
    return joint / total if total else joint


def pair_trend(ref: Table, syn: Table, i: int, j: int, bins: int = None) -> float:
    bins = config.trend_bins if bins is None else bins
    if not ref.is_categorical(i) and not ref.is_categorical(j):
        gap = abs(_pearson(ref.column(i), ref.column(j)) - _pearson(syn.column(i), syn.column(j)))
        return 1.0 - gap / 2.0
    edges_i = None if ref.is_categorical(i) else quantile_edges(ref.column(i), bins)
    edges_j = None if ref.is_categorical(j) else quantile_edges(ref.column(j), bins)
    return 1.0 - total_variation(
        _joint_frequencies(ref, i, j, edges_i, edges_j),
        _joint_frequencies(syn, i, j, edges_i, edges_j),
    )


def trend_score(ref: Table, syn: Table) -> float:
    """
    Mean column-pair similarity in [0, 1].

    Numerical pairs score ``1 - |rho_ref - rho_syn| / 2``; pairs with a
    categorical column score 1 - total variation between the joint
    frequency tables, binning the numerical partner at reference quantiles.
    """
    _check_pair(ref, syn)
    scores = [pair_trend(ref, syn, i, j) for i, j in combinations(range(ref.n_cols), 2)]
    return float(np.mean(scores))


def _dcr_design(prep, table: Table) -> np.ndarray:
    """Z-scored numericals and one-hot categoricals scaled so a mismatch costs 1."""
    weights = []
    for column in table.columns:
        if column.is_categorical:
            weights.extend([1.0 / math.sqrt(2.0)] * column.cardinality)
        else:
            weights.append(1.0)
    return prep.encode(table) * np.asarray(weights)


def dcr(ref: Table, syn: Table) -> float:
    """
    Median distance from each synthetic row to its closest reference row.

    Both tables are encoded with statistics fitted on ``ref``: numerical
    columns are z-scored and a categorical mismatch adds 1 to the squared
    distance.
    """
    _check_pair(ref, syn)
    prep = fit_preprocessor(ref)
    index = NearestNeighbors(n_neighbors=1).fit(_dcr_design(prep, ref))
    distances, _ = index.kneighbors(_dcr_design(prep, syn))
    return float(np.median(distances[:, 0]))


def adtm_normalize(
    values: Sequence[Tuple[str, float]], direction: MetricDirection
) -> List[Tuple[str, float]]:
    """
    Affinely map values so the best entity gets 1 and the worst 0.

    Args:
        values: (entity, value) pairs
        direction: Whether higher or lower raw values are better

    Returns:
        (entity, normalized value) pairs in input order; all 1.0 when every
        value is equal
    """
    if not values:
        raise ValueError("ADTM needs at least one value")
    raw = np.array([v for _, v in values], dtype=np.float64)
    if not np.isfinite(raw).all():
        raise NonFiniteValue("ADTM values must be finite")
    low, high = float(raw.min()), float(raw.max())
    if high == low:
        return [(entity, 1.0) for entity, _ in values]
    if MetricDirection(direction) is MetricDirection.HIGHER_BETTER:
        scaled = (raw - low) / (high - low)
    else:
        scaled = (high - raw) / (high - low)
    return [(entity, float(s)) for (entity, _), s in zip(values, scaled)]


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Spearman rank correlation with average ranks for ties.

    Raises:
        LengthMismatch: lengths differ or are below 2
        ConstantVector: either side is constant
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise LengthMismatch(
            f"Spearman needs two equal-length vectors of at least 2, got {x.size} and {y.size}"
        )
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise NonFiniteValue("Spearman inputs must be finite")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ConstantVector("Spearman is undefined for a constant vector")
    rho, _ = spearmanr(x, y)
    return float(np.clip(rho, -1.0, 1.0))
