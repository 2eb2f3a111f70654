"""
SMOTE interpolation for mixed tabular data.

Each synthetic row starts from a base row drawn uniformly within its class and
moves a uniform fraction of the way towards one of the base row's ``k`` nearest
same-class neighbours. Distances use the z-scored numerical columns only.
Categorical feature cells take the most frequent value among the base row's
``k`` neighbours, as SMOTE-NC does; a tie keeps the base row's value if it is
among the most frequent, otherwise the lowest category code wins. Class counts
follow the reference proportions. Regression tables are treated as a single
class, with the target interpolated like any other numerical column.

Only interpolated rows are emitted, never the reference rows themselves.
"""

import logging
from typing import List, Tuple

import numpy as np
from sklearn.metrics import pairwise_distances_chunked

from ..exceptions import ClassTooSmall
from ..utils import largest_remainder
from .base import BaseGenerator, GeneratorKind
from .registry import generator_registry

logger = logging.getLogger(__name__)


def nearest_neighbours(points: np.ndarray, k: int) -> np.ndarray:
    """
    Indices of the ``k`` nearest other rows of every row.

    Ties in distance go to the lower row index.

    Args:
        points: Array of shape (n, d), n >= 2
        k: Neighbour count, capped at n - 1

    Returns:
        Integer array of shape (n, min(k, n - 1))
    """
    n = points.shape[0]
    k = min(k, n - 1)
    if points.shape[1] == 0:
        points = np.zeros((n, 1))

    def reduce(chunk: np.ndarray, start: int) -> np.ndarray:
        chunk = np.array(chunk, copy=True)
        rows = np.arange(chunk.shape[0])
        chunk[rows, start + rows] = np.inf
        kth = np.partition(chunk, k - 1, axis=1)[:, k - 1]
        found = np.empty((chunk.shape[0], k), dtype=np.int64)
        for r in rows:
            candidates = np.flatnonzero(chunk[r] <= kth[r])
            order = np.argsort(chunk[r, candidates], kind="stable")
            found[r] = candidates[order[:k]]
        return found

    return np.vstack(list(pairwise_distances_chunked(points, reduce_func=reduce)))


def neighbourhood_mode(base: np.ndarray, votes: np.ndarray, cardinality: int) -> np.ndarray:
    """
    Most frequent category code per row of ``votes``.

    Args:
        base: Code of each row's base cell, shape (m,)
        votes: Codes of the neighbours' cells, shape (m, k)
        cardinality: Number of category codes

    Returns:
        Codes of shape (m,); the base code survives a tie it takes part in
    """
    m = votes.shape[0]
    counts = np.zeros((m, cardinality), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(m), votes.shape[1]), votes.ravel()), 1)
    winner = counts.argmax(axis=1)
    keep = counts[np.arange(m), base] == counts[np.arange(m), winner]
    return np.where(keep, base, winner)


@generator_registry.register(GeneratorKind.SMOTE)
class SmoteGenerator(BaseGenerator):

    def _groups(self, n: int) -> List[Tuple[np.ndarray, int]]:
        """Row indices of every class with its share of the ``n`` synthetic rows."""
        ref = self.ref
        if not ref.target.is_categorical:
            if ref.n_rows < 2:
                raise ClassTooSmall("SMOTE needs at least 2 reference rows")
            return [(np.arange(ref.n_rows), n)]

        labels = self._values[:, ref.target_index].astype(np.int64)
        counts = np.bincount(labels, minlength=ref.target.cardinality)
        present = [c for c in range(len(counts)) if counts[c] > 0]
        small = [ref.target.categories[c] for c in present if counts[c] < 2]
        if small:
            raise ClassTooSmall(f"SMOTE needs at least 2 rows per class; {small} have fewer")
        allocation = largest_remainder([int(counts[c]) for c in present], n)
        return [(np.flatnonzero(labels == c), m) for c, m in zip(present, allocation)]

    def _fit(self, ref):
        self._values = self.preprocessor.impute(ref).values
        self._numerical = [j for j, c in enumerate(ref.columns) if not c.is_categorical]
        self._categorical = [
            j for j, c in enumerate(ref.columns) if c.is_categorical and j != ref.target_index
        ]
        self._scaled = self.preprocessor.transform(ref).values[:, self._numerical]

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        numerical = self._numerical
        blocks = []
        for members, m in self._groups(n):
            if m == 0:
                continue
            neighbours = nearest_neighbours(self._scaled[members], self.spec.k)
            base = rng.integers(len(members), size=m)
            partner = neighbours[base, rng.integers(neighbours.shape[1], size=m)]
            gap = rng.random(m)[:, None]

            rows = self._values[members[base]].copy()
            towards = self._values[members[partner]]
            rows[:, numerical] += gap * (towards[:, numerical] - rows[:, numerical])

            around = members[neighbours[base]]
            for j in self._categorical:
                rows[:, j] = neighbourhood_mode(
                    rows[:, j].astype(np.int64),
                    self._values[around, j].astype(np.int64),
                    self.ref.columns[j].cardinality,
                )
            blocks.append(rows)
        return np.vstack(blocks)
