"""
Bootstrap of reference rows with tunable corruption.

Numerical cells get Gaussian noise of ``sigma`` reference standard deviations;
categorical cells are replaced by a uniformly drawn category with probability
``min(sigma, 1)``. The bootstrap indices are drawn first, so every ``sigma``
shares the same resampled rows for a given seed.
"""

import numpy as np

from .base import BaseGenerator, GeneratorKind
from .registry import generator_registry


@generator_registry.register(GeneratorKind.NOISY_COPY)
class NoisyCopyGenerator(BaseGenerator):

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        sigma = self.spec.sigma
        values = self.ref.values[rng.integers(self.ref.n_rows, size=n)].copy()
        if sigma == 0:
            return values

        flip = min(sigma, 1.0)
        for j, column in enumerate(self.ref.columns):
            cells = values[:, j]
            if column.is_categorical:
                mask = rng.random(n) < flip
                draws = rng.integers(column.cardinality, size=n)
                mask &= ~np.isnan(cells)
                cells[mask] = draws[mask]
            else:
                cells += sigma * self.preprocessor.stds[j] * rng.standard_normal(n)
        return values
