"""
Column-wise independent resampling.

Every column is bootstrapped on its own, which keeps each marginal and
destroys every dependency between columns.
"""

import numpy as np

from .base import BaseGenerator, GeneratorKind
from .registry import generator_registry


@generator_registry.register(GeneratorKind.MARGINAL_INDEPENDENT)
class MarginalIndependentGenerator(BaseGenerator):

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        values = self.ref.values
        columns = [values[rng.integers(values.shape[0], size=n), j] for j in range(values.shape[1])]
        return np.column_stack(columns)
