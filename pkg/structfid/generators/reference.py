"""
The reference data itself, or its first ``n`` rows.
"""

import numpy as np

from ..exceptions import NotEnoughRows
from .base import BaseGenerator, GeneratorKind
from .registry import generator_registry


@generator_registry.register(GeneratorKind.REFERENCE)
class ReferenceGenerator(BaseGenerator):

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n > self.ref.n_rows:
            raise NotEnoughRows(f"Requested {n} rows from a reference of {self.ref.n_rows}")
        return self.ref.values[:n]
