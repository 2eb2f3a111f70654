"""
Fresh samples from the ground-truth structural causal model.
"""

import numpy as np

from ..data import Table
from ..exceptions import InvalidSpec, SchemaMismatch
from ..scm import ScmSpec, sample_scm
from .base import BaseGenerator, GeneratorKind
from .registry import generator_registry


@generator_registry.register(GeneratorKind.SCM_ORACLE)
class ScmOracleGenerator(BaseGenerator):

    def _fit(self, ref: Table):
        scm = self.spec.scm
        if not isinstance(scm, ScmSpec):
            raise InvalidSpec("SCM_ORACLE needs a ground-truth SCM spec")
        if scm.variables != ref.columns or scm.target_index != ref.target_index:
            raise SchemaMismatch("SCM variables do not match the reference schema")

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return sample_scm(self.spec.scm, n, self.spec.seed).values
