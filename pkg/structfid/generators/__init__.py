from ..data import Table
from .base import BaseGenerator, GeneratorKind, GeneratorSpec
from .registry import generator_registry

# Importing the modules registers the built-in generators
from . import marginal, noisy_copy, reference, scm_oracle, smote  # noqa: E402,F401

__all__ = [
    "BaseGenerator",
    "GeneratorKind",
    "GeneratorSpec",
    "generate",
    "generator_registry",
]


def generate(spec: GeneratorSpec, ref: Table, n: int) -> Table:
    """
    Fit the generator described by ``spec`` on ``ref`` and draw ``n`` rows.

    Args:
        spec: Generator kind, parameters and seed
        ref: Reference table
        n: Number of rows to generate

    Returns:
        Table with ``n`` rows and the schema of ``ref``
    """
    return generator_registry.get(spec.kind)(spec).fit(ref).generate(n)
