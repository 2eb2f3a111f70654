import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Dict, Optional

import numpy as np

from .. import config
from ..data import Preprocessor, Table, fit_preprocessor
from ..exceptions import ConfigError, EmptyTable
from ..utils import reject_unknown_keys

logger = logging.getLogger(__name__)


class GeneratorKind(str, Enum):
    REFERENCE = "reference"
    SMOTE = "smote"
    MARGINAL_INDEPENDENT = "marginal_independent"
    SCM_ORACLE = "scm_oracle"
    NOISY_COPY = "noisy_copy"


@dataclass(frozen=True)
class GeneratorSpec:
    """
    A generator kind with its parameters.

    ``scm`` is only used by SCM_ORACLE; the benchmark attaches the dataset's
    ground-truth spec. ``size_fraction`` scales the generated row count
    relative to the reference size.
    """

    kind: GeneratorKind
    k: int = field(default_factory=lambda: config.smote_k)
    sigma: float = 0.0
    scm: Optional[object] = None
    seed: int = 0
    name: Optional[str] = None
    size_fraction: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", GeneratorKind(self.kind))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        self.validate()

    def validate(self):
        if self.k < 1:
            raise ConfigError(f"SMOTE k must be at least 1, got {self.k}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ConfigError(f"Noise sigma must be non-negative, got {self.sigma}")
        if not 0 < self.size_fraction <= 1:
            raise ConfigError(f"size_fraction must lie in (0, 1], got {self.size_fraction}")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind is GeneratorKind.NOISY_COPY:
            return f"noisy_copy_{self.sigma:g}"
        if self.kind is GeneratorKind.REFERENCE and self.size_fraction < 1:
            return f"reference_{self.size_fraction:g}"
        return self.kind.value

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return replace(self, seed=seed)

    def with_scm(self, scm) -> "GeneratorSpec":
        return replace(self, scm=scm)

    def row_count(self, n_ref: int) -> int:
        return max(1, int(round(self.size_fraction * n_ref)))

    def to_dict(self) -> Dict:
        data = asdict(self)
        data.pop("scm")
        data["kind"] = self.kind.value
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "GeneratorSpec":
        allowed = set(cls.__dataclass_fields__) - {"scm"}
        reject_unknown_keys(data, allowed, "generator", ConfigError)
        if "kind" not in data:
            raise ConfigError("Generator entry needs a 'kind'")
        return cls(**data)


class BaseGenerator(ABC):
    """
    Base class for synthetic data generators.

    Subclass this and decorate it with ``generator_registry.register(kind)``.
    """

    # Set by the registry decorator
    generator_kind: GeneratorKind = None

    def __init__(self, spec: GeneratorSpec):
        """
        Initialize the generator with its specification.

        Args:
            spec: GeneratorSpec instance
        """
        self.spec = spec
        self.ref: Optional[Table] = None
        self.preprocessor: Optional[Preprocessor] = None

    def fit(self, ref: Table) -> "BaseGenerator":
        """
        Fit the generator on reference rows.

        Args:
            ref: Reference table

        Returns:
            The fitted generator
        """
        if ref.n_rows == 0:
            raise EmptyTable("Cannot fit a generator on an empty table")
        self.ref = ref
        self.preprocessor = fit_preprocessor(ref)
        self._fit(ref)
        return self

    def _fit(self, ref: Table):
        """
        Hook for generator-specific fitting. Override when needed.
        """

    @abstractmethod
    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        Draw ``n`` rows in the reference's raw cell encoding.

        Args:
            n: Number of rows
            rng: Generator seeded from the spec

        Returns:
            Array of shape (n, n_cols)
        """
        pass

    def generate(self, n: int) -> Table:
        """
        Generate ``n`` rows with the reference schema.

        Args:
            n: Number of rows

        Returns:
            Table sharing the reference's schema
        """
        if self.ref is None:
            raise RuntimeError(f"{type(self).__name__} must be fitted before generating")
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        rng = np.random.default_rng(self.spec.seed)
        table = self.ref.with_values(self._sample(n, rng))
        logger.debug("%s generated %d rows (seed=%d)", self.spec.label, n, self.spec.seed)
        return table

    def __str__(self):
        return self.spec.label
