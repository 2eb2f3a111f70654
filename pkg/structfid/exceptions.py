"""
Error hierarchy for structfid.

Every error carries a stable ``code`` that benchmark reports use to mark a
cell as FAILED.
"""


class StructFidError(Exception):
    code = "error"


# Graphs and structural causal models


class CycleDetected(StructFidError, ValueError):
    code = "cycle_detected"


class InvalidNode(StructFidError, ValueError):
    code = "invalid_node"


class OverlappingSet(StructFidError, ValueError):
    code = "overlapping_set"


class BudgetExceeded(StructFidError):
    code = "budget_exceeded"


class InvalidSpec(StructFidError, ValueError):
    code = "invalid_spec"


class CatalogScopeError(StructFidError, ValueError):
    code = "catalog_scope"


# Tables, splits and preprocessing


class TooFewRows(StructFidError, ValueError):
    code = "too_few_rows"


class ClassTooSmall(StructFidError, ValueError):
    code = "class_too_small"


class EmptyTable(StructFidError, ValueError):
    code = "empty_table"


class SchemaMismatch(StructFidError, ValueError):
    code = "schema_mismatch"


class UnknownCategory(StructFidError, ValueError):
    code = "unknown_category"


# Conditional-independence tests


class NonCategoricalColumn(StructFidError, ValueError):
    code = "non_categorical_column"


class NonNumericalColumn(StructFidError, ValueError):
    code = "non_numerical_column"


class InsufficientRows(StructFidError, ValueError):
    code = "insufficient_rows"


class SingularDesign(StructFidError):
    code = "singular_design"


class EmptyCatalog(StructFidError, ValueError):
    code = "empty_catalog"


# Predictors and utility


class EmptyClass(StructFidError, ValueError):
    code = "empty_class"


class LengthMismatch(StructFidError, ValueError):
    code = "length_mismatch"


class SingleClassTrain(StructFidError, ValueError):
    code = "single_class_train"


class DegenerateReference(StructFidError):
    code = "degenerate_reference"


class UtilityError(StructFidError):
    """
    A per-variable utility failed inside a global computation.

    Args:
        variable: Index of the variable whose utility failed
        cause: The original error
    """

    def __init__(self, variable: int, cause: Exception):
        self.variable = variable
        self.cause = cause
        self.code = getattr(cause, "code", "internal_error")
        super().__init__(f"Utility of variable {variable} failed: {cause}")


# Generators


class NotEnoughRows(StructFidError, ValueError):
    code = "not_enough_rows"


# Metrics and aggregation


class NonFiniteValue(StructFidError, ValueError):
    code = "non_finite_value"


class ConstantVector(StructFidError, ValueError):
    code = "constant_vector"


# Benchmark


class InsufficientCells(StructFidError):
    code = "insufficient_cells"


class ConfigError(StructFidError, ValueError):
    code = "config_error"


class CellTimeout(StructFidError):
    code = "timeout"
