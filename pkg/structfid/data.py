"""
Tabular datasets, repeated splitting and preprocessing.

Cells are stored as ``float64``: numerical columns hold real values,
categorical columns hold category indices, and missing cells are ``NaN``.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .exceptions import (
    ClassTooSmall,
    EmptyTable,
    InvalidSpec,
    SchemaMismatch,
    TooFewRows,
    UnknownCategory,
)
from .utils import largest_remainder, reject_unknown_keys

logger = logging.getLogger(__name__)

TEST_FRACTION = 0.2
VALIDATION_FRACTION = 0.1


class VariableKind(str, Enum):
    CATEGORICAL = "categorical"
    NUMERICAL = "numerical"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: VariableKind
    categories: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", VariableKind(self.kind))
        object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))
        if self.is_categorical:
            if not self.categories:
                raise InvalidSpec(f"Categorical column {self.name!r} needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise InvalidSpec(f"Categorical column {self.name!r} repeats a category")
        elif self.categories:
            raise InvalidSpec(f"Numerical column {self.name!r} cannot list categories")

    @property
    def is_categorical(self) -> bool:
        return self.kind is VariableKind.CATEGORICAL

    @property
    def cardinality(self) -> int:
        return len(self.categories)

    def to_dict(self) -> Dict:
        data = {"name": self.name, "kind": self.kind.value}
        if self.is_categorical:
            data["categories"] = list(self.categories)
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "ColumnSpec":
        reject_unknown_keys(data, {"name", "kind", "categories"}, "column", InvalidSpec)
        return cls(data["name"], VariableKind(data["kind"]), tuple(data.get("categories", ())))


@dataclass(frozen=True, eq=False)
class Table:
    """
    Typed table with a designated prediction target.
    """

    columns: Tuple[ColumnSpec, ...]
    values: np.ndarray
    target_index: int

    def __post_init__(self):
        columns = tuple(self.columns)
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim == 1 and values.size == 0:
            values = values.reshape(0, len(columns))
        if values.ndim != 2 or values.shape[1] != len(columns):
            raise SchemaMismatch(
                f"Values of shape {values.shape} do not match {len(columns)} columns"
            )
        if len(columns) < 2:
            raise SchemaMismatch("A table needs at least one feature and a target")
        if len({c.name for c in columns}) != len(columns):
            raise SchemaMismatch("Column names must be unique")
        if not 0 <= self.target_index < len(columns):
            raise SchemaMismatch(f"Target index {self.target_index} is out of range")
        if np.isinf(values).any():
            raise SchemaMismatch("Cells must be finite or missing")
        for j, column in enumerate(columns):
            if not column.is_categorical:
                continue
            cells = values[:, j]
            cells = cells[~np.isnan(cells)]
            if cells.size and (
                np.any(cells != np.floor(cells))
                or cells.min() < 0
                or cells.max() >= column.cardinality
            ):
                raise UnknownCategory(f"Column {column.name!r} has an invalid category index")
        values.setflags(write=False)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]

    @property
    def target(self) -> ColumnSpec:
        return self.columns[self.target_index]

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def codes(self, j: int) -> np.ndarray:
        """Category indices of a complete categorical column."""
        return self.values[:, j].astype(np.int64)

    def is_categorical(self, j: int) -> bool:
        return self.columns[j].is_categorical

    def take(self, indices: Sequence[int]) -> "Table":
        rows = np.asarray(indices, dtype=np.int64)
        return Table(self.columns, self.values[rows], self.target_index)

    def head(self, n: int) -> "Table":
        return Table(self.columns, self.values[:n], self.target_index)

    def with_values(self, values: np.ndarray) -> "Table":
        return Table(self.columns, values, self.target_index)

    def same_schema(self, other: "Table") -> bool:
        return self.columns == other.columns and self.target_index == other.target_index

    def require_schema(self, other: "Table"):
        if not self.same_schema(other):
            raise SchemaMismatch("Tables do not share a schema")

    def class_counts(self) -> np.ndarray:
        target = self.column(self.target_index)
        target = target[~np.isnan(target)].astype(np.int64)
        return np.bincount(target, minlength=self.target.cardinality)

    def equals(self, other: "Table") -> bool:
        return self.same_schema(other) and np.array_equal(
            self.values, other.values, equal_nan=True
        )

    def schema_dict(self) -> Dict:
        return {
            "columns": [c.to_dict() for c in self.columns],
            "target": self.target.name,
        }

    def to_frame(self) -> pd.DataFrame:
        """Render cells with category labels; missing cells become empty."""
        data = {}
        for j, column in enumerate(self.columns):
            cells = self.values[:, j]
            if column.is_categorical:
                labels = np.array(column.categories, dtype=object)
                rendered = np.full(cells.shape, "", dtype=object)
                present = ~np.isnan(cells)
                rendered[present] = labels[cells[present].astype(np.int64)]
                data[column.name] = rendered
            else:
                data[column.name] = cells
        return pd.DataFrame(data, columns=self.names)


def schema_from_dict(data: Dict) -> Tuple[Tuple[ColumnSpec, ...], int]:
    reject_unknown_keys(data, {"columns", "target"}, "schema", InvalidSpec)
    columns = tuple(ColumnSpec.from_dict(c) for c in data["columns"])
    names = [c.name for c in columns]
    if data["target"] not in names:
        raise SchemaMismatch(f"Target column {data['target']!r} is not in the schema")
    return columns, names.index(data["target"])


def table_from_frame(
    frame: pd.DataFrame, columns: Sequence[ColumnSpec], target_index: int
) -> Table:
    """
    Convert a frame of raw cells (labels for categoricals, empty for missing).
    """
    names = [c.name for c in columns]
    if list(frame.columns) != names:
        raise SchemaMismatch(f"CSV header {list(frame.columns)} does not match schema {names}")
    values = np.full((len(frame), len(columns)), np.nan)
    for j, column in enumerate(columns):
        raw = frame[column.name].astype(str).str.strip()
        present = (raw != "").to_numpy()
        if column.is_categorical:
            lookup = {label: i for i, label in enumerate(column.categories)}
            unknown = sorted(set(raw[present]) - set(lookup))
            if unknown:
                raise UnknownCategory(f"Column {column.name!r} has unknown categories {unknown}")
            values[present, j] = raw[present].map(lookup).to_numpy(dtype=np.float64)
        else:
            try:
                values[present, j] = raw[present].astype(np.float64).to_numpy()
            except ValueError as e:
                raise SchemaMismatch(f"Column {column.name!r} is not numerical: {e}") from e
    return Table(tuple(columns), values, target_index)


def read_table(csv_path, schema_path) -> Table:
    """
    Read a dataset CSV and its JSON schema sidecar.

    Args:
        csv_path: UTF-8 CSV with a header row
        schema_path: JSON listing per-column kind, categories and the target name

    Returns:
        Table in CSV column order
    """
    schema = json.loads(Path(schema_path).read_text(encoding="utf-8"))
    columns, target_index = schema_from_dict(schema)
    frame = pd.read_csv(
        csv_path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8"
    )
    table = table_from_frame(frame, columns, target_index)
    logger.debug("Read %d rows x %d columns from %s", table.n_rows, table.n_cols, csv_path)
    return table


def write_table(table: Table, csv_path, schema_path=None):
    Path(csv_path).parent.mkdir(parents=True, exist_ok=True)
    table.to_frame().to_csv(csv_path, index=False, lineterminator="\n", encoding="utf-8")
    if schema_path is not None:
        Path(schema_path).write_text(
            json.dumps(table.schema_dict(), indent=2) + "\n", encoding="utf-8"
        )


@dataclass(frozen=True)
class DataSplit:
    ref_indices: Tuple[int, ...]
    val_indices: Tuple[int, ...]
    test_indices: Tuple[int, ...]
    seed: int
    repeat_id: int

    def tables(self, table: Table) -> Tuple[Table, Table, Table]:
        """Return the (ref, val, test) tables."""
        return (
            table.take(self.ref_indices),
            table.take(self.val_indices),
            table.take(self.test_indices),
        )


def split_sizes(n_rows: int) -> Tuple[int, int, int]:
    """Return (ref, val, test) sizes: 80/20 train/test, then 90/10 ref/val."""
    n_test = math.floor(TEST_FRACTION * n_rows)
    n_val = math.floor(VALIDATION_FRACTION * (n_rows - n_test))
    return n_rows - n_test - n_val, n_val, n_test


def split(table: Table, seed: int, repeat_id: int) -> DataSplit:
    """
    Split a table into reference, validation and test rows.

    Categorical targets are stratified with largest-remainder allocation per
    class; numerical targets get a plain shuffled split.

    Raises:
        TooFewRows: fewer than 10 rows
        ClassTooSmall: a target class has fewer than 2 rows
    """
    n = table.n_rows
    if n < 10:
        raise TooFewRows(f"Splitting needs at least 10 rows, got {n}")
    _, n_val, n_test = split_sizes(n)
    rng = np.random.default_rng([seed, repeat_id])

    if not table.target.is_categorical:
        order = rng.permutation(n)
        test, val, ref = order[:n_test], order[n_test : n_test + n_val], order[n_test + n_val :]
    else:
        target = table.column(table.target_index)
        if np.isnan(target).any():
            raise ClassTooSmall("Stratified splitting needs a complete target column")
        counts = table.class_counts()
        present = [c for c in range(len(counts)) if counts[c] > 0]
        small = [table.target.categories[c] for c in present if counts[c] < 2]
        if small:
            raise ClassTooSmall(f"Classes {small} have fewer than 2 rows")
        class_counts = [int(counts[c]) for c in present]
        test_alloc = largest_remainder(class_counts, n_test)
        remaining = [c - t for c, t in zip(class_counts, test_alloc)]
        val_alloc = largest_remainder(remaining, n_val)
        test, val, ref = [], [], []
        for c, n_t, n_v in zip(present, test_alloc, val_alloc):
            members = rng.permutation(np.flatnonzero(target == c))
            test.extend(members[:n_t])
            val.extend(members[n_t : n_t + n_v])
            ref.extend(members[n_t + n_v :])

    return DataSplit(
        ref_indices=tuple(int(i) for i in sorted(ref)),
        val_indices=tuple(int(i) for i in sorted(val)),
        test_indices=tuple(int(i) for i in sorted(test)),
        seed=seed,
        repeat_id=repeat_id,
    )


@dataclass(frozen=True, eq=False)
class Preprocessor:
    """
    Statistics fitted on reference rows.

    ``means``/``stds`` hold the z-score parameters of numerical columns and
    ``modes`` the imputation category of categorical columns (None elsewhere).
    """

    columns: Tuple[ColumnSpec, ...]
    target_index: int
    means: Tuple[Optional[float], ...]
    stds: Tuple[Optional[float], ...]
    modes: Tuple[Optional[int], ...]
    missing_policy: Dict[str, str] = field(
        default_factory=lambda: {"numerical": "mean", "categorical": "mode"}
    )

    def _conform(self, table: Table) -> np.ndarray:
        """Check the schema and express category indices in the fitted order."""
        if len(table.columns) != len(self.columns):
            raise SchemaMismatch("Column count differs from the fitted schema")
        values = np.array(table.values, copy=True)
        for j, (fitted, given) in enumerate(zip(self.columns, table.columns)):
            if fitted.name != given.name or fitted.kind != given.kind:
                raise SchemaMismatch(
                    f"Column {j} is {given.name!r}/{given.kind.value}, "
                    f"fitted on {fitted.name!r}/{fitted.kind.value}"
                )
            if not fitted.is_categorical or fitted.categories == given.categories:
                continue
            lookup = {label: i for i, label in enumerate(fitted.categories)}
            cells = values[:, j]
            present = ~np.isnan(cells)
            used = {given.categories[int(c)] for c in np.unique(cells[present])}
            unseen = sorted(used - set(lookup))
            if unseen:
                raise UnknownCategory(f"Column {given.name!r} has unseen categories {unseen}")
            remap = np.array([lookup.get(label, -1) for label in given.categories], dtype=float)
            cells[present] = remap[cells[present].astype(np.int64)]
        return values

    def impute(self, table: Table) -> Table:
        """Fill missing cells with the fitted mean or mode, keeping raw scale."""
        values = self._conform(table)
        for j in range(values.shape[1]):
            fill = self.modes[j] if self.columns[j].is_categorical else self.means[j]
            cells = values[:, j]
            cells[np.isnan(cells)] = fill
        return Table(self.columns, values, self.target_index)

    def transform(self, table: Table) -> Table:
        values = self.impute(table).values.copy()
        for j, column in enumerate(self.columns):
            if not column.is_categorical:
                values[:, j] = (values[:, j] - self.means[j]) / self.stds[j]
        return Table(self.columns, values, self.target_index)

    def inverse_transform(self, table: Table) -> Table:
        values = self._conform(table)
        for j, column in enumerate(self.columns):
            if not column.is_categorical:
                values[:, j] = values[:, j] * self.stds[j] + self.means[j]
        return Table(self.columns, values, self.target_index)

    def encode(
        self, table: Table, exclude: Sequence[int] = (), drop_first: bool = False
    ) -> np.ndarray:
        """
        Build the design matrix of a table: z-scored numericals and one-hot
        categoricals, in column order.

        Args:
            table: Table with the fitted schema
            exclude: Column indices left out of the matrix
            drop_first: Drop the first indicator of every categorical column

        Returns:
            Array of shape (n_rows, encoded width)
        """
        transformed = self.transform(table).values
        blocks = []
        for j, column in enumerate(self.columns):
            if j in exclude:
                continue
            if column.is_categorical:
                onehot = np.eye(column.cardinality)[transformed[:, j].astype(np.int64)]
                blocks.append(onehot[:, 1:] if drop_first else onehot)
            else:
                blocks.append(transformed[:, [j]])
        if not blocks:
            return np.zeros((table.n_rows, 0))
        return np.hstack(blocks)


def fit_preprocessor(ref: Table) -> Preprocessor:
    """
    Fit imputation and z-score statistics on reference rows.

    Numerical columns use the sample standard deviation (n - 1); a constant
    or single-row column gets the sentinel std 1. Categorical modes break ties
    towards the lowest category index.

    Raises:
        EmptyTable: if ``ref`` has no rows
    """
    if ref.n_rows == 0:
        raise EmptyTable("Cannot fit preprocessing statistics on an empty table")
    means, stds, modes = [], [], []
    for j, column in enumerate(ref.columns):
        cells = ref.column(j)
        cells = cells[~np.isnan(cells)]
        if column.is_categorical:
            counts = np.bincount(cells.astype(np.int64), minlength=column.cardinality)
            modes.append(int(np.argmax(counts)))
            means.append(None)
            stds.append(None)
            continue
        mean = float(np.mean(cells)) if cells.size else 0.0
        std = float(np.std(cells, ddof=1)) if cells.size > 1 else 0.0
        if not math.isfinite(std) or std <= 0.0:
            std = 1.0
        means.append(mean)
        stds.append(std)
        modes.append(None)
    return Preprocessor(ref.columns, ref.target_index, tuple(means), tuple(stds), tuple(modes))


def apply_preprocessor(p: Preprocessor, t: Table) -> Table:
    """
    Impute and z-score ``t`` with statistics fitted elsewhere.

    Categorical columns keep their category indices; ``Preprocessor.encode``
    produces one-hot matrices on demand.
    """
    return p.transform(t)
