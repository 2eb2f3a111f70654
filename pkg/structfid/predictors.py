"""
Downstream predictors and the utility metrics.

Utility compares a predictor trained on an evaluation dataset with the same
predictor trained on the reference data, both measured on real test rows.
Classification uses balanced accuracy (higher is better), regression RMSE
(lower is better), and the ratio is oriented so that 1.0 means parity.
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.ensemble import GradientBoostingClassifier, GradientBoostingRegressor
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression, Ridge
from sklearn.metrics import confusion_matrix, mean_squared_error
from sklearn.neighbors import KNeighborsClassifier, KNeighborsRegressor

from . import config
from .data import Table, fit_preprocessor
from .exceptions import (
    ConfigError,
    DegenerateReference,
    EmptyClass,
    EmptyTable,
    LengthMismatch,
    SingleClassTrain,
    StructFidError,
    UtilityError,
)
from .utils import derive_seed, reject_unknown_keys

logger = logging.getLogger(__name__)


class PredictorKind(str, Enum):
    KNN = "knn"
    LINEAR = "linear"
    GBDT = "gbdt"


class MetricKind(str, Enum):
    BALANCED_ACCURACY = "balanced_accuracy"
    RMSE = "rmse"


@dataclass(frozen=True)
class PredictorConfig:
    roster: Tuple[PredictorKind, ...] = (
        PredictorKind.KNN,
        PredictorKind.LINEAR,
        PredictorKind.GBDT,
    )
    knn_k: int = 5
    ridge_alpha: float = 1.0
    linear_max_iter: int = 100
    gbdt_trees: int = 50
    gbdt_depth: int = 3
    gbdt_learning_rate: float = 0.1
    selection: str = "best_on_validation"

    def __post_init__(self):
        object.__setattr__(self, "roster", tuple(PredictorKind(k) for k in self.roster))
        self.validate()

    def validate(self):
        if not self.roster:
            raise ConfigError("Predictor roster must not be empty")
        if len(set(self.roster)) != len(self.roster):
            raise ConfigError("Predictor roster repeats a model")
        if self.knn_k < 1:
            raise ConfigError("knn_k must be at least 1")
        if not self.ridge_alpha > 0:
            raise ConfigError("ridge_alpha must be positive")
        if self.linear_max_iter < 1:
            raise ConfigError("linear_max_iter must be at least 1")
        if self.gbdt_trees < 1 or self.gbdt_depth < 1:
            raise ConfigError("GBDT needs at least one tree of depth at least 1")
        if not 0 < self.gbdt_learning_rate <= 1:
            raise ConfigError("gbdt_learning_rate must lie in (0, 1]")
        if self.selection != "best_on_validation":
            raise ConfigError(f"Unknown selection rule {self.selection!r}")

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["roster"] = [k.value for k in self.roster]
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "PredictorConfig":
        reject_unknown_keys(data, cls.__dataclass_fields__, "predictor config", ConfigError)
        data = dict(data)
        if "roster" in data:
            try:
                data["roster"] = tuple(PredictorKind(k) for k in data["roster"])
            except ValueError as e:
                raise ConfigError(str(e)) from e
        return cls(**data)


@dataclass(frozen=True)
class PerfScore:
    value: float
    metric_kind: MetricKind

    @property
    def higher_is_better(self) -> bool:
        return self.metric_kind is MetricKind.BALANCED_ACCURACY

    def better_than(self, other: "PerfScore") -> bool:
        if self.higher_is_better:
            return self.value > other.value
        return self.value < other.value


def balanced_accuracy(confusion, skip_empty: bool = False) -> float:
    """
    Mean per-class recall of a confusion matrix (rows are true classes).

    Args:
        confusion: Square count matrix
        skip_empty: Ignore true classes with no rows instead of failing

    Raises:
        EmptyClass: if a true class has no rows and ``skip_empty`` is False
    """
    confusion = np.asarray(confusion, dtype=np.float64)
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise ValueError(f"Confusion matrix must be square, got shape {confusion.shape}")
    totals = confusion.sum(axis=1)
    present = totals > 0
    if not present.all():
        if not skip_empty or not present.any():
            raise EmptyClass("Every true class needs at least one row")
    recalls = np.diag(confusion)[present] / totals[present]
    return float(np.mean(recalls))


def rmse(pred: Sequence[float], truth: Sequence[float]) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.size == 0:
        raise LengthMismatch(f"Cannot compare {pred.size} predictions with {truth.size} targets")
    return float(np.sqrt(mean_squared_error(truth, pred)))


def _build_model(
    kind: PredictorKind, classification: bool, cfg: PredictorConfig, n_fit: int, seed: int
):
    if kind is PredictorKind.KNN:
        k = min(cfg.knn_k, n_fit)
        if classification:
            return KNeighborsClassifier(n_neighbors=k)
        return KNeighborsRegressor(n_neighbors=k)
    if kind is PredictorKind.LINEAR:
        if classification:
            return LogisticRegression(C=1.0 / cfg.ridge_alpha, max_iter=cfg.linear_max_iter)
        return Ridge(alpha=cfg.ridge_alpha)
    params = dict(
        n_estimators=cfg.gbdt_trees,
        max_depth=cfg.gbdt_depth,
        learning_rate=cfg.gbdt_learning_rate,
        random_state=seed % (2**32),
    )
    if classification:
        return GradientBoostingClassifier(**params)
    return GradientBoostingRegressor(**params)


def _score(truth: np.ndarray, pred: np.ndarray, classification: bool, n_classes: int) -> PerfScore:
    if classification:
        cm = confusion_matrix(truth, pred, labels=list(range(n_classes)))
        return PerfScore(balanced_accuracy(cm, skip_empty=True), MetricKind.BALANCED_ACCURACY)
    return PerfScore(rmse(pred, truth), MetricKind.RMSE)


def _labelled(table: Table, target: int) -> Table:
    keep = ~np.isnan(table.column(target))
    return table if keep.all() else table.take(np.flatnonzero(keep))


def _holdout(n: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    order = np.random.default_rng(seed).permutation(n)
    n_hold = max(1, n // 10) if n >= 2 else 0
    return np.sort(order[n_hold:]), np.sort(order[:n_hold])


def train_eval(
    train: Table,
    test: Table,
    target: int,
    cfg: PredictorConfig,
    val: Optional[Table] = None,
    seed: int = 0,
) -> PerfScore:
    """
    Fit every roster model on ``train`` and report the test score of the model
    that does best on ``val``.

    Features are preprocessed with statistics fitted on ``train``. Without a
    validation table a deterministic 10% holdout of ``train`` selects the model.

    Args:
        train: Training table
        test: Test table (real data)
        target: Column to predict; its kind decides classification vs regression
        cfg: Predictor roster and hyperparameters
        val: Validation table for model selection
        seed: Seed for the stochastic learners and the holdout

    Raises:
        SingleClassTrain: categorical target with a single observed class
        SchemaMismatch: tables do not share a schema
    """
    train.require_schema(test)
    if val is not None:
        train.require_schema(val)
    train = _labelled(train, target)
    test = _labelled(test, target)
    if train.n_rows == 0:
        raise EmptyTable("Training table has no labelled rows")
    if test.n_rows == 0:
        raise EmptyTable("Test table has no labelled rows")

    column = train.columns[target]
    classification = column.is_categorical
    prep = fit_preprocessor(train)

    X_train = prep.encode(train, exclude=(target,))
    y_train = train.column(target)
    if classification:
        y_train = y_train.astype(np.int64)
        if np.unique(y_train).size < 2:
            raise SingleClassTrain(f"Training rows of {column.name!r} contain a single class")

    val = _labelled(val, target) if val is not None else None
    if val is not None and val.n_rows > 0:
        fit_rows = np.arange(train.n_rows)
        X_val, y_val = prep.encode(val, exclude=(target,)), val.column(target)
    else:
        fit_rows, hold_rows = _holdout(train.n_rows, seed)
        if classification and np.unique(y_train[fit_rows]).size < 2:
            fit_rows = np.arange(train.n_rows)
        X_val, y_val = X_train[hold_rows], y_train[hold_rows]
    if classification:
        y_val = np.asarray(y_val).astype(np.int64)

    X_fit, y_fit = X_train[fit_rows], y_train[fit_rows]
    best_model, best_score = None, None
    for kind in cfg.roster:
        model = _build_model(kind, classification, cfg, len(fit_rows), seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=ConvergenceWarning)
            model.fit(X_fit, y_fit)
        if len(cfg.roster) == 1 or len(y_val) == 0:
            best_model = model
            break
        score = _score(y_val, model.predict(X_val), classification, column.cardinality)
        logger.debug("%s on %r: validation %.4f", kind.value, column.name, score.value)
        if best_score is None or score.better_than(best_score):
            best_model, best_score = model, score

    X_test = prep.encode(test, exclude=(target,))
    y_test = test.column(target)
    if classification:
        y_test = y_test.astype(np.int64)
    return _score(y_test, best_model.predict(X_test), classification, column.cardinality)


def utility_ratio(
    perf_eval: PerfScore, perf_ref: PerfScore, guard: Optional[float] = None
) -> float:
    """
    Orient and divide two performance scores.

    Balanced accuracy gives ``eval / ref``; RMSE gives ``ref / eval``.

    Raises:
        DegenerateReference: if the denominator is below ``guard``
    """
    guard = config.ratio_guard if guard is None else guard
    if perf_eval.metric_kind is not perf_ref.metric_kind:
        raise ValueError("Cannot compare scores of different kinds")
    if perf_eval.higher_is_better:
        numerator, denominator = perf_eval.value, perf_ref.value
    else:
        numerator, denominator = perf_ref.value, perf_eval.value
    if denominator < guard:
        raise DegenerateReference(
            f"Utility denominator {denominator:.3g} is below the guard {guard:.0e}"
        )
    return numerator / denominator


def utility_per_variable(
    eval_table: Table,
    ref: Table,
    test: Table,
    j: int,
    cfg: PredictorConfig,
    seed: int,
    val: Optional[Table] = None,
) -> float:
    """
    Utility of variable ``j``: predict it from all other columns after training
    on ``eval_table`` and on ``ref`` with identical seeds, score both on ``test``.
    """
    eval_table.require_schema(ref)
    ref.require_schema(test)
    task_seed = derive_seed(seed, j)
    perf_eval = train_eval(eval_table, test, j, cfg, val, task_seed)
    perf_ref = train_eval(ref, test, j, cfg, val, task_seed)
    return utility_ratio(perf_eval, perf_ref)


def local_utility(
    eval_table: Table,
    ref: Table,
    test: Table,
    cfg: PredictorConfig,
    seed: int,
    val: Optional[Table] = None,
) -> float:
    return utility_per_variable(eval_table, ref, test, ref.target_index, cfg, seed, val)


def utility_profile(
    eval_table: Table,
    ref: Table,
    test: Table,
    cfg: PredictorConfig,
    seed: int,
    val: Optional[Table] = None,
    max_workers: int = 1,
) -> List[float]:
    """
    Utility of every variable, features and target alike.

    Raises:
        UtilityError: wrapping the first failing variable's error
    """

    def one(j: int) -> float:
        try:
            return utility_per_variable(eval_table, ref, test, j, cfg, seed, val)
        except StructFidError as e:
            raise UtilityError(j, e) from e

    variables = range(ref.n_cols)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, variables))
    return [one(j) for j in variables]


def global_utility(
    eval_table: Table,
    ref: Table,
    test: Table,
    cfg: PredictorConfig,
    seed: int,
    val: Optional[Table] = None,
    max_workers: int = 1,
) -> float:
    profile = utility_profile(eval_table, ref, test, cfg, seed, val, max_workers)
    return float(np.mean(profile))
