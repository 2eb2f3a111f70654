"""
Benchmark orchestration: repeated splits, generator runs, every metric per
cell, aggregation, ADTM normalisation and metric correlations.

A cell is one (dataset, generator, repeat, metric) value. The reference split
itself is evaluated as the ``d_ref`` baseline entity. Cells that fail are kept
in the report as FAILED with an error code; CI cells of datasets without a
ground-truth SCM are kept as SKIPPED.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import asdict, dataclass, field
from functools import partial
from itertools import combinations
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
import pandas as pd

from . import __version__, config
from .catalog import CiCatalog, derive_ci_catalog, local_filter
from .ci_tests import ci_score
from .data import DataSplit, Table, read_table, split
from .exceptions import (
    CellTimeout,
    ConfigError,
    ConstantVector,
    InsufficientCells,
    InvalidSpec,
    NonFiniteValue,
    StructFidError,
)
from .generators import GeneratorSpec, generate
from .metrics import (
    METRIC_DIRECTIONS,
    METRIC_NAMES,
    adtm_normalize,
    dcr,
    shape_score,
    spearman,
    trend_score,
)
from .predictors import PredictorConfig, global_utility, local_utility
from .scm import ScmSpec, load_scm_spec, sample_scm
from .utils import derive_seed, dump_json, reject_unknown_keys

logger = logging.getLogger(__name__)

T = TypeVar("T")

BASELINE = "d_ref"
CI_METRICS = ("local_ci", "global_ci")
REPORT_FORMATS = ("json", "csv", "markdown")


class CellStatus:
    OK = "ok"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class DatasetConfig:
    """
    One benchmark dataset: either an SCM spec to sample from or a CSV with
    its schema sidecar.
    """

    name: str
    scm: Optional[str] = None
    csv: Optional[str] = None
    schema: Optional[str] = None
    n: Optional[int] = None
    max_cond_size: Optional[int] = None

    def __post_init__(self):
        if not self.name:
            raise ConfigError("Every dataset needs a name")
        if self.name == BASELINE:
            raise ConfigError(f"{BASELINE!r} is reserved for the reference baseline")
        if (self.scm is None) == (self.csv is None):
            raise ConfigError(f"Dataset {self.name!r} needs exactly one of 'scm' or 'csv'")
        if self.csv is not None and self.schema is None:
            raise ConfigError(f"Dataset {self.name!r} needs a 'schema' next to its CSV")
        if self.n is not None and self.n < 10:
            raise ConfigError(f"Dataset {self.name!r} needs at least 10 rows")

    @classmethod
    def from_dict(cls, data: Dict) -> "DatasetConfig":
        reject_unknown_keys(data, cls.__dataclass_fields__, "dataset", ConfigError)
        return cls(**data)

    def to_dict(self) -> Dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class BenchmarkConfig:
    datasets: Tuple[DatasetConfig, ...]
    generators: Tuple[GeneratorSpec, ...]
    repeats: int = field(default_factory=lambda: config.repeats)
    alpha: float = field(default_factory=lambda: config.alpha)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    master_seed: int = 0
    metrics: Tuple[str, ...] = METRIC_NAMES
    output_dir: Optional[str] = None
    max_workers: int = field(default_factory=lambda: config.max_workers)
    cell_timeout: float = field(default_factory=lambda: config.cell_timeout)
    base_dir: str = "."

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        self.validate()

    def validate(self):
        if not self.datasets:
            raise ConfigError("A benchmark needs at least one dataset")
        if not self.generators:
            raise ConfigError("A benchmark needs at least one generator")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be at least 1, got {self.repeats}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.max_workers < 1:
            raise ConfigError("max_workers must be at least 1")
        if not self.cell_timeout > 0:
            raise ConfigError("cell_timeout must be positive")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("Dataset names must be unique")
        labels = [g.label for g in self.generators]
        if len(set(labels)) != len(labels):
            raise ConfigError("Generator labels must be unique; set 'name' to disambiguate")
        if BASELINE in labels:
            raise ConfigError(f"{BASELINE!r} is reserved for the reference baseline")
        unknown = [m for m in self.metrics if m not in METRIC_DIRECTIONS]
        if unknown:
            raise ConfigError(f"Unknown metrics: {', '.join(unknown)}")
        if not self.metrics or len(set(self.metrics)) != len(self.metrics):
            raise ConfigError("Metric selection must be non-empty and without repeats")

    @property
    def entities(self) -> List[str]:
        return [BASELINE] + [g.label for g in self.generators]

    def resolve(self, path: str) -> Path:
        path = Path(path)
        return path if path.is_absolute() else Path(self.base_dir) / path

    @classmethod
    def from_dict(cls, data: Dict, base_dir=".") -> "BenchmarkConfig":
        allowed = set(cls.__dataclass_fields__) - {"base_dir"}
        reject_unknown_keys(data, allowed, "benchmark config", ConfigError)
        for key in ("datasets", "generators"):
            if key not in data:
                raise ConfigError(f"Benchmark config is missing {key!r}")
        data = dict(data)
        data["datasets"] = tuple(DatasetConfig.from_dict(d) for d in data["datasets"])
        data["generators"] = tuple(GeneratorSpec.from_dict(g) for g in data["generators"])
        if "predictor" in data:
            data["predictor"] = PredictorConfig.from_dict(data["predictor"])
        return cls(base_dir=str(base_dir), **data)

    def to_dict(self) -> Dict:
        return {
            "datasets": [d.to_dict() for d in self.datasets],
            "generators": [g.to_dict() for g in self.generators],
            "repeats": self.repeats,
            "alpha": self.alpha,
            "predictor": self.predictor.to_dict(),
            "master_seed": self.master_seed,
            "metrics": list(self.metrics),
        }


def load_benchmark_config(path) -> BenchmarkConfig:
    """
    Read a benchmark config JSON; relative dataset paths resolve against its folder.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    return BenchmarkConfig.from_dict(data, base_dir=path.parent)


@dataclass(frozen=True)
class CellResult:
    dataset: str
    generator: str
    repeat: int
    metric: str
    value: Optional[float]
    status: str = CellStatus.OK
    error_code: Optional[str] = None
    message: Optional[str] = None


@dataclass(frozen=True)
class AggregateRow:
    dataset: str
    generator: str
    metric: str
    mean: Optional[float]
    std: Optional[float]
    count: int
    failed: int


@dataclass(frozen=True)
class NormalizedRow:
    dataset: str
    generator: str
    metric: str
    value: float


@dataclass(frozen=True)
class SummaryRow:
    generator: str
    metric: str
    mean: float
    std: float
    datasets: int


@dataclass(frozen=True)
class CorrelationRow:
    metric_a: str
    metric_b: str
    rho: Optional[float]
    cells: int


@dataclass(frozen=True)
class StabilityRow:
    metric: str
    dropped: str
    rho: Optional[float]
    generators: int


@dataclass
class EvaluationReport:
    header: Dict
    rows: List[CellResult]
    aggregates: List[AggregateRow] = field(default_factory=list)
    normalized: List[NormalizedRow] = field(default_factory=list)
    summary: List[SummaryRow] = field(default_factory=list)
    correlations: List[CorrelationRow] = field(default_factory=list)
    stability: List[StabilityRow] = field(default_factory=list)

    @property
    def failed_count(self) -> int:
        return sum(r.status == CellStatus.FAILED for r in self.rows)

    @property
    def metrics(self) -> List[str]:
        return list(self.header.get("metrics", []))

    def to_dict(self) -> Dict:
        return {
            "header": self.header,
            "rows": [asdict(r) for r in self.rows],
            "aggregates": [asdict(r) for r in self.aggregates],
            "normalized": [asdict(r) for r in self.normalized],
            "summary": [asdict(r) for r in self.summary],
            "correlations": [asdict(r) for r in self.correlations],
            "stability": [asdict(r) for r in self.stability],
            "failed_cells": self.failed_count,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "EvaluationReport":
        return cls(
            header=data["header"],
            rows=[CellResult(**r) for r in data["rows"]],
            aggregates=[AggregateRow(**r) for r in data.get("aggregates", [])],
            normalized=[NormalizedRow(**r) for r in data.get("normalized", [])],
            summary=[SummaryRow(**r) for r in data.get("summary", [])],
            correlations=[CorrelationRow(**r) for r in data.get("correlations", [])],
            stability=[StabilityRow(**r) for r in data.get("stability", [])],
        )


@dataclass
class LoadedDataset:
    name: str
    table: Table
    scm: Optional[ScmSpec] = None
    global_catalog: Optional[CiCatalog] = None
    local_catalog: Optional[CiCatalog] = None

    def attach_catalogs(self, max_cond_size: Optional[int] = None):
        """Derive the global catalog of the SCM graph and its target-local filter."""
        self.global_catalog = derive_ci_catalog(self.scm.graph, max_cond_size)
        self.local_catalog = local_filter(self.global_catalog, self.scm.target_index)
        logger.info(
            "%s: %d global / %d local CI statements",
            self.name,
            len(self.global_catalog),
            len(self.local_catalog),
        )


def load_dataset(ds: DatasetConfig, cfg: BenchmarkConfig) -> LoadedDataset:
    """
    Materialise a dataset: sample it from its SCM or read it from disk.

    Catalogs are derived only when a CI metric is selected.
    """
    if ds.csv is not None:
        table = read_table(cfg.resolve(ds.csv), cfg.resolve(ds.schema))
        return LoadedDataset(ds.name, table)

    spec = load_scm_spec(cfg.resolve(ds.scm))
    n = ds.n or config.n_full
    table = sample_scm(spec, n, derive_seed(cfg.master_seed, ds.name, "sample"))
    loaded = LoadedDataset(ds.name, table, spec)
    if any(m in CI_METRICS for m in cfg.metrics):
        loaded.attach_catalogs(ds.max_cond_size)
    return loaded


@dataclass
class EvaluationUnit:
    """Everything needed to evaluate one entity on one repeat of one dataset."""

    dataset: LoadedDataset
    repeat: int
    entity: str
    spec: Optional[GeneratorSpec]
    tables: Optional[Tuple[Table, Table, Table]]
    split_error: Optional[Exception] = None

    @property
    def where(self) -> str:
        return f"{self.dataset.name}/{self.entity} repeat {self.repeat}"

    def cell(self, metric: str, value=None, error: Exception = None) -> CellResult:
        name, entity, repeat = self.dataset.name, self.entity, self.repeat
        if metric in CI_METRICS and self.dataset.scm is None:
            return CellResult(name, entity, repeat, metric, None, CellStatus.SKIPPED)
        if error is None:
            return CellResult(name, entity, repeat, metric, float(value))
        code = getattr(error, "code", "internal_error")
        return CellResult(name, entity, repeat, metric, None, CellStatus.FAILED, code, str(error))


def compute_metric(
    metric: str,
    eval_table: Table,
    ref: Table,
    val: Optional[Table],
    test: Table,
    dataset: LoadedDataset,
    alpha: float,
    predictor: PredictorConfig,
    seed: int,
) -> float:
    if metric == "shape":
        return shape_score(ref, eval_table)
    if metric == "trend":
        return trend_score(ref, eval_table)
    if metric == "dcr":
        return dcr(ref, eval_table)
    if metric == "local_utility":
        return local_utility(eval_table, ref, test, predictor, seed, val)
    if metric == "global_utility":
        return global_utility(eval_table, ref, test, predictor, seed, val)
    if metric == "local_ci":
        return ci_score(dataset.local_catalog, eval_table, alpha)
    if metric == "global_ci":
        return ci_score(dataset.global_catalog, eval_table, alpha)
    raise ConfigError(f"Unknown metric {metric!r}")


def run_within(fn: Callable[[], T], timeout: float, what: str) -> T:
    """
    Run ``fn`` on its own worker thread and wait at most ``timeout`` seconds.

    Python cannot stop a running thread: an overrunning call keeps its worker
    until it returns, but the caller is released at the deadline.

    Raises:
        CellTimeout: if ``fn`` has not returned after ``timeout`` seconds
    """
    pool = ThreadPoolExecutor(max_workers=1, thread_name_prefix="structfid-cell")
    future = pool.submit(fn)
    try:
        return future.result(timeout=timeout)
    except FutureTimeout:
        raise CellTimeout(f"{what} exceeded {timeout:g}s") from None
    finally:
        pool.shutdown(wait=False, cancel_futures=True)


def evaluate_cells(
    unit: EvaluationUnit,
    eval_table: Table,
    metrics: Sequence[str],
    alpha: float,
    predictor: PredictorConfig,
    master_seed: int,
    cell_timeout: float,
) -> List[CellResult]:
    """
    Evaluate ``eval_table`` on every metric, one cell each.

    Errors never escape: each failing metric becomes a FAILED cell.
    """
    ref, val, test = unit.tables
    results = []
    for metric in metrics:
        if metric in CI_METRICS and unit.dataset.scm is None:
            results.append(unit.cell(metric))
            continue
        seed = derive_seed(master_seed, unit.dataset.name, unit.entity, unit.repeat, metric)
        try:
            compute = partial(
                compute_metric,
                metric,
                eval_table,
                ref,
                val,
                test,
                unit.dataset,
                alpha,
                predictor,
                seed,
            )
            value = run_within(compute, cell_timeout, metric)
            if not math.isfinite(value):
                raise NonFiniteValue(f"{metric} evaluated to {value}")
        except Exception as e:
            if isinstance(e, StructFidError):
                logger.warning("%s: %s failed (%s)", unit.where, metric, e.code)
            else:
                logger.exception("%s: %s crashed", unit.where, metric)
            results.append(unit.cell(metric, error=e))
            continue
        results.append(unit.cell(metric, value))
    return results


def _run_unit(unit: EvaluationUnit, cfg: BenchmarkConfig) -> List[CellResult]:
    if unit.split_error is not None:
        return [unit.cell(m, error=unit.split_error) for m in cfg.metrics]
    ref = unit.tables[0]

    eval_table = ref
    if unit.spec is not None:
        seed = derive_seed(cfg.master_seed, unit.dataset.name, unit.entity, unit.repeat)
        spec = unit.spec.with_seed(seed)
        if unit.dataset.scm is not None:
            spec = spec.with_scm(unit.dataset.scm)
        try:
            draw = partial(generate, spec, ref, spec.row_count(ref.n_rows))
            eval_table = run_within(draw, cfg.cell_timeout, "Generation")
        except Exception as e:
            if not isinstance(e, StructFidError):
                logger.exception("%s: generation crashed", unit.where)
            return [unit.cell(m, error=e) for m in cfg.metrics]

    return evaluate_cells(
        unit, eval_table, cfg.metrics, cfg.alpha, cfg.predictor, cfg.master_seed, cfg.cell_timeout
    )


def _units(datasets: Sequence[LoadedDataset], cfg: BenchmarkConfig) -> List[EvaluationUnit]:
    units = []
    for dataset in datasets:
        split_seed = derive_seed(cfg.master_seed, dataset.name, "split")
        for repeat in range(cfg.repeats):
            tables, error = None, None
            try:
                data_split: DataSplit = split(dataset.table, split_seed, repeat)
                tables = data_split.tables(dataset.table)
            except StructFidError as e:
                error = e
            units.append(EvaluationUnit(dataset, repeat, BASELINE, None, tables, error))
            for spec in cfg.generators:
                units.append(EvaluationUnit(dataset, repeat, spec.label, spec, tables, error))
    return units


def run_benchmark(cfg: BenchmarkConfig) -> EvaluationReport:
    """
    Run every (dataset, entity, repeat, metric) cell and assemble the report.

    Cells run on a bounded thread pool; the report is assembled in config
    order, so its content does not depend on completion order.

    Args:
        cfg: Validated benchmark configuration

    Returns:
        Complete EvaluationReport
    """
    datasets = [load_dataset(ds, cfg) for ds in cfg.datasets]
    units = _units(datasets, cfg)
    logger.info(
        "Running %d datasets x %d entities x %d repeats x %d metrics",
        len(datasets),
        len(cfg.entities),
        cfg.repeats,
        len(cfg.metrics),
    )
    if cfg.max_workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
            batches = list(pool.map(lambda unit: _run_unit(unit, cfg), units))
    else:
        batches = [_run_unit(unit, cfg) for unit in units]

    report = EvaluationReport(
        header=_header(cfg),
        rows=[row for batch in batches for row in batch],
    )
    finalize_report(report)
    logger.info("Benchmark finished with %d failed cells", report.failed_count)
    return report


def _header(cfg: BenchmarkConfig) -> Dict:
    return {
        "tool": "structfid",
        "version": __version__,
        "baseline": BASELINE,
        "master_seed": cfg.master_seed,
        "repeats": cfg.repeats,
        "alpha": cfg.alpha,
        "metrics": list(cfg.metrics),
        "datasets": [d.name for d in cfg.datasets],
        "generators": [g.label for g in cfg.generators],
        "predictor": cfg.predictor.to_dict(),
        "correlation_basis": "per (dataset, generator) mean over repeats, baseline excluded",
    }


def aggregate(rows: Sequence[CellResult]) -> List[AggregateRow]:
    """
    Mean and sample std over repeats per (dataset, generator, metric).

    FAILED and SKIPPED cells are excluded; FAILED ones are counted.
    """
    groups: Dict[Tuple[str, str, str], List[CellResult]] = {}
    for row in rows:
        groups.setdefault((row.dataset, row.generator, row.metric), []).append(row)
    aggregates = []
    for (dataset, generator, metric), members in groups.items():
        values = [r.value for r in members if r.status == CellStatus.OK]
        failed = sum(r.status == CellStatus.FAILED for r in members)
        mean = float(np.mean(values)) if values else None
        std = float(np.std(values, ddof=1)) if len(values) > 1 else (0.0 if values else None)
        aggregates.append(AggregateRow(dataset, generator, metric, mean, std, len(values), failed))
    return aggregates


def normalize(
    aggregates: Sequence[AggregateRow],
) -> Tuple[List[NormalizedRow], List[SummaryRow]]:
    """
    ADTM per dataset and metric across generators (baseline excluded), then
    mean and std of the normalised values across datasets.
    """
    groups: Dict[Tuple[str, str], List[AggregateRow]] = {}
    for row in aggregates:
        if row.generator == BASELINE or row.mean is None:
            continue
        groups.setdefault((row.dataset, row.metric), []).append(row)

    normalized = []
    for (dataset, metric), members in groups.items():
        scaled = adtm_normalize([(r.generator, r.mean) for r in members], METRIC_DIRECTIONS[metric])
        normalized.extend(NormalizedRow(dataset, g, metric, v) for g, v in scaled)

    per_generator: Dict[Tuple[str, str], List[float]] = {}
    for row in normalized:
        per_generator.setdefault((row.generator, row.metric), []).append(row.value)
    summary = [
        SummaryRow(
            generator,
            metric,
            float(np.mean(values)),
            float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
            len(values),
        )
        for (generator, metric), values in per_generator.items()
    ]
    return normalized, summary


def correlate_metrics(report: EvaluationReport) -> List[CorrelationRow]:
    """
    Spearman correlation between every pair of metrics across
    (dataset, generator) mean values, baseline excluded.

    Raises:
        InsufficientCells: if a metric has fewer than 3 cells
    """
    cells: Dict[str, Dict[Tuple[str, str], float]] = {}
    for row in report.aggregates:
        if row.generator == BASELINE or row.mean is None:
            continue
        cells.setdefault(row.metric, {})[(row.dataset, row.generator)] = row.mean
    # Metrics with no cells at all (CI metrics without an SCM) are left out.
    order = report.metrics or sorted(cells)
    metrics = [m for m in order if m in cells]
    for metric in metrics:
        if len(cells[metric]) < 3:
            raise InsufficientCells(f"Metric {metric!r} has fewer than 3 cells to correlate")

    correlations = []
    for a, b in combinations(metrics, 2):
        shared = sorted(set(cells[a]) & set(cells[b]))
        rho = None
        if len(shared) >= 3:
            try:
                rho = spearman([cells[a][c] for c in shared], [cells[b][c] for c in shared])
            except ConstantVector:
                rho = None
        correlations.append(CorrelationRow(a, b, rho, len(shared)))
    return correlations


def ranking_stability(report: EvaluationReport) -> List[StabilityRow]:
    """
    Re-rank generators with each one left out of the roster in turn.

    ADTM is recomputed over the pruned roster, so dropping the best or worst
    generator moves every other normalised score. Each row holds the Spearman
    correlation between the pruned ranking and the full ranking of the kept
    generators; ``None`` when either ranking is a single tie. Rosters of fewer
    than four generators yield no rows.
    """
    _, summary = normalize(report.aggregates)
    full = {(r.metric, r.generator): r.mean for r in summary}
    roster = report.header.get("generators") or sorted({r.generator for r in summary})
    if len(roster) < 4:
        return []

    rows = []
    for dropped in roster:
        _, pruned = normalize([r for r in report.aggregates if r.generator != dropped])
        for metric in report.metrics:
            kept = [(r.generator, r.mean) for r in pruned if r.metric == metric]
            if len(kept) < 3:
                continue
            try:
                rho = spearman([full[(metric, g)] for g, _ in kept], [v for _, v in kept])
            except ConstantVector:
                rho = None
            rows.append(StabilityRow(metric, dropped, rho, len(kept)))
    return rows


def finalize_report(report: EvaluationReport):
    """Fill the aggregate, normalised, correlation and stability blocks from the raw rows."""
    report.aggregates = aggregate(report.rows)
    report.normalized, report.summary = normalize(report.aggregates)
    try:
        report.correlations = correlate_metrics(report)
    except InsufficientCells as e:
        logger.info("Skipping metric correlations: %s", e)
        report.correlations = []
        report.header["correlation_error"] = e.code
    report.stability = ranking_stability(report)


def render_report(report: EvaluationReport, fmt: str = "json") -> bytes:
    """
    Render a report.

    Args:
        report: Complete report
        fmt: ``json`` (canonical, lossless), ``csv`` (raw cells) or
            ``markdown`` (normalised mean +/- std grid)

    Returns:
        UTF-8 encoded document
    """
    if fmt == "json":
        text = dump_json(report.to_dict())
    elif fmt == "csv":
        columns = list(CellResult.__dataclass_fields__)
        frame = pd.DataFrame([asdict(r) for r in report.rows], columns=columns)
        text = frame.to_csv(index=False, lineterminator="\n")
    elif fmt == "markdown":
        text = _render_markdown(report)
    else:
        raise ConfigError(
            f"Unknown report format {fmt!r}; expected one of {', '.join(REPORT_FORMATS)}"
        )
    return text.encode("utf-8")


def _render_markdown(report: EvaluationReport) -> str:
    metrics = report.metrics
    summary = {(r.generator, r.metric): r for r in report.summary}
    baseline: Dict[str, List[float]] = {}
    for row in report.aggregates:
        if row.generator == BASELINE and row.mean is not None:
            baseline.setdefault(row.metric, []).append(row.mean)

    lines = [
        "| generator | " + " | ".join(metrics) + " |",
        "| --- |" + " --- |" * len(metrics),
    ]
    cells = [f"{np.mean(baseline[m]):.3f}" if m in baseline else "N/A" for m in metrics]
    lines.append(f"| {BASELINE} (raw) | " + " | ".join(cells) + " |")
    for generator in report.header.get("generators", []):
        cells = []
        for metric in metrics:
            row = summary.get((generator, metric))
            cells.append(f"{row.mean:.3f} ± {row.std:.3f}" if row else "N/A")
        lines.append(f"| {generator} | " + " | ".join(cells) + " |")
    if report.failed_count:
        lines.append("")
        lines.append(f"{report.failed_count} failed cells excluded from aggregation.")
    return "\n".join(lines) + "\n"


def parse_report(document: Union[bytes, str]) -> EvaluationReport:
    """
    Read a report rendered as JSON back into an EvaluationReport.
    """
    try:
        data = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InvalidSpec(f"Report is not valid JSON: {e}") from e
    return EvaluationReport.from_dict(data)


def write_report(report: EvaluationReport, out_dir) -> Dict[str, Path]:
    """Write report.json, report.csv and report.md into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out_dir / "report.json",
        "csv": out_dir / "report.csv",
        "markdown": out_dir / "report.md",
    }
    for fmt, path in paths.items():
        path.write_bytes(render_report(report, fmt))
    return paths
