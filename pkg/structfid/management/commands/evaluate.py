from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from structfid import __version__, config
from structfid.bench import (
    BASELINE,
    CI_METRICS,
    REPORT_FORMATS,
    EvaluationReport,
    EvaluationUnit,
    LoadedDataset,
    evaluate_cells,
    finalize_report,
    render_report,
)
from structfid.data import read_table, split
from structfid.exceptions import SchemaMismatch
from structfid.management import EXIT_WITH_FAILURES, command_errors, configure_logging
from structfid.metrics import METRIC_NAMES
from structfid.predictors import PredictorConfig
from structfid.scm import load_scm_spec

SYNTHETIC = "syn"


class Command(BaseCommand):
    help = "Evaluate a synthetic table against a reference table"
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--ref", required=True, help="Reference CSV")
        parser.add_argument("--schema", required=True, help="Schema JSON shared by all tables")
        parser.add_argument("--syn", required=True, help="Synthetic CSV to evaluate")
        parser.add_argument("--scm", help="Ground-truth SCM spec; enables the CI metrics")
        parser.add_argument(
            "--test",
            help="Real test CSV; without it a test split is carved from the reference",
        )
        parser.add_argument("--alpha", type=float, default=config.alpha, help="CI test level")
        parser.add_argument("--seed", type=int, default=0, help="Master seed")
        parser.add_argument(
            "--metrics",
            default=",".join(METRIC_NAMES),
            help="Comma-separated metric names",
        )
        parser.add_argument("--max-cond-size", type=int, help="Catalog conditioning-set cap")
        parser.add_argument(
            "--format", choices=REPORT_FORMATS, default="json", help="Report format"
        )
        parser.add_argument("--out", required=True, help="Report path")

    def handle(self, *args, **options):
        configure_logging(options["verbosity"])
        metrics = [m.strip() for m in options["metrics"].split(",") if m.strip()]
        unknown = [m for m in metrics if m not in METRIC_NAMES]
        if unknown or not metrics:
            raise CommandError(f"Unknown or empty metric selection: {', '.join(unknown)}")
        if not 0 < options["alpha"] < 1:
            raise CommandError("--alpha must lie in (0, 1)")
        if options["seed"] < 0:
            raise CommandError("--seed must be non-negative")

        with command_errors():
            report, out = self._evaluate(metrics, options)

        for row in report.rows:
            if row.generator != SYNTHETIC:
                continue
            if row.status == "ok":
                self.stdout.write(f"  {row.metric}: {row.value:.4f}")
            elif row.status == "skipped":
                self.stdout.write(self.style.WARNING(f"  {row.metric}: skipped (no SCM)"))
            else:
                self.stdout.write(self.style.ERROR(f"  {row.metric}: FAILED [{row.error_code}]"))

        if report.failed_count:
            raise CommandError(
                f"Report written to {out} with {report.failed_count} failed cells",
                returncode=EXIT_WITH_FAILURES,
            )
        self.stdout.write(self.style.SUCCESS(f"Report written to {out}"))

    def _evaluate(self, metrics, options):
        reference = read_table(options["ref"], options["schema"])
        syn = read_table(options["syn"], options["schema"])
        scm = None
        if options.get("scm"):
            scm = load_scm_spec(options["scm"])
            if scm.variables != reference.columns or scm.target_index != reference.target_index:
                raise SchemaMismatch("SCM variables do not match the reference schema")

        if options.get("test"):
            ref, val, test = reference, None, read_table(options["test"], options["schema"])
        else:
            ref, val, test = split(reference, options["seed"], 0).tables(reference)

        dataset = LoadedDataset("eval", reference, scm)
        if scm is not None and any(m in CI_METRICS for m in metrics):
            dataset.attach_catalogs(options.get("max_cond_size"))

        predictor = PredictorConfig()
        rows = []
        for entity, table in ((BASELINE, ref), (SYNTHETIC, syn)):
            unit = EvaluationUnit(dataset, 0, entity, None, (ref, val, test))
            rows.extend(
                evaluate_cells(
                    unit,
                    table,
                    metrics,
                    options["alpha"],
                    predictor,
                    options["seed"],
                    config.cell_timeout,
                )
            )

        report = EvaluationReport(
            header={
                "tool": "structfid",
                "version": __version__,
                "baseline": BASELINE,
                "master_seed": options["seed"],
                "repeats": 1,
                "alpha": options["alpha"],
                "metrics": metrics,
                "datasets": [dataset.name],
                "generators": [SYNTHETIC],
                "predictor": predictor.to_dict(),
            },
            rows=rows,
        )
        finalize_report(report)

        out = Path(options["out"])
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(render_report(report, options["format"]))
        return report, out
