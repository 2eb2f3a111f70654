from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from structfid import config
from structfid.data import write_table
from structfid.management import command_errors, configure_logging
from structfid.scm import load_scm_spec, sample_scm


class Command(BaseCommand):
    help = "Sample a dataset from a structural causal model spec"
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--spec", required=True, help="SCM spec JSON")
        parser.add_argument(
            "--n",
            type=int,
            default=config.n_full,
            help=f"Number of rows (default {config.n_full})",
        )
        parser.add_argument("--seed", type=int, default=0, help="Sampling seed")
        parser.add_argument("--out", required=True, help="Output CSV path")
        parser.add_argument(
            "--schema-out",
            help="Schema sidecar path (default: <out>.schema.json next to the CSV)",
        )

    def handle(self, *args, **options):
        configure_logging(options["verbosity"])
        if options["n"] < 1:
            raise CommandError("--n must be positive")
        if options["seed"] < 0:
            raise CommandError("--seed must be non-negative")

        out = Path(options["out"])
        schema_out = options.get("schema_out") or out.with_suffix(".schema.json")
        with command_errors():
            table = sample_scm(load_scm_spec(options["spec"]), options["n"], options["seed"])
            write_table(table, out, schema_out)

        self.stdout.write(
            self.style.SUCCESS(
                f"Sampled {table.n_rows} rows x {table.n_cols} columns to {out} "
                f"(schema: {schema_out})"
            )
        )
