from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from structfid.catalog import derive_ci_catalog, local_filter
from structfid.management import command_errors, configure_logging
from structfid.scm import load_scm_spec
from structfid.utils import dump_json


class Command(BaseCommand):
    help = "Derive the CI statement catalog implied by an SCM's graph"
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--spec", required=True, help="SCM spec JSON")
        parser.add_argument(
            "--max-cond-size",
            type=int,
            help="Largest conditioning set to enumerate (default: no cap)",
        )
        parser.add_argument("--max-statements", type=int, help="Hard cap on the catalog size")
        parser.add_argument(
            "--local",
            action="store_true",
            help="Keep only the statements involving the target",
        )
        parser.add_argument("--out", required=True, help="Output catalog JSON")

    def handle(self, *args, **options):
        configure_logging(options["verbosity"])
        max_cond_size = options.get("max_cond_size")
        if max_cond_size is not None and max_cond_size < 0:
            raise CommandError("--max-cond-size must be non-negative")

        out = Path(options["out"])
        with command_errors():
            spec = load_scm_spec(options["spec"])
            catalog = derive_ci_catalog(spec.graph, max_cond_size, options.get("max_statements"))
            if options["local"]:
                catalog = local_filter(catalog, spec.target_index)
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(dump_json(catalog.to_dict()), encoding="utf-8")

        self.stdout.write(
            self.style.SUCCESS(
                f"{len(catalog)} statements ({len(catalog.independent)} independent, "
                f"{len(catalog.dependent)} dependent) written to {out}"
            )
        )
