from dataclasses import replace

from django.core.management.base import BaseCommand, CommandError

from structfid.bench import load_benchmark_config, run_benchmark, write_report
from structfid.management import EXIT_WITH_FAILURES, command_errors, configure_logging


class Command(BaseCommand):
    help = "Run a full benchmark from a JSON config"
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="Benchmark config JSON")
        parser.add_argument(
            "--out-dir",
            help="Output directory (default: the config's output_dir)",
        )
        parser.add_argument(
            "--workers",
            type=int,
            help="Worker threads (overrides the config's max_workers)",
        )

    def handle(self, *args, **options):
        configure_logging(options["verbosity"])
        with command_errors():
            cfg = load_benchmark_config(options["config"])
        if options.get("workers") is not None:
            if options["workers"] < 1:
                raise CommandError("--workers must be at least 1")
            cfg = replace(cfg, max_workers=options["workers"])
        out_dir = options.get("out_dir") or cfg.output_dir
        if not out_dir:
            raise CommandError("No output directory: pass --out-dir or set output_dir")

        self.stdout.write(
            f"Benchmarking {len(cfg.datasets)} datasets x {len(cfg.entities)} entities "
            f"x {cfg.repeats} repeats"
        )
        with command_errors():
            report = run_benchmark(cfg)
            paths = write_report(report, out_dir)

        for path in paths.values():
            self.stdout.write(f"  wrote {path}")
        if report.failed_count:
            raise CommandError(
                f"Completed with {report.failed_count} failed cells",
                returncode=EXIT_WITH_FAILURES,
            )
        self.stdout.write(self.style.SUCCESS("Done!"))
