"""
The ``structfid`` command line: a thin dispatcher over Django management commands.

Each sub-command is a ``Command(BaseCommand)`` in ``structfid.management.commands``.
A run that completes with failed cells raises ``CommandError`` with return code
2; every other command error exits with 1.
"""

import logging
import os
import sys
from contextlib import contextmanager

import django
from django.core.management import CommandError, load_command_class

from .. import __version__
from ..exceptions import StructFidError

# Command-line name -> command module
COMMANDS = {
    "sample-scm": "sample_scm",
    "derive-ci": "derive_ci",
    "eval": "evaluate",
    "bench": "bench",
}

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_WITH_FAILURES = 2

VERBOSITY_LEVELS = {
    0: logging.ERROR,
    1: logging.WARNING,
    2: logging.INFO,
    3: logging.DEBUG,
}


def configure_logging(verbosity: int):
    """Set the ``structfid`` logger level from Django's ``--verbosity`` option."""
    logging.getLogger("structfid").setLevel(VERBOSITY_LEVELS.get(verbosity, logging.WARNING))


@contextmanager
def command_errors():
    """
    Report structfid and I/O errors as CommandError so they exit with 1.
    """
    try:
        yield
    except StructFidError as e:
        raise CommandError(f"{type(e).__name__} [{e.code}]: {e}", returncode=EXIT_FATAL) from e
    except OSError as e:
        raise CommandError(f"I/O error: {e}", returncode=EXIT_FATAL) from e


def setup_django():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "structfid.settings")
    django.setup()


def _usage(prog: str) -> str:
    lines = [f"Usage: {prog} <command> [options]", "", "Available commands:"]
    lines.extend(f"    {name}" for name in COMMANDS)
    return "\n".join(lines)


def execute_from_command_line(argv=None) -> int:
    """
    Dispatch ``argv`` to the matching management command.

    Commands that fail leave through ``SystemExit`` with their return code, as
    Django's ``run_from_argv`` does.

    Returns:
        Process exit code
    """
    argv = list(sys.argv if argv is None else argv)
    prog = "structfid"
    if len(argv) < 2 or argv[1] in ("-h", "--help", "help"):
        sys.stdout.write(_usage(prog) + "\n")
        return EXIT_OK
    if argv[1] == "--version":
        sys.stdout.write(f"{__version__}\n")
        return EXIT_OK
    if argv[1] not in COMMANDS:
        sys.stderr.write(f"Unknown command: {argv[1]!r}\n{_usage(prog)}\n")
        return EXIT_FATAL

    setup_django()
    command = load_command_class("structfid", COMMANDS[argv[1]])
    command.run_from_argv([prog, *argv[1:]])
    return EXIT_OK


def main():
    sys.exit(execute_from_command_line())


__all__ = [
    "COMMANDS",
    "EXIT_FATAL",
    "EXIT_WITH_FAILURES",
    "command_errors",
    "configure_logging",
    "execute_from_command_line",
    "main",
]
