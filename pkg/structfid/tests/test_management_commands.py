"""
Tests for management commands.
"""

import json
import logging
from io import StringIO

import pytest
from django.core.management import CommandError, call_command

from structfid import __version__
from structfid.data import read_table, write_table
from structfid.exceptions import NotEnoughRows
from structfid.management import (
    EXIT_FATAL,
    EXIT_WITH_FAILURES,
    command_errors,
    configure_logging,
    execute_from_command_line,
)
from structfid.scm import sample_scm, save_scm_spec


@pytest.fixture
def scm_path(tmp_path, classification_scm):
    """Write the classification SCM spec to disk."""
    path = tmp_path / "scm.json"
    save_scm_spec(classification_scm, path)
    return path


@pytest.fixture
def tables(tmp_path, classification_scm):
    """Write a reference and a synthetic CSV sharing one schema."""
    schema = tmp_path / "schema.json"
    write_table(sample_scm(classification_scm, 300, seed=0), tmp_path / "ref.csv", schema)
    write_table(sample_scm(classification_scm, 200, seed=1), tmp_path / "syn.csv", schema)
    return tmp_path / "ref.csv", tmp_path / "syn.csv", schema


@pytest.mark.integration
class TestSampleScmCommand:
    """Test sample_scm management command."""

    def test_writes_csv_and_schema(self, tmp_path, scm_path, classification_scm):
        out = StringIO()
        call_command(
            "sample_scm", "--spec", scm_path, "--n", 50, "--out", tmp_path / "d.csv", stdout=out
        )

        assert "Sampled 50 rows x 5 columns" in out.getvalue()
        table = read_table(tmp_path / "d.csv", tmp_path / "d.schema.json")
        assert table.equals(sample_scm(classification_scm, 50, 0))

    def test_invalid_row_count(self, tmp_path, scm_path):
        with pytest.raises(CommandError, match="--n must be positive") as exc:
            call_command(
                "sample_scm",
                "--spec",
                scm_path,
                "--n",
                0,
                "--out",
                tmp_path / "d.csv",
                stdout=StringIO(),
            )

        assert exc.value.returncode == EXIT_FATAL

    def test_missing_spec_file(self, tmp_path):
        with pytest.raises(CommandError, match="I/O error"):
            call_command(
                "sample_scm",
                "--spec",
                tmp_path / "absent.json",
                "--out",
                tmp_path / "d.csv",
                stdout=StringIO(),
            )


@pytest.mark.integration
class TestDeriveCiCommand:
    """Test derive_ci management command."""

    def test_global_catalog(self, tmp_path, scm_path):
        out = StringIO()
        call_command("derive_ci", "--spec", scm_path, "--out", tmp_path / "ci.json", stdout=out)

        data = json.loads((tmp_path / "ci.json").read_text())
        assert data["scope"] == "global"
        assert data["statements"]
        assert f"{len(data['statements'])} statements" in out.getvalue()

    def test_local_catalog(self, tmp_path, scm_path, classification_scm):
        call_command(
            "derive_ci",
            "--spec",
            scm_path,
            "--local",
            "--max-cond-size",
            1,
            "--out",
            tmp_path / "ci.json",
            stdout=StringIO(),
        )

        data = json.loads((tmp_path / "ci.json").read_text())
        target = classification_scm.target_index
        assert data["scope"] == "local"
        assert all(target in s["pair"] for s in data["statements"])
        assert all(len(s["conditioning_set"]) <= 1 for s in data["statements"])

    def test_negative_cond_size(self, tmp_path, scm_path):
        with pytest.raises(CommandError):
            call_command(
                "derive_ci",
                "--spec",
                scm_path,
                "--max-cond-size",
                -1,
                "--out",
                tmp_path / "ci.json",
                stdout=StringIO(),
            )

        assert not (tmp_path / "ci.json").exists()

    def test_invalid_spec_is_a_command_error(self, tmp_path):
        path = tmp_path / "scm.json"
        path.write_text(json.dumps({"variables": []}))

        with pytest.raises(CommandError, match="invalid_spec") as exc:
            call_command(
                "derive_ci", "--spec", path, "--out", tmp_path / "ci.json", stdout=StringIO()
            )

        assert exc.value.returncode == EXIT_FATAL


@pytest.mark.integration
class TestEvaluateCommand:
    """Test evaluate management command."""

    def _args(self, tables, tmp_path, *extra):
        ref, syn, schema = tables
        return (
            "--ref",
            ref,
            "--schema",
            schema,
            "--syn",
            syn,
            "--metrics",
            "shape,trend,global_ci",
            *extra,
            "--out",
            tmp_path / "report.json",
        )

    def test_with_scm(self, tmp_path, tables, scm_path):
        out = StringIO()
        call_command("evaluate", *self._args(tables, tmp_path, "--scm", scm_path), stdout=out)

        report = json.loads((tmp_path / "report.json").read_bytes())
        assert {r["generator"] for r in report["rows"]} == {"d_ref", "syn"}
        assert {r["status"] for r in report["rows"]} == {"ok"}
        assert "Report written to" in out.getvalue()

    def test_without_scm_skips_ci(self, tmp_path, tables):
        out = StringIO()
        call_command("evaluate", *self._args(tables, tmp_path), stdout=out)

        assert "global_ci: skipped" in out.getvalue()

    def test_markdown_format(self, tmp_path, tables):
        call_command(
            "evaluate", *self._args(tables, tmp_path, "--format", "markdown"), stdout=StringIO()
        )

        assert (tmp_path / "report.json").read_bytes().startswith(b"| generator |")

    def test_failed_cells_exit_two(self, tmp_path, tables, mocker):
        mocker.patch("structfid.bench.compute_metric", side_effect=NotEnoughRows("too few rows"))
        out = StringIO()

        with pytest.raises(CommandError, match="failed cells") as exc:
            call_command("evaluate", *self._args(tables, tmp_path), stdout=out)

        assert exc.value.returncode == EXIT_WITH_FAILURES
        assert "FAILED [not_enough_rows]" in out.getvalue()
        assert (tmp_path / "report.json").exists()

    def test_unknown_metric(self, tmp_path, tables):
        ref, syn, schema = tables

        with pytest.raises(CommandError, match="fid"):
            call_command(
                "evaluate",
                "--ref",
                ref,
                "--schema",
                schema,
                "--syn",
                syn,
                "--metrics",
                "shape,fid",
                "--out",
                tmp_path / "r.json",
                stdout=StringIO(),
            )


@pytest.mark.integration
class TestBenchCommand:
    """Test bench management command."""

    def test_writes_reports(self, tmp_path, scm_path):
        config_path = tmp_path / "bench.json"
        config_path.write_text(
            json.dumps(
                {
                    "datasets": [{"name": "cls", "scm": "scm.json", "n": 200}],
                    "generators": [{"kind": "marginal_independent"}, {"kind": "smote"}],
                    "repeats": 1,
                    "metrics": ["shape", "trend"],
                    "max_workers": 1,
                }
            )
        )
        out = StringIO()

        call_command("bench", "--config", config_path, "--out-dir", tmp_path / "out", stdout=out)

        assert "Done!" in out.getvalue()
        for name in ("report.json", "report.csv", "report.md"):
            assert (tmp_path / "out" / name).exists()

    def test_bad_worker_count(self, tmp_path, scm_path):
        config_path = tmp_path / "bench.json"
        config_path.write_text(
            json.dumps(
                {
                    "datasets": [{"name": "cls", "scm": "scm.json"}],
                    "generators": [{"kind": "smote"}],
                }
            )
        )

        with pytest.raises(CommandError, match="--workers"):
            call_command(
                "bench",
                "--config",
                config_path,
                "--out-dir",
                tmp_path,
                "--workers",
                0,
                stdout=StringIO(),
            )

    def test_invalid_config(self, tmp_path):
        config_path = tmp_path / "bench.json"
        config_path.write_text(json.dumps({"datasets": [], "generators": []}))

        with pytest.raises(CommandError, match="config_error"):
            call_command("bench", "--config", config_path, "--out-dir", tmp_path, stdout=StringIO())


@pytest.mark.unit
class TestCommandLine:
    """Test command dispatch and shared command helpers."""

    def test_unknown_command(self):
        with pytest.raises(CommandError):
            call_command("train")

    def test_missing_required_argument(self):
        with pytest.raises(CommandError, match="--spec"):
            call_command("derive_ci", stdout=StringIO())

    def test_help(self, capsys):
        assert execute_from_command_line(["structfid"]) == 0
        assert "sample-scm" in capsys.readouterr().out

    def test_version(self, capsys):
        assert execute_from_command_line(["structfid", "--version"]) == 0
        assert capsys.readouterr().out.strip() == __version__

    def test_unknown_command_line(self, capsys):
        assert execute_from_command_line(["structfid", "train"]) == EXIT_FATAL
        assert "Unknown command" in capsys.readouterr().err

    def test_dispatches_dashed_name(self, tmp_path, scm_path, capsys):
        out = tmp_path / "c.json"
        argv = ["structfid", "derive-ci", "--spec", str(scm_path), "--out", str(out)]

        assert execute_from_command_line(argv) == 0
        assert "statements" in capsys.readouterr().out

    def test_command_error_exits_with_return_code(self, tmp_path, scm_path, capsys):
        argv = ["structfid", "sample-scm", "--spec", str(scm_path), "--n", "0", "--out", "d.csv"]

        with pytest.raises(SystemExit) as exc:
            execute_from_command_line(argv)

        assert exc.value.code == EXIT_FATAL
        assert "--n must be positive" in capsys.readouterr().err

    def test_command_errors_wraps_domain_errors(self):
        with pytest.raises(CommandError, match=r"NotEnoughRows \[not_enough_rows\]") as exc:
            with command_errors():
                raise NotEnoughRows("too few rows")

        assert exc.value.returncode == EXIT_FATAL

    def test_verbosity_sets_logger_level(self):
        logger = logging.getLogger("structfid")
        previous = logger.level
        try:
            configure_logging(3)
            assert logger.level == logging.DEBUG
            configure_logging(0)
            assert logger.level == logging.ERROR
        finally:
            logger.setLevel(previous)
