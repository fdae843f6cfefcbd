"""
Tests for the cq-stein command line.
"""
import csv
import io
import json
import math

import pytest

from cqstein import __version__
from cqstein.main import create_parser, main
from cqstein.schemas import CheckLine
from cqstein.services.channel_io import load_recipe
from cqstein.services.free_sets import AxiomVerdict

LN2 = math.log(2.0)


def run_json(capsys, *argv):
    code = main([*argv, "--format", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestParser:
    """Test parser construction."""

    def test_version(self, capsys):
        """--version prints the package version."""
        with pytest.raises(SystemExit) as exc:
            create_parser().parse_args(["--version"])
        assert exc.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_command_is_required(self):
        """Running without a subcommand is a usage error."""
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_common_options_on_every_command(self):
        """Shared flags parse after any subcommand."""
        args = create_parser().parse_args(["capacity", "catalogue:flip", "--eps", "0.2", "--format", "json"])
        assert args.eps == 0.2
        assert args.format == "json"


class TestDivergenceCommands:
    """Test div, capacity, robustness and decompose."""

    def test_umegaki_divergence(self, capsys):
        """D(flip || depolarizing) = ln 2."""
        code, out = run_json(capsys, "div", "catalogue:flip", "catalogue:depolarizing", "--kind", "d")
        assert code == 0
        assert math.isclose(out["value"], LN2, abs_tol=1e-9)

    def test_choi_distance(self, capsys):
        """||J(flip) - J(constant_zero)||_1 = 1/2."""
        code, out = run_json(capsys, "div", "catalogue:flip", "catalogue:constant_zero", "--kind", "choi-dist")
        assert code == 0
        assert math.isclose(out["value"], 0.5, abs_tol=1e-12)

    def test_choi_variant(self, capsys):
        """--choi evaluates on normalized Choi states."""
        code, out = run_json(capsys, "div", "catalogue:flip", "catalogue:depolarizing", "--choi")
        assert code == 0
        assert out["kind"] == "choi-d"
        assert math.isclose(out["value"], 0.5 * LN2, abs_tol=1e-9)

    def test_divergence_to_set_from_files(self, capsys, channel_files):
        """Channel and free-set files combine with --set."""
        code, out = run_json(capsys, "div", str(channel_files["flip"]), "--set", str(channel_files["singleton"]))
        assert code == 0
        assert math.isclose(out["value"], LN2, abs_tol=1e-9)

    def test_div_needs_second_operand(self, capsys):
        """Without a second channel or --set div is an input error."""
        assert main(["div", "catalogue:flip"]) == 2
        assert "input_error" in capsys.readouterr().err

    def test_capacity(self, capsys):
        """The classical copy channel carries ln 2."""
        code, out = run_json(capsys, "capacity", "catalogue:classical_copy")
        assert code == 0
        assert math.isclose(out["lower"], LN2, abs_tol=1e-6)
        assert out["gap"] <= 1e-8

    def test_robustness(self, capsys):
        """Flip against the replacer set: log 1.5."""
        code, out = run_json(capsys, "robustness", "catalogue:flip", "--set", "replacer")
        assert code == 0
        assert math.isclose(out["value"], math.log(1.5), abs_tol=1e-9)
        assert out["is_point"] is True

    def test_decompose(self, capsys, tmp_path):
        """Flip decomposes with r = 1/2 and the complement is written on request."""
        path = tmp_path / "complement.json"
        code, out = run_json(capsys, "decompose", "catalogue:flip", "--save-complement", str(path))
        assert code == 0
        assert math.isclose(out["r"], 0.5, abs_tol=1e-9)
        assert out["reconstruction_residual"] <= 1e-9
        assert path.exists()


class TestSweepCommands:
    """Test sweep-stein and sweep-gqsl."""

    def test_sweep_gqsl_csv(self, capsys):
        """CSV output has a header and one row per n."""
        code = main(["sweep-gqsl", "catalogue:flip", "--set", "replacer", "--nmax", "2"])
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [r["n"] for r in rows] == ["1", "2"]
        assert all(r["note"] == "" for r in rows)

    def test_sweep_stein(self, capsys):
        """Letter 0 of flip against letter 0 of depolarizing."""
        code, out = run_json(capsys, "sweep-stein", "catalogue:flip", "catalogue:depolarizing", "--nmax", "3")
        assert code == 0
        assert len(out) == 3
        assert all(math.isclose(row["d"], LN2, abs_tol=1e-9) for row in out)

    def test_sweep_stein_letter_out_of_range(self, capsys):
        """Letters outside the alphabet are input errors."""
        assert main(["sweep-stein", "catalogue:flip", "catalogue:depolarizing", "--letter", "5"]) == 2


class TestResourceCommands:
    """Test smooth and superchannel."""

    def test_smooth(self, capsys, channel_files, tmp_path):
        """One row per k with its bounds, and the smoothed channel saved."""
        saved = tmp_path / "smoothed.json"
        code, out = run_json(capsys, "smooth", str(channel_files["biased_90"]), str(channel_files["biased_99"]),
                             "--R", "2", "--k", "1", "2", "--save", str(saved))
        assert code == 0
        assert [row["k"] for row in out] == [1, 2]
        for row in out:
            assert row["max_cut_weight"] <= row["cut_weight_bound"]
        assert json.loads(saved.read_text())["k"] == 2

    def test_smooth_rejects_nonpositive_rate(self, capsys, channel_files):
        """R <= 0 is reported with exit code 2."""
        code = main(["smooth", str(channel_files["biased_90"]), str(channel_files["biased_99"]), "--R", "0"])
        assert code == 2
        assert "precondition_violated" in capsys.readouterr().err

    def test_choi_blind(self, capsys):
        """Every Choi-blind identity passes for n <= 3."""
        assert main(["superchannel", "choi-blind", "--n", "3"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 15
        assert all(r["passed"] == "True" for r in rows)

    def test_convert(self, capsys, tmp_path):
        """The conversion trace respects its bounds and saves the last recipe."""
        recipe = tmp_path / "theta.json"
        code, out = run_json(
            capsys, "superchannel", "convert", "catalogue:flip", "catalogue:constant_zero",
            "--set1", "catalogue:depolarizing", "--set2", "catalogue:depolarizing",
            "--nmax", "2", "--save-recipe", str(recipe),
        )
        assert code == 0
        assert [row["n"] for row in out] == [1, 2]
        for row in out:
            assert row["diamond_error"] <= row["diamond_bound"] + 1e-9
        assert load_recipe(recipe).probe_input == 0

    def test_convert_needs_target(self, capsys):
        """convert without a target channel is an input error."""
        assert main(["superchannel", "convert", "catalogue:flip"]) == 2


class TestReportCommands:
    """Test examples and validate."""

    def test_examples(self, capsys):
        """A small examples run passes every check."""
        assert main(["examples", "--n-choi", "2", "--count", "2"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert rows and all(r["passed"] == "True" for r in rows)

    def test_examples_failure_names_the_identity(self, capsys, monkeypatch):
        """A failing identity exits 1 with check_failed and its name on stderr."""
        lines = [
            CheckLine(name="R(flip)", expected=LN2, computed=LN2, tol=1e-9, passed=True),
            CheckLine(name="R_choi(flip)", expected=0.5 * LN2, computed=0.0, tol=1e-9, passed=False),
        ]
        monkeypatch.setattr("cqstein.cli.reports.examples_report", lambda **kwargs: lines)
        assert main(["examples"]) == 1
        err = capsys.readouterr().err
        assert '"error": "check_failed"' in err
        assert "R_choi(flip)" in err

    def test_validate_failing_axioms(self, capsys, monkeypatch, channel_files):
        """A free set that breaks an axiom is reported with exit code 2."""
        verdicts = [AxiomVerdict("convex", False, "mixture left the set")]
        monkeypatch.setattr("cqstein.cli.reports.axioms_report", lambda s, rng: verdicts)
        assert main(["validate", str(channel_files["replacer"])]) == 2
        err = capsys.readouterr().err
        assert '"error": "input_error"' in err
        assert "convex" in err

    def test_validate_channel(self, capsys, channel_files):
        """The flip channel is valid but its Choi state is not full rank."""
        code, out = run_json(capsys, "validate", str(channel_files["flip"]))
        assert code == 0
        assert out["kind"] == "channel"
        assert out["shape"] == [2, 2]
        assert out["choi_full_rank"] is False

    def test_validate_free_set(self, capsys, channel_files):
        """The replacer set satisfies its axioms."""
        code, out = run_json(capsys, "validate", str(channel_files["replacer"]))
        assert code == 0
        assert out["kind"] == "free_set"
        assert all(v["holds"] for v in out["details"]["axioms"].values())


class TestErrors:
    """Test error reporting and file output."""

    def test_missing_file(self, capsys, tmp_path):
        """A missing channel file exits 2 with a JSON error on stderr."""
        code = main(["capacity", str(tmp_path / "absent.json")])
        assert code == 2
        err = capsys.readouterr().err
        assert '"error": "input_error"' in err

    def test_nonpositive_capacity_tolerance(self, capsys):
        """--tol 0 is an input error (exit 2), not a convergence failure."""
        assert main(["capacity", "catalogue:classical_copy", "--tol", "0"]) == 2
        assert '"error": "input_error"' in capsys.readouterr().err

    def test_unknown_catalogue_name(self, capsys):
        """Unknown catalogue channels are input errors."""
        assert main(["capacity", "catalogue:teleporter"]) == 2
        assert "Unknown catalogue channel" in capsys.readouterr().err

    def test_out_writes_file(self, capsys, tmp_path):
        """--out sends the rows to a file and leaves stdout empty."""
        path = tmp_path / "nested" / "div.csv"
        code = main(["div", "catalogue:flip", "catalogue:depolarizing", "--kind", "diamond", "--out", str(path)])
        assert code == 0
        assert capsys.readouterr().out == ""
        rows = list(csv.DictReader(io.StringIO(path.read_text())))
        assert math.isclose(float(rows[0]["value"]), 1.0, abs_tol=1e-9)
