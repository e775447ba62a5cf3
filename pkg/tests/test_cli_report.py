"""Tests for the command-line runner and the report format."""

from __future__ import annotations

import json

import pytest

from heunlab.cli import main, parse_params_text
from heunlab.report import CaseRecord, Report


GENERAL_PARAMS = "alpha = 2\nbeta = 1\ngamma = 1\ndelta = 1\nepsilon = 2\nq = 1\nt = 2\n"


@pytest.fixture()
def general_params(tmp_path):
    p = tmp_path / "general.params"
    p.write_text(GENERAL_PARAMS)
    return str(p)


class TestParamsFile:
    def test_rationals_and_comments(self):
        out = parse_params_text("# comment\nalpha = -1/2\n\nq = 3\n")
        assert out["alpha"] == -0.5
        assert out["q"] == 3

    def test_decimals_rejected_for_exact_commands(self):
        with pytest.raises(ValueError):
            parse_params_text("alpha = 0.5\n")

    def test_decimals_allowed_for_numeric_commands(self):
        out = parse_params_text("alpha = 0.51\n", allow_decimal=True)
        assert out["alpha"].numerator == 51 and out["alpha"].denominator == 100

    def test_malformed_line(self):
        with pytest.raises(ValueError):
            parse_params_text("alpha 3\n")


class TestVerifyCommand:
    def test_all_suite_record_inventory(self, capsys):
        rc = main(["verify", "--suite", "all", "--format", "json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        cases = [r["case"] for r in data["records"]]
        assert len(cases) == 26
        assert sum(c.startswith("matching/") for c in cases) == 5
        assert sum(c.startswith("riccati/") for c in cases) == 5
        assert sum(c.startswith("obstruction/") for c in cases) == 5
        assert sum(c.startswith("derivative/") for c in cases) == 5
        assert sum(c.startswith("elimination/") for c in cases) == 6
        assert "elimination/p3-substitution" in cases
        assert data["all_pass"] is True
        assert all(r["verdict"] == "pass" for r in data["records"])

    def test_exit_status_pure_function_of_verdicts(self, capsys):
        rc = main(["verify", "--suite", "obstruction", "--format", "json"])
        data = json.loads(capsys.readouterr().out)
        assert (rc == 0) == all(
            r["verdict"] in ("pass", "fail-as-predicted", "not-applicable")
            for r in data["records"])

    def test_paper_literal_h2_fails_as_predicted(self, capsys):
        rc = main(["verify", "--suite", "elimination", "--paper-literal-h2",
                   "--format", "json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        p2 = next(r for r in data["records"] if r["case"].startswith("elimination/p2 "))
        assert p2["verdict"] == "fail-as-predicted"
        assert p2["witness"] is not None

    def test_case_filter(self, capsys):
        rc = main(["verify", "--suite", "matching", "--case", "p4",
                   "--format", "json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        assert [r["case"] for r in data["records"]] == ["matching/p4"]

    def test_branch_filter(self, capsys):
        rc = main(["verify", "--suite", "riccati", "--case", "p6",
                   "--branch", "-", "--format", "json"])
        assert rc == 0

    def test_reports_reproducible_for_same_seed(self, capsys):
        main(["verify", "--suite", "obstruction", "--seed", "7",
              "--format", "json"])
        first = capsys.readouterr().out
        main(["verify", "--suite", "obstruction", "--seed", "7",
              "--format", "json"])
        second = capsys.readouterr().out
        assert first == second

    def test_family_slip_check_record(self, capsys):
        rc = main(["verify", "--suite", "matching", "--case", "p3prime",
                   "--family-slip-check", "--format", "json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        slip = [r for r in data["records"] if "slip" in r["case"]]
        assert len(slip) == 1 and slip[0]["verdict"] == "fail-as-predicted"

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as info:
            main(["verify", "--suite", "bogus"])
        assert info.value.code == 2


class TestOtherCommands:
    def test_derive_text(self, capsys, general_params):
        rc = main(["derive", "--family", "general", "--params", general_params])
        assert rc == 0
        out = capsys.readouterr().out
        assert "p1 =" in out and "p2 =" in out

    def test_derive_missing_param(self, tmp_path):
        p = tmp_path / "broken.params"
        p.write_text("alpha = 2\n")
        with pytest.raises(SystemExit) as info:
            main(["derive", "--family", "general", "--params", str(p)])
        assert info.value.code == 2

    def test_singularities(self, capsys, general_params):
        rc = main(["singularities", "--family", "general", "--params",
                   general_params, "--derivative"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "1/2" in out and "inf" in out

    def test_integrate_csv(self, capsys, general_params):
        rc = main(["integrate", "--system", "heun", "--family", "general",
                   "--params", general_params,
                   "--path", "0.25-0.5j -> 0.25+0.5j", "--init", "1,0"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("s,re_x,im_x")

    def test_integrate_riccati_json(self, capsys, tmp_path):
        p = tmp_path / "p2.params"
        p.write_text("alpha2 = 1/2\n")
        rc = main(["integrate", "--system", "riccati", "--kind", "p2",
                   "--params", str(p), "--t-range", "0:1",
                   "--lambda0", "0", "--format", "json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        assert data["pole_truncated"] is False


class TestReportRoundTrip:
    def test_json_round_trip_identity(self, capsys):
        main(["verify", "--suite", "derivative", "--format", "json"])
        text = capsys.readouterr().out
        report = Report.from_json(text)
        assert report.to_json() == text.rstrip("\n")

    def test_sorted_by_case_id(self):
        r = Report(suite="x")
        r.add(CaseRecord("b", "c", "exact", "pass"))
        r.add(CaseRecord("a", "c", "exact", "pass"))
        assert [x.case for x in r.sorted_records()] == ["a", "b"]

    def test_exit_status(self):
        r = Report(suite="x")
        r.add(CaseRecord("a", "c", "exact", "pass"))
        assert r.exit_status() == 0
        r.add(CaseRecord("b", "c", "exact", "fail-as-predicted"))
        assert r.exit_status() == 0
        r.add(CaseRecord("c", "c", "exact", "fail"))
        assert r.exit_status() == 1
