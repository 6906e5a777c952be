"""End-to-end CLI and document round-trips: fit, predict, simulate."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from cpmdl import conditional_cdf, conditional_quantile, fit
from cpmdl.cli import main
from cpmdl.io import fit_from_document, fit_to_document, read_csv
from cpmdl.errors import CsvParseError, UnknownCensorCodeError

from conftest import mixed_example

EXAMPLE_CSV = """outcome,censor,x
3,L,0
4,,0
5,L,1
6,,0
7,,1
9,U,1
10,,0
12,U,1
"""


@pytest.fixture
def csv_path(tmp_path):
    p = tmp_path / "data.csv"
    p.write_text(EXAMPLE_CSV)
    return p


class TestReadCsv:
    def test_parses_example(self, csv_path):
        table = read_csv(csv_path)
        assert table.outcome_name == "outcome"
        assert table.covariate_names == ["x"]
        assert table.dataset.n == 8
        ref = mixed_example()
        np.testing.assert_array_equal(table.dataset.z, ref.z)
        assert list(table.dataset.delta) == list(ref.delta)

    def test_censor_vocabulary(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("y,c\n1,lower\n2,none\n3,upper\n4,\n5,l\n6,U\n")
        table = read_csv(p)
        codes = [d.value for d in table.dataset.delta]
        assert codes == ["below_dl", "observed", "above_dl", "observed",
                         "below_dl", "above_dl"]

    def test_errors_carry_line_numbers(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("y,c\n1,\nnope,\n")
        with pytest.raises(CsvParseError, match="line 3"):
            read_csv(p)
        p.write_text("y,c\n1,Q\n")
        with pytest.raises(UnknownCensorCodeError, match="line 2"):
            read_csv(p)
        p.write_text("")
        with pytest.raises(CsvParseError):
            read_csv(p)

    def test_round_digits(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("y,c\n1.24,\n1.26,\n2.0,\n")
        table = read_csv(p, round_digits=1)
        np.testing.assert_array_equal(table.dataset.z, [1.2, 1.3, 2.0])


class TestDocumentRoundTrip:
    def test_predictions_survive_roundtrip(self):
        ds = mixed_example()
        model = fit(ds, link="logit")
        doc = fit_to_document(model, covariate_names=["x"])
        assert doc["schema_version"] == 1
        assert doc["coefficients"][0]["name"] == "x"
        assert "odds_ratio" in doc["coefficients"][0]

        back, names = fit_from_document(json.loads(json.dumps(doc)))
        assert names == ["x"]
        for xv in (0.0, 1.0):
            e1, s1 = conditional_cdf(model, [xv], 6.5)
            e2, s2 = conditional_cdf(back, [xv], 6.5)
            assert e2 == pytest.approx(e1, abs=1e-12)
            assert s2 == pytest.approx(s1, abs=1e-12)
            q1 = conditional_quantile(model, [xv], 0.5)
            q2 = conditional_quantile(back, [xv], 0.5)
            assert q1 == q2

    def test_no_odds_ratio_for_probit(self):
        model = fit(mixed_example(), link="probit")
        doc = fit_to_document(model)
        assert "odds_ratio" not in doc["coefficients"][0]


class TestFitCommand:
    def test_fit_writes_document(self, csv_path, tmp_path):
        out = tmp_path / "fit.json"
        code = main(["fit", "--data", str(csv_path), "--link", "logit",
                     "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["converged"] is True
        assert doc["anchors"]["category_labels"] == \
            ["<3", "4", "6", "7", "10", ">12"]
        model = fit(read_csv(csv_path).dataset, link="logit")
        assert doc["coefficients"][0]["estimate"] == pytest.approx(
            model.beta[0], abs=1e-10)

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        code = main(["fit", "--data", str(tmp_path / "nope.csv")])
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "Io"

    def test_parse_failure_is_exit_one(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("y,c\nzzz,\n")
        code = main(["fit", "--data", str(p)])
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "CsvParseError"


class TestPredictCommand:
    def test_predict_outputs_rows(self, csv_path, tmp_path):
        fit_doc = tmp_path / "fit.json"
        assert main(["fit", "--data", str(csv_path), "--out", str(fit_doc)]) == 0
        out = tmp_path / "pred.csv"
        code = main(["predict", "--fit", str(fit_doc), "--profile", "x=1",
                     "--cdf-at", "6.5", "--quantile", "0.5", "0.95",
                     "--out", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        kinds = [(r["quantity"], r["at"]) for r in rows]
        assert ("cdf", "6.5") in kinds
        assert ("quantile", "0.5") in kinds

        model = fit(read_csv(csv_path).dataset, link="logit")
        cdf_row = next(r for r in rows if r["quantity"] == "cdf")
        est, _ = conditional_cdf(model, [1.0], 6.5)
        assert float(cdf_row["estimate"]) == pytest.approx(est, abs=1e-10)
        # p=0.95 lands above the top category for this tiny dataset
        q_rows = [r for r in rows if r["quantity"] == "quantile"]
        tail = next(r for r in q_rows if r["at"] == "0.95")
        assert json.loads(tail["estimate"])["kind"] in ("above_dl", "below_dl") \
            or float(tail["estimate"])

    def test_unknown_profile_column(self, csv_path, tmp_path, capsys):
        fit_doc = tmp_path / "fit.json"
        main(["fit", "--data", str(csv_path), "--out", str(fit_doc)])
        code = main(["predict", "--fit", str(fit_doc), "--profile", "zz=1",
                     "--quantile", "0.5"])
        assert code == 1
        assert json.loads(capsys.readouterr().err)["error"] == \
            "UnknownProfileColumnError"

    def test_invalid_probability(self, csv_path, tmp_path, capsys):
        fit_doc = tmp_path / "fit.json"
        main(["fit", "--data", str(csv_path), "--out", str(fit_doc)])
        code = main(["predict", "--fit", str(fit_doc), "--quantile", "1.5"])
        assert code == 1


class TestSimulateCommand:
    def test_simulate_writes_tables(self, tmp_path):
        prefix = tmp_path / "study"
        code = main(["simulate", "--family", "single", "--scenario", "2",
                     "--n", "50", "--reps", "4", "--estimators", "cpm",
                     "--out", str(prefix)])
        assert code == 0
        rows = list(csv.DictReader((tmp_path / "study.csv").open()))
        assert {r["parameter"] for r in rows} >= {"beta", "Q(0.5|X=1)"}
        manifest = json.loads((tmp_path / "study.manifest.json").read_text())
        assert manifest["spec"]["replicates"] == 4
        assert manifest["excluded_replicates"] == {"cpm": 0}
        payload = json.loads((tmp_path / "study.json").read_text())
        assert len(payload["rows"]) == len(rows)

    def test_unknown_scenario_is_exit_one(self, tmp_path, capsys):
        code = main(["simulate", "--family", "single", "--scenario", "9",
                     "--n", "50", "--reps", "2", "--out", str(tmp_path / "x")])
        assert code == 1
        assert json.loads(capsys.readouterr().err)["error"] == \
            "UnknownScenarioError"


class TestUsageErrors:
    def test_bad_arguments_exit_two(self):
        proc = subprocess.run(
            [sys.executable, "-m", "cpmdl.cli", "fit"],
            capture_output=True, text=True)
        assert proc.returncode == 2

    def test_console_entry_point(self, csv_path, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "cpmdl.cli", "fit",
             "--data", str(csv_path)],
            capture_output=True, text=True)
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["converged"] is True
