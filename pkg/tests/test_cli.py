"""Command-line driver: exit codes, config merging, output files."""

import json

import pytest

from fraceig.cli import main

OK, HARD, ANOMALY, CONFIG = 0, 2, 3, 64


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_lambda1_ok(self, capsys):
        code, out, _ = run(capsys, "lambda1", "--h", "0.1", "--q", "1.5")
        assert code == OK
        doc = json.loads(out)
        assert doc["lambda"] > 0

    def test_bad_domain_is_config_error(self, capsys):
        code, _, err = run(capsys, "lambda1", "--domain", "1,0")
        assert code == CONFIG
        assert "error" in err

    def test_bad_flag_is_config_error(self, capsys):
        code, _, _ = run(capsys, "lambda1", "--no-such-flag")
        assert code == CONFIG

    def test_missing_subcommand_is_config_error(self, capsys):
        assert run(capsys, )[0] == CONFIG

    def test_non_convergence_is_hard_failure(self, capsys):
        code, _, err = run(
            capsys, "lambda1", "--h", "0.02", "--tol", "1e-14", "--max-iter", "1"
        )
        assert code == HARD
        assert "error" in err


class TestConfigFile:
    def test_file_sets_values_flags_win(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"h": 1.0, "q": 2.0, "s": 0.5}))
        code, out, _ = run(capsys, "lambda1", "--config", str(cfg))
        assert code == OK
        assert json.loads(out)["lambda"] == pytest.approx(8.0, rel=1e-10)
        # explicit flag overrides the file
        code, out, _ = run(capsys, "lambda1", "--config", str(cfg), "--s", "0.25")
        assert json.loads(out)["lambda"] == pytest.approx(
            8.0 * 2.0**0.5, rel=1e-10
        )

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"frobnicate": 1}))
        assert run(capsys, "lambda1", "--config", str(cfg))[0] == CONFIG

    def test_unreadable_file_rejected(self, capsys):
        assert run(capsys, "lambda1", "--config", "/no/such/file.json")[0] == CONFIG

    def test_non_object_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        assert run(capsys, "lambda1", "--config", str(cfg))[0] == CONFIG


class TestSubcommands:
    def test_assemble_round_trip(self, tmp_path, capsys):
        from fraceig import form_from_json

        out = tmp_path / "form.json"
        code, _, _ = run(
            capsys, "assemble", "--h", "0.2", "--out", str(out)
        )
        assert code == OK
        form = form_from_json(out.read_text())
        assert form.n == 5

    def test_spectrum(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--h", "0.2", "--k", "3")
        assert code == OK
        doc = json.loads(out)
        assert len(doc["eigenvalues"]) == 3
        assert doc["eigenvalues"] == sorted(doc["eigenvalues"])

    def test_search(self, capsys):
        code, out, _ = run(
            capsys, "search", "--h", "0.2", "--q", "1.5", "--restarts", "5"
        )
        assert code == OK
        doc = json.loads(out)
        assert doc["clusters"][0]["lambda"] > 0

    def test_lane_emden_both_routes(self, capsys):
        code, out, _ = run(
            capsys, "lane-emden", "--h", "0.1", "--q", "1.5", "--route", "both"
        )
        assert code == OK
        doc = json.loads(out)
        assert len(doc["results"]) == 2

    def test_lane_emden_csv_output(self, tmp_path, capsys):
        out = tmp_path / "w.csv"
        code, _, _ = run(
            capsys, "lane-emden", "--h", "0.2", "--q", "1.5", "--out", str(out)
        )
        assert code == OK
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "node,x,w"
        assert len(lines) == 6

    def test_lane_emden_bad_route(self, capsys):
        code, _, _ = run(capsys, "lane-emden", "--route", "walk")
        assert code == CONFIG

    def test_exhaustion_csv(self, tmp_path, capsys):
        out = tmp_path / "seq.csv"
        code, _, _ = run(
            capsys, "exhaustion", "--domain=-0.5,0.5", "--h", "0.1",
            "--radii", "0.5,1", "--center", "0", "--out", str(out),
        )
        assert code == OK
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "radius,node,x,w"
        assert len(lines) == 21

    def test_compare_pass_and_validation(self, capsys):
        code, out, _ = run(
            capsys, "compare", "--domain1", "0,0.6", "--domain2", "0,1",
            "--h", "0.05", "--q", "1.5",
        )
        assert code == OK
        assert json.loads(out)["pass"] is True
        assert run(capsys, "compare", "--domain1", "0,1")[0] == CONFIG

    @pytest.mark.parametrize("which", ["hardy", "picone", "holder", "converse-linf"])
    def test_audits_pass(self, which, capsys):
        code, out, _ = run(
            capsys, "audit", which, "--h", "0.05", "--q", "1.5", "--samples", "20"
        )
        assert code == OK
        assert json.loads(out)["pass"] is True

    def test_audit_hopf(self, capsys):
        code, out, _ = run(capsys, "audit", "hopf", "--h", "0.1", "--q", "1.5")
        assert code == OK
        assert json.loads(out)["c_est"] > 0

    def test_audit_subsolution(self, capsys):
        code, out, _ = run(
            capsys, "audit", "subsolution", "--h", "0.05", "--q", "1.5"
        )
        assert code == OK
        assert json.loads(out)["ratio"] >= 0

    def test_experiment_suite_writes_json(self, tmp_path, capsys):
        out = tmp_path / "suite.json"
        code, _, _ = run(
            capsys, "experiment", "suite", "--h", "0.1", "--q", "1.5",
            "--samples", "10", "--out", str(out),
        )
        assert code == OK
        doc = json.loads(out.read_text())
        assert all(r["pass"] for r in doc["reports"])

    def test_experiment_qcont_stdout(self, capsys):
        code, out, _ = run(
            capsys, "experiment", "qcont", "--s", "0.25", "--h", "0.1",
            "--q-list", "2.5,2.25",
        )
        assert code == OK
        assert json.loads(out)["pass"] is True
