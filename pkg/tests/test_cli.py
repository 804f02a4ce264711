"""Command-line interface: outputs, determinism, exit codes."""

import json
import math

import pytest

from ffic.cli import build_parser, main


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


SMALL = ["--samples", "20000", "--seed", "5"]


class TestJensenGap:
    def test_gamma_k2_table_value(self, capsys):
        code, out, err = run(["jensen-gap", "--shape", "gamma", "--k", "2"] + SMALL, capsys)
        assert code == 0
        obj = json.loads(out)
        assert round(obj["closed_form"], 2) == 0.40
        assert obj["gap_at_zero"] <= obj["closed_form"] + 1e-6
        assert obj["metadata"]["seed"] == 5
        assert "closed_form_bound_bits" in err

    def test_deterministic(self, capsys):
        code, out, _ = run(["jensen-gap", "--shape", "deterministic"] + SMALL, capsys)
        assert code == 0
        assert json.loads(out)["gap_at_zero"] == 0.0


class TestRegion:
    def test_deterministic_inner_bound(self, capsys):
        code, out, _ = run(
            ["region", "--kind", "nofb-inner", "--deterministic",
             "--snr", "15", "--inr", "1"] + SMALL, capsys)
        assert code == 0
        obj = json.loads(out)
        first = obj["constraints"][0]
        assert first["label"] == "inner_nofb1"
        assert first["bound"] == pytest.approx(math.log2(17.0) - 1.0)
        assert first["stderr"] == 0.0

    def test_csv_format(self, capsys):
        code, out, _ = run(
            ["region", "--kind", "nofb-outer", "--deterministic",
             "--snr", "4", "--inr", "1", "--format", "csv"] + SMALL, capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("#") and "seed=5" in lines[0]
        assert lines[1] == "label,c1,c2,bound,stderr"
        assert len(lines) == 2 + 7

    def test_fb_region_with_rho(self, capsys):
        code, out, _ = run(
            ["region", "--kind", "fb-inner", "--deterministic", "--snr", "9",
             "--inr", "4", "--rho-mag", "1.0"] + SMALL, capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["constraints"][0]["bound"] == pytest.approx(math.log2(26.0) - 1.0)


class TestGapCheck:
    def test_small_grid_passes(self, capsys):
        code, out, err = run(
            ["gap-check", "--kind", "nofb", "--shape", "rayleigh",
             "--snr-list", "100", "--alpha-list", "0.5"] + SMALL, capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["all_pass"] is True
        assert obj["threshold"] == pytest.approx(1.8327461772768672)
        assert len(obj["points"]) == 1
        assert "PASS" in err

    def test_fb_grid_includes_rho(self, capsys):
        code, out, _ = run(
            ["gap-check", "--kind", "fb", "--snr-list", "100",
             "--alpha-list", "0.5", "--rho-list", "0.0", "0.7"] + SMALL, capsys)
        assert code == 0
        obj = json.loads(out)
        assert [p["rho_mag"] for p in obj["points"]] == [0.0, 0.7]

    def test_static_kind(self, capsys):
        code, out, _ = run(
            ["gap-check", "--kind", "static-nofb", "--snr-list", "100",
             "--alpha-list", "0.5"] + SMALL, capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["points"][0]["min_delta"] >= -3.0 * obj["points"][0]["stderr"]


class TestSweep:
    def test_csv_table(self, capsys):
        code, out, _ = run(
            ["sweep", "--alpha", "0.5", "--snr-db-list", "10", "20",
             "--shape", "deterministic"] + SMALL, capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[1] == "snr_db,alpha,sym_inner,sym_outer,gap"
        assert len(lines) == 4
        first = lines[2].split(",")
        assert float(first[0]) == 10.0 and float(first[1]) == 0.5


class TestAf:
    def test_tridiag_csv(self, capsys):
        code, out, _ = run(
            ["af", "--mode", "tridiag", "--a", "3", "--b", "1",
             "--n-list", "4", "200"] + SMALL, capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[1] == "a,b,n,growth,closed_form"
        last = lines[-1].split(",")
        assert abs(float(last[3]) - float(last[4])) < 0.01

    def test_cancellation_json(self, capsys):
        code, out, _ = run(
            ["af", "--mode", "cancellation", "--n", "4", "--blocks", "8",
             "--seed", "3"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["max_residual"] < 1e-10
        assert obj["n"] == 4 and obj["N"] == 8

    def test_r1_csv(self, capsys):
        code, out, _ = run(
            ["af", "--mode", "r1", "--snr", "100", "--inr", "10",
             "--n-list", "8", "--samples", "2000", "--seed", "1"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[1] == "n,r1_estimate,lower_bound"
        n, est, lower = lines[2].split(",")
        assert float(est) >= float(lower)

    def test_corners(self, capsys):
        code, out, _ = run(
            ["af", "--mode", "corners", "--snr", "100", "--inr", "10"] + SMALL, capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["pass"] is True
        assert obj["per_user_gap"] <= obj["bound"]


class TestIsi:
    def test_bounds_json(self, capsys):
        code, out, _ = run(
            ["isi", "--snr", "100", "--inr", "10", "--c-jg", "0.83"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["width"] == pytest.approx(2.0 + 3.0 * 0.83)

    def test_achievable_check(self, capsys):
        code, out, _ = run(
            ["isi", "--snr", "100", "--inr", "10", "--check-achievable",
             "--n", "64", "--samples", "5000", "--seed", "2"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["lower"] <= obj["achievable"] <= obj["upper"]

    def test_violated_sandwich_exits_one(self, capsys):
        # a negative gap override empties the sandwich: the check must FAIL
        code, out, _ = run(
            ["isi", "--snr", "100", "--inr", "10", "--c-jg", "-2.0",
             "--check-achievable", "--n", "16", "--samples", "2000",
             "--seed", "2"], capsys)
        assert code == 1
        assert json.loads(out)["pass"] is False


class TestCliContract:
    def test_identical_argv_byte_identical_files(self, tmp_path, capsys):
        argv = ["region", "--kind", "nofb-inner", "--snr", "100", "--inr", "10",
                "--samples", "20000", "--seed", "9"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_flag_is_hard_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--alpha", "0.5", "--snr-db-list", "10", "--bogus"])
        assert exc.value.code == 2

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_bad_value_returns_two(self, capsys):
        code, _, err = run(["region", "--kind", "fb-outer", "--snr", "10",
                            "--inr", "1", "--rho-mag", "2.0"] + SMALL, capsys)
        assert code == 2
        assert "error" in err

    @pytest.mark.parametrize(
        "cmd", ["jensen-gap", "region", "gap-check", "sweep", "af", "isi"]
    )
    def test_help_lists_flags(self, cmd, capsys):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args([cmd, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "--seed" in out and "--samples" in out

    def test_threads_env_does_not_change_output(self, tmp_path, monkeypatch, capsys):
        argv = ["gap-check", "--kind", "nofb", "--snr-list", "100", "10",
                "--alpha-list", "0.5", "--samples", "10000", "--seed", "3"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        monkeypatch.setenv("FFIC_THREADS", "1")
        assert main(argv + ["--out", str(a)]) == 0
        monkeypatch.setenv("FFIC_THREADS", "4")
        assert main(argv + ["--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()
