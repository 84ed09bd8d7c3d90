import csv

import numpy as np
import pytest

from diracqca.cli import main, parse_config_file


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    return rows


class TestDispersionCommand:
    def test_figure_data(self, tmp_path):
        out = tmp_path / "disp"
        assert main(["dispersion", "--out", str(out), "--samples", "401"]) == 0
        rows = read_csv(out / "dispersion.csv")
        masses = sorted({float(r["m"]) for r in rows})
        assert masses == [0.1, 0.2, 0.4, 0.8, 1.0]

        flat = [float(r["omega"]) for r in rows if float(r["m"]) == 1.0]
        assert np.allclose(flat, np.pi / 2, atol=1e-12)

        massless = [(float(r["k"]), float(r["omega"])) for r in rows if float(r["m"]) == 0.0]
        assert not massless  # 0 is not in the default mass list
        out2 = tmp_path / "disp0"
        assert main(["dispersion", "--out", str(out2), "--mass", "0", "--samples", "101"]) == 0
        for r in read_csv(out2 / "dispersion.csv"):
            assert float(r["omega"]) == pytest.approx(abs(float(r["k"])), abs=1e-12)

    def test_velocity_maxima_at_invariant_points(self, tmp_path):
        out = tmp_path / "disp"
        assert main(["dispersion", "--out", str(out), "--samples", "721"]) == 0
        rows = read_csv(out / "dispersion.csv")
        for m in (0.1, 0.4, 0.8):
            sel = [(float(r["k"]), float(r["v"])) for r in rows if float(r["m"]) == m]
            ks, vs = zip(*sel)
            best = max(range(len(vs)), key=lambda i: vs[i])
            assert abs(ks[best]) == pytest.approx(np.pi / 2, abs=1e-9)


class TestBoostLocalized:
    def test_norms_and_determinism(self, tmp_path):
        args = ["boost-localized", "--cells", "512", "--mass", "0.1", "--beta", "-0.9"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        density = out1 / "density_m0.1_beta-0.9.csv"
        assert (out1 / "spectrum_m0.1_beta-0.9.csv").exists()
        rows = read_csv(density)
        for column in ("p_lab", "p_boosted"):
            total = sum(float(r[column]) for r in rows)
            assert total == pytest.approx(1.0, abs=1e-8)
        assert density.read_bytes() == (out2 / density.name).read_bytes()


class TestEvolveCommand:
    def test_direct_vs_spectral_report(self, tmp_path):
        out = tmp_path / "ev"
        assert main(
            ["evolve", "--out", str(out), "--cells", "128", "--steps", "50", "--method", "both"]
        ) == 0
        report = dict(
            line.split(" = ") for line in (out / "evolve_report.txt").read_text().splitlines()
        )
        assert float(report["direct_vs_spectral_max_deviation"]) < 1e-10
        assert float(report["norm"]) == pytest.approx(1.0, abs=1e-12)
        assert (out / "state_out.csv").exists()

    def test_state_roundtrip_through_files(self, tmp_path):
        out1 = tmp_path / "e1"
        assert main(["evolve", "--out", str(out1), "--cells", "64", "--steps", "3"]) == 0
        out2 = tmp_path / "e2"
        assert main(
            [
                "evolve",
                "--out",
                str(out2),
                "--cells",
                "64",
                "--steps",
                "0",
                "--state-in",
                str(out1 / "state_out.csv"),
            ]
        ) == 0
        assert (out1 / "state_out.csv").read_bytes() == (out2 / "state_out.csv").read_bytes()


class TestValidation:
    def test_named_precondition_messages(self, tmp_path, capsys):
        assert main(["dispersion", "--mass", "1.5", "--out", str(tmp_path)]) == 1
        assert "mass parameter precondition" in capsys.readouterr().err
        assert main(["boost-packet", "--beta", "1.0", "--out", str(tmp_path)]) == 1
        assert "boost precondition" in capsys.readouterr().err
        assert main(["evolve", "--steps", "-1", "--out", str(tmp_path)]) == 1
        assert "evolution precondition" in capsys.readouterr().err

    def test_numerical_exit_code(self, tmp_path, capsys):
        # a packet sitting on the invariant point violates the support window
        code = main(
            [
                "boost-packet",
                "--out",
                str(tmp_path / "o"),
                "--cells",
                "512",
                "--k0",
                str(np.pi / 2),
                "--x0",
                "256",
            ]
        )
        assert code == 2
        assert "numerical failure" in capsys.readouterr().err

    def test_io_exit_code(self, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("not a directory")
        assert main(["dispersion", "--out", str(blocker)]) == 3


class TestConfigFile:
    def test_parse_and_precedence(self, tmp_path):
        config = tmp_path / "run.conf"
        config.write_text(
            "# comment\nmass = 0.3,0.5\ncells = 256\nsigma-k = 0.03\n"
        )
        values = parse_config_file(config)
        assert values == {"mass": "0.3,0.5", "cells": "256", "sigma_k": "0.03"}
        out = tmp_path / "out"
        assert main(
            [
                "dispersion",
                "--config",
                str(config),
                "--out",
                str(out),
                "--mass",
                "0.7",
                "--samples",
                "41",
            ]
        ) == 0
        rows = read_csv(out / "dispersion.csv")
        assert {float(r["m"]) for r in rows} == {0.7}  # flag beats file

    def test_unknown_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "run.conf"
        config.write_text("masss = 0.3\n")
        assert main(["dispersion", "--config", str(config), "--out", str(tmp_path / "o")]) == 1
        assert "unknown configuration key" in capsys.readouterr().err

    def test_malformed_line(self, tmp_path):
        config = tmp_path / "run.conf"
        config.write_text("just some words\n")
        assert main(["dispersion", "--config", str(config), "--out", str(tmp_path / "o")]) == 1


class TestVerifyCommand:
    def test_passes_and_reproduces(self, tmp_path):
        out1, out2 = tmp_path / "v1", tmp_path / "v2"
        args = ["verify", "--seed", "11", "--scale", "0.05"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        r1 = (out1 / "verify_report.txt").read_bytes()
        assert r1 == (out2 / "verify_report.txt").read_bytes()
        assert b"pass" in r1

    def test_tight_tolerance_fails(self, tmp_path, capsys):
        from diracqca import verification

        results = verification.run_property_suite(3, scale=0.05, tolerances={"group_law": 1e-30})
        failed = [r for r in results if not r.passed]
        assert [r.name for r in failed] == ["group_law"]


class TestRelativeLocalityCommand:
    def test_report_and_trajectories(self, tmp_path):
        out = tmp_path / "rl"
        assert main(
            [
                "relative-locality",
                "--out",
                str(out),
                "--cells",
                "4096",
                "--sigma-k",
                "0.015",
                "--t-event",
                "200",
            ]
        ) == 0
        report = dict(
            line.split(" = ")
            for line in (out / "relative_locality_report.txt").read_text().splitlines()
        )
        assert float(report["delta_emp"]) > 0
        assert float(report["delta_pred"]) > 0
        assert report["config.experiment"] == "relative-locality"
        rows = read_csv(out / "trajectories.csv")
        assert {r["frame"] for r in rows} == {"lab", "boosted"}

    def test_equal_pairs_report_zero(self, tmp_path):
        out = tmp_path / "rl0"
        assert main(
            [
                "relative-locality",
                "--out",
                str(out),
                "--cells",
                "2048",
                "--sigma-k",
                "0.015",
                "--k1",
                "0.3",
                "--k2",
                "0.3",
                "--delta1",
                "0.1",
                "--delta2",
                "0.1",
                "--t-event",
                "100",
            ]
        ) == 0
        report = dict(
            line.split(" = ")
            for line in (out / "relative_locality_report.txt").read_text().splitlines()
        )
        assert float(report["delta_pred"]) == pytest.approx(0.0, abs=1e-9)
        assert float(report["delta_emp"]) == pytest.approx(0.0, abs=1e-9)
