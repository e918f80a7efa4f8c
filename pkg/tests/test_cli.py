import math
import os

import numpy as np
import pytest

from diracpd.cli import main


def write_config(path, **keys):
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in keys.items():
            fh.write(f"{key.replace('__', '.')} = {value}\n")
    return str(path)


def read_rows(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            rows.append(line.rstrip("\n").split(","))
    return rows[0], rows[1:]


class TestSolve:
    def test_cosh_massless_strict(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="cosh_square", model__alpha=1.0, model__v0=1.0,
            model__m0=0.0, grid__n=2000, solve__k_states=3,
            compare__tol="1e-5", outputs="spectrum",
            out__dir=str(tmp_path / "out"),
        )
        assert main(["solve", "--config", cfg, "--strict"]) == 0
        out = capsys.readouterr().out
        assert "constant-u" in out
        header, rows = read_rows(tmp_path / "out" / "spectrum.csv")
        assert header == ["n", "lambda", "E_plus", "E_minus", "nodes",
                          "error_estimate"]
        assert len(rows) == 3
        for k, row in enumerate(rows, start=1):
            assert float(row[2]) == pytest.approx(k * math.pi / 2, rel=1e-6)

    def test_missing_v0_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", model__name="cosh_square",
                           model__alpha=1.0, model__m0=0.0)
        assert main(["solve", "--config", cfg]) == 2
        assert "v0" in capsys.readouterr().err

    def test_unknown_mode_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", model__name="cosh_square",
                           model__alpha=1.0, model__v0=1.0, model__m0=0.0,
                           mode="magic")
        assert main(["solve", "--config", cfg]) == 2

    def test_tiny_grid_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", model__name="cosh_square",
                           model__alpha=1.0, model__v0=1.0, model__m0=0.0,
                           grid__n=32)
        assert main(["solve", "--config", cfg]) == 2
        assert "grid.n" in capsys.readouterr().err

    def test_massless_approximate_exit_3(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", model__name="cosh_square",
                           model__alpha=1.0, model__v0=1.0, model__m0=0.0,
                           mode="approximate", out__dir=str(tmp_path / "out"))
        assert main(["solve", "--config", cfg]) == 3

    def test_potential_csv_columns(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="cosh_square", model__alpha=1.0, model__v0=1.0,
            model__m0=1.0, grid__n=200, solve__k_states=1,
            outputs="potential", out__dir=str(tmp_path / "out"),
        )
        assert main(["solve", "--config", cfg]) == 0
        header, rows = read_rows(tmp_path / "out" / "potential.csv")
        assert header == ["q", "V"]
        assert all(float(r[1]) == 1.0 for r in rows)  # constant-u: V = A^2

    def test_constant_rest(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="constant_rest", model__m0=1.0, model__c=1.0,
            compare__tol="1e-10", outputs="spectrum",
            out__dir=str(tmp_path / "out"),
        )
        assert main(["solve", "--config", cfg, "--strict"]) == 0
        _, rows = read_rows(tmp_path / "out" / "spectrum.csv")
        assert float(rows[0][2]) == 1.0
        assert float(rows[0][3]) == -1.0

    def test_linear_singular_no_bound_states_exit_3(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", model__name="linear_singular",
                           model__A=1.0, model__v0=1.0, grid__n=400,
                           solve__k_states=1, out__dir=str(tmp_path / "out"))
        assert main(["solve", "--config", cfg]) == 3
        assert "confine" in capsys.readouterr().err

    def test_poschl_teller_as_published_strict_exit_4(self, tmp_path, capsys):
        common = dict(
            model__name="poschl_teller", model__alpha=1.3, model__v0=0.8,
            model__m0=1.1, grid__n=4000, solve__k_states=3,
            compare__tol="1e-4", outputs="spectrum",
        )
        cfg_ok = write_config(tmp_path / "ok.txt", **common,
                              out__dir=str(tmp_path / "out1"))
        assert main(["solve", "--config", cfg_ok, "--strict"]) == 0
        cfg_ap = write_config(tmp_path / "ap.txt", **common,
                              analytic__variant="as-published",
                              out__dir=str(tmp_path / "out2"))
        assert main(["solve", "--config", cfg_ap, "--strict"]) == 4

    def test_determinism_byte_identical(self, tmp_path):
        paths = []
        for tag in ("a", "b"):
            cfg = write_config(
                tmp_path / f"{tag}.txt",
                model__name="rational", model__alpha=1.0, model__v0=1.0,
                model__m0=1.0, grid__n=500, solve__k_states=2,
                outputs="spectrum, potential, wavefunctions",
                out__dir=str(tmp_path / f"out_{tag}"),
            )
            assert main(["solve", "--config", cfg]) == 0
            paths.append(tmp_path / f"out_{tag}")
        for name in ("spectrum.csv", "potential.csv", "wavefunction_0.csv",
                     "wavefunction_1.csv"):
            a = (paths[0] / name).read_bytes()
            b = (paths[1] / name).read_bytes()
            assert a == b, name

    def test_wavefunction_columns(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="cosh_square", model__alpha=1.0, model__v0=1.0,
            model__m0=1.0, grid__n=300, solve__k_states=1,
            outputs="wavefunctions", out__dir=str(tmp_path / "out"),
        )
        assert main(["solve", "--config", cfg]) == 0
        header, rows = read_rows(tmp_path / "out" / "wavefunction_0.csv")
        assert header == ["x", "q", "re_psi1", "im_psi1", "re_psi2",
                          "im_psi2", "rho", "j"]
        js = np.array([float(r[7]) for r in rows])
        assert np.max(np.abs(js)) <= 1e-12


class TestScan:
    def test_single_step_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", model__name="cosh_square",
                           model__alpha=1.0, model__v0=1.0, model__m0=0.0,
                           scan__param="m0", scan__min=0.0, scan__max=1.0,
                           scan__steps=1, out__dir=str(tmp_path / "out"))
        assert main(["scan", "--config", cfg]) == 2
        assert "steps" in capsys.readouterr().err

    def test_mass_shift_column(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="cosh_square", model__alpha=1.0, model__v0=1.0,
            model__m0=0.0, grid__n=1500, solve__k_states=1,
            scan__param="m0", scan__min=0.0, scan__max=2.0, scan__steps=9,
            out__dir=str(tmp_path / "out"),
        )
        assert main(["scan", "--config", cfg]) == 0
        header, rows = read_rows(tmp_path / "out" / "scan.csv")
        assert header == ["param", "n", "E_numeric", "E_analytic", "status"]
        assert len(rows) == 9
        for row in rows:
            m0 = float(row[0])
            e_num = float(row[2])
            assert e_num ** 2 - (math.pi / 2) ** 2 == pytest.approx(
                m0 ** 2, abs=1e-6)
            assert row[4] == "ok"

    def test_alpha_scan_linear_slope(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="cosh_square", model__alpha=1.0, model__v0=1.0,
            model__m0=0.0, grid__n=1500, solve__k_states=1,
            scan__param="alpha", scan__min=0.5, scan__max=2.0, scan__steps=7,
            out__dir=str(tmp_path / "out"),
        )
        assert main(["scan", "--config", cfg]) == 0
        _, rows = read_rows(tmp_path / "out" / "scan.csv")
        alphas = np.array([float(r[0]) for r in rows])
        es = np.array([float(r[2]) for r in rows])
        slope, intercept = np.polyfit(alphas, es, 1)
        assert slope == pytest.approx(math.pi / 2, rel=1e-6)
        assert intercept == pytest.approx(0.0, abs=1e-6)

    def test_resume_appends_missing_rows(self, tmp_path):
        kwargs = dict(
            model__name="cosh_square", model__alpha=1.0, model__v0=1.0,
            model__m0=0.0, grid__n=800, solve__k_states=1,
            scan__param="m0", scan__min=0.0, scan__max=1.0, scan__steps=5,
            out__dir=str(tmp_path / "out"),
        )
        cfg = write_config(tmp_path / "c.txt", **kwargs)
        assert main(["scan", "--config", cfg]) == 0
        full = (tmp_path / "out" / "scan.csv").read_text()
        lines = full.splitlines(keepends=True)
        # drop the last two data rows, as if interrupted
        (tmp_path / "out" / "scan.csv").write_text("".join(lines[:-2]))
        assert main(["scan", "--config", cfg]) == 0
        assert (tmp_path / "out" / "scan.csv").read_text() == full

    def test_axis_flag_override(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="cosh_square", model__alpha=1.0, model__v0=1.0,
            model__m0=0.0, grid__n=800, solve__k_states=1,
            out__dir=str(tmp_path / "out"),
        )
        assert main(["scan", "--config", cfg, "--axis", "m0=0:1:3"]) == 0
        _, rows = read_rows(tmp_path / "out" / "scan.csv")
        assert len(rows) == 3

    def test_unknown_axis_param(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", model__name="cosh_square",
                           model__alpha=1.0, model__v0=1.0, model__m0=0.0,
                           out__dir=str(tmp_path / "out"))
        assert main(["scan", "--config", cfg, "--axis", "zeta=0:1:3"]) == 2


class TestBic:
    def test_writes_states(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="cosh_square", model__alpha=1.0, model__v0=1.0,
            model__m0=1.0, bic__energies="1.5, 2.5",
            out__dir=str(tmp_path / "out"),
        )
        assert main(["bic", "--config", cfg]) == 0
        for i in (0, 1):
            header, rows = read_rows(tmp_path / "out" / f"bic_{i}.csv")
            js = np.array([float(r[7]) for r in rows])
            assert np.max(np.abs(js)) <= 1e-12

    def test_requires_energies(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.txt", model__name="cosh_square",
                           model__alpha=1.0, model__v0=1.0, model__m0=1.0)
        assert main(["bic", "--config", cfg]) == 2


class TestReport:
    def test_poschl_teller_report(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="poschl_teller", model__alpha=1.0, model__v0=1.0,
            model__m0=1.0, grid__n=3000, solve__k_states=5,
            outputs="discrepancy", out__dir=str(tmp_path / "out"),
        )
        assert main(["report", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "interleaved" in out
        assert os.path.exists(tmp_path / "out" / "discrepancy.csv")

    def test_linear_singular_report(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path / "c.txt",
            model__name="linear_singular", model__A=1.0, model__v0=1.0,
            grid__n=800, solve__k_states=3, outputs="discrepancy",
            out__dir=str(tmp_path / "out"),
        )
        assert main(["report", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "as-published" in out or "as_published" in out
        assert "exponential" in out
