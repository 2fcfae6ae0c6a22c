import csv
import math
import re

import numpy as np
import pytest
import yaml

from hermite_hj import cli


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


FLOAT_RE = re.compile(r"^-?\d\.\d{16}e[+-]\d{2}$")


class TestRun:
    def test_writes_artifacts(self, tmp_path):
        out = tmp_path / "r"
        assert cli.main(["run", "--example", "burgers1d", "--m", "2", "--n", "20",
                         "--out", str(out)]) == 0
        header, rows = read_csv(out / "solution.csv")
        assert header == ["x", "u", "u_exact"] and len(rows) == 20
        assert all(FLOAT_RE.match(v) for v in rows[3])
        x, u, ue = np.array(rows, dtype=float).T
        assert np.max(np.abs(u - ue)) < 1e-4
        dh, drows = read_csv(out / "diagnostics.csv")
        assert dh == ["t", "lam", "max_kappa", "n_active"]
        assert float(drows[-1][0]) == pytest.approx(0.5, rel=1e-15)
        sh, srows = read_csv(out / "summary.csv")
        summary = dict(zip(sh, srows[0]))
        assert float(summary["Linf"]) == pytest.approx(np.max(np.abs(u - ue)),
                                                       rel=1e-12)
        cfg = yaml.safe_load((out / "config.yaml").read_text())
        assert cfg["example"] == "burgers1d" and cfg["tfinal"] == 0.5
        assert cfg["cfl"] == 0.25 and cfg["n"] == 20 and "version" in cfg

    def test_rerun_is_bitwise_identical(self, tmp_path):
        texts = []
        for k, threads in enumerate(("1", "2")):
            out = tmp_path / str(k)
            assert cli.main(["run", "--example", "eikonal1d", "--m", "2", "--n",
                             "20", "--threads", threads, "--out", str(out)]) == 0
            texts.append((out / "solution.csv").read_text())
        assert texts[0] == texts[1]

    def test_sensor_off_before_kink(self, tmp_path):
        texts = []
        for flag in ("on", "off"):
            out = tmp_path / flag
            assert cli.main(["run", "--example", "burgers1d", "--m", "2", "--n",
                             "40", "--sensor", flag, "--out", str(out)]) == 0
            texts.append((out / "solution.csv").read_text())
        assert texts[0] == texts[1]

    def test_2d_solution_layout(self, tmp_path):
        out = tmp_path / "b"
        assert cli.main(["run", "--example", "burgers2d", "--n", "10", "--out",
                         str(out)]) == 0
        header, rows = read_csv(out / "solution.csv")
        assert header == ["x", "y", "u", "u_exact"] and len(rows) == 100
        blocks = (out / "solution.dat").read_text().split("\n\n")
        assert len([b for b in blocks if b.strip()]) == 10
        dat = np.loadtxt(out / "solution.dat")
        assert np.array_equal(dat, np.array(rows, dtype=float))

    def test_eikonal_kink_and_rarefaction(self, tmp_path):
        out = tmp_path / "e"
        assert cli.main(["run", "--example", "eikonal1d", "--m", "3", "--n", "80",
                         "--out", str(out)]) == 0
        _, rows = read_csv(out / "solution.csv")
        x, u, _ = np.array(rows, dtype=float).T
        slope = np.diff(u) / np.diff(x)
        mid = 0.5 * (x[1:] + x[:-1])
        # slope changes sign from + to - across pi/2 (kink)
        assert np.all(slope[np.abs(mid - 1.2) < 0.1] > 0.2)
        assert np.all(slope[np.abs(mid - 1.9) < 0.1] < -0.2)
        # flat fan around 3pi/2 with nonzero slopes on both sides
        assert np.all(np.abs(slope[np.abs(mid - 1.5 * np.pi) < 0.5]) < 1e-2)
        assert np.all(slope[np.abs(mid - 3.3) < 0.1] < -0.1)
        assert np.all(slope[np.abs(mid - 6.1) < 0.1] > 0.1)

    def test_yaml_config_with_flag_override(self, tmp_path):
        conf = tmp_path / "c.yaml"
        conf.write_text(yaml.safe_dump({"example": "burgers1d", "m": 2, "n": 30,
                                        "tfinal": 0.2}))
        out = tmp_path / "y"
        assert cli.main(["run", "--config", str(conf), "--n", "20", "--out",
                         str(out)]) == 0
        cfg = yaml.safe_load((out / "config.yaml").read_text())
        assert cfg["n"] == 20 and cfg["tfinal"] == 0.2

    def test_unknown_key(self, tmp_path, capsys):
        conf = tmp_path / "c.yaml"
        conf.write_text("example: burgers1d\ncolour: blue\n")
        assert cli.main(["run", "--config", str(conf), "--out",
                         str(tmp_path / "o")]) == 2
        assert "colour" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["run", "--example", "nope"],
        ["run", "--example", "burgers1d", "--m", "-1"],
        ["run", "--example", "burgers1d", "--sensor", "maybe"],
        ["run", "--example", "burgers1d", "--boundary", "dirichlet"],
        ["run"],
    ])
    def test_config_errors(self, argv, tmp_path):
        with pytest.raises(SystemExit) as info:
            code = cli.main(argv + ["--out", str(tmp_path / "o")])
            raise SystemExit(code)
        assert info.value.code == 2

    @pytest.mark.parametrize("argv", [
        ["--example", "riemann-quartic", "--m", "3", "--n", "41", "--cfl", "0.5"],
        ["--example", "burgers1d", "--m", "2", "--n", "20", "--tfinal", "1.5",
         "--cfl", "2.0"],
    ])
    def test_blow_up_exit_code(self, argv, tmp_path, capsys):
        assert cli.main(["run"] + argv + ["--out", str(tmp_path / "o")]) == 3
        assert "blow-up" in capsys.readouterr().err


class TestConvergence:
    def test_small_ladder(self, tmp_path, capsys):
        out = tmp_path / "c"
        assert cli.main(["convergence", "--example", "burgers1d", "--m", "2",
                         "--ladder", "20,40", "--out", str(out)]) == 0
        header, rows = read_csv(out / "convergence.csv")
        assert header == cli.RATE_HEADER
        vals = np.array([[float(v) if v else np.nan for v in r] for r in rows])
        assert list(vals[:, 0]) == [20, 40]
        assert math.isnan(vals[0, 2])
        for col in (1, 3, 5):
            assert vals[1, col + 1] == pytest.approx(
                math.log2(vals[0, col] / vals[1, col]), rel=1e-12)
        assert vals[1, 4] > 4.0
        assert "rate" in capsys.readouterr().out

    def test_needs_oracle(self, tmp_path):
        assert cli.main(["convergence", "--example", "riemann-sin2d", "--out",
                         str(tmp_path / "o")]) == 2

    def test_rejects_time_outside_window(self, tmp_path):
        assert cli.main(["convergence", "--example", "noncvx-cos", "--tfinal",
                         "1.0", "--out", str(tmp_path / "o")]) == 2

    def test_rates_helper(self):
        errs = [(1.0, 2.0, 4.0), (0.25, 1.0, 4.0)]
        assert cli.rates(errs) == [None, (2.0, 1.0, 0.0)]
        assert math.isnan(cli.rates([(1.0,) * 3, (0.0,) * 3])[1][0])


class TestProbes:
    def test_sensor_probe_constant(self, tmp_path):
        out = tmp_path / "s"
        assert cli.main(["sensor-probe", "--probe", "constant", "--n", "10",
                         "--out", str(out)]) == 0
        header, rows = read_csv(out / "sensor_probe.csv")
        assert header == ["x", "y", "s", "nu", "kappa", "crossing"]
        assert len(rows) == 100
        assert all(float(r[3]) == 0.0 for r in rows)

    def test_sensor_probe_radial(self, tmp_path):
        out = tmp_path / "s"
        assert cli.main(["sensor-probe", "--probe", "radial-step", "--n", "20",
                         "--out", str(out)]) == 0
        _, rows = read_csv(out / "sensor_probe.csv")
        v = np.array(rows, dtype=float)
        assert np.any(v[:, 3] > 0)

    def test_taylor_probe_linear(self, tmp_path):
        out = tmp_path / "t"
        assert cli.main(["taylor-probe", "--probe", "linear", "--m", "2",
                         "--ladder", "20,40", "--out", str(out)]) == 0
        _, rows = read_csv(out / "taylor_probe.csv")
        errs = np.array([[float(r[1]), float(r[3]), float(r[5])] for r in rows])
        assert np.all(errs < 1e-13)

    def test_taylor_probe_abs(self, tmp_path):
        out = tmp_path / "t"
        assert cli.main(["taylor-probe", "--probe", "abs", "--m", "2",
                         "--ladder", "20,40,80", "--out", str(out)]) == 0
        _, rows = read_csv(out / "taylor_probe.csv")
        r = [float(v) for v in rows[-1][2::2]]
        assert r == pytest.approx([2.0, 1.5, 1.0], abs=0.1)

    def test_unknown_probe(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            cli.main(["taylor-probe", "--probe", "nope"])
        assert info.value.code == 2
