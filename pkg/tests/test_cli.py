import subprocess
import sys

import numpy as np
import pytest

from brusselator.cli import main, read_meta
from brusselator.integrator import integrate
from brusselator.ftle import ftle
from brusselator.model import Params
from brusselator.noise import generate


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    assert main([*argv, "--out", str(out)]) == 0
    return out


def load(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_simulate_matches_library(tmp_path):
    out = run(tmp_path, "simulate", "--b", "3", "--t-end", "2")
    data = load(out)
    ref = integrate(Params(1, 3, 0.1), (1, 1), generate(0, 1e-3, 2000), 2.0)
    assert np.array_equal(data[:, 1], ref.x) and np.array_equal(data[:, 2], ref.y)
    meta = read_meta(str(out) + ".meta")
    assert meta["seed"] == "0" and meta["command"] == "simulate" and "version" in meta


def test_runs_are_deterministic(tmp_path):
    a = run(tmp_path, "simulate", "--b", "4", "--t-end", "1", "--seed", "7", name="a.csv")
    b = run(tmp_path, "simulate", "--b", "4", "--t-end", "1", "--seed", "7", name="b.csv")
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["simulate", "--b", "2.5", "--t-end", "1", "--sigma", "0.3", "--seed", "4"],
    ["two-point", "--preset", "above", "--x0", "1", "--y0", "1", "--x1", "2", "--y1", "1", "--t-end", "1"],
    ["ftle-field", "--b", "4", "--T", "0.5", "--nx", "3", "--ny", "2"],
    ["ftle-series", "--b", "3", "--T-max", "1", "--dT", "0.25"],
    ["slowfast", "--epsilon", "0.25", "--t-end", "1", "--geometry"],
    ["ssa", "--b", "2", "--V", "50", "--t-end", "2", "--grid", "0.5"],
])
def test_replay_is_bitwise(tmp_path, argv):
    out = run(tmp_path, *argv)
    again = tmp_path / "again.csv"
    assert main(["replay", str(out) + ".meta", "--out", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()


def test_default_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("BRUSSELATOR_OUT_DIR", str(tmp_path / "runs"))
    assert main(["period", "--b", "4", "--duration", "50"]) == 0
    text = (tmp_path / "runs" / "period.csv").read_text()
    assert text.startswith("omega=") and "T_half=" in text
    assert (tmp_path / "runs" / "period.csv.meta").exists()


def test_two_point_equal_starts(tmp_path):
    data = load(run(tmp_path, "two-point", "--b", "3", "--x0", "1", "--y0", "2",
                    "--x1", "1", "--y1", "2", "--t-end", "1"))
    assert np.all(data[:, 5] == 0)


def test_two_point_preset_resolves_b(tmp_path):
    out = run(tmp_path, "two-point", "--preset", "below", "--a", "1.5", "--x0", "1", "--y0", "1",
              "--x1", "1", "--y1", "1.5", "--t-end", "0.5")
    assert float(read_meta(str(out) + ".meta")["b_resolved"]) == 2.25


def test_zero_noise_is_deterministic_across_seeds(tmp_path):
    a = load(run(tmp_path, "simulate", "--b", "3", "--sigma", "0", "--t-end", "1", "--seed", "1", name="a.csv"))
    b = load(run(tmp_path, "simulate", "--b", "3", "--sigma", "0", "--t-end", "1", "--seed", "2", name="b.csv"))
    assert np.array_equal(a, b)


def test_single_cell_field_equals_pointwise(tmp_path):
    data = load(run(tmp_path, "ftle-field", "--b", "4", "--T", "1", "--nx", "1", "--ny", "1",
                    "--x-min", "0.5", "--x-max", "1.5", "--y-min", "1", "--y-max", "3", "--seed", "3"))
    assert data.shape == (1, 3)
    assert data[0, 2] == ftle(Params(1, 4, 0.1), (1.0, 2.0), generate(3, 1e-3, 1000), 1.0)


def test_field_threads_do_not_change_output(tmp_path):
    common = ["ftle-field", "--b", "4", "--T", "0.5", "--nx", "6", "--ny", "5"]
    one = run(tmp_path, *common, "--threads", "1", name="one.csv")
    many = run(tmp_path, *common, "--threads", "4", name="many.csv")
    assert one.read_bytes() == many.read_bytes()


def test_slowfast_outputs(tmp_path):
    out = run(tmp_path, "slowfast", "--b", "4", "--t-end", "1", "--geometry")
    header = out.read_text().splitlines()[0]
    assert header == "t,u,v,regime"
    labels = {line.rsplit(",", 1)[1] for line in out.read_text().splitlines()[1:]}
    assert labels <= {"I", "II", "III", "IV"}
    assert (tmp_path / "out.nullcline.csv").exists() and (tmp_path / "out.critical.csv").exists()
    assert float(read_meta(str(out) + ".meta")["epsilon_resolved"]) == 0.25


def test_ssa_outputs(tmp_path):
    out = run(tmp_path, "ssa", "--b", "2", "--V", "40", "--t-end", "1")
    data = load(out)
    assert np.all(np.diff(data[:, 0]) > 0)
    assert set(data[1:, 1].astype(int)) <= {1, 2, 3, 4}
    meta = read_meta(str(out) + ".meta")
    assert meta["A"] == "40" and meta["B"] == "80"


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["slowfast", "--b", "4", "--epsilon", "0.25"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--b", "-1"])
    assert exc.value.code == 2
    assert main(["slowfast", "--b", "4", "--u0", "3", "--v0", "2", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["ssa", "--V", "10", "--out", str(tmp_path / "y.csv")]) == 2


def test_blow_up_exit_code(tmp_path):
    code = main(["simulate", "--b", "3", "--x0", "1e5", "--y0", "1e5", "--t-end", "1",
                 "--out", str(tmp_path / "z.csv")])
    assert code == 3


def test_console_module(tmp_path):
    res = subprocess.run([sys.executable, "-m", "brusselator.cli", "simulate", "--b", "1",
                          "--t-end", "0.1", "--out", str(tmp_path / "s.csv")], capture_output=True)
    assert res.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "brusselator.cli", "simulate", "--bogus"],
                         capture_output=True)
    assert bad.returncode == 2
