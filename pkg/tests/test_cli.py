import numpy as np
import pytest

from fluxdiode.cli import run
from fluxdiode.transmission import read_map_csv

FITTED_OVERRIDES = [
    "--fr-ghz", "6.784", "--kappa-h-mhz", "1.1",
    "--kappa-h1-mhz", "0.16", "--kappa-h2-mhz", "0.43",
    "--pstar1-dbm", "-112", "--pstar2-dbm", "-117",
]


def kv_from_stdout(capsys):
    out = {}
    for line in capsys.readouterr().out.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def test_modes_report(ref_path, capsys):
    assert run(["modes", "--params", str(ref_path)]) == 0
    kv = kv_from_stdout(capsys)
    assert float(kv["f_high_hz"]) == pytest.approx(6.762e9, abs=1e6)
    assert float(kv["f_low_hz"]) == pytest.approx(6.026e9, abs=1e6)
    assert float(kv["mixing_angle_rad"]) == pytest.approx(0.51, abs=0.01)
    assert float(kv["pstar_ratio"]) == pytest.approx(3.2, abs=0.1)


def test_modes_csv(ref_path, tmp_path):
    out = tmp_path / "modes.csv"
    assert run(["modes", "--params", str(ref_path), "--csv", str(out)]) == 0
    assert "f_high_hz" in out.read_text()


def test_spectrum_command(ref_path, tmp_path):
    out = tmp_path / "spec.csv"
    code = run(["spectrum", "--params", str(ref_path), *FITTED_OVERRIDES,
                "--freq", "6.775:6.795:101", "--power-dbm", "-114",
                "-o", str(out)])
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "frequency_hz,s31,s42"
    assert len(rows) == 102


def test_map_command_tracks_peak_loci(ref_path, tmp_path, fitted_model):
    from fluxdiode.params import PowerLevel
    from fluxdiode.transmission import peak_frequencies

    out = tmp_path / "map.csv"
    code = run(["map", "--params", str(ref_path), *FITTED_OVERRIDES,
                "--freq", "6.7795:6.7885:181", "--power-dbm=-120:-100:21",
                "--direction", "42", "-o", str(out)])
    assert code == 0
    smap, quantity = read_map_csv(out)
    assert quantity == "s42"
    # split rows in the moderate-drive window track the closed-form loci
    for j, p_dbm in enumerate(smap.axis2):
        power = PowerLevel.from_dbm(float(p_dbm))
        ratio = power.watts / fitted_model.pstar2.watts
        if not 2.0 <= ratio <= 10.0:
            continue
        lo, hi = peak_frequencies(fitted_model, power, "42")
        row = smap.values42[:, j]
        maxima = np.where((row[1:-1] > row[:-2]) & (row[1:-1] >= row[2:]))[0] + 1
        assert len(maxima) >= 2
        found = smap.axis1[maxima]
        tol = fitted_model.kappa_h / 2.0
        assert np.min(np.abs(found - lo)) < tol
        assert np.min(np.abs(found - hi)) < tol


def test_rmap_threshold_flag(ref_path, tmp_path):
    masked = tmp_path / "rmasked.csv"
    full = tmp_path / "rfull.csv"
    base = ["rmap", "--params", str(ref_path), *FITTED_OVERRIDES,
            "--freq", "6.75:6.82:141", "--power-dbm", "-99"]
    assert run([*base, "-o", str(masked)]) == 0
    assert run([*base, "--threshold", "0", "-o", str(full)]) == 0
    masked_map, _ = read_map_csv(masked)
    full_map, _ = read_map_csv(full)
    assert np.isnan(masked_map.ratio).any()
    assert not np.isnan(full_map.ratio).any()


def test_qubit_command(ref_path, tmp_path):
    out = tmp_path / "qubit.csv"
    code = run(["qubit", "--params", str(ref_path), "--flux", "0.45:0.55:5",
                "--basis", "6", "-o", str(out)])
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "flux,f01_hz,f12_hz,converged"
    values = np.array([r.split(",")[:2] for r in rows[1:]], dtype=float)
    assert values[:, 1].argmin() == 2   # minimum at half flux


def test_calibrate_pipeline(tmp_path):
    stack = tmp_path / "stack41.csv"
    lines = ["# route = O4I1", "frequency_hz,s_db,flux"]
    rng = np.random.default_rng(0)
    grid = np.linspace(6.0e9, 7.0e9, 21)
    for flux in (0.1, 0.2, 0.3):
        for f in grid:
            lines.append(f"{float(f)!r},{float(-70.0 + 0.001 * rng.standard_normal())!r},{flux}")
    stack.write_text("\n".join(lines) + "\n")

    stack2 = tmp_path / "stack32.csv"
    stack2.write_text(stack.read_text().replace("O4I1", "O3I2"))

    bg_path = tmp_path / "bg.csv"
    assert run(["calibrate", "--extract", str(stack), str(stack2),
                "--out-bg", str(bg_path)]) == 0

    raw = tmp_path / "raw.csv"
    raw_lines = ["# route = O3I1", "frequency_hz,s_db"]
    for f in grid:
        raw_lines.append(f"{float(f)!r},{-80.0!r}")
    raw.write_text("\n".join(raw_lines) + "\n")

    out = tmp_path / "cal.csv"
    assert run(["calibrate", "--raw", str(raw), "--bg", str(bg_path),
                "-o", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[1] == "frequency_hz,s_db,s_linear"
    s_db = float(rows[2].split(",")[1])
    assert s_db == pytest.approx(-10.0, abs=0.01)


def test_synth_then_fit_linear(ref_path, tmp_path, capsys):
    data = tmp_path / "lin.csv"
    code = run(["synth", "--kind", "linear", "--params", str(ref_path),
                *FITTED_OVERRIDES, "--kappa-h-mhz", "0.787",
                "--freq", "6.756:6.768:401", "--sigma", "0.005",
                "--seed", "42", "-o", str(data)])
    assert code == 0
    code = run(["fit", "--kind", "linear", "--data", str(data),
                "--params", str(ref_path)])
    assert code == 0
    kv = kv_from_stdout(capsys)
    assert float(kv["kappa_h1"]) == pytest.approx(160e3, rel=0.05)
    assert float(kv["kappa_h2"]) == pytest.approx(430e3, rel=0.05)
    assert kv["converged"] == "True"


def test_synth_then_fit_crossing(tmp_path, capsys):
    data = tmp_path / "cross.csv"
    assert run(["synth", "--kind", "crossing", "--f-mode-ghz", "6.762",
                "--g-mhz", "175", "--f01-ghz", "6.3:7.25:15",
                "--jitter-mhz", "1", "--seed", "4",
                "-o", str(data)]) == 0
    assert run(["fit", "--kind", "crossing", "--data", str(data)]) == 0
    kv = kv_from_stdout(capsys)
    assert float(kv["g"]) == pytest.approx(175e6, rel=0.03)


def test_byte_identical_reruns(ref_path, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ["synth", "--kind", "duffing-map", "--params", str(ref_path),
            *FITTED_OVERRIDES, "--freq", "6.780:6.788:41",
            "--power-dbm=-118:-106:7", "--direction", "31",
            "--sigma", "1e-4", "--seed", "99"]
    assert run([*args, "-o", str(a)]) == 0
    assert run([*args, "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_exit_codes(ref_path, tmp_path, capsys):
    assert run(["unknown-subcommand"]) == 2
    assert run(["modes"]) == 2                       # missing required flag
    assert run(["modes", "--params", str(tmp_path / "missing.params")]) == 3
    bad = tmp_path / "bad.params"
    bad.write_text("f1 = 6.6e9\nf2 = 6.2e9\ng12 = 3e8\nz0 = 50\nck1 = 7e-15\nck2 = 7e-15\n")
    assert run(["modes", "--params", str(bad)]) == 3
    code = run(["spectrum", "--params", str(ref_path), "--freq", "7:6:11",
                "--power-dbm", "-110", "-o", str(tmp_path / "x.csv")])
    assert code == 3                                  # inverted grid
    capsys.readouterr()


def test_no_partial_output_on_error(ref_path, tmp_path, capsys):
    out = tmp_path / "never.csv"
    bad = tmp_path / "bad.params"
    bad.write_text("f1 = abc\n")
    code = run(["map", "--params", str(bad), "--freq", "6.7:6.9:11",
                "--power-dbm", "-110", "-o", str(out)])
    assert code == 3
    assert not out.exists()
    assert not out.with_name(out.name + ".tmp").exists()
    capsys.readouterr()
