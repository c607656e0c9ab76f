import json

import numpy as np
import pytest

from boussinesq_rh.cli import main
from boussinesq_rh.scattering import SpectralData

GAUSS = {
    "u0": {"family": "gaussian", "amplitude": 0.3, "width": 1.0},
    "u1": {"family": "gaussian", "amplitude": 0.2, "width": 1.0},
    "grid": {"x_min": -30, "x_max": 30, "n": 4096},
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg, indent=2))
    return str(p)


def test_scatter_zero_data(tmp_path):
    cfg = write(tmp_path, {"initial_data": {"grid": {"x_min": -10, "x_max": 10, "n": 256}}, "arc_points": 32})
    out = tmp_path / "s.csv"
    assert main(["scatter", "--config", cfg, "--out", str(out)]) == 0
    spec = SpectralData.from_csv(out)
    assert not np.any(spec.r1) and not np.any(spec.r2)


def test_scatter_gaussian_reload(tmp_path):
    cfg = write(tmp_path, {"initial_data": GAUSS, "arc_points": 32})
    out = tmp_path / "s.csv"
    assert main(["scatter", "--config", cfg, "--out", str(out)]) == 0
    inv = SpectralData.from_csv(out).invariant_residuals()
    assert inv["conjugation"] < 1e-6 and inv["max_imag_r1r2"] < 1e-6 and inv["min_one_plus_r1r2"] >= 1 - 1e-12


def test_malformed_json_leaves_no_output(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "arc_points": 64,\n  "tau_grid": [0.1,\n}\n')
    out = tmp_path / "s.csv"
    assert main(["scatter", "--config", str(p), "--out", str(out)]) == 2
    assert not out.exists()
    assert "bad.json:4:" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == [p]


def test_schema_error_names_line(tmp_path, capsys):
    cfg = write(tmp_path, {"initial_data": GAUSS, "arc_points": 8})
    assert main(["scatter", "--config", cfg]) == 2
    err = capsys.readouterr().err
    line = next(i for i, l in enumerate(open(cfg), 1) if '"arc_points"' in l)
    assert f"cfg.json:{line}:" in err and "arc_points" in err


def test_x_grid_minimum(tmp_path):
    cfg = write(tmp_path, {"synthetic": {}, "tau_grid": [0.1], "x_grid": [1.0, 10.0]})
    assert main(["asymptote", "--config", cfg, "--out", str(tmp_path / "a.csv")]) == 2


ASYM = {"synthetic": {"amplitude": 2.0}, "arc_points": 128, "tau_grid": [0.0, 0.1, 0.2, 0.4],
        "x_grid": {"start": 10, "stop": 1000, "num": 4, "spacing": "log"}}


def read_rows(path):
    lines = open(path).read().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, l.split(","))) for l in lines[1:]]


def test_asymptote_rows(tmp_path, capsys):
    cfg = write(tmp_path, ASYM)
    out = tmp_path / "a.csv"
    assert main(["asymptote", "--config", cfg, "--out", str(out)]) == 0
    assert "tau = 0.4" in capsys.readouterr().err
    rows = read_rows(out)
    assert len(rows) == 12  # tau = 0.4 skipped
    zero = [r for r in rows if float(r["tau"]) == 0]
    assert len(zero) == 4 and all(float(r["u_leading"]) == 0 for r in zero)
    assert all(r["warning"] == "" for r in rows)


def test_asymptote_deterministic(tmp_path):
    cfg = write(tmp_path, ASYM)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["asymptote", "--config", cfg, "--out", str(a)])
    main(["asymptote", "--config", cfg, "--out", str(b), "--threads", "3"])
    assert a.read_bytes() == b.read_bytes()


def test_route_mismatch_warning(tmp_path):
    cfg = write(tmp_path, dict(ASYM, tolerances={"route_mismatch": 0.0}))
    out = tmp_path / "a.csv"
    assert main(["asymptote", "--config", cfg, "--out", str(out)]) == 0
    rows = [r for r in read_rows(out) if float(r["tau"]) > 0]
    assert any(r["warning"] for r in rows)


def test_asymptote_from_spectral_csv(tmp_path):
    spec_cfg = write(tmp_path, {"synthetic": {}, "arc_points": 128}, "s.json")
    main(["scatter", "--config", spec_cfg, "--out", str(tmp_path / "spec.csv")])
    cfg = write(tmp_path, {"spectral_input": "spec.csv", "tau_grid": [0.2], "x_grid": [100.0]})
    out = tmp_path / "a.csv"
    assert main(["asymptote", "--config", cfg, "--out", str(out)]) == 0
    assert len(read_rows(out)) == 1


def test_verify_unknown_suite():
    with pytest.raises(SystemExit) as info:
        main(["verify", "--suite", "nope"])
    assert info.value.code == 2


def test_verify_pde_suite(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "pde", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and {c["name"] for c in rep["suites"]["pde"]} >= {"time_reversal", "t0_reproduction"}


def test_verify_deform_factorizations(tmp_path):
    out = tmp_path / "r.json"
    code = main(["verify", "--suite", "deform", "--out", str(out)])
    rep = json.loads(out.read_text())
    fac = [c for c in rep["suites"]["deform"] if c["name"].startswith("factorization ")]
    assert len(fac) == 10 and all(c["value"] < 1e-10 for c in fac)
    assert code == (0 if rep["passed"] else 1)


def test_oracle_snapshots(tmp_path):
    cfg = write(tmp_path, {"initial_data": GAUSS, "oracle": {"t_end": 0.2, "dt": 0.01, "snapshot_times": [0, 0.2],
                                                             "length": 240, "n": 512}})
    out = tmp_path / "o.csv"
    assert main(["oracle", "--config", cfg, "--out", str(out)]) == 0
    arr = np.loadtxt(out, delimiter=",", skiprows=1)
    assert arr.shape == (1024, 4) and set(arr[:, 0]) == {0.0, 0.2}


def test_oracle_blowup(tmp_path, capsys):
    data = {"u0": {"amplitude": 2e3, "width": 5.0}, "grid": {"x_min": -60, "x_max": 60, "n": 2048}}
    cfg = write(tmp_path, {"initial_data": data, "oracle": {"t_end": 1.0}})
    out = tmp_path / "o.csv"
    assert main(["oracle", "--config", cfg, "--out", str(out)]) == 1
    assert not out.exists() and (tmp_path / "o.csv.spectrum.csv").exists()
    assert "blowup" in capsys.readouterr().err


def test_oracle_bad_cutoff(tmp_path):
    cfg = write(tmp_path, {"initial_data": GAUSS, "oracle": {"xi_max": 0.95}})
    assert main(["oracle", "--config", cfg]) == 2
