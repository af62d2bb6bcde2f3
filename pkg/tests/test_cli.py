import csv
import json

import numpy as np
import pytest

from krr_regimes.cli import main
from krr_regimes.simulator import LearningCurve
from krr_regimes.spectrum import PowerLawParams, power_law_spectrum
from krr_regimes.simulator import sample_dataset


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_theory_command(tmp_path):
    out = tmp_path / "theory.csv"
    code = main(["theory", "--alpha", "2", "--r", "0.5", "--sigma", "0",
                 "--lam", "0", "--p", "100000", "--n", "100,1000",
                 "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["n", "lambda", "sample_variance", "noise_variance",
                       "excess", "region", "exponent"]
    assert len(rows) == 3
    e100, e1000 = float(rows[1][4]), float(rows[2][4])
    slope = np.log(e1000 / e100) / np.log(10.0)
    assert slope == pytest.approx(-2.0, abs=0.05)
    assert (tmp_path / "theory.csv.manifest.json").exists()


def test_theory_noise_column_zero_without_noise(tmp_path):
    out = tmp_path / "t.csv"
    main(["theory", "--alpha", "2", "--r", "0.5", "--lam", "1e-3", "--p", "1000",
          "--n", "50,100,200", "--out", str(out)])
    rows = _read_csv(out)
    assert all(float(r[3]) == 0.0 for r in rows[1:])


def test_theory_ell_matches_fixed_lambda_equivalent(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    main(["theory", "--alpha", "2", "--r", "0.5", "--sigma", "0.1",
          "--ell", "2", "--lambda0", "0.5", "--p", "2000", "--n", "100",
          "--out", str(a)])
    lam = 0.5 * 100.0 ** -2.0
    main(["theory", "--alpha", "2", "--r", "0.5", "--sigma", "0.1",
          "--lam", f"{lam:.17g}", "--p", "2000", "--n", "100", "--out", str(b)])
    ra, rb = _read_csv(a)[1], _read_csv(b)[1]
    assert ra[1:5] == rb[1:5]  # lambda and error columns identical


def test_theory_usage_error_on_conflicting_flags(tmp_path):
    code = main(["theory", "--alpha", "2", "--r", "0.5", "--lam", "0",
                 "--ell", "1", "--n", "100"])
    assert code == 2
    code = main(["theory", "--alpha", "2", "--r", "0.5", "--n", "100"])
    assert code == 2


def test_theory_invalid_alpha_is_usage_error(tmp_path):
    code = main(["theory", "--alpha", "0.9", "--r", "0.5", "--lam", "0",
                 "--n", "100", "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_simulate_deterministic(tmp_path):
    args = ["simulate", "--alpha", "2", "--r", "0.5", "--sigma", "0.1",
            "--lam", "0", "--p", "400", "--n", "32,64", "--trials", "4",
            "--seed", "11"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    assert main(args + ["--workers", "4", "--out", str(c)]) == 0
    assert a.read_bytes() == c.read_bytes()
    curve = LearningCurve.from_csv(a)
    assert [r.n for r in curve.rows] == [32, 64]
    assert all(r.regime for r in curve.rows)


def test_simulate_usage_error(tmp_path):
    assert main(["simulate", "--alpha", "2", "--r", "0.5", "--lam", "0",
                 "--ell", "1", "--n", "32"]) == 2


def test_phase_diagram_outputs(tmp_path):
    base = tmp_path / "pd"
    code = main(["phase-diagram", "--out", str(base)])
    assert code == 0
    grid = _read_csv(tmp_path / "pd_grid.csv")
    assert grid[0] == ["n", "ell", "region", "exponent"]
    regions = {row[2] for row in grid[1:]}
    assert regions == {"GreenNoiselessUnreg", "RedNoisyUnreg",
                       "BlueNoiselessReg", "OrangeNoisyReg"}
    lines = _read_csv(tmp_path / "pd_lines.csv")
    assert lines[0] == ["line_id", "n", "ell"]
    manifest = json.loads((tmp_path / "pd.manifest.json").read_text())
    assert manifest["command"] == "phase-diagram"
    assert "optimal_point" in manifest["params"]


def test_phase_diagram_small_prefactor_bends_reg_line(tmp_path):
    base = tmp_path / "pd2"
    main(["phase-diagram", "--lambda0", "1e-4", "--sigma", "1e-5",
          "--ell-grid", "0,4,17", "--out", str(base)])
    lines = _read_csv(tmp_path / "pd2_lines.csv")
    reg_ns = {row[1] for row in lines[1:] if row[0] == "regularization"}
    assert len(reg_ns) > 1  # boundary varies with ell, no longer horizontal


def test_phase_diagram_degenerate_grid(tmp_path):
    base = tmp_path / "pd3"
    code = main(["phase-diagram", "--n-grid", "10,10,1", "--ell-grid", "1,1,1",
                 "--out", str(base)])
    assert code == 0
    grid = _read_csv(tmp_path / "pd3_grid.csv")
    assert len(grid) == 2


def _planted_csv(path, n_tot=600, p=400, seed=3):
    sp = power_law_spectrum(PowerLawParams(2.0, 0.5, p))
    X, y = sample_dataset(sp, n_tot, 0.0, seed)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([f"x{j}" for j in range(p)] + ["y"])
        for i in range(n_tot):
            w.writerow([f"{v:.17g}" for v in X[i]] + [f"{y[i]:.17g}"])


def test_estimate_planted_csv(tmp_path):
    data = tmp_path / "data.csv"
    _planted_csv(data)
    base = tmp_path / "est"
    code = main(["estimate", str(data), "--kernel", "linear", "--gamma", "1",
                 "--out", str(base)])
    assert code == 0
    report = json.loads((tmp_path / "est_estimate.json").read_text())
    assert abs(report["alpha_hat"] - 2.0) / 2.0 < 0.15
    assert abs(report["r_hat"] - 0.5) / 0.5 < 0.3
    assert report["predicted_exponents"]["GreenNoiselessUnreg"] == pytest.approx(
        2 * report["alpha_hat"] * min(report["r_hat"], 1.0))
    tails = _read_csv(tmp_path / "est_tails.csv")
    assert tails[0] == ["k", "cap_tail", "src_tail"]
    assert len(tails) == 601


def test_estimate_missing_label_column(tmp_path):
    data = tmp_path / "nolabel.csv"
    data.write_text("x1,x2\n1.0,2.0\n3.0,4.0\n")
    code = main(["estimate", str(data), "--kernel", "rbf", "--gamma", "1e-4",
                 "--out", str(tmp_path / "e")])
    assert code == 4


def test_estimate_cap_refusal_and_subsample(tmp_path):
    data = tmp_path / "data.csv"
    _planted_csv(data, n_tot=120, p=30)
    code = main(["estimate", str(data), "--kernel", "linear", "--gamma", "1",
                 "--cap", "100", "--out", str(tmp_path / "e")])
    assert code == 4
    code = main(["estimate", str(data), "--kernel", "linear", "--gamma", "1",
                 "--cap", "100", "--subsample", "80", "--seed", "5",
                 "--out", str(tmp_path / "e2")])
    assert code == 0
    report = json.loads((tmp_path / "e2_estimate.json").read_text())
    assert report["n_tot"] == 80


def _slope_csv(path, values):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["n", "lambda", "mean_excess", "std_excess", "trials",
                    "theory_excess", "regime"])
        for n, v in values:
            w.writerow([n, "0", f"{v:.17g}", "0", "1", "0", ""])


def test_fit_slope_power_law(tmp_path, capsys):
    path = tmp_path / "c.csv"
    _slope_csv(path, [(n, n ** -2.0) for n in (10, 30, 100, 300, 1000)])
    assert main(["fit-slope", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["slope"] == pytest.approx(-2.0, abs=1e-10)


def test_fit_slope_constant(tmp_path, capsys):
    path = tmp_path / "c.csv"
    _slope_csv(path, [(n, 0.25) for n in (10, 100, 1000)])
    assert main(["fit-slope", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["slope"] == pytest.approx(0.0, abs=1e-12)


def test_fit_slope_degenerate_window(tmp_path):
    path = tmp_path / "c.csv"
    _slope_csv(path, [(10, 1.0), (100, 0.5), (1000, 0.25)])
    assert main(["fit-slope", str(path), "--window", "0,1"]) == 4


def test_optimal_lambda_command(tmp_path):
    out = tmp_path / "opt.csv"
    code = main(["optimal-lambda", "--alpha", "2", "--r", "0.5", "--sigma", "0.5",
                 "--p", "5000", "--n", "100,200", "--lam-grid", "1e-6,1,49",
                 "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert rows[0] == ["n", "lam_star", "excess_star", "zone"]
    assert float(rows[1][1]) > 0


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 2.0, "r": 0.5, "lam": 0.0,
                               "p": 1000, "n": [50, 100]}))
    out = tmp_path / "t.csv"
    code = main(["theory", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    rows = _read_csv(out)
    assert [r[0] for r in rows[1:]] == ["50", "100"]
    # explicit flag wins over the file
    out2 = tmp_path / "t2.csv"
    code = main(["theory", "--config", str(cfg), "--n", "75", "--out", str(out2)])
    assert code == 0
    assert [r[0] for r in _read_csv(out2)[1:]] == ["75"]


def test_outdir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("KRR_REGIMES_OUTDIR", str(tmp_path))
    code = main(["theory", "--alpha", "2", "--r", "0.5", "--lam", "1e-2",
                 "--p", "500", "--n", "100"])
    assert code == 0
    assert (tmp_path / "theory_curve.csv").exists()


def test_manifest_contents(tmp_path):
    out = tmp_path / "t.csv"
    main(["theory", "--alpha", "2", "--r", "0.5", "--lam", "0", "--p", "500",
          "--n", "100", "--out", str(out)])
    manifest = json.loads((tmp_path / "t.csv.manifest.json").read_text())
    assert manifest["command"] == "theory"
    assert manifest["params"]["alpha"] == 2.0
    assert manifest["outputs"] == [str(out)]
    assert manifest["version"]


def test_csv_values_roundtrip_exactly(tmp_path):
    out = tmp_path / "t.csv"
    main(["theory", "--alpha", "2", "--r", "0.5", "--sigma", "0.3", "--lam", "1e-3",
          "--p", "2000", "--n", "100", "--out", str(out)])
    from krr_regimes.spectrum import PowerLawParams, power_law_spectrum
    from krr_regimes.theory import excess_error_closed
    row = _read_csv(out)[1]
    dec = excess_error_closed(100, 1e-3, 0.3, power_law_spectrum(PowerLawParams(2, 0.5, 2000)))
    assert float(row[2]) == dec.sample_variance
    assert float(row[3]) == dec.noise_variance
    assert float(row[4]) == dec.total
