import json
import math

import pytest
import scipy.special as sp

from sldet import specfile, spectrum
from sldet.determinant import det_jacobi_closed
from sldet.main import main


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None

# ----------------------
# det
# ----------------------
def test_det_dirichlet(capsys):
    code, report = run_json(capsys, ["det", "dirichlet"])
    assert code == 0
    assert report["det"] == pytest.approx(2.0, abs=1e-8)
    assert (report["nu0"], report["nu1"]) == (0.5, 0.5)
    assert report["diagnostics"]["route"] == "wronskian"
    assert report["diagnostics"]["negative_eigenvalues"] == 0


def test_det_from_file(capsys, tmp_path):
    path = tmp_path / "model.op"
    path.write_text("# Bessel model\nfamily = bessel\nnu = 1\n", encoding="utf-8")
    code, report = run_json(capsys, ["det", str(path)])
    assert code == 0
    assert report["det"] == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-7)


def test_det_shift_override(capsys):
    code, report = run_json(capsys, ["det", "dirichlet", "--shift", "1"])
    assert code == 0
    assert report["det"] == pytest.approx(2.0 * math.sinh(1.0), rel=1e-7)


def test_det_is_deterministic(capsys):
    main(["det", "jacobi", "--alpha", "1", "--beta", "0.5"])
    first = capsys.readouterr().out
    main(["det", "jacobi", "--alpha", "1", "--beta", "0.5"])
    assert capsys.readouterr().out == first

# ----------------------
# spectrum and series
# ----------------------
def test_spectrum_bessel(capsys):
    code, report = run_json(capsys, ["spectrum", "bessel", "--nu", "0", "--count", "3"])
    assert code == 0
    assert report["count"] == 3
    zeros = sp.jn_zeros(0, 3)
    for entry, j in zip(report["eigenvalues"], zeros):
        assert entry["eigenvalue"] == pytest.approx(j * j, rel=1e-7)
        assert entry["sign_changes"] == entry["index"] - 1
    assert report["eigenvalues"][0]["eigenvalue"] == pytest.approx(5.78318596, rel=1e-8)


def test_series_dirichlet(capsys):
    code, report = run_json(capsys, ["series", "dirichlet", "--endpoint", "0", "--terms", "6", "--shift", "6"])
    assert code == 0
    # sinh(sqrt(6) x) / sqrt(6) = x (1 + x^2 + ...)
    assert report["nu"] == 0.5
    assert report["coeffs"][0] == pytest.approx(1.0)
    assert report["coeffs"][1] == pytest.approx(0.0, abs=1e-15)
    assert report["coeffs"][2] == pytest.approx(1.0, rel=1e-12)

# ----------------------
# verify
# ----------------------
def test_verify_jacobi(capsys):
    code, report = run_json(capsys, ["verify", "jacobi", "--alpha", "1", "--beta", "0.5"])
    assert code == 0
    expected = det_jacobi_closed(1.0, 0.5)
    assert set(report["routes"]) == {"wronskian", "jacobi_closed", "zeta_oracle", "factorized_closed"}
    for value in report["routes"].values():
        assert value == pytest.approx(expected, rel=1e-5)
    assert report["max_rel_discrepancy"] < 1e-5
    assert report["parameters"] == {"alpha": 1.0, "beta": 0.5}


def test_verify_dirichlet(capsys):
    code, report = run_json(capsys, ["verify", "dirichlet"])
    assert code == 0
    assert report["routes"]["zeta_oracle"] == pytest.approx(2.0, rel=1e-14)


def test_verify_tolerance_exceeded(capsys):
    code = main(["verify", "factorized", "--s0", "0.5", "--s1", "0", "--tol", "1e-30"])
    captured = capsys.readouterr()
    assert code == 2
    assert "route factorized_closed disagrees" in captured.err


@pytest.mark.parametrize("nu", ["0", "1"])
def test_verify_bessel_uses_route_tolerances(capsys, nu):
    code, report = run_json(capsys, ["verify", "bessel", "--nu", nu])
    assert code == 0
    assert report["tolerances"] == {"model_closed": 1e-6, "trace": 1e-3}
    assert report["discrepancies"]["model_closed"] < 1e-6
    assert report["discrepancies"]["trace"] < 1e-3


def test_tol_only_tightens(capsys):
    code, report = run_json(capsys, ["verify", "jacobi", "--alpha", "1", "--beta", "0.5", "--tol", "1.0"])
    assert code == 0
    assert report["tolerances"] == {"jacobi_closed": 1e-5, "zeta_oracle": 1e-5, "factorized_closed": 1e-5}


def test_verify_families(capsys):
    code, report = run_json(capsys, ["verify", "families"])
    assert code == 0
    assert report == {"families": ["dirichlet", "bessel", "jacobi", "factorized"]}

# ----------------------
# --dump-spec
# ----------------------
def test_dump_spec_round_trip(capsys, tmp_path):
    assert main(["det", "jacobi", "--alpha", "1", "--beta", "0.5", "--dump-spec"]) == 0
    text = capsys.readouterr().out
    path = tmp_path / "jacobi.op"
    path.write_text(text, encoding="utf-8")
    assert specfile.load(path).model_dump() == specfile.loads(text).model_dump()

    code, from_file = run_json(capsys, ["det", str(path)])
    _, builtin = run_json(capsys, ["det", "jacobi", "--alpha", "1", "--beta", "0.5"])
    assert code == 0
    assert from_file == builtin

# ----------------------
# Failures
# ----------------------
@pytest.mark.parametrize("content", [
    "family = bessel\ncolour = red\n",
    "family = custom\npotential_expr = x +\n",
])
def test_bad_files_exit_one(capsys, tmp_path, content):
    path = tmp_path / "bad.op"
    path.write_text(content, encoding="utf-8")
    assert main(["det", str(path)]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_file_exits_one(capsys, tmp_path):
    assert main(["det", str(tmp_path / "missing.op")]) == 1


def test_verify_custom_exits_one(capsys, tmp_path):
    path = tmp_path / "custom.op"
    path.write_text("family = custom\npotential_expr = 0.75/x^2\n", encoding="utf-8")
    assert main(["verify", str(path)]) == 1


def test_unknown_command_exits_one(capsys):
    assert main(["integrate", "dirichlet"]) == 1


def test_spectrum_bracket_failure_exits_two(capsys, monkeypatch):
    monkeypatch.setattr(spectrum, "characteristic", lambda op, mu: 1.0)
    assert main(["spectrum", "dirichlet", "--count", "2"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "numerical failure" in captured.err
    assert "Traceback" not in captured.err


def test_spectrum_symmetric_jacobi(capsys):
    code, report = run_json(capsys, ["spectrum", "jacobi", "--alpha", "0", "--beta", "0", "--count", "10"])
    assert code == 0
    for entry in report["eigenvalues"]:
        n = entry["index"]
        assert entry["eigenvalue"] == pytest.approx(math.pi ** 2 * n * (n + 1), rel=1e-6)
