import json

import pytest

import main
from errors import NonFiniteOutput
from models import VerificationReport

MU = "0.2,0.1,1.0,0.0,0.0,1.0,0.3,-0.2"
MODEL_ARGS = ["--N", "5", "--K", "2", "--s", "6", "--R", "3"]


def run(capsys, *argv):
    code = main.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out.strip() else None, err


@pytest.mark.parametrize("tau, eigs, expected", [
    ("1", "2,3", 5.0),
    ("2", "1,1", 8.0 / 3.0),
    ("1,1,1", "1,2", 0.0),
])
def test_zonal(capsys, tau, eigs, expected):
    code, out, _ = run(capsys, "zonal", "--tau", tau, "--eigs", eigs)
    assert code == 0
    assert float(out) == pytest.approx(expected, rel=1e-15)


def test_zonal_prints_integers_plainly(capsys):
    assert run(capsys, "zonal", "--tau", "1", "--eigs", "2,3")[1].strip() == "5"


def test_verify_pearson(capsys):
    code, record, _ = run_json(capsys, "verify", "pearson", "--a", "1.5", "--c", "3", "--b", "2", "--d", "4",
                               "--eigs", "0.5")
    assert code == 0
    assert record["passed"] is True
    assert record["schema"] == main.SCHEMA_VERSION
    assert record["parameters"]["kind"] == "pearson"
    assert record["rel_diff"] < 1e-6


def test_verify_integral_with_zero_power(capsys):
    code, record, _ = run_json(capsys, "verify", "integral", "--a", "1.5", "--c", "3.5", "--b", "0", "--d", "2",
                               "--eigs", "0.3,0.2", "--samples", "2000", "--seed", "4")
    assert code == 0
    assert record["rel_diff"] == 0.0
    assert record["seed"] == 4


def test_verify_outside_domain(capsys):
    code, _, err = run(capsys, "verify", "pearson", "--a", "2", "--c", "1.5", "--b", "1", "--d", "0.5",
                       "--eigs", "0.3,0.4")
    assert code == main.EXIT_NUMERICAL
    assert "numerical error" in err


def test_verify_needs_pearson_parameters(capsys):
    code, _, _ = run(capsys, "verify", "pearson", "--a", "2", "--c", "1.5", "--eigs", "0.3")
    assert code == main.EXIT_USAGE


def test_verify_reports_disagreement(capsys, monkeypatch):
    monkeypatch.setattr(main, "kummer_classic_check", lambda *args: VerificationReport.compare(1.0, 2.0))
    code, record, _ = run_json(capsys, "verify", "kummer", "--a", "1", "--c", "2", "--eigs", "0.5")
    assert code == main.EXIT_TOLERANCE
    assert record["passed"] is False


def test_simulate_is_reproducible(capsys, tmp_path):
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    for path in (first, second):
        code, record, _ = run_json(capsys, "simulate", *MODEL_ARGS, "--mu", MU, "--count", "15", "--seed", "8",
                                   "--out", str(path))
        assert code == 0
        assert record["count"] == 15
    assert first.read_bytes() == second.read_bytes()


@pytest.fixture
def simulated(capsys, tmp_path):
    path = tmp_path / "sim.csv"
    main.main(["simulate", *MODEL_ARGS, "--mu", MU, "--count", "10", "--seed", "3", "--out", str(path)])
    capsys.readouterr()
    return path


@pytest.mark.parametrize("form", ["series", "polynomial"])
def test_density(capsys, simulated, form):
    code, record, _ = run_json(capsys, "density", str(simulated), *MODEL_ARGS, "--mu", MU, "--form", form)
    assert code == 0
    assert record["count"] == 10
    assert len(record["figures"]) == 10
    assert all(f["density"] > 0 for f in record["figures"])
    if form == "polynomial":
        assert all(f["terminated_exactly"] and f["degree_used"] == 2 for f in record["figures"])


def test_density_forms_agree(capsys, simulated):
    _, series, _ = run_json(capsys, "density", str(simulated), *MODEL_ARGS, "--mu", MU, "--form", "series")
    _, polynomial, _ = run_json(capsys, "density", str(simulated), *MODEL_ARGS, "--mu", MU, "--form", "polynomial")
    assert polynomial["loglik"] == pytest.approx(series["loglik"], rel=1e-6)


def test_density_low_max_degree_is_raised(capsys, simulated):
    code, _, _ = run(capsys, "density", str(simulated), "--N", "5", "--K", "2", "--s", "6", "--R", "3",
                     "--mu", MU, "--form", "polynomial", "--max-degree", "1")
    assert code == 0


def test_fit(capsys, simulated):
    code, record, _ = run_json(capsys, "fit", str(simulated), *MODEL_ARGS, "--budget", "60")
    assert code == 0
    assert len(record["mu_hat"]) == 4
    assert record["loglik"] >= record["loglik_init"]
    assert record["evaluations"] >= 1


def test_malformed_landmarks(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2\n0.0,oops\n1.0,0.0\n1.0,1.0\n0.0,1.0\n")
    code, out, err = run(capsys, "density", str(path), *MODEL_ARGS)
    assert code == main.EXIT_USAGE
    assert out == ""
    assert ":2:" in err


def test_wrong_mu_length(capsys, simulated):
    code, _, _ = run(capsys, "density", str(simulated), *MODEL_ARGS, "--mu", "1,2,3")
    assert code == main.EXIT_USAGE


def test_negative_leading_eigenvalue(capsys):
    code, record, _ = run_json(capsys, "verify", "kummer", "--a", "2", "--c", "3.5", "--eigs", "-0.4,0.3")
    assert code == 0
    assert record["parameters"]["eigenvalues"] == [-0.4, 0.3]
    assert record["passed"] is True


def test_negative_leading_mu(capsys, tmp_path):
    path = tmp_path / "neg.csv"
    code, record, _ = run_json(capsys, "simulate", *MODEL_ARGS, "--mu", "-0.5,0.1,1.0,0.0,0.0,1.0,0.3,-0.2",
                               "--count", "3", "--seed", "2", "--out", str(path))
    assert code == 0
    assert record["parameters"]["mu"][0] == [-0.5, 0.1]


def test_negative_values_attach_to_their_option():
    argv = ["verify", "kummer", "--a", "-1.5", "--eigs", "-1e-3,2", "-v", "--c", "2"]
    assert main.attach_negative_values(argv) == [
        "verify", "kummer", "--a=-1.5", "--eigs=-1e-3,2", "-v", "--c", "2"]
    assert main.attach_negative_values(["--eigs=-1,2"]) == ["--eigs=-1,2"]


def test_non_finite_output_is_a_numerical_error(capsys, monkeypatch):
    monkeypatch.setattr(main, "zonal_eval", lambda tau, x: float("nan"))
    code, out, _ = run(capsys, "zonal", "--tau", "1", "--eigs", "1")
    assert code == main.EXIT_NUMERICAL
    assert out == ""
    with pytest.raises(NonFiniteOutput):
        main.emit({"figures": [{"density": float("inf")}]})
