import csv
import functools
import io
import json
import math

import pytest

from multitime import cli, propagator

SMALL = {
    "norms": ["--tau-grid", "mid:0:1:3", "--ratio-grid", "0,2,3.18", "--grid-points", "65"],
    "lambdamax": ["--tau-grid", "lin:0:0.9:4", "--grid-points", "65"],
    "twotime": ["--tau-grid", "mid:0:1:4", "--grid-points", "65"],
    "commutator": ["--tau-grid", "0,0.3", "--dtau-grid", "0,0.1", "--grid-points", "65"],
    "criterion": ["--budget", "200", "--starts", "4", "--grid-points", "65"],
    "oracle-compare": ["--n-list", "1,11", "--grid-points", "65"],
}


def invoke(capsys, argv, environ=None):
    code = cli.run(argv, environ or {})
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = [l for l in text.splitlines() if not l.startswith("# ")]
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    return rows[0], rows[1:]


def header(text):
    return [l[2:] for l in text.splitlines() if l.startswith("# ")]


@pytest.mark.parametrize("command", sorted(SMALL))
def test_every_command_runs_with_header(capsys, command):
    code, out, err = invoke(capsys, [command] + SMALL[command])
    assert code == 0, err
    if command == "criterion":
        doc = json.loads(out)
        assert doc["header"][0].startswith("multitime ")
        assert any(h.startswith("convergence_gate=") for h in doc["header"])
        return
    lines = header(out)
    assert lines[0].startswith("multitime ")
    assert f"command={command}" in lines
    assert any(l.startswith("convergence_gate=ok") for l in lines)
    assert "delta_ratio=3.18" in lines and "kappa=1.0" in lines


def test_norms_columns_and_trivial_column(capsys):
    _, out, _ = invoke(capsys, ["norms"] + SMALL["norms"])
    cols, rows = table(out)
    assert cols == ["tau", "delta_over_kappa", "n", "norm"]
    assert len(rows) == 3 * 3 * 4
    for tau, ratio, n, norm in rows:
        if float(ratio) == 0 and int(n) >= 2:
            assert float(norm) == 0


def test_lambdamax_columns(capsys):
    _, out, _ = invoke(capsys, ["lambdamax", "--delta-ratio", "0"] + SMALL["lambdamax"])
    cols, rows = table(out)
    assert cols == ["tau", "n_max", "lambda_max"]
    by_tau = {}
    for tau, n, lm in rows:
        by_tau.setdefault(float(tau), set()).add(round(float(lm), 12))
        if float(tau) == 0:
            assert float(lm) == 0
    assert all(len(v) == 1 for v in by_tau.values())


def test_twotime_cells(capsys):
    _, out, _ = invoke(capsys, ["twotime", "--tau-grid", "0,0.5", "--grid-points", "65"])
    cols, rows = table(out)
    assert cols == ["tau1", "tau2", "phi_sq"]
    cells = {(float(a), float(b)): float(v) for a, b, v in rows}
    assert cells[0.0, 0.0] == pytest.approx(1.0)
    assert cells[0.5, 0.5] > 1


def test_commutator_matched_closed_form(capsys):
    _, out, _ = invoke(capsys, ["commutator", "--delta-ratio", "0"] + SMALL["commutator"])
    cols, rows = table(out)
    assert cols == ["tau", "dtau", "comm_re", "comm_im"]
    for tau, dtau, re, im in rows:
        assert float(re) == pytest.approx(0, abs=1e-10)
        assert float(im) == pytest.approx(-math.sinh(math.pi * float(dtau)), abs=1e-10)


def test_oracle_compare_orders(capsys):
    _, out, _ = invoke(capsys, ["oracle-compare"] + SMALL["oracle-compare"])
    cols, rows = table(out)
    assert cols == ["tau", "n_max", "error"]
    err = {int(n): float(e) for _, n, e in rows}
    assert err[11] < err[1]


def test_criterion_report(capsys):
    _, out, _ = invoke(capsys, ["criterion"] + SMALL["criterion"])
    doc = json.loads(out)
    assert doc["verdict"] == "nonclassical"
    assert doc["minors"][0] == pytest.approx(1.0)
    assert doc["seed"] == 0 and doc["times"] == [0.4, 0.7]
    assert "not a proof" in doc["disclaimer"]


def test_criterion_csv(capsys):
    code, out, _ = invoke(capsys, ["criterion", "--format", "csv"] + SMALL["criterion"])
    assert code == 0
    cols, rows = table(out)
    assert cols == ["order", "minor"] and len(rows) == 2


def test_json_table_format(capsys):
    _, out, _ = invoke(capsys, ["commutator", "--format", "json"] + SMALL["commutator"])
    doc = json.loads(out)
    assert doc["columns"] == ["tau", "dtau", "comm_re", "comm_im"]
    assert len(doc["rows"]) == 4


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, out, _ = invoke(capsys, ["commutator", "--out", str(path)] + SMALL["commutator"])
    assert code == 0 and out == ""
    assert path.read_text().startswith("# multitime ")


def test_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\nkappa = 2.0\nseed=5\n")
    env = {"MULTITIME_KAPPA": "3.0", "MULTITIME_SEED": "7", "MULTITIME_N_MAX": "4"}
    cfg = cli.resolve("lambdamax", {"config": str(conf), "seed": "9"}, env)
    assert cfg["kappa"] == 2.0  # file beats env
    assert cfg["seed"] == 9  # flag beats file
    assert cfg["n_max"] == 4  # env beats default
    assert cli.resolve("lambdamax", {}, {})["n_max"] == 11


def test_config_diagnostics(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("kappa = 1\nbogus = 3\n")
    code, _, err = invoke(capsys, ["norms", "--config", str(conf)])
    assert code == 2 and f"{conf}:2" in err and "bogus" in err
    conf.write_text("kappa = -1\n")
    code, _, err = invoke(capsys, ["norms", "--config", str(conf)])
    assert code == 2 and f"{conf}:1" in err and "kappa" in err
    conf.write_text("just words\n")
    code, _, err = invoke(capsys, ["norms", "--config", str(conf)])
    assert code == 2 and "key=value" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["norms", "--n-list", "0"],
        ["twotime", "--mode", "other"],
        ["lambdamax", "--tau-grid", "lin:0:1"],
        ["criterion", "--order", "9"],
        ["norms", "--grid-points", "10"],
        ["oracle-compare", "--oracle-tol", "1e-3"],
        ["nonsense"],
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, _, err = invoke(capsys, argv)
    assert code == 2


def test_env_error_names_variable(capsys):
    code, _, err = invoke(capsys, ["norms"], {"MULTITIME_WORKERS": "zero"})
    assert code == 2 and "MULTITIME_WORKERS" in err


def test_gate_exit_3_and_stepping(capsys):
    code, _, err = invoke(capsys, ["lambdamax", "--tau-grid", "0.5,1.2", "--n-list", "11"])
    assert code == 3 and "convergence" in err
    code, out, _ = invoke(capsys, ["lambdamax", "--tau-grid", "0.5,1.2", "--n-list", "11", "--steps", "auto"])
    assert code == 0
    assert any(l.startswith("convergence_gate=stepped") for l in header(out))
    code, _, _ = invoke(capsys, ["norms", "--tau-grid", "1.2", "--steps", "auto"])
    assert code == 3


def test_oracle_failure_exit_4(capsys, monkeypatch):
    capped = functools.partial(propagator.ode_trajectory, max_level=1)
    monkeypatch.setattr(cli, "ode_trajectory", capped)
    code, _, err = invoke(capsys, ["oracle-compare", "--oracle-tol", "1e-13"])
    assert code == 4 and "oracle" in err


def test_goldens_verify(capsys):
    code, out, _ = invoke(capsys, ["goldens"])
    assert code == 0 and out == "all golden values reproduced\n"


def test_goldens_regenerate_to_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    code, out, _ = invoke(capsys, ["goldens", "--regenerate", "--out", str(path)])
    assert code == 0 and path.exists()
    assert json.loads(path.read_text()).keys() == json.loads(cli_goldens_text()).keys()


def cli_goldens_text():
    from conftest import GOLDENS

    return GOLDENS.read_text()


@pytest.mark.parametrize("command", sorted(SMALL))
def test_byte_identical_across_workers(capsys, command):
    outs = []
    for workers in ("1", "8", "1"):
        code, out, _ = invoke(capsys, [command, "--workers", workers, "--seed", "3"] + SMALL[command])
        assert code == 0
        outs.append(out.encode())
    assert outs[0] == outs[1] == outs[2]
