import json
from pathlib import Path

import numpy as np
import pytest

import enaqt.cli as cli
from enaqt import svg
from enaqt.lattice import Dims
from enaqt.sweep import (
    ConfigError,
    gamma_opt_numeric,
    load_config,
    parse_config,
    run_experiment,
)


def base_doc(**overrides):
    doc = {
        "name": "t",
        "lattice": {"dims": "2d", "L": 3, "boundary": "open", "hopping_model": "dipolar"},
        "rates": {
            "J": 1.0,
            "mu": 0.05,
            "gamma_s": 1.0,
            "gamma": {"sweep": "log", "start": 0.01, "stop": 1.0, "points": 3},
        },
        "solvers": ["gf"],
        "output": {"formats": ["csv", "json", "svg"]},
    }
    doc.update(overrides)
    return doc


class TestParseConfig:
    def test_valid_roundtrip(self):
        config = parse_config(base_doc())
        assert config.dims is Dims.TWO_D
        assert len(config.axes) == 1
        assert config.axes[0].name == "gamma"
        vals = config.axes[0].values
        assert vals[0] == pytest.approx(0.01) and vals[-1] == pytest.approx(1.0)

    def test_values_axis_and_two_axes(self):
        doc = base_doc()
        doc["rates"]["gamma_s"] = {"values": [0.1, 1.0]}
        config = parse_config(doc)
        assert [a.name for a in config.axes] == ["gamma_s", "gamma"]
        assert len(list(config.grid())) == 6

    def test_swept_lattice_size(self):
        doc = base_doc()
        doc["lattice"] = {"dims": "1d", "hopping_model": "nearest_neighbor",
                          "L": {"values": [3, 5]}}
        doc["rates"]["gamma"] = 0.5
        config = parse_config(doc)
        assert config.axes[0].name == "L"
        assert config.axes[0].values == (3, 5)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("lattice"),
            lambda d: d.pop("rates"),
            lambda d: d["rates"].update(gamma=0.5),  # zero axes
            lambda d: d["rates"].update(
                mu={"values": [0.01]}, gamma_s={"values": [1.0]}
            ),  # three axes
            lambda d: d.update(solvers=["magic"]),
            lambda d: d.update(solvers=["oned"]),  # 2d lattice
            lambda d: d["rates"].update(gamma={"sweep": "cubic", "start": 1, "stop": 2, "points": 3}),
            lambda d: d["rates"].update(gamma={"sweep": "log", "start": -1, "stop": 2, "points": 3}),
            lambda d: d["rates"].update(nu=1.0),
            lambda d: d["output"].update(formats=["pdf"]),
        ],
    )
    def test_malformed_configs_rejected(self, mutate):
        doc = base_doc()
        mutate(doc)
        with pytest.raises(ConfigError):
            parse_config(doc)

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(path)


class TestRunExperiment:
    def test_artifacts_and_schema(self, tmp_path):
        config = parse_config(base_doc())
        summary = run_experiment(config, tmp_path)
        assert summary["n_errors"] == 0
        csv_path = Path(summary["files"]["csv"])
        lines = csv_path.read_text(encoding="utf-8").splitlines()
        header = lines[0].split(",")
        # parameter columns precede result columns; units in the header
        assert header[0] == "gamma[J]"
        assert header[1:4] == ["eta_gf[-]", "tau_gf[1/J]", "lost_gf[-]"]
        assert len(lines) == 1 + 3
        # floats round-trip through repr
        eta = float(lines[1].split(",")[1])
        assert repr(eta) == lines[1].split(",")[1]
        assert Path(summary["files"]["json"]).exists()
        assert Path(summary["files"]["svg"]).read_text().startswith("<svg")

    def test_csv_bytes_deterministic(self, tmp_path):
        doc = base_doc(solvers=["gf", "mcwf"], mcwf={"n_traj": 300, "seed": 7})
        config = parse_config(doc)
        run_experiment(config, tmp_path / "a")
        run_experiment(config, tmp_path / "b")
        assert (tmp_path / "a" / "t.csv").read_bytes() == (
            tmp_path / "b" / "t.csv"
        ).read_bytes()

    def test_per_point_solver_errors_recorded(self, tmp_path):
        doc = base_doc()
        doc["lattice"] = {"dims": "1d", "hopping_model": "nearest_neighbor",
                          "L": {"values": [4, 5]}}
        doc["rates"]["gamma"] = 0.5
        doc["solvers"] = ["oned"]
        summary = run_experiment(parse_config(doc), tmp_path)
        assert summary["n_errors"] == 1  # even length unsupported, run continues
        lines = (tmp_path / "t.csv").read_text().splitlines()
        assert "odd" in lines[1]
        assert lines[2].endswith(",")  # second point clean

    def test_gamma_opt_maximizes_efficiency(self):
        from enaqt import LatticeSpec, RateSet, transport_gf

        spec = LatticeSpec.square(3)
        rates = RateSet(J=1.0, mu=0.01, gamma_s=1.0)
        g_opt = gamma_opt_numeric(spec, rates, points=25)
        eta_opt = transport_gf(spec, rates.replace(gamma=g_opt)).eta
        for factor in (0.25, 4.0):
            assert eta_opt >= transport_gf(
                spec, rates.replace(gamma=g_opt * factor)
            ).eta


class TestSvg:
    def test_chart_is_deterministic_text(self):
        series = [svg.Series("a", np.geomspace(0.01, 10, 8), np.linspace(0, 1, 8))]
        one = svg.line_chart(series, title="t", x_label="x", y_label="y", log_x=True)
        two = svg.line_chart(series, title="t", x_label="x", y_label="y", log_x=True)
        assert one == two
        assert one.startswith("<svg") and one.rstrip().endswith("</svg>")
        assert "polyline" in one

    def test_handles_nan_and_empty(self):
        series = [svg.Series("a", np.array([1.0, 2.0]), np.array([np.nan, np.nan]))]
        out = svg.line_chart(series)
        assert "<svg" in out


class TestCliVerbs:
    @pytest.fixture
    def config_path(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(base_doc()))
        return str(path)

    def test_run_verb(self, config_path, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli.main(["run", config_path, "--output-dir", str(out)]) == 0
        assert (out / "t.csv").exists()
        assert "0 solver errors" in capsys.readouterr().out

    def test_output_dir_env_var(self, config_path, tmp_path, monkeypatch):
        target = tmp_path / "via_env"
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(target))
        assert cli.main(["run", config_path]) == 0
        assert (target / "t.csv").exists()

    def test_config_error_exit_code(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"lattice": {"dims": "2d", "L": 3}, "rates": {"mu": 1.0}}))
        assert cli.main(["run", str(bad)]) == cli.EXIT_CONFIG

    def test_solver_error_exit_code(self, tmp_path):
        doc = base_doc()
        doc["lattice"] = {"dims": "1d", "hopping_model": "nearest_neighbor",
                          "L": {"values": [4, 5]}}
        doc["rates"]["gamma"] = 0.5
        doc["solvers"] = ["oned"]
        path = tmp_path / "bad_point.json"
        path.write_text(json.dumps(doc))
        assert (
            cli.main(["run", str(path), "--output-dir", str(tmp_path / "o")])
            == cli.EXIT_SOLVER
        )

    def test_census_verb(self, config_path, tmp_path, capsys):
        out = tmp_path / "c"
        assert cli.main(["census", config_path, "--output-dir", str(out)]) == 0
        assert (out / "t_census.csv").exists()
        assert "dark" in capsys.readouterr().out

    def test_bounds_verb(self, config_path, tmp_path):
        out = tmp_path / "b"
        assert cli.main(["bounds", config_path, "--output-dir", str(out)]) == 0
        header = (out / "t_bounds.csv").read_text().splitlines()[0]
        assert "eta_coh[-]" in header and "eta_incoh[-]" in header

    def test_validate_failure_exit_code(self, monkeypatch, tmp_path, capsys):
        rows = [
            {"suite": "s", "check": "c", "residual": "1.0", "threshold": "0.1",
             "status": "FAIL"}
        ]
        monkeypatch.setattr(
            cli, "run_validation", lambda *a: (rows, False, tmp_path / "v.csv")
        )
        assert cli.main(["validate", "--fast"]) == cli.EXIT_INVARIANT
        assert "FAIL" in capsys.readouterr().out


class TestValidationSuite:
    def test_fast_suite_passes_and_writes_report(self, tmp_path):
        rows, all_ok, report = cli.run_validation(True, 0, tmp_path)
        assert all_ok
        suites = {r["suite"] for r in rows}
        assert suites == {
            "conservation", "bound-dominance", "closed-form",
            "gf-vs-mcwf", "determinism",
        }
        text = report.read_text(encoding="utf-8")
        assert text.splitlines()[0] == "suite,check,residual,threshold,status"
