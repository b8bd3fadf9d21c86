import copy
import json
from pathlib import Path

import numpy as np
import pytest

from renyidiscord import cli
from renyidiscord import experiment as ex
from renyidiscord.dynamics import BathParams, partition_function

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def load_doc(name="fig2_x_state"):
    return json.loads((CONFIGS / f"{name}.json").read_text())


def small(doc, n_points=6, t_end=2.0):
    doc = copy.deepcopy(doc)
    doc["time_grid"] = {"t_start": 0.0, "t_end": t_end, "n_points": n_points}
    doc["optimizer"] = {"grid_theta": 12, "grid_phi": 24, "refine_tol": 1e-8, "max_iters": 200}
    return doc


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestConfig:
    @pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_configs_parse(self, path):
        cfg = ex.load_config(path)
        assert cfg.time_grid.n_points == 100
        assert cfg.bath.N1 == 20 and cfg.bath.N2 == 22

    def test_defaults(self):
        doc = load_doc()
        del doc["optimizer"], doc["plateau"]
        cfg = ex.parse_config(doc)
        assert (cfg.optimizer.grid_theta, cfg.optimizer.grid_phi) == (32, 64)
        assert (cfg.plateau.abs_tol, cfg.plateau.min_points) == (1e-3, 10)

    @pytest.mark.parametrize(
        "mutate, fragment",
        [
            (lambda d: d["time_grid"].update(n_points=1), "n_points"),
            (lambda d: d.update(renyi_alpha=2.5), "renyi_alpha"),
            (lambda d: d["bath"].update(N1=3), "even"),
            (lambda d: d["bath"].update(T=-1), "temperature"),
            (lambda d: d.update(sweep={"axis": "q", "values": []}), "non-empty"),
            (lambda d: d.update(sweep={"axis": "J", "values": [1]}), "sweep.axis"),
            (lambda d: d.update(sweep={"axis": "T", "values": [10, 0]}), "sweep value"),
            (lambda d: d["initial_state"].update(delta=0.4), "|delta|^2 <= a*d"),
            (lambda d: d.update(initial_state={"kind": "sci_state", "C33": 1, "C01": 1, "C11": 0}), "C33^2 + C01^2"),
            (lambda d: d.update(initial_state={"kind": "w_state"}), "kind"),
            (lambda d: d["dimer"].update(bogus=1), "bogus"),
            (lambda d: d.pop("bath"), "bath"),
        ],
    )
    def test_rejections(self, mutate, fragment):
        doc = load_doc()
        mutate(doc)
        with pytest.raises(ex.ConfigError) as info:
            ex.parse_config(doc)
        assert fragment in str(info.value)

    def test_complex_entries(self):
        doc = load_doc()
        doc["initial_state"]["delta"] = [0.1, 0.1]
        rho = ex.parse_config(doc).initial_rho()
        assert rho[0, 3] == pytest.approx(0.1 + 0.1j)


class TestPlateau:
    def test_constant(self):
        series = [(t, 0.25) for t in range(50)]
        report = ex.detect_plateau(series)
        assert report.intervals == [(0.0, 49.0, 0.25)]
        assert report.series_max == 0.25

    def test_ramp(self):
        series = [(t, 0.01 * t) for t in range(50)]
        assert ex.detect_plateau(series).intervals == []

    def test_step(self):
        values = [0.2] * 30 + list(np.linspace(0.2, 0.1, 32)[1:-1]) + [0.1] * 30
        series = list(enumerate(values))
        report = ex.detect_plateau(series, abs_tol=1e-3, min_points=10)
        assert len(values) == 90
        assert [(a, b) for a, b, _ in report.intervals] == [(0, 29), (60, 89)]
        assert [m for *_, m in report.intervals] == pytest.approx([0.2, 0.1])

    def test_short_series(self):
        assert ex.detect_plateau([(0, 1.0)] * 5, min_points=10).intervals == []

    def test_intervals_disjoint(self, rng):
        values = np.cumsum(rng.normal(0, 3e-4, 400))
        report = ex.detect_plateau(list(enumerate(values)), 1e-3, 10)
        ends = [(a, b) for a, b, _ in report.intervals]
        for (a0, b0), (a1, b1) in zip(ends, ends[1:]):
            assert b0 < a1
        for a, b in ends:
            chunk = values[int(a) : int(b) + 1]
            assert len(chunk) >= 10 and np.ptp(chunk) <= 1e-3


class TestRuns:
    def test_timeseries_rows(self):
        cfg = ex.parse_config(small(load_doc()))
        rows = ex.run_timeseries(cfg, threads=1)
        assert len(rows) == 6
        assert [r[0] for r in rows] == sorted(r[0] for r in rows)
        assert all(r[1] >= -1e-9 for r in rows)

    def test_product_state_starts_at_zero(self):
        doc = small(load_doc(), n_points=2)
        doc["initial_state"] = {"kind": "x_state", "a": 0.42, "b": 0.18, "c": 0.28, "d": 0.12}
        rows = ex.run_timeseries(ex.parse_config(doc), threads=1)
        assert abs(rows[0][1]) < 1e-6

    def test_decoupled_constant(self):
        cfg = ex.parse_config(small(load_doc("decoupled_gamma0"), n_points=8, t_end=5))
        vals = [r[1] for r in ex.run_timeseries(cfg, threads=1)]
        assert np.ptp(vals) < 1e-4

    def test_parallel_matches_serial(self):
        cfg = ex.parse_config(small(load_doc(), n_points=4))
        assert ex.run_timeseries(cfg, threads=2) == ex.run_timeseries(cfg, threads=1)

    def test_alpha_sweep_monotone(self):
        doc = small(load_doc(), n_points=4)
        doc["sweep"] = {"axis": "alpha", "values": [0.5, 1.0, 1.5]}
        rows = ex.run_sweep(ex.parse_config(doc), threads=1)
        assert len(rows) == 12
        by_t = {}
        for a, t, d in rows:
            by_t.setdefault(t, []).append(d)
        for vals in by_t.values():
            assert np.all(np.diff(vals) >= -1e-3)

    def test_q_sweep_continuity(self):
        doc = small(load_doc(), n_points=3)
        doc["sweep"] = {"axis": "q", "values": [0.0, 1e-9, 30.0]}
        rows = ex.run_sweep(ex.parse_config(doc), threads=1)
        d0 = [d for q, _, d in rows if q == 0.0]
        d1 = [d for q, _, d in rows if q == 1e-9]
        assert np.max(np.abs(np.subtract(d0, d1))) < 1e-8
        b = BathParams(20, 22, 250, 200, 0.0, 77)
        assert partition_function(b) == pytest.approx(
            partition_function(BathParams(20, 22, 250, 200, 1e-12, 77)), rel=1e-8
        )

    def test_temperature_sweep_reports(self):
        doc = small(load_doc(), n_points=12, t_end=10)
        doc["sweep"] = {"axis": "T", "values": [77, 150]}
        cfg = ex.parse_config(doc)
        rows = ex.run_sweep(cfg, threads=1)
        for T in (77.0, 150.0):
            series = [(t, d) for v, t, d in rows if v == T]
            report = ex.detect_plateau(series, cfg.plateau.abs_tol, 3)
            assert report.series_max >= 0

    def test_sweep_requires_axis(self):
        with pytest.raises(ex.ConfigError):
            ex.run_sweep(ex.parse_config(small(load_doc())))

    def test_numerical_failure_names_time_and_stage(self, monkeypatch):
        from renyidiscord.entropy import NumericalFailure

        def boom(*a, **k):
            raise NumericalFailure("tau power", "forced")

        monkeypatch.setattr(ex, "renyi_discord", boom)
        with pytest.raises(ex.StageError) as info:
            ex.run_timeseries(ex.parse_config(small(load_doc(), n_points=2)), threads=1)
        assert info.value.t == 0.0 and "tau power" in info.value.stage


class TestCSV:
    def test_format(self):
        text = ex.format_csv(ex.TIMESERIES_COLUMNS, [(0.1, 1 / 3, 0.0, 2.0, True)])
        header, line = text.splitlines()
        assert header == "t,D_alpha,theta_opt,phi_opt,converged"
        assert line == "0.10000000000000001,0.33333333333333331,0,2,1"

    def test_round_trip(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text(ex.format_csv(ex.SWEEP_COLUMNS, [(1.0, 0.0, 0.5), (2.0, 0.0, 0.25)]))
        assert ex.read_series_csv(path) == {1.0: [(0.0, 0.5)], 2.0: [(0.0, 0.25)]}


class TestCLI:
    def test_timeseries_deterministic(self, tmp_path):
        cfg = write(tmp_path, small(load_doc(), n_points=3))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["timeseries", str(cfg), "-o", str(out1), "--threads", "1"]) == 0
        assert cli.main(["timeseries", str(cfg), "-o", str(out2), "--threads", "1"]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        lines = out1.read_text().splitlines()
        assert lines[0] == ",".join(ex.TIMESERIES_COLUMNS) and len(lines) == 4

    def test_sweep_and_plateau(self, tmp_path, capsys):
        doc = small(load_doc(), n_points=3)
        doc["sweep"] = {"axis": "q", "values": [10, 90]}
        out = tmp_path / "sweep.csv"
        assert cli.main(["sweep", str(write(tmp_path, doc)), "-o", str(out), "--threads", "1"]) == 0
        assert len(out.read_text().splitlines()) == 1 + 2 * 3
        assert cli.main(["plateau", str(out), "--tol", "1", "--min-points", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "sweep_value,t_begin,t_end,mean_value"
        assert [l.split(",")[0] for l in lines[1:]] == ["10", "90"]

    def test_plateau_on_timeseries(self, tmp_path, capsys):
        path = tmp_path / "ts.csv"
        path.write_text(ex.format_csv(ex.TIMESERIES_COLUMNS, [(t, 0.5, 0, 0, 1) for t in range(12)]))
        assert cli.main(["plateau", str(path)]) == 0
        assert capsys.readouterr().out.splitlines() == ["t_begin,t_end,mean_value", "0,11,0.5"]

    def test_validate(self, tmp_path, capsys):
        assert cli.main(["validate", str(CONFIGS / "fig3_q_sweep.json")]) == 0
        assert "500 discord evaluations" in capsys.readouterr().out

    def test_validate_failure_exit_code(self, tmp_path, capsys):
        doc = load_doc()
        doc["initial_state"]["delta"] = 0.9
        assert cli.main(["validate", str(write(tmp_path, doc))]) == cli.EXIT_CONFIG
        assert "|delta|^2 <= a*d" in capsys.readouterr().err

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{")
        assert cli.main(["validate", str(path)]) == cli.EXIT_CONFIG

    def test_numerical_exit_code(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise ex.StageError(0.0, "renyi_discord/tau power", "forced")

        monkeypatch.setattr(ex, "run_timeseries", boom)
        cfg = write(tmp_path, small(load_doc()))
        assert cli.main(["timeseries", str(cfg)]) == cli.EXIT_NUMERIC
