import csv
import io
import json
import math

import numpy as np
import pytest

from risqkd import cli
from risqkd.experiment import (
    CSV_HEADER,
    BracketError,
    ConfigError,
    emit_results,
    evaluate,
    from_dict,
    load_config,
    max_secure_distance,
    read_csv,
    run_sweep,
    secure_distance_table,
    to_dict,
    write_results,
)
from risqkd.noise import vacuum_variance

SMALL = {
    "system": {"n_tx": 2, "n_rx": 2, "ris_x": 2, "ris_y": 2},
    "sweep": {"variable": "distance_m", "values": [1.0, 3.0, 9.0]},
}


def small(**changes):
    raw = json.loads(json.dumps(SMALL))
    for key, val in changes.items():
        raw.setdefault(key, {}).update(val) if isinstance(val, dict) else raw.__setitem__(key, val)
    return from_dict(raw)


class TestConfig:
    def test_defaults_resolve(self):
        cfg = from_dict({})
        assert cfg.system.freq_thz == 15.0 and cfg.noise.signal_variance == 1000.0
        assert cfg.vacuum_variance == pytest.approx(vacuum_variance(15e12, 296.0))

    def test_round_trip(self):
        cfg = small()
        assert from_dict(to_dict(cfg)) == cfg

    @pytest.mark.parametrize(
        "raw, path",
        [
            ({"system": {"n_tx": 0}}, "system.n_tx"),
            ({"system": {"eta_a": 1.5}}, "system.eta_a"),
            ({"system": {"n_rx": "many"}}, "system.n_rx"),
            ({"system": {"bogus": 1}}, "system.bogus"),
            ({"noise": {"eve_d": 0.5}}, "noise.eve_d"),
            ({"sweep": {"values": []}}, "sweep.values"),
            ({"sweep": {"values": [3, 1]}}, "sweep.values"),
            ({"sweep": {"variable": "ris_elements", "values": [10]}}, "sweep.values"),
            ({"sweep": {"variable": "colour"}}, "sweep.variable"),
            ({"scenarios": ["d", "q"]}, "scenarios"),
            ({"phases": {"source": "lucky"}}, "phases.source"),
            ({"pso": {"particle_count": 0}}, "pso"),
            ({"secure_distance": {"min_m": 5, "max_m": 1}}, "secure_distance"),
            ({"output": {"format": "xml"}}, "output.format"),
            ({"extra": {}}, "extra"),
        ],
    )
    def test_diagnostic_names_field(self, raw, path):
        with pytest.raises(ConfigError, match=path.replace(".", r"\.")):
            from_dict(raw)

    def test_load_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(bad)


class TestSweep:
    def test_row_cardinality_and_order(self):
        cfg = small()
        rows = run_sweep(cfg)
        assert len(rows) == 3 * 4
        assert [(r.sweep_value, r.scenario) for r in rows] == [
            (v, s) for v in (1.0, 3.0, 9.0) for s in ("d", "t", "r", "global")
        ]
        assert all(r.skr_clamped >= 0 for r in rows)

    def test_parallel_matches_serial(self):
        cfg = small()
        a = [(r.skr_raw, r.holevo) for r in run_sweep(cfg)]
        b = [(r.skr_raw, r.holevo) for r in run_sweep(cfg, jobs=2)]
        assert a == b

    def test_other_sweep_variables(self):
        cfg = small(sweep={"variable": "ris_elements", "values": [1, 4, 9]}, scenarios=["d"])
        assert [r.position and len(r.position) - 2 for r in run_sweep(cfg)] == [1, 4, 9]
        cfg = small(sweep={"variable": "detector_noise", "values": [0.0, 0.1, 1.0]}, scenarios=["global"])
        skr = [r.skr_raw for r in run_sweep(cfg)]
        assert skr[0] > skr[1] > skr[2]
        cfg = small(sweep={"variable": "n_antennas", "values": [1, 2, 4]}, scenarios=["r"])
        assert len(run_sweep(cfg)) == 3

    def test_passivity_failure_reported_per_row(self):
        cfg = small(system={"n_tx": 16, "n_rx": 16}, sweep={"values": [1e-3, 2.0]})
        rows = run_sweep(cfg)
        bad = [r for r in rows if r.error]
        assert {r.sweep_value for r in bad} == {1e-3}
        assert all("PassivityError" in r.error and math.isnan(r.skr_raw) for r in bad)
        assert all(not r.error and r.skr_raw == r.skr_raw for r in rows if r.sweep_value == 2.0)

    def test_zero_phase_source(self):
        cfg = small(phases={"source": "zero"})
        res, position = evaluate(cfg, "d")
        np.testing.assert_array_equal(position[:-2], 0.0)


class TestOutput:
    def test_csv_round_trip(self, tmp_path):
        rows = run_sweep(small())
        path = emit_results(rows, tmp_path / "out.csv", "csv")
        back = read_csv(path)
        assert tuple(back[0].keys()) == CSV_HEADER
        for r, b in zip(rows, back):
            assert float(b["skr_raw"]) == pytest.approx(r.skr_raw, rel=1e-12, abs=0)
            assert float(b["mi_bits"]) == pytest.approx(r.mutual_information, rel=1e-12, abs=0)
            assert float(b["skr_clamped"]) >= 0

    def test_header_only_for_no_rows(self):
        buf = io.StringIO()
        write_results([], buf, "csv")
        assert buf.getvalue() == ",".join(CSV_HEADER) + "\n"

    def test_json_carries_resolved_config(self, tmp_path):
        cfg = small()
        path = emit_results(run_sweep(cfg), tmp_path / "out.json", "json", cfg)
        payload = json.loads(path.read_text())
        assert len(payload["rows"]) == 12
        derived = payload["config"]["derived"]
        sys_ = payload["config"]["system"]
        assert derived["vacuum_variance"] == pytest.approx(
            vacuum_variance(sys_["freq_thz"] * 1e12, sys_["temperature_k"]), rel=1e-14
        )
        assert from_dict({k: v for k, v in payload["config"].items() if k != "derived"}) == cfg

    def test_deterministic_bytes_apart_from_timing(self):
        def dump():
            buf = io.StringIO()
            write_results(run_sweep(small()), buf, "csv")
            return [line.rsplit(",", 2)[0] for line in buf.getvalue().splitlines()]

        assert dump() == dump()


class TestSecureDistance:
    def test_unreachable_threshold_gives_zero(self):
        cfg = small(scenarios=["d"])
        assert max_secure_distance(cfg, "d", threshold=10.0) == 0.0

    def test_matches_fine_grid_scan(self):
        cfg = small(secure_distance={"min_m": 0.5, "max_m": 60.0, "threshold_bits": 1e-6})
        got = max_secure_distance(cfg, "d")
        grid = np.arange(0.5, 60.0, 0.02)
        ok = [d for d in grid if evaluate(cfg, "d", d)[0].skr >= 1e-6]
        assert abs(got - max(ok)) <= 0.1

    def test_non_bracketing_interval(self):
        cfg = small(secure_distance={"min_m": 0.5, "max_m": 2.0, "threshold_bits": 1e-9})
        with pytest.raises(BracketError):
            max_secure_distance(cfg, "d")

    def test_table_collapses_distance_grid(self):
        cfg = small(scenarios=["d", "global"], secure_distance={"threshold_bits": 1e-6})
        rows = secure_distance_table(cfg)
        assert [(r.sweep_value, r.scenario) for r in rows] == [(5.0, "d"), (5.0, "global")]
        assert rows[0].distance_m >= rows[1].distance_m


class TestCli:
    def _config(self, tmp_path, **changes):
        path = tmp_path / "cfg.json"
        raw = json.loads(json.dumps(SMALL))
        raw.update(changes)
        path.write_text(json.dumps(raw))
        return path

    def test_sweep_csv(self, tmp_path):
        out = tmp_path / "rows.csv"
        assert cli.run(["sweep", "--config", str(self._config(tmp_path)), "--output", str(out)]) == 0
        with out.open() as fh:
            assert len(list(csv.DictReader(fh))) == 12

    def test_sweep_json_seed_override(self, tmp_path):
        out = tmp_path / "rows.json"
        code = cli.run(["sweep", "--config", str(self._config(tmp_path)), "--output", str(out),
                        "--format", "json", "--seed", "9"])
        assert code == 0
        assert json.loads(out.read_text())["config"]["phases"]["seed"] == 9

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = self._config(tmp_path, system={"n_tx": -1})
        assert cli.run(["sweep", "--config", str(path)]) == 2
        assert "system.n_tx" in capsys.readouterr().err

    def test_bad_jobs(self, tmp_path):
        assert cli.run(["sweep", "--config", str(self._config(tmp_path)), "--jobs", "0"]) == 2

    def test_numerical_error_exit_code(self, tmp_path):
        path = self._config(tmp_path, system={"n_tx": 16, "n_rx": 16}, sweep={"values": [1e-3, 1.0]})
        out = tmp_path / "rows.csv"
        assert cli.run(["sweep", "--config", str(path), "--output", str(out)]) == 3
        assert len(read_csv(out)) == 8  # the sweep still ran to completion

    def test_validate_config(self, tmp_path, capsys):
        assert cli.run(["validate-config", "--config", str(self._config(tmp_path))]) == 0
        assert json.loads(capsys.readouterr().out)["derived"]["ris_elements"] == 4

    def test_secure_distance(self, tmp_path):
        path = self._config(tmp_path, scenarios=["d"], secure_distance={"threshold_bits": 1e-6})
        out = tmp_path / "sd.csv"
        assert cli.run(["secure-distance", "--config", str(path), "--output", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 1 and float(rows[0]["secure_distance_m"]) > 0

    def test_secure_distance_bracket_error(self, tmp_path):
        path = self._config(tmp_path, scenarios=["d"],
                            secure_distance={"threshold_bits": 1e-9, "min_m": 0.5, "max_m": 1.0})
        assert cli.run(["secure-distance", "--config", str(path)]) == 2

    def test_optimize(self, tmp_path):
        path = self._config(tmp_path, scenarios=["d"], pso={"particle_count": 6, "iteration_count": 5})
        out = tmp_path / "opt.json"
        assert cli.run(["optimize", "--config", str(path), "--output", str(out), "--format", "json"]) == 0
        row = json.loads(out.read_text())["rows"][0]
        assert row["phase_source"] == "optimized" and len(row["position"]) == 4 + 2
