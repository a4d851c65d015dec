import json
import math
import re

import pytest

from spf.experiments import cli
from spf.experiments.config import (
    CellParams,
    ConfigError,
    ExperimentConfig,
    load_config,
    measurements_for,
    parse_config,
)
from spf.experiments.harness import derive_seed, run_grid, run_trial, success_rates
from spf.experiments.report import CSV_HEADER, heatmap_svg, read_csv, render_heatmap, write_csv

SMALL = """
# tiny grid
m = [40, 60]
n1 = 16
n2 = 16
s1 = [2, 3]
s2 = 2
mu = 0.9
trials_per_cell = 3
base_seed = 5
"""


def cell(**kw):
    base = dict(m=147, n1=64, n2=64, s1=3, s2=3, k=1, xi=0.8, mu=0.8, nu=0.0)
    base.update(kw)
    return CellParams(**base)


class TestConfig:
    def test_parse(self):
        cfg = parse_config(SMALL)
        assert cfg.trials_per_cell == 3 and cfg.base_seed == 5
        cells = cfg.cells()
        assert len(cells) == 4
        assert [(c.m, c.s1) for c in cells] == [(40, 2), (40, 3), (60, 2), (60, 3)]
        assert all(c.xi == 0.9 and c.k == 1 and c.nu == 0.0 for c in cells)
        assert cfg.varying_axes() == ["m", "s1"]

    def test_m_factor(self):
        cfg = parse_config("m_factor = 8\nn1 = 64\nn2 = 64\ns1 = 3\ns2 = 3\nmu = 0.8\n")
        assert cfg.cells()[0].m == math.ceil(8 * 6 * math.log(64 / 3)) == 147
        assert measurements_for(1, 64, 32, 4, 4) == math.ceil(8 * math.log(16))

    def test_comments_and_solver(self):
        cfg = parse_config(SMALL + 'solver.tie_break = "highest-index"  # ties\n'
                           "solver.max_outer_iter = 7\n")
        assert cfg.solver_options() == {"tie_break": "highest-index", "max_outer_iter": 7}

    def test_thresholds(self):
        cfg = parse_config(SMALL)
        assert cfg.threshold_for(0.0) == 1e-4
        assert cfg.threshold_for(0.01) == pytest.approx(8.3 * 0.01 + 1e-2)
        assert parse_config(SMALL + "success_threshold = 0.5\n").threshold_for(0.01) == 0.5

    @pytest.mark.parametrize("text", [
        SMALL + "bogus = 1\n",
        SMALL + "m_factor = 2\n",
        SMALL.replace("n1 = 16", ""),
        SMALL + "trials_per_cell = 0\n",
        SMALL + "s2 = 2.5\n",
        SMALL + "n1 = [\n",
        SMALL + "just words\n",
        SMALL + 'solver.tie_break = "random"\n',
        SMALL + "solver.unknown = 1\n",
        SMALL + "base_seed = [1, 2]\n",
        SMALL + 'tail = "cauchy"\n',
    ])
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")


def test_derive_seed_stable():
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
    assert 0 <= derive_seed("x") < 2**64


class TestRunTrial:
    def test_deterministic(self):
        a = run_trial(cell(), 123, 1e-4)
        b = run_trial(cell(), 123, 1e-4)
        assert repr(a.as_dict() | {"wall_ms": 0}) == repr(b.as_dict() | {"wall_ms": 0})

    def test_regime_success(self):
        hits = sum(run_trial(cell(), derive_seed(1, t), 1e-4).success for t in range(100))
        assert hits >= 90

    def test_underscaled(self):
        c = cell(m=6)
        hits = sum(run_trial(c, derive_seed(2, t), 1e-4).success for t in range(50))
        assert hits <= 0.2 * 50

    def test_infeasible_generator(self):
        rec = run_trial(cell(mu=0.3, xi=0.3), 1, 1e-4)
        assert rec.status == "generation_failed" and not rec.success
        assert math.isnan(rec.rel_error)

    def test_measure_rip(self):
        rec = run_trial(cell(m=60, n1=16, n2=16, s1=2, s2=2), 4, 1e-4, measure_rip=True,
                        rip_trials=20)
        assert rec.delta_hat is not None and rec.delta_hat >= 0

    def test_noisy_bound(self):
        nu = 0.01
        recs = [run_trial(cell(nu=nu), derive_seed(3, t), 8.3 * nu + 1e-2) for t in range(30)]
        good = [r for r in recs if r.converged and r.status == "ok"]
        assert len(good) >= 25
        assert all(r.rel_error <= 8.3 * nu + 1e-2 for r in good)


class TestRunGrid:
    def test_single_cell_matches_trial(self):
        cfg = ExperimentConfig(axes=dict(m=60, n1=16, n2=16, s1=2, s2=2, mu=0.9),
                               trials_per_cell=1, base_seed=9)
        (rec,) = run_grid(cfg)
        ref = run_trial(cfg.cells()[0], derive_seed(9, 0, 0), 1e-4,
                        solver_options=cfg.solver_options())
        assert repr(rec.as_dict() | {"wall_ms": 0}) == repr(ref.as_dict() | {"wall_ms": 0})

    def test_canonical_order_any_workers(self):
        cfg = ExperimentConfig(axes=dict(m=[40, 60], n1=16, n2=16, s1=[2, 3], s2=2, mu=0.9),
                               trials_per_cell=3)
        serial = run_grid(cfg, workers=1)
        parallel = run_grid(cfg, workers=2)
        assert len(serial) == 12
        keys = [(r.m, r.s1, r.trial) for r in serial]
        assert keys == sorted(keys)
        strip = lambda recs: [repr(r.as_dict() | {"wall_ms": 0}) for r in recs]
        assert strip(serial) == strip(parallel)

    def test_monotone_in_m(self):
        cfg = ExperimentConfig(
            axes=dict(m=[10, 30, 60, 100, 160], n1=32, n2=32, s1=2, s2=2, mu=0.8),
            trials_per_cell=12,
        )
        rates = list(success_rates(run_grid(cfg), ["m"]).values())
        assert all(0 <= r <= 1 for r in rates)
        # success counts may dip by at most 3 trials between neighbours
        counts = [round(r * 12) for r in rates]
        assert all(b >= a - 3 for a, b in zip(counts, counts[1:]))
        assert counts[-1] >= counts[0] + 6


def _records(n=4):
    cfg = ExperimentConfig(axes=dict(m=[60, 90], n1=16, n2=16, s1=[2, 3], s2=2, mu=0.9),
                           trials_per_cell=1)
    return run_grid(cfg)[:n]


class TestCsv:
    def test_one_record(self, tmp_path):
        path = tmp_path / "r.csv"
        write_csv(_records(1), path)
        lines = path.read_bytes().split(b"\r\n")
        assert len(lines) == 3 and lines[-1] == b""
        assert lines[0].decode().split(",") == list(CSV_HEADER)

    def test_round_trip(self, tmp_path):
        recs = _records()
        path = tmp_path / "r.csv"
        write_csv(recs, path)
        assert repr(read_csv(path)) == repr(recs)

    def test_without_timing(self, tmp_path):
        path = tmp_path / "r.csv"
        write_csv(_records(), path, include_timing=False)
        assert "wall_ms" not in path.read_text().splitlines()[0]
        assert all(math.isnan(r.wall_ms) for r in read_csv(path))

    def test_unwritable(self, tmp_path):
        with pytest.raises(OSError, match="r.csv"):
            write_csv(_records(1), tmp_path / "missing" / "r.csv")


class TestHeatmap:
    def test_one_cell_per_grid_point(self):
        svg = heatmap_svg(_records(), "m", "s1")
        assert len(re.findall(r'<rect class="cell"', svg)) == 4
        rates = [float(r) for r in re.findall(r'data-rate="([^"]+)"', svg)]
        assert all(0 <= r <= 1 for r in rates)

    def test_all_success(self):
        recs = [r for r in _records() if r.success]
        assert recs
        svg = heatmap_svg(recs, "m", "s1")
        assert set(re.findall(r">(\d\.\d\d)</text>", svg)) == {"1.00"}

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            heatmap_svg(_records(), "m", "banana")

    def test_render(self, tmp_path):
        path = tmp_path / "h.svg"
        render_heatmap(_records(), "m", "s1", path)
        assert path.read_text().startswith("<svg")


class TestCli:
    def _config(self, tmp_path, extra=""):
        path = tmp_path / "grid.cfg"
        path.write_text(SMALL.replace("trials_per_cell = 3", "trials_per_cell = 1") + extra)
        return path

    def test_run_and_plot(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli.main(["run", str(self._config(tmp_path)), "--out", str(out)]) == 0
        csv_path = out / "results.csv"
        assert len(read_csv(csv_path)) == 4
        assert (out / "results.timing.csv").exists()
        svg = tmp_path / "h.svg"
        assert cli.main(["plot", str(csv_path), "--x", "m", "--y", "s1", "--out", str(svg)]) == 0
        assert svg.exists()

    def test_invalid_config(self, tmp_path):
        assert cli.main(["run", str(self._config(tmp_path, "oops = 1\n"))]) == 1
        assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 1

    def test_bad_arguments(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["theory", "--delta", "x", "--nu", "0"])
        assert info.value.code == 1

    def test_runtime_failure(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        cfg = self._config(tmp_path)
        assert cli.main(["run", str(cfg), "--out", str(blocker / "sub")]) == 2

    def test_plot_bad_axis(self, tmp_path):
        out = tmp_path / "out"
        cli.main(["run", str(self._config(tmp_path)), "--out", str(out)])
        assert cli.main(["plot", str(out / "results.csv"), "--x", "m", "--y", "zz"]) == 1

    def test_theory(self, capsys):
        assert cli.main(["theory", "--delta", "0.04", "--nu", "0.04"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        record = json.loads(out[-1])
        assert record["c_delta"] == pytest.approx(2.8649, abs=1e-4)
        assert record["m_delta_nu"] == pytest.approx(0.1632)
        assert any(line.startswith("omega_sup") for line in out[:-1])

    def test_theory_infinite_bound(self, capsys):
        assert cli.main(["theory", "--delta", "0.04", "--nu", "0.04", "--pu", "0.05"]) == 0
        record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert record["angle_bound"] == "inf"

    def test_theory_domain_error(self):
        assert cli.main(["theory", "--delta", "0.9", "--nu", "0"]) == 1
