import csv
import json
import math

import numpy as np
import pytest

from leadsel.bench import cli
from leadsel.bench.experiments import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    default_rg_radius,
    deviation_stats,
    fit_scaling_exponent,
    run_experiment,
)
from leadsel.bench.report import CELL_FIELDS, emit_report, fmt
from leadsel.graph import gen_er
from leadsel.greedy import ordinary_greedy, stochastic_greedy


def quick(kind, **kw):
    base = {"kind": kind, "warmup": False}
    base.update(kw)
    return ExperimentConfig.from_dict(base)


# -- config -------------------------------------------------------------------------


class TestConfig:
    @pytest.mark.parametrize(
        "bad",
        [
            {"kind": "nope"},
            {"kind": "scaling", "seeds": []},
            {"kind": "scaling", "n": [1]},
            {"kind": "scaling", "k": None},
            {"kind": "scaling", "k_fraction": 0.1},
            {"kind": "scaling", "k": None, "k_fraction": 1.5},
            {"kind": "scaling", "epsilon": [1.0]},
            {"kind": "scaling", "algorithms": ["magic"]},
            {"kind": "scaling", "topology": "torus"},
            {"kind": "scaling", "oracle": "fast"},
            {"kind": "scaling", "oracle": {"lazy": "fast"}},
            {"kind": "sbm-distributed", "partition": "metis"},
            {"kind": "scaling", "colour": "red"},
        ],
    )
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)

    def test_k_fraction(self):
        cfg = quick("scaling", k=None, k_fraction=0.05)
        assert [cfg.k_for(n) for n in (100, 200, 400, 800)] == [5, 10, 20, 40]

    def test_oracle_per_algorithm(self):
        cfg = quick("scaling", oracle={"ordinary": "naive"})
        assert cfg.oracle_for("ordinary") == "naive"
        assert cfg.oracle_for("lazy") == "accelerated"

    def test_rg_radius_default(self):
        # mean degree ~ n*pi*r^2 = n*p, floored at the connectivity radius
        assert default_rg_radius(1000, 0.05) == pytest.approx(math.sqrt(0.05 / math.pi))
        assert default_rg_radius(100, 0.001) == pytest.approx(
            math.sqrt(2 * math.log(100) / (math.pi * 100)))
        assert default_rg_radius(2, 1.0) == pytest.approx(math.sqrt(1 / math.pi))

    def test_round_trip(self):
        cfg = quick("monte-carlo", n=[30], k=3)
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


# -- fitting --------------------------------------------------------------------------


class TestFit:
    def test_cubic(self):
        fit = fit_scaling_exponent([(n, 2.0 * n**3) for n in (100, 200, 400)])
        assert fit.d == pytest.approx(3.0, abs=1e-9)
        assert fit.a == pytest.approx(2.0, rel=1e-9)
        assert fit.r2 == pytest.approx(1.0)

    def test_constant(self):
        fit = fit_scaling_exponent([(n, 7.0) for n in (10, 20, 40, 80)])
        assert fit.d == pytest.approx(0.0, abs=1e-12)
        assert fit.a == pytest.approx(7.0)

    def test_ordinary_call_closed_form(self):
        # sum_{i<k}(n-i) with k = n/20 is ~ n^2/20, exponent 2
        pts = []
        for n in (100, 200, 400, 800):
            k = n // 20
            pts.append((n, sum(n - i for i in range(k))))
        assert fit_scaling_exponent(pts).d == pytest.approx(2.0, abs=0.02)

    def test_noisy_interval_contains_truth(self):
        rng = np.random.default_rng(0)
        pts = [(n, n**1.5 * math.exp(rng.normal(0, 0.02))) for n in (50, 100, 200, 400, 800)]
        lo, hi = fit_scaling_exponent(pts).d_ci
        assert lo < 1.5 < hi

    @pytest.mark.parametrize(
        "pts",
        [[(1, 1), (2, 2)], [(1, 1), (2, 0), (3, 3)], [(-1, 1), (2, 2), (3, 3)], [(5, 1), (5, 2), (5, 3)]],
    )
    def test_invalid(self, pts):
        with pytest.raises(ValueError):
            fit_scaling_exponent(pts)


# -- deviation ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def er40():
    return gen_er(40, 0.15, 3)


def _tag(trace, label="g"):
    trace.params["graph"] = label
    return trace


class TestDeviation:
    def test_identical_is_zero(self, er40):
        base = _tag(ordinary_greedy(er40, 4))
        st = deviation_stats(base, [_tag(ordinary_greedy(er40, 4))], 4)
        assert st["mean"] == st["max"] == 0.0 and st["count"] == 1

    def test_one_percent(self, er40):
        base = _tag(ordinary_greedy(er40, 3))
        worse = _tag(ordinary_greedy(er40, 3))
        worse.records[-1].objective *= 1.01
        st = deviation_stats(base, [worse], 3)
        assert st["mean"] == pytest.approx(1.0, rel=1e-9)

    def test_stochastic_nonnegative(self, er40):
        base = _tag(ordinary_greedy(er40, 5))
        cands = [_tag(stochastic_greedy(er40, 5, 0.5, seed=s)) for s in range(10)]
        st = deviation_stats(base, cands, 1)
        # iteration 1 of ordinary is the exact single-leader optimum
        assert st["min"] >= -1e-9
        assert st["count"] == 10 and st["p5"] <= st["p50"] <= st["p95"]

    def test_mismatch(self, er40):
        base = _tag(ordinary_greedy(er40, 3), "a")
        with pytest.raises(ValueError, match="different instances"):
            deviation_stats(base, [_tag(ordinary_greedy(er40, 3), "b")], 2)
        with pytest.raises(ValueError):
            deviation_stats(base, [_tag(ordinary_greedy(er40, 2), "a")], 3)
        with pytest.raises(ValueError):
            deviation_stats(base, [], 1)


# -- experiments -----------------------------------------------------------------------


class TestExperiments:
    def test_scaling_cells(self):
        rep = run_experiment(quick("scaling", n=[50, 100], k=5, algorithms=["ordinary"], seeds=[1]))
        assert len(rep.cells) == 2 and not rep.failed
        assert all(len(c.trace.records) == 5 for c in rep.cells)
        assert [r["n"] for r in rep.tables["scaling"]] == [50, 100]
        assert rep.tables["scaling"][0]["mean_calls"] == sum(50 - i for i in range(5))
        assert rep.fits == []  # fewer than 3 sizes

    def test_scaling_fits(self):
        cfg = quick("scaling", n=[40, 80, 160], k=None, k_fraction=0.05,
                    algorithms=["ordinary", "stochastic"], epsilon=[0.5], seeds=[0], er_p=0.15)
        rep = run_experiment(cfg)
        fits = {(f["algorithm"], f["metric"]): f for f in rep.fits}
        assert set(fits) == {("ordinary", "calls"), ("ordinary", "seconds"),
                             ("stochastic", "calls"), ("stochastic", "seconds")}
        assert fits[("ordinary", "calls")]["d"] == pytest.approx(2.0, abs=0.1)

    def test_lazy_profile(self):
        cfg = quick("lazy-profile", n=[60], topologies=["er", "ba"], k_list=[2, 5], seeds=[0])
        rep = run_experiment(cfg)
        rows = rep.tables["lazy_profile"]
        assert [(r["topology"], r["k"]) for r in rows] == [("er", 2), ("er", 5), ("ba", 2), ("ba", 5)]
        assert all(r["call_ratio"] >= 1.0 for r in rows)

    def test_monte_carlo(self):
        cfg = quick("monte-carlo", n=[40], k=3, epsilon=[0.5], seeds=list(range(6)), er_p=0.15, bins=4)
        rep = run_experiment(cfg)
        assert len(rep.cells) == 7
        assert [r["k"] for r in rep.tables["deviation_by_k"]] == [1, 2, 3]
        assert rep.tables["deviation_summary"][0]["count"] == 6
        assert sum(r["count"] for r in rep.tables["histogram"]) == 6

    def test_epsilon_sweep(self):
        cfg = quick("epsilon-sweep", n=[40], k=3, epsilon=[0.1, 0.5], seeds=[0, 1], er_p=0.15)
        rep = run_experiment(cfg)
        assert len(rep.tables["speedup"]) == 4
        assert all(r["call_ratio"] >= 1.0 for r in rep.tables["speedup"])

    def test_sbm(self):
        cfg = quick("sbm-distributed", c=[2], n_c=[30], p_in=0.3, p_out_ratio=[0.3], k=3,
                    epsilon=[0.5], seeds=[0])
        rep = run_experiment(cfg)
        (row,) = rep.tables["sbm_distributed"]
        assert row["c"] == 2 and row["deviation_pct"] < 10

    def test_failed_cells_recorded(self):
        rep = run_experiment(quick("scaling", n=[6], k=10, algorithms=["ordinary"], seeds=[0], er_p=0.9))
        assert len(rep.failed) == 1 and "ValueError" in rep.failed[0].error

    def test_parallel_matches_serial(self):
        cfg = quick("scaling", n=[30, 40], k=3, algorithms=["lazy"], seeds=[0, 1], er_p=0.2)
        a, b = run_experiment(cfg), run_experiment(cfg, jobs=2)
        assert [c.trace.leaders for c in a.cells] == [c.trace.leaders for c in b.cells]


# -- report output ------------------------------------------------------------------------


class TestReport:
    def test_fmt(self):
        assert fmt(None) == "" and fmt(True) == "true" and fmt(0.1 + 0.2) == "0.3"

    def test_empty_report_header_only(self, tmp_path):
        emit_report(ExperimentReport(config={}), "csv", tmp_path)
        assert (tmp_path / "cells.csv").read_text() == ",".join(CELL_FIELDS) + "\n"

    def test_rows_and_stability(self, tmp_path):
        rep = run_experiment(quick("scaling", n=[30], k=4, algorithms=["ordinary", "lazy"], seeds=[0], er_p=0.2))
        emit_report(rep, "csv", tmp_path / "a")
        emit_report(rep, "csv", tmp_path / "b")
        with open(tmp_path / "a" / "cells.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        assert rows[0]["gain"] == "" and rows[1]["gain"] != ""
        for name in ("cells.csv", "scaling.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_json(self, tmp_path):
        rep = run_experiment(quick("scaling", n=[30], k=2, algorithms=["ordinary"], seeds=[0], er_p=0.2))
        (path,) = emit_report(rep, "json", tmp_path)
        data = json.loads(path.read_text())
        assert data["cells"][0]["trace"]["records"][0]["gain"] is None
        assert data["config"]["kind"] == "scaling"

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report(ExperimentReport(config={}), "xml", tmp_path)


# -- CLI ----------------------------------------------------------------------------------


class TestCli:
    def _cfg(self, tmp_path, text):
        p = tmp_path / "c.yaml"
        p.write_text(text)
        return str(p)

    def test_success(self, tmp_path):
        cfg = self._cfg(tmp_path, "n: [30]\nk: 3\nalgorithms: [ordinary]\nseeds: [0]\ner_p: 0.2\nwarmup: false\n")
        assert cli.main(["scaling", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "cells.csv").exists()

    def test_config_error(self, tmp_path, capsys):
        cfg = self._cfg(tmp_path, "n: [30]\nepsilon: [2.0]\n")
        assert cli.main(["scaling", "--config", cfg, "--out", str(tmp_path)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_kind_mismatch(self, tmp_path):
        cfg = self._cfg(tmp_path, "kind: monte-carlo\n")
        assert cli.main(["scaling", "--config", cfg]) == 1

    def test_partial_failure(self, tmp_path):
        cfg = self._cfg(tmp_path, "n: [6, 30]\nk: 10\nalgorithms: [ordinary]\nseeds: [0]\ner_p: 0.9\nwarmup: false\n")
        assert cli.main(["scaling", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_env_out_and_seed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LEADSEL_OUT", str(tmp_path / "env"))
        cfg = self._cfg(tmp_path, "n: [30]\nk: 2\nalgorithms: [stochastic]\nepsilon: [0.5]\ner_p: 0.2\nwarmup: false\n")
        assert cli.main(["scaling", "--config", cfg, "--seed", "5", "--format", "json"]) == 0
        data = json.loads((tmp_path / "env" / "report.json").read_text())
        assert [c["params"]["seed"] for c in data["cells"]] == [5]

    def test_fit(self, tmp_path, capsys):
        p = tmp_path / "pts.csv"
        p.write_text("n,y\n100,2000000\n200,16000000\n400,128000000\n")
        assert cli.main(["fit", str(p)]) == 0
        assert "d=3 " in capsys.readouterr().out
        p.write_text("n,y\n100,1\n")
        assert cli.main(["fit", str(p)]) == 1
