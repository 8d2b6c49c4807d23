import csv
import json

import numpy as np
import pytest

from mqaoa.cli import build_config, main, _parser
from mqaoa.driver import MqaoaConfig, derive_seed, level_partition
from mqaoa.experiments import (
    ExperimentConfig,
    make_instance,
    run_ensemble,
    run_rgstats,
    run_ringscan,
    run_solve,
    summarize,
    table_path,
)
from mqaoa.ising import dumps, make_cycle, maxcut_to_ising
from mqaoa.qaoa import OptimizerConfig

FAST = MqaoaConfig(rounds=2, matchings=1, optimizer=OptimizerConfig(restarts=2))


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig(kind="ensemble", family="regular", n=10, count=3, mqaoa=FAST, seed=9)
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg

    @pytest.mark.parametrize(
        "d",
        [
            {"kind": "plot"},
            {"family": "tree"},
            {"count": 0},
            {"family": "cycle", "n": 7},
            {"family": "erdos_renyi", "rho": 0.0},
            {"family": "regular", "n": 5, "degree": 3},
            {"family": "file"},
            {"nonsense": 1},
            {"timeout": 0},
        ],
    )
    def test_invalid(self, d):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict(d)

    def test_table_path(self, tmp_path):
        assert table_path(tmp_path / "r.jsonl") == tmp_path / "r.csv"
        assert table_path(tmp_path / "r.csv") == tmp_path / "r.table.csv"

    def test_instances_seeded(self):
        cfg = ExperimentConfig(family="erdos_renyi", n=12, rho=0.3, seed=4)
        g0, s0 = make_instance(cfg, 0)
        g1, s1 = make_instance(cfg, 1)
        assert s0 == derive_seed(4, 0, 0) and s0 != s1
        assert make_instance(cfg, 0)[0] == g0


class TestSolve:
    def test_k4_exact(self, tmp_path):
        cfg = ExperimentConfig(family="regular", n=4, degree=3, mqaoa=FAST, out=str(tmp_path / "k4.jsonl"))
        rec = run_solve(cfg)
        assert rec.status == "ok"
        assert rec.exact_max == 4.0 and rec.cut == 4.0 and rec.ratio == 1.0
        row = read_jsonl(tmp_path / "k4.jsonl")[0]
        assert row["ratio"] == 1.0 and "wall_time" not in row

    def test_repeatable_files(self, tmp_path):
        outs = []
        for k in range(2):
            cfg = ExperimentConfig(family="cycle", n=8, mqaoa=FAST, seed=3, out=str(tmp_path / f"run{k}.jsonl"))
            run_solve(cfg)
            outs.append(((tmp_path / f"run{k}.jsonl").read_bytes(), (tmp_path / f"run{k}.csv").read_bytes()))
        assert outs[0] == outs[1]

    def test_timing_opt_in(self, tmp_path):
        cfg = ExperimentConfig(family="cycle", n=4, mqaoa=FAST, timing=True, out=str(tmp_path / "t.jsonl"))
        run_solve(cfg)
        assert read_jsonl(tmp_path / "t.jsonl")[0]["wall_time"] > 0

    def test_timeout_recorded(self):
        cfg = ExperimentConfig(family="cycle", n=8, mqaoa=FAST, timeout=1e-9)
        rec = run_solve(cfg)
        assert rec.status == "timeout"

    def test_file_family(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text(dumps(make_cycle(6)))
        rec = run_solve(ExperimentConfig(family="file", graph_file=str(path), mqaoa=FAST))
        assert rec.n == 6 and rec.exact_max == 6.0

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        cfg = ExperimentConfig(family="cycle", n=4, mqaoa=FAST, out=str(blocker / "sub" / "r.jsonl"))
        with pytest.raises(OSError, match="cannot write results"):
            run_solve(cfg)


class TestEnsemble:
    def test_single_instance_summary(self):
        records, summary = run_ensemble(ExperimentConfig(kind="ensemble", family="regular", n=8, count=1, mqaoa=FAST))
        rec = records[0]
        assert [row["mean_err_post_qaoa"] for row in summary] == rec.err_qaoa
        assert [row["mean_err_post_rg"] for row in summary] == rec.err_rg

    def test_summary_recomputed_from_rows(self, tmp_path):
        out = tmp_path / "ens.jsonl"
        cfg = ExperimentConfig(kind="ensemble", family="erdos_renyi", n=8, rho=0.4, count=3, mqaoa=FAST, out=str(out))
        run_ensemble(cfg)
        rows = read_jsonl(out)
        table = read_csv(table_path(out))
        assert len(rows) == 3 and [r["instance"] for r in rows] == [0, 1, 2]
        for k, line in enumerate(table):
            assert int(line["round"]) == k + 1
            assert abs(float(line["mean_err_post_qaoa"]) - np.mean([r["err_qaoa"][k] for r in rows])) < 1e-12
            assert abs(float(line["mean_err_post_rg"]) - np.mean([r["err_rg"][k] for r in rows])) < 1e-12
        for r in rows:
            assert all(0 <= e <= 1 for e in r["err_qaoa"] + r["err_rg"])

    def test_worker_pool_matches_serial(self, tmp_path):
        texts = []
        for workers in (1, 2):
            out = tmp_path / f"w{workers}.jsonl"
            cfg = ExperimentConfig(kind="ensemble", family="cycle", n=6, count=3, mqaoa=FAST, workers=workers, out=str(out))
            run_ensemble(cfg)
            texts.append((out.read_bytes(), table_path(out).read_bytes()))
        assert texts[0] == texts[1]

    def test_failures_excluded_from_summary(self):
        cfg = ExperimentConfig(kind="ensemble", family="cycle", n=6, count=2, mqaoa=FAST)
        records, _ = run_ensemble(cfg)
        records[1].status = "failed"
        assert summarize(records) == summarize(records[:1])


class TestRingscanRgstats:
    def test_ringscan_rows(self):
        cfg = ExperimentConfig(kind="ringscan", family="cycle", n=8, depths=(1, 2), mqaoa=FAST)
        records, rows = run_ringscan(cfg)
        assert [r.depth for r in records] == [1, 2]
        assert {(row["depth"], row["round"]) for row in rows} == {(1, 1), (1, 2), (2, 1), (2, 2)}
        # depth-1 round-1 error on a ring is the (2p+1)/(2p+2) gap
        assert rows[0]["err_post_qaoa"] == pytest.approx(0.25, abs=2e-3)

    def test_ringscan_needs_cycle(self):
        with pytest.raises(ValueError):
            run_ringscan(ExperimentConfig(kind="ringscan", family="regular", n=8, mqaoa=FAST))

    def test_rgstats_cycle_ledger(self):
        cfg = ExperimentConfig(kind="rgstats", family="cycle", n=16, mqaoa=FAST, rg_base_size=4, seed=2)
        records, rows = run_rgstats(cfg)
        rec = records[0]
        mcfg = MqaoaConfig(seed=derive_seed(2, 0, 1))
        part = level_partition(maxcut_to_ising(make_cycle(16)), mcfg, (0, 0))
        assert rec.v_m[1] == 16 - len(part.blocks)
        assert rec.v_m[-1] <= 4
        assert rows[0] == {"step": 0, "mean_v": 16.0, "mean_d": 2.0}


class TestCli:
    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"family": "cycle", "n": 8, "seed": 1, "mqaoa": {"rounds": 4, "depth": 2}}))
        args = _parser().parse_args(["solve", "--config", str(path), "--seed", "5", "--rounds", "2", "--restarts", "3"])
        cfg = build_config(args)
        assert cfg.seed == 5 and cfg.n == 8
        assert cfg.mqaoa.rounds == 2 and cfg.mqaoa.depth == 2 and cfg.mqaoa.optimizer.restarts == 3

    def test_solve(self, tmp_path, capsys):
        out = tmp_path / "s.jsonl"
        code = main(["solve", "--family", "cycle", "--n", "6", "--rounds", "2", "--matchings", "1", "--restarts", "2", "--out", str(out)])
        assert code == 0
        assert "status=ok" in capsys.readouterr().out
        assert out.exists() and table_path(out).exists()

    def test_invalid_config(self, tmp_path, capsys):
        assert main(["solve", "--family", "cycle", "--n", "7"]) == 2
        assert main(["solve", "--config", str(tmp_path / "missing.json")]) == 2
        assert main(["solve", "--rdm-mode", "shots:abc"]) == 2

    def test_failed_record_exit_code(self):
        assert main(["solve", "--family", "cycle", "--n", "8", "--timeout", "1e-9"]) == 1

    def test_oracle(self, capsys):
        assert main(["oracle"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 3 and all(line.startswith("PASS") for line in lines)

    def test_rgstats_and_ringscan(self, capsys):
        assert main(["rgstats", "--family", "erdos_renyi", "--n", "10", "--rho", "0.4", "--count", "2", "--restarts", "1"]) == 0
        assert "mean_v_m" in capsys.readouterr().out
        assert main(["ringscan", "--n", "6", "--depths", "1", "--rounds", "1", "--matchings", "1", "--restarts", "2"]) == 0
        assert "err_post_qaoa" in capsys.readouterr().out

    def test_ensemble(self, capsys):
        assert main(["ensemble", "--family", "regular", "--n", "6", "--count", "2", "--rounds", "1", "--matchings", "1", "--restarts", "2"]) == 0
        assert "exactly solved" in capsys.readouterr().out
