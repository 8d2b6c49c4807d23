"""Experiment orchestration: single solves, ensembles, RG shrinkage, ring scans.

Every experiment writes

* ``<out>``: one JSON object per line, one line per instance, in instance order;
* ``<out stem>.csv``: a flat table for plotting (see :func:`table_path`).

Both files are pure functions of the configuration and master seed. Wall-clock
times are only written when ``timing`` is enabled.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .driver import (
    BudgetExceeded,
    LevelTrace,
    MqaoaConfig,
    derive_seed,
    level_partition,
    matchable,
    rg_step,
    run_mqaoa,
)
from .ising import (
    ENUMERATION_CAP,
    Graph,
    cut_value,
    loads,
    make_cycle,
    make_erdos_renyi,
    make_random_regular,
    max_cut,
    maxcut_to_ising,
)
from .qaoa import OptimizerConfig

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "make_instance",
    "solve_instance",
    "run_solve",
    "run_ensemble",
    "run_rgstats",
    "run_ringscan",
    "summarize",
    "rg_shrinkage",
    "write_outputs",
]

log = logging.getLogger(__name__)

KINDS = ("solve", "ensemble", "rgstats", "ringscan")
FAMILIES = ("cycle", "regular", "erdos_renyi", "file")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "solve"
    family: str = "cycle"
    n: int = 16
    degree: int = 3
    rho: float = 0.1
    graph_file: str | None = None
    count: int = 1
    depths: tuple[int, ...] = (1, 2)
    rg_base_size: int = 4
    mqaoa: MqaoaConfig = field(default_factory=MqaoaConfig)
    out: str | None = None
    seed: int = 0
    timeout: float = 300.0
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown graph family {self.family!r}")
        if self.count < 1 or self.workers < 1:
            raise ValueError("count and workers must be >= 1")
        if self.family == "file" and not self.graph_file:
            raise ValueError("family 'file' needs graph_file")
        if self.family == "cycle" and (self.n < 4 or self.n % 2):
            raise ValueError("cycle family needs an even n >= 4")
        if self.family == "erdos_renyi" and not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        if self.family == "regular" and (self.degree >= self.n or (self.n * self.degree) % 2):
            raise ValueError(f"no {self.degree}-regular graph on {self.n} vertices")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        mq = dict(d.pop("mqaoa", {}) or {})
        opt = mq.pop("optimizer", None)
        if opt is not None:
            mq["optimizer"] = OptimizerConfig(**opt)
        if "depths" in d:
            d["depths"] = tuple(d["depths"])
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(mqaoa=MqaoaConfig(**mq), **d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["depths"] = list(self.depths)
        d["mqaoa"].pop("deadline", None)
        return d


@dataclass
class ExperimentRecord:
    """Result row for one instance.

    ``err_qaoa[k]`` and ``err_rg[k]`` are ``1 - r`` after the QAOA and after
    the RG step of round ``k`` (best over matchings). ``ratio`` is the best
    exactly evaluated cut over the maximum cut; ``ratio_variational`` uses the
    lowest expected energy instead.
    """

    instance: int
    seed: int
    n: int
    num_edges: int
    status: str = "ok"
    error: str | None = None
    depth: int | None = None
    exact_max: float | None = None
    cut: float | None = None
    bits: str | None = None
    ratio: float | None = None
    ratio_variational: float | None = None
    err_qaoa: list[float] = field(default_factory=list)
    err_rg: list[float] = field(default_factory=list)
    rounds_used: int = 0
    v_m: list[int] = field(default_factory=list)
    d_m: list[float] = field(default_factory=list)
    qaoa_runs: int = 0
    wall_time: float | None = None

    def to_json(self, timing: bool = False) -> str:
        d = asdict(self)
        if not timing:
            d.pop("wall_time")
        return json.dumps(d, sort_keys=True)


def make_instance(cfg: ExperimentConfig, index: int) -> tuple[Graph, int]:
    """Graph for instance ``index`` and the seed used to draw it."""
    seed = derive_seed(cfg.seed, index, 0)
    if cfg.family == "cycle":
        return make_cycle(cfg.n), seed
    if cfg.family == "regular":
        return make_random_regular(cfg.n, cfg.degree, seed), seed
    if cfg.family == "erdos_renyi":
        return make_erdos_renyi(cfg.n, cfg.rho, seed), seed
    return loads(Path(cfg.graph_file).read_text(), kind="graph"), seed


def _pad(series: list[float], length: int) -> list[float]:
    if not series:
        return []
    return series + [series[-1]] * (length - len(series))


def shrinkage_path(trace: LevelTrace | None, n: int, mean_degree: float) -> tuple[list[int], list[float]]:
    """Vertex counts and mean degrees along the first matching's first round."""
    v, d = [n], [mean_degree]
    while trace is not None and trace.runs:
        run = trace.runs[0]
        v.append(run.n_coarse)
        d.append(run.coarse_mean_degree)
        trace = run.rounds[0].child if run.rounds else None
    return v, d


def solve_instance(graph: Graph, mcfg: MqaoaConfig, exact_max: float | None = None) -> dict:
    """Run MQAOA on a MaxCut instance and express everything in cut units."""
    H = maxcut_to_ising(graph)
    half_w = 0.5 * graph.total_weight
    res = run_mqaoa(H, mcfg)
    out = {
        "cut": cut_value(graph, res.bits),
        "bits": "".join(str(int(b)) for b in res.bits),
        "qaoa_runs": res.qaoa_runs,
    }
    v, d = shrinkage_path(res.trace, graph.n, graph.mean_degree())
    out["v_m"], out["d_m"] = v, d
    if exact_max is not None and exact_max > 0:
        out["ratio"] = out["cut"] / exact_max
        out["ratio_variational"] = (half_w - res.variational_energy) / exact_max
        if res.trace is not None:
            q = res.trace.round_series("energy_qaoa")
            g = res.trace.round_series("energy_rg")
            out["rounds_used"] = len(q)
            out["err_qaoa"] = _pad([1.0 - (half_w - e) / exact_max for e in q], mcfg.rounds)
            out["err_rg"] = _pad([1.0 - (half_w - e) / exact_max for e in g], mcfg.rounds)
    return out


def _instance_job(args) -> ExperimentRecord:
    cfg, index, depth = args
    t0 = time.monotonic()
    graph, seed = make_instance(cfg, index)
    rec = ExperimentRecord(index, seed, graph.n, graph.num_edges, depth=depth)
    try:
        exact = max_cut(graph)[0] if graph.n <= ENUMERATION_CAP else None
        rec.exact_max = exact
        mcfg = replace(cfg.mqaoa, depth=depth, seed=derive_seed(cfg.seed, index, 1), deadline=t0 + cfg.timeout)
        for k, v in solve_instance(graph, mcfg, exact).items():
            setattr(rec, k, v)
    except BudgetExceeded as exc:
        rec.status, rec.error = "timeout", str(exc)
    except Exception as exc:  # recorded per instance; the ensemble carries on
        log.exception("instance %d failed", index)
        rec.status, rec.error = "failed", f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.monotonic() - t0
    return rec


def _run_jobs(cfg: ExperimentConfig, jobs: list) -> list[ExperimentRecord]:
    if cfg.workers == 1 or len(jobs) == 1:
        return [_instance_job(j) for j in jobs]
    # map() yields in submission order whatever the completion order
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_instance_job, jobs))


def summarize(records: list[ExperimentRecord]) -> list[dict]:
    """Per-round mean errors over successful records."""
    ok = [r for r in records if r.status == "ok" and r.err_qaoa]
    if not ok:
        return []
    k = min(len(r.err_qaoa) for r in ok)
    rows = []
    for i in range(k):
        rows.append({
            "round": i + 1,
            "mean_err_post_qaoa": float(np.mean([r.err_qaoa[i] for r in ok])),
            "mean_err_post_rg": float(np.mean([r.err_rg[i] for r in ok])),
        })
    return rows


def run_solve(cfg: ExperimentConfig) -> ExperimentRecord:
    rec = _instance_job((cfg, 0, cfg.mqaoa.depth))
    write_outputs(cfg, [rec], summarize([rec]))
    return rec


def run_ensemble(cfg: ExperimentConfig) -> tuple[list[ExperimentRecord], list[dict]]:
    records = _run_jobs(cfg, [(cfg, i, cfg.mqaoa.depth) for i in range(cfg.count)])
    summary = summarize(records)
    write_outputs(cfg, records, summary)
    return records, summary


def run_ringscan(cfg: ExperimentConfig) -> tuple[list[ExperimentRecord], list[dict]]:
    """The ring instance at every depth in ``cfg.depths``; one record per depth."""
    if cfg.family != "cycle":
        raise ValueError("ringscan runs on the cycle family")
    records = _run_jobs(cfg, [(cfg, 0, p) for p in cfg.depths])
    rows = []
    for rec in records:
        for i, (eq, er) in enumerate(zip(rec.err_qaoa, rec.err_rg)):
            rows.append({"depth": rec.depth, "round": i + 1, "err_post_qaoa": eq, "err_post_rg": er})
    write_outputs(cfg, records, rows)
    return records, rows


def rg_shrinkage(graph: Graph, mcfg: MqaoaConfig, base_size: int) -> tuple[list[int], list[float]]:
    """Coarse-grain repeatedly (one QAOA round per step) until ``base_size``.

    Returns the vertex count and mean degree of every effective graph,
    starting with the input graph.
    """
    H = maxcut_to_ising(graph)
    v, d = [H.num_vertices], [graph.mean_degree()]
    level = 0
    while H.num_vertices > base_size and matchable(H, mcfg):
        if mcfg.deadline is not None and time.monotonic() > mcfg.deadline:
            raise BudgetExceeded("wall-clock budget exhausted")
        part = level_partition(H, mcfg, (level, 0))
        if not part.blocks:
            break
        H = rg_step(H, part, mcfg, (level, 0, 0)).coarse
        v.append(H.num_vertices)
        d.append(H.coupling_graph().mean_degree())
        level += 1
    return v, d


def _rgstats_job(args) -> ExperimentRecord:
    cfg, index = args
    t0 = time.monotonic()
    graph, seed = make_instance(cfg, index)
    rec = ExperimentRecord(index, seed, graph.n, graph.num_edges, depth=cfg.mqaoa.depth)
    try:
        mcfg = replace(cfg.mqaoa, seed=derive_seed(cfg.seed, index, 1), deadline=t0 + cfg.timeout)
        rec.v_m, rec.d_m = rg_shrinkage(graph, mcfg, cfg.rg_base_size)
        rec.qaoa_runs = len(rec.v_m) - 1
    except BudgetExceeded as exc:
        rec.status, rec.error = "timeout", str(exc)
    except Exception as exc:
        log.exception("instance %d failed", index)
        rec.status, rec.error = "failed", f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.monotonic() - t0
    return rec


def run_rgstats(cfg: ExperimentConfig) -> tuple[list[ExperimentRecord], list[dict]]:
    """Mean ``v_m`` and ``d_m`` per RG step over ``cfg.count`` instances.

    Instances that reach the base size early contribute their final graph
    to the later steps.
    """
    if cfg.workers == 1:
        records = [_rgstats_job((cfg, i)) for i in range(cfg.count)]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_rgstats_job, [(cfg, i) for i in range(cfg.count)]))
    ok = [r for r in records if r.status == "ok"]
    steps = max((len(r.v_m) for r in ok), default=0)
    rows = []
    for m in range(steps):
        rows.append({
            "step": m,
            "mean_v": float(np.mean([r.v_m[min(m, len(r.v_m) - 1)] for r in ok])),
            "mean_d": float(np.mean([r.d_m[min(m, len(r.d_m) - 1)] for r in ok])),
        })
    write_outputs(cfg, records, rows)
    return records, rows


def _csv_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def table_path(out: Path) -> Path:
    """Companion CSV path for a records file."""
    out = Path(out)
    if out.suffix == ".csv":
        return out.with_name(out.stem + ".table.csv")
    return out.with_suffix(".csv")


def write_outputs(cfg: ExperimentConfig, records: list[ExperimentRecord], table: list[dict]) -> None:
    if cfg.out is None:
        return
    out = Path(cfg.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("".join(r.to_json(cfg.timing) + "\n" for r in records))
        table_path(out).write_text(_csv_text(table))
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
