"""
How fast the graph shrinks under repeated coarse-graining
=========================================================

Every RG step merges the pairs of a maximal matching, so the vertex count
roughly halves per step and about log2(N) steps reach a small base problem.
"""
import numpy as np

from mqaoa import MqaoaConfig, OptimizerConfig
from mqaoa.experiments import ExperimentConfig, run_rgstats

cfg = ExperimentConfig(
    kind="rgstats",
    family="erdos_renyi",
    n=16,
    rho=0.3,
    count=8,
    rg_base_size=4,
    seed=1,
    mqaoa=MqaoaConfig(optimizer=OptimizerConfig(restarts=1)),
)
records, rows = run_rgstats(cfg)

print("step   mean v_m   mean d_m")
for row in rows:
    print(f"{row['step']:4d}   {row['mean_v']:8.2f}   {row['mean_d']:8.2f}")
print("per-instance vertex counts:")
for rec in records:
    print("  ", " -> ".join(map(str, rec.v_m)))
print("mean v1/v0 =", np.mean([r.v_m[1] / r.v_m[0] for r in records]))
