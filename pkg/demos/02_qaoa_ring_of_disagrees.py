"""
QAOA on the ring of disagrees
=============================

On an even cycle depth-p QAOA cannot beat the cut ratio (2p+1)/(2p+2).
Depth p = N/2 is enough to solve the ring exactly.
"""
import numpy as np

from mqaoa import OptimizerConfig, QaoaParams, make_cycle, maxcut_to_ising, objective, optimize_qaoa
from mqaoa.statevector import EnergyDiagonal, init_plus

n = 8
H = maxcut_to_ising(make_cycle(n))


def ratio(energy):
    # cut = W/2 - E, and the maximum cut of an even ring is n
    return (n / 2 - energy) / n


for p in (1, 2, 3, 4):
    cfg = OptimizerConfig(seed=0, max_iterations=1000)
    out = optimize_qaoa(H, p, cfg=cfg)
    print(f"p={p}: r = {ratio(out.value):.6f}   bound {(2 * p + 1) / (2 * p + 2):.6f}")

# the depth-1 landscape on a grid agrees with the optimizer
diag = EnergyDiagonal(H)
psi = init_plus(n)
gammas = np.linspace(-np.pi / 2, np.pi / 2, 60)
betas = np.linspace(-np.pi / 4, np.pi / 4, 60)
grid = np.array([[objective(H, QaoaParams((g,), (b,)), psi, diag) for b in betas] for g in gammas])
k = np.unravel_index(np.argmin(grid), grid.shape)
print(f"grid optimum r = {ratio(grid[k]):.4f} at gamma={gammas[k[0]]:.3f}, beta={betas[k[1]]:.3f}")
