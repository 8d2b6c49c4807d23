"""
Multiscale QAOA on a 16-vertex ring
===================================

Each round optimises depth-1 QAOA, coarse-grains matched pairs into single
qubits, solves the smaller Ising problem exactly and starts the next round
from the lifted product state. The error 1 - r falls by a factor of four to five
per round, well below the depth-1 limit of 1/4.
"""
import time

from mqaoa import MqaoaConfig, make_cycle, maxcut_to_ising, run_mqaoa

n = 16
H = maxcut_to_ising(make_cycle(n))
t0 = time.time()
res = run_mqaoa(H, MqaoaConfig(depth=1, rounds=6, matchings=3, seed=0))

print("round   1-r after QAOA   1-r after RG")
qaoa = res.trace.round_series("energy_qaoa")
rg = res.trace.round_series("energy_rg")
for k, (eq, er) in enumerate(zip(qaoa, rg), start=1):
    # cut = W/2 - E with W = n, and the maximum cut is n
    print(f"{k:5d}   {1 - (n / 2 - eq) / n:14.3e}   {1 - (n / 2 - er) / n:12.3e}")

print("best cut", n / 2 - res.energy, "bits", "".join(map(str, res.bits)))
print(f"{res.qaoa_runs} QAOA runs in {time.time() - t0:.0f} s")
