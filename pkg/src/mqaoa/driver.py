"""The multiscale loop: QAOA, coarse-graining, coarse solve, lift, repeat.

At a level with Hamiltonian ``H`` and a fixed maximal matching, each round

1. optimises the QAOA angles from the current initial state,
2. reads the block density matrices off the optimal state,
3. builds one retained basis per block and the effective Hamiltonian ``H'``,
4. solves ``H'`` (exactly once it is small, otherwise by recursing),
5. lifts the coarse ground state to a product state that seeds the next round.

Several matchings (seeded vertex shuffles) are tried per level and the best
classical assignment found anywhere is returned.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .ising import (
    ENUMERATION_CAP,
    BlockPartition,
    IsingHamiltonian,
    brute_force_ground,
    default_min_weight,
    energy_of,
    maximal_matching,
    partition_from_matching,
)
from .qaoa import OptimizerConfig, QaoaOutcome, QaoaParams, optimize_qaoa
from .rg import CoarseMap, choose_basis, coarse_grain_hamiltonian, lift_bitstring, lift_to_bits
from .statevector import init_plus, init_product, rdm_exact, rdm_from_shots, sample_bitstrings

__all__ = [
    "MqaoaConfig",
    "RoundRecord",
    "MatchingRun",
    "LevelTrace",
    "MqaoaResult",
    "BudgetExceeded",
    "solve_ground",
    "mqaoa_level",
    "rg_step",
    "RgStep",
    "level_partition",
    "run_mqaoa",
    "approximation_ratio",
    "count_qaoa_runs",
    "derive_seed",
    "matchable",
]

log = logging.getLogger(__name__)

MAX_LEVELS = 32


class BudgetExceeded(TimeoutError):
    """The wall-clock deadline passed while the loop was running."""


@dataclass(frozen=True)
class MqaoaConfig:
    """Parameters of the multiscale loop.

    ``rdm_mode`` is ``"exact"`` or ``"shots:<count>"``. ``deadline`` is an
    absolute :func:`time.monotonic` value checked once per round.
    """

    depth: int = 1
    rounds: int = 6
    matchings: int = 3
    base_size: int = 16
    tolerance: float = 1e-8
    rdm_mode: str = "exact"
    optimizer: OptimizerConfig = field(default_factory=lambda: OptimizerConfig(restarts=4))
    seed: int = 0
    samples: int = 256
    min_weight: float | None = None
    deadline: float | None = None

    def __post_init__(self):
        if self.depth < 1 or self.rounds < 1 or self.matchings < 1:
            raise ValueError("depth, rounds and matchings must be >= 1")
        if not 1 <= self.base_size <= ENUMERATION_CAP:
            raise ValueError(f"base_size must lie in [1, {ENUMERATION_CAP}]")
        self.shots  # validates rdm_mode

    @property
    def shots(self) -> int | None:
        if self.rdm_mode == "exact":
            return None
        kind, _, count = self.rdm_mode.partition(":")
        if kind != "shots" or not count.isdigit() or int(count) < 1:
            raise ValueError(f"rdm_mode must be 'exact' or 'shots:<count>', got {self.rdm_mode!r}")
        return int(count)


@dataclass
class RoundRecord:
    """One pass of QAOA + RG at a level.

    ``energy_qaoa`` is the optimal variational energy and ``energy_rg`` the
    energy of the lifted product state (equal to the effective ground energy).
    ``best_energy`` is the lowest exactly evaluated assignment so far.
    """

    round: int
    energy_qaoa: float
    energy_rg: float
    best_energy: float
    params: QaoaParams
    forms: tuple[str, ...]
    child: "LevelTrace | None" = None


@dataclass
class MatchingRun:
    matching: int
    blocks: tuple[tuple[int, int], ...]
    n_coarse: int
    coarse_mean_degree: float
    rounds: list[RoundRecord] = field(default_factory=list)


@dataclass
class LevelTrace:
    level: int
    n_vertices: int
    mean_degree: float
    runs: list[MatchingRun] = field(default_factory=list)

    def qaoa_runs(self) -> int:
        total = 0
        for run in self.runs:
            for rec in run.rounds:
                total += 1
                if rec.child is not None:
                    total += rec.child.qaoa_runs()
        return total

    def round_series(self, key: str) -> list[float]:
        """Per-round minimum over matchings of ``energy_qaoa``/``energy_rg``.

        Runs that stopped early carry their last value forward.
        """
        k = max((len(r.rounds) for r in self.runs), default=0)
        out = []
        for i in range(k):
            vals = [getattr(r.rounds[min(i, len(r.rounds) - 1)], key) for r in self.runs if r.rounds]
            out.append(min(vals))
        return out


@dataclass
class MqaoaResult:
    bits: np.ndarray
    energy: float
    variational_energy: float
    trace: LevelTrace | None
    qaoa_runs: int
    ratio: float | None = None


def derive_seed(master: int, *key: int) -> int:
    """Deterministic 63-bit seed for a position in the recursion tree."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


def approximation_ratio(variational: float, exact_max: float) -> float:
    """Cut value achieved divided by the maximum cut."""
    if exact_max <= 0:
        raise ValueError("exact maximum must be positive")
    return variational / exact_max


def count_qaoa_runs(result: MqaoaResult) -> int:
    return 0 if result.trace is None else result.trace.qaoa_runs()


def _base_case(H: IsingHamiltonian) -> np.ndarray:
    _, minimizers = brute_force_ground(H)
    # ties: lexicographically smallest, a deterministic symmetry-broken choice
    return minimizers[0]


def _min_weight(H: IsingHamiltonian, cfg: MqaoaConfig) -> float:
    return default_min_weight(H.coupling_graph()) if cfg.min_weight is None else cfg.min_weight


def matchable(H: IsingHamiltonian, cfg: MqaoaConfig) -> bool:
    """Whether any coupling survives the matching filter, i.e. a level can shrink."""
    w = _min_weight(H, cfg)
    return any(abs(J) >= w for J in H.couplings.values())


def solve_ground(H: IsingHamiltonian, cfg: MqaoaConfig, level: int = 0, key: tuple = ()):
    """Ground-state assignment of ``H``: exact when small, multiscale otherwise.

    Hamiltonians with nothing to match (all couplings negligible) are also
    solved exactly, since another level would not shrink them.

    Returns ``(bits, trace)`` where ``trace`` is ``None`` for the exact base case.
    """
    if H.num_vertices <= cfg.base_size or not matchable(H, cfg):
        return _base_case(H), None
    bits, _, trace = mqaoa_level(H, cfg, level, key)
    return bits, trace


def _check_deadline(cfg: MqaoaConfig) -> None:
    if cfg.deadline is not None and time.monotonic() > cfg.deadline:
        raise BudgetExceeded("wall-clock budget exhausted")


def _block_rdm(state, i, j, cfg: MqaoaConfig, seed: int):
    if cfg.shots is None:
        return rdm_exact(state, i, j)
    return rdm_from_shots(state, i, j, cfg.shots, seed)


@dataclass
class RgStep:
    """Output of one QAOA optimisation followed by coarse-graining."""

    outcome: QaoaOutcome
    cmap: CoarseMap
    coarse: IsingHamiltonian


def rg_step(
    H: IsingHamiltonian,
    partition: BlockPartition,
    cfg: MqaoaConfig,
    key: tuple,
    initial=None,
    warm_start: QaoaParams | None = None,
    round_index: int = 0,
    prev_forms=None,
) -> RgStep:
    """Optimise QAOA on ``H``, read the block states and coarse-grain.

    Round 0 picks the better basis form per block; later rounds flip each
    block's form relative to ``prev_forms``.
    """
    if initial is None:
        initial = init_plus(H.num_vertices)
    ocfg = replace(cfg.optimizer, seed=derive_seed(cfg.seed, *key, 1))
    outcome = optimize_qaoa(H, cfg.depth, initial, ocfg, warm_start=warm_start)
    prev_forms = prev_forms or [None] * len(partition.blocks)
    bases = []
    for k, (i, j) in enumerate(partition.blocks):
        rho = _block_rdm(outcome.state, i, j, cfg, derive_seed(cfg.seed, *key, 3, k))
        bases.append(choose_basis(rho, round_index, prev_forms[k], (i, j)))
    cmap = CoarseMap(partition, tuple(bases))
    return RgStep(outcome, cmap, coarse_grain_hamiltonian(H, cmap))


def level_partition(H: IsingHamiltonian, cfg: MqaoaConfig, key: tuple) -> BlockPartition:
    """Seeded maximal matching of the coupling graph, tiny couplings excluded."""
    matching = maximal_matching(H.coupling_graph(), derive_seed(cfg.seed, *key, 0), _min_weight(H, cfg))
    return partition_from_matching(H.num_vertices, matching)


def mqaoa_level(H: IsingHamiltonian, cfg: MqaoaConfig, level: int = 0, key: tuple = ()):
    """Run the multiscale loop on ``H`` regardless of its size.

    Returns
    -------
    bits : ndarray
        Best assignment found, exactly evaluated.
    variational : float
        Lowest optimal QAOA energy over all rounds and matchings.
    trace : LevelTrace
    """
    if level >= MAX_LEVELS:
        raise RecursionError(f"exceeded {MAX_LEVELS} coarse-graining levels")
    n = H.num_vertices
    diag = H.diagonal()
    trace = LevelTrace(level, n, H.coupling_graph().mean_degree())

    best_bits = np.zeros(n, dtype=np.int8)
    best_e = energy_of(H, best_bits)
    best_var = np.inf

    def consider(bits):
        nonlocal best_bits, best_e
        e = energy_of(H, bits)
        if e < best_e - 1e-12:
            best_bits, best_e = np.array(bits, dtype=np.int8), e

    for mi in range(cfg.matchings):
        mkey = key + (level, mi)
        part = level_partition(H, cfg, mkey)
        run = MatchingRun(mi, part.blocks, part.n_coarse, 0.0)
        trace.runs.append(run)
        initial = init_plus(n)
        params = None
        forms = None
        prev_f = None
        for rnd in range(cfg.rounds):
            _check_deadline(cfg)
            rkey = mkey + (rnd,)
            step = rg_step(H, part, cfg, rkey, initial, params, rnd, forms)
            params = step.outcome.params
            forms = [b.form for b in step.cmap.bases]
            best_var = min(best_var, step.outcome.value)

            samples = sample_bitstrings(step.outcome.state, cfg.samples, derive_seed(cfg.seed, *rkey, 2))
            idx = samples @ (1 << np.arange(n, dtype=np.int64))
            consider(samples[int(np.argmin(diag[idx]))])

            if rnd == 0:
                run.coarse_mean_degree = step.coarse.coupling_graph().mean_degree()
            coarse_bits, child = solve_ground(step.coarse, cfg, level + 1, rkey)
            lifted = lift_bitstring(coarse_bits, step.cmap)
            consider(lift_to_bits(lifted))
            e_rg = energy_of(step.coarse, coarse_bits)
            f = step.outcome.value
            run.rounds.append(RoundRecord(rnd, f, e_rg, best_e, params, tuple(forms), child))
            log.debug("level %d matching %d round %d: F=%.6f E_rg=%.6f best=%.6f", level, mi, rnd, f, e_rg, best_e)

            initial = init_product(lifted)
            if prev_f is not None and abs(f - prev_f) < cfg.tolerance:
                break
            prev_f = f
    return best_bits, float(best_var), trace


def run_mqaoa(H: IsingHamiltonian, cfg: MqaoaConfig | None = None) -> MqaoaResult:
    """Top-level entry: always runs the loop on ``H`` itself.

    Hamiltonians without couplings above the matching threshold are solved
    exactly since there is nothing to match.
    """
    cfg = cfg or MqaoaConfig()
    if not matchable(H, cfg):
        bits = _base_case(H)
        e = energy_of(H, bits)
        return MqaoaResult(bits, e, e, None, 0)
    bits, var, trace = mqaoa_level(H, cfg, 0, ())
    return MqaoaResult(bits, energy_of(H, bits), var, trace, trace.qaoa_runs())
