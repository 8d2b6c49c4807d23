"""Variational layer: ansatz preparation, objective and simplex search."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .ising import IsingHamiltonian
from .statevector import (
    EnergyDiagonal,
    StateVector,
    apply_mixer,
    apply_phase_separator,
    expectation_energy,
    init_plus,
)

__all__ = [
    "QaoaParams",
    "OptimizerConfig",
    "QaoaOutcome",
    "prepare_ansatz",
    "objective",
    "nelder_mead_minimize",
    "optimize_qaoa",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas) or not self.gammas:
            raise ValueError("need p >= 1 gammas and the same number of betas")

    @property
    def depth(self) -> int:
        return len(self.gammas)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.gammas, self.betas])

    @classmethod
    def from_vector(cls, x) -> "QaoaParams":
        x = np.asarray(x, dtype=float)
        p = x.size // 2
        return cls(tuple(x[:p]), tuple(x[p:]))


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the restarted Nelder-Mead search.

    ``tolerance`` is the spread of objective values across the simplex below
    which a restart stops (the simplex must also be smaller than its square
    root); ``max_iterations`` caps simplex iterations per restart.
    """

    restarts: int = 10
    max_iterations: int = 400
    tolerance: float = 1e-8
    gamma_step: float = 0.2
    beta_step: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("restarts and max_iterations must be positive")
        if self.tolerance <= 0 or self.gamma_step <= 0 or self.beta_step <= 0:
            raise ValueError("tolerance and step sizes must be positive")


@dataclass
class QaoaOutcome:
    params: QaoaParams
    value: float
    traces: list[list[float]] = field(default_factory=list)
    state: StateVector | None = None
    failed_restarts: list[int] = field(default_factory=list)


def prepare_ansatz(H: IsingHamiltonian, params: QaoaParams, initial: StateVector, diagonal=None) -> StateVector:
    """Return ``prod_k exp(-i b_k H_x) exp(-i g_k H_z) |initial>`` (``initial`` is not modified)."""
    if initial.n_qubits != H.num_vertices:
        raise ValueError("initial state and Hamiltonian sizes differ")
    if diagonal is None:
        diagonal = EnergyDiagonal(H)
    state = initial.copy()
    for g, b in zip(params.gammas, params.betas):
        apply_phase_separator(state, H, g, diagonal)
        apply_mixer(state, b)
    return state


def objective(H: IsingHamiltonian, params: QaoaParams, initial: StateVector, diagonal=None) -> float:
    """Expected energy ``F(gamma, beta)``; the engine always minimises it."""
    if diagonal is None:
        diagonal = EnergyDiagonal(H)
    return expectation_energy(prepare_ansatz(H, params, initial, diagonal), H, diagonal)


class NonFiniteObjective(ArithmeticError):
    pass


def nelder_mead_minimize(f, x0, cfg: OptimizerConfig | None = None, steps=None):
    """Downhill simplex with the classical coefficients (1, 2, 0.5, 0.5).

    The initial simplex is ``x0`` plus one vertex per coordinate displaced by
    ``steps`` (default 0.1 each). Stops once the objective spread over the
    simplex drops below ``cfg.tolerance`` and the simplex has shrunk below
    ``sqrt(cfg.tolerance)``, or after ``cfg.max_iterations``. The size
    condition stops a simplex that straddles a minimum symmetrically, where
    the objective spread is zero, from halting early.

    Returns
    -------
    x : ndarray
    fx : float
    trace : list of float
        Best objective value after each iteration (non-increasing).

    Raises
    ------
    NonFiniteObjective
        If ``f`` returns NaN or infinity anywhere in the search.
    """
    cfg = cfg or OptimizerConfig()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    steps = np.full(x0.size, 0.1) if steps is None else np.asarray(steps, dtype=float)
    simplex = np.vstack([x0, x0 + np.diag(steps)])

    def wrapped(x):
        v = float(f(x))
        if not np.isfinite(v):
            raise NonFiniteObjective(f"objective is {v} at {x}")
        return v

    fx0 = wrapped(x0)
    trace = [fx0]
    best = [fx0]

    def track(intermediate_result):
        best[0] = min(best[0], float(intermediate_result.fun))
        trace.append(best[0])

    res = minimize(
        wrapped,
        x0,
        method="Nelder-Mead",
        callback=track,
        options={
            "initial_simplex": simplex,
            "xatol": np.sqrt(cfg.tolerance),
            "fatol": cfg.tolerance,
            "maxiter": cfg.max_iterations,
            "maxfev": 10 * cfg.max_iterations + 10,
            "adaptive": False,
        },
    )
    x, fx = np.asarray(res.x), float(res.fun)
    if fx0 < fx:
        x, fx = x0, fx0
    return x, fx, trace


def _random_start(rng: np.random.Generator, depth: int) -> np.ndarray:
    gammas = rng.uniform(-np.pi, np.pi, depth)
    betas = rng.uniform(-np.pi / 4, np.pi / 4, depth)
    return np.concatenate([gammas, betas])


def optimize_qaoa(
    H: IsingHamiltonian,
    depth: int,
    initial: StateVector | None = None,
    cfg: OptimizerConfig | None = None,
    warm_start: QaoaParams | list[QaoaParams] | None = None,
) -> QaoaOutcome:
    """Best of ``cfg.restarts`` simplex runs on ``F(gamma, beta)``.

    The first restarts start from ``warm_start`` (a single parameter set or a
    list of them); every other restart draws ``gamma ~ U(-pi, pi)`` and
    ``beta ~ U(-pi/4, pi/4)`` from a stream seeded by ``cfg.seed``. Ties are
    broken by restart index. A restart whose objective turns non-finite is
    dropped and recorded in ``failed_restarts``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cfg = cfg or OptimizerConfig()
    if initial is None:
        initial = init_plus(H.num_vertices)
    if isinstance(warm_start, QaoaParams):
        warm_start = [warm_start]
    starts = [w.to_vector() for w in (warm_start or [])]
    for w in starts:
        if w.size != 2 * depth:
            raise ValueError("warm start depth does not match")
    diag = EnergyDiagonal(H)

    def f(x):
        return objective(H, QaoaParams.from_vector(x), initial, diag)

    rng = np.random.default_rng(cfg.seed)
    steps = np.concatenate([np.full(depth, cfg.gamma_step), np.full(depth, cfg.beta_step)])
    best_x, best_f = None, np.inf
    traces: list[list[float]] = []
    failed: list[int] = []
    for r in range(cfg.restarts):
        # the random stream advances every restart so warm starts do not shift it
        x0 = _random_start(rng, depth)
        if r < len(starts):
            x0 = starts[r]
        try:
            x, fx, trace = nelder_mead_minimize(f, x0, cfg, steps)
        except NonFiniteObjective as exc:
            log.warning("restart %d aborted: %s", r, exc)
            failed.append(r)
            traces.append([])
            continue
        traces.append(trace)
        if fx < best_f:
            best_x, best_f = x, fx
    if best_x is None:
        raise NonFiniteObjective("every optimizer restart failed")
    params = QaoaParams.from_vector(best_x)
    state = prepare_ansatz(H, params, initial, diag)
    value = expectation_energy(state, H, diag)
    return QaoaOutcome(params, value, traces, state, failed)
