"""Finite-time Schrodinger evolution along an annealing path."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import linalg
from .anneal import DEFAULT_DS, AnnealPath, DivergentScheduleError, ScheduleProfile, hamiltonian_at
from .models import ground_manifold


@dataclass(frozen=True)
class EvolutionResult:
    s_grid: np.ndarray
    final_gs_probability_trace: np.ndarray
    instantaneous_gs_overlap: np.ndarray | None
    P_f: float
    T: float
    schedule_kind: str
    method: str
    final_state: np.ndarray | None = None


def _schedule_fn(schedule):
    if isinstance(schedule, ScheduleProfile):
        if schedule.divergent:
            raise DivergentScheduleError("cannot evolve along a divergent schedule")
        return schedule.s_at, "optimal"
    if schedule == "linear":
        return (lambda tau: np.asarray(tau, dtype=float)), "linear"
    raise ValueError(f"unknown schedule {schedule!r}")


def _instantaneous_overlap(path: AnnealPath, s: float, state: np.ndarray, d: int) -> float:
    es = linalg.eigh(hamiltonian_at(path, s), d, check=False)
    return float(np.sum(np.abs(es.vectors.conj().T @ state) ** 2))


def evolve(path: AnnealPath, T: float, ds: float = DEFAULT_DS, schedule="linear",
           method: str = "eigh", track_instantaneous: bool = True) -> EvolutionResult:
    """Evolve the initial ground state for total time ``T``.

    The anneal is cut into ``1/ds`` steps of duration ``T * ds``; each step
    applies ``exp(-i H(s_mid) T ds)`` with ``s_mid`` the schedule evaluated at
    the middle of the step. ``schedule`` is ``"linear"`` or a profile from
    :func:`anneal.optimal_schedule`. ``method`` picks the per-step
    propagator: ``"eigh"`` (exact diagonalization) or ``"taylor"``
    (:func:`linalg.propagate`, same result to ~1e-13, much faster).

    Probabilities against the final ground state are summed over the whole
    ground manifold when it is degenerate.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    step = {"eigh": linalg.evolve_step, "taylor": linalg.propagate}.get(method)
    if step is None:
        raise ValueError(f"unknown method {method!r}")
    s_of, kind = _schedule_fn(schedule)
    n_steps = round(1.0 / ds)
    if n_steps < 1 or abs(n_steps * ds - 1.0) > 1e-9:
        raise ValueError(f"ds={ds} does not divide [0, 1] into an integer number of steps")
    dt = T / n_steps
    tau = np.linspace(0.0, 1.0, n_steps + 1)
    s_bounds = np.clip(s_of(tau), 0.0, 1.0)
    s_mid = np.clip(s_of((np.arange(n_steps) + 0.5) / n_steps), 0.0, 1.0)

    manifold = ground_manifold(path.final)
    d = len(manifold)
    state = path.initial_ground_state()
    p_final = np.empty(n_steps + 1)
    p_inst = np.empty(n_steps + 1) if track_instantaneous else None

    def record(m):
        p_final[m] = np.sum(np.abs(state[manifold]) ** 2)
        if p_inst is not None:
            p_inst[m] = _instantaneous_overlap(path, float(s_bounds[m]), state, d)

    record(0)
    for m in range(n_steps):
        state = step(hamiltonian_at(path, float(s_mid[m])), state, dt)
        record(m + 1)
    p_final = np.clip(p_final, 0.0, 1.0)
    if p_inst is not None:
        p_inst = np.clip(p_inst, 0.0, 1.0)
    return EvolutionResult(s_bounds, p_final, p_inst, float(p_final[-1]), float(T), kind, method, state)


def final_gs_probability(result: EvolutionResult) -> float:
    return float(result.final_gs_probability_trace[-1])


def probability_improvement_ratio(p_steered: float, p_direct: float) -> float:
    """``p_steered / p_direct - 1``."""
    if p_direct <= 0:
        raise ZeroDivisionError("direct success probability is zero")
    return p_steered / p_direct - 1.0


def write_evolution_csv(path, result: EvolutionResult) -> None:
    """CSV columns: s, instantaneous_overlap, final_gs_probability."""
    inst = result.instantaneous_gs_overlap
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "instantaneous_overlap", "final_gs_probability"])
        for j, s in enumerate(result.s_grid):
            w.writerow([repr(float(s)), repr(float(inst[j])) if inst is not None else "nan",
                        repr(float(result.final_gs_probability_trace[j]))])
