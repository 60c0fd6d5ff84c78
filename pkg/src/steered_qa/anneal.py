"""Linear annealing paths, spectrum traces and adiabatic-time schedules."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import linalg, steering
from .models import DiagonalHamiltonian, ground_state_of_diagonal

DEFAULT_DS = 0.01
DIVERGENCE_GAP = 1e-12


class DivergentScheduleError(ArithmeticError):
    """The gap closes somewhere on the path, so no finite schedule exists."""


@dataclass(frozen=True, eq=False)
class AnnealPath:
    """``H(s) = (1 - s) * initial + s * diag(final.energies)``."""

    initial: np.ndarray
    final: DiagonalHamiltonian
    theta: np.ndarray | None = None

    def __post_init__(self):
        if self.initial.shape != (self.final.dim, self.final.dim):
            raise linalg.DimensionError(
                f"initial operator {self.initial.shape} does not match final dimension {self.final.dim}")

    @classmethod
    def steered(cls, final: DiagonalHamiltonian, theta) -> "AnnealPath":
        theta = np.asarray(theta, dtype=float)
        return cls(steering.rotated_initial_hamiltonian(theta), final, theta)

    @property
    def n(self) -> int:
        return self.final.n

    @property
    def dim(self) -> int:
        return self.final.dim

    @cached_property
    def derivative(self) -> np.ndarray:
        """``dH/ds = H_f - H0``, constant along the path."""
        d = -self.initial
        d[np.diag_indices_from(d)] += self.final.energies
        return d

    @cached_property
    def final_degeneracy(self) -> int:
        return ground_state_of_diagonal(self.final)[2]

    def initial_ground_state(self) -> np.ndarray:
        if self.theta is not None:
            return steering.rotated_initial_ground_state(self.theta)
        return linalg.eigh(self.initial, 1).ground_state.astype(complex)


def hamiltonian_at(path: AnnealPath, s: float) -> np.ndarray:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    if s == 0.0:
        return path.initial.copy()
    if s == 1.0:
        return np.diag(path.final.energies)
    H = (1.0 - s) * path.initial
    H[np.diag_indices_from(H)] += s * path.final.energies
    return H


def s_grid_for(ds: float) -> np.ndarray:
    steps = round(1.0 / ds)
    if steps < 1 or abs(steps * ds - 1.0) > 1e-9:
        raise ValueError(f"ds={ds} does not divide [0, 1] into an integer number of steps")
    return np.linspace(0.0, 1.0, steps + 1)


@dataclass(frozen=True)
class SpectrumTrace:
    s_grid: np.ndarray
    levels: np.ndarray  # (len(s_grid), k), ascending per row
    gap: np.ndarray
    norms: np.ndarray  # spectral norm of H(s) per grid point
    degeneracy: int = 1


def spectrum_trace(path: AnnealPath, k: int = 4, ds: float = DEFAULT_DS,
                   s_grid=None) -> SpectrumTrace:
    """Lowest ``k`` levels and the gap on a uniform grid.

    When the final ground state is ``d``-fold degenerate the gap is
    ``lambda_d - lambda_0``, the distance to the first level outside the
    ground manifold.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    if k > path.dim:
        raise ValueError(f"k={k} exceeds dimension {path.dim}")
    grid = s_grid_for(ds) if s_grid is None else np.asarray(s_grid, dtype=float)
    d = path.final_degeneracy
    if d >= path.dim:
        raise ValueError("final Hamiltonian is fully degenerate; the gap is undefined")
    levels = np.empty((len(grid), k))
    gap = np.empty(len(grid))
    norms = np.empty(len(grid))
    for j, s in enumerate(grid):
        w = np.linalg.eigvalsh(hamiltonian_at(path, float(s)))
        levels[j] = w[:k]
        gap[j] = w[d] - w[0]
        norms[j] = max(abs(w[0]), abs(w[-1]))
    return SpectrumTrace(grid, levels, gap, norms, d)


def min_gap(trace: SpectrumTrace, tie_tol: float = 1e-12) -> tuple[float, float]:
    """Grid argmin of the gap; ties (within ``tie_tol``) resolve to the smallest ``s``."""
    j = int(np.argmax(trace.gap <= trace.gap.min() + tie_tol))
    return float(trace.s_grid[j]), float(trace.gap[j])


def _gap_and_slope(path: AnnealPath, s: float, d: int) -> tuple[float, float]:
    es = linalg.eigh(hamiltonian_at(path, s), check=False)
    v0, vd = es.vectors[:, 0], es.vectors[:, d]
    D = path.derivative
    # Hellmann-Feynman: d(lambda)/ds = <v|dH/ds|v>
    slope = float(np.real(vd.conj() @ D @ vd - v0.conj() @ D @ v0))
    return float(es.values[d] - es.values[0]), slope


def refine_min_gap(path: AnnealPath, trace: SpectrumTrace, n_candidates: int = 5,
                   iterations: int = 60) -> tuple[float, float]:
    """Locate the minimum gap below grid resolution.

    Each of the smallest interior local minima of the grid gap is bracketed
    by its neighbours and the zero of the gap's Hellmann-Feynman slope is
    found by bisection. Narrow avoided crossings that the grid misses by
    orders of magnitude are resolved down to eigensolver precision.
    """
    s, g = trace.s_grid, trace.gap
    best_s, best_gap = min_gap(trace)
    interior = [j for j in range(1, len(s) - 1) if g[j] <= g[j - 1] and g[j] <= g[j + 1]]
    interior.sort(key=lambda j: g[j])
    d = trace.degeneracy
    for j in interior[:n_candidates]:
        lo, hi = float(s[j - 1]), float(s[j + 1])
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            gap_mid, slope = _gap_and_slope(path, mid, d)
            if gap_mid < best_gap:
                best_s, best_gap = mid, gap_mid
            if slope < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-16:
                break
    return best_s, best_gap


@dataclass(frozen=True)
class ScheduleProfile:
    s_grid: np.ndarray
    T_ad: np.ndarray
    divergent: bool
    T_total: float
    t_of_s: np.ndarray
    min_gap: tuple[float, float]
    norm: str = "spectral"
    refined: bool = False
    # filled by optimal_schedule: uniform samples of normalized time t / T_total
    tau_grid: np.ndarray | None = field(default=None)
    s_of_t: np.ndarray | None = field(default=None)

    def s_at(self, tau) -> np.ndarray:
        """Schedule ``s`` at normalized times ``tau = t / T_total`` in [0, 1]."""
        if self.divergent:
            raise DivergentScheduleError("schedule is divergent")
        tau = np.clip(np.asarray(tau, dtype=float), 0.0, 1.0)
        return np.interp(tau * self.T_total, self.t_of_s, self.s_grid)


def _frobenius_norms(path: AnnealPath, s: np.ndarray) -> np.ndarray:
    A = path.initial
    E = path.final.energies
    aa = float(np.sum(A * A))
    ad = float(np.dot(np.diag(A), E))
    dd = float(np.dot(E, E))
    return np.sqrt((1 - s) ** 2 * aa + 2 * s * (1 - s) * ad + s**2 * dd)


def cumulative_time(s_grid, T_ad) -> np.ndarray:
    """Cumulative trapezoid ``t(s)`` of ``T_ad`` over ``s_grid``, starting at 0."""
    s_grid = np.asarray(s_grid, dtype=float)
    T_ad = np.asarray(T_ad, dtype=float)
    return np.concatenate([[0.0], np.cumsum(np.diff(s_grid) * 0.5 * (T_ad[1:] + T_ad[:-1]))])


def adiabatic_time_profile(path: AnnealPath, trace: SpectrumTrace, norm: str = "spectral",
                           threshold: float = DIVERGENCE_GAP, refine: bool = False) -> ScheduleProfile:
    """Instantaneous adiabatic time ``||dH/ds|| * ||H(s)|| / gap(s)**2``.

    The profile is divergent if any grid gap falls below ``threshold``, or,
    with ``refine=True``, if the refined minimum gap does.
    """
    if norm == "spectral":
        h_norms = trace.norms
    elif norm == "frobenius":
        h_norms = _frobenius_norms(path, trace.s_grid)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    d_norm = linalg.spectral_norm(path.derivative, norm)
    gmin = refine_min_gap(path, trace) if refine else min_gap(trace)
    with np.errstate(divide="ignore", invalid="ignore"):
        T_ad = np.where(trace.gap < threshold, np.inf, d_norm * h_norms / trace.gap**2)
    divergent = bool(np.any(trace.gap < threshold) or gmin[1] < threshold)
    if divergent:
        t_of_s = np.full_like(T_ad, np.nan)
        T_total = math.inf
    else:
        t_of_s = cumulative_time(trace.s_grid, T_ad)
        T_total = float(t_of_s[-1])
    return ScheduleProfile(trace.s_grid, T_ad, divergent, T_total, t_of_s, gmin, norm, refine)


def total_adiabatic_time(profile: ScheduleProfile) -> float:
    """Trapezoidal integral of ``T_ad`` over [0, 1]; ``inf`` when divergent."""
    if profile.divergent:
        return math.inf
    return float(cumulative_time(profile.s_grid, profile.T_ad)[-1])


def optimal_schedule(profile: ScheduleProfile, n_samples: int | None = None) -> ScheduleProfile:
    """Invert the cumulative adiabatic time into ``s(t)``.

    The result carries ``n_samples`` uniform samples of ``tau = t / T_total``
    (default: one per grid point) and the matching ``s`` values.
    """
    if profile.divergent:
        raise DivergentScheduleError("gap closes on the path; total adiabatic time is infinite")
    m = len(profile.s_grid) if n_samples is None else n_samples
    tau = np.linspace(0.0, 1.0, m)
    return replace(profile, tau_grid=tau, s_of_t=profile.s_at(tau))


def gap_improvement_ratio(steered: SpectrumTrace, direct: SpectrumTrace,
                          threshold: float = DIVERGENCE_GAP) -> float:
    """``min gap(steered) / min gap(direct) - 1``."""
    if len(steered.s_grid) != len(direct.s_grid) or not np.allclose(steered.s_grid, direct.s_grid):
        raise ValueError("traces must share the same s grid")
    g_direct = min_gap(direct)[1]
    if g_direct < threshold:
        raise ZeroDivisionError(f"direct minimum gap {g_direct:.3e} is below {threshold:g}")
    return min_gap(steered)[1] / g_direct - 1.0


def write_trace_csv(path, trace: SpectrumTrace, profile: ScheduleProfile | None = None) -> None:
    """CSV columns: s, lambda_0..lambda_{k-1}, gap, T_ad, t_of_s."""
    k = trace.levels.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", *[f"lambda_{i}" for i in range(k)], "gap", "T_ad", "t_of_s"])
        for j, s in enumerate(trace.s_grid):
            T_ad = profile.T_ad[j] if profile is not None else math.nan
            t = profile.t_of_s[j] if profile is not None else math.nan
            w.writerow([repr(float(s)), *[repr(float(v)) for v in trace.levels[j]],
                        repr(float(trace.gap[j])), repr(float(T_ad)), repr(float(t))])
