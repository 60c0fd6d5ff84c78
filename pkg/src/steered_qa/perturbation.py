"""Second-order perturbed ground state of ``H0(theta) + eps * H_f`` for low s.

The unperturbed basis is the excitation ladder of ``H0(theta)``:
``|Phi_k>`` is the normalized uniform superposition of all ``C(n, k)``
product states with exactly ``k`` sites in the per-site excited state and the
rest in the per-site ground state (see :func:`steering.site_states`). Only
``k <= 4`` is populated at second order.

Coefficients depend on the problem only through ``sum_h`` and ``sum_J``,
which for large ``n`` are drawn from Gaussians (central limit theorem).
Overlaps with a classical target state are evaluated in polynomial time
from per-site amplitudes via elementary symmetric polynomials, so ``n=35``
is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt

import numpy as np

from . import linalg
from .anneal import AnnealPath, hamiltonian_at
from .models import IsingInstance, derive_seed, gen_ising, index_of, ising_hamiltonian
from .steering import omega, site_states

K_MAX = 4


def epsilon_of_s(s_star: float) -> float:
    """Perturbation strength ``s / (1 - s)`` after dividing ``H(s)`` by ``1 - s``."""
    if not 0.0 <= s_star < 1.0:
        raise ValueError(f"s_star={s_star} must lie in [0, 1)")
    return s_star / (1.0 - s_star)


@dataclass(frozen=True)
class GaussianSumStats:
    mean_J: float
    sigma_J: float
    mean_h: float
    sigma_h: float

    def __post_init__(self):
        if self.sigma_J < 0 or self.sigma_h < 0:
            raise ValueError("standard deviations must be non-negative")


# fitted sums quoted for n=35, h_mean=0.01, W=0.05, J_s=1; sum_h stats do not
# match that ensemble (fit_sum_stats gives ~0.35 +- 0.17) but are kept for
# reproducing the published curves
REFERENCE_SUM_STATS = GaussianSumStats(mean_J=-0.007, sigma_J=14.0, mean_h=1.22, sigma_h=0.08)


@dataclass(frozen=True)
class PerturbationParams:
    n: int
    s_star: float
    sum_h: float
    sum_J: float
    level_spacing: float = 1.0
    gamma3: float | None = None
    gamma4: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        epsilon_of_s(self.s_star)

    @property
    def eps(self) -> float:
        return epsilon_of_s(self.s_star)

    @property
    def gammas(self) -> tuple[float, float]:
        g3 = self.gamma3 if self.gamma3 is not None else _inv_sqrt_comb(self.n, 3)
        g4 = self.gamma4 if self.gamma4 is not None else _inv_sqrt_comb(self.n, 4)
        return g3, g4


def _inv_sqrt_comb(n: int, k: int) -> float:
    c = comb(n, k)
    return 1.0 / sqrt(c) if c else 0.0


@dataclass(frozen=True)
class PerturbativeState:
    coefficients: np.ndarray  # on |Phi_0> .. |Phi_4>
    first_order: np.ndarray  # A^(1)_k, zero where absent
    second_order: np.ndarray  # A^(2)_k
    normalized: bool = True


def perturbative_coefficients(p: PerturbationParams, order: int = 2) -> PerturbativeState:
    """Ground-state coefficients on the ``|Phi_k>`` ladder, normalized.

    ``order=1`` keeps only the first-order corrections.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    N, e, lev = p.n, p.eps, p.level_spacing
    sh, sj = p.sum_h, p.sum_J
    g3, g4 = p.gammas
    pairs = 2 * N * (N - 1)

    a1 = np.zeros(K_MAX + 1)
    a1[1] = e * sh / (lev * sqrt(N))
    a1[2] = e * sj / (lev * sqrt(pairs))

    a2 = np.zeros(K_MAX + 1)
    if order == 2:
        e2 = e * e / lev**2
        a2[0] = -e2 / (2 * N) * (sh**2 + sj**2 / pairs)
        a2[1] = e2 * sh * sj / sqrt(N) * (4 - 1 / sqrt(N))
        a2[2] = e2 * (sh**2 * sqrt(N - 1) / (sqrt(2 * N) * N) - 2 * sj**2 / (N * sqrt(N * (N - 1))))
        a2[3] = e2 * sh * sj * g3 * (1 - 2 * sqrt(2) * (N - 2) / (3 * N * sqrt(N * (N - 1))))
        a2[4] = e2 * 3 * g4 * sj**2

    c = a1 + a2
    c[0] += 1.0
    c = c / np.linalg.norm(c)
    return PerturbativeState(c, a1, a2)


def clt_sample_sums(stats: GaussianSumStats, seed=None, rng: np.random.Generator | None = None):
    """One Gaussian draw of ``(sum_h, sum_J)``."""
    rng = np.random.default_rng(seed) if rng is None else rng
    sum_h = stats.mean_h + stats.sigma_h * rng.standard_normal()
    sum_J = stats.mean_J + stats.sigma_J * rng.standard_normal()
    return float(sum_h), float(sum_J)


def fit_sum_stats(n: int, h_mean: float, W: float, J_s: float, n_samples: int,
                  seed: int) -> GaussianSumStats:
    """Empirical mean/std of ``sum_h`` and ``sum_J`` over generated instances."""
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    sums = np.array([(inst.sum_h, inst.sum_J)
                     for inst in (gen_ising(n, h_mean, W, J_s, derive_seed(seed, i))
                                  for i in range(n_samples))])
    mh, mj = sums.mean(axis=0)
    sh, sj = sums.std(axis=0, ddof=1)
    return GaussianSumStats(float(mj), float(sj), float(mh), float(sh))


# -- overlaps ---------------------------------------------------------------

def _site_amplitudes(theta, spins) -> tuple[np.ndarray, np.ndarray]:
    ground, excited = site_states(theta)
    col = (np.asarray(spins) < 0).astype(int)
    rows = np.arange(len(col))
    return ground[rows, col], excited[rows, col]


def excitation_overlaps(theta, spins, k_max: int = K_MAX) -> np.ndarray:
    """``<sigma|Phi_k>`` for ``k = 0..k_max`` and a spin pattern ``sigma``.

    The sum over k-subsets is the degree-k coefficient of
    ``prod_i (g_i + e_i x)``, accumulated one site at a time.
    """
    g, e = _site_amplitudes(theta, spins)
    n = len(g)
    poly = np.zeros(k_max + 1)
    poly[0] = 1.0
    for gi, ei in zip(g, e):
        poly[1:] = poly[1:] * gi + poly[:-1] * ei
        poly[0] *= gi
    norms = np.array([sqrt(comb(n, k)) if comb(n, k) else np.inf for k in range(k_max + 1)])
    return poly / norms


def target_overlap(theta, state: PerturbativeState, spins) -> float:
    """Probability ``|<sigma|Phi~_0>|^2`` of the classical state ``sigma``."""
    amp = float(np.dot(state.coefficients, excitation_overlaps(theta, spins, len(state.coefficients) - 1)))
    return amp * amp


def excitation_basis(theta, k_max: int = K_MAX) -> np.ndarray:
    """Dense ``(2**n, k_max + 1)`` matrix whose columns are ``|Phi_k>``."""
    theta = np.asarray(theta, dtype=float)
    n = len(theta)
    linalg._check_qubits(n)
    ground, excited = site_states(theta)
    parts = [np.ones(1)] + [np.zeros(1)] * k_max
    for i in range(n):
        parts = [np.kron(parts[k], ground[i]) + (np.kron(parts[k - 1], excited[i]) if k else 0.0)
                 for k in range(k_max + 1)]
    cols = [parts[k] / sqrt(comb(n, k)) if comb(n, k) else parts[k] for k in range(k_max + 1)]
    return np.stack(cols, axis=1)


def validate_against_exact(inst: IsingInstance, theta, s_star: float, order: int = 2,
                           level_spacing: float = 1.0) -> float:
    """``|<analytic|exact>|`` for the ground state of ``H(s_star)``.

    The analytic state uses the instance's actual field and coupling sums.
    """
    theta = np.asarray(theta, dtype=float)
    path = AnnealPath.steered(ising_hamiltonian(inst), theta)
    exact = linalg.eigh(hamiltonian_at(path, s_star), 1).ground_state
    p = PerturbationParams(inst.n, s_star, inst.sum_h, inst.sum_J, level_spacing)
    state = perturbative_coefficients(p, order)
    analytic = excitation_basis(theta) @ state.coefficients
    return float(abs(np.vdot(analytic, exact)))


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class _Draw:
    sum_h: float
    sum_J: float
    spins: np.ndarray
    order: np.ndarray


def _draws(n: int, stats: GaussianSumStats, n_draws: int, seed: int) -> list[_Draw]:
    out = []
    for j in range(n_draws):
        rng = np.random.default_rng(derive_seed(seed, j))
        sum_h, sum_J = clt_sample_sums(stats, rng=rng)
        spins = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
        out.append(_Draw(sum_h, sum_J, spins, rng.permutation(n)))
    return out


def _guess_theta(draw: _Draw, Theta: float, support: np.ndarray, wrong: np.ndarray) -> np.ndarray:
    psi = np.zeros(len(draw.spins))
    psi[support] = draw.spins[support]
    psi[wrong] *= -1
    return Theta * np.sign(psi)


def overlap_vs_guess_length(n: int, s_star: float, theta_units, lg_values, n_errors: int = 0,
                            stats: GaussianSumStats = REFERENCE_SUM_STATS, n_draws: int = 20,
                            seed: int = 0, order: int = 2, level_spacing: float = 1.0):
    """Target probability against guess length, averaged over random draws.

    Each draw fixes the field/coupling sums, a random target pattern and a
    random site order; the guess of length ``L_g`` covers the first ``L_g``
    sites of that order, and the first ``n_errors`` of them are wrong. Guesses
    are therefore nested in ``L_g`` within a draw.

    Returns ``(mean, stderr)`` arrays of shape ``(len(theta_units), len(lg_values))``;
    entries with ``L_g < n_errors`` are NaN.
    """
    draws = _draws(n, stats, n_draws, seed)
    units = np.asarray(theta_units, dtype=float)
    lgs = np.asarray(lg_values, dtype=int)
    vals = np.full((len(units), len(lgs), n_draws), np.nan)
    for j, draw in enumerate(draws):
        state = perturbative_coefficients(
            PerturbationParams(n, s_star, draw.sum_h, draw.sum_J, level_spacing), order)
        for b, lg in enumerate(lgs):
            if lg < n_errors:
                continue
            support = draw.order[:lg]
            for a, u in enumerate(units):
                theta = _guess_theta(draw, u * omega(n), support, support[:n_errors])
                vals[a, b, j] = target_overlap(theta, state, draw.spins)
    return _mean_stderr(vals)


def overlap_vs_correct(n: int, L_g: int, s_star: float, theta_units, n_correct_values=None,
                       stats: GaussianSumStats = REFERENCE_SUM_STATS, n_draws: int = 20,
                       seed: int = 0, order: int = 2, level_spacing: float = 1.0):
    """Target probability against the number of correct entries in a guess of length ``L_g``."""
    draws = _draws(n, stats, n_draws, seed)
    units = np.asarray(theta_units, dtype=float)
    ncs = np.arange(L_g + 1) if n_correct_values is None else np.asarray(n_correct_values, dtype=int)
    vals = np.empty((len(units), len(ncs), n_draws))
    for j, draw in enumerate(draws):
        state = perturbative_coefficients(
            PerturbationParams(n, s_star, draw.sum_h, draw.sum_J, level_spacing), order)
        support = draw.order[:L_g]
        for b, nc in enumerate(ncs):
            for a, u in enumerate(units):
                theta = _guess_theta(draw, u * omega(n), support, support[nc:])
                vals[a, b, j] = target_overlap(theta, state, draw.spins)
    return _mean_stderr(vals)


def _mean_stderr(vals: np.ndarray):
    n = vals.shape[-1]
    with np.errstate(invalid="ignore"):
        mean = vals.mean(axis=-1)
        stderr = vals.std(axis=-1, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
    return mean, stderr
