"""Guess vectors and the rotated initial Hamiltonian.

A guess ``psi`` holds one entry per qubit: +1 (spin up, bit 0), -1 (spin
down, bit 1) or 0 (no information). The per-qubit tilt is
``theta_i = Theta * sign(psi_i)`` and the initial Hamiltonian becomes

    H0(theta) = -sum_i (cos(theta_i) X_i + sin(theta_i) Z_i)

which at ``Theta = 0`` is the usual transverse-field driver ``-sum_i X_i``.
Angles are passed in radians; ``omega(n)`` is the natural unit.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .models import IsingInstance, spins_of


def omega(n: int) -> float:
    """Angle between ``|+>^n`` and any basis state: ``arccos(2**(-n/2))``."""
    if n < 1:
        raise ValueError("need n >= 1")
    return float(np.arccos(2.0 ** (-n / 2)))


def theta_from_units(units: float, n: int) -> float:
    return float(units) * omega(n)


def as_guess(psi) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.ndim != 1 or not np.all(np.isin(psi, (-1, 0, 1))):
        raise ValueError("guess entries must be -1, 0 or +1")
    return psi.astype(np.int8)


def guess_length(psi) -> int:
    return int(np.count_nonzero(as_guess(psi)))


def theta_vector(psi, Theta: float) -> np.ndarray:
    return float(Theta) * np.sign(as_guess(psi)).astype(float)


def rotated_initial_hamiltonian(theta) -> np.ndarray:
    """Dense ``H0(theta)``; the z parts are accumulated on the diagonal."""
    theta = np.asarray(theta, dtype=float)
    n = len(theta)
    linalg._check_qubits(n)
    H = np.zeros((2**n, 2**n))
    diag = np.zeros(2**n)
    for i, t in enumerate(theta):
        H -= np.cos(t) * linalg.embed_single_site("x", i, n)
        diag -= np.sin(t) * linalg.embed_single_site("z", i, n, diagonal=True)
    H[np.diag_indices_from(H)] += diag
    return H


def site_states(theta) -> tuple[np.ndarray, np.ndarray]:
    """Per-site ground and excited states of ``-(cos t X + sin t Z)``.

    Returns two ``(n, 2)`` arrays with components (up, down)::

        ground  = ( sqrt(1 + sin t),  sqrt(1 - sin t)) / sqrt(2)
        excited = (-sqrt(1 - sin t),  sqrt(1 + sin t)) / sqrt(2)

    The excited-state sign makes ``<excited|Z|ground> = -cos t``.
    """
    st = np.sin(np.asarray(theta, dtype=float))
    # clip guards sin t = +-1 rounding past the square-root domain
    a = np.sqrt(np.clip(1 + st, 0, 2) / 2)
    b = np.sqrt(np.clip(1 - st, 0, 2) / 2)
    return np.stack([a, b], axis=1), np.stack([-b, a], axis=1)


def product_state(factors) -> np.ndarray:
    out = np.ones(1)
    for f in factors:
        out = np.kron(out, f)
    return out


def rotated_initial_ground_state(theta) -> np.ndarray:
    ground, _ = site_states(theta)
    return product_state(ground).astype(complex)


def highest_field_guess(inst: IsingInstance) -> np.ndarray:
    """Guess only the spin with the largest ``|h_i|``, oriented to lower ``h_i Z_i``."""
    h = inst.h
    if not np.any(h):
        raise ValueError("all local fields are zero; no orientation is preferred")
    i = int(np.argmax(np.abs(h)))  # argmax returns the lowest index on ties
    psi = np.zeros(inst.n, dtype=np.int8)
    psi[i] = -int(np.sign(h[i]))
    return psi


def guess_from_solution(solution: int, n: int, L_g: int, n_errors: int, seed: int) -> np.ndarray:
    """Guess ``L_g`` randomly chosen spins of ``solution`` with ``n_errors`` flipped.

    The support is drawn first and the flipped sites are a prefix of a
    random permutation of it, so for a fixed seed the error sets are nested
    as ``n_errors`` grows and the support does not change.
    """
    if not 0 <= n_errors <= L_g <= n:
        raise ValueError(f"need 0 <= n_errors ({n_errors}) <= L_g ({L_g}) <= n ({n})")
    rng = np.random.default_rng(seed)
    support = rng.choice(n, size=L_g, replace=False)
    flipped = rng.permutation(support)[:n_errors]
    target = spins_of(solution, n)
    psi = np.zeros(n, dtype=np.int8)
    psi[support] = target[support]
    psi[flipped] *= -1
    return psi


def guess_accuracy(psi, solution: int) -> tuple[int, int]:
    """``(correct, wrong)`` counts over the nonzero entries of ``psi``."""
    psi = as_guess(psi)
    target = spins_of(solution, len(psi))
    on = psi != 0
    correct = int(np.sum(psi[on] == target[on]))
    return correct, int(on.sum()) - correct
