"""Dense Hermitian kernel used by every other module.

Qubit ordering is big-endian: qubit 0 is the most significant bit of a
computational-basis index, so for ``n`` qubits basis state ``b`` has qubit
``i`` in bit ``(b >> (n - 1 - i)) & 1``. Bit 0 is spin up (sigma_z = +1).

Operators are plain numpy arrays. A 1-D array is read as the diagonal of a
diagonal operator; it is only promoted to a dense matrix when mixed with
off-diagonal terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 12
HERMITIAN_TOL = 1e-12

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([1.0, -1.0])


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def ground_state(self) -> np.ndarray:
        return self.vectors[:, 0]


def _check_qubits(n_qubits: int, cap: int = MAX_QUBITS) -> None:
    if n_qubits < 1:
        raise DimensionError(f"need at least one qubit, got {n_qubits}")
    if n_qubits > cap:
        raise DimensionError(f"{n_qubits} qubits exceeds the dense cap of {cap}")


def n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def embed_single_site(axis: str, site: int, n_qubits: int, *, diagonal: bool = False,
                      cap: int = MAX_QUBITS) -> np.ndarray:
    """Return ``I x ... x sigma(axis) x ... x I`` with the Pauli on ``site``.

    With ``diagonal=True`` the z operator is returned as its 1-D diagonal.
    """
    _check_qubits(n_qubits, cap)
    if not 0 <= site < n_qubits:
        raise IndexError(f"site {site} out of range for {n_qubits} qubits")
    if axis == "z":
        bits = (np.arange(2**n_qubits) >> (n_qubits - 1 - site)) & 1
        diag = 1.0 - 2.0 * bits
        return diag if diagonal else np.diag(diag)
    if axis == "x":
        if diagonal:
            raise ValueError("sigma_x has no diagonal representation")
        left = np.eye(2**site)
        right = np.eye(2 ** (n_qubits - site - 1))
        return np.kron(np.kron(left, PAULI_X), right)
    raise ValueError(f"unknown axis {axis!r}, expected 'x' or 'z'")


def as_dense(op: np.ndarray) -> np.ndarray:
    op = np.asarray(op)
    return np.diag(op) if op.ndim == 1 else op


def check_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    op = np.asarray(op)
    if op.ndim == 1:
        if np.iscomplexobj(op) and np.abs(op.imag).max(initial=0.0) > tol:
            raise NotHermitianError("diagonal operator has complex entries")
        return
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise NotHermitianError(f"operator of shape {op.shape} is not square")
    err = np.abs(op - op.conj().T).max(initial=0.0)
    if err > tol:
        raise NotHermitianError(f"operator deviates from Hermitian by {err:.3e}")


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component made real positive; first index wins near-ties
    mags = np.abs(vectors)
    idx = np.argmax(mags >= mags.max(axis=0) - 1e-10, axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)


def eigh(op: np.ndarray, k: int | None = None, *, check: bool = True) -> EigenSystem:
    """Full (``k=None``) or lowest-``k`` spectral decomposition.

    Eigenvector phases are fixed so the largest-magnitude component is real
    and positive, which keeps overlap traces reproducible.
    """
    op = np.asarray(op)
    if check:
        check_hermitian(op)
    if op.ndim == 1:
        real = np.real(op)
        order = np.argsort(real, kind="stable")
        values = real[order]
        vectors = np.eye(len(op))[:, order]
    else:
        if np.iscomplexobj(op) and not np.any(op.imag):
            op = op.real
        values, vectors = np.linalg.eigh(op)
        vectors = _fix_phases(vectors)
    if k is not None:
        if not 1 <= k <= len(values):
            raise ValueError(f"k={k} outside 1..{len(values)}")
        values, vectors = values[:k], vectors[:, :k]
    return EigenSystem(values, vectors)


def spectral_norm(op: np.ndarray, kind: str = "spectral") -> float:
    """Largest singular value (``kind="spectral"``) or Frobenius norm."""
    op = np.asarray(op)
    check_hermitian(op)
    if kind == "frobenius":
        return float(np.sqrt(np.sum(np.abs(op) ** 2)))
    if kind != "spectral":
        raise ValueError(f"unknown norm kind {kind!r}")
    if op.ndim == 1:
        return float(np.abs(op).max(initial=0.0))
    values = np.linalg.eigvalsh(op)
    return float(max(abs(values[0]), abs(values[-1])))


def normalize(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return state / np.linalg.norm(state)


def evolve_step(op: np.ndarray, state: np.ndarray, dt: float) -> np.ndarray:
    """Apply ``exp(-i op dt)`` through a full eigendecomposition."""
    state = np.asarray(state)
    if state.shape != (np.asarray(op).shape[0],):
        raise DimensionError(f"state of shape {state.shape} does not match operator")
    op = np.asarray(op)
    if op.ndim == 1:
        return np.exp(-1j * np.real(op) * dt) * state
    es = eigh(op, check=False)
    return es.vectors @ (np.exp(-1j * es.values * dt) * (es.vectors.conj().T @ state))


def propagate(op: np.ndarray, state: np.ndarray, dt: float, tol: float = 1e-15) -> np.ndarray:
    """Apply ``exp(-i op dt)`` with a shifted, substepped Taylor series.

    Agrees with :func:`evolve_step` to ~1e-14 but avoids the O(d^3)
    eigendecomposition, which dominates ensemble runtimes. Real symmetric
    operators are applied to the real and imaginary parts in one matmul.
    """
    op = as_dense(op)
    state = np.asarray(state, dtype=complex)
    if state.shape != (op.shape[0],):
        raise DimensionError(f"state of shape {state.shape} does not match operator")
    diag = np.real(np.diag(op))
    radius = np.abs(op).sum(axis=1) - np.abs(diag)
    lo, hi = float(np.min(diag - radius)), float(np.max(diag + radius))
    shift, half_width = 0.5 * (lo + hi), 0.5 * (hi - lo)
    shifted = op - shift * np.eye(op.shape[0])
    n_sub = max(1, int(np.ceil(half_width * abs(dt) / 1.5)))
    h = dt / n_sub

    real_op = not np.iscomplexobj(shifted) or not np.any(shifted.imag)
    if real_op:
        shifted = np.real(shifted)
        x = np.stack([state.real, state.imag], axis=1)
        for _ in range(n_sub):
            acc = x.copy()
            term = x
            k = 1
            while True:
                y = shifted @ term
                # multiplication by -i maps (re, im) -> (im, -re)
                term = (h / k) * np.stack([y[:, 1], -y[:, 0]], axis=1)
                acc += term
                k += 1
                if np.abs(term).max() < tol:
                    break
            x = acc
        out = x[:, 0] + 1j * x[:, 1]
    else:
        out = state
        for _ in range(n_sub):
            acc = out.copy()
            term = out
            k = 1
            while True:
                term = (-1j * h / k) * (shifted @ term)
                acc += term
                k += 1
                if np.abs(term).max() < tol:
                    break
            out = acc
    return out * np.exp(-1j * shift * dt)
