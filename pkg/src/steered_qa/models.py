"""Problem instances: random long-range Ising and unique-solution 1-in-3 SAT.

Spin convention: bit 0 is sigma_z = +1 (spin up, SAT value false), bit 1 is
sigma_z = -1 (spin down, SAT value true). Bits are big-endian (qubit 0 is the
most significant bit of the basis index).

Randomness comes from numpy's PCG64 via ``np.random.default_rng``. Ensemble
members get ``derive_seed(master_seed, index)``, a SeedSequence hash of the
pair, so any member can be regenerated on its own.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

FORMAT_VERSION = 1
MAX_ENUMERATION_QUBITS = 24
TIE_TOL = 1e-12


class GenerationError(RuntimeError):
    """Raised when the 3SAT generator runs out of attempts."""


class InstanceFormatError(ValueError):
    pass


def derive_seed(master_seed: int, index: int) -> int:
    """Child seed for ensemble member ``index``: SeedSequence([master, index])."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def bit_table(n: int) -> np.ndarray:
    """``(2**n, n)`` array of bits, column ``i`` is qubit ``i``."""
    idx = np.arange(2**n)
    return ((idx[:, None] >> (n - 1 - np.arange(n))) & 1).astype(np.int8)


def spin_table(n: int) -> np.ndarray:
    """``(2**n, n)`` array of sigma_z eigenvalues (+1 for bit 0)."""
    return (1 - 2 * bit_table(n)).astype(np.int8)


def spins_of(index: int, n: int) -> np.ndarray:
    bits = (int(index) >> (n - 1 - np.arange(n))) & 1
    return (1 - 2 * bits).astype(np.int8)


def index_of(spins) -> int:
    bits = (1 - np.asarray(spins, dtype=int)) // 2
    return int(sum(int(b) << (len(bits) - 1 - i) for i, b in enumerate(bits)))


@dataclass(frozen=True)
class DiagonalHamiltonian:
    """Diagonal problem Hamiltonian stored as one energy per basis state."""

    energies: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def n(self) -> int:
        return int(self.dim).bit_length() - 1


@dataclass(frozen=True)
class IsingInstance:
    n: int
    h: np.ndarray
    J: np.ndarray  # (n, n), nonzero only for j > i
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        J = np.asarray(self.J, dtype=float)
        if h.shape != (self.n,) or J.shape != (self.n, self.n):
            raise InstanceFormatError(f"field/coupling shapes {h.shape}, {J.shape} do not match n={self.n}")
        if np.any(np.tril(J) != 0):
            raise InstanceFormatError("couplings must be strictly upper triangular")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)

    def __eq__(self, other):
        if not isinstance(other, IsingInstance):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.h, other.h)
                and np.array_equal(self.J, other.J) and self.meta == other.meta)

    @property
    def sum_h(self) -> float:
        return float(self.h.sum())

    @property
    def sum_J(self) -> float:
        return float(self.J.sum())


@dataclass(frozen=True)
class SatInstance:
    n: int
    clauses: tuple[tuple[int, int, int], ...]
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        clauses = tuple(tuple(int(v) for v in c) for c in self.clauses)
        for c in clauses:
            if len(c) != 3 or len(set(c)) != 3:
                raise InstanceFormatError(f"clause {c} must have three distinct variables")
            if min(c) < 0 or max(c) >= self.n:
                raise InstanceFormatError(f"clause {c} has a variable outside [0, {self.n})")
        object.__setattr__(self, "clauses", clauses)


def gen_ising(n: int, h_mean: float, W: float, J_s: float, seed: int) -> IsingInstance:
    """Random long-range Ising instance.

    ``J_ij ~ U[-J_s, J_s]`` for ``i < j`` (row-major order) and
    ``h_i = h_mean + U[-W, W]``, both drawn from ``default_rng(seed)``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if W < 0 or J_s <= 0:
        raise ValueError("need W >= 0 and J_s > 0")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    J = np.zeros((n, n))
    J[iu] = rng.uniform(-J_s, J_s, size=len(iu[0]))
    h = h_mean + rng.uniform(-W, W, size=n) if W > 0 else np.full(n, float(h_mean))
    meta = {"h_mean": float(h_mean), "W": float(W), "J_s": float(J_s), "seed": int(seed)}
    return IsingInstance(n, h, J, meta)


def ising_hamiltonian(inst: IsingInstance) -> DiagonalHamiltonian:
    s = spin_table(inst.n).astype(float)
    energies = s @ inst.h + np.einsum("bi,ij,bj->b", s, inst.J, s)
    return DiagonalHamiltonian(energies)


def _clause_true_counts(n: int, clauses) -> np.ndarray:
    bits = bit_table(n).astype(np.int64)
    if not clauses:
        return np.zeros((2**n, 0), dtype=np.int64)
    return np.stack([bits[:, list(c)].sum(axis=1) for c in clauses], axis=1)


def satisfying_assignments(inst: SatInstance) -> np.ndarray:
    """Basis indices where every clause has exactly one true variable."""
    if inst.n > MAX_ENUMERATION_QUBITS:
        raise ValueError(f"n={inst.n} too large to enumerate")
    counts = _clause_true_counts(inst.n, inst.clauses)
    return np.flatnonzero(np.all(counts == 1, axis=1))


def count_satisfying(inst: SatInstance) -> int:
    return len(satisfying_assignments(inst))


def sat_hamiltonian(inst: SatInstance) -> DiagonalHamiltonian:
    counts = _clause_true_counts(inst.n, inst.clauses)
    return DiagonalHamiltonian(((counts - 1) ** 2).sum(axis=1).astype(float))


def gen_unique_3sat(n: int, seed: int, max_attempts: int = 10_000) -> SatInstance:
    """Grow a random 1-in-3 clause set until exactly one assignment survives.

    A drawn triple is kept only if some assignment still satisfies every
    clause; repeated clauses are skipped. Each draw counts as an attempt.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    rng = np.random.default_rng(seed)
    triples = list(itertools.combinations(range(n), 3))
    bits = bit_table(n).astype(np.int64)
    alive = np.ones(2**n, dtype=bool)
    clauses: list[tuple[int, int, int]] = []
    for _ in range(max_attempts):
        c = triples[rng.integers(len(triples))]
        if c in clauses:
            continue
        keep = alive & (bits[:, list(c)].sum(axis=1) == 1)
        if not keep.any():
            continue
        clauses.append(c)
        alive = keep
        if alive.sum() == 1:
            return SatInstance(n, tuple(clauses), {"seed": int(seed)})
    raise GenerationError(f"no unique-solution instance after {max_attempts} draws (seed {seed})")


def ground_state_of_diagonal(H: DiagonalHamiltonian | np.ndarray, tol: float = TIE_TOL):
    """``(index, energy, degeneracy)`` of the minimum of a diagonal Hamiltonian."""
    energies = H.energies if isinstance(H, DiagonalHamiltonian) else np.asarray(H)
    idx = int(np.argmin(energies))
    e0 = float(energies[idx])
    return idx, e0, int(np.sum(energies <= e0 + tol))


def ground_manifold(H: DiagonalHamiltonian, tol: float = TIE_TOL) -> np.ndarray:
    e = H.energies
    return np.flatnonzero(e <= e.min() + tol)


# -- serialization ---------------------------------------------------------

def instance_to_dict(inst: IsingInstance | SatInstance) -> dict:
    if isinstance(inst, IsingInstance):
        iu = zip(*np.nonzero(np.triu(np.ones((inst.n, inst.n)), k=1)))
        return {
            "format_version": FORMAT_VERSION,
            "kind": "ising",
            "n": inst.n,
            "h": [float(v) for v in inst.h],
            "J": [{"i": int(i), "j": int(j), "value": float(inst.J[i, j])} for i, j in iu],
            "meta": dict(inst.meta),
        }
    return {
        "format_version": FORMAT_VERSION,
        "kind": "sat3",
        "n": inst.n,
        "clauses": [list(c) for c in inst.clauses],
        "meta": dict(inst.meta),
    }


def _require(d: dict, key: str):
    if key not in d:
        raise InstanceFormatError(f"missing field {key!r}")
    return d[key]


def instance_from_dict(d: dict) -> IsingInstance | SatInstance:
    version = _require(d, "format_version")
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported format_version {version}")
    kind = _require(d, "kind")
    n = int(_require(d, "n"))
    meta = dict(d.get("meta", {}))
    if kind == "ising":
        h = np.asarray(_require(d, "h"), dtype=float)
        J = np.zeros((n, n))
        for entry in _require(d, "J"):
            i, j = int(_require(entry, "i")), int(_require(entry, "j"))
            if not 0 <= i < j < n:
                raise InstanceFormatError(f"coupling index ({i}, {j}) invalid for n={n}")
            J[i, j] = float(_require(entry, "value"))
        return IsingInstance(n, h, J, meta)
    if kind == "sat3":
        return SatInstance(n, tuple(tuple(c) for c in _require(d, "clauses")), meta)
    raise InstanceFormatError(f"unknown instance kind {kind!r}")


def serialize_instance(inst: IsingInstance | SatInstance) -> str:
    # json writes floats with repr, so the round trip is exact
    return json.dumps(instance_to_dict(inst), indent=2)


def deserialize_instance(text: str) -> IsingInstance | SatInstance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise InstanceFormatError("instance document must be a JSON object")
    return instance_from_dict(d)
