"""Hamiltonian families and exact ground-state circuits used as anchors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, CircuitBuilder, random_clifford_brickwall
from .pauli import Hamiltonian, PauliString
from .stabilizer import conjugate_hamiltonian

__all__ = [
    "FAMILIES",
    "ModelSpec",
    "Model",
    "cluster",
    "tfi",
    "polarization",
    "random_back_evolved",
    "build_model",
    "exact_solution_circuit",
]

FAMILIES = {
    "cluster": "cluster",
    "zxz": "cluster",
    "tfi": "tfi",
    "ising": "tfi",
    "hz": "polarization_z",
    "polarization_z": "polarization_z",
    "hx": "polarization_x",
    "polarization_x": "polarization_x",
    "rand": "random_back_evolved",
    "random_back_evolved": "random_back_evolved",
}
MIN_QUBITS = {"cluster": 3, "tfi": 2, "polarization_z": 1, "polarization_x": 1, "random_back_evolved": 2}


def _canonical(family: str) -> str:
    key = family.lower().replace("-", "_")
    if key not in FAMILIES:
        raise ValueError(f"unknown model family {family!r}; choose from {sorted(set(FAMILIES.values()))}")
    return FAMILIES[key]


def _field(n: int, h: float, axis: str = "X"):
    return [(-h, PauliString.single(n, axis, j)) for j in range(n)] if h else []


def cluster(n: int, h: float = 0.0) -> Hamiltonian:
    """``-sum Z_{j-1} X_j Z_{j+1}`` with boundary terms ``X_0 Z_1`` and ``Z_{N-2} X_{N-1}``, minus ``h sum X``."""
    if n < 3:
        raise ValueError("the cluster model needs at least 3 qubits")
    terms = [(-1.0, PauliString.from_ops(n, [("X", 0), ("Z", 1)]))]
    terms += [(-1.0, PauliString.from_ops(n, [("Z", j - 1), ("X", j), ("Z", j + 1)])) for j in range(1, n - 1)]
    terms.append((-1.0, PauliString.from_ops(n, [("Z", n - 2), ("X", n - 1)])))
    return Hamiltonian.from_terms(n, terms + _field(n, h))


def tfi(n: int, h: float = 0.0) -> Hamiltonian:
    """Open transverse-field Ising chain ``-sum Z_j Z_{j+1} - h sum X_j``."""
    if n < 2:
        raise ValueError("the TFI chain needs at least 2 qubits")
    terms = [(-1.0, PauliString.from_ops(n, [("Z", j), ("Z", j + 1)])) for j in range(n - 1)]
    return Hamiltonian.from_terms(n, terms + _field(n, h))


def polarization(n: int, axis: str = "Z") -> Hamiltonian:
    """``-sum_j P_j`` for ``P`` in {X, Y, Z}."""
    return Hamiltonian.from_terms(n, _field(n, 1.0, axis.upper()))


def random_back_evolved(n: int, depth: int, seed: int) -> tuple[Hamiltonian, Hamiltonian, Circuit]:
    """``(V^dag H_Z V, H_Z, V)`` with ``V`` a reversed brickwall of frozen random two-qubit Cliffords."""
    if depth < 1:
        raise ValueError("back evolution needs depth >= 1")
    if n < 2:
        raise ValueError("back evolution needs at least 2 qubits")
    v = random_clifford_brickwall(n, depth, np.random.default_rng(seed), reverse=True)
    hz = polarization(n, "Z")
    return conjugate_hamiltonian(hz, v), hz, v


@dataclass(frozen=True)
class ModelSpec:
    family: str
    n_qubits: int
    h: float = 0.0
    depth: int | None = None
    seed: int | None = None

    def __post_init__(self):
        fam = _canonical(self.family)
        object.__setattr__(self, "family", fam)
        if self.n_qubits < MIN_QUBITS[fam]:
            raise ValueError(f"{fam} needs at least {MIN_QUBITS[fam]} qubits")
        if fam == "random_back_evolved" and (self.depth is None or self.depth < 1 or self.seed is None):
            raise ValueError("random_back_evolved needs depth >= 1 and a seed")


@dataclass(frozen=True)
class Model:
    spec: ModelSpec
    hamiltonian: Hamiltonian
    base: Hamiltonian | None = None
    v: Circuit | None = None


def build_model(spec: ModelSpec) -> Model:
    n, fam = spec.n_qubits, spec.family
    if fam == "cluster":
        return Model(spec, cluster(n, spec.h))
    if fam == "tfi":
        return Model(spec, tfi(n, spec.h))
    if fam in ("polarization_z", "polarization_x"):
        return Model(spec, polarization(n, fam[-1]))
    h, hz, v = random_back_evolved(n, spec.depth, spec.seed)
    return Model(spec, h, hz, v)


def exact_solution_circuit(family: str, n: int, h: float = 0.0) -> Circuit:
    """All-Clifford circuit preparing an exact ground state (cluster state or GHZ state)."""
    fam = _canonical(family)
    if h != 0.0 or fam not in ("cluster", "tfi"):
        raise ValueError("exact solution circuits exist for the cluster and TFI families at h = 0 only")
    b = CircuitBuilder(n)
    if fam == "cluster":
        for q in range(n):
            b.clifford("H", [q])
        for parity in (0, 1):
            for a in range(parity, n - 1, 2):
                b.clifford("CZ", [a, a + 1])
    else:
        b.clifford("H", [0])
        for a in range(n - 1):
            b.clifford("CX", [a, a + 1])
    return b.build()
