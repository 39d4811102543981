"""Random circuits and Pauli strings shared by the engine cross-check tests."""

import numpy as np

from rflab.circuit import CircuitBuilder
from rflab.pauli import PauliString
from rflab.stabilizer import StabilizerState
from rflab.statevector import apply_pauli, evolve

SINGLE = ["H", "S", "SDG", "X", "Y", "Z"]
PAIR = ["CX", "CZ", "SWAP"]


def random_circuit(rng, n, n_ops):
    b = CircuitBuilder(n, str(rng.choice(["zero", "plus"])))
    for _ in range(n_ops):
        kind = rng.integers(4)
        if kind == 0:
            w = int(rng.integers(1, n + 1))
            axes = "".join(rng.choice(list("XYZ"), size=w))
            b.rotation(axes, [int(q) for q in rng.choice(n, size=w, replace=False)])
        elif kind == 1:
            b.clifford(str(rng.choice(SINGLE)), [int(rng.integers(n))])
        elif n == 1:
            b.clifford("C1", [0], int(rng.integers(24)))
        elif kind == 2:
            b.clifford(str(rng.choice(PAIR)), [int(q) for q in rng.choice(n, 2, replace=False)])
        else:
            b.clifford("C2", [int(q) for q in rng.choice(n, 2, replace=False)], int(rng.integers(11520)))
    return b.build()


def random_paulis(rng, n, count):
    return [
        PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)), int(rng.choice([-1, 1])))
        for _ in range(count)
    ]


def cross_check(rng, max_qubits=6, max_ops=20, n_paulis=8):
    """Largest |stabilizer - dense| over random Paulis for one random circuit at a random discrete point."""
    n = int(rng.integers(1, max_qubits + 1))
    c = random_circuit(rng, n, int(rng.integers(1, max_ops + 1)))
    ks = rng.integers(4, size=(1, c.n_params))
    st = StabilizerState.init(n, c.initial_state).run(c, ks)
    psi = evolve(c, ks * np.pi / 2)[0]
    ps = random_paulis(rng, n, n_paulis)
    exact = st.expectations(ps)[0]
    dense = np.array([np.vdot(psi, apply_pauli(psi, p)).real for p in ps])
    return float(np.abs(exact - dense).max())
