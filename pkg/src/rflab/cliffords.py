"""Small Clifford groups as Pauli lookup tables.

A Clifford ``U`` on ``w`` qubits is stored by its conjugation action on the
``4**w`` local Hermitian Paulis: ``U P_c U^dag = (-1)**flip[c] * P_{new[c]}``.
Local Pauli codes pack qubit ``i`` as bits ``2i`` (x) and ``2i+1`` (z).

The full groups for ``w = 1, 2`` (orders 24 and 11520, modulo global phase)
are enumerated once from the symplectic group ``Sp(2w, 2)`` times all sign
choices on the generator images, so that uniform sampling over table indices
is exactly uniform over the group.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

from .pauli import herm_product_exponent

__all__ = [
    "GATE_MATRICES",
    "code_to_xz",
    "xz_to_code",
    "local_pauli_matrix",
    "table_from_unitary",
    "unitary_from_table",
    "clifford_group",
    "group_unitaries",
    "named_table",
    "rotation_unitary",
]

_s2 = 1 / np.sqrt(2)
GATE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "H": np.array([[_s2, _s2], [_s2, -_s2]], dtype=complex),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def code_to_xz(code: int, w: int) -> tuple[int, int]:
    x = z = 0
    for i in range(w):
        x |= ((code >> (2 * i)) & 1) << i
        z |= ((code >> (2 * i + 1)) & 1) << i
    return x, z


def xz_to_code(x: int, z: int, w: int) -> int:
    code = 0
    for i in range(w):
        code |= ((x >> i) & 1) << (2 * i) | ((z >> i) & 1) << (2 * i + 1)
    return code


def local_pauli_matrix(code: int, w: int) -> np.ndarray:
    """Hermitian Pauli for ``code``; local qubit 0 is the leftmost tensor factor."""
    out = np.ones((1, 1), dtype=complex)
    for i in range(w):
        k = (code >> (2 * i)) & 3
        out = np.kron(out, GATE_MATRICES["IXZY"[k]])
    return out


@lru_cache(maxsize=None)
def _pauli_basis(w: int) -> np.ndarray:
    return np.array([local_pauli_matrix(c, w) for c in range(4**w)])


def table_from_unitary(u: np.ndarray, atol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Conjugation table of a Clifford unitary; raises if ``u`` is not Clifford."""
    dim = u.shape[0]
    w = dim.bit_length() - 1
    basis = _pauli_basis(w)
    images = u @ basis @ u.conj().T
    # overlaps[c, d] = Tr(P_d Q_c) / dim
    overlaps = np.einsum("dij,cji->cd", basis, images) / dim
    new = np.abs(overlaps).argmax(axis=1)
    vals = overlaps[np.arange(len(new)), new]
    if not np.allclose(np.abs(vals), 1.0, atol=atol) or not np.allclose(vals.imag, 0.0, atol=atol):
        raise ValueError("matrix is not a Clifford unitary")
    return new.astype(np.uint16), (vals.real < 0).astype(np.uint8)


def unitary_from_table(new: np.ndarray, flip: np.ndarray) -> np.ndarray:
    """A unitary (up to global phase) realising the conjugation table."""
    w = (len(new).bit_length() - 1) // 2
    dim = 1 << w

    def image(c):
        return (-1.0 if flip[c] else 1.0) * local_pauli_matrix(int(new[c]), w)

    proj = np.eye(dim, dtype=complex)
    for i in range(w):
        proj = proj @ (np.eye(dim) + image(1 << (2 * i + 1))) / 2
    col = np.abs(proj).sum(axis=0).argmax()
    psi0 = proj[:, col] / np.linalg.norm(proj[:, col])
    u = np.empty((dim, dim), dtype=complex)
    for b in range(dim):
        v = psi0
        for i in range(w):
            # basis index: local qubit 0 is the most significant bit
            if (b >> (w - 1 - i)) & 1:
                v = image(1 << (2 * i)) @ v
        u[:, b] = v
    return u


def _omega(u: int, v: int, w: int) -> int:
    ux, uz = code_to_xz(u, w)
    vx, vz = code_to_xz(v, w)
    return ((ux & vz).bit_count() + (uz & vx).bit_count()) & 1


@lru_cache(maxsize=None)
def symplectic_images(w: int) -> tuple[tuple[int, ...], ...]:
    """All ``Sp(2w, 2)`` elements as the images of the generators ``X_0, Z_0, X_1, Z_1, ...``."""
    gens = [1 << k for k in range(2 * w)]
    nonzero = range(1, 4**w)
    out = []

    def extend(chosen):
        k = len(chosen)
        if k == len(gens):
            out.append(tuple(chosen))
            return
        for v in nonzero:
            if all(_omega(chosen[j], v, w) == _omega(gens[j], gens[k], w) for j in range(k)):
                extend(chosen + [v])

    extend([])
    return tuple(out)


def _table_from_images(images: tuple[int, ...], signs: tuple[int, ...], w: int):
    n = 4**w
    new = np.zeros(n, dtype=np.uint16)
    flip = np.zeros(n, dtype=np.uint8)
    img_xz = [code_to_xz(c, w) for c in images]
    for c in range(n):
        x, z = code_to_xz(c, w)
        # herm(x, z) = i^{|x&z|} prod_q X_q^{x_q} Z_q^{z_q}
        e = (x & z).bit_count()
        ax = az = 0
        for i in range(w):
            for k, bit in ((2 * i, (x >> i) & 1), (2 * i + 1, (z >> i) & 1)):
                if bit:
                    gx, gz = img_xz[k]
                    e += herm_product_exponent(ax, az, gx, gz) + 2 * signs[k]
                    ax, az = ax ^ gx, az ^ gz
        e %= 4
        if e % 2:
            raise AssertionError("non-Hermitian image; generator images are not symplectic")
        new[c] = xz_to_code(ax, az, w)
        flip[c] = e // 2
    return new, flip


@lru_cache(maxsize=None)
def clifford_group(w: int) -> tuple[np.ndarray, np.ndarray]:
    """Tables of every ``w``-qubit Clifford modulo phase: arrays of shape ``(|C_w|, 4**w)``."""
    if w not in (1, 2):
        raise ValueError("only 1- and 2-qubit Clifford groups are enumerated")
    news, flips = [], []
    for images in symplectic_images(w):
        for signs in product((0, 1), repeat=2 * w):
            n, f = _table_from_images(images, signs, w)
            news.append(n)
            flips.append(f)
    new, flip = np.array(news), np.array(flips)
    new.setflags(write=False)
    flip.setflags(write=False)
    return new, flip


@lru_cache(maxsize=None)
def group_unitaries(w: int) -> np.ndarray:
    """Dense unitaries for every element of :func:`clifford_group`, same order."""
    new, flip = clifford_group(w)
    out = np.array([unitary_from_table(n, f) for n, f in zip(new, flip)])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def named_table(name: str) -> tuple[int, np.ndarray, np.ndarray]:
    u = GATE_MATRICES[name.upper()]
    new, flip = table_from_unitary(u)
    return (u.shape[0].bit_length() - 1), new, flip


def rotation_unitary(code: int, w: int, theta: float) -> np.ndarray:
    """``exp(-i theta P / 2)`` for the local Pauli ``code``."""
    p = local_pauli_matrix(code, w)
    return np.cos(theta / 2) * np.eye(1 << w) - 1j * np.sin(theta / 2) * p
