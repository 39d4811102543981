"""Pauli strings in bit-packed symplectic form and Pauli-sum Hamiltonians.

A :class:`PauliString` stores its X and Z components as Python integers used
as bit masks (bit ``q`` belongs to qubit ``q``).  Each qubit factor is the
Hermitian Pauli (``x=1, z=1`` is ``Y``, not ``XZ``), so a string is
``sign * P_0 (x) P_1 (x) ...`` with ``sign`` in {+1, -1}.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

__all__ = [
    "PauliString",
    "Hamiltonian",
    "pauli_mul",
    "commutes",
    "ham_norms",
    "ham_locality",
    "herm_product_exponent",
]

_AXES = "IXZY"  # index = x + 2 z
_PHASES = (1, 1j, -1, -1j)


def herm_product_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent ``e`` (mod 4) with ``herm(x1,z1) herm(x2,z2) = i**e herm(x1^x2, z1^z2)``."""
    x3, z3 = x1 ^ x2, z1 ^ z2
    e = (x1 & z1).bit_count() + (x2 & z2).bit_count() + 2 * (z1 & x2).bit_count()
    return (e - (x3 & z3).bit_count()) % 4


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    x: int = 0
    z: int = 0
    sign: int = 1

    def __post_init__(self):
        for name in ("n_qubits", "x", "z", "sign"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise DimensionError("bit masks exceed n_qubits")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_ops(cls, n_qubits: int, ops: Iterable[tuple[str, int]], sign: int = 1) -> "PauliString":
        """Build from ``[(axis, qubit), ...]``; repeated qubits multiply (phase must stay real)."""
        out = cls(n_qubits, sign=sign)
        for axis, q in ops:
            axis = axis.upper()
            if axis not in "IXYZ" or len(axis) != 1:
                raise ValueError(f"unknown Pauli axis {axis!r}")
            if not 0 <= q < n_qubits:
                raise DimensionError(f"qubit {q} out of range for {n_qubits} qubits")
            if axis == "I":
                continue
            bit = 1 << q
            single = cls(n_qubits, bit if axis in "XY" else 0, bit if axis in "ZY" else 0)
            phase, out = pauli_mul(out, single)
            if phase.imag != 0:
                raise ValueError("operator list multiplies to a non-Hermitian Pauli")
            out = out.with_sign(out.sign * int(phase.real))
        return out

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Dense label such as ``"-XIZY"``; character ``k`` acts on qubit ``k``."""
        sign = 1
        if label[:1] in "+-":
            sign = -1 if label[0] == "-" else 1
            label = label[1:]
        return cls.from_ops(len(label), [(c, q) for q, c in enumerate(label)], sign)

    @classmethod
    def single(cls, n_qubits: int, axis: str, qubit: int) -> "PauliString":
        return cls.from_ops(n_qubits, [(axis, qubit)])

    def with_sign(self, sign: int) -> "PauliString":
        return PauliString(self.n_qubits, self.x, self.z, sign)

    def unsigned(self) -> "PauliString":
        return self.with_sign(1)

    def __neg__(self) -> "PauliString":
        return self.with_sign(-self.sign)

    def __mul__(self, other: "PauliString"):
        return pauli_mul(self, other)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x | self.z
        return tuple(q for q in range(self.n_qubits) if (m >> q) & 1)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def axis(self, q: int) -> str:
        return _AXES[((self.x >> q) & 1) + 2 * ((self.z >> q) & 1)]

    def ops(self) -> list[tuple[str, int]]:
        return [(self.axis(q), q) for q in self.support]

    def label(self) -> str:
        body = "".join(self.axis(q) for q in range(self.n_qubits))
        return ("-" if self.sign < 0 else "+") + body

    def word(self) -> str:
        """Sparse word such as ``Z0 X1 Z2`` (sign not included)."""
        return " ".join(f"{a}{q}" for a, q in self.ops()) or "I"

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"

    def restrict(self, qubits: Sequence[int]) -> tuple[int, int]:
        """Local ``(x, z)`` bits on ``qubits`` (bit ``i`` = ``qubits[i]``)."""
        lx = lz = 0
        for i, q in enumerate(qubits):
            lx |= ((self.x >> q) & 1) << i
            lz |= ((self.z >> q) & 1) << i
        return lx, lz

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**n`` matrix; qubit 0 is the leftmost tensor factor."""
        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.array([[self.sign]], dtype=complex)
        for q in range(self.n_qubits):
            out = np.kron(out, mats[self.axis(q)])
        return out


def _check_sizes(a: PauliString, b: PauliString):
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def pauli_mul(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, p)`` with ``a @ b == phase * p``; ``p.sign = a.sign * b.sign``."""
    _check_sizes(a, b)
    e = herm_product_exponent(a.x, a.z, b.x, b.z)
    return _PHASES[e], PauliString(a.n_qubits, a.x ^ b.x, a.z ^ b.z, a.sign * b.sign)


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_sizes(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


_WORD_RE = re.compile(r"^([IXYZixyz])(\d+)$")


def _parse_word(tokens: Sequence[str]) -> list[tuple[str, int]]:
    ops = []
    for tok in tokens:
        if tok.upper() == "I":
            continue
        m = _WORD_RE.match(tok)
        if not m:
            raise ValueError(f"bad Pauli token {tok!r}")
        ops.append((m.group(1).upper(), int(m.group(2))))
    return ops


@dataclass(frozen=True)
class Hamiltonian:
    """Traceless Pauli sum ``sum_j coeff_j * h_j`` plus a recorded constant ``offset``.

    Use :meth:`from_terms`; it strips identity terms into ``offset``, merges
    duplicate strings and folds string signs into the coefficients.
    """

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]
    offset: float = 0.0
    l1_norm: float = field(init=False)
    l2_norm: float = field(init=False)
    locality: int = field(init=False)

    def __post_init__(self):
        seen = set()
        for c, p in self.terms:
            if p.n_qubits != self.n_qubits:
                raise DimensionError("term size does not match Hamiltonian size")
            if p.is_identity:
                raise ValueError("identity terms must be moved to the offset")
            if p.sign != 1:
                raise ValueError("term strings must carry sign +1")
            if (p.x, p.z) in seen:
                raise ValueError(f"duplicate term {p.word()}")
            seen.add((p.x, p.z))
        coeffs = np.array([c for c, _ in self.terms], dtype=float)
        object.__setattr__(self, "l1_norm", float(np.abs(coeffs).sum()))
        object.__setattr__(self, "l2_norm", float(np.sqrt((coeffs**2).sum())))
        object.__setattr__(self, "locality", max((p.weight for _, p in self.terms), default=0))

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[float, PauliString]], offset: float = 0.0) -> "Hamiltonian":
        merged: dict[tuple[int, int], float] = {}
        order: list[tuple[int, int]] = []
        for c, p in terms:
            if p.n_qubits != n_qubits:
                raise DimensionError(f"term on {p.n_qubits} qubits in a {n_qubits}-qubit Hamiltonian")
            c = float(c) * p.sign
            if p.is_identity:
                offset += c
                continue
            key = (p.x, p.z)
            if key not in merged:
                order.append(key)
                merged[key] = 0.0
            merged[key] += c
        out = tuple((merged[k], PauliString(n_qubits, *k)) for k in order if merged[k] != 0.0)
        return cls(n_qubits, out, float(offset))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=float)

    @property
    def strings(self) -> list[PauliString]:
        return [p for _, p in self.terms]

    def scaled(self, factor: float) -> "Hamiltonian":
        return Hamiltonian.from_terms(self.n_qubits, [(c * factor, p) for c, p in self.terms], self.offset * factor)

    def shifted(self, constant: float) -> "Hamiltonian":
        return Hamiltonian(self.n_qubits, self.terms, self.offset + constant)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        return (self.n_qubits, self.terms, self.offset) == (other.n_qubits, other.terms, other.offset)

    def __hash__(self):
        return hash((self.n_qubits, self.terms, self.offset))

    # -- dense / sparse forms -------------------------------------------------

    def to_sparse(self):
        """CSR matrix (offset included), basis index with qubit 0 most significant."""
        import scipy.sparse as sp

        n = self.n_qubits
        dim = 1 << n
        idx = np.arange(dim, dtype=np.int64)
        rows, cols, data = [], [], []
        for c, p in self.terms:
            xm, zm = _big_endian_mask(p.x, n), _big_endian_mask(p.z, n)
            # P|b> = i^{x.z} (-1)^{z.b} |b ^ x>
            ph = (1j) ** ((p.x & p.z).bit_count() % 4) * (1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1))
            rows.append(idx ^ xm)
            cols.append(idx)
            data.append(c * ph)
        if self.offset:
            rows.append(idx)
            cols.append(idx)
            data.append(np.full(dim, self.offset, dtype=complex))
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        m = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )
        return m.tocsr()

    def to_matrix(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def ground_energy(self) -> float:
        """Lowest eigenvalue, dense for small sizes and Lanczos (``eigsh``) otherwise."""
        if self.n_qubits <= 10:
            return float(np.linalg.eigvalsh(self.to_matrix())[0])
        from scipy.sparse.linalg import eigsh

        vals = eigsh(self.to_sparse(), k=1, which="SA", tol=1e-12, return_eigenvectors=False)
        return float(vals[0])

    # -- serialization ---------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"# n_qubits: {self.n_qubits}"]
        if self.offset:
            lines.append(f"{self.offset!r} I")
        lines += [f"{c!r} {p.word()}" for c, p in self.terms]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, n_qubits: int | None = None) -> "Hamiltonian":
        """Parse ``<coeff> <pauli-word>`` lines (``#`` comments, blank lines ignored).

        The qubit count comes from ``n_qubits``, else from a ``# n_qubits: N``
        comment, else from the largest qubit index.
        """
        raw: list[tuple[float, list[tuple[str, int]]]] = []
        declared = None
        for lineno, line in enumerate(text.splitlines(), 1):
            m = re.match(r"^\s*#\s*n_qubits\s*[:=]\s*(\d+)", line)
            if m:
                declared = int(m.group(1))
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            try:
                coeff = float(toks[0])
                ops = _parse_word(toks[1:])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            raw.append((coeff, ops))
        n = n_qubits or declared or (max((q for _, ops in raw for _, q in ops), default=0) + 1)
        terms = [(c, PauliString.from_ops(n, ops)) for c, ops in raw]
        return cls.from_terms(n, terms)

    def to_dict(self) -> dict:
        out = {
            "n_qubits": self.n_qubits,
            "terms": [{"coeff": c, "paulis": [[a, q] for a, q in p.ops()]} for c, p in self.terms],
        }
        if self.offset:
            out["offset"] = self.offset
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Hamiltonian":
        n = int(d["n_qubits"])
        terms = [(t["coeff"], PauliString.from_ops(n, [(a, int(q)) for a, q in t["paulis"]])) for t in d["terms"]]
        return cls.from_terms(n, terms, float(d.get("offset", 0.0)))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def load(cls, path) -> "Hamiltonian":
        with open(path) as fh:
            text = fh.read()
        if str(path).endswith(".json"):
            return cls.from_dict(json.loads(text))
        return cls.parse(text)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json(indent=1) if str(path).endswith(".json") else self.to_text())


def _big_endian_mask(bits: int, n: int) -> int:
    """Map qubit-indexed bits to basis-index bits (qubit 0 is the most significant)."""
    out = 0
    while bits:
        q = (bits & -bits).bit_length() - 1
        out |= 1 << (n - 1 - q)
        bits &= bits - 1
    return out


def ham_norms(h: Hamiltonian) -> tuple[float, float]:
    return h.l1_norm, h.l2_norm


def ham_locality(h: Hamiltonian) -> int:
    if not h.terms:
        raise ValueError("locality of an empty Hamiltonian is undefined")
    return h.locality


def norm_ratio(h: Hamiltonian) -> float:
    """``||lambda||_2 / ||lambda||_1``."""
    return h.l2_norm / h.l1_norm if h.l1_norm else math.nan
