"""Batched stabilizer tableaux with destabilizers.

A :class:`StabilizerState` holds ``B`` independent N-qubit stabilizer states
at once.  Rows ``0..N-1`` are destabilizers, rows ``N..2N-1`` stabilizers;
each row is a signed Hermitian Pauli packed into ``uint64`` words
(qubit ``q`` lives in word ``q // 64``, bit ``q % 64``).

Everything is vectorized over the batch axis, which is what the Monte-Carlo
sampler needs: one pass over the circuit evolves thousands of samples.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, Clifford, RandomClifford, Rotation
from .cliffords import clifford_group, named_table
from .errors import DimensionError, EngineError
from .pauli import Hamiltonian, PauliString

__all__ = ["StabilizerState", "pauli_words", "conjugate_pauli", "conjugate_hamiltonian"]

_ONE = np.uint64(1)


def _n_words(n: int) -> int:
    return (n + 63) // 64


def pauli_words(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """X and Z masks of ``p`` as ``uint64`` word arrays."""
    w = _n_words(p.n_qubits)
    mask = (1 << 64) - 1
    x = np.array([(p.x >> (64 * i)) & mask for i in range(w)], dtype=np.uint64)
    z = np.array([(p.z >> (64 * i)) & mask for i in range(w)], dtype=np.uint64)
    return x, z


def _popcount(a: np.ndarray) -> np.ndarray:
    """Popcount summed over the trailing word axis."""
    return np.bitwise_count(a).sum(axis=-1, dtype=np.int64)


def _product_exponent(ax, az, bx, bz):
    """``herm(a) herm(b) = i**e herm(a ^ b)``; ``e`` returned unreduced, word axis last."""
    nx, nz = ax ^ bx, az ^ bz
    return _popcount(ax & az) + _popcount(bx & bz) + 2 * _popcount(az & bx) - _popcount(nx & nz)


class StabilizerState:
    def __init__(self, n_qubits: int, x: np.ndarray, z: np.ndarray, r: np.ndarray):
        self.n_qubits = n_qubits
        self.x, self.z, self.r = x, z, r

    @classmethod
    def init(cls, n_qubits: int, which: str = "zero", batch: int = 1) -> "StabilizerState":
        """``|0...0>`` or ``|+...+>`` repeated ``batch`` times."""
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if which not in ("zero", "plus"):
            raise ValueError("which must be 'zero' or 'plus'")
        n, w = n_qubits, _n_words(n_qubits)
        x = np.zeros((batch, 2 * n, w), dtype=np.uint64)
        z = np.zeros_like(x)
        for q in range(n):
            word, bit = divmod(q, 64)
            # destabilizer X_q / stabilizer Z_q for |0>, roles of X and Z swapped for |+>
            d, s = (x, z) if which == "zero" else (z, x)
            d[:, q, word] |= _ONE << np.uint64(bit)
            s[:, n + q, word] |= _ONE << np.uint64(bit)
        return cls(n, x, z, np.zeros((batch, 2 * n), dtype=np.uint8))

    @property
    def batch(self) -> int:
        return self.x.shape[0]

    def copy(self) -> "StabilizerState":
        return StabilizerState(self.n_qubits, self.x.copy(), self.z.copy(), self.r.copy())

    def rows(self, b: int = 0) -> tuple[list[PauliString], list[PauliString]]:
        """``(destabilizers, stabilizers)`` of batch member ``b`` as Pauli strings."""
        out = []
        for i in range(2 * self.n_qubits):
            x = sum(int(v) << (64 * k) for k, v in enumerate(self.x[b, i]))
            z = sum(int(v) << (64 * k) for k, v in enumerate(self.z[b, i]))
            out.append(PauliString(self.n_qubits, x, z, -1 if self.r[b, i] else 1))
        return out[: self.n_qubits], out[self.n_qubits :]

    def check_invariants(self) -> bool:
        """Symplectic pairing: ``[d_i, s_j]`` anticommute iff ``i == j``, everything else commutes."""
        n = self.n_qubits
        xa, za = self.x[:, :, None, :], self.z[:, :, None, :]
        xb, zb = self.x[:, None, :, :], self.z[:, None, :, :]
        omega = (_popcount(xa & zb) + _popcount(za & xb)) & 1
        want = np.zeros((2 * n, 2 * n), dtype=np.int64)
        want[np.arange(n), n + np.arange(n)] = 1
        want[n + np.arange(n), np.arange(n)] = 1
        return bool((omega == want).all())

    # -- gates -----------------------------------------------------------------

    def apply_table(self, qubits, new: np.ndarray, flip: np.ndarray, idx=None):
        """Conjugate every row by a local Clifford given as a lookup table.

        ``new``/``flip`` are a single table (``idx=None``) or a stack of tables
        indexed per batch member by ``idx``.
        """
        words = [divmod(int(q), 64) for q in qubits]
        code = np.zeros(self.r.shape, dtype=np.intp)
        for i, (w, b) in enumerate(words):
            sh = np.uint64(b)
            code |= ((self.x[:, :, w] >> sh) & _ONE).astype(np.intp) << (2 * i)
            code |= ((self.z[:, :, w] >> sh) & _ONE).astype(np.intp) << (2 * i + 1)
        if idx is None:
            nc, fl = new[code], flip[code]
        else:
            idx = np.asarray(idx, dtype=np.intp)[:, None]
            nc, fl = new[idx, code], flip[idx, code]
        nc = nc.astype(np.uint64)
        for i, (w, b) in enumerate(words):
            sh = np.uint64(b)
            keep = ~(_ONE << sh)
            self.x[:, :, w] = (self.x[:, :, w] & keep) | (((nc >> np.uint64(2 * i)) & _ONE) << sh)
            self.z[:, :, w] = (self.z[:, :, w] & keep) | (((nc >> np.uint64(2 * i + 1)) & _ONE) << sh)
        self.r ^= fl

    def apply_gate(self, name: str, qubits, index=None):
        """Named fixed Clifford (``H``, ``S``, ``CX``, ...) or a ``C1``/``C2`` group element."""
        name = name.upper()
        if name in ("C1", "C2"):
            new, flip = clifford_group(int(name[1]))
            self.apply_table(qubits, new[index], flip[index])
            return
        try:
            _, new, flip = named_table(name)
        except KeyError:
            raise ValueError(f"unknown Clifford gate {name!r}") from None
        self.apply_table(qubits, new, flip)

    def apply_random_clifford(self, qubits, rng: np.random.Generator | None = None, idx=None) -> np.ndarray:
        """Uniform random Clifford on 1 or 2 qubits, independently per batch member."""
        if len(qubits) not in (1, 2):
            raise ValueError("random Clifford blocks act on 1 or 2 qubits")
        new, flip = clifford_group(len(qubits))
        if idx is None:
            idx = rng.integers(len(new), size=self.batch)
        self.apply_table(qubits, new, flip, idx)
        return idx

    def apply_rotation(self, generator: PauliString, k):
        """``exp(-i k pi/4 G)``, i.e. a Pauli rotation by ``k pi/2``; ``k`` scalar or per batch member."""
        if generator.n_qubits != self.n_qubits:
            raise DimensionError("generator size differs from state size")
        if generator.is_identity:
            raise ValueError("rotation generator must be non-identity")
        k = np.broadcast_to(np.asarray(k, dtype=np.int64), (self.batch,))
        if generator.sign < 0:
            k = -k
        k = k % 4
        if not k.any():
            return
        gx, gz = pauli_words(generator)
        anti = ((_popcount(self.x & gz) + _popcount(self.z & gx)) & 1).astype(bool)
        half = anti & (k == 2)[:, None]
        self.r ^= half.astype(np.uint8)
        odd = anti & (k % 2 == 1)[:, None]
        if not odd.any():
            return
        # conjugation maps R -> i^{+-1} G R on anticommuting rows (k=1: -i, k=3: +i)
        e = _product_exponent(gx, gz, self.x, self.z)
        e = e + np.where(k == 1, -1, 1)[:, None]
        s = ((e % 4) // 2).astype(np.uint8)
        sel = odd[:, :, None]
        self.x = np.where(sel, self.x ^ gx, self.x)
        self.z = np.where(sel, self.z ^ gz, self.z)
        self.r ^= np.where(odd, s, 0).astype(np.uint8)

    # -- readout ---------------------------------------------------------------

    def expectations(self, paulis) -> np.ndarray:
        """``<P>`` in {-1, 0, +1} for each Pauli string; shape ``(batch, len(paulis))``."""
        paulis = list(paulis)
        if any(p.n_qubits != self.n_qubits for p in paulis):
            raise DimensionError("Pauli size differs from state size")
        n = self.n_qubits
        if not paulis:
            return np.zeros((self.batch, 0), dtype=np.int8)
        px = np.array([pauli_words(p)[0] for p in paulis])  # (T, W)
        pz = np.array([pauli_words(p)[1] for p in paulis])
        signs = np.array([p.sign for p in paulis], dtype=np.int8)
        sx, sz, sr = self.x[:, n:], self.z[:, n:], self.r[:, n:]
        dx, dz = self.x[:, :n], self.z[:, :n]

        def omega(rx, rz):  # (B, N, W) rows vs (T, W) -> (B, T, N)
            return (_popcount(rx[:, None] & pz[None, :, None]) + _popcount(rz[:, None] & px[None, :, None])) & 1

        zero = omega(sx, sz).any(axis=-1)
        # P commutes with the stabilizer group: P = +- prod of stabilizers s_i over
        # destabilizers d_i that anticommute with P
        coeff = omega(dx, dz).astype(bool)
        bsz, t, w = self.batch, len(paulis), px.shape[1]
        ax = np.zeros((bsz, t, w), dtype=np.uint64)
        az = np.zeros_like(ax)
        e = np.zeros((bsz, t), dtype=np.int64)
        for i in range(n):
            sel = coeff[:, :, i]
            if not sel.any():
                continue
            rx, rz = sx[:, i][:, None, :], sz[:, i][:, None, :]
            inc = _product_exponent(ax, az, rx, rz) + 2 * sr[:, i][:, None].astype(np.int64)
            e = np.where(sel, e + inc, e)
            ax = np.where(sel[..., None], ax ^ rx, ax)
            az = np.where(sel[..., None], az ^ rz, az)
        val = np.where(e % 4 == 0, 1, -1).astype(np.int8) * signs[None, :]
        val[zero] = 0
        return val

    def expectation(self, p: PauliString) -> np.ndarray:
        return self.expectations([p])[:, 0]

    def energy(self, h: Hamiltonian) -> np.ndarray:
        """``sum_j lambda_j <h_j> + offset`` per batch member."""
        if h.n_qubits != self.n_qubits:
            raise DimensionError("Hamiltonian size differs from state size")
        return self.expectations(h.strings) @ h.coeffs + h.offset

    def run(self, c: Circuit, ks=None, clifford_idx=None):
        """Evolve through ``c``.

        ``ks`` is ``(batch, n_params)`` rotation multiples of pi/2; ``clifford_idx``
        maps the position of each :class:`RandomClifford` gate (in circuit order)
        to a ``(batch,)`` index array into the enumerated group.
        """
        if c.n_qubits != self.n_qubits:
            raise DimensionError("circuit size differs from state size")
        j = 0
        for g in c.gates:
            if isinstance(g, Rotation):
                self.apply_rotation(g.generator, 0 if ks is None else ks[:, g.param_id])
            elif isinstance(g, Clifford):
                self.apply_gate(g.name, g.qubits, g.index)
            elif isinstance(g, RandomClifford):
                self.apply_random_clifford(g.qubits, idx=clifford_idx[j])
                j += 1
            else:
                raise EngineError(f"{g.name} is not a Clifford gate; the stabilizer engine cannot run it")
        return self


def conjugate_pauli(p: PauliString, c: Circuit) -> PauliString:
    """``U^dag P U`` for an all-Clifford circuit ``U`` (Heisenberg picture)."""
    if any(not isinstance(g, Clifford) for g in c.gates):
        raise ValueError("conjugation needs an all-Clifford circuit")
    cur = p
    for g in reversed(c.gates):
        if g.name in ("C1", "C2"):
            new, flip = clifford_group(int(g.name[1]))
            new, flip = new[g.index], flip[g.index]
        else:
            _, new, flip = named_table(g.name)
        # U^dag Q U uses the inverse table: find the code whose image is Q
        w = len(g.qubits)
        lx, lz = cur.restrict(g.qubits)
        code = 0
        for i in range(w):
            code |= ((lx >> i) & 1) << (2 * i) | ((lz >> i) & 1) << (2 * i + 1)
        src = int(np.flatnonzero(new == code)[0])
        sign = cur.sign * (-1 if flip[src] else 1)
        x, z = cur.x, cur.z
        for i, q in enumerate(g.qubits):
            x = (x & ~(1 << q)) | (((src >> (2 * i)) & 1) << q)
            z = (z & ~(1 << q)) | (((src >> (2 * i + 1)) & 1) << q)
        cur = PauliString(cur.n_qubits, x, z, sign)
    return cur


def conjugate_hamiltonian(h: Hamiltonian, c: Circuit) -> Hamiltonian:
    """``U^dag H U`` term by term; exact for Clifford ``U``."""
    return Hamiltonian.from_terms(h.n_qubits, [(lam, conjugate_pauli(p, c)) for lam, p in h.terms], h.offset)
