"""Dense statevector reference engine.

States are batched complex arrays of shape ``(B, 2**N)`` with qubit 0 as the
most significant bit of the basis index.  Used for exact costs, gradients,
the quantum Fisher information, continuous-angle sampling and training.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circuit import Circuit, Clifford, Fixed, RandomClifford, Rotation
from .cliffords import GATE_MATRICES, clifford_group, group_unitaries, local_pauli_matrix, unitary_from_table
from .errors import CapacityError, DimensionError
from .pauli import Hamiltonian, PauliString, _big_endian_mask

__all__ = [
    "MAX_QUBITS",
    "TRAIN_MAX_QUBITS",
    "QfiResult",
    "TrainResult",
    "initial_state",
    "apply_pauli",
    "evolve",
    "energies",
    "cost",
    "gradient",
    "adjoint_gradient",
    "qfi_matrix",
    "effective_dimension",
    "train_adam",
]

MAX_QUBITS = 20
TRAIN_MAX_QUBITS = 14
RANK_RTOL = 1e-8


def _check_size(n: int, cap: int = MAX_QUBITS):
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds the dense-simulation cap of {cap}")


def initial_state(c: Circuit, batch: int = 1) -> np.ndarray:
    _check_size(c.n_qubits)
    dim = 1 << c.n_qubits
    if c.initial_state == "plus":
        psi = np.full((batch, dim), dim**-0.5, dtype=complex)
    else:
        psi = np.zeros((batch, dim), dtype=complex)
        psi[:, 0] = 1.0
    return psi


@lru_cache(maxsize=4096)
def _pauli_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """``(perm, phase)`` with ``(P psi)[c] = phase[c] * psi[perm[c]]``."""
    n = p.n_qubits
    idx = np.arange(1 << n, dtype=np.int64)
    xm, zm = _big_endian_mask(p.x, n), _big_endian_mask(p.z, n)
    perm = idx ^ xm
    ph = p.sign * (1j) ** ((p.x & p.z).bit_count() % 4) * (1 - 2 * (np.bitwise_count(perm & zm).astype(np.int64) & 1))
    return perm, ph.astype(complex)


def apply_pauli(psi: np.ndarray, p: PauliString) -> np.ndarray:
    perm, ph = _pauli_action(p)
    return ph * psi[..., perm]


def _rotate(psi: np.ndarray, p: PauliString, theta) -> np.ndarray:
    """``exp(-i theta P / 2) psi``; ``theta`` scalar or one angle per batch row."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim:
        theta = theta[:, None]
    return np.cos(theta / 2) * psi - 1j * np.sin(theta / 2) * apply_pauli(psi, p)


def _apply_local(psi: np.ndarray, n: int, qubits, u: np.ndarray) -> np.ndarray:
    """Apply a ``(d, d)`` or per-row ``(B, d, d)`` unitary on ``qubits`` (first = most significant)."""
    b = psi.shape[0]
    k = len(qubits)
    t = psi.reshape((b,) + (2,) * n)
    axes = [1 + q for q in qubits]
    t = np.moveaxis(t, axes, range(n + 1 - k, n + 1)).reshape(b, -1, 1 << k)
    if u.ndim == 2:
        t = t @ u.T
    else:
        t = np.einsum("brj,bij->bri", t, u)
    t = t.reshape((b,) + (2,) * n)
    return np.moveaxis(t, range(n + 1 - k, n + 1), axes).reshape(b, -1)


@lru_cache(maxsize=None)
def _fixed_unitary(name: str, index: int | None) -> np.ndarray:
    if name in ("C1", "C2"):
        new, flip = clifford_group(int(name[1]))
        return unitary_from_table(new[index], flip[index])
    if name in ("T", "TDG"):
        return np.diag([1.0, np.exp((0.25j if name == "T" else -0.25j) * np.pi)])
    return GATE_MATRICES[name]


def _gate_local(g, support, theta, cidx):
    """Local matrix of ``g`` on the ordered ``support``; ``(d, d)`` or ``(B, d, d)``."""
    k = len(support)
    d = 1 << k
    if isinstance(g, Rotation):
        lx, lz = g.generator.restrict(support)
        code = 0
        for i in range(k):
            code |= ((lx >> i) & 1) << (2 * i) | ((lz >> i) & 1) << (2 * i + 1)
        pm = g.generator.sign * local_pauli_matrix(code, k)
        th = np.asarray(theta, dtype=float)[..., None, None]
        return np.cos(th / 2) * np.eye(d) - 1j * np.sin(th / 2) * pm
    if isinstance(g, (Clifford, Fixed)):
        u = _fixed_unitary(g.name, g.index)
    else:
        u = group_unitaries(len(g.qubits))[cidx]
    pos = [support.index(q) for q in g.qubits]
    if pos == list(range(k)):
        return u
    # embed a gate on a sub- or permuted support into the block's local space
    full_shape = u.shape[:-2]
    m = len(pos)
    u = u.reshape(full_shape + (2,) * (2 * m))
    rest = [i for i in range(k) if i not in pos]
    eye = np.eye(2 ** len(rest)).reshape((2,) * (2 * len(rest)))
    big = np.multiply.outer(u, eye) if rest else u
    # big axes: batch..., out(pos), in(pos), out(rest), in(rest)
    nb = len(full_shape)
    out_axes = [None] * k
    in_axes = [None] * k
    for j, p in enumerate(pos):
        out_axes[p] = nb + j
        in_axes[p] = nb + m + j
    for j, p in enumerate(rest):
        out_axes[p] = nb + 2 * m + j
        in_axes[p] = nb + 2 * m + len(rest) + j
    big = np.transpose(big, list(range(nb)) + out_axes + in_axes)
    return big.reshape(full_shape + (d, d))


def _as_batch(theta, m: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        theta = theta[None, :]
    if theta.shape[-1] != m:
        raise DimensionError(f"expected {m} parameters, got {theta.shape[-1]}")
    return theta


def evolve(c: Circuit, theta, clifford_idx=None, fuse: bool = True) -> np.ndarray:
    """Statevectors ``U(theta)|init>``; ``theta`` has shape ``(M,)`` or ``(B, M)``.

    Returns shape ``(B, 2**N)``.  ``clifford_idx`` supplies group indices for
    :class:`RandomClifford` gates, one ``(B,)`` array per gate in circuit order.
    With ``fuse`` every block on at most two qubits is applied as one matrix.
    """
    theta = _as_batch(theta, c.n_params)
    n = c.n_qubits
    psi = initial_state(c, theta.shape[0])
    rc_pos = {}
    for i, g in enumerate(c.gates):
        if isinstance(g, RandomClifford):
            rc_pos[i] = len(rc_pos)
    if rc_pos and clifford_idx is None:
        raise ValueError("circuit has random Clifford gates; pass clifford_idx")
    for start, stop, support, _ in c.units():
        gates = c.gates[start:stop]
        if fuse and len(gates) > 1 and len(support) <= 2:
            u = np.eye(1 << len(support), dtype=complex)
            for off, g in enumerate(gates):
                th = theta[:, g.param_id] if isinstance(g, Rotation) else None
                ci = clifford_idx[rc_pos[start + off]] if isinstance(g, RandomClifford) else None
                u = _gate_local(g, list(support), th, ci) @ u
            psi = _apply_local(psi, n, support, u)
            continue
        for off, g in enumerate(gates):
            if isinstance(g, Rotation):
                psi = _rotate(psi, g.generator, theta[:, g.param_id])
            elif isinstance(g, (Clifford, Fixed)):
                psi = _apply_local(psi, n, g.qubits, _fixed_unitary(g.name, g.index))
            else:
                u = group_unitaries(len(g.qubits))[clifford_idx[rc_pos[start + off]]]
                psi = _apply_local(psi, n, g.qubits, u)
    return psi


@lru_cache(maxsize=64)
def _sparse(h: Hamiltonian):
    return h.to_sparse()


def energies(psi: np.ndarray, h: Hamiltonian) -> np.ndarray:
    """``<psi_b|H|psi_b>`` for every row."""
    if psi.shape[-1] != 1 << h.n_qubits:
        raise DimensionError("Hamiltonian size differs from state size")
    hpsi = (_sparse(h) @ psi.T).T
    return np.einsum("bi,bi->b", psi.conj(), hpsi).real


def cost(c: Circuit, theta, h: Hamiltonian):
    """Energy expectation; scalar for a single parameter vector, else one per row."""
    if h.n_qubits != c.n_qubits:
        raise DimensionError("Hamiltonian and circuit differ in size")
    single = np.asarray(theta).ndim == 1
    e = energies(evolve(c, theta), h)
    return float(e[0]) if single else e


def _gate_angles(c: Circuit, theta: np.ndarray) -> tuple[list[int], np.ndarray]:
    rot = [i for i, g in enumerate(c.gates) if isinstance(g, Rotation)]
    return rot, np.array([theta[c.gates[i].param_id] for i in rot])


def _evolve_per_gate(c: Circuit, angles: np.ndarray) -> np.ndarray:
    """Evolve with one angle per rotation gate (rows of ``angles`` are batch members)."""
    n = c.n_qubits
    psi = initial_state(c, angles.shape[0])
    j = 0
    for g in c.gates:
        if isinstance(g, Rotation):
            psi = _rotate(psi, g.generator, angles[:, j])
            j += 1
        elif isinstance(g, (Clifford, Fixed)):
            psi = _apply_local(psi, n, g.qubits, _fixed_unitary(g.name, g.index))
        else:
            raise ValueError("gradients need a circuit without random Clifford gates")
    return psi


def gradient(c: Circuit, theta, h: Hamiltonian) -> np.ndarray:
    """Parameter-shift gradient, ``+-pi/2`` shifts summed over gates sharing a parameter."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (c.n_params,):
        raise DimensionError(f"expected {c.n_params} parameters")
    rot, base = _gate_angles(c, theta)
    shifts = np.tile(base, (2 * len(rot), 1))
    j = np.arange(len(rot))
    shifts[2 * j, j] += np.pi / 2
    shifts[2 * j + 1, j] -= np.pi / 2
    e = energies(_evolve_per_gate(c, shifts), h)
    per_gate = (e[0::2] - e[1::2]) / 2
    grad = np.zeros(c.n_params)
    np.add.at(grad, [c.gates[i].param_id for i in rot], per_gate)
    return grad


def adjoint_gradient(c: Circuit, theta, h: Hamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """``(costs, gradients)`` for a batch of parameter vectors by reverse-mode sweeping."""
    theta = _as_batch(theta, c.n_params)
    n = c.n_qubits
    psi = evolve(c, theta, fuse=False)
    lam = (_sparse(h) @ psi.T).T
    costs = np.einsum("bi,bi->b", psi.conj(), lam).real
    grad = np.zeros_like(theta)
    for g in reversed(c.gates):
        if isinstance(g, Rotation):
            th = theta[:, g.param_id]
            # dC/dtheta_g = Im <lam|G|phi> with phi the state right after the gate
            grad[:, g.param_id] += np.einsum("bi,bi->b", lam.conj(), apply_pauli(psi, g.generator)).imag
            psi = _rotate(psi, g.generator, -th)
            lam = _rotate(lam, g.generator, -th)
        elif isinstance(g, (Clifford, Fixed)):
            ud = _fixed_unitary(g.name, g.index).conj().T
            psi = _apply_local(psi, n, g.qubits, ud)
            lam = _apply_local(lam, n, g.qubits, ud)
        else:
            raise ValueError("gradients need a circuit without random Clifford gates")
    return costs, grad


# -- quantum Fisher information --------------------------------------------------


@dataclass
class QfiResult:
    matrix: np.ndarray
    rank: int
    singular_values: np.ndarray
    eval_points_used: int = 1
    rel_tol: float = RANK_RTOL


def _jacobian(c: Circuit, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(psi, J)`` with ``J[mu] = d psi / d theta_mu``, by forward accumulation."""
    n, m = c.n_qubits, c.n_params
    psi = initial_state(c, 1)
    jac = np.zeros((m, 1 << n), dtype=complex)
    live = 0  # parameters are mostly introduced in order; rows past `live` are still zero
    for g in c.gates:
        if isinstance(g, Rotation):
            th = theta[g.param_id]
            psi = _rotate(psi, g.generator, th)
            if live:
                jac[:live] = _rotate(jac[:live], g.generator, th)
            jac[g.param_id] += -0.5j * apply_pauli(psi[0], g.generator)
            live = max(live, g.param_id + 1)
        elif isinstance(g, (Clifford, Fixed)):
            u = _fixed_unitary(g.name, g.index)
            psi = _apply_local(psi, n, g.qubits, u)
            if live:
                jac[:live] = _apply_local(jac[:live], n, g.qubits, u)
        else:
            raise ValueError("the QFI needs a circuit without random Clifford gates")
    return psi[0], jac


def qfi_matrix(c: Circuit, theta, rel_tol: float = RANK_RTOL) -> QfiResult:
    """``F = 4 Re[<d psi|d psi> - <d psi|psi><psi|d psi>]`` and its numerical rank."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (c.n_params,):
        raise DimensionError(f"expected {c.n_params} parameters")
    _check_size(c.n_qubits)
    psi, jac = _jacobian(c, theta)
    # project out the state direction: F = 4 Re(B^dag B) with B = (1 - |psi><psi|) J
    b = jac.T - np.outer(psi, psi.conj() @ jac.T)
    a = np.concatenate([b.real, b.imag])
    s = np.linalg.svd(a, compute_uv=False)
    ev = 4 * s**2
    f = 4 * (a.T @ a)
    f = (f + f.T) / 2
    rank = int((ev > rel_tol * ev[0]).sum()) if len(ev) and ev[0] > 0 else 0
    return QfiResult(f, rank, ev, 1, rel_tol)


def effective_dimension(c: Circuit, n_points: int = 3, seed: int = 0, rel_tol: float = RANK_RTOL) -> int:
    """Maximum QFI rank over ``n_points`` uniformly random parameter points."""
    if n_points < 1:
        raise ValueError("n_points must be positive")
    if c.n_params == 0:
        return 0
    rng = np.random.default_rng(seed)
    return max(qfi_matrix(c, rng.uniform(0, 2 * np.pi, c.n_params), rel_tol).rank for _ in range(n_points))


# -- training --------------------------------------------------------------------


@dataclass
class TrainResult:
    final_costs: np.ndarray
    ground_energy: float
    l1_norm: float
    iterations: np.ndarray
    trajectories: list = field(default_factory=list)

    @property
    def delta_e(self) -> np.ndarray:
        return self.final_costs - self.ground_energy

    @property
    def errors(self) -> np.ndarray:
        return self.delta_e / self.l1_norm

    @property
    def eps_mean(self) -> float:
        return float(self.errors.mean())

    @property
    def eps_std(self) -> float:
        return float(self.errors.std())

    @property
    def best_error(self) -> float:
        return float(self.delta_e.min())

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["restart", "iter", "cost", "grad_norm"])
            for r, traj in enumerate(self.trajectories):
                for it, cst, gn in traj:
                    w.writerow([r, int(it), repr(float(cst)), repr(float(gn))])


def train_adam(
    c: Circuit,
    h: Hamiltonian,
    lr: float = 0.1,
    max_iters: int = 2000,
    n_restarts: int = 10,
    seed: int = 0,
    window: int = 100,
    rtol: float = 1e-9,
    record_every: int = 1,
) -> TrainResult:
    """Adam from uniform random starts in ``[0, 2pi)``, all restarts advanced together.

    A restart stops once its cost changed by less than ``rtol * ||lambda||_1`` over
    the last ``window`` iterations.
    """
    if n_restarts < 1:
        raise ValueError("n_restarts must be positive")
    if h.n_qubits != c.n_qubits:
        raise DimensionError("Hamiltonian and circuit differ in size")
    _check_size(c.n_qubits, TRAIN_MAX_QUBITS)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, (n_restarts, c.n_params))
    b1, b2, eps = 0.9, 0.999, 1e-8
    mom = np.zeros_like(theta)
    vel = np.zeros_like(theta)
    active = np.ones(n_restarts, dtype=bool)
    history = np.full((max_iters + 1, n_restarts), np.nan)
    final = np.zeros(n_restarts)
    iters = np.full(n_restarts, max_iters)
    traj: list[list] = [[] for _ in range(n_restarts)]
    tol = rtol * h.l1_norm
    for t in range(max_iters + 1):
        idx = np.flatnonzero(active)
        costs, grad = adjoint_gradient(c, theta[idx], h)
        history[t, idx] = costs
        final[idx] = costs
        gnorm = np.linalg.norm(grad, axis=1)
        if t % record_every == 0:
            for j, r in enumerate(idx):
                traj[r].append((t, costs[j], gnorm[j]))
        keep = np.ones(len(idx), dtype=bool)
        if t >= window:
            keep = np.abs(history[t, idx] - history[t - window, idx]) >= tol
            iters[idx[~keep]] = t
            active[idx[~keep]] = False
        if t == max_iters or not active.any():
            break
        idx, g = idx[keep], grad[keep]
        mom[idx] = b1 * mom[idx] + (1 - b1) * g
        vel[idx] = b2 * vel[idx] + (1 - b2) * g**2
        mhat = mom[idx] / (1 - b1 ** (t + 1))
        vhat = vel[idx] / (1 - b2 ** (t + 1))
        theta[idx] -= lr * mhat / (np.sqrt(vhat) + eps)
    return TrainResult(final, h.ground_energy(), h.l1_norm, iters, [np.array(tr) for tr in traj])
