"""Landscape fluctuation by Monte-Carlo sampling and the relative fluctuation report.

Every sample ``s`` owns a counter-based random stream keyed by ``(seed, s)``,
so results do not depend on how samples are chunked or distributed.  Each
stream first draws one value per circuit parameter (a multiple ``k`` of pi/2
for the Clifford engine, an angle in ``[0, 2pi)`` for the continuous one),
then one group index per random Clifford block, then Gaussian entries for
every Haar-random block.

Fully parametrized SU(4) blocks follow ``block_measure``.  Under the default
``"angles"`` their 15 rotation angles are sampled like any other parameter,
which is the uniform measure on parameter space.  Under ``"haar"`` they are
drawn as uniform two-qubit Cliffords (Clifford engine) or Haar unitaries
(continuous engine).  Either way the two engines agree in all second moments.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import statevector as sv
from .circuit import Circuit, Fixed, RandomClifford, Rotation, local_depth, max_block_size
from .cliffords import clifford_group, group_unitaries
from .errors import CapacityError, DimensionError, EngineError
from .pauli import Hamiltonian
from .stabilizer import StabilizerState

__all__ = [
    "SamplePlan",
    "RFReport",
    "sample_stream",
    "sample_costs",
    "sample_cost_once",
    "estimate_sigma",
    "estimate_sigma_continuous",
    "sigma_zero",
    "sigma_haar",
    "theorem1_bound",
    "resolve_m_eff",
    "relative_fluctuation",
]

ENGINES = ("clifford", "continuous")
QFI_WORK_BUDGET = 2**28  # 2**N * M**2 above which the "auto" policy falls back to M


@dataclass(frozen=True)
class SamplePlan:
    n_samples: int = 2000
    n_batches: int = 10
    seed: int = 0
    engine: str = "clifford"
    block_measure: str = "angles"  # SU(4) blocks: "angles" (uniform parameters) or "haar"

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if self.block_measure not in ("haar", "angles"):
            raise ValueError("block_measure must be 'haar' or 'angles'")
        if self.n_batches < 2:
            raise ValueError("need at least 2 batches")
        if self.n_samples < 2 * self.n_batches or self.n_samples % self.n_batches:
            raise ValueError("n_samples must be a multiple of n_batches with at least 2 samples per batch")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


def sample_stream(seed: int, s: int) -> np.random.Generator:
    """Independent generator for sample ``s``."""
    return np.random.Generator(np.random.Philox(key=[seed, s]))


# -- compiled sampling programs --------------------------------------------------


@dataclass
class _Program:
    """A circuit flattened into engine operations plus the random-draw layout.

    ``ops`` items are ``("unit", start, stop, support)`` for ordinary gates,
    ``("rand", support, slot)`` for a uniformly random Clifford and
    ``("haar", support, slot)`` for a Haar-random unitary block.
    """

    circuit: Circuit
    ops: list
    rand_sizes: np.ndarray  # group order of each random-Clifford slot, in draw order
    rand_slot: dict  # gate index of a RandomClifford gate -> slot
    n_haar: int = 0


def _compile(c: Circuit, engine: str, block_measure: str) -> _Program:
    ops, sizes, slot, n_haar = [], [], {}, 0
    for start, stop, support, template in c.units():
        if block_measure == "haar" and template == "su4":
            if engine == "clifford":
                ops.append(("rand", support, len(sizes)))
                sizes.append(len(clifford_group(len(support))[0]))
            else:
                ops.append(("haar", support, n_haar))
                n_haar += 1
            continue
        for i in range(start, stop):
            g = c.gates[i]
            if isinstance(g, RandomClifford):
                slot[i] = len(sizes)
                sizes.append(len(clifford_group(len(g.qubits))[0]))
        ops.append(("unit", start, stop, support))
    return _Program(c, ops, np.array(sizes, dtype=np.int64), slot, n_haar)


def _draw(prog: _Program, engine: str, rng: np.random.Generator):
    m = prog.circuit.n_params
    params = rng.integers(0, 4, size=m) if engine == "clifford" else rng.uniform(0.0, 2 * np.pi, size=m)
    idx = rng.integers(0, prog.rand_sizes) if len(prog.rand_sizes) else np.zeros(0, dtype=np.int64)
    gauss = rng.standard_normal((prog.n_haar, 2, 4, 4))
    return params, idx, gauss


def _draw_many(prog: _Program, engine: str, seed: int, samples: range):
    draws = [_draw(prog, engine, sample_stream(seed, s)) for s in samples]
    params = np.array([d[0] for d in draws]).reshape(len(draws), prog.circuit.n_params)
    idx = np.array([d[1] for d in draws], dtype=np.int64).reshape(len(draws), len(prog.rand_sizes))
    gauss = np.array([d[2] for d in draws]).reshape(len(draws), prog.n_haar, 2, 4, 4)
    return params, idx, gauss


def haar_unitaries(gauss: np.ndarray) -> np.ndarray:
    """Haar-random unitaries from standard normals of shape ``(..., 2, d, d)`` (real and imaginary parts)."""
    z = (gauss[..., 0, :, :] + 1j * gauss[..., 1, :, :]) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def _clifford_costs(prog: _Program, h: Hamiltonian, ks, idx, gauss) -> np.ndarray:
    c = prog.circuit
    st = StabilizerState.init(c.n_qubits, c.initial_state, len(ks))
    for op in prog.ops:
        if op[0] == "rand":
            st.apply_random_clifford(op[1], idx=idx[:, op[2]])
            continue
        for i in range(op[1], op[2]):
            g = c.gates[i]
            if isinstance(g, Rotation):
                st.apply_rotation(g.generator, ks[:, g.param_id])
            elif isinstance(g, RandomClifford):
                st.apply_random_clifford(g.qubits, idx=idx[:, prog.rand_slot[i]])
            else:
                st.apply_gate(g.name, g.qubits, g.index)
    return st.energy(h)


def _continuous_costs(prog: _Program, h: Hamiltonian, theta, idx, gauss) -> np.ndarray:
    c = prog.circuit
    n = c.n_qubits
    psi = sv.initial_state(c, len(theta))
    for op in prog.ops:
        if op[0] == "haar":
            psi = sv._apply_local(psi, n, op[1], haar_unitaries(gauss[:, op[2]]))
            continue
        if op[0] == "rand":
            psi = sv._apply_local(psi, n, op[1], group_unitaries(len(op[1]))[idx[:, op[2]]])
            continue
        _, start, stop, support = op
        u = None
        if stop - start > 1 and len(support) <= 2:
            u = np.eye(1 << len(support), dtype=complex)
        for i in range(start, stop):
            g = c.gates[i]
            th = theta[:, g.param_id] if isinstance(g, Rotation) else None
            ci = idx[:, prog.rand_slot[i]] if isinstance(g, RandomClifford) else None
            if u is not None:
                u = sv._gate_local(g, list(support), th, ci) @ u
            elif isinstance(g, Rotation):
                psi = sv._rotate(psi, g.generator, th)
            else:
                psi = sv._apply_local(psi, n, g.qubits, sv._gate_local(g, list(g.qubits), th, ci))
        if u is not None:
            psi = sv._apply_local(psi, n, support, u)
    return sv.energies(psi, h)


def _check(c: Circuit, h: Hamiltonian, engine: str):
    if c.n_qubits != h.n_qubits:
        raise DimensionError(f"circuit has {c.n_qubits} qubits but the Hamiltonian has {h.n_qubits}")
    if engine == "clifford" and any(isinstance(g, Fixed) for g in c.gates):
        names = sorted({g.name for g in c.gates if isinstance(g, Fixed)})
        raise EngineError(f"non-Clifford gates {names} need the continuous engine (--engine continuous)")
    if engine == "continuous" and c.n_qubits > sv.MAX_QUBITS:
        raise CapacityError(f"continuous sampling is capped at {sv.MAX_QUBITS} qubits")


def _chunk_size(c: Circuit, engine: str) -> int:
    if engine == "continuous":
        return max(1, 2**20 >> c.n_qubits)
    return 4096


def sample_costs(c: Circuit, h: Hamiltonian, plan: SamplePlan, samples: range | None = None) -> np.ndarray:
    """Cost values of the requested sample indices (default: all of ``plan``)."""
    _check(c, h, plan.engine)
    if plan.engine == "clifford" and c.has_shared_params:
        warnings.warn(
            "shared parameters make discrete-angle sampling inexact; consider the continuous engine",
            stacklevel=2,
        )
    prog = _compile(c, plan.engine, plan.block_measure)
    samples = range(plan.n_samples) if samples is None else samples
    run = _clifford_costs if plan.engine == "clifford" else _continuous_costs
    out = np.empty(len(samples))
    step = _chunk_size(c, plan.engine)
    for lo in range(0, len(samples), step):
        chunk = samples[lo : lo + step]
        out[lo : lo + len(chunk)] = run(prog, h, *_draw_many(prog, plan.engine, plan.seed, chunk))
    return out


def sample_cost_once(c: Circuit, h: Hamiltonian, rng: np.random.Generator, engine: str = "clifford", block_measure: str = "angles") -> float:
    """One cost sample; with ``rng = sample_stream(seed, s)`` it equals sample ``s`` of a plan."""
    _check(c, h, engine)
    prog = _compile(c, engine, block_measure)
    params, idx, gauss = _draw(prog, engine, rng)
    run = _clifford_costs if engine == "clifford" else _continuous_costs
    return float(run(prog, h, params[None, :], idx[None, :], gauss[None])[0])


def _aggregate(costs: np.ndarray, h: Hamiltonian, n_batches: int) -> tuple[float, float, float]:
    if h.l1_norm == 0:
        raise ValueError("the Hamiltonian has no terms; sigma is undefined")
    per = costs.reshape(n_batches, -1)
    sig_b = np.sqrt(per.var(axis=1, ddof=1)) / h.l1_norm
    return float(sig_b.mean()), float(sig_b.std(ddof=1) / math.sqrt(n_batches)), float(costs.mean())


def estimate_sigma(c: Circuit, h: Hamiltonian, plan: SamplePlan) -> tuple[float, float, float]:
    """``(sigma, sigma_stderr, mean_cost)`` with per-batch standard deviations averaged over batches."""
    return _aggregate(sample_costs(c, h, plan), h, plan.n_batches)


def estimate_sigma_continuous(c: Circuit, h: Hamiltonian, plan: SamplePlan) -> tuple[float, float, float]:
    """Same estimator with uniform continuous angles on the dense engine."""
    p = SamplePlan(plan.n_samples, plan.n_batches, plan.seed, "continuous", plan.block_measure)
    return estimate_sigma(c, h, p)


def sigma_zero(m_eff: int) -> float:
    if m_eff < 1:
        raise ValueError("m_eff must be a positive integer")
    return 1 / math.sqrt(2 * m_eff)


def sigma_haar(h: Hamiltonian, n_qubits: int | None = None) -> float:
    """Fluctuation of a traceless ``H`` under a global 2-design."""
    n = h.n_qubits if n_qubits is None else n_qubits
    return h.l2_norm / (math.sqrt(2.0**n + 1) * h.l1_norm)


def theorem1_bound(h: Hamiltonian, chi: int, beta: int) -> float:
    """Lower bound ``2**(-r chi beta) ||lambda||_2 / ||lambda||_1`` for locally scrambled circuits."""
    return math.ldexp(h.l2_norm / h.l1_norm, -h.locality * chi * beta)


def resolve_m_eff(c: Circuit, policy: str = "auto", n_points: int = 3, seed: int = 0) -> tuple[int, str]:
    """``(M_eff, source)`` where source is ``"qfi"`` or ``"m"``."""
    if policy not in ("auto", "qfi", "m"):
        raise ValueError("m_eff policy must be 'auto', 'qfi' or 'm'")
    has_random = any(isinstance(g, RandomClifford) for g in c.gates)
    if policy == "m":
        return c.n_params, "m"
    feasible = (
        c.n_qubits <= sv.MAX_QUBITS and c.n_params <= 4096 and not has_random and c.n_params > 0
    )
    if policy == "qfi":
        if c.n_qubits > sv.MAX_QUBITS:
            raise CapacityError(f"QFI rank needs a statevector; {c.n_qubits} qubits exceeds the cap, use the 'm' policy")
        if has_random or c.n_params == 0:
            raise EngineError("QFI rank needs a circuit with parameters and no random Clifford gates")
        return sv.effective_dimension(c, n_points, seed), "qfi"
    if feasible and (2**c.n_qubits) * c.n_params**2 <= QFI_WORK_BUDGET:
        return sv.effective_dimension(c, n_points, seed), "qfi"
    return c.n_params, "m"


@dataclass
class RFReport:
    sigma: float
    sigma_stderr: float
    m: int
    m_eff: int | None
    m_eff_source: str
    sigma0: float
    rf: float
    rf_stderr: float
    sigma_haar: float
    theorem1_bound: float
    mean_cost: float
    n_qubits: int
    chi: int
    beta: int
    locality: int
    l1_norm: float
    l2_norm: float
    n_samples: int
    n_batches: int
    seed: int
    engine: str
    bound_ok: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def summary(self) -> str:
        rows = [
            ("sigma", f"{self.sigma:.6g} +- {self.sigma_stderr:.2g}"),
            ("M / M_eff", f"{self.m} / {self.m_eff} ({self.m_eff_source})"),
            ("sigma0", f"{self.sigma0:.6g}"),
            ("RF", f"{self.rf:.4g} +- {self.rf_stderr:.2g}"),
            ("sigma_Haar", f"{self.sigma_haar:.4g}"),
            ("bound", f"{self.theorem1_bound:.4g}"),
            ("mean cost", f"{self.mean_cost:.6g}"),
            ("engine", f"{self.engine}, {self.n_samples} samples in {self.n_batches} batches, seed {self.seed}"),
        ]
        rows += [("note", n) for n in self.notes]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def relative_fluctuation(
    c: Circuit,
    h: Hamiltonian,
    plan: SamplePlan | None = None,
    m_eff_policy: str = "auto",
    m_eff: int | None = None,
    qfi_points: int = 3,
) -> RFReport:
    """Estimate ``sigma`` and assemble ``RF = sqrt(2 M_eff) sigma`` with reference values."""
    plan = plan or SamplePlan()
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sigma, stderr, mean = estimate_sigma(c, h, plan)
    engine = plan.engine
    if caught:
        engine = "clifford-approximate"
        notes.append("shared parameters: discrete sampling is approximate")
        for w in caught:
            warnings.warn(w.message, w.category, stacklevel=2)
    if m_eff is not None:
        source = "given"
    else:
        m_eff, source = resolve_m_eff(c, m_eff_policy, qfi_points, plan.seed)
    if m_eff and m_eff > 0:
        scale = math.sqrt(2 * m_eff)
        s0, rf, rf_err = sigma_zero(m_eff), scale * sigma, scale * stderr
    else:
        s0 = rf = rf_err = math.nan
        notes.append("no parameters: sigma0 and RF undefined")
    chi, beta = local_depth(c), max_block_size(c)
    bound = theorem1_bound(h, chi, beta)
    ok = bound <= sigma + 3 * stderr
    if not ok:
        notes.append("measured sigma is below the lower bound (expected only for circuits that are not locally scrambled)")
    return RFReport(
        sigma=sigma,
        sigma_stderr=stderr,
        m=c.n_params,
        m_eff=m_eff,
        m_eff_source=source,
        sigma0=s0,
        rf=rf,
        rf_stderr=rf_err,
        sigma_haar=sigma_haar(h),
        theorem1_bound=bound,
        mean_cost=mean,
        n_qubits=c.n_qubits,
        chi=chi,
        beta=beta,
        locality=h.locality if h.terms else 0,
        l1_norm=h.l1_norm,
        l2_norm=h.l2_norm,
        n_samples=plan.n_samples,
        n_batches=plan.n_batches,
        seed=plan.seed,
        engine=engine,
        bound_ok=ok,
        notes=notes,
    )
