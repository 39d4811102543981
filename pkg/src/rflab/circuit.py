"""Circuit IR: fixed Cliffords, Pauli rotations with shared parameters, and block annotations.

Depth convention for brickwall builders: one unit of ``depth`` is a full
brick layer, i.e. an even sublayer of blocks on bonds ``(0,1), (2,3), ...``
followed by an odd sublayer on ``(1,2), (3,4), ...``.  With this convention a
depth-1 brickwall already connects every bond, and an interior qubit is hit
by ``2 * depth`` blocks.
"""

from __future__ import annotations

import json
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionError
from .pauli import PauliString

__all__ = [
    "Clifford",
    "Fixed",
    "Rotation",
    "RandomClifford",
    "Block",
    "Circuit",
    "CircuitBuilder",
    "TEMPLATES",
    "build_brickwall_1d",
    "build_ladder",
    "build_hva_tfi",
    "random_clifford_brickwall",
    "local_depth",
    "max_block_size",
    "causal_cone",
    "local_overparam_ratio",
    "gamma_brickwall_estimate",
    "fold_back_evolution",
]

FIXED_NAMES = {"H": 1, "S": 1, "SDG": 1, "X": 1, "Y": 1, "Z": 1, "CX": 2, "CZ": 2, "SWAP": 2, "C1": 1, "C2": 2}
NON_CLIFFORD_NAMES = {"T": 1, "TDG": 1}
INITIAL_STATES = ("zero", "plus")


@dataclass(frozen=True)
class Clifford:
    """Parameter-free Clifford gate.  ``C1``/``C2`` name an enumerated group element by ``index``."""

    name: str
    qubits: tuple[int, ...]
    index: int | None = None

    def __post_init__(self):
        name = self.name.upper()
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if name not in FIXED_NAMES:
            raise ValueError(f"unknown Clifford gate {self.name!r}")
        if len(self.qubits) != FIXED_NAMES[name] or len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{name} acts on {FIXED_NAMES[name]} distinct qubit(s), got {self.qubits}")
        if (name in ("C1", "C2")) != (self.index is not None):
            raise ValueError("index is required for C1/C2 and forbidden otherwise")


@dataclass(frozen=True)
class Fixed:
    """Parameter-free non-Clifford gate (``T`` or ``TDG``); only the dense engine can run it."""

    name: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        name = self.name.upper()
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if name not in NON_CLIFFORD_NAMES:
            raise ValueError(f"unknown fixed gate {self.name!r}")
        if len(self.qubits) != NON_CLIFFORD_NAMES[name]:
            raise ValueError(f"{name} acts on {NON_CLIFFORD_NAMES[name]} qubit(s), got {self.qubits}")

    @property
    def index(self) -> None:
        return None


@dataclass(frozen=True)
class Rotation:
    """``exp(-i theta_{param_id} G / 2)`` for a Pauli string ``G``."""

    generator: PauliString
    param_id: int

    def __post_init__(self):
        if self.generator.is_identity:
            raise ValueError("rotation generator must be a non-identity Pauli string")
        if self.param_id < 0:
            raise ValueError("param_id must be non-negative")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.generator.support


@dataclass(frozen=True)
class RandomClifford:
    """Uniformly random Clifford on ``qubits``, drawn afresh for every sample."""

    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) not in (1, 2) or len(set(self.qubits)) != len(self.qubits):
            raise ValueError("random Clifford blocks act on 1 or 2 distinct qubits")


Gate = Union[Clifford, Fixed, Rotation, RandomClifford]


@dataclass(frozen=True)
class Block:
    """Gates ``start:stop`` grouped on ``support``.

    ``template`` is informational except for ``"su4"``: such a block is fully
    parametrized, and Clifford sampling may replace it by a random Clifford.
    """

    start: int
    stop: int
    support: tuple[int, ...]
    template: str = ""

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(sorted(int(q) for q in self.support)))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    blocks: tuple[Block, ...] = ()
    initial_state: str = "zero"
    n_params: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(f"initial_state must be one of {INITIAL_STATES}")
        params = set()
        for g in self.gates:
            if isinstance(g, Rotation):
                if g.generator.n_qubits != self.n_qubits:
                    raise DimensionError("rotation generator size differs from circuit size")
                params.add(g.param_id)
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise DimensionError(f"gate {g} targets a qubit outside 0..{self.n_qubits - 1}")
        if params != set(range(len(params))):
            raise ValueError("parameter ids must be exactly 0..M-1, each used at least once")
        object.__setattr__(self, "n_params", len(params))
        last = 0
        for b in self.blocks:
            if not (last <= b.start < b.stop <= len(self.gates)):
                raise ValueError(f"block range [{b.start}, {b.stop}) is empty, overlapping or out of order")
            used = set().union(*(self.gates[i].qubits for i in range(b.start, b.stop)))
            if not used <= set(b.support):
                raise ValueError(f"block [{b.start}, {b.stop}) has gates outside its support {b.support}")
            if any(not 0 <= q < self.n_qubits for q in b.support):
                raise DimensionError("block support outside the register")
            last = b.stop

    @property
    def rotations(self) -> list[Rotation]:
        return [g for g in self.gates if isinstance(g, Rotation)]

    @property
    def has_shared_params(self) -> bool:
        return len(self.rotations) > self.n_params

    def units(self) -> list[tuple[int, int, tuple[int, ...], str]]:
        """Blocks plus every gate not covered by a block, in circuit order."""
        out = []
        i = 0
        for b in self.blocks:
            for j in range(i, b.start):
                out.append((j, j + 1, tuple(sorted(self.gates[j].qubits)), ""))
            out.append((b.start, b.stop, b.support, b.template))
            i = b.stop
        for j in range(i, len(self.gates)):
            out.append((j, j + 1, tuple(sorted(self.gates[j].qubits)), ""))
        return out

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            if isinstance(g, Rotation):
                gates.append({"kind": "rotation", "pauli": [[a, q] for a, q in g.generator.ops()], "param": g.param_id})
            elif isinstance(g, Clifford):
                d = {"kind": "clifford", "name": g.name, "qubits": list(g.qubits)}
                if g.index is not None:
                    d["index"] = g.index
                gates.append(d)
            elif isinstance(g, Fixed):
                gates.append({"kind": "fixed", "name": g.name, "qubits": list(g.qubits)})
            else:
                gates.append({"kind": "random_clifford", "qubits": list(g.qubits)})
        blocks = []
        for b in self.blocks:
            d = {"range": [b.start, b.stop], "support": list(b.support)}
            if b.template:
                d["template"] = b.template
            blocks.append(d)
        return {
            "n_qubits": self.n_qubits,
            "initial_state": self.initial_state,
            "n_params": self.n_params,
            "gates": gates,
            "blocks": blocks,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        n = int(d["n_qubits"])
        gates: list[Gate] = []
        for g in d["gates"]:
            kind = g["kind"]
            if kind == "rotation":
                gates.append(Rotation(PauliString.from_ops(n, [(a, int(q)) for a, q in g["pauli"]]), int(g["param"])))
            elif kind == "clifford":
                gates.append(Clifford(g["name"], tuple(g["qubits"]), g.get("index")))
            elif kind == "fixed":
                gates.append(Fixed(g["name"], tuple(g["qubits"])))
            elif kind == "random_clifford":
                gates.append(RandomClifford(tuple(g["qubits"])))
            else:
                raise ValueError(f"unknown gate kind {kind!r}")
        blocks = [Block(b["range"][0], b["range"][1], tuple(b["support"]), b.get("template", "")) for b in d.get("blocks", [])]
        c = cls(n, tuple(gates), tuple(blocks), d.get("initial_state", "zero"))
        if "n_params" in d and int(d["n_params"]) != c.n_params:
            raise ValueError(f"n_params {d['n_params']} does not match the gates ({c.n_params})")
        return c

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json(indent=1))

    @classmethod
    def load(cls, path) -> "Circuit":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class CircuitBuilder:
    def __init__(self, n_qubits: int, initial_state: str = "zero"):
        self.n_qubits = n_qubits
        self.initial_state = initial_state
        self.gates: list[Gate] = []
        self.blocks: list[Block] = []
        self.n_params = 0
        self._open: tuple[int, tuple[int, ...], str] | None = None

    def new_param(self) -> int:
        self.n_params += 1
        return self.n_params - 1

    def rotation(self, axes: str, qubits: Sequence[int], param: int | None = None) -> int:
        """Append ``exp(-i theta P / 2)`` with ``P = axes[0]_{qubits[0]} axes[1]_{qubits[1]} ...``."""
        if param is None:
            param = self.new_param()
        gen = PauliString.from_ops(self.n_qubits, list(zip(axes, qubits)))
        self.gates.append(Rotation(gen, param))
        return param

    def clifford(self, name: str, qubits: Sequence[int], index: int | None = None):
        self.gates.append(Clifford(name, tuple(qubits), index))

    def fixed(self, name: str, qubits: Sequence[int]):
        self.gates.append(Fixed(name, tuple(qubits)))

    def random_clifford(self, qubits: Sequence[int]):
        self.gates.append(RandomClifford(tuple(qubits)))

    @contextmanager
    def block(self, support: Iterable[int], template: str = ""):
        start = len(self.gates)
        yield self
        if len(self.gates) > start:
            self.blocks.append(Block(start, len(self.gates), tuple(support), template))

    def add_template(self, template: str, qubits: Sequence[int]):
        with self.block(qubits, template):
            TEMPLATES[template](self, *qubits)

    def build(self) -> Circuit:
        return Circuit(self.n_qubits, tuple(self.gates), tuple(self.blocks), self.initial_state)


def _r3(b: CircuitBuilder, q: int):
    for axis in "ZYZ":
        b.rotation(axis, [q])


def _su4(b: CircuitBuilder, q0: int, q1: int):
    _r3(b, q0)
    _r3(b, q1)
    for axis in ("XX", "YY", "ZZ"):
        b.rotation(axis, [q0, q1])
    _r3(b, q0)
    _r3(b, q1)


def _two_rot_then(axis: str, gate: str):
    def build(b: CircuitBuilder, q0: int, q1: int):
        b.rotation(axis, [q0])
        b.rotation(axis, [q1])
        b.clifford(gate, [q0, q1])

    return build


TEMPLATES = {
    "su4": _su4,
    "rycz": _two_rot_then("Y", "CZ"),
    "rycx": _two_rot_then("Y", "CX"),
    "rxcx": _two_rot_then("X", "CX"),
    "clifford": lambda b, q0, q1: b.random_clifford([q0, q1]),
}
PARAMS_PER_BLOCK = {"su4": 15, "rycz": 2, "rycx": 2, "rxcx": 2, "clifford": 0}


def brickwall_bonds(n_qubits: int, depth: int) -> list[tuple[int, int]]:
    bonds = []
    for _ in range(depth):
        for parity in (0, 1):
            bonds += [(a, a + 1) for a in range(parity, n_qubits - 1, 2)]
    return bonds


def build_brickwall_1d(n_qubits: int, depth: int, template: str = "su4", initial_state: str = "zero") -> Circuit:
    """Open-boundary brickwall; ``depth=0`` gives one layer of ``R_y`` rotations."""
    template = template.lower()
    if template not in TEMPLATES:
        raise ValueError(f"unknown block template {template!r}; choose from {sorted(TEMPLATES)}")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    b = CircuitBuilder(n_qubits, initial_state)
    if depth == 0:
        for q in range(n_qubits):
            with b.block([q], "ry"):
                b.rotation("Y", [q])
        return b.build()
    if n_qubits < 2:
        raise ValueError("a brickwall with depth >= 1 needs at least 2 qubits")
    for bond in brickwall_bonds(n_qubits, depth):
        b.add_template(template, bond)
    return b.build()


def build_ladder(n_qubits: int, layers: int = 1, template: str = "su4") -> Circuit:
    """Staircase of blocks on ``(0,1), (1,2), ..., (N-2,N-1)``, repeated ``layers`` times."""
    if n_qubits < 2:
        raise ValueError("a ladder needs at least 2 qubits")
    b = CircuitBuilder(n_qubits)
    for _ in range(layers):
        for a in range(n_qubits - 1):
            b.add_template(template, (a, a + 1))
    return b.build()


def build_hva_tfi(n_qubits: int, depth: int) -> Circuit:
    """Hamiltonian variational ansatz for the open TFI chain on ``|+>^N``.

    Layer ``l`` applies ``R_zz(theta_{2l})`` on every bond, then ``R_x(theta_{2l+1})``
    on every qubit; each sublayer shares one parameter.
    """
    if n_qubits < 2:
        raise ValueError("HVA needs at least 2 qubits")
    b = CircuitBuilder(n_qubits, "plus")
    for _ in range(depth):
        p = b.new_param()
        for j in range(n_qubits - 1):
            with b.block([j, j + 1], "hva"):
                b.rotation("ZZ", [j, j + 1], p)
        p = b.new_param()
        for j in range(n_qubits):
            with b.block([j], "hva"):
                b.rotation("X", [j], p)
    return b.build()


def random_clifford_brickwall(n_qubits: int, depth: int, rng: np.random.Generator, reverse: bool = False) -> Circuit:
    """Brickwall of frozen, uniformly drawn two-qubit Cliffords (``C2`` gates).

    ``reverse=True`` runs the sublayers in the opposite order (odd sublayer first).
    """
    from .cliffords import clifford_group

    size = len(clifford_group(2)[0])
    bonds = brickwall_bonds(n_qubits, depth)
    if reverse:
        layers: list[list[tuple[int, int]]] = []
        for _ in range(depth):
            for parity in (0, 1):
                layers.append([(a, a + 1) for a in range(parity, n_qubits - 1, 2)])
        bonds = [bond for layer in reversed(layers) for bond in layer]
    b = CircuitBuilder(n_qubits)
    for bond in bonds:
        with b.block(bond, "frozen"):
            b.clifford("C2", bond, int(rng.integers(size)))
    return b.build()


# -- structural analyses --------------------------------------------------------


def local_depth(c: Circuit) -> int:
    """Maximum over qubits of the number of blocks (or unblocked gates) touching it."""
    counts = np.zeros(c.n_qubits, dtype=int)
    for _, _, support, _ in c.units():
        counts[list(support)] += 1
    return int(counts.max()) if len(c.gates) else 0


def max_block_size(c: Circuit) -> int:
    return max((len(s) for _, _, s, _ in c.units()), default=0)


def causal_cone(c: Circuit, observable_support: Iterable[int], granularity: str = "block") -> tuple[list[int], set[int]]:
    """Backward light cone of an observable: ``(gate indices, cone qubits)``.

    With ``granularity="block"`` whole blocks enter the cone; ``"gate"`` sweeps
    individual gates.
    """
    cone = set(int(q) for q in observable_support)
    if not cone:
        raise ValueError("observable support must be nonempty")
    if any(not 0 <= q < c.n_qubits for q in cone):
        raise DimensionError("observable support outside the register")
    if granularity == "block":
        units = c.units()
    elif granularity == "gate":
        units = [(i, i + 1, tuple(g.qubits), "") for i, g in enumerate(c.gates)]
    else:
        raise ValueError("granularity must be 'block' or 'gate'")
    gates: list[int] = []
    for start, stop, support, _ in reversed(units):
        if cone.intersection(support):
            cone.update(support)
            gates.extend(range(stop - 1, start - 1, -1))
    return sorted(gates), cone


def local_overparam_ratio(c: Circuit, observable: PauliString | Iterable[int], granularity: str = "block") -> float:
    """``M_cone / (2 d_cone)`` with ``d_cone = 2**(cone qubits)``."""
    support = observable.support if isinstance(observable, PauliString) else tuple(observable)
    gates, cone = causal_cone(c, support, granularity)
    m_cone = len({c.gates[i].param_id for i in gates if isinstance(c.gates[i], Rotation)})
    return math.ldexp(m_cone, -(len(cone) + 1))


def gamma_brickwall_estimate(depth: int, beta: int = 2, d: int = 2) -> float:
    """Closed-form ratio for a single-qubit observable under a deep-enough 1D brickwall."""
    return depth * (2 * depth + 1) * (d ** (2 * beta) - 1) / (2 * d ** (2 * depth * beta))


def fold_back_evolution(ansatz: Circuit, v: Circuit) -> Circuit:
    """Append the frozen Clifford circuit ``v`` after ``ansatz``.

    Measuring ``H`` on the result equals measuring ``V^dag H V`` on the ansatz.
    """
    if ansatz.n_qubits != v.n_qubits:
        raise DimensionError("ansatz and back-evolution circuit differ in size")
    if any(not isinstance(g, Clifford) for g in v.gates):
        raise ValueError("the back-evolution circuit must contain only fixed Clifford gates")
    shift = len(ansatz.gates)
    blocks = list(ansatz.blocks) + [Block(b.start + shift, b.stop + shift, b.support, b.template or "frozen") for b in v.blocks]
    return Circuit(ansatz.n_qubits, ansatz.gates + v.gates, tuple(blocks), ansatz.initial_state)
