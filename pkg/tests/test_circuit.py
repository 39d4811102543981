import numpy as np
import pytest

from rflab.circuit import (
    PARAMS_PER_BLOCK,
    Block,
    Circuit,
    CircuitBuilder,
    Clifford,
    RandomClifford,
    Rotation,
    build_brickwall_1d,
    build_hva_tfi,
    build_ladder,
    causal_cone,
    fold_back_evolution,
    gamma_brickwall_estimate,
    local_depth,
    local_overparam_ratio,
    max_block_size,
    random_clifford_brickwall,
)
from rflab.errors import DimensionError
from rflab.pauli import PauliString


@pytest.mark.parametrize("template", ["su4", "rycz", "rycx", "rxcx", "clifford"])
@pytest.mark.parametrize("n, depth", [(4, 1), (6, 3), (7, 2)])
def test_brickwall_counts(template, n, depth):
    c = build_brickwall_1d(n, depth, template)
    n_blocks = depth * (n - 1)
    assert len(c.blocks) == n_blocks
    assert c.n_params == n_blocks * PARAMS_PER_BLOCK[template]
    assert max_block_size(c) == 2


def test_depth_zero_is_ry_layer():
    c = build_brickwall_1d(5, 0)
    assert c.n_params == 5
    assert all(isinstance(g, Rotation) and g.generator.label() == "+" + "I" * q + "Y" + "I" * (4 - q) for q, g in enumerate(c.gates))
    assert local_depth(c) == 1


@pytest.mark.parametrize("n, depth", [(6, 3), (8, 1), (5, 4)])
def test_local_depth_counts_blocks(n, depth):
    # interior qubits sit in one block of each sublayer
    assert local_depth(build_brickwall_1d(n, depth)) == 2 * depth


def test_six_qubit_depth_three_has_fifteen_blocks():
    assert len(build_brickwall_1d(6, 3).blocks) == 15


def test_su4_block_gate_order():
    c = build_brickwall_1d(2, 1, "su4")
    words = [g.generator.label()[1:] for g in c.gates]
    assert words == ["ZI", "YI", "ZI", "IZ", "IY", "IZ", "XX", "YY", "ZZ", "ZI", "YI", "ZI", "IZ", "IY", "IZ"]


def test_ladder():
    c = build_ladder(5, 2, "rycz")
    assert [b.support for b in c.blocks[:4]] == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert c.n_params == 16


@pytest.mark.parametrize("n, depth", [(3, 2), (5, 4)])
def test_hva_shares_parameters(n, depth):
    c = build_hva_tfi(n, depth)
    assert c.n_params == 2 * depth
    assert c.has_shared_params
    assert c.initial_state == "plus"
    assert len(c.rotations) == depth * (2 * n - 1)


def test_json_round_trip(tmp_path):
    b = CircuitBuilder(3, "plus")
    with b.block([0, 1], "custom"):
        p = b.rotation("XZ", [0, 1])
        b.clifford("C2", [0, 1], 77)
    b.rotation("Y", [2], p)
    b.clifford("H", [2])
    b.random_clifford([1])
    b.fixed("T", [0])
    c = b.build()
    path = tmp_path / "c.json"
    c.save(path)
    back = Circuit.load(path)
    assert back == c
    assert Circuit.from_dict(c.to_dict()).to_json() == c.to_json()


def test_units_cover_unblocked_gates():
    b = CircuitBuilder(3)
    b.clifford("H", [0])
    with b.block([1, 2], "x"):
        b.clifford("CZ", [1, 2])
        b.rotation("Z", [1])
    b.clifford("S", [2])
    units = b.build().units()
    assert units == [(0, 1, (0,), ""), (1, 3, (1, 2), "x"), (3, 4, (2,), "")]


@pytest.mark.parametrize(
    "make",
    [
        lambda: Circuit(2, (Rotation(PauliString.from_label("ZI"), 1),)),
        lambda: Circuit(2, (Clifford("CZ", (0, 1)),), (Block(0, 1, (0,), ""),)),
        lambda: Circuit(2, (Clifford("H", (0,)), Clifford("H", (1,))), (Block(0, 2, (0, 1)), Block(1, 2, (1,)))),
        lambda: Clifford("C2", (0, 1)),
        lambda: Clifford("H", (0,), 3),
        lambda: RandomClifford((0, 1, 2)),
        lambda: Circuit(2, (), (), "mixed"),
    ],
)
def test_invalid_circuits(make):
    with pytest.raises(ValueError):
        make()


def test_out_of_range_qubit():
    with pytest.raises(DimensionError):
        Circuit(2, (Clifford("H", (2,)),))


def test_causal_cone_block_granularity():
    c = build_brickwall_1d(8, 1, "rycz")
    gates, cone = causal_cone(c, [0])
    # looking backwards the odd sublayer misses qubit 0, only block (0,1) enters
    assert cone == {0, 1}
    assert len(gates) == 3
    gates, cone = causal_cone(c, [1])
    assert cone == {0, 1, 2, 3}
    assert len(gates) == 3 * 3


def test_causal_cone_widens_with_depth():
    widths = [len(causal_cone(build_brickwall_1d(12, d), [6])[1]) for d in (1, 2, 3)]
    assert widths == sorted(widths) and widths[0] < widths[-1]


def test_gate_granularity_is_tighter():
    b = CircuitBuilder(3)
    with b.block([0, 1], "x"):
        b.rotation("Y", [0])
        b.rotation("Y", [1])
    c = b.build()
    assert causal_cone(c, [1], "gate")[1] == {1}
    assert causal_cone(c, [1], "block")[1] == {0, 1}


def test_local_overparam_ratio():
    c = build_brickwall_1d(8, 1, "su4")
    # cone of qubit 1: blocks (1,2), (0,1), (2,3), 45 parameters on 4 qubits
    assert local_overparam_ratio(c, PauliString.single(8, "Z", 1)) == pytest.approx(45 / 32)
    assert local_overparam_ratio(c, [0]) == pytest.approx(15 / 8)


def test_gamma_closed_form():
    assert gamma_brickwall_estimate(1) == pytest.approx(1 * 3 * 15 / 32)
    # deep circuits give vanishing ratios without overflow
    assert 0.0 <= gamma_brickwall_estimate(400) < 1e-300


def test_random_clifford_brickwall_is_reproducible():
    a = random_clifford_brickwall(6, 2, np.random.default_rng(3))
    b = random_clifford_brickwall(6, 2, np.random.default_rng(3))
    r = random_clifford_brickwall(6, 2, np.random.default_rng(3), reverse=True)
    assert a == b
    assert [g.index for g in r.gates] == [g.index for g in a.gates]
    assert r.blocks[0].support == (1, 2)


def test_fold_back_requires_fixed_cliffords():
    ansatz = build_brickwall_1d(4, 1, "rycz")
    v = random_clifford_brickwall(4, 1, np.random.default_rng(0))
    folded = fold_back_evolution(ansatz, v)
    assert len(folded.gates) == len(ansatz.gates) + len(v.gates)
    with pytest.raises(ValueError):
        fold_back_evolution(ansatz, build_brickwall_1d(4, 1, "clifford"))
