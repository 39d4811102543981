import numpy as np
import pytest

from fuzzing import random_circuit
from rflab import statevector as sv
from rflab.circuit import CircuitBuilder, build_brickwall_1d, build_hva_tfi
from rflab.errors import CapacityError, DimensionError
from rflab.models import cluster, polarization, tfi
from rflab.pauli import PauliString


def finite_difference(c, theta, h, eps=1e-6):
    out = np.zeros(c.n_params)
    for k in range(c.n_params):
        d = np.zeros(c.n_params)
        d[k] = eps
        out[k] = (sv.cost(c, theta + d, h) - sv.cost(c, theta - d, h)) / (2 * eps)
    return out


def test_initial_states_are_normalized():
    for which in ("zero", "plus"):
        psi = sv.initial_state(CircuitBuilder(4, which).build(), 3)
        assert np.allclose(np.linalg.norm(psi, axis=1), 1)


def test_rotation_convention():
    b = CircuitBuilder(1)
    b.rotation("Y", [0])
    psi = sv.evolve(b.build(), np.array([[np.pi / 2]]))[0]
    assert np.allclose(psi, [np.cos(np.pi / 4), np.sin(np.pi / 4)])


@pytest.mark.parametrize("seed", range(8))
def test_fused_and_plain_evolution_agree(seed):
    rng = np.random.default_rng(seed)
    c = build_brickwall_1d(5, 2, str(rng.choice(["su4", "rycz", "rxcx"])))
    theta = rng.uniform(0, 2 * np.pi, (3, c.n_params))
    assert np.allclose(sv.evolve(c, theta), sv.evolve(c, theta, fuse=False), atol=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_gradients_agree(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 4, 14)
    if c.n_params == 0:
        pytest.skip("no parameters drawn")
    h = cluster(4, 0.3)
    theta = rng.uniform(0, 2 * np.pi, c.n_params)
    ps = sv.gradient(c, theta, h)
    costs, adj = sv.adjoint_gradient(c, theta[None], h)
    assert np.allclose(ps, adj[0], atol=1e-12)
    assert costs[0] == pytest.approx(sv.cost(c, theta, h))
    assert np.allclose(ps, finite_difference(c, theta, h), atol=1e-7)


def test_shared_parameter_gradient():
    c = build_hva_tfi(4, 2)
    h = tfi(4, 0.5)
    theta = np.array([0.3, 1.1, -0.4, 2.0])
    assert np.allclose(sv.gradient(c, theta, h), finite_difference(c, theta, h), atol=1e-7)
    assert np.allclose(sv.adjoint_gradient(c, theta, h)[1][0], sv.gradient(c, theta, h), atol=1e-12)


def test_random_cliffords_rejected_by_gradients():
    c = build_brickwall_1d(3, 1, "clifford")
    with pytest.raises(ValueError):
        sv.qfi_matrix(c, np.zeros(0))


def test_qfi_of_single_qubit_zyz_has_rank_two():
    b = CircuitBuilder(1)
    for a in "ZYZ":
        b.rotation(a, [0])
    c = b.build()
    res = sv.qfi_matrix(c, np.array([0.4, 1.0, 2.2]))
    assert res.rank == 2
    assert np.allclose(res.matrix, res.matrix.T)


def test_qfi_matches_finite_difference_metric():
    rng = np.random.default_rng(1)
    c = build_brickwall_1d(3, 1, "rycx")
    theta = rng.uniform(0, 2 * np.pi, c.n_params)
    eps = 1e-6
    psi = sv.evolve(c, theta[None], fuse=False)[0]
    jac = []
    for k in range(c.n_params):
        d = np.zeros(c.n_params)
        d[k] = eps
        jac.append((sv.evolve(c, (theta + d)[None])[0] - sv.evolve(c, (theta - d)[None])[0]) / (2 * eps))
    jac = np.array(jac)
    overlap = jac.conj() @ psi
    f = 4 * np.real(jac.conj() @ jac.T - np.outer(overlap, overlap.conj()))
    assert np.allclose(sv.qfi_matrix(c, theta).matrix, f, atol=1e-6)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_ry_layer_effective_dimension(n):
    assert sv.effective_dimension(build_brickwall_1d(n, 0)) == n


def test_effective_dimension_saturates_at_state_manifold():
    # two qubits: the projective state space has 2 * 4 - 2 = 6 real dimensions
    assert sv.effective_dimension(build_brickwall_1d(2, 3, "su4")) == 6


@pytest.mark.parametrize("n, rank", [(3, 4), (4, 8), (5, 12)])
def test_hva_rank_saturates_at_half_n_squared(n, rank):
    # the |+> start, X field and ZZ bonds are all reflection and parity symmetric,
    # so the reachable manifold is smaller than N^2 - N
    c = build_hva_tfi(n, n * n)
    assert sv.effective_dimension(c, n_points=3, seed=7) == rank


def test_capacity_errors():
    with pytest.raises(CapacityError):
        sv.initial_state(CircuitBuilder(sv.MAX_QUBITS + 1).build())
    c = build_brickwall_1d(sv.TRAIN_MAX_QUBITS + 1, 1, "rycz")
    with pytest.raises(CapacityError):
        sv.train_adam(c, cluster(sv.TRAIN_MAX_QUBITS + 1), max_iters=1, n_restarts=1)


def test_cost_shape_checks():
    c = build_brickwall_1d(3, 1, "rycz")
    with pytest.raises(DimensionError):
        sv.cost(c, np.zeros(c.n_params), cluster(4))
    with pytest.raises(DimensionError):
        sv.gradient(c, np.zeros(c.n_params + 1), cluster(3))


def test_apply_pauli_matches_matrix():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    p = PauliString.from_label("-XYZ")
    assert np.allclose(sv.apply_pauli(psi, p), p.to_matrix() @ psi)


def test_training_reaches_exact_ground_state():
    c = build_brickwall_1d(4, 1, "rycz")
    h = cluster(4)
    res = sv.train_adam(c, h, n_restarts=3, max_iters=1500, seed=0)
    assert res.ground_energy == pytest.approx(-4)
    assert res.best_error < 1e-6


def test_training_records_trajectories(tmp_path):
    c = build_brickwall_1d(3, 0)
    h = polarization(3, "X")
    res = sv.train_adam(c, h, n_restarts=2, max_iters=50, record_every=10, seed=2)
    assert len(res.trajectories) == 2
    assert res.trajectories[0][0, 0] == 0
    path = tmp_path / "t.csv"
    res.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "restart,iter,cost,grad_norm"
    assert len(lines) > 2


def test_training_is_seeded():
    c = build_brickwall_1d(4, 1, "rycx")
    h = cluster(4)
    a = sv.train_adam(c, h, n_restarts=2, max_iters=200, seed=5)
    b = sv.train_adam(c, h, n_restarts=2, max_iters=200, seed=5)
    assert np.array_equal(a.final_costs, b.final_costs)


def test_t_gate_phase():
    b = CircuitBuilder(1, "plus")
    b.fixed("T", [0])
    b.fixed("T", [0])
    psi = sv.evolve(b.build(), np.zeros((1, 0)))[0]
    # T^2 = S maps |+> to |+i>
    assert np.allclose(psi, [1 / np.sqrt(2), 1j / np.sqrt(2)])
