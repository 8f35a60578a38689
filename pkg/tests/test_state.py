import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symboost import kernels
from symboost.state import (GateKind, GateOp, StateVector, apply_gate, fidelity, hadamard,
                            init_basis_state, measurement_distribution, phase, swap, x_gate)


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, a / np.linalg.norm(a))


def dense(op, n):
    """Reference matrix built from the definition, one basis column at a time."""
    dim = 1 << n
    U = np.zeros((dim, dim), dtype=complex)
    ctrl_ok = lambda i: all((i >> c) & 1 for c in op.controls)  # noqa: E731
    for i in range(dim):
        if not ctrl_ok(i):
            U[i, i] = 1
            continue
        t = op.targets[0]
        if op.kind == GateKind.HADAMARD:
            b = (i >> t) & 1
            U[i & ~(1 << t), i] += 1 / math.sqrt(2)
            U[i | (1 << t), i] += (-1) ** b / math.sqrt(2)
        elif op.kind == GateKind.NOT:
            U[i ^ (1 << t), i] = 1
        elif op.kind == GateKind.SWAP:
            u = op.targets[1]
            bt, bu = (i >> t) & 1, (i >> u) & 1
            k = i & ~(1 << t) & ~(1 << u) | (bu << t) | (bt << u)
            U[k, i] = 1
        else:
            U[i, i] = np.exp(1j * op.ideal_angle) if (i >> t) & 1 else 1
    return U


class TestBasis:
    def test_init_basis_state_sets_one_amplitude(self):
        s = init_basis_state(3, 5)
        assert s.amplitudes[5] == 1 and s.norm_squared() == 1

    def test_out_of_range_index(self):
        with pytest.raises(ValueError, match="out of range"):
            init_basis_state(3, 8)

    def test_qubit_count_limits(self):
        with pytest.raises(ValueError):
            StateVector(0)
        with pytest.raises(ValueError):
            init_basis_state(31, 0)

    def test_little_endian(self):
        s = init_basis_state(3, 0)
        apply_gate(s, x_gate(0))
        assert s.amplitudes[1] == 1


class TestGateOp:
    def test_overlapping_control_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            x_gate(1, controls=(1,))

    def test_swap_needs_two_targets(self):
        with pytest.raises(ValueError):
            GateOp(GateKind.SWAP, (0,))

    def test_phase_needs_angle_or_type(self):
        with pytest.raises(ValueError):
            GateOp(GateKind.PHASE, (0,))

    def test_three_controls_rejected(self):
        with pytest.raises(ValueError):
            x_gate(0, controls=(1, 2, 3))

    def test_ideal_angle_from_type(self):
        assert phase(0, j=3, direction=-1).ideal_angle == -math.pi / 8

    def test_inverse_flips_direction(self):
        op = phase(0, j=2, controls=(1,))
        inv = op.inverse()
        assert inv.direction == -1 and inv.j == 2 and inv.controls == (1,)

    def test_qubit_beyond_state(self):
        with pytest.raises(ValueError):
            apply_gate(init_basis_state(2, 0), x_gate(2))


OPS = [
    hadamard(0), hadamard(3), x_gate(2), x_gate(0, (3,)), x_gate(1, (0, 3)),
    swap(0, 3), swap(1, 2, (0,)), swap(0, 2, (1, 3)),
    phase(1, 0.7), phase(3, -1.1, (0,)), phase(0, 0.3, (1, 2)), phase(2, j=2, direction=-1),
]


@pytest.mark.parametrize("backend", sorted(kernels.BACKENDS))
@pytest.mark.parametrize("op", OPS, ids=lambda op: f"{op.kind.name}{op.targets}{op.controls}")
def test_gate_matches_dense_matrix(backend, op, monkeypatch):
    monkeypatch.setattr(kernels, "_impl", kernels.get_backend(backend))
    s = random_state(4, seed=3)
    expected = dense(op, 4) @ s.amplitudes
    apply_gate(s, op)
    np.testing.assert_allclose(s.amplitudes, expected, atol=1e-14)


gate_strategy = st.tuples(
    st.sampled_from([0, 1, 2, 3]),
    st.permutations(range(6)),
    st.integers(0, 2),
    st.floats(-4, 4, allow_nan=False),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(gate_strategy, min_size=1, max_size=25))
def test_backends_agree_on_random_programs(gates):
    if len(kernels.BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    n = 6
    kinds, t1, t2, cm, ang = [], [], [], [], []
    for kind, perm, nctrl, angle in gates:
        kinds.append(kind)
        t1.append(perm[0])
        t2.append(perm[1] if kind == kernels.SWAP else 0)
        used = 2 if kind == kernels.SWAP else 1
        cm.append(sum(1 << q for q in perm[used:used + nctrl]))
        ang.append(angle if kind == kernels.PHASE else 0.0)
    arrays = (np.array(kinds, np.int8), np.array(t1, np.int32), np.array(t2, np.int32),
              np.array(cm, np.int64), np.array(ang, np.float64))
    out = []
    for name in ("cython", "python"):
        s = random_state(n, seed=11)
        kernels.get_backend(name).run_program(s._flat(), n, *arrays)
        out.append(s.amplitudes)
    np.testing.assert_allclose(out[0], out[1], atol=1e-13)


def test_unitarity_preserves_norm():
    s = random_state(8, seed=2)
    for op in [hadamard(5), phase(2, 0.4, (7,)), swap(1, 6, (0,)), x_gate(4, (3, 2))]:
        apply_gate(s, op)
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-13)


class TestFidelity:
    def test_self_overlap(self):
        s = random_state(5)
        assert fidelity(s, s) == pytest.approx(1.0, abs=1e-14)

    def test_orthogonal(self):
        assert fidelity(init_basis_state(2, 1), init_basis_state(2, 2)) == 0.0

    def test_global_phase_ignored(self):
        a = random_state(4)
        b = StateVector(4, a.amplitudes * np.exp(0.9j))
        assert fidelity(a, b) == pytest.approx(1.0, abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            fidelity(init_basis_state(2, 0), init_basis_state(3, 0))


class TestMeasurement:
    def test_marginal_bit_order(self):
        s = init_basis_state(4, 0b1010)
        dist = measurement_distribution(s, [1, 3])
        assert dist[0b11] == 1
        dist = measurement_distribution(s, [0, 1])
        assert dist[0b10] == 1

    def test_marginal_sums_to_one(self):
        dist = measurement_distribution(random_state(6), [5, 0, 2])
        assert dist.sum() == pytest.approx(1.0)
        assert dist.shape == (8,)

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            measurement_distribution(random_state(3), [1, 1])

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            measurement_distribution(random_state(3), [3])


def test_backend_selection_env_is_reported():
    assert kernels.BACKEND in kernels.BACKENDS
    assert kernels.get_backend() is kernels._impl


@pytest.mark.parametrize("name", ["python", "cython"])
def test_backend_env_override(name):
    if name not in kernels.BACKENDS:
        pytest.skip("compiled backend not built")
    env = dict(os.environ, SYMBOOST_BACKEND=name)
    out = subprocess.run([sys.executable, "-c", "import symboost.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == name


def test_unknown_backend_fails_loudly():
    env = dict(os.environ, SYMBOOST_BACKEND="fortran")
    out = subprocess.run([sys.executable, "-c", "import symboost.kernels"], env=env,
                         capture_output=True, text=True)
    assert out.returncode != 0 and "not available" in out.stderr
