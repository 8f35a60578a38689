"""Dense state vectors and exact application of the Beauregard gate set.

Basis indexing is little-endian: qubit 0 is the least significant bit of the
basis index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

MAX_QUBITS = 30


class GateKind(enum.IntEnum):
    HADAMARD = kernels.HADAMARD
    NOT = kernels.NOT
    SWAP = kernels.SWAP
    PHASE = kernels.PHASE


@dataclass(frozen=True)
class GateOp:
    """One gate.

    ``Phase`` gates either carry an explicit ``angle`` or a rotation type
    ``j`` and ``direction`` (+1 forward, -1 backward); in the latter case the
    angle is resolved against a noise ledger when the gate is executed, and
    the noiseless angle is ``direction * pi / 2**j``.
    """

    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float | None = None
    j: int | None = None
    direction: int = 1

    def __post_init__(self):
        n_targets = 2 if self.kind == GateKind.SWAP else 1
        if len(self.targets) != n_targets:
            raise ValueError(f"{self.kind.name} needs {n_targets} target(s), got {self.targets}")
        if len(self.controls) > 2:
            raise ValueError("at most two quantum controls are supported")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"targets {self.targets} and controls {self.controls} overlap")
        if any(q < 0 for q in qubits):
            raise ValueError("qubit indices must be non-negative")
        if self.kind == GateKind.PHASE:
            if self.angle is None and self.j is None:
                raise ValueError("Phase gate needs an angle or a rotation type j")
            if self.angle is not None and not math.isfinite(self.angle):
                raise ValueError("Phase angle must be finite")
            if self.j is not None and self.j < 0:
                raise ValueError("rotation type j must be >= 0")
            if self.direction not in (1, -1):
                raise ValueError("direction must be +1 or -1")

    @property
    def ideal_angle(self) -> float:
        if self.angle is not None:
            return self.angle
        return self.direction * math.pi / 2**self.j

    def inverse(self) -> GateOp:
        if self.kind != GateKind.PHASE:
            return self
        angle = None if self.angle is None else -self.angle
        return GateOp(self.kind, self.targets, self.controls, angle, self.j, -self.direction)

    @property
    def control_mask(self) -> int:
        mask = 0
        for q in self.controls:
            mask |= 1 << q
        return mask


def hadamard(q):
    return GateOp(GateKind.HADAMARD, (q,))


def x_gate(q, controls=()):
    return GateOp(GateKind.NOT, (q,), tuple(controls))


def swap(q1, q2, controls=()):
    return GateOp(GateKind.SWAP, (q1, q2), tuple(controls))


def phase(target, angle=None, controls=(), j=None, direction=1):
    return GateOp(GateKind.PHASE, (target,), tuple(controls), angle, j, direction)


class StateVector:
    """Complex128 amplitudes over ``n_qubits`` qubits."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray | None = None):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
        self.n_qubits = n_qubits
        if amplitudes is None:
            amplitudes = np.zeros(1 << n_qubits, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (1 << n_qubits,):
                raise ValueError(f"expected {1 << n_qubits} amplitudes, got shape {amplitudes.shape}")
        self.amplitudes = amplitudes

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def _flat(self) -> np.ndarray:
        return self.amplitudes.view(np.float64)

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits})"


def init_basis_state(n_qubits: int, index: int) -> StateVector:
    size = 1 << n_qubits if 1 <= n_qubits <= MAX_QUBITS else None
    if size is None:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    if not 0 <= index < size:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits (need < {size})")
    amps = np.zeros(size, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def _check_indices(state, op):
    for q in op.targets + op.controls:
        if q >= state.n_qubits:
            raise ValueError(f"qubit {q} out of range for {state.n_qubits}-qubit state")


def apply_gate(state: StateVector, op: GateOp, angle: float | None = None) -> StateVector:
    """Apply ``op`` in place and return ``state``.

    ``angle`` overrides the phase angle (used when a noise ledger has realized
    it); otherwise the gate's explicit or ideal angle is used.
    """
    _check_indices(state, op)
    t2 = op.targets[1] if op.kind == GateKind.SWAP else 0
    if op.kind == GateKind.PHASE:
        angle = op.ideal_angle if angle is None else angle
    else:
        angle = 0.0
    kernels.apply_one(state._flat(), state.n_qubits, int(op.kind), op.targets[0], t2,
                      op.control_mask, float(angle))
    return state


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap ``|<a|b>|^2``, summed pairwise in a fixed order."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    overlap = np.sum(np.conj(a.amplitudes) * b.amplitudes)
    return float(min(1.0, abs(overlap) ** 2))


def measurement_distribution(state: StateVector, qubits) -> np.ndarray:
    """Marginal distribution over ``qubits``; bit k of the outcome is ``qubits[k]``."""
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit indices in {qubits}")
    n = state.n_qubits
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n}-qubit state")
    probs = state.probabilities().reshape((2,) * n)
    keep = [n - 1 - q for q in qubits]
    drop = tuple(ax for ax in range(n) if ax not in keep)
    marginal = probs.sum(axis=drop) if drop else probs
    # remaining axes are in ascending axis order; reorder so the last qubit in
    # ``qubits`` is the leading (most significant) axis
    remaining = sorted(keep)
    order = [remaining.index(ax) for ax in reversed(keep)]
    return np.ascontiguousarray(np.transpose(marginal, order)).reshape(-1)
