"""Beauregard-architecture Shor circuits with noisy phase rotations.

Circuits are emitted as lists of :class:`~symboost.state.GateOp` templates in
which every rotation carries its type ``j`` and direction. A
:class:`Program` packs the templates into flat arrays; on each run the
rotation angles are realized against a noise ledger in emission order and
the whole gate sequence is executed by one kernel call.

Fourier-basis convention: after :func:`qft_ops` on register ``r`` (``r[0]``
least significant), qubit ``r[mu]`` carries bit ``mu`` of the Fourier index.
Adding a constant puts ``theta_j`` with ``j = n-1-nu-mu`` on ``r[mu]`` for
every set bit ``nu`` of the addend, so each bit of the addend drives its own
rotation, ``j = 0`` (a pi rotation) included.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .noise import NOISELESS, NoiseLedger, NoiseSpec, make_ledger, realized_angles
from .state import (GateKind, GateOp, StateVector, fidelity, hadamard, init_basis_state,
                    measurement_distribution, phase, swap, x_gate)


def inverse_ops(ops):
    return [op.inverse() for op in reversed(ops)]


def qft_ops(register, inverse=False):
    """Hadamards, controlled ``theta_j`` cascade and bit-reversal swaps."""
    register = list(register)
    if len(set(register)) != len(register):
        raise ValueError(f"register qubits must be distinct: {register}")
    n = len(register)
    ops = []
    for q in reversed(range(n)):
        ops.append(hadamard(register[q]))
        for c in reversed(range(q)):
            ops.append(phase(register[q], controls=(register[c],), j=q - c, direction=1))
    for i in range(n // 2):
        ops.append(swap(register[i], register[n - 1 - i]))
    return inverse_ops(ops) if inverse else ops


def phi_add_ops(register, addend, controls=()):
    """Fourier-space addition of a classical constant; negative addends use backward gates."""
    n = len(register)
    mag = abs(addend)
    if mag >= 1 << n:
        raise ValueError(f"|addend| = {mag} does not fit a {n}-qubit register")
    direction = 1 if addend >= 0 else -1
    ops = []
    for mu in range(n):
        for nu in range(n - mu):
            if (mag >> nu) & 1:
                ops.append(phase(register[mu], controls=tuple(controls),
                                 j=n - 1 - nu - mu, direction=direction))
    return ops


def add_mod_n_ops(register, ancilla, a, N, controls=()):
    """Doubly controlled ``phi(b) -> phi((b + a) mod N)`` with a comparison ancilla.

    Computational part: +a, -N, comparison block (QFT^-1, CNOT from the most
    significant qubit, QFT), ancilla-controlled +N. Recovery part: -a,
    comparison block on the inverted MSB, +a.
    """
    if not 0 <= a < N:
        raise ValueError(f"addend a={a} must satisfy 0 <= a < N={N}")
    if N >= 1 << (len(register) - 1):
        raise ValueError(f"N={N} needs a register of at least {N.bit_length() + 1} qubits")
    msb = register[-1]
    ops = []
    ops += phi_add_ops(register, a, controls)
    ops += phi_add_ops(register, -N)
    ops += qft_ops(register, inverse=True)
    ops.append(x_gate(ancilla, (msb,)))
    ops += qft_ops(register)
    ops += phi_add_ops(register, N, (ancilla,))
    ops += phi_add_ops(register, -a, controls)
    ops += qft_ops(register, inverse=True)
    ops.append(x_gate(msb))
    ops.append(x_gate(ancilla, (msb,)))
    ops.append(x_gate(msb))
    ops += qft_ops(register)
    ops += phi_add_ops(register, a, controls)
    return ops


@dataclass(frozen=True)
class CircuitContext:
    """Register layout for factoring ``N`` with ``delta_L`` extra adder/multiplier qubits.

    Qubits, in order: control register (2 L_N), adder register (L_cap + 1),
    multiplier register (L_cap), comparison ancilla.
    """

    N: int
    base: int
    delta_L: int = 0

    def __post_init__(self):
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"N must be odd and >= 3, got {self.N}")
        if self.delta_L < 0:
            raise ValueError("delta_L must be >= 0")
        if not 1 < self.base < self.N or math.gcd(self.base, self.N) != 1:
            raise ValueError(f"base {self.base} must be in (1, N) and coprime to N={self.N}")

    @property
    def L_N(self) -> int:
        return self.N.bit_length()

    @property
    def L_cap(self) -> int:
        return self.L_N + self.delta_L

    @property
    def control(self) -> list[int]:
        return list(range(2 * self.L_N))

    @property
    def adder(self) -> list[int]:
        start = 2 * self.L_N
        return list(range(start, start + self.L_cap + 1))

    @property
    def multiplier(self) -> list[int]:
        start = 2 * self.L_N + self.L_cap + 1
        return list(range(start, start + self.L_cap))

    @property
    def ancilla(self) -> int:
        return 2 * self.L_N + 2 * self.L_cap + 1

    @property
    def n_qubits(self) -> int:
        return 2 * self.L_N + 2 * self.L_cap + 2


def cmult_ops(ctx: CircuitContext, a: int, control: int):
    """``|c>|x>|b> -> |c>|x>|b + c*a*x mod N>`` on the adder register."""
    ops = qft_ops(ctx.adder)
    for i, xq in enumerate(ctx.multiplier):
        ops += add_mod_n_ops(ctx.adder, ctx.ancilla, (a << i) % ctx.N, ctx.N, (control, xq))
    ops += qft_ops(ctx.adder, inverse=True)
    return ops


def c_mult_mod_n_ops(ctx: CircuitContext, a: int, control: int, direction: int = 1):
    """Controlled in-place ``|x> -> |a x mod N>`` on the multiplier register."""
    if math.gcd(a, ctx.N) != 1:
        raise ValueError(f"a={a} is not invertible mod N={ctx.N}")
    a %= ctx.N
    ops = cmult_ops(ctx, a, control)
    for xq, bq in zip(ctx.multiplier, ctx.adder):
        ops.append(swap(xq, bq, (control,)))
    ops += inverse_ops(cmult_ops(ctx, pow(a, -1, ctx.N), control))
    return ops if direction > 0 else inverse_ops(ops)


def shor_ops(ctx: CircuitContext):
    ops = [hadamard(q) for q in ctx.control]
    for i, cq in enumerate(ctx.control):
        ops += c_mult_mod_n_ops(ctx, pow(ctx.base, 2**i, ctx.N), cq)
    ops += qft_ops(ctx.control, inverse=True)
    return ops


class Program:
    """A gate sequence packed for the kernels."""

    def __init__(self, n_qubits: int, ops):
        self.n_qubits = n_qubits
        self.ops = list(ops)
        for op in self.ops:
            for q in op.targets + op.controls:
                if q >= n_qubits:
                    raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
        m = len(self.ops)
        self.kinds = np.fromiter((int(op.kind) for op in self.ops), np.int8, m)
        self.t1 = np.fromiter((op.targets[0] for op in self.ops), np.int32, m)
        self.t2 = np.fromiter((op.targets[1] if len(op.targets) > 1 else 0 for op in self.ops),
                              np.int32, m)
        self.cmask = np.fromiter((op.control_mask for op in self.ops), np.int64, m)
        self.base_angles = np.fromiter(
            (op.angle if op.kind == GateKind.PHASE and op.angle is not None else 0.0
             for op in self.ops), np.float64, m)
        noisy = [i for i, op in enumerate(self.ops) if op.kind == GateKind.PHASE and op.angle is None]
        self.noisy = np.array(noisy, dtype=np.intp)
        self.js = np.array([self.ops[i].j for i in noisy], dtype=np.int64)
        self.directions = np.array([self.ops[i].direction for i in noisy], dtype=np.int64)

    def __len__(self):
        return len(self.ops)

    def angles(self, ledger: NoiseLedger | None = None) -> np.ndarray:
        angles = self.base_angles.copy()
        if ledger is None:
            ledger = make_ledger(NOISELESS)
        alphas = ledger.alphas(self.js, self.directions)
        angles[self.noisy] = realized_angles(ledger.spec.model, self.js, self.directions, alphas)
        return angles

    def run(self, state: StateVector, ledger: NoiseLedger | None = None) -> StateVector:
        if state.n_qubits != self.n_qubits:
            raise ValueError(f"program is for {self.n_qubits} qubits, state has {state.n_qubits}")
        kernels.run_program(state._flat(), self.n_qubits, self.kinds, self.t1, self.t2,
                            self.cmask, self.angles(ledger))
        return state

    def gate_counts(self) -> dict[str, int]:
        counts = Counter(GateKind(k).name for k in self.kinds.tolist())
        counts["ROTATION"] = int(len(self.noisy))
        return dict(counts)


def _apply(state, ops, ledger):
    return Program(state.n_qubits, ops).run(state, ledger)


def qft(state, register, direction=1, ledger=None):
    """Forward (``direction=+1``) or inverse (``-1``) QFT on ``register``."""
    return _apply(state, qft_ops(register, inverse=direction < 0), ledger)


def phi_add_const(state, adder_register, addend, ledger=None, quantum_controls=()):
    return _apply(state, phi_add_ops(adder_register, addend, quantum_controls), ledger)


def add_mod_N(state, register, ancilla, a, N, ledger=None, quantum_controls=()):
    return _apply(state, add_mod_n_ops(register, ancilla, a, N, quantum_controls), ledger)


def c_mult_mod_N(state, ctx, a, control_qubit, ledger=None, direction=1):
    return _apply(state, c_mult_mod_n_ops(ctx, a, control_qubit, direction), ledger)


def _ledger(spec: NoiseSpec, realization):
    if realization is not None:
        spec = spec.with_realization(realization)
    return make_ledger(spec)


# --- adder -----------------------------------------------------------------

@lru_cache(maxsize=256)
def _adder_program(a: int, L: int) -> Program:
    reg = list(range(L + 1))
    return Program(L + 1, qft_ops(reg) + phi_add_ops(reg, a) + qft_ops(reg, inverse=True))


def adder_output_state(s, a, L, noise_spec=NOISELESS, realization=None) -> StateVector:
    """State of the (L+1)-qubit register after QFT, +a, QFT^-1 applied to ``|s>``."""
    if not (0 <= s < 2**L and 0 <= a < 2**L):
        raise ValueError(f"need 0 <= s, a < 2^L = {2**L}")
    state = init_basis_state(L + 1, s)
    return _adder_program(a, L).run(state, _ledger(noise_spec, realization))


def adder_fidelity_sim(s, a, L, noise_spec=NOISELESS, realization=None) -> float:
    state = adder_output_state(s, a, L, noise_spec, realization)
    return float(abs(state.amplitudes[s + a]) ** 2)


# --- modulo addition -------------------------------------------------------

@lru_cache(maxsize=64)
def _modadd_layout(N, delta_L, explicit_controls):
    L_cap = N.bit_length() + delta_L
    register = list(range(L_cap + 1))
    ancilla = L_cap + 1
    controls = (L_cap + 2, L_cap + 3) if explicit_controls else ()
    n_qubits = L_cap + 2 + len(controls)
    return register, ancilla, controls, n_qubits


@lru_cache(maxsize=64)
def _modadd_program(a, N, delta_L, explicit_controls):
    register, ancilla, controls, n = _modadd_layout(N, delta_L, explicit_controls)
    return Program(n, add_mod_n_ops(register, ancilla, a, N, controls))


@lru_cache(maxsize=64)
def _modadd_input(s, N, delta_L, explicit_controls):
    register, _, controls, n = _modadd_layout(N, delta_L, explicit_controls)
    index = s
    for c in controls:
        index |= 1 << c
    state = init_basis_state(n, index)
    Program(n, qft_ops(register)).run(state)
    state.amplitudes.setflags(write=False)
    return state


@lru_cache(maxsize=64)
def _modadd_reference(s, a, N, delta_L, explicit_controls):
    state = _modadd_input(s, N, delta_L, explicit_controls).copy()
    _modadd_program(a, N, delta_L, explicit_controls).run(state)
    state.amplitudes.setflags(write=False)
    return state


def modadd_output_state(s, a, N, delta_L=0, noise_spec=NOISELESS, realization=None,
                        explicit_controls=False) -> StateVector:
    if not (0 <= s < N and 0 <= a < N):
        raise ValueError(f"need 0 <= s, a < N = {N}")
    state = _modadd_input(s, N, delta_L, explicit_controls).copy()
    return _modadd_program(a, N, delta_L, explicit_controls).run(state, _ledger(noise_spec, realization))


def modadd_fidelity_sim(s, a, N, delta_L=0, noise_spec=NOISELESS, realization=None,
                        explicit_controls=False) -> float:
    """Fidelity of one modulo-addition unit with both controls on.

    The input is the exact Fourier state of ``|s>`` with the ancilla at 0; the
    noisy unit's output (ancilla included) is compared with the noiseless one.
    By default the two controls, which sit at ``|1>`` throughout, are left out
    of the register and the gates they control fire unconditionally; pass
    ``explicit_controls=True`` to simulate them as qubits.
    """
    out = modadd_output_state(s, a, N, delta_L, noise_spec, realization, explicit_controls)
    return fidelity(_modadd_reference(s, a, N, delta_L, explicit_controls), out)


# --- full order finding ----------------------------------------------------

@dataclass
class ShorResult:
    fidelity: float
    control_distribution: np.ndarray
    gate_counts: dict = field(default_factory=dict)


@lru_cache(maxsize=8)
def shor_program(N: int, base: int, delta_L: int = 0) -> Program:
    ctx = CircuitContext(N, base, delta_L)
    return Program(ctx.n_qubits, shor_ops(ctx))


def _shor_initial(ctx):
    return init_basis_state(ctx.n_qubits, 1 << ctx.multiplier[0])


@lru_cache(maxsize=8)
def _shor_reference(N, base, delta_L):
    ctx = CircuitContext(N, base, delta_L)
    state = shor_program(N, base, delta_L).run(_shor_initial(ctx))
    state.amplitudes.setflags(write=False)
    return state


def shor_final_state(N, base, delta_L=0, noise_spec=NOISELESS, realization=None) -> StateVector:
    ctx = CircuitContext(N, base, delta_L)
    return shor_program(N, base, delta_L).run(_shor_initial(ctx), _ledger(noise_spec, realization))


def shor_run(N, base, delta_L=0, noise_spec=NOISELESS, realization=None) -> ShorResult:
    """Order finding for ``base`` mod ``N`` with a full 2 L_N-qubit control register.

    The fidelity is taken against the noiseless run of the identical circuit.
    """
    ctx = CircuitContext(N, base, delta_L)
    state = shor_final_state(N, base, delta_L, noise_spec, realization)
    return ShorResult(
        fidelity=fidelity(_shor_reference(N, base, delta_L), state),
        control_distribution=measurement_distribution(state, ctx.control),
        gate_counts=shor_program(N, base, delta_L).gate_counts(),
    )
