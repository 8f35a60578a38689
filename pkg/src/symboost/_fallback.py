"""Pure numpy gate kernels, used when the compiled extension is unavailable.

The amplitude vector is viewed as an n-dimensional ``(2, ..., 2)`` tensor;
qubit ``q`` lives on axis ``n - 1 - q`` (C order, little-endian indexing).
"""

import math

import numpy as np

HADAMARD, NOT, SWAP, PHASE = 0, 1, 2, 3

_H = 1.0 / math.sqrt(2.0)


def _index(n_qubits, fixed):
    idx = [slice(None)] * n_qubits
    for q, bit in fixed.items():
        idx[n_qubits - 1 - q] = bit
    return tuple(idx)


def _controls(cmask):
    out = {}
    q = 0
    while cmask:
        if cmask & 1:
            out[q] = 1
        cmask >>= 1
        q += 1
    return out


def apply_one(flat, n_qubits, kind, t1, t2, cmask, angle):
    amps = flat.view(np.complex128).reshape((2,) * n_qubits)
    fixed = _controls(cmask)
    if kind == PHASE:
        fixed[t1] = 1
        amps[_index(n_qubits, fixed)] *= complex(math.cos(angle), math.sin(angle))
        return
    if kind == SWAP:
        i0 = _index(n_qubits, {**fixed, t1: 1, t2: 0})
        i1 = _index(n_qubits, {**fixed, t1: 0, t2: 1})
    else:
        i0 = _index(n_qubits, {**fixed, t1: 0})
        i1 = _index(n_qubits, {**fixed, t1: 1})
    a0 = amps[i0].copy()
    a1 = amps[i1]
    if kind == HADAMARD:
        amps[i0] = (a0 + a1) * _H
        amps[i1] = (a0 - a1) * _H
    else:
        amps[i0] = a1
        amps[i1] = a0


def run_program(flat, n_qubits, kinds, t1, t2, cmask, angles):
    for g in range(len(kinds)):
        apply_one(flat, n_qubits, int(kinds[g]), int(t1[g]), int(t2[g]),
                  int(cmask[g]), float(angles[g]))
