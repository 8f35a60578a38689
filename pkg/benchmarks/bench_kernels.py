"""Compare the compiled and pure-Python gate kernels.

    python3 benchmarks/bench_kernels.py [--qubits 18] [--repeat 5]

Times each gate kind on a random state and one full noiseless Shor(15, 2)
program, and checks that both backends produce the same amplitudes.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from symboost import kernels
from symboost.circuits import shor_program

# compiled first, so speedup = python time / compiled time
NAMES = [n for n in ("cython", "python") if n in kernels.BACKENDS]

CASES = {
    "hadamard q0": (kernels.HADAMARD, 0, 0, 0),
    "hadamard q_top": (kernels.HADAMARD, -1, 0, 0),
    "not, 2 controls": (kernels.NOT, 3, 0, (1 << 1) | (1 << 5)),
    "swap, 1 control": (kernels.SWAP, 2, 7, 1 << 4),
    "phase, 2 controls": (kernels.PHASE, 6, 0, (1 << 0) | (1 << 9)),
}


def _state(n, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return a / np.linalg.norm(a)


def bench_gates(n, repeat):
    rows = []
    for label, (kind, t1, t2, cmask) in CASES.items():
        t1 = n - 1 if t1 < 0 else t1
        row = [label]
        for name in NAMES:
            be = kernels.get_backend(name)
            amps = _state(n)
            flat = amps.view(np.float64)
            t = min(timeit.repeat(lambda: be.apply_one(flat, n, kind, t1, t2, cmask, 0.3),
                                  number=20, repeat=repeat)) / 20
            row.append(t)
        rows.append(row)
    return rows


def bench_shor(repeat):
    prog = shor_program(15, 2, 0)
    times, finals = [], []
    for name in NAMES:
        be = kernels.get_backend(name)
        angles = prog.angles(None)

        def run():
            amps = np.zeros(1 << prog.n_qubits, dtype=np.complex128)
            amps[1 << 8] = 1.0
            be.run_program(amps.view(np.float64), prog.n_qubits, prog.kinds, prog.t1, prog.t2,
                           prog.cmask, angles)
            return amps

        times.append(min(timeit.repeat(run, number=1, repeat=repeat)))
        finals.append(run())
    return prog, times, finals


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=18)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    names = NAMES
    if len(names) < 2:
        print(f"only backend available: {names}; build the extension to compare")
    print(f"single gates on {args.qubits} qubits (seconds per gate)")
    print(f"{'case':22s}" + "".join(f"{n:>14s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, *ts in bench_gates(args.qubits, args.repeat):
        extra = f"{ts[1] / ts[0]:12.1f}x" if len(ts) > 1 else ""
        print(f"{label:22s}" + "".join(f"{t:14.3e}" for t in ts) + extra)
    prog, times, finals = bench_shor(args.repeat)
    print(f"\nShor(15, 2): {prog.n_qubits} qubits, {len(prog.kinds)} gates")
    for n, t in zip(names, times):
        print(f"  {n:10s} {t:8.3f} s")
    if len(finals) > 1:
        dev = float(np.max(np.abs(finals[0] - finals[1])))
        print(f"  speedup {times[1] / times[0]:.1f}x, max amplitude deviation {dev:.2e}")


if __name__ == "__main__":
    main()
