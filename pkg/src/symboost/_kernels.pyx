# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled gate kernels operating in place on a float64 view of the amplitudes.

Every kernel enumerates only the sub-block of basis indices whose fixed bits
(targets and controls) have the required values, so a doubly controlled phase
touches 1/8 of the array.
"""

from libc.math cimport cos, sin, sqrt

cdef enum:
    K_HADAMARD = 0
    K_NOT = 1
    K_SWAP = 2
    K_PHASE = 3


cdef int _positions(long long mask, int* pos) nogil:
    cdef int n = 0, b = 0
    while mask:
        if mask & 1:
            pos[n] = b
            n += 1
        mask >>= 1
        b += 1
    return n


cdef void _apply(double* a, int n_qubits, int kind, int t1, int t2,
                 long long cmask, double angle) nogil:
    cdef int pos[64]
    cdef long long fixed = cmask | (<long long>1 << t1)
    if kind == K_SWAP:
        fixed |= (<long long>1 << t2)
    cdef int npos = _positions(fixed, pos)
    # free indices below the lowest fixed bit form contiguous runs; the run
    # starts are enumerated by adding 1 with the carry skipping the fixed bits
    cdef Py_ssize_t run = (<Py_ssize_t>1) << pos[0]
    cdef Py_ssize_t outer = ((<Py_ssize_t>1) << (n_qubits - npos)) >> pos[0]
    cdef Py_ssize_t skip = <Py_ssize_t>fixed | (run - 1)
    cdef Py_ssize_t k, r, f, base
    cdef Py_ssize_t b1 = (<Py_ssize_t>1) << t1
    cdef Py_ssize_t b2 = (<Py_ssize_t>1) << t2
    cdef double r0, m0, r1, m1, c, s
    cdef double h = 1.0 / sqrt(2.0)
    cdef double* p0
    cdef double* p1

    if kind == K_PHASE:
        c = cos(angle)
        s = sin(angle)
        f = 0
        for k in range(outer):
            p1 = a + 2 * (f | cmask | b1)
            f = ((f | skip) + 1) & ~skip
            for r in range(run):
                r1 = p1[2 * r]
                m1 = p1[2 * r + 1]
                p1[2 * r] = r1 * c - m1 * s
                p1[2 * r + 1] = r1 * s + m1 * c
        return
    f = 0
    for k in range(outer):
        base = f | cmask
        f = ((f | skip) + 1) & ~skip
        if kind == K_SWAP:
            p0 = a + 2 * (base | b1)
            p1 = a + 2 * (base | b2)
        else:
            p0 = a + 2 * base
            p1 = a + 2 * (base | b1)
        if kind == K_HADAMARD:
            for r in range(run):
                r0 = p0[2 * r]
                m0 = p0[2 * r + 1]
                r1 = p1[2 * r]
                m1 = p1[2 * r + 1]
                p0[2 * r] = (r0 + r1) * h
                p0[2 * r + 1] = (m0 + m1) * h
                p1[2 * r] = (r0 - r1) * h
                p1[2 * r + 1] = (m0 - m1) * h
        else:
            for r in range(run):
                r0 = p0[2 * r]
                m0 = p0[2 * r + 1]
                p0[2 * r] = p1[2 * r]
                p0[2 * r + 1] = p1[2 * r + 1]
                p1[2 * r] = r0
                p1[2 * r + 1] = m0


def apply_one(double[::1] amps, int n_qubits, int kind, int t1, int t2,
              long long cmask, double angle):
    with nogil:
        _apply(&amps[0], n_qubits, kind, t1, t2, cmask, angle)


def run_program(double[::1] amps, int n_qubits, const signed char[::1] kinds,
                const int[::1] t1, const int[::1] t2, const long long[::1] cmask,
                const double[::1] angles):
    cdef Py_ssize_t g, n_ops = kinds.shape[0]
    cdef double* a = &amps[0]
    with nogil:
        for g in range(n_ops):
            _apply(a, n_qubits, kinds[g], t1[g], t2[g], cmask[g], angles[g])
