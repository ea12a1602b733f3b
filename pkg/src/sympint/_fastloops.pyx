# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled long-run kernels; must mirror _loops_py.py exactly.

Scheme ids: 0 leapfrog, 1 explicit Euler, 2 RK4. Potential ids follow
systems.py (0 free, 1 oscillator, 2 pendulum, 3 quartic, 4 driven).
"""

from libc.math cimport cos, sin

import numpy as np


cdef inline double _grad_u(int pot, double[:] params, double q, double t) nogil:
    if pot == 0:
        return 0.0
    if pot == 1:
        return q
    if pot == 2:
        return sin(q)
    if pot == 3:
        return q * q * q
    return q - params[0] * sin(params[1] * t)   # pot == 4


cdef inline double _pot_u(int pot, double[:] params, double q, double t) nogil:
    if pot == 0:
        return 0.0
    if pot == 1:
        return 0.5 * q * q
    if pot == 2:
        return -cos(q)
    if pot == 3:
        return 0.25 * q * q * q * q
    return 0.5 * q * q - params[0] * q * sin(params[1] * t)   # pot == 4


def run_1d(int scheme, int pot, double[:] params, double q0, double p0,
           double t0, double h, long n_steps, long record_every):
    """Fixed-step run of a 1-DOF separable system; records step 0, every
    record_every-th step, and the final step. Returns (t, q, p, E, steps)."""
    if pot < 0 or pot > 4:
        raise ValueError(f"unknown potential id {pot}")
    if scheme < 0 or scheme > 2:
        raise ValueError(f"unknown scheme id {scheme}")

    cdef long n_rec = n_steps // record_every + 1
    if n_steps % record_every != 0:
        n_rec += 1
    t_out = np.empty(n_rec)
    q_out = np.empty(n_rec)
    p_out = np.empty(n_rec)
    e_out = np.empty(n_rec)
    k_out = np.empty(n_rec, dtype=np.int64)
    cdef double[:] tv = t_out
    cdef double[:] qv = q_out
    cdef double[:] pv = p_out
    cdef double[:] ev = e_out
    cdef long[:] kv = k_out

    cdef double q = q0
    cdef double p = p0
    cdef double tk, tnow, qm, qn
    cdef double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p
    cdef long k, j

    tv[0] = t0
    qv[0] = q
    pv[0] = p
    ev[0] = 0.5 * p * p + _pot_u(pot, params, q, t0)
    kv[0] = 0

    j = 1
    for k in range(1, n_steps + 1):
        tk = t0 + (k - 1) * h
        if scheme == 0:  # leapfrog: half drift, midpoint kick, half drift
            qm = q + 0.5 * h * p
            p = p - h * _grad_u(pot, params, qm, tk + 0.5 * h)
            q = qm + 0.5 * h * p
        elif scheme == 1:  # explicit Euler, both updates at the old state
            qn = q + h * p
            p = p - h * _grad_u(pot, params, q, tk)
            q = qn
        else:  # classical RK4
            k1q = p
            k1p = -_grad_u(pot, params, q, tk)
            k2q = p + 0.5 * h * k1p
            k2p = -_grad_u(pot, params, q + 0.5 * h * k1q, tk + 0.5 * h)
            k3q = p + 0.5 * h * k2p
            k3p = -_grad_u(pot, params, q + 0.5 * h * k2q, tk + 0.5 * h)
            k4q = p + h * k3p
            k4p = -_grad_u(pot, params, q + h * k3q, tk + h)
            q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
            p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        if k % record_every == 0 or k == n_steps:
            tnow = t0 + k * h
            tv[j] = tnow
            qv[j] = q
            pv[j] = p
            ev[j] = 0.5 * p * p + _pot_u(pot, params, q, tnow)
            kv[j] = k
            j += 1
    return t_out, q_out, p_out, e_out, k_out
