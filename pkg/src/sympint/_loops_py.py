"""Pure-Python fallback for the long-run kernels.

Must mirror _fastloops.pyx operation for operation (same formulas, same
evaluation order) so that both backends agree to the last bit or two.
Scheme ids: 0 leapfrog, 1 explicit Euler, 2 RK4. Potential ids follow
systems.py (0 free, 1 oscillator, 2 pendulum, 3 quartic, 4 driven).
"""

import math

import numpy as np


def _grad_u(pot, params, q, t):
    if pot == 0:
        return 0.0
    if pot == 1:
        return q
    if pot == 2:
        return math.sin(q)
    if pot == 3:
        return q * q * q
    if pot == 4:
        return q - params[0] * math.sin(params[1] * t)
    raise ValueError(f"unknown potential id {pot}")


def _pot_u(pot, params, q, t):
    if pot == 0:
        return 0.0
    if pot == 1:
        return 0.5 * q * q
    if pot == 2:
        return -math.cos(q)
    if pot == 3:
        return 0.25 * q * q * q * q
    if pot == 4:
        return 0.5 * q * q - params[0] * q * math.sin(params[1] * t)
    raise ValueError(f"unknown potential id {pot}")


def run_1d(scheme, pot, params, q0, p0, t0, h, n_steps, record_every):
    """Fixed-step run of a 1-DOF separable system; records step 0, every
    record_every-th step, and the final step. Returns (t, q, p, E, steps)."""
    n_rec = n_steps // record_every + 1
    if n_steps % record_every != 0:
        n_rec += 1
    t_out = np.empty(n_rec)
    q_out = np.empty(n_rec)
    p_out = np.empty(n_rec)
    e_out = np.empty(n_rec)
    k_out = np.empty(n_rec, dtype=np.int64)

    q = float(q0)
    p = float(p0)
    t_out[0] = t0
    q_out[0] = q
    p_out[0] = p
    e_out[0] = 0.5 * p * p + _pot_u(pot, params, q, t0)
    k_out[0] = 0

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
        elif scheme == 2:  # classical RK4
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
        else:
            raise ValueError(f"unknown scheme id {scheme}")
        if k % record_every == 0 or k == n_steps:
            tnow = t0 + k * h
            t_out[j] = tnow
            q_out[j] = q
            p_out[j] = p
            e_out[j] = 0.5 * p * p + _pot_u(pot, params, q, tnow)
            k_out[j] = k
            j += 1
    return t_out, q_out, p_out, e_out, k_out
