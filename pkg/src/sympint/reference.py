"""Non-symplectic baseline steppers and reference solutions.

The baselines exist purely as contrast for the certification engine; the
exact solutions (and a tiny-step RK4 fallback) provide the truth that order
fits and error-constant extrapolations are measured against.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .phase_space import PhaseState, SystemDef
from .systems import DRIVEN_EPS, DRIVEN_OMEGA


def step_explicit_euler(sys: SystemDef, s: PhaseState, h: float) -> PhaseState:
    """q += h*dH/dp, p -= h*dH/dq, both evaluated at the old state."""
    q1 = s.q + h * sys.f(s.q, s.p, s.t)
    p1 = s.p + h * sys.g(s.q, s.p, s.t)
    return PhaseState(q1, p1, s.t + h)


def step_rk4(sys: SystemDef, s: PhaseState, h: float) -> PhaseState:
    """Classical four-stage Runge-Kutta on the first-order system."""
    q, p, t = s.q, s.p, s.t

    def rhs(q, p, t):
        return sys.f(q, p, t), sys.g(q, p, t)

    k1q, k1p = rhs(q, p, t)
    k2q, k2p = rhs(q + 0.5 * h * k1q, p + 0.5 * h * k1p, t + 0.5 * h)
    k3q, k3p = rhs(q + 0.5 * h * k2q, p + 0.5 * h * k2p, t + 0.5 * h)
    k4q, k4p = rhs(q + h * k3q, p + h * k3p, t + h)
    q1 = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    p1 = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return PhaseState(q1, p1, t + h)


# --- exact solutions ---------------------------------------------------------

def exact_oscillator(s0: PhaseState, t: float) -> PhaseState:
    """H = (p^2 + q^2)/2: rotation of (q, p) by angle t - t0."""
    dt = t - s0.t
    c, sn = math.cos(dt), math.sin(dt)
    return PhaseState(s0.q * c + s0.p * sn, -s0.q * sn + s0.p * c, t)


def exact_free_particle(s0: PhaseState, t: float) -> PhaseState:
    return PhaseState(s0.q + (t - s0.t) * s0.p, s0.p, t)


def exact_driven_oscillator(s0: PhaseState, t: float) -> PhaseState:
    """x'' = -x + eps*sin(om*t), om != 1: homogeneous rotation plus the
    particular solution eps*sin(om*t)/(1 - om^2)."""
    eps, om = DRIVEN_EPS, DRIVEN_OMEGA
    c0 = eps / (1.0 - om * om)
    xp0, vp0 = c0 * math.sin(om * s0.t), c0 * om * math.cos(om * s0.t)
    a = float(s0.q[0]) - xp0
    b = float(s0.p[0]) - vp0
    dt = t - s0.t
    c, sn = math.cos(dt), math.sin(dt)
    x = a * c + b * sn + c0 * math.sin(om * t)
    v = -a * sn + b * c + c0 * om * math.cos(om * t)
    return PhaseState(np.array([x]), np.array([v]), t)


@dataclass(frozen=True)
class ExactSolution:
    name: str
    fn: Callable
    domain: str


EXACT_SOLUTIONS = {
    "oscillator": ExactSolution("oscillator", exact_oscillator, "all t"),
    "free-particle": ExactSolution("free-particle", exact_free_particle, "all t"),
    "driven-oscillator": ExactSolution("driven-oscillator",
                                       exact_driven_oscillator, "all t"),
}


_REF_CACHE = {}


def reference_solution(sys: SystemDef, s0: PhaseState, t: float,
                       h_ref: float = 1e-4) -> PhaseState:
    """True solution at time t: exact closed form when the registry has one,
    otherwise a tiny-step RK4 run (cached per (system, state, t, h_ref))."""
    exact = EXACT_SOLUTIONS.get(sys.name)
    if exact is not None:
        return exact.fn(s0, t)
    if t == s0.t:
        return s0
    key = (sys.name, s0.q.tobytes(), s0.p.tobytes(), s0.t, t, h_ref)
    hit = _REF_CACHE.get(key)
    if hit is not None:
        return hit
    span = t - s0.t
    n = max(1, int(math.ceil(abs(span) / h_ref)))
    h = span / n
    s = s0
    for _ in range(n):
        s = step_rk4(sys, s, h)
    s = PhaseState(s.q, s.p, t)
    _REF_CACHE[key] = s
    return s


def make_reference(sys: SystemDef, h_ref: float = 1e-4):
    """Bind reference_solution to a system: returns callable (s0, t) -> state."""
    def ref(s0, t):
        return reference_solution(sys, s0, t, h_ref)
    return ref
