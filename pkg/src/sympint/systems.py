"""Built-in test systems.

Each entry supplies analytic gradients and, for the 1-DOF systems, the
analytic field partials ("f_x", "g_xt", ...) consumed by the
error-coefficient machinery. Potentials that the compiled long-run kernels
know about carry a pot_id; the id/param layout must match _loops_py/_fastloops.
"""

import math

import numpy as np

from .errors import ConfigError
from .phase_space import SystemDef, SystemKind

# Kernel potential ids (keep in sync with _loops_py.py and _fastloops.pyx).
POT_FREE = 0
POT_OSCILLATOR = 1
POT_PENDULUM = 2
POT_QUARTIC = 3
POT_DRIVEN = 4

DRIVEN_EPS = 0.3
DRIVEN_OMEGA = 2.0
COUPLING = 0.35  # bilinear coupling of the two-oscillator system


def _zero(x, y, t):
    return 0.0


def _separable_1d(name, U, gradU, g_derivs, pot_id, params=()):
    """1-DOF separable system H = p^2/2 + U(q, t), i.e. x'' = -dU/dq."""

    def hamiltonian(q, p, t):
        return 0.5 * float(p[0]) ** 2 + U(float(q[0]), t)

    def dH_dq(q, p, t):
        return np.array([gradU(float(q[0]), t)])

    def dH_dp(q, p, t):
        return np.array([float(p[0])])

    # Fields of the first-order form: f = p (trivial), g = -dU/dq.
    derivs = {"f_y": lambda x, y, t: 1.0}
    for key in ("f_x", "f_t", "f_xx", "f_xy", "f_xt", "f_yy", "f_yt", "f_tt",
                "g_y", "g_xy", "g_yy", "g_yt"):
        derivs[key] = _zero
    derivs.update(g_derivs)
    for key in ("g_x", "g_t", "g_xx", "g_xt", "g_tt"):
        derivs.setdefault(key, _zero)

    return SystemDef(
        name=name, dim=1, hamiltonian=hamiltonian,
        dH_dq=dH_dq, dH_dp=dH_dp,
        kind=SystemKind.SCALAR_SECOND_ORDER,
        potential=lambda q, t: U(float(q[0]), t),
        grad_U=lambda q, t: np.array([gradU(float(q[0]), t)]),
        derivs=derivs, pot_id=pot_id, params=tuple(params))


def _oscillator():
    return _separable_1d(
        "oscillator",
        U=lambda x, t: 0.5 * x * x,
        gradU=lambda x, t: x,
        g_derivs={"g_x": lambda x, y, t: -1.0},
        pot_id=POT_OSCILLATOR)


def _free_particle():
    return _separable_1d(
        "free-particle",
        U=lambda x, t: 0.0,
        gradU=lambda x, t: 0.0,
        g_derivs={},
        pot_id=POT_FREE)


def _pendulum():
    return _separable_1d(
        "pendulum",
        U=lambda x, t: -math.cos(x),
        gradU=lambda x, t: math.sin(x),
        g_derivs={
            "g_x": lambda x, y, t: -math.cos(x),
            "g_xx": lambda x, y, t: math.sin(x),
        },
        pot_id=POT_PENDULUM)


def _quartic():
    return _separable_1d(
        "quartic",
        U=lambda x, t: 0.25 * x ** 4,
        gradU=lambda x, t: x ** 3,
        g_derivs={
            "g_x": lambda x, y, t: -3.0 * x * x,
            "g_xx": lambda x, y, t: -6.0 * x,
        },
        pot_id=POT_QUARTIC)


def _driven_oscillator():
    eps, om = DRIVEN_EPS, DRIVEN_OMEGA
    return _separable_1d(
        "driven-oscillator",
        U=lambda x, t: 0.5 * x * x - eps * x * math.sin(om * t),
        gradU=lambda x, t: x - eps * math.sin(om * t),
        g_derivs={
            "g_x": lambda x, y, t: -1.0,
            "g_t": lambda x, y, t: eps * om * math.cos(om * t),
            "g_tt": lambda x, y, t: -eps * om * om * math.sin(om * t),
        },
        pot_id=POT_DRIVEN, params=(eps, om))


def _sine_kinetic():
    """H = p^2 sin(q) / 2: the velocity field f = p sin(q) depends on q,
    which keeps the position equation genuinely implicit."""

    def hamiltonian(q, p, t):
        return 0.5 * float(p[0]) ** 2 * math.sin(float(q[0]))

    def dH_dq(q, p, t):
        return np.array([0.5 * float(p[0]) ** 2 * math.cos(float(q[0]))])

    def dH_dp(q, p, t):
        return np.array([float(p[0]) * math.sin(float(q[0]))])

    derivs = {
        "f_x": lambda x, y, t: y * math.cos(x),
        "f_y": lambda x, y, t: math.sin(x),
        "f_xx": lambda x, y, t: -y * math.sin(x),
        "f_xy": lambda x, y, t: math.cos(x),
        "g_x": lambda x, y, t: 0.5 * y * y * math.sin(x),
        "g_y": lambda x, y, t: -y * math.cos(x),
        "g_xx": lambda x, y, t: 0.5 * y * y * math.cos(x),
        "g_xy": lambda x, y, t: y * math.sin(x),
        "g_yy": lambda x, y, t: -math.cos(x),
    }
    for key in ("f_t", "f_xt", "f_yt", "f_tt", "g_t", "g_xt", "g_yt", "g_tt"):
        derivs[key] = _zero

    return SystemDef(name="sine-kinetic", dim=1, hamiltonian=hamiltonian,
                     dH_dq=dH_dq, dH_dp=dH_dp, kind=SystemKind.GENERAL,
                     derivs=derivs)


def _ramp_kinetic():
    """H = q p^2 / 2: f = q p is linear in q, so the fixed-point map of the
    implicit position equation is affine with slope exactly h*p0 — the
    contraction ratio is tunable and divergence above 1 is guaranteed."""

    def hamiltonian(q, p, t):
        return 0.5 * float(q[0]) * float(p[0]) ** 2

    def dH_dq(q, p, t):
        return np.array([0.5 * float(p[0]) ** 2])

    def dH_dp(q, p, t):
        return np.array([float(q[0]) * float(p[0])])

    derivs = {
        "f_x": lambda x, y, t: y,
        "f_y": lambda x, y, t: x,
        "f_xy": lambda x, y, t: 1.0,
        "g_y": lambda x, y, t: -y,
        "g_yy": lambda x, y, t: -1.0,
    }
    for key in ("f_t", "f_xx", "f_xt", "f_yy", "f_yt", "f_tt",
                "g_x", "g_t", "g_xx", "g_xy", "g_xt", "g_tt"):
        derivs[key] = _zero

    return SystemDef(name="ramp-kinetic", dim=1, hamiltonian=hamiltonian,
                     dH_dq=dH_dq, dH_dp=dH_dp, kind=SystemKind.GENERAL,
                     derivs=derivs)


def _henon_heiles():
    """Coupled 2-DOF cubic potential U = (q1^2 + q2^2)/2 + q1^2 q2 - q2^3/3."""

    def U(q, t):
        q1, q2 = float(q[0]), float(q[1])
        return 0.5 * (q1 * q1 + q2 * q2) + q1 * q1 * q2 - q2 ** 3 / 3.0

    def gradU(q, t):
        q1, q2 = float(q[0]), float(q[1])
        return np.array([q1 + 2.0 * q1 * q2, q2 + q1 * q1 - q2 * q2])

    def hamiltonian(q, p, t):
        return 0.5 * float(np.dot(p, p)) + U(q, t)

    return SystemDef(name="henon-heiles", dim=2, hamiltonian=hamiltonian,
                     dH_dq=lambda q, p, t: gradU(q, t),
                     dH_dp=lambda q, p, t: np.asarray(p, dtype=float).copy(),
                     kind=SystemKind.SEPARABLE, potential=U, grad_U=gradU)


def _coupled_oscillators():
    """Two unit oscillators with bilinear coupling k*q1*q2."""
    k = COUPLING

    def U(q, t):
        q1, q2 = float(q[0]), float(q[1])
        return 0.5 * (q1 * q1 + q2 * q2) + k * q1 * q2

    def gradU(q, t):
        q1, q2 = float(q[0]), float(q[1])
        return np.array([q1 + k * q2, q2 + k * q1])

    def hamiltonian(q, p, t):
        return 0.5 * float(np.dot(p, p)) + U(q, t)

    return SystemDef(name="coupled-oscillators", dim=2, hamiltonian=hamiltonian,
                     dH_dq=lambda q, p, t: gradU(q, t),
                     dH_dp=lambda q, p, t: np.asarray(p, dtype=float).copy(),
                     kind=SystemKind.SEPARABLE, potential=U, grad_U=gradU)


_BUILDERS = {
    "oscillator": _oscillator,
    "free-particle": _free_particle,
    "pendulum": _pendulum,
    "quartic": _quartic,
    "driven-oscillator": _driven_oscillator,
    "sine-kinetic": _sine_kinetic,
    "ramp-kinetic": _ramp_kinetic,
    "henon-heiles": _henon_heiles,
    "coupled-oscillators": _coupled_oscillators,
}


def list_systems():
    return sorted(_BUILDERS)


def get_system(name: str) -> SystemDef:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown system '{name}'; available: {', '.join(list_systems())}"
        ) from None
