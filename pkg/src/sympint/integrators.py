"""One-step maps for the area-preserving schemes plus the fixed-step drivers.

Every step function is a pure map PhaseState -> PhaseState. The implicit
schemes delegate their fixed-point stages to the solvers module; which
equation is implicit (position vs momentum) can be mirrored with swap_xy.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import reference
from .errors import ConfigError, KindError, SolverFailure
from .phase_space import (PhaseState, SystemDef, Trajectory, eval_energy,
                          is_scalar, is_separable)
from .solvers import SolverPolicy, solve_stage


class Scheme(Enum):
    EULER_A_31 = "euler-a-3.1"
    EULER_B_33 = "euler-b-3.3"
    SECOND_41 = "second-4.1"
    SECOND_43 = "second-4.3"
    IMPLICIT1_51 = "implicit-5.1"
    IMPLICIT2_61 = "second-6.1"
    NDOF1_73 = "ndof-7.3"
    NDOF2_74 = "ndof-7.4"
    LEAPFROG_75 = "leapfrog-7.5"
    BASELINE_EULER = "baseline-euler"
    BASELINE_RK4 = "baseline-rk4"


SCHEME_BY_NAME = {sch.value: sch for sch in Scheme}

# Default time-offset parameter per scheme (None: the scheme has no alpha).
ALPHA_DEFAULTS = {
    Scheme.EULER_A_31: 0.5,
    Scheme.EULER_B_33: 0.5,
    Scheme.SECOND_41: 1.0 / 3.0,
    Scheme.SECOND_43: None,
    Scheme.IMPLICIT1_51: 0.5,
    Scheme.IMPLICIT2_61: 0.0,
    Scheme.NDOF1_73: 0.5,
    Scheme.NDOF2_74: 0.0,
    Scheme.LEAPFROG_75: None,
    Scheme.BASELINE_EULER: None,
    Scheme.BASELINE_RK4: None,
}

FIRST_ORDER = {Scheme.EULER_A_31, Scheme.EULER_B_33, Scheme.IMPLICIT1_51,
               Scheme.NDOF1_73}
SECOND_ORDER = {Scheme.SECOND_41, Scheme.SECOND_43, Scheme.IMPLICIT2_61,
                Scheme.NDOF2_74, Scheme.LEAPFROG_75}
AREA_PRESERVING = FIRST_ORDER | SECOND_ORDER
BASELINES = {Scheme.BASELINE_EULER, Scheme.BASELINE_RK4}

ORDER_OF = {**{s: 1 for s in FIRST_ORDER}, **{s: 2 for s in SECOND_ORDER},
            Scheme.BASELINE_EULER: 1, Scheme.BASELINE_RK4: 4}

IMPLICIT_SCHEMES = {Scheme.IMPLICIT1_51, Scheme.IMPLICIT2_61,
                    Scheme.NDOF1_73, Scheme.NDOF2_74}


@dataclass(frozen=True)
class MethodSpec:
    """A scheme plus its tunables; alpha=None means the scheme's default."""

    scheme: Scheme
    alpha: Optional[float] = None
    solver: SolverPolicy = field(default_factory=SolverPolicy)
    swap_xy: bool = False

    def __post_init__(self):
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        a = ALPHA_DEFAULTS[self.scheme]
        return 0.0 if a is None else a


def parse_scheme(name: str) -> Scheme:
    try:
        return SCHEME_BY_NAME[name]
    except KeyError:
        raise ConfigError(
            f"unknown method '{name}'; available: "
            f"{', '.join(sorted(SCHEME_BY_NAME))}") from None


def _require_scalar(sys, who):
    if not is_scalar(sys):
        raise KindError(f"{who} requires a scalar_second_order system, "
                        f"got kind '{sys.kind.value}' for '{sys.name}'")


def _require_separable(sys, who):
    if not is_separable(sys) or sys.grad_U is None:
        raise KindError(f"{who} requires a separable system with a potential, "
                        f"got kind '{sys.kind.value}' for '{sys.name}'")


# --- scalar second-order pair (x'' = f(x, t)) --------------------------------

def step_euler_a(sys: SystemDef, s: PhaseState, h: float,
                 alpha: float = 0.5) -> PhaseState:
    """Shear pair: advance x with the old velocity, then kick with the force
    at the new position and offset time t0 + alpha*h. First order."""
    _require_scalar(sys, "euler-a-3.1")
    x, v, t = float(s.q[0]), float(s.p[0]), s.t
    x1 = x + h * v
    v1 = v + h * sys.scalar_force(x1, t + alpha * h)
    return PhaseState(np.array([x1]), np.array([v1]), t + h)


def step_euler_b(sys: SystemDef, s: PhaseState, h: float,
                 alpha: float = 0.5) -> PhaseState:
    """Mirror of euler-a: kick first with the force at the old position, then
    advance x with the just-computed velocity. First order."""
    _require_scalar(sys, "euler-b-3.3")
    x, v, t = float(s.q[0]), float(s.p[0]), s.t
    v1 = v + h * sys.scalar_force(x, t + alpha * h)
    x1 = x + h * v1
    return PhaseState(np.array([x1]), np.array([v1]), t + h)


def step_second_41(sys: SystemDef, s: PhaseState, h: float,
                   alpha: float = 1.0 / 3.0) -> PhaseState:
    """Half-kick at t0+alpha*h, full drift, half-kick at t0+(1-alpha)*h.
    Second order; two force evaluations."""
    _require_scalar(sys, "second-4.1")
    x, v, t = float(s.q[0]), float(s.p[0]), s.t
    v1 = v + 0.5 * h * sys.scalar_force(x, t + alpha * h)
    x2 = x + h * v1
    v2 = v1 + 0.5 * h * sys.scalar_force(x2, t + (1.0 - alpha) * h)
    return PhaseState(np.array([x2]), np.array([v2]), t + h)


def step_second_43(sys: SystemDef, s: PhaseState, h: float) -> PhaseState:
    """Half drift, midpoint kick, half drift; one force evaluation per step.
    The midpoint time t0 + h/2 is fixed (no alpha). Second order."""
    _require_scalar(sys, "second-4.3")
    x, v, t = float(s.q[0]), float(s.p[0]), s.t
    x1 = x + 0.5 * h * v
    v2 = v + h * sys.scalar_force(x1, t + 0.5 * h)
    x2 = x1 + 0.5 * h * v2
    return PhaseState(np.array([x2]), np.array([v2]), t + h)


# --- general first-order-form schemes ----------------------------------------

def _predictor(base, h, field_val):
    return base + h * field_val


def _implicit1_core(sys, s, h, alpha, solver, swap_xy, who):
    """Position-implicit first-order map (momentum-implicit when swapped)."""
    tau = s.t + alpha * h
    if not swap_xy:
        def qmap(q):
            return s.q + h * sys.f(q, s.p, tau)
        q0 = _predictor(s.q, h, sys.f(s.q, s.p, tau))
        out = solve_stage(qmap, q0, solver, stage=f"{who} position stage")
        q1 = out.solution
        p1 = s.p + h * sys.g(q1, s.p, tau)
    else:
        def pmap(p):
            return s.p + h * sys.g(s.q, p, tau)
        p0 = _predictor(s.p, h, sys.g(s.q, s.p, tau))
        out = solve_stage(pmap, p0, solver, stage=f"{who} momentum stage")
        p1 = out.solution
        q1 = s.q + h * sys.f(s.q, p1, tau)
    return PhaseState(q1, p1, s.t + h)


def _implicit2_core(sys, s, h, alpha, solver, swap_xy, who):
    """Two mirrored half-step contact maps; stages 1 and 3 are implicit."""
    t1 = s.t + alpha * h
    t2 = s.t + (1.0 - alpha) * h
    hh = 0.5 * h
    if not swap_xy:
        def qmap(q):
            return s.q + hh * sys.f(q, s.p, t1)
        q0 = _predictor(s.q, hh, sys.f(s.q, s.p, t1))
        x1 = solve_stage(qmap, q0, solver,
                         stage=f"{who} stage 1 (position half-step)").solution
        y1 = s.p + hh * sys.g(x1, s.p, t1)

        def pmap(p):
            return y1 + hh * sys.g(x1, p, t2)
        p0 = _predictor(y1, hh, sys.g(x1, y1, t2))
        y2 = solve_stage(pmap, p0, solver,
                         stage=f"{who} stage 3 (momentum half-step)").solution
        x2 = x1 + hh * sys.f(x1, y2, t2)
    else:
        def pmap(p):
            return s.p + hh * sys.g(s.q, p, t1)
        p0 = _predictor(s.p, hh, sys.g(s.q, s.p, t1))
        y1 = solve_stage(pmap, p0, solver,
                         stage=f"{who} stage 1 (momentum half-step)").solution
        x1 = s.q + hh * sys.f(s.q, y1, t1)

        def qmap(q):
            return x1 + hh * sys.f(q, y1, t2)
        q0 = _predictor(x1, hh, sys.f(x1, y1, t2))
        x2 = solve_stage(qmap, q0, solver,
                         stage=f"{who} stage 3 (position half-step)").solution
        y2 = y1 + hh * sys.g(x2, y1, t2)
    return PhaseState(x2, y2, s.t + h)


def step_implicit1_51(sys: SystemDef, s: PhaseState, h: float,
                      alpha: float = 0.5, solver: SolverPolicy = None,
                      swap_xy: bool = False) -> PhaseState:
    """First-order map with the position equation implicit (x1 = x0 +
    h*f(x1, y0, t0+alpha*h)). Works for any n; n > 1 is the componentwise
    generalization (identical to ndof-7.3)."""
    return _implicit1_core(sys, s, h, alpha, solver or SolverPolicy(),
                           swap_xy, "implicit-5.1")


def step_implicit2_61(sys: SystemDef, s: PhaseState, h: float,
                      alpha: float = 0.0, solver: SolverPolicy = None,
                      swap_xy: bool = False) -> PhaseState:
    """Second-order map built from two mirrored half-step maps; stages 1
    (position) and 3 (momentum) are implicit."""
    return _implicit2_core(sys, s, h, alpha, solver or SolverPolicy(),
                           swap_xy, "second-6.1")


def step_ndof1_73(sys: SystemDef, s: PhaseState, h: float,
                  alpha: float = 0.5, solver: SolverPolicy = None) -> PhaseState:
    """n-DOF first-order map: q implicit through dH/dp(q, p0), then the
    p update; the default time argument is the midpoint t0 + h/2."""
    return _implicit1_core(sys, s, h, alpha, solver or SolverPolicy(),
                           False, "ndof-7.3")


def step_ndof2_74(sys: SystemDef, s: PhaseState, h: float,
                  alpha: float = 0.0, solver: SolverPolicy = None) -> PhaseState:
    """n-DOF second-order map: two mirrored half-step contact maps with
    implicit q and P stages."""
    return _implicit2_core(sys, s, h, alpha, solver or SolverPolicy(),
                           False, "ndof-7.4")


def step_leapfrog_75(sys: SystemDef, s: PhaseState, h: float) -> PhaseState:
    """Half drift, midpoint kick -grad U(q_mid, t0 + h/2), half drift.
    Explicit, one gradient evaluation; separable systems only."""
    _require_separable(sys, "leapfrog-7.5")
    qm = s.q + 0.5 * h * s.p
    p1 = s.p - h * np.atleast_1d(sys.grad_U(qm, s.t + 0.5 * h))
    q1 = qm + 0.5 * h * p1
    return PhaseState(q1, p1, s.t + h)


# --- dispatch and drivers -----------------------------------------------------

def apply_step(sys: SystemDef, s: PhaseState, spec: MethodSpec,
               h: float) -> PhaseState:
    if s.dim != sys.dim:
        raise ConfigError(f"state dim {s.dim} != system dim {sys.dim}")
    a = spec.resolved_alpha
    sch = spec.scheme
    if sch is Scheme.EULER_A_31:
        return step_euler_a(sys, s, h, a)
    if sch is Scheme.EULER_B_33:
        return step_euler_b(sys, s, h, a)
    if sch is Scheme.SECOND_41:
        return step_second_41(sys, s, h, a)
    if sch is Scheme.SECOND_43:
        return step_second_43(sys, s, h)
    if sch is Scheme.IMPLICIT1_51:
        return step_implicit1_51(sys, s, h, a, spec.solver, spec.swap_xy)
    if sch is Scheme.IMPLICIT2_61:
        return step_implicit2_61(sys, s, h, a, spec.solver, spec.swap_xy)
    if sch is Scheme.NDOF1_73:
        return step_ndof1_73(sys, s, h, a, spec.solver)
    if sch is Scheme.NDOF2_74:
        return step_ndof2_74(sys, s, h, a, spec.solver)
    if sch is Scheme.LEAPFROG_75:
        return step_leapfrog_75(sys, s, h)
    if sch is Scheme.BASELINE_EULER:
        return reference.step_explicit_euler(sys, s, h)
    if sch is Scheme.BASELINE_RK4:
        return reference.step_rk4(sys, s, h)
    raise ConfigError(f"unhandled scheme {sch}")


def make_stepper(sys: SystemDef, spec: MethodSpec):
    """Bind (system, method) into the (state, h) -> state callable that the
    certification operations consume."""
    def stepper(s, h):
        return apply_step(sys, s, spec, h)
    return stepper


def integrate(sys: SystemDef, s0: PhaseState, spec: MethodSpec, h: float,
              n_steps: int) -> Trajectory:
    """Repeatedly apply the one-step map; states[k].t = t0 + k*h exactly."""
    if n_steps < 0:
        raise ConfigError("n_steps must be >= 0")
    if n_steps > 0 and (h == 0.0 or not math.isfinite(h)):
        raise ConfigError("h must be finite and nonzero when n_steps > 0")
    states = [s0]
    energies = [eval_energy(sys, s0)]
    s = s0
    for k in range(1, n_steps + 1):
        try:
            s = apply_step(sys, s, spec, h)
        except SolverFailure as err:
            err.step_index = k
            raise
        # pin the timestamp to the exact grid (no accumulation drift)
        s = PhaseState(s.q, s.p, s0.t + k * h)
        states.append(s)
        energies.append(eval_energy(sys, s))
    return Trajectory(tuple(states), np.array(energies), spec.scheme.value)


@dataclass(frozen=True)
class LongRun:
    """Array-backed long-run record (memory-light alternative to Trajectory)."""

    t: np.ndarray
    q: np.ndarray        # shape (m, n)
    p: np.ndarray
    energy: np.ndarray
    steps: np.ndarray    # indices of the recorded steps
    h: float
    n_steps: int
    backend: str

    @property
    def max_energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))


_BACKEND_SCHEME_IDS = {Scheme.LEAPFROG_75: 0, Scheme.BASELINE_EULER: 1,
                       Scheme.BASELINE_RK4: 2}


def run_long(sys: SystemDef, s0: PhaseState, spec: MethodSpec, h: float,
             n_steps: int, record_every: int = 1) -> LongRun:
    """Fixed-step long run recording every record_every-th step (plus the
    final one). Dispatches to the compiled kernels for registry 1-DOF
    potentials under leapfrog/baseline schemes; otherwise falls back to the
    generic one-step map."""
    from . import _backend

    if record_every < 1:
        raise ConfigError("record_every must be >= 1")
    sid = _BACKEND_SCHEME_IDS.get(spec.scheme)
    if sid is not None and sys.pot_id is not None and sys.dim == 1:
        t, q, p, e, steps = _backend.run_1d(
            sid, sys.pot_id, np.asarray(sys.params, dtype=float),
            float(s0.q[0]), float(s0.p[0]), s0.t, h, n_steps, record_every)
        return LongRun(t, q.reshape(-1, 1), p.reshape(-1, 1), e, steps,
                       h, n_steps, _backend.backend_name())

    ks = list(range(0, n_steps + 1, record_every))
    if ks[-1] != n_steps:
        ks.append(n_steps)
    want = set(ks)
    m = len(ks)
    t = np.empty(m)
    q = np.empty((m, sys.dim))
    p = np.empty((m, sys.dim))
    e = np.empty(m)
    s = s0
    j = 0
    for k in range(n_steps + 1):
        if k > 0:
            try:
                s = apply_step(sys, s, spec, h)
            except SolverFailure as err:
                err.step_index = k
                raise
            s = PhaseState(s.q, s.p, s0.t + k * h)
        if k in want:
            t[j] = s.t
            q[j] = s.q
            p[j] = s.p
            e[j] = eval_energy(sys, s)
            j += 1
    return LongRun(t, q, p, e, np.array(ks), h, n_steps, "generic")
