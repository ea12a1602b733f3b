"""Phase-space state and system-definition primitives.

Everything downstream (steppers, implicit solvers, certification) works in
terms of the two small containers defined here: an immutable (q, p, t)
snapshot and a Hamiltonian description supplying H and its first partial
derivatives, with a central-difference fallback when the analytic gradients
are not given.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError

# Optimal absolute step for central first differences under roundoff.
DEFAULT_REL_STEP = float(np.cbrt(np.finfo(float).eps))  # ~6.06e-6


class SystemKind(Enum):
    GENERAL = "general"
    SEPARABLE = "separable"
    SCALAR_SECOND_ORDER = "scalar_second_order"


@dataclass(frozen=True)
class PhaseState:
    """Immutable snapshot (q, p, t); q and p are read-only float vectors."""

    q: np.ndarray
    p: np.ndarray
    t: float

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float)).copy()
        p = np.atleast_1d(np.asarray(self.p, dtype=float)).copy()
        if q.ndim != 1 or p.ndim != 1 or q.shape != p.shape:
            raise ConfigError(
                f"dimension mismatch: len(q)={q.size} vs len(p)={p.size}")
        if not (np.isfinite(q).all() and np.isfinite(p).all()
                and math.isfinite(float(self.t))):
            raise ConfigError("non-finite component in phase state")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    def as_vector(self) -> np.ndarray:
        """Concatenated (q, p) copy, the layout used by Jacobian probes."""
        return np.concatenate([self.q, self.p])


def make_state(q, p, t=0.0) -> PhaseState:
    """Validating constructor; accepts scalars, lists or arrays."""
    return PhaseState(np.atleast_1d(q), np.atleast_1d(p), t)


@dataclass(frozen=True)
class SystemDef:
    """A Hamiltonian system H(q, p, t) and whatever derivatives it can offer.

    Parameters
    ----------
    name : str
        Registry name (informational for custom systems).
    dim : int
        Number of degrees of freedom n.
    hamiltonian : callable (q, p, t) -> float
    dH_dq, dH_dp : callable (q, p, t) -> vector, optional
        Analytic gradients. Missing ones fall back to central differences of
        H; `uses_fd_gradients` records that a fallback is active.
    kind : SystemKind
        scalar_second_order implies dim == 1 and dH_dp == p (the classic
        second-order form x'' = f(x, t)); separable implies
        H = 1/2 sum(p^2) + U(q, t).
    potential, grad_U : callable (q, t) -> float / vector, optional
        Needed by separable-only steppers.
    derivs : dict of str -> callable (x, y, t) -> float
        Analytic first/second partials of the fields f = dH/dp, g = -dH/dq
        for 1-DOF systems ("f_x", "g_xt", ...). Consumed by the
        error-coefficient machinery; absent entries fall back to finite
        differences there.
    pot_id, params : int / tuple, optional
        Kernel id and parameter block for the compiled long-run loops.
    """

    name: str
    dim: int
    hamiltonian: Callable
    dH_dq: Optional[Callable] = None
    dH_dp: Optional[Callable] = None
    kind: SystemKind = SystemKind.GENERAL
    potential: Optional[Callable] = None
    grad_U: Optional[Callable] = None
    derivs: dict = field(default_factory=dict)
    pot_id: Optional[int] = None
    params: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError("system dimension must be >= 1")
        if self.kind is SystemKind.SCALAR_SECOND_ORDER and self.dim != 1:
            raise ConfigError("scalar_second_order systems must have dim == 1")

    # -- derivative access with finite-difference fallback ------------------

    @property
    def uses_fd_gradients(self) -> bool:
        return self.dH_dq is None or self.dH_dp is None

    def dHdq(self, q, p, t):
        if self.dH_dq is not None:
            return np.atleast_1d(np.asarray(self.dH_dq(q, p, t), dtype=float))
        return _fd_gradient(self.hamiltonian, q, p, t, wrt="q")

    def dHdp(self, q, p, t):
        if self.dH_dp is not None:
            return np.atleast_1d(np.asarray(self.dH_dp(q, p, t), dtype=float))
        return _fd_gradient(self.hamiltonian, q, p, t, wrt="p")

    def f(self, q, p, t):
        """Velocity field dq/dt = dH/dp."""
        return self.dHdp(q, p, t)

    def g(self, q, p, t):
        """Force field dp/dt = -dH/dq."""
        return -self.dHdq(q, p, t)

    def scalar_force(self, x: float, t: float) -> float:
        """f(x, t) of the second-order form x'' = f(x, t); scalar kind only."""
        if self.grad_U is not None:
            return -float(np.atleast_1d(self.grad_U(np.array([x]), t))[0])
        q = np.array([x])
        return float(self.g(q, _ZERO1, t)[0])


_ZERO1 = np.zeros(1)


def is_separable(sys: SystemDef) -> bool:
    return sys.kind in (SystemKind.SEPARABLE, SystemKind.SCALAR_SECOND_ORDER)


def is_scalar(sys: SystemDef) -> bool:
    return sys.kind is SystemKind.SCALAR_SECOND_ORDER


def eval_energy(sys: SystemDef, s: PhaseState) -> float:
    """H(q, p, t) at the state."""
    if s.dim != sys.dim:
        raise ConfigError(
            f"dimension mismatch: state has dim {s.dim}, system {sys.dim}")
    return float(sys.hamiltonian(s.q, s.p, s.t))


def _fd_gradient(h_fn, q, p, t, wrt, rel_step=DEFAULT_REL_STEP):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    base = q if wrt == "q" else p
    out = np.empty_like(base)
    for i in range(base.size):
        d = rel_step * max(1.0, abs(base[i]))
        hi = base.copy()
        lo = base.copy()
        hi[i] += d
        lo[i] -= d
        if wrt == "q":
            fp, fm = h_fn(hi, p, t), h_fn(lo, p, t)
        else:
            fp, fm = h_fn(q, hi, t), h_fn(q, lo, t)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ConfigError("non-finite H evaluation inside difference stencil")
        out[i] = (fp - fm) / (2.0 * d)
    return out


def numeric_gradients(sys: SystemDef, s: PhaseState, rel_step=DEFAULT_REL_STEP):
    """Central-difference (dH/dq, dH/dp) at the state.

    The absolute step per component is rel_step * max(1, |component|);
    accuracy is O(rel_step^2). Serves both as the fallback used by SystemDef
    and as an independent check of analytic gradients.
    """
    if rel_step <= 0:
        raise ConfigError("rel_step must be positive")
    dq = _fd_gradient(sys.hamiltonian, s.q, s.p, s.t, "q", rel_step)
    dp = _fd_gradient(sys.hamiltonian, s.q, s.p, s.t, "p", rel_step)
    return dq, dp


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step integration output: states with aligned energies."""

    states: tuple
    energies: np.ndarray
    method: object  # MethodSpec; kept untyped to avoid a circular import

    def __post_init__(self):
        ts = np.array([s.t for s in self.states])
        if len(ts) > 1 and not np.all(np.diff(ts) > 0):
            raise ConfigError("trajectory times must be strictly increasing")
        object.__setattr__(self, "states", tuple(self.states))
        e = np.asarray(self.energies, dtype=float)
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, k):
        return self.states[k]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])
