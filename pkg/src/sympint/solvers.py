"""Solvers for the implicit sub-steps: plain fixed-point iteration, a
Steffensen-style Aitken acceleration, and Newton with a finite-difference
Jacobian, plus the contraction-bound diagnostic |h| * ||df/dq||."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, SolverFailure
from .phase_space import DEFAULT_REL_STEP, PhaseState, SystemDef


class SolverMethod(Enum):
    FIXED_POINT = "fixed"
    AITKEN = "aitken"
    NEWTON = "newton"


@dataclass(frozen=True)
class SolverPolicy:
    method: SolverMethod = SolverMethod.NEWTON
    tol: float = 1e-12          # absolute inf-norm residual tolerance
    max_iter: int = 50
    jacobian_step: float = DEFAULT_REL_STEP

    def __post_init__(self):
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if self.jacobian_step <= 0:
            raise ConfigError("jacobian_step must be positive")


@dataclass
class SolveOutcome:
    solution: np.ndarray
    iterations: int            # map/residual evaluations beyond the accepted point
    final_residual: float
    contraction_estimate: float


def _contraction_estimate(residuals, tol):
    """Geometric-mean ratio of successive residuals, ignoring pairs already
    down at the roundoff/tolerance floor where the ratio is meaningless."""
    floor = max(100.0 * tol, 1e-14)
    ratios = [residuals[i + 1] / residuals[i]
              for i in range(len(residuals) - 1)
              if residuals[i] > floor and residuals[i + 1] > 0.0]
    if not ratios:
        return 0.0
    return float(math.exp(sum(math.log(r) for r in ratios) / len(ratios)))


def solve_fixed_point(map_fn, x0, policy: SolverPolicy) -> SolveOutcome:
    """Iterate x <- m(x) until ||m(x) - x||_inf <= tol.

    Raises SolverFailure(DIVERGENCE) when the residual grows past 10x its
    running minimum, and MAX_ITER_EXCEEDED after max_iter map evaluations.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    residuals = []
    best = math.inf
    r = math.inf
    for k in range(policy.max_iter):
        mx = np.atleast_1d(np.asarray(map_fn(x), dtype=float))
        r = float(np.max(np.abs(mx - x)))
        residuals.append(r)
        if r <= policy.tol:
            return SolveOutcome(x, k, r, _contraction_estimate(residuals, policy.tol))
        if r > 10.0 * best:
            raise SolverFailure("DIVERGENCE", k + 1, r, residuals)
        best = min(best, r)
        x = mx
    raise SolverFailure("MAX_ITER_EXCEEDED", policy.max_iter, r, residuals)


def solve_aitken(map_fn, x0, policy: SolverPolicy) -> SolveOutcome:
    """Fixed-point iteration with a componentwise Aitken delta-squared
    extrapolation every third iterate (Steffensen cycle)."""
    cur = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    residuals = []
    best = math.inf
    r = math.inf
    evals = 0
    cycle = []
    while evals < policy.max_iter:
        nxt = np.atleast_1d(np.asarray(map_fn(cur), dtype=float))
        evals += 1
        r = float(np.max(np.abs(nxt - cur)))
        residuals.append(r)
        if r <= policy.tol:
            return SolveOutcome(cur, evals - 1, r,
                                _contraction_estimate(residuals, policy.tol))
        if r > 10.0 * best:
            raise SolverFailure("DIVERGENCE", evals, r, residuals)
        best = min(best, r)
        cycle.append((cur, nxt))
        if len(cycle) == 2:
            # two plain iterates from base xa: xa -> xb -> xc
            (xa, xb), (_, xc) = cycle
            cycle = []
            den = xc - 2.0 * xb + xa
            num = (xb - xa) ** 2
            scale = np.abs(xc) + np.abs(xb) + np.abs(xa) + 1.0
            safe = np.abs(den) > 1e-14 * scale
            cur = np.where(safe,
                           xa - np.divide(num, den, out=np.zeros_like(den),
                                          where=safe),
                           xc)
        else:
            cur = nxt
    raise SolverFailure("MAX_ITER_EXCEEDED", evals, r, residuals)


def _fd_jacobian(residual_fn, x, step):
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        d = step * max(1.0, abs(x[j]))
        hi = x.copy()
        lo = x.copy()
        hi[j] += d
        lo[j] -= d
        J[:, j] = (np.atleast_1d(residual_fn(hi)) -
                   np.atleast_1d(residual_fn(lo))) / (2.0 * d)
    return J


def solve_newton(residual_fn, x0, policy: SolverPolicy) -> SolveOutcome:
    """Newton iteration on r(x) = 0 with a central-difference Jacobian."""
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    residuals = []
    rn = math.inf
    for k in range(policy.max_iter):
        r = np.atleast_1d(np.asarray(residual_fn(x), dtype=float))
        rn = float(np.max(np.abs(r)))
        residuals.append(rn)
        if rn <= policy.tol:
            return SolveOutcome(x, k, rn,
                                _contraction_estimate(residuals, policy.tol))
        J = _fd_jacobian(residual_fn, x, policy.jacobian_step)
        try:
            dx = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            raise SolverFailure("SINGULAR_JACOBIAN", k + 1, rn, residuals) from None
        if not np.all(np.isfinite(dx)):
            raise SolverFailure("SINGULAR_JACOBIAN", k + 1, rn, residuals)
        x = x - dx
    raise SolverFailure("MAX_ITER_EXCEEDED", policy.max_iter, rn, residuals)


def solve_stage(map_fn, x0, policy: SolverPolicy, stage=None) -> SolveOutcome:
    """Dispatch on policy.method for a fixed-point stage x = m(x).

    Newton gets the residual r(x) = x - m(x). SolverFailure is re-raised with
    the stage label attached so two-stage schemes can identify the culprit.
    """
    try:
        if policy.method is SolverMethod.NEWTON:
            return solve_newton(lambda x: x - np.atleast_1d(map_fn(x)), x0, policy)
        if policy.method is SolverMethod.AITKEN:
            return solve_aitken(map_fn, x0, policy)
        return solve_fixed_point(map_fn, x0, policy)
    except SolverFailure as err:
        err.stage = stage
        raise


def contraction_bound(sys: SystemDef, s: PhaseState, h: float,
                      alpha: float = 0.5) -> float:
    """|h| * ||df/dq||_inf at (q0, p0, t0 + alpha*h), the simple-iteration
    convergence bound for the implicit position equation; < 1 means the plain
    fixed-point iteration contracts near the base state."""
    if h == 0.0:
        return 0.0
    tau = s.t + alpha * h
    if sys.dim == 1 and "f_x" in sys.derivs:
        dfdq = np.array([[sys.derivs["f_x"](float(s.q[0]), float(s.p[0]), tau)]])
    else:
        n = sys.dim
        dfdq = np.empty((n, n))
        for j in range(n):
            d = DEFAULT_REL_STEP * max(1.0, abs(s.q[j]))
            hi = s.q.copy()
            lo = s.q.copy()
            hi[j] += d
            lo[j] -= d
            dfdq[:, j] = (sys.f(hi, s.p, tau) - sys.f(lo, s.p, tau)) / (2.0 * d)
    if not np.all(np.isfinite(dfdq)):
        raise SolverFailure("SINGULAR_JACOBIAN", 0, math.inf,
                            stage="contraction-bound derivative")
    return float(abs(h) * np.max(np.sum(np.abs(dfdq), axis=1)))
