"""Outer solvers: ellipcenter iteration, two gradient-descent baselines, and
Nesterov's strongly convex accelerated gradient, all under one trace format.

Gradient accounting uses two counters.  ``grad_evals_outer`` counts only the
gradients the method itself is defined by: two per ellipcenter iteration (one
at the iterate, one at the companion point), one per step for the baselines.
``grad_evals_total`` counts every actual gradient call, including line-search
probes, inner 2-D solver iterations, and the per-iterate stopping check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .companion import companion_point
from .errors import DegeneratePlaneError, InnerStallError, NumericalFailureError
from .objectives import CountingObjective, Objective
from .plane2d import (make_plane, segment_minimizer, solve_gd_armijo,
                      solve_newton_quadratic)


class SolverId(str, enum.Enum):
    ME = "me"
    GD_L = "gd_l"
    GD_EXACT = "gd_exact"
    FAST_GD = "fast_gd"


class RunStatus(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    INNER_STALL = "inner_stall"
    NUMERIC_FAILURE = "numeric_failure"


@dataclass
class SolverConfig:
    """Tolerances and iteration caps shared by all solvers.

    ``eps`` is the outer stopping threshold on the gradient norm;
    ``companion_tol`` the relative level residual for the companion search;
    ``inner_tol`` the 2-D solver gradient tolerance (scaled by the larger of
    the two spanning gradient norms); ``ld_threshold`` the sin^2 cutoff below
    which the two gradients are treated as parallel.
    """

    eps: float = 1e-6
    max_outer: int = 100000
    companion_tol: float = 1e-12
    inner_tol: float = 1e-12
    max_inner: int = 10000
    ld_threshold: float = 1e-12

    def __post_init__(self):
        for name in ("eps", "companion_tol", "inner_tol", "ld_threshold"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be positive")


@dataclass
class IterateRecord:
    """Telemetry for one iterate.

    ``t_k``, ``sin2_theta`` and ``li_flag`` describe the step taken *from*
    this iterate and stay ``None`` on the final record and for non-ellipcenter
    solvers.  ``ratio`` is the optimality-gap contraction of that step,
    filled post-hoc once a reference value is available.  Counters are
    cumulative over the run.
    """

    k: int
    f_val: float
    grad_norm: float
    t_k: Optional[float] = None
    sin2_theta: Optional[float] = None
    li_flag: Optional[bool] = None
    ratio: Optional[float] = None
    grad_evals_outer: int = 0
    grad_evals_total: int = 0
    value_evals_total: int = 0


@dataclass
class StepVectors:
    """Raw per-step vectors kept alongside an ellipcenter trace so that the
    orthogonality, Lipschitz-displacement and level-set audits can run
    without re-executing the solver."""

    k: int
    v: np.ndarray
    w: np.ndarray
    grad_next: np.ndarray
    dx: np.ndarray
    t: float
    li_flag: bool
    sin2_theta: float
    level_residual: float


@dataclass
class RunTrace:
    """Full record of one solver run."""

    solver_id: SolverId
    records: list[IterateRecord]
    status: RunStatus
    x_final: np.ndarray
    config: SolverConfig
    iterates: list[np.ndarray] = field(default_factory=list)
    step_data: list[StepVectors] = field(default_factory=list)
    non_monotone_ok: bool = False

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    @property
    def converged(self) -> bool:
        return self.status is RunStatus.CONVERGED


@dataclass
class _StepInfo:
    t: float
    sin2_theta: float
    li_flag: bool
    level_residual: float
    w: np.ndarray


def _me_advance(cf, x, v, f_x, cfg: SolverConfig):
    """One ellipcenter step from (x, v = grad f(x)): companion point, then
    the plane minimizer (Newton for quadratics, Armijo descent otherwise),
    falling back to the segment minimizer when the gradients are parallel."""
    comp = companion_point(cf, x, v, tol=cfg.companion_tol, f_x=f_x)
    w = cf.grad(comp.y)
    sp = make_plane(cf, x, v, w)
    li = sp.sin2_theta >= cfg.ld_threshold
    x_next = None
    if li:
        try:
            if cf.quadratic_view is not None:
                sol = solve_newton_quadratic(cf.quadratic_view, sp)
            else:
                sol = solve_gd_armijo(cf, sp, inner_tol=cfg.inner_tol,
                                      max_inner=cfg.max_inner, f_base=f_x)
            x_next = sol.x_next
        except DegeneratePlaneError:
            li = False
    if not li:
        x_next = segment_minimizer(cf, x, comp.y)
    return x_next, _StepInfo(comp.t, sp.sin2_theta, li, comp.level_residual, w)


def me_step(f: Objective, x: np.ndarray, cfg: SolverConfig | None = None):
    """Execute a single ellipcenter step from ``x``.

    Returns ``(x_next, record)`` where the record carries the step scalars
    (t_k, sin^2 of the gradient angle, linear-independence flag) plus the
    evaluations this one step consumed, and describes the *new* iterate.
    """
    cfg = cfg or SolverConfig()
    cf = CountingObjective(f)
    x = np.asarray(x, dtype=float)
    v = cf.grad(x)
    if float(np.linalg.norm(v)) == 0.0:
        raise ValueError("gradient is zero; nothing to do")
    f_x = cf.value(x)
    x_next, info = _me_advance(cf, x, v, f_x, cfg)
    g_next = cf.grad(x_next)
    rec = IterateRecord(k=1, f_val=cf.value(x_next),
                        grad_norm=float(np.linalg.norm(g_next)),
                        t_k=info.t, sin2_theta=info.sin2_theta,
                        li_flag=info.li_flag, grad_evals_outer=2,
                        grad_evals_total=cf.grad_evals,
                        value_evals_total=cf.value_evals)
    return x_next, rec


def run_me(f: Objective, x1: np.ndarray, cfg: SolverConfig | None = None) -> RunTrace:
    """Run the ellipcenter method until ||grad f|| <= eps or max_outer."""
    cfg = cfg or SolverConfig()
    cf = CountingObjective(f)
    x = np.asarray(x1, dtype=float).copy()
    fx = cf.value(x)
    v = cf.grad(x)
    grad_norm = float(np.linalg.norm(v))
    outer = 0
    records = [IterateRecord(k=1, f_val=fx, grad_norm=grad_norm,
                             grad_evals_total=cf.grad_evals,
                             value_evals_total=cf.value_evals)]
    iterates = [x.copy()]
    step_data: list[StepVectors] = []
    steps = 0
    while True:
        if grad_norm <= cfg.eps:
            status = RunStatus.CONVERGED
            break
        if steps >= cfg.max_outer:
            status = RunStatus.MAX_ITERATIONS
            break
        try:
            x_next, info = _me_advance(cf, x, v, fx, cfg)
        except InnerStallError:
            status = RunStatus.INNER_STALL
            break
        except NumericalFailureError:
            status = RunStatus.NUMERIC_FAILURE
            break
        steps += 1
        outer += 2
        f_next = cf.value(x_next)
        v_next = cf.grad(x_next)
        records[-1].t_k = info.t
        records[-1].sin2_theta = info.sin2_theta
        records[-1].li_flag = info.li_flag
        step_data.append(StepVectors(
            k=steps, v=v, w=info.w, grad_next=v_next, dx=x_next - x,
            t=info.t, li_flag=info.li_flag, sin2_theta=info.sin2_theta,
            level_residual=info.level_residual))
        grad_norm = float(np.linalg.norm(v_next))
        records.append(IterateRecord(
            k=steps + 1, f_val=f_next, grad_norm=grad_norm,
            grad_evals_outer=outer, grad_evals_total=cf.grad_evals,
            value_evals_total=cf.value_evals))
        x, fx, v = x_next, f_next, v_next
        iterates.append(x.copy())
    return RunTrace(SolverId.ME, records, status, x, replace(cfg),
                    iterates=iterates, step_data=step_data)


def gd_fixed_step(f: Objective, x: np.ndarray) -> np.ndarray:
    """One gradient step with the conservative 1/lip step size."""
    x = np.asarray(x, dtype=float)
    return x - f.grad(x) / f.lip


def run_gd_l(f: Objective, x1: np.ndarray, cfg: SolverConfig | None = None) -> RunTrace:
    """Gradient descent with fixed step 1/lip."""
    cfg = cfg or SolverConfig()
    cf = CountingObjective(f)
    x = np.asarray(x1, dtype=float).copy()
    fx = cf.value(x)
    v = cf.grad(x)
    grad_norm = float(np.linalg.norm(v))
    records = [IterateRecord(k=1, f_val=fx, grad_norm=grad_norm,
                             grad_evals_total=cf.grad_evals,
                             value_evals_total=cf.value_evals)]
    iterates = [x.copy()]
    steps = 0
    while True:
        if grad_norm <= cfg.eps:
            status = RunStatus.CONVERGED
            break
        if steps >= cfg.max_outer:
            status = RunStatus.MAX_ITERATIONS
            break
        x = x - v / cf.lip
        steps += 1
        fx = cf.value(x)
        v = cf.grad(x)
        grad_norm = float(np.linalg.norm(v))
        records.append(IterateRecord(
            k=steps + 1, f_val=fx, grad_norm=grad_norm,
            grad_evals_outer=steps, grad_evals_total=cf.grad_evals,
            value_evals_total=cf.value_evals))
        iterates.append(x.copy())
    return RunTrace(SolverId.GD_L, records, status, x, replace(cfg),
                    iterates=iterates)


def _exact_linesearch(cf, x, v, tol_factor: float = 1e-12):
    """Root of phi(t) = <grad f(x - t v), v> by doubling plus bisection.

    Targets |phi| <= tol_factor * ||v||^2; when rounding noise in the
    gradient keeps phi above that, stops once the bracket collapses to
    machine width and returns the smallest-|phi| probe.  Returns
    ``(t_star, grad_at_accepted_point)`` so the caller can reuse the last
    gradient.  Closed form (one fresh gradient) for quadratics.
    """
    vv = float(v @ v)
    quad = cf.quadratic_view
    if quad is not None:
        t_star = vv / float(v @ (quad.a_matrix @ v))
        return t_star, cf.grad(x - t_star * v)
    tol = tol_factor * vv
    t = 1.0 / cf.lip
    t_prev = 0.0
    g = None
    for _ in range(200):
        g = cf.grad(x - t * v)
        phi = float(g @ v)
        if abs(phi) <= tol:
            return t, g
        if phi < 0.0:
            break
        t_prev = t
        t *= 2.0
    else:
        raise NumericalFailureError("directional derivative never changed sign")
    lo, hi = t_prev, t
    best = (abs(phi), t, g)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = cf.grad(x - mid * v)
        phi = float(g @ v)
        if abs(phi) < best[0]:
            best = (abs(phi), mid, g)
        if abs(phi) <= tol:
            return mid, g
        if phi > 0.0:
            lo = mid
        else:
            hi = mid
        if (hi - lo) <= 1e-15 * hi:
            # root localized to machine precision; |phi| is gradient noise
            return best[1], best[2]
    raise NumericalFailureError("exact linesearch bisection did not converge")


def gd_exact_step(f: Objective, x: np.ndarray):
    """One exact-linesearch gradient step; returns ``(x_next, t_star)``.

    The step length zeroes the directional derivative along the ray, so the
    new gradient is orthogonal to the old one.
    """
    cf = CountingObjective(f)
    x = np.asarray(x, dtype=float)
    v = cf.grad(x)
    if float(np.linalg.norm(v)) == 0.0:
        raise ValueError("gradient is zero; nothing to do")
    t_star, _ = _exact_linesearch(cf, x, v)
    return x - t_star * v, t_star


def run_gd_exact(f: Objective, x1: np.ndarray, cfg: SolverConfig | None = None) -> RunTrace:
    """Gradient descent with an exact linesearch along the negative gradient."""
    cfg = cfg or SolverConfig()
    cf = CountingObjective(f)
    x = np.asarray(x1, dtype=float).copy()
    fx = cf.value(x)
    v = cf.grad(x)
    grad_norm = float(np.linalg.norm(v))
    records = [IterateRecord(k=1, f_val=fx, grad_norm=grad_norm,
                             grad_evals_total=cf.grad_evals,
                             value_evals_total=cf.value_evals)]
    iterates = [x.copy()]
    steps = 0
    outer = 0
    while True:
        if grad_norm <= cfg.eps:
            status = RunStatus.CONVERGED
            break
        if steps >= cfg.max_outer:
            status = RunStatus.MAX_ITERATIONS
            break
        try:
            t_star, g_next = _exact_linesearch(cf, x, v)
        except NumericalFailureError:
            status = RunStatus.NUMERIC_FAILURE
            break
        x = x - t_star * v
        steps += 1
        outer += 1
        fx = cf.value(x)
        v = g_next
        grad_norm = float(np.linalg.norm(v))
        records.append(IterateRecord(
            k=steps + 1, f_val=fx, grad_norm=grad_norm,
            grad_evals_outer=outer, grad_evals_total=cf.grad_evals,
            value_evals_total=cf.value_evals))
        iterates.append(x.copy())
    return RunTrace(SolverId.GD_EXACT, records, status, x, replace(cfg),
                    iterates=iterates)


def run_fast_gd(f: Objective, x1: np.ndarray, cfg: SolverConfig | None = None) -> RunTrace:
    """Nesterov's accelerated gradient, strongly convex constant-momentum form.

    z1 = x1;  x_{k+1} = z_k - (1/lip) grad f(z_k);
    z_{k+1} = x_{k+1} + ((sqrt(kappa)-1)/(sqrt(kappa)+1)) (x_{k+1} - x_k).

    Stops on the gradient norm at the x-iterates.  The objective values along
    the trace may be non-monotone (momentum overshoot), which the returned
    trace flags via ``non_monotone_ok``.
    """
    cfg = cfg or SolverConfig()
    cf = CountingObjective(f)
    x = np.asarray(x1, dtype=float).copy()
    fx = cf.value(x)
    v = cf.grad(x)
    grad_norm = float(np.linalg.norm(v))
    sqrt_kappa = np.sqrt(cf.lip / cf.mu)
    momentum = (sqrt_kappa - 1.0) / (sqrt_kappa + 1.0)
    z = x.copy()
    records = [IterateRecord(k=1, f_val=fx, grad_norm=grad_norm,
                             grad_evals_total=cf.grad_evals,
                             value_evals_total=cf.value_evals)]
    iterates = [x.copy()]
    steps = 0
    outer = 0
    while True:
        if grad_norm <= cfg.eps:
            status = RunStatus.CONVERGED
            break
        if steps >= cfg.max_outer:
            status = RunStatus.MAX_ITERATIONS
            break
        gz = v if steps == 0 else cf.grad(z)  # z1 = x1, so reuse the first gradient
        outer += 1
        x_next = z - gz / cf.lip
        z = x_next + momentum * (x_next - x)
        x = x_next
        steps += 1
        fx = cf.value(x)
        v = cf.grad(x)
        grad_norm = float(np.linalg.norm(v))
        records.append(IterateRecord(
            k=steps + 1, f_val=fx, grad_norm=grad_norm,
            grad_evals_outer=outer, grad_evals_total=cf.grad_evals,
            value_evals_total=cf.value_evals))
        iterates.append(x.copy())
    return RunTrace(SolverId.FAST_GD, records, status, x, replace(cfg),
                    iterates=iterates, non_monotone_ok=True)


RUNNERS = {
    SolverId.ME: run_me,
    SolverId.GD_L: run_gd_l,
    SolverId.GD_EXACT: run_gd_exact,
    SolverId.FAST_GD: run_fast_gd,
}
