"""Post-hoc certification of convergence guarantees against a run trace.

Given a trace and a trusted reference value, these audits check, step by
step, the inequalities the solvers are supposed to satisfy: per-step gap
contraction at the universal rate 1 - mu/lip, the stronger rate
(kappa-1)/(kappa+1) on steps where the two spanning gradients were linearly
independent, the further angle-dependent improvement, gradient orthogonality
at plane minimizers, and the two-gradient descent bound they imply.

All rate audits are one-sided with relative slack ``RATE_SLACK`` (inexact 2-D
solves can violate exact-arithmetic bounds in the last bits), and ratios are
dropped once the gap falls below the cancellation floor, where a difference
of two nearly equal doubles carries no information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .objectives import Objective
from .solvers import (RunTrace, SolverConfig, SolverId, StepVectors,
                      gd_exact_step, me_step)

RATE_SLACK = 1e-8
GAP_FLOOR_REL = 1e-14


@dataclass
class RateCertificate:
    """Observed rate data for one ellipcenter run.

    ``eta = 1 - 1/kappa`` (universal), ``eta_star = (kappa-1)/(kappa+1)``
    (linearly independent steps), ``eta_bar[k] = eta_star - sin2_theta_k /
    (4 kappa^2)`` per step (None on dependent steps), and ``c_min`` the
    smallest observed sin^2 over independent steps.
    """

    kappa: float
    eta: float
    eta_star: float
    eta_bar: list[Optional[float]]
    c_min: Optional[float]


@dataclass
class AuditRow:
    name: str
    step: int
    value: float
    bound: float
    passed: bool

    @property
    def slack(self) -> float:
        return self.bound - self.value


@dataclass
class AuditReport:
    """Collection of per-step inequality checks."""

    rows: list[AuditRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def extend(self, other: "AuditReport") -> None:
        self.rows.extend(other.rows)

    def check(self, name: str, step: int, value: float, bound: float) -> None:
        self.rows.append(AuditRow(name, step, float(value), float(bound),
                                  value <= bound))

    def worst_slack(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for r in self.rows:
            if r.name not in out or r.slack < out[r.name]:
                out[r.name] = r.slack
        return out

    def failures(self) -> list[AuditRow]:
        return [r for r in self.rows if not r.passed]

    def to_text(self) -> str:
        lines = []
        worst = self.worst_slack()
        counts: dict[str, int] = {}
        fails: dict[str, int] = {}
        for r in self.rows:
            counts[r.name] = counts.get(r.name, 0) + 1
            if not r.passed:
                fails[r.name] = fails.get(r.name, 0) + 1
        for name in sorted(counts):
            status = "PASS" if fails.get(name, 0) == 0 else "FAIL"
            lines.append(f"{status}  {name:<28} checks={counts[name]:<6} "
                         f"failures={fails.get(name, 0):<4} "
                         f"worst_slack={worst[name]:.3e}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_csv_rows(self) -> list[dict]:
        return [{"name": r.name, "step": r.step,
                 "value": format(r.value, ".17g"),
                 "bound": format(r.bound, ".17g"),
                 "passed": "true" if r.passed else "false"} for r in self.rows]


def contraction_ratios(trace: RunTrace, f_star: float) -> list[Optional[float]]:
    """Per-step optimality-gap contraction ratios.

    ``ratio[k] = (f_{k+1} - f_star) / (f_k - f_star)``, with entries dropped
    (None) whenever either gap sits below the cancellation floor
    ``GAP_FLOOR_REL * |f_star| + 1e-300``.
    """
    values = [r.f_val for r in trace.records]
    floor = GAP_FLOOR_REL * abs(f_star) + 1e-300
    tol = 1e-9 * max(1.0, abs(f_star))
    for fv in values:
        if fv < f_star - tol:
            raise ValueError(
                f"f_star={f_star} exceeds a trace value {fv}; not a valid reference")
    gaps = [fv - f_star for fv in values]
    ratios: list[Optional[float]] = []
    for g0, g1 in zip(gaps[:-1], gaps[1:]):
        if g0 <= floor or g1 <= floor:
            ratios.append(None)
        else:
            ratios.append(g1 / g0)
    return ratios


def certify_rates(trace: RunTrace, f_star: float, mu: float, lip: float,
                  x_star: Optional[np.ndarray] = None):
    """Audit an ellipcenter trace against its linear-rate guarantees.

    Checks, with relative slack ``RATE_SLACK``:

    a. every step: ratio <= eta = 1 - mu/lip;
    b. independent steps: ratio <= eta_star = (kappa-1)/(kappa+1);
    c. independent steps: ratio <= eta_bar_k = eta_star - sin2_theta_k/(4 kappa^2);
    d. every iterate: gap_k <= eta^(k-2) * gap_1  (k >= 2);
    e. when ``x_star`` and stored iterates are available:
       ||x_k - x_star||^2 <= kappa * eta^(k-1) * ||x_1 - x_star||^2.

    Returns ``(RateCertificate, AuditReport)``.
    """
    if trace.solver_id is not SolverId.ME:
        raise ValueError("rate certification applies to ellipcenter traces only")
    kappa = lip / mu
    eta = 1.0 - 1.0 / kappa
    eta_star = (kappa - 1.0) / (kappa + 1.0)
    ratios = contraction_ratios(trace, f_star)
    report = AuditReport()
    eta_bar: list[Optional[float]] = []
    c_min: Optional[float] = None
    for i, rec in enumerate(trace.records[:-1]):
        li = bool(rec.li_flag)
        sin2 = rec.sin2_theta if rec.sin2_theta is not None else 0.0
        if li:
            eb = eta_star - sin2 / (4.0 * kappa * kappa)
            eta_bar.append(eb)
            c_min = sin2 if c_min is None else min(c_min, sin2)
        else:
            eta_bar.append(None)
        ratio = ratios[i]
        if ratio is None:
            continue
        step = rec.k
        report.check("rate_eta", step, ratio, eta * (1.0 + RATE_SLACK))
        if li:
            report.check("rate_eta_star", step, ratio,
                         eta_star * (1.0 + RATE_SLACK))
            report.check("rate_eta_bar", step, ratio,
                         eta_bar[i] * (1.0 + RATE_SLACK))
    # (d) global bound against the initial gap
    floor = GAP_FLOOR_REL * abs(f_star) + 1e-300
    gap1 = trace.records[0].f_val - f_star
    if gap1 > floor:
        for rec in trace.records[1:]:
            gap = rec.f_val - f_star
            if gap <= floor:
                continue
            bound = eta ** (rec.k - 2) * gap1 * (1.0 + RATE_SLACK)
            report.check("global_eta_bound", rec.k, gap, bound)
    # (e) iterate-distance bound
    if x_star is not None and trace.iterates:
        d1 = float(np.sum((trace.iterates[0] - x_star) ** 2))
        if d1 > 0.0:
            for k, xk in enumerate(trace.iterates, start=1):
                dk = float(np.sum((xk - x_star) ** 2))
                bound = kappa * eta ** (k - 1) * d1 * (1.0 + RATE_SLACK)
                report.check("iterate_distance_bound", k, dk, bound + 1e-300)
    cert = RateCertificate(kappa, eta, eta_star, eta_bar, c_min)
    return cert, report


def audit_orthogonality(step_data: list[StepVectors], inner_tol: float,
                        lip: float) -> AuditReport:
    """Check gradient orthogonality at plane minimizers (independent steps).

    Both inner products of the new gradient with the spanning gradients must
    be within ``eps_orth = 10 * inner_tol * max(||v||, ||w||)``; the
    Pythagorean expansion of ||g' - v||^2 must match to the accuracy those
    inner products allow; and ||g' - v|| must respect Lipschitz continuity
    over the step actually taken.
    """
    report = AuditReport()
    for sd in step_data:
        if not sd.li_flag:
            continue
        nv = float(np.linalg.norm(sd.v))
        nw = float(np.linalg.norm(sd.w))
        eps_orth = 10.0 * inner_tol * max(nv, nw)
        g = sd.grad_next
        report.check("orth_v", sd.k, abs(float(g @ sd.v)), eps_orth)
        report.check("orth_w", sd.k, abs(float(g @ sd.w)), eps_orth)
        lhs = float(np.sum((g - sd.v) ** 2))
        rhs = float(g @ g) + nv * nv
        pyth_tol = max(10.0 * eps_orth * nv, 3.0 * eps_orth)
        report.check("pythagoras", sd.k, abs(lhs - rhs), pyth_tol)
        dx2 = float(np.sum(sd.dx ** 2))
        report.check("lipschitz_displacement", sd.k, lhs,
                     lip * lip * dx2 * (1.0 + 1e-9))
    return report


def audit_bh_descent(trace: RunTrace, lip: float) -> AuditReport:
    """Two-gradient descent bound at independent steps.

    Orthogonality of the new gradient to the step direction yields
    f_k - f_{k+1} >= (||g_{k+1}||^2 + ||g_k||^2) / (2 lip); checked with
    absolute slack 1e-9 |f_k|.
    """
    report = AuditReport()
    for rec, nxt in zip(trace.records[:-1], trace.records[1:]):
        if not rec.li_flag:
            continue
        decrease = rec.f_val - nxt.f_val
        required = (nxt.grad_norm ** 2 + rec.grad_norm ** 2) / (2.0 * lip)
        slack = 1e-9 * abs(rec.f_val)
        # one-sided: required - decrease <= slack
        report.check("bh_descent", rec.k, required - decrease, slack)
    return report


def audit_level_sets(step_data: list[StepVectors], companion_tol: float) -> AuditReport:
    """Every companion point must sit on the iterate's level set to within
    the configured relative residual."""
    report = AuditReport()
    for sd in step_data:
        report.check("level_residual", sd.k, sd.level_residual, companion_tol)
    return report


def audit_dominance(f: Objective, x: np.ndarray,
                    cfg: SolverConfig | None = None):
    """One-step comparison: the plane minimizer cannot lose to the exact
    linesearch point, since the ray lies inside the plane.

    Returns ``(f_me, f_gd, passed)`` with the pass margin
    ``1e-12 * max(1, |f(x)|)``.
    """
    cfg = cfg or SolverConfig()
    x = np.asarray(x, dtype=float)
    x_me, _ = me_step(f, x, cfg)
    x_gd, _ = gd_exact_step(f, x)
    f_me = f.value(x_me)
    f_gd = f.value(x_gd)
    passed = f_me <= f_gd + 1e-12 * max(1.0, abs(f.value(x)))
    return f_me, f_gd, passed


def theoretical_iteration_bound(kappa: float, initial_gap: float,
                                target_gap: float) -> int:
    """Worst-case iteration count to contract the gap at rate
    (kappa-1)/(kappa+1): ceil(ln(initial/target) / ln(1/eta_star))."""
    if initial_gap <= 0.0 or target_gap <= 0.0:
        raise ValueError("gaps must be positive")
    if target_gap > initial_gap:
        raise ValueError("target gap exceeds the initial gap")
    eta_star = (kappa - 1.0) / (kappa + 1.0)
    if eta_star <= 0.0:
        return 0
    return int(math.ceil(math.log(initial_gap / target_gap)
                         / math.log(1.0 / eta_star)))
