"""Experiment orchestration: instance generation, reference optima, solver
runs, trace/series/summary emission, and the end-to-end audit used by the
``verify`` command.

All experiments start from the origin.  Trace CSVs are deterministic given
``(problem, n, m, kappa, seed, config)``; only the wall-time column of the
summary varies between reruns.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .diagnostics import (AuditReport, audit_bh_descent, audit_dominance,
                          audit_level_sets, audit_orthogonality,
                          certify_rates, contraction_ratios)
from .objectives import Objective, generate_logreg, generate_quadratic
from .solvers import (RUNNERS, IterateRecord, RunTrace, SolverConfig,
                      SolverId, run_me, run_fast_gd)

TRACE_COLUMNS = ["k", "f", "gap", "grad_norm", "t_k", "sin2_theta", "li_flag",
                 "ratio", "grad_evals_outer", "grad_evals_total",
                 "value_evals_total"]

SUMMARY_COLUMNS = ["solver", "n", "kappa", "status", "iterations",
                   "grad_evals_outer", "grad_evals_total", "value_evals_total",
                   "terminal_gap", "terminal_grad_norm", "wall_time_s"]


@dataclass
class ExperimentSpec:
    """One experiment: a seeded instance plus the solvers to run on it.

    ``m`` defaults to n//2 for logistic instances and is ignored for
    quadratics.  ``output_dir=None`` keeps everything in memory.
    """

    problem: str
    n: int
    kappa: float
    seed: int
    m: Optional[int] = None
    solvers: list[SolverId] = field(default_factory=lambda: list(SolverId))
    config: SolverConfig = field(default_factory=SolverConfig)
    output_dir: Optional[Path] = None

    def __post_init__(self):
        if self.problem not in ("quadratic", "logreg"):
            raise ValueError(f"unknown problem family {self.problem!r}")
        if self.kappa <= 1.0:
            raise ValueError(f"kappa must exceed 1, got {self.kappa}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.m is None and self.problem == "logreg":
            self.m = max(1, self.n // 2)
        self.solvers = [SolverId(s) for s in self.solvers]
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)


@dataclass
class ReferenceSolution:
    """Trusted optimum used by every audit.

    ``residual`` is the gradient norm at ``x_star``.  For quadratics the
    minimizer comes from a direct linear solve; otherwise from an accelerated
    run to near the double-precision gradient floor plus an ellipcenter
    polish, keeping the best value observed.  A gradient-norm target of 1e-15
    is below what double precision can resolve on ill-conditioned instances,
    hence the 1e-13 target and the quality flag.
    """

    f_star: float
    x_star: Optional[np.ndarray]
    method: str
    residual: float

    @property
    def quality_warning(self) -> bool:
        return self.residual > 1e-10


def build_problem(spec: ExperimentSpec):
    """Instantiate the seeded problem; returns ``(objective, problem)``."""
    if spec.problem == "quadratic":
        prob = generate_quadratic(spec.n, spec.kappa, spec.seed)
    else:
        prob = generate_logreg(spec.n, spec.m, spec.kappa, spec.seed)
    return prob.objective(), prob


def compute_reference(f: Objective) -> ReferenceSolution:
    """Reference optimum: linear solve for quadratics, high-accuracy run
    (accelerated gradient to eps=1e-13, then 100 polish steps) otherwise."""
    if f.quadratic_view is not None:
        x_star = f.quadratic_view.minimizer()
        residual = float(np.linalg.norm(f.grad(x_star)))
        return ReferenceSolution(f.value(x_star), x_star, "linear_solve", residual)
    cfg = SolverConfig(eps=1e-13, max_outer=500000)
    fast = run_fast_gd(f, np.zeros(f.dim), cfg)
    polish_cfg = SolverConfig(eps=1e-300, max_outer=100)
    polish = run_me(f, fast.x_final, polish_cfg)
    best_f = fast.records[-1].f_val
    best_x = fast.x_final
    best_res = fast.records[-1].grad_norm
    for rec, x in zip(polish.records, polish.iterates):
        if rec.f_val < best_f:
            best_f, best_x, best_res = rec.f_val, x, rec.grad_norm
    return ReferenceSolution(best_f, best_x, "high_accuracy_run", best_res)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    reference: ReferenceSolution
    traces: dict[str, RunTrace]
    summary: list[dict]
    written: list[Path] = field(default_factory=list)

    def summary_text(self) -> str:
        return format_summary_table(self.summary)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Generate the instance, compute the reference, run every requested
    solver from the origin, and (with an output directory) write one trace
    CSV, one gap series CSV per solver, and the summary table pair.

    Individual solver failures are recorded in their summary row; the rest
    of the experiment continues.
    """
    f, _ = build_problem(spec)
    reference = compute_reference(f)
    x1 = np.zeros(spec.n)
    traces: dict[str, RunTrace] = {}
    summary: list[dict] = []
    written: list[Path] = []
    out = spec.output_dir
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for sid in spec.solvers:
        start = time.perf_counter()
        trace = RUNNERS[sid](f, x1, spec.config)
        wall = time.perf_counter() - start
        fill_ratios(trace, reference.f_star)
        traces[sid.value] = trace
        last = trace.records[-1]
        summary.append({
            "solver": sid.value,
            "n": spec.n,
            "kappa": spec.kappa,
            "status": trace.status.value,
            "iterations": trace.iterations,
            "grad_evals_outer": last.grad_evals_outer,
            "grad_evals_total": last.grad_evals_total,
            "value_evals_total": last.value_evals_total,
            "terminal_gap": last.f_val - reference.f_star,
            "terminal_grad_norm": last.grad_norm,
            "wall_time_s": wall,
        })
        if out is not None:
            trace_path = out / f"trace_{sid.value}.csv"
            write_trace_csv(trace, reference.f_star, trace_path)
            series_path = out / f"series_{sid.value}.csv"
            write_series_csv(trace, reference.f_star, series_path)
            written.extend([trace_path, series_path])
    if out is not None:
        summary_csv = out / "summary.csv"
        write_summary_csv(summary, summary_csv)
        summary_txt = out / "summary.txt"
        summary_txt.write_text(format_summary_table(summary) + "\n")
        written.extend([summary_csv, summary_txt])
    return ExperimentResult(spec, reference, traces, summary, written)


def fill_ratios(trace: RunTrace, f_star: float) -> None:
    """Attach post-hoc per-step gap contraction ratios to the records."""
    ratios = contraction_ratios(trace, f_star)
    for rec, ratio in zip(trace.records[:-1], ratios):
        rec.ratio = ratio


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_trace_csv(trace: RunTrace, f_star: float, path) -> None:
    """One row per iterate; floats carry 17 significant digits so the file
    round-trips bit-exactly.  Step fields stay empty for non-ellipcenter
    solvers and on each final row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for rec in trace.records:
            writer.writerow([
                rec.k, _fmt(rec.f_val), _fmt(rec.f_val - f_star),
                _fmt(rec.grad_norm), _fmt(rec.t_k), _fmt(rec.sin2_theta),
                _fmt(rec.li_flag), _fmt(rec.ratio),
                rec.grad_evals_outer, rec.grad_evals_total,
                rec.value_evals_total,
            ])


def read_trace_csv(path):
    """Parse a trace CSV back into records; returns ``(records, gaps)``."""
    records: list[IterateRecord] = []
    gaps: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            records.append(IterateRecord(
                k=int(row["k"]),
                f_val=float(row["f"]),
                grad_norm=float(row["grad_norm"]),
                t_k=float(row["t_k"]) if row["t_k"] else None,
                sin2_theta=float(row["sin2_theta"]) if row["sin2_theta"] else None,
                li_flag=(row["li_flag"] == "true") if row["li_flag"] else None,
                ratio=float(row["ratio"]) if row["ratio"] else None,
                grad_evals_outer=int(row["grad_evals_outer"]),
                grad_evals_total=int(row["grad_evals_total"]),
                value_evals_total=int(row["value_evals_total"]),
            ))
            gaps.append(float(row["gap"]))
    return records, gaps


def write_series_csv(trace: RunTrace, f_star: float, path) -> None:
    """Gap versus cumulative gradient evaluations, for plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grad_evals_outer", "grad_evals_total", "gap"])
        for rec in trace.records:
            writer.writerow([rec.grad_evals_outer, rec.grad_evals_total,
                             _fmt(rec.f_val - f_star)])


def write_summary_csv(summary: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for row in summary:
            out = dict(row)
            out["terminal_gap"] = _fmt(row["terminal_gap"])
            out["terminal_grad_norm"] = _fmt(row["terminal_grad_norm"])
            out["wall_time_s"] = format(row["wall_time_s"], ".6f")
            out["kappa"] = _fmt(row["kappa"])
            writer.writerow(out)


def format_summary_table(summary: list[dict]) -> str:
    """Aligned plain-text twin of the summary CSV."""
    headers = ["solver", "n", "kappa", "status", "iters", "grads(outer)",
               "grads(total)", "values", "terminal gap", "time(s)"]
    rows = []
    for s in summary:
        rows.append([
            s["solver"], str(s["n"]), f"{s['kappa']:g}", s["status"],
            str(s["iterations"]), str(s["grad_evals_outer"]),
            str(s["grad_evals_total"]), str(s["value_evals_total"]),
            f"{s['terminal_gap']:.3e}", f"{s['wall_time_s']:.3f}",
        ])
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    buf = io.StringIO()
    buf.write("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip() + "\n")
    buf.write("  ".join("-" * w for w in widths) + "\n")
    for r in rows:
        buf.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")
    return buf.getvalue().rstrip("\n")


def verify_experiment(spec: ExperimentSpec):
    """Run a fresh experiment and the full audit suite over it.

    Audits the ellipcenter trace (rates, orthogonality, two-gradient descent,
    companion level residuals) and the one-step dominance comparison at the
    start point and a few seeded points.  Returns
    ``(ExperimentResult, AuditReport)``.
    """
    spec = replace(spec, solvers=[SolverId.ME])
    result = run_experiment(spec)
    f, _ = build_problem(spec)
    trace = result.traces[SolverId.ME.value]
    ref = result.reference
    report = AuditReport()
    _, rate_report = certify_rates(trace, ref.f_star, f.mu, f.lip,
                                   x_star=ref.x_star)
    report.extend(rate_report)
    report.extend(audit_orthogonality(trace.step_data, spec.config.inner_tol,
                                      f.lip))
    report.extend(audit_bh_descent(trace, f.lip))
    report.extend(audit_level_sets(trace.step_data, spec.config.companion_tol))
    rng = np.random.Generator(np.random.PCG64(spec.seed + 1))
    points = [np.zeros(spec.n)] + [0.5 * rng.standard_normal(spec.n)
                                   for _ in range(3)]
    for i, x in enumerate(points):
        if float(np.linalg.norm(f.grad(x))) <= spec.config.eps:
            continue
        f_me, f_gd, _ = audit_dominance(f, x, spec.config)
        margin = 1e-12 * max(1.0, abs(f.value(x)))
        report.check("dominance", i, f_me, f_gd + margin)
    return result, report
