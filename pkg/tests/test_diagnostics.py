import math

import numpy as np
import pytest

from ellipcenters import (QuadraticProblem, audit_dominance,
                          audit_orthogonality, certify_rates, compute_reference,
                          contraction_ratios, generate_logreg,
                          generate_quadratic, run_gd_l, run_me,
                          theoretical_iteration_bound)
from ellipcenters.harness import fill_ratios


class TestContractionRatios:
    def test_fixed_step_on_diag_quadratic(self, diag_quadratic):
        """Hand iteration of x <- x - A x / 4 from (1, 1):
        first step lands on (3/4, 0) so the gap ratio is (9/32)/2.5 = 0.1125;
        afterwards x1 scales by 3/4 each step, so the ratio is exactly 9/16.
        All stay below eta = 3/4."""
        f = diag_quadratic.objective()
        trace = run_gd_l(f, np.array([1.0, 1.0]))
        ratios = contraction_ratios(trace, 0.0)
        assert ratios[0] == pytest.approx(0.1125, rel=1e-12)
        for r in ratios[1:8]:
            assert r == pytest.approx(9.0 / 16.0, rel=1e-9)
        assert all(r <= 0.75 + 1e-12 for r in ratios if r is not None)

    def test_two_dim_quadratic_single_ratio_near_zero(self):
        q = generate_quadratic(2, 10.0, 1)
        f = q.objective()
        trace = run_me(f, np.zeros(2))
        f_star = f.value(q.minimizer())
        ratios = [r for r in contraction_ratios(trace, f_star) if r is not None]
        assert len(ratios) <= 2
        assert all(abs(r) < 1e-9 for r in ratios)

    def test_constant_trace_is_empty(self, small_quadratic):
        trace = run_me(small_quadratic.objective(), small_quadratic.minimizer())
        assert contraction_ratios(trace, small_quadratic.value(
            small_quadratic.minimizer())) == []

    def test_invalid_reference_rejected(self, small_logreg):
        trace = run_me(small_logreg.objective(), np.zeros(50))
        with pytest.raises(ValueError):
            contraction_ratios(trace, trace.records[-1].f_val + 1.0)


class TestCertifyRates:
    def test_rate_constants(self):
        q = generate_quadratic(5, 100.0, 0)
        f = q.objective()
        trace = run_me(f, np.zeros(5))
        f_star = f.value(q.minimizer())
        cert, _ = certify_rates(trace, f_star, f.mu, f.lip)
        assert cert.eta == pytest.approx(0.99)
        assert cert.eta_star == pytest.approx(99.0 / 101.0)
        bars = [b for b in cert.eta_bar if b is not None]
        assert bars and all(b == pytest.approx(
            cert.eta_star - s / 4e4, abs=1e-15)
            for b, s in zip(bars, [r.sin2_theta for r in trace.records
                                   if r.li_flag]))

    def test_eta_bar_formula_values(self):
        # kappa=100 with sin^2 = 1 gives 99/101 - 1/40000
        assert (99.0 / 101.0 - 1.0 / 40000.0) == pytest.approx(0.9801730198019801)
        # kappa=2 with sin^2 = 1: the sandwich (1/3)^2 < 13/48 < 1/3
        eta_star = 1.0 / 3.0
        eta_bar = eta_star - 1.0 / 16.0
        assert eta_bar == pytest.approx(13.0 / 48.0)
        assert eta_star ** 2 < eta_bar < eta_star

    def test_logistic_run_passes_all_audits(self):
        p = generate_logreg(60, 30, 100.0, 9)
        f = p.objective()
        trace = run_me(f, np.zeros(60))
        ref = compute_reference(f)
        cert, report = certify_rates(trace, ref.f_star, f.mu, f.lip,
                                     x_star=ref.x_star)
        assert trace.converged
        assert report.passed, report.to_text()
        assert cert.c_min is not None and cert.c_min > 0.0

    def test_sandwich_on_li_steps(self):
        for seed in (0, 1):
            q = generate_quadratic(20, 50.0, seed)
            f = q.objective()
            trace = run_me(f, np.zeros(20))
            cert, _ = certify_rates(trace, f.value(q.minimizer()), f.mu, f.lip)
            for bar in cert.eta_bar:
                if bar is None:
                    continue
                assert cert.eta_star ** 2 < bar < cert.eta_star

    def test_rejects_non_me_trace(self, small_logreg):
        f = small_logreg.objective()
        trace = run_gd_l(f, np.zeros(50))
        with pytest.raises(ValueError):
            certify_rates(trace, 0.0, f.mu, f.lip)


class TestOrthogonalityAudit:
    def test_quadratic_newton_steps(self, small_quadratic):
        f = small_quadratic.objective()
        trace = run_me(f, np.zeros(10))
        report = audit_orthogonality(trace.step_data, 1e-12, f.lip)
        assert report.passed, report.to_text()
        # while the gradient is large the residual of the exact 2x2 solve is
        # visible in the fresh gradient too; below that, rounding dominates
        for sd in trace.step_data:
            if sd.li_flag and np.linalg.norm(sd.v) >= 1e-3:
                assert abs(sd.grad_next @ sd.v) <= 1e-10 * (sd.v @ sd.v)

    def test_ld_steps_are_skipped(self):
        f = QuadraticProblem(np.eye(3), np.zeros(3)).objective()
        trace = run_me(f, np.array([1.0, 0.0, 0.0]))
        assert any(not sd.li_flag for sd in trace.step_data)
        report = audit_orthogonality(trace.step_data, 1e-12, f.lip)
        audited_steps = {r.step for r in report.rows}
        for sd in trace.step_data:
            if not sd.li_flag:
                assert sd.k not in audited_steps

    def test_logistic_residual_scale(self, small_logreg):
        f = small_logreg.objective()
        trace = run_me(f, np.zeros(50))
        report = audit_orthogonality(trace.step_data, 1e-12, f.lip)
        assert report.passed, report.to_text()


class TestDominance:
    def test_random_spd_points(self, rng):
        q = generate_quadratic(8, 20.0, 5)
        f = q.objective()
        for _ in range(20):
            x = rng.standard_normal(8)
            f_me, f_gd, ok = audit_dominance(f, x)
            assert ok
            assert f_me <= f_gd + 1e-12 * max(1.0, abs(f.value(x)))

    def test_isotropic_equality(self):
        f = QuadraticProblem(np.eye(4), np.zeros(4)).objective()
        x = np.array([1.0, -2.0, 0.5, 0.0])
        f_me, f_gd, ok = audit_dominance(f, x)
        assert ok
        assert f_me == pytest.approx(f_gd, abs=1e-12)

    def test_logistic_origin(self, small_logreg):
        _, _, ok = audit_dominance(small_logreg.objective(), np.zeros(50))
        assert ok


class TestIterationBound:
    def test_formula_value_kappa_100(self):
        # ceil(ln(1e12) / ln(101/99)) computed independently
        expected = math.ceil(math.log(1e12) / math.log(101.0 / 99.0))
        assert expected == 1382
        assert theoretical_iteration_bound(100.0, 1e12, 1.0) == 1382

    def test_kappa_near_one_is_tiny(self):
        assert theoretical_iteration_bound(1.001, 1e12, 1.0) <= 4

    def test_no_reduction_means_zero(self):
        assert theoretical_iteration_bound(50.0, 3.0, 3.0) == 0

    def test_rejects_bad_gaps(self):
        with pytest.raises(ValueError):
            theoretical_iteration_bound(10.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            theoretical_iteration_bound(10.0, 1.0, 2.0)


def test_report_rendering(small_logreg):
    f = small_logreg.objective()
    trace = run_me(f, np.zeros(50))
    ref = compute_reference(f)
    fill_ratios(trace, ref.f_star)
    _, report = certify_rates(trace, ref.f_star, f.mu, f.lip)
    text = report.to_text()
    assert "overall: PASS" in text
    rows = report.to_csv_rows()
    assert rows and set(rows[0]) == {"name", "step", "value", "bound", "passed"}
