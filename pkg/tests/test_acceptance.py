"""Acceptance gate: ten end-to-end checks of the blow-up laws, one printed
verdict line each."""

import math

import numpy as np
import pytest

from ballblowup.asympt import (
    beta_gamma_limits,
    build_report,
    coercivity_probe,
    sup_w_check,
    verify_alpha,
    verify_rate,
)
from ballblowup.bubble import (
    bubble_moment,
    grad_dlambda_pu_norm,
    lemma_b3_suite,
    pu_center,
    _du_dlam,
    _u,
)
from ballblowup.greenfn import (
    RadialCoefficient,
    critical_a,
    ga_center,
    phia_hessian,
    qv_center,
)
from ballblowup.numkit import quad_radial, richardson_fit
from ballblowup.solver import SOBOLEV_CONSTANT

from conftest import CRITICAL_A

const = RadialCoefficient.constant_coeff


def verdict(n, name, ok, detail=""):
    print(f"criterion {n:>2} {name:<38} {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok


def test_criterion_1_critical_coefficient():
    a_star = critical_a(1.0)
    err_a = abs(a_star - (-math.pi**2 / 4))
    phi0 = ga_center(const(a_star), 1.0).phi_a_at_0
    ok = err_a <= 1e-10 and abs(phi0) <= 1e-10
    verdict(1, "critical coefficient and vanishing speed", ok,
            f"|a*-(-pi^2/4)|={err_a:.2e} |phi(0)|={abs(phi0):.2e}")


def test_criterion_2_qv_and_hessian():
    qv = qv_center(const(-1.0), const(CRITICAL_A), 1.0)
    err_q = abs(qv - (-2 * math.pi))
    hess = phia_hessian(critical_a(1.0), 1.0)
    err_h = abs(hess - math.pi**4 / 24)
    ok = err_q <= 1e-8 and err_h <= 1e-5
    verdict(2, "potential integral and speed hessian", ok,
            f"|Q_V+2pi|={err_q:.2e} |phi''-pi^4/24|={err_h:.2e}")


def test_criterion_3_rate(canonical_records, v2_records):
    r1 = verify_rate(canonical_records, CRITICAL_A, -2 * math.pi)
    r2 = verify_rate(v2_records, CRITICAL_A, -4 * math.pi)
    ok = (
        r1.passed and abs(r1.limit - math.pi**3 / 2) <= 0.02 * math.pi**3 / 2
        and r2.passed and abs(r2.limit - math.pi**3 / 4) <= 0.02 * math.pi**3 / 4
    )
    verdict(3, "eps*lambda rate for V=-1 and V=-2", ok,
            f"limits {r1.limit:.4f} / {r2.limit:.4f}")


def test_criterion_4_alpha_slope(canonical_records):
    entry = verify_alpha(canonical_records, CRITICAL_A, -2 * math.pi, 1.0)
    target = 32 / (3 * math.pi**4)
    ok = entry.passed and abs(entry.limit - target) <= 0.05 * target
    verdict(4, "alpha-1 slope", ok, f"slope {entry.limit:.5f} target {target:.5f}")


def test_criterion_5_farfield(canonical_records):
    vals = [r.farfield_error for r in canonical_records]
    tail = vals[-3:]
    ok = vals[-1] <= 0.1 and all(b < a for a, b in zip(tail, tail[1:]))
    verdict(5, "far-field Green's law", ok,
            f"final {vals[-1]:.2e}, tail decreasing={all(b < a for a, b in zip(tail, tail[1:]))}")


def test_criterion_6_remainder_bounds(canonical_records):
    gw = [r.norm_grad_w * math.sqrt(r.lam) for r in canonical_records]
    gr = [r.norm_grad_r / (r.eps / math.sqrt(r.lam)) for r in canonical_records]
    rw = max(gw) / float(np.median(gw))
    rr = max(gr) / float(np.median(gr))
    sw = sup_w_check(canonical_records)
    ok = rw <= 3.0 and rr <= 3.0 and sw.decreasing
    verdict(6, "remainder norm bounds and sup trend", ok,
            f"grad_w {rw:.2f} grad_r {rr:.2f} sup_w decreasing={sw.decreasing}")


def test_criterion_7_zero_mode_limits(canonical_records):
    beta, gamma = beta_gamma_limits(canonical_records)
    bt, gt = -16 / (3 * math.pi), 128 / (15 * math.pi)
    ok = abs(beta - bt) <= 0.01 * abs(bt) and abs(gamma - gt) <= 0.01 * abs(gt)
    verdict(7, "zero-mode coefficient limits", ok,
            f"beta {beta:.5f}/{bt:.5f} gamma {gamma:.5f}/{gt:.5f}")


def test_criterion_8_bubble_calculus():
    suite = lemma_b3_suite(-1.0, 1.0)
    errs = []
    for key in ("U5_H", "U4_dlamU_H", "U4_H2", "U3_dlamU_H2"):
        ent = suite[key]
        errs.append(abs(ent["leading"] - ent["leading_target"])
                    / abs(ent["leading_target"]))
        if "subleading" in ent:
            errs.append(abs(ent["subleading"] - ent["subleading_target"])
                        / abs(ent["subleading_target"]))
    errs.append(abs(suite["U4_dxU_H"]["leading"]) / suite["U4_dxU_H"]["scale"])

    lams = np.geomspace(1e2, 1e4, 5)
    consts = [(bubble_moment(4, 3), 3 * math.pi / 16)]
    u4dl = [
        l**2 * 4 * math.pi * quad_radial(
            lambda r: _u(l, r) ** 4 * _du_dlam(l, r) ** 2 * r * r, 0.0, 1.0, 1e-13
        ).value
        for l in lams
    ]
    consts.append((richardson_fit(list(zip(1 / lams, u4dl)))[0], math.pi**2 / 64))
    gradpu = [pu_center(l, 1.0).grad_norm_sq() for l in lams]
    consts.append((richardson_fit(list(zip(1 / lams, gradpu)))[0], 3 * math.pi**2 / 4))
    dl = [grad_dlambda_pu_norm(l, 1.0) * l**2 for l in lams]
    consts.append((richardson_fit(list(zip(1 / lams, dl)))[0], 15 * math.pi**2 / 64))
    errs += [abs(v - t) / abs(t) for v, t in consts]
    ok = max(errs) <= 0.01
    verdict(8, "bubble calculus coefficients", ok, f"max rel err {max(errs):.2e}")


def test_criterion_9_identity_residuals(canonical_records):
    en = max(r.energy_residual for r in canonical_records)
    po = max(r.pohozaev_residual for r in canonical_records)
    gr = max(r.greens_residual for r in canonical_records)
    qs = [r.sobolev_quotient for r in canonical_records]
    ok = (
        en <= 1e-6 and po <= 1e-6 and gr <= 1e-5
        and all(q < SOBOLEV_CONSTANT for q in qs)
        and all(b > a for a, b in zip(qs, qs[1:]))
    )
    verdict(9, "identity residuals and quotient trend", ok,
            f"energy {en:.1e} pohozaev {po:.1e} greens {gr:.1e}")


def test_criterion_10_coercivity():
    rho = coercivity_probe(1e3, const(CRITICAL_A), 1.0, samples=200)
    rho_ws = coercivity_probe(1.0, None, 50.0, samples=200)
    ok = rho > 0 and rho_ws >= 4 / 7 - 0.02
    verdict(10, "quadratic-form coercivity probe", ok,
            f"rho {rho:.3f} whole-space {rho_ws:.3f} >= {4/7 - 0.02:.3f}")


def test_full_report_all_passed(canonical_records):
    assert build_report(canonical_records, CRITICAL_A, -2 * math.pi, 1.0).all_passed
