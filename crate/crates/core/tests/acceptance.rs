//! Acceptance criteria 1–10 for the benchmark medium.
//!
//! Every criterion prints one `PASS`/`FAIL` line to stderr (bypassing the
//! test harness capture) with the measured numbers, and the test fails if
//! any criterion fails.

use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use polariton_casimir::coupling::{CouplingDef, CouplingSpec};
use polariton_casimir::dmodel::{d_casimir_energy, d_force, d_mode_energy, d_mode_energy_real_axis};
use polariton_casimir::hbmodel::{
    benchmark_medium, expectation_he, expectation_he_real_axis, hb_casimir_energy, hb_force, sum_rules,
};
use polariton_casimir::numerics::{integrate_2d, integrate_pv, integrate_semi_inf, sum_minus_integral, Interval};
use polariton_casimir::reduction::{reduce_general, ComponentDef, GeneralCoupling};
use polariton_casimir::spectral::{Atom, AtomMedium, DirectMedium, Permittivity, QuadratureAtom};
use polariton_casimir::{make_mode_context, CasimirResult, Model, ModeContext, PhysParams, QuadSettings};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn report(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

fn energy_qs() -> QuadSettings {
    QuadSettings::default().with_rel_tol(1e-8).with_abs_tol(1e-12)
}

fn force_qs() -> QuadSettings {
    QuadSettings::default().with_rel_tol(1e-7).with_abs_tol(1e-13)
}

fn bench(a: f64) -> PhysParams {
    PhysParams::default().with_a(a)
}

fn d_energy(p: &PhysParams, qs: &QuadSettings) -> CasimirResult {
    let eps = benchmark_medium(p).unwrap();
    d_casimir_energy(p, &eps, qs).unwrap()
}

fn d_force_at(p: &PhysParams, qs: &QuadSettings) -> CasimirResult {
    let eps = benchmark_medium(p).unwrap();
    d_force(p, &eps, qs).unwrap()
}

/// Least-squares slope and correlation coefficient of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (sxy / sxx, sxy / (sxx * syy).sqrt())
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let qs = energy_qs();
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for &a in &[0.5, 1.0, 2.0] {
        let p = bench(a).with_alpha(0.0);
        let exact = -PI / (24.0 * a);
        for r in [d_energy(&p, &qs), hb_casimir_energy(&p, &qs).unwrap()] {
            worst = worst.max(((r.total - exact) / exact).abs());
            all_converged &= r.converged;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst < 1e-6 && all_converged && secs < 10.0,
        format!("max relative deviation from -pi/(24a) = {worst:.2e} (D and HB, a = 0.5, 1, 2), {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let qs = QuadSettings::default();
    let density = CouplingSpec::custom("benchmark", |w: f64| (2.0 / PI) / (w * w + 1.0), 0.0, 2.0, vec![1.0]);
    let quad = AtomMedium::new(Atom::Quadrature(QuadratureAtom::new(density, 0.0, qs).unwrap()), 1.0).unwrap();
    let closed = AtomMedium::benchmark(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let w = 10f64.powf(-2.0 + 4.0 * i as f64 / 199.0);
        let (a, b) = (quad.eps_real(w).unwrap(), closed.eps_real(w).unwrap());
        worst = worst.max((a - b).norm() / b.norm());
    }
    let at_i = closed.eps(Complex64::new(0.0, 1.0)).unwrap();
    let at_i_quad = quad.eps_imag_axis(1.0).unwrap();
    let dev_i = (at_i - 5.0 / 3.0).norm().max((at_i_quad - 5.0 / 3.0).abs());
    outcome(
        worst < 1e-6 && dev_i < 1e-8,
        format!("max relative deviation on 200 points = {worst:.2e}; |eps(i) - 5/3| = {dev_i:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let r = d_energy(&bench(40.0), &energy_qs());
    let secs = t.elapsed().as_secs_f64();
    let dev = (r.interaction + 0.1618).abs();
    outcome(
        dev <= 0.005 && r.converged && secs < 300.0,
        format!(
            "E1_D(40) = {:.8} ± {:.1e} (target -0.1618 ± 0.005), {} modes, {secs:.1} s",
            r.interaction, r.err_estimate, r.n_modes_used
        ),
    )
}

fn criterion_4() -> Outcome {
    let qs = force_qs();
    let a: Vec<f64> = (0..7).map(|i| 30.0 + 5.0 * i as f64).collect();
    let f: Vec<CasimirResult> = a.iter().map(|&a| d_force_at(&bench(a), &qs)).collect();
    let ln_f: Vec<f64> = f.iter().map(|r| r.interaction.abs().ln()).collect();
    let (slope, _) = linear_fit(&a, &ln_f);
    let (power, _) = linear_fit(&a.iter().map(|x| x.ln()).collect::<Vec<_>>(), &ln_f);
    let resolved = f.iter().all(|r| r.converged && r.err_estimate < 0.05 * r.interaction.abs());
    outcome(
        (slope + 0.055).abs() <= 0.2 * 0.055 && resolved,
        format!(
            "d ln|F1_D|/da over [30, 60] = {slope:.5} (target -0.055 ± 20%); F1_D(30) = {:.4e}, F1_D(60) = {:.4e}; log-log slope {power:.3}",
            f[0].interaction, f[6].interaction
        ),
    )
}

fn criterion_5() -> Outcome {
    let qs = energy_qs();
    let a: Vec<f64> = (0..5).map(|i| 20.0 * 4f64.powf(i as f64 / 4.0)).collect();
    let e: Vec<CasimirResult> = a.iter().map(|&a| hb_casimir_energy(&bench(a), &qs).unwrap()).collect();
    let ln_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let e1: Vec<f64> = e.iter().map(|r| r.interaction).collect();
    let (slope, corr) = linear_fit(&ln_a, &e1);

    let fqs = force_qs();
    let fa = [40.0, 80.0];
    let f: Vec<CasimirResult> = fa.iter().map(|&a| hb_force(&bench(a), &fqs).unwrap()).collect();
    let f_times_a = f[1].interaction * 80.0;
    let f_power = (f[1].interaction.abs().ln() - f[0].interaction.abs().ln()) / 2f64.ln();

    let d40 = d_energy(&bench(40.0), &qs);
    let hb40 = &e[2];
    let gap = hb40.interaction.abs() - d40.interaction.abs();
    let combined = hb40.err_estimate + d40.err_estimate;

    let primary = (slope + 8.0).abs() <= 0.15 * 8.0 && (f_times_a - 6.0).abs() <= 0.2 * 6.0;
    let fallback = corr.abs() >= 0.999 && (f_power + 1.0).abs() <= 0.05 && gap > 10.0 * combined;
    outcome(
        primary || fallback,
        format!(
            "dE1_HB/d ln a over [20, 80] = {slope:.4e} (target -8), F1_HB(80)*a = {f_times_a:.3e} (target 6); \
             fallback: corr(E1_HB, ln a) = {corr:.4}, d ln|F1_HB|/d ln a over [40, 80] = {f_power:.3} (target -1), \
             |E1_HB(40)| - |E1_D(40)| = {gap:.2e} vs 10x combined error {:.2e}",
            10.0 * combined
        ),
    )
}

fn criterion_6() -> Outcome {
    let qs = QuadSettings::default();
    let mut worst: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut pass = true;
    for &n in &[1, 3, 10] {
        for &a in &[PI, 10.0] {
            for &alpha in &[0.5, 1.0] {
                let p = bench(a).with_alpha(alpha);
                let medium = benchmark_medium(&p).unwrap();
                let ctx = make_mode_context(&p, Model::HB, n, medium.atom.mu2()).unwrap();
                let r = sum_rules(&medium, &ctx, &qs).unwrap();
                worst = worst.max(r.max_rel());
                worst_norm = worst_norm.max((r.normalization - 1.0).abs());
                pass &= !r.degenerate && r.holds(1e-6, 1e-4);
            }
        }
    }
    outcome(
        pass,
        format!("12 points: max orthogonality residual {worst:.2e} of natural scale, max |norm - 1| = {worst_norm:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let qs = QuadSettings::default().with_rel_tol(1e-8).with_abs_tol(1e-13);
    let points = [(0.2, 1.0), (1.0, 1.0), (PI, 1.0), (10.0, 1.0), (1.0, 0.5)];
    let mut worst: f64 = 0.0;
    for &(k, alpha) in &points {
        let medium = AtomMedium::benchmark(alpha);
        let ctx = ModeContext::at_wavenumber(Model::HB, k, alpha, 0.0, 1.0).unwrap();
        let rot = expectation_he(&medium, &ctx, &qs).unwrap().value;
        let real = expectation_he_real_axis(&medium, &ctx, &qs).unwrap().value;
        worst = worst.max(((rot - real) / real).abs());
        let rot = d_mode_energy(&medium, k, &qs).unwrap().value;
        let real = d_mode_energy_real_axis(&medium, k, &qs).unwrap().value;
        worst = worst.max(((rot - real) / real).abs());
    }
    outcome(
        worst < 1e-3,
        format!("<H_e> and D per-mode energy, rotated vs real axis at 5 (k, alpha) points: max relative difference {worst:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let qs = QuadSettings::default();
    let part = |w: f64| CouplingDef::Benchmark { g2: w * 2.0 / PI, m: 1.0 };
    let defs = vec![
        ComponentDef::Ydot { coupling: part(0.3) },
        ComponentDef::Ydot { coupling: part(0.2) },
        ComponentDef::Y {
            coupling: CouplingDef::Power {
                power: 2.0,
                inner: Box::new(part(0.5)),
            },
        },
    ];
    let reduced = reduce_general(&GeneralCoupling::from_defs(&defs).unwrap(), &qs).unwrap();
    let a = DirectMedium::new(reduced.coupling, qs).unwrap();
    let b = DirectMedium::new(CouplingSpec::benchmark(), qs).unwrap();
    let mut eps_dev: f64 = 0.0;
    for i in 0..40 {
        let w = 10f64.powf(-2.0 + 4.0 * i as f64 / 39.0);
        let (ea, eb) = (a.eps_real(w).unwrap(), b.eps_real(w).unwrap());
        eps_dev = eps_dev.max((ea - eb).norm() / eb.norm());
        let (ia, ib) = (a.eps_imag_axis(w).unwrap(), b.eps_imag_axis(w).unwrap());
        eps_dev = eps_dev.max(((ia - ib) / ib).abs());
    }
    let p = bench(1.0);
    let eq = energy_qs();
    let ea = d_casimir_energy(&p, &a, &eq).unwrap();
    let eb = d_casimir_energy(&p, &b, &eq).unwrap();
    let e_dev = ((ea.interaction - eb.interaction) / eb.interaction).abs();
    outcome(
        eps_dev < 1e-8 && e_dev < 1e-6,
        format!(
            "3-component reduction (counterterm {:.6}): max eps deviation {eps_dev:.2e}, E1_D(1) = {:.10} vs {:.10} (relative {e_dev:.2e})",
            reduced.counterterm.delta_mu2, ea.interaction, eb.interaction
        ),
    )
}

fn criterion_9() -> Outcome {
    let qs = QuadSettings::default();
    let mut worst_value: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut check = |value: f64, err: f64, exact: f64, closed_form: bool| {
        let dev = (value - exact).abs();
        if closed_form {
            worst_value = worst_value.max(dev);
        }
        // Error estimate versus true error; an exact result needs no bound.
        let ratio = if dev == 0.0 { 0.0 } else { dev / err };
        worst_ratio = worst_ratio.max(ratio);
    };

    let e = 1f64.exp();
    let r = sum_minus_integral(|n| (-n).exp(), &qs).unwrap();
    check(r.value, r.err, 1.0 / (e - 1.0) - 1.0, true);
    let r = sum_minus_integral(|n| 1.0 / (n * n + 1.0), &qs).unwrap();
    check(r.value, r.err, (PI / PI.tanh() - 1.0) / 2.0 - PI / 2.0, true);
    let constant_rejected = sum_minus_integral(|_| 1.0, &qs).is_err();

    let r = integrate_pv(|x: f64| 1.0 / (x * x + 1.0), 1.0, &Interval::real_line(), &qs).unwrap();
    check(r.value.re, r.err, -PI / 2.0, true);
    check(r.value.im, r.err, PI / 2.0, true);

    let r = integrate_semi_inf(|w: f64| 1.0 / (w * w + 1.0), 2.0, &qs);
    check(r.value, r.err, PI / 2.0, false);
    let r = integrate_semi_inf(|w: f64| (-w).exp(), 4.0, &qs);
    check(r.value, r.err, 1.0, false);
    let r = integrate_2d(
        |x: f64, y: f64| 1.0 / ((x * x + 1.0) * (y * y + 1.0)),
        &Interval::semi_inf(0.0),
        |_| Interval::semi_inf(0.0),
        &qs.with_rel_tol(1e-9),
    );
    check(r.value, r.err, PI * PI / 4.0, false);

    outcome(
        worst_value < 1e-8 && worst_ratio <= 3.0 && constant_rejected,
        format!(
            "sum-minus-integral and PV oracles: max deviation {worst_value:.2e}; max |true error|/estimate = {worst_ratio:.2} over 7 oracles"
        ),
    )
}

fn criterion_10() -> Outcome {
    let qs = energy_qs();
    let a = 1.5;
    let base = bench(a);
    let e_d = d_energy(&base, &qs);
    let e_hb = hb_casimir_energy(&base, &qs).unwrap();
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for &m in &[0.5, 2.0, 3.0] {
        let scaled = PhysParams {
            a: a / m,
            alpha: base.alpha * m,
            omega0: base.omega0 * m,
            m,
            ..base
        };
        for (reference, r) in [(&e_d, d_energy(&scaled, &qs)), (&e_hb, hb_casimir_energy(&scaled, &qs).unwrap())] {
            let dev = (r.total - m * reference.total).abs();
            let tol = qs.tolerance(r.total) + m * qs.tolerance(reference.total);
            worst = worst.max(dev / tol);
            pass &= dev <= tol && r.converged;
        }
    }
    outcome(
        pass,
        format!("E(a/m; m, m*alpha) = m E(a; 1, alpha) for m = 0.5, 2, 3 (D and HB): max deviation {worst:.2e} of combined tolerance"),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("vacuum limit", criterion_1),
        ("benchmark eps equivalence", criterion_2),
        ("D-model plateau", criterion_3),
        ("D-model force decay", criterion_4),
        ("HB asymptotics", criterion_5),
        ("sum rules", criterion_6),
        ("dual-path agreement", criterion_7),
        ("reduction equivalence", criterion_8),
        ("numerics oracles", criterion_9),
        ("scaling property", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let status = if o.pass { "PASS" } else { "FAIL" };
        report(&format!(
            "criterion {:>2} {status} {name}: {} [{:.1} s]",
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        ));
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
