//! Invariants checked over randomized parameters.

use num_complex::Complex64;
use proptest::prelude::*;

use polariton_casimir::dmodel::{d_casimir_energy, d_mode_energy};
use polariton_casimir::hbmodel::{
    benchmark_medium, expectation_hx_raw, expectation_hy_raw, hb_mode_energy, sum_rules,
};
use polariton_casimir::numerics::sum_minus_integral;
use polariton_casimir::spectral::{propagator, propagator_imag, Atom, AtomMedium, BenchmarkAtom, Permittivity};
use polariton_casimir::{Model, ModeContext, PhysParams, QuadSettings};

fn qs() -> QuadSettings {
    QuadSettings::default().with_rel_tol(1e-9).with_abs_tol(1e-14)
}

fn ctx(k: f64, medium: &AtomMedium) -> ModeContext {
    ModeContext::at_wavenumber(Model::HB, k, medium.alpha, medium.atom.omega0(), medium.atom.mu2()).unwrap()
}

fn gapped(omega0: f64, alpha: f64) -> AtomMedium {
    let atom = Atom::Benchmark(BenchmarkAtom {
        omega0,
        ..BenchmarkAtom::standard()
    });
    AtomMedium::new(atom, alpha).unwrap()
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn passivity(alpha in 0.05f64..3.0, w in log_uniform(1e-2, 1e2)) {
        let eps = AtomMedium::benchmark(alpha).eps_real(w).unwrap();
        prop_assert!(eps.im > 0.0);
    }

    #[test]
    fn imaginary_axis_response(alpha in 0.05f64..3.0, k in log_uniform(1e-2, 1e2), xi in log_uniform(1e-3, 1e3)) {
        let m = AtomMedium::benchmark(alpha);
        prop_assert!(m.eps_imag_axis(xi).unwrap() > 1.0);
        prop_assert!(propagator_imag(k, &m, xi).unwrap() > 0.0);
        let z = m.eps(Complex64::new(0.0, xi)).unwrap();
        prop_assert_eq!(z.im, 0.0);
    }

    #[test]
    fn bridge_identity(alpha in 0.05f64..3.0, k in log_uniform(1e-2, 1e2), w in log_uniform(1e-2, 1e2)) {
        let m = AtomMedium::benchmark(alpha);
        let p = propagator(k, &m, w).unwrap();
        let rhs = w * w * m.eps_real(w).unwrap().im * p.norm_sqr();
        prop_assert!((p.im - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE), "{} vs {}", p.im, rhs);
    }

    #[test]
    fn sum_minus_integral_of_exponential(lambda in 0.05f64..5.0) {
        let r = sum_minus_integral(|n| (-lambda * n).exp(), &QuadSettings::default()).unwrap();
        let exact = 1.0 / lambda.exp_m1() - 1.0 / lambda;
        prop_assert!((r.value - exact).abs() <= r.err.max(1e-13), "{} vs {}", r.value, exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn matter_energies_positive(omega0 in 0.3f64..2.0, alpha in 0.1f64..2.0, k in log_uniform(0.1, 10.0)) {
        let m = gapped(omega0, alpha);
        let cx = ctx(k, &m);
        prop_assert!(expectation_hx_raw(&m, &cx, &qs()).unwrap().value > 0.0);
        prop_assert!(expectation_hy_raw(&m, &cx, &qs()).unwrap().value > 0.0);
    }

    #[test]
    fn hb_and_d_mode_energies_coincide(alpha in 0.1f64..2.0, k in log_uniform(0.05, 20.0)) {
        let m = AtomMedium::benchmark(alpha);
        let hb = hb_mode_energy(&m, &ctx(k, &m), &qs()).unwrap();
        let d = d_mode_energy(&m, k, &qs()).unwrap();
        let tol = 1e-7 * d.value.abs() + hb.err + d.err;
        prop_assert!((hb.total - d.value).abs() <= tol, "HB {} vs D {}", hb.total, d.value);
    }

    #[test]
    fn decoupling_is_quadratic(alpha in 1e-3f64..1e-2, k in log_uniform(0.1, 10.0)) {
        let e = |a: f64| {
            let m = AtomMedium::benchmark(a);
            hb_mode_energy(&m, &ctx(k, &m), &qs()).unwrap().total
        };
        let ratio = e(alpha) / e(0.5 * alpha);
        prop_assert!((ratio - 4.0).abs() < 0.1, "ratio {}", ratio);
    }

    #[test]
    fn sum_rules_hold(alpha in 0.2f64..2.0, k in log_uniform(0.1, 10.0)) {
        let m = AtomMedium::benchmark(alpha);
        let r = sum_rules(&m, &ctx(k, &m), &qs()).unwrap();
        prop_assert!(r.holds(1e-6, 1e-4), "{:?}", r);
    }

    #[test]
    fn energy_is_deterministic(a in 0.5f64..10.0) {
        let p = PhysParams::default().with_a(a);
        let m = benchmark_medium(&p).unwrap();
        let x = d_casimir_energy(&p, &m, &QuadSettings::default()).unwrap();
        let y = d_casimir_energy(&p, &m, &QuadSettings::default()).unwrap();
        prop_assert_eq!(x.total.to_bits(), y.total.to_bits());
        prop_assert_eq!(x.err_estimate.to_bits(), y.err_estimate.to_bits());
    }
}
