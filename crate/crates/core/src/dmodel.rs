//! Model D: the field couples directly to the reservoir, and the ground-state
//! energy is a functional of `ε(ω)` alone. Per mode, after rotation to
//! `ω = iξ` and removal of the empty-cavity part,
//!
//! `e(k) = (1/2π) ∫₀^∞ dξ { (k² − ξ²)(P(iξ) − P⁰(iξ)) − ξ² D(ξ) P(iξ) }`
//!
//! with `P = 1/(k² + ξ²ε(iξ))`, `P⁰ = 1/(k² + ξ²)` and
//! `D(ξ) = d/dω[ω(ε − 1)]` at `ω = iξ`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::Result;
use crate::modesum::{casimir_energy, casimir_force};
use crate::numerics::{integrate, Interval, QuadResult};
use crate::spectral::{field_resonance, resonance_breaks, Permittivity};
use crate::types::{CasimirResult, PhysParams, QuadSettings};

/// The two terms of the rotated integrand at one `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DIntegrandPoint {
    pub k: f64,
    pub xi: f64,
    /// `(k² − ξ²)(P − P⁰)`.
    pub term_prop: f64,
    /// `−ξ² D(ξ) P`.
    pub term_disp: f64,
}

impl DIntegrandPoint {
    pub fn total(&self) -> f64 {
        self.term_prop + self.term_disp
    }
}

/// `d/dω[ω(ε(ω) − 1)]` at `ω = iξ`, `ξ > 0`.
pub fn d_dispersion_derivative<P: Permittivity + ?Sized>(eps: &P, xi: f64) -> Result<f64> {
    eps.dispersion_derivative(xi)
}

/// Integrand point. `ξ = 0` returns the limit, which is zero.
pub fn d_integrand<P: Permittivity + ?Sized>(eps: &P, k: f64, xi: f64) -> Result<DIntegrandPoint> {
    if xi == 0.0 {
        return Ok(DIntegrandPoint {
            k,
            xi,
            term_prop: 0.0,
            term_disp: 0.0,
        });
    }
    let ia = eps.imag_axis(xi)?;
    let k2 = k * k;
    let x2 = xi * xi;
    let p = 1.0 / (k2 + ia.xi2_eps);
    let p0 = 1.0 / (k2 + x2);
    // P − P⁰ = −ξ²(ε − 1) P P⁰.
    let dp = -ia.xi2_chi * p * p0;
    Ok(DIntegrandPoint {
        k,
        xi,
        term_prop: (k2 - x2) * dp,
        term_disp: -x2 * ia.disp_deriv * p,
    })
}

fn xi_domain<P: Permittivity + ?Sized>(eps: &P, k: f64) -> Interval {
    let mut breaks = eps.scales();
    breaks.push(k);
    Interval::semi_inf(0.0).with_breaks(breaks).with_tail(2.0)
}

/// Interaction-induced energy of the mode with wavenumber `k`.
pub fn d_mode_energy<P: Permittivity + ?Sized>(eps: &P, k: f64, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    crate::error::check_positive("k", k)?;
    if eps.is_vacuum() {
        return Ok(QuadResult::exact(0.0));
    }
    let failure = std::cell::Cell::new(None);
    let f = |xi: f64| match d_integrand(eps, k, xi) {
        Ok(p) => p.total(),
        Err(e) => {
            if failure.take().is_none() {
                failure.set(Some(e));
            }
            f64::NAN
        }
    };
    let r = integrate(f, &xi_domain(eps, k), qs);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let r = r.map(|v| v / (2.0 * PI));
    let r = QuadResult { err: r.err / (2.0 * PI), ..r };
    let tol = qs.tolerance(r.value);
    r.require("model-D mode energy", tol)
}

/// Same quantity from the unrotated real-axis form
/// `(1/2π) ∫₀^∞ Im[(ω² d(ωε)/dω + k²) P(ω)] dω − k/2`.
/// Resonant on the real axis; intended as a cross-check only.
pub fn d_mode_energy_real_axis<P: Permittivity + ?Sized>(eps: &P, k: f64, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    crate::error::check_positive("k", k)?;
    let deps = |w: f64| -> Result<Complex64> {
        let h = 1e-4 * w;
        let ep = eps.eps_real(w + h)?;
        let em = eps.eps_real(w - h)?;
        let ep2 = eps.eps_real(w + 2.0 * h)?;
        let em2 = eps.eps_real(w - 2.0 * h)?;
        Ok((8.0 * (ep - em) - (ep2 - em2)) / (12.0 * h))
    };
    let f = |w: f64| -> f64 {
        let run = || -> Result<f64> {
            let e = eps.eps_real(w)?;
            let d_we = e + w * deps(w)?;
            let p = 1.0 / ((k - w) * (k + w) - (e - 1.0) * w * w);
            Ok(((w * w * d_we + k * k) * p).im)
        };
        run().unwrap_or(f64::NAN)
    };
    let mut dom = xi_domain(eps, k);
    dom.breaks.extend(resonance_breaks(field_resonance(k, eps)));
    let r = integrate(f, &dom, qs);
    let tol = qs.tolerance(r.value);
    let r = r.require("model-D real-axis mode energy", tol)?;
    Ok(QuadResult {
        value: r.value / (2.0 * PI) - 0.5 * k,
        err: r.err / (2.0 * PI),
        ..r
    })
}

/// `E(a) = −π/(24a) + E¹(a)`, `E¹ = (Σₙ − ∫dn)` of [`d_mode_energy`].
pub fn d_casimir_energy<P: Permittivity + ?Sized>(params: &PhysParams, eps: &P, qs: &QuadSettings) -> Result<CasimirResult> {
    params.validate()?;
    qs.validate()?;
    casimir_energy(|k, mqs| d_mode_energy(eps, k, mqs), params.a, qs)
}

/// `F(a) = −dE/da`; negative values are attractive.
pub fn d_force<P: Permittivity + ?Sized>(params: &PhysParams, eps: &P, qs: &QuadSettings) -> Result<CasimirResult> {
    params.validate()?;
    qs.validate()?;
    casimir_force(|k, mqs| d_mode_energy(eps, k, mqs), params.a, qs)
}
