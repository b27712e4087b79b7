//! Casimir subtraction `Σₙ − ∫dn` over cavity modes `kₙ = πn/a`, and the
//! force by differentiation in `a`.

use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::numerics::{differentiate_with_noise, sum_minus_integral, QuadResult};
use crate::types::{vacuum_energy, vacuum_force, CasimirResult, QuadSettings, Quantity};

/// Settings for the per-mode integrals: tighter than the mode-sum target so
/// that quadrature noise stays below the subtraction tolerance.
pub fn mode_settings(qs: &QuadSettings) -> QuadSettings {
    QuadSettings {
        rel_tol: (qs.rel_tol * 1e-3).max(1e-13),
        abs_tol: (qs.abs_tol * 1e-3).max(1e-16),
        ..*qs
    }
}

/// `E¹(a) = (Σₙ − ∫dn) e(πn/a)` for a per-mode energy `e(k)`. The mode
/// callback receives the per-mode settings derived by [`mode_settings`].
pub fn casimir_energy<F>(mode: F, a: f64, qs: &QuadSettings) -> Result<CasimirResult>
where
    F: Fn(f64, &QuadSettings) -> Result<QuadResult<f64>> + Sync,
{
    casimir_energy_checked(mode, a, qs).map(|(r, _)| r)
}

/// [`casimir_energy`] plus whether every quadrature behind it converged, so
/// that `err_estimate` is a usable bound even if it misses the target.
fn casimir_energy_checked<F>(mode: F, a: f64, qs: &QuadSettings) -> Result<(CasimirResult, bool)>
where
    F: Fn(f64, &QuadSettings) -> Result<QuadResult<f64>> + Sync,
{
    crate::error::check_positive("a", a)?;
    let mqs = mode_settings(qs);
    let first_err: Mutex<Option<Error>> = Mutex::new(None);
    let worst: Mutex<(f64, bool)> = Mutex::new((0.0, true));
    let f = |n: f64| match mode(PI * n / a, &mqs) {
        Ok(r) => {
            let mut w = worst.lock().expect("poisoned");
            w.0 = w.0.max(r.err);
            w.1 &= r.converged;
            r.value
        }
        Err(e) => {
            first_err.lock().expect("poisoned").get_or_insert(e);
            f64::NAN
        }
    };
    let smi = sum_minus_integral(f, qs);
    if let Some(e) = first_err.into_inner().expect("poisoned") {
        return Err(e);
    }
    let smi = smi?;
    let (mode_err, modes_ok) = worst.into_inner().expect("poisoned");
    let err = smi.err + 2.0 * smi.n_terms as f64 * mode_err;
    let vac = vacuum_energy(a);
    let result = CasimirResult {
        quantity: Quantity::Energy,
        a,
        total: vac + smi.value,
        vacuum: vac,
        interaction: smi.value,
        err_estimate: err,
        n_modes_used: smi.n_terms,
        converged: smi.converged && modes_ok && err <= smi.target,
    };
    Ok((result, smi.integral_ok && modes_ok))
}

/// `F = −dE/da` by Richardson-extrapolated central differences of the
/// interaction energy with step `qs.fd_step·a`; the vacuum part is exact.
/// The energies are computed at a tolerance tightened by `fd_step/16`.
pub fn casimir_force<F>(mode: F, a: f64, qs: &QuadSettings) -> Result<CasimirResult>
where
    F: Fn(f64, &QuadSettings) -> Result<QuadResult<f64>> + Sync,
{
    crate::error::check_positive("a", a)?;
    let h = qs.fd_step * a;
    if !(qs.fd_step < 0.5) || h <= 1e3 * f64::EPSILON * a {
        return Err(Error::StepUnderflow {
            step: h,
            noise: 1e3 * f64::EPSILON * a,
        });
    }
    // Energy noise is amplified by roughly 1/h in the difference quotient.
    let scale = qs.fd_step / 16.0;
    let eqs = QuadSettings {
        rel_tol: (qs.rel_tol * scale).max(1e-11),
        abs_tol: (qs.abs_tol * scale).max(1e-16),
        ..*qs
    };
    let points: Vec<f64> = [1.0, -1.0, 0.5, -0.5, 0.25, -0.25].iter().map(|s| a + s * h).collect();
    let energies: Vec<Result<(CasimirResult, bool)>> = points
        .par_iter()
        .map(|&x| casimir_energy_checked(&mode, x, &eqs))
        .collect();
    let energies: Vec<(CasimirResult, bool)> = energies.into_iter().collect::<Result<_>>()?;
    let quadrature_ok = energies.iter().all(|e| e.1);
    let energies: Vec<CasimirResult> = energies.into_iter().map(|e| e.0).collect();
    let lookup = |x: f64| {
        let i = points.iter().position(|p| *p == x).expect("stencil point");
        (energies[i].interaction, energies[i].err_estimate)
    };
    let d = differentiate_with_noise(lookup, a, h, f64::INFINITY);
    let value = -d.value;
    // The natural force scale is |E¹|/a: a force far below it is a small
    // difference of energies and cannot be resolved beyond their accuracy.
    let e_mid = 0.5 * (lookup(a + 0.25 * h).0 + lookup(a - 0.25 * h).0);
    let tol = qs.tolerance(value).max(qs.rel_tol * e_mid.abs() / a);
    let vac = vacuum_force(a);
    Ok(CasimirResult {
        quantity: Quantity::Force,
        a,
        total: vac + value,
        vacuum: vac,
        interaction: value,
        err_estimate: d.err,
        n_modes_used: energies.iter().map(|e| e.n_modes_used).max().unwrap_or(0),
        // The energy errors enter `d.err` through the difference quotient.
        converged: quadrature_ok && d.err <= tol,
    })
}
