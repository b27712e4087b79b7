//! Compensated summation and the regularized mode subtraction `Σₙ − ∫dn`.

use rayon::prelude::*;

use super::adaptive::{integrate, Interval};
use super::diff::{differentiate_with_noise, fifth_derivative, third_derivative};
use crate::error::{Error, Result};
use crate::types::QuadSettings;

/// Neumaier's compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = NeumaierSum::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Result of [`sum_minus_integral`], with its pieces for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumMinusIntegral {
    pub value: f64,
    pub err: f64,
    /// `Σ_{n=1}^{N} f(n)`.
    pub sum: f64,
    /// `∫₀^N f(n) dn`.
    pub integral: f64,
    /// Euler–Maclaurin correction for `n > N`.
    pub tail: f64,
    pub n_terms: usize,
    pub evals: usize,
    /// Error target the result was judged against.
    pub target: f64,
    /// Every `∫dn` panel converged; `err` is then a usable bound even when it
    /// misses `target`.
    pub integral_ok: bool,
    pub converged: bool,
}

const FIRST_N: usize = 16;

/// `Σ_{n=1}^{∞} f(n) − ∫₀^∞ f(n) dn` for smooth decaying `f`.
///
/// The sum and the integral are truncated at the same `N`; the remainder
/// `Σ_{n>N} − ∫_N^∞` is the Euler–Maclaurin series through `f‴`, with the
/// `f⁽⁵⁾` term as error estimate. `N` doubles until the total error meets
/// `max(abs_tol, rel_tol·max(|result|, |f(1)|))` or exceeds `qs.mode_cutoff`.
/// The summands are evaluated in parallel and reduced in index order.
pub fn sum_minus_integral<F>(f: F, qs: &QuadSettings) -> Result<SumMinusIntegral>
where
    F: Fn(f64) -> f64 + Sync,
{
    qs.validate()?;
    let n0 = FIRST_N.min(qs.mode_cutoff).max(4);
    let f_lo = f(n0 as f64);
    let f_hi = f((16 * n0) as f64);
    let mut evals = 2;
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::SingularPoint {
            at: format!("n = {n0} or {}", 16 * n0),
            what: "summand is not finite",
        });
    }
    if f_lo.abs() > qs.abs_tol && f_hi.abs() >= 0.99 * f_lo.abs() {
        return Err(Error::NonDecaying {
            n_lo: n0 as f64,
            n_hi: (16 * n0) as f64,
            f_lo,
            f_hi,
        });
    }

    let mut values: Vec<f64> = Vec::new();
    let mut integral_pieces: Vec<f64> = Vec::new();
    let mut integral_err = 0.0;
    let mut integral_ok = true;
    let mut n = n0;
    let mut last = None;
    loop {
        let start = values.len() + 1;
        let fresh: Vec<f64> = (start..=n).into_par_iter().map(|i| f(i as f64)).collect();
        evals += fresh.len();
        values.extend(fresh);
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularPoint {
                at: format!("n = {}", i + 1),
                what: "summand is not finite",
            });
        }

        let scale = values[0].abs().max(f_lo.abs());
        let tol = qs.abs_tol.max(qs.rel_tol * scale);
        let piece_qs = QuadSettings {
            abs_tol: tol / 16.0,
            rel_tol: (qs.rel_tol * 1e-3).max(1e-15),
            ..*qs
        };
        let lo = if integral_pieces.is_empty() { 0.0 } else { (n / 2) as f64 };
        let mut dom = Interval::new(lo, n as f64);
        if lo == 0.0 {
            let mut b = 1.0;
            while b < n as f64 {
                dom.breaks.push(b);
                b *= 2.0;
            }
        }
        let piece = integrate(&f, &dom, &piece_qs);
        evals += piece.evals;
        integral_pieces.push(piece.value);
        integral_err += piece.err;
        integral_ok &= piece.converged;

        let nf = n as f64;
        let cached = |x: f64| -> f64 {
            if x.fract() == 0.0 && x >= 1.0 && (x as usize) <= values.len() {
                values[x as usize - 1]
            } else {
                f(x)
            }
        };
        let d1 = differentiate_with_noise(|x| (cached(x), 0.0), nf, 1.0, f64::INFINITY);
        let (d3, d3_err) = third_derivative(cached, nf, 1.0);
        let d5 = fifth_derivative(cached, nf, 1.0);
        evals += 16;
        let fn_ = values[n - 1];
        let tail = -0.5 * fn_ - d1.value / 12.0 + d3 / 720.0;
        let tail_err = d5.abs() / 30240.0 + d1.err / 12.0 + d3_err / 720.0;

        let sum = neumaier_sum(values.iter().copied());
        let integral = neumaier_sum(integral_pieces.iter().copied());
        let value = sum - integral + tail;
        let round = 4.0 * f64::EPSILON * (sum.abs() + integral.abs() + n as f64 * scale);
        let err = integral_err + tail_err + round;
        let target = tol.max(qs.rel_tol * value.abs());
        let result = SumMinusIntegral {
            value,
            err,
            sum,
            integral,
            tail,
            n_terms: n,
            evals,
            target,
            integral_ok,
            converged: integral_ok && err <= target,
        };
        if result.converged || 2 * n > qs.mode_cutoff {
            return Ok(result);
        }
        // Stop doubling once the error stalls above the target.
        if let Some(prev) = last {
            let prev: SumMinusIntegral = prev;
            if err >= prev.err && tail_err < 0.1 * integral_err {
                return Ok(result);
            }
        }
        last = Some(result);
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn qs() -> QuadSettings {
        QuadSettings::default().with_rel_tol(1e-11).with_abs_tol(1e-12)
    }

    #[test]
    fn exponential() {
        let r = sum_minus_integral(|n: f64| (-n).exp(), &qs()).unwrap();
        let exact = 1.0 / (E - 1.0) - 1.0;
        assert!(r.converged, "{r:?}");
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
        assert!((r.value - exact).abs() <= 3.0 * r.err);
    }

    #[test]
    fn lorentzian() {
        let r = sum_minus_integral(|n: f64| 1.0 / (n * n + 1.0), &qs()).unwrap();
        let exact = 0.5 * (PI / PI.tanh() - 1.0) - 0.5 * PI;
        assert!(r.converged, "{r:?}");
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
        assert!((r.value - exact).abs() <= 3.0 * r.err);
    }

    #[test]
    fn slow_algebraic_decay() {
        // Σ 1/n² − ∫₁^∞... written with a regular start: f = 1/(n+1)².
        let r = sum_minus_integral(|n: f64| 1.0 / ((n + 1.0) * (n + 1.0)), &qs()).unwrap();
        let exact = PI * PI / 6.0 - 1.0 - 1.0;
        assert!(r.converged, "{r:?}");
        assert!((r.value - exact).abs() < 1e-10);
    }

    #[test]
    fn constant_rejected() {
        assert!(matches!(
            sum_minus_integral(|_n: f64| 1.0, &qs()),
            Err(Error::NonDecaying { .. })
        ));
    }

    #[test]
    fn compensated_sum() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(xs), 2.0);
    }
}
