//! Quadrature, principal values, mode-sum subtraction and differentiation.

mod adaptive;
mod diff;
mod gk;
mod roots;
mod series;

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

pub use adaptive::{
    integrate, integrate_2d, integrate_pv, integrate_semi_inf, principal_value, Interval,
};
pub use diff::{differentiate_central, differentiate_with_noise, fifth_derivative, third_derivative};
pub use gk::{gk21_panel, PanelEstimate};
pub use roots::{newton_complex, polynomial_roots, Poly};
pub use series::{neumaier_sum, sum_minus_integral, NeumaierSum, SumMinusIntegral};

/// Values that can be integrated: reals, complex numbers and small fixed
/// vectors, so several integrands can share one set of evaluations.
pub trait QuadValue:
    Copy + Default + Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    /// Magnitude used for error control.
    fn norm(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// Componentwise absolute value, as a value of the same type.
    fn abs_parts(&self) -> Self;
}

impl QuadValue for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn abs_parts(&self) -> Self {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn abs_parts(&self) -> Self {
        Complex64::new(self.re.abs(), self.im.abs())
    }
}

/// Fixed-size real vector integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multi<const N: usize>(pub [f64; N]);

impl<const N: usize> Default for Multi<N> {
    fn default() -> Self {
        Multi([0.0; N])
    }
}

impl<const N: usize> Add for Multi<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Multi<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul<f64> for Multi<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const N: usize> QuadValue for Multi<N> {
    fn norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
    fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
    fn abs_parts(&self) -> Self {
        Multi(self.0.map(f64::abs))
    }
}

/// Outcome of a numerical operation with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub err: f64,
    pub evals: usize,
    pub converged: bool,
    /// Sub-interval carrying the largest local error (in the original variable).
    pub worst_panel: Option<(f64, f64)>,
}

impl<T: QuadValue> QuadResult<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            err: 0.0,
            evals: 0,
            converged: true,
            worst_panel: None,
        }
    }

    pub fn map<U, F: FnOnce(T) -> U>(self, f: F) -> QuadResult<U> {
        QuadResult {
            value: f(self.value),
            err: self.err,
            evals: self.evals,
            converged: self.converged,
            worst_panel: self.worst_panel,
        }
    }

    /// Converts a non-converged result into an error.
    pub fn require(self, what: &'static str, tol: f64) -> crate::Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(crate::Error::NotConverged {
                what,
                err: self.err,
                tol,
                evals: self.evals,
            })
        }
    }
}
