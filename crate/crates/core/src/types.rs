//! Parameter records and per-mode data shared by both models.
//!
//! Units: ħ = c = 1, lengths in units of 1/m.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{check_non_negative, check_positive, Error, Result};

/// Physical inputs of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysParams {
    /// Mirror separation.
    pub a: f64,
    /// Field–atom coupling of the two-stage model.
    pub alpha: f64,
    /// Bare atom frequency.
    pub omega0: f64,
    /// Reservoir scale.
    pub m: f64,
    /// Normalization of the benchmark family `v²(ω) = g2 m³ / (ω² + m²)`.
    pub g2: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            alpha: 1.0,
            omega0: 0.0,
            m: 1.0,
            g2: 2.0 / PI,
        }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        check_non_negative("alpha", self.alpha)?;
        check_non_negative("omega0", self.omega0)?;
        check_positive("m", self.m)?;
        check_non_negative("g2", self.g2)
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Field coupled directly to the reservoir.
    D,
    /// Field coupled to an atom oscillator, which couples to the reservoir.
    HB,
}

/// Data for one cavity mode `k = πn/a`.
///
/// `n` is real so that the same record serves the continuous `∫dn` of the
/// mode subtraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeContext {
    pub model: Model,
    pub n: f64,
    pub k: f64,
    /// Dressed wavenumber: `√(k² + μ²)` (D) or `√(k² + α²)` (HB).
    pub k1: f64,
    /// Atom frequency `√(ω₀² + μ²)` (HB; `√μ²` for D, unused there).
    pub omega1: f64,
    /// `α √(ω₁/k₁)` for HB, zero for D.
    pub lambda: f64,
    pub alpha: f64,
}

impl ModeContext {
    /// Context at an arbitrary wavenumber `k > 0`.
    pub fn at_wavenumber(model: Model, k: f64, alpha: f64, omega0: f64, mu2: f64) -> Result<Self> {
        check_positive("k", k)?;
        check_non_negative("alpha", alpha)?;
        check_non_negative("omega0", omega0)?;
        check_non_negative("mu2", mu2)?;
        let omega1 = (omega0 * omega0 + mu2).sqrt();
        let (k1, lambda) = match model {
            Model::D => ((k * k + mu2).sqrt(), 0.0),
            Model::HB => {
                let k1 = k.hypot(alpha);
                let lambda = if alpha == 0.0 {
                    0.0
                } else {
                    alpha * (omega1 / k1).sqrt()
                };
                (k1, lambda)
            }
        };
        Ok(Self {
            model,
            n: f64::NAN,
            k,
            k1,
            omega1,
            lambda,
            alpha,
        })
    }
}

/// Builds the context of mode `n ≥ 1`. `mu2 = ∫v²` of the reservoir coupling;
/// for HB it only enters through `ω₁`, and `k₁` uses `α²`.
pub fn make_mode_context(params: &PhysParams, model: Model, n: i64, mu2: f64) -> Result<ModeContext> {
    params.validate()?;
    if n < 1 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("mode index must be >= 1, got {n}"),
        });
    }
    let k = PI * n as f64 / params.a;
    let mut ctx = ModeContext::at_wavenumber(model, k, params.alpha, params.omega0, mu2)?;
    ctx.n = n as f64;
    Ok(ctx)
}

/// Tolerances and limits for every integral and mode sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Start of the mapped tail for semi-infinite integrals.
    pub omega_cutoff: f64,
    pub max_subdivisions: usize,
    /// Largest mode index the mode sum may reach.
    pub mode_cutoff: usize,
    /// Force step relative to `a`.
    pub fd_step: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            omega_cutoff: 16.0,
            max_subdivisions: 4000,
            mode_cutoff: 1 << 15,
            fd_step: 0.05,
        }
    }
}

impl QuadSettings {
    pub fn validate(&self) -> Result<()> {
        check_positive("rel_tol", self.rel_tol)?;
        if self.rel_tol >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                reason: "must be < 1".into(),
            });
        }
        check_positive("abs_tol", self.abs_tol)?;
        check_positive("omega_cutoff", self.omega_cutoff)?;
        check_positive("fd_step", self.fd_step)?;
        if self.max_subdivisions == 0 || self.mode_cutoff == 0 {
            return Err(Error::InvalidParameter {
                name: "max_subdivisions/mode_cutoff",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Energy,
    Force,
}

/// A Casimir energy or force, split into the empty-cavity part and the
/// medium-induced part. Force is `F = −dE/da`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CasimirResult {
    pub quantity: Quantity,
    pub a: f64,
    /// `vacuum + interaction`.
    pub total: f64,
    /// `−π/(24a)` for the energy, `−π/(24a²)` for the force.
    pub vacuum: f64,
    /// Medium-induced part (`Σₙ − ∫dn` of the per-mode shift).
    pub interaction: f64,
    pub err_estimate: f64,
    pub n_modes_used: usize,
    pub converged: bool,
}

pub fn vacuum_energy(a: f64) -> f64 {
    -PI / (24.0 * a)
}

pub fn vacuum_force(a: f64) -> f64 {
    -PI / (24.0 * a * a)
}
