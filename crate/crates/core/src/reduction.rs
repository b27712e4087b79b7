//! Reduction of a general reservoir coupling to a single effective density.
//!
//! A family of oscillators coupled through `Ẏ` (densities `v⁽¹⁾²`) is
//! unitarily equivalent to one oscillator with `v² = Σ v⁽¹⁾²`. A coupling
//! through `Y` (density `v⁽²⁾²`) is canonically equivalent to a `Ẏ` coupling
//! with density `v⁽²⁾²/ω²`, provided the field Hamiltonian carries the extra
//! mass term `Δμ² = ∫ v⁽²⁾²/ω² dω`; then `μ² = ∫ v_eff²` as required by the
//! consistency condition. Only `|v|²` is ever manipulated.

use serde::{Deserialize, Serialize};

use crate::coupling::{mu_squared, CouplingDef, CouplingSpec};
use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::types::QuadSettings;

/// Quadratic field term restoring the consistency condition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Counterterm {
    pub delta_mu2: f64,
}

/// Effective coupling of a reduced family.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub coupling: CouplingSpec,
    pub counterterm: Counterterm,
    /// `∫ v_eff²`, the mass term of the reduced field Hamiltonian.
    pub mu2: f64,
    pub components: usize,
}

impl Reduced {
    /// Mass term the field would have without the counterterm.
    pub fn bare_mu2(&self) -> f64 {
        self.mu2 - self.counterterm.delta_mu2
    }
}

/// One reservoir oscillator family with optional `Ẏ` and `Y` couplings.
#[derive(Debug, Clone, Default)]
pub struct Component {
    pub ydot: Option<CouplingSpec>,
    pub y: Option<CouplingSpec>,
}

/// `N` oscillator families with general interaction.
#[derive(Debug, Clone, Default)]
pub struct GeneralCoupling {
    pub components: Vec<Component>,
}

/// Config-file form of a component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ComponentDef {
    Ydot { coupling: CouplingDef },
    Y { coupling: CouplingDef },
}

impl GeneralCoupling {
    pub fn from_defs(defs: &[ComponentDef]) -> Result<Self> {
        let components = defs
            .iter()
            .map(|d| {
                Ok(match d {
                    ComponentDef::Ydot { coupling } => Component {
                        ydot: Some(CouplingSpec::from_def(coupling)?),
                        y: None,
                    },
                    ComponentDef::Y { coupling } => Component {
                        ydot: None,
                        y: Some(CouplingSpec::from_def(coupling)?),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }
}

/// `v_eff² = Σ v_l²`, no counterterm.
pub fn reduce_ydot_family(list: &[CouplingSpec], qs: &QuadSettings) -> Result<Reduced> {
    let coupling = match list.len() {
        0 => CouplingSpec::zero(),
        1 => list[0].clone(),
        _ => CouplingSpec::sum(list),
    };
    let mu2 = mu_squared(&coupling, qs)?.value;
    Ok(Reduced {
        coupling,
        counterterm: Counterterm::default(),
        mu2,
        components: list.len(),
    })
}

/// `v_y²/ω²` with its counterterm. Convergence at `ω → 0` is decided from
/// the declared low-frequency exponent of `v_y²`.
fn y_to_ydot(v2: &CouplingSpec, qs: &QuadSettings) -> Result<(CouplingSpec, f64)> {
    if v2.is_zero() {
        return Ok((CouplingSpec::zero(), 0.0));
    }
    if !(v2.low_exponent > 1.0) {
        return Err(Error::Divergent {
            what: "counterterm",
            reason: format!(
                "∫ v₂²/ω² diverges at ω → 0: v₂² ~ ω^{} needs an exponent above 1",
                v2.low_exponent
            ),
        });
    }
    let eff = v2.times_power(-2.0);
    let r = integrate(|w| eff.v2(w), &eff.domain(1.5), qs);
    let r = r.require("counterterm", qs.tolerance(r.value))?;
    Ok((eff, r.value))
}

/// `v_eff² = v₁² + v₂²/ω²` and `Δμ² = ∫ v₂²/ω²`.
pub fn reduce_y_and_ydot(v1: &CouplingSpec, v2: &CouplingSpec, qs: &QuadSettings) -> Result<Reduced> {
    let (eff2, delta) = y_to_ydot(v2, qs)?;
    let parts: Vec<CouplingSpec> = [v1.clone(), eff2].into_iter().filter(|c| !c.is_zero()).collect();
    let mut r = reduce_ydot_family(&parts, qs)?;
    r.counterterm.delta_mu2 = delta;
    r.components = 1;
    Ok(r)
}

/// Composition of the two reductions over all components.
pub fn reduce_general(g: &GeneralCoupling, qs: &QuadSettings) -> Result<Reduced> {
    let mut parts = Vec::new();
    let mut delta = 0.0;
    for c in &g.components {
        if let Some(v1) = &c.ydot {
            if !v1.is_zero() {
                parts.push(v1.clone());
            }
        }
        if let Some(v2) = &c.y {
            let (eff, d) = y_to_ydot(v2, qs)?;
            if !eff.is_zero() {
                parts.push(eff);
            }
            delta += d;
        }
    }
    let mut r = reduce_ydot_family(&parts, qs)?;
    r.counterterm.delta_mu2 = delta;
    r.components = g.components.len();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DirectMedium, Permittivity};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn qs() -> QuadSettings {
        QuadSettings::default()
    }

    fn lor(scale: f64) -> CouplingSpec {
        CouplingSpec::benchmark_with(scale * 2.0 / PI, 1.0)
    }

    #[test]
    fn ydot_sum_rule() {
        let r = reduce_ydot_family(&[lor(0.5), lor(0.5)], &qs()).unwrap();
        for &w in &[0.0, 0.4, 3.0] {
            assert_relative_eq!(r.coupling.v2(w), (2.0 / PI) / (w * w + 1.0), max_relative = 1e-15);
        }
        assert_relative_eq!(r.mu2, 1.0, max_relative = 1e-15);
        let single = reduce_ydot_family(&[lor(1.0)], &qs()).unwrap();
        assert_relative_eq!(single.coupling.v2(0.7), lor(1.0).v2(0.7));
        let empty = reduce_ydot_family(&[], &qs()).unwrap();
        assert_eq!(empty.mu2, 0.0);
    }

    #[test]
    fn split_benchmark_recombines() {
        let third = lor(1.0 / 3.0);
        let r = reduce_ydot_family(&[third.clone(), third.clone(), third], &qs()).unwrap();
        let a = DirectMedium::new(r.coupling, qs()).unwrap();
        let b = DirectMedium::new(CouplingSpec::benchmark(), qs()).unwrap();
        for &w in &[0.05, 0.5, 1.0, 4.0] {
            let (ea, eb) = (a.eps_real(w).unwrap(), b.eps_real(w).unwrap());
            assert!((ea - eb).norm() <= 1e-10 * eb.norm());
        }
    }

    #[test]
    fn y_coupling_and_counterterm() {
        let id = reduce_y_and_ydot(&CouplingSpec::benchmark(), &CouplingSpec::zero(), &qs()).unwrap();
        assert_eq!(id.counterterm.delta_mu2, 0.0);
        assert_relative_eq!(id.coupling.v2(0.3), CouplingSpec::benchmark().v2(0.3));

        let v2 = CouplingSpec::benchmark().times_power(2.0);
        let r = reduce_y_and_ydot(&CouplingSpec::zero(), &v2, &qs()).unwrap();
        assert_relative_eq!(r.counterterm.delta_mu2, 1.0, max_relative = 1e-10);
        assert_relative_eq!(r.mu2, 1.0, max_relative = 1e-10);
        assert_relative_eq!(r.bare_mu2(), 0.0, epsilon = 1e-10);
        assert_relative_eq!(r.coupling.v2(0.6), CouplingSpec::benchmark().v2(0.6), max_relative = 1e-14);
    }

    #[test]
    fn divergent_counterterm_rejected() {
        let half = CouplingSpec::benchmark_with(1.0 / PI, 1.0);
        let err = reduce_y_and_ydot(&half, &half, &qs()).unwrap_err();
        assert!(matches!(err, Error::Divergent { .. }));
    }

    #[test]
    fn general_reduction_composes() {
        let v2 = CouplingSpec::benchmark().times_power(2.0);
        let one = GeneralCoupling {
            components: vec![Component {
                ydot: Some(lor(0.25)),
                y: Some(v2.clone()),
            }],
        };
        let g = reduce_general(&one, &qs()).unwrap();
        let s = reduce_y_and_ydot(&lor(0.25), &v2, &qs()).unwrap();
        assert_relative_eq!(g.mu2, s.mu2, max_relative = 1e-14);
        assert_relative_eq!(g.counterterm.delta_mu2, s.counterterm.delta_mu2, max_relative = 1e-14);

        let two = GeneralCoupling {
            components: vec![
                Component { ydot: Some(lor(0.3)), y: None },
                Component { ydot: Some(lor(0.7)), y: None },
            ],
        };
        let g = reduce_general(&two, &qs()).unwrap();
        let f = reduce_ydot_family(&[lor(0.3), lor(0.7)], &qs()).unwrap();
        assert_relative_eq!(g.mu2, f.mu2, max_relative = 1e-14);
        assert_eq!(g.counterterm.delta_mu2, 0.0);
    }

    #[test]
    fn mixed_family_reproduces_single_oscillator_eps() {
        let defs = vec![
            ComponentDef::Ydot {
                coupling: CouplingDef::Benchmark { g2: 1.0 / PI, m: 1.0 },
            },
            ComponentDef::Y {
                coupling: CouplingDef::Power {
                    power: 2.0,
                    inner: Box::new(CouplingDef::Benchmark { g2: 1.0 / PI, m: 1.0 }),
                },
            },
        ];
        let g = GeneralCoupling::from_defs(&defs).unwrap();
        let r = reduce_general(&g, &qs()).unwrap();
        assert_relative_eq!(r.counterterm.delta_mu2, 0.5, max_relative = 1e-10);
        let a = DirectMedium::new(r.coupling, qs()).unwrap();
        let b = DirectMedium::new(CouplingSpec::benchmark(), qs()).unwrap();
        for &w in &[0.02, 0.8, 1.0, 7.0] {
            let (ea, eb) = (a.eps_real(w).unwrap(), b.eps_real(w).unwrap());
            assert!((ea - eb).norm() <= 1e-8 * eb.norm(), "w = {w}");
            assert_relative_eq!(a.eps_imag_axis(w).unwrap(), b.eps_imag_axis(w).unwrap(), max_relative = 1e-8);
        }
    }
}
