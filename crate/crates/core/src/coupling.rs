//! Spectral coupling densities `v²(ω)` of the reservoir.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{integrate, Interval, QuadResult};
use crate::types::QuadSettings;

/// Serializable description of a coupling, as written in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingDef {
    /// `g2 m³ / (ω² + m²)`; `g2 = 2/π`, `m = 1` reproduces the benchmark medium.
    Benchmark {
        #[serde(default = "default_g2")]
        g2: f64,
        #[serde(default = "one")]
        m: f64,
    },
    /// Even pair of Lorentzians centred at `±center`.
    Lorentzian { amplitude: f64, center: f64, width: f64 },
    /// `amplitude · exp(−ω/scale)`.
    Exponential { amplitude: f64, scale: f64 },
    /// Monotone cubic interpolation of samples, with `v²(ω_last)(ω/ω_last)^{−tail_exponent}` beyond.
    Tabulated {
        omega: Vec<f64>,
        v2: Vec<f64>,
        tail_exponent: f64,
    },
    /// `ω^power · v²(ω)` of the inner coupling.
    Power { power: f64, inner: Box<CouplingDef> },
    /// Pointwise sum.
    Sum { parts: Vec<CouplingDef> },
    Zero,
    /// Closure-defined density; not constructible from a config file.
    #[serde(skip)]
    Custom { name: String },
}

fn default_g2() -> f64 {
    2.0 / PI
}

fn one() -> f64 {
    1.0
}

/// A coupling density `v²(ω) ≥ 0` on `[0, ∞)`, continued evenly to `ω < 0`.
///
/// Carries the algebraic exponents at both ends: `v² ~ ω^{low}` as `ω → 0`
/// and `v² ~ ω^{−tail}` as `ω → ∞` (`f64::INFINITY` for faster decay).
#[derive(Clone)]
pub struct CouplingSpec {
    def: CouplingDef,
    v2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub tail_exponent: f64,
    pub low_exponent: f64,
    /// Frequencies where `v²` has structure; used as quadrature breakpoints.
    pub scales: Vec<f64>,
    mu2_closed: Option<f64>,
}

impl fmt::Debug for CouplingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingSpec")
            .field("def", &self.def)
            .field("tail_exponent", &self.tail_exponent)
            .field("low_exponent", &self.low_exponent)
            .finish()
    }
}

impl CouplingSpec {
    pub fn benchmark() -> Self {
        Self::benchmark_with(2.0 / PI, 1.0)
    }

    pub fn benchmark_with(g2: f64, m: f64) -> Self {
        Self::from_def(&CouplingDef::Benchmark { g2, m }).expect("valid benchmark parameters")
    }

    pub fn zero() -> Self {
        Self::from_def(&CouplingDef::Zero).expect("zero coupling")
    }

    /// Wraps an arbitrary density with declared end exponents.
    pub fn custom<F>(name: &str, v2: F, low_exponent: f64, tail_exponent: f64, scales: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CouplingSpec {
            def: CouplingDef::Custom { name: name.to_string() },
            v2: Arc::new(v2),
            tail_exponent,
            low_exponent,
            scales,
            mu2_closed: None,
        }
    }

    pub fn from_def(def: &CouplingDef) -> Result<Self> {
        let spec = match def {
            CouplingDef::Benchmark { g2, m } => {
                let (g2, m) = (*g2, *m);
                positive("g2", g2, true)?;
                positive("m", m, false)?;
                CouplingSpec {
                    def: def.clone(),
                    v2: Arc::new(move |w: f64| g2 * m * m * m / (w * w + m * m)),
                    tail_exponent: 2.0,
                    low_exponent: 0.0,
                    scales: vec![m],
                    mu2_closed: Some(0.5 * PI * g2 * m * m),
                }
            }
            CouplingDef::Lorentzian {
                amplitude,
                center,
                width,
            } => {
                let (a, c, g) = (*amplitude, *center, *width);
                positive("amplitude", a, true)?;
                positive("center", c, true)?;
                positive("width", g, false)?;
                let mu2 = a * PI;
                CouplingSpec {
                    def: def.clone(),
                    v2: Arc::new(move |w: f64| a * (g / ((w - c).powi(2) + g * g) + g / ((w + c).powi(2) + g * g))),
                    tail_exponent: 2.0,
                    low_exponent: 0.0,
                    scales: [c - g, c, c + g].into_iter().filter(|x| *x > 0.0).collect(),
                    mu2_closed: Some(mu2),
                }
            }
            CouplingDef::Exponential { amplitude, scale } => {
                let (a, s) = (*amplitude, *scale);
                positive("amplitude", a, true)?;
                positive("scale", s, false)?;
                CouplingSpec {
                    def: def.clone(),
                    v2: Arc::new(move |w: f64| a * (-w.abs() / s).exp()),
                    tail_exponent: f64::INFINITY,
                    low_exponent: 0.0,
                    scales: vec![s, 8.0 * s],
                    mu2_closed: Some(a * s),
                }
            }
            CouplingDef::Tabulated {
                omega,
                v2,
                tail_exponent,
            } => {
                let table = Pchip::new(omega, v2)?;
                if !(*tail_exponent > 1.0) {
                    return Err(Error::Divergent {
                        what: "tabulated coupling",
                        reason: format!("tail exponent {tail_exponent} must exceed 1"),
                    });
                }
                let p = *tail_exponent;
                let scales = omega.clone();
                CouplingSpec {
                    def: def.clone(),
                    v2: Arc::new(move |w: f64| table.eval_with_tail(w.abs(), p)),
                    tail_exponent: p,
                    low_exponent: 0.0,
                    scales,
                    mu2_closed: None,
                }
            }
            CouplingDef::Power { power, inner } => {
                let inner = CouplingSpec::from_def(inner)?;
                inner.times_power(*power).with_def(def.clone())
            }
            CouplingDef::Sum { parts } => {
                let specs = parts.iter().map(CouplingSpec::from_def).collect::<Result<Vec<_>>>()?;
                CouplingSpec::sum(&specs).with_def(def.clone())
            }
            CouplingDef::Custom { name } => {
                return Err(Error::InvalidParameter {
                    name: "coupling",
                    reason: format!("custom coupling `{name}` has no serializable definition"),
                })
            }
            CouplingDef::Zero => CouplingSpec {
                def: def.clone(),
                v2: Arc::new(|_| 0.0),
                tail_exponent: f64::INFINITY,
                low_exponent: f64::INFINITY,
                scales: Vec::new(),
                mu2_closed: Some(0.0),
            },
        };
        Ok(spec)
    }

    fn with_def(mut self, def: CouplingDef) -> Self {
        self.def = def;
        self
    }

    pub fn def(&self) -> &CouplingDef {
        &self.def
    }

    /// `v²(ω)`, even in `ω`.
    pub fn v2(&self, omega: f64) -> f64 {
        (self.v2)(omega.abs())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.def, CouplingDef::Zero) || self.mu2_closed == Some(0.0)
    }

    /// Benchmark parameters `(g2, m)` if this is the closed-form family.
    pub fn benchmark_params(&self) -> Option<(f64, f64)> {
        match self.def {
            CouplingDef::Benchmark { g2, m } => Some((g2, m)),
            _ => None,
        }
    }

    /// `ω^power v²(ω)`.
    pub fn times_power(&self, power: f64) -> Self {
        let inner = self.v2.clone();
        CouplingSpec {
            def: CouplingDef::Power {
                power,
                inner: Box::new(self.def.clone()),
            },
            v2: Arc::new(move |w: f64| {
                let base = inner(w);
                if base == 0.0 {
                    0.0
                } else {
                    w.abs().powf(power) * base
                }
            }),
            tail_exponent: self.tail_exponent - power,
            low_exponent: self.low_exponent + power,
            scales: self.scales.clone(),
            mu2_closed: None,
        }
    }

    /// Pointwise sum of densities.
    pub fn sum(parts: &[CouplingSpec]) -> Self {
        let fs: Vec<_> = parts.iter().map(|p| p.v2.clone()).collect();
        let mut scales: Vec<f64> = parts.iter().flat_map(|p| p.scales.iter().copied()).collect();
        scales.sort_by(f64::total_cmp);
        scales.dedup();
        let mu2 = parts.iter().map(|p| p.mu2_closed).sum::<Option<f64>>();
        CouplingSpec {
            def: CouplingDef::Sum {
                parts: parts.iter().map(|p| p.def.clone()).collect(),
            },
            v2: Arc::new(move |w: f64| fs.iter().map(|f| f(w)).sum()),
            tail_exponent: parts.iter().map(|p| p.tail_exponent).fold(f64::INFINITY, f64::min),
            low_exponent: parts.iter().map(|p| p.low_exponent).fold(f64::INFINITY, f64::min),
            scales,
            mu2_closed: if parts.is_empty() { Some(0.0) } else { mu2 },
        }
    }

    /// Quadrature domain `[0, ∞)` adapted to this coupling, for integrands
    /// decaying at least like `ω^{−tail}`.
    pub fn domain(&self, min_tail: f64) -> Interval {
        let p = self.tail_exponent.min(8.0).max(min_tail);
        Interval::semi_inf(0.0).with_breaks(self.scales.iter().copied()).with_tail(p)
    }
}

fn positive(name: &'static str, x: f64, allow_zero: bool) -> Result<()> {
    let ok = x.is_finite() && (x > 0.0 || (allow_zero && x == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("got {x}"),
        })
    }
}

/// `μ² = ∫₀^∞ v²(ω) dω`.
pub fn mu_squared(c: &CouplingSpec, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    if let Some(m) = c.mu2_closed {
        return Ok(QuadResult::exact(m));
    }
    if !(c.tail_exponent > 1.0) {
        return Err(Error::Divergent {
            what: "mu squared",
            reason: format!("v² decays like ω^-{} at infinity", c.tail_exponent),
        });
    }
    let r = integrate(|w| c.v2(w), &c.domain(1.5), qs);
    let tol = qs.tolerance(r.value);
    r.require("mu squared", tol)
}

/// `ω₁ = √(ω₀² + μ²)`.
pub fn omega1(c: &CouplingSpec, omega0: f64, qs: &QuadSettings) -> Result<f64> {
    crate::error::check_non_negative("omega0", omega0)?;
    Ok((omega0 * omega0 + mu_squared(c, qs)?.value).sqrt())
}

/// Fritsch–Carlson monotone cubic interpolant.
#[derive(Debug, Clone)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidParameter {
            name: "tabulated coupling",
            reason: reason.to_string(),
        };
        if x.len() != y.len() || x.len() < 2 {
            return Err(bad("need at least two (omega, v2) samples of equal length"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x[0] < 0.0 {
            return Err(bad("omega samples must be non-negative and strictly increasing"));
        }
        if y.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(bad("v2 samples must be finite and non-negative"));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if s[i - 1] * s[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
            }
        }
        let end = |h0: f64, h1: f64, s0: f64, s1: f64| {
            let mut e = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
            if e * s0 <= 0.0 {
                e = 0.0;
            } else if s0 * s1 <= 0.0 && e.abs() > 3.0 * s0.abs() {
                e = 3.0 * s0;
            }
            e
        };
        if n == 2 {
            d[0] = s[0];
            d[1] = s[0];
        } else {
            d[0] = end(h[0], h[1], s[0], s[1]);
            d[n - 1] = end(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
        }
        Ok(Pchip {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        })
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|xi| *xi <= t).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        (h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]).max(0.0)
    }

    fn eval_with_tail(&self, w: f64, p: f64) -> f64 {
        let last = *self.x.last().expect("non-empty");
        if w <= self.x[0] {
            self.y[0]
        } else if w >= last {
            *self.y.last().expect("non-empty") * (w / last).powf(-p)
        } else {
            self.eval(w)
        }
    }
}
