//! Run configuration: a JSON document, with command-line flags applied on top.

use std::path::{Path, PathBuf};

use polariton_casimir::coupling::{CouplingDef, CouplingSpec};
use polariton_casimir::reduction::{reduce_general, ComponentDef, GeneralCoupling};
use polariton_casimir::spectral::{Atom, AtomMedium, DirectMedium, Permittivity};
use polariton_casimir::{PhysParams, QuadSettings};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelSel {
    D,
    Hb,
    Both,
}

impl ModelSel {
    pub fn has_d(self) -> bool {
        matches!(self, ModelSel::D | ModelSel::Both)
    }

    pub fn has_hb(self) -> bool {
        matches!(self, ModelSel::Hb | ModelSel::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    A,
    Omega,
    Alpha,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::A => "a",
            Variable::Omega => "omega",
            Variable::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: Variable,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Sweep {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.from.is_finite() && self.to.is_finite() && self.from > 0.0 && self.to > self.from) {
            return Err(format!(
                "sweep bounds must be positive and ordered, got from = {}, to = {}",
                self.from, self.to
            ));
        }
        if self.points < 2 {
            return Err(format!("sweep needs at least 2 points, got {}", self.points));
        }
        Ok(())
    }

    /// Grid values; the end points are exact.
    pub fn grid(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == last {
                    return self.to;
                }
                let t = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.from + t * (self.to - self.from),
                    Spacing::Log => (self.from.ln() + t * (self.to / self.from).ln()).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// `None` writes to stdout.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default = "csv")]
    pub format: Format,
}

fn csv() -> Format {
    Format::Csv
}

impl Default for Output {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSel,
    pub params: PhysParams,
    /// Reservoir coupling of the atom; defaults to the benchmark family with
    /// `params.g2` and `params.m`.
    pub coupling: Option<CouplingDef>,
    /// Model D medium given as a reservoir family to be reduced. Without it,
    /// model D uses the dielectric function of the two-stage medium.
    pub d_components: Option<Vec<ComponentDef>>,
    pub sweep: Option<Sweep>,
    /// Defaults depend on the verb.
    pub quad: Option<QuadSettings>,
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSel::Both,
            params: PhysParams::default(),
            coupling: None,
            d_components: None,
            sweep: None,
            quad: None,
            output: Output::default(),
        }
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<ModelSel>,
    pub a: Option<f64>,
    pub alpha: Option<f64>,
    pub points: Option<usize>,
    pub out: Option<PathBuf>,
    pub rel_tol: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Applies the flags, fills in the verb's default sweep and validates.
    pub fn resolve(mut self, o: &Overrides, default_sweep: Option<Sweep>, default_quad: QuadSettings) -> Result<Self, String> {
        let quad = self.quad.get_or_insert(default_quad);
        if let Some(m) = o.model {
            self.model = m;
        }
        if let Some(a) = o.a {
            self.params.a = a;
        }
        if let Some(alpha) = o.alpha {
            self.params.alpha = alpha;
        }
        if let Some(r) = o.rel_tol {
            quad.rel_tol = r;
        }
        if let Some(p) = &o.out {
            self.output.path = Some(p.clone());
        }
        if self.sweep.is_none() {
            self.sweep = default_sweep;
        }
        if let (Some(s), Some(p)) = (self.sweep.as_mut(), o.points) {
            s.points = p;
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
            let clash = match s.variable {
                Variable::A => o.a.is_some(),
                Variable::Alpha => o.alpha.is_some(),
                Variable::Omega => false,
            };
            if clash {
                return Err(format!("--{0} conflicts with a sweep over {0}", s.variable.name()));
            }
        }
        self.params.validate().map_err(|e| e.to_string())?;
        self.quad().validate().map_err(|e| e.to_string())?;
        Ok(self)
    }

    pub fn quad(&self) -> QuadSettings {
        self.quad.expect("resolved config has quadrature settings")
    }

    pub fn sweep(&self) -> Sweep {
        self.sweep.expect("resolved config has a sweep")
    }

    /// Parameters at one sweep value.
    pub fn params_at(&self, value: f64) -> PhysParams {
        let mut p = self.params;
        match self.sweep().variable {
            Variable::A => p.a = value,
            Variable::Alpha => p.alpha = value,
            Variable::Omega => {}
        }
        p
    }

    pub fn atom_coupling(&self) -> CouplingDef {
        self.coupling.clone().unwrap_or(CouplingDef::Benchmark {
            g2: self.params.g2,
            m: self.params.m,
        })
    }

    pub fn atom_medium(&self, alpha: f64) -> Result<AtomMedium, String> {
        let spec = CouplingSpec::from_def(&self.atom_coupling()).map_err(|e| e.to_string())?;
        let atom = Atom::from_coupling(&spec, self.params.omega0, &self.quad()).map_err(|e| e.to_string())?;
        AtomMedium::new(atom, alpha).map_err(|e| e.to_string())
    }

    /// Model D medium: the reduced family if given, else `None` (use the
    /// two-stage medium's dielectric function).
    pub fn d_medium(&self) -> Result<Option<DirectMedium>, String> {
        let Some(defs) = &self.d_components else {
            return Ok(None);
        };
        let g = GeneralCoupling::from_defs(defs).map_err(|e| e.to_string())?;
        let r = reduce_general(&g, &self.quad()).map_err(|e| e.to_string())?;
        let m = DirectMedium::new(r.coupling, self.quad()).map_err(|e| e.to_string())?;
        if m.plasma_sq() == 0.0 {
            return Err("d_components reduce to a zero coupling".into());
        }
        Ok(Some(m))
    }
}
