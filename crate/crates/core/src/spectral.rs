//! Medium response functions: the dielectric function `ε(ω)`, the atom
//! response `σ(ω)` and propagator `Q(ω)`, dressed couplings, field
//! propagators, and the consistency conditions of both diagonalizations.
//!
//! A response generated by an even coupling density `h` has the form
//! `χ(ω) = (1/2ω) ∫_{−∞}^{∞} h(ω′) dω′/(ω′ − ω − i0)`, i.e.
//! `PV∫₀^∞ h/(ω′² − ω²) + iπ h(ω)/(2ω)` on the real axis and
//! `∫₀^∞ h/(ω′² + ξ²)` at `ω = iξ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::coupling::{mu_squared, CouplingSpec};
use crate::error::{Error, Result};
use crate::numerics::{
    integrate, polynomial_roots, principal_value, Interval, Multi, Poly, QuadResult,
};
use crate::types::{Model, ModeContext, QuadSettings};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn require_nonzero(omega: f64) -> Result<()> {
    if omega == 0.0 || !omega.is_finite() {
        Err(Error::SingularPoint {
            at: format!("omega = {omega}"),
            what: "response functions are singular at zero frequency",
        })
    } else {
        Ok(())
    }
}

/// Imaginary-axis data needed by the rotated energy integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagAxis {
    /// `ξ² ε(iξ)`, finite at `ξ = 0`.
    pub xi2_eps: f64,
    /// `ξ² (ε(iξ) − 1)`, kept separately to avoid cancellation.
    pub xi2_chi: f64,
    /// `d/dω [ω (ε(ω) − 1)]` at `ω = iξ`; real.
    pub disp_deriv: f64,
}

/// A dielectric function analytic in the upper half plane.
pub trait Permittivity: Send + Sync {
    /// `ε(ω + i0)` for real `ω ≠ 0`.
    fn eps_real(&self, omega: f64) -> Result<Complex64>;

    /// `ξ²ε(iξ)` and the dispersion derivative at `ω = iξ`, `ξ ≥ 0`.
    fn imag_axis(&self, xi: f64) -> Result<ImagAxis>;

    /// `lim ξ²(ε(iξ) − 1)` as `ξ → ∞`: the integrated field coupling `∫v_D²`.
    fn plasma_sq(&self) -> f64;

    /// Frequencies where the response has structure.
    fn scales(&self) -> Vec<f64>;

    /// `ε` at complex argument. The default handles the real axis (with the
    /// reflection `ε(−ω) = ε*(ω)`) and the positive imaginary axis.
    fn eps(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            require_nonzero(z.re)?;
            if z.re > 0.0 {
                self.eps_real(z.re)
            } else {
                Ok(self.eps_real(-z.re)?.conj())
            }
        } else if z.re == 0.0 && z.im > 0.0 {
            Ok(c(self.imag_axis(z.im)?.xi2_eps / (z.im * z.im), 0.0))
        } else {
            Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("{z} is off the real and positive imaginary axes"),
            })
        }
    }

    /// `ε(iξ)` for `ξ > 0`.
    fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        require_nonzero(xi)?;
        Ok(self.imag_axis(xi)?.xi2_eps / (xi * xi))
    }

    /// `d/dω[ω(ε − 1)]` at `ω = iξ`, `ξ > 0`.
    fn dispersion_derivative(&self, xi: f64) -> Result<f64> {
        require_nonzero(xi)?;
        Ok(self.imag_axis(xi)?.disp_deriv)
    }

    fn is_vacuum(&self) -> bool {
        self.plasma_sq() == 0.0
    }
}

/// Vacuum, `ε ≡ 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Vacuum;

impl Permittivity for Vacuum {
    fn eps_real(&self, omega: f64) -> Result<Complex64> {
        require_nonzero(omega)?;
        Ok(c(1.0, 0.0))
    }
    fn imag_axis(&self, xi: f64) -> Result<ImagAxis> {
        Ok(ImagAxis {
            xi2_eps: xi * xi,
            xi2_chi: 0.0,
            disp_deriv: 0.0,
        })
    }
    fn plasma_sq(&self) -> f64 {
        0.0
    }
    fn scales(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Response `χ` generated by an even density `h` (see module docs),
/// evaluated by quadrature.
#[derive(Debug, Clone)]
pub struct Susceptibility {
    pub density: CouplingSpec,
    pub qs: QuadSettings,
}

/// Imaginary-axis integrals of a [`Susceptibility`].
#[derive(Debug, Clone, Copy)]
pub struct ChiImag {
    /// `ξ² χ(iξ)`.
    pub xi2_chi: f64,
    /// `ξ³ dχ(iξ)/dξ`.
    pub xi3_dchi: f64,
    /// `d/dξ [ξ χ(iξ)]`.
    pub d_xi_chi: f64,
}

impl Susceptibility {
    pub fn new(density: CouplingSpec, qs: QuadSettings) -> Self {
        Self { density, qs }
    }

    fn domain(&self, extra: f64) -> Interval {
        let mut d = self.density.domain(1.5);
        if extra > 0.0 {
            d.breaks.push(extra);
        }
        d
    }

    fn checked<T: crate::numerics::QuadValue>(&self, r: QuadResult<T>, what: &'static str) -> Result<T> {
        let tol = self.qs.tolerance(r.value.norm());
        Ok(r.require(what, tol)?.value)
    }

    /// `χ(ω + i0)` for real `ω > 0`.
    pub fn real_axis(&self, omega: f64) -> Result<Complex64> {
        require_nonzero(omega)?;
        let w = omega.abs();
        if self.density.is_zero() {
            return Ok(c(0.0, 0.0));
        }
        let h = |x: f64| self.density.v2(x) / (x + w);
        let pv = principal_value(h, w, &self.domain(w), &self.qs)?;
        let re = self.checked(pv, "principal-value response")?;
        let im = PI * self.density.v2(w) / (2.0 * w);
        Ok(if omega > 0.0 { c(re, im) } else { c(re, -im) })
    }

    /// Imaginary-axis values at `ξ ≥ 0`.
    pub fn imag_axis(&self, xi: f64) -> Result<ChiImag> {
        if self.density.is_zero() {
            return Ok(ChiImag {
                xi2_chi: 0.0,
                xi3_dchi: 0.0,
                d_xi_chi: 0.0,
            });
        }
        let x2 = xi * xi;
        // Below the coupling's structure the integrands peak at ω ~ ξ, and the
        // third one integrates to zero against a constant. Subtracting h(0)
        // and adding its integrals back in closed form removes the cancellation.
        let lowest = self.density.scales.iter().copied().fold(1.0, f64::min);
        let h0 = if self.density.low_exponent == 0.0 && xi > 0.0 && xi < 0.5 * lowest {
            self.density.v2(0.0)
        } else {
            0.0
        };
        let f = |w: f64| {
            let h = self.density.v2(w) - h0;
            let d = w * w + x2;
            Multi([x2 * h / d, -2.0 * x2 * x2 * h / (d * d), h * (w * w - x2) / (d * d)])
        };
        let mut dom = self.domain(xi);
        if h0 != 0.0 {
            dom = dom.with_breaks([0.1 * xi, 10.0 * xi, 100.0 * xi]).with_tail(2.0);
        }
        // Rounding in h(ω) − h(0) near ω ~ ξ leaves a noise floor ~ ε h(0)/ξ.
        let qs = QuadSettings {
            abs_tol: self.qs.abs_tol.max(64.0 * f64::EPSILON * h0.abs() / xi.max(f64::MIN_POSITIVE)),
            ..self.qs
        };
        let r = integrate(f, &dom, &qs);
        let v = Susceptibility { density: self.density.clone(), qs }.checked(r, "imaginary-axis response")?;
        let half_pi_xi = 0.5 * PI * xi;
        Ok(ChiImag {
            xi2_chi: v.0[0] + h0 * half_pi_xi,
            xi3_dchi: v.0[1] - h0 * half_pi_xi,
            d_xi_chi: v.0[2],
        })
    }

    /// `χ(iξ)` for `ξ > 0`.
    pub fn chi_imag(&self, xi: f64) -> Result<f64> {
        require_nonzero(xi)?;
        let r = integrate(|w: f64| self.density.v2(w) / (w * w + xi * xi), &self.domain(xi), &self.qs);
        self.checked(r, "imaginary-axis response")
    }
}

/// Model-D medium: `ε = 1 + χ` with the field–reservoir density `v_D²`.
#[derive(Debug, Clone)]
pub struct DirectMedium {
    pub chi: Susceptibility,
    mu2: f64,
}

impl DirectMedium {
    pub fn new(coupling: CouplingSpec, qs: QuadSettings) -> Result<Self> {
        let mu2 = mu_squared(&coupling, &qs)?.value;
        Ok(Self {
            chi: Susceptibility::new(coupling, qs),
            mu2,
        })
    }

    pub fn coupling(&self) -> &CouplingSpec {
        &self.chi.density
    }
}

impl Permittivity for DirectMedium {
    fn eps_real(&self, omega: f64) -> Result<Complex64> {
        Ok(1.0 + self.chi.real_axis(omega)?)
    }
    fn imag_axis(&self, xi: f64) -> Result<ImagAxis> {
        let r = self.chi.imag_axis(xi)?;
        Ok(ImagAxis {
            xi2_eps: xi * xi + r.xi2_chi,
            xi2_chi: r.xi2_chi,
            disp_deriv: r.d_xi_chi,
        })
    }
    fn plasma_sq(&self) -> f64 {
        self.mu2
    }
    fn scales(&self) -> Vec<f64> {
        self.chi.density.scales.clone()
    }
}

/// Closed-form atom response for the benchmark reservoir
/// `v² = g2 m³/(ω² + m²)`: `σ(ω) = 1 − μ²/(ω(ω + im))` with `μ² = π g2 m²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkAtom {
    pub m: f64,
    pub g2: f64,
    pub omega0: f64,
}

impl BenchmarkAtom {
    pub fn standard() -> Self {
        Self {
            m: 1.0,
            g2: 2.0 / PI,
            omega0: 0.0,
        }
    }

    pub fn mu2(&self) -> f64 {
        0.5 * PI * self.g2 * self.m * self.m
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        1.0 - self.mu2() / (z * (z + c(0.0, self.m)))
    }

    /// `Q(z) = (z + im) / ((ω₀² − z²)(z + im) + μ² z)`.
    pub fn q(&self, z: Complex64) -> Complex64 {
        let zm = z + c(0.0, self.m);
        zm / ((self.omega0 * self.omega0 - z * z) * zm + self.mu2() * z)
    }

    /// Analytic continuation of `Q*(ω)` from the real axis.
    pub fn q_conj(&self, z: Complex64) -> Complex64 {
        self.q(z.conj()).conj()
    }

    /// Numerator and denominator of `Q` in powers of `z` (lowest first).
    pub fn q_poly(&self) -> (Poly, Poly) {
        let (m, w0sq, mu2) = (self.m, self.omega0 * self.omega0, self.mu2());
        let num = Poly(vec![c(0.0, m), c(1.0, 0.0)]);
        let den = Poly(vec![c(0.0, m * w0sq), c(w0sq + mu2, 0.0), c(0.0, -m), c(-1.0, 0.0)]);
        (num, den)
    }

    /// `Q(iξ)`, real.
    pub fn q_imag(&self, xi: f64) -> f64 {
        let (m, w0sq, mu2) = (self.m, self.omega0 * self.omega0, self.mu2());
        (xi + m) / ((w0sq + xi * xi) * (xi + m) + mu2 * xi)
    }

    /// `ξ² Q(iξ)` and `d/dξ[ξ Q(iξ)]`.
    fn q_imag_parts(&self, xi: f64) -> (f64, f64) {
        let (m, w0sq, mu2) = (self.m, self.omega0 * self.omega0, self.mu2());
        let n = xi * xi + m * xi;
        let dn = xi * xi * xi + m * xi * xi + (w0sq + mu2) * xi + w0sq * m;
        let n1 = 2.0 * xi + m;
        let dn1 = 3.0 * xi * xi + 2.0 * m * xi + w0sq + mu2;
        (xi * n / dn, (n1 * dn - n * dn1) / (dn * dn))
    }
}

/// Atom response computed from an arbitrary reservoir density by quadrature.
#[derive(Debug, Clone)]
pub struct QuadratureAtom {
    pub sigma_chi: Susceptibility,
    pub omega0: f64,
    mu2: f64,
}

impl QuadratureAtom {
    pub fn new(coupling: CouplingSpec, omega0: f64, qs: QuadSettings) -> Result<Self> {
        crate::error::check_non_negative("omega0", omega0)?;
        let mu2 = mu_squared(&coupling, &qs)?.value;
        Ok(Self {
            sigma_chi: Susceptibility::new(coupling, qs),
            omega0,
            mu2,
        })
    }
}

/// Response of the atom oscillator dressed by its reservoir.
#[derive(Debug, Clone)]
pub enum Atom {
    Benchmark(BenchmarkAtom),
    Quadrature(QuadratureAtom),
}

impl Atom {
    pub fn benchmark() -> Self {
        Atom::Benchmark(BenchmarkAtom::standard())
    }

    /// Closed form for the benchmark family, quadrature otherwise.
    pub fn from_coupling(coupling: &CouplingSpec, omega0: f64, qs: &QuadSettings) -> Result<Self> {
        match coupling.benchmark_params() {
            Some((g2, m)) => {
                crate::error::check_non_negative("omega0", omega0)?;
                Ok(Atom::Benchmark(BenchmarkAtom { m, g2, omega0 }))
            }
            None => Ok(Atom::Quadrature(QuadratureAtom::new(coupling.clone(), omega0, *qs)?)),
        }
    }

    pub fn omega0(&self) -> f64 {
        match self {
            Atom::Benchmark(b) => b.omega0,
            Atom::Quadrature(q) => q.omega0,
        }
    }

    pub fn mu2(&self) -> f64 {
        match self {
            Atom::Benchmark(b) => b.mu2(),
            Atom::Quadrature(q) => q.mu2,
        }
    }

    pub fn omega1(&self) -> f64 {
        (self.omega0().powi(2) + self.mu2()).sqrt()
    }

    /// Reservoir density `v²(ω)`.
    pub fn v2(&self, omega: f64) -> f64 {
        match self {
            Atom::Benchmark(b) => b.g2 * b.m.powi(3) / (omega * omega + b.m * b.m),
            Atom::Quadrature(q) => q.sigma_chi.density.v2(omega),
        }
    }

    pub fn coupling(&self) -> CouplingSpec {
        match self {
            Atom::Benchmark(b) => CouplingSpec::benchmark_with(b.g2, b.m),
            Atom::Quadrature(q) => q.sigma_chi.density.clone(),
        }
    }

    pub fn scales(&self) -> Vec<f64> {
        match self {
            Atom::Benchmark(b) => vec![b.m, self.omega1()],
            Atom::Quadrature(q) => {
                let mut s = q.sigma_chi.density.scales.clone();
                s.push(self.omega1());
                s
            }
        }
    }

    /// `σ(ω + i0)` for real `ω ≠ 0`.
    pub fn sigma(&self, omega: f64) -> Result<Complex64> {
        require_nonzero(omega)?;
        match self {
            Atom::Benchmark(b) => Ok(b.sigma(c(omega, 0.0))),
            Atom::Quadrature(q) => Ok(1.0 + q.sigma_chi.real_axis(omega)?),
        }
    }

    /// `Q(ω + i0) = 1/(ω₀² − ω²σ(ω))` for real `ω ≠ 0`.
    pub fn q_prop(&self, omega: f64) -> Result<Complex64> {
        require_nonzero(omega)?;
        match self {
            Atom::Benchmark(b) => Ok(b.q(c(omega, 0.0))),
            Atom::Quadrature(q) => {
                let s = 1.0 + q.sigma_chi.real_axis(omega)?;
                Ok(1.0 / (q.omega0 * q.omega0 - omega * omega * s))
            }
        }
    }

    /// `σ(iξ)`, `ξ > 0`.
    pub fn sigma_imag(&self, xi: f64) -> Result<f64> {
        require_nonzero(xi)?;
        match self {
            Atom::Benchmark(b) => Ok(b.sigma(c(0.0, xi)).re),
            Atom::Quadrature(q) => Ok(1.0 + q.sigma_chi.chi_imag(xi)?),
        }
    }

    /// `ξ² Q(iξ)` and `d/dξ[ξ Q(iξ)]`, `ξ ≥ 0`.
    pub fn q_imag_parts(&self, xi: f64) -> Result<(f64, f64)> {
        match self {
            Atom::Benchmark(b) => Ok(b.q_imag_parts(xi)),
            Atom::Quadrature(q) => {
                let w0sq = q.omega0 * q.omega0;
                let r = q.sigma_chi.imag_axis(xi)?;
                let x2s = xi * xi + r.xi2_chi;
                let den = w0sq + x2s;
                if den == 0.0 {
                    // ω₀ = 0 and ξ = 0 with σ(0) finite.
                    let s0 = 1.0 + q.sigma_chi.chi_imag(f64::MIN_POSITIVE.sqrt())?;
                    return Ok((1.0 / s0, 1.0 / s0));
                }
                let deriv = (w0sq - x2s - r.xi3_dchi) / (den * den);
                Ok((xi * xi / den, deriv))
            }
        }
    }
}

/// Two-stage medium: `ε(ω) = 1 + α² Q(ω)`.
#[derive(Debug, Clone)]
pub struct AtomMedium {
    pub atom: Atom,
    pub alpha: f64,
}

impl AtomMedium {
    pub fn new(atom: Atom, alpha: f64) -> Result<Self> {
        crate::error::check_non_negative("alpha", alpha)?;
        Ok(Self { atom, alpha })
    }

    /// The benchmark medium at coupling `alpha`.
    pub fn benchmark(alpha: f64) -> Self {
        Self {
            atom: Atom::benchmark(),
            alpha,
        }
    }

    /// `ε*(z)` continued off the real axis (closed form only).
    pub fn eps_conj_complex(&self, z: Complex64) -> Option<Complex64> {
        match &self.atom {
            Atom::Benchmark(b) => Some(1.0 + self.alpha * self.alpha * b.q_conj(z)),
            Atom::Quadrature(_) => None,
        }
    }
}

impl Permittivity for AtomMedium {
    fn eps_real(&self, omega: f64) -> Result<Complex64> {
        Ok(1.0 + self.alpha * self.alpha * self.atom.q_prop(omega)?)
    }

    fn imag_axis(&self, xi: f64) -> Result<ImagAxis> {
        let a2 = self.alpha * self.alpha;
        if a2 == 0.0 {
            return Vacuum.imag_axis(xi);
        }
        let (x2q, dq) = self.atom.q_imag_parts(xi)?;
        Ok(ImagAxis {
            xi2_eps: xi * xi + a2 * x2q,
            xi2_chi: a2 * x2q,
            disp_deriv: a2 * dq,
        })
    }

    fn plasma_sq(&self) -> f64 {
        self.alpha * self.alpha
    }

    fn scales(&self) -> Vec<f64> {
        self.atom.scales()
    }

    fn eps(&self, z: Complex64) -> Result<Complex64> {
        match &self.atom {
            Atom::Benchmark(b) => {
                if z == c(0.0, 0.0) {
                    return require_nonzero(0.0).map(|_| c(1.0, 0.0));
                }
                let v = 1.0 + self.alpha * self.alpha * b.q(z);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::SingularPoint {
                        at: format!("{z}"),
                        what: "pole of the dielectric function",
                    })
                }
            }
            Atom::Quadrature(_) => {
                if z.im == 0.0 {
                    require_nonzero(z.re)?;
                    if z.re > 0.0 {
                        self.eps_real(z.re)
                    } else {
                        Ok(self.eps_real(-z.re)?.conj())
                    }
                } else if z.re == 0.0 && z.im > 0.0 {
                    Ok(c(self.imag_axis(z.im)?.xi2_eps / (z.im * z.im), 0.0))
                } else {
                    Err(Error::InvalidParameter {
                        name: "omega",
                        reason: format!("{z} is off the real and positive imaginary axes"),
                    })
                }
            }
        }
    }
}

/// `ε(ω) = 1 − α²(ω + i)/(ω(ω² − 1 + iω))`, the benchmark dielectric function.
pub fn epsilon_benchmark(omega: Complex64, alpha: f64) -> Result<Complex64> {
    AtomMedium::benchmark(alpha).eps(omega)
}

/// Prefactor convention of the dressed-coupling representation of `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HilbertConvention {
    /// `(k₁/2ω) ∫_{−∞}^{∞}`; consistent with `Im ε = π k₁|V₁|²/(2ω²)`.
    #[default]
    Half,
    /// `(k₁/ω) ∫_{−∞}^{∞}`, kept for comparison.
    Full,
}

/// `k₁|V₁(ω)|²` for the two-stage model at real `ω > 0`, from the
/// first-stage dressing `V₁ = −iΛωVQ*`, `V² = v²ω/ω₁`.
pub fn k1_v1_squared(medium: &AtomMedium, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("must be positive, got {omega}"),
        });
    }
    let q = medium.atom.q_prop(omega)?;
    Ok(medium.alpha.powi(2) * omega.powi(3) * medium.atom.v2(omega) * q.norm_sqr())
}

/// `|V₁ₙ(ω)|²`.
pub fn v1_squared(ctx: &ModeContext, medium: &AtomMedium, omega: f64) -> Result<f64> {
    Ok(k1_v1_squared(medium, omega)? / ctx.k1)
}

/// Unit phase of `V₁ₙ(ω) = −iΛωV(ω)Q*(ω)` (v real).
pub fn v1_phase(medium: &AtomMedium, omega: f64) -> Result<Complex64> {
    let q = medium.atom.q_prop(omega)?;
    let p = c(0.0, -1.0) * q.conj();
    Ok(p / p.norm())
}

/// `ε(ω)` rebuilt from the dressed coupling of mode `ctx`:
/// `1 + (k₁/2ω) ∫_{−∞}^{∞} (dω′/ω′) |V₁(ω′)|²/(ω′ − ω − i0)` (Half).
pub fn epsilon(
    omega: f64,
    ctx: &ModeContext,
    medium: &AtomMedium,
    convention: HilbertConvention,
    qs: &QuadSettings,
) -> Result<Complex64> {
    require_nonzero(omega)?;
    let (ctx_c, med) = (*ctx, medium.clone());
    let h = move |w: f64| {
        if w == 0.0 {
            0.0
        } else {
            ctx_c.k1 * v1_squared(&ctx_c, &med, w.abs()).unwrap_or(f64::NAN) / w.abs()
        }
    };
    let density = CouplingSpec::custom("dressed field coupling", h, 2.0, 4.0, medium.scales());
    let chi = Susceptibility::new(density, *qs).real_axis(omega)?;
    Ok(match convention {
        HilbertConvention::Half => 1.0 + chi,
        HilbertConvention::Full => 1.0 + 2.0 * chi,
    })
}

/// `Pₙ(ω) = 1/(kₙ² − ε(ω)ω²)` on the real axis.
pub fn propagator<P: Permittivity + ?Sized>(k: f64, eps: &P, omega: f64) -> Result<Complex64> {
    let e = eps.eps_real(omega)?;
    Ok(1.0 / ((k - omega) * (k + omega) - (e - 1.0) * omega * omega))
}

/// `Pₙ(iξ) = 1/(kₙ² + ξ²ε(iξ))`, real and positive.
pub fn propagator_imag<P: Permittivity + ?Sized>(k: f64, eps: &P, xi: f64) -> Result<f64> {
    Ok(1.0 / (k * k + eps.imag_axis(xi)?.xi2_eps))
}

/// Free propagator `1/(k² − z²)` at complex `z` (real axis or `z = iξ`).
pub fn propagator_free(k: f64, z: Complex64) -> Complex64 {
    1.0 / ((k - z) * (k + z))
}

/// One inequality of the consistency conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageCheck {
    pub stage: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    /// Holds with equality (within tolerance): allowed but without margin.
    pub marginal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub checks: Vec<StageCheck>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.margin >= 0.0 || c.marginal)
    }
}

fn stage(name: &'static str, lhs: f64, rhs: f64, tol: f64, strict: bool) -> Result<StageCheck> {
    let margin = rhs - lhs;
    let marginal = margin.abs() <= tol;
    let ok = if strict { margin > tol || (lhs == 0.0 && rhs >= 0.0) } else { margin > -tol };
    if ok || (marginal && !strict) {
        Ok(StageCheck {
            stage: name,
            lhs,
            rhs,
            margin,
            marginal,
        })
    } else {
        Err(Error::Consistency {
            stage: name,
            lhs,
            rhs,
        })
    }
}

/// Model D: `∫v_D² < k₁ₙ²` (no propagator pole on the imaginary axis).
/// `ctx.k1` carries whatever mass term the Hamiltonian actually has, so a
/// missing counterterm shows up here.
pub fn check_consistency_d(coupling: &CouplingSpec, ctx: &ModeContext, qs: &QuadSettings) -> Result<ConsistencyReport> {
    let lhs = integrate(|w| coupling.v2(w), &coupling.domain(1.5), qs);
    let tol = 10.0 * qs.tolerance(lhs.value) + lhs.err;
    let check = stage("D", lhs.value, ctx.k1 * ctx.k1, tol, true)?;
    Ok(ConsistencyReport { checks: vec![check] })
}

/// Model HB: stage 1 `∫(dω/ω)V² = μ²/ω₁ ≤ ω₁` and stage 2
/// `∫(dω/ω)|V₁ₙ|² = α²/k₁ₙ < k₁ₙ`, both by quadrature. Stage 1 holds with
/// equality when `ω₀ = 0`.
pub fn check_consistency_hb(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<ConsistencyReport> {
    let atom = &medium.atom;
    let w1 = atom.omega1();
    let coupling = atom.coupling();
    let mut checks = Vec::new();
    if w1 > 0.0 {
        let s1 = integrate(|w| coupling.v2(w) / w1, &coupling.domain(1.5), qs);
        let tol = 10.0 * qs.tolerance(w1) + s1.err;
        checks.push(stage("HB stage 1", s1.value, w1, tol, false)?);
    } else {
        checks.push(stage("HB stage 1", 0.0, 0.0, 0.0, false)?);
    }
    if medium.alpha > 0.0 {
        let mut dom = Interval::semi_inf(0.0).with_breaks(medium.scales()).with_tail(4.0);
        dom.breaks.push(ctx.k1);
        let s2 = integrate(|w: f64| v1_squared(ctx, medium, w).unwrap_or(f64::NAN) / w, &dom, qs);
        let tol = 10.0 * qs.tolerance(s2.value) + s2.err;
        checks.push(stage("HB stage 2", s2.value, ctx.k1, tol, true)?);
    } else {
        checks.push(stage("HB stage 2", 0.0, ctx.k1, 0.0, true)?);
    }
    Ok(ConsistencyReport { checks })
}

/// Dispatches on `ctx.model`.
pub fn check_consistency(
    d_coupling: &CouplingSpec,
    medium: &AtomMedium,
    ctx: &ModeContext,
    qs: &QuadSettings,
) -> Result<ConsistencyReport> {
    match ctx.model {
        Model::D => check_consistency_d(d_coupling, ctx, qs),
        Model::HB => check_consistency_hb(medium, ctx, qs),
    }
}

/// Which conjugated factor a first-quadrant pole belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoleOf {
    /// `Q*(ω)` and hence `ε*(ω)`.
    QConj,
    /// `Pₙ*(ω)`.
    PConj,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub of: PoleOf,
    pub at: Complex64,
}

/// Poles of `Q*` (and `ε*`) and of `Pₙ*` in the open first quadrant, for
/// the closed-form medium. These are the residues picked up when a real-axis
/// integral containing conjugated factors is rotated onto `ω = iξ`.
pub fn first_quadrant_poles(medium: &AtomMedium, k: f64) -> Option<Vec<Pole>> {
    let b = match &medium.atom {
        Atom::Benchmark(b) => *b,
        Atom::Quadrature(_) => return None,
    };
    // Q*(z) = conj-coefficient polynomials.
    let (num, den) = b.q_poly();
    let conj = |p: &Poly| Poly(p.0.iter().map(|x| x.conj()).collect());
    let (num_c, den_c) = (conj(&num), conj(&den));
    let in_q1 = |z: &Complex64| z.re > 1e-12 && z.im > 1e-12;
    let mut out: Vec<Pole> = polynomial_roots(&den_c)
        .into_iter()
        .filter(in_q1)
        .map(|at| Pole { of: PoleOf::QConj, at })
        .collect();
    if medium.alpha > 0.0 {
        // P* = 1/(k² − z² − α² z² N/D)  ⇒  poles at roots of (k² − z²)D − α² z² N.
        let a2 = medium.alpha * medium.alpha;
        let mut p = vec![c(0.0, 0.0); 6];
        for (i, d) in den_c.0.iter().enumerate() {
            p[i] += d * (k * k);
            p[i + 2] -= d;
        }
        for (i, n) in num_c.0.iter().enumerate() {
            p[i + 2] -= n * a2;
        }
        out.extend(
            polynomial_roots(&Poly(p))
                .into_iter()
                .filter(in_q1)
                .map(|at| Pole { of: PoleOf::PConj, at }),
        );
    }
    Some(out)
}

/// Near-resonance of the field propagator on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    /// Root of `Re(k² − ε(ω)ω²)`.
    pub omega: f64,
    /// Half-width `ω² Im ε / |d Re(k² − εω²)/dω|` at the root.
    pub width: f64,
}

/// Locates the propagator resonance nearest `√(k² + plasma_sq)` by Newton
/// iteration on the real part of the inverse propagator.
pub fn field_resonance<P: Permittivity + ?Sized>(k: f64, eps: &P) -> Option<Resonance> {
    let re_d = |w: f64| eps.eps_real(w).map(|e| k * k - e.re * w * w);
    let mut w = (k * k + eps.plasma_sq()).sqrt();
    for _ in 0..60 {
        let h = 1e-6 * w;
        let (f, fp, fm) = (re_d(w).ok()?, re_d(w + h).ok()?, re_d(w - h).ok()?);
        let d = (fp - fm) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let step = f / d;
        let next = (w - step).max(0.5 * w).min(2.0 * w);
        if (next - w).abs() <= 1e-13 * w {
            w = next;
            let h = 1e-6 * w;
            let d = (re_d(w + h).ok()? - re_d(w - h).ok()?) / (2.0 * h);
            let im = eps.eps_real(w).ok()?.im;
            return Some(Resonance {
                omega: w,
                width: (w * w * im / d.abs()).abs(),
            });
        }
        w = next;
    }
    None
}

/// Quadrature breakpoints `ω_r ± {1, 10, 100}γ` around the resonance.
pub fn resonance_breaks(res: Option<Resonance>) -> Vec<f64> {
    match res {
        None => Vec::new(),
        Some(r) => {
            let mut b = vec![r.omega];
            for f in [1.0, 10.0, 100.0] {
                for s in [-1.0, 1.0] {
                    let x = r.omega + s * f * r.width;
                    if x > 0.0 {
                        b.push(x);
                    }
                }
            }
            b
        }
    }
}
