//! Model HB: the field couples to an atom oscillator `X`, and only the atom
//! couples to the reservoir. The Hamiltonian is diagonalized in two Fano
//! stages (atom + reservoir, then field + dressed atom) and the ground-state
//! energy is assembled from five expectation values.
//!
//! Notation per mode: `V² = v²ω/ω₁`, `Λ² = α²ω₁/k₁`, `V₁ = −iΛωVQ*`,
//! `ε = 1 + α²Q`, `P = 1/(k² − εω²)`. All coefficient phases come from `Q*`
//! and `P*`; `v` is real.
//!
//! The combination of stage-two coefficients that enters `⟨H_Y⟩` and
//! `⟨H_XY⟩` factorizes,
//!
//! `ν₁(ω′, ω) = −V(ω) F(ω′)/(ω + ω′)`, `F(ω) = (ω₁/2) V Q* (k² − ω²) P*`,
//!
//! because the `V₁(ω)V₁(ω′)` term cancels against the `ωQ*(ω)` half of the
//! `J₂` term. The double integrals then reduce to one-dimensional integrals
//! against the reservoir kernels
//! `K₀(c) = ∫V²/(ω + c)`, `K₁(c) = ∫ωV²/(ω + c)²`, `K₂(c) = ∫V²/(ω + c)²`.
//! The unreduced three-term `ν₁` is kept for cross-checks.
//!
//! At `ω₀ = 0` the atom is a free particle and `⟨H_X⟩`, `⟨H_Y⟩`, `⟨H_XY⟩`
//! diverge logarithmically at small `ω`. The pieces reported here are
//! measured from the decoupled (`α = 0`) matter ground state; the subtracted
//! constants do not depend on `k` and drop out of `Σₙ − ∫dn`. The `_raw`
//! variants return the unsubtracted values where they are finite.

use num_complex::Complex64;
use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::modesum::{casimir_energy, casimir_force};
use crate::numerics::{integrate, integrate_2d, principal_value, Interval, Multi, QuadResult, QuadValue};
use crate::spectral::{field_resonance, resonance_breaks, Atom, AtomMedium, BenchmarkAtom, Permittivity};
use crate::types::{CasimirResult, Model, ModeContext, PhysParams, QuadSettings};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Runs `integrate` on a fallible integrand, surfacing the first error.
fn try_integrate<T, F>(f: F, dom: &Interval, qs: &QuadSettings) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> Result<T>,
{
    let failure = RefCell::new(None);
    let g = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            T::default() * f64::NAN
        }
    };
    let r = integrate(g, dom, qs);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

fn require<T: QuadValue>(r: QuadResult<T>, what: &'static str, qs: &QuadSettings) -> Result<QuadResult<T>> {
    let tol = qs.tolerance(r.value.norm());
    r.require(what, tol)
}

fn scale(r: QuadResult<f64>, s: f64) -> QuadResult<f64> {
    QuadResult {
        value: r.value * s,
        err: r.err * s.abs(),
        ..r
    }
}

fn check_omega(omega: f64) -> Result<()> {
    crate::error::check_positive("omega", omega)
}

fn omega1_of(atom: &Atom) -> Result<f64> {
    let w1 = atom.omega1();
    if w1 > 0.0 {
        Ok(w1)
    } else {
        Err(Error::InvalidParameter {
            name: "omega1",
            reason: "the atom frequency ω₁ = √(ω₀² + ∫v²) must be positive".into(),
        })
    }
}

/// First-stage (atom + reservoir) Fano coefficients.
#[derive(Debug, Clone, Copy)]
pub struct StageOneCoeffs<'a> {
    pub atom: &'a Atom,
    pub omega1: f64,
}

impl<'a> StageOneCoeffs<'a> {
    pub fn new(atom: &'a Atom) -> Result<Self> {
        Ok(Self {
            atom,
            omega1: omega1_of(atom)?,
        })
    }

    /// `V(ω) = √(v²ω/ω₁)`.
    pub fn v(&self, omega: f64) -> f64 {
        (self.atom.v2(omega) * omega / self.omega1).sqrt()
    }

    pub fn q(&self, omega: f64) -> Result<Complex64> {
        self.atom.q_prop(omega)
    }

    /// `α₀(ω) = −((ω + ω₁)/2) V Q*`.
    pub fn alpha0(&self, omega: f64) -> Result<Complex64> {
        Ok(-0.5 * (omega + self.omega1) * self.v(omega) * self.q(omega)?.conj())
    }

    /// `β₀(ω) = −((ω − ω₁)/2) V Q*`.
    pub fn beta0(&self, omega: f64) -> Result<Complex64> {
        Ok(-0.5 * (omega - self.omega1) * self.v(omega) * self.q(omega)?.conj())
    }

    /// Numerator of the `1/(ω − ω′ − i0)` part of `α₁(ω, ω′)`.
    pub fn alpha1_regular(&self, omega: f64, omega_p: f64) -> Result<Complex64> {
        Ok(-0.5 * self.omega1 * self.v(omega_p) * self.v(omega) * self.q(omega)?.conj())
    }

    /// `β₁(ω, ω′) = −(ω₁/2) V(ω′)V(ω) Q*(ω)/(ω + ω′)`.
    pub fn beta1(&self, omega: f64, omega_p: f64) -> Result<Complex64> {
        Ok(self.alpha1_regular(omega, omega_p)? / (omega + omega_p))
    }
}

/// Second-stage (field + dressed atom) coefficients of one mode, and the
/// composite coefficients `μ₀, ν₀, μ₁, ν₁` of the atom and reservoir
/// operators in the final normal modes.
#[derive(Debug, Clone, Copy)]
pub struct StageTwoCoeffs<'a> {
    pub medium: &'a AtomMedium,
    pub ctx: ModeContext,
    pub stage1: StageOneCoeffs<'a>,
}

/// Pointwise ingredients shared by the integrands.
#[derive(Debug, Clone, Copy)]
struct Point {
    /// `V²|Q|²`.
    w: f64,
    v: f64,
    q: Complex64,
    p: Complex64,
    /// `α²ω²QP`, so that `(k² − ω²)P = 1 + u`.
    u: Complex64,
    /// `k₁ − ω`.
    k1_minus: f64,
}

impl<'a> StageTwoCoeffs<'a> {
    pub fn new(medium: &'a AtomMedium, ctx: &ModeContext) -> Result<Self> {
        if ctx.model != Model::HB {
            return Err(Error::InvalidParameter {
                name: "ctx",
                reason: "mode context must be built for model HB".into(),
            });
        }
        Ok(Self {
            medium,
            ctx: *ctx,
            stage1: StageOneCoeffs::new(&medium.atom)?,
        })
    }

    fn a2(&self) -> f64 {
        self.medium.alpha * self.medium.alpha
    }

    fn point(&self, omega: f64) -> Result<Point> {
        self.point_near(omega, 0.0)
    }

    /// Point at `ω = base + δ`. The differences `k − ω` and `k₁ − ω` are
    /// formed from `δ`, which keeps them accurate inside a resonance narrower
    /// than the spacing of doubles near `ω`.
    fn point_near(&self, base: f64, delta: f64) -> Result<Point> {
        let omega = base + delta;
        let q = self.stage1.q(omega)?;
        let a2 = self.a2();
        let k = self.ctx.k;
        let k_minus = (k - base) - delta;
        let p = 1.0 / (k_minus * (k + omega) - a2 * q * omega * omega);
        let v = self.stage1.v(omega);
        Ok(Point {
            w: v * v * q.norm_sqr(),
            v,
            q,
            p,
            u: a2 * omega * omega * q * p,
            k1_minus: (k1_minus_k(&self.ctx) - (base - k)) - delta,
        })
    }

    pub fn eps(&self, omega: f64) -> Result<Complex64> {
        self.medium.eps_real(omega)
    }

    /// `Pₙ(ω)`.
    pub fn p(&self, omega: f64) -> Result<Complex64> {
        Ok(self.point(omega)?.p)
    }

    /// `V₁ₙ(ω) = −iΛₙωV(ω)Q*(ω)`.
    pub fn v1(&self, omega: f64) -> Result<Complex64> {
        let q = self.stage1.q(omega)?;
        Ok(c(0.0, -self.ctx.lambda * omega * self.stage1.v(omega)) * q.conj())
    }

    /// `ξ₀ₙ(ω) = −((ω + k₁)/2) V₁ P*`.
    pub fn xi0(&self, omega: f64) -> Result<Complex64> {
        Ok(-0.5 * (omega + self.ctx.k1) * self.v1(omega)? * self.p(omega)?.conj())
    }

    /// `η₀ₙ(ω) = −((ω − k₁)/2) V₁ P*`.
    pub fn eta0(&self, omega: f64) -> Result<Complex64> {
        Ok(-0.5 * (omega - self.ctx.k1) * self.v1(omega)? * self.p(omega)?.conj())
    }

    /// Numerator of the `1/(ω − ω′ − i0)` part of `ξ₁ₙ(ω, ω′)`.
    pub fn xi1_regular(&self, omega: f64, omega_p: f64) -> Result<Complex64> {
        Ok(-0.5 * self.ctx.k1 * self.p(omega)?.conj() * self.v1(omega_p)?.conj() * self.v1(omega)?)
    }

    /// `η₁ₙ(ω, ω′) = −(k₁/2) P*(ω) V₁(ω′)V₁(ω)/(ω + ω′)`.
    pub fn eta1(&self, omega: f64, omega_p: f64) -> Result<Complex64> {
        Ok(-0.5 * self.ctx.k1 * self.p(omega)?.conj() * self.v1(omega_p)? * self.v1(omega)? / (omega + omega_p))
    }

    /// `J(ω) = (2ω/k₁)(1 − ε*(ω))`.
    pub fn j(&self, omega: f64) -> Result<Complex64> {
        Ok(2.0 * omega / self.ctx.k1 * (1.0 - self.eps(omega)?.conj()))
    }

    /// `J₁(ω) = (2/k₁)[ω(ω − ω₁)(1 − ε*) − α²]`.
    pub fn j1(&self, omega: f64) -> Result<Complex64> {
        let e = self.eps(omega)?.conj();
        Ok(2.0 / self.ctx.k1 * (omega * (omega - self.stage1.omega1) * (1.0 - e) - self.a2()))
    }

    /// `J₂(ω, ω′) = (J(ω) + J(ω′))/(ω + ω′)`.
    pub fn j2(&self, omega: f64, omega_p: f64) -> Result<Complex64> {
        Ok((self.j(omega)? + self.j(omega_p)?) / (omega + omega_p))
    }

    fn bracket_prefactor(&self, omega: f64) -> Result<Complex64> {
        if self.ctx.lambda == 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "Λₙ = 0: the closed forms divide by Λₙ; use the decoupled limit".into(),
            });
        }
        Ok(c(0.0, 1.0) * self.v1(omega)? / (2.0 * self.ctx.lambda * omega))
    }

    /// `ν₀ₙ(ω) = i(V₁/2Λω)[ω₁ − ω − (ω₁ − ω)P*ω²(1 − ε*) − α²ωP*]`.
    pub fn nu0(&self, omega: f64) -> Result<Complex64> {
        check_omega(omega)?;
        let w1 = self.stage1.omega1;
        let ps = self.p(omega)?.conj();
        let e = self.eps(omega)?.conj();
        let br = (w1 - omega) - (w1 - omega) * ps * omega * omega * (1.0 - e) - self.a2() * omega * ps;
        Ok(self.bracket_prefactor(omega)? * br)
    }

    /// `μ₀ₙ(ω)`: `ν₀ₙ` with `ω₁ → −ω₁`,
    /// `i(V₁/2Λω)[−ω₁ − ω + (ω₁ + ω)P*ω²(1 − ε*) − α²ωP*]`.
    pub fn mu0(&self, omega: f64) -> Result<Complex64> {
        check_omega(omega)?;
        let w1 = self.stage1.omega1;
        let ps = self.p(omega)?.conj();
        let e = self.eps(omega)?.conj();
        let br = (-w1 - omega) + (w1 + omega) * ps * omega * omega * (1.0 - e) - self.a2() * omega * ps;
        Ok(self.bracket_prefactor(omega)? * br)
    }

    /// `μ₀ₙ` with the factor `(ε(ω) − 1)` in place of `(1 − ε*(ω))`. Audit
    /// only: the orthogonality relations fail with it.
    pub fn mu0_printed(&self, omega: f64) -> Result<Complex64> {
        check_omega(omega)?;
        let w1 = self.stage1.omega1;
        let ps = self.p(omega)?.conj();
        let e = self.eps(omega)?;
        let br = (-w1 - omega) + (w1 + omega) * ps * omega * omega * (e - 1.0) - self.a2() * omega * ps;
        Ok(self.bracket_prefactor(omega)? * br)
    }

    /// `F(ω) = (ω₁/2) V Q* (k² − ω²) P*`.
    pub fn f(&self, omega: f64) -> Result<Complex64> {
        let pt = self.point(omega)?;
        Ok(0.5 * self.stage1.omega1 * pt.v * (pt.q * (1.0 + pt.u)).conj())
    }

    /// `ν₁ₙ(ω′, ω) = −V(ω)F(ω′)/(ω + ω′)`.
    pub fn nu1(&self, omega_p: f64, omega: f64) -> Result<Complex64> {
        Ok(-self.stage1.v(omega) * self.f(omega_p)? / (omega + omega_p))
    }

    /// Three-term form of `ν₁ₙ(ω′, ω)` before the cancellation:
    /// `−(k₁/2)P*(ω′)V₁(ω)V₁(ω′)/(ω′ + ω) − i(ω₁/2Λω′)V(ω)V₁(ω′)/(ω′ + ω)
    ///  + i(k₁/4α)√(k₁ω₁) P*(ω′)V(ω)V₁(ω′)J₂`.
    pub fn nu1_literal(&self, omega_p: f64, omega: f64) -> Result<Complex64> {
        let (k1, w1, lam, al) = (self.ctx.k1, self.stage1.omega1, self.ctx.lambda, self.medium.alpha);
        if lam == 0.0 {
            return self.nu1(omega_p, omega);
        }
        let ps = self.p(omega_p)?.conj();
        let v = self.stage1.v(omega);
        let v1p = self.v1(omega_p)?;
        let s = omega + omega_p;
        let t1 = -0.5 * k1 * ps * self.v1(omega)? * v1p / s;
        let t2 = c(0.0, -w1 / (2.0 * lam * omega_p)) * v * v1p / s;
        let t3 = c(0.0, k1 / (4.0 * al) * (k1 * w1).sqrt()) * ps * v * v1p * self.j2(omega, omega_p)?;
        Ok(t1 + t2 + t3)
    }

    /// Numerator of the `1/(ω′ − ω − i0)` part of `μ₁ₙ(ω′, ω)`, which also
    /// carries `δ(ω′ − ω)`: `−V(ω)F(ω′)`.
    pub fn mu1_regular(&self, omega_p: f64, omega: f64) -> Result<Complex64> {
        Ok(-self.stage1.v(omega) * self.f(omega_p)?)
    }
}

/// Which reservoir kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `K₀(c) = ∫V²(ω)/(ω + c) dω`.
    K0,
    /// `K₁(c) = ∫ωV²(ω)/(ω + c)² dω`.
    K1,
    /// `K₂(c) = ∫V²(ω)/(ω + c)² dω`.
    K2,
}

/// `∫₀^∞ ω/((ω + c)(ω² + m²)) dω` and its `c`-derivative.
fn benchmark_i0(c: f64, m: f64) -> (f64, f64) {
    let l = (c / m).ln();
    let d = c * c + m * m;
    let i0 = (c * l + 0.5 * m * PI) / d;
    let di0 = ((l + 1.0) * d - 2.0 * c * (c * l + 0.5 * m * PI)) / (d * d);
    (i0, di0)
}

fn benchmark_kernel(b: &BenchmarkAtom, omega1: f64, kind: Kernel, cc: f64) -> f64 {
    let amp = b.g2 * b.m.powi(3) / omega1;
    let (i0, di0) = benchmark_i0(cc, b.m);
    match kind {
        Kernel::K0 => amp * i0,
        Kernel::K1 => amp * (i0 + cc * di0),
        Kernel::K2 => -amp * di0,
    }
}

/// Reservoir kernel at `c > 0`: closed form for the benchmark density,
/// quadrature otherwise.
pub fn matter_kernel(atom: &Atom, kind: Kernel, cc: f64, qs: &QuadSettings) -> Result<f64> {
    crate::error::check_positive("c", cc)?;
    let w1 = omega1_of(atom)?;
    match atom {
        Atom::Benchmark(b) => Ok(benchmark_kernel(b, w1, kind, cc)),
        Atom::Quadrature(_) => matter_kernel_quadrature(atom, kind, cc, qs),
    }
}

/// Reservoir kernel by quadrature for any atom (the benchmark closed form's
/// oracle).
pub fn matter_kernel_quadrature(atom: &Atom, kind: Kernel, cc: f64, qs: &QuadSettings) -> Result<f64> {
    crate::error::check_positive("c", cc)?;
    let w1 = omega1_of(atom)?;
    let f = |w: f64| {
        let v2 = atom.v2(w) * w / w1;
        match kind {
            Kernel::K0 => v2 / (w + cc),
            Kernel::K1 => w * v2 / ((w + cc) * (w + cc)),
            Kernel::K2 => v2 / ((w + cc) * (w + cc)),
        }
    };
    let mut b = atom.scales();
    b.push(cc);
    let dom = Interval::semi_inf(0.0).with_breaks(b).with_tail(2.0);
    let r = integrate(f, &dom, qs);
    Ok(require(r, "reservoir kernel", qs)?.value)
}

fn real_axis_domain(co: &StageTwoCoeffs) -> Interval {
    let mut b = co.medium.scales();
    b.extend([co.ctx.k, co.ctx.k1, co.stage1.omega1]);
    b.extend(resonance_breaks(field_resonance(co.ctx.k, co.medium)));
    Interval::semi_inf(0.0).with_breaks(b).with_tail(2.0)
}

/// `∫₀^∞ f(ω, point(ω)) dω`. A field resonance narrower than `10⁻⁶ω` is
/// integrated in the offset `δ = ω − ω_r` over `|δ| < 10⁻⁴ω_r`; outside that
/// window the plain variable is accurate.
fn integrate_real_axis<T, F>(co: &StageTwoCoeffs, f: F, qs: &QuadSettings) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64, &Point) -> Result<T>,
{
    let dom = real_axis_domain(co);
    let narrow = field_resonance(co.ctx.k, co.medium).filter(|r| r.width > 0.0 && r.width < 1e-6 * r.omega);
    let Some(res) = narrow else {
        return try_integrate(|w| f(w, &co.point(w)?), &dom, qs);
    };
    let (wr, half) = (res.omega, 1e-4 * res.omega);
    let (lo, hi) = (wr - half, wr + half);
    let left_breaks = dom.breaks.iter().copied().filter(|b| *b < lo);
    let right_breaks = dom.breaks.iter().copied().filter(|b| *b > hi);
    let left = try_integrate(|w| f(w, &co.point(w)?), &Interval::new(0.0, lo).with_breaks(left_breaks), qs)?;
    let right = try_integrate(
        |w| f(w, &co.point(w)?),
        &Interval::semi_inf(hi).with_breaks(right_breaks).with_tail(2.0),
        qs,
    )?;
    let outer = left.value + right.value;
    // The root found in ω is only good to a few ulps of ω_r, which can
    // exceed the width; refine it in δ, where Re(k² − εω²) ≈ −2ω_r δ + const.
    let mut peak = 0.0;
    for _ in 0..3 {
        let d = 1.0 / co.point_near(wr, peak)?.p;
        peak += d.re / (2.0 * (wr + peak));
    }
    let mut breaks = vec![peak, co.ctx.k - wr, co.ctx.k1 - wr];
    let mut g = res.width;
    while g < half {
        breaks.extend([peak - g, peak + g]);
        g *= 10.0;
    }
    let wq = QuadSettings {
        abs_tol: qs.abs_tol.max(0.25 * qs.rel_tol * outer.norm()),
        ..*qs
    };
    let window = try_integrate(
        |d| f(wr + d, &co.point_near(wr, d)?),
        &Interval::new(-half, half).with_breaks(breaks),
        &wq,
    )?;
    let value = outer + window.value;
    let err = left.err + right.err + window.err;
    let worst = [&left, &right, &window]
        .into_iter()
        .max_by(|a, b| a.err.total_cmp(&b.err))
        .and_then(|r| r.worst_panel);
    Ok(QuadResult {
        value,
        err,
        evals: left.evals + right.evals + window.evals,
        converged: left.converged && right.converged && window.converged,
        worst_panel: worst,
    })
}

fn is_decoupled(medium: &AtomMedium) -> bool {
    medium.alpha == 0.0
}

/// Real-axis integrands of the five expectation values.
struct Integrands<'a> {
    co: StageTwoCoeffs<'a>,
    kq: QuadSettings,
}

impl Integrands<'_> {
    fn kernel(&self, kind: Kernel, w: f64) -> Result<f64> {
        matter_kernel(&self.co.medium.atom, kind, w, &self.kq)
    }

    /// `k₁|η₀|² = (α²ω₁/4)(ω − k₁)²ω²V²|Q|²|P|²`.
    fn he(&self, w: f64, pt: &Point) -> f64 {
        0.25 * self.co.a2() * self.co.stage1.omega1 * pt.k1_minus.powi(2) * w * w * pt.w * pt.p.norm_sqr()
    }

    /// `ω₁|ν₀|²` as `(ω₁/4)V²|Q|²|A + B|²`, `A = ω₁ − ω`,
    /// `B = Au − α²ωP`; `subtract` drops the `A²` matter term.
    fn hx(&self, w: f64, pt: &Point, subtract: bool) -> f64 {
        let w1 = self.co.stage1.omega1;
        let a = w1 - w;
        let b = a * pt.u - self.co.a2() * w * pt.p;
        let body = if subtract { 2.0 * a * b.re + b.norm_sqr() } else { (a + b).norm_sqr() };
        0.25 * w1 * pt.w * body
    }

    fn field_factor(pt: &Point, subtract: bool) -> f64 {
        if subtract {
            2.0 * pt.u.re + pt.u.norm_sqr()
        } else {
            (1.0 + pt.u).norm_sqr()
        }
    }

    /// `|F|²K₁ = (ω₁²/4)V²|Q|²|1 + u|²K₁`.
    fn hy(&self, w: f64, pt: &Point, subtract: bool) -> Result<f64> {
        let w1 = self.co.stage1.omega1;
        Ok(0.25 * w1 * w1 * pt.w * Self::field_factor(pt, subtract) * self.kernel(Kernel::K1, w)?)
    }

    /// `Re[G*(ν₀ − μ₀)]K₀ = −(ω₁²/2)V²|Q|²|1 + u|²K₀`.
    fn hxy(&self, w: f64, pt: &Point, subtract: bool) -> Result<f64> {
        let w1 = self.co.stage1.omega1;
        Ok(-0.5 * w1 * w1 * pt.w * Self::field_factor(pt, subtract) * self.kernel(Kernel::K0, w)?)
    }

    /// `ΛIm[η₀*(μ₀ + ν₀)] = −(Λ²/2)ω²V²|Q|²|P|²(k₁ − ω)²(k₁ + ω)`.
    fn hex(&self, w: f64, pt: &Point) -> f64 {
        let k1 = self.co.ctx.k1;
        let lam2 = self.co.ctx.lambda * self.co.ctx.lambda;
        -0.5 * lam2 * w * w * pt.w * pt.p.norm_sqr() * pt.k1_minus.powi(2) * (k1 + w)
    }
}

fn integrands<'a>(medium: &'a AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<Integrands<'a>> {
    Ok(Integrands {
        co: StageTwoCoeffs::new(medium, ctx)?,
        kq: QuadSettings {
            rel_tol: (qs.rel_tol * 1e-2).max(1e-13),
            abs_tol: qs.abs_tol * 1e-2,
            ..*qs
        },
    })
}

fn piece<F>(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings, what: &'static str, f: F) -> Result<QuadResult<f64>>
where
    F: Fn(&Integrands, f64, &Point) -> Result<f64>,
{
    if is_decoupled(medium) {
        return Ok(QuadResult::exact(0.0));
    }
    piece_any(medium, ctx, qs, what, f)
}

/// As `piece`, also at `α = 0` (for unsubtracted matter values).
fn piece_any<F>(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings, what: &'static str, f: F) -> Result<QuadResult<f64>>
where
    F: Fn(&Integrands, f64, &Point) -> Result<f64>,
{
    let ig = integrands(medium, ctx, qs)?;
    let r = integrate_real_axis(&ig.co, |w, pt| f(&ig, w, pt), qs)?;
    require(r, what, qs)
}

/// `½(k₁ₙ − kₙ)`: the interaction-dependent part of the field zero-point
/// energy `½Σk₁ₙ`.
pub fn zero_point_shift(ctx: &ModeContext) -> f64 {
    0.5 * k1_minus_k(ctx)
}

/// `k₁ − k = α²/(k₁ + k)`, free of cancellation at large `k`.
fn k1_minus_k(ctx: &ModeContext) -> f64 {
    ctx.alpha * ctx.alpha / (ctx.k1 + ctx.k)
}

/// `⟨H_e⟩ = k₁∫|η₀|²`, on the imaginary axis:
/// `−½(k₁ − k) + (1/2π)∫dξ[(k² − ξ²)(P − P⁰) + α²P]`.
///
/// Rotating `(1/2π)Im∫(ω − k₁)²P dω` requires splitting off the free
/// propagator, whose pole at `ω = k` contributes `(k₁ − k)²/(4k)`; the
/// `α²P⁰` part of the rotated integrand gives `−α²/(4k)`.
pub fn expectation_he(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    if is_decoupled(medium) {
        return Ok(QuadResult::exact(0.0));
    }
    let r = rotated_em_integral(medium, ctx, qs)?;
    Ok(QuadResult {
        value: r.value - zero_point_shift(ctx),
        ..r
    })
}

/// `(1/2π)∫dξ[(k² − ξ²)(P − P⁰) + α²P]`.
fn rotated_em_integral(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    let k2 = ctx.k * ctx.k;
    let a2 = medium.alpha * medium.alpha;
    let f = |xi: f64| -> Result<f64> {
        if xi == 0.0 {
            return Ok(a2 / k2);
        }
        let ia = medium.imag_axis(xi)?;
        let p = 1.0 / (k2 + ia.xi2_eps);
        let p0 = 1.0 / (k2 + xi * xi);
        Ok(-(k2 - xi * xi) * ia.xi2_chi * p * p0 + a2 * p)
    };
    let mut b = medium.scales();
    b.extend([ctx.k, ctx.k1]);
    let dom = Interval::semi_inf(0.0).with_breaks(b).with_tail(2.0);
    let r = require(try_integrate(f, &dom, qs)?, "rotated electromagnetic integral", qs)?;
    Ok(scale(r, 1.0 / (2.0 * PI)))
}

/// `k₁∫|η₀|²dω` directly on the real axis (positive integrand).
pub fn expectation_he_real_axis(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    piece(medium, ctx, qs, "<H_e> on the real axis", |ig, w, pt| Ok(ig.he(w, pt)))
}

/// `½(k₁ − k) + (1/2π)∫dξ[(k² − ξ²)(P − P⁰) + α²P]`, the electromagnetic
/// shift in the form that adds the zero-point term to the rotated integral
/// a second time. Kept for comparison; it exceeds `expectation_he` by
/// exactly `k₁ − k`.
pub fn printed_electromagnetic_shift(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    if is_decoupled(medium) {
        return Ok(QuadResult::exact(0.0));
    }
    let r = rotated_em_integral(medium, ctx, qs)?;
    Ok(QuadResult {
        value: r.value + zero_point_shift(ctx),
        ..r
    })
}

/// `⟨H_X⟩ = ω₁∫|ν₀|²`, relative to the decoupled matter ground state.
pub fn expectation_hx(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    piece(medium, ctx, qs, "<H_X>", |ig, w, pt| Ok(ig.hx(w, pt, true)))
}

/// `⟨H_Y⟩ = ∫ω∫|ν₁(ω′, ω)|²`, relative to the decoupled matter ground state.
pub fn expectation_hy(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    piece(medium, ctx, qs, "<H_Y>", |ig, w, pt| ig.hy(w, pt, true))
}

/// `⟨H_XY⟩` from the `ν₁*(ν₀ − μ₀) + c.c.` form, relative to the decoupled
/// matter ground state.
pub fn expectation_hxy(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    piece(medium, ctx, qs, "<H_XY>", |ig, w, pt| ig.hxy(w, pt, true))
}

/// `⟨H_eX⟩` from the `η₀*(μ₀ + ν₀) − c.c.` form.
pub fn expectation_hex(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    piece(medium, ctx, qs, "<H_eX>", |ig, w, pt| Ok(ig.hex(w, pt)))
}

fn require_gapped(medium: &AtomMedium) -> Result<()> {
    if medium.atom.omega0() > 0.0 {
        Ok(())
    } else {
        Err(Error::Divergent {
            what: "unsubtracted matter expectation value",
            reason: "infrared divergent for a free atom (ω₀ = 0)".into(),
        })
    }
}

/// Unsubtracted `⟨H_X⟩`, finite for `ω₀ > 0`.
pub fn expectation_hx_raw(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    require_gapped(medium)?;
    piece_any(medium, ctx, qs, "<H_X>", |ig, w, pt| Ok(ig.hx(w, pt, false)))
}

/// Unsubtracted `⟨H_Y⟩`, finite for `ω₀ > 0`.
pub fn expectation_hy_raw(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    require_gapped(medium)?;
    piece_any(medium, ctx, qs, "<H_Y>", |ig, w, pt| ig.hy(w, pt, false))
}

/// Unsubtracted `⟨H_XY⟩`, finite for `ω₀ > 0`.
pub fn expectation_hxy_raw(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    require_gapped(medium)?;
    piece_any(medium, ctx, qs, "<H_XY>", |ig, w, pt| ig.hxy(w, pt, false))
}

/// `⟨H_eX⟩` from the `(ξ₀* − η₀*)(μ₀ + ν₀)` form, built from the
/// coefficient functions. Returns the real part; the imaginary residue is
/// checked against the tolerance.
pub fn expectation_hex_direct(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    if is_decoupled(medium) {
        return Ok(QuadResult::exact(0.0));
    }
    let co = StageTwoCoeffs::new(medium, ctx)?;
    let dom = real_axis_domain(&co);
    let lam = ctx.lambda;
    let f = |w: f64| -> Result<Complex64> {
        let d = co.xi0(w)?.conj() - co.eta0(w)?.conj();
        Ok(c(0.0, 0.5 * lam) * d * (co.mu0(w)? + co.nu0(w)?))
    };
    let r = require(try_integrate(f, &dom, qs)?, "<H_eX> direct", qs)?;
    real_part(r, "<H_eX> direct", qs)
}

fn real_part(r: QuadResult<Complex64>, what: &'static str, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    let tol = 10.0 * (qs.tolerance(r.value.re) + r.err);
    if r.value.im.abs() > tol {
        return Err(Error::NotReal {
            what,
            residue: r.value.im,
            scale: r.value.re.abs(),
        });
    }
    Ok(r.map(|v| v.re))
}

/// `⟨H_XY⟩` from the `(μ₀* − ν₀*)(μ₁ − ν₁)` form with the `δ` and `1/(x − i0)`
/// parts of `μ₁` resolved analytically and the rest by principal-value
/// quadrature. Unsubtracted; needs `ω₀ > 0`. Returns the real part and
/// checks that the imaginary part vanishes. Nested quadrature: slow.
pub fn expectation_hxy_direct(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    require_gapped(medium)?;
    if is_decoupled(medium) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "needs α > 0".into(),
        });
    }
    let co = StageTwoCoeffs::new(medium, ctx)?;
    let dom = real_axis_domain(&co);
    let iq = QuadSettings {
        rel_tol: qs.rel_tol * 0.1,
        abs_tol: qs.abs_tol * 0.1,
        ..*qs
    };
    // With μ₀ − ν₀ = −2F:
    // ½∫V(ω)∫dω′(μ₀* − ν₀*)(ω′)(μ₁ − ν₁)(ω′, ω)
    //   = ∫dω V(ω)[−F*(ω) + V(ω)(PV∫|F|²/(ω′ − ω) + iπ|F(ω)|² − ∫|F|²/(ω′ + ω))].
    let f2 = |w: f64| co.f(w).map(|f| f.norm_sqr()).unwrap_or(f64::NAN);
    let outer = |w: f64| -> Result<Complex64> {
        let v = co.stage1.v(w);
        let fw = co.f(w)?;
        let pv = require(principal_value(f2, w, &dom, &iq)?, "principal value in <H_XY>", &iq)?;
        let plain = require(integrate(|x: f64| f2(x) / (x + w), &dom, &iq), "<H_XY> inner integral", &iq)?;
        Ok(v * (-fw.conj() + v * c(pv.value - plain.value, PI * fw.norm_sqr())))
    };
    let r = require(try_integrate(outer, &dom, qs)?, "<H_XY> direct", qs)?;
    real_part(r, "<H_XY> direct", qs)
}

/// Unsubtracted `⟨H_Y⟩` as the double integral `∫dω ω∫dω′|ν₁(ω′, ω)|²` of
/// the three-term `ν₁`. Needs `ω₀ > 0`. Slow.
pub fn expectation_hy_literal_2d(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    require_gapped(medium)?;
    let co = StageTwoCoeffs::new(medium, ctx)?;
    let dom = real_axis_domain(&co);
    let failure = RefCell::new(None);
    let f = |w: f64, wp: f64| match co.nu1_literal(wp, w) {
        Ok(v) => w * v.norm_sqr(),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let r = integrate_2d(f, &dom, |_| dom.clone(), qs);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    require(r, "<H_Y> double integral", qs)
}

/// Per-mode HB energy pieces. Matter pieces are measured from the decoupled
/// matter ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HBEnergyBreakdown {
    pub k: f64,
    /// `½(k₁ − k)`.
    pub e_zp: f64,
    /// `⟨H_e⟩`.
    pub e_em: f64,
    /// `⟨H_X⟩`.
    pub e_x: f64,
    /// `⟨H_Y⟩`.
    pub e_y: f64,
    /// `⟨H_XY⟩`.
    pub e_xy: f64,
    /// `⟨H_eX⟩`.
    pub e_ex: f64,
    pub total: f64,
    pub err: f64,
    pub converged: bool,
}

/// All pieces of one mode, sharing one real-axis quadrature.
pub fn hb_mode_energy(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<HBEnergyBreakdown> {
    let zp = zero_point_shift(ctx);
    if is_decoupled(medium) {
        return Ok(HBEnergyBreakdown {
            k: ctx.k,
            e_zp: zp,
            e_em: 0.0,
            e_x: 0.0,
            e_y: 0.0,
            e_xy: 0.0,
            e_ex: 0.0,
            total: zp,
            err: 0.0,
            converged: true,
        });
    }
    let ig = integrands(medium, ctx, qs)?;
    let f = |w: f64, pt: &Point| -> Result<Multi<5>> {
        Ok(Multi([
            ig.he(w, pt),
            ig.hx(w, pt, true),
            ig.hy(w, pt, true)?,
            ig.hxy(w, pt, true)?,
            ig.hex(w, pt),
        ]))
    };
    // At large k the total is dominated by the zero-point shift, and the
    // pieces only need absolute accuracy on that scale.
    let pq = QuadSettings {
        abs_tol: qs.abs_tol.max(0.1 * qs.rel_tol * zp),
        ..*qs
    };
    let mut r = integrate_real_axis(&ig.co, f, &pq)?;
    let sum = |r: &QuadResult<Multi<5>>| zp + r.value.0.iter().sum::<f64>();
    // At small k the pieces cancel to a total well below the largest piece,
    // whose scale sets the first pass's tolerance.
    if r.converged && r.err > qs.tolerance(sum(&r)) {
        let largest = r.value.0.iter().fold(zp, |m, x| m.max(x.abs()));
        let tq = QuadSettings {
            rel_tol: 1e-15,
            abs_tol: (0.5 * qs.tolerance(sum(&r))).max(1e-13 * largest),
            ..*qs
        };
        if tq.abs_tol < r.err {
            r = integrate_real_axis(&ig.co, f, &tq)?;
        }
    }
    let [he, hx, hy, hxy, hex] = r.value.0;
    let total = zp + he + hx + hy + hxy + hex;
    let tol = qs.tolerance(total);
    if !r.converged {
        return Err(Error::NotConverged {
            what: "HB mode energy",
            err: r.err,
            tol,
            evals: r.evals,
        });
    }
    Ok(HBEnergyBreakdown {
        k: ctx.k,
        e_zp: zp,
        e_em: he,
        e_x: hx,
        e_y: hy,
        e_xy: hxy,
        e_ex: hex,
        total,
        err: r.err,
        converged: r.converged,
    })
}

/// Independent route to the per-mode energy from the occupation of the old
/// (uncoupled) modes in the new ground state:
/// `H = Σ∫ω C†C + E` and `⟨0_old|H|0_old⟩ = ½Σk₁ + matter constants`, so
/// `E = ½(k₁ − k) − ∫ω[|η₀|² + (|ν₀|² − |β₀|²) + (|F|² − |F|²_{α=0})K₂]`
/// relative to the decoupled system, with `∫dω′|ν₁(ω, ω′)|² = |F(ω)|²K₂(ω)`.
pub fn occupation_mode_energy(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<QuadResult<f64>> {
    let zp = zero_point_shift(ctx);
    if is_decoupled(medium) {
        return Ok(QuadResult::exact(zp));
    }
    let ig = integrands(medium, ctx, qs)?;
    let k1 = ctx.k1;
    let w1 = ig.co.stage1.omega1;
    let f = |w: f64, pt: &Point| -> Result<f64> {
        let eta2 = ig.he(w, pt) / k1;
        let nu2 = ig.hx(w, pt, true) / w1;
        let f2 = 0.25 * w1 * w1 * pt.w * Integrands::field_factor(pt, true);
        Ok(w * (eta2 + nu2 + f2 * ig.kernel(Kernel::K2, w)?))
    };
    let pq = QuadSettings {
        abs_tol: qs.abs_tol.max(0.1 * qs.rel_tol * zp),
        ..*qs
    };
    let r = require(integrate_real_axis(&ig.co, f, &pq)?, "occupation energy", &pq)?;
    Ok(QuadResult {
        value: zp - r.value,
        ..r
    })
}

/// Orthogonality and normalization witnesses of the canonical commutators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRuleReport {
    /// `|∫(−ξ₀*ν₀ + η₀μ₀*)|` and its natural scale `∫(|ξ₀ν₀| + |η₀μ₀|)`.
    pub s1: f64,
    pub s1_scale: f64,
    /// `|∫(ξ₀*μ₀ − η₀ν₀*)|` and scale.
    pub s2: f64,
    pub s2_scale: f64,
    /// `max_ω |∫dω′(−μ₀*ν₁ + ν₀μ₁*)|/V(ω)` over the probe frequencies, and
    /// the largest ratio to its scale.
    pub s3: f64,
    pub s3_rel: f64,
    /// Same for `∫dω′(μ₀*μ₁ − ν₀ν₁*)`.
    pub s4: f64,
    pub s4_rel: f64,
    /// `∫(|ξ₀|² − |η₀|²)`, which must be 1.
    pub normalization: f64,
    pub probes: Vec<f64>,
    /// `α = 0`: nothing to check.
    pub degenerate: bool,
}

impl SumRuleReport {
    pub fn s1_rel(&self) -> f64 {
        ratio(self.s1, self.s1_scale)
    }
    pub fn s2_rel(&self) -> f64 {
        ratio(self.s2, self.s2_scale)
    }
    pub fn max_rel(&self) -> f64 {
        self.s1_rel().max(self.s2_rel()).max(self.s3_rel).max(self.s4_rel)
    }
    /// All four orthogonality relations within `rel` of their scale and the
    /// normalization within `norm_tol` of 1.
    pub fn holds(&self, rel: f64, norm_tol: f64) -> bool {
        self.degenerate || (self.max_rel() < rel && (self.normalization - 1.0).abs() < norm_tol)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        a
    }
}

/// Default probe frequencies for the pointwise relations.
pub const SUM_RULE_PROBES: [f64; 3] = [0.3, 1.0, 3.0];

/// Evaluates the four orthogonality relations and the normalization.
pub fn sum_rules(medium: &AtomMedium, ctx: &ModeContext, qs: &QuadSettings) -> Result<SumRuleReport> {
    sum_rules_with(medium, ctx, qs, 1.0, &SUM_RULE_PROBES)
}

/// As [`sum_rules`] with the propagator's `ε` multiplied by `eps_scale`
/// (a deliberate corruption for regression tests) and explicit probes.
pub fn sum_rules_with(
    medium: &AtomMedium,
    ctx: &ModeContext,
    qs: &QuadSettings,
    eps_scale: f64,
    probes: &[f64],
) -> Result<SumRuleReport> {
    if is_decoupled(medium) {
        return Ok(SumRuleReport {
            s1: 0.0,
            s1_scale: 0.0,
            s2: 0.0,
            s2_scale: 0.0,
            s3: 0.0,
            s3_rel: 0.0,
            s4: 0.0,
            s4_rel: 0.0,
            normalization: 1.0,
            probes: probes.to_vec(),
            degenerate: true,
        });
    }
    let co = StageTwoCoeffs::new(medium, ctx)?;
    let dom = real_axis_domain(&co);
    let k = ctx.k;
    let k1 = ctx.k1;
    let a2 = medium.alpha * medium.alpha;
    let w1 = co.stage1.omega1;
    // Coefficients evaluated with a possibly corrupted propagator.
    let coeffs = |w: f64| -> Result<[Complex64; 5]> {
        let q = co.stage1.q(w)?;
        let chi = (eps_scale - 1.0) + eps_scale * a2 * q;
        let e = 1.0 + chi;
        let p = 1.0 / ((k - w) * (k + w) - chi * w * w);
        let v = co.stage1.v(w);
        let v1 = c(0.0, -ctx.lambda * w * v) * q.conj();
        let xi0 = -0.5 * (w + k1) * v1 * p.conj();
        let eta0 = -0.5 * (w - k1) * v1 * p.conj();
        let pre = c(0.0, 1.0) * v1 / (2.0 * ctx.lambda * w);
        let ps = p.conj();
        let ec = e.conj();
        let nu0 = pre * ((w1 - w) - (w1 - w) * ps * w * w * (1.0 - ec) - a2 * w * ps);
        let mu0 = pre * ((-w1 - w) + (w1 + w) * ps * w * w * (1.0 - ec) - a2 * w * ps);
        let f = 0.5 * w1 * v * q.conj() * ((k - w) * (k + w)) * ps;
        Ok([xi0, eta0, nu0, mu0, f])
    };
    let g = |w: f64| -> Result<Multi<7>> {
        let [xi0, eta0, nu0, mu0, _] = coeffs(w)?;
        let a = -xi0.conj() * nu0 + eta0 * mu0.conj();
        let b = xi0.conj() * mu0 - eta0 * nu0.conj();
        Ok(Multi([
            a.re,
            a.im,
            (xi0 * nu0).norm() + (eta0 * mu0).norm(),
            b.re,
            b.im,
            (xi0 * mu0).norm() + (eta0 * nu0).norm(),
            xi0.norm_sqr() - eta0.norm_sqr(),
        ]))
    };
    let r = require(try_integrate(g, &dom, qs)?, "sum rules", qs)?.value.0;
    let mut s3: f64 = 0.0;
    let mut s3_rel: f64 = 0.0;
    let mut s4: f64 = 0.0;
    let mut s4_rel: f64 = 0.0;
    let iq = QuadSettings {
        rel_tol: qs.rel_tol * 0.1,
        abs_tol: qs.abs_tol * 0.1,
        ..*qs
    };
    for &w in probes {
        check_omega(w)?;
        let [_, _, nu0w, mu0w, fw] = coeffs(w)?;
        let vw = co.stage1.v(w);
        // Numerators of 1/(ω′ − ω): the 1/ω′ singularities of μ₀*F and ν₀F*
        // cancel between the two terms of each relation.
        let h = |x: f64| -> Multi<4> {
            match coeffs(x) {
                Ok([_, _, nu0, mu0, f]) => {
                    let r = (x - w) / (x + w);
                    let g3 = mu0.conj() * f * r - nu0 * f.conj();
                    let g4 = nu0 * f.conj() * r - mu0.conj() * f;
                    Multi([g3.re, g3.im, g4.re, g4.im])
                }
                Err(_) => Multi([f64::NAN; 4]),
            }
        };
        let pv = require(principal_value(h, w, &dom, &iq)?, "sum-rule principal value", &iq)?.value.0;
        let i = c(0.0, 1.0);
        let rel3 = nu0w + i * PI * vw * nu0w * fw.conj() + vw * c(pv[0], pv[1]);
        let rel4 = mu0w.conj() - i * PI * vw * mu0w.conj() * fw + vw * c(pv[2], pv[3]);
        let sc3 = nu0w.norm() + vw * (PI * (nu0w * fw).norm() + c(pv[0], pv[1]).norm());
        let sc4 = mu0w.norm() + vw * (PI * (mu0w * fw).norm() + c(pv[2], pv[3]).norm());
        s3 = s3.max(rel3.norm());
        s4 = s4.max(rel4.norm());
        s3_rel = s3_rel.max(ratio(rel3.norm(), sc3));
        s4_rel = s4_rel.max(ratio(rel4.norm(), sc4));
    }
    Ok(SumRuleReport {
        s1: r[0].hypot(r[1]),
        s1_scale: r[2],
        s2: r[3].hypot(r[4]),
        s2_scale: r[5],
        s3,
        s3_rel,
        s4,
        s4_rel,
        normalization: r[6],
        probes: probes.to_vec(),
        degenerate: false,
    })
}

/// The two-stage medium described by `params` (benchmark reservoir).
pub fn benchmark_medium(params: &PhysParams) -> Result<AtomMedium> {
    params.validate()?;
    let atom = Atom::Benchmark(BenchmarkAtom {
        m: params.m,
        g2: params.g2,
        omega0: params.omega0,
    });
    AtomMedium::new(atom, params.alpha)
}

fn mode_fn<'a>(medium: &'a AtomMedium) -> impl Fn(f64, &QuadSettings) -> Result<QuadResult<f64>> + Sync + 'a {
    move |k: f64, mqs: &QuadSettings| {
        let ctx = ModeContext::at_wavenumber(Model::HB, k, medium.alpha, medium.atom.omega0(), medium.atom.mu2())?;
        let b = hb_mode_energy(medium, &ctx, mqs)?;
        Ok(QuadResult {
            value: b.total,
            err: b.err,
            evals: 0,
            converged: b.converged,
            worst_panel: None,
        })
    }
}

/// `E(a) = −π/(24a) + E¹(a)` with `E¹ = (Σₙ − ∫dn)` of the per-mode total.
pub fn hb_casimir_energy_in(medium: &AtomMedium, a: f64, qs: &QuadSettings) -> Result<CasimirResult> {
    qs.validate()?;
    casimir_energy(mode_fn(medium), a, qs)
}

/// `F = −dE/da` for the two-stage medium.
pub fn hb_force_in(medium: &AtomMedium, a: f64, qs: &QuadSettings) -> Result<CasimirResult> {
    qs.validate()?;
    casimir_force(mode_fn(medium), a, qs)
}

/// HB Casimir energy for the benchmark reservoir described by `params`.
pub fn hb_casimir_energy(params: &PhysParams, qs: &QuadSettings) -> Result<CasimirResult> {
    hb_casimir_energy_in(&benchmark_medium(params)?, params.a, qs)
}

/// HB Casimir force for the benchmark reservoir described by `params`.
pub fn hb_force(params: &PhysParams, qs: &QuadSettings) -> Result<CasimirResult> {
    hb_force_in(&benchmark_medium(params)?, params.a, qs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmodel::d_mode_energy;
    use approx::assert_relative_eq;

    fn qs() -> QuadSettings {
        QuadSettings::default().with_rel_tol(1e-9).with_abs_tol(1e-14)
    }

    fn ctx(k: f64, alpha: f64, medium: &AtomMedium) -> ModeContext {
        ModeContext::at_wavenumber(Model::HB, k, alpha, medium.atom.omega0(), medium.atom.mu2()).unwrap()
    }

    fn gapped(alpha: f64) -> AtomMedium {
        let atom = Atom::Benchmark(BenchmarkAtom {
            omega0: 0.5,
            ..BenchmarkAtom::standard()
        });
        AtomMedium::new(atom, alpha).unwrap()
    }

    #[test]
    fn closed_form_coefficients_match_definitions() {
        let m = AtomMedium::benchmark(1.0);
        let cx = ctx(1.0, 1.0, &m);
        let co = StageTwoCoeffs::new(&m, &cx).unwrap();
        for &w in &[0.2, 1.0, 2.5] {
            // ν₀ = (VQ*P*/2)[(ω₁ − ω)(k² − ω²) − α²ω].
            let v = co.stage1.v(w);
            let q = co.stage1.q(w).unwrap();
            let p = co.p(w).unwrap();
            let pre = 0.5 * v * (q * p).conj();
            let nu0 = pre * ((1.0 - w) * (1.0 - w * w) - w);
            let mu0 = pre * ((-1.0 - w) * (1.0 - w * w) - w);
            assert_relative_eq!((co.nu0(w).unwrap() - nu0).norm(), 0.0, epsilon = 1e-14);
            assert_relative_eq!((co.mu0(w).unwrap() - mu0).norm(), 0.0, epsilon = 1e-14);
            // η₀/ξ₀ = (ω − k₁)/(ω + k₁).
            let r = co.eta0(w).unwrap() / co.xi0(w).unwrap();
            assert_relative_eq!(r.re, (w - cx.k1) / (w + cx.k1), epsilon = 1e-14);
            // β₀/α₀ = (ω − ω₁)/(ω + ω₁).
            let r = co.stage1.beta0(w).unwrap() / co.stage1.alpha0(w).unwrap();
            assert_relative_eq!(r.re, (w - 1.0) / (w + 1.0), epsilon = 1e-14);
            // J(ω) = −(2α²/k₁)ωQ*(ω).
            let j = co.j(w).unwrap();
            assert_relative_eq!((j + 2.0 / cx.k1 * w * q.conj()).norm(), 0.0, epsilon = 1e-14);
            // J₂ at ω = ω′.
            assert_relative_eq!((co.j2(w, w).unwrap() - 2.0 / cx.k1 * (1.0 - co.eps(w).unwrap().conj())).norm(), 0.0, epsilon = 1e-14);
            for &wp in &[0.1, 0.7, 4.0] {
                let lit = co.nu1_literal(wp, w).unwrap();
                let fac = co.nu1(wp, w).unwrap();
                assert_relative_eq!((lit - fac).norm(), 0.0, epsilon = 1e-12 * fac.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn nu0_spot_value() {
        // ω = ω₁ = 1, α = 1, k = 1: ν₀ = −(V₁/2Λ)·iα²P* with ε(1) = i, P(1) = 1/(1 − i).
        let m = AtomMedium::benchmark(1.0);
        let cx = ctx(1.0, 1.0, &m);
        let co = StageTwoCoeffs::new(&m, &cx).unwrap();
        let p = co.p(1.0).unwrap();
        assert_relative_eq!((p - 1.0 / c(1.0, -1.0)).norm(), 0.0, epsilon = 1e-15);
        let k1v1 = cx.k1 * co.v1(1.0).unwrap().norm_sqr();
        assert_relative_eq!(k1v1, 2.0 / PI, epsilon = 1e-15);
        let nu0 = co.nu0(1.0).unwrap();
        let expect = (co.v1(1.0).unwrap().norm() / (2.0 * cx.lambda)) * p.norm();
        assert_relative_eq!(nu0.norm(), expect, epsilon = 1e-15);
    }

    #[test]
    fn decoupling_limits_of_coefficients() {
        let m = AtomMedium::benchmark(1e-4);
        let cx = ctx(1.0, 1e-4, &m);
        let co = StageTwoCoeffs::new(&m, &cx).unwrap();
        for &w in &[0.3, 2.0] {
            let b0 = co.stage1.beta0(w).unwrap();
            assert!((co.nu0(w).unwrap() - b0).norm() < 1e-6 * b0.norm());
            let b1 = co.stage1.beta1(0.7, w).unwrap();
            let n1 = co.nu1_literal(0.7, w).unwrap();
            assert!((n1 - b1).norm() < 1e-6 * b1.norm());
        }
    }

    #[test]
    fn reservoir_kernels_closed_form() {
        let atom = Atom::benchmark();
        let q = qs();
        for &cc in &[0.01, 0.5, 1.0, 7.0, 40.0] {
            for kind in [Kernel::K0, Kernel::K1, Kernel::K2] {
                let a = matter_kernel(&atom, kind, cc, &q).unwrap();
                let b = matter_kernel_quadrature(&atom, kind, cc, &q).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn pieces_reassemble_model_d_and_occupation_route() {
        let m = AtomMedium::benchmark(1.0);
        for &k in &[0.05, 0.2, 1.0, 3.0] {
            let cx = ctx(k, 1.0, &m);
            let b = hb_mode_energy(&m, &cx, &qs()).unwrap();
            let sum = b.e_zp + b.e_em + b.e_x + b.e_y + b.e_xy + b.e_ex;
            assert_relative_eq!(sum, b.total, epsilon = 1e-15);
            let occ = occupation_mode_energy(&m, &cx, &qs()).unwrap().value;
            assert_relative_eq!(b.total, occ, max_relative = 1e-8);
            let d = d_mode_energy(&m, k, &qs()).unwrap().value;
            assert_relative_eq!(b.total, d, max_relative = 1e-8);
        }
        let b = hb_mode_energy(&m, &ctx(1.0, 1.0, &m), &qs()).unwrap();
        assert_relative_eq!(b.e_zp, (2f64.sqrt() - 1.0) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(b.total, 0.141680, max_relative = 1e-5);
    }

    #[test]
    fn individual_pieces_agree_with_combined_pass() {
        let m = AtomMedium::benchmark(1.0);
        let cx = ctx(1.0, 1.0, &m);
        let q = qs();
        let b = hb_mode_energy(&m, &cx, &q).unwrap();
        assert_relative_eq!(expectation_hx(&m, &cx, &q).unwrap().value, b.e_x, max_relative = 1e-8);
        assert_relative_eq!(expectation_hy(&m, &cx, &q).unwrap().value, b.e_y, max_relative = 1e-8);
        assert_relative_eq!(expectation_hxy(&m, &cx, &q).unwrap().value, b.e_xy, max_relative = 1e-8);
        assert_relative_eq!(expectation_hex(&m, &cx, &q).unwrap().value, b.e_ex, max_relative = 1e-8);
        assert_relative_eq!(expectation_he_real_axis(&m, &cx, &q).unwrap().value, b.e_em, max_relative = 1e-8);
    }

    #[test]
    fn electromagnetic_piece_rotated_vs_real_axis() {
        for &alpha in &[0.5, 1.0] {
            let m = AtomMedium::benchmark(alpha);
            for &k in &[0.2, 1.0, 4.0] {
                let cx = ctx(k, alpha, &m);
                let rot = expectation_he(&m, &cx, &qs()).unwrap().value;
                let real = expectation_he_real_axis(&m, &cx, &qs()).unwrap().value;
                assert_relative_eq!(rot, real, max_relative = 1e-7);
                let printed = printed_electromagnetic_shift(&m, &cx, &qs()).unwrap().value;
                assert_relative_eq!(printed - rot, cx.k1 - cx.k, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn alternative_interaction_forms_agree() {
        let m = gapped(1.0);
        let cx = ctx(1.0, 1.0, &m);
        let q = QuadSettings::default().with_rel_tol(1e-7).with_abs_tol(1e-12);
        let hex = expectation_hex(&m, &cx, &q).unwrap().value;
        assert_relative_eq!(expectation_hex_direct(&m, &cx, &q).unwrap().value, hex, max_relative = 1e-6);
        let hxy = expectation_hxy_raw(&m, &cx, &q).unwrap().value;
        assert_relative_eq!(expectation_hxy_direct(&m, &cx, &q).unwrap().value, hxy, max_relative = 1e-6);
        let hy = expectation_hy_raw(&m, &cx, &q).unwrap().value;
        assert_relative_eq!(expectation_hy_literal_2d(&m, &cx, &q).unwrap().value, hy, max_relative = 1e-6);
    }

    #[test]
    fn unsubtracted_matter_pieces() {
        let q = qs();
        // Positive for a gapped atom.
        let m = gapped(1.0);
        let cx = ctx(1.0, 1.0, &m);
        let hx = expectation_hx_raw(&m, &cx, &q).unwrap().value;
        let hy = expectation_hy_raw(&m, &cx, &q).unwrap().value;
        assert!(hx > 0.0 && hy > 0.0);
        // Subtracted = raw − raw(α = 0), and the α = 0 values are k-independent.
        let m0 = gapped(0.0);
        let x0 = expectation_hx_raw(&m0, &ctx(1.0, 0.0, &m0), &q).unwrap().value;
        let x0b = expectation_hx_raw(&m0, &ctx(5.0, 0.0, &m0), &q).unwrap().value;
        assert_relative_eq!(x0, x0b, max_relative = 1e-9);
        assert_relative_eq!(expectation_hx(&m, &cx, &q).unwrap().value, hx - x0, max_relative = 1e-7);
        let y0 = expectation_hy_raw(&m0, &ctx(2.0, 0.0, &m0), &q).unwrap().value;
        assert_relative_eq!(expectation_hy(&m, &cx, &q).unwrap().value, hy - y0, max_relative = 1e-7);
        // Free atom: unsubtracted values are rejected.
        let free = AtomMedium::benchmark(1.0);
        assert!(matches!(
            expectation_hx_raw(&free, &ctx(1.0, 1.0, &free), &q),
            Err(Error::Divergent { .. })
        ));
    }

    #[test]
    fn decoupled_medium() {
        let m = AtomMedium::benchmark(0.0);
        let cx = ctx(1.0, 0.0, &m);
        let b = hb_mode_energy(&m, &cx, &qs()).unwrap();
        assert_eq!(b.total, 0.0);
        assert_eq!(expectation_hex(&m, &cx, &qs()).unwrap().value, 0.0);
        assert!(sum_rules(&m, &cx, &qs()).unwrap().degenerate);
    }

    #[test]
    fn sum_rules_hold_and_detect_corruption() {
        let m = AtomMedium::benchmark(1.0);
        let cx = ctx(1.0, 1.0, &m);
        let r = sum_rules(&m, &cx, &qs()).unwrap();
        assert!(r.holds(1e-6, 1e-4), "{r:?}");
        let bad = sum_rules_with(&m, &cx, &qs(), 1.01, &SUM_RULE_PROBES).unwrap();
        assert!(!bad.holds(1e-6, 1e-4));
        assert!((bad.normalization - 1.0).abs() > 1e-3);
    }

    #[test]
    fn printed_mu0_breaks_orthogonality() {
        let m = AtomMedium::benchmark(1.0);
        let cx = ctx(1.0, 1.0, &m);
        let co = StageTwoCoeffs::new(&m, &cx).unwrap();
        let dom = real_axis_domain(&co);
        let rel = |printed: bool| {
            let f = |w: f64| -> Result<Multi<3>> {
                let mu0 = if printed { co.mu0_printed(w)? } else { co.mu0(w)? };
                let a = -co.xi0(w)?.conj() * co.nu0(w)? + co.eta0(w)? * mu0.conj();
                Ok(Multi([a.re, a.im, (co.xi0(w)? * co.nu0(w)?).norm()]))
            };
            let r = try_integrate(f, &dom, &qs()).unwrap().value.0;
            r[0].hypot(r[1]) / r[2]
        };
        assert!(rel(false) < 1e-9);
        assert!(rel(true) > 1e-3);
    }
}
