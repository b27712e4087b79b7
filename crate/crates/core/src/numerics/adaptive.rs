//! Globally adaptive Gauss–Kronrod integration over finite, semi-infinite
//! and full-line domains, principal values and nested 2-D integrals.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use super::gk::{gk21_panel, PanelEstimate};
use super::{QuadResult, QuadValue};
use crate::error::{Error, Result};
use crate::types::QuadSettings;

/// Integration domain: end points (either may be infinite), interior
/// breakpoints where the integrand has structure, and the algebraic decay
/// exponent `p > 1` of the integrand at infinite ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub breaks: Vec<f64>,
    pub tail_exponent: f64,
    pub tail_start: Option<f64>,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            breaks: Vec::new(),
            tail_exponent: 2.0,
            tail_start: None,
        }
    }

    pub fn semi_inf(lo: f64) -> Self {
        Self::new(lo, f64::INFINITY)
    }

    pub fn real_line() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn with_breaks<I: IntoIterator<Item = f64>>(mut self, breaks: I) -> Self {
        self.breaks.extend(breaks);
        self
    }

    pub fn with_tail(mut self, exponent: f64) -> Self {
        self.tail_exponent = exponent;
        self
    }

    pub fn with_tail_start(mut self, start: f64) -> Self {
        self.tail_start = Some(start);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.lo.is_nan() || self.hi.is_nan() || self.lo > self.hi {
            return Err(Error::InvalidParameter {
                name: "interval",
                reason: format!("bad bounds [{}, {}]", self.lo, self.hi),
            });
        }
        let infinite = self.lo.is_infinite() || self.hi.is_infinite();
        if infinite && !(self.tail_exponent > 1.0) {
            return Err(Error::InvalidParameter {
                name: "tail_exponent",
                reason: format!("must exceed 1, got {}", self.tail_exponent),
            });
        }
        Ok(())
    }

    fn segments(&self, qs: &QuadSettings) -> Vec<Segment> {
        let mut pts: Vec<f64> = self
            .breaks
            .iter()
            .copied()
            .filter(|b| b.is_finite() && *b > self.lo && *b < self.hi)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let q = 1.0 / (self.tail_exponent - 1.0);
        let big = pts.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        let mut segs = Vec::new();
        let mut lo = self.lo;
        if lo == f64::NEG_INFINITY {
            let start = match self.tail_start {
                Some(t) => -t.abs(),
                None => {
                    let mut s = -(qs.omega_cutoff.max(2.0 * big));
                    if self.hi.is_finite() {
                        s = s.min(self.hi - qs.omega_cutoff);
                    }
                    s
                }
            };
            segs.push(Segment::tail(start, -1.0, q, qs.omega_cutoff));
            pts.retain(|b| *b > start);
            lo = start;
        }
        let mut hi_tail = None;
        let mut hi = self.hi;
        if hi == f64::INFINITY {
            let start = self.tail_start.map(f64::abs).unwrap_or_else(|| {
                let mut s = qs.omega_cutoff.max(2.0 * big);
                if lo.is_finite() {
                    s = s.max(lo + qs.omega_cutoff);
                }
                s
            });
            pts.retain(|b| *b < start);
            hi_tail = Some(Segment::tail(start, 1.0, q, qs.omega_cutoff));
            hi = start;
        }
        let mut a = lo;
        for b in pts.into_iter().chain(std::iter::once(hi)) {
            if b > a {
                segs.push(Segment {
                    map: Map::Identity,
                    lo: a,
                    hi: b,
                });
            }
            a = b;
        }
        segs.extend(hi_tail);
        segs
    }
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `x = base + sign·scale·(t^{−q} − 1)`, `t ∈ (0, 1]`.
    Tail { base: f64, sign: f64, q: f64, scale: f64 },
    /// `t ↦ (f(c + t) − f(c − t)) / t` for a simple pole at `c`.
    PoleSym { center: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    map: Map,
    lo: f64,
    hi: f64,
}

impl Segment {
    fn tail(base: f64, sign: f64, q: f64, cutoff: f64) -> Self {
        let scale = if base.abs() > 0.0 { base.abs() } else { cutoff };
        Segment {
            map: Map::Tail {
                base,
                sign,
                q,
                scale,
            },
            lo: 0.0,
            hi: 1.0,
        }
    }
}

impl Map {
    fn to_x(self, u: f64) -> f64 {
        match self {
            Map::Identity => u,
            Map::Tail {
                base,
                sign,
                q,
                scale,
            } => base + sign * scale * (u.powf(-q) - 1.0),
            Map::PoleSym { center } => center + u,
        }
    }

    fn eval<T: QuadValue, F: Fn(f64) -> T>(self, f: &F, u: f64) -> T {
        match self {
            Map::Identity => f(u),
            Map::Tail {
                base,
                sign,
                q,
                scale,
            } => {
                let s = u.powf(-q);
                let x = base + sign * scale * (s - 1.0);
                let jac = q * scale * s / u;
                if !x.is_finite() || !jac.is_finite() {
                    return T::default();
                }
                let v = f(x);
                if jac == 0.0 {
                    T::default()
                } else {
                    v * jac
                }
            }
            Map::PoleSym { center } => (f(center + u) - f(center - u)) * (1.0 / u),
        }
    }
}

struct Panel<T> {
    seg: usize,
    lo: f64,
    hi: f64,
    est: PanelEstimate<T>,
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

pub(crate) fn pairwise_sum<T: QuadValue>(xs: &[T]) -> T {
    if xs.len() <= 8 {
        xs.iter().fold(T::default(), |s, x| s + *x)
    } else {
        let (l, r) = xs.split_at(xs.len() / 2);
        pairwise_sum(l) + pairwise_sum(r)
    }
}

fn run<T, E>(eval: &E, segs: &[Segment], qs: &QuadSettings) -> QuadResult<T>
where
    T: QuadValue,
    E: Fn(&Segment, f64) -> T,
{
    let mut panels: Vec<Panel<T>> = Vec::with_capacity(segs.len() * 8);
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for (i, s) in segs.iter().enumerate() {
        let est = gk21_panel(&|u: f64| eval(s, u), s.lo, s.hi);
        evals += 21;
        heap.push(Key(est.err, panels.len()));
        panels.push(Panel {
            seg: i,
            lo: s.lo,
            hi: s.hi,
            est,
        });
    }
    let limit = qs.max_subdivisions.max(segs.len());
    loop {
        let values: Vec<T> = panels.iter().map(|p| p.est.kronrod).collect();
        let total = pairwise_sum(&values);
        let err: f64 = panels.iter().map(|p| p.est.err).sum();
        let tol = qs.tolerance(total.norm());
        let done = err <= tol;
        if done || panels.len() >= limit || heap.is_empty() {
            return finish(panels, segs, evals, done);
        }
        let Key(_, idx) = heap.pop().expect("heap not empty");
        let (seg, lo, hi) = (panels[idx].seg, panels[idx].lo, panels[idx].hi);
        let mid = 0.5 * (lo + hi);
        let width_floor = 64.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if hi - lo <= width_floor || mid <= lo || mid >= hi {
            continue;
        }
        let sg = &segs[seg];
        let g = |u: f64| eval(sg, u);
        let left = gk21_panel(&g, lo, mid);
        let right = gk21_panel(&g, mid, hi);
        evals += 42;
        panels[idx] = Panel {
            seg,
            lo,
            hi: mid,
            est: left,
        };
        heap.push(Key(left.err, idx));
        heap.push(Key(right.err, panels.len()));
        panels.push(Panel {
            seg,
            lo: mid,
            hi,
            est: right,
        });
    }
}

fn finish<T: QuadValue>(
    mut panels: Vec<Panel<T>>,
    segs: &[Segment],
    evals: usize,
    done: bool,
) -> QuadResult<T> {
    panels.sort_by(|a, b| a.seg.cmp(&b.seg).then(a.lo.total_cmp(&b.lo)));
    let values: Vec<T> = panels.iter().map(|p| p.est.kronrod).collect();
    let value = pairwise_sum(&values);
    let err: f64 = panels.iter().map(|p| p.est.err).sum();
    let worst = panels
        .iter()
        .max_by(|a, b| a.est.err.total_cmp(&b.est.err))
        .map(|p| {
            let m = segs[p.seg].map;
            let (x0, x1) = (m.to_x(p.lo), m.to_x(p.hi));
            (x0.min(x1), x0.max(x1))
        });
    QuadResult {
        value,
        err,
        evals,
        converged: done && err.is_finite() && value.is_finite(),
        worst_panel: worst,
    }
}

/// Adaptive integral of `f` over `dom`. Infinite ends are mapped onto
/// `(0, 1]` using the declared tail exponent. Exceeding
/// `qs.max_subdivisions` yields `converged = false`, never a silent value.
pub fn integrate<T, F>(f: F, dom: &Interval, qs: &QuadSettings) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if dom.validate().is_err() {
        return QuadResult {
            value: T::default(),
            err: f64::INFINITY,
            evals: 0,
            converged: false,
            worst_panel: None,
        };
    }
    if dom.lo == dom.hi {
        return QuadResult::exact(T::default());
    }
    let segs = dom.segments(qs);
    run(&|s: &Segment, u: f64| s.map.eval(&f, u), &segs, qs)
}

/// `∫₀^∞ f` for an integrand decaying like `ω^{−tail_exponent}`.
pub fn integrate_semi_inf<T, F>(f: F, tail_exponent: f64, qs: &QuadSettings) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate(f, &Interval::semi_inf(0.0).with_tail(tail_exponent), qs)
}

/// Principal value of `∫ f(x)/(x − pole) dx` over `dom`, by pairing points
/// symmetric about the pole.
pub fn principal_value<T, F>(f: F, pole: f64, dom: &Interval, qs: &QuadSettings) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    dom.validate()?;
    if !(pole > dom.lo && pole < dom.hi) {
        return Err(Error::InvalidParameter {
            name: "pole",
            reason: format!("{pole} must lie strictly inside [{}, {}]", dom.lo, dom.hi),
        });
    }
    if !f(pole).is_finite() {
        return Err(Error::SingularPoint {
            at: format!("{pole}"),
            what: "numerator is singular at the pole (not a simple pole)",
        });
    }
    let delta = 0.5 * (pole - dom.lo).min(dom.hi - pole).min(pole.abs().max(qs.omega_cutoff * 0.0625));
    let left = Interval {
        lo: dom.lo,
        hi: pole - delta,
        breaks: dom.breaks.clone(),
        tail_exponent: dom.tail_exponent,
        tail_start: dom.tail_start,
    };
    let far = dom.tail_start.unwrap_or(0.0).abs().max(2.0 * (pole.abs() + delta));
    let right = Interval {
        lo: pole + delta,
        hi: dom.hi,
        breaks: dom.breaks.clone(),
        tail_exponent: dom.tail_exponent,
        tail_start: dom.hi.is_infinite().then(|| far.max(qs.omega_cutoff)),
    };
    let mut segs = left.segments(qs);
    let mut inner: Vec<f64> = dom
        .breaks
        .iter()
        .map(|b| (b - pole).abs())
        .filter(|t| *t > 0.0 && *t < delta)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut a = 0.0;
    for b in inner.into_iter().chain(std::iter::once(delta)) {
        segs.push(Segment {
            map: Map::PoleSym { center: pole },
            lo: a,
            hi: b,
        });
        a = b;
    }
    segs.extend(right.segments(qs));
    let g = |x: f64| f(x) * (1.0 / (x - pole));
    let eval = |s: &Segment, u: f64| match s.map {
        Map::PoleSym { .. } => s.map.eval(&f, u),
        _ => s.map.eval(&g, u),
    };
    Ok(run(&eval, &segs, qs))
}

/// `∫ f(x)/(x − pole − i0) dx = PV + iπ f(pole)`.
pub fn integrate_pv<T, F>(f: F, pole: f64, dom: &Interval, qs: &QuadSettings) -> Result<QuadResult<Complex64>>
where
    T: QuadValue + Into<Complex64>,
    F: Fn(f64) -> T,
{
    let fp: Complex64 = f(pole).into();
    let pv = principal_value(&f, pole, dom, qs)?;
    Ok(pv.map(|v| v.into() + Complex64::i() * PI * fp))
}

#[derive(Debug, Clone, Copy, Default)]
struct Tracked<T> {
    v: T,
    e: f64,
}

impl<T: QuadValue> Add for Tracked<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Tracked {
            v: self.v + o.v,
            e: self.e + o.e,
        }
    }
}

impl<T: QuadValue> Sub for Tracked<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Tracked {
            v: self.v - o.v,
            e: self.e - o.e,
        }
    }
}

impl<T: QuadValue> Mul<f64> for Tracked<T> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Tracked {
            v: self.v * s,
            e: self.e * s,
        }
    }
}

impl<T: QuadValue> QuadValue for Tracked<T> {
    fn norm(&self) -> f64 {
        self.v.norm()
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.e.is_finite()
    }
    fn abs_parts(&self) -> Self {
        Tracked {
            v: self.v.abs_parts(),
            e: self.e.abs(),
        }
    }
}

/// Nested adaptive 2-D integral `∫dx ∫dy f(x, y)` with the inner domain
/// depending on `x`. Inner errors are integrated along with the value.
pub fn integrate_2d<T, F, G>(f: F, outer: &Interval, inner: G, qs: &QuadSettings) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
    G: Fn(f64) -> Interval,
{
    let inner_qs = QuadSettings {
        rel_tol: qs.rel_tol * 0.25,
        abs_tol: qs.abs_tol * 0.25,
        ..*qs
    };
    let all_inner = AtomicBool::new(true);
    let evals = std::sync::atomic::AtomicUsize::new(0);
    let g = |x: f64| {
        let r = integrate(|y| f(x, y), &inner(x), &inner_qs);
        evals.fetch_add(r.evals, AtomicOrdering::Relaxed);
        if !r.converged {
            all_inner.store(false, AtomicOrdering::Relaxed);
        }
        Tracked { v: r.value, e: r.err }
    };
    let out = integrate(g, outer, qs);
    let err = out.err + out.value.e.abs();
    let value = out.value.v;
    QuadResult {
        value,
        err,
        evals: out.evals + evals.into_inner(),
        converged: out.converged && all_inner.into_inner() && err <= qs.tolerance(value.norm()),
        worst_panel: out.worst_panel,
    }
}
