//! Polynomial roots and complex Newton iteration, used to locate poles of
//! rational response functions.

use num_complex::Complex64;

/// Polynomial with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn from_real(c: &[f64]) -> Self {
        Poly(c.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)).unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }
}

/// All roots by Durand–Kerner iteration followed by Newton polishing.
pub fn polynomial_roots(p: &Poly) -> Vec<Complex64> {
    let deg = p.degree();
    if deg == 0 {
        return Vec::new();
    }
    let lead = p.0[deg];
    let monic: Vec<Complex64> = p.0[..=deg].iter().map(|c| c / lead).collect();
    let mp = Poly(monic);
    let radius = 1.0 + mp.0[..deg].iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32) * (0.5 * radius).min(1.0).max(0.5)).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = mp.eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    let dp = p.derivative();
    for r in z.iter_mut() {
        for _ in 0..3 {
            let d = dp.eval(*r);
            if d.norm() == 0.0 {
                break;
            }
            *r -= p.eval(*r) / d;
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

/// Newton iteration for an analytic `g` with derivative `dg`.
pub fn newton_complex<G, D>(g: G, dg: D, start: Complex64, tol: f64, max_iter: usize) -> Option<Complex64>
where
    G: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let mut z = start;
    for _ in 0..max_iter {
        let d = dg(z);
        if d.norm() == 0.0 || !d.re.is_finite() {
            return None;
        }
        let step = g(z) / d;
        z -= step;
        if step.norm() <= tol * z.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}
