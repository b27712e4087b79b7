//! Richardson-extrapolated finite differences.

use super::QuadResult;
use crate::types::QuadSettings;

/// Central difference at `x` with step `h`, refined with `h/2` and `h/4`.
/// `g` returns a value and its absolute uncertainty; the uncertainty is
/// propagated through the difference weights and added to the truncation
/// estimate. `converged` is false when the result misses `tol`.
pub fn differentiate_with_noise<G>(g: G, x: f64, h: f64, tol: f64) -> QuadResult<f64>
where
    G: Fn(f64) -> (f64, f64),
{
    let steps = [h, 0.5 * h, 0.25 * h];
    let mut d = [0.0; 3];
    let mut noise = 0.0;
    // Weights of D(h), D(h/2), D(h/4) in the doubly extrapolated value.
    let w: [f64; 3] = [1.0 / 45.0, -20.0 / 45.0, 64.0 / 45.0];
    for (i, s) in steps.iter().enumerate() {
        let (gp, ep) = g(x + s);
        let (gm, em) = g(x - s);
        d[i] = (gp - gm) / (2.0 * s);
        noise += w[i].abs() * (ep + em + f64::EPSILON * (gp.abs() + gm.abs())) / (2.0 * s);
    }
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r2 = (4.0 * d[2] - d[1]) / 3.0;
    let value = (16.0 * r2 - r1) / 15.0;
    let err = (value - r2).abs() + noise;
    QuadResult {
        value,
        err,
        evals: 6,
        converged: err.is_finite() && err <= tol,
        worst_panel: None,
    }
}

/// `g′(x)` with the step `qs.fd_step·|x|` (or `qs.fd_step` at `x = 0`).
pub fn differentiate_central<G: Fn(f64) -> f64>(g: G, x: f64, qs: &QuadSettings) -> QuadResult<f64> {
    let h = if x == 0.0 { qs.fd_step } else { qs.fd_step * x.abs() };
    let r = differentiate_with_noise(|t| (g(t), 0.0), x, h, f64::INFINITY);
    let tol = qs.tolerance(r.value);
    QuadResult {
        converged: r.err <= tol,
        ..r
    }
}

/// Third derivative from the five-point stencil at `h` and `h/2`,
/// Richardson-combined. Returns `(value, error estimate)`.
pub fn third_derivative<G: Fn(f64) -> f64>(g: G, x: f64, h: f64) -> (f64, f64) {
    let d3 = |s: f64| (g(x + 2.0 * s) - 2.0 * g(x + s) + 2.0 * g(x - s) - g(x - 2.0 * s)) / (2.0 * s * s * s);
    let a = d3(h);
    let b = d3(0.5 * h);
    let r = (4.0 * b - a) / 3.0;
    (r, (r - b).abs())
}

/// Fifth derivative from the seven-point central stencil.
pub fn fifth_derivative<G: Fn(f64) -> f64>(g: G, x: f64, h: f64) -> f64 {
    (g(x + 3.0 * h) - 4.0 * g(x + 2.0 * h) + 5.0 * g(x + h) - 5.0 * g(x - h) + 4.0 * g(x - 2.0 * h)
        - g(x - 3.0 * h))
        / (2.0 * h.powi(5))
}
