use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular point at {at}: {what}")]
    SingularPoint { at: String, what: &'static str },

    #[error("{what} did not converge: err {err:.3e} > tol {tol:.3e} after {evals} evaluations")]
    NotConverged {
        what: &'static str,
        err: f64,
        tol: f64,
        evals: usize,
    },

    #[error("summand is not decaying: |f({n_hi})| = {f_hi:.3e} vs |f({n_lo})| = {f_lo:.3e}")]
    NonDecaying {
        n_lo: f64,
        n_hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("coupling `{what}` diverges: {reason}")]
    Divergent { what: &'static str, reason: String },

    #[error("consistency violated in {stage}: lhs {lhs:.6e} >= rhs {rhs:.6e}")]
    Consistency {
        stage: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("result has an imaginary residue {residue:.3e} (scale {scale:.3e}) in {what}")]
    NotReal {
        what: &'static str,
        residue: f64,
        scale: f64,
    },

    #[error("finite-difference step {step:.3e} is below the noise floor (noise {noise:.3e})")]
    StepUnderflow { step: f64, noise: f64 },
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {x}"),
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be non-negative and finite, got {x}"),
        })
    }
}
