//! Error type shared by all toolkit operations.

use thiserror::Error;

/// Errors produced while validating models or running numerical operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("model document is invalid: {0}")]
    Schema(String),

    #[error("speed is not positive at r = {r}: c = {c}")]
    NonPositiveSpeed { r: f64, c: f64 },

    #[error("Herglotz condition violated: d/dr(r/c) = {margin} at r = {r}")]
    HerglotzViolation { r: f64, margin: f64 },

    #[error("model with R = 0 must have c'(0) = 0, got c'(0) ~ {slope}")]
    CenterSlope { slope: f64 },

    #[error("metric table is not positive definite at r = {r}")]
    MetricNotPositive { r: f64 },

    #[error("rotational symmetry in dimension {dim} requires a vanishing cross term, got |b| = {b_max}")]
    CrossTermNotAllowed { dim: u32, b_max: f64 },

    #[error("argument r = {r} outside model domain [{lo}, {hi}]")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },

    #[error("momentum p = {p} outside the {regime} window ({lo}, {hi})")]
    OutsideRegime {
        regime: &'static str,
        p: f64,
        lo: f64,
        hi: f64,
    },

    #[error("evanescent regime at r = {r}: c^-2 < p^2/r^2 for p = {p}")]
    Evanescent { r: f64, p: f64 },

    #[error("quadrature did not converge: error {achieved:.3e} > requested {requested:.3e} after {panels} panels")]
    QuadratureFailure {
        achieved: f64,
        requested: f64,
        panels: usize,
    },

    #[error("no root bracketed for {what} in [{lo}, {hi}]")]
    NoRoot { what: String, lo: f64, hi: f64 },

    #[error("root solve for {what} did not converge after {iters} iterations")]
    NoConvergence { what: String, iters: usize },

    #[error("continuation left the stability basin at tau = {tau}; last good tau = {last_good}")]
    ContinuationDiverged { tau: f64, last_good: f64 },

    #[error("orbit is degenerate (|alpha'| = {alpha_prime:.3e} at r = {r}); no amplitude prediction")]
    DegenerateOrbit { r: f64, alpha_prime: f64 },

    #[error("reflecting enumeration requires an inner boundary (R > 0)")]
    NoInnerBoundary,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
