use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("frictionless problem is ill-posed: m(q_M) = {0} <= 0")]
    IllPosedFrictionless(f64),

    #[error("adaptive quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("problem is not well-posed for xi = {xi} (threshold {xi_bar})")]
    NotWellPosed { xi: f64, xi_bar: f64 },

    #[error("cost map does not bracket xi = {0}")]
    BracketFailure(f64),

    #[error("no crossing with m from z = {z}: {reason}")]
    NoCrossing { z: f64, reason: String },

    #[error("step size underflow at q = {0}")]
    StiffnessFailure(f64),

    #[error("singular point of the n-ODE at q = {q}, n = {n}")]
    SingularPoint { q: f64, n: f64 },

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("p = {p} outside the extended domain ({lo}, {hi})")]
    OutOfDomain { p: f64, lo: f64, hi: f64 },

    #[error("cost parameters do not match the solved round-trip cost")]
    CostMismatch,

    #[error("Mobius pole hit: c = {c}, q = {q}")]
    PoleHit { c: f64, q: f64 },

    #[error("state is not solvent")]
    InsolventState,

    #[error("Merton ratio is degenerate (q_M = {0})")]
    DegenerateMertonRatio(f64),

    #[error("expansion hypothesis fails: {0}")]
    HypothesisFail(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("need at least {need} paths, got {got}")]
    TooFewPaths { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
