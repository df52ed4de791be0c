use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("points are not collinear (normalized triple product {0:.3e})")]
    Collinear(f64),
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    #[error("point ({x:.6}, {y:.6}) is outside the closed domain")]
    Containment { x: f64, y: f64 },
    #[error("point is at infinity in the affine chart")]
    Chart,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("grid too coarse: {0} interior nodes across the domain, need at least 20")]
    Resolution(usize),
    #[error("Monge-Ampere solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },
    #[error("corrupt solution: u = {value} >= 0 at interior node ({i}, {j})")]
    CorruptSolution { i: usize, j: usize, value: f64 },
    #[error("frame degeneracy at node ({i}, {j}): condition number {cond:.3e}")]
    FrameDegeneracy { i: usize, j: usize, cond: f64 },
    #[error("samples fall in the boundary collar at t = {0:?}")]
    Collar(Vec<f64>),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("ODE barrier blows up at t_max = {t_max}")]
    BlowUp { t_max: f64 },
    #[error("ball radius exceeds the reliable radius R_max = {r_max:.6}")]
    Truncation { r_max: f64 },
    #[error("element is not proximal: eigenvalue moduli {0:?}")]
    NotProximal([f64; 3]),
    #[error("orbit leaves the domain at step {step}")]
    Invariance { step: usize },
    #[error("limit-set hull is degenerate (area {area:.3e})")]
    HullDegenerate { area: f64 },
    #[error("parse error at `{key}`: {message}")]
    Parse { key: String, message: String },
}
