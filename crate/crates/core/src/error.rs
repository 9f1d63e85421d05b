use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("flux evaluated to a non-finite value at u = {node}")]
    NonFiniteFlux { node: f64 },

    #[error("state {u} lies outside the flux window [{lo}, {hi}]")]
    OutOfRange { u: f64, lo: f64, hi: f64 },

    #[error("flux gap g - f must be positive, found minimum {min_gap} at u = {at}")]
    GapViolation { min_gap: f64, at: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),

    #[error("plateau width collapsed to {width} at t = {time} (cell {cell})")]
    PlateauCollapse { time: f64, cell: usize, width: f64 },

    #[error("restart cap of {cap} exceeded at t = {time} with {fronts} fronts")]
    RestartCap { cap: u64, time: f64, fronts: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("viscous scheme produced a non-finite value after {steps} steps")]
    BlowUp { steps: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}
