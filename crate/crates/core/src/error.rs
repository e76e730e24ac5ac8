use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid does not resolve the packet: {0}")]
    UnresolvedPacket(String),

    #[error("region [{lo}, {hi}] is not inside the grid [{grid_lo}, {grid_hi}]")]
    RegionOutOfGrid {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("wave function has zero norm")]
    ZeroNorm,

    #[error("energy must be positive, got {0}")]
    NonpositiveEnergy(f64),

    #[error("step width must be positive, got {0}")]
    NonpositiveWidth(f64),

    #[error("u and v are both zero")]
    DegenerateInput,

    #[error("asymptotic wavenumber is imaginary on the {side} side (kinetic energy {kinetic})")]
    EvanescentAsymptote { side: &'static str, kinetic: f64 },

    #[error("need at least one slice, got {0}")]
    SliceCountTooSmall(usize),

    #[error("packet carries {mass:e} of its momentum mass at k < 0")]
    LeftMovingPacket { mass: f64 },

    #[error("potential is not supported here: {0}")]
    UnsupportedPotential(String),

    #[error("time step {dt:e} does not resolve the fastest phase (rate {rate:e}, dt*rate = {product:.3})")]
    UnstableStep { dt: f64, rate: f64, product: f64 },

    #[error("packets not separated at t = {time:e} (probability {zone_probability:e} near the step)")]
    PacketsNotSeparated { time: f64, zone_probability: f64 },

    #[error("fixed-point map is not a contraction (bound {bound})")]
    NotContracting { bound: f64 },

    #[error("alpha = {alpha} is below the verified regime (alpha >= 10)")]
    UnverifiedRegime { alpha: f64 },

    #[error("root for n = {n} is not a decay root (kappa = {re} + {im}i)")]
    NonDecayRoot { n: i64, re: f64, im: f64 },

    #[error("fixed-point iteration for n = {n} stalled at residual {residual:e} after {iterations} iterations")]
    NoConvergence { n: i64, residual: f64, iterations: usize },

    #[error("grid half-width {available} is smaller than the required {required}")]
    GridTooSmall { available: f64, required: f64 },

    #[error(
        "escaped probability can return from the walls before t = {horizon} (half-width {available}, need {required})"
    )]
    WallReturn {
        horizon: f64,
        available: f64,
        required: f64,
    },
}

impl Error {
    /// Stable identifier used in experiment summaries.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::UnresolvedPacket(_) => "UnresolvedPacket",
            Error::RegionOutOfGrid { .. } => "RegionOutOfGrid",
            Error::ZeroNorm => "ZeroNorm",
            Error::NonpositiveEnergy(_) => "NonpositiveEnergy",
            Error::NonpositiveWidth(_) => "NonpositiveWidth",
            Error::DegenerateInput => "DegenerateInput",
            Error::EvanescentAsymptote { .. } => "EvanescentAsymptote",
            Error::SliceCountTooSmall(_) => "SliceCountTooSmall",
            Error::LeftMovingPacket { .. } => "LeftMovingPacket",
            Error::UnsupportedPotential(_) => "UnsupportedPotential",
            Error::UnstableStep { .. } => "UnstableStep",
            Error::PacketsNotSeparated { .. } => "PacketsNotSeparated",
            Error::NotContracting { .. } => "NotContracting",
            Error::UnverifiedRegime { .. } => "UnverifiedRegime",
            Error::NonDecayRoot { .. } => "NonDecayRoot",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::GridTooSmall { .. } => "GridTooSmall",
            Error::WallReturn { .. } => "WallReturn",
        }
    }
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
