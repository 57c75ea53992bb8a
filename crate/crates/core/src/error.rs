use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid size is not a power of two or is below the minimum of 16.
    InvalidGrid { size: usize },
    /// Two fields or buffers live on different grids.
    GridMismatch { expected: usize, found: usize },
    /// The grid cannot hold the smallest bubble of the requested data.
    UnderResolved { size: usize, required: usize },
    /// Field mean is too large to be inverted by the Biot-Savart law.
    NonZeroMean { mean: f64, l2: f64 },
    /// A requested time step exceeds the CFL limit of the current state.
    CflViolation { dt: f64, limit: f64 },
    /// A configuration value violates its documented range.
    InvalidConfig(&'static str),
    /// Quadrature region is not allowed (e.g. it touches the origin).
    InvalidRegion(&'static str),
    /// The key integral was requested at r = 0 but the field does not vanish there.
    SingularIntegrand { max_near_origin: f64 },
    /// A fit needs more points than were given.
    InsufficientPoints { needed: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid { size } => {
                write!(f, "grid size {size} must be a power of two and at least 16")
            }
            Error::GridMismatch { expected, found } => {
                write!(f, "grid mismatch: expected {expected}, found {found}")
            }
            Error::UnderResolved { size, required } => {
                write!(f, "grid size {size} under-resolves the data, need at least {required}")
            }
            Error::NonZeroMean { mean, l2 } => {
                write!(f, "vorticity mean {mean:e} is not negligible against L2 norm {l2:e}")
            }
            Error::CflViolation { dt, limit } => {
                write!(f, "time step {dt:e} exceeds the CFL limit {limit:e}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidRegion(msg) => write!(f, "invalid quadrature region: {msg}"),
            Error::SingularIntegrand { max_near_origin } => write!(
                f,
                "key integral at r = 0 is singular: |omega| reaches {max_near_origin:e} near the origin"
            ),
            Error::InsufficientPoints { needed, found } => {
                write!(f, "fit needs at least {needed} points, got {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
