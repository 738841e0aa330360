use core::fmt;

/// Errors produced by grid construction, the atomic integrator and the
/// field propagation.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A parameter failed validation; `name` identifies it.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// The entrance envelope is still above the boundary floor at the edge
    /// of the τ window.
    WindowTooNarrow { edge_ratio: f64, floor: f64 },
    /// The norm of the atomic state drifted beyond tolerance; the τ grid
    /// must be refined.
    NormDrift { drift: f64, tolerance: f64 },
    /// Two τ-sampled quantities were defined on different grids.
    GridMismatch { expected: usize, found: usize },
    /// The generalized Rabi frequency vanishes, so the dressed frame is
    /// degenerate.
    DegenerateFrame,
    /// A non-finite value appeared while propagating through the medium.
    NonFinite { zeta: f64 },
    /// A snapshot depth lies outside `[0, zeta_max]`.
    SnapshotOutOfRange { zeta: f64, zeta_max: f64 },
    /// Not enough snapshots to form a ζ-difference.
    TooFewSnapshots { found: usize },
    /// Root bracketing for the nonlinear time failed.
    RootBracket { zeta: f64, tau: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => write!(f, "invalid parameter `{name}`: {reason}"),
            Error::WindowTooNarrow { edge_ratio, floor } => write!(
                f,
                "entrance envelope at the window edge is {edge_ratio:e} of peak, above the floor {floor:e}"
            ),
            Error::NormDrift { drift, tolerance } => write!(
                f,
                "state norm drifted by {drift:e} (tolerance {tolerance:e}); refine the tau grid"
            ),
            Error::GridMismatch { expected, found } => {
                write!(f, "grid mismatch: expected {expected} samples, found {found}")
            }
            Error::DegenerateFrame => write!(f, "dressed frame undefined: both Rabi frequencies vanish"),
            Error::NonFinite { zeta } => write!(f, "non-finite field value at depth zeta = {zeta}"),
            Error::SnapshotOutOfRange { zeta, zeta_max } => {
                write!(f, "snapshot depth {zeta} outside [0, {zeta_max}]")
            }
            Error::TooFewSnapshots { found } => {
                write!(f, "need at least 2 snapshots, record has {found}")
            }
            Error::RootBracket { zeta, tau } => {
                write!(f, "could not bracket the nonlinear time at zeta = {zeta}, tau = {tau}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
