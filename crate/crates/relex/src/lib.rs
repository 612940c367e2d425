//! Lower bounds on the channel reliability function for point-to-point
//! DMCs and two-user discrete memoryless MACs, computed by constrained
//! minimization over joint-distribution polytopes, plus desk-scale
//! verification of the underlying constant-composition packing and
//! expurgation machinery by direct simulation.

use std::fmt;

pub mod channel;
pub mod dist;
pub mod dmc;
pub mod lab;
pub mod mac;
pub mod metric;
pub mod opt;
pub mod types;

pub use channel::{Channel, ChannelKind};
pub use dist::{Axis, ConditionalDist, JointDist};
pub use metric::{Decision, DecodingMetric};
pub use opt::SolverConfig;
pub use types::RationalType;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Axis-name lookup or grouping failure.
    Axis(String),
    /// Dimension/shape disagreement.
    Shape(String),
    /// Invalid numeric content (masses, rows, rates).
    Invalid(String),
    /// Text-format parse failure.
    Parse(String),
    /// An exhaustive computation was refused because it exceeds the
    /// configured capability cap.
    CapExceeded(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Axis(m) => write!(f, "axis error: {m}"),
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::Invalid(m) => write!(f, "invalid input: {m}"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::CapExceeded(m) => write!(f, "capability cap exceeded: {m}"),
        }
    }
}

impl std::error::Error for Error {}
