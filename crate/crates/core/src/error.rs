use thiserror::Error;

use crate::angular::HalfInt;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used by front ends to pick an exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    MissingConstant,
}

#[derive(Clone, Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("F={f} is not allowed for I={i}, J={j}")]
    InvalidF { i: HalfInt, j: HalfInt, f: HalfInt },

    #[error("m_F={m_f} is outside the range of level {level}")]
    InvalidProjection { level: String, m_f: HalfInt },

    #[error("rank-2 matrix undefined for level {level} with J={j} (J < 1)")]
    RankUndefined { level: String, j: HalfInt },

    #[error("level {level} is missing required constant `{field}`")]
    MissingConstant { level: String, field: &'static str },

    #[error("degenerate zero-field hyperfine energies in level {level}, m_F={m_f}")]
    DegenerateZeroField { level: String, m_f: HalfInt },

    #[error(
        "ambiguous state continuation in level {level}, m_F={m_f} at B={b_tesla:e} T; use a finer tracking grid"
    )]
    TrackingAmbiguity { level: String, m_f: HalfInt, b_tesla: f64 },

    #[error("field B={b_tesla:e} T lies outside the tracked range [0, {max_tesla:e}] T")]
    OutsideTrackedRange { b_tesla: f64, max_tesla: f64 },

    #[error("root certification failed near B={b_tesla:e} T: {reason}")]
    RootCertification { b_tesla: f64, reason: String },

    #[error("second-difference step underflow at B0={b_tesla:e} T")]
    StepUnderflow { b_tesla: f64 },

    #[error("{0}")]
    Numerical(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Input(_)
            | Error::Schema { .. }
            | Error::InvalidF { .. }
            | Error::InvalidProjection { .. }
            | Error::RankUndefined { .. } => ErrorKind::Input,
            Error::MissingConstant { .. } => ErrorKind::MissingConstant,
            Error::DegenerateZeroField { .. }
            | Error::TrackingAmbiguity { .. }
            | Error::OutsideTrackedRange { .. }
            | Error::RootCertification { .. }
            | Error::StepUnderflow { .. }
            | Error::Numerical(_) => ErrorKind::Numerical,
        }
    }
}
