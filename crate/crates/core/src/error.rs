use std::fmt;

use thiserror::Error;

/// Constraint family a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintClass {
    /// Per-drone AoI limit and single-owner association.
    Capacity,
    /// Minimum number of service slots per AoI.
    MinService,
    /// Horizontal speed limit between consecutive waypoints.
    Speed,
    /// Vertical speed limit between consecutive waypoints.
    Climb,
    /// Backhaul (drone-to-BS) pathloss cap.
    Backhaul,
    /// Pairwise protect distance between drones.
    Separation,
}

impl fmt::Display for ConstraintClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ConstraintClass::Capacity => "capacity",
            ConstraintClass::MinService => "minimum service slots",
            ConstraintClass::Speed => "horizontal speed",
            ConstraintClass::Climb => "climb rate",
            ConstraintClass::Backhaul => "backhaul pathloss",
            ConstraintClass::Separation => "protect distance",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("undefined geometry: {0}")]
    UndefinedGeometry(&'static str),

    #[error("infeasible ({class}): {detail}")]
    Infeasible {
        class: ConstraintClass,
        detail: String,
    },

    #[error("malformed input: {0}")]
    Structure(String),

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn infeasible(class: ConstraintClass, detail: impl Into<String>) -> Self {
        Error::Infeasible {
            class,
            detail: detail.into(),
        }
    }

    /// Constraint class for infeasibility errors.
    pub fn constraint_class(&self) -> Option<ConstraintClass> {
        match self {
            Error::Infeasible { class, .. } => Some(*class),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
