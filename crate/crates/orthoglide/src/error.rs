use crate::model::Leg;

/// Errors produced by the kinematics, dynamics and simulation layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An inverse-geometry arcsine argument left the open interval (-1, 1).
    #[error("pose outside workspace: leg {leg}, {what} = {value}")]
    OutOfWorkspace {
        leg: Leg,
        what: &'static str,
        value: f64,
    },

    /// A configuration too close to a kinematic singularity to solve reliably.
    #[error("near-singular configuration: {detail}")]
    NearSingular { detail: String },

    /// A 3x3 solve hit a (numerically) singular matrix.
    #[error("singular matrix in linear solve")]
    SingularMatrix,

    /// Leg identifier other than A, B or C.
    #[error("unknown leg `{0}` (expected A, B or C)")]
    UnknownLeg(String),

    /// A time-differencing step left the reachable workspace.
    #[error("differencing step too large at t = {t} s")]
    StepTooLarge { t: f64 },

    /// Failure at a specific trajectory sample.
    #[error("at t = {t} s: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed config line {line}: {detail}")]
    MalformedConfig { line: usize, detail: String },

    #[error("malformed CSV at line {line}: {detail}")]
    MalformedCsv { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_time(self, t: f64) -> Error {
        Error::AtTime {
            t,
            source: Box::new(self),
        }
    }

    /// True for workspace-limit and singularity conditions (CLI exit code 2).
    pub fn is_workspace_error(&self) -> bool {
        match self {
            Error::OutOfWorkspace { .. }
            | Error::NearSingular { .. }
            | Error::SingularMatrix
            | Error::StepTooLarge { .. } => true,
            Error::AtTime { source, .. } => source.is_workspace_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
