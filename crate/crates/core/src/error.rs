use std::path::PathBuf;

use crate::spectral::WaveField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {found} samples, grid expects {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("point x = {x} lies outside the domain [{lo}, {hi})")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("inadmissible soliton parameters: {0}")]
    Inadmissible(String),

    #[error("profile tail {tail:.3e} at the box edge exceeds {limit:.1e}; enlarge the grid")]
    TailTruncation { tail: f64, limit: f64 },

    #[error("ensemble invalid: {0}")]
    Ensemble(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixed-point contraction guard violated: measured ratio {ratio:.3} >= {guard:.3}")]
    ContractionGuard { ratio: f64, guard: f64 },

    #[error("linear resolvent did not converge in {iterations} iterations (residual {residual:.3e})")]
    InnerNotConverged { iterations: usize, residual: f64 },

    #[error("lift iterate left the trust ball (norm {norm:.3e} > radius {radius:.3e}) at outer iteration {iteration}")]
    OuterDivergence { iteration: usize, norm: f64, radius: f64 },

    #[error("lift did not converge in {iterations} outer iterations (residual {residual:.3e})")]
    OuterNotConverged { iterations: usize, residual: f64 },

    #[error("time step {dt} exceeds the stability ceiling {ceiling:.3e}")]
    StepTooLarge { dt: f64, ceiling: f64 },

    #[error("blow-up at t = {time}: sup-norm {sup:.3e} above bound {bound:.3e}")]
    BlowUp {
        time: f64,
        sup: f64,
        bound: f64,
        last_good: Box<WaveField>,
    },

    #[error("relative mass drift {drift:.3e} above tolerance {tol:.1e} at t = {time}")]
    ConservationBreach {
        time: f64,
        drift: f64,
        tol: f64,
        last_good: Box<WaveField>,
    },

    #[error("soliton fit failed: {0}")]
    Fit(String),

    #[error("tracking lost soliton {soliton} at t = {time}: {reason}")]
    TrackingLost {
        time: f64,
        soliton: usize,
        reason: String,
    },

    #[error("bad snapshot: {0}")]
    Snapshot(String),

    #[error("scenario `{id}`: {source}")]
    Scenario {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("I/O error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_scenario(self, id: &str) -> Self {
        match self {
            e @ Error::Scenario { .. } => e,
            e => Error::Scenario {
                id: id.to_string(),
                source: Box::new(e),
            },
        }
    }
}
