use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("sigma {sigma} along axis {axis} is under-resolved (needs >= {min})")]
    UnderResolved { axis: usize, sigma: f64, min: f64 },

    #[error("gaussian mass outside the box is {mass:e}, above {limit:e}")]
    TailTruncation { mass: f64, limit: f64 },

    #[error("non-finite value in potential at grid index {index}")]
    NonFinitePotential { index: usize },

    #[error("dt = {dt} exceeds the stability guard {limit}")]
    CflViolated { dt: f64, limit: f64 },

    #[error("non-finite value in {field} at grid index {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error("density {value:e} at grid index {index} is below -1e-10 * max")]
    NegativeDensity { index: usize, value: f64 },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("wavefunction maps need a uniform lambda across degrees of freedom")]
    NonUniformLambda,

    #[error("lambda must be positive for a wavefunction map")]
    ZeroLambda,

    #[error("node detected at grid index {index}: phase undefined")]
    NodeDetected { index: usize },

    #[error("probe density is not bounded away from zero at grid index {index}")]
    ProbeTouchesZero { index: usize },

    #[error("non-finite partial derivative of mu at grid index {index}")]
    NonFiniteMu { index: usize },

    #[error("perturbation epsilon {epsilon:e} drives the density negative at grid index {index}")]
    EpsilonTooLarge { index: usize, epsilon: f64 },
}

impl Error {
    /// Attach the index of the step that failed.
    pub fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerical scheme itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::AtStep { source, .. } => source.is_numerical(),
            Error::CflViolated { .. } | Error::NonFinite { .. } | Error::NegativeDensity { .. } => {
                true
            }
            _ => false,
        }
    }
}
