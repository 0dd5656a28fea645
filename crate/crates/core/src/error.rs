use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error at `{location}`: {message}")]
    Config { location: String, message: String },

    #[error("the interface node {node} has no admissible control at step {step}")]
    EmptyInterfaceStep { node: usize, step: usize },

    #[error("control on the interface is inconsistent with tangency at s = {time}: {detail}")]
    InconsistentInterfaceControl { time: f64, detail: String },

    #[error("the tangent mixture left [0, 1] at s = {time} (mu = {mu})")]
    SlidingLost { time: f64, mu: f64 },

    #[error("enumeration needs {required} schedules, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("no controllability triple with normal speed {required} at the target point")]
    NoControllabilityTriple { required: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
