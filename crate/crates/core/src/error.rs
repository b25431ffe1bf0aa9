use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice window [{left}, {right}]")]
    DegenerateWindow { left: i64, right: i64 },

    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),

    #[error("rate must be non-negative and finite, got {0}")]
    BadRate(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("window width {width} too large for the dense generator (max {max})")]
    WindowTooLarge { width: usize, max: usize },

    #[error("walker left the window at time {time}: position {position} outside [{left}, {right}]")]
    WalkerEscaped {
        time: f64,
        position: i64,
        left: i64,
        right: i64,
    },

    #[error("rejection sampler gave up after {attempts} attempts (acceptance estimate {acceptance})")]
    RejectionExhausted { attempts: u64, acceptance: f64 },

    #[error("horizon exhausted after {attempts} runs without a complete run")]
    HorizonExhausted { attempts: usize },

    #[error("rate table: {0}")]
    RateTable(String),

    #[error("harris dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
