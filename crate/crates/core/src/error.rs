use thiserror::Error;

/// Errors raised by the planners, compiler and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The two density matrices have different eigenvalues, so no unitary
    /// connects them and an incoherent step is required.
    #[error("dynamic invariants differ beyond tolerance {tolerance:e}: {}", format_pairs(.differing))]
    InvariantMismatch {
        tolerance: f64,
        /// `(index, source eigenvalue, target eigenvalue)` for each offending pair.
        differing: Vec<(usize, f64, f64)>,
    },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("no finite detuning realizes phase {phi} with area index {l}: identity reflection needs no pulse")]
    NoDetuning { phi: f64, l: u32 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integrator failure at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("ancilla population {population:e} left after step {step} exceeds {threshold:e}")]
    AncillaLeakage { step: usize, population: f64, threshold: f64 },
}

fn format_pairs(pairs: &[(usize, f64, f64)]) -> String {
    pairs
        .iter()
        .map(|(i, a, b)| format!("r[{i}]: {a:.12} vs {b:.12}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
