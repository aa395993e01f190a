use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state specification: {what} = {value}")]
    InvalidSpec { what: &'static str, value: f64 },

    #[error("thermal-marginal anticorrelated state needs nbar <= 1, got {nbar}")]
    Infeasible { nbar: f64 },

    #[error("distribution is not normalized: total mass {sum}")]
    NotNormalized { sum: f64 },

    #[error("demon parameter {name} = {value} outside [0, 1]")]
    InvalidParams { name: &'static str, value: f64 },

    #[error("photon subtraction is undefined for a zero-mean distribution")]
    UndefinedSubtraction,

    #[error("closed form requires a common reflectance (R_A = R_B)")]
    IndependentReflectance,

    #[error("objective is not finite ({value}) at R_A={r_a}, R_B={r_b}, eta_A={eta_a}, eta_B={eta_b}")]
    NumericalFailure {
        r_a: f64,
        r_b: f64,
        eta_a: f64,
        eta_b: f64,
        value: f64,
    },

    #[error("sweep grid is empty")]
    EmptyGrid,
}

pub type Result<T> = core::result::Result<T, Error>;
