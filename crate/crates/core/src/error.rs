use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent configuration input.
    #[error("config error: {0}")]
    Config(String),

    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("detuning sign violation: {0}")]
    SignViolation(String),

    #[error("wavepacket support exceeds grid window: {mass_lost:.3e} of the probability mass would be lost")]
    Truncation { mass_lost: f64 },

    #[error("Fock truncation at n_max = {n_max} loses {loss:.3e} of the norm (tolerance {tolerance:.1e}); raise n_max")]
    FockTruncation {
        n_max: usize,
        loss: f64,
        tolerance: f64,
    },

    #[error("insufficient grid padding: {edge_mass:.3e} of the mass sits in the window edge (limit {limit:.1e}); increase `grid.padding`")]
    Padding { edge_mass: f64, limit: f64 },

    #[error("density is not normalized: integral = {integral}")]
    Normalization { integral: f64 },

    #[error("zero probability mass in the requested window")]
    ZeroMass,

    #[error(
        "quadrature grid [{lo}, {hi}] does not span the required range [{need_lo}, {need_hi}]"
    )]
    MassDeficit {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("quadrature outcome {chi} is outside the representable range |chi| <= {limit}; the Hermite-function recursion underflows there")]
    Range { chi: f64, limit: f64 },

    #[error("validation failed: {0} check(s) did not pass")]
    Validation(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::NonFinite(_)
            | Error::InvalidParameter { .. }
            | Error::SignViolation(_) => 2,
            Error::Validation(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
