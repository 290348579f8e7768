use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("leading coefficient is zero up to the truncation bound")]
    ZeroLeadingCoefficient,

    #[error("series has fractional exponents; operation needs the integral grid")]
    NonIntegralGrid,

    #[error("unsupported level {0}; supported levels are 1, 2, 3, 5, 6, 7, 10, 13")]
    UnsupportedLevel(u32),

    #[error("insufficient truncation: need exponents below {needed}, have below {have}")]
    InsufficientTruncation { needed: String, have: String },

    #[error("-{0} is not congruent to 0 or 1 modulo 4")]
    BadDiscriminant(i64),

    #[error("h = {h} does not satisfy h^2 = -{d} (mod {})", 4 * .level)]
    BadResidue { d: i64, level: u32, h: i64 },

    #[error("{p} does not divide the leading coefficient {a}")]
    NotDivisible { a: i64, p: i64 },

    #[error("point is not in the upper half-plane")]
    NotUpperHalfPlane,

    #[error("cannot reconstruct a rational with denominator <= {max_den} from {value} (tolerance {tol})")]
    ReconstructionFailure {
        value: String,
        max_den: u32,
        tol: String,
    },

    #[error("trace sum for d = {d} at level {level} has imaginary part {imag} above tolerance")]
    NonRealTrace { d: i64, level: u32, imag: String },

    #[error("trace table covers d <= {have}, need d = {needed}")]
    InsufficientTable { needed: i64, have: i64 },

    #[error("Eisenstein residual does not vanish; first nonzero exponent {first_exponent}")]
    ResidualNonzero { first_exponent: String },

    #[error("precision must be at least 64 bits, got {0}")]
    PrecisionTooLow(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed series data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
