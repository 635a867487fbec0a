//! Exact arithmetic for elliptic curves over rational function fields `F_q(T)`.
//!
//! The crate computes, with no floating point anywhere:
//!
//! - finite-field towers `F_{p^k}` with discrete-log tables and Teichmüller
//!   lifts into truncated unramified p-adic rings ([`ff`]);
//! - Newton polygons, the slope invariant `l_q` and root-of-unity valuation
//!   minima ([`padic`]);
//! - places and divisors of the projective line, polynomial factorization and
//!   tame Dirichlet characters with their L-polynomials ([`funcfield`]);
//! - Kodaira reduction types, conductors, discriminants and constructive
//!   Frobenius descent for Weierstrass curves ([`curve`]);
//! - Hasse–Weil L-polynomials, twisted L-polynomials, epsilon constants and
//!   Fourier coefficients assembled from parallel point counts ([`lfun`]);
//! - Gauss/Jacobi-sum data for the Fermat-surface quotient attached to the
//!   family `y^2 + xy = x^3 - T^n`, with Stickelberger valuations ([`jacobi`]);
//! - lower/upper bounds for the Manin constant `m(E)`, exactness verdicts and
//!   modular-degree bounds ([`manin`]).

pub mod curve;
pub mod ff;
pub mod funcfield;
pub mod jacobi;
pub mod lfun;
pub mod manin;
pub mod padic;

pub use ff::{FieldElem, FieldTable, PadicRing, PadicScalar};
pub use funcfield::{DirichletCharacter, Divisor, Place, Poly};
pub use curve::WeierstrassCurve;

use std::fmt;

/// Errors shared across the crate.
///
/// Classes map onto the CLI exit codes: parse errors (2), singular curves (3),
/// unsupported characteristic or sizes (4) and internal consistency
/// failures (5).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input text did not parse (polynomial grammar, curve spec, character spec).
    Parse(String),
    /// The Weierstrass equation has vanishing discriminant.
    SingularCurve,
    /// p < 5, p not prime, or a size limit of the implementation exceeded.
    Unsupported(String),
    /// The zero polynomial has no Newton polygon or valuation data.
    ZeroPolynomial,
    /// All tracked p-adic digits vanished; retry with larger precision.
    PrecisionExhausted,
    /// The functional-equation sign could not be determined from counted
    /// coefficients; reported rather than guessed.
    SignIndeterminable,
    /// Expansion coefficients past the expected degree did not vanish.
    TailNonvanishing(String),
    /// A character conductor meets the bad places of the curve.
    ConductorMeetsBadPlaces,
    /// Root-of-unity sampling exhausted its schedule without attaining the
    /// predicted minimum.
    MinimumNotAttained,
    /// A precondition of an operation was violated.
    Domain(String),
    /// An internal invariant tripped; indicates a library bug, not bad input.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(s) => write!(f, "parse error: {s}"),
            Error::SingularCurve => write!(f, "singular curve (discriminant is zero)"),
            Error::Unsupported(s) => write!(f, "unsupported: {s}"),
            Error::ZeroPolynomial => write!(f, "zero polynomial"),
            Error::PrecisionExhausted => {
                write!(f, "p-adic precision exhausted; retry with larger N")
            }
            Error::SignIndeterminable => {
                write!(f, "functional-equation sign indeterminable from counted coefficients")
            }
            Error::TailNonvanishing(s) => write!(f, "tail coefficients nonvanishing: {s}"),
            Error::ConductorMeetsBadPlaces => {
                write!(f, "character conductor meets the conductor of the curve")
            }
            Error::MinimumNotAttained => {
                write!(f, "sampling schedule exhausted without attaining the predicted minimum")
            }
            Error::Domain(s) => write!(f, "domain error: {s}"),
            Error::Internal(s) => write!(f, "internal consistency failure: {s}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
