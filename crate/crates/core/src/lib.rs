//! Riesz-product expansions on dyadic groups, the recursive Grothendieck maps
//! built from them, and fractional multilinear Parseval checks.

pub mod constants;
pub mod coords;
pub mod dyadic;
pub mod error;
pub mod multilinear;
pub mod phi;
pub mod riesz;
pub mod rng;
pub mod sup;

pub use coords::CoordVector;
pub use dyadic::{
    char_mul, conj_series, evaluate, parseval_pair, series_linear, series_mul, Character, GeneratorId, Session,
    SessionId, SignVector, WalshSeries,
};
pub use error::{Error, Result};
pub use sup::{sup_norm, SupBounds, SupMode};
