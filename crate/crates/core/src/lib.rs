//! Exact q-series, hauptmoduln, Faber polynomials, binary quadratic forms and
//! traces of singular moduli on genus-zero levels.

pub mod arith;
pub mod cache;
pub mod cmnum;
pub mod error;
pub mod etaq;
pub mod faber;
pub mod identities;
pub mod quadforms;
pub mod series;
pub mod traces;

pub use error::{Error, Result};
pub use etaq::{HauptmodulId, SUPPORTED_LEVELS};
pub use series::{Exponent, QExpansion};
