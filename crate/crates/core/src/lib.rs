pub mod couplings;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod nilseq;
pub mod poly;
pub mod reduction;

pub use dynamics::{DynSystem, Observable};
pub use error::{Error, Result};
pub use exact::Rational;
pub use nilseq::{GSystem, IntMatrix, NilSeq};
pub use poly::MultiPoly;
