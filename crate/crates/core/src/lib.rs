pub mod cli;
pub mod cpoly;
pub mod error;
pub mod gen;
pub mod hardy;
pub mod operators;
pub mod ratfun;
pub mod staralg;
pub mod tol;

pub use cpoly::{Poly, C64};
pub use error::{Error, Result};
pub use ratfun::{KBasisExpansion, KTerm, Pole, RatFunc, RatFuncJson};
pub use tol::ToleranceConfig;
