//! Exact and numeric invariants of polynomial map germs.

pub mod boardman;
pub mod equivlab;
pub mod error;
pub mod germ;
pub mod groebner;
pub mod lipschitz;
pub mod matrix;
pub mod parse;
pub mod poly;
pub mod puiseux;
pub mod tangentnum;

pub use boardman::{boardman_symbol, BoardmanSymbol, GeneratorSet, SymbolOptions, SymbolStatus};
pub use error::{GermError, Result};
pub use germ::MapGerm;
pub use matrix::PolyMatrix;
pub use poly::{Monomial, Polynomial};
