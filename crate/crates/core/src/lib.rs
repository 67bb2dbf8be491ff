pub mod cli;
pub mod corpus;
pub mod deduction;
pub mod error;
pub mod formula;
pub mod harmony;
pub mod normalize;
pub mod prover;
pub mod schema;
mod syntax;

pub use error::{Error, Result};
