pub mod cli;
pub mod divergence;
pub mod error;
pub mod factor;
pub mod graph;
pub mod inference;
pub mod io;
pub mod marginal;
pub mod model;
pub mod oracle;
pub mod synth;

pub use error::{Error, Result};
pub use factor::Factor;

/// Variables are identified by their dense index in a [`model::VariableTable`].
pub type VarId = usize;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/factors.md")]
    mod factors {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/marginals.md")]
    mod marginals {}
    #[doc = include_str!("../../../book/src/divergences.md")]
    mod divergences {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
