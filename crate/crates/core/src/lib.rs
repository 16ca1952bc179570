//! Dimer models on bipartite isoradial graphs: critical weights, the Dirac
//! operator and its inverse, determinantal statistics, exact sampling, height
//! functions, triangular quadri-tilings and Gaussian free field comparisons.

pub mod error;
pub mod geometry;
pub mod gff;
pub mod gibbs;
pub mod height;
pub mod kernel;
pub mod matching;
pub mod mc;
pub mod quadri;
pub mod quadrature;
pub mod report;
pub mod sampler;
mod strips;

pub use error::{Error, Result};
pub use strips::StripMode;
