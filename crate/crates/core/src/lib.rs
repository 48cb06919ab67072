//! Lower bounds on de Bruijn–Newman-type constants for quadratic Dirichlet
//! L-functions, from their low-lying zeros, plus simulation of the backward
//! heat flow of those zeros.

pub mod bigreal;
pub mod discriminant;
pub mod error;
pub mod heatflow;
pub mod newman;
pub mod quadrature;
pub mod specfun;
pub mod theta;
pub mod xi;
pub mod zeros;

pub use bigreal::{BigReal, Precision};
pub use discriminant::{enumerate_fundamental, is_fundamental, FundamentalDiscriminant, KroneckerCharacter};
pub use error::{Error, Result};
