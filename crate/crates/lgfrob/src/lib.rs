//! Frobenius type structures attached to convenient, nondegenerate Laurent
//! polynomials, their universal deformations, and the resulting Frobenius
//! manifold germs. All arithmetic is exact over the rationals.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod groebner;
pub mod hm;
pub mod jacobi;
pub mod json;
pub mod laurent;
pub mod matrix;
pub mod newton;
pub mod oracle;
pub mod poly;
pub mod rational;
pub mod series;
pub mod structure;

pub use error::{Error, Result};
pub use laurent::{parse_laurent, parse_laurent_params, LaurentPoly};
pub use matrix::{Mat, Ring};
pub use poly::Poly;
pub use rational::Q;
