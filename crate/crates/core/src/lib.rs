//! Exact Berkovich-line dynamics over p-adic towers: resultants, crucial
//! functions, crucial measures, minimal resultant loci and equidistribution.

pub mod error;
pub mod rat;
pub mod tower;
pub mod fp;
pub mod poly;
pub mod maps;
pub mod roots;
pub mod plf;
pub mod points;
pub mod profile;
pub mod tree;
pub mod degrees;
pub mod crucial;
pub mod equidist;
pub mod parse;
pub mod sample;
pub mod selftest;

pub use error::{Error, Result};
pub use rat::{ExtValue, Q};
pub use tower::{TowerContext, TowerElem};
