//! Structure tensors of classical Lie algebras and lower/upper bounds on their
//! tensor rank and border rank.

pub mod apolarity;
pub mod cache;
pub mod decomp;
pub mod error;
pub mod field;
pub mod koszul;
pub mod lie;
pub mod linalg;
pub mod reconstruct;
pub mod search;
pub mod substitution;
pub mod tensor;

pub use error::{Error, Result};
