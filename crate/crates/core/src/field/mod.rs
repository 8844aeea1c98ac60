//! Scalar fields used throughout: rationals, Q(ζ6), and word-sized prime fields.

mod cyclotomic;
mod prime;
mod rational;

pub use cyclotomic::Cyclotomic6;
pub use prime::{PrimeField, PrimeStream};
pub use rational::{parse_rational, rational_to_f64, Rational};

use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// An exact field with enough structure for Gaussian elimination.
pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;

    fn from_i64(v: i64) -> Self;

    fn from_rational(q: &Rational) -> Self;
}

impl Field for Rational {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v.into())
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}
