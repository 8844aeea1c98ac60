//! Recovering exact scalars from floating-point values by continued fractions.

use crate::error::{Error, Result};
use crate::field::{rational_to_f64, Cyclotomic6, Rational};
use num_bigint::BigInt;
use num_complex::Complex64;

/// A reconstructed value with its round-trip error.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstructed<T> {
    pub value: T,
    pub error: f64,
}

/// Best continued-fraction convergent to `x` with denominator at most `max_den`.
///
/// Convergents are walked until the denominator bound is reached; the last
/// admissible one is returned.
pub fn rational_reconstruct(x: f64, max_den: u64) -> Result<Reconstructed<Rational>> {
    if !x.is_finite() || x.abs() >= 2f64.powi(52) || max_den == 0 {
        return Err(Error::NoConvergent { value: x, max_den });
    }
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut rest = x;
    let mut best: Option<(i128, i128)> = None;
    for _ in 0..64 {
        let a = rest.floor();
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        best = Some((h2, k2));
        let (num, den) = (h2 as f64, k2 as f64);
        if (num / den - x).abs() <= f64::EPSILON * x.abs().max(1.0) {
            break;
        }
        let frac = rest - a;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    let (h, k) = best.ok_or(Error::NoConvergent { value: x, max_den })?;
    let value = Rational::new(BigInt::from(h), BigInt::from(k));
    let error = (rational_to_f64(&value) - x).abs();
    Ok(Reconstructed { value, error })
}

/// Recovers `a + bζ` (ζ = e^{iπ/3}) from its complex value.
pub fn cyclo_reconstruct(z: Complex64, max_den: u64) -> Result<Reconstructed<Cyclotomic6>> {
    let im_zeta = 0.75f64.sqrt();
    let b = rational_reconstruct(z.im / im_zeta, max_den)?.value;
    let a = rational_reconstruct(z.re - rational_to_f64(&b) / 2.0, max_den)?.value;
    let value = Cyclotomic6::new(a, b);
    let error = (value.to_complex() - z).norm();
    Ok(Reconstructed { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn simple_values() {
        assert_eq!(rational_reconstruct(0.5, 10).unwrap().value, q(1, 2));
        assert_eq!(rational_reconstruct(0.006172839506, 1000).unwrap().value, q(1, 162));
        assert_eq!(rational_reconstruct(0.0432098765432, 1000).unwrap().value, q(7, 162));
        assert_eq!(rational_reconstruct(-2.0, 1).unwrap().value, q(-2, 1));
        assert_eq!(rational_reconstruct(0.0, 5).unwrap().value, Rational::zero());
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        assert!(rational_reconstruct(f64::NAN, 10).is_err());
        assert!(rational_reconstruct(1e17, 10).is_err());
        assert!(rational_reconstruct(0.5, 0).is_err());
    }

    #[test]
    fn cyclotomic_values() {
        let one = cyclo_reconstruct(Complex64::new(1.0, 0.0), 10).unwrap().value;
        assert_eq!(one, Cyclotomic6::from_i64(1));
        let z2 = Cyclotomic6::zeta().pow(2).to_complex();
        assert_eq!(cyclo_reconstruct(z2, 10).unwrap().value, Cyclotomic6::new(q(-1, 1), q(1, 1)));
    }
}
