use super::{rational_to_f64, Field, Rational};
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// `a + b·ζ` in Q(ζ), ζ a primitive sixth root of unity (ζ² = ζ − 1).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CycloRepr", into = "CycloRepr")]
pub struct Cyclotomic6 {
    pub a: Rational,
    pub b: Rational,
}

#[derive(Serialize, Deserialize)]
struct CycloRepr {
    a: String,
    b: String,
}

impl TryFrom<CycloRepr> for Cyclotomic6 {
    type Error = crate::Error;
    fn try_from(r: CycloRepr) -> crate::Result<Self> {
        Ok(Cyclotomic6::new(super::parse_rational(&r.a)?, super::parse_rational(&r.b)?))
    }
}

impl From<Cyclotomic6> for CycloRepr {
    fn from(z: Cyclotomic6) -> Self {
        CycloRepr { a: z.a.to_string(), b: z.b.to_string() }
    }
}

impl Cyclotomic6 {
    pub fn new(a: Rational, b: Rational) -> Self {
        Cyclotomic6 { a, b }
    }

    pub fn zeta() -> Self {
        Cyclotomic6::new(Rational::zero(), Rational::one())
    }

    pub fn from_int(a: i64) -> Self {
        Cyclotomic6::new(Rational::from_i64(a), Rational::zero())
    }

    /// Complex conjugate: ζ̄ = 1 − ζ.
    pub fn conj(&self) -> Self {
        Cyclotomic6::new(self.a.clone() + self.b.clone(), -self.b.clone())
    }

    /// Field norm a² + ab + b².
    pub fn norm(&self) -> Rational {
        self.a.clone() * self.a.clone() + self.a.clone() * self.b.clone() + self.b.clone() * self.b.clone()
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Cyclotomic6::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    /// Numerical value with ζ = e^{iπ/3}.
    pub fn to_complex(&self) -> Complex64 {
        let a = rational_to_f64(&self.a);
        let b = rational_to_f64(&self.b);
        Complex64::new(a + 0.5 * b, b * 0.75f64.sqrt())
    }
}

impl fmt::Debug for Cyclotomic6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyclotomic6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}ζ", self.b),
            (false, false) => write!(f, "{} + {}ζ", self.a, self.b),
        }
    }
}

impl Add for Cyclotomic6 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cyclotomic6::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for Cyclotomic6 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Cyclotomic6::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for Cyclotomic6 {
    type Output = Self;
    fn neg(self) -> Self {
        Cyclotomic6::new(-self.a, -self.b)
    }
}

impl Mul for Cyclotomic6 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        // (a + bζ)(c + dζ) = ac − bd + (ad + bc + bd)ζ
        let bd = self.b.clone() * o.b.clone();
        let a = self.a.clone() * o.a.clone() - bd.clone();
        let b = self.a * o.b + self.b * o.a + bd;
        Cyclotomic6::new(a, b)
    }
}

impl Zero for Cyclotomic6 {
    fn zero() -> Self {
        Cyclotomic6::new(Rational::zero(), Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for Cyclotomic6 {
    fn one() -> Self {
        Cyclotomic6::new(Rational::one(), Rational::zero())
    }
}

impl Field for Cyclotomic6 {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // (a + bζ)(a + b − bζ) = a² + ab + b²
        let n = self.norm();
        let c = self.conj();
        Some(Cyclotomic6::new(c.a / n.clone(), c.b / n))
    }

    fn from_i64(v: i64) -> Self {
        Cyclotomic6::from_int(v)
    }

    fn from_rational(q: &Rational) -> Self {
        Cyclotomic6::new(q.clone(), Rational::zero())
    }
}

impl From<Rational> for Cyclotomic6 {
    fn from(q: Rational) -> Self {
        Cyclotomic6::new(q, Rational::zero())
    }
}
