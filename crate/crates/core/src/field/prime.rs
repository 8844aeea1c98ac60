use super::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Arithmetic modulo a fixed prime below 2^62.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Returns `None` unless `p` is a prime in [3, 2^62).
    pub fn new(p: u64) -> Option<Self> {
        (p > 2 && p < (1 << 62) && is_prime(p)).then_some(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, x: u64, y: u64) -> u64 {
        let s = x + y;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, x: u64, y: u64) -> u64 {
        if x >= y {
            x - y
        } else {
            x + self.p - y
        }
    }

    #[inline]
    pub fn neg(&self, x: u64) -> u64 {
        if x == 0 {
            0
        } else {
            self.p - x
        }
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.p as u128) as u64
    }

    /// Precomputed quotient ⌊w·2^64/p⌋ for repeated multiplication by `w`.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.p as u128) as u64
    }

    /// `x·w mod p` given `ws = shoup(w)`.
    #[inline(always)]
    pub fn mul_shoup(&self, x: u64, w: u64, ws: u64) -> u64 {
        let q = ((x as u128 * ws as u128) >> 64) as u64;
        let r = x.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.p));
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    pub fn pow(&self, mut x: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: u64) -> Option<u64> {
        (x != 0).then(|| self.pow(x, self.p - 2))
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        let r = v.rem_euclid(self.p as i64);
        r as u64
    }

    pub fn from_bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        v.mod_floor(&m).to_u64().expect("residue fits in u64")
    }

    /// Reduction of a rational; `None` if p divides the denominator.
    pub fn from_rational(&self, q: &Rational) -> Option<u64> {
        let n = if q.numer().is_negative() || q.numer().bits() > 62 {
            self.from_bigint(q.numer())
        } else {
            q.numer().to_u64().unwrap() % self.p
        };
        let d = self.inv(self.from_bigint(q.denom()))?;
        Some(self.mul(n, d))
    }
}

/// Deterministic Miller–Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Seeded stream of random primes, by default in [2^61, 2^62).
pub struct PrimeStream {
    rng: ChaCha20Rng,
    bits: u32,
}

impl PrimeStream {
    pub fn new(seed: u64) -> Self {
        Self::with_bits(seed, 62)
    }

    /// Primes in [2^(bits-1), 2^bits).
    pub fn with_bits(seed: u64, bits: u32) -> Self {
        assert!((3..=62).contains(&bits));
        PrimeStream { rng: ChaCha20Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15), bits }
    }

    pub fn next_field(&mut self) -> PrimeField {
        loop {
            let c = self.rng.gen_range((1u64 << (self.bits - 1))..(1u64 << self.bits)) | 1;
            if is_prime(c) {
                return PrimeField { p: c };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn miller_rabin_known_values() {
        assert!(is_prime(2305843009213693951)); // 2^61 − 1
        assert!(!is_prime(2305843009213693953));
        assert!(!is_prime(3215031751)); // strong pseudoprime to bases 2,3,5,7
        assert!(is_prime(97));
    }

    #[test]
    fn shoup_matches_plain_product() {
        let f = PrimeStream::new(1).next_field();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let x = rng.gen_range(0..f.modulus());
            let w = rng.gen_range(0..f.modulus());
            assert_eq!(f.mul_shoup(x, w, f.shoup(w)), f.mul(x, w));
        }
    }

    #[test]
    fn rational_reduction() {
        let f = PrimeField::new(101).unwrap();
        let q = Rational::new((-3).into(), 4.into());
        let r = f.from_rational(&q).unwrap();
        assert_eq!(f.mul(r, 4), f.from_i64(-3));
        assert!(f.from_rational(&Rational::new(1.into(), 202.into())).is_none());
    }

    #[test]
    fn prime_streams_are_seeded() {
        let a: Vec<u64> = (0..3).map({
            let mut s = PrimeStream::new(7);
            move |_| s.next_field().modulus()
        }).collect();
        let mut s = PrimeStream::new(7);
        assert_eq!(a[0], s.next_field().modulus());
        assert!(a.iter().all(|&p| p >= 1 << 61 && p < 1 << 62));
        assert_ne!(a[0], a[1]);
    }
}
