//! Ground fields for the algebra tables: exact rationals and prime fields.
//!
//! All core math is generic over [`Field`]. The two instances are
//! [`Rat`] (arbitrary-precision rationals) and [`Fp`] (a prime field with
//! run-time modulus). `Fp` values produced by `Zero::zero`/`One::one` carry
//! no modulus yet; they behave as plain integers until they meet a value
//! with a modulus, which is sound because reduction mod p is a ring map.

use num::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact rational scalar.
pub type Rat = BigRational;

/// Operations the algebra engine needs from the ground field.
pub trait Field:
    Clone
    + PartialEq
    + Eq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;

    /// Whether the ambient field has characteristic 2. Meaningful on values
    /// carrying full ring information (e.g. parsed coefficients).
    fn char_is_two(&self) -> bool;

    /// The image of a small integer in the same ring as `self`.
    fn int_like(&self, n: i64) -> Self;
}

impl Field for Rat {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::one() / self.clone())
        }
    }

    fn char_is_two(&self) -> bool {
        false
    }

    fn int_like(&self, n: i64) -> Self {
        Rat::from_integer(n.into())
    }
}

/// Element of F_p with dynamic modulus. `modulus == 0` marks a bare integer
/// not yet reduced (only produced by `zero()`/`one()` and sums of those).
#[derive(Clone, Copy, Debug)]
pub struct Fp {
    value: i128,
    modulus: u64,
}

impl Fp {
    pub fn new(value: i128, p: u64) -> Self {
        assert!(p >= 2, "modulus must be at least 2");
        let m = p as i128;
        Fp {
            value: value.rem_euclid(m),
            modulus: p,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn value(&self) -> i128 {
        self.value
    }

    fn unify(a: Fp, b: Fp) -> (i128, i128, u64) {
        let p = match (a.modulus, b.modulus) {
            (0, q) => q,
            (p, 0) => p,
            (p, q) => {
                assert_eq!(p, q, "mixed moduli {p} and {q}");
                p
            }
        };
        (a.value, b.value, p)
    }

    fn reduce(value: i128, p: u64) -> Fp {
        if p == 0 {
            Fp { value, modulus: 0 }
        } else {
            Fp::new(value, p)
        }
    }
}

impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        let (a, b, p) = Fp::unify(*self, *other);
        if p == 0 {
            a == b
        } else {
            a.rem_euclid(p as i128) == b.rem_euclid(p as i128)
        }
    }
}

impl Eq for Fp {}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::unify(self, rhs);
        Fp::reduce(a + b, p)
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::unify(self, rhs);
        Fp::reduce(a - b, p)
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::unify(self, rhs);
        Fp::reduce(a * b, p)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp::reduce(-self.value, self.modulus)
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp {
            value: 0,
            modulus: 0,
        }
    }
    fn is_zero(&self) -> bool {
        if self.modulus == 0 {
            self.value == 0
        } else {
            self.value.rem_euclid(self.modulus as i128) == 0
        }
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp {
            value: 1,
            modulus: 0,
        }
    }
}

impl Field for Fp {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.modulus == 0 {
            // Bare integers are only inverted when they are units of Z.
            return match self.value {
                1 => Some(*self),
                -1 => Some(*self),
                _ => panic!("cannot invert bare integer {} without modulus", self.value),
            };
        }
        // Extended Euclid on (value, p).
        let p = self.modulus as i128;
        let (mut r0, mut r1) = (self.value.rem_euclid(p), p);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        assert_eq!(r0, 1, "modulus is not prime or value not invertible");
        Some(Fp::new(s0, self.modulus))
    }

    fn char_is_two(&self) -> bool {
        self.modulus == 2
    }

    fn int_like(&self, n: i64) -> Self {
        Fp::reduce(n as i128, self.modulus)
    }
}

/// Parse a rational written as `a/b` or as a plain integer.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: num::BigInt = n.trim().parse().map_err(|e| format!("{e}"))?;
        let d: num::BigInt = d.trim().parse().map_err(|e| format!("{e}"))?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rat::new(n, d))
    } else {
        let n: num::BigInt = s.parse().map_err(|e| format!("{e}"))?;
        Ok(Rat::from_integer(n))
    }
}

pub fn is_probably_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_arithmetic() {
        let a = Fp::new(3, 7);
        let b = Fp::new(5, 7);
        assert_eq!(a + b, Fp::new(1, 7));
        assert_eq!(a * b, Fp::new(1, 7));
        assert_eq!(a.inv().unwrap() * a, Fp::new(1, 7));
        assert_eq!(-a, Fp::new(4, 7));
    }

    #[test]
    fn fp_bare_integers_reduce_on_contact() {
        let one = <Fp as One>::one();
        let two = one + one;
        assert_eq!(two.modulus(), 0);
        let x = Fp::new(1, 2);
        assert!((two * x).is_zero());
        assert_eq!(one + Fp::new(1, 2), Fp::new(0, 2));
    }

    #[test]
    fn rat_parse() {
        assert_eq!(parse_rat("3/6").unwrap(), Rat::new(1.into(), 2.into()));
        assert_eq!(parse_rat("-2").unwrap(), Rat::from_integer((-2).into()));
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn char_two_detection() {
        assert!(Fp::new(1, 2).char_is_two());
        assert!(!Fp::new(1, 3).char_is_two());
        assert!(!Rat::one().char_is_two());
    }
}
