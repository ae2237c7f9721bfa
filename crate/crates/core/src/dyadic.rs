//! Exact rationals whose denominator is a power of two.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

/// `num / 2^twos` in lowest terms: `twos == 0` or `num` is odd.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    twos: u64,
}

impl Dyadic {
    pub fn new(num: BigInt, twos: u64) -> Self {
        let mut d = Dyadic { num, twos };
        d.normalize();
        d
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Dyadic {
            num: n.into(),
            twos: 0,
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.twos = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.twos);
        if tz > 0 {
            self.num >>= tz;
            self.twos -= tz;
        }
        debug_assert!(self.twos == 0 || self.num.bit(0));
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    /// Exponent `b` of the denominator `2^b`.
    pub fn denominator_exponent(&self) -> u64 {
        self.twos
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.twos
    }

    pub fn is_integer(&self) -> bool {
        self.twos == 0
    }

    pub fn to_integer(&self) -> Option<&BigInt> {
        self.is_integer().then_some(&self.num)
    }

    /// Value as a non-negative integer, if it is one.
    pub fn to_biguint(&self) -> Option<BigUint> {
        self.to_integer().and_then(|n| n.to_biguint())
    }

    /// `(3x + k) / 2`, the odd branch applied blindly.
    pub fn apply_odd_branch(&self, k: &BigUint) -> Self {
        let k = BigInt::from(k.clone()) << self.twos;
        Dyadic::new(&self.num * 3 + k, self.twos + 1)
    }

    /// `x / 2`, the even branch applied blindly.
    pub fn apply_even_branch(&self) -> Self {
        Dyadic::new(self.num.clone(), self.twos + 1)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twos == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.denominator())
        }
    }
}

impl From<BigUint> for Dyadic {
    fn from(n: BigUint) -> Self {
        Dyadic::from_integer(BigInt::from(n))
    }
}
