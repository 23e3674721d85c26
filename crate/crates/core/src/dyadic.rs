//! Exact probabilities of the form `num / 2^exp`.
//!
//! Every meiosis contributes a factor of one half, so all IBD pattern
//! probabilities implied by a pedigree are dyadic rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { num: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigUint::one(), exp: 0 }
    }

    /// `num / 2^exp`, reduced.
    pub fn new(num: impl Into<BigUint>, exp: u32) -> Self {
        let mut d = Dyadic { num: num.into(), exp };
        d.reduce();
        d
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp as u64) as u32;
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn log2_denominator(&self) -> u32 {
        self.exp
    }

    /// Multiply by `2^-k`.
    pub fn scale_down(&self, k: u32) -> Self {
        let mut d = Dyadic { num: self.num.clone(), exp: self.exp + k };
        d.reduce();
        d
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::INFINITY);
        // split the exponent so huge denominators don't overflow powi
        let mut v = n;
        let mut e = self.exp as i32;
        while e > 0 {
            let step = e.min(1000);
            v *= 2f64.powi(-step);
            e -= step;
        }
        v
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        let a = &self.num << (exp - self.exp);
        let b = &rhs.num << (exp - rhs.exp);
        Dyadic::new(a + b, exp)
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigUint::one() << self.exp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_adds() {
        let a = Dyadic::new(2u32, 3); // 1/4
        assert_eq!(a, Dyadic::new(1u32, 2));
        let b = Dyadic::new(3u32, 3);
        let s = &a + &b; // 5/8
        assert_eq!(s.to_string(), "5/8");
        assert_eq!(s.to_f64(), 0.625);
        assert_eq!(&Dyadic::new(1u32, 1) + &Dyadic::new(1u32, 1), Dyadic::one());
    }

    #[test]
    fn ordering_and_scaling() {
        assert!(Dyadic::new(27u32, 6) > Dyadic::new(9u32, 6));
        assert_eq!(Dyadic::one().scale_down(6).to_f64(), 1.0 / 64.0);
        assert!(Dyadic::new(0u32, 9).is_zero());
        assert_eq!(Dyadic::new(0u32, 9), Dyadic::zero());
    }
}
