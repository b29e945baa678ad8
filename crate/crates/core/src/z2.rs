// Addition in Z2 is exclusive or.
#![allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, BitXor};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An element of ℤ₂; addition is XOR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Z2(bool);

impl Z2 {
    pub const ZERO: Z2 = Z2(false);
    pub const ONE: Z2 = Z2(true);

    pub fn bit(self) -> u8 {
        self.0 as u8
    }

    pub fn is_zero(self) -> bool {
        !self.0
    }

    /// Parity of an integer.
    pub fn parity(n: i64) -> Z2 {
        Z2(n.rem_euclid(2) == 1)
    }
}

impl From<bool> for Z2 {
    fn from(b: bool) -> Self {
        Z2(b)
    }
}

impl Add for Z2 {
    type Output = Z2;
    fn add(self, rhs: Z2) -> Z2 {
        Z2(self.0 ^ rhs.0)
    }
}

impl AddAssign for Z2 {
    fn add_assign(&mut self, rhs: Z2) {
        self.0 ^= rhs.0;
    }
}

impl BitXor for Z2 {
    type Output = Z2;
    fn bitxor(self, rhs: Z2) -> Z2 {
        self + rhs
    }
}

impl Sum for Z2 {
    fn sum<I: Iterator<Item = Z2>>(iter: I) -> Z2 {
        iter.fold(Z2::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Z2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

impl Serialize for Z2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.bit())
    }
}

impl<'de> Deserialize<'de> for Z2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(Z2::ZERO),
            1 => Ok(Z2::ONE),
            other => Err(serde::de::Error::custom(format!(
                "expected 0 or 1, got {other}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_table() {
        assert_eq!(Z2::ZERO + Z2::ZERO, Z2::ZERO);
        assert_eq!(Z2::ONE + Z2::ZERO, Z2::ONE);
        assert_eq!(Z2::ONE + Z2::ONE, Z2::ZERO);
        assert_eq!([Z2::ONE, Z2::ONE, Z2::ONE].into_iter().sum::<Z2>(), Z2::ONE);
        assert_eq!(Z2::parity(-3), Z2::ONE);
        assert_eq!(Z2::parity(4), Z2::ZERO);
    }

    #[test]
    fn serde_as_bit() {
        assert_eq!(serde_json::to_string(&Z2::ONE).unwrap(), "1");
        assert_eq!(serde_json::from_str::<Z2>("0").unwrap(), Z2::ZERO);
        assert!(serde_json::from_str::<Z2>("2").is_err());
    }
}
