//! Fixed-width 256-bit unsigned integer with explicit wrapping and checked
//! arithmetic, matching the word size of the EVM.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// 256-bit unsigned integer stored as four little-endian 64-bit limbs.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct U256([u64; 4]);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseU256Error {
    #[error("empty integer literal")]
    Empty,
    #[error("invalid digit in integer literal {0:?}")]
    InvalidDigit(String),
    #[error("integer literal {0:?} does not fit in 256 bits")]
    TooLarge(String),
}

impl U256 {
    pub const ZERO: U256 = U256([0; 4]);
    pub const ONE: U256 = U256([1, 0, 0, 0]);
    /// 2^256 - 1.
    pub const MAX: U256 = U256([u64::MAX; 4]);

    pub const fn from_u64(v: u64) -> U256 {
        U256([v, 0, 0, 0])
    }

    pub const fn from_u128(v: u128) -> U256 {
        U256([v as u64, (v >> 64) as u64, 0, 0])
    }

    pub const fn from_limbs(limbs: [u64; 4]) -> U256 {
        U256(limbs)
    }

    pub const fn limbs(&self) -> [u64; 4] {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    /// Returns the value as a `u64` if it fits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.0[1] == 0 && self.0[2] == 0 && self.0[3] == 0 {
            Some(self.0[0])
        } else {
            None
        }
    }

    pub fn overflowing_add(self, rhs: U256) -> (U256, bool) {
        let mut out = [0u64; 4];
        let mut carry = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let (s1, c1) = self.0[i].overflowing_add(rhs.0[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *slot = s2;
            carry = c1 || c2;
        }
        (U256(out), carry)
    }

    pub fn overflowing_sub(self, rhs: U256) -> (U256, bool) {
        let mut out = [0u64; 4];
        let mut borrow = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let (d1, b1) = self.0[i].overflowing_sub(rhs.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            *slot = d2;
            borrow = b1 || b2;
        }
        (U256(out), borrow)
    }

    pub fn wrapping_add(self, rhs: U256) -> U256 {
        self.overflowing_add(rhs).0
    }

    pub fn wrapping_sub(self, rhs: U256) -> U256 {
        self.overflowing_sub(rhs).0
    }

    pub fn checked_add(self, rhs: U256) -> Option<U256> {
        match self.overflowing_add(rhs) {
            (v, false) => Some(v),
            _ => None,
        }
    }

    pub fn checked_sub(self, rhs: U256) -> Option<U256> {
        match self.overflowing_sub(rhs) {
            (v, false) => Some(v),
            _ => None,
        }
    }

    pub fn saturating_sub(self, rhs: U256) -> U256 {
        self.checked_sub(rhs).unwrap_or(U256::ZERO)
    }

    /// Multiplies by a small factor and adds a small term, reporting overflow.
    fn mul_small_add(self, factor: u64, term: u64) -> (U256, bool) {
        let mut out = [0u64; 4];
        let mut carry = term as u128;
        for (i, slot) in out.iter_mut().enumerate() {
            let wide = self.0[i] as u128 * factor as u128 + carry;
            *slot = wide as u64;
            carry = wide >> 64;
        }
        (U256(out), carry != 0)
    }

    /// Divides by a non-zero small divisor, returning quotient and remainder.
    fn div_rem_small(self, divisor: u64) -> (U256, u64) {
        debug_assert!(divisor != 0);
        let mut out = [0u64; 4];
        let mut rem: u128 = 0;
        for i in (0..4).rev() {
            let cur = (rem << 64) | self.0[i] as u128;
            out[i] = (cur / divisor as u128) as u64;
            rem = cur % divisor as u128;
        }
        (U256(out), rem as u64)
    }

    fn from_str_radix(src: &str, radix: u32) -> Result<U256, ParseU256Error> {
        if src.is_empty() {
            return Err(ParseU256Error::Empty);
        }
        let mut acc = U256::ZERO;
        for ch in src.chars() {
            if ch == '_' {
                continue;
            }
            let digit = ch
                .to_digit(radix)
                .ok_or_else(|| ParseU256Error::InvalidDigit(src.to_string()))?;
            let (next, overflow) = acc.mul_small_add(radix as u64, digit as u64);
            if overflow {
                return Err(ParseU256Error::TooLarge(src.to_string()));
            }
            acc = next;
        }
        Ok(acc)
    }
}

impl Ord for U256 {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..4).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for U256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for U256 {
    fn from(v: u64) -> Self {
        U256::from_u64(v)
    }
}

impl From<u32> for U256 {
    fn from(v: u32) -> Self {
        U256::from_u64(v as u64)
    }
}

impl From<u128> for U256 {
    fn from(v: u128) -> Self {
        U256::from_u128(v)
    }
}

impl fmt::Display for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.pad("0");
        }
        // 10^19 is the largest power of ten below 2^64.
        const CHUNK: u64 = 10_000_000_000_000_000_000;
        let mut chunks = Vec::with_capacity(5);
        let mut rest = *self;
        while !rest.is_zero() {
            let (q, r) = rest.div_rem_small(CHUNK);
            chunks.push(r);
            rest = q;
        }
        let mut s = String::with_capacity(78);
        let mut iter = chunks.iter().rev();
        if let Some(first) = iter.next() {
            s.push_str(&first.to_string());
        }
        for c in iter {
            s.push_str(&format!("{c:019}"));
        }
        f.pad(&s)
    }
}

impl fmt::Debug for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U256({self})")
    }
}

impl fmt::LowerHex for U256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let mut started = false;
        for i in (0..4).rev() {
            if started {
                s.push_str(&format!("{:016x}", self.0[i]));
            } else if self.0[i] != 0 {
                s.push_str(&format!("{:x}", self.0[i]));
                started = true;
            }
        }
        if !started {
            s.push('0');
        }
        if f.alternate() {
            s.insert_str(0, "0x");
        }
        f.pad(&s)
    }
}

/// Accepts decimal, or hexadecimal with a `0x` prefix.
impl FromStr for U256 {
    type Err = ParseU256Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => U256::from_str_radix(hex, 16),
            None => U256::from_str_radix(s, 10),
        }
    }
}

impl Serialize for U256 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for U256 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact sum of 256-bit values, tracking how many times the 256-bit word
/// wrapped. Used where the true mathematical total matters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WideSum {
    #[serde(default, skip_serializing_if = "is_zero_carry")]
    pub carries: u64,
    pub low: U256,
}

fn is_zero_carry(c: &u64) -> bool {
    *c == 0
}

impl WideSum {
    pub fn is_zero(&self) -> bool {
        self.carries == 0 && self.low.is_zero()
    }
}

impl fmt::Display for WideSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.carries == 0 {
            write!(f, "{}", self.low)
        } else {
            write!(f, "{}*2^256+{}", self.carries, self.low)
        }
    }
}

impl From<U256> for WideSum {
    fn from(low: U256) -> Self {
        WideSum { low, carries: 0 }
    }
}

impl WideSum {
    pub fn add(&mut self, v: U256) {
        let (low, overflow) = self.low.overflowing_add(v);
        self.low = low;
        self.carries += overflow as u64;
    }

    /// Returns true iff the exact total is at most `bound`.
    pub fn le(&self, bound: U256) -> bool {
        self.carries == 0 && self.low <= bound
    }
}

impl FromIterator<U256> for WideSum {
    fn from_iter<I: IntoIterator<Item = U256>>(iter: I) -> Self {
        let mut sum = WideSum::default();
        for v in iter {
            sum.add(v);
        }
        sum
    }
}
