//! Digit-vector model of the Cantor group structure on the nonnegative reals.
//!
//! Only terminating base-`d` expansions are represented, so every element is
//! a nonnegative `d`-adic rational and `iota`/`kappa` are exact inverses.
//! Intervals are `(scale, index)` pairs denoting `[d^-k l, d^-k (l+1))`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::abelian::Group;
use crate::error::{Error, Result};
use crate::scalar::rational_pow;

/// `d^n` as `u64`, panicking on overflow.
pub fn upow(d: usize, n: u32) -> u64 {
    (d as u64).checked_pow(n).expect("power of d overflows u64")
}

/// Finitely supported digit string `sum_k a_k d^k` over a group's labels.
#[derive(Clone, PartialEq, Eq)]
pub struct DigitVector {
    group: Group,
    /// Position of `digits[0]`.
    lo: i32,
    digits: Vec<usize>,
}

impl DigitVector {
    pub fn zero(group: &Group) -> DigitVector {
        DigitVector {
            group: group.clone(),
            lo: 0,
            digits: Vec::new(),
        }
    }

    /// Builds from digits at positions `lo, lo + 1, ...`.
    pub fn from_digits(group: &Group, lo: i32, digits: &[usize]) -> Result<DigitVector> {
        if let Some(&bad) = digits.iter().find(|&&a| a >= group.order()) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                order: group.order(),
            });
        }
        Ok(DigitVector {
            group: group.clone(),
            lo,
            digits: digits.to_vec(),
        }
        .canonical())
    }

    fn canonical(mut self) -> DigitVector {
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
        let lead = self.digits.iter().take_while(|&&a| a == 0).count();
        self.digits.drain(..lead);
        self.lo += lead as i32;
        if self.digits.is_empty() {
            self.lo = 0;
        }
        self
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Digit at position `k` (zero outside the stored window).
    pub fn digit(&self, k: i32) -> usize {
        let i = k - self.lo;
        if i < 0 {
            0
        } else {
            self.digits.get(i as usize).copied().unwrap_or(0)
        }
    }

    /// Inclusive window `[lo, hi]` of the stored digits, `None` for zero.
    pub fn window(&self) -> Option<(i32, i32)> {
        if self.digits.is_empty() {
            None
        } else {
            Some((self.lo, self.lo + self.digits.len() as i32 - 1))
        }
    }

    fn zip_with(
        &self,
        other: &DigitVector,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<DigitVector> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let (lo, hi) = match (self.window(), other.window()) {
            (None, None) => return Ok(DigitVector::zero(&self.group)),
            (Some(w), None) | (None, Some(w)) => w,
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
        };
        let digits = (lo..=hi)
            .map(|k| f(self.digit(k), other.digit(k)))
            .collect();
        Ok(DigitVector {
            group: self.group.clone(),
            lo,
            digits,
        }
        .canonical())
    }

    /// Digit-wise group sum `x (+) y`.
    pub fn oplus(&self, other: &DigitVector) -> Result<DigitVector> {
        let g = self.group.clone();
        self.zip_with(other, |a, b| g.add_raw(a, b))
    }

    /// Digit-wise group inverse.
    pub fn ominus(&self) -> DigitVector {
        DigitVector {
            group: self.group.clone(),
            lo: self.lo,
            digits: self.digits.iter().map(|&a| self.group.neg_raw(a)).collect(),
        }
        .canonical()
    }

    /// The represented real number `sum_k a_k d^k`.
    pub fn iota(&self) -> BigRational {
        let d = self.group.order();
        self.digits
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (i, &a)| {
                acc + rational_pow(d, (self.lo + i as i32) as i64)
                    * BigRational::from_integer(BigInt::from(a))
            })
    }

    /// Terminating expansion of `value` with digits in positions
    /// `k_lo..=k_hi`.
    pub fn kappa(group: &Group, value: &BigRational, window: (i32, i32)) -> Result<DigitVector> {
        let (k_lo, k_hi) = window;
        if k_lo > k_hi {
            return Err(Error::InvalidArgument(format!(
                "empty window [{k_lo}, {k_hi}]"
            )));
        }
        if value.is_negative() {
            return Err(Error::NotRepresentable(format!("{value} is negative")));
        }
        let d = group.order();
        let scaled = value * rational_pow(d, -(k_lo as i64));
        if !scaled.is_integer() {
            return Err(Error::NotRepresentable(format!(
                "{value} is not a multiple of {d}^{k_lo}"
            )));
        }
        let mut m = scaled.to_integer();
        let dd = BigInt::from(d);
        let mut digits = Vec::new();
        while !m.is_zero() {
            if digits.len() as i64 > (k_hi - k_lo) as i64 {
                return Err(Error::NotRepresentable(format!(
                    "{value} exceeds the window [{k_lo}, {k_hi}]"
                )));
            }
            let r = (&m % &dd).to_usize().unwrap();
            digits.push(r);
            m /= &dd;
        }
        DigitVector::from_digits(group, k_lo, &digits)
    }
}

impl fmt::Debug for DigitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}_{}", self.group.order())
    }
}

/// Base-`d` rendering with a radix point, e.g. `10.01`. Digits above 9 use
/// letters while `d <= 36`, otherwise they are bracketed.
impl fmt::Display for DigitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.group.order();
        let render = |a: usize| -> String {
            if d <= 36 {
                std::char::from_digit(a as u32, 36).unwrap().to_string()
            } else {
                format!("[{a}]")
            }
        };
        let hi = self.window().map_or(0, |w| w.1).max(0);
        let lo = self.window().map_or(0, |w| w.0).min(0);
        let mut s = String::new();
        for k in (lo..=hi).rev() {
            if k == -1 {
                s.push('.');
            }
            s.push_str(&render(self.digit(k)));
        }
        f.write_str(&s)
    }
}

/// `sum_k a_k d^k` for a finite sequence `a_0, a_1, ...`.
pub fn iota_prime(d: usize, digits: &[usize]) -> u64 {
    digits
        .iter()
        .rev()
        .fold(0u64, |acc, &a| acc * d as u64 + a as u64)
}

/// Base-`d` digits of `t`, least significant first; empty for zero.
pub fn kappa_prime(d: usize, mut t: u64) -> Vec<usize> {
    let mut out = Vec::new();
    while t > 0 {
        out.push((t % d as u64) as usize);
        t /= d as u64;
    }
    out
}

/// The `d`-adic interval `[d^-scale * index, d^-scale * (index + 1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DadicInterval {
    pub scale: i32,
    pub index: u64,
}

impl DadicInterval {
    pub fn new(scale: i32, index: u64) -> DadicInterval {
        DadicInterval { scale, index }
    }

    /// `[0, d^-scale)`.
    pub fn origin(scale: i32) -> DadicInterval {
        DadicInterval { scale, index: 0 }
    }

    pub fn length(&self, d: usize) -> BigRational {
        rational_pow(d, -(self.scale as i64))
    }

    pub fn left(&self, d: usize) -> BigRational {
        self.length(d) * BigRational::from_integer(BigInt::from(self.index))
    }

    /// `I (+) J`; both intervals must have the same length.
    pub fn oplus(&self, other: &DadicInterval, group: &Group) -> Result<DadicInterval> {
        if self.scale != other.scale {
            return Err(Error::ScaleMismatch(self.scale, other.scale));
        }
        Ok(DadicInterval::new(
            self.scale,
            group.oplus_int(self.index, other.index),
        ))
    }

    pub fn ominus(&self, group: &Group) -> DadicInterval {
        DadicInterval::new(self.scale, group.ominus_int(self.index))
    }

    /// The ancestor `d^n I` of length `d^n |I|`.
    pub fn ancestor(&self, n: u32, d: usize) -> DadicInterval {
        let div = (d as u64).checked_pow(n);
        DadicInterval::new(self.scale - n as i32, div.map_or(0, |q| self.index / q))
    }

    /// The `d` children of length `|I| / d`, left to right.
    pub fn children(&self, d: usize) -> Vec<DadicInterval> {
        (0..d as u64)
            .map(|i| DadicInterval::new(self.scale + 1, self.index * d as u64 + i))
            .collect()
    }

    /// Range of resolution-`res` cell indices contained in the interval.
    pub fn cells(&self, res: i32, d: usize) -> Result<std::ops::Range<u64>> {
        if res < self.scale {
            return Err(Error::InsufficientResolution {
                have: res as i64,
                need: self.scale as i64,
            });
        }
        let w = upow(d, (res - self.scale) as u32);
        Ok(self.index * w..(self.index + 1) * w)
    }

    /// Whether resolution-`res` cell `cell` lies inside the interval.
    pub fn contains_cell(&self, cell: u64, res: i32, d: usize) -> Result<bool> {
        if res < self.scale {
            return Err(Error::InsufficientResolution {
                have: res as i64,
                need: self.scale as i64,
            });
        }
        Ok(cell / upow(d, (res - self.scale) as u32) == self.index)
    }

    /// The scale-`scale` interval containing resolution-`res` cell `cell`.
    pub fn containing_cell(cell: u64, res: i32, scale: i32, d: usize) -> DadicInterval {
        debug_assert!(res >= scale);
        let gap = (res - scale) as u32;
        let idx = (d as u64).checked_pow(gap).map_or(0, |w| cell / w);
        DadicInterval::new(scale, idx)
    }

    pub fn contains(&self, x: &DigitVector) -> bool {
        let d = x.group().order();
        let v = x.iota();
        let left = self.left(d);
        v >= left && v < left + self.length(d)
    }
}

/// Whether resolution-`res` cells `y1`, `y2` lie in the same interval of
/// length `d^-k`, i.e. `y1 (-) y2 < d^-k`.
pub fn same_block(y1: u64, y2: u64, k: i32, res: i32, d: usize) -> Result<bool> {
    if res < k {
        return Err(Error::InsufficientResolution {
            have: res as i64,
            need: k as i64,
        });
    }
    Ok(match (d as u64).checked_pow((res - k) as u32) {
        Some(w) => y1 / w == y2 / w,
        None => true,
    })
}
