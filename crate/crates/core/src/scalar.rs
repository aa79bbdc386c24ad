//! Scalar backends: exact cyclotomic numbers and `Complex64`.
//!
//! Character values of a finite abelian group are roots of unity, so the
//! exact backend is the field `Q(zeta)` spanned by them rather than `Q(i)`.
//! An element is kept as a finite sum `sum_q c_q e^{2 pi i q}` with rational
//! `c_q` and rotations folded into `[0, 1/2)` using `e^{i pi} = -1`.
//! That presentation is not unique (`1 + w + w^2 = 0` for a cube root `w`),
//! so equality reduces the difference modulo the cyclotomic polynomial.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::abelian::Rotation;
use crate::error::{Error, Result};

/// Arithmetic backend of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

pub trait Scalar:
    Clone
    + Send
    + Sync
    + fmt::Debug
    + PartialEq
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn root_of_unity(r: Rotation) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_complex(&self) -> Complex64;
    /// `|z|^p`. The exact backend fails when the result would leave the
    /// field (odd `p` on a non-real value).
    fn abs_pow(&self, p: u32) -> Result<Self>;
    /// True when the value is a nonnegative real number.
    fn is_real_nonneg(&self) -> bool;

    fn add_ref(&self, rhs: &Self) -> Self {
        self.clone() + rhs.clone()
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        self.clone() - rhs.clone()
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }

    fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    /// `d^e` for any integer `e`.
    fn d_pow(d: usize, e: i64) -> Self {
        Self::from_rational(&rational_pow(d, e))
    }
}

/// `d^e` as an exact rational.
pub fn rational_pow(d: usize, e: i64) -> BigRational {
    let base = BigInt::from(d);
    let mag = num_traits::pow(base, e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// An exact element of a cyclotomic field.
#[derive(Clone, Default)]
pub struct Cyclotomic {
    terms: Vec<(Rotation, BigRational)>,
}

fn half() -> Rotation {
    Rotation::new(1, 2)
}

impl Cyclotomic {
    pub fn from_rational_parts(re: BigRational, im: BigRational) -> Cyclotomic {
        let mut terms = Vec::new();
        if !re.is_zero() {
            terms.push((Rotation::zero(), re));
        }
        if !im.is_zero() {
            terms.push((Rotation::new(1, 4), im));
        }
        Cyclotomic { terms }
    }

    fn from_terms(mut raw: Vec<(Rotation, BigRational)>) -> Cyclotomic {
        let h = half();
        for t in raw.iter_mut() {
            if t.0 >= h {
                t.0 = t.0 - h;
                t.1 = -std::mem::take(&mut t.1);
            }
        }
        raw.sort_by_key(|a| a.0);
        let mut terms: Vec<(Rotation, BigRational)> = Vec::with_capacity(raw.len());
        for (q, c) in raw {
            match terms.last_mut() {
                Some(last) if last.0 == q => last.1 += c,
                _ => terms.push((q, c)),
            }
        }
        terms.retain(|t| !t.1.is_zero());
        Cyclotomic { terms }
    }

    /// The value as a rational number, if it is visibly one.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(q, c)] if q.is_zero() => Some(c.clone()),
            _ => None,
        }
    }

    /// Real and imaginary parts when the value lies visibly in `Q(i)`.
    pub fn as_gaussian(&self) -> Option<(BigRational, BigRational)> {
        let quarter = Rotation::new(1, 4);
        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        for (q, c) in &self.terms {
            if q.is_zero() {
                re += c;
            } else if *q == quarter {
                im += c;
            } else {
                return None;
            }
        }
        Some((re, im))
    }

    fn is_zero_exact(&self) -> bool {
        if self.terms.is_empty() {
            return true;
        }
        if self.as_rational().is_some() {
            return false;
        }
        let m = self
            .terms
            .iter()
            .fold(1i64, |acc, (q, _)| acc.lcm(q.ratio().denom()));
        let m = m as usize;
        let mut poly = vec![BigRational::zero(); m];
        for (q, c) in &self.terms {
            let r = q.ratio();
            let e = (*r.numer() * (m as i64 / *r.denom())) as usize;
            poly[e] += c;
        }
        let phi = cyclotomic_poly(m);
        reduce_mod_monic(&mut poly, &phi);
        poly.iter().all(|c| c.is_zero())
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{r}");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(q, c)| format!("{c}*e(2pi i {})", q.ratio()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Cyclotomic) -> bool {
        self.sub_ref(other).is_zero_exact()
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: Cyclotomic) -> Cyclotomic {
        self.add_ref(&rhs)
    }
}

impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: Cyclotomic) -> Cyclotomic {
        self.sub_ref(&rhs)
    }
}

impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: Cyclotomic) -> Cyclotomic {
        self.mul_ref(&rhs)
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(mut self) -> Cyclotomic {
        for t in self.terms.iter_mut() {
            t.1 = -std::mem::take(&mut t.1);
        }
        self
    }
}

fn merge(
    a: &[(Rotation, BigRational)],
    b: &[(Rotation, BigRational)],
    negate_b: bool,
) -> Cyclotomic {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let signed = |c: &BigRational| if negate_b { -c } else { c.clone() };
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, signed(&b[j].1)));
            j += 1;
        } else {
            let c = if negate_b {
                &a[i].1 - &b[j].1
            } else {
                &a[i].1 + &b[j].1
            };
            if !c.is_zero() {
                out.push((a[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    Cyclotomic { terms: out }
}

impl Scalar for Cyclotomic {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        Cyclotomic { terms: Vec::new() }
    }

    fn one() -> Self {
        Cyclotomic::from_i64(1)
    }

    fn from_i64(n: i64) -> Self {
        Cyclotomic::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn from_rational(r: &BigRational) -> Self {
        if r.is_zero() {
            Cyclotomic::zero()
        } else {
            Cyclotomic {
                terms: vec![(Rotation::zero(), r.clone())],
            }
        }
    }

    fn root_of_unity(r: Rotation) -> Self {
        Cyclotomic::from_terms(vec![(r, BigRational::one())])
    }

    fn conj(&self) -> Self {
        Cyclotomic::from_terms(self.terms.iter().map(|(q, c)| (-*q, c.clone())).collect())
    }

    fn is_zero(&self) -> bool {
        self.is_zero_exact()
    }

    fn to_complex(&self) -> Complex64 {
        self.terms
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, (q, c)| {
                acc + q.to_complex() * c.to_f64().unwrap_or(f64::NAN)
            })
    }

    fn abs_pow(&self, p: u32) -> Result<Self> {
        if let Some(r) = self.as_rational() {
            return Ok(Cyclotomic::from_rational(&num_traits::pow(
                r.abs(),
                p as usize,
            )));
        }
        let conj = self.conj();
        if *self == conj {
            let sign = if self.to_complex().re < 0.0 { -1 } else { 1 };
            return Ok((Cyclotomic::from_i64(sign) * self.clone()).powu(p));
        }
        if p.is_multiple_of(2) {
            return Ok(self.mul_ref(&conj).powu(p / 2));
        }
        Err(Error::Exponent(format!(
            "{p} (|z|^p of a non-real value needs an even exponent in exact mode)"
        )))
    }

    fn is_real_nonneg(&self) -> bool {
        if let Some(r) = self.as_rational() {
            return !r.is_negative();
        }
        *self == self.conj() && self.to_complex().re >= 0.0
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        merge(&self.terms, &rhs.terms, false)
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        merge(&self.terms, &rhs.terms, true)
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.terms.is_empty() || rhs.terms.is_empty() {
            return Cyclotomic::zero();
        }
        if let ([(q1, c1)], [(q2, c2)]) = (self.terms.as_slice(), rhs.terms.as_slice()) {
            if q1.is_zero() && q2.is_zero() {
                return Cyclotomic {
                    terms: vec![(Rotation::zero(), c1 * c2)],
                };
            }
        }
        let mut raw = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (q1, c1) in &self.terms {
            for (q2, c2) in &rhs.terms {
                raw.push((*q1 + *q2, c1 * c2));
            }
        }
        Cyclotomic::from_terms(raw)
    }
}

impl Scalar for Complex64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn root_of_unity(r: Rotation) -> Self {
        r.to_complex()
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn abs_pow(&self, p: u32) -> Result<Self> {
        Ok(Complex64::new(self.norm().powi(p as i32), 0.0))
    }

    fn is_real_nonneg(&self) -> bool {
        self.im == 0.0 && self.re >= 0.0
    }

    fn d_pow(d: usize, e: i64) -> Self {
        Complex64::new((d as f64).powi(e as i32), 0.0)
    }
}

static CYCLOTOMIC_POLYS: OnceLock<Mutex<HashMap<usize, Vec<i64>>>> = OnceLock::new();

/// Integer coefficients (lowest degree first) of the `m`-th cyclotomic
/// polynomial.
pub fn cyclotomic_poly(m: usize) -> Vec<i64> {
    assert!(m >= 1);
    let cache = CYCLOTOMIC_POLYS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by every Phi_k with k a proper divisor of m
    let mut num = vec![0i64; m + 1];
    num[0] = -1;
    num[m] = 1;
    for k in (1..m).filter(|k| m.is_multiple_of(*k)) {
        num = div_exact(&num, &cyclotomic_poly(k));
    }
    cache.lock().unwrap().insert(m, num.clone());
    num
}

fn div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i64; num.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn];
        q[i] = c;
        for (j, &dc) in den.iter().enumerate() {
            rem[i + j] -= c * dc;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

fn reduce_mod_monic(poly: &mut Vec<BigRational>, modulus: &[i64]) {
    let deg = modulus.len() - 1;
    while poly.len() > deg {
        let top = poly.pop().unwrap();
        if top.is_zero() {
            continue;
        }
        let shift = poly.len() - deg;
        for (j, &mc) in modulus[..deg].iter().enumerate() {
            if mc != 0 {
                poly[shift + j] -= &top * BigRational::from_integer(BigInt::from(mc));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn cube_roots_sum_to_zero() {
        let w = Cyclotomic::root_of_unity(Rotation::new(1, 3));
        let w2 = w.mul_ref(&w);
        let s = Cyclotomic::one() + w.clone() + w2.clone();
        assert!(s.is_zero());
        assert_eq!(w2, w.conj());
        assert_eq!(w.powu(3), Cyclotomic::one());
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = Cyclotomic::root_of_unity(Rotation::new(1, 4));
        assert_eq!(i.mul_ref(&i), Cyclotomic::from_i64(-1));
        assert_eq!(
            Cyclotomic::from_rational_parts(q(1, 2), q(-3, 4)).as_gaussian(),
            Some((q(1, 2), q(-3, 4)))
        );
    }

    #[test]
    fn abs_pow_rules() {
        let z = Cyclotomic::from_rational_parts(q(3, 1), q(4, 1));
        assert_eq!(z.abs_pow(2).unwrap(), Cyclotomic::from_i64(25));
        assert!(z.abs_pow(3).is_err());
        let r = Cyclotomic::from_i64(-2);
        assert_eq!(r.abs_pow(3).unwrap(), Cyclotomic::from_i64(8));
        // w + w^2 = -1 is real even though it is not stored as a rational
        let w = Cyclotomic::root_of_unity(Rotation::new(1, 3));
        let s = w.clone() + w.mul_ref(&w);
        assert_eq!(s.abs_pow(3).unwrap(), Cyclotomic::one());
        assert!(!s.is_real_nonneg());
    }

    #[test]
    fn float_backend_agrees() {
        let w = Cyclotomic::root_of_unity(Rotation::new(2, 3));
        let z = Cyclotomic::from_rational_parts(q(1, 3), q(2, 5)).mul_ref(&w);
        let f = Complex64::root_of_unity(Rotation::new(2, 3)) * Complex64::new(1.0 / 3.0, 0.4);
        assert!((z.to_complex() - f).norm() < 1e-15);
    }

    #[test]
    fn d_pow_negative() {
        assert_eq!(
            Cyclotomic::d_pow(3, -2),
            Cyclotomic::from_rational(&q(1, 9))
        );
        assert_eq!(Complex64::d_pow(2, -3), Complex64::new(0.125, 0.0));
    }
}
