//! Finite abelian groups `Z/d1 x ... x Z/dm`, their labelling by
//! `0..d` and their character tables.
//!
//! Labels use mixed-radix order: the tuple `(a1, ..., am)` has label
//! `a1 + d1 * (a2 + d2 * (...))`, so label 0 is the neutral element.
//! Characters are enumerated in the same order over character tuples, which
//! makes `xi_0` the trivial character.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point `e^{2 pi i q}` of the unit circle stored by its rotation number
/// `q in [0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rotation(Ratio<i64>);

impl Rotation {
    pub fn new(num: i64, den: i64) -> Rotation {
        assert!(den != 0, "zero denominator");
        let r = Ratio::new(num, den);
        Rotation(frac(r))
    }

    pub fn zero() -> Rotation {
        Rotation(Ratio::zero())
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// The unit complex number this rotation stands for.
    pub fn to_complex(&self) -> Complex64 {
        match (*self.0.numer(), *self.0.denom()) {
            (0, _) => return Complex64::new(1.0, 0.0),
            (1, 4) => return Complex64::new(0.0, 1.0),
            (1, 2) => return Complex64::new(-1.0, 0.0),
            (3, 4) => return Complex64::new(0.0, -1.0),
            _ => {}
        }
        let q = *self.0.numer() as f64 / *self.0.denom() as f64;
        let angle = 2.0 * std::f64::consts::PI * q;
        Complex64::new(angle.cos(), angle.sin())
    }

    pub fn to_scalar<S: Scalar>(&self) -> S {
        S::root_of_unity(*self)
    }
}

fn frac(r: Ratio<i64>) -> Ratio<i64> {
    let f = r - r.floor();
    if f < Ratio::zero() {
        f + Ratio::one()
    } else {
        f
    }
}

impl Add for Rotation {
    type Output = Rotation;
    fn add(self, rhs: Rotation) -> Rotation {
        Rotation(frac(self.0 + rhs.0))
    }
}

impl Sub for Rotation {
    type Output = Rotation;
    fn sub(self, rhs: Rotation) -> Rotation {
        self + (-rhs)
    }
}

impl Neg for Rotation {
    type Output = Rotation;
    fn neg(self) -> Rotation {
        Rotation(frac(-self.0))
    }
}

impl fmt::Debug for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rot({})", self.0)
    }
}

#[derive(Debug, PartialEq, Eq)]
struct GroupInner {
    orders: Vec<usize>,
    d: usize,
    add: Vec<usize>,
    neg: Vec<usize>,
    broken_negation: bool,
}

/// A finite abelian group given by its cyclic factor orders.
///
/// Cloning is cheap; the addition and inversion tables are shared.
#[derive(Clone, PartialEq, Eq)]
pub struct Group(Arc<GroupInner>);

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group{:?}", self.0.orders)
    }
}

impl Serialize for Group {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.orders.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Group {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Group, D::Error> {
        let orders = Vec::<usize>::deserialize(de)?;
        Group::new(&orders).map_err(serde::de::Error::custom)
    }
}

impl Group {
    /// Builds `Z/orders[0] x Z/orders[1] x ...`.
    pub fn new(orders: &[usize]) -> Result<Group> {
        if orders.is_empty() {
            return Err(Error::InvalidGroup("empty list of orders".into()));
        }
        if let Some(bad) = orders.iter().find(|&&o| o < 2) {
            return Err(Error::InvalidGroup(format!("factor order {bad} < 2")));
        }
        let d = orders
            .iter()
            .try_fold(1usize, |acc, &o| acc.checked_mul(o))
            .filter(|&d| d <= 1 << 16)
            .ok_or_else(|| Error::InvalidGroup("group order too large".into()))?;
        let mut g = GroupInner {
            orders: orders.to_vec(),
            d,
            add: vec![0; d * d],
            neg: vec![0; d],
            broken_negation: false,
        };
        for a in 0..d {
            let ca = components_of(&g.orders, a);
            let na: Vec<usize> = ca
                .iter()
                .zip(&g.orders)
                .map(|(&x, &o)| (o - x) % o)
                .collect();
            g.neg[a] = label_of(&g.orders, &na);
            for b in 0..d {
                let cb = components_of(&g.orders, b);
                let s: Vec<usize> = ca
                    .iter()
                    .zip(&cb)
                    .zip(&g.orders)
                    .map(|((&x, &y), &o)| (x + y) % o)
                    .collect();
                g.add[a * d + b] = label_of(&g.orders, &s);
            }
        }
        Ok(Group(Arc::new(g)))
    }

    pub fn cyclic(d: usize) -> Result<Group> {
        Group::new(&[d])
    }

    /// Group cardinality `d`.
    pub fn order(&self) -> usize {
        self.0.d
    }

    pub fn orders(&self) -> &[usize] {
        &self.0.orders
    }

    /// Least common multiple of the factor orders.
    pub fn exponent(&self) -> usize {
        self.0.orders.iter().fold(1, |acc, &o| acc.lcm(&o))
    }

    fn check(&self, a: usize) -> Result<()> {
        if a < self.0.d {
            Ok(())
        } else {
            Err(Error::LabelOutOfRange {
                label: a,
                order: self.0.d,
            })
        }
    }

    pub fn add(&self, a: usize, b: usize) -> Result<usize> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_raw(a, b))
    }

    pub fn neg(&self, a: usize) -> Result<usize> {
        self.check(a)?;
        Ok(self.neg_raw(a))
    }

    pub(crate) fn add_raw(&self, a: usize, b: usize) -> usize {
        self.0.add[a * self.0.d + b]
    }

    pub(crate) fn neg_raw(&self, a: usize) -> usize {
        if self.0.broken_negation {
            a
        } else {
            self.0.neg[a]
        }
    }

    /// Component tuple of a label.
    pub fn components(&self, a: usize) -> Result<Vec<usize>> {
        self.check(a)?;
        Ok(components_of(&self.0.orders, a))
    }

    /// Label of a component tuple.
    pub fn label(&self, comps: &[usize]) -> Result<usize> {
        if comps.len() != self.0.orders.len()
            || comps.iter().zip(&self.0.orders).any(|(&c, &o)| c >= o)
        {
            return Err(Error::InvalidArgument(format!(
                "tuple {comps:?} does not belong to {self:?}"
            )));
        }
        Ok(label_of(&self.0.orders, comps))
    }

    /// Digit-wise sum of two nonnegative integers read in base `d`.
    pub fn oplus_int(&self, mut x: u64, mut y: u64) -> u64 {
        let d = self.0.d as u64;
        let (mut out, mut place) = (0u64, 1u64);
        while x > 0 || y > 0 {
            let digit = self.add_raw((x % d) as usize, (y % d) as usize) as u64;
            out += digit * place;
            x /= d;
            y /= d;
            place = place.saturating_mul(d);
        }
        out
    }

    /// Digit-wise inverse of a nonnegative integer read in base `d`.
    pub fn ominus_int(&self, mut x: u64) -> u64 {
        let d = self.0.d as u64;
        let (mut out, mut place) = (0u64, 1u64);
        while x > 0 {
            out += self.neg_raw((x % d) as usize) as u64 * place;
            x /= d;
            place = place.saturating_mul(d);
        }
        out
    }

    /// Copy of this group whose inversion is replaced by the identity map.
    /// Used to plant a fault for negative-control runs.
    #[doc(hidden)]
    pub fn with_broken_negation(&self) -> Group {
        let inner = &*self.0;
        Group(Arc::new(GroupInner {
            orders: inner.orders.clone(),
            d: inner.d,
            add: inner.add.clone(),
            neg: inner.neg.clone(),
            broken_negation: true,
        }))
    }
}

fn components_of(orders: &[usize], mut a: usize) -> Vec<usize> {
    orders
        .iter()
        .map(|&o| {
            let c = a % o;
            a /= o;
            c
        })
        .collect()
}

fn label_of(orders: &[usize], comps: &[usize]) -> usize {
    comps
        .iter()
        .zip(orders)
        .rev()
        .fold(0, |acc, (&c, &o)| acc * o + c)
}

/// The `d x d` table `entry(s, a) = xi_s(a)` stored as rotations.
#[derive(Clone, PartialEq, Eq)]
pub struct CharacterTable {
    group: Group,
    entries: Vec<Rotation>,
}

impl fmt::Debug for CharacterTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.group.order();
        let mut m = f.debug_list();
        for s in 0..d {
            m.entry(&&self.entries[s * d..(s + 1) * d]);
        }
        m.finish()
    }
}

impl CharacterTable {
    /// All characters of `group`. Character `s` with tuple `(s_i)` sends
    /// `a = (a_i)` to the rotation `sum_i s_i a_i / d_i`.
    pub fn new(group: &Group) -> CharacterTable {
        let d = group.order();
        let orders = group.orders();
        let mut entries = Vec::with_capacity(d * d);
        for s in 0..d {
            let cs = components_of(orders, s);
            for a in 0..d {
                let ca = components_of(orders, a);
                let rot = cs
                    .iter()
                    .zip(&ca)
                    .zip(orders)
                    .fold(Rotation::zero(), |acc, ((&si, &ai), &o)| {
                        acc + Rotation::new((si * ai) as i64, o as i64)
                    });
                entries.push(rot);
            }
        }
        CharacterTable {
            group: group.clone(),
            entries,
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    /// `xi_s(a)` as a rotation.
    pub fn entry(&self, s: usize, a: usize) -> Rotation {
        let d = self.group.order();
        self.entries[s * d + a]
    }

    pub fn value<S: Scalar>(&self, s: usize, a: usize) -> S {
        S::root_of_unity(self.entry(s, a))
    }

    /// The same characters listed in a different order: row `s` of the
    /// result is row `perm[s]` of `self`. The trivial character must stay
    /// first.
    pub fn reordered(&self, perm: &[usize]) -> Result<CharacterTable> {
        let d = self.group.order();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.first() != Some(&0) {
            return Err(Error::InvalidArgument(format!(
                "expected a permutation of 0..{d} fixing 0"
            )));
        }
        for &s in perm {
            if s >= d || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidArgument(format!(
                    "{perm:?} is not a permutation"
                )));
            }
        }
        let entries = perm
            .iter()
            .flat_map(|&s| self.entries[s * d..(s + 1) * d].iter().copied())
            .collect();
        Ok(CharacterTable {
            group: self.group.clone(),
            entries,
        })
    }

    /// Copy of the table with one entry overwritten. Used to plant a fault
    /// for negative-control runs.
    #[doc(hidden)]
    pub fn with_corrupted_entry(&self, s: usize, a: usize, rot: Rotation) -> CharacterTable {
        let mut t = self.clone();
        let d = t.group.order();
        t.entries[s * d + a] = rot;
        t
    }
}
