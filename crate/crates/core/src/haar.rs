//! The Haar system `h_I^s` built from the characters of the digit group,
//! and the functions `phi_k = d^k 1_[0, d^-k)`.
//!
//! Atoms are evaluated on grid cells rather than materialized: `h_I^s` at a
//! cell of resolution `res > scale(I)` is `xi_s` of the cell's digit at
//! position `-scale(I) - 1`, or zero outside `I`.

use crate::abelian::{CharacterTable, Group, Rotation};
use crate::dadic::DadicInterval;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HaarAtom {
    pub interval: DadicInterval,
    pub s: usize,
}

/// Base-`d` digit of a resolution-`res` cell at real position `pos`.
fn cell_digit(cell: u64, res: i32, pos: i32, d: usize) -> Result<usize> {
    let j = res + pos;
    if j < 0 {
        return Err(Error::InsufficientResolution {
            have: res as i64,
            need: -(pos as i64),
        });
    }
    Ok(match (d as u64).checked_pow(j as u32) {
        Some(w) => ((cell / w) % d as u64) as usize,
        None => 0,
    })
}

impl HaarAtom {
    pub fn new(interval: DadicInterval, s: usize) -> HaarAtom {
        HaarAtom { interval, s }
    }

    /// `h_I^s` on a resolution-`res` cell as a rotation, `None` outside `I`.
    pub fn rotation_at_cell(
        &self,
        table: &CharacterTable,
        cell: u64,
        res: i32,
    ) -> Result<Option<Rotation>> {
        let d = table.order();
        if self.s >= d {
            return Err(Error::LabelOutOfRange {
                label: self.s,
                order: d,
            });
        }
        if res <= self.interval.scale {
            return Err(Error::InsufficientResolution {
                have: res as i64,
                need: self.interval.scale as i64 + 1,
            });
        }
        if !self.interval.contains_cell(cell, res, d)? {
            return Ok(None);
        }
        let digit = cell_digit(cell, res, -self.interval.scale - 1, d)?;
        Ok(Some(table.entry(self.s, digit)))
    }

    pub fn value_at_cell<S: Scalar>(
        &self,
        table: &CharacterTable,
        cell: u64,
        res: i32,
    ) -> Result<S> {
        Ok(self
            .rotation_at_cell(table, cell, res)?
            .map_or_else(S::zero, S::root_of_unity))
    }

    /// `h_I^s(t)` for a terminating expansion `t`.
    pub fn value_at<S: Scalar>(&self, table: &CharacterTable, t: &crate::dadic::DigitVector) -> S {
        if !self.interval.contains(t) {
            return S::zero();
        }
        S::root_of_unity(table.entry(self.s, t.digit(-self.interval.scale - 1)))
    }
}

/// `phi_k = d^k 1_[0, d^-k)` on a resolution-`res` cell, `res >= k`.
pub fn phi_at_cell<S: Scalar>(k: i32, cell: u64, res: i32, d: usize) -> Result<S> {
    if res < k {
        return Err(Error::InsufficientResolution {
            have: res as i64,
            need: k as i64,
        });
    }
    let inside = (d as u64)
        .checked_pow((res - k) as u32)
        .is_none_or(|w| cell < w);
    Ok(if inside {
        S::d_pow(d, k as i64)
    } else {
        S::zero()
    })
}

/// One term `d^r h^s_[0, d^-r)` of a telescoping sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TelescopeTerm {
    pub r: i32,
    pub s: usize,
}

impl TelescopeTerm {
    pub fn coefficient<S: Scalar>(&self, d: usize) -> S {
        S::d_pow(d, self.r as i64)
    }

    pub fn atom(&self) -> HaarAtom {
        HaarAtom::new(DadicInterval::origin(self.r), self.s)
    }
}

/// Terms of `phi_hi - phi_lo = sum_{r=lo}^{hi-1} sum_{s=1}^{d-1} d^r h^s_[0, d^-r)`.
pub fn phi_difference_decomposition(d: usize, k_lo: i32, k_hi: i32) -> Result<Vec<TelescopeTerm>> {
    if k_lo >= k_hi {
        return Err(Error::InvalidArgument(format!(
            "telescoping needs k_lo < k_hi, got {k_lo} >= {k_hi}"
        )));
    }
    Ok((k_lo..k_hi)
        .flat_map(|r| (1..d).map(move |s| TelescopeTerm { r, s }))
        .collect())
}

/// Evaluates `sum coeff * atom` on one cell.
pub fn eval_terms_at_cell<S: Scalar>(
    terms: &[(S, HaarAtom)],
    table: &CharacterTable,
    cell: u64,
    res: i32,
) -> Result<S> {
    terms.iter().try_fold(S::zero(), |acc, (c, atom)| {
        Ok(acc.add_ref(&c.mul_ref(&atom.value_at_cell::<S>(table, cell, res)?)))
    })
}

/// Checks `h^s_{I (+) J}(x (+) y) = h^s_I(x) h^s_J(y)` and
/// `h^s_{(-) I}((-) x) = conj(h^s_I(x))` for cells `x in I`, `y in J` at
/// resolution `res`.
pub fn character_product_check(
    table: &CharacterTable,
    i: DadicInterval,
    j: DadicInterval,
    s: usize,
    x: u64,
    y: u64,
    res: i32,
) -> Result<bool> {
    let g: &Group = table.group();
    let d = g.order();
    let ij = i.oplus(&j, g)?;
    if !i.contains_cell(x, res, d)? || !j.contains_cell(y, res, d)? {
        return Err(Error::NotInInterval);
    }
    let hi = HaarAtom::new(i, s).rotation_at_cell(table, x, res)?;
    let hj = HaarAtom::new(j, s).rotation_at_cell(table, y, res)?;
    let hij = HaarAtom::new(ij, s).rotation_at_cell(table, g.oplus_int(x, y), res)?;
    let hneg = HaarAtom::new(i.ominus(g), s).rotation_at_cell(table, g.ominus_int(x), res)?;
    let (hi, hj) = match (hi, hj) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(false),
    };
    Ok(hij == Some(hi + hj) && hneg == Some(-hi))
}
