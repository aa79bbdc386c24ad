//! Step functions on the quarter plane that are constant on `d`-adic cells.
//!
//! A [`StepFn2`] with resolution `K` and support exponent `N` stores one value
//! per cell `[a d^-K, (a+1) d^-K) x [b d^-K, (b+1) d^-K)` with
//! `0 <= a, b < d^(N+K)` and vanishes outside `[0, d^N)^2`.

use std::any::Any;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::abelian::{Group, Rotation};
use crate::dadic::upow;
use crate::error::{Error, Result};
use crate::scalar::{Cyclotomic, Mode, Scalar};

/// Largest number of cells per axis accepted for a grid.
pub const MAX_SIDE: usize = 32;

/// Digit-wise addition and inversion tables on `0..side`, `side = d^n`.
#[derive(Clone, Debug)]
pub(crate) struct CellAlgebra {
    pub side: usize,
    oplus: Vec<u32>,
    ominus: Vec<u32>,
}

impl CellAlgebra {
    pub fn new(group: &Group, side: usize) -> CellAlgebra {
        let mut oplus = vec![0u32; side * side];
        for a in 0..side {
            for b in 0..side {
                oplus[a * side + b] = group.oplus_int(a as u64, b as u64) as u32;
            }
        }
        let ominus = (0..side)
            .map(|a| group.ominus_int(a as u64) as u32)
            .collect();
        CellAlgebra {
            side,
            oplus,
            ominus,
        }
    }

    #[inline]
    pub fn oplus(&self, a: usize, b: usize) -> usize {
        self.oplus[a * self.side + b] as usize
    }

    #[inline]
    pub fn ominus(&self, a: usize) -> usize {
        self.ominus[a] as usize
    }
}

#[derive(Clone, Debug)]
pub struct StepFn2<S> {
    group: Group,
    resolution: u32,
    support: u32,
    side: usize,
    values: Vec<S>,
    nonneg: bool,
}

impl<S: Scalar> PartialEq for StepFn2<S> {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group
            && self.resolution == other.resolution
            && self.support == other.support
            && self.values == other.values
    }
}

impl<S: Scalar> StepFn2<S> {
    /// Builds a step function from a row-major `d^(N+K) x d^(N+K)` grid;
    /// `values[a * side + b]` is the value on cell `(a, b)`.
    pub fn new(group: &Group, resolution: u32, support: u32, values: Vec<S>) -> Result<StepFn2<S>> {
        let d = group.order();
        let side = (d as u64)
            .checked_pow(resolution + support)
            .filter(|&s| s <= MAX_SIDE as u64)
            .ok_or_else(|| {
                Error::CapExceeded(format!(
                    "{d}^({resolution}+{support}) cells per axis exceeds {MAX_SIDE}"
                ))
            })? as usize;
        if values.len() != side * side {
            return Err(Error::Dimension(format!(
                "expected {} values for a {side}x{side} grid, got {}",
                side * side,
                values.len()
            )));
        }
        let nonneg = values.iter().all(S::is_real_nonneg);
        Ok(StepFn2 {
            group: group.clone(),
            resolution,
            support,
            side,
            values,
            nonneg,
        })
    }

    /// Builds from a cell function `f(a, b)`.
    pub fn from_fn(
        group: &Group,
        resolution: u32,
        support: u32,
        mut f: impl FnMut(usize, usize) -> S,
    ) -> Result<StepFn2<S>> {
        let side = (group.order() as u64)
            .checked_pow(resolution + support)
            .filter(|&s| s <= MAX_SIDE as u64)
            .ok_or_else(|| Error::CapExceeded("grid side exceeds cap".into()))?
            as usize;
        let values = (0..side * side).map(|i| f(i / side, i % side)).collect();
        StepFn2::new(group, resolution, support, values)
    }

    pub fn zeros(group: &Group, resolution: u32, support: u32) -> Result<StepFn2<S>> {
        StepFn2::from_fn(group, resolution, support, |_, _| S::zero())
    }

    /// Indicator of the unit square `[0,1)^2` at the given grid.
    pub fn unit_indicator(group: &Group, resolution: u32, support: u32) -> Result<StepFn2<S>> {
        let w = upow(group.order(), resolution) as usize;
        StepFn2::from_fn(group, resolution, support, |a, b| {
            if a < w && b < w {
                S::one()
            } else {
                S::zero()
            }
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn d(&self) -> usize {
        self.group.order()
    }

    /// Resolution `K`: cells have side `d^-K`.
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Support exponent `N`: the function vanishes outside `[0, d^N)^2`.
    pub fn support(&self) -> u32 {
        self.support
    }

    /// Cells per axis, `d^(N+K)`.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize) -> &S {
        &self.values[a * self.side + b]
    }

    /// Whether every value is a nonnegative real.
    pub fn is_nonnegative(&self) -> bool {
        self.nonneg
    }

    /// Area `d^-2K` of a cell.
    pub fn cell_area(&self) -> S {
        S::d_pow(self.d(), -2 * self.resolution as i64)
    }

    pub(crate) fn same_grid(&self, other: &StepFn2<S>) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        if self.resolution != other.resolution || self.support != other.support {
            return Err(Error::Dimension(format!(
                "grids differ: (K={}, N={}) vs (K={}, N={})",
                self.resolution, self.support, other.resolution, other.support
            )));
        }
        Ok(())
    }

    pub(crate) fn cell_algebra(&self) -> CellAlgebra {
        CellAlgebra::new(&self.group, self.side)
    }

    /// Value at a point `(x, y)` of the quarter plane.
    pub fn eval_point(&self, x: &BigRational, y: &BigRational) -> S {
        let scale = crate::scalar::rational_pow(self.d(), self.resolution as i64);
        let cell = |t: &BigRational| -> Option<usize> {
            if t.is_negative() {
                return None;
            }
            (t * &scale)
                .floor()
                .to_integer()
                .to_usize()
                .filter(|&c| c < self.side)
        };
        match (cell(x), cell(y)) {
            (Some(a), Some(b)) => self.at(a, b).clone(),
            _ => S::zero(),
        }
    }

    /// The same function on a grid of resolution `new_res >= K`.
    pub fn refine(&self, new_res: u32) -> Result<StepFn2<S>> {
        if new_res < self.resolution {
            return Err(Error::InvalidArgument(format!(
                "cannot coarsen resolution {} to {new_res}",
                self.resolution
            )));
        }
        let w = upow(self.d(), new_res - self.resolution) as usize;
        StepFn2::from_fn(&self.group, new_res, self.support, |a, b| {
            self.at(a / w, b / w).clone()
        })
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> StepFn2<S> {
        let values: Vec<S> = self.values.iter().map(f).collect();
        let nonneg = values.iter().all(S::is_real_nonneg);
        StepFn2 {
            values,
            nonneg,
            ..self.clone_meta()
        }
    }

    pub fn zip_with(&self, other: &StepFn2<S>, f: impl Fn(&S, &S) -> S) -> Result<StepFn2<S>> {
        self.same_grid(other)?;
        let values: Vec<S> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(a, b))
            .collect();
        let nonneg = values.iter().all(S::is_real_nonneg);
        Ok(StepFn2 {
            values,
            nonneg,
            ..self.clone_meta()
        })
    }

    fn clone_meta(&self) -> StepFn2<S> {
        StepFn2 {
            group: self.group.clone(),
            resolution: self.resolution,
            support: self.support,
            side: self.side,
            values: Vec::new(),
            nonneg: true,
        }
    }

    /// `||F||_p^p = sum |value|^p d^-2K` for an integer `p >= 1`. Exact mode
    /// needs an even `p` unless the data is real.
    pub fn lp_norm_p(&self, p: u32) -> Result<S> {
        if p == 0 {
            return Err(Error::Exponent("0".into()));
        }
        let mut acc = S::zero();
        for v in &self.values {
            acc = acc.add_ref(&v.abs_pow(p)?);
        }
        Ok(acc.mul_ref(&self.cell_area()))
    }

    /// `||F||_p^p` in floating point for any real `p >= 1`.
    pub fn lp_norm_p_f64(&self, p: f64) -> f64 {
        let area = (self.d() as f64).powi(-2 * self.resolution as i32);
        self.values
            .iter()
            .map(|v| v.to_complex().norm().powf(p))
            .sum::<f64>()
            * area
    }

    /// `F~(z, y) = F(z (-) y, y)`.
    pub fn tilde_f(&self) -> StepFn2<S> {
        let alg = self.cell_algebra();
        let n = self.side;
        let values = (0..n * n)
            .map(|i| {
                let (z, y) = (i / n, i % n);
                self.at(alg.oplus(z, alg.ominus(y)), y).clone()
            })
            .collect();
        StepFn2 {
            values,
            nonneg: self.nonneg,
            ..self.clone_meta()
        }
    }

    /// `G~(z, x) = G(x, z (-) x)`.
    pub fn tilde_g(&self) -> StepFn2<S> {
        let alg = self.cell_algebra();
        let n = self.side;
        let values = (0..n * n)
            .map(|i| {
                let (z, x) = (i / n, i % n);
                self.at(x, alg.oplus(z, alg.ominus(x))).clone()
            })
            .collect();
        StepFn2 {
            values,
            nonneg: self.nonneg,
            ..self.clone_meta()
        }
    }

    pub fn to_float(&self) -> StepFn2<Complex64> {
        StepFn2 {
            group: self.group.clone(),
            resolution: self.resolution,
            support: self.support,
            side: self.side,
            values: self.values.iter().map(S::to_complex).collect(),
            nonneg: self.nonneg,
        }
    }

    /// Serializes as `{d, group, K, N, mode, values}`. Exact values are
    /// `[re_num, re_den, im_num, im_den]`; float values are `[re, im]`.
    pub fn to_json(&self) -> Result<Value> {
        let values: Vec<Value> = self
            .values
            .iter()
            .map(|v| match S::MODE {
                Mode::Float => {
                    let c = v.to_complex();
                    Ok(if c.im == 0.0 {
                        json!(c.re)
                    } else {
                        json!([c.re, c.im])
                    })
                }
                Mode::Exact => {
                    let cy = (v as &dyn Any)
                        .downcast_ref::<Cyclotomic>()
                        .expect("exact scalar is cyclotomic");
                    let (re, im) = cy.as_gaussian().ok_or_else(|| {
                        Error::NotRepresentable(format!("{cy:?} is not a Gaussian rational"))
                    })?;
                    Ok(json!([
                        int_json(re.numer()),
                        int_json(re.denom()),
                        int_json(im.numer()),
                        int_json(im.denom())
                    ]))
                }
            })
            .collect::<Result<_>>()?;
        Ok(json!({
            "d": self.d(),
            "group": self.group.orders(),
            "K": self.resolution,
            "N": self.support,
            "mode": S::MODE,
            "values": values,
        }))
    }

    /// Parses the format written by [`StepFn2::to_json`]. `group` defaults to
    /// the cyclic group of order `d`.
    pub fn from_json(v: &Value) -> Result<StepFn2<S>> {
        let bad = |m: &str| Error::InvalidArgument(format!("step function JSON: {m}"));
        let d = v["d"].as_u64().ok_or_else(|| bad("missing d"))? as usize;
        let group = match v.get("group") {
            Some(g) => {
                let orders: Vec<usize> =
                    serde_json::from_value(g.clone()).map_err(|e| bad(&e.to_string()))?;
                Group::new(&orders)?
            }
            None => Group::cyclic(d)?,
        };
        if group.order() != d {
            return Err(bad("group order does not match d"));
        }
        let k = v["K"].as_u64().ok_or_else(|| bad("missing K"))? as u32;
        let n = v["N"].as_u64().ok_or_else(|| bad("missing N"))? as u32;
        let values = v["values"]
            .as_array()
            .ok_or_else(|| bad("values must be an array"))?
            .iter()
            .map(|e| parse_cell::<S>(e).ok_or_else(|| bad(&format!("bad cell value {e}"))))
            .collect::<Result<Vec<S>>>()?;
        StepFn2::new(&group, k, n, values)
    }
}

fn int_json(i: &BigInt) -> Value {
    match i.to_i64() {
        Some(v) => json!(v),
        None => json!(i.to_string()),
    }
}

fn json_int(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn parse_cell<S: Scalar>(e: &Value) -> Option<S> {
    let i = S::root_of_unity(Rotation::new(1, 4));
    match e {
        Value::Number(n) if S::MODE == Mode::Float => {
            Some(S::one().mul_ref(&scalar_from_f64::<S>(n.as_f64()?)))
        }
        Value::Array(a) if a.len() == 4 => {
            let ints: Vec<BigInt> = a.iter().map(json_int).collect::<Option<_>>()?;
            if ints[1].is_zero() || ints[3].is_zero() {
                return None;
            }
            let re = BigRational::new(ints[0].clone(), ints[1].clone());
            let im = BigRational::new(ints[2].clone(), ints[3].clone());
            Some(S::from_rational(&re).add_ref(&S::from_rational(&im).mul_ref(&i)))
        }
        Value::Array(a) if a.len() == 2 && S::MODE == Mode::Float => {
            let re = scalar_from_f64::<S>(a[0].as_f64()?);
            let im = scalar_from_f64::<S>(a[1].as_f64()?);
            Some(re.add_ref(&im.mul_ref(&i)))
        }
        _ => None,
    }
}

fn scalar_from_f64<S: Scalar>(x: f64) -> S {
    let c = Complex64::new(x, 0.0);
    (&c as &dyn Any)
        .downcast_ref::<S>()
        .cloned()
        .unwrap_or_else(|| S::from_rational(&BigRational::from_float(x).unwrap_or_default()))
}
