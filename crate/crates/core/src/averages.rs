//! Bilinear averages on the quarter plane and on `A^N x A^N`, norm
//! variation along a scale ladder, and epsilon-jump counting.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abelian::Group;
use crate::dadic::upow;
use crate::error::{Error, Result};
use crate::par;
use crate::scalar::Scalar;
use crate::stepfn::StepFn2;

/// Strictly increasing scales `k_0 < k_1 < ... < k_m` with `m >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct ScaleLadder {
    ks: Vec<i32>,
}

impl TryFrom<Vec<i32>> for ScaleLadder {
    type Error = Error;
    fn try_from(ks: Vec<i32>) -> Result<ScaleLadder> {
        ScaleLadder::new(ks)
    }
}

impl From<ScaleLadder> for Vec<i32> {
    fn from(l: ScaleLadder) -> Vec<i32> {
        l.ks
    }
}

impl ScaleLadder {
    pub fn new(ks: Vec<i32>) -> Result<ScaleLadder> {
        if ks.len() < 2 {
            return Err(Error::InvalidArgument(
                "a ladder needs at least two scales".into(),
            ));
        }
        if ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "ladder {ks:?} is not strictly increasing"
            )));
        }
        Ok(ScaleLadder { ks })
    }

    /// The ladder `k_j = -n_{m-j}` matching increasing discrete indices `ns`.
    pub fn from_indices(ns: &[u32]) -> Result<ScaleLadder> {
        ScaleLadder::new(ns.iter().rev().map(|&n| -(n as i32)).collect())
    }

    pub fn ks(&self) -> &[i32] {
        &self.ks
    }

    /// Number of steps `m`.
    pub fn width(&self) -> usize {
        self.ks.len() - 1
    }

    pub fn first(&self) -> i32 {
        self.ks[0]
    }

    pub fn last(&self) -> i32 {
        self.ks[self.ks.len() - 1]
    }
}

/// Per-step jump norms and their `p`-th power sum, optionally compared to
/// a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub jump_norms: Vec<f64>,
    pub variation_sum: f64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
}

impl VariationReport {
    pub fn with_bound(mut self, bound: f64) -> VariationReport {
        self.bound = Some(bound);
        self.ratio = if bound > 0.0 {
            Some(self.variation_sum / bound)
        } else if self.variation_sum == 0.0 {
            Some(0.0)
        } else {
            None
        };
        self
    }
}

/// A function on a finite measure space that can measure its `L^p`
/// distance to another function on the same space.
pub trait Measured {
    /// `||self - other||_p^p`.
    fn dist_p(&self, other: &Self, p: f64) -> Result<f64>;
}

impl<S: Scalar> Measured for StepFn2<S> {
    fn dist_p(&self, other: &Self, p: f64) -> Result<f64> {
        self.same_grid(other)?;
        let area = (self.d() as f64).powi(-2 * self.resolution() as i32);
        Ok(self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| (a.to_complex() - b.to_complex()).norm().powf(p))
            .sum::<f64>()
            * area)
    }
}

/// Values on the atoms of a finite probability space.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedFn {
    pub values: Vec<Complex64>,
    pub weights: std::sync::Arc<[f64]>,
}

impl WeightedFn {
    /// `||f||_p^p` with respect to the weights.
    pub fn norm_p(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(self.weights.iter())
            .map(|(v, w)| w * v.norm().powf(p))
            .sum()
    }
}

impl Measured for WeightedFn {
    fn dist_p(&self, other: &Self, p: f64) -> Result<f64> {
        if self.values.len() != other.values.len() || self.weights != other.weights {
            return Err(Error::Dimension(
                "functions live on different spaces".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.weights.iter())
            .map(|((a, b), w)| w * (a - b).norm().powf(p))
            .sum())
    }
}

/// `A_k(F, G)(x, y) = d^k int_[0, d^-k) F(x (+) t, y) G(x, y (+) t) dt` for
/// `k <= K`, evaluated as the cell sum
/// `d^(k-K) sum_tau F(x (+) tau, y) G(x, y (+) tau)`.
///
/// The result lives on the same grid as the inputs: translates that leave
/// `[0, d^N)` see zero, so the average vanishes there too.
pub fn bilinear_average<S: Scalar>(f: &StepFn2<S>, g: &StepFn2<S>, k: i32) -> Result<StepFn2<S>> {
    f.same_grid(g)?;
    let res = f.resolution() as i32;
    if k > res {
        return Err(Error::InsufficientResolution {
            have: res as i64,
            need: k as i64,
        });
    }
    let d = f.d();
    let side = f.side();
    // Translates by tau >= side leave the support, so they contribute zero.
    let taus = (d as u64)
        .checked_pow((res - k) as u32)
        .map_or(side, |n| (n as usize).min(side));
    let weight = S::d_pow(d, k as i64 - res as i64);
    let alg = f.cell_algebra();
    let values = par::map_range(side * side, |i| {
        let (x, y) = (i / side, i % side);
        let mut acc = S::zero();
        for tau in 0..taus {
            let a = f.at(alg.oplus(x, tau), y);
            let b = g.at(x, alg.oplus(y, tau));
            if !a.is_zero() && !b.is_zero() {
                acc = acc.add_ref(&a.mul_ref(b));
            }
        }
        acc.mul_ref(&weight)
    });
    StepFn2::new(f.group(), f.resolution(), f.support(), values)
}

/// A function on `A^N x A^N`. Elements of `A^N` are digit tuples
/// `(a_0, ..., a_{N-1})`; storage is row-major over tuples listed in
/// lexicographic order with `a_0` most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteGrid<S> {
    group: Group,
    depth: u32,
    values: Vec<S>,
}

impl<S: Scalar> DiscreteGrid<S> {
    pub fn new(group: &Group, depth: u32, values: Vec<S>) -> Result<DiscreteGrid<S>> {
        let n = Self::checked_size(group, depth)?;
        if values.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(DiscreteGrid {
            group: group.clone(),
            depth,
            values,
        })
    }

    pub fn from_fn(
        group: &Group,
        depth: u32,
        mut f: impl FnMut(&[usize], &[usize]) -> S,
    ) -> Result<DiscreteGrid<S>> {
        let n = Self::checked_size(group, depth)?;
        let tuples: Vec<Vec<usize>> = (0..n)
            .map(|i| Self::tuple_of(group.order(), depth, i))
            .collect();
        let mut values = Vec::with_capacity(n * n);
        for a in &tuples {
            for b in &tuples {
                values.push(f(a, b));
            }
        }
        DiscreteGrid::new(group, depth, values)
    }

    fn checked_size(group: &Group, depth: u32) -> Result<usize> {
        (group.order() as u64)
            .checked_pow(depth)
            .filter(|&n| n <= crate::stepfn::MAX_SIDE as u64)
            .map(|n| n as usize)
            .ok_or_else(|| {
                Error::CapExceeded(format!("|A|^{depth} exceeds {}", crate::stepfn::MAX_SIDE))
            })
    }

    fn tuple_of(d: usize, depth: u32, mut i: usize) -> Vec<usize> {
        let mut t = vec![0; depth as usize];
        for slot in t.iter_mut().rev() {
            *slot = i % d;
            i /= d;
        }
        t
    }

    fn index_of(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |acc, &a| acc * self.group.order() + a)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `|A|^N`.
    pub fn size(&self) -> usize {
        upow(self.group.order(), self.depth) as usize
    }

    /// All elements of `A^N` in storage order.
    pub fn elements(&self) -> Vec<Vec<usize>> {
        (0..self.size())
            .map(|i| Self::tuple_of(self.group.order(), self.depth, i))
            .collect()
    }

    pub fn get(&self, a: &[usize], b: &[usize]) -> &S {
        &self.values[self.index_of(a) * self.size() + self.index_of(b)]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    fn add(&self, a: &[usize], c: &[usize]) -> Vec<usize> {
        a.iter()
            .zip(c)
            .map(|(&x, &y)| self.group.add_raw(x, y))
            .collect()
    }
}

/// `A'_n(F', G')(a, b) = |Phi_n|^-1 sum_{c in Phi_n} F'(a + c, b) G'(a, b + c)`
/// where `Phi_n` holds the tuples vanishing from position `n` on.
pub fn discrete_average<S: Scalar>(
    f: &DiscreteGrid<S>,
    g: &DiscreteGrid<S>,
    n: u32,
) -> Result<DiscreteGrid<S>> {
    if f.group != g.group || f.depth != g.depth {
        return Err(Error::Dimension("discrete grids differ".into()));
    }
    if n > f.depth {
        return Err(Error::InvalidArgument(format!(
            "n = {n} exceeds depth {}",
            f.depth
        )));
    }
    let elems = f.elements();
    let d = f.group.order();
    let phi: Vec<Vec<usize>> = elems
        .iter()
        .filter(|c| c[n as usize..].iter().all(|&x| x == 0))
        .cloned()
        .collect();
    debug_assert_eq!(phi.len(), upow(d, n) as usize);
    let weight = S::d_pow(d, -(n as i64));
    let size = elems.len();
    let values = par::map_range(size * size, |i| {
        let (a, b) = (&elems[i / size], &elems[i % size]);
        let mut acc = S::zero();
        for c in &phi {
            let u = f.get(&f.add(a, c), b);
            let v = g.get(a, &g.add(b, c));
            acc = acc.add_ref(&u.mul_ref(v));
        }
        acc.mul_ref(&weight)
    });
    DiscreteGrid::new(&f.group, f.depth, values)
}

/// `jump_norms[j] = ||seq[j+1] - seq[j]||_p` and `variation_sum = sum_j
/// ||seq[j+1] - seq[j]||_p^p`. The bound is left to the caller.
pub fn variation_sum<M: Measured>(seq: &[M], p: f64) -> Result<VariationReport> {
    if !(p >= 1.0) {
        return Err(Error::Exponent(p.to_string()));
    }
    let powers = seq
        .windows(2)
        .map(|w| w[1].dist_p(&w[0], p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(VariationReport {
        jump_norms: powers.iter().map(|v| v.powf(1.0 / p)).collect(),
        variation_sum: powers.iter().sum(),
        bound: None,
        ratio: None,
    })
}

/// Exact `sum_j ||seq[j+1] - seq[j]||_p^p` for step functions.
pub fn variation_sum_exact<S: Scalar>(seq: &[StepFn2<S>], p: u32) -> Result<S> {
    let mut acc = S::zero();
    for w in seq.windows(2) {
        let diff = w[1].zip_with(&w[0], |a, b| a.sub_ref(b))?;
        acc = acc.add_ref(&diff.lp_norm_p(p)?);
    }
    Ok(acc)
}

/// Largest `m` admitting indices `n_1 < n'_1 <= n_2 < n'_2 <= ... <= n_m <
/// n'_m` with `||seq[n_j] - seq[n'_j]||_p >= eps`.
pub fn count_jumps<M: Measured>(seq: &[M], eps: f64, p: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let mut err = None;
    let count = count_jumps_by(seq.len(), eps, |i, j| {
        seq[i]
            .dist_p(&seq[j], p)
            .map(|v| v.powf(1.0 / p))
            .unwrap_or_else(|e| {
                err = Some(e);
                0.0
            })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(count),
    }
}

/// The jump count for an abstract distance `dist(i, j)` on `0..len`.
///
/// Greedy by earliest closing index: from the current start, take the
/// smallest `n'` such that some `n` in `[start, n')` is at distance at least
/// `eps`, count one jump and continue from `n'`. Any admissible family can
/// be shifted so its `j`-th pair closes no earlier than the greedy one,
/// which makes the greedy count maximal.
pub fn count_jumps_by(len: usize, eps: f64, mut dist: impl FnMut(usize, usize) -> f64) -> usize {
    let mut count = 0;
    let mut start = 0;
    'outer: while start < len {
        for close in start + 1..len {
            if (start..close).any(|open| dist(open, close) >= eps) {
                count += 1;
                start = close;
                continue 'outer;
            }
        }
        break;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Cyclotomic;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Cyclotomic {
        Cyclotomic::from_rational(&BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn ladder_validation() {
        assert!(ScaleLadder::new(vec![0]).is_err());
        assert!(ScaleLadder::new(vec![0, 0]).is_err());
        let l = ScaleLadder::from_indices(&[0, 1, 3]).unwrap();
        assert_eq!(l.ks(), &[-3, -1, 0]);
        assert_eq!(l.width(), 2);
        let parsed: ScaleLadder = serde_json::from_str("[-1,0]").unwrap();
        assert_eq!(parsed.ks(), &[-1, 0]);
        assert!(serde_json::from_str::<ScaleLadder>("[1,0]").is_err());
    }

    #[test]
    fn unit_indicator_averages() {
        let g = Group::cyclic(2).unwrap();
        let one = StepFn2::<Cyclotomic>::unit_indicator(&g, 1, 1).unwrap();
        for k in 0..=1 {
            assert_eq!(bilinear_average(&one, &one, k).unwrap(), one);
        }
        let half = bilinear_average(&one, &one, -1).unwrap();
        assert_eq!(half, one.map(|v| v.mul_ref(&q(1, 2))));
        assert!(half.is_nonnegative());
        assert!(matches!(
            bilinear_average(&one, &one, 2),
            Err(Error::InsufficientResolution { .. })
        ));
    }

    #[test]
    fn column_indicator_average() {
        let g = Group::cyclic(2).unwrap();
        let f =
            StepFn2::<Cyclotomic>::from_fn(&g, 1, 0, |a, _| Cyclotomic::from_i64((a == 0) as i64))
                .unwrap();
        let one = StepFn2::<Cyclotomic>::unit_indicator(&g, 1, 0).unwrap();
        let avg = bilinear_average(&f, &one, 0).unwrap();
        assert!(avg.values().iter().all(|v| *v == q(1, 2)));
    }

    #[test]
    fn averages_are_bilinear() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = Group::new(&[3]).unwrap();
        let mut rand_fn = || {
            StepFn2::<Cyclotomic>::from_fn(&g, 1, 1, |_, _| {
                q(rng.gen_range(-3..4), rng.gen_range(1..4))
            })
            .unwrap()
        };
        let (f1, f2, h) = (rand_fn(), rand_fn(), rand_fn());
        let sum = f1.zip_with(&f2, |a, b| a.add_ref(b)).unwrap();
        for k in -1..=1 {
            let lhs = bilinear_average(&sum, &h, k).unwrap();
            let rhs = bilinear_average(&f1, &h, k)
                .unwrap()
                .zip_with(&bilinear_average(&f2, &h, k).unwrap(), |a, b| a.add_ref(b))
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn discrete_examples() {
        let g = Group::cyclic(2).unwrap();
        let delta = DiscreteGrid::<Cyclotomic>::from_fn(&g, 1, |a, b| {
            Cyclotomic::from_i64((a == [0] && b == [0]) as i64)
        })
        .unwrap();
        let avg = discrete_average(&delta, &delta, 1).unwrap();
        let expect = delta
            .values()
            .iter()
            .map(|v| v.mul_ref(&q(1, 2)))
            .collect::<Vec<_>>();
        assert_eq!(avg.values(), &expect[..]);
        assert_eq!(discrete_average(&delta, &delta, 0).unwrap(), delta);
        assert!(discrete_average(&delta, &delta, 2).is_err());

        let g = Group::new(&[2, 2]).unwrap();
        let ones = DiscreteGrid::<Cyclotomic>::from_fn(&g, 2, |_, _| Cyclotomic::one()).unwrap();
        for n in 0..=2 {
            assert_eq!(discrete_average(&ones, &ones, n).unwrap(), ones);
        }
    }

    #[test]
    fn variation_examples() {
        let g = Group::cyclic(2).unwrap();
        let one = StepFn2::<Cyclotomic>::unit_indicator(&g, 0, 1).unwrap();
        let zero = StepFn2::<Cyclotomic>::zeros(&g, 0, 1).unwrap();
        let r = variation_sum(&[one.clone(), one.clone(), one.clone()], 2.0).unwrap();
        assert_eq!(r.variation_sum, 0.0);
        let r = variation_sum(&[zero.clone(), one.clone()], 2.0).unwrap();
        assert_eq!(r.variation_sum, 1.0);
        assert_eq!(r.jump_norms, vec![1.0]);
        let a = bilinear_average(&one, &one, -1).unwrap();
        let b = bilinear_average(&one, &one, 0).unwrap();
        let r = variation_sum(&[a.clone(), b.clone()], 2.0)
            .unwrap()
            .with_bound(3.0);
        assert_eq!(r.variation_sum, 0.25);
        assert_eq!(r.ratio, Some(0.25 / 3.0));
        assert_eq!(variation_sum_exact(&[a, b], 2).unwrap(), q(1, 4));
    }

    fn scalar_seq(vals: &[f64]) -> Vec<WeightedFn> {
        let w: std::sync::Arc<[f64]> = vec![1.0].into();
        vals.iter()
            .map(|&v| WeightedFn {
                values: vec![Complex64::new(v, 0.0)],
                weights: w.clone(),
            })
            .collect()
    }

    /// Maximal `m` by trying every family of pairs.
    fn exhaustive(vals: &[f64], eps: f64) -> usize {
        fn go(vals: &[f64], eps: f64, start: usize) -> usize {
            let mut best = 0;
            for n in start..vals.len() {
                for n2 in n + 1..vals.len() {
                    if (vals[n] - vals[n2]).abs() >= eps {
                        best = best.max(1 + go(vals, eps, n2));
                    }
                }
            }
            best
        }
        go(vals, eps, 0)
    }

    #[test]
    fn jump_examples() {
        let eps = 0.5;
        assert_eq!(count_jumps(&scalar_seq(&[1.0; 5]), eps, 2.0).unwrap(), 0);
        assert_eq!(
            count_jumps(&scalar_seq(&[0.0, 0.25, 0.5, 0.75]), eps, 2.0).unwrap(),
            1
        );
        // consecutive pairs may share an endpoint, so (0,1),(1,2),(2,3) all count
        assert_eq!(
            count_jumps(&scalar_seq(&[0.0, eps, 0.0, eps]), eps, 3.0).unwrap(),
            3
        );
        assert!(count_jumps(&scalar_seq(&[0.0]), 0.0, 2.0).is_err());
        assert_eq!(count_jumps(&scalar_seq(&[]), 1.0, 2.0).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn greedy_matches_exhaustive(vals in prop::collection::vec(0u8..3, 0..8), eps in 1u8..3) {
            let vals: Vec<f64> = vals.into_iter().map(f64::from).collect();
            prop_assert_eq!(
                count_jumps(&scalar_seq(&vals), f64::from(eps), 2.0).unwrap(),
                exhaustive(&vals, f64::from(eps))
            );
        }

        #[test]
        fn averages_stay_nonnegative(seed in any::<u64>(), k in -2i32..=1) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = Group::cyclic(2).unwrap();
            let f = StepFn2::<Complex64>::from_fn(&g, 1, 1, |_, _| Complex64::new(rng.gen(), 0.0)).unwrap();
            let h = StepFn2::<Complex64>::from_fn(&g, 1, 1, |_, _| Complex64::new(rng.gen(), 0.0)).unwrap();
            prop_assert!(bilinear_average(&f, &h, k).unwrap().is_nonnegative());
        }
    }
}
