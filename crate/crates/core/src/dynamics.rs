//! Finite probability spaces carrying two commuting actions of the Følner
//! box `Phi_N`, their double ergodic averages, and the dictionary between
//! discrete averages on `A^N x A^N` and bilinear averages on the plane.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abelian::Group;
use crate::averages::{
    bilinear_average, count_jumps, discrete_average, variation_sum, DiscreteGrid, VariationReport,
    WeightedFn,
};
use crate::dadic::{iota_prime, kappa_prime, upow};
use crate::error::{Error, Result};
use crate::forms::CpBound;
use crate::par;
use crate::scalar::Scalar;
use crate::stepfn::StepFn2;

/// Exhaustive action checks run when `|X| * |Phi_N|` is at most this.
pub const EXHAUSTIVE_CHECK_LIMIT: u64 = 100_000;

type Perm = Vec<usize>;

fn compose(outer: &[usize], inner: &[usize]) -> Perm {
    inner.iter().map(|&x| outer[x]).collect()
}

fn identity(n: usize) -> Perm {
    (0..n).collect()
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter()
        .all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

/// `X` with weights `mu` and two actions of `Phi_N`, each stored as the
/// permutations of its `N * m` generators. Generator `(n, i)` is the unit of
/// the `i`-th cyclic factor of `A` placed at position `n`; it sits at index
/// `n * m + i`. Permutations act by `x -> perm[x]`, so `(f o S^a)(x) =
/// f(S^a[x])`.
#[derive(Clone, Debug)]
pub struct FiniteSystem {
    group: Group,
    depth: u32,
    weights: Arc<[f64]>,
    s_gens: Vec<Perm>,
    t_gens: Vec<Perm>,
}

impl FiniteSystem {
    /// Builds a system from explicit generator permutations and checks every
    /// action axiom, exhaustively over `Phi_N` when it is small enough.
    pub fn explicit(
        group: &Group,
        depth: u32,
        weights: Vec<f64>,
        s_gens: Vec<Perm>,
        t_gens: Vec<Perm>,
    ) -> Result<FiniteSystem> {
        let n = weights.len();
        let gens = depth as usize * group.orders().len();
        if n == 0 {
            return Err(Error::InvalidAction("empty space".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidAction(
                "weights must be a probability vector".into(),
            ));
        }
        for (name, list) in [("S", &s_gens), ("T", &t_gens)] {
            if list.len() != gens {
                return Err(Error::InvalidAction(format!(
                    "{name} needs {gens} generator permutations, got {}",
                    list.len()
                )));
            }
            if let Some(bad) = list.iter().position(|p| p.len() != n || !is_permutation(p)) {
                return Err(Error::InvalidAction(format!(
                    "{name} generator {bad} is not a permutation of X"
                )));
            }
        }
        let sys = FiniteSystem {
            group: group.clone(),
            depth,
            weights: weights.into(),
            s_gens,
            t_gens,
        };
        sys.verify()?;
        Ok(sys)
    }

    /// `X = B`, uniform weights, `S^a x = x + sigma(a)` and `T^a x = x + tau(a)`
    /// where `sigma` and `tau` are given by the images of the generators.
    pub fn translation(
        group: &Group,
        depth: u32,
        b: &Group,
        sigma: &[usize],
        tau: &[usize],
    ) -> Result<FiniteSystem> {
        let gens = depth as usize * group.orders().len();
        let m = group.orders().len();
        let nb = b.order();
        let mut perms = [Vec::new(), Vec::new()];
        for (slot, images) in perms.iter_mut().zip([sigma, tau]) {
            if images.len() != gens {
                return Err(Error::InvalidAction(format!(
                    "expected {gens} generator images, got {}",
                    images.len()
                )));
            }
            for (gi, &img) in images.iter().enumerate() {
                if img >= nb {
                    return Err(Error::LabelOutOfRange {
                        label: img,
                        order: nb,
                    });
                }
                let ord = group.orders()[gi % m];
                let mut acc = 0;
                for _ in 0..ord {
                    acc = b.add_raw(acc, img);
                }
                if acc != 0 {
                    return Err(Error::InvalidAction(format!(
                        "image {img} of a generator of order {ord} is not killed by {ord}"
                    )));
                }
                slot.push((0..nb).map(|x| b.add_raw(x, img)).collect());
            }
        }
        let [s_gens, t_gens] = perms;
        FiniteSystem::explicit(group, depth, vec![1.0 / nb as f64; nb], s_gens, t_gens)
    }

    /// `X = A^N` with both actions the regular translation.
    pub fn regular(group: &Group, depth: u32) -> Result<FiniteSystem> {
        let b = Group::new(&group.orders().repeat(depth as usize))?;
        let images: Vec<usize> = (0..b.orders().len())
            .map(|i| {
                let mut comps = vec![0; b.orders().len()];
                comps[i] = 1;
                b.label(&comps)
            })
            .collect::<Result<_>>()?;
        FiniteSystem::translation(group, depth, &b, &images, &images)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &Arc<[f64]> {
        &self.weights
    }

    /// Digits of the element of `Phi_N` with integer code `a = sum a_n d^n`.
    fn element_digits(&self, a: u64) -> Vec<usize> {
        let mut digits = kappa_prime(self.group.order(), a);
        digits.resize(self.depth as usize, 0);
        digits
    }

    fn act(&self, gens: &[Perm], a: u64) -> Perm {
        let m = self.group.orders().len();
        let mut perm = identity(self.len());
        for (n, digit) in self.element_digits(a).into_iter().enumerate() {
            let comps = self.group.components(digit).expect("digit below d");
            for (i, &c) in comps.iter().enumerate() {
                for _ in 0..c {
                    perm = compose(&gens[n * m + i], &perm);
                }
            }
        }
        perm
    }

    /// `S^a` for the element with code `a < d^N`.
    pub fn s(&self, a: u64) -> Perm {
        self.act(&self.s_gens, a)
    }

    /// `T^a` for the element with code `a < d^N`.
    pub fn t(&self, a: u64) -> Perm {
        self.act(&self.t_gens, a)
    }

    fn generator_code(&self, gi: usize) -> u64 {
        let m = self.group.orders().len();
        let (n, i) = (gi / m, gi % m);
        let mut comps = vec![0; m];
        comps[i] = 1;
        let digit = self.group.label(&comps).expect("unit vector is a label") as u64;
        digit * upow(self.group.order(), n as u32)
    }

    fn verify(&self) -> Result<()> {
        let m = self.group.orders().len();
        let id = identity(self.len());
        let all: Vec<&Perm> = self.s_gens.iter().chain(&self.t_gens).collect();
        for (name, gens) in [("S", &self.s_gens), ("T", &self.t_gens)] {
            for (gi, perm) in gens.iter().enumerate() {
                let ord = self.group.orders()[gi % m];
                let mut p = id.clone();
                for _ in 0..ord {
                    p = compose(perm, &p);
                }
                if p != id {
                    return Err(Error::InvalidAction(format!(
                        "{name} generator {gi} does not have order dividing {ord}"
                    )));
                }
                if perm
                    .iter()
                    .enumerate()
                    .any(|(x, &y)| self.weights[x] != self.weights[y])
                {
                    return Err(Error::InvalidAction(format!(
                        "{name} generator {gi} does not preserve the measure"
                    )));
                }
            }
        }
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if compose(a, b) != compose(b, a) {
                    return Err(Error::InvalidAction("generators do not commute".into()));
                }
            }
        }
        let size = upow(self.group.order(), self.depth);
        if size.saturating_mul(self.len() as u64) <= EXHAUSTIVE_CHECK_LIMIT {
            self.verify_exhaustive(size)?;
        }
        Ok(())
    }

    /// Checks `S^a S^g = S^(a+g)`, `T^a T^g = T^(a+g)` and `S^a T^g = T^g S^a`
    /// for every `a` in `Phi_N` and every generator `g`, and measure
    /// preservation of every `S^a`, `T^a`.
    fn verify_exhaustive(&self, size: u64) -> Result<()> {
        let d = self.group.order();
        let gens = self.s_gens.len();
        let s_all: Vec<Perm> = (0..size).map(|a| self.s(a)).collect();
        let t_all: Vec<Perm> = (0..size).map(|a| self.t(a)).collect();
        for a in 0..size {
            for gi in 0..gens {
                let sum = self.group.oplus_int(a, self.generator_code(gi));
                debug_assert!(sum < size.max(d as u64));
                let (sa, ta) = (&s_all[a as usize], &t_all[a as usize]);
                if compose(sa, &self.s_gens[gi]) != s_all[sum as usize]
                    || compose(ta, &self.t_gens[gi]) != t_all[sum as usize]
                {
                    return Err(Error::InvalidAction(format!(
                        "action is not a homomorphism at element {a}"
                    )));
                }
                if compose(sa, &self.t_gens[gi]) != compose(&self.t_gens[gi], sa) {
                    return Err(Error::InvalidAction(format!(
                        "S^{a} does not commute with T generator {gi}"
                    )));
                }
            }
            for p in [&s_all[a as usize], &t_all[a as usize]] {
                if p.iter()
                    .enumerate()
                    .any(|(x, &y)| self.weights[x] != self.weights[y])
                {
                    return Err(Error::InvalidAction(format!(
                        "element {a} does not preserve the measure"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Wraps values on `X` with the system's weights.
    pub fn function(&self, values: Vec<Complex64>) -> Result<WeightedFn> {
        if values.len() != self.len() {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                self.len(),
                values.len()
            )));
        }
        Ok(WeightedFn {
            values,
            weights: self.weights.clone(),
        })
    }
}

/// Description of a system, as read from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub group: Vec<usize>,
    pub depth: u32,
    pub space: SpaceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SpaceSpec {
    Translation {
        #[serde(rename = "B")]
        b: Vec<usize>,
        sigma: Vec<usize>,
        tau: Vec<usize>,
    },
    Regular,
    Explicit {
        weights: Vec<f64>,
        s: Vec<Vec<usize>>,
        t: Vec<Vec<usize>>,
    },
}

impl SystemSpec {
    pub fn build(&self) -> Result<FiniteSystem> {
        let g = Group::new(&self.group)?;
        match &self.space {
            SpaceSpec::Translation { b, sigma, tau } => {
                FiniteSystem::translation(&g, self.depth, &Group::new(b)?, sigma, tau)
            }
            SpaceSpec::Regular => FiniteSystem::regular(&g, self.depth),
            SpaceSpec::Explicit { weights, s, t } => {
                FiniteSystem::explicit(&g, self.depth, weights.clone(), s.clone(), t.clone())
            }
        }
    }
}

/// `M_n(f, g)(x) = d^-n sum_{a in Phi_n} f(S^a x) g(T^a x)`.
pub fn ergodic_average<S: Scalar>(sys: &FiniteSystem, f: &[S], g: &[S], n: u32) -> Result<Vec<S>> {
    if n > sys.depth {
        return Err(Error::InvalidArgument(format!(
            "n = {n} exceeds depth {}",
            sys.depth
        )));
    }
    if f.len() != sys.len() || g.len() != sys.len() {
        return Err(Error::Dimension("functions do not live on X".into()));
    }
    let d = sys.group.order();
    let size = upow(d, n);
    let actions: Vec<(Perm, Perm)> = (0..size).map(|a| (sys.s(a), sys.t(a))).collect();
    let w = S::d_pow(d, -(n as i64));
    Ok(par::map_range(sys.len(), |x| {
        actions
            .iter()
            .fold(S::zero(), |acc, (sa, ta)| {
                acc.add_ref(&f[sa[x]].mul_ref(&g[ta[x]]))
            })
            .mul_ref(&w)
    }))
}

/// `sum_j ||M_{n_j} - M_{n_{j-1}}||_p^p` for increasing `ns`, compared to
/// `c_p^-1 (1 + p) ||f||_2p^p ||g||_2p^p`.
pub fn theorem_check(
    sys: &FiniteSystem,
    f: &[Complex64],
    g: &[Complex64],
    cp: &CpBound,
    ns: &[u32],
) -> Result<VariationReport> {
    if cp.p < 2 {
        return Err(Error::Exponent(cp.p.to_string()));
    }
    if ns.len() < 2 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "{ns:?} is not an increasing list of length >= 2"
        )));
    }
    let avgs = ns
        .iter()
        .map(|&n| ergodic_average(sys, f, g, n).and_then(|v| sys.function(v)))
        .collect::<Result<Vec<_>>>()?;
    let pf = cp.p as f64;
    let report = variation_sum(&avgs, pf)?;
    let nf = sys.function(f.to_vec())?.norm_p(2.0 * pf);
    let ng = sys.function(g.to_vec())?.norm_p(2.0 * pf);
    Ok(report.with_bound(cp.big_c() * (nf * ng).sqrt()))
}

/// The largest ratio of [`theorem_check`] over every increasing list drawn
/// from `0..=N` with at least two entries, together with that list.
pub fn sup_over_subsequences(
    sys: &FiniteSystem,
    f: &[Complex64],
    g: &[Complex64],
    cp: &CpBound,
) -> Result<(Vec<u32>, VariationReport)> {
    let top = sys.depth;
    if top == 0 {
        return Err(Error::InvalidArgument("depth 0 admits no jumps".into()));
    }
    if top > 12 {
        return Err(Error::CapExceeded(format!("2^{} subsequences", top + 1)));
    }
    let avgs = (0..=top)
        .map(|n| ergodic_average(sys, f, g, n).and_then(|v| sys.function(v)))
        .collect::<Result<Vec<_>>>()?;
    let pf = cp.p as f64;
    let bound = cp.big_c()
        * (sys.function(f.to_vec())?.norm_p(2.0 * pf) * sys.function(g.to_vec())?.norm_p(2.0 * pf))
            .sqrt();
    let mut best: Option<(Vec<u32>, VariationReport)> = None;
    for mask in 0u32..(1 << (top + 1)) {
        if mask.count_ones() < 2 {
            continue;
        }
        let ns: Vec<u32> = (0..=top).filter(|n| mask >> n & 1 == 1).collect();
        let seq: Vec<WeightedFn> = ns.iter().map(|&n| avgs[n as usize].clone()).collect();
        let rep = variation_sum(&seq, pf)?.with_bound(bound);
        if best
            .as_ref()
            .is_none_or(|(_, b)| rep.variation_sum > b.variation_sum)
        {
            best = Some((ns, rep));
        }
    }
    Ok(best.expect("depth >= 1 gives at least one subsequence"))
}

/// Epsilon-jump count of `M_0, ..., M_N` for `f, g` rescaled to unit
/// `L^2p` norm, with the bound `C_p eps^-p`. Zero functions stay zero.
pub fn jump_check(
    sys: &FiniteSystem,
    f: &[Complex64],
    g: &[Complex64],
    cp: &CpBound,
    eps: f64,
) -> Result<(usize, f64)> {
    let pf = cp.p as f64;
    let normalize = |v: &[Complex64]| -> Result<Vec<Complex64>> {
        let n = sys
            .function(v.to_vec())?
            .norm_p(2.0 * pf)
            .powf(1.0 / (2.0 * pf));
        Ok(if n > 0.0 {
            v.iter().map(|x| x / n).collect()
        } else {
            v.to_vec()
        })
    };
    let (f, g) = (normalize(f)?, normalize(g)?);
    let avgs = (0..=sys.depth)
        .map(|n| ergodic_average(sys, &f, &g, n).and_then(|v| sys.function(v)))
        .collect::<Result<Vec<_>>>()?;
    Ok((count_jumps(&avgs, eps, pf)?, cp.big_c() * eps.powf(-pf)))
}

/// The step function `F(x, y) = sum F'(kappa'(alpha), kappa'(beta))
/// 1_[alpha, alpha+1)(x) 1_[beta, beta+1)(y)` at resolution 0 and support `N`.
pub fn embed<S: Scalar>(grid: &DiscreteGrid<S>) -> Result<StepFn2<S>> {
    let d = grid.group().order();
    let depth = grid.depth();
    let pad = |t: u64| {
        let mut v = kappa_prime(d, t);
        v.resize(depth as usize, 0);
        v
    };
    StepFn2::from_fn(grid.group(), 0, depth, |alpha, beta| {
        grid.get(&pad(alpha as u64), &pad(beta as u64)).clone()
    })
}

/// Compares `A_{-n}(F, G)` at cell `(iota'(a), iota'(b))` with
/// `A'_n(F', G')(a, b)` for every `(a, b)`; exact equality is required.
pub fn transference_check<S: Scalar>(
    fp: &DiscreteGrid<S>,
    gp: &DiscreteGrid<S>,
    n: u32,
) -> Result<bool> {
    let d = fp.group().order();
    let lhs = bilinear_average(&embed(fp)?, &embed(gp)?, -(n as i32))?;
    let rhs = discrete_average(fp, gp, n)?;
    let elems = fp.elements();
    Ok(elems.iter().all(|a| {
        elems
            .iter()
            .all(|b| lhs.at(iota_prime(d, a) as usize, iota_prime(d, b) as usize) == rhs.get(a, b))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::c_p;
    use crate::scalar::Cyclotomic;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn toggles_on_two_points() {
        let g = Group::cyclic(2).unwrap();
        let b = Group::cyclic(2).unwrap();
        let sys = FiniteSystem::translation(&g, 2, &b, &[1, 0], &[0, 1]).unwrap();
        assert_eq!(sys.len(), 2);
        assert_eq!(sys.s(1), vec![1, 0]);
        assert_eq!(sys.s(2), vec![0, 1]);
        assert_eq!(sys.t(2), vec![1, 0]);
        assert_eq!(sys.t(3), vec![1, 0]);
        // ergodic average M_1 = (f g + f(Sx) g(x)) / 2
        let f = [c(1.0), c(3.0)];
        let h = [c(2.0), c(5.0)];
        let m1 = ergodic_average(&sys, &f, &h, 1).unwrap();
        assert_eq!(m1, vec![c((2.0 + 6.0) / 2.0), c((15.0 + 5.0) / 2.0)]);
    }

    #[test]
    fn rejects_bad_actions() {
        let g = Group::cyclic(2).unwrap();
        let b = Group::cyclic(3).unwrap();
        assert!(FiniteSystem::translation(&g, 1, &b, &[1], &[0]).is_err());
        assert!(FiniteSystem::translation(&g, 1, &b, &[0], &[0, 0]).is_err());
        // non-commuting involutions on three points
        let s = vec![vec![1, 0, 2]];
        let t = vec![vec![0, 2, 1]];
        assert!(FiniteSystem::explicit(&g, 1, vec![1.0 / 3.0; 3], s, t).is_err());
        // an involution that moves mass
        let s = vec![vec![1, 0]];
        assert!(FiniteSystem::explicit(&g, 1, vec![0.25, 0.75], s, vec![vec![0, 1]]).is_err());
        assert!(
            FiniteSystem::explicit(&g, 1, vec![0.5, 0.6], vec![vec![0, 1]], vec![vec![0, 1]])
                .is_err()
        );
    }

    #[test]
    fn trivial_and_constant_examples() {
        let g = Group::new(&[3]).unwrap();
        let b = Group::cyclic(3).unwrap();
        let sys = FiniteSystem::translation(&g, 2, &b, &[0, 0], &[0, 0]).unwrap();
        let f = [c(1.0), c(2.0), c(4.0)];
        let h = [c(0.5), c(0.0), c(3.0)];
        for n in 0..=2 {
            let m = ergodic_average(&sys, &f, &h, n).unwrap();
            for x in 0..3 {
                assert!((m[x] - f[x] * h[x]).norm() < 1e-12);
            }
        }
        let cp = c_p(2).unwrap();
        let rep = theorem_check(&sys, &f, &h, &cp, &[0, 1, 2]).unwrap();
        assert_eq!(rep.variation_sum, 0.0);
        let reg = FiniteSystem::regular(&g, 2).unwrap();
        let ones = vec![c(1.0); 9];
        let rep = theorem_check(&reg, &ones, &ones, &cp, &[0, 2]).unwrap();
        assert_eq!(rep.variation_sum, 0.0);
        assert!(ergodic_average(&reg, &ones, &ones, 3).is_err());
    }

    /// `M_n` on a translation system written as a group convolution:
    /// `d^-n sum_{a in Phi_n} f(x + sigma(a)) g(x + tau(a))`.
    #[test]
    fn translation_average_matches_convolution() {
        let g = Group::new(&[2]).unwrap();
        let b = Group::new(&[2, 2]).unwrap();
        let sigma = [1, 2];
        let tau = [3, 1];
        let sys = FiniteSystem::translation(&g, 2, &b, &sigma, &tau).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f: Vec<Complex64> = (0..4).map(|_| c(rng.gen())).collect();
        let h: Vec<Complex64> = (0..4).map(|_| c(rng.gen())).collect();
        for n in 0..=2u32 {
            let m = ergodic_average(&sys, &f, &h, n).unwrap();
            for x in 0..4 {
                let mut acc = c(0.0);
                for a in 0..(1usize << n) {
                    let (mut sx, mut tx) = (0, 0);
                    for bit in 0..n as usize {
                        if a >> bit & 1 == 1 {
                            sx = b.add(sx, sigma[bit]).unwrap();
                            tx = b.add(tx, tau[bit]).unwrap();
                        }
                    }
                    acc += f[b.add(x, sx).unwrap()] * h[b.add(x, tx).unwrap()];
                }
                assert!((m[x] - acc / (1 << n) as f64).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn regular_system_theorem_ratio() {
        let g = Group::cyclic(2).unwrap();
        let sys = FiniteSystem::regular(&g, 2).unwrap();
        assert_eq!(sys.len(), 4);
        let cp = c_p(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let f: Vec<Complex64> = (0..4).map(|_| c(rng.gen())).collect();
            let h: Vec<Complex64> = (0..4).map(|_| c(rng.gen())).collect();
            let rep = theorem_check(&sys, &f, &h, &cp, &[0, 1, 2]).unwrap();
            assert!(rep.ratio.unwrap() <= 1.0);
            let (_, sup) = sup_over_subsequences(&sys, &f, &h, &cp).unwrap();
            assert!(sup.variation_sum >= rep.variation_sum - 1e-15);
            assert!(sup.ratio.unwrap() <= 1.0);
            let (count, bound) = jump_check(&sys, &f, &h, &cp, 0.2).unwrap();
            assert!(count as f64 <= bound);
        }
    }

    #[test]
    fn system_spec_json() {
        let spec: SystemSpec = serde_json::from_str(
            r#"{"group":[2],"depth":2,"space":{"type":"translation","B":[2],"sigma":[1,0],"tau":[0,1]}}"#,
        )
        .unwrap();
        assert_eq!(spec.build().unwrap().len(), 2);
        let spec: SystemSpec =
            serde_json::from_str(r#"{"group":[3],"depth":1,"space":{"type":"regular"}}"#).unwrap();
        assert_eq!(spec.build().unwrap().len(), 3);
    }

    fn q(n: i64, d: i64) -> Cyclotomic {
        Cyclotomic::from_rational(&BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn transference_examples() {
        let g = Group::cyclic(2).unwrap();
        let delta = DiscreteGrid::<Cyclotomic>::from_fn(&g, 1, |a, b| {
            Cyclotomic::from_i64((a == [0] && b == [0]) as i64)
        })
        .unwrap();
        assert!(transference_check(&delta, &delta, 0).unwrap());
        assert!(transference_check(&delta, &delta, 1).unwrap());
        let emb = embed(&delta).unwrap();
        let avg = bilinear_average(&emb, &emb, -1).unwrap();
        assert_eq!(*avg.at(0, 0), q(1, 2));

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for orders in [&[3][..], &[2, 2], &[2]] {
            let g = Group::new(orders).unwrap();
            let depth = if g.order() == 2 { 2 } else { 1 };
            let mut rnd = || {
                DiscreteGrid::<Cyclotomic>::from_fn(&g, depth, |_, _| {
                    q(rng.gen_range(-4..5), rng.gen_range(1..4))
                })
                .unwrap()
            };
            let (fp, gp) = (rnd(), rnd());
            for n in 0..=depth {
                assert!(transference_check(&fp, &gp, n).unwrap(), "{orders:?} n={n}");
            }
        }
    }
}
