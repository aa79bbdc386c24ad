//! Seeds and random instances.
//!
//! Every randomized trial draws from its own `ChaCha8Rng`, seeded by
//! [`trial_seed`]`(master, stream, trial)`. The derivation is a pure
//! function of its inputs, so trials can run in any order or in parallel and
//! still see the same data.

use num_complex::Complex64;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abelian::Group;
use crate::averages::ScaleLadder;
use crate::error::Result;
use crate::scalar::Cyclotomic;
use crate::stepfn::StepFn2;

/// The SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` in stream `stream` under master seed `master`:
/// `splitmix64(splitmix64(master ^ splitmix64(stream)) ^ trial)`.
pub fn trial_seed(master: u64, stream: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ trial)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small exact value: `n / m` with `n` in `0..=4`, `m` in `1..=3`, plus a
/// Gaussian imaginary part `i * k / 2` when `complex`.
pub fn exact_value(rng: &mut ChaCha8Rng, complex: bool) -> Cyclotomic {
    let re = BigRational::new(rng.gen_range(0..=4).into(), rng.gen_range(1..=3).into());
    let im = if complex {
        BigRational::new(rng.gen_range(-2..=2).into(), 2.into())
    } else {
        BigRational::from_integer(0.into())
    };
    Cyclotomic::from_rational_parts(re, im)
}

/// Random exact step function; roughly a quarter of the cells are zero.
pub fn exact_fn(
    g: &Group,
    res: u32,
    sup: u32,
    rng: &mut ChaCha8Rng,
    complex: bool,
) -> Result<StepFn2<Cyclotomic>> {
    StepFn2::from_fn(g, res, sup, |_, _| {
        if rng.gen_bool(0.25) {
            Cyclotomic::from_rational_parts(
                BigRational::from_integer(0.into()),
                BigRational::from_integer(0.into()),
            )
        } else {
            exact_value(rng, complex)
        }
    })
}

/// Random nonnegative float step function. Values are `u^e` for uniform `u`
/// and `e` in `1..=3`, with some cells set to zero, so instances range from
/// flat to spiky.
pub fn float_fn(g: &Group, res: u32, sup: u32, rng: &mut ChaCha8Rng) -> Result<StepFn2<Complex64>> {
    let e = rng.gen_range(1..=3);
    let zeros = rng.gen_range(0.0..0.5);
    StepFn2::from_fn(g, res, sup, |_, _| {
        if rng.gen_bool(zeros) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(rng.gen::<f64>().powi(e), 0.0)
        }
    })
}

/// Random nonnegative values on `n` points.
pub fn float_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let e = rng.gen_range(1..=3);
    (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>().powi(e), 0.0))
        .collect()
}

/// Random `(K, N)` with `1 <= N + K <= e_max`.
pub fn shape(rng: &mut ChaCha8Rng, e_max: u32) -> (u32, u32) {
    let e = rng.gen_range(1..=e_max.max(1));
    let res = rng.gen_range(0..=e);
    (res, e - res)
}

/// Random ladder of `1..=max_width` steps inside `[lo, hi]`.
pub fn ladder(rng: &mut ChaCha8Rng, lo: i32, hi: i32, max_width: usize) -> ScaleLadder {
    let pool: Vec<i32> = (lo..=hi).collect();
    let width = rng.gen_range(1..=max_width.min(pool.len() - 1).max(1));
    let mut ks: Vec<i32> = pool.choose_multiple(rng, width + 1).copied().collect();
    ks.sort_unstable();
    ScaleLadder::new(ks).expect("distinct sorted scales")
}
