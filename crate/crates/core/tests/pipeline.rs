use cantorvar::averages::{
    bilinear_average, count_jumps, discrete_average, variation_sum, DiscreteGrid, ScaleLadder,
};
use cantorvar::dynamics::{ergodic_average, FiniteSystem};
use cantorvar::forms::{c_p, lambda_fast, proposition_bound_check, theta_fast, FormContext};
use cantorvar::gen::{exact_fn, exact_value, float_fn, rng_from};
use cantorvar::{Cyclotomic, Group, Scalar, StepFn2};
use num_complex::Complex64;
use proptest::prelude::*;

/// The system on `A^N x A^N` where `S` translates the first factor and `T`
/// the second. Its ergodic averages are the discrete averages `A'_n`.
fn product_system(g: &Group, depth: u32) -> FiniteSystem {
    let probe = DiscreteGrid::from_fn(g, depth, |_, _| Cyclotomic::zero()).unwrap();
    let elems = probe.elements();
    let size = elems.len();
    let index = |t: &[usize]| elems.iter().position(|e| e == t).unwrap();
    let m = g.orders().len();
    let mut s_gens = Vec::new();
    let mut t_gens = Vec::new();
    for n in 0..depth as usize {
        for i in 0..m {
            let mut comps = vec![0; m];
            comps[i] = 1;
            let unit = g.label(&comps).unwrap();
            let shift = |t: &[usize]| {
                let mut t = t.to_vec();
                t[n] = g.add(t[n], unit).unwrap();
                index(&t)
            };
            let mut s = vec![0; size * size];
            let mut tt = vec![0; size * size];
            for (ia, a) in elems.iter().enumerate() {
                for (ib, b) in elems.iter().enumerate() {
                    s[ia * size + ib] = shift(a) * size + ib;
                    tt[ia * size + ib] = ia * size + shift(b);
                }
            }
            s_gens.push(s);
            t_gens.push(tt);
        }
    }
    let n = size * size;
    FiniteSystem::explicit(g, depth, vec![1.0 / n as f64; n], s_gens, t_gens).unwrap()
}

#[test]
fn ergodic_averages_on_the_product_system_are_discrete_averages() {
    for orders in [vec![2], vec![3], vec![2, 2]] {
        let g = Group::new(&orders).unwrap();
        let mut rng = rng_from(orders.len() as u64 * 31 + orders[0] as u64);
        for depth in 1..=2u32 {
            if g.order().pow(2 * depth) > 300 {
                continue;
            }
            let sys = product_system(&g, depth);
            let fp = DiscreteGrid::from_fn(&g, depth, |_, _| exact_value(&mut rng, true)).unwrap();
            let gp = DiscreteGrid::from_fn(&g, depth, |_, _| exact_value(&mut rng, true)).unwrap();
            for n in 0..=depth {
                let m = ergodic_average(&sys, fp.values(), gp.values(), n).unwrap();
                let a = discrete_average(&fp, &gp, n).unwrap();
                assert_eq!(m.as_slice(), a.values(), "{orders:?} depth {depth} n {n}");
            }
        }
    }
}

#[test]
fn json_round_trip_preserves_the_forms() {
    let g = Group::new(&[2, 2]).unwrap();
    let mut rng = rng_from(5);
    let f = exact_fn(&g, 1, 0, &mut rng, true).unwrap();
    let h = exact_fn(&g, 1, 0, &mut rng, true).unwrap();
    let f2 = StepFn2::<Cyclotomic>::from_json(&f.to_json().unwrap()).unwrap();
    let h2 = StepFn2::<Cyclotomic>::from_json(&h.to_json().unwrap()).unwrap();
    let ladder = ScaleLadder::new(vec![-2, -1, 1]).unwrap();
    let a = FormContext::new(3, ladder.clone(), f, h).unwrap();
    let b = FormContext::new(3, ladder.clone(), f2, h2).unwrap();
    assert_eq!(lambda_fast(&a).unwrap(), lambda_fast(&b).unwrap());
    assert_eq!(
        theta_fast(&a.f.tilde_f(), 3, &ladder).unwrap(),
        theta_fast(&b.f.tilde_f(), 3, &ladder).unwrap()
    );
}

#[test]
fn exact_and_float_backends_agree() {
    let g = Group::cyclic(3).unwrap();
    let mut rng = rng_from(8);
    let f = exact_fn(&g, 1, 1, &mut rng, true).unwrap();
    let h = exact_fn(&g, 1, 1, &mut rng, true).unwrap();
    let ladder = ScaleLadder::new(vec![-1, 0, 1]).unwrap();
    let exact = FormContext::new(2, ladder, f, h).unwrap();
    let float = exact.to_float();
    let le = lambda_fast(&exact).unwrap().to_complex();
    let lf = lambda_fast(&float).unwrap();
    assert!((le - lf).norm() <= 1e-12 * (1.0 + le.norm()));
    let ve = variation_sum(&exact.ladder_averages().unwrap(), 2.0).unwrap();
    let vf = variation_sum(&float.ladder_averages().unwrap(), 2.0).unwrap();
    assert!((ve.variation_sum - vf.variation_sum).abs() <= 1e-12 * (1.0 + ve.variation_sum));
}

#[test]
fn proposition_chain_on_a_fixed_instance() {
    let g = Group::cyclic(2).unwrap();
    let mut rng = rng_from(21);
    let f = float_fn(&g, 2, 1, &mut rng).unwrap();
    let h = float_fn(&g, 2, 1, &mut rng).unwrap();
    for p in [2, 3, 4] {
        let ctx = FormContext::new(
            p,
            ScaleLadder::new(vec![-2, 0, 2]).unwrap(),
            f.clone(),
            h.clone(),
        )
        .unwrap();
        let rep = proposition_bound_check(&ctx, &c_p(p).unwrap()).unwrap();
        assert!(rep.all_pass(), "p = {p}: {rep:?}");
        assert!(rep.variation.ratio.unwrap() <= 1.0);
    }
}

#[cfg(feature = "parallel")]
#[test]
fn suite_records_do_not_depend_on_thread_count() {
    use cantorvar::verify::{run_suite, SuiteConfig};

    let cfg = SuiteConfig {
        groups: vec![vec![2], vec![3]],
        p_list: vec![2, 3],
        trials: 12,
        lemma_samples: 2000,
        ..SuiteConfig::default()
    };
    let pool = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
    };
    let one = pool(1).install(|| run_suite(&cfg)).unwrap();
    let four = pool(4).install(|| run_suite(&cfg)).unwrap();
    assert_eq!(one, four);
}

fn small_fn() -> impl Strategy<Value = (u32, u32, Vec<f64>, Vec<f64>)> {
    (0u32..=2, 0u32..=1).prop_flat_map(|(res, sup)| {
        let cells = 1usize << (2 * (res + sup));
        (
            Just(res),
            Just(sup),
            prop::collection::vec(0.0f64..4.0, cells),
            prop::collection::vec(0.0f64..4.0, cells),
        )
    })
}

fn grid(res: u32, sup: u32, v: &[f64]) -> StepFn2<Complex64> {
    let g = Group::cyclic(2).unwrap();
    StepFn2::new(
        &g,
        res,
        sup,
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// At the finest scale the average is the pointwise product, and every
    /// average of nonnegative functions is nonnegative with norm at most
    /// `||F||_2p ||G||_2p`.
    #[test]
    fn average_invariants((res, sup, a, b) in small_fn(), p in 2u32..=4) {
        let (f, h) = (grid(res, sup, &a), grid(res, sup, &b));
        let top = bilinear_average(&f, &h, res as i32).unwrap();
        for (i, v) in top.values().iter().enumerate() {
            prop_assert!((v.re - a[i] * b[i]).abs() < 1e-12);
        }
        let pf = p as f64;
        let bound = (f.lp_norm_p_f64(2.0 * pf) * h.lp_norm_p_f64(2.0 * pf)).sqrt();
        for k in -3..=res as i32 {
            let avg = bilinear_average(&f, &h, k).unwrap();
            prop_assert!(avg.is_nonnegative());
            prop_assert!(avg.lp_norm_p_f64(pf) <= bound * (1.0 + 1e-9) + 1e-12);
        }
    }

    /// Jump counts never increase with eps and stay below the sequence length.
    #[test]
    fn jump_counts_are_monotone((res, sup, a, b) in small_fn()) {
        let (f, h) = (grid(res, sup, &a), grid(res, sup, &b));
        let seq: Vec<_> = (-3..=res as i32).map(|k| bilinear_average(&f, &h, k).unwrap()).collect();
        let mut last = usize::MAX;
        for eps in [0.01, 0.1, 0.5, 1.0, 4.0] {
            let c = count_jumps(&seq, eps, 2.0).unwrap();
            prop_assert!(c <= last);
            prop_assert!(c < seq.len());
            last = c;
        }
    }
}
