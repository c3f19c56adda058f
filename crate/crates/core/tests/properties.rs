use infodesign::beliefs::{
    convex_order_compare, garble, mixture, stop_loss, CxOrdering, GarblingKernel, PosteriorDist,
};
use infodesign::decide::{pipeline_compare, random_decision_problem, welfare};
use infodesign::learn::{solve_quadratic_closed_form, solve_two_point, Friction, LearningProblem};
use infodesign::lp::phase_one;
use infodesign::rlhf::{
    fosd_check, goodhart_reconstruct, induced_quality_dist, random_generator, tilt, total_variation, argmax_law,
    RewardSpec,
};
use infodesign::risk::BayesRisk;
use infodesign::simplex::{
    cx_compare_k, cx_compare_k_report, random_contraction, random_simplex_dist, SimplexDist,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist() -> impl Strategy<Value = PosteriorDist> {
    prop::collection::vec((0.0..=1.0f64, 0.05..1.0f64), 1..7).prop_map(|atoms| {
        let (p, w): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
        PosteriorDist::new(&p, &w).unwrap()
    })
}

fn kernel(rows: usize, cols: usize) -> impl Strategy<Value = GarblingKernel> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, cols), rows).prop_map(|raw| {
        let rows = raw
            .into_iter()
            .map(|r| {
                let r: Vec<f64> = r.into_iter().map(|x| x + 1e-3).collect();
                let s: f64 = r.iter().sum();
                r.into_iter().map(|x| x / s).collect()
            })
            .collect();
        GarblingKernel::new(rows).unwrap()
    })
}

fn dist_and_kernel() -> impl Strategy<Value = (PosteriorDist, GarblingKernel)> {
    (dist(), 1usize..5).prop_flat_map(|(d, cols)| {
        let n = d.len();
        (Just(d), kernel(n, cols))
    })
}

/// Brute-force stop-loss written without sorting or cumulative sums.
fn stop_loss_oracle(d: &PosteriorDist, k: f64) -> f64 {
    d.atoms().map(|(q, w)| w * (q - k).max(0.0)).sum()
}

fn max_affine(rng: &mut ChaCha8Rng, dim: usize) -> impl Fn(&[f64]) -> f64 {
    let pieces: Vec<(f64, Vec<f64>)> = (0..rng.gen_range(1..6))
        .map(|_| (rng.gen_range(-1.0..1.0), (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()))
        .collect();
    move |x: &[f64]| {
        pieces
            .iter()
            .map(|(c, g)| c + g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stop_loss_matches_oracle(d in dist(), k in 0.0..=1.0f64) {
        let got = stop_loss(&d, k).unwrap();
        prop_assert!((got - stop_loss_oracle(&d, k)).abs() < 1e-12);
    }

    #[test]
    fn garbling_preserves_mean_and_contracts((d, m) in dist_and_kernel()) {
        let g = garble(&d, &m).unwrap();
        prop_assert!((g.mean() - d.mean()).abs() < 1e-12);
        let rel = convex_order_compare(&d, &g);
        prop_assert!(matches!(rel, CxOrdering::ADominates | CxOrdering::Equal), "{rel:?}");
        prop_assert!(g.variance() <= d.variance() + 1e-12);
    }

    #[test]
    fn identity_and_uninformative_kernels(d in dist()) {
        let same = garble(&d, &GarblingKernel::identity(d.len())).unwrap();
        prop_assert_eq!(convex_order_compare(&d, &same), CxOrdering::Equal);
        let flat = garble(&d, &GarblingKernel::uninformative(d.len())).unwrap();
        prop_assert!(flat.is_point_mass());
        prop_assert!((flat.mean() - d.mean()).abs() < 1e-12);
    }

    #[test]
    fn convex_order_is_antisymmetric(a in dist(), b in dist()) {
        prop_assert_eq!(convex_order_compare(&a, &a), CxOrdering::Equal);
        prop_assert_eq!(convex_order_compare(&b, &a), convex_order_compare(&a, &b).flip());
    }

    #[test]
    fn garbling_is_transitive((d, m1) in dist_and_kernel(), seed in any::<u64>()) {
        let g1 = garble(&d, &m1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..g1.len())
            .map(|_| {
                let r: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() + 1e-3).collect();
                let s: f64 = r.iter().sum();
                r.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let g2 = garble(&g1, &GarblingKernel::new(rows).unwrap()).unwrap();
        prop_assert!(convex_order_compare(&d, &g2).a_at_least());
    }

    #[test]
    fn dominance_implies_welfare((d, m) in dist_and_kernel(), seed in any::<u64>()) {
        let g = garble(&d, &m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let dp = random_decision_problem(&mut rng);
            let cmp = pipeline_compare(&dp, &d, &g);
            prop_assert!(cmp.consistent(), "{cmp:?}");
            prop_assert!(welfare(&dp, &d) >= welfare(&dp, &g) - 1e-12);
        }
    }

    #[test]
    fn mixture_of_garbles_is_dominated((d, m) in dist_and_kernel(), p in 0.0..=1.0f64) {
        let g = garble(&d, &m).unwrap();
        let mix = mixture(&[(p, d.clone()), (1.0 - p, g)]).unwrap();
        prop_assert!(convex_order_compare(&d, &mix).a_at_least());
    }

    #[test]
    fn closed_form_matches_two_point_search(i in 20usize..380, t in 0.0..=1.0f64, lambda in 2.0..50.0f64) {
        let mu = i as f64 / 400.0;
        let closed = solve_quadratic_closed_form(mu, lambda, t).unwrap();
        let p = LearningProblem::new(BayesRisk::quadratic(t), Friction::dispersion(lambda).unwrap(), mu, 401).unwrap();
        let search = solve_two_point(&p).unwrap();
        // the search is restricted to grid laws, so it can only do worse
        prop_assert!(search.objective_value >= closed.objective_value - 1e-12);
        prop_assert!(search.objective_value - closed.objective_value < 1e-4);
        prop_assert!((p.objective(&closed.dist) - closed.objective_value).abs() < 1e-12);
        prop_assert!((search.q_high() - closed.q_high()).abs() <= 1.0 / 400.0 + 1e-12);
    }

    #[test]
    fn aligned_tilt_dominates_base(seed in any::<u64>(), lambda in 1e-3..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_generator(&mut rng, 6, 2);
        let w = vec![0.3, 0.7];
        let base = induced_quality_dist(&g, &w).unwrap();
        let tilted = tilt(&g, &RewardSpec::aligned(w.clone()), lambda).unwrap();
        prop_assert!(fosd_check(&induced_quality_dist(&tilted, &w).unwrap(), &base));
    }

    #[test]
    fn goodhart_reconstruction_matches_tilt(seed in any::<u64>(), alpha in 0.0..=1.0f64, lambda in 1e-2..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_generator(&mut rng, 5, 2);
        let r = RewardSpec::misspecified(vec![0.5, 0.5], alpha);
        let direct = induced_quality_dist(&tilt(&g, &r, lambda).unwrap(), &r.weights).unwrap();
        let rebuilt = goodhart_reconstruct(&g, &r, lambda).unwrap();
        for k in [0.1, 0.3, 0.5, 0.7, 0.9] {
            prop_assert!((direct.survival(k) - rebuilt.survival(k)).abs() < 1e-9);
        }
        prop_assert!((direct.mean() - rebuilt.mean()).abs() < 1e-9);
    }

    #[test]
    fn tilt_concentrates_on_reward_maximisers(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_generator(&mut rng, 5, 1);
        let r = RewardSpec::aligned(vec![1.0]);
        let limit = argmax_law(&g, &r);
        let far = total_variation(&tilt(&g, &r, 1.0).unwrap(), &limit);
        let near = total_variation(&tilt(&g, &r, 1e-4).unwrap(), &limit);
        prop_assert!(near <= far + 1e-12);
    }

    #[test]
    fn lp_finds_planted_solutions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, n) = (rng.gen_range(1..6), rng.gen_range(1..8));
        let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = a.iter().map(|r| r.iter().zip(&x0).map(|(p, q)| p * q).sum()).collect();
        let sol = phase_one(&a, &b).unwrap();
        prop_assert!(sol.feasible());
        for (r, bi) in a.iter().zip(&b) {
            let lhs: f64 = r.iter().zip(&sol.x).map(|(p, q)| p * q).sum();
            prop_assert!((lhs - bi).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn contraction_is_dominated_for_sampled_convex_functions(seed in any::<u64>(), k in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_simplex_dist(&mut rng, k, 4);
        let c = random_contraction(&mut rng, &d, 3);
        prop_assert!(cx_compare_k(&d, &c).unwrap().a_at_least());
        for _ in 0..20 {
            let phi = max_affine(&mut rng, k);
            prop_assert!(d.expect(&phi) >= c.expect(&phi) - 1e-9);
        }
    }

    #[test]
    fn witnesses_certify_refutations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_simplex_dist(&mut rng, 3, 3);
        // share the mean so only the spread matters
        let b = SimplexDist::new(&[a.mean().to_vec()], &[1.0]).unwrap();
        let spread = random_contraction(&mut rng, &a, 2);
        for other in [&b, &spread] {
            let rep = cx_compare_k_report(other, &a).unwrap();
            if let Some(w) = &rep.a_refuted {
                prop_assert!(w.gap(other, &a) > 0.0);
            }
            if let Some(w) = &rep.b_refuted {
                prop_assert!(w.gap(&a, other) > 0.0);
            }
        }
    }

    #[test]
    fn embedding_agrees_with_stop_loss(a in dist(), b in dist()) {
        let scalar = convex_order_compare(&a, &b);
        let k = cx_compare_k(&SimplexDist::embed(&a), &SimplexDist::embed(&b)).unwrap();
        prop_assert_eq!(scalar, k);
    }
}
