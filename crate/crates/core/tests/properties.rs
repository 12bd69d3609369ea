//! Property tests for the invariants of games, metrics, responses,
//! equilibria, welfare quantities and the grid oracle.

use dbeq::equilibrium::{enumerate_pure, nash_support_enumeration, robust_check, verify_equilibrium};
use dbeq::oracle::{oracle_classify, GridSpec};
use dbeq::random::{random_game, random_profile, random_strategy, task_rng};
use dbeq::response::OuterNotion;
use dbeq::welfare::{delta_estimate, smoothness_fit};
use dbeq::{
    ball_vertices, distance, parse_game, serialize_game, BeliefSet, Game, Metric, MixedStrategy, Notion, Profile,
    ResponseClassification, ResponseContext, SolverSettings,
};
use proptest::prelude::*;
use rand::Rng;

const SHAPES: [&[usize]; 6] = [&[2, 2], &[2, 3], &[3, 2], &[3, 3], &[2, 2, 2], &[2, 3, 2]];
const TWO_PLAYER: [&[usize]; 4] = [&[2, 2], &[2, 3], &[3, 2], &[3, 3]];

fn setup(seed: u64, shape: &[usize]) -> (Game, Profile, rand_chacha::ChaCha8Rng) {
    let mut rng = task_rng(seed, 0);
    let g = random_game(&mut rng, shape, -1.0, 1.0);
    let p = random_profile(&mut rng, &g);
    (g, p, rng)
}

fn st() -> SolverSettings {
    SolverSettings::default()
}

fn classify(g: &Game, p: &Profile, i: usize, r: f64, metric: Metric, tol: f64) -> ResponseClassification {
    let belief = BeliefSet::new(i, p.opponents(i), r, metric).unwrap();
    ResponseContext::new(g, belief, SolverSettings::with_tol(tol))
        .unwrap()
        .classify(p.strategy(i))
        .unwrap()
}

/// Metrics with exact solvers for this many players.
fn metrics_for(n: usize) -> Vec<Metric> {
    if n == 2 {
        Metric::ALL.to_vec()
    } else {
        vec![Metric::LinfProduct]
    }
}

/// A point of the ball: the center moved toward a random sub-profile, no
/// further than the radius allows. All metrics are norms, so distance
/// scales linearly along the segment.
fn ball_point(rng: &mut impl Rng, g: &Game, b: &BeliefSet) -> Vec<MixedStrategy> {
    let target: Vec<MixedStrategy> = g
        .opponent_indices(b.owner)
        .map(|j| random_strategy(rng, g.num_actions(j)))
        .collect();
    let d = distance(b.metric, &b.center, &target).unwrap();
    let t = if d <= b.radius { 1.0 } else { b.radius / d } * rng.gen::<f64>();
    b.center
        .iter()
        .zip(&target)
        .map(|(c, y)| {
            MixedStrategy::from_approx(c.probs().iter().zip(y.probs()).map(|(a, b)| a + t * (b - a)).collect()).unwrap()
        })
        .collect()
}

fn verdicts(c: &ResponseClassification) -> [bool; 6] {
    [c.is_w, c.is_b, c.is_wr, c.is_u, c.is_d, c.is_sd]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn utility_is_multilinear(seed in any::<u64>(), k in 0usize..6, alpha in 0.0f64..1.0) {
        let (g, p, mut rng) = setup(seed, SHAPES[k]);
        for i in 0..g.num_players() {
            let other = random_strategy(&mut rng, g.num_actions(i));
            let mix: Vec<f64> = p.strategy(i).probs().iter().zip(other.probs())
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let q = p.with_strategy(i, MixedStrategy::from_approx(mix).unwrap());
            for j in 0..g.num_players() {
                let lhs = g.expected_utility(&q, j).unwrap();
                let rhs = alpha * g.expected_utility(&p, j).unwrap()
                    + (1.0 - alpha) * g.expected_utility(&p.with_strategy(i, other.clone()), j).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn pure_profiles_read_the_tensor(seed in any::<u64>(), k in 0usize..6) {
        let (g, p, _) = setup(seed, SHAPES[k]);
        for a in g.pure_profiles() {
            let q = Profile::pure(&g, &a);
            for i in 0..g.num_players() {
                prop_assert_eq!(g.expected_utility(&q, i).unwrap(), g.payoff(i, &a));
            }
        }
        let total: f64 = (0..g.num_players()).map(|i| g.expected_utility(&p, i).unwrap()).sum();
        prop_assert!((g.social_welfare(&p).unwrap() - total).abs() <= 1e-12);
    }

    #[test]
    fn parser_round_trip(seed in any::<u64>(), k in 0usize..6) {
        let (g, _, _) = setup(seed, SHAPES[k]);
        let back = parse_game(&serialize_game(&g)).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn balls_are_nested(seed in any::<u64>(), k in 0usize..6, r in 0.0f64..0.8, shrink in 0.0f64..1.0) {
        let (g, p, mut rng) = setup(seed, SHAPES[k]);
        for metric in Metric::ALL {
            let small = BeliefSet::new(0, p.opponents(0), r * shrink, metric).unwrap();
            let big = BeliefSet::new(0, p.opponents(0), r, metric).unwrap();
            for _ in 0..20 {
                let y = ball_point(&mut rng, &g, &small);
                prop_assert!(small.contains(&y).unwrap());
                prop_assert!(big.contains(&y).unwrap());
            }
        }
    }

    #[test]
    fn vertices_bound_linear_objectives(seed in any::<u64>(), k in 0usize..6, r in 0.0f64..0.8) {
        let (g, p, mut rng) = setup(seed, SHAPES[k]);
        for metric in metrics_for(g.num_players()).into_iter().filter(|m| m.is_polyhedral()) {
            let b = BeliefSet::new(0, p.opponents(0), r, metric).unwrap();
            let verts = ball_vertices(&b).unwrap();
            for v in &verts.vertices {
                prop_assert!(b.contains(v).unwrap());
            }
            // a payoff column is multilinear in the opponents, linear per opponent
            let x = random_strategy(&mut rng, g.num_actions(0));
            let f = |y: &[MixedStrategy]| x.dot(&g.action_values(0, y));
            let vmax = verts.vertices.iter().map(|v| f(v)).fold(f64::NEG_INFINITY, f64::max);
            for _ in 0..50 {
                let y = ball_point(&mut rng, &g, &b);
                prop_assert!(f(&y) <= vmax + 1e-9);
            }
        }
    }

    #[test]
    fn response_lattice(seed in any::<u64>(), k in 0usize..6, r in 0.0f64..0.4, pure in any::<bool>()) {
        let (g, mut p, _) = setup(seed, SHAPES[k]);
        if pure {
            p = Profile::pure(&g, &vec![0; g.num_players()]);
        }
        for metric in metrics_for(g.num_players()) {
            for i in 0..g.num_players() {
                let c = classify(&g, &p, i, r, metric, 1e-9);
                prop_assert!(c.implication_violations().is_empty(), "{:?}", c.implication_violations());
            }
            let rep = verify_equilibrium(&g, &p, &vec![r; g.num_players()], metric, &st()).unwrap();
            prop_assert!(rep.lattice_violations().is_empty());
        }
    }

    #[test]
    fn unique_optimisers_are_undominated(seed in any::<u64>(), k in 0usize..4, r in 0.0f64..0.4) {
        let (g, p, _) = setup(seed, TWO_PLAYER[k]);
        for metric in Metric::ALL {
            let b = BeliefSet::new(0, p.opponents(0), r, metric).unwrap();
            let ctx = ResponseContext::new(&g, b, st()).unwrap();
            for notion in [OuterNotion::Maximin, OuterNotion::Maximax, OuterNotion::MinWorstRegret] {
                if ctx.unique_optimum(notion).unwrap() == Some(true) {
                    let (_, x) = ctx.outer_optimum(notion).unwrap();
                    prop_assert!(ctx.satisfies(&x, Notion::U).unwrap(), "{notion:?} optimum {x:?}");
                }
            }
        }
    }

    #[test]
    fn strict_dominance_shrinks_with_radius(seed in any::<u64>(), k in 0usize..6, r in 0.0f64..0.6, f in 0.0f64..1.0) {
        let (g, _, _) = setup(seed, SHAPES[k]);
        for a in g.pure_profiles() {
            let p = Profile::pure(&g, &a);
            for metric in metrics_for(g.num_players()) {
                if classify(&g, &p, 0, r, metric, 1e-9).is_sd {
                    prop_assert!(classify(&g, &p, 0, r * f, metric, 1e-9).is_sd);
                }
            }
        }
    }

    #[test]
    fn zero_radius_is_best_response(seed in any::<u64>(), k in 0usize..6) {
        let (g, p, _) = setup(seed, SHAPES[k]);
        let mut profiles: Vec<Profile> = g.pure_profiles().map(|a| Profile::pure(&g, &a)).collect();
        profiles.push(p);
        for q in &profiles {
            for i in 0..g.num_players() {
                let values = g.action_values(i, &q.opponents(i));
                let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let nash = q.strategy(i).dot(&values) >= best - 1e-9;
                for metric in Metric::ALL {
                    let c = classify(&g, q, i, 0.0, metric, 1e-9);
                    prop_assert_eq!([c.is_w, c.is_b, c.is_wr, c.is_u], [nash; 4]);
                }
            }
        }
    }

    #[test]
    fn verdicts_survive_affine_maps(seed in any::<u64>(), k in 0usize..6, r in 0.0f64..0.4, pure in any::<bool>()) {
        let (g, mut p, _) = setup(seed, SHAPES[k]);
        if pure {
            p = Profile::pure(&g, &vec![1; g.num_players()]);
        }
        for metric in metrics_for(g.num_players()) {
            let base: Vec<[bool; 6]> = (0..g.num_players()).map(|i| verdicts(&classify(&g, &p, i, r, metric, 1e-9))).collect();
            for (alpha, beta) in [(0.5, -1.0), (0.5, 10.0), (3.0, -1.0), (3.0, 10.0)] {
                let h = g.affine(alpha, beta).unwrap();
                for (i, v) in base.iter().enumerate() {
                    prop_assert_eq!(&verdicts(&classify(&h, &p, i, r, metric, 1e-9)), v, "alpha {} beta {}", alpha, beta);
                }
            }
        }
    }

    #[test]
    fn worst_regret_dominates_samples(seed in any::<u64>(), k in 0usize..6, r in 0.0f64..0.5) {
        let (g, p, mut rng) = setup(seed, SHAPES[k]);
        for metric in metrics_for(g.num_players()) {
            let b = BeliefSet::new(0, p.opponents(0), r, metric).unwrap();
            let ctx = ResponseContext::new(&g, b.clone(), st()).unwrap();
            let (wr, _) = ctx.worst_case_regret(p.strategy(0)).unwrap();
            let regret = |y: &[MixedStrategy]| dbeq::regret(&g, 0, p.strategy(0), y).unwrap();
            for _ in 0..50 {
                let y = ball_point(&mut rng, &g, &b);
                prop_assert!(regret(&y) <= wr + 1e-6);
            }
            if metric.is_polyhedral() {
                // regret is convex in the belief, so its maximum sits at a vertex
                let vmax = ball_vertices(&b).unwrap().vertices.iter().map(|v| regret(v)).fold(0.0, f64::max);
                prop_assert!((vmax - wr).abs() <= 1e-6, "vertices {} solver {}", vmax, wr);
            }
        }
    }

    #[test]
    fn pure_nash_matches_support_enumeration(seed in any::<u64>(), k in 0usize..4) {
        let (g, _, _) = setup(seed, TWO_PLAYER[k]);
        let pure = enumerate_pure(&g, &[0.0, 0.0], Metric::L2Concat, Notion::Nash, &st()).unwrap();
        let se = nash_support_enumeration(&g, 1e-9).unwrap();
        let mut from_supports: Vec<Vec<usize>> = se.equilibria.iter().filter_map(|e| e.profile.pure_actions()).collect();
        from_supports.sort();
        prop_assert_eq!(pure, from_supports);
    }

    #[test]
    fn robust_profiles_are_dominant(seed in any::<u64>(), k in 0usize..6, eps in 0.01f64..0.4) {
        let (g, _, _) = setup(seed, SHAPES[k]);
        let n = g.num_players();
        for a in g.pure_profiles() {
            let p = Profile::pure(&g, &a);
            if robust_check(&g, &a, eps, 1e-9).unwrap().robust {
                let rep = verify_equilibrium(&g, &p, &vec![eps; n], Metric::L2Concat, &st()).unwrap();
                prop_assert!(rep.flags.d);
            }
            let rep = verify_equilibrium(&g, &p, &vec![eps; n], Metric::LinfProduct, &st()).unwrap();
            if rep.flags.d {
                prop_assert!(robust_check(&g, &a, eps / (n as f64).sqrt(), 1e-9).unwrap().robust);
            }
        }
    }

    #[test]
    fn delta_is_monotone_and_bounded(seed in any::<u64>(), k in 0usize..4) {
        let g = random_game(&mut task_rng(seed, 0), TWO_PLAYER[k], 0.5, 4.0);
        let d0 = delta_estimate(&g, 0.0, Metric::L2Concat, 1000, seed).unwrap();
        prop_assert_eq!((d0.lower_estimate, d0.upper_bound), (1.0, 1.0));
        let mut prev = 1.0;
        for r in [0.05, 0.1, 0.3, 0.9] {
            let d = delta_estimate(&g, r, Metric::L2Concat, 1000, seed).unwrap();
            prop_assert!(d.lower_estimate >= prev);
            prop_assert!(d.lower_estimate <= d.upper_bound);
            prev = d.lower_estimate;
        }
    }

    #[test]
    fn smoothness_certificates_hold(seed in any::<u64>(), k in 0usize..6) {
        let g = random_game(&mut task_rng(seed, 0), SHAPES[k], 0.0, 1.0);
        let cert = smoothness_fit(&g).unwrap().expect("positive welfare admits a certificate");
        prop_assert!(cert.lambda > 0.0 && cert.mu > 0.0);
        let profiles: Vec<Vec<usize>> = g.pure_profiles().collect();
        for a in &profiles {
            for b in &profiles {
                let dev: f64 = (0..g.num_players()).map(|i| {
                    let mut m = a.clone();
                    m[i] = b[i];
                    g.payoff(i, &m)
                }).sum();
                let res = dev - cert.lambda * g.pure_social_welfare(b) + cert.mu * g.pure_social_welfare(a);
                prop_assert!(res >= -1e-9, "residual {} at {:?} {:?}", res, a, b);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Verdicts clear of the tolerance band agree with the brute-force grid.
    #[test]
    fn oracle_agrees_with_solvers(seed in any::<u64>(), k in 0usize..3, r in 0.0f64..0.4) {
        let shapes: [&[usize]; 3] = [&[2, 2], &[2, 3], &[3, 2]];
        let (g, p, _) = setup(seed, shapes[k]);
        let grid = GridSpec::new(0.01).unwrap().with_tolerance(0.02);
        let fine = grid.with_tolerance(1e-12);
        let mut clear = 0;
        for metric in Metric::ALL {
            for q in [p.clone(), Profile::pure(&g, &[0, 0])] {
                for i in 0..2 {
                    let b = BeliefSet::new(i, q.opponents(i), r, metric).unwrap();
                    let e = classify(&g, &q, i, r, metric, 1e-9);
                    let e_wide = classify(&g, &q, i, r, metric, 0.02 + 1e-9);
                    let o = oracle_classify(&g, i, q.strategy(i), &b, &grid).unwrap().classification;
                    let o_fine = oracle_classify(&g, i, q.strategy(i), &b, &fine).unwrap().classification;
                    for n in Notion::DISTANCE {
                        if e.get(n) == e_wide.get(n) && o.get(n) == o_fine.get(n) {
                            clear += 1;
                            prop_assert_eq!(e.get(n), o.get(n), "{} {} player {} r {}", n, metric, i, r);
                        }
                    }
                }
            }
        }
        prop_assert!(clear > 0);
    }

    /// Refining the grid cannot flip a W, B or WR verdict with a wide margin.
    #[test]
    fn grid_refinement_keeps_clear_verdicts(seed in any::<u64>(), k in 0usize..3, r in 0.0f64..0.4) {
        let shapes: [&[usize]; 3] = [&[2, 2], &[2, 3], &[3, 3]];
        let (g, p, _) = setup(seed, shapes[k]);
        let h = 0.1;
        let coarse = GridSpec::new(h).unwrap();
        let fine = GridSpec::new(h / 2.0).unwrap();
        let band = 2.0 * g.payoff_spread() * h;
        for metric in Metric::ALL {
            let b = BeliefSet::new(0, p.opponents(0), r, metric).unwrap();
            let c = oracle_classify(&g, 0, p.strategy(0), &b, &coarse).unwrap().classification;
            let f = oracle_classify(&g, 0, p.strategy(0), &b, &fine).unwrap().classification;
            let margins = [
                (Notion::W, c.worst_value - c.maximin_value),
                (Notion::B, c.best_value - c.maximax_value),
                (Notion::WR, c.min_worst_regret - c.worst_regret),
            ];
            for (n, m) in margins {
                if m.abs() > band {
                    prop_assert_eq!(c.get(n), f.get(n), "{} margin {}", n, m);
                }
            }
        }
    }
}

#[test]
fn metric_axioms_on_random_triples() {
    let mut rng = task_rng(77, 0);
    for metric in Metric::ALL {
        for _ in 0..10_000 {
            let sizes = [2 + rng.gen_range(0..2), 2 + rng.gen_range(0..3)];
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<MixedStrategy> {
                sizes.iter().map(|&m| random_strategy(rng, m)).collect()
            };
            let (x, y, z) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let d = |a: &[MixedStrategy], b: &[MixedStrategy]| distance(metric, a, b).unwrap();
            assert_eq!(d(&x, &x), 0.0);
            assert!(d(&x, &y) >= 0.0);
            assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
            assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        }
    }
}
