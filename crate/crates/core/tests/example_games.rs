//! Regression tests on the worked example games.

use dbeq::equilibrium::{
    enumerate_pure, grid_search_mixed, nash_support_enumeration, robust_check, satisfies_equilibrium,
    verify_equilibrium,
};
use dbeq::games;
use dbeq::ladder::{default_schedule, trembling_ladder, LadderVerdict};
use dbeq::oracle::{oracle_equilibrium, oracle_threshold, GridSpec, ThresholdClaim};
use dbeq::welfare::{consensus_audit, consensus_generate, poa, poa_bound_check, smoothness_fit};
use dbeq::{Metric, MixedStrategy, Notion, Profile, SolverSettings};

fn st() -> SolverSettings {
    SolverSettings::default()
}

fn symmetric(x: f64) -> Profile {
    let s = MixedStrategy::new(vec![x, 1.0 - x]).unwrap();
    Profile::new(vec![s.clone(), s])
}

#[test]
fn trembling_hand_good_profile_is_everything() {
    let g = games::trembling_hand();
    let rep = verify_equilibrium(&g, &Profile::pure(&g, &[0, 0]), &[0.1, 0.1], Metric::LinfProduct, &st()).unwrap();
    for n in Notion::DISTANCE {
        assert!(rep.flag(n), "{n}");
    }
    assert!(rep.exact && rep.nash);
    // the worst case for Up is the opponent playing Left outright
    assert_eq!(rep.per_player[0].witnesses.worst_point[0].probs(), &[1.0, 0.0]);
    assert_eq!(rep.per_player[0].worst_value, 1.0);
}

#[test]
fn trembling_hand_bad_profile_is_hopeful_only() {
    let g = games::trembling_hand();
    let p = Profile::pure(&g, &[1, 1]);
    let rep = verify_equilibrium(&g, &p, &[0.1, 0.1], Metric::LinfProduct, &st()).unwrap();
    assert!(rep.nash);
    assert!(rep.per_player.iter().all(|c| c.is_b && c.best_value == 2.0));
    assert!(!rep.flags.w && !rep.flags.u && !rep.flags.d);
    // deviating toward Up keeps improving the worst case
    let w = &rep.per_player[0];
    assert_eq!(w.witnesses.maximin_strategy.probs(), &[1.0, 0.0]);
    assert!(w.maximin_value > w.worst_value);
}

#[test]
fn trembling_hand_oracle_agrees() {
    let g = games::trembling_hand();
    let grid = GridSpec::new(0.01).unwrap();
    for (a, expected) in [([0, 0], [true; 6]), ([1, 1], [false, true, false, false, false, false])] {
        let p = Profile::pure(&g, &a);
        for (n, e) in Notion::DISTANCE.iter().zip(expected) {
            assert_eq!(oracle_equilibrium(&g, &p, &[0.1, 0.1], Metric::LinfProduct, *n, &grid).unwrap(), e, "{a:?} {n}");
        }
    }
}

#[test]
fn trembling_hand_ladder_separates_the_two_equilibria() {
    let g = games::trembling_hand();
    let good = trembling_ladder(&g, &Profile::pure(&g, &[0, 0]), &default_schedule()).unwrap();
    let bad = trembling_ladder(&g, &Profile::pure(&g, &[1, 1]), &default_schedule()).unwrap();
    assert_eq!(good.verdict, LadderVerdict::Supported);
    assert_eq!(bad.verdict, LadderVerdict::Refuted);
}

#[test]
fn pennies_has_only_the_uniform_equilibrium() {
    let g = games::matching_pennies();
    assert!(enumerate_pure(&g, &[0.0, 0.0], Metric::L2Concat, Notion::Nash, &st()).unwrap().is_empty());
    let se = nash_support_enumeration(&g, 1e-9).unwrap();
    assert_eq!(se.equilibria.len(), 1);
    assert_eq!(se.equilibria[0].profile, symmetric(0.5));
}

#[test]
fn pennies_imprecise_randomisation_interval() {
    let g = games::matching_pennies();
    for r in [0.1, 0.2, 0.3] {
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            let d = (x - 0.5f64).abs();
            if (d - r).abs() <= 1e-6 {
                continue;
            }
            let u = satisfies_equilibrium(&g, &symmetric(x), &[r, r], Metric::LinfProduct, Notion::U, &st()).unwrap();
            assert_eq!(u, d < r, "x = {x}, r = {r}");
        }
    }
}

/// Best-case value of a 2x2 row player choosing `x` when the opponent's
/// first-action probability ranges over `[lo, hi]`: linear in the
/// opponent, so an endpoint attains it.
fn maximax(m: [[f64; 2]; 2], x: f64, lo: f64, hi: f64) -> f64 {
    let v = |q: f64| {
        let row = |a: usize| q * m[a][0] + (1.0 - q) * m[a][1];
        x * row(0) + (1.0 - x) * row(1)
    };
    v(lo).max(v(hi))
}

#[test]
fn pennies_has_no_best_case_equilibrium_at_half() {
    let g = games::matching_pennies();
    for metric in Metric::ALL {
        assert!(enumerate_pure(&g, &[0.5, 0.5], metric, Notion::B, &st()).unwrap().is_empty());
        let rep = grid_search_mixed(&g, &[0.5, 0.5], metric, Notion::B, 0.05, &st()).unwrap();
        assert!(rep.candidates.is_empty(), "{metric}");
    }
    // independent closed form under the product metric: mixing strictly
    // lowers the best case, and no pure pair is mutually best
    let row = [[1.0, -1.0], [-1.0, 1.0]];
    let col = [[-1.0, 1.0], [1.0, -1.0]];
    let mut floor = f64::INFINITY;
    let steps = 200;
    for a in 0..=steps {
        for b in 0..=steps {
            let (p, q) = (a as f64 / steps as f64, b as f64 / steps as f64);
            let interval = |c: f64| ((c - 0.5f64).max(0.0), (c + 0.5f64).min(1.0));
            let (ql, qh) = interval(q);
            let (pl, ph) = interval(p);
            let r0 = maximax(row, 1.0, ql, qh).max(maximax(row, 0.0, ql, qh)) - maximax(row, p, ql, qh);
            let r1 = maximax(col, 1.0, pl, ph).max(maximax(col, 0.0, pl, ph)) - maximax(col, q, pl, ph);
            floor = floor.min(r0.max(r1));
        }
    }
    // the regret is 4-Lipschitz per coordinate and the grid step is 1/200
    assert!(floor > 4.0 / steps as f64, "floor {floor}");
}

#[test]
fn stag_hunt_thresholds_under_product_metric() {
    let g = games::stag_hunt();
    let grid = GridSpec::new(0.01).unwrap().with_tolerance(1e-9);
    let claim = ThresholdClaim {
        profile: Profile::pure(&g, &[0, 0]),
        notion: Notion::W,
        metric: Metric::LinfProduct,
    };
    let stag = oracle_threshold(&g, &claim, 0.0, 1.0, &grid).unwrap();
    assert!((stag.threshold - 0.5).abs() < 1e-4);
    let w = |a: [usize; 2], r: f64| {
        satisfies_equilibrium(&g, &Profile::pure(&g, &a), &[r, r], Metric::LinfProduct, Notion::W, &st()).unwrap()
    };
    assert!(w([0, 0], 0.49) && !w([0, 0], 0.51));
    // safety first: Hare keeps its worst case at every radius
    assert!((0..=20).all(|k| w([1, 1], k as f64 / 20.0)));
    // the reference value 1/3 is not a threshold here
    assert!(w([0, 0], 1.0 / 3.0 + 0.01));
}

#[test]
fn stag_hunt_threshold_under_euclidean_metric() {
    let g = games::stag_hunt();
    let w = |r: f64| {
        satisfies_equilibrium(&g, &Profile::pure(&g, &[0, 0]), &[r, r], Metric::L2Concat, Notion::W, &st()).unwrap()
    };
    // the Euclidean ball reaches probability shifts of r / sqrt 2
    let t = 0.5 * 2f64.sqrt();
    assert!(w(t - 0.01) && !w(t + 0.01));
}

#[test]
fn zero_radius_matches_nash_on_examples() {
    for g in [games::trembling_hand(), games::matching_pennies(), games::stag_hunt(), games::prisoners_dilemma()] {
        let nash = enumerate_pure(&g, &[0.0, 0.0], Metric::L2Concat, Notion::Nash, &st()).unwrap();
        for n in [Notion::W, Notion::B, Notion::WR, Notion::U] {
            for metric in Metric::ALL {
                assert_eq!(enumerate_pure(&g, &[0.0, 0.0], metric, n, &st()).unwrap(), nash, "{n} {metric}");
            }
        }
    }
}

#[test]
fn constant_game_has_no_dominant_equilibrium() {
    let g = games::constant(&[2, 2], 1.0).unwrap();
    assert_eq!(enumerate_pure(&g, &[0.0, 0.0], Metric::L2Concat, Notion::Nash, &st()).unwrap().len(), 4);
    for r in [0.0, 0.1, 0.5] {
        for metric in Metric::ALL {
            assert!(enumerate_pure(&g, &[r, r], metric, Notion::D, &st()).unwrap().is_empty());
        }
    }
}

#[test]
fn consensus_games_select_the_consensus() {
    for shape in [vec![2, 2], vec![3, 2], vec![2, 2, 2]] {
        let target = vec![1; shape.len()];
        let g = consensus_generate(&shape, 1.0, 2.0, &target).unwrap();
        let a = consensus_audit(&g, &vec![0.1; shape.len()], Metric::LinfProduct, &st()).unwrap();
        assert!(a.passed, "{shape:?}");
        assert_eq!(a.d_equilibria, vec![target.clone()]);
        assert_eq!(a.poa.poa, Some(1.0));
        // without ignorance the bad coordination outcome survives
        let n = shape.len();
        let nash: Vec<Profile> = enumerate_pure(&g, &vec![0.0; n], Metric::L2Concat, Notion::Nash, &st())
            .unwrap()
            .iter()
            .map(|a| Profile::pure(&g, a))
            .collect();
        assert!(nash.len() >= 2);
        assert_eq!(poa(&g, &nash, &[], Some(Notion::Nash), &vec![0.0; n]).unwrap().poa, Some(2.0));
    }
}

#[test]
fn robust_equilibria_and_dominance() {
    let g = games::trembling_hand();
    // robust to 0.1 trembles, hence dominant in the 0.1 ball
    assert!(robust_check(&g, &[0, 0], 0.1, 1e-9).unwrap().robust);
    let p = Profile::pure(&g, &[0, 0]);
    assert!(verify_equilibrium(&g, &p, &[0.1, 0.1], Metric::L2Concat, &st()).unwrap().flags.d);
    // dominant at 0.2 gives robustness at 0.2 / sqrt 2
    assert!(verify_equilibrium(&g, &p, &[0.2, 0.2], Metric::LinfProduct, &st()).unwrap().flags.d);
    assert!(robust_check(&g, &[0, 0], 0.2 / 2f64.sqrt(), 1e-9).unwrap().robust);
    // a robust profile is hopeful and cautious for small radii
    let pd = games::prisoners_dilemma();
    assert!(robust_check(&pd, &[1, 1], 0.3, 1e-9).unwrap().robust);
    let rep = verify_equilibrium(&pd, &Profile::pure(&pd, &[1, 1]), &[0.05, 0.05], Metric::L2Concat, &st()).unwrap();
    assert!(rep.flags.b && rep.flags.w);
}

#[test]
fn dominant_equilibria_survive_trembles() {
    let g = games::prisoners_dilemma();
    let p = Profile::pure(&g, &[1, 1]);
    assert!(verify_equilibrium(&g, &p, &[0.3, 0.3], Metric::L2Concat, &st()).unwrap().flags.sd);
    let ladder = trembling_ladder(&g, &p, &default_schedule()).unwrap();
    assert_eq!(ladder.verdict, LadderVerdict::Supported);
    assert!(ladder.strict_everywhere);
}

#[test]
fn consensus_smoothness_and_bound() {
    let g = consensus_generate(&[2, 2], 1.0, 2.0, &[0, 0]).unwrap();
    let cert = smoothness_fit(&g).unwrap().unwrap();
    assert!((cert.classical_bound - 0.5).abs() < 1e-8);
    for n in [Notion::U, Notion::D, Notion::W, Notion::B] {
        let rep = poa_bound_check(&g, &[0.1, 0.1], Metric::L2Concat, n, &st()).unwrap();
        assert!(rep.violations.is_empty(), "{n}");
    }
}
