//! Brute-force reference classifier.
//!
//! Evaluates every response notion by exhaustive search over a barycentric
//! grid of the player's own simplex and a grid of the belief ball. It uses no
//! linear programming and its own summation order, so agreement with the
//! exact solvers is evidence rather than tautology.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::simplex_grid;
use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, OpponentProfile, Profile};
use crate::metric::{distance, BeliefSet, Metric};
use crate::response::{Notion, ResponseClassification, Witnesses};

/// Upper limit on own grid points times ball grid points.
pub const MAX_PAIRS: usize = 30_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub resolution: f64,
    /// Verdict tolerance; defaults to payoff spread times resolution.
    pub tolerance: Option<f64>,
    /// Add boundary points of the ball found by bisection along rays from
    /// the center through grid points outside the ball.
    pub boundary: bool,
}

impl GridSpec {
    pub fn new(resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution <= 0.25) {
            return Err(Error::InvalidParameter(format!(
                "resolution must lie in (0, 0.25], got {resolution}"
            )));
        }
        Ok(GridSpec {
            resolution,
            tolerance: None,
            boundary: true,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn tolerance_for(&self, game: &Game) -> f64 {
        self.tolerance.unwrap_or(game.payoff_spread() * self.resolution)
    }
}

/// Oracle verdicts plus the raw margins behind them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleClassification {
    pub classification: ResponseClassification,
    /// Best worst-case advantage of any other grid strategy over the
    /// classified one; positive means strictly dominated.
    pub strict_gain: f64,
    /// Smallest advantage of the strategy over any pure action.
    pub dominance_margin: f64,
    pub own_points: usize,
    pub ball_points: usize,
}

fn check_cost(game: &Game) -> Result<()> {
    if game.num_players() != 2 || game.shape().iter().any(|&m| m > 3) {
        return Err(Error::CostGuard(format!(
            "oracle supports two players with at most 3 actions, got shape {:?}",
            game.shape()
        )));
    }
    Ok(())
}

/// Own-action by opponent-action payoff matrix of `player`.
fn own_matrix(game: &Game, player: usize) -> Vec<Vec<f64>> {
    let other = 1 - player;
    (0..game.num_actions(player))
        .map(|a| {
            (0..game.num_actions(other))
                .map(|b| {
                    let mut prof = [0usize; 2];
                    prof[player] = a;
                    prof[other] = b;
                    game.payoff(player, &prof)
                })
                .collect()
        })
        .collect()
}

fn ball_grid(belief: &BeliefSet, m: usize, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
    let center = belief.center[0].probs().to_vec();
    let mut pts = vec![center.clone()];
    for g in simplex_grid(m, grid.resolution)? {
        let p = g.probs().to_vec();
        if belief.contains(&[g.clone()])? {
            pts.push(p);
        } else if grid.boundary {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..60 {
                let t = 0.5 * (lo + hi);
                let q: Vec<f64> = center.iter().zip(&p).map(|(c, x)| c + t * (x - c)).collect();
                let inside = distance(belief.metric, &belief.center, &[MixedStrategy::from_approx(q)?])? <= belief.radius;
                if inside {
                    lo = t;
                } else {
                    hi = t;
                }
            }
            pts.push(center.iter().zip(&p).map(|(c, x)| c + lo * (x - c)).collect());
        }
    }
    Ok(pts)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in (0..a.len()).rev() {
        s += a[k] * b[k];
    }
    s
}

struct PointStats {
    worst: (f64, usize),
    best: (f64, usize),
    regret: (f64, usize),
}

fn stats(x: &[f64], cols: &[Vec<f64>], col_max: &[f64]) -> PointStats {
    let mut s = PointStats {
        worst: (f64::INFINITY, 0),
        best: (f64::NEG_INFINITY, 0),
        regret: (f64::NEG_INFINITY, 0),
    };
    for (v, c) in cols.iter().enumerate() {
        let u = dot(x, c);
        if u < s.worst.0 {
            s.worst = (u, v);
        }
        if u > s.best.0 {
            s.best = (u, v);
        }
        if col_max[v] - u > s.regret.0 {
            s.regret = (col_max[v] - u, v);
        }
    }
    s
}

pub fn oracle_classify(
    game: &Game,
    player: usize,
    strategy: &MixedStrategy,
    belief: &BeliefSet,
    grid: &GridSpec,
) -> Result<OracleClassification> {
    check_cost(game)?;
    game.check_strategy(player, strategy)?;
    if belief.owner != player {
        return Err(Error::InvalidParameter("belief set belongs to another player".into()));
    }
    game.check_opponents(player, &belief.center)?;
    let m = game.num_actions(player);
    let mo = game.num_actions(1 - player);
    let own = simplex_grid(m, grid.resolution)?;
    let ball = ball_grid(belief, mo, grid)?;
    if own.len() * ball.len() > MAX_PAIRS {
        return Err(Error::CostGuard(format!(
            "{} own points times {} belief points exceeds {MAX_PAIRS}",
            own.len(),
            ball.len()
        )));
    }
    let tol = grid.tolerance_for(game).max(1e-12);
    let mat = own_matrix(game, player);
    let cols: Vec<Vec<f64>> = ball
        .iter()
        .map(|q| mat.iter().map(|row| dot(row, q)).collect())
        .collect();
    let col_max: Vec<f64> = cols.iter().map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
    let pi = strategy.probs();
    let own_stats: Vec<PointStats> = own.par_iter().map(|x| stats(x.probs(), &cols, &col_max)).collect();
    let me = stats(pi, &cols, &col_max);
    let argbest = |f: &dyn Fn(&PointStats) -> f64| {
        let mut k = 0;
        for (j, s) in own_stats.iter().enumerate() {
            if f(s) > f(&own_stats[k]) {
                k = j;
            }
        }
        k
    };
    let kw = argbest(&|s| s.worst.0);
    let kb = argbest(&|s| s.best.0);
    let kr = argbest(&|s| -s.regret.0);
    let maximin = own_stats[kw].worst.0.max(me.worst.0);
    let maximax = own_stats[kb].best.0.max(me.best.0);
    let min_wr = own_stats[kr].regret.0.min(me.regret.0);

    // local dominance by other grid strategies
    let base: Vec<f64> = cols.iter().map(|c| dot(pi, c)).collect();
    let gains: Vec<(f64, f64)> = own
        .par_iter()
        .map(|y| {
            if y.max_abs_diff(strategy) <= 1e-12 {
                return (f64::NEG_INFINITY, f64::NEG_INFINITY);
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (c, b) in cols.iter().zip(&base) {
                let g = dot(y.probs(), c) - b;
                lo = lo.min(g);
                hi = hi.max(g);
            }
            (lo, hi)
        })
        .collect();
    let strict_gain = gains.iter().map(|g| g.0).fold(f64::NEG_INFINITY, f64::max);
    let dominator = gains.iter().position(|&(lo, hi)| lo >= -tol && hi > tol);

    // dominance over pure actions
    let pure: Vec<(f64, f64)> = (0..m)
        .map(|a| {
            let mut lo = f64::INFINITY;
            let mut mag: f64 = 0.0;
            for (c, b) in cols.iter().zip(&base) {
                let g = b - c[a];
                lo = lo.min(g);
                mag = mag.max(g.abs());
            }
            (lo, mag)
        })
        .collect();
    let dominance_margin = pure.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let ties: Vec<usize> = (0..m).filter(|&a| pure[a].1 <= tol).collect();
    let is_d = dominance_margin >= -tol
        && match ties.as_slice() {
            [] => true,
            [a] => strategy.pure_action() == Some(*a),
            _ => false,
        };
    let is_sd = match strategy.pure_action() {
        Some(a0) => (0..m).filter(|&b| b != a0).all(|b| {
            cols.iter().map(|c| c[a0] - c[b]).fold(f64::INFINITY, f64::min) > tol
        }),
        None => false,
    };

    let point = |v: usize| -> OpponentProfile { vec![MixedStrategy::from_approx(ball[v].clone()).expect("ball point")] };
    let classification = ResponseClassification {
        is_w: me.worst.0 >= maximin - tol,
        is_b: me.best.0 >= maximax - tol,
        is_wr: me.regret.0 <= min_wr + tol,
        is_u: dominator.is_none(),
        is_d,
        is_sd,
        worst_value: me.worst.0,
        best_value: me.best.0,
        worst_regret: me.regret.0.max(0.0),
        maximin_value: maximin,
        maximax_value: maximax,
        min_worst_regret: min_wr.max(0.0),
        witnesses: Witnesses {
            worst_point: point(me.worst.1),
            best_point: point(me.best.1),
            regret_point: point(me.regret.1),
            maximin_strategy: own[kw].clone(),
            maximax_strategy: own[kb].clone(),
            min_regret_strategy: own[kr].clone(),
            dominating_strategy: dominator.map(|k| own[k].clone()),
        },
        exact: false,
        tolerance: tol,
    };
    Ok(OracleClassification {
        classification,
        strict_gain,
        dominance_margin,
        own_points: own.len(),
        ball_points: ball.len(),
    })
}

/// Oracle verdict for a profile being an equilibrium of the given notion.
pub fn oracle_equilibrium(
    game: &Game,
    profile: &Profile,
    radii: &[f64],
    metric: Metric,
    notion: Notion,
    grid: &GridSpec,
) -> Result<bool> {
    check_cost(game)?;
    game.check_profile(profile)?;
    if radii.len() != 2 {
        return Err(Error::InvalidParameter("two radii required".into()));
    }
    // at radius zero every distance notion is a best response
    let (notion, zero) = match notion {
        Notion::Nash => (Notion::W, true),
        other => (other, false),
    };
    for i in 0..2 {
        let r = if zero { 0.0 } else { radii[i] };
        let belief = BeliefSet::new(i, profile.opponents(i), r, metric)?;
        let c = oracle_classify(game, i, profile.strategy(i), &belief, grid).map_err(|e| e.for_player(i))?;
        let ok = c.classification.get(notion).unwrap_or(false);
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdClaim {
    pub profile: Profile,
    pub notion: Notion,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub claim: ThresholdClaim,
    pub threshold: f64,
    /// Final bisection bracket.
    pub bracket: (f64, f64),
    pub holds_at_lo: bool,
    pub holds_at_hi: bool,
    pub note: Option<String>,
}

pub const THRESHOLD_PRECISION: f64 = 1e-4;
const MONOTONE_SAMPLES: usize = 21;

/// Critical radius where the claim changes truth value, by bisection.
pub fn oracle_threshold(game: &Game, claim: &ThresholdClaim, lo: f64, hi: f64, grid: &GridSpec) -> Result<ThresholdReport> {
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad radius interval [{lo}, {hi}]")));
    }
    let holds = |r: f64| oracle_equilibrium(game, &claim.profile, &[r, r], claim.metric, claim.notion, grid);
    let samples: Vec<(f64, bool)> = (0..MONOTONE_SAMPLES)
        .map(|k| {
            let r = lo + (hi - lo) * k as f64 / (MONOTONE_SAMPLES - 1) as f64;
            holds(r).map(|h| (r, h))
        })
        .collect::<Result<_>>()?;
    let changes: Vec<usize> = (1..samples.len()).filter(|&k| samples[k].1 != samples[k - 1].1).collect();
    if changes.len() > 1 {
        let (a, b) = (samples[changes[0]], samples[changes[1]]);
        return Err(Error::InvalidParameter(format!(
            "claim is not monotone in r: value flips at r={} and again at r={}",
            a.0, b.0
        )));
    }
    let (h_lo, h_hi) = (samples[0].1, samples[samples.len() - 1].1);
    if changes.is_empty() {
        let note = if h_lo {
            "claim holds on the whole interval; returning the upper end"
        } else {
            "claim fails on the whole interval; returning the lower end"
        };
        let t = if h_lo { hi } else { lo };
        return Ok(ThresholdReport {
            claim: claim.clone(),
            threshold: t,
            bracket: (t, t),
            holds_at_lo: h_lo,
            holds_at_hi: h_hi,
            note: Some(note.into()),
        });
    }
    let k = changes[0];
    let (mut a, mut b) = (samples[k - 1].0, samples[k].0);
    while b - a > THRESHOLD_PRECISION / 2.0 {
        let mid = 0.5 * (a + b);
        if holds(mid)? == h_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(ThresholdReport {
        claim: claim.clone(),
        threshold: 0.5 * (a + b),
        bracket: (a, b),
        holds_at_lo: h_lo,
        holds_at_hi: h_hi,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;

    fn belief(game: &Game, p: &Profile, i: usize, r: f64, metric: Metric) -> BeliefSet {
        BeliefSet::around(game, p, i, r, metric).unwrap()
    }

    #[test]
    fn trembling_up_left_all_true() {
        let g = games::trembling_hand();
        let p = Profile::pure(&g, &[0, 0]);
        let grid = GridSpec::new(0.01).unwrap();
        let c = oracle_classify(&g, 0, p.strategy(0), &belief(&g, &p, 0, 0.1, Metric::LinfProduct), &grid)
            .unwrap()
            .classification;
        assert!(c.is_w && c.is_b && c.is_wr && c.is_u && c.is_d && c.is_sd);
        assert!((c.worst_value - 1.0).abs() < 1e-12 && (c.best_value - 1.1).abs() < 1e-12);
    }

    #[test]
    fn pennies_center() {
        let g = games::matching_pennies();
        let u = MixedStrategy::uniform(2);
        let p = Profile::new(vec![u.clone(), u]);
        let grid = GridSpec::new(0.01).unwrap();
        let c = oracle_classify(&g, 0, p.strategy(0), &belief(&g, &p, 0, 0.2, Metric::LinfProduct), &grid)
            .unwrap()
            .classification;
        assert!(c.is_u && !c.is_d);
    }

    #[test]
    fn zero_radius_is_best_response() {
        let g = games::stag_hunt();
        let p = Profile::pure(&g, &[1, 0]);
        let grid = GridSpec::new(0.05).unwrap().with_tolerance(1e-12);
        let c = oracle_classify(&g, 0, p.strategy(0), &belief(&g, &p, 0, 0.0, Metric::L2Concat), &grid)
            .unwrap()
            .classification;
        // Hare earns 3 against Stag while Stag earns 5
        assert!(!c.is_w && !c.is_b && !c.is_wr);
        assert_eq!(c.worst_regret, 2.0);
    }

    #[test]
    fn stag_threshold() {
        let g = games::stag_hunt();
        let grid = GridSpec::new(0.01).unwrap().with_tolerance(1e-9);
        let claim = ThresholdClaim {
            profile: Profile::pure(&g, &[0, 0]),
            notion: Notion::W,
            metric: Metric::LinfProduct,
        };
        let rep = oracle_threshold(&g, &claim, 0.0, 1.0, &grid).unwrap();
        assert!((rep.threshold - 0.5).abs() < THRESHOLD_PRECISION);
        let claim = ThresholdClaim {
            profile: Profile::pure(&g, &[1, 1]),
            ..claim
        };
        let rep = oracle_threshold(&g, &claim, 0.0, 1.0, &grid).unwrap();
        assert_eq!(rep.threshold, 1.0);
        assert!(rep.note.is_some());
    }

    #[test]
    fn cost_guard() {
        let g = games::constant(&[2, 2, 2], 1.0).unwrap();
        let p = Profile::pure(&g, &[0, 0, 0]);
        let b = belief(&g, &p, 0, 0.1, Metric::LinfProduct);
        assert!(matches!(
            oracle_classify(&g, 0, p.strategy(0), &b, &GridSpec::new(0.1).unwrap()),
            Err(Error::CostGuard(_))
        ));
    }
}
