//! Finite evidence ladders for trembling-hand style refinements.
//!
//! Sequence-quantified notions cannot be decided by finite computation. A
//! ladder evaluates best responses along a few built-in perturbation families
//! at shrinking magnitudes and reports evidence, never a certificate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, Profile};
use crate::metric::{BeliefSet, Metric};
use crate::response::{ResponseContext, SolverSettings};

/// Rungs from this index on count as "sufficiently small".
pub const TAIL_START: usize = 20;

pub fn default_schedule() -> Vec<f64> {
    (1..=40).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LadderVerdict {
    Supported,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Every opponent mixes with the uniform strategy.
    Uniform,
    /// Opponent `j` trembles mostly toward `target[j]`, with second-order
    /// uniform noise keeping the profile totally mixed.
    Skewed { target: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RungResult {
    pub epsilon: f64,
    /// Per player: largest gain of a pure deviation over the equilibrium strategy.
    pub margins: Vec<f64>,
    pub best_response: Vec<bool>,
    pub strict: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyResult {
    pub family: Family,
    pub rungs: Vec<RungResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderFailure {
    pub family: Family,
    pub rung: usize,
    pub epsilon: f64,
    pub player: usize,
    pub better_action: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub profile: Profile,
    pub schedule: Vec<f64>,
    pub families: Vec<FamilyResult>,
    pub verdict: LadderVerdict,
    /// Strict best response for every player on every rung of every family.
    pub strict_everywhere: bool,
    /// Strict best response on every tail rung of every family.
    pub strict_in_tail: bool,
    pub failure: Option<LadderFailure>,
    pub note: &'static str,
}

fn perturb(s: &MixedStrategy, family: &Family, j: usize, eps: f64) -> Vec<f64> {
    let m = s.len();
    let u = 1.0 / m as f64;
    let noise: Vec<f64> = match family {
        Family::Uniform => vec![u; m],
        Family::Skewed { target } => (0..m)
            .map(|a| (1.0 - eps) * if a == target[j] { 1.0 } else { 0.0 } + eps * u)
            .collect(),
    };
    s.probs().iter().zip(noise).map(|(p, q)| (1.0 - eps) * p + eps * q).collect()
}

/// Gain of each pure action of `player` over `own` against independent
/// opponents `probs`, with a floating-point error bound per gain.
fn deviation_gains(game: &Game, player: usize, own: &MixedStrategy, probs: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let m = game.num_actions(player);
    let mut gains = vec![(0.0, 0.0); m];
    for a in game.pure_profiles() {
        if a[player] != 0 {
            continue;
        }
        let mut w = 1.0;
        for (j, p) in probs.iter().enumerate() {
            if j != player {
                w *= p[a[j]];
            }
        }
        if w == 0.0 {
            continue;
        }
        let mut b = a.clone();
        let mut vals = vec![0.0; m];
        for (k, v) in vals.iter_mut().enumerate() {
            b[player] = k;
            *v = game.payoff(player, &b);
        }
        // pure strategies give an exact base value
        let (base, base_err) = match own.pure_action() {
            Some(a) => (vals[a], 0.0),
            None => {
                let b: f64 = own.probs().iter().zip(&vals).map(|(p, v)| p * v).sum();
                let mag: f64 = own.probs().iter().zip(&vals).map(|(p, v)| (p * v).abs()).sum();
                (b, m as f64 * mag)
            }
        };
        for k in 0..m {
            let d = vals[k] - base;
            gains[k].0 += d * w;
            gains[k].1 += (d.abs() + base_err) * w;
        }
    }
    let n = game.num_profiles() as f64;
    gains
        .into_iter()
        .map(|(g, s)| (g, 4.0 * (n + m as f64) * f64::EPSILON * s))
        .collect()
}

fn evaluate(game: &Game, profile: &Profile, family: &Family, eps: f64) -> RungResult {
    let probs: Vec<Vec<f64>> = (0..game.num_players())
        .map(|j| perturb(profile.strategy(j), family, j, eps))
        .collect();
    let mut out = RungResult {
        epsilon: eps,
        margins: Vec::new(),
        best_response: Vec::new(),
        strict: Vec::new(),
    };
    for i in 0..game.num_players() {
        let own = profile.strategy(i);
        let gains = deviation_gains(game, i, own, &probs);
        let margin = gains.iter().map(|g| g.0).fold(f64::NEG_INFINITY, f64::max);
        out.margins.push(margin);
        out.best_response.push(gains.iter().all(|(g, err)| *g <= *err));
        let strict = match own.pure_action() {
            Some(a) => gains.iter().enumerate().all(|(k, (g, err))| k == a || *g < -*err),
            None => false,
        };
        out.strict.push(strict);
    }
    out
}

fn families(game: &Game) -> Vec<Family> {
    std::iter::once(Family::Uniform)
        .chain(game.pure_profiles().map(|target| Family::Skewed { target }))
        .collect()
}

pub fn trembling_ladder(game: &Game, profile: &Profile, schedule: &[f64]) -> Result<LadderReport> {
    game.check_profile(profile)?;
    if schedule.is_empty() || schedule.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidParameter("ladder schedule needs magnitudes in (0, 1)".into()));
    }
    let fams: Vec<FamilyResult> = families(game)
        .into_iter()
        .map(|family| FamilyResult {
            rungs: schedule.iter().map(|&e| evaluate(game, profile, &family, e)).collect(),
            family,
        })
        .collect();
    let n = game.num_players();
    let all_br = fams.iter().all(|f| f.rungs.iter().all(|r| r.best_response.iter().all(|&b| b)));
    let tail = TAIL_START.min(schedule.len() - 1);
    let refuting_player = (0..n).find(|&i| {
        fams.iter()
            .all(|f| f.rungs[tail..].iter().all(|r| !r.best_response[i]))
    });
    let verdict = if all_br {
        LadderVerdict::Supported
    } else if refuting_player.is_some() {
        LadderVerdict::Refuted
    } else {
        LadderVerdict::Inconclusive
    };
    let failure = fams.iter().find_map(|f| {
        f.rungs.iter().enumerate().find_map(|(k, r)| {
            let i = match refuting_player {
                Some(i) if k >= tail && !r.best_response[i] => i,
                Some(_) => return None,
                None => r.best_response.iter().position(|b| !b)?,
            };
            let probs: Vec<Vec<f64>> = (0..n)
                .map(|j| perturb(profile.strategy(j), &f.family, j, r.epsilon))
                .collect();
            let gains = deviation_gains(game, i, profile.strategy(i), &probs);
            let (better, g) = gains
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .expect("nonempty");
            Some(LadderFailure {
                family: f.family.clone(),
                rung: k + 1,
                epsilon: r.epsilon,
                player: i,
                better_action: better,
                margin: g.0,
            })
        })
    });
    let strict_everywhere = fams.iter().all(|f| f.rungs.iter().all(|r| r.strict.iter().all(|&s| s)));
    let strict_in_tail = fams.iter().all(|f| f.rungs[tail..].iter().all(|r| r.strict.iter().all(|&s| s)));
    Ok(LadderReport {
        profile: profile.clone(),
        schedule: schedule.to_vec(),
        families: fams,
        verdict,
        strict_everywhere,
        strict_in_tail,
        failure,
        note: "finite evidence along built-in perturbation families, not a certificate",
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfectionCheck {
    pub nash: bool,
    /// Per player: not weakly dominated by any mixed strategy.
    pub undominated: Vec<bool>,
    pub perfect: bool,
    pub note: &'static str,
}

/// Exact two-player check: perfect iff Nash in undominated strategies.
pub fn two_player_perfection(game: &Game, profile: &Profile, settings: &SolverSettings) -> Result<PerfectionCheck> {
    game.check_profile(profile)?;
    if game.num_players() != 2 {
        return Err(Error::Capability("the undominated-Nash characterisation holds for two players only".into()));
    }
    let mut undominated = Vec::new();
    for i in 0..2 {
        // a ball covering the whole simplex
        let belief = BeliefSet::new(i, profile.opponents(i), 1.0, Metric::LinfProduct)?;
        let ctx = ResponseContext::new(game, belief, *settings)?;
        undominated.push(ctx.dominator(profile.strategy(i))?.is_none());
    }
    let nash = (0..2).all(|i| {
        let v = game.action_values(i, &profile.opponents(i));
        let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        profile.strategy(i).dot(&v) >= best - settings.tol
    });
    Ok(PerfectionCheck {
        perfect: nash && undominated.iter().all(|&u| u),
        nash,
        undominated,
        note: "standard two-player characterisation, imported from classical theory",
    })
}
