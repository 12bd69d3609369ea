//! Social welfare: price of anarchy, consensus games, utility ratios within
//! belief balls and smoothness certificates.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{enumerate_pure, grid_search_mixed};
use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, Profile};
use crate::lp::{LinearProgram, Relation};
use crate::metric::{distance, Metric};
use crate::random::{random_strategy, task_rng};
use crate::response::{Notion, SolverSettings};

pub fn consensus_generate(actions: &[usize], c: f64, c_prime: f64, consensus: &[usize]) -> Result<Game> {
    if !(c.is_finite() && c_prime.is_finite()) || c_prime <= c {
        return Err(Error::InvalidParameter(format!(
            "consensus payoff c'={c_prime} must exceed c={c}"
        )));
    }
    if actions.len() < 2 || actions.iter().any(|&m| m < 2) {
        return Err(Error::InvalidParameter(
            "consensus games need at least two players with at least two actions each".into(),
        ));
    }
    if consensus.len() != actions.len() || consensus.iter().zip(actions).any(|(a, m)| a >= m) {
        return Err(Error::Shape("consensus profile does not match the action counts".into()));
    }
    let total: usize = actions.iter().product();
    let mut tensor = vec![c; total];
    let idx = consensus.iter().zip(actions).fold(0, |acc, (a, m)| acc * m + a);
    tensor[idx] = c_prime;
    Ok(Game::from_shape(actions, vec![tensor; actions.len()])?.with_name("consensus"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusShape {
    pub consensus: Vec<usize>,
    pub c: f64,
    pub c_prime: f64,
}

/// Recognises a consensus game: identical payoffs for everyone, one profile
/// paying `c'` and all others `c < c'`.
pub fn detect_consensus(game: &Game) -> Option<ConsensusShape> {
    let base = game.payoff_tensor(0);
    if (1..game.num_players()).any(|i| game.payoff_tensor(i) != base) || game.shape().iter().any(|&m| m < 2) {
        return None;
    }
    let hi = game.max_payoff();
    let lo = game.min_payoff();
    let top: Vec<usize> = (0..base.len()).filter(|&k| base[k] == hi).collect();
    if hi <= lo || top.len() != 1 || base.iter().any(|&v| v != hi && v != lo) {
        return None;
    }
    Some(ConsensusShape {
        consensus: game.unflatten(top[0]),
        c: lo,
        c_prime: hi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum PoaStatus {
    Defined,
    Undefined { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfarePoint {
    pub profile: Profile,
    pub welfare: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoaReport {
    pub notion: Option<Notion>,
    pub radii: Vec<f64>,
    pub max_sw: f64,
    pub equilibria: Vec<WelfarePoint>,
    pub poa: Option<f64>,
    pub status: PoaStatus,
}

/// Ratio of the best achievable welfare to the worst equilibrium welfare.
pub fn poa(game: &Game, equilibria: &[Profile], candidates: &[Profile], notion: Option<Notion>, radii: &[f64]) -> Result<PoaReport> {
    let mut max_sw = game.pure_profiles().map(|a| game.pure_social_welfare(&a)).fold(f64::NEG_INFINITY, f64::max);
    for p in candidates.iter().chain(equilibria) {
        max_sw = max_sw.max(game.social_welfare(p)?);
    }
    let points: Vec<WelfarePoint> = equilibria
        .iter()
        .map(|p| Ok(WelfarePoint { profile: p.clone(), welfare: game.social_welfare(p)? }))
        .collect::<Result<_>>()?;
    let min_sw = points.iter().map(|p| p.welfare).fold(f64::INFINITY, f64::min);
    let (value, status) = if points.is_empty() {
        (None, PoaStatus::Undefined { reason: "empty equilibrium set".into() })
    } else if min_sw <= 0.0 || max_sw <= 0.0 {
        (None, PoaStatus::Undefined { reason: "nonpositive social welfare".into() })
    } else {
        (Some(max_sw / min_sw), PoaStatus::Defined)
    };
    Ok(PoaReport {
        notion,
        radii: radii.to_vec(),
        max_sw,
        equilibria: points,
        poa: value,
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusAudit {
    pub shape: ConsensusShape,
    pub d_equilibria: Vec<Vec<usize>>,
    pub unique_d: bool,
    /// Mixed grid profiles passing the D test away from the consensus profile.
    pub stray_mixed: Vec<Profile>,
    /// False when the game is too large for the mixed grid scan.
    pub grid_checked: bool,
    pub poa: PoaReport,
    pub passed: bool,
}

pub const CONSENSUS_GRID: f64 = 0.05;

pub fn consensus_audit(game: &Game, radii: &[f64], metric: Metric, settings: &SolverSettings) -> Result<ConsensusAudit> {
    let shape = detect_consensus(game).ok_or_else(|| Error::Shape("not a consensus game".into()))?;
    if radii.len() != game.num_players() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("consensus audit needs a positive radius for every player".into()));
    }
    let d_equilibria = enumerate_pure(game, radii, metric, Notion::D, settings)?;
    let unique_d = d_equilibria == vec![shape.consensus.clone()];
    let grid_checked = game.num_players() == 2 && game.shape().iter().all(|&m| m <= 3);
    let mut stray_mixed = Vec::new();
    if grid_checked {
        let target = Profile::pure(game, &shape.consensus);
        let rep = grid_search_mixed(game, radii, metric, Notion::D, CONSENSUS_GRID, settings)?;
        stray_mixed = rep
            .candidates
            .into_iter()
            .filter(|p| {
                p.strategies()
                    .iter()
                    .zip(target.strategies())
                    .any(|(a, b)| a.max_abs_diff(b) > CONSENSUS_GRID + 1e-9)
            })
            .collect();
    }
    let eq: Vec<Profile> = d_equilibria.iter().map(|a| Profile::pure(game, a)).collect();
    let poa = poa(game, &eq, &[], Some(Notion::D), radii)?;
    let passed = unique_d && stray_mixed.is_empty() && poa.poa == Some(1.0);
    Ok(ConsensusAudit {
        shape,
        d_equilibria,
        unique_d,
        stray_mixed,
        grid_checked,
        poa,
        passed,
    })
}

fn require_positive(game: &Game) -> Result<()> {
    let lo = game.min_payoff();
    if lo <= 0.0 {
        return Err(Error::Positivity(format!(
            "minimum payoff is {lo}; shift payoffs to be positive first, keeping in mind that utility ratios change under shifts"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaWitness {
    pub player: usize,
    pub action: usize,
    pub center: Vec<MixedStrategy>,
    pub point: Vec<MixedStrategy>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub r: f64,
    pub metric: Metric,
    pub samples: usize,
    pub lower_estimate: f64,
    pub upper_bound: f64,
    pub witness: Option<DeltaWitness>,
}

pub const MIN_DELTA_SAMPLES: usize = 1000;

struct RaySample {
    player: usize,
    action: usize,
    center: Vec<MixedStrategy>,
    target: Vec<MixedStrategy>,
}

fn pure_opponents(game: &Game, player: usize, a: &[usize]) -> Vec<MixedStrategy> {
    game.opponent_indices(player)
        .map(|j| MixedStrategy::pure(game.num_actions(j), a[j]))
        .collect()
}

/// Deterministic corner rays first, then random rays from `(seed, k)`.
fn ray_sample(game: &Game, seed: u64, k: usize, corners: &[(usize, usize, Vec<usize>, Vec<usize>)]) -> RaySample {
    if let Some((i, a, c, t)) = corners.get(k) {
        return RaySample {
            player: *i,
            action: *a,
            center: pure_opponents(game, *i, c),
            target: pure_opponents(game, *i, t),
        };
    }
    let mut rng = task_rng(seed, k as u64);
    let n = game.num_players();
    let player = rng.gen_range(0..n);
    let action = rng.gen_range(0..game.num_actions(player));
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, j: usize| {
        let m = game.num_actions(j);
        if rng.gen_bool(0.5) {
            MixedStrategy::pure(m, rng.gen_range(0..m))
        } else {
            random_strategy(rng, m)
        }
    };
    let center = game.opponent_indices(player).map(|j| draw(&mut rng, j)).collect();
    let target = game.opponent_indices(player).map(|j| draw(&mut rng, j)).collect();
    RaySample {
        player,
        action,
        center,
        target,
    }
}

fn along(center: &[MixedStrategy], target: &[MixedStrategy], t: f64) -> Vec<MixedStrategy> {
    center
        .iter()
        .zip(target)
        .map(|(c, x)| {
            let p = c.probs().iter().zip(x.probs()).map(|(a, b)| a + t * (b - a)).collect();
            MixedStrategy::from_approx(p).expect("segment inside the simplex")
        })
        .collect()
}

/// Largest two-sided ratio between the center and a point of the ray
/// segment inside the ball, with the parameter of the maximising point.
fn ray_ratio(game: &Game, s: &RaySample, r: f64, metric: Metric) -> Result<(f64, f64)> {
    let d = distance(metric, &s.center, &s.target)?;
    if d == 0.0 || r == 0.0 {
        return Ok((1.0, 0.0));
    }
    let reach = (r / d).min(1.0);
    let u = |t: f64| game.action_values(s.player, &along(&s.center, &s.target, t))[s.action];
    let u0 = u(0.0);
    let mut ts = vec![reach];
    // utility along the ray is a polynomial of degree n - 1
    match game.num_players() {
        2 => {}
        3 => {
            let (a, b, c) = (u0, u(reach / 2.0), u(reach));
            let curv = 2.0 * (c - 2.0 * b + a) / (reach * reach);
            let slope = (4.0 * b - 3.0 * a - c) / reach;
            if curv != 0.0 {
                let t = -slope / curv;
                if t > 0.0 && t < reach {
                    ts.push(t);
                }
            }
        }
        _ => ts.extend((1..64).map(|k| reach * k as f64 / 64.0)),
    }
    let mut best = (1.0, 0.0);
    for t in ts {
        let v = u(t);
        let ratio = (v / u0).max(u0 / v);
        if ratio > best.0 {
            best = (ratio, t);
        }
    }
    Ok(best)
}

pub fn delta_estimate(game: &Game, r: f64, metric: Metric, samples: usize, seed: u64) -> Result<DeltaEstimate> {
    require_positive(game)?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius {r} is not a nonnegative number")));
    }
    if samples < MIN_DELTA_SAMPLES {
        return Err(Error::InvalidParameter(format!("at least {MIN_DELTA_SAMPLES} samples required, got {samples}")));
    }
    let upper = if r == 0.0 { 1.0 } else { game.max_payoff() / game.min_payoff() };
    if r == 0.0 {
        return Ok(DeltaEstimate {
            r,
            metric,
            samples,
            lower_estimate: 1.0,
            upper_bound: 1.0,
            witness: None,
        });
    }
    let mut corners = Vec::new();
    for i in 0..game.num_players() {
        for a in 0..game.num_actions(i) {
            for c in game.pure_profiles().filter(|p| p[i] == 0) {
                for t in game.pure_profiles().filter(|p| p[i] == 0 && p != &c) {
                    corners.push((i, a, c.clone(), t));
                }
            }
        }
    }
    let results: Vec<Result<(f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|k| ray_ratio(game, &ray_sample(game, seed, k, &corners), r, metric))
        .collect();
    let mut best = (1.0, usize::MAX, 0.0);
    for (k, res) in results.into_iter().enumerate() {
        let (ratio, t) = res?;
        if ratio > best.0 {
            best = (ratio, k, t);
        }
    }
    let witness = (best.1 != usize::MAX).then(|| {
        let s = ray_sample(game, seed, best.1, &corners);
        DeltaWitness {
            player: s.player,
            action: s.action,
            point: along(&s.center, &s.target, best.2),
            center: s.center,
        }
    });
    Ok(DeltaEstimate {
        r,
        metric,
        samples,
        lower_estimate: best.0.min(upper),
        upper_bound: upper,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessCertificate {
    pub lambda: f64,
    pub mu: f64,
    pub classical_bound: f64,
    /// Profiles `(a, a')` whose constraint is tightest.
    pub binding_pair: (Vec<usize>, Vec<usize>),
    pub min_residual: f64,
}

impl SmoothnessCertificate {
    /// Bound on welfare ratios for pure equilibria under ratio factor `delta`.
    pub fn bound(&self, delta: f64) -> f64 {
        self.lambda / (delta * delta + self.mu)
    }
}

/// Smallest admissible `mu`; the certificate requires `mu > 0`.
const MU_MIN: f64 = 1e-9;

struct SmoothRow {
    deviation: f64,
    sw_prime: f64,
    sw: f64,
    pair: (Vec<usize>, Vec<usize>),
}

fn smoothness_rows(game: &Game) -> Vec<SmoothRow> {
    let profiles: Vec<Vec<usize>> = game.pure_profiles().collect();
    let mut rows = Vec::with_capacity(profiles.len() * profiles.len());
    for a in &profiles {
        for b in &profiles {
            let deviation: f64 = (0..game.num_players())
                .map(|i| {
                    let mut mixed = a.clone();
                    mixed[i] = b[i];
                    game.payoff(i, &mixed)
                })
                .sum();
            rows.push(SmoothRow {
                deviation,
                sw_prime: game.pure_social_welfare(b),
                sw: game.pure_social_welfare(a),
                pair: (a.clone(), b.clone()),
            });
        }
    }
    rows
}

/// Feasible `(lambda, mu)` with `lambda >= t (1 + mu)`, preferring `mu`
/// closest to one.
fn smooth_feasible(rows: &[SmoothRow], t: f64) -> Option<(f64, f64)> {
    // variables: lambda, mu, dev with dev >= |mu - 1|
    let mut lp = LinearProgram::minimize(vec![0.0, 0.0, 1.0]);
    for r in rows {
        lp.constraint(vec![r.sw_prime, -r.sw, 0.0], Relation::Le, r.deviation);
    }
    lp.constraint(vec![1.0, -t, 0.0], Relation::Ge, t);
    lp.constraint(vec![0.0, 1.0, 0.0], Relation::Ge, MU_MIN);
    lp.constraint(vec![0.0, -1.0, 1.0], Relation::Ge, -1.0);
    lp.constraint(vec![0.0, 1.0, 1.0], Relation::Ge, 1.0);
    let (lambda, mu) = lp.solve().ok().map(|s| (s.x[0], s.x[1]))?;
    // accept only solutions that hold without solver slack
    let scale = rows.iter().map(|r| r.sw_prime.abs().max(r.sw.abs())).fold(1.0, f64::max);
    let sound = mu >= MU_MIN
        && lambda >= t * (1.0 + mu) - 1e-12
        && rows.iter().all(|r| r.deviation - lambda * r.sw_prime + mu * r.sw >= -1e-12 * scale);
    sound.then_some((lambda, mu))
}

/// Best classical smoothness certificate over pure profile pairs, or `None`
/// when no positive `(lambda, mu)` exists.
pub fn smoothness_fit(game: &Game) -> Result<Option<SmoothnessCertificate>> {
    if game.min_payoff() < 0.0 {
        return Err(Error::Positivity("smoothness fitting needs nonnegative payoffs".into()));
    }
    if game.pure_profiles().all(|a| game.pure_social_welfare(&a) <= 0.0) {
        return Err(Error::InvalidParameter("no profile has positive social welfare".into()));
    }
    let rows = smoothness_rows(game);
    let mut hi = 1.0f64;
    let mut lo;
    // lambda - mu <= 1 on any profile with positive welfare, so t <= 1
    if smooth_feasible(&rows, hi).is_some() {
        lo = hi;
    } else if smooth_feasible(&rows, 1e-12).is_none() {
        return Ok(None);
    } else {
        lo = 1e-12;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if smooth_feasible(&rows, mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
    }
    // back off from the numerical edge so the preference for mu near one
    // is not crowded out by solver tolerance
    let (lambda, mu) = [1e-9, 1e-8, 1e-7, 0.0]
        .iter()
        .find_map(|b| smooth_feasible(&rows, lo * (1.0 - b)))
        .expect("feasible at the lower end");
    let mut binding = 0;
    let mut min_residual = f64::INFINITY;
    for (k, r) in rows.iter().enumerate() {
        let res = r.deviation - lambda * r.sw_prime + mu * r.sw;
        if res < min_residual {
            min_residual = res;
            binding = k;
        }
    }
    Ok(Some(SmoothnessCertificate {
        lambda,
        mu,
        classical_bound: lambda / (1.0 + mu),
        binding_pair: rows[binding].pair.clone(),
        min_residual,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub equilibrium: Vec<usize>,
    pub other: Vec<usize>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoaBoundReport {
    pub notion: Notion,
    pub radii: Vec<f64>,
    pub metric: Metric,
    pub certificate: SmoothnessCertificate,
    pub delta_upper: f64,
    pub bound: f64,
    pub equilibria: Vec<Vec<usize>>,
    /// Smallest welfare ratio minus the bound over all checked pairs.
    pub min_slack: Option<f64>,
    pub violations: Vec<BoundViolation>,
}

pub const BOUND_TOL: f64 = 1e-9;

pub fn poa_bound_check(game: &Game, radii: &[f64], metric: Metric, notion: Notion, settings: &SolverSettings) -> Result<PoaBoundReport> {
    if !matches!(notion, Notion::U | Notion::D | Notion::W | Notion::B) {
        return Err(Error::InvalidParameter(format!("the welfare bound covers U, D, W and B, not {notion}")));
    }
    require_positive(game)?;
    let certificate = smoothness_fit(game)?
        .ok_or_else(|| Error::InvalidParameter("no smoothness certificate exists for this game".into()))?;
    let r = radii.iter().copied().fold(0.0, f64::max);
    let delta_upper = if r == 0.0 { 1.0 } else { game.max_payoff() / game.min_payoff() };
    let bound = certificate.bound(delta_upper);
    let equilibria = enumerate_pure(game, radii, metric, notion, settings)?;
    let mut min_slack: Option<f64> = None;
    let mut violations = Vec::new();
    for e in &equilibria {
        let sw = game.pure_social_welfare(e);
        for b in game.pure_profiles() {
            let ratio = sw / game.pure_social_welfare(&b);
            let slack = ratio - bound;
            min_slack = Some(min_slack.map_or(slack, |m| m.min(slack)));
            if slack < -BOUND_TOL {
                violations.push(BoundViolation {
                    equilibrium: e.clone(),
                    other: b,
                    ratio,
                });
            }
        }
    }
    Ok(PoaBoundReport {
        notion,
        radii: radii.to_vec(),
        metric,
        certificate,
        delta_upper,
        bound,
        equilibria,
        min_slack,
        violations,
    })
}
