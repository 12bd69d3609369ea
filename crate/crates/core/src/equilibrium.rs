//! Distance-based equilibria, Nash baselines and robust equilibria.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, Profile};
use crate::lp::solve_dense;
use crate::metric::{noisy_variant_vertices, BeliefSet, Metric};
use crate::response::{Notion, ResponseClassification, ResponseContext, SolverSettings};

/// Per-notion equilibrium flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct EquilibriumFlags {
    #[serde(rename = "W")]
    pub w: bool,
    #[serde(rename = "B")]
    pub b: bool,
    #[serde(rename = "WR")]
    pub wr: bool,
    #[serde(rename = "U")]
    pub u: bool,
    #[serde(rename = "D")]
    pub d: bool,
    #[serde(rename = "SD")]
    pub sd: bool,
}

impl EquilibriumFlags {
    pub fn get(&self, notion: Notion) -> Option<bool> {
        match notion {
            Notion::Nash => None,
            Notion::W => Some(self.w),
            Notion::B => Some(self.b),
            Notion::WR => Some(self.wr),
            Notion::U => Some(self.u),
            Notion::D => Some(self.d),
            Notion::SD => Some(self.sd),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub profile: Profile,
    pub radii: Vec<f64>,
    pub metric: Metric,
    pub per_player: Vec<ResponseClassification>,
    pub flags: EquilibriumFlags,
    pub nash: bool,
    pub exact: bool,
}

impl EquilibriumReport {
    pub fn flag(&self, notion: Notion) -> bool {
        match notion {
            Notion::Nash => self.nash,
            other => self.flags.get(other).unwrap_or(false),
        }
    }

    /// Lattice implications between equilibrium flags that follow from the
    /// response-level implications without any uniqueness assumption.
    pub fn lattice_violations(&self) -> Vec<&'static str> {
        let f = &self.flags;
        let mut out = Vec::new();
        if f.sd && !f.d {
            out.push("SD => D");
        }
        if f.d && !(f.w && f.b && f.wr) {
            out.push("D => W, B, WR");
        }
        out
    }
}

fn check_radii(game: &Game, radii: &[f64]) -> Result<()> {
    if radii.len() != game.num_players() {
        return Err(Error::InvalidParameter(format!(
            "{} radii given for {} players",
            radii.len(),
            game.num_players()
        )));
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::InvalidParameter(format!("radius {r} is not a nonnegative number")));
    }
    Ok(())
}

/// Same radius for every player.
pub fn uniform_radii(game: &Game, r: f64) -> Vec<f64> {
    vec![r; game.num_players()]
}

fn context<'g>(
    game: &'g Game,
    profile: &Profile,
    player: usize,
    radius: f64,
    metric: Metric,
    settings: &SolverSettings,
) -> Result<ResponseContext<'g>> {
    let belief = BeliefSet::new(player, profile.opponents(player), radius, metric)?;
    ResponseContext::new(game, belief, *settings)
}

fn is_nash(game: &Game, profile: &Profile, tol: f64) -> bool {
    (0..game.num_players()).all(|i| {
        let values = game.action_values(i, &profile.opponents(i));
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        profile.strategy(i).dot(&values) >= best - tol
    })
}

pub fn verify_equilibrium(
    game: &Game,
    profile: &Profile,
    radii: &[f64],
    metric: Metric,
    settings: &SolverSettings,
) -> Result<EquilibriumReport> {
    game.check_profile(profile)?;
    check_radii(game, radii)?;
    let mut per_player = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let c = context(game, profile, i, radii[i], metric, settings)
            .and_then(|ctx| ctx.classify(profile.strategy(i)))
            .map_err(|e| e.for_player(i))?;
        per_player.push(c);
    }
    let all = |f: fn(&ResponseClassification) -> bool| per_player.iter().all(f);
    let flags = EquilibriumFlags {
        w: all(|c| c.is_w),
        b: all(|c| c.is_b),
        wr: all(|c| c.is_wr),
        u: all(|c| c.is_u),
        d: all(|c| c.is_d),
        sd: all(|c| c.is_sd),
    };
    Ok(EquilibriumReport {
        nash: is_nash(game, profile, settings.tol),
        exact: per_player.iter().all(|c| c.exact),
        profile: profile.clone(),
        radii: radii.to_vec(),
        metric,
        per_player,
        flags,
    })
}

/// Decides a single notion, stopping at the first player that fails.
pub fn satisfies_equilibrium(
    game: &Game,
    profile: &Profile,
    radii: &[f64],
    metric: Metric,
    notion: Notion,
    settings: &SolverSettings,
) -> Result<bool> {
    game.check_profile(profile)?;
    check_radii(game, radii)?;
    if notion == Notion::Nash {
        return Ok(is_nash(game, profile, settings.tol));
    }
    for i in 0..game.num_players() {
        let ok = context(game, profile, i, radii[i], metric, settings)
            .and_then(|ctx| ctx.satisfies(profile.strategy(i), notion))
            .map_err(|e| e.for_player(i))?;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All pure profiles that are equilibria for `notion`, in lexicographic order.
pub fn enumerate_pure(
    game: &Game,
    radii: &[f64],
    metric: Metric,
    notion: Notion,
    settings: &SolverSettings,
) -> Result<Vec<Vec<usize>>> {
    check_radii(game, radii)?;
    let profiles: Vec<Vec<usize>> = game.pure_profiles().collect();
    let verdicts: Vec<Result<bool>> = profiles
        .par_iter()
        .map(|a| satisfies_equilibrium(game, &Profile::pure(game, a), radii, metric, notion, settings))
        .collect();
    let mut out = Vec::new();
    for (a, v) in profiles.into_iter().zip(verdicts) {
        if v? {
            out.push(a);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashEquilibrium {
    pub profile: Profile,
    pub totally_mixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportEnumeration {
    pub equilibria: Vec<NashEquilibrium>,
    /// Support pairs whose indifference system was singular and was skipped.
    pub degenerate_supports: usize,
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << m) {
        if mask.count_ones() as usize == k {
            out.push((0..m).filter(|&a| mask >> a & 1 == 1).collect());
        }
    }
    out
}

/// Mixes `support` of the opponent so that every action in `own` earns the
/// same payoff `v` under `pay(own_action, opp_action)`.
fn indifference(
    pay: &dyn Fn(usize, usize) -> f64,
    own: &[usize],
    support: &[usize],
    m_opp: usize,
) -> Option<(Vec<f64>, f64)> {
    let k = own.len();
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    for &i in own {
        let mut row: Vec<f64> = support.iter().map(|&j| pay(i, j)).collect();
        row.push(-1.0);
        a.push(row);
        b.push(0.0);
    }
    let mut sum = vec![1.0; k];
    sum.push(0.0);
    a.push(sum);
    b.push(1.0);
    let sol = solve_dense(&a, &b)?;
    let mut y = vec![0.0; m_opp];
    for (idx, &j) in support.iter().enumerate() {
        y[j] = sol[idx];
    }
    Some((y, sol[k]))
}

/// All Nash equilibria of a two-player game with equal-size supports.
pub fn nash_support_enumeration(game: &Game, tol: f64) -> Result<SupportEnumeration> {
    if game.num_players() != 2 {
        return Err(Error::Capability("support enumeration needs exactly two players".into()));
    }
    let (m0, m1) = (game.num_actions(0), game.num_actions(1));
    if m0.max(m1) > 8 {
        return Err(Error::CostGuard(format!("support enumeration limited to 8 actions, got {m0}x{m1}")));
    }
    let u0 = |a: usize, b: usize| game.payoff(0, &[a, b]);
    let u1 = |b: usize, a: usize| game.payoff(1, &[a, b]);
    let mut found: Vec<NashEquilibrium> = Vec::new();
    let mut degenerate = 0;
    for k in 1..=m0.min(m1) {
        for s0 in subsets(m0, k) {
            for s1 in subsets(m1, k) {
                // column mix making row indifferent on s0, and vice versa
                let (Some((y, v0)), Some((x, v1))) =
                    (indifference(&u0, &s0, &s1, m1), indifference(&u1, &s1, &s0, m0))
                else {
                    degenerate += 1;
                    continue;
                };
                if x.iter().chain(&y).any(|&p| p < -tol) {
                    continue;
                }
                let (Ok(xs), Ok(ys)) = (MixedStrategy::from_approx(x), MixedStrategy::from_approx(y)) else {
                    continue;
                };
                let row_vals = game.action_values(0, std::slice::from_ref(&ys));
                let col_vals = game.action_values(1, std::slice::from_ref(&xs));
                if row_vals.iter().any(|&u| u > v0 + tol) || col_vals.iter().any(|&u| u > v1 + tol) {
                    continue;
                }
                let profile = Profile::new(vec![xs, ys]);
                let dup = found.iter().any(|e| {
                    e.profile
                        .strategies()
                        .iter()
                        .zip(profile.strategies())
                        .all(|(a, b)| a.max_abs_diff(b) <= 1e-9)
                });
                if !dup {
                    found.push(NashEquilibrium {
                        totally_mixed: profile.strategies().iter().all(MixedStrategy::is_totally_mixed),
                        profile,
                    });
                }
            }
        }
    }
    Ok(SupportEnumeration {
        equilibria: found,
        degenerate_supports: degenerate,
    })
}

/// Barycentric grid on the simplex with `1/resolution` steps.
pub fn simplex_grid(m: usize, resolution: f64) -> Result<Vec<MixedStrategy>> {
    if !(resolution > 0.0 && resolution <= 0.25) {
        return Err(Error::InvalidParameter(format!(
            "resolution must lie in (0, 0.25], got {resolution}"
        )));
    }
    let n = (1.0 / resolution).round() as usize;
    let mut out = Vec::new();
    let mut acc = Vec::with_capacity(m);
    fill_grid(m, n, n, &mut acc, &mut out);
    Ok(out)
}

fn fill_grid(m: usize, n: usize, left: usize, acc: &mut Vec<usize>, out: &mut Vec<MixedStrategy>) {
    if acc.len() + 1 == m {
        acc.push(left);
        let probs = acc.iter().map(|&k| k as f64 / n as f64).collect();
        out.push(MixedStrategy::from_approx(probs).expect("grid point on simplex"));
        acc.pop();
        return;
    }
    for k in (0..=left).rev() {
        acc.push(k);
        fill_grid(m, n, left - k, acc, out);
        acc.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "message", rename_all = "lowercase")]
pub enum SearchStatus {
    Ok,
    Warning(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchReport {
    pub notion: Notion,
    pub resolution: f64,
    /// Verdict tolerance used at grid points.
    pub grid_tolerance: f64,
    pub candidates: Vec<Profile>,
    pub status: SearchStatus,
}

/// Scans the product grid of mixed profiles of a small two-player game.
pub fn grid_search_mixed(
    game: &Game,
    radii: &[f64],
    metric: Metric,
    notion: Notion,
    resolution: f64,
    settings: &SolverSettings,
) -> Result<GridSearchReport> {
    check_radii(game, radii)?;
    if game.num_players() != 2 || game.shape().iter().any(|&m| m > 3) {
        return Err(Error::CostGuard(format!(
            "grid search supports two players with at most 3 actions, got shape {:?}",
            game.shape()
        )));
    }
    let grids = [
        simplex_grid(game.num_actions(0), resolution)?,
        simplex_grid(game.num_actions(1), resolution)?,
    ];
    let grid_tol = game.payoff_spread() * resolution;
    let st = SolverSettings {
        tol: grid_tol.max(settings.tol),
        iterative_tol: grid_tol.max(settings.iterative_tol),
        ..*settings
    };
    // ok[i][opp][own]: own grid strategy of player i responds correctly to opponent grid point
    let mut ok: Vec<Vec<Vec<bool>>> = Vec::with_capacity(2);
    for i in 0..2 {
        let (own, opp) = (&grids[i], &grids[1 - i]);
        let rows: Vec<Result<Vec<bool>>> = opp
            .par_iter()
            .map(|y| {
                let belief = BeliefSet::new(i, vec![y.clone()], radii[i], metric)?;
                let ctx = ResponseContext::new(game, belief, st)?;
                own.iter().map(|x| ctx.satisfies(x, notion)).collect()
            })
            .collect();
        ok.push(rows.into_iter().collect::<Result<_>>().map_err(|e| e.for_player(i))?);
    }
    let mut candidates = Vec::new();
    for (a, x) in grids[0].iter().enumerate() {
        for (b, y) in grids[1].iter().enumerate() {
            if ok[0][b][a] && ok[1][a][b] {
                candidates.push(Profile::new(vec![x.clone(), y.clone()]));
            }
        }
    }
    let status = if candidates.is_empty() && matches!(notion, Notion::W | Notion::B | Notion::WR) {
        SearchStatus::Warning(format!(
            "no {notion} equilibrium found although one always exists; suspected solver bug or too coarse a grid"
        ))
    } else {
        SearchStatus::Ok
    };
    Ok(GridSearchReport {
        notion,
        resolution,
        grid_tolerance: st.tol,
        candidates,
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustViolation {
    pub player: usize,
    pub vertex: Vec<MixedStrategy>,
    pub better_action: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustReport {
    pub epsilon: f64,
    pub robust: bool,
    pub violation: Option<RobustViolation>,
}

/// Whether every pure action stays a best response against every noisy
/// variant of the others' actions at level `epsilon`.
pub fn robust_check(game: &Game, actions: &[usize], epsilon: f64, tol: f64) -> Result<RobustReport> {
    if actions.len() != game.num_players() || actions.iter().zip(game.shape()).any(|(a, m)| *a >= m) {
        return Err(Error::Shape("pure profile does not match the game".into()));
    }
    for i in 0..game.num_players() {
        let opp: Vec<usize> = game.opponent_indices(i).map(|j| actions[j]).collect();
        let sizes: Vec<usize> = game.opponent_indices(i).map(|j| game.num_actions(j)).collect();
        for v in noisy_variant_vertices(&opp, &sizes, epsilon)?.vertices {
            let values = game.action_values(i, &v);
            let own = values[actions[i]];
            let (best, &bv) = values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty action set");
            if bv > own + tol {
                return Ok(RobustReport {
                    epsilon,
                    robust: false,
                    violation: Some(RobustViolation {
                        player: i,
                        vertex: v,
                        better_action: best,
                        margin: bv - own,
                    }),
                });
            }
        }
    }
    Ok(RobustReport {
        epsilon,
        robust: true,
        violation: None,
    })
}
