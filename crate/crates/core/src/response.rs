//! Local responses against a belief set: worst case, best case, worst-case
//! regret, and local (un)dominance.

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, OpponentProfile};
use crate::inner::Inner;
use crate::metric::BeliefSet;
use crate::outer::{self, OuterKind, OuterResult};

/// Numeric knobs shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Verdict tolerance on the exact (vertex and linear-programming) path.
    pub tol: f64,
    /// Verdict tolerance on paths that use iterative solvers.
    pub iterative_tol: f64,
    /// Cap on cutting-plane iterations for Euclidean beliefs.
    pub max_cut_iterations: usize,
    /// Relative gap at which the cutting-plane method stops.
    pub cut_gap: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            iterative_tol: 1e-6,
            max_cut_iterations: 500,
            cut_gap: 1e-10,
        }
    }
}

impl SolverSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Notion {
    #[serde(rename = "nash")]
    Nash,
    W,
    B,
    WR,
    U,
    D,
    SD,
}

impl Notion {
    pub const DISTANCE: [Notion; 6] = [Notion::W, Notion::B, Notion::WR, Notion::U, Notion::D, Notion::SD];

    pub fn as_str(self) -> &'static str {
        match self {
            Notion::Nash => "nash",
            Notion::W => "W",
            Notion::B => "B",
            Notion::WR => "WR",
            Notion::U => "U",
            Notion::D => "D",
            Notion::SD => "SD",
        }
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Notion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nash" | "ne" => Ok(Notion::Nash),
            "w" => Ok(Notion::W),
            "b" => Ok(Notion::B),
            "wr" => Ok(Notion::WR),
            "u" => Ok(Notion::U),
            "d" => Ok(Notion::D),
            "sd" => Ok(Notion::SD),
            other => Err(Error::InvalidParameter(format!(
                "unknown notion '{other}', expected one of nash, W, B, WR, U, D, SD"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OuterNotion {
    Maximin,
    Maximax,
    MinWorstRegret,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DominanceRelation {
    Strict,
    Weak,
    None,
}

/// Whether a candidate locally dominates an incumbent on a belief set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceVerdict {
    pub relation: DominanceRelation,
    /// Belief point with the largest advantage of the candidate.
    pub witness_better: Option<OpponentProfile>,
    /// Smallest advantage over the belief set.
    pub margin: f64,
    /// Largest advantage over the belief set.
    pub max_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witnesses {
    pub worst_point: OpponentProfile,
    pub best_point: OpponentProfile,
    pub regret_point: OpponentProfile,
    pub maximin_strategy: MixedStrategy,
    pub maximax_strategy: MixedStrategy,
    pub min_regret_strategy: MixedStrategy,
    /// A strategy that locally dominates the classified one, if any.
    pub dominating_strategy: Option<MixedStrategy>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseClassification {
    pub is_w: bool,
    pub is_b: bool,
    pub is_wr: bool,
    pub is_u: bool,
    pub is_d: bool,
    pub is_sd: bool,
    pub worst_value: f64,
    pub best_value: f64,
    pub worst_regret: f64,
    pub maximin_value: f64,
    pub maximax_value: f64,
    pub min_worst_regret: f64,
    pub witnesses: Witnesses,
    /// False when any iterative solver was involved.
    pub exact: bool,
    pub tolerance: f64,
}

impl ResponseClassification {
    pub fn get(&self, notion: Notion) -> Option<bool> {
        match notion {
            Notion::Nash => None,
            Notion::W => Some(self.is_w),
            Notion::B => Some(self.is_b),
            Notion::WR => Some(self.is_wr),
            Notion::U => Some(self.is_u),
            Notion::D => Some(self.is_d),
            Notion::SD => Some(self.is_sd),
        }
    }

    /// Implications between responses that hold for every strategy.
    pub fn implication_violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.is_sd && !self.is_d {
            out.push("SD => D");
        }
        if self.is_d && !(self.is_w && self.is_b && self.is_wr) {
            out.push("D => W, B, WR");
        }
        out
    }
}

fn unit(m: usize, a: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[a] = 1.0;
    e
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// One player's view of a belief set, with lazily cached outer optima so
/// that many strategies can be classified against the same belief cheaply.
pub struct ResponseContext<'g> {
    game: &'g Game,
    belief: BeliefSet,
    inner: Inner,
    settings: SolverSettings,
    m: usize,
    maximin: OnceCell<Result<OuterResult>>,
    min_regret: OnceCell<Result<OuterResult>>,
    maximax: OnceCell<(f64, usize, OpponentProfile)>,
}

impl<'g> ResponseContext<'g> {
    pub fn new(game: &'g Game, belief: BeliefSet, settings: SolverSettings) -> Result<Self> {
        let inner = Inner::new(game, &belief)?;
        Ok(Self {
            game,
            m: game.num_actions(belief.owner),
            belief,
            inner,
            settings,
            maximin: OnceCell::new(),
            min_regret: OnceCell::new(),
            maximax: OnceCell::new(),
        })
    }

    pub fn player(&self) -> usize {
        self.belief.owner
    }

    pub fn belief(&self) -> &BeliefSet {
        &self.belief
    }

    pub fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    /// Verdict tolerance for this context.
    pub fn tol(&self) -> f64 {
        if self.inner.is_exact() {
            self.settings.tol
        } else {
            self.settings.tol.max(self.settings.iterative_tol)
        }
    }

    fn check(&self, strategy: &MixedStrategy) -> Result<()> {
        self.game.check_strategy(self.player(), strategy)
    }

    pub fn inner_extreme(&self, strategy: &MixedStrategy, sense: Sense) -> Result<(f64, OpponentProfile)> {
        self.check(strategy)?;
        let p = match sense {
            Sense::Min => self.inner.minimize(strategy.probs()),
            Sense::Max => self.inner.maximize(strategy.probs()),
        };
        Ok((p.value, p.point))
    }

    /// Worst-case regret by exchanging the two maximisations.
    pub fn worst_case_regret(&self, strategy: &MixedStrategy) -> Result<(f64, OpponentProfile)> {
        self.check(strategy)?;
        let x = strategy.probs();
        let mut best = (0.0, self.belief.center.clone());
        for a in 0..self.m {
            let p = self.inner.minimize(&diff(x, &unit(self.m, a)));
            if -p.value > best.0 {
                best = (-p.value, p.point);
            }
        }
        Ok(best)
    }

    fn maximin_result(&self) -> Result<&OuterResult> {
        self.maximin
            .get_or_init(|| {
                outer::solve(
                    &self.inner,
                    &OuterKind::Maximin,
                    self.m,
                    self.settings.max_cut_iterations,
                    self.settings.cut_gap,
                )
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn min_regret_result(&self) -> Result<&OuterResult> {
        self.min_regret
            .get_or_init(|| {
                outer::solve(
                    &self.inner,
                    &OuterKind::NegWorstRegret,
                    self.m,
                    self.settings.max_cut_iterations,
                    self.settings.cut_gap,
                )
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn maximax_result(&self) -> &(f64, usize, OpponentProfile) {
        self.maximax.get_or_init(|| {
            let mut best = (f64::NEG_INFINITY, 0, self.belief.center.clone());
            for a in 0..self.m {
                let p = self.inner.maximize(&unit(self.m, a));
                if p.value > best.0 {
                    best = (p.value, a, p.point);
                }
            }
            best
        })
    }

    pub fn outer_optimum(&self, notion: OuterNotion) -> Result<(f64, MixedStrategy)> {
        match notion {
            OuterNotion::Maximin => {
                let r = self.maximin_result()?;
                Ok((r.value, MixedStrategy::from_approx(r.x.clone())?))
            }
            OuterNotion::MinWorstRegret => {
                let r = self.min_regret_result()?;
                Ok(((-r.value).max(0.0), MixedStrategy::from_approx(r.x.clone())?))
            }
            OuterNotion::Maximax => {
                let (v, a, _) = self.maximax_result();
                Ok((*v, MixedStrategy::pure(self.m, *a)))
            }
        }
    }

    /// Whether the optimiser set of `notion` is a single strategy up to
    /// tolerance. `None` when this cannot be decided on the current path.
    pub fn unique_optimum(&self, notion: OuterNotion) -> Result<Option<bool>> {
        let tol = self.tol();
        match notion {
            OuterNotion::Maximax => {
                let (best, _, _) = self.maximax_result();
                let count = (0..self.m)
                    .filter(|&a| self.inner.maximize(&unit(self.m, a)).value >= best - tol)
                    .count();
                Ok(Some(count == 1))
            }
            OuterNotion::Maximin => {
                let r = self.maximin_result()?;
                let w = outer::optimal_face_width(&self.inner, &OuterKind::Maximin, self.m, r.value, tol)?;
                Ok(w.map(|w| w <= 1e-6))
            }
            OuterNotion::MinWorstRegret => {
                let r = self.min_regret_result()?;
                let w = outer::optimal_face_width(&self.inner, &OuterKind::NegWorstRegret, self.m, r.value, tol)?;
                Ok(w.map(|w| w <= 1e-6))
            }
        }
    }

    pub fn locally_dominates(&self, candidate: &MixedStrategy, incumbent: &MixedStrategy) -> Result<DominanceVerdict> {
        self.check(candidate)?;
        self.check(incumbent)?;
        let d = diff(candidate.probs(), incumbent.probs());
        let margin = self.inner.lower_bound(&d);
        let best = self.inner.maximize(&d);
        let tol = self.tol();
        let relation = if margin > tol {
            DominanceRelation::Strict
        } else if margin >= -tol && best.value > tol {
            DominanceRelation::Weak
        } else {
            DominanceRelation::None
        };
        Ok(DominanceVerdict {
            relation,
            witness_better: (relation != DominanceRelation::None).then_some(best.point),
            margin,
            max_margin: best.value,
        })
    }

    /// A strategy that locally dominates `strategy`, if one exists.
    pub fn dominator(&self, strategy: &MixedStrategy) -> Result<Option<MixedStrategy>> {
        self.check(strategy)?;
        let x = strategy.probs();
        let tol = self.tol();
        let strict = outer::solve(
            &self.inner,
            &OuterKind::StrictGain(x.to_vec()),
            self.m,
            self.settings.max_cut_iterations,
            self.settings.cut_gap,
        )?;
        if strict.value > tol {
            return Ok(Some(MixedStrategy::from_approx(strict.x)?));
        }
        let scale = self
            .game
            .payoff_tensor(self.player())
            .iter()
            .fold(1.0f64, |a, v| a.max(v.abs()));
        let (gain, y) = outer::weak_gain(&self.inner, x, 1e-12 * scale, self.settings.max_cut_iterations)?;
        if gain > tol {
            // judge the direction per unit of probability moved, so that a
            // tiny step cannot trade slack for gain
            let y = MixedStrategy::from_approx(y)?;
            let d = diff(y.probs(), x);
            let size: f64 = d.iter().map(|v| v.abs()).sum();
            if size > 1e-9 {
                let lo = self.inner.lower_bound(&d) / size;
                let hi = self.inner.maximize(&d).value / size;
                if lo >= -tol && hi > tol {
                    return Ok(Some(y));
                }
            }
        }
        Ok(None)
    }

    fn dominance_margins(&self, strategy: &MixedStrategy) -> Vec<(f64, f64)> {
        let x = strategy.probs();
        (0..self.m)
            .map(|a| {
                let d = diff(x, &unit(self.m, a));
                (self.inner.lower_bound(&d), self.inner.maximize(&d).value)
            })
            .collect()
    }

    pub fn is_d(&self, strategy: &MixedStrategy) -> Result<bool> {
        self.check(strategy)?;
        let tol = self.tol();
        let margins = self.dominance_margins(strategy);
        if margins.iter().any(|(lo, _)| *lo < -tol) {
            return Ok(false);
        }
        // actions tying the strategy on the whole belief set
        let ties: Vec<usize> = (0..self.m)
            .filter(|&a| margins[a].0.abs() <= tol && margins[a].1.abs() <= tol)
            .collect();
        Ok(match ties.as_slice() {
            [] => true,
            [a] => strategy.pure_action() == Some(*a),
            _ => false,
        })
    }

    pub fn is_sd(&self, strategy: &MixedStrategy) -> Result<bool> {
        self.check(strategy)?;
        let Some(a0) = strategy.pure_action() else {
            return Ok(false);
        };
        let tol = self.tol();
        let e0 = unit(self.m, a0);
        Ok((0..self.m)
            .filter(|&b| b != a0)
            .all(|b| self.inner.lower_bound(&diff(&e0, &unit(self.m, b))) > tol))
    }

    fn is_nash_response(&self, strategy: &MixedStrategy) -> Result<bool> {
        self.check(strategy)?;
        let values = self.game.action_values(self.player(), &self.belief.center);
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(strategy.dot(&values) >= best - self.settings.tol)
    }

    pub fn satisfies(&self, strategy: &MixedStrategy, notion: Notion) -> Result<bool> {
        let tol = self.tol();
        match notion {
            Notion::Nash => self.is_nash_response(strategy),
            Notion::W => {
                let (worst, _) = self.inner_extreme(strategy, Sense::Min)?;
                Ok(worst >= self.maximin_result()?.value - tol)
            }
            Notion::B => {
                let (best, _) = self.inner_extreme(strategy, Sense::Max)?;
                Ok(best >= self.maximax_result().0 - tol)
            }
            Notion::WR => {
                let (wr, _) = self.worst_case_regret(strategy)?;
                let min_wr = (-self.min_regret_result()?.value).max(0.0);
                Ok(wr <= min_wr + tol)
            }
            Notion::U => Ok(self.dominator(strategy)?.is_none()),
            Notion::D => self.is_d(strategy),
            Notion::SD => self.is_sd(strategy),
        }
    }

    pub fn classify(&self, strategy: &MixedStrategy) -> Result<ResponseClassification> {
        let tol = self.tol();
        let (worst_value, worst_point) = self.inner_extreme(strategy, Sense::Min)?;
        let (best_value, best_point) = self.inner_extreme(strategy, Sense::Max)?;
        let (worst_regret, regret_point) = self.worst_case_regret(strategy)?;
        let (maximin_value, maximin_strategy) = self.outer_optimum(OuterNotion::Maximin)?;
        let (maximax_value, maximax_strategy) = self.outer_optimum(OuterNotion::Maximax)?;
        let (min_worst_regret, min_regret_strategy) = self.outer_optimum(OuterNotion::MinWorstRegret)?;
        let dominating_strategy = self.dominator(strategy)?;
        Ok(ResponseClassification {
            is_w: worst_value >= maximin_value - tol,
            is_b: best_value >= maximax_value - tol,
            is_wr: worst_regret <= min_worst_regret + tol,
            is_u: dominating_strategy.is_none(),
            is_d: self.is_d(strategy)?,
            is_sd: self.is_sd(strategy)?,
            worst_value,
            best_value,
            worst_regret,
            maximin_value,
            maximax_value,
            min_worst_regret,
            witnesses: Witnesses {
                worst_point,
                best_point,
                regret_point,
                maximin_strategy,
                maximax_strategy,
                min_regret_strategy,
                dominating_strategy,
            },
            exact: self.inner.is_exact(),
            tolerance: tol,
        })
    }
}

pub fn inner_extreme(
    game: &Game,
    player: usize,
    strategy: &MixedStrategy,
    belief: &BeliefSet,
    sense: Sense,
    settings: &SolverSettings,
) -> Result<(f64, OpponentProfile)> {
    owned(game, player, belief)?;
    ResponseContext::new(game, belief.clone(), *settings)?.inner_extreme(strategy, sense)
}

/// Regret of `strategy` against a fixed opponent sub-profile.
pub fn regret(game: &Game, player: usize, strategy: &MixedStrategy, opponents: &[MixedStrategy]) -> Result<f64> {
    game.check_strategy(player, strategy)?;
    game.check_opponents(player, opponents)?;
    let values = game.action_values(player, opponents);
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((best - strategy.dot(&values)).max(0.0))
}

pub fn worst_case_regret(
    game: &Game,
    player: usize,
    strategy: &MixedStrategy,
    belief: &BeliefSet,
    settings: &SolverSettings,
) -> Result<(f64, OpponentProfile)> {
    owned(game, player, belief)?;
    ResponseContext::new(game, belief.clone(), *settings)?.worst_case_regret(strategy)
}

pub fn outer_optimum(
    game: &Game,
    player: usize,
    belief: &BeliefSet,
    notion: OuterNotion,
    settings: &SolverSettings,
) -> Result<(f64, MixedStrategy)> {
    owned(game, player, belief)?;
    ResponseContext::new(game, belief.clone(), *settings)?.outer_optimum(notion)
}

pub fn locally_dominates(
    game: &Game,
    player: usize,
    candidate: &MixedStrategy,
    incumbent: &MixedStrategy,
    belief: &BeliefSet,
    settings: &SolverSettings,
) -> Result<DominanceVerdict> {
    owned(game, player, belief)?;
    ResponseContext::new(game, belief.clone(), *settings)?.locally_dominates(candidate, incumbent)
}

pub fn classify_response(
    game: &Game,
    player: usize,
    strategy: &MixedStrategy,
    belief: &BeliefSet,
    settings: &SolverSettings,
) -> Result<ResponseClassification> {
    owned(game, player, belief)?;
    ResponseContext::new(game, belief.clone(), *settings)?.classify(strategy)
}

fn owned(game: &Game, player: usize, belief: &BeliefSet) -> Result<()> {
    if player >= game.num_players() {
        return Err(Error::Shape(format!("player {player} out of range")));
    }
    if belief.owner != player {
        return Err(Error::InvalidParameter(format!(
            "belief set belongs to player {}, not player {player}",
            belief.owner
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Profile;
    use crate::metric::Metric;
    use approx::assert_abs_diff_eq;

    // payoffs u = 2 - q for Up and 2 - 2q for Down against Left weight q
    fn trembling() -> Game {
        Game::bimatrix(&[vec![1.0, 2.0], vec![0.0, 2.0]], &[vec![1.0, 0.0], vec![2.0, 2.0]]).unwrap()
    }

    fn pennies() -> Game {
        Game::bimatrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]], &[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    fn s(v: &[f64]) -> MixedStrategy {
        MixedStrategy::new(v.to_vec()).unwrap()
    }

    fn ball(center: &[f64], r: f64) -> BeliefSet {
        BeliefSet::new(0, vec![s(center)], r, Metric::LinfProduct).unwrap()
    }

    #[test]
    fn inner_extremes() {
        let g = trembling();
        let st = SolverSettings::default();
        let up = s(&[1.0, 0.0]);
        let (v, w) = inner_extreme(&g, 0, &up, &ball(&[1.0, 0.0], 0.1), Sense::Min, &st).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        assert_eq!(w[0].probs(), &[1.0, 0.0]);
        let (v, _) = inner_extreme(&g, 0, &s(&[0.3, 0.7]), &ball(&[0.4, 0.6], 0.0), Sense::Max, &st).unwrap();
        let u = g
            .expected_utility(&Profile::new(vec![s(&[0.3, 0.7]), s(&[0.4, 0.6])]), 0)
            .unwrap();
        assert_abs_diff_eq!(v, u, epsilon = 1e-12);
    }

    #[test]
    fn regrets() {
        let g = trembling();
        let st = SolverSettings::default();
        assert_eq!(regret(&g, 0, &s(&[1.0, 0.0]), &[s(&[0.9, 0.1])]).unwrap(), 0.0);
        assert_abs_diff_eq!(regret(&g, 0, &s(&[0.0, 1.0]), &[s(&[0.9, 0.1])]).unwrap(), 0.9, epsilon = 1e-12);
        let (v, _) = worst_case_regret(&g, 0, &s(&[0.0, 1.0]), &ball(&[0.0, 1.0], 0.1), &st).unwrap();
        assert_abs_diff_eq!(v, 0.1, epsilon = 1e-12);
        let (v, _) = worst_case_regret(&g, 0, &s(&[1.0, 0.0]), &ball(&[1.0, 0.0], 0.1), &st).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn outer_optima() {
        let st = SolverSettings::default();
        let (v, w) = outer_optimum(&trembling(), 0, &ball(&[1.0, 0.0], 0.1), OuterNotion::Maximin, &st).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.probs()[0], 1.0, epsilon = 1e-12);
        let (v, w) = outer_optimum(&pennies(), 0, &ball(&[0.5, 0.5], 1.0), OuterNotion::Maximin, &st).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.probs()[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn dominance() {
        let st = SolverSettings::default();
        let up = s(&[1.0, 0.0]);
        let down = s(&[0.0, 1.0]);
        let v = locally_dominates(&trembling(), 0, &up, &down, &ball(&[1.0, 0.0], 0.1), &st).unwrap();
        assert_eq!(v.relation, DominanceRelation::Strict);
        let v = locally_dominates(&pennies(), 0, &up, &down, &ball(&[0.5, 0.5], 0.2), &st).unwrap();
        assert_eq!(v.relation, DominanceRelation::None);
        assert_abs_diff_eq!(v.margin, -0.8, epsilon = 1e-12);
        let v = locally_dominates(&pennies(), 0, &up, &up, &ball(&[0.5, 0.5], 0.2), &st).unwrap();
        assert_eq!(v.relation, DominanceRelation::None);
    }

    #[test]
    fn trembling_classifications() {
        let g = trembling();
        let st = SolverSettings::default();
        let c = classify_response(&g, 0, &s(&[1.0, 0.0]), &ball(&[1.0, 0.0], 0.1), &st).unwrap();
        assert!(c.is_w && c.is_b && c.is_wr && c.is_u && c.is_d && c.is_sd);
        let c = classify_response(&g, 0, &s(&[0.0, 1.0]), &ball(&[0.0, 1.0], 0.1), &st).unwrap();
        assert!(c.is_b);
        assert!(!c.is_w);
        assert_abs_diff_eq!(c.worst_value, 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(c.maximin_value, 1.9, epsilon = 1e-12);
    }

    #[test]
    fn weak_domination_needs_second_stage() {
        // the second action ties at the center column and wins elsewhere
        let g = Game::bimatrix(&[vec![1.0, 0.0], vec![1.0, 1.0]], &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let ctx = ResponseContext::new(&g, ball(&[1.0, 0.0], 0.1), SolverSettings::default()).unwrap();
        let top = s(&[1.0, 0.0]);
        assert!(ctx.dominator(&top).unwrap().is_some());
        assert!(!ctx.satisfies(&top, Notion::U).unwrap());
        // best-case optimal yet dominated: the best case is not unique
        assert!(ctx.satisfies(&top, Notion::B).unwrap());
        assert_eq!(ctx.unique_optimum(OuterNotion::Maximax).unwrap(), Some(false));
        assert!(ctx.satisfies(&s(&[0.0, 1.0]), Notion::U).unwrap());
    }

    #[test]
    fn l2_path_agrees_with_linf_on_two_actions() {
        // one 2-action opponent: the l2 ball of radius r*sqrt 2 is the linf ball of radius r
        let g = trembling();
        let st = SolverSettings::default();
        let lin = ball(&[0.0, 1.0], 0.1);
        let l2 = BeliefSet::new(0, vec![s(&[0.0, 1.0])], 0.1 * 2f64.sqrt(), Metric::L2Concat).unwrap();
        for x in [s(&[1.0, 0.0]), s(&[0.0, 1.0]), s(&[0.5, 0.5])] {
            let a = classify_response(&g, 0, &x, &lin, &st).unwrap();
            let b = classify_response(&g, 0, &x, &l2, &st).unwrap();
            assert_eq!(
                (a.is_w, a.is_b, a.is_wr, a.is_u, a.is_d, a.is_sd),
                (b.is_w, b.is_b, b.is_wr, b.is_u, b.is_d, b.is_sd)
            );
            assert_abs_diff_eq!(a.maximin_value, b.maximin_value, epsilon = 1e-8);
            assert_abs_diff_eq!(a.min_worst_regret, b.min_worst_regret, epsilon = 1e-8);
        }
    }

    #[test]
    fn notion_names() {
        for n in Notion::DISTANCE {
            assert_eq!(n.as_str().parse::<Notion>().unwrap(), n);
        }
        assert_eq!("nash".parse::<Notion>().unwrap(), Notion::Nash);
        assert!("x".parse::<Notion>().is_err());
    }
}
