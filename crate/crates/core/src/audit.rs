//! Falsification harness for the implication lattice between response and
//! equilibrium notions, run on seeded random games.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{robust_check, verify_equilibrium};
use crate::error::{Error, Result};
use crate::game::{Game, GameDocument, Profile};
use crate::metric::{BeliefSet, Metric};
use crate::random::{random_game, random_profile, task_rng};
use crate::response::{OuterNotion, ResponseClassification, ResponseContext, SolverSettings};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditConfig {
    pub seed: u64,
    pub num_games: usize,
    pub shape: Vec<usize>,
    pub radii: Vec<f64>,
    pub metric: Metric,
    /// Random mixed profiles per game in addition to all pure profiles.
    pub mixed_profiles: usize,
    /// Run the robust-equilibrium bridge checks on pure profiles.
    pub robust: bool,
    #[serde(skip)]
    pub settings: SolverSettings,
}

impl AuditConfig {
    pub fn new(seed: u64, num_games: usize, shape: Vec<usize>, radii: Vec<f64>, metric: Metric) -> Self {
        AuditConfig {
            seed,
            num_games,
            shape,
            radii,
            metric,
            mixed_profiles: 2,
            robust: false,
            settings: SolverSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditViolation {
    pub check: &'static str,
    pub game_index: usize,
    pub game: GameDocument,
    pub profile: String,
    pub radius: f64,
    pub metric: Metric,
    pub player: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct AuditReport {
    pub games: usize,
    /// How often each implication was exercised with its premise true.
    pub checks: BTreeMap<&'static str, usize>,
    pub violations: Vec<AuditViolation>,
    /// Profiles that are W, B or WR equilibria without being U equilibria;
    /// these refute the unqualified equilibrium-level implication.
    pub literal_gaps: usize,
    pub literal_gap_example: Option<AuditViolation>,
    /// Evaluations skipped because a solver lacks the capability.
    pub skipped: BTreeMap<String, usize>,
}

impl AuditReport {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }

    fn merge(&mut self, other: AuditReport) {
        self.games += other.games;
        for (k, v) in other.checks {
            *self.checks.entry(k).or_default() += v;
        }
        self.violations.extend(other.violations);
        self.literal_gaps += other.literal_gaps;
        if self.literal_gap_example.is_none() {
            self.literal_gap_example = other.literal_gap_example;
        }
        for (k, v) in other.skipped {
            *self.skipped.entry(k).or_default() += v;
        }
    }
}

struct Ctx<'a> {
    index: usize,
    game: &'a Game,
    report: AuditReport,
}

impl Ctx<'_> {
    fn exercise(&mut self, check: &'static str) {
        *self.report.checks.entry(check).or_default() += 1;
    }

    fn violation(&self, check: &'static str, profile: &Profile, radius: f64, metric: Metric, player: Option<usize>, detail: String) -> AuditViolation {
        AuditViolation {
            check,
            game_index: self.index,
            game: self.game.to_document(),
            profile: profile.to_literal(),
            radius,
            metric,
            player,
            detail,
        }
    }

    fn fail(&mut self, check: &'static str, profile: &Profile, radius: f64, metric: Metric, player: Option<usize>, detail: String) {
        let v = self.violation(check, profile, radius, metric, player, detail);
        self.report.violations.push(v);
    }

    fn skip(&mut self, e: &Error) {
        let key = match e {
            Error::Capability(_) => "capability",
            Error::CostGuard(_) => "cost",
            Error::Lp(_) => "lp",
            _ => "other",
        };
        *self.report.skipped.entry(key.to_string()).or_default() += 1;
    }
}

fn nash_response(game: &Game, profile: &Profile, i: usize, tol: f64) -> bool {
    let v = game.action_values(i, &profile.opponents(i));
    let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    profile.strategy(i).dot(&v) >= best - tol
}

const UNIQUE: [(&str, OuterNotion); 3] = [
    ("W", OuterNotion::Maximin),
    ("B", OuterNotion::Maximax),
    ("WR", OuterNotion::MinWorstRegret),
];

fn flag(c: &ResponseClassification, name: &str) -> bool {
    match name {
        "W" => c.is_w,
        "B" => c.is_b,
        _ => c.is_wr,
    }
}

/// Response-level and equilibrium-level checks for one profile and radius.
/// Returns per-player SD verdicts for the monotonicity check.
fn audit_profile(cx: &mut Ctx, profile: &Profile, r: f64, cfg: &AuditConfig) -> Result<Vec<bool>> {
    let game = cx.game;
    let n = game.num_players();
    let mut classes = Vec::with_capacity(n);
    let mut unique = Vec::with_capacity(n);
    for i in 0..n {
        let belief = BeliefSet::new(i, profile.opponents(i), r, cfg.metric)?;
        let ctx = ResponseContext::new(game, belief, cfg.settings)?;
        let c = ctx.classify(profile.strategy(i))?;
        for v in c.implication_violations() {
            cx.fail("response.chain", profile, r, cfg.metric, Some(i), v.to_string());
        }
        if c.is_sd || c.is_d {
            cx.exercise("response.chain");
        }
        let mut u = [false; 3];
        for (k, (name, notion)) in UNIQUE.iter().enumerate() {
            if !flag(&c, name) {
                continue;
            }
            if ctx.unique_optimum(*notion)? == Some(true) {
                u[k] = true;
                cx.exercise("response.unique_implies_u");
                if !c.is_u {
                    cx.fail(
                        "response.unique_implies_u",
                        profile,
                        r,
                        cfg.metric,
                        Some(i),
                        format!("unique {name} response is locally dominated"),
                    );
                }
            }
        }
        if r == 0.0 {
            cx.exercise("r0.collapse");
            let nash = nash_response(game, profile, i, cfg.settings.tol);
            for (name, got) in [("W", c.is_w), ("B", c.is_b), ("WR", c.is_wr), ("U", c.is_u)] {
                if got != nash {
                    cx.fail(
                        "r0.collapse",
                        profile,
                        r,
                        cfg.metric,
                        Some(i),
                        format!("{name} verdict {got} differs from best-response verdict {nash}"),
                    );
                }
            }
        }
        unique.push(u);
        classes.push(c);
    }
    // equilibrium level
    let all = |f: &dyn Fn(&ResponseClassification) -> bool| classes.iter().all(f);
    let (sd, d, u) = (all(&|c| c.is_sd), all(&|c| c.is_d), all(&|c| c.is_u));
    let (w, b, wr) = (all(&|c| c.is_w), all(&|c| c.is_b), all(&|c| c.is_wr));
    if sd || d {
        cx.exercise("equilibrium.chain");
    }
    if sd && !d {
        cx.fail("equilibrium.chain", profile, r, cfg.metric, None, "SD equilibrium is not D".into());
    }
    if d && !(w && b && wr) {
        cx.fail("equilibrium.chain", profile, r, cfg.metric, None, "D equilibrium misses W, B or WR".into());
    }
    for (k, (name, _)) in UNIQUE.iter().enumerate() {
        let holds = all(&|c| flag(c, name));
        if holds && unique.iter().all(|u| u[k]) {
            cx.exercise("equilibrium.unique_implies_u");
            if !u {
                cx.fail(
                    "equilibrium.unique_implies_u",
                    profile,
                    r,
                    cfg.metric,
                    None,
                    format!("{name} equilibrium with unique responses is not U"),
                );
            }
        }
        if holds && !u {
            cx.report.literal_gaps += 1;
            if cx.report.literal_gap_example.is_none() {
                let v = cx.violation(
                    "equilibrium.literal",
                    profile,
                    r,
                    cfg.metric,
                    None,
                    format!("{name} equilibrium that is not a U equilibrium"),
                );
                cx.report.literal_gap_example = Some(v);
            }
        }
    }
    Ok(classes.iter().map(|c| c.is_sd).collect())
}

fn audit_robust(cx: &mut Ctx, actions: &[usize], cfg: &AuditConfig) {
    let game = cx.game;
    let n = game.num_players();
    let profile = Profile::pure(game, actions);
    let st = &cfg.settings;
    for &r in cfg.radii.iter().filter(|r| **r > 0.0 && **r < 1.0) {
        // robust at r implies D at r under the Euclidean metric
        match robust_check(game, actions, r, st.tol) {
            Ok(rep) if rep.robust => {
                cx.exercise("robust.implies_d");
                match verify_equilibrium(game, &profile, &vec![r; n], Metric::L2Concat, st) {
                    Ok(v) if !v.flags.d => cx.fail(
                        "robust.implies_d",
                        &profile,
                        r,
                        Metric::L2Concat,
                        None,
                        "robust profile is not a D equilibrium".into(),
                    ),
                    Ok(_) => {}
                    Err(e) => cx.skip(&e),
                }
            }
            Ok(_) => {}
            Err(e) => cx.skip(&e),
        }
        // D at r implies robust at r / sqrt(n)
        let eps = r / (n as f64).sqrt();
        for metric in bridge_metrics(n) {
            match verify_equilibrium(game, &profile, &vec![r; n], metric, st) {
                Ok(v) if v.flags.d => {
                    cx.exercise("d.implies_robust");
                    match robust_check(game, actions, eps, st.tol) {
                        Ok(rep) if !rep.robust => cx.fail(
                            "d.implies_robust",
                            &profile,
                            r,
                            metric,
                            rep.violation.as_ref().map(|w| w.player),
                            format!("D equilibrium is not {eps}-robust"),
                        ),
                        Ok(_) => {}
                        Err(e) => cx.skip(&e),
                    }
                }
                Ok(_) => {}
                Err(e) => cx.skip(&e),
            }
        }
    }
}

/// Metrics under which a pure D equilibrium at radius r must be robust at
/// r/sqrt(n). Under the Euclidean metric a noisy vertex with two or more
/// opponents lies outside the ball, so that pairing is only audited for two
/// players.
pub fn bridge_metrics(n: usize) -> Vec<Metric> {
    if n == 2 {
        vec![Metric::L2Concat, Metric::LinfProduct]
    } else {
        vec![Metric::LinfProduct]
    }
}

fn audit_game(index: usize, cfg: &AuditConfig) -> AuditReport {
    let mut rng = task_rng(cfg.seed, index as u64);
    let game = random_game(&mut rng, &cfg.shape, 0.0, 1.0);
    let mut profiles: Vec<Profile> = game.pure_profiles().map(|a| Profile::pure(&game, &a)).collect();
    for _ in 0..cfg.mixed_profiles {
        profiles.push(random_profile(&mut rng, &game));
    }
    let mut cx = Ctx {
        index,
        game: &game,
        report: AuditReport {
            games: 1,
            ..Default::default()
        },
    };
    let mut radii = cfg.radii.clone();
    radii.sort_by(f64::total_cmp);
    for p in &profiles {
        let mut sd_by_r: Vec<(f64, Vec<bool>)> = Vec::new();
        for &r in &radii {
            match audit_profile(&mut cx, p, r, cfg) {
                Ok(sd) => sd_by_r.push((r, sd)),
                Err(e) => cx.skip(&e),
            }
        }
        // SD at a radius implies SD at every smaller radius
        for (k, (r, sd)) in sd_by_r.iter().enumerate() {
            for (i, &s) in sd.iter().enumerate() {
                if !s {
                    continue;
                }
                for (r_small, sd_small) in &sd_by_r[..k] {
                    cx.exercise("radius.sd_monotone");
                    if !sd_small[i] {
                        cx.fail(
                            "radius.sd_monotone",
                            p,
                            *r_small,
                            cfg.metric,
                            Some(i),
                            format!("SD at r={r} but not at r={r_small}"),
                        );
                    }
                }
            }
        }
    }
    if cfg.robust {
        for a in game.pure_profiles() {
            audit_robust(&mut cx, &a, cfg);
        }
    }
    cx.report
}

pub fn implication_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    let n = cfg.shape.len();
    if !(2..=3).contains(&n) || cfg.shape.iter().any(|&m| !(1..=3).contains(&m)) {
        return Err(Error::InvalidParameter(format!(
            "audit shapes need 2 or 3 players with at most 3 actions each, got {:?}",
            cfg.shape
        )));
    }
    if cfg.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidParameter("audit radii must be nonnegative".into()));
    }
    let parts: Vec<AuditReport> = (0..cfg.num_games).into_par_iter().map(|k| audit_game(k, cfg)).collect();
    let mut report = AuditReport::default();
    for p in parts {
        report.merge(p);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::verify_equilibrium;

    #[test]
    fn small_audit_is_clean() {
        let cfg = AuditConfig::new(1, 20, vec![2, 2], vec![0.0, 0.1, 0.3], Metric::LinfProduct);
        let rep = implication_audit(&cfg).unwrap();
        assert_eq!(rep.violation_count(), 0, "{:?}", rep.violations.first());
        assert_eq!(rep.games, 20);
        assert!(rep.checks["r0.collapse"] > 0);
    }

    #[test]
    fn robust_bridge_three_players() {
        let mut cfg = AuditConfig::new(7, 5, vec![2, 3, 2], vec![0.1], Metric::LinfProduct);
        cfg.mixed_profiles = 0;
        cfg.robust = true;
        let rep = implication_audit(&cfg).unwrap();
        assert_eq!(rep.violation_count(), 0, "{:?}", rep.violations.first());
    }

    #[test]
    fn weakly_dominated_nash() {
        // Bottom ties Top against Left and loses against Right
        let g = Game::bimatrix(&[vec![1.0, 1.0], vec![1.0, 0.0]], &[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let p = Profile::pure(&g, &[1, 0]);
        let st = SolverSettings::default();
        let rep = verify_equilibrium(&g, &p, &[0.0, 0.0], Metric::LinfProduct, &st).unwrap();
        assert!(rep.nash);
        let rep = verify_equilibrium(&g, &p, &[0.1, 0.1], Metric::LinfProduct, &st).unwrap();
        assert!(!rep.flags.u);
    }

    #[test]
    fn rejects_large_shapes() {
        let cfg = AuditConfig::new(1, 1, vec![4, 2], vec![0.1], Metric::LinfProduct);
        assert!(implication_audit(&cfg).is_err());
    }
}
