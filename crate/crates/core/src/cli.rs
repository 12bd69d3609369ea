//! Command-line front end. Every verb parses its flags, calls one library
//! entry point and wraps the result in a versioned report.
//!
//! Exit codes: 0 success, 1 an assertive verb found a negative result
//! (`--expect` failed, audit violations, failed consensus or bound checks),
//! 2 usage, parse or capability errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::audit::{implication_audit, AuditConfig};
use crate::equilibrium::{
    enumerate_pure, grid_search_mixed, nash_support_enumeration, robust_check, satisfies_equilibrium,
    verify_equilibrium,
};
use crate::error::{Error, Result};
use crate::game::{parse_game, Game, Profile};
use crate::games;
use crate::ladder::{default_schedule, trembling_ladder, two_player_perfection};
use crate::metric::Metric;
use crate::oracle::{oracle_equilibrium, oracle_threshold, GridSpec, ThresholdClaim};
use crate::report::{Format, Report, Table};
use crate::response::{Notion, SolverSettings};
use crate::welfare::{
    consensus_audit, consensus_generate, delta_estimate, poa, poa_bound_check, smoothness_fit, MIN_DELTA_SAMPLES,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dbeq", version, about = "Distance-based equilibria of finite normal-form games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, default_value = "json")]
    pub format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Game file (JSON), a built-in name, or `consensus:SHAPE:c:c'` such as `consensus:2x3:1:2`.
    pub game: String,

    /// Belief metric.
    #[arg(long, default_value = "l2")]
    pub metric: Metric,

    /// Verdict tolerance on the exact path.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    /// Radius shared by every player.
    #[arg(long, conflicts_with = "r_vec")]
    pub r: Option<f64>,

    /// One radius per player, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r_vec: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a profile under every notion.
    Verify {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        radius: RadiusArgs,
        /// Profile literal, e.g. "p0:1,0;p1:0.5,0.5".
        #[arg(long)]
        profile: String,
        /// Exit 1 unless the profile is an equilibrium of this notion.
        #[arg(long)]
        expect: Option<Notion>,
    },
    /// List pure equilibria of one notion.
    Enumerate {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        radius: RadiusArgs,
        #[arg(long, default_value = "nash")]
        notion: Notion,
    },
    /// Grid search for mixed equilibria of a small two-player game.
    Search {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        radius: RadiusArgs,
        #[arg(long)]
        notion: Notion,
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
    },
    /// Check epsilon-robustness of pure profiles (all of them if none given).
    Robust {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        profile: Option<String>,
    },
    /// Trembling-hand evidence along families of perturbations.
    Ladder {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        profile: String,
    },
    /// Seeded audit of the implications between notions on random games.
    Audit {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        games: usize,
        /// Action counts, e.g. "2x3".
        #[arg(long, default_value = "2x2")]
        shape: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.3")]
        radii: Vec<f64>,
        #[arg(long, default_value = "l2")]
        metric: Metric,
        /// Random mixed profiles per game besides all pure ones.
        #[arg(long, default_value_t = 2)]
        mixed: usize,
        /// Also run the robust-equilibrium checks.
        #[arg(long)]
        robust: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Brute-force grid classification, or a threshold radius with --threshold.
    Oracle {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        radius: RadiusArgs,
        #[arg(long)]
        profile: String,
        #[arg(long)]
        notion: Option<Notion>,
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
        /// Override the grid verdict tolerance.
        #[arg(long)]
        grid_tol: Option<f64>,
        /// Radius interval "lo:hi" to bisect for a change of verdict.
        #[arg(long)]
        threshold: Option<String>,
        #[arg(long)]
        expect: Option<Notion>,
    },
    /// Price of anarchy over pure equilibria.
    Poa {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        radius: RadiusArgs,
        #[arg(long, default_value = "W")]
        notion: Notion,
        /// Also check the smoothness bound; exit 1 on violations.
        #[arg(long)]
        bound: bool,
    },
    /// Estimate the largest utility ratio inside belief balls.
    Delta {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = MIN_DELTA_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit smoothness constants.
    Smoothness {
        #[command(flatten)]
        game: GameArgs,
    },
    /// Check the unique dominant equilibrium of a consensus game.
    Consensus {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        radius: RadiusArgs,
    },
    /// Verdicts over a grid of radii, for plotting.
    Sweep {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        notion: Notion,
        #[arg(long)]
        profile: String,
        /// "lo:hi:step".
        #[arg(long)]
        r_grid: String,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn usage(flag: &str, message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("{flag}: {message}"),
    }
}

type Outcome = std::result::Result<(Report, i32), Failure>;

/// Parses `args` (including the program name), runs the verb and writes the
/// report. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    if let Err(f) = configure_threads() {
        let _ = writeln!(stderr, "error: {}", f.message);
        return f.code;
    }
    match dispatch(&cli.command) {
        Ok((report, code)) => {
            let text = report.render(cli.format);
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("--out {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(m) = written {
                let _ = writeln!(stderr, "error: {m}");
                return EXIT_USAGE;
            }
            code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Caps the global worker pool at `DBEQ_THREADS`.
fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(v) = std::env::var("DBEQ_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| usage("DBEQ_THREADS", format!("expected a positive integer, got '{v}'")))?;
    // a pool that already exists (repeated in-process runs) is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Reads a game file, a built-in name, or a generated consensus game.
pub fn load_game(source: &str) -> Result<Game> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            context: source.to_string(),
            message: e.to_string(),
        })?;
        return parse_game(&text).map_err(|e| match e {
            Error::Parse { context, message } => Error::Parse {
                context: format!("{source}: {context}"),
                message,
            },
            other => other,
        });
    }
    if let Some(spec) = source.strip_prefix("consensus:") {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::Parse {
            context: source.to_string(),
            message: "expected consensus:SHAPE:c:c', e.g. consensus:2x3:1:2".into(),
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let shape = parse_shape(parts[0]).map_err(|_| bad())?;
        let c: f64 = parts[1].parse().map_err(|_| bad())?;
        let cp: f64 = parts[2].parse().map_err(|_| bad())?;
        return consensus_generate(&shape, c, cp, &vec![0; shape.len()]);
    }
    games::by_name(source).map_err(|_| Error::Parse {
        context: source.to_string(),
        message: format!(
            "not a readable file and not a built-in game ({})",
            games::BUILTIN_NAMES.join(", ")
        ),
    })
}

fn parse_shape(s: &str) -> Result<Vec<usize>> {
    s.split(['x', ','])
        .map(|t| {
            t.trim().parse::<usize>().map_err(|e| Error::Parse {
                context: format!("shape '{s}'"),
                message: e.to_string(),
            })
        })
        .collect()
}

fn radii(game: &Game, r: &RadiusArgs) -> std::result::Result<Vec<f64>, Failure> {
    match (&r.r, &r.r_vec) {
        (Some(r), _) => Ok(vec![*r; game.num_players()]),
        (None, Some(v)) if v.len() == game.num_players() => Ok(v.clone()),
        (None, Some(v)) => Err(usage(
            "--r-vec",
            format!("{} radii given for {} players", v.len(), game.num_players()),
        )),
        (None, None) => Err(usage("--r", "a radius is required (--r or --r-vec)")),
    }
}

fn profile(game: &Game, literal: &str) -> std::result::Result<Profile, Failure> {
    let p = Profile::parse_literal(literal).map_err(|e| usage("--profile", e))?;
    game.check_profile(&p).map_err(|e| usage("--profile", e))?;
    Ok(p)
}

fn settings(tol: f64) -> std::result::Result<SolverSettings, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(usage("--tol", format!("must be positive, got {tol}")));
    }
    Ok(SolverSettings::with_tol(tol))
}

fn loaded(g: &GameArgs) -> std::result::Result<(Game, SolverSettings), Failure> {
    Ok((load_game(&g.game)?, settings(g.tol)?))
}

fn literal(actions: &[usize], game: &Game) -> String {
    Profile::pure(game, actions).to_literal()
}

fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Verify {
            game,
            radius,
            profile: lit,
            expect,
        } => {
            let (g, s) = loaded(game)?;
            let radii = radii(&g, radius)?;
            let p = profile(&g, lit)?;
            let rep = verify_equilibrium(&g, &p, &radii, game.metric, &s)?;
            let witnesses: Vec<_> = rep.per_player.iter().map(|c| &c.witnesses).collect();
            let mut table = Table::new(&["notion", "equilibrium"]);
            table.push(vec!["nash".into(), rep.nash.to_string()]);
            for n in Notion::DISTANCE {
                table.push(vec![n.to_string(), rep.flag(n).to_string()]);
            }
            let code = match expect {
                Some(n) if !rep.flag(*n) => EXIT_NEGATIVE,
                _ => EXIT_OK,
            };
            let data = json!({
                "profile": rep.profile.to_literal(),
                "radii": rep.radii,
                "metric": rep.metric,
                "flags": rep.flags,
                "nash": rep.nash,
                "exact": rep.exact,
                "per_player": rep.per_player,
                "witnesses": witnesses,
                "expect": expect.map(|n| json!({"notion": n, "holds": rep.flag(n)})),
            });
            Ok((Report::new("verify", g.name(), data)?.with_table(table), code))
        }
        Command::Enumerate { game, radius, notion } => {
            let (g, s) = loaded(game)?;
            let radii = if *notion == Notion::Nash && radius.r.is_none() && radius.r_vec.is_none() {
                vec![0.0; g.num_players()]
            } else {
                radii(&g, radius)?
            };
            let found = enumerate_pure(&g, &radii, game.metric, *notion, &s)?;
            let mut table = Table::new(&["profile"]);
            for a in &found {
                table.push(vec![literal(a, &g)]);
            }
            let mixed = if *notion == Notion::Nash && g.num_players() == 2 {
                Some(nash_support_enumeration(&g, s.tol)?)
            } else {
                None
            };
            let data = json!({
                "notion": notion,
                "radii": radii,
                "metric": game.metric,
                "equilibria": found,
                "support_enumeration": mixed,
            });
            Ok((Report::new("enumerate", g.name(), data)?.with_table(table), EXIT_OK))
        }
        Command::Search {
            game,
            radius,
            notion,
            resolution,
        } => {
            let (g, s) = loaded(game)?;
            let radii = radii(&g, radius)?;
            let rep = grid_search_mixed(&g, &radii, game.metric, *notion, *resolution, &s)?;
            let mut table = Table::new(&["profile"]);
            for p in &rep.candidates {
                table.push(vec![p.to_literal()]);
            }
            let data = json!({
                "radii": radii,
                "metric": game.metric,
                "search": rep,
                "candidates": rep.candidates.iter().map(Profile::to_literal).collect::<Vec<_>>(),
            });
            Ok((Report::new("search", g.name(), data)?.with_table(table), EXIT_OK))
        }
        Command::Robust {
            game,
            epsilon,
            profile: lit,
        } => {
            let (g, s) = loaded(game)?;
            let targets: Vec<Vec<usize>> = match lit {
                Some(l) => {
                    let p = profile(&g, l)?;
                    vec![p
                        .pure_actions()
                        .ok_or_else(|| usage("--profile", "robustness is defined for pure profiles"))?]
                }
                None => g.pure_profiles().collect(),
            };
            let mut table = Table::new(&["profile", "robust", "player", "better_action", "margin"]);
            let mut reports = Vec::new();
            for a in &targets {
                let rep = robust_check(&g, a, *epsilon, s.tol)?;
                let v = rep.violation.as_ref();
                table.push(vec![
                    literal(a, &g),
                    rep.robust.to_string(),
                    v.map(|v| v.player.to_string()).unwrap_or_default(),
                    v.map(|v| v.better_action.to_string()).unwrap_or_default(),
                    v.map(|v| v.margin.to_string()).unwrap_or_default(),
                ]);
                reports.push(json!({"profile": literal(a, &g), "report": rep}));
            }
            let data = json!({"epsilon": epsilon, "profiles": reports});
            Ok((Report::new("robust", g.name(), data)?.with_table(table), EXIT_OK))
        }
        Command::Ladder { game, profile: lit } => {
            let (g, s) = loaded(game)?;
            let p = profile(&g, lit)?;
            let ladder = trembling_ladder(&g, &p, &default_schedule())?;
            let exact = if g.num_players() == 2 {
                Some(two_player_perfection(&g, &p, &s)?)
            } else {
                None
            };
            let data = json!({"ladder": ladder, "two_player_check": exact});
            Ok((Report::new("ladder", g.name(), data)?, EXIT_OK))
        }
        Command::Audit {
            seed,
            games: n,
            shape,
            radii,
            metric,
            mixed,
            robust,
            tol,
        } => {
            let shape = parse_shape(shape).map_err(|e| usage("--shape", e))?;
            let mut cfg = AuditConfig::new(*seed, *n, shape, radii.clone(), *metric);
            cfg.mixed_profiles = *mixed;
            cfg.robust = *robust;
            cfg.settings = settings(*tol)?;
            let rep = implication_audit(&cfg)?;
            let code = if rep.violation_count() == 0 { EXIT_OK } else { EXIT_NEGATIVE };
            let data = json!({"config": cfg, "report": rep});
            Ok((Report::new("audit", None, data)?, code))
        }
        Command::Oracle {
            game,
            radius,
            profile: lit,
            notion,
            resolution,
            grid_tol,
            threshold,
            expect,
        } => {
            let g = load_game(&game.game)?;
            let p = profile(&g, lit)?;
            let mut grid = GridSpec::new(*resolution).map_err(|e| usage("--resolution", e))?;
            if let Some(t) = grid_tol {
                grid = grid.with_tolerance(*t);
            }
            if let Some(interval) = threshold {
                let notion = notion.ok_or_else(|| usage("--threshold", "needs --notion"))?;
                let (lo, hi) = interval
                    .split_once(':')
                    .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
                    .ok_or_else(|| usage("--threshold", format!("expected lo:hi, got '{interval}'")))?;
                let claim = ThresholdClaim {
                    profile: p,
                    notion,
                    metric: game.metric,
                };
                let rep = oracle_threshold(&g, &claim, lo, hi, &grid)?;
                let data = json!({"grid": grid, "threshold": rep});
                return Ok((Report::new("oracle", g.name(), data)?, EXIT_OK));
            }
            let radii = radii(&g, radius)?;
            let notions: Vec<Notion> = match notion {
                Some(n) => vec![*n],
                None => Notion::DISTANCE.to_vec(),
            };
            let mut table = Table::new(&["notion", "equilibrium"]);
            let mut flags = serde_json::Map::new();
            for n in &notions {
                let v = oracle_equilibrium(&g, &p, &radii, game.metric, *n, &grid)?;
                table.push(vec![n.to_string(), v.to_string()]);
                flags.insert(n.to_string(), v.into());
            }
            let code = match expect {
                Some(n) => {
                    let v = oracle_equilibrium(&g, &p, &radii, game.metric, *n, &grid)?;
                    if v {
                        EXIT_OK
                    } else {
                        EXIT_NEGATIVE
                    }
                }
                None => EXIT_OK,
            };
            let data = json!({
                "profile": p.to_literal(),
                "radii": radii,
                "metric": game.metric,
                "grid": grid,
                "grid_tolerance": grid.tolerance_for(&g),
                "flags": flags,
            });
            Ok((Report::new("oracle", g.name(), data)?.with_table(table), code))
        }
        Command::Poa {
            game,
            radius,
            notion,
            bound,
        } => {
            let (g, s) = loaded(game)?;
            let radii = if *notion == Notion::Nash && radius.r.is_none() && radius.r_vec.is_none() {
                vec![0.0; g.num_players()]
            } else {
                radii(&g, radius)?
            };
            let eq: Vec<Profile> = enumerate_pure(&g, &radii, game.metric, *notion, &s)?
                .iter()
                .map(|a| Profile::pure(&g, a))
                .collect();
            let rep = poa(&g, &eq, &[], Some(*notion), &radii)?;
            let (check, code) = if *bound {
                let b = poa_bound_check(&g, &radii, game.metric, *notion, &s)?;
                let code = if b.violations.is_empty() { EXIT_OK } else { EXIT_NEGATIVE };
                (Some(b), code)
            } else {
                (None, EXIT_OK)
            };
            let data = json!({"metric": game.metric, "poa": rep, "bound_check": check});
            Ok((Report::new("poa", g.name(), data)?, code))
        }
        Command::Delta { game, r, samples, seed } => {
            let g = load_game(&game.game)?;
            let rep = delta_estimate(&g, *r, game.metric, *samples, *seed)?;
            Ok((Report::new("delta", g.name(), json!({"seed": seed, "delta": rep}))?, EXIT_OK))
        }
        Command::Smoothness { game } => {
            let g = load_game(&game.game)?;
            let cert = smoothness_fit(&g)?;
            let data = json!({"certificate": cert, "found": cert.is_some()});
            Ok((Report::new("smoothness", g.name(), data)?, EXIT_OK))
        }
        Command::Consensus { game, radius } => {
            let (g, s) = loaded(game)?;
            let radii = radii(&g, radius)?;
            let rep = consensus_audit(&g, &radii, game.metric, &s)?;
            let code = if rep.passed { EXIT_OK } else { EXIT_NEGATIVE };
            Ok((Report::new("consensus", g.name(), json!({"metric": game.metric, "audit": rep}))?, code))
        }
        Command::Sweep {
            game,
            notion,
            profile: lit,
            r_grid,
        } => {
            let (g, s) = loaded(game)?;
            let p = profile(&g, lit)?;
            let grid = parse_r_grid(r_grid)?;
            let column = format!("is_{notion}");
            let mut table = Table::new(&["r", &column]);
            let mut points = Vec::with_capacity(grid.len());
            for (text, r) in grid {
                let v = satisfies_equilibrium(&g, &p, &vec![r; g.num_players()], game.metric, *notion, &s)?;
                table.push(vec![text, v.to_string()]);
                points.push(json!({"r": r, "holds": v}));
            }
            let data = json!({
                "profile": p.to_literal(),
                "notion": notion,
                "metric": game.metric,
                "points": points,
            });
            Ok((Report::new("sweep", g.name(), data)?.with_table(table), EXIT_OK))
        }
    }
}

/// Expands "lo:hi:step" into radii, printed with the decimals of the input
/// so that rows read 0.07 rather than 0.07000000000000001.
fn parse_r_grid(text: &str) -> std::result::Result<Vec<(String, f64)>, Failure> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let bad = |m: &str| usage("--r-grid", format!("{m} (expected lo:hi:step, got '{text}')"));
    if parts.len() != 3 {
        return Err(bad("three fields required"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("not a number"))?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(lo >= 0.0 && hi >= lo && step > 0.0 && hi.is_finite()) {
        return Err(bad("need 0 <= lo <= hi and step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(bad("more than 100000 points"));
    }
    let decimals = parts
        .iter()
        .map(|p| p.split_once('.').map_or(0, |(_, d)| d.len()))
        .max()
        .unwrap_or(0);
    Ok((0..count)
        .map(|k| {
            let text = format!("{:.*}", decimals, lo + k as f64 * step);
            let r = text.parse().expect("formatted number parses");
            (text, r)
        })
        .collect())
}
