//! Realisations of a belief set as a column oracle.
//!
//! For a fixed player `i` and opponent point `v`, the column `col(v)` lists
//! `u_i(a, v)` for every own action `a`, so `u_i(x, v) = x·col(v)`. Every
//! response notion reduces to minimising `w·col(v)` over the belief set for
//! some weight vector `w`, which this module answers exactly for polytopes and
//! for two-player Euclidean balls, and heuristically (with a sound lower
//! bound) for Euclidean balls around pure centers with several opponents.

use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, OpponentProfile};
use crate::metric::{ball_vertices, simplex_vertices, BeliefSet, Metric};
use crate::sphere;

/// A belief point together with its column.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub value: f64,
    pub point: OpponentProfile,
    pub col: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) enum Inner {
    /// Finite vertex list; every extremum is attained at one of them.
    Polytope {
        points: Vec<OpponentProfile>,
        cols: Vec<Vec<f64>>,
    },
    /// Two players, Euclidean ball. `matrix[a][b] = u_i(a, b)`.
    Sphere {
        matrix: Vec<Vec<f64>>,
        center: Vec<f64>,
        radius: f64,
    },
    /// Several opponents, Euclidean ball around a pure sub-profile.
    SphereMulti {
        game: Game,
        player: usize,
        center: OpponentProfile,
        radius: f64,
        /// Enclosing box of the same radius; its vertices give lower bounds.
        outer: Vec<Vec<f64>>,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Inner {
    pub(crate) fn new(game: &Game, belief: &BeliefSet) -> Result<Self> {
        let player = belief.owner;
        if player >= game.num_players() {
            return Err(Error::Shape(format!("player {player} out of range")));
        }
        game.check_opponents(player, &belief.center)?;
        let polytope = |points: Vec<OpponentProfile>| {
            let cols = points.iter().map(|v| game.action_values(player, v)).collect();
            Inner::Polytope { points, cols }
        };
        if belief.radius == 0.0 {
            return Ok(polytope(vec![belief.center.clone()]));
        }
        if belief.covers_simplex() {
            return Ok(polytope(simplex_vertices(&belief.opponent_sizes()).vertices));
        }
        if belief.metric.is_polyhedral() {
            return Ok(polytope(ball_vertices(belief)?.vertices));
        }
        debug_assert_eq!(belief.metric, Metric::L2Concat);
        if game.num_players() == 2 {
            let opp = 1 - player;
            let matrix = (0..game.num_actions(player))
                .map(|a| {
                    (0..game.num_actions(opp))
                        .map(|b| {
                            let mut acts = [0usize; 2];
                            acts[player] = a;
                            acts[opp] = b;
                            game.payoff(player, &acts)
                        })
                        .collect()
                })
                .collect();
            return Ok(Inner::Sphere {
                matrix,
                center: belief.center[0].probs().to_vec(),
                radius: belief.radius,
            });
        }
        if belief.center.iter().all(|s| s.pure_action().is_some()) {
            let boxed = BeliefSet::new(player, belief.center.clone(), belief.radius, Metric::LinfProduct)?;
            let outer = ball_vertices(&boxed)?
                .vertices
                .iter()
                .map(|v| game.action_values(player, v))
                .collect();
            return Ok(Inner::SphereMulti {
                game: game.clone(),
                player,
                center: belief.center.clone(),
                radius: belief.radius,
                outer,
            });
        }
        Err(Error::Capability(
            "the l2 ball with several opponents is only supported around pure sub-profiles; \
             use linf or the brute-force oracle"
                .into(),
        ))
    }

    /// True when every answer is exact rather than heuristic.
    pub(crate) fn is_exact(&self) -> bool {
        matches!(self, Inner::Polytope { .. })
    }

    pub(crate) fn vertex_cols(&self) -> Option<&[Vec<f64>]> {
        match self {
            Inner::Polytope { cols, .. } => Some(cols),
            _ => None,
        }
    }

    /// Minimises `w·col(v)` over the belief set.
    pub(crate) fn minimize(&self, w: &[f64]) -> Point {
        match self {
            Inner::Polytope { points, cols } => {
                let mut best = 0;
                let mut best_val = f64::INFINITY;
                for (k, c) in cols.iter().enumerate() {
                    let v = dot(w, c);
                    if v < best_val {
                        best_val = v;
                        best = k;
                    }
                }
                Point {
                    value: best_val,
                    point: points[best].clone(),
                    col: cols[best].clone(),
                }
            }
            Inner::Sphere {
                matrix,
                center,
                radius,
            } => {
                let m = center.len();
                let c: Vec<f64> = (0..m)
                    .map(|b| matrix.iter().zip(w).map(|(row, wa)| wa * row[b]).sum())
                    .collect();
                let (_, y) = sphere::minimize_linear(&c, center, *radius);
                let col: Vec<f64> = matrix.iter().map(|row| dot(row, &y)).collect();
                Point {
                    value: dot(w, &col),
                    point: vec![MixedStrategy::from_approx(y).expect("ball point on simplex")],
                    col,
                }
            }
            Inner::SphereMulti {
                game,
                player,
                center,
                radius,
                ..
            } => multi_minimize(game, *player, center, *radius, w),
        }
    }

    pub(crate) fn maximize(&self, w: &[f64]) -> Point {
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        let mut p = self.minimize(&neg);
        p.value = -p.value;
        p
    }

    /// A value no larger than the true minimum of `w·col(v)`.
    pub(crate) fn lower_bound(&self, w: &[f64]) -> f64 {
        match self {
            Inner::SphereMulti { outer, .. } => {
                outer.iter().map(|c| dot(w, c)).fold(f64::INFINITY, f64::min)
            }
            _ => self.minimize(w).value,
        }
    }

    /// Columns at points that affinely span the belief set, used to detect
    /// whether a linear functional vanishes on the whole set.
    pub(crate) fn spanning_cols(&self) -> Vec<Vec<f64>> {
        match self {
            Inner::Polytope { cols, .. } => cols.clone(),
            Inner::Sphere {
                matrix,
                center,
                radius,
            } => {
                let mut pts = vec![center.clone()];
                let m = center.len();
                for k in 0..m {
                    let mut e = vec![0.0; m];
                    e[k] = 1.0;
                    let d = e
                        .iter()
                        .zip(center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    if d > 0.0 {
                        let t = (radius / d).min(1.0);
                        pts.push(center.iter().zip(&e).map(|(c, e)| c + t * (e - c)).collect());
                    }
                }
                pts.iter()
                    .map(|y| matrix.iter().map(|row| dot(row, y)).collect())
                    .collect()
            }
            Inner::SphereMulti {
                game,
                player,
                center,
                radius,
                ..
            } => {
                let mut out = vec![game.action_values(*player, center)];
                for j in 0..center.len() {
                    let m = center[j].len();
                    let x = center[j].probs();
                    for k in 0..m {
                        let d = ((0..m)
                            .map(|l| {
                                let e = if l == k { 1.0 } else { 0.0 };
                                (e - x[l]) * (e - x[l])
                            })
                            .sum::<f64>())
                        .sqrt();
                        if d == 0.0 {
                            continue;
                        }
                        let t = (radius / d).min(1.0);
                        let y: Vec<f64> =
                            (0..m).map(|l| x[l] + t * (if l == k { 1.0 } else { 0.0 } - x[l])).collect();
                        let mut p = center.clone();
                        p[j] = MixedStrategy::from_approx(y).expect("spanning point on simplex");
                        out.push(game.action_values(*player, &p));
                    }
                }
                out
            }
        }
    }
}

/// Block-coordinate descent over the Euclidean ball with several opponents.
///
/// The joint budget `r²` is split between opponents on a coarse grid; for
/// each split the product of per-opponent balls is searched by exact
/// alternating block minimisation, which is monotone. The result is a
/// feasible point, so its value bounds the true minimum from above.
fn multi_minimize(game: &Game, player: usize, center: &[MixedStrategy], radius: f64, w: &[f64]) -> Point {
    let k = center.len();
    let eval = |p: &[MixedStrategy]| dot(w, &game.action_values(player, p));
    let mut best_point = center.to_vec();
    let mut best = eval(center);
    let steps = 4usize;
    let mut splits = Vec::new();
    compositions(steps, k, &mut Vec::new(), &mut splits);
    for split in splits {
        let radii: Vec<f64> = split
            .iter()
            .map(|&s| radius * (s as f64 / steps as f64).sqrt())
            .collect();
        for reverse in [false, true] {
            let mut cur = center.to_vec();
            let mut val = eval(&cur);
            for _ in 0..50 {
                let before = val;
                for step in 0..k {
                    let j = if reverse { k - 1 - step } else { step };
                    if radii[j] == 0.0 {
                        continue;
                    }
                    let m = cur[j].len();
                    let c: Vec<f64> = (0..m)
                        .map(|b| {
                            let mut p = cur.clone();
                            p[j] = MixedStrategy::pure(m, b);
                            eval(&p)
                        })
                        .collect();
                    let (_, y) = sphere::minimize_linear(&c, center[j].probs(), radii[j]);
                    let mut p = cur.clone();
                    p[j] = MixedStrategy::from_approx(y).expect("ball point on simplex");
                    let v = eval(&p);
                    if v < val {
                        val = v;
                        cur = p;
                    }
                }
                if before - val <= 1e-15 * (1.0 + val.abs()) {
                    break;
                }
            }
            if val < best {
                best = val;
                best_point = cur;
            }
        }
    }
    let col = game.action_values(player, &best_point);
    Point {
        value: dot(w, &col),
        point: best_point,
        col,
    }
}

fn compositions(total: usize, parts: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        let mut v = acc.clone();
        v.push(total);
        out.push(v);
        return;
    }
    for s in 0..=total {
        acc.push(s);
        compositions(total - s, parts - 1, acc, out);
        acc.pop();
    }
}
