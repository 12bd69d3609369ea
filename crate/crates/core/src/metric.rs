//! Metrics on opponent sub-profiles and the belief balls built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, OpponentProfile};
use crate::lp::solve_dense;

/// Additive slack on ball membership, guarding floating-point boundary points.
pub const CONTAINS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Metric {
    /// Euclidean distance between the concatenated probability vectors.
    #[default]
    #[serde(rename = "l2")]
    L2Concat,
    /// Manhattan distance between the concatenated probability vectors.
    #[serde(rename = "l1")]
    L1Concat,
    /// Largest coordinate difference of any single opponent; balls are products.
    #[serde(rename = "linf")]
    LinfProduct,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::L2Concat, Metric::L1Concat, Metric::LinfProduct];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::L2Concat => "l2",
            Metric::L1Concat => "l1",
            Metric::LinfProduct => "linf",
        }
    }

    /// Whether balls of this metric intersected with the simplex are polytopes.
    pub fn is_polyhedral(self) -> bool {
        !matches!(self, Metric::L2Concat)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "l2_concat" => Ok(Metric::L2Concat),
            "l1" | "l1_concat" => Ok(Metric::L1Concat),
            "linf" | "linf_product" => Ok(Metric::LinfProduct),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric '{other}', expected one of l2, l1, linf"
            ))),
        }
    }
}

fn check_shapes(x: &[MixedStrategy], y: &[MixedStrategy]) -> Result<()> {
    if x.len() != y.len() || x.iter().zip(y).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::Shape("sub-profiles have different shapes".into()));
    }
    Ok(())
}

pub fn distance(metric: Metric, x: &[MixedStrategy], y: &[MixedStrategy]) -> Result<f64> {
    check_shapes(x, y)?;
    let diffs = x
        .iter()
        .zip(y)
        .flat_map(|(a, b)| a.probs().iter().zip(b.probs()).map(|(p, q)| (p - q).abs()));
    Ok(match metric {
        Metric::L2Concat => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Metric::L1Concat => diffs.sum(),
        Metric::LinfProduct => diffs.fold(0.0, f64::max),
    })
}

/// The opponent sub-profiles player `owner` considers possible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefSet {
    pub owner: usize,
    pub center: OpponentProfile,
    pub radius: f64,
    pub metric: Metric,
}

impl BeliefSet {
    pub fn new(owner: usize, center: OpponentProfile, radius: f64, metric: Metric) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be finite and nonnegative, got {radius}"
            )));
        }
        if center.is_empty() {
            return Err(Error::Shape("belief center has no opponents".into()));
        }
        Ok(Self {
            owner,
            center,
            radius,
            metric,
        })
    }

    /// Ball around the opponents of `player` in `profile`, validated against `game`.
    pub fn around(
        game: &Game,
        profile: &crate::game::Profile,
        player: usize,
        radius: f64,
        metric: Metric,
    ) -> Result<Self> {
        game.check_profile(profile)?;
        Self::new(player, profile.opponents(player), radius, metric)
    }

    pub fn opponent_sizes(&self) -> Vec<usize> {
        self.center.iter().map(MixedStrategy::len).collect()
    }

    pub fn contains(&self, point: &[MixedStrategy]) -> Result<bool> {
        let d = distance(self.metric, &self.center, point)?;
        Ok(d <= self.radius + CONTAINS_TOL)
    }

    /// Largest distance from the center to any point of the opponent simplices.
    pub fn max_reach(&self) -> f64 {
        match self.metric {
            Metric::LinfProduct => self
                .center
                .iter()
                .flat_map(|s| s.probs().iter().map(|&p| p.max(1.0 - p)))
                .fold(0.0, f64::max),
            Metric::L1Concat => self
                .center
                .iter()
                .map(|s| 2.0 * (1.0 - s.probs().iter().copied().fold(f64::INFINITY, f64::min)))
                .sum(),
            Metric::L2Concat => self
                .center
                .iter()
                .map(|s| {
                    let sq: f64 = s.probs().iter().map(|p| p * p).sum();
                    let lo = s.probs().iter().copied().fold(f64::INFINITY, f64::min);
                    sq - 2.0 * lo + 1.0
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// True when the ball contains every opponent sub-profile.
    pub fn covers_simplex(&self) -> bool {
        self.radius + CONTAINS_TOL >= self.max_reach()
    }
}

/// A finite vertex list whose convex hull is a belief set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexPolytope {
    pub vertices: Vec<OpponentProfile>,
    /// Short description of what the polytope realises.
    pub source: String,
}

impl VertexPolytope {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Every pure opponent sub-profile, i.e. the vertices of the product of simplices.
pub fn simplex_vertices(sizes: &[usize]) -> VertexPolytope {
    let per: Vec<Vec<MixedStrategy>> = sizes
        .iter()
        .map(|&m| (0..m).map(|a| MixedStrategy::pure(m, a)).collect())
        .collect();
    VertexPolytope {
        vertices: cartesian(&per),
        source: "full simplex".into(),
    }
}

fn cartesian(per: &[Vec<MixedStrategy>]) -> Vec<OpponentProfile> {
    let mut out: Vec<OpponentProfile> = vec![Vec::new()];
    for options in per {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |s| {
                    let mut p = prefix.clone();
                    p.push(s.clone());
                    p
                })
            })
            .collect();
    }
    out
}

fn push_unique(list: &mut Vec<Vec<f64>>, v: Vec<f64>, tol: f64) {
    let dup = list
        .iter()
        .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= tol));
    if !dup {
        list.push(v);
    }
}

fn to_strategy(mut v: Vec<f64>) -> MixedStrategy {
    // snap solver noise onto the simplex
    for p in v.iter_mut() {
        if p.abs() < 1e-14 {
            *p = 0.0;
        }
    }
    MixedStrategy::from_approx(v).expect("vertex lies on the simplex")
}

/// Vertices of `{y in simplex : |y_k - x_k| <= r for all k}`.
fn box_slice_vertices(x: &[f64], r: f64) -> Vec<Vec<f64>> {
    let m = x.len();
    let lo: Vec<f64> = x.iter().map(|&v| (v - r).max(0.0)).collect();
    let hi: Vec<f64> = x.iter().map(|&v| (v + r).min(1.0)).collect();
    let mut out = Vec::new();
    for free in 0..m {
        for mask in 0u64..(1u64 << (m - 1)) {
            let mut y = vec![0.0; m];
            let mut bit = 0;
            for k in 0..m {
                if k == free {
                    continue;
                }
                y[k] = if mask >> bit & 1 == 1 { hi[k] } else { lo[k] };
                bit += 1;
            }
            let rest: f64 = y.iter().sum();
            let v = 1.0 - rest;
            if v >= lo[free] - 1e-12 && v <= hi[free] + 1e-12 {
                y[free] = v.clamp(lo[free], hi[free]);
                push_unique(&mut out, y, 1e-12);
            }
        }
    }
    out
}

/// Vertices of `{y in simplex : |y - x|_1 <= r}` by active-set enumeration.
///
/// The ball is described by the sign inequalities `s·(y - x) <= r`; a vertex
/// is where `m - 1` of these or of the bounds `y_k >= 0` are tight together
/// with `sum y = 1`.
fn l1_slice_vertices(x: &[f64], r: f64) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut halfspaces: Vec<(Vec<f64>, f64)> = Vec::new();
    for k in 0..m {
        let mut a = vec![0.0; m];
        a[k] = -1.0;
        halfspaces.push((a, 0.0));
    }
    for mask in 0u64..(1u64 << m) {
        let s: Vec<f64> = (0..m).map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 }).collect();
        let b = r + s.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        halfspaces.push((s, b));
    }
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(m - 1);
    choose(halfspaces.len(), m - 1, 0, &mut chosen, &mut |idx| {
        let mut a: Vec<Vec<f64>> = idx.iter().map(|&h| halfspaces[h].0.clone()).collect();
        let mut b: Vec<f64> = idx.iter().map(|&h| halfspaces[h].1).collect();
        a.push(vec![1.0; m]);
        b.push(1.0);
        if let Some(y) = solve_dense(&a, &b) {
            let feasible = halfspaces
                .iter()
                .all(|(h, c)| h.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() <= c + 1e-10);
            if feasible {
                let y = y.into_iter().map(|v| v.max(0.0)).collect();
                push_unique(&mut out, y, 1e-10);
            }
        }
    });
    out
}

fn choose(n: usize, k: usize, start: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if acc.len() == k {
        f(acc);
        return;
    }
    for i in start..n {
        if n - i < k - acc.len() {
            break;
        }
        acc.push(i);
        choose(n, k, i + 1, acc, f);
        acc.pop();
    }
}

/// Largest per-opponent action count for which the L1 active-set enumeration runs.
pub const L1_MAX_ACTIONS: usize = 6;

/// Extreme points of a polyhedral belief set.
pub fn ball_vertices(belief: &BeliefSet) -> Result<VertexPolytope> {
    if belief.radius == 0.0 {
        return Ok(VertexPolytope {
            vertices: vec![belief.center.clone()],
            source: "radius 0".into(),
        });
    }
    match belief.metric {
        Metric::L2Concat => Err(Error::Capability(
            "the l2 ball is not a polytope; use the iterative inner solver".into(),
        )),
        Metric::LinfProduct => {
            if belief.covers_simplex() {
                return Ok(simplex_vertices(&belief.opponent_sizes()));
            }
            let per: Vec<Vec<MixedStrategy>> = belief
                .center
                .iter()
                .map(|s| {
                    box_slice_vertices(s.probs(), belief.radius)
                        .into_iter()
                        .map(to_strategy)
                        .collect()
                })
                .collect();
            Ok(VertexPolytope {
                vertices: cartesian(&per),
                source: format!("linf ball of radius {}", belief.radius),
            })
        }
        Metric::L1Concat => {
            if belief.center.len() != 1 {
                return Err(Error::Capability(
                    "the joint l1 ball over several opponents is not a product of polytopes; \
                     use linf or the brute-force oracle"
                        .into(),
                ));
            }
            if belief.covers_simplex() {
                return Ok(simplex_vertices(&belief.opponent_sizes()));
            }
            let x = belief.center[0].probs();
            if x.len() > L1_MAX_ACTIONS {
                return Err(Error::Capability(format!(
                    "l1 vertex enumeration supports at most {L1_MAX_ACTIONS} opponent actions"
                )));
            }
            let vertices = l1_slice_vertices(x, belief.radius)
                .into_iter()
                .map(|v| vec![to_strategy(v)])
                .collect();
            Ok(VertexPolytope {
                vertices,
                source: format!("l1 ball of radius {}", belief.radius),
            })
        }
    }
}

/// Extreme points of the closed noisy slice `{pi : pi_j(a_j) >= 1 - eps for all j}`
/// around the pure opponent sub-profile `actions` (with `sizes[j]` actions each).
pub fn noisy_variant_vertices(actions: &[usize], sizes: &[usize], epsilon: f64) -> Result<VertexPolytope> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "noise level must lie in (0, 1), got {epsilon}"
        )));
    }
    if actions.len() != sizes.len() || actions.iter().zip(sizes).any(|(a, m)| a >= m) {
        return Err(Error::Shape("pure sub-profile does not match action counts".into()));
    }
    let per: Vec<Vec<MixedStrategy>> = actions
        .iter()
        .zip(sizes)
        .map(|(&a, &m)| {
            let mut list = vec![MixedStrategy::pure(m, a)];
            for b in (0..m).filter(|&b| b != a) {
                let mut v = vec![0.0; m];
                v[a] = 1.0 - epsilon;
                v[b] = epsilon;
                list.push(to_strategy(v));
            }
            list
        })
        .collect();
    Ok(VertexPolytope {
        vertices: cartesian(&per),
        source: format!("noisy variants at level {epsilon}"),
    })
}
