//! Outer optimisation over the player's own simplex.
//!
//! Every outer problem has the form `max_x min_k (x·g_k + h_k)` over a family
//! of cuts `(g_k, h_k)` indexed by belief points (and, for regret, by own
//! actions). Polytope beliefs give a finite family and one linear program;
//! Euclidean beliefs generate cuts lazily from the column oracle (Kelley's
//! cutting-plane method) until the master bound meets the attained value.

use crate::error::Result;
use crate::inner::Inner;
use crate::lp::{LinearProgram, Relation};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum OuterKind {
    /// `max_x min_v x·col(v)`.
    Maximin,
    /// `max_x min_{a,v} (x - e_a)·col(v)`, the negated worst-case regret.
    NegWorstRegret,
    /// `max_y min_v (y - incumbent)·col(v)`, positive iff strictly dominated.
    StrictGain(Vec<f64>),
}

#[derive(Debug, Clone)]
struct Cut {
    g: Vec<f64>,
    h: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct OuterResult {
    /// Objective attained by `x`, evaluated through the oracle.
    pub value: f64,
    pub x: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(m: usize, a: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[a] = 1.0;
    e
}

fn cuts_for_col(kind: &OuterKind, col: &[f64]) -> Vec<Cut> {
    match kind {
        OuterKind::Maximin => vec![Cut {
            g: col.to_vec(),
            h: 0.0,
        }],
        OuterKind::NegWorstRegret => col
            .iter()
            .map(|&ca| Cut {
                g: col.to_vec(),
                h: -ca,
            })
            .collect(),
        OuterKind::StrictGain(pi) => vec![Cut {
            g: col.to_vec(),
            h: -dot(pi, col),
        }],
    }
}

/// Objective value at `x` and the cuts active there.
fn evaluate(inner: &Inner, kind: &OuterKind, x: &[f64]) -> (f64, Vec<Cut>) {
    let m = x.len();
    match kind {
        OuterKind::Maximin => {
            let p = inner.minimize(x);
            (p.value, cuts_for_col(kind, &p.col))
        }
        OuterKind::NegWorstRegret => {
            let mut best = f64::INFINITY;
            let mut cuts = Vec::new();
            for a in 0..m {
                let w: Vec<f64> = x.iter().zip(unit(m, a)).map(|(p, e)| p - e).collect();
                let p = inner.minimize(&w);
                best = best.min(p.value);
                cuts.push(Cut {
                    g: p.col.clone(),
                    h: -p.col[a],
                });
            }
            (best, cuts)
        }
        OuterKind::StrictGain(pi) => {
            let w: Vec<f64> = x.iter().zip(pi).map(|(a, b)| a - b).collect();
            let p = inner.minimize(&w);
            (p.value, cuts_for_col(kind, &p.col))
        }
    }
}

fn master(m: usize, cuts: &[Cut]) -> Result<(f64, Vec<f64>)> {
    let mut obj = vec![0.0; m + 1];
    obj[m] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.set_free(m);
    for c in cuts {
        let mut row: Vec<f64> = c.g.iter().map(|v| -v).collect();
        row.push(1.0);
        lp.constraint(row, Relation::Le, c.h);
    }
    let mut simplex = vec![1.0; m];
    simplex.push(0.0);
    lp.constraint(simplex, Relation::Eq, 1.0);
    let sol = lp.solve()?;
    let x = sol.x[..m].iter().map(|v| v.max(0.0)).collect::<Vec<_>>();
    let s: f64 = x.iter().sum();
    Ok((sol.value, x.into_iter().map(|v| v / s).collect()))
}

fn initial_cuts(inner: &Inner, kind: &OuterKind) -> Vec<Cut> {
    match inner.vertex_cols() {
        Some(cols) => cols.iter().flat_map(|c| cuts_for_col(kind, c)).collect(),
        None => inner
            .spanning_cols()
            .iter()
            .flat_map(|c| cuts_for_col(kind, c))
            .collect(),
    }
}

pub(crate) fn solve(inner: &Inner, kind: &OuterKind, m: usize, max_iter: usize, gap: f64) -> Result<OuterResult> {
    let mut cuts = initial_cuts(inner, kind);
    let exact = inner.vertex_cols().is_some();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut upper = f64::INFINITY;
    for _ in 0..max_iter.max(1) {
        let (t, x) = master(m, &cuts)?;
        upper = upper.min(t);
        let (value, new_cuts) = evaluate(inner, kind, &x);
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, x));
        }
        let lower = best.as_ref().map(|b| b.0).unwrap_or(f64::NEG_INFINITY);
        if exact || upper - lower <= gap * (1.0 + upper.abs()) {
            break;
        }
        cuts.extend(new_cuts);
    }
    let (value, x) = best.expect("at least one master solve");
    Ok(OuterResult { value, x })
}

/// Searches for a strategy `y` with `(y - pi)·col(v) >= -slack` on the whole
/// belief set that maximises the summed gain over spanning points. Returns
/// the gain and `y`.
pub(crate) fn weak_gain(inner: &Inner, pi: &[f64], slack: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
    let m = pi.len();
    let span = inner.spanning_cols();
    let mut obj = vec![0.0; m];
    for c in &span {
        for (o, v) in obj.iter_mut().zip(c) {
            *o += v;
        }
    }
    let mut constraints: Vec<Vec<f64>> = match inner.vertex_cols() {
        Some(cols) => cols.to_vec(),
        None => span.clone(),
    };
    let exact = inner.vertex_cols().is_some();
    let base: f64 = span.iter().map(|c| dot(pi, c)).sum();
    let mut last = (0.0, pi.to_vec());
    for _ in 0..max_iter.max(1) {
        let mut lp = LinearProgram::maximize(obj.clone());
        for c in &constraints {
            lp.constraint(c.clone(), Relation::Ge, dot(pi, c) - slack);
        }
        lp.constraint(vec![1.0; m], Relation::Eq, 1.0);
        let sol = lp.solve()?;
        let y: Vec<f64> = sol.x.iter().map(|v| v.max(0.0)).collect();
        last = (sol.value - base, y.clone());
        if exact {
            break;
        }
        let w: Vec<f64> = y.iter().zip(pi).map(|(a, b)| a - b).collect();
        let p = inner.minimize(&w);
        if p.value >= -slack * 2.0 {
            break;
        }
        constraints.push(p.col);
    }
    Ok(last)
}

/// Width of the set of strategies within `slack` of the optimum, measured as
/// the largest coordinate range. Only available for polytope beliefs.
pub(crate) fn optimal_face_width(inner: &Inner, kind: &OuterKind, m: usize, value: f64, slack: f64) -> Result<Option<f64>> {
    if inner.vertex_cols().is_none() {
        return Ok(None);
    }
    let cuts = initial_cuts(inner, kind);
    let mut width: f64 = 0.0;
    for k in 0..m {
        let mut range = [0.0; 2];
        for (s, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut obj = vec![0.0; m + 1];
            obj[k] = sign;
            let mut lp = LinearProgram::maximize(obj);
            lp.set_free(m);
            for c in &cuts {
                let mut row: Vec<f64> = c.g.iter().map(|v| -v).collect();
                row.push(1.0);
                lp.constraint(row, Relation::Le, c.h);
            }
            let mut trow = vec![0.0; m + 1];
            trow[m] = 1.0;
            lp.constraint(trow, Relation::Ge, value - slack);
            let mut simplex = vec![1.0; m];
            simplex.push(0.0);
            lp.constraint(simplex, Relation::Eq, 1.0);
            range[s] = lp.solve()?.x[k];
        }
        width = width.max(range[0] - range[1]);
    }
    Ok(Some(width))
}
