//! Small dense linear programming and linear-system routines.
//!
//! The problems solved here are desk-scale (tens of variables, at most a few
//! hundred constraints), so a dense two-phase tableau simplex with Bland's
//! anti-cycling rule is both adequate and easy to audit.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const RAY_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `maximize c·x` subject to linear constraints. Variables are nonnegative
/// unless declared free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<Row>,
    minimize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            free: vec![false; n],
            rows: Vec::new(),
            minimize: false,
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        let mut lp = Self::maximize(objective.into_iter().map(|c| -c).collect());
        lp.minimize = true;
        lp
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.free[var] = true;
        self
    }

    pub fn constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.objective.len(), "constraint width");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Replaces the objective, keeping the optimisation sense.
    pub fn set_objective(&mut self, objective: Vec<f64>) -> &mut Self {
        assert_eq!(objective.len(), self.objective.len());
        self.objective = if self.minimize {
            objective.into_iter().map(|c| -c).collect()
        } else {
            objective
        };
        self
    }

    /// Solves the program. Objective values are reported in the sense the
    /// program was built with, so `minimize` problems return the minimum.
    pub fn solve(&self) -> Result<LpSolution> {
        let mut sol = self.solve_max()?;
        if self.minimize {
            sol.value = -sol.value;
        }
        Ok(sol)
    }

    fn solve_max(&self) -> Result<LpSolution> {
        // column layout: original vars (free ones split into +/-), slacks, artificials
        let n = self.objective.len();
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
        let mut ncols = 0;
        for j in 0..n {
            if self.free[j] {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of.push((ncols, None));
                ncols += 1;
            }
        }
        let nstruct = ncols;
        let m = self.rows.len();

        // normalise rows to rhs >= 0
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
        for row in &self.rows {
            let mut coeffs = vec![0.0; nstruct];
            for j in 0..n {
                let (p, q) = col_of[j];
                coeffs[p] = row.coeffs[j];
                if let Some(q) = q {
                    coeffs[q] = -row.coeffs[j];
                }
            }
            let (mut rel, mut rhs) = (row.relation, row.rhs);
            if rhs < 0.0 {
                coeffs.iter_mut().for_each(|c| *c = -*c);
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push((coeffs, rel, rhs));
        }

        let nslack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let nart = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let total = nstruct + nslack + nart;
        let width = total + 1;
        let mut t = vec![0.0; (m + 1) * width];
        let mut basis = vec![0usize; m];
        let mut s = nstruct;
        let mut a = nstruct + nslack;
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            let r = &mut t[i * width..(i + 1) * width];
            r[..nstruct].copy_from_slice(coeffs);
            r[total] = *rhs;
            match rel {
                Relation::Le => {
                    r[s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    r[s] = -1.0;
                    s += 1;
                    r[a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    r[a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        let mut tab = Tableau {
            t,
            m,
            width,
            basis,
        };

        if nart > 0 {
            // phase 1: maximise -(sum of artificials)
            let mut obj = vec![0.0; total];
            for o in obj.iter_mut().skip(nstruct + nslack) {
                *o = -1.0;
            }
            tab.set_objective(&obj);
            tab.run(total)?;
            if tab.objective_value() < -FEAS_EPS * (1.0 + max_abs_rhs(&rows)) {
                return Err(Error::Lp("infeasible".into()));
            }
            // drive artificials out of the basis; their residual level is
            // within tolerance and is rounded to zero first so that the
            // pivot cannot break primal feasibility
            for i in 0..m {
                if tab.basis[i] >= nstruct + nslack {
                    tab.t[i * tab.width + total] = 0.0;
                    let best = (0..nstruct + nslack)
                        .map(|j| (j, tab.at(i, j).abs()))
                        .filter(|&(_, v)| v > PIVOT_EPS)
                        .max_by(|a, b| a.1.total_cmp(&b.1));
                    if let Some((j, _)) = best {
                        tab.pivot(i, j);
                    }
                }
            }
        }

        let mut obj = vec![0.0; total];
        for j in 0..n {
            let (p, q) = col_of[j];
            obj[p] = self.objective[j];
            if let Some(q) = q {
                obj[q] = -self.objective[j];
            }
        }
        tab.set_objective(&obj);
        // artificial columns stay out of phase 2
        tab.run(nstruct + nslack)?;

        let mut values = vec![0.0; total];
        for i in 0..m {
            values[tab.basis[i]] = tab.at(i, total);
        }
        let x: Vec<f64> = (0..n)
            .map(|j| {
                let (p, q) = col_of[j];
                values[p] - q.map_or(0.0, |q| values[q])
            })
            .collect();
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { value, x })
    }
}

fn max_abs_rhs(rows: &[(Vec<f64>, Relation, f64)]) -> f64 {
    rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max)
}

struct Tableau {
    t: Vec<f64>,
    m: usize,
    width: usize,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    /// Objective row holds reduced costs `z_j - c_j`; the last entry is the value.
    fn set_objective(&mut self, c: &[f64]) {
        let w = self.width;
        let m = self.m;
        let obj = m * w;
        for j in 0..w {
            self.t[obj + j] = if j < c.len() { -c[j] } else { 0.0 };
        }
        for i in 0..m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.t[obj + j] += cb * self.t[i * w + j];
                }
            }
        }
    }

    fn objective_value(&self) -> f64 {
        self.t[self.m * self.width + self.width - 1]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.t[row * w + col];
        for j in 0..w {
            self.t[row * w + j] /= p;
        }
        let pivot_row: Vec<f64> = self.t[row * w..(row + 1) * w].to_vec();
        for i in 0..=self.m {
            if i == row {
                continue;
            }
            let f = self.t[i * w + col];
            if f != 0.0 {
                for j in 0..w {
                    self.t[i * w + j] -= f * pivot_row[j];
                }
                self.t[i * w + col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Primal simplex with Bland's rule over the first `ncols` columns.
    fn run(&mut self, ncols: usize) -> Result<()> {
        let w = self.width;
        let rhs = w - 1;
        let max_iter = 50_000;
        let obj = self.m * w;
        let scale = (0..ncols).map(|j| self.t[obj + j].abs()).fold(1.0, f64::max);
        // columns whose negative reduced cost is rounding noise without a ray
        let mut ignored = vec![false; ncols];
        for _ in 0..max_iter {
            let entering = (0..ncols).find(|&j| !ignored[j] && self.t[obj + j] < -PIVOT_EPS);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i * w + col];
                if a > PIVOT_EPS {
                    let ratio = self.t[i * w + rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-14
                                || (ratio <= best + 1e-14 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => {
                    self.pivot(row, col);
                    ignored.iter_mut().for_each(|f| *f = false);
                }
                None if self.t[obj + col] < -RAY_EPS * scale => return Err(Error::Lp("unbounded".into())),
                None => ignored[col] = true,
            }
        }
        Err(Error::Lp("iteration limit reached".into()))
    }
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = m[i][col] / m[col][col];
                if f != 0.0 {
                    for j in col..=n {
                        m[i][j] -= f * m[col][j];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.constraint(vec![1.0, 0.0], Relation::Le, 4.0)
            .constraint(vec![0.0, 2.0], Relation::Le, 12.0)
            .constraint(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.value, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn matching_pennies_value_with_free_variable() {
        // max t s.t. t <= x.col_k, sum x = 1
        let cols = [[1.0, -1.0], [-1.0, 1.0]];
        let mut lp = LinearProgram::maximize(vec![0.0, 0.0, 1.0]);
        lp.set_free(2);
        for c in cols {
            lp.constraint(vec![-c[0], -c[1], 1.0], Relation::Le, 0.0);
        }
        lp.constraint(vec![1.0, 1.0, 0.0], Relation::Eq, 1.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn minimise_with_ge_rows() {
        // min x + y, x + 2y >= 4, 3x + y >= 6 -> 2.8 at (1.6, 1.2)
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.constraint(vec![1.0, 2.0], Relation::Ge, 4.0)
            .constraint(vec![3.0, 1.0], Relation::Ge, 6.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.value, 2.8, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constraint(vec![1.0], Relation::Le, 1.0)
            .constraint(vec![1.0], Relation::Ge, 2.0);
        assert!(lp.solve().is_err());
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constraint(vec![1.0], Relation::Ge, 0.0);
        assert!(lp.solve().is_err());
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling example under Dantzig's rule
        let mut lp = LinearProgram::maximize(vec![10.0, -57.0, -9.0, -24.0]);
        lp.constraint(vec![0.5, -5.5, -2.5, 9.0], Relation::Le, 0.0)
            .constraint(vec![0.5, -1.5, -0.5, 1.0], Relation::Le, 0.0)
            .constraint(vec![1.0, 0.0, 0.0, 0.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn dense_solve() {
        let x = solve_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]], &[3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.4, epsilon = 1e-12);
        assert!(solve_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]], &[1.0, 2.0]).is_none());
    }
}
