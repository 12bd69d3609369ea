//! Exact linear optimisation over a Euclidean ball intersected with a simplex.
//!
//! The minimiser lies in the relative interior of some face `F` of the
//! simplex. Inside `aff(F)` the ball is a lower-dimensional ball around the
//! projection `p` of the center, so either the objective is constant on `F`
//! or the minimiser is `p - rho * g / |g|` with `g` the objective projected
//! onto `aff(F)`. Enumerating faces therefore finds the exact optimum.

/// Largest simplex dimension accepted by the face enumeration.
pub const MAX_DIM: usize = 16;

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Minimises `c·y` over `{y in simplex : |y - x| <= r}` where `x` lies on the
/// simplex. Returns the optimal value and a minimiser.
pub fn minimize_linear(c: &[f64], x: &[f64], r: f64) -> (f64, Vec<f64>) {
    let m = x.len();
    assert_eq!(c.len(), m);
    assert!(m <= MAX_DIM, "simplex dimension {m} too large for face enumeration");
    let r2 = r * r;
    let mut best = (dot(c, x), x.to_vec());
    let mut consider = |y: Vec<f64>| {
        let v = dot(c, &y);
        if v < best.0 {
            best = (v, y);
        }
    };

    for mask in 1u32..(1u32 << m) {
        let face: Vec<usize> = (0..m).filter(|&k| mask >> k & 1 == 1).collect();
        let size = face.len() as f64;
        if face.len() == 1 {
            let mut e = vec![0.0; m];
            e[face[0]] = 1.0;
            if dist2(&e, x) <= r2 * (1.0 + 1e-12) + 1e-24 {
                consider(e);
            }
            continue;
        }
        // projection of x onto aff(F)
        let shift = (1.0 - face.iter().map(|&k| x[k]).sum::<f64>()) / size;
        let mut p = vec![0.0; m];
        for &k in &face {
            p[k] = x[k] + shift;
        }
        let d2 = dist2(&p, x);
        if d2 > r2 {
            continue;
        }
        let rho = (r2 - d2).sqrt();
        let mean = face.iter().map(|&k| c[k]).sum::<f64>() / size;
        let g: Vec<f64> = face.iter().map(|&k| c[k] - mean).collect();
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        if gnorm <= 1e-14 * scale {
            // objective constant on the face: any feasible point of it will do
            let sub: Vec<f64> = face.iter().map(|&k| x[k]).collect();
            let proj = project_to_simplex(&sub);
            let mut y = vec![0.0; m];
            for (&k, v) in face.iter().zip(proj) {
                y[k] = v;
            }
            if dist2(&y, x) <= r2 * (1.0 + 1e-12) + 1e-24 {
                consider(y);
            }
            continue;
        }
        let mut y = p;
        let mut ok = true;
        for (&k, gk) in face.iter().zip(&g) {
            y[k] -= rho * gk / gnorm;
            if y[k] < -1e-13 {
                ok = false;
                break;
            }
        }
        if ok {
            for v in y.iter_mut() {
                *v = v.max(0.0);
            }
            let s: f64 = y.iter().sum();
            y.iter_mut().for_each(|v| *v /= s);
            consider(y);
        }
    }
    best
}

/// Maximises `c·y` over the same set.
pub fn maximize_linear(c: &[f64], x: &[f64], r: f64) -> (f64, Vec<f64>) {
    let neg: Vec<f64> = c.iter().map(|v| -v).collect();
    let (v, y) = minimize_linear(&neg, x, r);
    (-v, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection() {
        let p = project_to_simplex(&[0.5, 0.5, 0.5]);
        for v in p {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_eq!(project_to_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn two_actions_reduce_to_an_interval() {
        // |y - x|_2 <= r on the 2-simplex moves the first coordinate by r / sqrt 2
        let r = 0.1 * 2f64.sqrt();
        let (v, y) = minimize_linear(&[1.0, 2.0], &[0.5, 0.5], r);
        assert_abs_diff_eq!(y[1], 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 1.4, epsilon = 1e-12);
        let (v, _) = maximize_linear(&[1.0, 2.0], &[0.5, 0.5], r);
        assert_abs_diff_eq!(v, 1.6, epsilon = 1e-12);
    }

    #[test]
    fn ball_clipped_by_simplex() {
        let (v, y) = minimize_linear(&[1.0, 0.0, 0.0], &[0.1, 0.45, 0.45], 1.0);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        assert!(y[0].abs() < 1e-12);
        // large radius reaches a vertex
        let (v, y) = minimize_linear(&[3.0, 1.0, 2.0], &[1.0 / 3.0; 3], 2.0);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn matches_dense_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = project_to_simplex(&[rng.gen(), rng.gen(), rng.gen()]);
            let r: f64 = rng.gen_range(0.0..0.8);
            let (v, y) = minimize_linear(&c, &x, r);
            assert!(dist2(&y, &x).sqrt() <= r + 1e-9);
            assert!(y.iter().all(|&p| p >= 0.0));
            let n = 60;
            for i in 0..=n {
                for j in 0..=n - i {
                    let z = [i as f64 / n as f64, j as f64 / n as f64, (n - i - j) as f64 / n as f64];
                    if dist2(&z, &x) <= r * r {
                        assert!(dot(&c, &z) >= v - 1e-9);
                    }
                }
            }
        }
    }
}
