//! Seeded random games and strategies.
//!
//! Every unit of work gets its own stream derived from `(seed, index)`, so
//! results do not depend on thread scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{Game, MixedStrategy, Profile};

pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Payoffs i.i.d. uniform on `[lo, hi)`.
pub fn random_game(rng: &mut impl Rng, shape: &[usize], lo: f64, hi: f64) -> Game {
    let total: usize = shape.iter().product();
    let payoffs = (0..shape.len())
        .map(|_| (0..total).map(|_| rng.gen_range(lo..hi)).collect())
        .collect();
    Game::from_shape(shape, payoffs).expect("finite payoffs of matching length")
}

/// Uniform on the simplex (flat Dirichlet).
pub fn random_strategy(rng: &mut impl Rng, m: usize) -> MixedStrategy {
    let w: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    MixedStrategy::from_approx(w.into_iter().map(|x| x / s).collect()).expect("positive weights")
}

pub fn random_profile(rng: &mut impl Rng, game: &Game) -> Profile {
    Profile::new((0..game.num_players()).map(|i| random_strategy(rng, game.num_actions(i))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = random_game(&mut task_rng(3, 0), &[2, 2], 0.0, 1.0);
        let b = random_game(&mut task_rng(3, 0), &[2, 2], 0.0, 1.0);
        let c = random_game(&mut task_rng(3, 1), &[2, 2], 0.0, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.min_payoff() >= 0.0 && a.max_payoff() < 1.0);
    }

    #[test]
    fn strategies_on_simplex() {
        let mut rng = task_rng(9, 0);
        for _ in 0..100 {
            let s = random_strategy(&mut rng, 3);
            assert!(s.is_totally_mixed());
        }
    }
}
