//! Built-in example games.

use crate::error::{Error, Result};
use crate::game::Game;

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Up/Down against Left/Right; both diagonal profiles are pure Nash
/// equilibria but only (Up, Left) survives trembles.
pub fn trembling_hand() -> Game {
    Game::new(
        vec![labels(&["Up", "Down"]), labels(&["Left", "Right"])],
        vec![vec![1.0, 2.0, 0.0, 2.0], vec![1.0, 0.0, 2.0, 2.0]],
    )
    .expect("valid game")
    .with_name("trembling-hand")
}

pub fn matching_pennies() -> Game {
    Game::new(
        vec![labels(&["Heads", "Tails"]), labels(&["Heads", "Tails"])],
        vec![vec![1.0, -1.0, -1.0, 1.0], vec![-1.0, 1.0, 1.0, -1.0]],
    )
    .expect("valid game")
    .with_name("matching-pennies")
}

pub fn stag_hunt() -> Game {
    Game::new(
        vec![labels(&["Stag", "Hare"]), labels(&["Stag", "Hare"])],
        vec![vec![5.0, -1.0, 3.0, 1.0], vec![5.0, 3.0, -1.0, 1.0]],
    )
    .expect("valid game")
    .with_name("stag-hunt")
}

/// Defection strictly dominates cooperation for both players.
pub fn prisoners_dilemma() -> Game {
    Game::new(
        vec![labels(&["Cooperate", "Defect"]), labels(&["Cooperate", "Defect"])],
        vec![vec![3.0, 0.0, 5.0, 1.0], vec![3.0, 5.0, 0.0, 1.0]],
    )
    .expect("valid game")
    .with_name("prisoners-dilemma")
}

/// Every player receives `value` at every profile.
pub fn constant(shape: &[usize], value: f64) -> Result<Game> {
    let total: usize = shape.iter().product();
    Ok(Game::from_shape(shape, vec![vec![value; total]; shape.len()])?.with_name("constant"))
}

/// Looks up a built-in game by name.
pub fn by_name(name: &str) -> Result<Game> {
    match name {
        "trembling" | "trembling-hand" => Ok(trembling_hand()),
        "pennies" | "matching-pennies" => Ok(matching_pennies()),
        "staghunt" | "stag-hunt" => Ok(stag_hunt()),
        "pd" | "prisoners-dilemma" => Ok(prisoners_dilemma()),
        "constant" => constant(&[2, 2], 1.0),
        other => Err(Error::InvalidParameter(format!("unknown built-in game '{other}'"))),
    }
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "trembling-hand",
    "matching-pennies",
    "stag-hunt",
    "prisoners-dilemma",
    "constant",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{MixedStrategy, Profile};

    #[test]
    fn table_entries() {
        let g = trembling_hand();
        assert_eq!(g.expected_utility(&Profile::pure(&g, &[0, 0]), 0).unwrap(), 1.0);
        assert_eq!(g.social_welfare(&Profile::pure(&g, &[1, 1])).unwrap(), 4.0);
        let g = stag_hunt();
        assert_eq!(g.social_welfare(&Profile::pure(&g, &[0, 0])).unwrap(), 10.0);
        let p = Profile::new(vec![MixedStrategy::new(vec![0.5, 0.5]).unwrap(), MixedStrategy::pure(2, 0)]);
        assert_eq!(g.expected_utility(&p, 0).unwrap(), 4.0);
    }

    #[test]
    fn pennies_is_zero_sum() {
        let g = matching_pennies();
        let u = MixedStrategy::uniform(2);
        let p = Profile::new(vec![u.clone(), u]);
        assert_eq!(g.expected_utility(&p, 0).unwrap(), 0.0);
        assert_eq!(g.expected_utility(&p, 1).unwrap(), 0.0);
        for a in g.pure_profiles().collect::<Vec<_>>() {
            assert_eq!(g.pure_social_welfare(&a), 0.0);
        }
    }

    #[test]
    fn lookup() {
        for name in BUILTIN_NAMES {
            assert!(by_name(name).is_ok());
        }
        assert!(by_name("chess").is_err());
    }
}
