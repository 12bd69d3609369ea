//! Finite normal-form games, mixed strategies and profiles.
//!
//! Payoff tensors are stored flat in row-major order over the players'
//! action indices, with the last player's index varying fastest. Players and
//! actions are addressed by index; labels only matter for presentation.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of a probability vector.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A probability vector over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidStrategy("empty probability vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidStrategy(format!(
                "probability {p} is negative or not finite"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidStrategy(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self(probs))
    }

    /// Builds a strategy from a vector produced by floating-point arithmetic:
    /// entries within `1e-9` below zero are clamped and the vector is
    /// renormalised.
    pub fn from_approx(mut probs: Vec<f64>) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < 0.0 && *p > -1e-9 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if !(sum.is_finite() && (sum - 1.0).abs() < 1e-6) {
            return Err(Error::InvalidStrategy(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        probs.iter_mut().for_each(|p| *p /= sum);
        Self::new(probs)
    }

    pub fn pure(num_actions: usize, action: usize) -> Self {
        assert!(action < num_actions, "action {action} out of range");
        let mut probs = vec![0.0; num_actions];
        probs[action] = 1.0;
        Self(probs)
    }

    pub fn uniform(num_actions: usize) -> Self {
        assert!(num_actions > 0);
        Self(vec![1.0 / num_actions as f64; num_actions])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&a| self.0[a] > 0.0).collect()
    }

    pub fn is_totally_mixed(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }

    /// The action played with certainty, if any.
    pub fn pure_action(&self) -> Option<usize> {
        let support = self.support();
        match support.as_slice() {
            [a] if self.0[*a] == 1.0 => Some(*a),
            _ => None,
        }
    }

    pub fn dot(&self, values: &[f64]) -> f64 {
        self.0.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &MixedStrategy) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for MixedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| format!("{p}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The strategies of every player except one, in player order.
pub type OpponentProfile = Vec<MixedStrategy>;

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Profile(Vec<MixedStrategy>);

impl Profile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Self {
        Self(strategies)
    }

    pub fn pure(game: &Game, actions: &[usize]) -> Self {
        Self(
            actions
                .iter()
                .enumerate()
                .map(|(i, &a)| MixedStrategy::pure(game.num_actions(i), a))
                .collect(),
        )
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.0
    }

    pub fn strategy(&self, player: usize) -> &MixedStrategy {
        &self.0[player]
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    /// The opponent sub-profile of `player`.
    pub fn opponents(&self, player: usize) -> OpponentProfile {
        self.0
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != player)
            .map(|(_, s)| s.clone())
            .collect()
    }

    /// Replaces the strategy of `player`.
    pub fn with_strategy(&self, player: usize, strategy: MixedStrategy) -> Self {
        let mut s = self.0.clone();
        s[player] = strategy;
        Self(s)
    }

    pub fn pure_actions(&self) -> Option<Vec<usize>> {
        self.0.iter().map(MixedStrategy::pure_action).collect()
    }

    /// Parses the literal form `p0:0.5,0.5;p1:1,0`. The `pK:` prefixes are
    /// optional but, when present, must appear in order.
    pub fn parse_literal(text: &str) -> Result<Self> {
        let mut strategies = Vec::new();
        for (k, part) in text.split(';').map(str::trim).enumerate() {
            if part.is_empty() {
                continue;
            }
            let body = match part.split_once(':') {
                Some((label, body)) => {
                    let expected = format!("p{k}");
                    if label.trim() != expected {
                        return Err(Error::Parse {
                            context: format!("profile component {k}"),
                            message: format!("expected label '{expected}', found '{label}'"),
                        });
                    }
                    body
                }
                None => part,
            };
            let probs = body
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|e| Error::Parse {
                        context: format!("profile component {k}"),
                        message: format!("'{t}': {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            strategies.push(MixedStrategy::new(probs).map_err(|e| Error::Parse {
                context: format!("profile component {k}"),
                message: e.to_string(),
            })?);
        }
        Ok(Self(strategies))
    }

    pub fn to_literal(&self) -> String {
        self.0
            .iter()
            .enumerate()
            .map(|(i, s)| format!("p{i}:{s}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// A finite normal-form game with real-valued payoff tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    name: Option<String>,
    description: Option<String>,
    actions: Vec<Vec<String>>,
    payoffs: Vec<Vec<f64>>,
    strides: Vec<usize>,
}

impl Game {
    pub fn new(actions: Vec<Vec<String>>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = actions.len();
        if n < 2 {
            return Err(Error::Shape(format!("a game needs at least 2 players, got {n}")));
        }
        for (i, labels) in actions.iter().enumerate() {
            if labels.is_empty() {
                return Err(Error::Shape(format!("player {i} has no actions")));
            }
            let unique: HashSet<&String> = labels.iter().collect();
            if unique.len() != labels.len() {
                return Err(Error::Shape(format!("player {i} has duplicate action labels")));
            }
        }
        if payoffs.len() != n {
            return Err(Error::Shape(format!(
                "expected {n} payoff tensors, found {}",
                payoffs.len()
            )));
        }
        let total: usize = actions.iter().map(Vec::len).product();
        for (i, tensor) in payoffs.iter().enumerate() {
            if tensor.len() != total {
                return Err(Error::Shape(format!(
                    "payoff tensor of player {i} has {} entries, expected {total}",
                    tensor.len()
                )));
            }
            if let Some(k) = tensor.iter().position(|v| !v.is_finite()) {
                return Err(Error::Shape(format!(
                    "payoff tensor of player {i} has a non-finite entry at index {k}"
                )));
            }
        }
        let mut strides = vec![1; n];
        for j in (0..n - 1).rev() {
            strides[j] = strides[j + 1] * actions[j + 1].len();
        }
        Ok(Self {
            name: None,
            description: None,
            actions,
            payoffs,
            strides,
        })
    }

    /// Builds a game with generated labels `a0, a1, ...`.
    pub fn from_shape(shape: &[usize], payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let actions = shape
            .iter()
            .map(|&m| (0..m).map(|a| format!("a{a}")).collect())
            .collect();
        Self::new(actions, payoffs)
    }

    /// Two-player game from row and column payoff matrices.
    pub fn bimatrix(row: &[Vec<f64>], col: &[Vec<f64>]) -> Result<Self> {
        let m = row.len();
        let k = row.first().map_or(0, Vec::len);
        if col.len() != m || row.iter().chain(col).any(|r| r.len() != k) {
            return Err(Error::Shape("bimatrix payoff matrices differ in shape".into()));
        }
        Self::from_shape(&[m, k], vec![row.concat(), col.concat()])
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.actions.iter().map(Vec::len).collect()
    }

    pub fn action_labels(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn num_profiles(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn payoff_tensor(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn flat_index(&self, actions: &[usize]) -> usize {
        actions.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// Inverse of [`Game::flat_index`].
    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let a = index / s;
                index %= s;
                a
            })
            .collect()
    }

    pub fn payoff(&self, player: usize, actions: &[usize]) -> f64 {
        self.payoffs[player][self.flat_index(actions)]
    }

    /// All pure profiles in lexicographic order of action indices.
    pub fn pure_profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_profiles()).map(move |k| self.unflatten(k))
    }

    pub fn min_payoff(&self) -> f64 {
        self.payoffs.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_payoff(&self) -> f64 {
        self.payoffs
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest payoff spread of any single player; a Lipschitz constant of
    /// expected utility with respect to probability mass moved.
    pub fn payoff_spread(&self) -> f64 {
        self.payoffs
            .iter()
            .map(|t| {
                let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    pub fn check_strategy(&self, player: usize, strategy: &MixedStrategy) -> Result<()> {
        if strategy.len() != self.num_actions(player) {
            return Err(Error::Shape(format!(
                "strategy for player {player} has {} entries, game has {} actions",
                strategy.len(),
                self.num_actions(player)
            )));
        }
        Ok(())
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        if profile.num_players() != self.num_players() {
            return Err(Error::Shape(format!(
                "profile has {} strategies, game has {} players",
                profile.num_players(),
                self.num_players()
            )));
        }
        for (i, s) in profile.strategies().iter().enumerate() {
            self.check_strategy(i, s)?;
        }
        Ok(())
    }

    pub fn check_opponents(&self, player: usize, opponents: &[MixedStrategy]) -> Result<()> {
        if opponents.len() + 1 != self.num_players() {
            return Err(Error::Shape(format!(
                "opponent profile has {} strategies, expected {}",
                opponents.len(),
                self.num_players() - 1
            )));
        }
        for (j, s) in self.opponent_indices(player).zip(opponents) {
            self.check_strategy(j, s)?;
        }
        Ok(())
    }

    pub fn opponent_indices(&self, player: usize) -> impl Iterator<Item = usize> {
        (0..self.num_players()).filter(move |&j| j != player)
    }

    /// `u_i(a_i, π_{-i})` for every action `a_i` of `player`.
    ///
    /// Panics on shape mismatch; use [`Game::check_opponents`] first for
    /// untrusted input.
    pub fn action_values(&self, player: usize, opponents: &[MixedStrategy]) -> Vec<f64> {
        let n = self.num_players();
        assert_eq!(opponents.len() + 1, n, "opponent profile length");
        // map player index -> strategy slot
        let slot = |j: usize| if j < player { j } else { j - 1 };
        let tensor = &self.payoffs[player];
        let mut out = vec![0.0; self.num_actions(player)];
        let mut counter = vec![0usize; n];
        for &value in tensor {
            let mut weight = 1.0;
            for j in 0..n {
                if j != player {
                    weight *= opponents[slot(j)].probs()[counter[j]];
                }
            }
            out[counter[player]] += value * weight;
            // odometer, last index fastest
            for j in (0..n).rev() {
                counter[j] += 1;
                if counter[j] < self.actions[j].len() {
                    break;
                }
                counter[j] = 0;
            }
        }
        out
    }

    /// Expected utility of `player` under `profile`.
    pub fn expected_utility(&self, profile: &Profile, player: usize) -> Result<f64> {
        self.check_profile(profile)?;
        if player >= self.num_players() {
            return Err(Error::Shape(format!("player {player} out of range")));
        }
        let values = self.action_values(player, &profile.opponents(player));
        Ok(profile.strategy(player).dot(&values))
    }

    pub fn social_welfare(&self, profile: &Profile) -> Result<f64> {
        (0..self.num_players())
            .map(|i| self.expected_utility(profile, i))
            .sum()
    }

    pub fn pure_social_welfare(&self, actions: &[usize]) -> f64 {
        let k = self.flat_index(actions);
        self.payoffs.iter().map(|t| t[k]).sum()
    }

    /// Applies `u -> scale * u + shift` to every payoff of every player.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        let payoffs = self
            .payoffs
            .iter()
            .map(|t| t.iter().map(|v| scale * v + shift).collect())
            .collect();
        let mut g = Self::new(self.actions.clone(), payoffs)?;
        g.name = self.name.clone();
        g.description = self.description.clone();
        Ok(g)
    }

    pub fn to_document(&self) -> GameDocument {
        GameDocument {
            name: self.name.clone(),
            description: self.description.clone(),
            players: self.num_players(),
            actions: self.actions.clone(),
            payoffs: self.payoffs.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("game serializes")
    }
}

/// Serialized form of a [`Game`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub players: usize,
    pub actions: Vec<Vec<String>>,
    pub payoffs: Vec<Vec<f64>>,
}

impl GameDocument {
    pub fn into_game(self) -> Result<Game> {
        let field = |context: String, message: String| Error::Parse { context, message };
        if self.players < 2 {
            return Err(field("players".into(), format!("need at least 2, got {}", self.players)));
        }
        if self.actions.len() != self.players {
            return Err(field(
                "actions".into(),
                format!("{} action lists for {} players", self.actions.len(), self.players),
            ));
        }
        for (i, labels) in self.actions.iter().enumerate() {
            if labels.is_empty() {
                return Err(field(format!("actions[{i}]"), "no actions".into()));
            }
            let unique: HashSet<&String> = labels.iter().collect();
            if unique.len() != labels.len() {
                return Err(field(format!("actions[{i}]"), "duplicate action labels".into()));
            }
        }
        if self.payoffs.len() != self.players {
            return Err(field(
                "payoffs".into(),
                format!("{} payoff tensors for {} players", self.payoffs.len(), self.players),
            ));
        }
        let total: usize = self.actions.iter().map(Vec::len).product();
        for (i, tensor) in self.payoffs.iter().enumerate() {
            if tensor.len() != total {
                return Err(field(
                    format!("payoffs[{i}]"),
                    format!("tensor length {} but the action sets require {total}", tensor.len()),
                ));
            }
            if let Some(k) = tensor.iter().position(|v| !v.is_finite()) {
                return Err(field(format!("payoffs[{i}][{k}]"), "non-finite payoff".into()));
            }
        }
        let mut game = Game::new(self.actions, self.payoffs)?;
        game.name = self.name;
        game.description = self.description;
        Ok(game)
    }
}

/// Parses a JSON game document.
pub fn parse_game(doc: &str) -> Result<Game> {
    let parsed: GameDocument = serde_json::from_str(doc).map_err(|e| Error::Parse {
        context: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    parsed.into_game()
}

pub fn serialize_game(game: &Game) -> String {
    game.to_json()
}
