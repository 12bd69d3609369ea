//! Distance-based equilibria of finite normal-form games.
//!
//! Each player believes the opponents play somewhere inside a metric ball
//! around the actual sub-profile and responds robustly (worst case), hopefully
//! (best case), by minimising worst-case regret, or by local dominance. The
//! crate verifies and searches for the resulting equilibria, compares them
//! with Nash and trembling-hand baselines, and bounds their price of anarchy.

pub mod audit;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod games;
pub mod ladder;
mod inner;
pub mod lp;
pub mod metric;
pub mod oracle;
pub mod random;
pub mod report;
mod outer;
pub mod response;
pub mod sphere;
pub mod welfare;

pub use error::{Error, Result};
pub use game::{parse_game, serialize_game, Game, GameDocument, MixedStrategy, OpponentProfile, Profile};
pub use metric::{ball_vertices, distance, noisy_variant_vertices, BeliefSet, Metric, VertexPolytope};
pub use inner::Point;
pub use response::{
    classify_response, inner_extreme, locally_dominates, outer_optimum, regret, worst_case_regret,
    DominanceRelation, DominanceVerdict, Notion, OuterNotion, ResponseClassification, ResponseContext, Sense,
    SolverSettings, Witnesses,
};
