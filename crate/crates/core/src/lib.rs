//! Explicit-state model checking and strategy synthesis for the iterated volunteer's dilemma,
//! played as a finite-horizon concurrent game.

pub mod engine;
pub mod error;
pub mod game;
pub mod matrix_game;
pub mod proplang;
pub mod statespace;
pub mod synthesis;

pub use engine::{
    check, classify_states, verify_bellman, CheckResult, QualClassification, ValuationTable,
    ValueKind,
};
pub use error::{Error, Result};
pub use game::{
    aggregate_reward, apply_round, donation_amount, round_reward, GameParams, GameState,
    JointAction, RoundOutcome,
};
pub use matrix_game::{solve_matrix_game, GameSolution, MatrixGame};
pub use proplang::{parse_predicate, parse_property, PropertyAst, PropertyError};
pub use statespace::{
    build_model, export_model, import_model, level_stats, BuildOptions, LevelStats, StateId,
    Transition, TransitionModel,
};
pub use synthesis::{
    export_dot, replay_value, synthesize, StrategyEdge, StrategyGraph, StrategyNode,
};
