//! Tabular reinforcement learning in heated gridworlds: environments, TD(0)
//! learners, policy evaluation and exact absorbing-chain analysis.

pub mod catalog;
pub mod env;
pub mod error;
pub mod eval;
pub mod harness;
pub mod markov;
pub mod seed;
pub mod td;

pub use env::{Absorption, Cell, DriftOrder, Env, EnvState, Goal, GridSpec, Move, Position, StepOutcome};
pub use error::{Error, Result};
pub use eval::{FptStats, Policy};
pub use markov::TransitionMatrix;
pub use seed::{seed_stream, SimRng};
pub use td::{Algorithm, EpsilonSchedule, Hyperparams, Learner, QTable};
