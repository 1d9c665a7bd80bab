//! Approximate Nash equilibria for two-player stopping games on finite
//! scenario trees, where the game ends at the *later* of the two stopping
//! times.
//!
//! The crate is organized bottom-up:
//!
//! * [`filtration`]: scenario trees, conditional expectations, adapted processes.
//! * [`stopping`]: stopping times, reaction families, stopping strategies.
//! * [`payoff`]: payoff fields, modulus of continuity, exact game evaluation.
//! * [`envelopes`]: anchored optimal-stopping values and reaction families.
//! * [`dynkin`]: the zero-sum Dynkin game on a band and its saddle point.
//! * [`equilibrium`]: zero-sum and non-zero-sum equilibrium assembly.
//! * [`verify`]: best responses, enumeration oracle, Nash-gap certificates.
//! * [`generate`], [`io`], [`cli`]: random instances, the `stopgame/v1`
//!   JSON format, and the command implementations behind the binary.

pub mod cli;
pub mod dynkin;
pub mod envelopes;
pub mod equilibrium;
pub mod error;
pub mod filtration;
pub mod generate;
pub mod instances;
pub mod io;
pub mod payoff;
pub mod stopping;
pub mod verify;

pub use equilibrium::{
    assemble_nonzero_sum, assemble_zero_sum, EquilibriumBundle, Mode, SolveOptions,
};
pub use error::{Error, Result};
pub use filtration::{AdaptedProcess, FilteredTree, GridSpec, RandomVariable};
pub use payoff::{PayoffField, Player, StoppingGame};
pub use stopping::{StoppingStrategy, StoppingTime, StrategyFamily};
pub use verify::{best_response, nash_gap, GapReport};
