//! Mean-payoff games: values, optimal positional strategies, and the lattice of
//! extremal energy progress measures that partitions the optimal strategies.

pub mod arena;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod lattice;
pub mod oracle;
pub mod potentials;
pub mod rational;
pub mod ttpg;
pub mod values;
pub mod verify;

pub use arena::{
    parse_arena, reweight, serialize_arena, Arc, ArcId, Arena, GameGraph, Owner, SubgameMask,
    VertexId,
};
pub use energy::{least_sepm, EnergyFunction, EnergyValue};
pub use error::{ArenaError, Result, SolveError};
pub use lattice::{decompose, enumerate, enumerate_with, DeltaBlock, EnergyLattice, EnumEvent, Enumeration};
pub use potentials::{least_feasible_potential, PositionalStrategy};
pub use rational::Rational;
pub use ttpg::{min_ttpg, min_ttpg_fixpoint, plain_ttpg, TruncatedValueTable, TtpgKind};
pub use values::{solve_values, synthesize_optimal, ValueAssignment};
