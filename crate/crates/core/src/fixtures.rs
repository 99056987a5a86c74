//! Reference arenas shipped with the crate.

use crate::arena::{parse_arena, Arena};

pub const GAMMA_EX: &str = include_str!("../data/gamma_ex.arena");
pub const GAMMA_D: &str = include_str!("../data/gamma_d.arena");
pub const NOT_POSITIONAL: &str = include_str!("../data/not_positional.arena");

/// Seven vertices, every value -1, three extremal energy functions.
pub fn gamma_ex() -> Arena {
    parse_arena(GAMMA_EX).expect("bundled arena parses")
}

/// Eleven vertices, every value 0, more basic subgames than extremal energy functions.
pub fn gamma_d() -> Arena {
    parse_arena(GAMMA_D).expect("bundled arena parses")
}

pub fn not_positional() -> Arena {
    parse_arena(NOT_POSITIONAL).expect("bundled arena parses")
}
