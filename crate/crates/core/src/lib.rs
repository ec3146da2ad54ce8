//! Doomsday equilibria for multi-player graph games: perfect-information decision
//! procedures, witness strategies, imperfect-information games and brute-force oracles.

pub mod arena;
pub mod cli;
pub mod de_perfect;
pub mod graph;
pub mod imperfect;
pub mod objectives;
pub mod oracle;
pub mod region;
pub mod retaliation;
pub mod strategy;
pub mod witness;
pub mod zerosum;
