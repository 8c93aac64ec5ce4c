//! Exact counts and asymptotic expansions for the bias between two residue
//! classes among the parts of partitions into distinct parts.

pub mod asymptotics;
pub mod counting;
pub mod error;
pub mod exec;
pub mod hp;
pub mod poly;
pub mod qseries;
pub mod residue;
pub mod saddle;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use residue::{LatticeClass, QuadraticData, ResidueConfig};
