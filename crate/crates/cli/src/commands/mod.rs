//! One module per subcommand; each runs its pipeline, writes its files and
//! returns the verdict.

pub mod construct;
pub mod cover;
pub mod orderings;
pub mod probe;
pub mod schedule;
pub mod verify;
