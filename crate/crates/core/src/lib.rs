//! Finding a non-minority ball with majority answers: strategies, adversaries, designs and exact solvers.

pub mod cli;
pub mod colorset;
pub mod design;
pub mod error;
pub mod explore;
pub mod model;
pub mod oracle;
pub mod search;
pub mod selection;
pub mod solver;

pub use error::{Error, Result};
