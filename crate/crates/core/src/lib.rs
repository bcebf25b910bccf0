//! Exact enumeration of combinatorial statistics checked against
//! continued-fraction generating functions.

pub mod matchstats;
pub mod mpoly;
pub mod paths;
pub mod permstats;
pub mod series;
pub mod setpartstats;
pub mod theorems;

pub use permstats::StatsError;
