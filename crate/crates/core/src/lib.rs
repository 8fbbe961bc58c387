//! Two-sided one-to-one matching markets: stability, the matching digraph,
//! solvers, normal forms, extremal market families and bound analysis.

pub mod analysis;
pub mod digraph;
pub mod error;
pub mod extremal;
pub mod fixtures;
pub mod market;
pub mod normal_form;
pub mod solvers;

pub use error::{Error, Result};
pub use market::{
    blocking_pairs, is_individually_rational, is_maximal, is_stable, parse_market, serialize_market, AgentId, Market,
    Matching, Pair, Side,
};
pub use num_rational::Ratio;
