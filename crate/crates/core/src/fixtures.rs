//! Small reference markets shipped with the crate (also in `fixtures/` at
//! the repository root).
//!
//! * `P`: two workers, two firms, cyclic preferences, two stable matchings.
//! * `R`: `P` extended by two workers and two firms; stable size stays 2,
//!   maximum size becomes 4.
//! * `R_prime`: `P` extended with the new agents ranked last by every
//!   original agent; the stable matchings of `P` are unchanged.

use crate::market::{parse_market, Market};

pub const P_TEXT: &str = include_str!("../../../fixtures/P.market");
pub const R_TEXT: &str = include_str!("../../../fixtures/R.market");
pub const R_PRIME_TEXT: &str = include_str!("../../../fixtures/R_prime.market");

fn load(text: &str) -> Market {
    parse_market(text).expect("shipped fixture parses").market
}

pub fn market_p() -> Market {
    load(P_TEXT)
}

pub fn market_r() -> Market {
    load(R_TEXT)
}

pub fn market_r_prime() -> Market {
    load(R_PRIME_TEXT)
}

/// All shipped fixtures, by name.
pub fn all() -> Vec<(&'static str, Market)> {
    vec![("P", market_p()), ("R", market_r()), ("R_prime", market_r_prime())]
}
