//! Reduction of a market to the participants matched in every stable
//! matching, with pairings that no stable matching can use stripped out.
//!
//! All stable matchings match the same agents, so the worker-proposing
//! deferred acceptance outcome identifies the kept set. A kept worker never
//! gets a firm it ranks below its firm-proposing partner, and a kept firm
//! never gets a worker it ranks below its worker-proposing partner, so those
//! pairs are dropped. The core has exactly the stable matchings of the
//! original and is always balanced.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::Result;
use crate::market::{AgentId, Market, Matching, Pair};
use crate::solvers::{deferred_acceptance, enumerate_stable, SolveSide};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RemovalReason {
    UnmatchedInStableMatching,
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RemovalReason::UnmatchedInStableMatching => f.write_str("unmatched in stable matching"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    /// Original indices of kept workers, ascending. Core worker `i` is
    /// original worker `kept_workers[i]`.
    pub kept_workers: Vec<usize>,
    pub kept_firms: Vec<usize>,
    pub removed: Vec<(AgentId, RemovalReason)>,
    /// Acceptable pairs between kept agents that the core drops, in original
    /// indices.
    pub dropped_pairs: Vec<Pair>,
    pub core: Market,
}

impl ReductionReport {
    pub fn is_identity(&self) -> bool {
        self.removed.is_empty() && self.dropped_pairs.is_empty()
    }

    /// True when every agent is matched in every stable matching, whether or
    /// not some pairs were dropped.
    pub fn keeps_all_agents(&self) -> bool {
        self.removed.is_empty()
    }

    /// Core indices of an original pair, if both members were kept.
    pub fn to_core(&self, p: Pair) -> Option<Pair> {
        let w = self.kept_workers.binary_search(&p.worker).ok()?;
        let f = self.kept_firms.binary_search(&p.firm).ok()?;
        Some(Pair::new(w, f))
    }

    pub fn from_core(&self, p: Pair) -> Pair {
        Pair::new(self.kept_workers[p.worker], self.kept_firms[p.firm])
    }

    /// `mu` restricted to kept agents, in core indices.
    pub fn restrict(&self, mu: &Matching) -> Matching {
        let pairs = mu.pairs().iter().filter_map(|&p| self.to_core(p));
        Matching::for_market(&self.core, pairs).expect("restriction of a matching is a matching")
    }

    /// One line per removed agent, then one per dropped pair.
    pub fn removal_log(&self, original: &Market) -> Vec<String> {
        let agents = self
            .removed
            .iter()
            .map(|(a, why)| format!("removed {}: {why}", original.label(*a)));
        let pairs = self.dropped_pairs.iter().map(|&p| {
            format!(
                "dropped ({},{}): in no stable matching",
                original.worker_label(p.worker),
                original.firm_label(p.firm)
            )
        });
        agents.chain(pairs).collect()
    }
}

pub fn normal_form(m: &Market) -> ReductionReport {
    let mu = deferred_acceptance(m, SolveSide::WorkerProposing);
    let firm_best = deferred_acceptance(m, SolveSide::FirmProposing);
    let kept_workers = mu.matched_workers();
    let kept_firms = mu.matched_firms();

    let mut removed = Vec::new();
    for w in (0..m.num_workers()).filter(|w| mu.worker_partner(*w).is_none()) {
        removed.push((AgentId::worker(w), RemovalReason::UnmatchedInStableMatching));
    }
    for f in (0..m.num_firms()).filter(|f| mu.firm_partner(*f).is_none()) {
        removed.push((AgentId::firm(f), RemovalReason::UnmatchedInStableMatching));
    }

    // Kept agents are matched in both outcomes.
    let keep = |p: Pair| match (firm_best.worker_partner(p.worker), mu.firm_partner(p.firm)) {
        (Some(worst_f), Some(worst_w)) => {
            m.worker_rank(p.worker, p.firm) <= m.worker_rank(p.worker, worst_f)
                && m.firm_rank(p.firm, p.worker) <= m.firm_rank(p.firm, worst_w)
        }
        _ => false,
    };
    let dropped_pairs = m
        .acceptable_pairs()
        .into_iter()
        .filter(|p| mu.worker_partner(p.worker).is_some() && mu.firm_partner(p.firm).is_some() && !keep(*p))
        .collect();

    let core = restrict_market(m, &kept_workers, &kept_firms, keep);
    ReductionReport {
        kept_workers,
        kept_firms,
        removed,
        dropped_pairs,
        core,
    }
}

fn restrict_market(m: &Market, workers: &[usize], firms: &[usize], keep: impl Fn(Pair) -> bool) -> Market {
    let mut worker_pos = vec![None; m.num_workers()];
    for (i, &w) in workers.iter().enumerate() {
        worker_pos[w] = Some(i);
    }
    let mut firm_pos = vec![None; m.num_firms()];
    for (i, &f) in firms.iter().enumerate() {
        firm_pos[f] = Some(i);
    }
    let worker_prefs = workers
        .iter()
        .map(|&w| {
            m.worker_prefs(w)
                .iter()
                .filter(|&&f| keep(Pair::new(w, f)))
                .filter_map(|&f| firm_pos[f])
                .collect()
        })
        .collect();
    let firm_prefs = firms
        .iter()
        .map(|&f| {
            m.firm_prefs(f)
                .iter()
                .filter(|&&w| keep(Pair::new(w, f)))
                .filter_map(|&w| worker_pos[w])
                .collect()
        })
        .collect();
    let worker_labels = workers.iter().map(|&w| m.worker_label(w).to_string()).collect();
    let firm_labels = firms.iter().map(|&f| m.firm_label(f).to_string()).collect();
    // Every kept agent keeps its worker-proposing partner, and the filter is
    // symmetric, so no list empties and mutuality survives.
    let (core, pruned) = Market::new_pruned(worker_labels, firm_labels, worker_prefs, firm_prefs)
        .expect("restriction of a valid market");
    debug_assert!(pruned.is_empty());
    core
}

/// Pairs that occur in at least one stable matching.
pub fn stable_pairs(m: &Market, cap: usize) -> Result<BTreeSet<Pair>> {
    Ok(enumerate_stable(m, cap)?
        .iter()
        .flat_map(|mu| mu.pairs().iter().copied())
        .collect())
}
