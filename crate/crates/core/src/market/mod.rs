//! Markets, matchings and the basic predicates over them.
//!
//! A [`Market`] holds two disjoint sides, workers and firms, each agent with a
//! strict preference list over acceptable partners on the other side.
//! Acceptability is mutual: `f` appears in the list of `w` iff `w` appears in
//! the list of `f`. Agents are addressed by their index within their side.

mod format;

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

pub use format::{parse_market, parse_market_with, serialize_market, serialize_with_header, ParsedMarket};

const UNRANKED: u32 = u32::MAX;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Worker,
    Firm,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Worker => Side::Firm,
            Side::Firm => Side::Worker,
        }
    }
}

/// An agent, identified by its side and its index within that side.
///
/// Display labels live in the owning [`Market`]; see [`Market::label`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId {
    pub side: Side,
    pub index: usize,
}

impl AgentId {
    pub fn worker(index: usize) -> Self {
        AgentId {
            side: Side::Worker,
            index,
        }
    }

    pub fn firm(index: usize) -> Self {
        AgentId {
            side: Side::Firm,
            index,
        }
    }
}

/// A worker-firm pair, by zero-based side indices.
///
/// Displays one-based, as `(i,j)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub worker: usize,
    pub firm: usize,
}

impl Pair {
    pub fn new(worker: usize, firm: usize) -> Self {
        Pair { worker, firm }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.worker + 1, self.firm + 1)
    }
}

/// A preference entry dropped at construction because the partner does not
/// reciprocate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrunedEntry {
    pub agent: String,
    pub partner: String,
}

impl fmt::Display for PrunedEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pruned `{}` from the list of `{}` (not reciprocated)",
            self.partner, self.agent
        )
    }
}

/// A one-to-one two-sided market with strict preferences.
///
/// Immutable after construction. Rank tables are precomputed so every
/// preference comparison is a constant-time lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Market {
    worker_labels: Vec<String>,
    firm_labels: Vec<String>,
    worker_prefs: Vec<Vec<usize>>,
    firm_prefs: Vec<Vec<usize>>,
    // worker_rank[w * nf + f], firm_rank[f * nw + w]
    worker_rank: Vec<u32>,
    firm_rank: Vec<u32>,
}

pub(crate) fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(|c| c.is_whitespace() || c == ':' || c == '#')
}

impl Market {
    /// Builds a market, rejecting any preference entry that is not
    /// reciprocated.
    pub fn new(
        worker_labels: Vec<String>,
        firm_labels: Vec<String>,
        worker_prefs: Vec<Vec<usize>>,
        firm_prefs: Vec<Vec<usize>>,
    ) -> Result<Market> {
        Self::build(worker_labels, firm_labels, worker_prefs, firm_prefs, true).map(|(m, _)| m)
    }

    /// Builds a market, dropping entries that are not reciprocated and
    /// reporting each dropped entry.
    pub fn new_pruned(
        worker_labels: Vec<String>,
        firm_labels: Vec<String>,
        worker_prefs: Vec<Vec<usize>>,
        firm_prefs: Vec<Vec<usize>>,
    ) -> Result<(Market, Vec<PrunedEntry>)> {
        Self::build(worker_labels, firm_labels, worker_prefs, firm_prefs, false)
    }

    /// Strict construction with labels `w1..`, `f1..`.
    pub fn from_prefs(worker_prefs: Vec<Vec<usize>>, firm_prefs: Vec<Vec<usize>>) -> Result<Market> {
        let workers = (1..=worker_prefs.len()).map(|i| format!("w{i}")).collect();
        let firms = (1..=firm_prefs.len()).map(|j| format!("f{j}")).collect();
        Market::new(workers, firms, worker_prefs, firm_prefs)
    }

    fn build(
        worker_labels: Vec<String>,
        firm_labels: Vec<String>,
        worker_prefs: Vec<Vec<usize>>,
        firm_prefs: Vec<Vec<usize>>,
        strict: bool,
    ) -> Result<(Market, Vec<PrunedEntry>)> {
        let nw = worker_labels.len();
        let nf = firm_labels.len();
        if nw + nf == 0 {
            return Err(Error::EmptyMarket);
        }
        if worker_prefs.len() != nw || firm_prefs.len() != nf {
            return Err(Error::InvalidPlan(format!(
                "{} worker lists for {nw} workers, {} firm lists for {nf} firms",
                worker_prefs.len(),
                firm_prefs.len()
            )));
        }
        // Labels must be unique across both sides: `pref` lines address agents
        // by label alone.
        let mut seen = HashSet::new();
        for label in worker_labels.iter().chain(&firm_labels) {
            if !valid_label(label) {
                return Err(Error::InvalidLabel(label.clone()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }

        let mut worker_rank = vec![UNRANKED; nw * nf];
        let mut firm_rank = vec![UNRANKED; nf * nw];
        fill_ranks(&worker_prefs, &worker_labels, &firm_labels, nf, &mut worker_rank)?;
        fill_ranks(&firm_prefs, &firm_labels, &worker_labels, nw, &mut firm_rank)?;

        let mut pruned = Vec::new();
        let worker_prefs = prune(
            worker_prefs,
            |w, f| firm_rank[f * nw + w] != UNRANKED,
            &worker_labels,
            &firm_labels,
            strict,
            &mut pruned,
        )?;
        let firm_prefs = prune(
            firm_prefs,
            |f, w| worker_rank[w * nf + f] != UNRANKED,
            &firm_labels,
            &worker_labels,
            strict,
            &mut pruned,
        )?;

        for (label, list) in worker_labels
            .iter()
            .zip(&worker_prefs)
            .chain(firm_labels.iter().zip(&firm_prefs))
        {
            if list.is_empty() {
                return Err(Error::EmptyPreferences(label.clone()));
            }
        }

        // Ranks again, now over the pruned lists.
        let mut worker_rank = vec![UNRANKED; nw * nf];
        let mut firm_rank = vec![UNRANKED; nf * nw];
        fill_ranks(&worker_prefs, &worker_labels, &firm_labels, nf, &mut worker_rank)?;
        fill_ranks(&firm_prefs, &firm_labels, &worker_labels, nw, &mut firm_rank)?;

        Ok((
            Market {
                worker_labels,
                firm_labels,
                worker_prefs,
                firm_prefs,
                worker_rank,
                firm_rank,
            },
            pruned,
        ))
    }

    pub fn num_workers(&self) -> usize {
        self.worker_labels.len()
    }

    pub fn num_firms(&self) -> usize {
        self.firm_labels.len()
    }

    pub fn worker_label(&self, w: usize) -> &str {
        &self.worker_labels[w]
    }

    pub fn firm_label(&self, f: usize) -> &str {
        &self.firm_labels[f]
    }

    pub fn worker_labels(&self) -> &[String] {
        &self.worker_labels
    }

    pub fn firm_labels(&self) -> &[String] {
        &self.firm_labels
    }

    pub fn label(&self, agent: AgentId) -> &str {
        match agent.side {
            Side::Worker => self.worker_label(agent.index),
            Side::Firm => self.firm_label(agent.index),
        }
    }

    pub fn worker_index(&self, label: &str) -> Option<usize> {
        self.worker_labels.iter().position(|l| l == label)
    }

    pub fn firm_index(&self, label: &str) -> Option<usize> {
        self.firm_labels.iter().position(|l| l == label)
    }

    /// Firms acceptable to `w`, most preferred first.
    pub fn worker_prefs(&self, w: usize) -> &[usize] {
        &self.worker_prefs[w]
    }

    /// Workers acceptable to `f`, most preferred first.
    pub fn firm_prefs(&self, f: usize) -> &[usize] {
        &self.firm_prefs[f]
    }

    pub fn prefs(&self, agent: AgentId) -> &[usize] {
        match agent.side {
            Side::Worker => self.worker_prefs(agent.index),
            Side::Firm => self.firm_prefs(agent.index),
        }
    }

    /// Position of `f` in the list of `w` (0 = top), if acceptable.
    pub fn worker_rank(&self, w: usize, f: usize) -> Option<usize> {
        let r = self.worker_rank[w * self.num_firms() + f];
        (r != UNRANKED).then_some(r as usize)
    }

    /// Position of `w` in the list of `f` (0 = top), if acceptable.
    pub fn firm_rank(&self, f: usize, w: usize) -> Option<usize> {
        let r = self.firm_rank[f * self.num_workers() + w];
        (r != UNRANKED).then_some(r as usize)
    }

    pub fn is_acceptable(&self, w: usize, f: usize) -> bool {
        w < self.num_workers() && f < self.num_firms() && self.worker_rank(w, f).is_some()
    }

    /// Does `w` strictly prefer firm `a` to firm `b`? Both must be acceptable.
    pub fn worker_prefers(&self, w: usize, a: usize, b: usize) -> bool {
        self.worker_rank(w, a) < self.worker_rank(w, b)
    }

    /// Does `f` strictly prefer worker `a` to worker `b`? Both must be acceptable.
    pub fn firm_prefers(&self, f: usize, a: usize, b: usize) -> bool {
        self.firm_rank(f, a) < self.firm_rank(f, b)
    }

    /// All mutually acceptable pairs, ordered by worker then firm index.
    pub fn acceptable_pairs(&self) -> Vec<Pair> {
        let mut pairs: Vec<Pair> = (0..self.num_workers())
            .flat_map(|w| self.worker_prefs[w].iter().map(move |&f| Pair::new(w, f)))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    pub fn num_acceptable_pairs(&self) -> usize {
        self.worker_prefs.iter().map(Vec::len).sum()
    }

    pub fn pair_label(&self, p: Pair) -> String {
        format!("({}, {})", self.worker_label(p.worker), self.firm_label(p.firm))
    }
}

fn fill_ranks(
    prefs: &[Vec<usize>],
    labels: &[String],
    partner_labels: &[String],
    stride: usize,
    rank: &mut [u32],
) -> Result<()> {
    for (a, list) in prefs.iter().enumerate() {
        for (r, &b) in list.iter().enumerate() {
            if b >= stride {
                return Err(Error::UnknownPartner {
                    agent: labels[a].clone(),
                    partner: format!("#{b}"),
                });
            }
            let slot = &mut rank[a * stride + b];
            if *slot != UNRANKED {
                return Err(Error::DuplicatePreference {
                    agent: labels[a].clone(),
                    partner: partner_labels[b].clone(),
                });
            }
            *slot = r as u32;
        }
    }
    Ok(())
}

fn prune(
    prefs: Vec<Vec<usize>>,
    reciprocated: impl Fn(usize, usize) -> bool,
    labels: &[String],
    partner_labels: &[String],
    strict: bool,
    pruned: &mut Vec<PrunedEntry>,
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(prefs.len());
    for (a, list) in prefs.into_iter().enumerate() {
        let mut kept = Vec::with_capacity(list.len());
        for b in list {
            if reciprocated(a, b) {
                kept.push(b);
            } else if strict {
                return Err(Error::NotMutual {
                    agent: labels[a].clone(),
                    partner: partner_labels[b].clone(),
                });
            } else {
                pruned.push(PrunedEntry {
                    agent: labels[a].clone(),
                    partner: partner_labels[b].clone(),
                });
            }
        }
        out.push(kept);
    }
    Ok(out)
}

/// A partial one-to-one assignment of workers to firms.
///
/// Unmatched agents are simply absent. Pairs are kept sorted by worker index,
/// and both sides have O(1) partner lookup.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    pairs: Vec<Pair>,
    worker_partner: Vec<Option<usize>>,
    firm_partner: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(num_workers: usize, num_firms: usize) -> Self {
        Matching {
            pairs: Vec::new(),
            worker_partner: vec![None; num_workers],
            firm_partner: vec![None; num_firms],
        }
    }

    /// Builds a matching over a market with the given side sizes.
    pub fn new(num_workers: usize, num_firms: usize, pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let mut mu = Matching::empty(num_workers, num_firms);
        for p in pairs {
            if p.worker >= num_workers {
                return Err(Error::ForeignAgent(format!("worker {}", p.worker + 1)));
            }
            if p.firm >= num_firms {
                return Err(Error::ForeignAgent(format!("firm {}", p.firm + 1)));
            }
            if mu.worker_partner[p.worker].is_some() {
                return Err(Error::MatchingConflict(format!("worker {}", p.worker + 1)));
            }
            if mu.firm_partner[p.firm].is_some() {
                return Err(Error::MatchingConflict(format!("firm {}", p.firm + 1)));
            }
            mu.worker_partner[p.worker] = Some(p.firm);
            mu.firm_partner[p.firm] = Some(p.worker);
            mu.pairs.push(p);
        }
        mu.pairs.sort_unstable();
        Ok(mu)
    }

    /// Builds a matching sized for `m`.
    pub fn for_market(m: &Market, pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        Matching::new(m.num_workers(), m.num_firms(), pairs)
    }

    /// Builds from one-based `(worker, firm)` tuples, the form pairs are
    /// displayed in.
    pub fn from_one_based(m: &Market, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut out = Vec::with_capacity(pairs.len());
        for &(w, f) in pairs {
            if w == 0 || f == 0 {
                return Err(Error::ForeignAgent(format!("({w},{f})")));
            }
            out.push(Pair::new(w - 1, f - 1));
        }
        Matching::for_market(m, out)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn num_workers(&self) -> usize {
        self.worker_partner.len()
    }

    pub fn num_firms(&self) -> usize {
        self.firm_partner.len()
    }

    pub fn worker_partner(&self, w: usize) -> Option<usize> {
        self.worker_partner[w]
    }

    pub fn firm_partner(&self, f: usize) -> Option<usize> {
        self.firm_partner[f]
    }

    pub fn contains(&self, p: Pair) -> bool {
        self.worker_partner.get(p.worker).copied().flatten() == Some(p.firm)
    }

    pub fn matched_workers(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.worker).collect()
    }

    pub fn matched_firms(&self) -> Vec<usize> {
        let mut firms: Vec<usize> = self.pairs.iter().map(|p| p.firm).collect();
        firms.sort_unstable();
        firms
    }

    fn fits(&self, m: &Market) -> bool {
        self.num_workers() == m.num_workers() && self.num_firms() == m.num_firms()
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Mutually acceptable pairs of `m`, ordered by worker then firm.
pub fn acceptable_pairs(m: &Market) -> Vec<Pair> {
    m.acceptable_pairs()
}

/// True iff every pair of `mu` is acceptable to both members.
///
/// Fails if `mu` was built for a market of different dimensions.
pub fn is_individually_rational(m: &Market, mu: &Matching) -> Result<bool> {
    if !mu.fits(m) {
        return Err(Error::ForeignAgent(format!(
            "matching over {}x{} agents (market is {}x{})",
            mu.num_workers(),
            mu.num_firms(),
            m.num_workers(),
            m.num_firms()
        )));
    }
    Ok(mu.pairs().iter().all(|p| m.is_acceptable(p.worker, p.firm)))
}

/// Every acceptable pair outside `mu` whose members both prefer each other to
/// their current situation, ordered by worker then firm.
///
/// # Panics
///
/// If `mu` is not sized for `m`.
pub fn blocking_pairs(m: &Market, mu: &Matching) -> Vec<Pair> {
    assert!(mu.fits(m), "matching does not belong to this market");
    m.acceptable_pairs()
        .into_iter()
        .filter(|&p| is_blocking(m, mu, p))
        .collect()
}

fn is_blocking(m: &Market, mu: &Matching, p: Pair) -> bool {
    if mu.contains(p) {
        return false;
    }
    let worker_wants = match mu.worker_partner(p.worker) {
        None => true,
        Some(cur) => m.worker_prefers(p.worker, p.firm, cur),
    };
    worker_wants
        && match mu.firm_partner(p.firm) {
            None => true,
            Some(cur) => m.firm_prefers(p.firm, p.worker, cur),
        }
}

/// Individually rational with no blocking pair. A matching sized for a
/// different market is never stable.
pub fn is_stable(m: &Market, mu: &Matching) -> bool {
    matches!(is_individually_rational(m, mu), Ok(true))
        && m.acceptable_pairs().into_iter().all(|p| !is_blocking(m, mu, p))
}

/// No acceptable pair can be added, i.e. no acceptable pair has both members
/// unmatched.
///
/// # Panics
///
/// If `mu` is not sized for `m`.
pub fn is_maximal(m: &Market, mu: &Matching) -> bool {
    assert!(mu.fits(m), "matching does not belong to this market");
    !m.acceptable_pairs()
        .into_iter()
        .any(|p| mu.worker_partner(p.worker).is_none() && mu.firm_partner(p.firm).is_none())
}
