//! Stable matchings by deferred acceptance, exhaustive enumeration of stable
//! matchings, and maximum matchings of the acceptability graph.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::market::{Market, Matching, Pair};

/// Default bound on acceptable pairs for the exhaustive routines.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SolveSide {
    WorkerProposing,
    FirmProposing,
}

/// Order in which free agents make proposals. The outcome does not depend on
/// it; only the intermediate states do.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum ProposalSchedule {
    /// Every free agent proposes once per round, in index order.
    #[default]
    Rounds,
    /// One agent at a time, last freed first, until it is held or exhausted.
    Stack,
}

/// Deferred acceptance with the given side proposing. The result is stable
/// and optimal for the proposing side.
pub fn deferred_acceptance(m: &Market, side: SolveSide) -> Matching {
    deferred_acceptance_with(m, side, ProposalSchedule::Rounds)
}

pub fn deferred_acceptance_with(m: &Market, side: SolveSide, schedule: ProposalSchedule) -> Matching {
    let (num_proposers, num_receivers) = match side {
        SolveSide::WorkerProposing => (m.num_workers(), m.num_firms()),
        SolveSide::FirmProposing => (m.num_firms(), m.num_workers()),
    };
    let list = |a: usize| match side {
        SolveSide::WorkerProposing => m.worker_prefs(a),
        SolveSide::FirmProposing => m.firm_prefs(a),
    };
    // Does receiver `r` prefer `a` to `b`?
    let prefers = |r: usize, a: usize, b: usize| {
        let (ra, rb) = match side {
            SolveSide::WorkerProposing => (m.firm_rank(r, a), m.firm_rank(r, b)),
            SolveSide::FirmProposing => (m.worker_rank(r, a), m.worker_rank(r, b)),
        };
        match ra.cmp(&rb) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => unreachable!("strict preferences never tie"),
        }
    };

    let mut next = vec![0usize; num_proposers];
    let mut held: Vec<Option<usize>> = vec![None; num_receivers];
    let mut engaged = vec![false; num_proposers];

    // Proposal from `a` to its next choice. Returns the proposer left free by
    // it, if any.
    let mut propose = |a: usize, next: &mut [usize], engaged: &mut [bool]| -> Option<usize> {
        let r = list(a)[next[a]];
        next[a] += 1;
        match held[r] {
            None => {
                held[r] = Some(a);
                engaged[a] = true;
                None
            }
            Some(h) if prefers(r, a, h) => {
                held[r] = Some(a);
                engaged[a] = true;
                engaged[h] = false;
                Some(h)
            }
            Some(_) => Some(a),
        }
    };

    match schedule {
        ProposalSchedule::Rounds => loop {
            let free: Vec<usize> = (0..num_proposers)
                .filter(|&a| !engaged[a] && next[a] < list(a).len())
                .collect();
            if free.is_empty() {
                break;
            }
            for a in free {
                propose(a, &mut next, &mut engaged);
            }
        },
        ProposalSchedule::Stack => {
            let mut stack: Vec<usize> = (0..num_proposers).rev().collect();
            while let Some(a) = stack.pop() {
                if engaged[a] || next[a] >= list(a).len() {
                    continue;
                }
                if let Some(freed) = propose(a, &mut next, &mut engaged) {
                    stack.push(freed);
                }
            }
        }
    }

    let pairs = held.iter().enumerate().filter_map(|(r, a)| {
        a.map(|a| match side {
            SolveSide::WorkerProposing => Pair::new(a, r),
            SolveSide::FirmProposing => Pair::new(r, a),
        })
    });
    Matching::for_market(m, pairs).expect("deferred acceptance yields a matching")
}

fn check_cap(m: &Market, cap: usize) -> Result<()> {
    let pairs = m.num_acceptable_pairs();
    if pairs > cap {
        return Err(Error::CapExceeded { pairs, cap });
    }
    Ok(())
}

/// Calls `visit` with the worker-to-firm assignment of every individually
/// rational matching of `m`.
fn for_each_assignment(m: &Market, mut visit: impl FnMut(&[Option<usize>])) {
    fn go(
        m: &Market,
        w: usize,
        assign: &mut Vec<Option<usize>>,
        firm_used: &mut [bool],
        visit: &mut dyn FnMut(&[Option<usize>]),
    ) {
        if w == m.num_workers() {
            visit(assign);
            return;
        }
        assign[w] = None;
        go(m, w + 1, assign, firm_used, visit);
        for &f in m.worker_prefs(w) {
            if !firm_used[f] {
                firm_used[f] = true;
                assign[w] = Some(f);
                go(m, w + 1, assign, firm_used, visit);
                firm_used[f] = false;
            }
        }
        assign[w] = None;
    }
    let mut assign = vec![None; m.num_workers()];
    let mut firm_used = vec![false; m.num_firms()];
    go(m, 0, &mut assign, &mut firm_used, &mut visit);
}

fn to_matching(m: &Market, assign: &[Option<usize>]) -> Matching {
    let pairs = assign
        .iter()
        .enumerate()
        .filter_map(|(w, f)| f.map(|f| Pair::new(w, f)));
    Matching::for_market(m, pairs).expect("assignment is one-to-one")
}

/// Every individually rational matching of `m`, canonically ordered.
pub fn enumerate_matchings(m: &Market, cap: usize) -> Result<Vec<Matching>> {
    check_cap(m, cap)?;
    let mut out = Vec::new();
    for_each_assignment(m, |assign| out.push(to_matching(m, assign)));
    out.sort();
    Ok(out)
}

/// Every stable matching of `m`, each exactly once, canonically ordered.
///
/// Exhaustive: fails when `m` has more than `cap` acceptable pairs.
pub fn enumerate_stable(m: &Market, cap: usize) -> Result<Vec<Matching>> {
    check_cap(m, cap)?;
    let pairs = m.acceptable_pairs();
    let mut firm_partner = vec![None; m.num_firms()];
    let mut out = Vec::new();
    for_each_assignment(m, |assign| {
        firm_partner.iter_mut().for_each(|p| *p = None);
        for (w, f) in assign.iter().enumerate() {
            if let Some(f) = *f {
                firm_partner[f] = Some(w);
            }
        }
        let blocked = pairs.iter().any(|p| {
            let worker_wants = match assign[p.worker] {
                None => true,
                Some(cur) => m.worker_prefers(p.worker, p.firm, cur),
            };
            worker_wants
                && match firm_partner[p.firm] {
                    None => true,
                    Some(cur) => m.firm_prefers(p.firm, p.worker, cur),
                }
        });
        if !blocked {
            out.push(to_matching(m, assign));
        }
    });
    out.sort();
    Ok(out)
}

/// A maximum-cardinality individually rational matching, by repeated
/// breadth-first augmenting-path search.
pub fn maximum_matching(m: &Market) -> Matching {
    let nf = m.num_firms();
    let mut worker_match: Vec<Option<usize>> = vec![None; m.num_workers()];
    let mut firm_match: Vec<Option<usize>> = vec![None; nf];
    let mut via = vec![usize::MAX; nf];
    let mut seen = vec![false; nf];
    let mut queue = VecDeque::new();

    for root in 0..m.num_workers() {
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        queue.push_back(root);
        let mut free_firm = None;
        'search: while let Some(x) = queue.pop_front() {
            for &f in m.worker_prefs(x) {
                if seen[f] {
                    continue;
                }
                seen[f] = true;
                via[f] = x;
                match firm_match[f] {
                    None => {
                        free_firm = Some(f);
                        break 'search;
                    }
                    Some(y) => queue.push_back(y),
                }
            }
        }
        let Some(mut f) = free_firm else { continue };
        loop {
            let x = via[f];
            let prev = worker_match[x];
            worker_match[x] = Some(f);
            firm_match[f] = Some(x);
            match prev {
                Some(pf) => f = pf,
                None => break,
            }
        }
    }
    to_matching(m, &worker_match)
}

/// Scans `order` and keeps every pair compatible with those already kept.
/// `order` must be a permutation of the acceptable pairs of `m`.
pub fn greedy_maximal(m: &Market, order: &[Pair]) -> Result<Matching> {
    if order.len() != m.num_acceptable_pairs() {
        return Err(Error::NotAPermutation(format!(
            "{} pairs given, market has {}",
            order.len(),
            m.num_acceptable_pairs()
        )));
    }
    let mut seen = HashSet::with_capacity(order.len());
    for &p in order {
        if !m.is_acceptable(p.worker, p.firm) {
            return Err(Error::NotAPermutation(format!("{p} is not acceptable")));
        }
        if !seen.insert(p) {
            return Err(Error::NotAPermutation(format!("{p} repeated")));
        }
    }
    let mut worker_used = vec![false; m.num_workers()];
    let mut firm_used = vec![false; m.num_firms()];
    let mut kept = Vec::new();
    for &p in order {
        if !worker_used[p.worker] && !firm_used[p.firm] {
            worker_used[p.worker] = true;
            firm_used[p.firm] = true;
            kept.push(p);
        }
    }
    Matching::for_market(m, kept)
}
