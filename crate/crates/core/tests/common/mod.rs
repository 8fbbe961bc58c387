//! Independent reference implementations and test corpora.
//!
//! The oracles here read raw preference lists and never call the library's
//! stability, solver or enumeration code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use matchbound_core::analysis::random_market;
use matchbound_core::extremal::{
    generate_agreement_at_top, generate_fn, generate_gn, identity_market, ArbitraryPolicy, ExtensionPlan,
};
use matchbound_core::fixtures;
use matchbound_core::solvers::{deferred_acceptance, SolveSide};
use matchbound_core::Market;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A matching as sorted zero-based `(worker, firm)` index pairs.
pub type RawMatching = Vec<(usize, usize)>;

/// Preference lists copied out of a market.
pub struct Raw {
    pub workers: Vec<Vec<usize>>,
    pub firms: Vec<Vec<usize>>,
}

impl Raw {
    pub fn of(m: &Market) -> Raw {
        Raw {
            workers: (0..m.num_workers()).map(|w| m.worker_prefs(w).to_vec()).collect(),
            firms: (0..m.num_firms()).map(|f| m.firm_prefs(f).to_vec()).collect(),
        }
    }

    fn pos(list: &[usize], x: usize) -> Option<usize> {
        list.iter().position(|&y| y == x)
    }

    pub fn acceptable(&self, w: usize, f: usize) -> bool {
        Self::pos(&self.workers[w], f).is_some() && Self::pos(&self.firms[f], w).is_some()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for f in 0..self.firms.len() {
            for w in 0..self.workers.len() {
                if self.acceptable(w, f) {
                    out.push((w, f));
                }
            }
        }
        out.sort();
        out
    }

    /// Does `w` strictly prefer `f` to its partner (or to being alone)?
    pub fn worker_wants(&self, w: usize, f: usize, current: Option<usize>) -> bool {
        match current {
            None => true,
            Some(g) => Self::pos(&self.workers[w], f).unwrap() < Self::pos(&self.workers[w], g).unwrap(),
        }
    }

    pub fn firm_wants(&self, f: usize, w: usize, current: Option<usize>) -> bool {
        match current {
            None => true,
            Some(v) => Self::pos(&self.firms[f], w).unwrap() < Self::pos(&self.firms[f], v).unwrap(),
        }
    }

    pub fn partners(&self, mu: &[(usize, usize)]) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut wp = vec![None; self.workers.len()];
        let mut fp = vec![None; self.firms.len()];
        for &(w, f) in mu {
            wp[w] = Some(f);
            fp[f] = Some(w);
        }
        (wp, fp)
    }

    pub fn is_stable(&self, mu: &[(usize, usize)]) -> bool {
        if mu.iter().any(|&(w, f)| !self.acceptable(w, f)) {
            return false;
        }
        let (wp, fp) = self.partners(mu);
        !self
            .pairs()
            .into_iter()
            .any(|(w, f)| wp[w] != Some(f) && self.worker_wants(w, f, wp[w]) && self.firm_wants(f, w, fp[f]))
    }

    /// Every matching, by recursion over firms.
    pub fn all_matchings(&self) -> Vec<RawMatching> {
        let mut out = Vec::new();
        let mut used = vec![false; self.workers.len()];
        let mut cur = Vec::new();
        self.rec(0, &mut used, &mut cur, &mut out);
        out
    }

    fn rec(&self, f: usize, used: &mut [bool], cur: &mut RawMatching, out: &mut Vec<RawMatching>) {
        if f == self.firms.len() {
            let mut m = cur.clone();
            m.sort();
            out.push(m);
            return;
        }
        self.rec(f + 1, used, cur, out);
        for &w in &self.firms[f] {
            if !used[w] && self.acceptable(w, f) {
                used[w] = true;
                cur.push((w, f));
                self.rec(f + 1, used, cur, out);
                cur.pop();
                used[w] = false;
            }
        }
    }

    pub fn stable_matchings(&self) -> BTreeSet<RawMatching> {
        self.all_matchings().into_iter().filter(|m| self.is_stable(m)).collect()
    }

    pub fn maximum_size(&self) -> usize {
        self.all_matchings().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_maximal(&self, mu: &[(usize, usize)]) -> bool {
        let (wp, fp) = self.partners(mu);
        !self
            .pairs()
            .into_iter()
            .any(|(w, f)| wp[w].is_none() && fp[f].is_none())
    }
}

pub fn raw_pairs(mu: &matchbound_core::Matching) -> RawMatching {
    mu.pairs().iter().map(|p| (p.worker, p.firm)).collect()
}

/// Builds a market from an acceptability matrix and ordering keys (lists are
/// sorted by key). Agents without partners are dropped. `None` if nothing is
/// acceptable.
pub fn market_from_keys(nw: usize, nf: usize, accept: &[bool], wkeys: &[u32], fkeys: &[u32]) -> Option<Market> {
    let acc = |w: usize, f: usize| accept[w * nf + f];
    let workers: Vec<usize> = (0..nw).filter(|&w| (0..nf).any(|f| acc(w, f))).collect();
    let firms: Vec<usize> = (0..nf).filter(|&f| (0..nw).any(|w| acc(w, f))).collect();
    if workers.is_empty() {
        return None;
    }
    let wprefs = workers
        .iter()
        .map(|&w| {
            let mut l: Vec<usize> = (0..firms.len()).filter(|&j| acc(w, firms[j])).collect();
            l.sort_by_key(|&j| (wkeys[w * nf + firms[j]], j));
            l
        })
        .collect();
    let fprefs = firms
        .iter()
        .map(|&f| {
            let mut l: Vec<usize> = (0..workers.len()).filter(|&i| acc(workers[i], f)).collect();
            l.sort_by_key(|&i| (fkeys[f * nw + workers[i]], i));
            l
        })
        .collect();
    Some(Market::from_prefs(wprefs, fprefs).expect("generated market is valid"))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Every market of the given shape whose agents all have between one and
/// `max_degree` acceptable partners, under every ordering of every list.
pub fn exhaustive(nw: usize, nf: usize, max_degree: usize) -> Vec<Market> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << (nw * nf)) {
        orderings(nw, nf, mask, max_degree, &mut out);
    }
    out
}

fn orderings(nw: usize, nf: usize, mask: u32, max_degree: usize, out: &mut Vec<Market>) {
    let acc = |w: usize, f: usize| mask & (1 << (w * nf + f)) != 0;
    let wl: Vec<Vec<usize>> = (0..nw).map(|w| (0..nf).filter(|&f| acc(w, f)).collect()).collect();
    let fl: Vec<Vec<usize>> = (0..nf).map(|f| (0..nw).filter(|&w| acc(w, f)).collect()).collect();
    if wl.iter().chain(&fl).any(|l| l.is_empty() || l.len() > max_degree) {
        return;
    }
    let choices: Vec<Vec<Vec<usize>>> = wl.iter().chain(&fl).map(|l| permutations(l)).collect();
    let mut idx = vec![0; choices.len()];
    loop {
        let lists: Vec<Vec<usize>> = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
        let (w, f) = lists.split_at(nw);
        out.push(Market::from_prefs(w.to_vec(), f.to_vec()).unwrap());
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            return;
        }
    }
}

/// All 46656 complete 3x3 markets.
pub fn complete_3x3() -> Vec<Market> {
    let mut out = Vec::new();
    orderings(3, 3, 0x1ff, 3, &mut out);
    out
}

pub fn random_markets(count: usize, max_side: usize, seed: u64) -> Vec<Market> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let nw = rng.random_range(1..=max_side);
        let nf = rng.random_range(1..=max_side);
        let p = rng.random_range(0.1..0.9);
        if let Some(m) = random_market(nw, nf, p, &mut rng) {
            out.push(m);
        }
    }
    out
}

/// Outputs of every generator at small sizes.
pub fn generated() -> Vec<Market> {
    let mut out = Vec::new();
    for n in 2..=6 {
        for seed in 0..3 {
            out.push(generate_fn(n, seed, ArbitraryPolicy::RandomSeeded).unwrap());
            out.push(generate_fn(n, seed, ArbitraryPolicy::AgreementAtTop).unwrap());
        }
    }
    let p = fixtures::market_p();
    for base in [p.clone(), identity_market(2, 1), identity_market(3, 2)] {
        let mu = deferred_acceptance(&base, SolveSide::FirmProposing);
        for (nw, nf, density) in [(1, 1, 0.0), (2, 2, 0.0), (2, 1, 0.5), (1, 3, 1.0)] {
            let plan = ExtensionPlan {
                new_workers: nw,
                new_firms: nf,
                seed: 11,
                extra_density: density,
                ..ExtensionPlan::new(base.clone(), mu.clone())
            };
            out.push(generate_gn(&plan).unwrap());
            out.push(generate_agreement_at_top(&plan).unwrap());
        }
    }
    out
}

/// Fixtures, exhaustive small shapes, complete 3x3 markets, a constrained
/// 3x3 grid, random markets and generator outputs.
pub fn corpus() -> Vec<(String, Market)> {
    let mut out: Vec<(String, Market)> = fixtures::all().into_iter().map(|(n, m)| (n.to_string(), m)).collect();
    for (nw, nf, d) in [
        (1, 1, 1),
        (1, 2, 2),
        (2, 1, 2),
        (2, 2, 2),
        (2, 3, 3),
        (3, 2, 3),
        (3, 3, 2),
    ] {
        out.extend(
            exhaustive(nw, nf, d)
                .into_iter()
                .map(|m| (format!("exhaustive {nw}x{nf}"), m)),
        );
    }
    out.extend(complete_3x3().into_iter().map(|m| ("complete 3x3".to_string(), m)));
    out.extend(
        random_markets(3000, 6, 2024)
            .into_iter()
            .map(|m| ("random".to_string(), m)),
    );
    out.extend(generated().into_iter().map(|m| ("generated".to_string(), m)));
    out
}
