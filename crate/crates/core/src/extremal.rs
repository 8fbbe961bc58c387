//! Markets whose stable matchings are as small as the half-size bound allows.
//!
//! A market has a stable matching of size `n` exactly when it can be built
//! from a balanced base market `P` with a perfect stable matching `mu` by
//! adding new workers `W'` and new firms `F'` such that
//!
//! * no new worker is acceptable to a new firm,
//! * every base firm `f` ranks each acceptable new worker below `mu(f)`,
//! * every base worker `w` ranks each acceptable new firm below `mu(w)`,
//!
//! with everything else free. [`generate_gn`] performs that construction,
//! [`validate_gn_structure`] checks it on an arbitrary market, and
//! [`generate_fn`] specialises it so that the maximum matching has size `n`
//! while stable matchings have size `ceil(n/2)`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digraph::{build_digraph, ArcKind};
use crate::error::{Error, Result};
use crate::market::{blocking_pairs, is_stable, Market, Matching, Pair};
use crate::normal_form::normal_form;
use crate::solvers::{deferred_acceptance, maximum_matching, SolveSide};

/// How unconstrained preference content is filled in.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ArbitraryPolicy {
    /// Seeded shuffles; new partners land anywhere below the matched partner.
    RandomSeeded,
    /// As `RandomSeeded`, but new partners land below every partner that is
    /// matched in the base stable matching.
    AgreementAtTop,
}

impl fmt::Display for ArbitraryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArbitraryPolicy::RandomSeeded => "random",
            ArbitraryPolicy::AgreementAtTop => "agreement-at-top",
        })
    }
}

/// Recipe for extending a base market.
#[derive(Clone, Debug)]
pub struct ExtensionPlan {
    pub base: Market,
    /// Perfect stable matching of `base`.
    pub base_stable: Matching,
    pub new_workers: usize,
    pub new_firms: usize,
    pub seed: u64,
    pub policy: ArbitraryPolicy,
    /// Probability that an optional pair between a new agent and a base agent
    /// is made acceptable. At 0 each new agent gets exactly one partner.
    pub extra_density: f64,
}

impl ExtensionPlan {
    pub fn new(base: Market, base_stable: Matching) -> Self {
        ExtensionPlan {
            base,
            base_stable,
            new_workers: 0,
            new_firms: 0,
            seed: 0,
            policy: ArbitraryPolicy::RandomSeeded,
            extra_density: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.base.num_workers();
        if self.base.num_firms() != n {
            return Err(Error::InvalidPlan(format!(
                "base has {n} workers and {} firms",
                self.base.num_firms()
            )));
        }
        if !is_stable(&self.base, &self.base_stable) {
            return Err(Error::InvalidPlan(
                "base matching is not stable in the base market".into(),
            ));
        }
        if self.base_stable.len() != n {
            return Err(Error::InvalidPlan(format!(
                "base matching has {} pairs, base has {n} agents per side",
                self.base_stable.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.extra_density) {
            return Err(Error::InvalidPlan(format!(
                "extra density {} outside [0, 1]",
                self.extra_density
            )));
        }
        Ok(())
    }

    /// Comment lines recording how a market was generated.
    pub fn provenance(&self) -> Vec<String> {
        vec![
            "generated: gn".into(),
            format!(
                "base size {}, new workers {}, new firms {}, policy {}, extra density {}, seed {}",
                self.base.num_workers(),
                self.new_workers,
                self.new_firms,
                self.policy,
                self.extra_density,
                self.seed
            ),
            format!("base stable matching {}", self.base_stable),
        ]
    }
}

/// Sizes of a stable and a maximum matching, and how close they are to the
/// half-size bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub stable_size: usize,
    pub maximum_size: usize,
    pub ratio: Ratio<usize>,
    /// `stable_size == ceil(maximum_size / 2)`.
    pub tight: bool,
}

impl BoundReport {
    /// # Panics
    ///
    /// If `maximum_size` is zero or smaller than `stable_size`.
    pub fn new(stable_size: usize, maximum_size: usize) -> Self {
        assert!(
            maximum_size > 0 && stable_size <= maximum_size,
            "{stable_size} / {maximum_size}"
        );
        BoundReport {
            stable_size,
            maximum_size,
            ratio: Ratio::new(stable_size, maximum_size),
            tight: stable_size == maximum_size.div_ceil(2),
        }
    }

    /// `stable_size >= ceil(maximum_size / 2)`.
    pub fn bound_holds(&self) -> bool {
        self.stable_size >= self.maximum_size.div_ceil(2)
    }

    pub fn ratio_f64(&self) -> f64 {
        *self.ratio.numer() as f64 / *self.ratio.denom() as f64
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stable={} maximum={} ratio={} tight={}",
            self.stable_size,
            self.maximum_size,
            self.ratio_f64(),
            if self.tight { "yes" } else { "no" }
        )
    }
}

/// Market of size `k` where `w_i` and `f_i` rank each other first and all
/// pairs are acceptable; the rest of each list is a seeded shuffle. Its unique
/// stable matching is `{(i,i)}`.
pub fn identity_market(k: usize, seed: u64) -> Market {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut list = |i: usize| {
        let mut rest: Vec<usize> = (0..k).filter(|&j| j != i).collect();
        rest.shuffle(&mut rng);
        std::iter::once(i).chain(rest).collect::<Vec<_>>()
    };
    let worker_prefs = (0..k).map(&mut list).collect();
    let firm_prefs = (0..k).map(&mut list).collect();
    Market::from_prefs(worker_prefs, firm_prefs).expect("identity market is valid")
}

pub fn identity_matching(k: usize) -> Matching {
    Matching::new(k, k, (0..k).map(|i| Pair::new(i, i))).expect("identity is a matching")
}

/// Builds a market of the class for `n = |plan.base_stable|`.
pub fn generate_gn(plan: &ExtensionPlan) -> Result<Market> {
    plan.validate()?;
    if plan.new_workers == 0 && plan.new_firms == 0 {
        return Ok(plan.base.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    Ok(extend(
        &plan.base,
        &plan.base_stable,
        plan.new_workers,
        plan.new_firms,
        plan.policy,
        plan.extra_density,
        &mut rng,
    ))
}

/// [`generate_gn`] with new agents ranked below every base agent. Every base
/// agent must be matched in every stable matching of the base; the stable
/// matchings of the output are then exactly those of the base.
pub fn generate_agreement_at_top(plan: &ExtensionPlan) -> Result<Market> {
    plan.validate()?;
    let report = normal_form(&plan.base);
    if !report.keeps_all_agents() {
        let labels: Vec<&str> = report.removed.iter().map(|(a, _)| plan.base.label(*a)).collect();
        return Err(Error::NotNormalForm(labels.join(" ")));
    }
    let plan = ExtensionPlan {
        policy: ArbitraryPolicy::AgreementAtTop,
        ..plan.clone()
    };
    generate_gn(&plan)
}

/// Adds agents to any market, ranked below every normal-form agent by the
/// normal-form agents they are acceptable to. Repeating this never changes
/// the set of stable matchings.
pub fn extend_agreement_at_top(m: &Market, new_workers: usize, new_firms: usize, seed: u64) -> Market {
    let mu = deferred_acceptance(m, SolveSide::WorkerProposing);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    extend(
        m,
        &mu,
        new_workers,
        new_firms,
        ArbitraryPolicy::AgreementAtTop,
        0.0,
        &mut rng,
    )
}

fn fresh_labels(prefix: char, count: usize, start: usize, taken: &mut HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut i = start;
    while out.len() < count {
        let label = format!("{prefix}{i}");
        if taken.insert(label.clone()) {
            out.push(label);
        }
        i += 1;
    }
    out
}

/// Appends `new_workers` workers and `new_firms` firms. New workers are only
/// acceptable to firms matched in `mu` and vice versa. Matched agents place
/// new partners below `mu`-partner (random) or below every matched agent of
/// the other side (agreement at the top).
fn extend(
    m: &Market,
    mu: &Matching,
    new_workers: usize,
    new_firms: usize,
    policy: ArbitraryPolicy,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> Market {
    let (nw, nf) = (m.num_workers(), m.num_firms());
    let matched_workers = mu.matched_workers();
    let matched_firms = mu.matched_firms();
    assert!(!mu.is_empty(), "a valid market has a non-empty stable matching");

    let mut taken: HashSet<String> = m.worker_labels().iter().chain(m.firm_labels()).cloned().collect();
    let mut worker_labels = m.worker_labels().to_vec();
    worker_labels.extend(fresh_labels('w', new_workers, nw + 1, &mut taken));
    let mut firm_labels = m.firm_labels().to_vec();
    firm_labels.extend(fresh_labels('f', new_firms, nf + 1, &mut taken));

    let mut worker_prefs: Vec<Vec<usize>> = (0..nw).map(|w| m.worker_prefs(w).to_vec()).collect();
    let mut firm_prefs: Vec<Vec<usize>> = (0..nf).map(|f| m.firm_prefs(f).to_vec()).collect();

    // Partners of each new agent among matched agents of the other side.
    let mut pick = |j: usize, pool: &[usize]| -> Vec<usize> {
        let required = pool[j % pool.len()];
        let mut chosen: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&x| x == required || (density > 0.0 && rng.random_bool(density)))
            .collect();
        chosen.shuffle(rng);
        chosen
    };
    let new_worker_lists: Vec<Vec<usize>> = (0..new_workers).map(|j| pick(j, &matched_firms)).collect();
    let new_firm_lists: Vec<Vec<usize>> = (0..new_firms).map(|j| pick(j, &matched_workers)).collect();

    // Which new agents each matched agent must now rank.
    let mut firm_gets: Vec<Vec<usize>> = vec![Vec::new(); nf];
    for (j, list) in new_worker_lists.iter().enumerate() {
        for &f in list {
            firm_gets[f].push(nw + j);
        }
    }
    let mut worker_gets: Vec<Vec<usize>> = vec![Vec::new(); nw];
    for (j, list) in new_firm_lists.iter().enumerate() {
        for &w in list {
            worker_gets[w].push(nf + j);
        }
    }

    let mut is_matched_firm = vec![false; nf];
    matched_firms.iter().for_each(|&f| is_matched_firm[f] = true);
    let mut is_matched_worker = vec![false; nw];
    matched_workers.iter().for_each(|&w| is_matched_worker[w] = true);

    let mut insert_below = |list: &mut Vec<usize>, newcomers: &mut Vec<usize>, floor: usize| {
        newcomers.shuffle(rng);
        for &x in newcomers.iter() {
            let at = rng.random_range(floor..=list.len());
            list.insert(at, x);
        }
    };
    for &w in &matched_workers {
        let list = &mut worker_prefs[w];
        let floor = match policy {
            ArbitraryPolicy::RandomSeeded => {
                let partner = mu.worker_partner(w).expect("matched");
                list.iter().position(|&f| f == partner).expect("partner is acceptable") + 1
            }
            ArbitraryPolicy::AgreementAtTop => {
                list.iter()
                    .rposition(|&f| is_matched_firm[f])
                    .expect("partner is acceptable")
                    + 1
            }
        };
        insert_below(list, &mut worker_gets[w], floor);
    }
    for &f in &matched_firms {
        let list = &mut firm_prefs[f];
        let floor = match policy {
            ArbitraryPolicy::RandomSeeded => {
                let partner = mu.firm_partner(f).expect("matched");
                list.iter().position(|&w| w == partner).expect("partner is acceptable") + 1
            }
            ArbitraryPolicy::AgreementAtTop => {
                list.iter()
                    .rposition(|&w| is_matched_worker[w])
                    .expect("partner is acceptable")
                    + 1
            }
        };
        insert_below(list, &mut firm_gets[f], floor);
    }

    worker_prefs.extend(new_worker_lists);
    firm_prefs.extend(new_firm_lists);
    Market::new(worker_labels, firm_labels, worker_prefs, firm_prefs).expect("extension preserves validity")
}

/// A market with a maximum matching of size `n` and stable matchings of size
/// `ceil(n/2)`.
///
/// The base is [`identity_market`] of size `k = ceil(n/2)`. For
/// `i < floor(n/2)`, new worker `w'_i` is acceptable only to `f_i` and new
/// firm `f'_i` only to `w_i`, giving the size-`n` matching
/// `{(w_i, f'_i)} + {(w'_i, f_i)}`, plus `(w_k, f_k)` when `n` is odd.
pub fn generate_fn(n: usize, seed: u64, policy: ArbitraryPolicy) -> Result<Market> {
    if n < 2 {
        return Err(Error::SizeTooSmall(n));
    }
    let k = n.div_ceil(2);
    let added = n / 2;
    let base = identity_market(k, seed);
    let mu = identity_matching(k);
    // Separate stream so the base does not depend on the extension draws.
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    Ok(extend(&base, &mu, added, added, policy, 0.0, &mut rng))
}

pub fn fn_provenance(n: usize, seed: u64, policy: ArbitraryPolicy) -> Vec<String> {
    vec![format!("generated: fn n={n} seed={seed} policy={policy}")]
}

/// The size-`n` matching built into [`generate_fn`] output.
pub fn fn_witness(m: &Market, n: usize) -> Result<Matching> {
    let k = n.div_ceil(2);
    let added = n / 2;
    let mut pairs: Vec<Pair> = (0..added)
        .flat_map(|i| [Pair::new(i, k + i), Pair::new(k + i, i)])
        .collect();
    if n % 2 == 1 {
        pairs.push(Pair::new(k - 1, k - 1));
    }
    Matching::for_market(m, pairs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GnViolation {
    /// A new worker and a new firm are mutually acceptable.
    NewPair(Pair),
    /// Base firm prefers a new worker to its matched partner.
    FirmPrefersNewWorker {
        firm: usize,
        partner: usize,
        new_worker: usize,
    },
    /// Base worker prefers a new firm to its matched partner.
    WorkerPrefersNewFirm {
        worker: usize,
        partner: usize,
        new_firm: usize,
    },
    /// The matching blocks itself within the base agents.
    BaseBlockingPair(Pair),
}

impl fmt::Display for GnViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GnViolation::NewPair(p) => write!(f, "new agents form acceptable pair {p}"),
            GnViolation::FirmPrefersNewWorker {
                firm,
                partner,
                new_worker,
            } => write!(
                f,
                "firm {} prefers new worker {} to its partner {}",
                firm + 1,
                new_worker + 1,
                partner + 1
            ),
            GnViolation::WorkerPrefersNewFirm {
                worker,
                partner,
                new_firm,
            } => write!(
                f,
                "worker {} prefers new firm {} to its partner {}",
                worker + 1,
                new_firm + 1,
                partner + 1
            ),
            GnViolation::BaseBlockingPair(p) => write!(f, "{p} blocks the base matching"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GnValidation {
    pub violations: Vec<GnViolation>,
}

impl GnValidation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `m` decomposes as a base market (agents outside `new_workers`
/// and `new_firms`, perfectly matched by `base_stable`) plus new agents
/// attached below the matching. Reports every violation.
pub fn validate_gn_structure(
    m: &Market,
    base_stable: &Matching,
    new_workers: &BTreeSet<usize>,
    new_firms: &BTreeSet<usize>,
) -> Result<GnValidation> {
    if base_stable.num_workers() != m.num_workers() || base_stable.num_firms() != m.num_firms() {
        return Err(Error::MalformedPartition(
            "matching is not sized for this market".into(),
        ));
    }
    if let Some(&w) = new_workers.range(m.num_workers()..).next() {
        return Err(Error::MalformedPartition(format!("new worker {} out of range", w + 1)));
    }
    if let Some(&f) = new_firms.range(m.num_firms()..).next() {
        return Err(Error::MalformedPartition(format!("new firm {} out of range", f + 1)));
    }
    if let Some(p) = base_stable.pairs().iter().find(|p| !m.is_acceptable(p.worker, p.firm)) {
        return Err(Error::MalformedPartition(format!(
            "base matching contains unacceptable pair {p}"
        )));
    }
    for w in 0..m.num_workers() {
        let is_new = new_workers.contains(&w);
        let matched = base_stable.worker_partner(w).is_some();
        if is_new == matched {
            return Err(Error::MalformedPartition(format!(
                "worker {} is {} but {}",
                w + 1,
                if is_new { "new" } else { "in the base" },
                if matched { "matched" } else { "unmatched" }
            )));
        }
    }
    for f in 0..m.num_firms() {
        let is_new = new_firms.contains(&f);
        let matched = base_stable.firm_partner(f).is_some();
        if is_new == matched {
            return Err(Error::MalformedPartition(format!(
                "firm {} is {} but {}",
                f + 1,
                if is_new { "new" } else { "in the base" },
                if matched { "matched" } else { "unmatched" }
            )));
        }
    }

    let d = build_digraph(m);
    let mut violations = Vec::new();
    for &v in d.vertices() {
        let (new_w, new_f) = (new_workers.contains(&v.worker), new_firms.contains(&v.firm));
        match (new_w, new_f) {
            (true, true) => violations.push(GnViolation::NewPair(v)),
            (true, false) => {
                let partner = base_stable.firm_partner(v.firm).expect("base firm is matched");
                let target = Pair::new(partner, v.firm);
                if d.arc_between(v, target) != Some(ArcKind::Firm) {
                    violations.push(GnViolation::FirmPrefersNewWorker {
                        firm: v.firm,
                        partner,
                        new_worker: v.worker,
                    });
                }
            }
            (false, true) => {
                let partner = base_stable.worker_partner(v.worker).expect("base worker is matched");
                let target = Pair::new(v.worker, partner);
                if d.arc_between(v, target) != Some(ArcKind::Worker) {
                    violations.push(GnViolation::WorkerPrefersNewFirm {
                        worker: v.worker,
                        partner,
                        new_firm: v.firm,
                    });
                }
            }
            (false, false) => {}
        }
    }
    // Only base-base pairs can block the base matching within the base.
    for p in blocking_pairs(m, base_stable) {
        if !new_workers.contains(&p.worker) && !new_firms.contains(&p.firm) {
            violations.push(GnViolation::BaseBlockingPair(p));
        }
    }
    Ok(GnValidation { violations })
}

/// The decomposition suggested by the normal form: the worker-proposing
/// stable matching as base matching, unmatched agents as new agents.
pub fn induced_partition(m: &Market) -> (Matching, BTreeSet<usize>, BTreeSet<usize>) {
    let mu = deferred_acceptance(m, SolveSide::WorkerProposing);
    let new_workers = (0..m.num_workers())
        .filter(|&w| mu.worker_partner(w).is_none())
        .collect();
    let new_firms = (0..m.num_firms()).filter(|&f| mu.firm_partner(f).is_none()).collect();
    (mu, new_workers, new_firms)
}

/// Does `m` have a stable matching of size `n`? All stable matchings have
/// the same size, so one deferred acceptance run decides it.
pub fn is_member_gn(m: &Market, n: usize) -> bool {
    deferred_acceptance(m, SolveSide::WorkerProposing).len() == n
}

/// Does `m` have a matching of size `n` and stable matchings of size
/// `ceil(n/2)`?
pub fn is_member_fn(m: &Market, n: usize) -> bool {
    maximum_matching(m).len() >= n && is_member_gn(m, n.div_ceil(2))
}
