//! Half-size bound checks, employment rates and randomized bound testing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extremal::BoundReport;
use crate::market::{serialize_with_header, Market};
use crate::solvers::{deferred_acceptance, maximum_matching, SolveSide};

/// Stable size (deferred acceptance) against maximum size (augmenting paths).
pub fn check_bound(m: &Market) -> BoundReport {
    let stable = deferred_acceptance(m, SolveSide::WorkerProposing).len();
    let maximum = maximum_matching(m).len();
    BoundReport::new(stable, maximum)
}

/// Share of workers employed in a stable matching.
pub fn employment_rate(m: &Market) -> Ratio<usize> {
    Ratio::new(
        deferred_acceptance(m, SolveSide::WorkerProposing).len(),
        m.num_workers(),
    )
}

#[derive(Clone, Debug)]
pub struct MonteCarloConfig {
    pub workers: usize,
    pub firms: usize,
    pub acceptability_probability: f64,
    pub trials: usize,
    pub seed: u64,
    /// Where a counterexample to the bound is written, if one is ever found.
    pub quarantine_dir: Option<PathBuf>,
}

impl MonteCarloConfig {
    pub fn new(workers: usize, firms: usize, acceptability_probability: f64, trials: usize, seed: u64) -> Self {
        MonteCarloConfig {
            workers,
            firms,
            acceptability_probability,
            trials,
            seed,
            quarantine_dir: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.workers == 0 || self.firms == 0 {
            return Err(Error::InvalidConfig("worker and firm counts must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.acceptability_probability) {
            return Err(Error::InvalidConfig(format!(
                "acceptability probability {} outside [0, 1]",
                self.acceptability_probability
            )));
        }
        Ok(())
    }
}

/// Seed of trial `trial` in a run seeded with `seed` (splitmix64 step).
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed.wrapping_add((trial as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Each pair acceptable independently with probability `p`, each list a
/// uniform random order. Agents left without partners are dropped (labels
/// keep their original numbering). `None` if no pair is acceptable.
pub fn random_market<R: Rng + ?Sized>(workers: usize, firms: usize, p: f64, rng: &mut R) -> Option<Market> {
    let mut worker_lists: Vec<Vec<usize>> = vec![Vec::new(); workers];
    let mut firm_lists: Vec<Vec<usize>> = vec![Vec::new(); firms];
    for (w, wl) in worker_lists.iter_mut().enumerate() {
        for (f, fl) in firm_lists.iter_mut().enumerate() {
            if rng.random_bool(p) {
                wl.push(f);
                fl.push(w);
            }
        }
    }
    let kept_workers: Vec<usize> = (0..workers).filter(|&w| !worker_lists[w].is_empty()).collect();
    if kept_workers.is_empty() {
        return None;
    }
    let kept_firms: Vec<usize> = (0..firms).filter(|&f| !firm_lists[f].is_empty()).collect();
    let mut worker_pos = vec![0; workers];
    kept_workers.iter().enumerate().for_each(|(i, &w)| worker_pos[w] = i);
    let mut firm_pos = vec![0; firms];
    kept_firms.iter().enumerate().for_each(|(i, &f)| firm_pos[f] = i);

    let worker_prefs = kept_workers
        .iter()
        .map(|&w| {
            let mut l: Vec<usize> = worker_lists[w].iter().map(|&f| firm_pos[f]).collect();
            l.shuffle(rng);
            l
        })
        .collect();
    let firm_prefs = kept_firms
        .iter()
        .map(|&f| {
            let mut l: Vec<usize> = firm_lists[f].iter().map(|&w| worker_pos[w]).collect();
            l.shuffle(rng);
            l
        })
        .collect();
    let worker_labels = kept_workers.iter().map(|w| format!("w{}", w + 1)).collect();
    let firm_labels = kept_firms.iter().map(|f| format!("f{}", f + 1)).collect();
    Some(Market::new(worker_labels, firm_labels, worker_prefs, firm_prefs).expect("random market is valid"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub workers: usize,
    pub firms: usize,
    pub report: BoundReport,
}

#[derive(Clone, Debug)]
pub struct MonteCarloRun {
    /// Non-degenerate trials, by trial index.
    pub rows: Vec<TrialRow>,
    pub degenerate: usize,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub usable: usize,
    pub degenerate: usize,
    pub min_ratio: Ratio<usize>,
    pub mean_ratio: f64,
    pub tight: usize,
}

impl MonteCarloRun {
    pub fn summary(&self) -> Result<Summary> {
        let Some(min_ratio) = self.rows.iter().map(|r| r.report.ratio).min() else {
            return Err(Error::NoTrials(format!(
                "{} trials, {} degenerate",
                self.trials, self.degenerate
            )));
        };
        let mean_ratio = self.rows.iter().map(|r| r.report.ratio_f64()).sum::<f64>() / self.rows.len() as f64;
        Ok(Summary {
            usable: self.rows.len(),
            degenerate: self.degenerate,
            min_ratio,
            mean_ratio,
            tight: self.rows.iter().filter(|r| r.report.tight).count(),
        })
    }

    /// `trial,workers,firms,stable,maximum,ratio,tight` rows followed by a
    /// `#`-commented summary.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,workers,firms,stable,maximum,ratio,tight\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.trial,
                r.workers,
                r.firms,
                r.report.stable_size,
                r.report.maximum_size,
                r.report.ratio_f64(),
                r.report.tight
            );
        }
        match self.summary() {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "# trials={} usable={} degenerate={}",
                    self.trials, s.usable, s.degenerate
                );
                let _ = writeln!(
                    out,
                    "# min_ratio={} ({})",
                    *s.min_ratio.numer() as f64 / *s.min_ratio.denom() as f64,
                    s.min_ratio
                );
                let _ = writeln!(out, "# mean_ratio={}", s.mean_ratio);
                let _ = writeln!(out, "# tight={}", s.tight);
            }
            Err(e) => {
                let _ = writeln!(out, "# {e}");
            }
        }
        out
    }
}

enum Trial {
    Degenerate,
    Report(TrialRow, Box<Market>),
}

fn run_trial(cfg: &MonteCarloConfig, trial: usize) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
    match random_market(cfg.workers, cfg.firms, cfg.acceptability_probability, &mut rng) {
        None => Trial::Degenerate,
        Some(m) => {
            let report = check_bound(&m);
            let row = TrialRow {
                trial,
                workers: m.num_workers(),
                firms: m.num_firms(),
                report,
            };
            Trial::Report(row, Box::new(m))
        }
    }
}

/// Writes a counterexample market with its seed and trial index.
pub fn quarantine(dir: &Path, seed: u64, trial: usize, m: &Market) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("counterexample-seed{seed}-trial{trial}.market"));
    let header = [
        format!("half-size bound counterexample: seed {seed}, trial {trial}"),
        format!("{}", check_bound(m)),
    ];
    std::fs::write(&path, serialize_with_header(m, &header))?;
    Ok(path)
}

/// Runs `cfg.trials` independent random markets in parallel. Results are
/// ordered by trial index whatever the completion order. A market violating
/// the bound aborts the run with the counterexample saved.
pub fn monte_carlo(cfg: &MonteCarloConfig) -> Result<MonteCarloRun> {
    cfg.validate()?;
    let results: Vec<Trial> = (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect();

    let mut rows = Vec::new();
    let mut degenerate = 0;
    for result in results {
        match result {
            Trial::Degenerate => degenerate += 1,
            Trial::Report(row, m) => {
                if !row.report.bound_holds() {
                    let saved = match &cfg.quarantine_dir {
                        Some(dir) => Some(quarantine(dir, cfg.seed, row.trial, &m)?),
                        None => None,
                    };
                    return Err(Error::BoundViolation {
                        trial: row.trial,
                        seed: cfg.seed,
                        stable: row.report.stable_size,
                        maximum: row.report.maximum_size,
                        saved,
                    });
                }
                rows.push(row);
            }
        }
    }
    if cfg.trials > 0 && rows.is_empty() {
        return Err(Error::NoTrials(format!(
            "all {} trials had no acceptable pair",
            cfg.trials
        )));
    }
    Ok(MonteCarloRun {
        rows,
        degenerate,
        trials: cfg.trials,
    })
}
