use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use matchbound_core::analysis::{check_bound, monte_carlo, MonteCarloConfig};
use matchbound_core::digraph::{build_digraph, export_dot};
use matchbound_core::extremal::{
    fn_provenance, generate_agreement_at_top, generate_fn, generate_gn, induced_partition, validate_gn_structure,
    ArbitraryPolicy, ExtensionPlan,
};
use matchbound_core::market::{parse_market_with, serialize_with_header};
use matchbound_core::normal_form::normal_form;
use matchbound_core::solvers::{
    deferred_acceptance, enumerate_stable, maximum_matching, SolveSide, DEFAULT_ENUMERATION_CAP,
};
use matchbound_core::{Error, Market, Matching, Pair};

#[derive(Parser)]
#[command(
    name = "matchbound",
    version,
    about = "Stable and maximum matchings in two-sided markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write output to this file instead of stdout.
    #[arg(short = 'o', long = "output", global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Reject preference entries that are not reciprocated instead of pruning them.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Dot,
    Market,
}

#[derive(Copy, Clone, ValueEnum)]
enum SideArg {
    Worker,
    Firm,
}

#[derive(Copy, Clone, ValueEnum)]
enum PolicyArg {
    Random,
    AgreementAtTop,
}

impl From<PolicyArg> for ArbitraryPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Random => ArbitraryPolicy::RandomSeeded,
            PolicyArg::AgreementAtTop => ArbitraryPolicy::AgreementAtTop,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Stable matching by deferred acceptance.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "worker")]
        side: SideArg,
    },
    /// Every stable matching, by exhaustive search.
    Enumerate {
        file: PathBuf,
        /// Refuse markets with more acceptable pairs than this.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// A maximum matching of the acceptability graph.
    Max { file: PathBuf },
    /// Compare stable and maximum matching sizes.
    CheckBound { file: PathBuf },
    /// Reduce to the agents matched in every stable matching.
    NormalForm { file: PathBuf },
    /// Build a market from one of the extremal families.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Check that a market extends a base by new agents without disturbing the base matching.
    Validate {
        file: PathBuf,
        /// Base matching, e.g. "(1,2),(2,1)" or "(w1,f2),(w2,f1)". Defaults to the worker-proposing stable matching.
        #[arg(long)]
        matching: Option<String>,
        /// Comma-separated labels of new workers. Defaults to the workers the base matching leaves single.
        #[arg(long, value_name = "LABELS")]
        new_workers: Option<String>,
        /// Comma-separated labels of new firms.
        #[arg(long, value_name = "LABELS")]
        new_firms: Option<String>,
    },
    /// Graphviz rendering of the matching digraph.
    ExportDot {
        file: PathBuf,
        /// Only arcs between consecutively ranked partners.
        #[arg(long)]
        reduced: bool,
        /// Named vertex set to colour, as NAME=PAIRS. Repeatable.
        #[arg(long = "highlight", value_name = "NAME=PAIRS")]
        highlights: Vec<String>,
        /// Colour every stable matching.
        #[arg(long)]
        stable: bool,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Check the bound on many random markets.
    MonteCarlo {
        #[arg(long)]
        workers: usize,
        #[arg(long)]
        firms: usize,
        /// Probability that a pair is mutually acceptable.
        #[arg(long)]
        prob: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for a counterexample, should one turn up.
        #[arg(long)]
        quarantine: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Stable size ceil(n/2) with a matching of size n.
    Fn {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "random")]
        policy: PolicyArg,
    },
    /// Extend a balanced base market whose matching is perfect and stable.
    Gn {
        base: PathBuf,
        #[command(flatten)]
        ext: ExtensionArgs,
        #[arg(long, value_enum, default_value = "random")]
        policy: PolicyArg,
    },
    /// Extend a base with new agents ranked below every base agent.
    Agreement {
        base: PathBuf,
        #[command(flatten)]
        ext: ExtensionArgs,
    },
}

#[derive(clap::Args)]
struct ExtensionArgs {
    /// Perfect stable matching of the base. Defaults to the worker-proposing one.
    #[arg(long)]
    matching: Option<String>,
    #[arg(long, default_value_t = 0)]
    new_workers: usize,
    #[arg(long, default_value_t = 0)]
    new_firms: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability of each optional pair between a new and a base agent.
    #[arg(long, default_value_t = 0.0)]
    density: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::DuplicateLabel(_)
            | Error::InvalidLabel(_)
            | Error::DuplicatePreference { .. }
            | Error::UnknownPartner { .. }
            | Error::MissingPreferences(_)
            | Error::EmptyPreferences(_)
            | Error::NotMutual { .. }
            | Error::EmptyMarket
            | Error::ForeignAgent(_)
            | Error::MatchingConflict(_)
            | Error::UnknownVertex { .. }
            | Error::Io(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn load(path: &Path, strict: bool) -> CliResult<Market> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed = parse_market_with(&text, strict).map_err(|e| {
        let f = Failure::from(e);
        Failure {
            message: format!("{}: {}", path.display(), f.message),
            ..f
        }
    })?;
    for entry in &parsed.pruned {
        eprintln!("warning: {}: {entry}", path.display());
    }
    Ok(parsed.market)
}

fn resolve(m: &Market, token: &str, worker: bool) -> CliResult<usize> {
    let token = token.trim();
    let (count, found) = if worker {
        (m.num_workers(), m.worker_index(token))
    } else {
        (m.num_firms(), m.firm_index(token))
    };
    if let Some(i) = found {
        return Ok(i);
    }
    match token.parse::<usize>() {
        Ok(i) if (1..=count).contains(&i) => Ok(i - 1),
        _ => Err(Failure::usage(format!(
            "`{token}` is not a {} of this market",
            if worker { "worker" } else { "firm" }
        ))),
    }
}

/// Parses `(1,2),(2,1)`, optionally in braces, with one-based indices or labels.
fn parse_pairs(m: &Market, text: &str) -> CliResult<Vec<Pair>> {
    let body: String = text
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '{' && *c != '}')
        .collect();
    let mut pairs = Vec::new();
    let mut rest = body.as_str();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| Failure::usage(format!("expected pairs like (1,2),(2,1), got `{text}`")))?;
        let (w, f) = inner
            .0
            .split_once(',')
            .ok_or_else(|| Failure::usage(format!("pair `({})` needs a worker and a firm", inner.0)))?;
        pairs.push(Pair::new(resolve(m, w, true)?, resolve(m, f, false)?));
        rest = inner.1.strip_prefix(',').unwrap_or(inner.1);
    }
    Ok(pairs)
}

fn parse_matching(m: &Market, text: &str) -> CliResult<Matching> {
    Ok(Matching::for_market(m, parse_pairs(m, text)?)?)
}

fn parse_labels(m: &Market, text: &str, worker: bool) -> CliResult<BTreeSet<usize>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| resolve(m, t, worker))
        .collect()
}

fn require_format(format: Option<Format>, allowed: &[Format]) -> CliResult<Format> {
    let f = format.unwrap_or(allowed[0]);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::usage("this command does not support the requested --format"))
    }
}

fn pairs_csv(m: &Market, mu: &Matching) -> String {
    let mut out = String::from("worker,firm\n");
    for p in mu.pairs() {
        let _ = writeln!(out, "{},{}", m.worker_label(p.worker), m.firm_label(p.firm));
    }
    out
}

fn extension_plan(base: Market, ext: &ExtensionArgs, policy: ArbitraryPolicy) -> CliResult<ExtensionPlan> {
    let mu = match &ext.matching {
        Some(text) => parse_matching(&base, text)?,
        None => deferred_acceptance(&base, SolveSide::WorkerProposing),
    };
    Ok(ExtensionPlan {
        new_workers: ext.new_workers,
        new_firms: ext.new_firms,
        seed: ext.seed,
        policy,
        extra_density: ext.density,
        ..ExtensionPlan::new(base, mu)
    })
}

fn run(cli: &Cli) -> CliResult<String> {
    let strict = cli.strict;
    let format = cli.format;
    match &cli.command {
        Command::Solve { file, side } => {
            let f = require_format(format, &[Format::Text, Format::Csv])?;
            let m = load(file, strict)?;
            let side = match side {
                SideArg::Worker => SolveSide::WorkerProposing,
                SideArg::Firm => SolveSide::FirmProposing,
            };
            let mu = deferred_acceptance(&m, side);
            Ok(match f {
                Format::Csv => pairs_csv(&m, &mu),
                _ => format!("{mu}\n"),
            })
        }
        Command::Enumerate { file, cap } => {
            let f = require_format(format, &[Format::Text, Format::Csv])?;
            let m = load(file, strict)?;
            let all = enumerate_stable(&m, *cap)?;
            let mut out = String::new();
            if f == Format::Csv {
                out.push_str("matching,worker,firm\n");
                for (i, mu) in all.iter().enumerate() {
                    for p in mu.pairs() {
                        let _ = writeln!(out, "{},{},{}", i + 1, m.worker_label(p.worker), m.firm_label(p.firm));
                    }
                }
            } else {
                for mu in &all {
                    let _ = writeln!(out, "{mu}");
                }
            }
            Ok(out)
        }
        Command::Max { file } => {
            let f = require_format(format, &[Format::Text, Format::Csv])?;
            let m = load(file, strict)?;
            let mu = maximum_matching(&m);
            Ok(match f {
                Format::Csv => pairs_csv(&m, &mu),
                _ => format!("{mu}\n"),
            })
        }
        Command::CheckBound { file } => {
            let f = require_format(format, &[Format::Text, Format::Csv])?;
            let r = check_bound(&load(file, strict)?);
            Ok(match f {
                Format::Csv => format!(
                    "stable,maximum,ratio,tight\n{},{},{},{}\n",
                    r.stable_size,
                    r.maximum_size,
                    r.ratio_f64(),
                    r.tight
                ),
                _ => format!("{r}\n"),
            })
        }
        Command::NormalForm { file } => {
            require_format(format, &[Format::Market, Format::Text])?;
            let m = load(file, strict)?;
            let report = normal_form(&m);
            Ok(serialize_with_header(&report.core, &report.removal_log(&m)))
        }
        Command::Generate { kind } => {
            require_format(format, &[Format::Market, Format::Text])?;
            match kind {
                GenerateKind::Fn { n, seed, policy } => {
                    let m = generate_fn(*n, *seed, (*policy).into())?;
                    Ok(serialize_with_header(&m, &fn_provenance(*n, *seed, (*policy).into())))
                }
                GenerateKind::Gn { base, ext, policy } => {
                    let plan = extension_plan(load(base, strict)?, ext, (*policy).into())?;
                    let m = generate_gn(&plan)?;
                    Ok(serialize_with_header(&m, &plan.provenance()))
                }
                GenerateKind::Agreement { base, ext } => {
                    let plan = extension_plan(load(base, strict)?, ext, ArbitraryPolicy::AgreementAtTop)?;
                    let m = generate_agreement_at_top(&plan)?;
                    Ok(serialize_with_header(&m, &plan.provenance()))
                }
            }
        }
        Command::Validate {
            file,
            matching,
            new_workers,
            new_firms,
        } => {
            require_format(format, &[Format::Text])?;
            let m = load(file, strict)?;
            let (induced, induced_w, induced_f) = induced_partition(&m);
            let mu = match matching {
                Some(text) => parse_matching(&m, text)?,
                None => induced,
            };
            let single_w = || {
                (0..m.num_workers())
                    .filter(|&w| mu.worker_partner(w).is_none())
                    .collect()
            };
            let single_f = || (0..m.num_firms()).filter(|&f| mu.firm_partner(f).is_none()).collect();
            let new_w = match new_workers {
                Some(t) => parse_labels(&m, t, true)?,
                None if matching.is_none() => induced_w,
                None => single_w(),
            };
            let new_f = match new_firms {
                Some(t) => parse_labels(&m, t, false)?,
                None if matching.is_none() => induced_f,
                None => single_f(),
            };
            let v = validate_gn_structure(&m, &mu, &new_w, &new_f)?;
            if v.is_valid() {
                Ok(format!("valid: base matching {mu}\n"))
            } else {
                let lines: Vec<String> = v.violations.iter().map(|x| format!("violation: {x}")).collect();
                Err(Failure {
                    code: 1,
                    message: lines.join("\n"),
                })
            }
        }
        Command::ExportDot {
            file,
            reduced,
            highlights,
            stable,
            cap,
        } => {
            require_format(format, &[Format::Dot])?;
            let m = load(file, strict)?;
            let mut sets = Vec::new();
            for h in highlights {
                let (name, pairs) = h
                    .split_once('=')
                    .ok_or_else(|| Failure::usage(format!("highlight `{h}` is not NAME=PAIRS")))?;
                sets.push((name.to_string(), parse_pairs(&m, pairs)?));
            }
            if *stable {
                for (i, mu) in enumerate_stable(&m, *cap)?.into_iter().enumerate() {
                    sets.push((format!("stable {}", i + 1), mu.pairs().to_vec()));
                }
            }
            Ok(export_dot(&build_digraph(&m), &sets, *reduced)?)
        }
        Command::MonteCarlo {
            workers,
            firms,
            prob,
            trials,
            seed,
            quarantine,
        } => {
            let f = require_format(format, &[Format::Text, Format::Csv])?;
            let cfg = MonteCarloConfig {
                quarantine_dir: quarantine.clone(),
                ..MonteCarloConfig::new(*workers, *firms, *prob, *trials, *seed)
            };
            let run = monte_carlo(&cfg)?;
            if f == Format::Csv {
                return Ok(run.to_csv());
            }
            let s = run.summary()?;
            Ok(format!(
                "trials={} usable={} degenerate={}\nmin_ratio={} mean_ratio={:.4} tight={}\n",
                cfg.trials,
                s.usable,
                s.degenerate,
                *s.min_ratio.numer() as f64 / *s.min_ratio.denom() as f64,
                s.mean_ratio,
                s.tight
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| match &cli.output {
        Some(path) => {
            std::fs::write(path, out).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{out}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for line in f.message.lines() {
                eprintln!("error: {line}");
            }
            ExitCode::from(f.code)
        }
    }
}
