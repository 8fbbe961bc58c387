//! Line-oriented text format for markets.
//!
//! ```text
//! workers: w1 w2 w3
//! firms: f1 f2
//! pref w1: f2 f1        # descending preference; omitted firms unacceptable
//! pref f1: w1 w2
//! ```
//!
//! `#` starts a comment, blank lines are ignored, and every declared agent
//! needs exactly one `pref` line.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{valid_label, Market, PrunedEntry, Side};
use crate::error::{Error, Result};

/// A parsed market plus the non-reciprocated entries that were dropped.
#[derive(Clone, Debug)]
pub struct ParsedMarket {
    pub market: Market,
    pub pruned: Vec<PrunedEntry>,
}

/// Parses a market, pruning non-mutual entries.
pub fn parse_market(text: &str) -> Result<ParsedMarket> {
    parse_market_with(text, false)
}

/// Parses a market. With `strict`, a non-mutual entry is an error instead of
/// being pruned.
pub fn parse_market_with(text: &str, strict: bool) -> Result<ParsedMarket> {
    let mut workers: Option<Vec<String>> = None;
    let mut firms: Option<Vec<String>> = None;
    let mut index: HashMap<String, (Side, usize)> = HashMap::new();
    let mut worker_prefs: Vec<Option<Vec<usize>>> = Vec::new();
    let mut firm_prefs: Vec<Option<Vec<usize>>> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let syntax = |byte: usize, message: String| Error::Syntax {
            line: line_no,
            column: raw[..byte].chars().count() + 1,
            message,
        };

        let Some(colon) = content.find(':') else {
            return Err(syntax(content.len(), "missing `:`".into()));
        };
        let head = &content[..colon];
        let body_offset = colon + 1;
        let body = tokens(&content[body_offset..], body_offset);

        let head_tokens = tokens(head, 0);
        match head_tokens.as_slice() {
            [(_, "workers")] | [(_, "firms")] => {
                let side = if head_tokens[0].1 == "workers" {
                    Side::Worker
                } else {
                    Side::Firm
                };
                let slot = match side {
                    Side::Worker => &mut workers,
                    Side::Firm => &mut firms,
                };
                if slot.is_some() {
                    return Err(syntax(
                        head_tokens[0].0,
                        format!("`{}:` declared twice", head_tokens[0].1),
                    ));
                }
                let mut labels = Vec::with_capacity(body.len());
                for &(at, label) in &body {
                    if !valid_label(label) {
                        return Err(syntax(at, format!("invalid label `{label}`")));
                    }
                    if index.contains_key(label) {
                        return Err(Error::DuplicateLabel(label.to_string()));
                    }
                    index.insert(label.to_string(), (side, labels.len()));
                    labels.push(label.to_string());
                }
                match side {
                    Side::Worker => worker_prefs = vec![None; labels.len()],
                    Side::Firm => firm_prefs = vec![None; labels.len()],
                }
                *slot = Some(labels);
            }
            [(_, "pref"), (at, label)] => {
                if workers.is_none() || firms.is_none() {
                    return Err(syntax(
                        head_tokens[0].0,
                        "`pref` before both `workers:` and `firms:`".into(),
                    ));
                }
                let Some(&(side, agent)) = index.get(*label) else {
                    return Err(syntax(*at, format!("unknown agent `{label}`")));
                };
                let mut list = Vec::with_capacity(body.len());
                for &(pat, partner) in &body {
                    match index.get(partner) {
                        Some(&(pside, pidx)) if pside != side => {
                            if list.contains(&pidx) {
                                return Err(Error::DuplicatePreference {
                                    agent: label.to_string(),
                                    partner: partner.to_string(),
                                });
                            }
                            list.push(pidx);
                        }
                        _ => return Err(syntax(pat, format!("`{partner}` is not an agent of the opposite side"))),
                    }
                }
                let slot = match side {
                    Side::Worker => &mut worker_prefs[agent],
                    Side::Firm => &mut firm_prefs[agent],
                };
                if slot.is_some() {
                    return Err(syntax(*at, format!("second `pref` line for `{label}`")));
                }
                *slot = Some(list);
            }
            _ => {
                let at = head_tokens.first().map_or(0, |t| t.0);
                return Err(syntax(at, "expected `workers:`, `firms:` or `pref <label>:`".into()));
            }
        }
    }

    let workers = workers.unwrap_or_default();
    let firms = firms.unwrap_or_default();
    let collect = |prefs: Vec<Option<Vec<usize>>>, labels: &[String]| -> Result<Vec<Vec<usize>>> {
        prefs
            .into_iter()
            .zip(labels)
            .map(|(p, l)| p.ok_or_else(|| Error::MissingPreferences(l.clone())))
            .collect()
    };
    let worker_prefs = collect(worker_prefs, &workers)?;
    let firm_prefs = collect(firm_prefs, &firms)?;

    let (market, pruned) = if strict {
        (Market::new(workers, firms, worker_prefs, firm_prefs)?, Vec::new())
    } else {
        Market::new_pruned(workers, firms, worker_prefs, firm_prefs)?
    };
    Ok(ParsedMarket { market, pruned })
}

/// Whitespace-separated tokens with their byte offset in the line.
fn tokens(s: &str, offset: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(st)) => {
                out.push((offset + st, &s[st..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push((offset + st, &s[st..]));
    }
    out
}

/// Canonical text form: declarations, then worker lists, then firm lists, in
/// index order.
pub fn serialize_market(m: &Market) -> String {
    serialize_with_header(m, &[])
}

/// Canonical text form preceded by `# `-prefixed header lines.
pub fn serialize_with_header(m: &Market, header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "workers: {}", m.worker_labels().join(" "));
    let _ = writeln!(out, "firms: {}", m.firm_labels().join(" "));
    for w in 0..m.num_workers() {
        let list: Vec<&str> = m.worker_prefs(w).iter().map(|&f| m.firm_label(f)).collect();
        let _ = writeln!(out, "pref {}: {}", m.worker_label(w), list.join(" "));
    }
    for f in 0..m.num_firms() {
        let list: Vec<&str> = m.firm_prefs(f).iter().map(|&w| m.worker_label(w)).collect();
        let _ = writeln!(out, "pref {}: {}", m.firm_label(f), list.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parses_fixture_p() {
        let parsed = parse_market(fixtures::P_TEXT).unwrap();
        assert!(parsed.pruned.is_empty());
        let m = parsed.market;
        assert_eq!((m.num_workers(), m.num_firms()), (2, 2));
        assert_eq!(m.num_acceptable_pairs(), 4);
        assert_eq!(m.worker_prefs(0), &[1, 0]);
    }

    #[test]
    fn parses_fixture_r() {
        let m = parse_market(fixtures::R_TEXT).unwrap().market;
        assert_eq!((m.num_workers(), m.num_firms()), (4, 4));
        assert_eq!(m.num_acceptable_pairs(), 9);
    }

    #[test]
    fn prunes_non_mutual_entry_with_diagnostic() {
        let text = "workers: w1 w2\nfirms: f1\npref w1: f1\npref w2: f1\npref f1: w2\n";
        let err = parse_market(text).unwrap_err();
        // w1 loses its only entry
        assert!(matches!(err, Error::EmptyPreferences(ref l) if l == "w1"));

        let text = "workers: w1\nfirms: f1 f2\npref w1: f1 f2\npref f1: w1\npref f2: w1\n";
        assert!(parse_market(text).unwrap().pruned.is_empty());

        let text = "workers: w1 w2\nfirms: f1\npref w1: f1\npref w2: f1\npref f1: w1   # w2 unlisted\n";
        let parsed = parse_market(text).unwrap_err();
        assert!(matches!(parsed, Error::EmptyPreferences(ref l) if l == "w2"));

        let text = "workers: w1\nfirms: f1 f2\npref w1: f1 f2\npref f1: w1\npref f2: \n";
        let err = parse_market(text).unwrap_err();
        assert!(matches!(err, Error::EmptyPreferences(ref l) if l == "f2"));

        let text = "workers: w1 w2\nfirms: f1 f2\npref w1: f1 f2\npref w2: f2\npref f1: w1\npref f2: w2\n";
        let parsed = parse_market(text).unwrap();
        assert_eq!(parsed.pruned.len(), 1);
        assert_eq!(parsed.pruned[0].agent, "w1");
        assert_eq!(parsed.pruned[0].partner, "f2");
        assert!(matches!(parse_market_with(text, true), Err(Error::NotMutual { .. })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_market("workers: w1\nfirms f1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, column: 9, .. }), "{err}");

        let err = parse_market("workers: w1\nfirms: f1\npref w1: f1 zz\n").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Syntax {
                    line: 3,
                    column: 13,
                    ..
                }
            ),
            "{err}"
        );

        let err = parse_market("pref w1: f1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, column: 1, .. }), "{err}");

        let err = parse_market("workers: w1\nfirms: f1\nprefs w1: f1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn semantic_errors() {
        let err = parse_market("workers: w1 w1\nfirms: f1\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel(_)));

        let err = parse_market("workers: w1\nfirms: f1\npref w1: f1 f1\npref f1: w1\n").unwrap_err();
        assert!(matches!(err, Error::DuplicatePreference { .. }));

        let err = parse_market("workers: w1\nfirms: f1\npref w1: f1\n").unwrap_err();
        assert!(matches!(err, Error::MissingPreferences(ref l) if l == "f1"));

        // same-side entry
        let err = parse_market("workers: w1 w2\nfirms: f1\npref w1: w2\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }));
    }

    #[test]
    fn serialization_is_canonical() {
        let text = "# comment\nfirms: f1 f2\nworkers: w1 w2\n\npref f2: w2 w1\npref w2: f1 f2\npref w1: f2 f1\npref f1: w1 w2\n";
        let m = parse_market(text).unwrap().market;
        let canonical = serialize_market(&m);
        assert_eq!(
            canonical,
            "workers: w1 w2\nfirms: f1 f2\npref w1: f2 f1\npref w2: f1 f2\npref f1: w1 w2\npref f2: w2 w1\n"
        );
        assert_eq!(parse_market(&canonical).unwrap().market, m);
    }

    #[test]
    fn header_lines_are_comments() {
        let m = fixtures::market_p();
        let text = serialize_with_header(&m, &["seed 7".into()]);
        assert!(text.starts_with("# seed 7\n"));
        assert_eq!(parse_market(&text).unwrap().market, m);
    }
}
