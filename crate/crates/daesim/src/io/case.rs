//! Network case files.
//!
//! Line-oriented sectioned text; `#` starts a comment, blank lines are
//! skipped. Sections:
//!
//! ```text
//! [bus]
//! # id [slack VRE VIM]
//! 1
//! 2 slack 1.0 0.0
//! [branch]
//! # id from-bus to-bus r x
//! 1 1 2 0.0 0.5
//! [machine]
//! # bus H D xd_p P_dispatch Vset
//! 1 3.0 0.0 0.3 0.9 1.0
//! [load]
//! # bus P Q
//! 3 0.8 0.2
//! [event]
//! # time label...
//! 0.5 trip 2
//! ```
//!
//! Exactly one bus must be marked `slack`.

use std::fs;
use std::path::Path;

use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Default)]
pub struct CaseData {
    pub buses: Vec<usize>,
    pub slack_bus: usize,
    pub slack_v: (f64, f64),
    /// (id, from-bus id, to-bus id, r, x)
    pub branches: Vec<(usize, usize, usize, f64, f64)>,
    /// (bus id, H, D, xd', P dispatch, Vset)
    pub machines: Vec<(usize, f64, f64, f64, f64, f64)>,
    /// (bus id, P, Q)
    pub loads: Vec<(usize, f64, f64)>,
    /// (time, label)
    pub events: Vec<(f64, String)>,
}

fn malformed(line: usize, message: impl Into<String>) -> SolverError {
    SolverError::MalformedCase {
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse()
        .map_err(|_| malformed(line, format!("bad {what} '{tok}'")))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| malformed(line, format!("bad {what} '{tok}'")))
}

pub fn parse_case(text: &str) -> Result<CaseData> {
    let mut case = CaseData::default();
    let mut section = String::new();
    let mut slack_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(malformed(lineno, "unterminated section header"));
            }
            section = line[1..line.len() - 1].to_string();
            if !matches!(section.as_str(), "bus" | "branch" | "machine" | "load" | "event") {
                return Err(malformed(lineno, format!("unknown section '{section}'")));
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section.as_str() {
            "bus" => {
                let id = parse_usize(toks[0], lineno, "bus id")?;
                if case.buses.contains(&id) {
                    return Err(malformed(lineno, format!("duplicate bus {id}")));
                }
                case.buses.push(id);
                match toks.len() {
                    1 => {}
                    4 if toks[1] == "slack" => {
                        if slack_seen {
                            return Err(malformed(lineno, "second slack bus"));
                        }
                        slack_seen = true;
                        case.slack_bus = id;
                        case.slack_v = (
                            parse_f64(toks[2], lineno, "slack vre")?,
                            parse_f64(toks[3], lineno, "slack vim")?,
                        );
                    }
                    _ => return Err(malformed(lineno, "bus line: `id` or `id slack VRE VIM`")),
                }
            }
            "branch" => {
                if toks.len() != 5 {
                    return Err(malformed(lineno, "branch line: `id from to r x`"));
                }
                case.branches.push((
                    parse_usize(toks[0], lineno, "branch id")?,
                    parse_usize(toks[1], lineno, "from bus")?,
                    parse_usize(toks[2], lineno, "to bus")?,
                    parse_f64(toks[3], lineno, "r")?,
                    parse_f64(toks[4], lineno, "x")?,
                ));
            }
            "machine" => {
                if toks.len() != 6 {
                    return Err(malformed(lineno, "machine line: `bus H D xd P Vset`"));
                }
                case.machines.push((
                    parse_usize(toks[0], lineno, "machine bus")?,
                    parse_f64(toks[1], lineno, "H")?,
                    parse_f64(toks[2], lineno, "D")?,
                    parse_f64(toks[3], lineno, "xd'")?,
                    parse_f64(toks[4], lineno, "P dispatch")?,
                    parse_f64(toks[5], lineno, "Vset")?,
                ));
            }
            "load" => {
                if toks.len() != 3 {
                    return Err(malformed(lineno, "load line: `bus P Q`"));
                }
                case.loads.push((
                    parse_usize(toks[0], lineno, "load bus")?,
                    parse_f64(toks[1], lineno, "P")?,
                    parse_f64(toks[2], lineno, "Q")?,
                ));
            }
            "event" => {
                if toks.len() < 2 {
                    return Err(malformed(lineno, "event line: `time label...`"));
                }
                let t = parse_f64(toks[0], lineno, "event time")?;
                case.events.push((t, toks[1..].join(" ")));
            }
            _ => return Err(malformed(lineno, "data before any section header")),
        }
    }
    if case.buses.is_empty() {
        return Err(malformed(0, "case defines no buses"));
    }
    if !slack_seen {
        return Err(malformed(0, "case defines no slack bus"));
    }
    Ok(case)
}

pub fn read_case(path: &Path) -> Result<CaseData> {
    let text = fs::read_to_string(path).map_err(|source| SolverError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_case(&text)
}
