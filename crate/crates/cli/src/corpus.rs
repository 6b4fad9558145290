//! Conformance corpus: `*.case` files of `key=value` lines, one case per
//! `case=` line.
//!
//! ```text
//! case=netscape-id-waldo
//! note=first example header of the Netscape cookie description
//! mode=v0
//! input=id=waldo
//! expect.cookie.0.name=id
//! expect.cookie.0.value=waldo
//! ```
//!
//! Modes are the `parse` modes (`v0`, `v1`, `cookie`, `cookie2`), `match-v0`
//! and `match-v1` (input is `HOST DOMAIN`), and `emulate` (with
//! `client=navigator3|msie3|rfc2965` and optional `header=set-cookie2`).
//! A case expects either `error=<class>` or a set of `expect.<key>` records
//! that must all appear in the output, written as `parse` would print them.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use statejar::sim::{ClientFlavor, SetCookieKind};

use crate::dump::{emulate_dump, escape, match_verdict, parse_dump, Dump, MatchInputError, ParseMode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseMode {
    Parse(ParseMode),
    Match { v1: bool },
    Emulate { client: ClientFlavor, kind: SetCookieKind },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expected {
    Error(String),
    Fields(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusCase {
    pub id: String,
    pub input: String,
    pub mode: CaseMode,
    pub expected: Expected,
    pub note: Option<String>,
}

#[derive(Debug)]
pub enum CorpusError {
    Unreadable(PathBuf, std::io::Error),
    Malformed(PathBuf, String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Unreadable(p, e) => write!(f, "{}: {e}", p.display()),
            CorpusError::Malformed(p, m) => write!(f, "{}: {m}", p.display()),
        }
    }
}

#[derive(Default)]
struct Draft {
    id: String,
    line: usize,
    input: Option<String>,
    mode: Option<String>,
    client: Option<String>,
    header: Option<String>,
    error: Option<String>,
    fields: Vec<(String, String)>,
    note: Option<String>,
}

impl Draft {
    fn finish(self) -> Result<CorpusCase, String> {
        let at = format!("case {} (line {})", self.id, self.line);
        let input = self.input.ok_or_else(|| format!("{at}: missing input"))?;
        let mode_name = self.mode.ok_or_else(|| format!("{at}: missing mode"))?;
        let mode = match mode_name.as_str() {
            "match-v0" => CaseMode::Match { v1: false },
            "match-v1" => CaseMode::Match { v1: true },
            "emulate" => {
                let name = self.client.clone().ok_or_else(|| format!("{at}: emulate needs client="))?;
                let client = ClientFlavor::parse(&name).ok_or_else(|| format!("{at}: unknown client {name:?}"))?;
                let kind = match self.header.as_deref() {
                    None | Some("set-cookie") => SetCookieKind::SetCookie,
                    Some("set-cookie2") => SetCookieKind::SetCookie2,
                    Some(other) => return Err(format!("{at}: unknown header {other:?}")),
                };
                CaseMode::Emulate { client, kind }
            }
            other => CaseMode::Parse(ParseMode::from_name(other).ok_or_else(|| format!("{at}: unknown mode {other:?}"))?),
        };
        if !matches!(mode, CaseMode::Emulate { .. }) && (self.client.is_some() || self.header.is_some()) {
            return Err(format!("{at}: client= and header= only apply to emulate"));
        }
        let expected = match (self.error, self.fields.is_empty()) {
            (Some(e), true) => Expected::Error(e),
            (None, false) => Expected::Fields(self.fields),
            (Some(_), false) => return Err(format!("{at}: error= and expect.* are exclusive")),
            (None, true) => return Err(format!("{at}: no expectation")),
        };
        Ok(CorpusCase {
            id: self.id,
            input,
            mode,
            expected,
            note: self.note,
        })
    }
}

pub fn parse_cases(text: &str) -> Result<Vec<CorpusCase>, String> {
    let mut cases = Vec::new();
    let mut draft: Option<Draft> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {line_no}: expected key=value"))?;
        let key = key.trim();
        if key == "case" {
            if let Some(d) = draft.take() {
                cases.push(d.finish()?);
            }
            draft = Some(Draft {
                id: value.trim().to_string(),
                line: line_no,
                ..Draft::default()
            });
            continue;
        }
        let d = draft
            .as_mut()
            .ok_or_else(|| format!("line {line_no}: {key} before the first case="))?;
        let slot = match key {
            "input" => &mut d.input,
            "mode" => &mut d.mode,
            "client" => &mut d.client,
            "header" => &mut d.header,
            "error" => &mut d.error,
            "note" => &mut d.note,
            _ => {
                let Some(field) = key.strip_prefix("expect.") else {
                    return Err(format!("line {line_no}: unknown key {key:?}"));
                };
                d.fields.push((field.to_string(), value.to_string()));
                continue;
            }
        };
        if slot.replace(value.to_string()).is_some() {
            return Err(format!("line {line_no}: {key} given twice"));
        }
    }
    if let Some(d) = draft {
        cases.push(d.finish()?);
    }
    Ok(cases)
}

/// Output for a case, or the error class it failed with.
pub fn evaluate(case: &CorpusCase) -> Result<Dump, String> {
    match &case.mode {
        CaseMode::Parse(mode) => parse_dump(*mode, &case.input).map_err(|e| e.class().to_string()),
        CaseMode::Match { v1 } => {
            let mut words = case.input.split_whitespace();
            let (Some(host), Some(domain), None) = (words.next(), words.next(), words.next()) else {
                return Err("BadInput".into());
            };
            let verdict = match_verdict(*v1, host, domain).map_err(|e| match e {
                MatchInputError::Host(_) => "MalformedHost".to_string(),
                MatchInputError::Domain(_) => "MalformedDomain".to_string(),
            })?;
            let mut out = Dump::default();
            out.push("verdict", verdict);
            Ok(out)
        }
        CaseMode::Emulate { client, kind } => Ok(emulate_dump(*client, *kind, &case.input)),
    }
}

/// Why a case failed, or `None` if it passed.
pub fn check(case: &CorpusCase) -> Option<String> {
    match (&case.expected, evaluate(case)) {
        (Expected::Error(want), Err(got)) if *want == got => None,
        (Expected::Error(want), Err(got)) => Some(format!("expected error {want}, got error {got}")),
        (Expected::Error(want), Ok(_)) => Some(format!("expected error {want}, but it succeeded")),
        (Expected::Fields(_), Err(got)) => Some(format!("unexpected error {got}")),
        (Expected::Fields(fields), Ok(dump)) => {
            let problems: Vec<String> = fields
                .iter()
                .filter_map(|(k, want)| match dump.get(k).map(escape) {
                    Some(got) if got == *want => None,
                    Some(got) => Some(format!("{k}: expected {want:?}, got {got:?}")),
                    None => Some(format!("{k}: missing")),
                })
                .collect();
            (!problems.is_empty()).then(|| problems.join("; "))
        }
    }
}

pub struct CorpusReport {
    pub cases: usize,
    /// `(file, case id, reason)`
    pub failures: Vec<(String, String, String)>,
}

/// Loads every `*.case` file under `dir` (sorted by name) and runs it.
pub fn run_corpus(dir: &Path) -> Result<CorpusReport, CorpusError> {
    let unreadable = |e| CorpusError::Unreadable(dir.to_path_buf(), e);
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(unreadable)?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(unreadable)?;
    files.retain(|p| p.extension().is_some_and(|e| e == "case") && p.is_file());
    files.sort();

    let mut ids = BTreeSet::new();
    let mut report = CorpusReport {
        cases: 0,
        failures: Vec::new(),
    };
    for path in files {
        let text = std::fs::read_to_string(&path).map_err(|e| CorpusError::Unreadable(path.clone(), e))?;
        let cases = parse_cases(&text).map_err(|m| CorpusError::Malformed(path.clone(), m))?;
        let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        for case in cases {
            if !ids.insert(case.id.clone()) {
                return Err(CorpusError::Malformed(path.clone(), format!("duplicate case id {}", case.id)));
            }
            report.cases += 1;
            if let Some(reason) = check(&case) {
                report.failures.push((file.clone(), case.id, reason));
            }
        }
    }
    Ok(report)
}
