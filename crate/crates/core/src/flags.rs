//! Flag selection files (`selected_flags.txt`, `update_area_flags.txt`).
//!
//! One record per line, pipe-delimited:
//!
//! ```text
//! # input mode
//! token|kind|default|label
//! # update mode
//! token|kind|default|label|refresh
//! ```
//!
//! `kind` is one of `bool`, `int`, `float`, `string`, `infile` or
//! `enum(a,b,...)`. `refresh` is a comma-separated subset of
//! `outputs,viewer`. A line holding only a token is shorthand for a boolean
//! flag labelled with the token sans dashes (input mode only). Blank lines and
//! lines starting with `#` are ignored.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagKind {
    Bool,
    Int,
    Float,
    String,
    Infile,
    Enum,
}

impl FlagKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bool => "bool",
            Self::Int => "int",
            Self::Float => "float",
            Self::String => "string",
            Self::Infile => "infile",
            Self::Enum => "enum",
        }
    }
}

impl fmt::Display for FlagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One exposed CLI option.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagSpec {
    pub token: String,
    pub kind: FlagKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub choices: Vec<String>,
    pub default: String,
    pub label: String,
}

impl FlagSpec {
    pub fn new(token: impl Into<String>, kind: FlagKind, default: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            token: token.into(),
            kind,
            choices: Vec::new(),
            default: default.into(),
            label: label.into(),
        }
    }

    pub fn enumeration(
        token: impl Into<String>,
        choices: &[&str],
        default: impl Into<String>,
        label: impl Into<String>,
    ) -> Self {
        Self {
            choices: choices.iter().map(|c| c.to_string()).collect(),
            ..Self::new(token, FlagKind::Enum, default, label)
        }
    }

    /// Token without its leading dashes.
    pub fn bare_name(&self) -> &str {
        self.token.trim_start_matches('-')
    }

    /// Object name of a pre-drawn layout widget bound to this flag.
    pub fn widget_name(&self) -> String {
        format!("flag__{}", self.bare_name().replace('-', "_"))
    }

    /// An `infile` flag with no default whose label ends with `*`.
    pub fn is_required_file(&self) -> bool {
        self.kind == FlagKind::Infile && self.default.is_empty() && self.label.trim_end().ends_with('*')
    }

    fn kind_column(&self) -> String {
        match self.kind {
            FlagKind::Enum => format!("enum({})", self.choices.join(",")),
            k => k.as_str().to_owned(),
        }
    }

    /// Check the record invariants, returning a description of the first
    /// broken one.
    pub fn check(&self) -> Result<(), FlagProblem> {
        if !self.token.starts_with('-') || self.bare_name().is_empty() || self.token.contains(char::is_whitespace) {
            return Err(FlagProblem::Token);
        }
        match self.kind {
            FlagKind::Enum if self.choices.len() < 2 => return Err(FlagProblem::EnumChoices),
            FlagKind::Enum => {
                if !self.default.is_empty() && !self.choices.contains(&self.default) {
                    return Err(FlagProblem::EnumDefault);
                }
            }
            _ if !self.choices.is_empty() => return Err(FlagProblem::EnumChoices),
            FlagKind::Bool if !matches!(self.default.as_str(), "" | "true" | "false") => {
                return Err(FlagProblem::BoolDefault)
            }
            FlagKind::Int if !self.default.is_empty() && self.default.parse::<i64>().is_err() => {
                return Err(FlagProblem::NumericDefault)
            }
            FlagKind::Float if !self.default.is_empty() && !is_finite_decimal(&self.default) => {
                return Err(FlagProblem::NumericDefault)
            }
            _ => {}
        }
        Ok(())
    }
}

pub(crate) fn is_finite_decimal(text: &str) -> bool {
    text.parse::<f64>().is_ok_and(f64::is_finite)
}

/// A broken [`FlagSpec`] invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagProblem {
    Token,
    EnumChoices,
    EnumDefault,
    BoolDefault,
    NumericDefault,
}

impl fmt::Display for FlagProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Token => "token must start with '-' and contain no whitespace",
            Self::EnumChoices => "enum flags need at least two choices; other kinds take none",
            Self::EnumDefault => "enum default is not one of the choices",
            Self::BoolDefault => "bool default must be empty, `true` or `false`",
            Self::NumericDefault => "default does not parse as the flag's numeric kind",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefreshTarget {
    Outputs,
    Viewer,
}

impl RefreshTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Outputs => "outputs",
            Self::Viewer => "viewer",
        }
    }
}

impl FromStr for RefreshTarget {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "outputs" => Ok(Self::Outputs),
            "viewer" => Ok(Self::Viewer),
            _ => Err(()),
        }
    }
}

/// A post-analysis parameter shown in the update area.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UpdateFlagSpec {
    pub flag: FlagSpec,
    pub refresh: BTreeSet<RefreshTarget>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogMode {
    Input,
    Update,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Catalog {
    Input(Vec<FlagSpec>),
    Update(Vec<UpdateFlagSpec>),
}

impl Catalog {
    pub fn tokens(&self) -> Vec<&str> {
        match self {
            Self::Input(v) => v.iter().map(|f| f.token.as_str()).collect(),
            Self::Update(v) => v.iter().map(|f| f.flag.token.as_str()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlagError {
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("line {line}: duplicate token `{token}`")]
    DuplicateToken { line: usize, token: String },
    #[error("line {line}: bad refresh targets: {reason}")]
    BadRefresh { line: usize, reason: String },
    #[error("line {line}: bad enum: {reason}")]
    BadEnum { line: usize, reason: String },
}

impl FlagError {
    pub fn line(&self) -> usize {
        match self {
            Self::BadLine { line, .. }
            | Self::DuplicateToken { line, .. }
            | Self::BadRefresh { line, .. }
            | Self::BadEnum { line, .. } => *line,
        }
    }
}

pub fn parse_flags_file(document: &str, mode: CatalogMode) -> Result<Catalog, FlagError> {
    Ok(match mode {
        CatalogMode::Input => Catalog::Input(parse_input_flags(document)?),
        CatalogMode::Update => Catalog::Update(parse_update_flags(document)?),
    })
}

pub fn parse_input_flags(document: &str) -> Result<Vec<FlagSpec>, FlagError> {
    let mut seen = HashSet::new();
    records(document)
        .map(|(line, text)| {
            let flag = parse_record(line, text, 4)?.0;
            dedupe(&mut seen, line, &flag.token)?;
            Ok(flag)
        })
        .collect()
}

pub fn parse_update_flags(document: &str) -> Result<Vec<UpdateFlagSpec>, FlagError> {
    let mut seen = HashSet::new();
    records(document)
        .map(|(line, text)| {
            let (flag, refresh) = parse_record(line, text, 5)?;
            dedupe(&mut seen, line, &flag.token)?;
            let refresh = parse_refresh(line, refresh.unwrap_or_default())?;
            Ok(UpdateFlagSpec { flag, refresh })
        })
        .collect()
}

fn records(document: &str) -> impl Iterator<Item = (usize, &str)> {
    document
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn dedupe<'a>(seen: &mut HashSet<String>, line: usize, token: &str) -> Result<(), FlagError> {
    if seen.insert(token.to_owned()) {
        Ok(())
    } else {
        Err(FlagError::DuplicateToken {
            line,
            token: token.to_owned(),
        })
    }
}

fn parse_record(line: usize, text: &str, columns: usize) -> Result<(FlagSpec, Option<&str>), FlagError> {
    let bad = |reason: String| FlagError::BadLine { line, reason };
    let fields: Vec<&str> = text.split('|').map(str::trim).collect();

    let (flag, refresh) = if fields.len() == 1 {
        if columns != 4 {
            return Err(bad("update flags need the full `token|kind|default|label|refresh` form".into()));
        }
        let token = fields[0];
        let label = token.trim_start_matches('-').to_owned();
        (FlagSpec::new(token, FlagKind::Bool, "", label), None)
    } else if fields.len() == columns {
        let (kind, choices) = parse_kind(line, fields[1])?;
        let label = if fields[3].is_empty() {
            fields[0].trim_start_matches('-').to_owned()
        } else {
            fields[3].to_owned()
        };
        let flag = FlagSpec {
            token: fields[0].to_owned(),
            kind,
            choices,
            default: fields[2].to_owned(),
            label,
        };
        (flag, fields.get(4).copied())
    } else {
        return Err(bad(format!("expected {columns} `|`-separated columns, found {}", fields.len())));
    };

    match flag.check() {
        Ok(()) => Ok((flag, refresh)),
        Err(p @ (FlagProblem::EnumChoices | FlagProblem::EnumDefault)) => Err(FlagError::BadEnum {
            line,
            reason: p.to_string(),
        }),
        Err(p) => Err(bad(format!("`{}`: {p}", flag.token))),
    }
}

fn parse_kind(line: usize, text: &str) -> Result<(FlagKind, Vec<String>), FlagError> {
    let kind = match text {
        "bool" => FlagKind::Bool,
        "int" => FlagKind::Int,
        "float" => FlagKind::Float,
        "string" => FlagKind::String,
        "infile" => FlagKind::Infile,
        _ if text.starts_with("enum") => {
            let inner = text
                .strip_prefix("enum(")
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| FlagError::BadEnum {
                    line,
                    reason: format!("expected `enum(a,b,...)`, found `{text}`"),
                })?;
            let choices: Vec<String> = inner.split(',').map(|c| c.trim().to_owned()).collect();
            if choices.iter().any(String::is_empty) {
                return Err(FlagError::BadEnum {
                    line,
                    reason: "empty choice".into(),
                });
            }
            return Ok((FlagKind::Enum, choices));
        }
        other => {
            return Err(FlagError::BadLine {
                line,
                reason: format!("unknown kind `{other}`"),
            })
        }
    };
    Ok((kind, Vec::new()))
}

fn parse_refresh(line: usize, text: &str) -> Result<BTreeSet<RefreshTarget>, FlagError> {
    if text.is_empty() {
        return Err(FlagError::BadRefresh {
            line,
            reason: "empty".into(),
        });
    }
    text.split(',')
        .map(|t| {
            t.trim().parse().map_err(|()| FlagError::BadRefresh {
                line,
                reason: format!("unknown target `{}`", t.trim()),
            })
        })
        .collect()
}

fn input_line(flag: &FlagSpec) -> String {
    format!("{}|{}|{}|{}", flag.token, flag.kind_column(), flag.default, flag.label)
}

/// Render an input catalog in the full four-column form.
pub fn to_input_document(flags: &[FlagSpec]) -> String {
    flags.iter().map(|f| input_line(f) + "\n").collect()
}

/// Render an update catalog in the five-column form.
pub fn to_update_document(flags: &[UpdateFlagSpec]) -> String {
    flags
        .iter()
        .map(|u| {
            let refresh: Vec<_> = u.refresh.iter().map(|r| r.as_str()).collect();
            format!("{}|{}\n", input_line(&u.flag), refresh.join(","))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_token_shorthand() {
        let flags = parse_input_flags("--verbose\n").unwrap();
        assert_eq!(flags, vec![FlagSpec::new("--verbose", FlagKind::Bool, "", "verbose")]);
    }

    #[test]
    fn update_line_with_refresh() {
        let flags = parse_update_flags("--smoothing|float|0.5|Smoothing|outputs,viewer").unwrap();
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].flag, FlagSpec::new("--smoothing", FlagKind::Float, "0.5", "Smoothing"));
        assert_eq!(
            flags[0].refresh,
            BTreeSet::from([RefreshTarget::Outputs, RefreshTarget::Viewer])
        );
    }

    #[test]
    fn enum_kind() {
        let flags = parse_input_flags("-m|enum(fast, exact)|exact|Mode").unwrap();
        assert_eq!(flags[0], FlagSpec::enumeration("-m", &["fast", "exact"], "exact", "Mode"));
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let doc = "# header\n\n--a\n   # indented comment\n--b|int|3|B\n";
        let flags = parse_input_flags(doc).unwrap();
        assert_eq!(flags.iter().map(|f| f.token.as_str()).collect::<Vec<_>>(), ["--a", "--b"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases: &[(&str, CatalogMode, fn(&FlagError) -> bool)] = &[
            ("--a\n--b|int|3\n", CatalogMode::Input, |e| matches!(e, FlagError::BadLine { line: 2, .. })),
            ("--a|complex||A\n", CatalogMode::Input, |e| matches!(e, FlagError::BadLine { line: 1, .. })),
            ("--a\n\n--a\n", CatalogMode::Input, |e| matches!(e, FlagError::DuplicateToken { line: 3, .. })),
            ("--a|enum||A\n", CatalogMode::Input, |e| matches!(e, FlagError::BadEnum { line: 1, .. })),
            ("--a|enum(x)||A\n", CatalogMode::Input, |e| matches!(e, FlagError::BadEnum { .. })),
            ("--a|enum(x,y)|z|A\n", CatalogMode::Input, |e| matches!(e, FlagError::BadEnum { .. })),
            ("--a|bool|yes|A\n", CatalogMode::Input, |e| matches!(e, FlagError::BadLine { .. })),
            ("--a|int|x|A\n", CatalogMode::Input, |e| matches!(e, FlagError::BadLine { .. })),
            ("a|int|1|A\n", CatalogMode::Input, |e| matches!(e, FlagError::BadLine { .. })),
            ("--a|int|1|A|\n", CatalogMode::Update, |e| matches!(e, FlagError::BadRefresh { line: 1, .. })),
            ("--a|int|1|A|outputs,screen\n", CatalogMode::Update, |e| matches!(e, FlagError::BadRefresh { .. })),
            ("--a\n", CatalogMode::Update, |e| matches!(e, FlagError::BadLine { .. })),
            ("--a|int|1|A\n", CatalogMode::Update, |e| matches!(e, FlagError::BadLine { .. })),
        ];
        for (doc, mode, pred) in cases {
            let err = parse_flags_file(doc, *mode).unwrap_err();
            assert!(pred(&err), "{doc:?} -> {err:?}");
        }
    }

    #[test]
    fn required_file_marker() {
        assert!(FlagSpec::new("-f", FlagKind::Infile, "", "PDB file*").is_required_file());
        assert!(!FlagSpec::new("-f", FlagKind::Infile, "x.pdb", "PDB file*").is_required_file());
        assert!(!FlagSpec::new("-f", FlagKind::String, "", "Name*").is_required_file());
    }

    #[test]
    fn widget_names() {
        let f = FlagSpec::new("--pdb-file", FlagKind::Infile, "", "");
        assert_eq!(f.widget_name(), "flag__pdb_file");
        assert_eq!(FlagSpec::new("-v", FlagKind::Bool, "", "").widget_name(), "flag__v");
    }
}
