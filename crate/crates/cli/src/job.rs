//! Job files: a single JSON document with `"format": 1`. Rationals are always
//! strings (`"3"`, `"-7/2"`, `"0.125"`), never JSON numbers.
//!
//! ```json
//! {
//!   "format": 1,
//!   "ambient_dim": 2,
//!   "equations": [{ "coefficients": ["1", "1"], "constant": "-1728" }],
//!   "cap": 100
//! }
//! ```
//!
//! Instead of `equations`, a subvariety can be given as `basis` (direction vectors)
//! plus `offset`.

use std::path::Path;

use linspecial_core::exact_linear::{parse_rational, AffineEquation, ExactRational, LinearSubvariety};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const JOB_FORMAT: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    pub coefficients: Vec<String>,
    pub constant: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub format: u32,
    pub ambient_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equations: Option<Vec<EquationSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(default = "default_degree")]
    pub degree: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refusal_threshold: Option<u64>,
}

fn default_degree() -> u64 {
    1
}

/// A parsed job with its subvariety built.
#[derive(Debug)]
pub struct Job {
    pub spec: JobSpec,
    pub subvariety: LinearSubvariety,
}

/// 1-based line and column of the first occurrence of `needle` in `text`.
fn locate(text: &str, needle: &str) -> (usize, usize) {
    let Some(at) = text.find(needle) else { return (0, 0) };
    let before = &text[..at];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    fn error_at(&self, needle: &str, message: String) -> CliError {
        let (line, column) = locate(self.text, needle);
        CliError::Job { path: self.path.to_path_buf(), line, column, message }
    }

    fn rational(&self, s: &str) -> Result<ExactRational, CliError> {
        parse_rational(s).map_err(|e| self.error_at(&format!("\"{s}\""), e.to_string()))
    }

    fn vector(&self, v: &[String], n: usize, what: &str) -> Result<Vec<ExactRational>, CliError> {
        if v.len() != n {
            let first = v.first().map_or_else(|| what.to_string(), |s| format!("\"{s}\""));
            return Err(self.error_at(&first, format!("{what} has {} entries, expected {n}", v.len())));
        }
        v.iter().map(|s| self.rational(s)).collect()
    }
}

impl Job {
    pub fn load(path: &Path) -> Result<Job, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        Job::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Job, CliError> {
        let spec: JobSpec = serde_json::from_str(text).map_err(|e| CliError::Job {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let src = Source { path, text };
        if spec.format != JOB_FORMAT {
            return Err(src.error_at("\"format\"", format!("unsupported format {}, expected {JOB_FORMAT}", spec.format)));
        }
        let n = spec.ambient_dim;
        if n == 0 {
            return Err(src.error_at("\"ambient_dim\"", "ambient_dim must be positive".into()));
        }
        let subvariety = match (&spec.equations, &spec.basis) {
            (Some(eqs), None) => {
                if spec.offset.is_some() {
                    return Err(src.error_at("\"offset\"", "offset belongs to the basis form".into()));
                }
                let parsed: Vec<AffineEquation> = eqs
                    .iter()
                    .map(|e| Ok(AffineEquation::new(src.vector(&e.coefficients, n, "coefficients")?, src.rational(&e.constant)?)))
                    .collect::<Result<_, CliError>>()?;
                LinearSubvariety::from_equations(n, &parsed)
                    .map_err(|e| src.error_at("\"equations\"", e.to_string()))?
                    .ok_or_else(|| src.error_at("\"equations\"", "the equations have no common solution".into()))?
            }
            (None, Some(basis)) => {
                let offset = match &spec.offset {
                    Some(o) => src.vector(o, n, "offset")?,
                    None => return Err(src.error_at("\"basis\"", "the basis form needs an offset".into())),
                };
                let dirs: Vec<Vec<ExactRational>> =
                    basis.iter().map(|v| src.vector(v, n, "basis vector")).collect::<Result<_, _>>()?;
                LinearSubvariety::from_spanning(n, &dirs, offset).map_err(|e| src.error_at("\"basis\"", e.to_string()))?
            }
            _ => return Err(src.error_at("{", "give exactly one of \"equations\" or \"basis\"".into())),
        };
        Ok(Job { spec, subvariety })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Job, CliError> {
        Job::parse(Path::new("job.json"), text)
    }

    #[test]
    fn equations_and_basis_forms_agree() {
        let a = parse(r#"{"format":1,"ambient_dim":2,"equations":[{"coefficients":["1","1"],"constant":"-1728"}],"cap":100}"#)
            .unwrap();
        let b = parse(r#"{"format":1,"ambient_dim":2,"basis":[["1","-1"]],"offset":["1728","0"]}"#).unwrap();
        assert_eq!(a.subvariety.equations(), b.subvariety.equations());
        assert_eq!(a.spec.cap, Some(100));
        assert_eq!(a.spec.degree, 1);
    }

    #[test]
    fn errors_carry_positions() {
        let text = "{\n  \"format\": 1,\n  \"ambient_dim\": 2,\n  \"equations\": [{\"coefficients\": [\"1\", \"x/2\"], \"constant\": \"0\"}]\n}";
        match parse(text) {
            Err(CliError::Job { line, column, .. }) => assert_eq!((line, column), (4, 40)),
            other => panic!("{other:?}"),
        }
        match parse("{\"format\": 1,\n \"ambient_dim\": 2, \"equations\": [{\"coefficients\": [1, 2], \"constant\": \"0\"}]}") {
            Err(CliError::Job { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse(r#"{"format":2,"ambient_dim":1,"equations":[]}"#).is_err());
        assert!(parse(r#"{"format":1,"ambient_dim":1}"#).is_err());
        assert!(parse(r#"{"format":1,"ambient_dim":1,"equations":[{"coefficients":["0"],"constant":"1"}]}"#).is_err());
        assert!(parse(r#"{"format":1,"ambient_dim":2,"equations":[{"coefficients":["1"],"constant":"1"}]}"#).is_err());
    }
}
