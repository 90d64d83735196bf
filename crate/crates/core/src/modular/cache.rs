//! Class polynomial cache: in memory always, on disk when a directory is configured.
//!
//! Record layout (UTF-8 text, one record per file `H<|Δ|>.txt`):
//!
//! ```text
//! linspecial-class-polynomial <format version>
//! discriminant <Δ>
//! degree <h>
//! precision <bits>
//! sha256 <hex digest of the coefficient lines, each terminated by '\n'>
//! <coefficient of X^0>
//! …
//! <coefficient of X^h>
//! ```
//!
//! A record that fails any check is recomputed and rewritten, never trusted.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use sha2::{Digest, Sha256};

use super::class_poly::{class_polynomial, ClassPolynomial};
use crate::error::{Error, Result};
use crate::quadratic::{class_number, Discriminant};

pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "LINSPECIAL_CACHE_DIR";
const MAGIC: &str = "linspecial-class-polynomial";

#[derive(Debug, Default)]
pub struct ClassPolynomialCache {
    dir: Option<PathBuf>,
    memory: RwLock<HashMap<i64, Arc<ClassPolynomial>>>,
}

impl ClassPolynomialCache {
    pub fn in_memory() -> Self {
        ClassPolynomialCache { dir: None, memory: RwLock::default() }
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        ClassPolynomialCache { dir: Some(dir.into()), memory: RwLock::default() }
    }

    /// Uses `LINSPECIAL_CACHE_DIR` when set and non-empty.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::with_dir(PathBuf::from(d)),
            _ => Self::in_memory(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn record_path(&self, disc: &Discriminant) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("H{}.txt", disc.abs())))
    }

    pub fn get(&self, disc: &Discriminant) -> Result<Arc<ClassPolynomial>> {
        if let Some(p) = self.memory.read().expect("cache lock").get(&disc.value()) {
            return Ok(Arc::clone(p));
        }
        let loaded = self.record_path(disc).and_then(|path| read_record(&path, disc));
        let poly = match loaded {
            Some(p) => p,
            None => {
                let p = class_polynomial(disc)?;
                if let Some(path) = self.record_path(disc) {
                    write_record(&path, &p)?;
                }
                p
            }
        };
        let poly = Arc::new(poly);
        self.memory.write().expect("cache lock").insert(disc.value(), Arc::clone(&poly));
        Ok(poly)
    }
}

fn digest(lines: &[String]) -> String {
    let mut h = Sha256::new();
    for l in lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn render_record(p: &ClassPolynomial) -> String {
    let lines: Vec<String> = p.coefficients.iter().map(|c| c.to_string()).collect();
    let mut s = format!(
        "{MAGIC} {CACHE_FORMAT_VERSION}\ndiscriminant {}\ndegree {}\nprecision {}\nsha256 {}\n",
        p.discriminant.value(),
        p.degree(),
        p.precision_bits,
        digest(&lines)
    );
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    s
}

pub(crate) fn parse_record(text: &str, disc: &Discriminant) -> Option<ClassPolynomial> {
    let mut it = text.lines();
    let header = |line: Option<&str>, key: &str| -> Option<String> {
        let (k, v) = line?.split_once(' ')?;
        (k == key).then(|| v.to_string())
    };
    if header(it.next(), MAGIC)?.parse::<u32>().ok()? != CACHE_FORMAT_VERSION {
        return None;
    }
    if header(it.next(), "discriminant")?.parse::<i64>().ok()? != disc.value() {
        return None;
    }
    let degree: usize = header(it.next(), "degree")?.parse().ok()?;
    if degree as u64 != class_number(disc) {
        return None;
    }
    let precision_bits: u32 = header(it.next(), "precision")?.parse().ok()?;
    let sum = header(it.next(), "sha256")?;
    let lines: Vec<String> = it.map(str::to_string).collect();
    if lines.len() != degree + 1 || digest(&lines) != sum {
        return None;
    }
    let coefficients: Vec<BigInt> = lines.iter().map(|l| l.parse().ok()).collect::<Option<_>>()?;
    if coefficients.last() != Some(&BigInt::from(1)) {
        return None;
    }
    Some(ClassPolynomial { discriminant: *disc, coefficients, precision_bits })
}

fn read_record(path: &Path, disc: &Discriminant) -> Option<ClassPolynomial> {
    parse_record(&fs::read_to_string(path).ok()?, disc)
}

fn write_record(path: &Path, p: &ClassPolynomial) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().expect("record path has a parent");
    fs::create_dir_all(dir).map_err(io)?;
    let tmp = dir.join(format!(".{}.tmp{}", path.file_name().unwrap().to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(render_record(p).as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}
