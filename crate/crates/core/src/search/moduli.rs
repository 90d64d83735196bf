//! The table of singular moduli under a discriminant cap.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{Ball, ComplexBall};
use crate::error::{Error, Result};
use crate::interval::{ComplexInterval, Interval};
use crate::modular::{j_eval, j_of_form, log_j_height_bound, size_bounds, CMPeriod, SingularModulus};
use crate::quadratic::{class_number, reduced_forms_up_to, Discriminant, ReducedForm};

/// Absolute accuracy (bits) of the values every table entry starts with.
pub const BASE_PREC: u32 = 96;

/// Symbolic identity of a singular modulus: its discriminant and reduced form.
/// Two moduli are equal exactly when their identities are.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModulusId {
    pub discriminant: i64,
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl ModulusId {
    pub fn form(&self) -> ReducedForm {
        ReducedForm { a: self.a, b: self.b, c: self.c }
    }

    fn key(&self) -> (u64, i64, i64, i64) {
        (self.discriminant.unsigned_abs(), self.a, self.b, self.c)
    }
}

impl From<&ReducedForm> for ModulusId {
    fn from(f: &ReducedForm) -> Self {
        ModulusId { discriminant: f.discriminant(), a: f.a, b: f.b, c: f.c }
    }
}

/// Ordered by `(|Δ|, a, b, c)`.
impl Ord for ModulusId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for ModulusId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Accepts `Δ:(a,b,c)` or `Δ:a,b,c`; the form must be reduced of discriminant `Δ`.
impl FromStr for ModulusId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected Δ:(a,b,c), got {s:?}"));
        let (d, form) = s.trim().split_once(':').ok_or_else(bad)?;
        let form = form.trim().trim_start_matches('(').trim_end_matches(')');
        let v: Vec<i64> = form.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let discriminant: i64 = d.trim().parse().map_err(|_| bad())?;
        let [a, b, c] = v[..] else { return Err(bad()) };
        let f = ReducedForm::new(a, b, c)?;
        if f.discriminant() != discriminant {
            return Err(Error::InvalidArgument(format!("({a},{b},{c}) has discriminant {}, not {discriminant}", f.discriminant())));
        }
        Ok(ModulusId::from(&f))
    }
}

impl fmt::Display for ModulusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:({},{},{})", self.discriminant, self.a, self.b, self.c)
    }
}

/// A singular modulus with the data the solver needs, plus a private cache of its
/// most precise enclosure.
#[derive(Debug)]
pub struct ModulusEntry {
    pub id: ModulusId,
    pub discriminant: Discriminant,
    pub class_number: u64,
    /// `j` with absolute radius about `2^(−BASE_PREC)`.
    pub value: ComplexBall,
    pub interval: ComplexInterval,
    /// Enclosure of `e^(2π Im τ)`.
    pub size: (f64, f64),
    /// `ln(11·e^(π√|Δ|))`, bounding the log-height of `j`.
    pub log_height: Ball,
    /// The value when it is a rational integer (class number one).
    pub integer: Option<BigInt>,
    refined: RwLock<Option<(u32, ComplexBall)>>,
}

impl ModulusEntry {
    pub fn new(form: &ReducedForm) -> Result<Self> {
        let period = CMPeriod::new(*form)?;
        let discriminant = *period.discriminant();
        let value = j_of_form(form, BASE_PREC)?;
        let (rl, rh) = value.re.to_f64_bounds();
        let (il, ih) = value.im.to_f64_bounds();
        let interval = ComplexInterval { re: Interval::new(rl, rh), im: Interval::new(il, ih) };
        let class_number = class_number(&discriminant);
        let integer = if class_number == 1 { value.re.unique_integer() } else { None };
        Ok(ModulusEntry {
            id: ModulusId::from(form),
            discriminant,
            class_number,
            value,
            interval,
            size: size_bounds(form),
            log_height: log_j_height_bound(&discriminant),
            integer,
            refined: RwLock::new(None),
        })
    }

    /// `j` with absolute accuracy about `2^(−prec)`; repeated requests are cached.
    pub fn value_at(&self, prec: u32) -> Result<ComplexBall> {
        if prec <= BASE_PREC {
            return Ok(self.value.clone());
        }
        if let Some((p, v)) = self.refined.read().expect("lock").as_ref() {
            if *p >= prec {
                return Ok(v.clone());
            }
        }
        let v = j_of_form(&self.id.form(), prec)?;
        let mut slot = self.refined.write().expect("lock");
        if slot.as_ref().is_none_or(|(p, _)| *p < prec) {
            *slot = Some((prec, v.clone()));
        }
        Ok(v)
    }
}

/// All singular moduli with `|Δ| ≤ cap`, sorted by identity, with an index sorted
/// by the size `e^(2π Im τ)`.
#[derive(Debug)]
pub struct ModuliTable {
    cap: u64,
    entries: Vec<ModulusEntry>,
    by_size: Vec<usize>,
}

impl ModuliTable {
    pub fn new(cap: u64) -> Result<Self> {
        if cap < 3 {
            return Err(Error::CapTooSmall(cap));
        }
        let forms: Vec<ReducedForm> = reduced_forms_up_to(cap).into_values().flatten().collect();
        let mut entries: Vec<ModulusEntry> = forms.par_iter().map(ModulusEntry::new).collect::<Result<_>>()?;
        entries.sort_by(|x, y| x.id.cmp(&y.id));
        let mut by_size: Vec<usize> = (0..entries.len()).collect();
        by_size.sort_by(|&i, &j| entries[i].size.0.total_cmp(&entries[j].size.0).then(i.cmp(&j)));
        Ok(ModuliTable { cap, entries, by_size })
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ModulusEntry] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &ModulusEntry {
        &self.entries[i]
    }

    pub fn index_of(&self, id: &ModulusId) -> Option<usize> {
        self.entries.binary_search_by(|e| e.id.cmp(id)).ok()
    }

    /// Indices of entries whose size enclosure meets `[lo, hi]`, in identity order.
    pub fn size_window(&self, lo: f64, hi: f64) -> Vec<usize> {
        // sizes are sorted by lower end; upper ends are a fixed relative factor above
        let start = self.by_size.partition_point(|&i| self.entries[i].size.1 < lo);
        let end = self.by_size.partition_point(|&i| self.entries[i].size.0 <= hi);
        let mut out: Vec<usize> = self.by_size[start.min(end)..end].iter().copied().filter(|&i| self.entries[i].size.1 >= lo).collect();
        out.sort_unstable();
        out
    }
}

/// Every singular modulus with `|Δ| ≤ cap`, one per reduced form, each certified to
/// absolute radius at most `radius`, sorted by `(|Δ|, a, b)`.
pub fn enumerate_singular_moduli(cap: u64, radius: f64) -> Result<Vec<SingularModulus>> {
    if cap < 3 {
        return Err(Error::CapTooSmall(cap));
    }
    let forms: Vec<ReducedForm> = reduced_forms_up_to(cap).into_values().flatten().collect();
    let mut out: Vec<SingularModulus> =
        forms.par_iter().map(|f| j_eval(&CMPeriod::new(*f)?, radius)).collect::<Result<_>>()?;
    out.sort_by_key(|m| ModulusId::from(m.period.form()));
    Ok(out)
}
