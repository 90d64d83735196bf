//! Special points of a linear subvariety outside its special locus, found one
//! equality pattern at a time.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certify::{Certification, IntegerForm, ZeroTest};
use super::engine::{solve_equation, EngineStats};
use super::moduli::{ModuliTable, ModulusEntry, ModulusId};
use crate::ball::ComplexBall;
use crate::bounds::{discriminant_cap, BoundReport};
use crate::error::{Error, Result};
use crate::exact_linear::{AffineEquation, LinearSubvariety};
use crate::heights::reduce_to_hyperplane;
use crate::modular::MAX_PREC;
use crate::special_geometry::{
    diagonal_specials_in, in_positive_dim_special, project_by_pattern, special_direction, DiagonalSpecial,
    EqualityPattern, PatternProjection,
};

pub const DEFAULT_REFUSAL_THRESHOLD: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub cap: Option<u64>,
    pub degree: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Effective caps above this are refused.
    pub refusal_threshold: u64,
    pub prune: bool,
    pub max_prec: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            cap: None,
            degree: 1,
            threads: None,
            refusal_threshold: DEFAULT_REFUSAL_THRESHOLD,
            prune: true,
            max_prec: MAX_PREC,
        }
    }
}

impl SolveOptions {
    pub fn with_cap(cap: u64) -> Self {
        SolveOptions { cap: Some(cap), ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Every tuple under the cap was decided.
    Complete,
    /// Some tuples exhausted the precision ceiling.
    Undecided,
    /// The effective cap exceeded the refusal threshold; nothing was enumerated.
    Refused,
}

impl SolveStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Complete => 0,
            SolveStatus::Undecided => 2,
            SolveStatus::Refused => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapSource {
    User,
    Theorem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapChoice {
    pub user: Option<u64>,
    pub theorem: BigInt,
    /// `min(user, theorem)`, or the theorem cap when no user cap is given.
    pub effective: BigInt,
    pub source: CapSource,
    pub refusal_threshold: u64,
}

impl CapChoice {
    pub fn new(bound: &BoundReport, user: Option<u64>, refusal_threshold: u64) -> Self {
        let theorem = bound.discriminant_cap.clone();
        let (effective, source) = match user {
            Some(u) if BigInt::from(u) < theorem => (BigInt::from(u), CapSource::User),
            _ => (theorem.clone(), CapSource::Theorem),
        };
        CapChoice { user, theorem, effective, source, refusal_threshold }
    }

    /// The cap to run at, if it is within the refusal threshold.
    pub fn executable(&self) -> Option<u64> {
        self.effective.to_u64().filter(|&c| c <= self.refusal_threshold)
    }
}

/// A certified special point of `L` outside the special locus.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialPoint {
    pub moduli: Vec<ModulusId>,
    pub values: Vec<ComplexBall>,
    pub pattern: EqualityPattern,
    /// Largest residual bound over the equations of the pattern's projection.
    pub residual: f64,
    pub precision_bits: u32,
}

/// A tuple on which some equation could not be decided within the precision ceiling.
#[derive(Clone, Debug, PartialEq)]
pub struct UndecidedTuple {
    pub moduli: Vec<ModulusId>,
    pub pattern: EqualityPattern,
    pub residual: f64,
    pub precision_bits: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub patterns: u64,
    pub empty_patterns: u64,
    /// Patterns whose every point lies on a positive-dimensional special subvariety.
    pub special_patterns: u64,
    pub enumerated: u64,
    pub pruned: u64,
    pub nonzero: u64,
    pub certified: u64,
    pub rejected_membership: u64,
    pub rejected_special: u64,
    pub undecided: u64,
}

impl SolveStats {
    fn absorb_engine(&mut self, e: &EngineStats) {
        self.enumerated += e.enumerated;
        self.pruned += e.pruned;
        self.nonzero += e.nonzero;
    }

    fn merge(&mut self, o: &SolveStats) {
        self.patterns += o.patterns;
        self.empty_patterns += o.empty_patterns;
        self.special_patterns += o.special_patterns;
        self.enumerated += o.enumerated;
        self.pruned += o.pruned;
        self.nonzero += o.nonzero;
        self.certified += o.certified;
        self.rejected_membership += o.rejected_membership;
        self.rejected_special += o.rejected_special;
        self.undecided += o.undecided;
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub subvariety: LinearSubvariety,
    pub bound: BoundReport,
    pub cap: CapChoice,
    pub status: SolveStatus,
    pub diagonal_specials: Vec<DiagonalSpecial>,
    /// Patterns whose stream lies entirely in the special locus.
    pub special_patterns: Vec<EqualityPattern>,
    pub points: Vec<SpecialPoint>,
    pub undecided: Vec<UndecidedTuple>,
    pub stats: SolveStats,
}

/// Runs `f` on a pool of `threads` workers, or on the ambient pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// All special points of the proper subvariety `L` outside its special locus whose
/// discriminants are under the effective cap.
pub fn solve(l: &LinearSubvariety, opts: &SolveOptions) -> Result<Solution> {
    let (bound, cap) = plan(l, opts)?;
    let Some(c) = cap.executable() else {
        return refused(l, bound, cap);
    };
    with_threads(opts.threads, || {
        let table = ModuliTable::new(c)?;
        run(l, &table, bound, cap, opts)
    })?
}

/// [`solve`] against a prebuilt table, whose cap must equal the effective cap.
pub fn solve_with_table(l: &LinearSubvariety, table: &ModuliTable, opts: &SolveOptions) -> Result<Solution> {
    let (bound, cap) = plan(l, opts)?;
    let Some(c) = cap.executable() else {
        return refused(l, bound, cap);
    };
    if c != table.cap() {
        return Err(Error::InvalidArgument(format!("table cap {} differs from effective cap {c}", table.cap())));
    }
    with_threads(opts.threads, || run(l, table, bound, cap, opts))?
}

fn plan(l: &LinearSubvariety, opts: &SolveOptions) -> Result<(BoundReport, CapChoice)> {
    let bound = discriminant_cap(l, opts.degree)?;
    if let Some(u) = opts.cap {
        if u < 3 {
            return Err(Error::CapTooSmall(u));
        }
    }
    let cap = CapChoice::new(&bound, opts.cap, opts.refusal_threshold);
    Ok((bound, cap))
}

fn refused(l: &LinearSubvariety, bound: BoundReport, cap: CapChoice) -> Result<Solution> {
    Ok(Solution {
        subvariety: l.clone(),
        bound,
        cap,
        status: SolveStatus::Refused,
        diagonal_specials: diagonal_specials_in(l)?,
        special_patterns: vec![],
        points: vec![],
        undecided: vec![],
        stats: SolveStats::default(),
    })
}

fn run(l: &LinearSubvariety, table: &ModuliTable, bound: BoundReport, cap: CapChoice, opts: &SolveOptions) -> Result<Solution> {
    let mut acc = Accumulator::default();
    for pattern in EqualityPattern::all(l.ambient_dim()) {
        acc.stats.patterns += 1;
        Stream::new(l, table, &pattern, opts)?.run(&mut acc)?;
    }
    acc.points.sort_by(|x, y| x.moduli.cmp(&y.moduli));
    acc.points.dedup_by(|x, y| x.moduli == y.moduli);
    acc.undecided.sort_by(|x, y| x.moduli.cmp(&y.moduli));
    acc.undecided.dedup_by(|x, y| x.moduli == y.moduli);
    let status = if acc.undecided.is_empty() { SolveStatus::Complete } else { SolveStatus::Undecided };
    Ok(Solution {
        subvariety: l.clone(),
        bound,
        cap,
        status,
        diagonal_specials: diagonal_specials_in(l)?,
        special_patterns: acc.special_patterns,
        points: acc.points,
        undecided: acc.undecided,
        stats: acc.stats,
    })
}

#[derive(Default)]
struct Accumulator {
    special_patterns: Vec<EqualityPattern>,
    points: Vec<SpecialPoint>,
    undecided: Vec<UndecidedTuple>,
    stats: SolveStats,
}

impl Accumulator {
    fn merge(&mut self, o: Accumulator) {
        self.special_patterns.extend(o.special_patterns);
        self.points.extend(o.points);
        self.undecided.extend(o.undecided);
        self.stats.merge(&o.stats);
    }
}

/// One nontrivial equation of `L₂` restricted to its support.
struct SupportedForm {
    support: Vec<usize>,
    form: IntegerForm,
}

impl SupportedForm {
    fn from_equation(eq: &AffineEquation) -> Option<Self> {
        let support: Vec<usize> = (0..eq.coefficients.len()).filter(|&i| !eq.coefficients[i].is_zero()).collect();
        let a: Vec<_> = support.iter().map(|&i| eq.coefficients[i].clone()).collect();
        let form = IntegerForm::new(&a, &eq.constant)?;
        Some(SupportedForm { support, form })
    }

    fn moduli<'t>(&self, table: &'t ModuliTable, tuple: &[usize]) -> Vec<&'t ModulusEntry> {
        self.support.iter().map(|&p| table.get(tuple[p])).collect()
    }
}

enum Stream<'a> {
    Skip,
    Search {
        l: &'a LinearSubvariety,
        table: &'a ModuliTable,
        pattern: EqualityPattern,
        opts: &'a SolveOptions,
        hyperplane: SupportedForm,
        equations: Vec<SupportedForm>,
    },
    Special(EqualityPattern),
    Empty,
}

impl<'a> Stream<'a> {
    fn new(l: &'a LinearSubvariety, table: &'a ModuliTable, pattern: &EqualityPattern, opts: &'a SolveOptions) -> Result<Self> {
        let l2 = match project_by_pattern(l, pattern)? {
            PatternProjection::Empty => return Ok(Stream::Empty),
            PatternProjection::Projected { l2, .. } => l2,
        };
        // membership in the special locus depends on the equality pattern alone
        let labels = pattern.lift(&(0..pattern.block_count()).collect::<Vec<_>>());
        if l2.is_full() || special_direction(l, &labels)?.is_some() {
            return Ok(Stream::Special(pattern.clone()));
        }
        let hyperplane = SupportedForm::from_equation(&reduce_to_hyperplane(&l2)?).ok_or(Error::EmptySubvariety)?;
        if hyperplane.support.is_empty() {
            return Ok(Stream::Skip);
        }
        let equations = l2.equations().iter().filter_map(SupportedForm::from_equation).collect();
        Ok(Stream::Search { l, table, pattern: pattern.clone(), opts, hyperplane, equations })
    }

    fn run(self, acc: &mut Accumulator) -> Result<()> {
        match self {
            Stream::Empty => acc.stats.empty_patterns += 1,
            Stream::Skip => {}
            Stream::Special(p) => {
                acc.stats.special_patterns += 1;
                acc.special_patterns.push(p);
            }
            Stream::Search { l, table, pattern, opts, hyperplane, equations } => {
                let search = StreamSearch { l, table, pattern: &pattern, opts, equations: &equations };
                search.run(&hyperplane, acc)?;
            }
        }
        Ok(())
    }
}

struct StreamSearch<'a> {
    l: &'a LinearSubvariety,
    table: &'a ModuliTable,
    pattern: &'a EqualityPattern,
    opts: &'a SolveOptions,
    equations: &'a [SupportedForm],
}

impl StreamSearch<'_> {
    fn run(&self, hyperplane: &SupportedForm, acc: &mut Accumulator) -> Result<()> {
        let r = self.pattern.block_count();
        let engine = solve_equation(self.table, &hyperplane.form, self.opts.prune, self.opts.max_prec)?;
        acc.stats.absorb_engine(&engine.stats);
        let free: Vec<usize> = (0..r).filter(|p| !hyperplane.support.contains(p)).collect();
        // undecided hyperplane tuples go on: membership in L₂ decides them
        let partials: Vec<&Vec<usize>> = engine.zeros.iter().chain(&engine.undecided).map(|(t, _)| t).collect();
        let parts: Vec<Result<Accumulator>> = partials
            .par_iter()
            .map(|t| {
                let mut local = Accumulator::default();
                let mut tuple = vec![usize::MAX; r];
                for (k, &p) in hyperplane.support.iter().enumerate() {
                    tuple[p] = t[k];
                }
                let mut assigned: Vec<bool> = (0..r).map(|p| hyperplane.support.contains(&p)).collect();
                self.complete(&free, &mut tuple, &mut assigned, &mut local)?;
                Ok(local)
            })
            .collect();
        for p in parts {
            acc.merge(p?);
        }
        Ok(())
    }

    /// Fills the free coordinates with distinct moduli, discarding a branch once an
    /// equation whose support is assigned provably misses zero.
    fn complete(&self, free: &[usize], tuple: &mut [usize], assigned: &mut [bool], acc: &mut Accumulator) -> Result<()> {
        let Some((&p, rest)) = free.split_first() else {
            return self.finish(tuple, acc);
        };
        assigned[p] = true;
        for i in 0..self.table.len() {
            if tuple.contains(&i) {
                continue;
            }
            tuple[p] = i;
            let excluded = self.equations.iter().any(|e| {
                e.support.contains(&p)
                    && e.support.iter().all(|&q| assigned[q])
                    && !e.form.interval(&e.moduli(self.table, tuple)).contains_zero()
            });
            if excluded {
                acc.stats.enumerated += 1;
                acc.stats.nonzero += 1;
                continue;
            }
            self.complete(rest, tuple, assigned, acc)?;
        }
        tuple[p] = usize::MAX;
        assigned[p] = false;
        Ok(())
    }

    fn finish(&self, tuple: &[usize], acc: &mut Accumulator) -> Result<()> {
        let certs: Vec<Certification> = self
            .equations
            .iter()
            .map(|e| e.form.certify(&e.moduli(self.table, tuple), self.opts.max_prec))
            .collect::<Result<_>>()?;
        let reduced: Vec<ModulusId> = tuple.iter().map(|&i| self.table.get(i).id).collect();
        let moduli = self.pattern.lift(&reduced);
        let residual = certs.iter().map(|c| c.residual).fold(0.0, f64::max);
        let precision_bits = certs.iter().map(|c| c.precision_bits).max().unwrap_or(0);
        if certs.iter().any(|c| c.outcome == ZeroTest::Nonzero) {
            acc.stats.rejected_membership += 1;
        } else if certs.iter().any(|c| c.outcome == ZeroTest::NeedsPrecision) {
            acc.stats.undecided += 1;
            acc.undecided.push(UndecidedTuple { moduli, pattern: self.pattern.clone(), residual, precision_bits });
        } else if in_positive_dim_special(self.l, &moduli)? {
            acc.stats.rejected_special += 1;
        } else {
            acc.stats.certified += 1;
            let values = moduli.iter().map(|id| self.table.get(self.table.index_of(id).expect("from table")).value.clone()).collect();
            acc.points.push(SpecialPoint { moduli, values, pattern: self.pattern.clone(), residual, precision_bits });
        }
        Ok(())
    }
}

/// Membership and special-locus classification of one special point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCheck {
    pub moduli: Vec<ModulusId>,
    pub values: Vec<ComplexBall>,
    pub pattern: EqualityPattern,
    /// Combined verdict over the defining equations of `L`.
    pub on_subvariety: ZeroTest,
    pub residual: f64,
    /// Coordinates (0-based) that can move together inside `L`, if any.
    pub special_witness: Option<Vec<usize>>,
}

impl PointCheck {
    /// On `L` and not on any positive-dimensional special subvariety of `L`.
    pub fn is_isolated(&self) -> bool {
        self.on_subvariety == ZeroTest::Zero && self.special_witness.is_none()
    }
}

pub fn check_point(l: &LinearSubvariety, moduli: &[ModulusId], max_prec: u32) -> Result<PointCheck> {
    let n = l.ambient_dim();
    if moduli.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: moduli.len() });
    }
    let entries: Vec<ModulusEntry> = moduli
        .iter()
        .map(|id| {
            if id.form().discriminant() != id.discriminant {
                return Err(Error::InvalidArgument(format!("form ({},{},{}) has discriminant {}", id.a, id.b, id.c, id.form().discriminant())));
            }
            ModulusEntry::new(&id.form())
        })
        .collect::<Result<_>>()?;
    let mut outcome = ZeroTest::Zero;
    let mut residual = 0.0f64;
    for eq in l.equations() {
        let Some(e) = SupportedForm::from_equation(&eq) else { continue };
        let ms: Vec<&ModulusEntry> = e.support.iter().map(|&p| &entries[p]).collect();
        let c = e.form.certify(&ms, max_prec)?;
        residual = residual.max(c.residual);
        outcome = match (outcome, c.outcome) {
            (ZeroTest::Nonzero, _) | (_, ZeroTest::Nonzero) => ZeroTest::Nonzero,
            (ZeroTest::NeedsPrecision, _) | (_, ZeroTest::NeedsPrecision) => ZeroTest::NeedsPrecision,
            _ => ZeroTest::Zero,
        };
    }
    Ok(PointCheck {
        moduli: moduli.to_vec(),
        values: entries.iter().map(|e| e.value.clone()).collect(),
        pattern: EqualityPattern::from_labels(moduli),
        on_subvariety: outcome,
        residual,
        special_witness: special_direction(l, moduli)?,
    })
}
