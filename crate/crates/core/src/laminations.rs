//! Lamination fingerprints, attraction tests, and weak-limit lines.
//!
//! An attracting lamination is approximated by its fingerprint: the set of
//! length-k subwords of iterated generator images, closed under inversion,
//! kept once recomputation stops changing it. Weak limits of a conjugacy
//! class are detected as length-k windows that persist through the tail of
//! the orbit; each window is stretched to a bi-infinite line by iterating
//! its two halves to boundary points.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rayon::prelude::*;

use crate::automorphism::{AutError, Automorphism, TwistedLift};
use crate::boundary::{
    collect_attracting_points, default_seeds, iterate_to_fixed_point, same_point, BoundaryError,
    BoundaryPrefix, ConvergenceOpts, FixedPointSet, PointCmp,
};
use crate::words::{CyclicWord, Letter, ReducedWord, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LamError {
    #[error("subword set of iterated '{generator}' did not stabilize within {iterations} iterations")]
    NoStabilization { generator: Letter, iterations: usize },
    #[error("'{letter}' is not a generator of the rank-{rank} alphabet")]
    NotAGenerator { letter: Letter, rank: usize },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Aut(AutError),
    #[error(transparent)]
    Boundary(BoundaryError),
}

fn flatten_aut(e: AutError) -> LamError {
    match e {
        AutError::Word(w) => LamError::Word(w),
        other => LamError::Aut(other),
    }
}

fn flatten_boundary(e: BoundaryError) -> LamError {
    match e {
        BoundaryError::Word(w) => LamError::Word(w),
        other => LamError::Boundary(other),
    }
}

/// Which iterated generator produced a fingerprint, and when it stabilized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintSource {
    pub automorphism: String,
    pub generator: Letter,
    pub stabilized_at: usize,
}

/// Stabilized inversion-closed set of length-k subwords of φⁿ(x).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaminationFingerprint {
    k: usize,
    subwords: BTreeSet<ReducedWord>,
    source: FingerprintSource,
}

impl LaminationFingerprint {
    #[cfg(test)]
    pub(crate) fn from_parts(
        k: usize,
        subwords: BTreeSet<ReducedWord>,
        source: FingerprintSource,
    ) -> LaminationFingerprint {
        LaminationFingerprint { k, subwords, source }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn subwords(&self) -> &BTreeSet<ReducedWord> {
        &self.subwords
    }

    pub fn source(&self) -> &FingerprintSource {
        &self.source
    }

    pub fn contains(&self, w: &ReducedWord) -> bool {
        self.subwords.contains(w)
    }
}

/// Fingerprints describe unoriented laminations, so equality ignores
/// provenance: same k, same subword set.
pub fn fingerprint_equal(fp1: &LaminationFingerprint, fp2: &LaminationFingerprint) -> bool {
    fp1.k == fp2.k && fp1.subwords == fp2.subwords
}

/// Length-k subwords of a reduced word together with their inverses.
fn inversion_closed_subwords(w: &ReducedWord, k: usize) -> BTreeSet<ReducedWord> {
    let mut set = BTreeSet::new();
    for sub in w.subwords(k) {
        let sub = ReducedWord::from_letters(sub.iter().copied());
        set.insert(sub.inverse());
        set.insert(sub);
    }
    set
}

/// Runs the subword sets of φ(x), φ²(x), … until three consecutive iterates
/// agree, and returns the first of those with its iterate index. A streak
/// counts only once the word is long enough to hold a window, or once the
/// word has stopped growing; iterates still shorter than k all share the
/// empty set and must not stabilize it while growth continues.
fn stabilized_subword_set(
    phi: &Automorphism,
    start: &ReducedWord,
    k: usize,
    n_max: usize,
    max_word_len: usize,
) -> Result<Option<(BTreeSet<ReducedWord>, usize)>, LamError> {
    let mut word = start.clone();
    let mut history: Vec<BTreeSet<ReducedWord>> = Vec::new();
    let mut lens: Vec<usize> = Vec::new();
    for n in 1..=n_max {
        word = phi.apply(&word, max_word_len).map_err(flatten_aut)?;
        history.push(inversion_closed_subwords(&word, k));
        lens.push(word.len());
        if n >= 3
            && history[n - 1] == history[n - 2]
            && history[n - 2] == history[n - 3]
            && (word.len() >= k || lens[n - 1] == lens[n - 3])
        {
            return Ok(Some((history.pop().unwrap(), n - 2)));
        }
    }
    Ok(None)
}

/// Fingerprint of the lamination seeded by generator `x`: the length-k
/// subword set of φⁿ(x), closed under inversion, at the first n where the
/// next two iterates reproduce it.
pub fn lamination_fingerprint(
    phi: &Automorphism,
    x: Letter,
    k: usize,
    n_max: usize,
    max_word_len: usize,
) -> Result<LaminationFingerprint, LamError> {
    if x.is_inverse() || !phi.alphabet().contains(x) {
        return Err(LamError::NotAGenerator { letter: x, rank: phi.alphabet().rank() });
    }
    let seed = ReducedWord::from_letters([x]);
    match stabilized_subword_set(phi, &seed, k, n_max, max_word_len)? {
        Some((subwords, stabilized_at)) => Ok(LaminationFingerprint {
            k,
            subwords,
            source: FingerprintSource {
                automorphism: phi.to_text(),
                generator: x,
                stabilized_at,
            },
        }),
        None => Err(LamError::NoStabilization { generator: x, iterations: n_max }),
    }
}

/// One stabilized fingerprint per generator, deduplicated by subword set.
pub fn generator_fingerprints(
    phi: &Automorphism,
    k: usize,
    n_max: usize,
    max_word_len: usize,
) -> Result<Vec<LaminationFingerprint>, LamError> {
    let mut out: Vec<LaminationFingerprint> = Vec::new();
    for x in phi.alphabet().generators() {
        let fp = lamination_fingerprint(phi, x, k, n_max, max_word_len)?;
        if !out.iter().any(|f| fingerprint_equal(f, &fp)) {
            out.push(fp);
        }
    }
    Ok(out)
}

/// True when some fingerprint of φ coincides with some fingerprint of ψ at
/// the same k. A shared attracting lamination at this resolution obstructs
/// the pair from generating a hyperbolic extension together.
pub fn common_lamination_check(
    phi: &Automorphism,
    psi: &Automorphism,
    k: usize,
    n_max: usize,
    max_word_len: usize,
) -> Result<bool, LamError> {
    let fps = generator_fingerprints(phi, k, n_max, max_word_len)?;
    let gps = generator_fingerprints(psi, k, n_max, max_word_len)?;
    Ok(fps.iter().any(|f| gps.iter().any(|g| fingerprint_equal(f, g))))
}

/// Outcome of watching whether an orbit develops every fingerprint subword.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum Attraction {
    Attracted { at: usize },
    NotObserved { iterations: usize },
}

/// Does the class contain this subword in either orientation, read
/// cyclically?
fn class_contains(c: &CyclicWord, w: &ReducedWord) -> bool {
    c.contains_cyclic(w.letters()) || c.contains_cyclic(w.inverse().letters())
}

/// Watches φⁿ([c]) until every fingerprint subword appears as a cyclic
/// subword in either orientation. `Attracted(n)` reports the first such n
/// (n = 0 means the class itself already suffices).
pub fn attraction_test(
    phi: &Automorphism,
    c: &CyclicWord,
    fp: &LaminationFingerprint,
    n_max: usize,
    max_word_len: usize,
) -> Result<Attraction, LamError> {
    let mut class = c.clone();
    for n in 0..=n_max {
        if fp.subwords.iter().all(|w| class_contains(&class, w)) {
            return Ok(Attraction::Attracted { at: n });
        }
        if n < n_max {
            class = phi.apply_cyclic(&class, max_word_len).map_err(flatten_aut)?;
        }
    }
    Ok(Attraction::NotObserved { iterations: n_max })
}

/// How a weak-limit line relates to the rest of the pipeline.
/// `GenericLeafLike` lines have the subword closure of a computed
/// fingerprint; `also_joins_fixed_points` marks the overlap case where the
/// ends additionally land on collected fixed points, which is possible
/// because some leaves are themselves singular lines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LineClass {
    GenericLeafLike { also_joins_fixed_points: bool },
    FixPlusJoining,
    Unclassified,
}

/// A bi-infinite line observed as a weak limit: two boundary ends through a
/// persistent central window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitLine {
    pub ends: (BoundaryPrefix, BoundaryPrefix),
    pub witness: ReducedWord,
    pub classification: LineClass,
}

/// A persistent window whose ends could not both be converged to distinct
/// boundary points within budget. Kept for review, never silently dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedWindow {
    pub witness: ReducedWord,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakLimits {
    pub lines: Vec<LimitLine>,
    pub unresolved: Vec<UnresolvedWindow>,
}

impl WeakLimits {
    fn empty() -> WeakLimits {
        WeakLimits { lines: Vec::new(), unresolved: Vec::new() }
    }

    /// Lines that converged but match neither a fingerprint closure nor the
    /// collected fixed points. Nonempty output is a review item.
    pub fn unclassified(&self) -> Vec<&LimitLine> {
        self.lines.iter().filter(|l| l.classification == LineClass::Unclassified).collect()
    }
}

/// Shared expensive artifacts for weak-limit extraction over many classes:
/// the generator fingerprints and the collected fixed points of one
/// automorphism.
#[derive(Clone, Debug)]
pub struct LaminationContext {
    phi: Automorphism,
    k: usize,
    stabilization_budget: usize,
    fingerprints: Vec<LaminationFingerprint>,
    fixed_points: FixedPointSet,
    conv: ConvergenceOpts,
}

impl LaminationContext {
    pub fn new(
        phi: &Automorphism,
        k: usize,
        stabilization_budget: usize,
        twist_bound: usize,
        conv: &ConvergenceOpts,
    ) -> Result<LaminationContext, LamError> {
        let fingerprints = generator_fingerprints(phi, k, stabilization_budget, conv.max_word_len)?;
        let seeds = default_seeds(phi.alphabet(), 2);
        let fixed_points = collect_attracting_points(phi, twist_bound, &seeds, conv)
            .map_err(flatten_boundary)?;
        Ok(LaminationContext {
            phi: phi.clone(),
            k,
            stabilization_budget,
            fingerprints,
            fixed_points,
            conv: conv.clone(),
        })
    }

    pub fn phi(&self) -> &Automorphism {
        &self.phi
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fingerprints(&self) -> &[LaminationFingerprint] {
        &self.fingerprints
    }

    pub fn fixed_points(&self) -> &FixedPointSet {
        &self.fixed_points
    }

    pub fn convergence(&self) -> &ConvergenceOpts {
        &self.conv
    }
}

/// Windows are unoriented; the canonical representative is the smaller of
/// the word and its inverse.
fn canonical_window(w: ReducedWord) -> ReducedWord {
    let inv = w.inverse();
    if inv < w {
        inv
    } else {
        w
    }
}

/// Stretches one window to a line: the right half is iterated forward, the
/// inverted left half backward, both under the trivial lift.
fn extend_window(
    ctx: &LaminationContext,
    window: &ReducedWord,
) -> Result<(BoundaryPrefix, BoundaryPrefix), String> {
    let lift = TwistedLift::trivial(ctx.phi.clone());
    let mid = window.len() / 2;
    let left = window.prefix(mid);
    let right = ReducedWord::from_letters(window.letters()[mid..].iter().copied());
    let back = iterate_to_fixed_point(&lift, &left.inverse(), &ctx.conv)
        .map_err(|e| format!("backward end: {e}"))?;
    let fwd = iterate_to_fixed_point(&lift, &right, &ctx.conv)
        .map_err(|e| format!("forward end: {e}"))?;
    Ok((back, fwd))
}

fn classify_window(
    ctx: &LaminationContext,
    window: &ReducedWord,
    ends: &(BoundaryPrefix, BoundaryPrefix),
) -> Result<LineClass, LamError> {
    let closure = stabilized_subword_set(
        &ctx.phi,
        window,
        ctx.k,
        ctx.stabilization_budget,
        ctx.conv.max_word_len,
    )?;
    let leaf_like = match closure {
        Some((set, _)) => ctx.fingerprints.iter().any(|fp| fp.subwords == set),
        None => false,
    };
    let joins_fixed = ctx.fixed_points.matches(&ends.0).is_some()
        && ctx.fixed_points.matches(&ends.1).is_some();
    Ok(match (leaf_like, joins_fixed) {
        (true, joins) => LineClass::GenericLeafLike { also_joins_fixed_points: joins },
        (false, true) => LineClass::FixPlusJoining,
        (false, false) => LineClass::Unclassified,
    })
}

/// Weak limits of the class [c] under iteration: length-k windows present in
/// every iterate of the orbit's final third, each stretched to a two-ended
/// line and classified against the context's fingerprints and fixed points.
///
/// Orbits that show no growth over the budget produce no lines: the iterates
/// stay a bounded circuit instead of escaping to infinity.
pub fn weak_limit_lines(
    ctx: &LaminationContext,
    c: &CyclicWord,
    n_max: usize,
) -> Result<WeakLimits, LamError> {
    if c.is_empty() || n_max < 3 {
        return Ok(WeakLimits::empty());
    }
    let mut orbit = Vec::with_capacity(n_max + 1);
    orbit.push(c.clone());
    for _ in 0..n_max {
        let next = ctx
            .phi
            .apply_cyclic(orbit.last().unwrap(), ctx.conv.max_word_len)
            .map_err(flatten_aut)?;
        orbit.push(next);
    }
    if orbit.last().unwrap().len() <= c.len() {
        return Ok(WeakLimits::empty());
    }

    let tail_start = n_max - n_max / 3;
    let mut persistent: Option<BTreeSet<ReducedWord>> = None;
    for class in &orbit[tail_start..] {
        let windows: BTreeSet<ReducedWord> = class
            .cyclic_subwords(ctx.k)
            .into_iter()
            .map(canonical_window)
            .collect();
        persistent = Some(match persistent {
            None => windows,
            Some(prev) => prev.intersection(&windows).cloned().collect(),
        });
    }
    let persistent = persistent.unwrap_or_default();

    let outcomes: Vec<Result<Result<LimitLine, UnresolvedWindow>, LamError>> = persistent
        .into_par_iter()
        .map(|window| {
            let ends = match extend_window(ctx, &window) {
                Ok(ends) => ends,
                Err(reason) => return Ok(Err(UnresolvedWindow { witness: window, reason })),
            };
            match same_point(&ends.0, &ends.1, ctx.fixed_points.merge_depth) {
                PointCmp::Distinct => {}
                other => {
                    return Ok(Err(UnresolvedWindow {
                        witness: window,
                        reason: format!("ends compare as {other:?}, need Distinct"),
                    }))
                }
            }
            let classification = classify_window(ctx, &window, &ends)?;
            Ok(Ok(LimitLine { ends, witness: window, classification }))
        })
        .collect();

    let mut limits = WeakLimits::empty();
    for outcome in outcomes {
        match outcome? {
            Ok(line) => limits.lines.push(line),
            Err(unresolved) => limits.unresolved.push(unresolved),
        }
    }
    Ok(limits)
}
