//! Finite-precision boundary points and attracting fixed points of lifts.
//!
//! A point of the Gromov boundary is held as a [`BoundaryPrefix`]: the
//! longest common prefix of two consecutive orbit words, together with the
//! provenance that produced it. Everything downstream compares points only
//! through [`same_point`], whose three-valued answer keeps the finite
//! precision honest: `Same` needs agreement through a confirmation depth,
//! `Distinct` needs a mismatch inside both guarantees, anything else is
//! `Undetermined`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rayon::prelude::*;

use crate::automorphism::{sample_lifts, AutError, Automorphism, TwistedLift};
use crate::words::{ReducedWord, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundaryError {
    #[error("orbit stopped converging: stable prefix stuck at {stable} letters after {iterations} iterations (all lift powers up to {powers_tried} tried)")]
    NoConvergence { iterations: usize, stable: usize, powers_tried: usize },
    #[error("iteration budget of {max_iterations} exhausted at stable prefix {stable} before target depth {target}")]
    IterationBudget { max_iterations: usize, stable: usize, target: usize },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Aut(AutError),
}

/// Word-level failures inside automorphism application (length budgets in
/// particular) surface as `Word` so callers can match on them directly.
fn flatten_aut(e: AutError) -> BoundaryError {
    match e {
        AutError::Word(w) => BoundaryError::Word(w),
        other => BoundaryError::Aut(other),
    }
}

/// How a boundary point was produced: which lift (by twist word), from which
/// seed, under which power of the lift.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub twist: ReducedWord,
    pub seed: ReducedWord,
    pub power: usize,
}

/// A boundary point to finite precision. The first `depth` letters of
/// `prefix` survived one further application of the producing lift; letters
/// never extend past `depth` here, so two values can disagree only inside
/// their guarantees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPrefix {
    prefix: ReducedWord,
    depth: usize,
    provenance: Provenance,
}

impl BoundaryPrefix {
    #[cfg(test)]
    pub(crate) fn from_parts(
        prefix: ReducedWord,
        depth: usize,
        provenance: Provenance,
    ) -> BoundaryPrefix {
        BoundaryPrefix { prefix, depth, provenance }
    }

    /// The same point held to a shallower guarantee: both the letters and
    /// the depth are cut to `depth`. Truncation never invents letters, so
    /// the result inherits soundness from `self`.
    pub fn truncated(&self, depth: usize) -> BoundaryPrefix {
        let depth = depth.min(self.depth);
        BoundaryPrefix {
            prefix: self.prefix.prefix(depth),
            depth,
            provenance: self.provenance.clone(),
        }
    }

    pub fn prefix(&self) -> &ReducedWord {
        &self.prefix
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// Three-valued comparison of finite-precision points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointCmp {
    Same,
    Distinct,
    Undetermined,
}

/// Compares two observed prefixes. Identical values are `Same`; a mismatch
/// within both stable depths is `Distinct`; agreement through `merge_depth`
/// on both sides is `Same`; everything else stays `Undetermined`.
pub fn same_point(p: &BoundaryPrefix, q: &BoundaryPrefix, merge_depth: usize) -> PointCmp {
    if p == q {
        return PointCmp::Same;
    }
    let overlap = p.prefix.common_prefix_len(&q.prefix);
    let min_depth = p.depth.min(q.depth);
    if overlap < min_depth.min(p.prefix.len()).min(q.prefix.len()) {
        return PointCmp::Distinct;
    }
    if p.depth >= merge_depth && q.depth >= merge_depth && overlap >= merge_depth {
        return PointCmp::Same;
    }
    PointCmp::Undetermined
}

/// Budgets and thresholds for boundary iteration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceOpts {
    /// Stable-prefix length at which the iteration succeeds.
    pub target_depth: usize,
    /// Iterations allowed per lift power before giving up.
    pub max_iterations: usize,
    /// Consecutive iterations without stable-prefix growth tolerated before
    /// declaring no convergence.
    pub stall_window: usize,
    /// Lift powers Φ, Φ², … tried before reporting failure.
    pub power_bound: usize,
    pub max_word_len: usize,
}

impl Default for ConvergenceOpts {
    fn default() -> Self {
        ConvergenceOpts {
            target_depth: 32,
            max_iterations: 48,
            stall_window: 6,
            power_bound: 6,
            max_word_len: crate::words::DEFAULT_MAX_WORD_LEN,
        }
    }
}

/// One power of one lift: iterate until the common prefix of consecutive
/// orbit words reaches the target and the orbit has genuinely expanded.
fn converge_single(
    lift: &TwistedLift,
    seed: &ReducedWord,
    power: usize,
    opts: &ConvergenceOpts,
) -> Result<BoundaryPrefix, BoundaryError> {
    let mut prev = seed.clone();
    let mut best_stable = 0usize;
    let mut last_growth = 0usize;
    for iteration in 1..=opts.max_iterations {
        let next = lift.apply(&prev, opts.max_word_len).map_err(flatten_aut)?;
        let stable = prev.common_prefix_len(&next);
        if stable > best_stable {
            best_stable = stable;
            last_growth = iteration;
        }
        // expansion evidence rules out word-length-preserving lifts whose
        // orbits repeat a long seed verbatim
        if stable >= opts.target_depth && next.len() > seed.len() {
            return Ok(BoundaryPrefix {
                prefix: prev.prefix(stable),
                depth: stable,
                provenance: Provenance {
                    twist: lift.twist().clone(),
                    seed: seed.clone(),
                    power,
                },
            });
        }
        if iteration - last_growth >= opts.stall_window {
            return Err(BoundaryError::NoConvergence {
                iterations: iteration,
                stable: best_stable,
                powers_tried: power,
            });
        }
        prev = next;
    }
    Err(BoundaryError::IterationBudget {
        max_iterations: opts.max_iterations,
        stable: best_stable,
        target: opts.target_depth,
    })
}

/// Iterates Φᵏ(seed) to a stable prefix of the requested depth. When the
/// base lift stalls, Φ², Φ³, … are tried up to the power bound: an orbit
/// whose first letters cycle with period q converges only under Φ^q.
pub fn iterate_to_fixed_point(
    lift: &TwistedLift,
    seed: &ReducedWord,
    opts: &ConvergenceOpts,
) -> Result<BoundaryPrefix, BoundaryError> {
    let mut last = None;
    for power in 1..=opts.power_bound.max(1) {
        let powered = if power == 1 {
            lift.clone()
        } else {
            lift.power(power, opts.max_word_len).map_err(flatten_aut)?
        };
        match converge_single(&powered, seed, power, opts) {
            Ok(p) => return Ok(p),
            Err(e @ BoundaryError::NoConvergence { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(match last {
        Some(BoundaryError::NoConvergence { iterations, stable, .. }) => {
            BoundaryError::NoConvergence {
                iterations,
                stable,
                powers_tried: opts.power_bound.max(1),
            }
        }
        _ => unreachable!("power loop runs at least once"),
    })
}

/// Attracting points observed for one lift, deduplicated at the merge depth.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftPoints {
    pub twist: ReducedWord,
    pub points: Vec<BoundaryPrefix>,
    /// Heuristic principality evidence: at least two distinct attracting
    /// points were observed. Never treated as a proof.
    pub principal_heuristic: bool,
}

/// Attracting fixed points grouped by lift, with the bookkeeping needed to
/// audit the per-lift count bound (≤ 2·rank).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub rank: usize,
    pub merge_depth: usize,
    pub lifts: Vec<LiftPoints>,
    /// (twist, seed) runs that exhausted an iteration or word budget; stall
    /// failures are expected and not recorded.
    pub budget_skips: Vec<Provenance>,
}

/// Per-lift point counts against the 2·rank ceiling.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GjllAudit {
    pub bound: usize,
    pub per_lift: Vec<(ReducedWord, usize)>,
    pub violations: Vec<ReducedWord>,
}

impl FixedPointSet {
    pub fn all_points(&self) -> impl Iterator<Item = &BoundaryPrefix> {
        self.lifts.iter().flat_map(|l| l.points.iter())
    }

    pub fn total_points(&self) -> usize {
        self.lifts.iter().map(|l| l.points.len()).sum()
    }

    /// Does any collected point match this one?
    pub fn matches(&self, p: &BoundaryPrefix) -> Option<&BoundaryPrefix> {
        self.all_points().find(|q| same_point(p, q, self.merge_depth) == PointCmp::Same)
    }

    /// Audits the per-lift bound: a lift of a hyperbolic automorphism has at
    /// most 2·rank attracting fixed points, so an excess is a bug in the
    /// collection pipeline, never data.
    pub fn gjll_audit(&self) -> GjllAudit {
        let bound = 2 * self.rank;
        let per_lift: Vec<(ReducedWord, usize)> =
            self.lifts.iter().map(|l| (l.twist.clone(), l.points.len())).collect();
        let violations = per_lift
            .iter()
            .filter(|(_, n)| *n > bound)
            .map(|(t, _)| t.clone())
            .collect();
        GjllAudit { bound, per_lift, violations }
    }

    /// Distinct points across all lifts (cross-lift duplicates merged).
    pub fn distinct_points(&self) -> Vec<&BoundaryPrefix> {
        let mut kept: Vec<&BoundaryPrefix> = Vec::new();
        for p in self.all_points() {
            if !kept.iter().any(|q| same_point(p, q, self.merge_depth) == PointCmp::Same) {
                kept.push(p);
            }
        }
        kept
    }
}

/// Sweeps every lift with twist length ≤ `twist_bound` over the seeds,
/// iterating each to the target depth and deduplicating per lift. Runs are
/// independent and execute in parallel; the grouping order (lift order, then
/// seed order) is deterministic.
pub fn collect_attracting_points(
    phi: &Automorphism,
    twist_bound: usize,
    seeds: &[ReducedWord],
    opts: &ConvergenceOpts,
) -> Result<FixedPointSet, BoundaryError> {
    let merge_depth = opts.target_depth;
    let lifts = sample_lifts(phi, twist_bound);
    let per_lift: Vec<(LiftPoints, Vec<Provenance>)> = lifts
        .into_par_iter()
        .map(|lift| {
            let mut points: Vec<BoundaryPrefix> = Vec::new();
            let mut skips = Vec::new();
            for seed in seeds {
                match iterate_to_fixed_point(&lift, seed, opts) {
                    Ok(p) => {
                        match points
                            .iter_mut()
                            .find(|q| same_point(&p, q, merge_depth) == PointCmp::Same)
                        {
                            Some(q) => {
                                if p.depth > q.depth {
                                    *q = p;
                                }
                            }
                            None => points.push(p),
                        }
                    }
                    Err(BoundaryError::NoConvergence { .. }) => {}
                    Err(BoundaryError::IterationBudget { .. })
                    | Err(BoundaryError::Word(WordError::LengthBudget { .. })) => {
                        skips.push(Provenance {
                            twist: lift.twist().clone(),
                            seed: seed.clone(),
                            power: 0,
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
            let principal_heuristic = points.len() >= 2;
            Ok((
                LiftPoints { twist: lift.twist().clone(), points, principal_heuristic },
                skips,
            ))
        })
        .collect::<Result<_, BoundaryError>>()?;

    let mut lifts = Vec::with_capacity(per_lift.len());
    let mut budget_skips = Vec::new();
    for (lp, skips) in per_lift {
        lifts.push(lp);
        budget_skips.extend(skips);
    }
    Ok(FixedPointSet { rank: phi.alphabet().rank(), merge_depth, lifts, budget_skips })
}

/// Default seed battery: all reduced words of length 1..=`max_len`.
pub fn default_seeds(alphabet: &crate::words::Alphabet, max_len: usize) -> Vec<ReducedWord> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        out.extend(crate::words::reduced_words_of_len(alphabet, len));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    fn tribonacci() -> Automorphism {
        Automorphism::parse("a->ab; b->ac; c->a").unwrap()
    }

    fn rw(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn opts(depth: usize) -> ConvergenceOpts {
        ConvergenceOpts { target_depth: depth, ..Default::default() }
    }

    #[test]
    fn tribonacci_seed_a_stabilizes() {
        let lift = TwistedLift::trivial(tribonacci());
        let p = iterate_to_fixed_point(&lift, &rw("a"), &opts(7)).unwrap();
        assert_eq!(p.prefix(), &rw("abacaba"));
        assert_eq!(p.depth(), 7);
        assert_eq!(p.provenance().power, 1);
    }

    #[test]
    fn fibonacci_seed_a_stabilizes() {
        let fib = Automorphism::parse("a->ab; b->a").unwrap();
        let p = iterate_to_fixed_point(&TwistedLift::trivial(fib), &rw("a"), &opts(5)).unwrap();
        assert_eq!(p.prefix(), &rw("abaab"));
    }

    #[test]
    fn inverse_direction_needs_a_power() {
        // first letters of Φⁿ(a⁻¹) cycle a⁻¹→b⁻¹→c⁻¹ under the Tribonacci
        // map, so only Φ³ converges on that seed
        let lift = TwistedLift::trivial(tribonacci());
        let p = iterate_to_fixed_point(&lift, &rw("A"), &opts(8)).unwrap();
        assert_eq!(p.provenance().power, 3);
        assert!(p.prefix().to_string().starts_with("ABACABA"));
    }

    #[test]
    fn identity_lift_never_converges() {
        let id = Automorphism::identity(Alphabet::new(3).unwrap());
        let err = iterate_to_fixed_point(&TwistedLift::trivial(id), &rw("a"), &opts(2));
        assert!(matches!(err, Err(BoundaryError::NoConvergence { .. })));
    }

    #[test]
    fn permutation_trivial_lift_collects_nothing() {
        let perm = Automorphism::parse("a->b; b->c; c->a").unwrap();
        let seeds = default_seeds(perm.alphabet(), 1);
        let set = collect_attracting_points(&perm, 0, &seeds, &opts(2)).unwrap();
        assert_eq!(set.total_points(), 0);
        assert!(set.budget_skips.is_empty());
    }

    #[test]
    fn same_point_three_values() {
        let lift = TwistedLift::trivial(tribonacci());
        let p = iterate_to_fixed_point(&lift, &rw("a"), &opts(32)).unwrap();
        let q = iterate_to_fixed_point(&lift, &rw("ab"), &opts(32)).unwrap();
        // same attracting point from different seeds
        assert_eq!(same_point(&p, &q, 32), PointCmp::Same);
        assert_eq!(same_point(&p, &p, 64), PointCmp::Same); // identical values short-circuit
        let neg = iterate_to_fixed_point(&lift, &rw("A"), &opts(32)).unwrap();
        assert_eq!(same_point(&p, &neg, 32), PointCmp::Distinct);
        // shallow agreement stays undetermined below the merge depth
        let shallow_p = iterate_to_fixed_point(&lift, &rw("a"), &opts(3)).unwrap();
        let shallow_q = iterate_to_fixed_point(&lift, &rw("ba"), &opts(3)).unwrap();
        if shallow_p.prefix().common_prefix_len(shallow_q.prefix())
            >= shallow_p.depth().min(shallow_q.depth())
        {
            assert_eq!(same_point(&shallow_p, &shallow_q, 32), PointCmp::Undetermined);
        }
    }

    #[test]
    fn depth_soundness_under_deepening() {
        let lift = TwistedLift::trivial(tribonacci());
        let shallow = iterate_to_fixed_point(&lift, &rw("b"), &opts(6)).unwrap();
        let deep = iterate_to_fixed_point(&lift, &rw("b"), &opts(24)).unwrap();
        assert!(deep.prefix().common_prefix_len(shallow.prefix()) >= shallow.depth());
    }

    #[test]
    fn tribonacci_gjll_audit_holds() {
        let trib = tribonacci();
        let seeds = default_seeds(trib.alphabet(), 2);
        let set = collect_attracting_points(&trib, 1, &seeds, &opts(32)).unwrap();
        assert!(set.total_points() > 0);
        let audit = set.gjll_audit();
        assert_eq!(audit.bound, 6);
        assert!(audit.violations.is_empty(), "per-lift counts: {:?}", audit.per_lift);
    }
}
