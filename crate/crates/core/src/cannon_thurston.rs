//! Ending laminations of cyclic extensions and the boundary identification
//! graph.
//!
//! For a hyperbolic φ the ending lamination of the extension by ⟨φ⟩ is the
//! union of the weak-limit line sets of φ and φ⁻¹. The identification graph
//! records which boundary points those lines pin together; its components
//! approximate the fibers of the boundary map onto the extension, so the
//! audit checks that shared endpoints are collected fixed points and that no
//! component outgrows the count of collected fixed points.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automorphism::{AutError, Automorphism};
use crate::boundary::{
    same_point, BoundaryPrefix, ConvergenceOpts, FixedPointSet, PointCmp,
};
use crate::dynamics::{certify_hyperbolicity, HyperbolicityVerdict};
use crate::laminations::{
    weak_limit_lines, LamError, LaminationContext, LimitLine, LineClass, UnresolvedWindow,
};
use crate::words::{reduced_words_of_len, Alphabet, CyclicWord, ReducedWord};

#[derive(Debug, Error)]
pub enum CtError {
    #[error("supplied inverse does not invert the automorphism")]
    NotInverse,
    #[error("not hyperbolic: [{witness}] returns to itself with period {period}")]
    NotHyperbolic { witness: CyclicWord, period: usize },
    #[error(transparent)]
    Lam(#[from] LamError),
}

fn lam_from_aut(e: AutError) -> CtError {
    CtError::Lam(match e {
        AutError::Word(w) => LamError::Word(w),
        other => LamError::Aut(other),
    })
}

/// Which of the two generators of the cyclic extension produced a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectedLine {
    pub direction: Direction,
    pub line: LimitLine,
}

/// Weak-limit lines of φ and φ⁻¹ over a sample of conjugacy classes,
/// deduplicated by end-pair, together with the fixed points collected for
/// each direction (the provenance the graph audit needs).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndingLaminationSet {
    pub lines: Vec<DirectedLine>,
    pub unresolved: Vec<(Direction, UnresolvedWindow)>,
    pub fixed_points_forward: FixedPointSet,
    pub fixed_points_backward: FixedPointSet,
    pub merge_depth: usize,
}

impl EndingLaminationSet {
    pub fn lines_in(&self, direction: Direction) -> impl Iterator<Item = &DirectedLine> {
        self.lines.iter().filter(move |l| l.direction == direction)
    }
}

/// Budgets for the whole ending-lamination pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CtBudgets {
    /// Window and fingerprint subword length.
    pub k: usize,
    /// Orbit iterations per sampled class.
    pub n_max: usize,
    /// Iterations allowed for a subword set to stabilize.
    pub stabilization_budget: usize,
    /// Twist length bound for fixed-point collection.
    pub twist_bound: usize,
    /// Hyperbolicity guard: class length and period scanned before running.
    pub guard_max_class_len: usize,
    pub guard_max_period: usize,
    pub conv: ConvergenceOpts,
}

impl Default for CtBudgets {
    fn default() -> Self {
        CtBudgets {
            k: 3,
            n_max: 15,
            stabilization_budget: 20,
            twist_bound: 2,
            guard_max_class_len: 4,
            guard_max_period: 4,
            conv: ConvergenceOpts::default(),
        }
    }
}

pub(crate) fn is_inverse_pair(phi: &Automorphism, psi: &Automorphism, max_word_len: usize) -> bool {
    phi.compose(psi, max_word_len).map(|c| c.is_identity()).unwrap_or(false)
        && psi.compose(phi, max_word_len).map(|c| c.is_identity()).unwrap_or(false)
}

/// Unordered end-pair comparison: two lines describe the same unoriented
/// line when their end points Same-match in either pairing.
fn same_end_pair(a: &LimitLine, b: &LimitLine, merge_depth: usize) -> bool {
    let cmp = |p: &BoundaryPrefix, q: &BoundaryPrefix| same_point(p, q, merge_depth);
    (cmp(&a.ends.0, &b.ends.0) == PointCmp::Same && cmp(&a.ends.1, &b.ends.1) == PointCmp::Same)
        || (cmp(&a.ends.0, &b.ends.1) == PointCmp::Same
            && cmp(&a.ends.1, &b.ends.0) == PointCmp::Same)
}

/// Weak-limit lines of both φ and φ⁻¹ over the sampled classes.
///
/// Refuses inputs that fail the hyperbolicity scan: the ending lamination is
/// an artifact of a hyperbolic extension, and running the pipeline on, say,
/// the identity would manufacture meaningless lines.
pub fn ending_lamination_set(
    phi: &Automorphism,
    phi_inv: &Automorphism,
    samples: &[CyclicWord],
    budgets: &CtBudgets,
) -> Result<EndingLaminationSet, CtError> {
    let max_word_len = budgets.conv.max_word_len;
    if !is_inverse_pair(phi, phi_inv, max_word_len) {
        return Err(CtError::NotInverse);
    }
    match certify_hyperbolicity(
        phi,
        budgets.guard_max_class_len,
        budgets.guard_max_period,
        max_word_len,
    )
    .map_err(lam_from_aut)?
    {
        HyperbolicityVerdict::NotHyperbolic { witness, period } => {
            return Err(CtError::NotHyperbolic { witness, period })
        }
        HyperbolicityVerdict::NoObstructionFound { .. } => {}
    }

    let fwd_ctx = LaminationContext::new(
        phi,
        budgets.k,
        budgets.stabilization_budget,
        budgets.twist_bound,
        &budgets.conv,
    )?;
    let bwd_ctx = LaminationContext::new(
        phi_inv,
        budgets.k,
        budgets.stabilization_budget,
        budgets.twist_bound,
        &budgets.conv,
    )?;

    let merge_depth = budgets.conv.target_depth;
    let mut lines: Vec<DirectedLine> = Vec::new();
    let mut unresolved: Vec<(Direction, UnresolvedWindow)> = Vec::new();
    for (direction, ctx) in [(Direction::Forward, &fwd_ctx), (Direction::Backward, &bwd_ctx)] {
        for sample in samples {
            let limits = weak_limit_lines(ctx, sample, budgets.n_max)?;
            for line in limits.lines {
                if !lines.iter().any(|dl| same_end_pair(&dl.line, &line, merge_depth)) {
                    lines.push(DirectedLine { direction, line });
                }
            }
            for u in limits.unresolved {
                let seen = unresolved
                    .iter()
                    .any(|(d, v)| *d == direction && v.witness == u.witness);
                if !seen {
                    unresolved.push((direction, u));
                }
            }
        }
    }

    Ok(EndingLaminationSet {
        lines,
        unresolved,
        fixed_points_forward: fwd_ctx.fixed_points().clone(),
        fixed_points_backward: bwd_ctx.fixed_points().clone(),
        merge_depth,
    })
}

/// A line joining two attracting fixed points of one lift: the ends read
/// outward, the witness is the connecting word at the junction.
///
/// Distinct points of a single lift always bound such a line; the connector
/// search finds the shortest word (length and then letter order) whose
/// junctions with both rays are cancellation-free, so the assembled
/// bi-infinite word is reduced.
pub fn assemble_singular_lines(
    fps: &FixedPointSet,
    connector_length_bound: usize,
) -> Vec<LimitLine> {
    let alphabet = match Alphabet::new(fps.rank) {
        Ok(a) => a,
        Err(_) => return Vec::new(),
    };
    let mut lines = Vec::new();
    for lift in &fps.lifts {
        for i in 0..lift.points.len() {
            for j in i + 1..lift.points.len() {
                let p = &lift.points[i];
                let q = &lift.points[j];
                if same_point(p, q, fps.merge_depth) != PointCmp::Distinct {
                    continue;
                }
                let (Some(p1), Some(q1)) = (p.prefix().first(), q.prefix().first()) else {
                    continue;
                };
                let connector = if p1 != q1 {
                    Some(ReducedWord::identity())
                } else {
                    (1..=connector_length_bound)
                        .flat_map(|len| reduced_words_of_len(&alphabet, len))
                        .find(|w| {
                            w.first() != Some(p1) && w.last().map(|l| l.inverse()) != Some(q1)
                        })
                };
                if let Some(witness) = connector {
                    lines.push(LimitLine {
                        ends: (p.clone(), q.clone()),
                        witness,
                        classification: LineClass::FixPlusJoining,
                    });
                }
            }
        }
    }
    lines
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphEdge {
    pub ends: (usize, usize),
    pub direction: Direction,
    pub witness: ReducedWord,
}

/// Result of checking the graph against the collected fixed points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberAudit {
    /// Count of distinct collected fixed points across both directions,
    /// floored at 2 (an isolated edge). Components are chains of fixed-point
    /// identifications, so exceeding this is a pipeline bug, not data.
    pub ceiling: usize,
    pub max_component_size: usize,
    /// Nodes of degree ≥ 2 that fail to Same-match any collected fixed
    /// point. Review items: shared endpoints should only be fixed points.
    pub unmatched_junctions: Vec<usize>,
    pub passed: bool,
}

/// Boundary points pinned together by ending-lamination lines.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentificationGraph {
    pub nodes: Vec<BoundaryPrefix>,
    pub edges: Vec<GraphEdge>,
    /// Node indices grouped by connected component, largest first.
    pub components: Vec<Vec<usize>>,
    /// Node pairs whose comparison stayed Undetermined at merge depth; they
    /// are kept separate, never merged.
    pub unresolved_pairs: Vec<(usize, usize)>,
    pub audit: FiberAudit,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Interns a point into the node list: Same hits reuse the existing node,
/// anything else appends, and Undetermined comparisons are recorded so the
/// caller can see which identifications were left unmade.
fn intern_node(
    nodes: &mut Vec<BoundaryPrefix>,
    unresolved: &mut Vec<(usize, usize)>,
    p: &BoundaryPrefix,
    merge_depth: usize,
) -> usize {
    let mut undetermined_against = Vec::new();
    for (i, q) in nodes.iter().enumerate() {
        match same_point(p, q, merge_depth) {
            PointCmp::Same => return i,
            PointCmp::Undetermined => undetermined_against.push(i),
            PointCmp::Distinct => {}
        }
    }
    nodes.push(p.clone());
    let id = nodes.len() - 1;
    for i in undetermined_against {
        unresolved.push((i, id));
    }
    id
}

/// Builds the identification graph of an ending-lamination set: nodes are
/// line endpoints merged under `same_point` at `merge_depth`, edges are the
/// lines, and the audit compares shared endpoints and component sizes
/// against the collected fixed points.
pub fn identification_graph(
    els: &EndingLaminationSet,
    merge_depth: usize,
) -> IdentificationGraph {
    let mut nodes: Vec<BoundaryPrefix> = Vec::new();
    let mut unresolved_pairs: Vec<(usize, usize)> = Vec::new();
    let mut edges = Vec::new();
    for dl in &els.lines {
        let a = intern_node(&mut nodes, &mut unresolved_pairs, &dl.line.ends.0, merge_depth);
        let b = intern_node(&mut nodes, &mut unresolved_pairs, &dl.line.ends.1, merge_depth);
        edges.push(GraphEdge {
            ends: (a, b),
            direction: dl.direction,
            witness: dl.line.witness.clone(),
        });
    }

    let mut uf = UnionFind::new(nodes.len());
    for e in &edges {
        uf.union(e.ends.0, e.ends.1);
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for i in 0..nodes.len() {
        let root = uf.find(i);
        by_root[root].push(i);
    }
    let mut components: Vec<Vec<usize>> = by_root.into_iter().filter(|c| !c.is_empty()).collect();
    components.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));

    let mut degree = vec![0usize; nodes.len()];
    for e in &edges {
        degree[e.ends.0] += 1;
        degree[e.ends.1] += 1;
    }
    let unmatched_junctions: Vec<usize> = (0..nodes.len())
        .filter(|&i| degree[i] >= 2)
        .filter(|&i| {
            els.fixed_points_forward.matches(&nodes[i]).is_none()
                && els.fixed_points_backward.matches(&nodes[i]).is_none()
        })
        .collect();

    let distinct_fixed = els.fixed_points_forward.distinct_points().len()
        + els.fixed_points_backward.distinct_points().len();
    let ceiling = distinct_fixed.max(2);
    let max_component_size = components.first().map_or(0, |c| c.len());
    let audit = FiberAudit {
        ceiling,
        max_component_size,
        passed: unmatched_junctions.is_empty() && max_component_size <= ceiling,
        unmatched_junctions,
    };

    IdentificationGraph { nodes, edges, components, unresolved_pairs, audit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::invert;
    use crate::boundary::{LiftPoints, Provenance};
    use crate::words::cyclic_words_of_len;

    const BUDGET: usize = 10_000_000;

    fn tribonacci() -> Automorphism {
        Automorphism::parse("a->ab; b->ac; c->a").unwrap()
    }

    fn rw(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn small_budgets() -> CtBudgets {
        CtBudgets { k: 2, twist_bound: 1, ..Default::default() }
    }

    fn samples(max_len: usize) -> Vec<CyclicWord> {
        let alphabet = Alphabet::new(3).unwrap();
        (1..=max_len).flat_map(|l| cyclic_words_of_len(&alphabet, l)).collect()
    }

    #[test]
    fn rejects_wrong_inverse() {
        let trib = tribonacci();
        let not_inv = Automorphism::parse("a->b; b->a; c->c").unwrap();
        let err = ending_lamination_set(&trib, &not_inv, &samples(1), &small_budgets());
        assert!(matches!(err, Err(CtError::NotInverse)));
    }

    #[test]
    fn refuses_non_hyperbolic_input() {
        let id = Automorphism::identity(Alphabet::new(3).unwrap());
        let err = ending_lamination_set(&id, &id, &samples(1), &small_budgets());
        match err {
            Err(CtError::NotHyperbolic { witness, period }) => {
                assert_eq!(witness.to_word(), rw("a"));
                assert_eq!(period, 1);
            }
            other => panic!("expected NotHyperbolic, got {other:?}"),
        }
    }

    #[test]
    fn empty_sample_gives_empty_set() {
        let trib = tribonacci();
        let inv = invert(&trib, BUDGET).unwrap();
        let els = ending_lamination_set(&trib, &inv, &[], &small_budgets()).unwrap();
        assert!(els.lines.is_empty());
        assert!(els.unresolved.is_empty());
    }

    #[test]
    fn tribonacci_set_has_lines_in_both_directions() {
        let trib = tribonacci();
        let inv = invert(&trib, BUDGET).unwrap();
        let els = ending_lamination_set(&trib, &inv, &samples(2), &small_budgets()).unwrap();
        assert!(els.lines_in(Direction::Forward).count() > 0);
        assert!(els.lines_in(Direction::Backward).count() > 0);
        for dl in &els.lines {
            assert_ne!(dl.line.classification, LineClass::Unclassified);
            assert_eq!(
                same_point(&dl.line.ends.0, &dl.line.ends.1, els.merge_depth),
                PointCmp::Distinct
            );
        }
        // end-pair dedup: no two stored lines share both endpoints
        for (i, a) in els.lines.iter().enumerate() {
            for b in &els.lines[i + 1..] {
                assert!(!same_end_pair(&a.line, &b.line, els.merge_depth));
            }
        }
    }

    #[test]
    fn tribonacci_graph_passes_fiber_audit() {
        let trib = tribonacci();
        let inv = invert(&trib, BUDGET).unwrap();
        let els = ending_lamination_set(&trib, &inv, &samples(2), &small_budgets()).unwrap();
        let graph = identification_graph(&els, els.merge_depth);
        assert!(!graph.nodes.is_empty());
        assert!(graph.audit.passed, "audit: {:?}", graph.audit);
        assert!(graph.audit.max_component_size <= graph.audit.ceiling);
        assert!(graph.unresolved_pairs.is_empty());
    }

    fn synthetic_point(prefix: &str) -> BoundaryPrefix {
        let w = rw(prefix);
        let depth = w.len();
        BoundaryPrefix::from_parts(
            w,
            depth,
            Provenance { twist: ReducedWord::identity(), seed: rw("a"), power: 1 },
        )
    }

    fn synthetic_line(p: &str, q: &str) -> DirectedLine {
        DirectedLine {
            direction: Direction::Forward,
            line: LimitLine {
                ends: (synthetic_point(p), synthetic_point(q)),
                witness: ReducedWord::identity(),
                classification: LineClass::FixPlusJoining,
            },
        }
    }

    fn synthetic_set(lines: Vec<DirectedLine>) -> EndingLaminationSet {
        let empty = FixedPointSet {
            rank: 3,
            merge_depth: 4,
            lifts: Vec::new(),
            budget_skips: Vec::new(),
        };
        EndingLaminationSet {
            lines,
            unresolved: Vec::new(),
            fixed_points_forward: empty.clone(),
            fixed_points_backward: empty,
            merge_depth: 4,
        }
    }

    #[test]
    fn disjoint_edges_make_size_two_components() {
        let els = synthetic_set(vec![
            synthetic_line("aaaa", "bbbb"),
            synthetic_line("cccc", "BBBB"),
        ]);
        let graph = identification_graph(&els, 4);
        assert_eq!(graph.nodes.len(), 4);
        assert_eq!(graph.components.len(), 2);
        assert!(graph.components.iter().all(|c| c.len() == 2));
        // no degree-2 nodes, so the empty fixed-point sets pass the audit
        assert!(graph.audit.passed);
    }

    #[test]
    fn empty_set_gives_empty_graph() {
        let graph = identification_graph(&synthetic_set(Vec::new()), 4);
        assert!(graph.nodes.is_empty());
        assert!(graph.edges.is_empty());
        assert!(graph.components.is_empty());
        assert_eq!(graph.audit.max_component_size, 0);
    }

    #[test]
    fn shared_endpoint_merges_nodes_and_flags_junction() {
        // two lines share the end "aaaa"; with empty fixed-point sets the
        // junction is unmatched and the audit reports it
        let els = synthetic_set(vec![
            synthetic_line("aaaa", "bbbb"),
            synthetic_line("aaaa", "cccc"),
        ]);
        let graph = identification_graph(&els, 4);
        assert_eq!(graph.nodes.len(), 3);
        assert_eq!(graph.components.len(), 1);
        assert_eq!(graph.audit.max_component_size, 3);
        assert_eq!(graph.audit.unmatched_junctions, vec![0]);
        assert!(!graph.audit.passed);
    }

    #[test]
    fn singular_lines_pair_points_of_one_lift() {
        let trib = tribonacci();
        let seeds = crate::boundary::default_seeds(trib.alphabet(), 1);
        let fps = crate::boundary::collect_attracting_points(
            &trib,
            0,
            &seeds,
            &ConvergenceOpts::default(),
        )
        .unwrap();
        let n = fps.lifts[0].points.len();
        assert!(n >= 2, "expected several trivial-lift points, got {n}");
        let lines = assemble_singular_lines(&fps, 2);
        assert_eq!(lines.len(), n * (n - 1) / 2);
        for line in &lines {
            assert_eq!(
                same_point(&line.ends.0, &line.ends.1, fps.merge_depth),
                PointCmp::Distinct
            );
            assert_eq!(line.classification, LineClass::FixPlusJoining);
            // junction-reduced: the connector never cancels into either ray
            let p1 = line.ends.0.prefix().first().unwrap();
            let q1 = line.ends.1.prefix().first().unwrap();
            match line.witness.len() {
                0 => assert_ne!(p1, q1),
                _ => {
                    assert_ne!(line.witness.first().unwrap(), p1);
                    assert_ne!(line.witness.last().unwrap().inverse(), q1);
                }
            }
        }
    }

    #[test]
    fn singular_lines_need_two_points_on_a_shared_lift() {
        let single = FixedPointSet {
            rank: 3,
            merge_depth: 4,
            lifts: vec![LiftPoints {
                twist: ReducedWord::identity(),
                points: vec![synthetic_point("abab")],
                principal_heuristic: false,
            }],
            budget_skips: Vec::new(),
        };
        assert!(assemble_singular_lines(&single, 2).is_empty());

        let split_lifts = FixedPointSet {
            rank: 3,
            merge_depth: 4,
            lifts: vec![
                LiftPoints {
                    twist: ReducedWord::identity(),
                    points: vec![synthetic_point("abab")],
                    principal_heuristic: false,
                },
                LiftPoints {
                    twist: rw("b"),
                    points: vec![synthetic_point("cccc")],
                    principal_heuristic: false,
                },
            ],
            budget_skips: Vec::new(),
        };
        assert!(assemble_singular_lines(&split_lifts, 2).is_empty());
    }

    #[test]
    fn connector_search_avoids_cancellation() {
        // both points start with 'a', so the empty connector would cancel;
        // the shortest valid connector is the first letter not in {a, A}
        let fps = FixedPointSet {
            rank: 3,
            merge_depth: 4,
            lifts: vec![LiftPoints {
                twist: ReducedWord::identity(),
                points: vec![synthetic_point("abab"), synthetic_point("acac")],
                principal_heuristic: true,
            }],
            budget_skips: Vec::new(),
        };
        let lines = assemble_singular_lines(&fps, 2);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].witness, rw("b"));
    }
}
