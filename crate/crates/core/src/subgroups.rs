//! Stallings graphs of finitely generated subgroups and the quasiconvexity
//! obstruction test built on them.
//!
//! A subgroup is held as its folded core automaton rooted at a base state:
//! membership is a closed path at the base, a complete transition table is
//! finite index, and the two carrying checks read boundary data through the
//! automaton. [`carries_ray`] reads a single stable prefix from the base;
//! [`carries_leaf`] looks for long reduced paths, anywhere in the graph,
//! whose sliding windows all belong to a lamination fingerprint. The
//! combined [`qc_verdict`] is one-sided: a carried point or leaf refutes
//! quasiconvexity, while a clean scan only reports that no obstruction was
//! found within the budgets.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automorphism::{AutError, Automorphism};
use crate::boundary::{
    collect_attracting_points, default_seeds, BoundaryError, BoundaryPrefix, ConvergenceOpts,
};
use crate::cannon_thurston::{is_inverse_pair, Direction};
use crate::dynamics::{certify_hyperbolicity, HyperbolicityVerdict};
use crate::laminations::{generator_fingerprints, LamError, LaminationFingerprint};
use crate::words::{Alphabet, CyclicWord, Letter, ReducedWord, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubgroupError {
    #[error("subgroup has finite index, so the quasiconvexity question is trivial")]
    FiniteIndex,
    #[error("the two automorphisms are not inverse to each other")]
    NotInverse,
    #[error("not hyperbolic: [{witness}] returns to itself with period {period}")]
    NotHyperbolic { witness: CyclicWord, period: usize },
    #[error("subgroup automaton has rank {graph} but the automorphism acts on rank {automorphism}")]
    RankMismatch { graph: usize, automorphism: usize },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Aut(AutError),
    #[error(transparent)]
    Boundary(BoundaryError),
    #[error(transparent)]
    Lam(LamError),
}

/// Word-level failures inside wrapped errors surface as `Word` so callers
/// can match on length budgets directly.
fn flatten_aut(e: AutError) -> SubgroupError {
    match e {
        AutError::Word(w) => SubgroupError::Word(w),
        other => SubgroupError::Aut(other),
    }
}

fn flatten_boundary(e: BoundaryError) -> SubgroupError {
    match e {
        BoundaryError::Word(w) => SubgroupError::Word(w),
        other => SubgroupError::Boundary(other),
    }
}

fn flatten_lam(e: LamError) -> SubgroupError {
    match e {
        LamError::Word(w) => SubgroupError::Word(w),
        other => SubgroupError::Lam(other),
    }
}

/// Folded core automaton of a finitely generated subgroup, rooted at base
/// state 0. An edge s --l--> t is always stored together with its reverse
/// t --l⁻¹--> s, at most one target per state and letter, and every
/// non-base state touches at least two edge ends. States are numbered in
/// breadth-first order from the base with letters in slot order, so equal
/// subgroups build equal values regardless of how the generators were
/// listed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallingsGraph {
    rank: usize,
    transitions: Vec<Vec<Option<usize>>>,
}

impl StallingsGraph {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn states(&self) -> usize {
        self.transitions.len()
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn transition(&self, state: usize, l: Letter) -> Option<usize> {
        self.transitions[state][l.slot()]
    }

    /// Every letter reads from every state. For the core automaton of a
    /// finitely generated subgroup this is equivalent to finite index.
    pub fn is_complete(&self) -> bool {
        self.transitions.iter().all(|row| row.iter().all(|t| t.is_some()))
    }

    /// True exactly when `w` labels a closed path at the base state.
    pub fn membership(&self, w: &ReducedWord) -> bool {
        self.read(self.base(), w.letters()) == Ok(self.base())
    }

    /// Follows `letters` from `from`; the error value is the index of the
    /// first letter with no transition.
    fn read(&self, from: usize, letters: &[Letter]) -> Result<usize, usize> {
        let mut state = from;
        for (i, &l) in letters.iter().enumerate() {
            match self.transitions[state][l.slot()] {
                Some(t) => state = t,
                None => return Err(i),
            }
        }
        Ok(state)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of two roots; the smaller index wins, which keeps
    /// state 0 a root forever.
    fn union(&mut self, a: usize, b: usize) -> (usize, usize) {
        let (win, lose) = (a.min(b), a.max(b));
        self.parent[lose] = win;
        (win, lose)
    }
}

/// Builds the folded core automaton of ⟨gens⟩. Empty generators are
/// skipped; the trivial subgroup yields a single edgeless state.
pub fn stallings_graph(gens: &[ReducedWord], alphabet: &Alphabet) -> StallingsGraph {
    let deg = 2 * alphabet.rank();

    // Wedge of generator loops at the base, kept as an edge multiset with
    // both orientations of every edge.
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for g in gens {
        let n = g.len();
        let mut prev = 0;
        for (i, &l) in g.letters().iter().enumerate() {
            let next = if i + 1 == n {
                0
            } else {
                adj.push(Vec::new());
                adj.len() - 1
            };
            adj[prev].push((l.slot(), next));
            adj[next].push((l.inverse().slot(), prev));
            prev = next;
        }
    }

    // Fold: while some state reads one letter toward two distinct classes,
    // merge those classes. The scan restarts after each merge, which is
    // quadratic but the graphs here are generator-sized.
    let mut uf = UnionFind::new(adj.len());
    loop {
        let mut conflict = None;
        'scan: for s in 0..adj.len() {
            if uf.find(s) != s || adj[s].is_empty() {
                continue;
            }
            let mut seen: Vec<Option<usize>> = vec![None; deg];
            for &(slot, raw_target) in &adj[s] {
                let t = uf.find(raw_target);
                match seen[slot] {
                    None => seen[slot] = Some(t),
                    Some(u) if u == t => {}
                    Some(u) => {
                        conflict = Some((u, t));
                        break 'scan;
                    }
                }
            }
        }
        let Some((u, t)) = conflict else { break };
        let (win, lose) = uf.union(u, t);
        let moved = std::mem::take(&mut adj[lose]);
        adj[win].extend(moved);
    }

    // Deterministic table over fold classes.
    let n = adj.len();
    let mut table: Vec<Vec<Option<usize>>> = vec![vec![None; deg]; n];
    for s in 0..n {
        let r = uf.find(s);
        for i in 0..adj[s].len() {
            let (slot, raw_target) = adj[s][i];
            let t = uf.find(raw_target);
            table[r][slot] = Some(t);
        }
    }

    // Core: strip non-base states that touch at most one edge end.
    let mut alive: Vec<bool> = (0..n).map(|s| uf.find(s) == s).collect();
    loop {
        let mut removed = false;
        for s in 1..n {
            if !alive[s] {
                continue;
            }
            let defined: Vec<usize> = (0..deg).filter(|&k| table[s][k].is_some()).collect();
            if defined.len() <= 1 {
                if let Some(&k) = defined.first() {
                    let t = table[s][k].unwrap();
                    let back = Letter::from_slot(k).inverse().slot();
                    if table[t][back] == Some(s) {
                        table[t][back] = None;
                    }
                }
                alive[s] = false;
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }

    // Canonical numbering: breadth-first from the base, letters in slot
    // order. Folding and pruning keep the graph connected, so this visits
    // every live state.
    let mut new_id: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order: Vec<usize> = vec![0];
    new_id.insert(0, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        for slot in 0..deg {
            if let Some(t) = table[s][slot] {
                debug_assert!(alive[t]);
                if !new_id.contains_key(&t) {
                    new_id.insert(t, order.len());
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
    }
    debug_assert_eq!(order.len(), alive.iter().filter(|&&a| a).count());

    let transitions = order
        .iter()
        .map(|&s| (0..deg).map(|slot| table[s][slot].map(|t| new_id[&t])).collect())
        .collect();
    StallingsGraph { rank: alphabet.rank(), transitions }
}

/// An incomplete core automaton is exactly an infinite-index subgroup.
pub fn has_infinite_index(g: &StallingsGraph) -> bool {
    !g.is_complete()
}

/// Outcome of reading one boundary point through a subgroup automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "carriage")]
pub enum RayVerdict {
    /// The whole recorded prefix reads from the base state.
    Carried,
    /// Reading fails at letter `fail_pos`, inside the guaranteed depth.
    NotCarried { fail_pos: usize },
    /// Reading fails only past the guaranteed depth, where the recorded
    /// letters are heuristic; a deeper point is needed to decide.
    Undetermined { fail_pos: usize },
}

pub fn carries_ray(g: &StallingsGraph, p: &BoundaryPrefix) -> RayVerdict {
    match g.read(g.base(), p.prefix().letters()) {
        Ok(_) => RayVerdict::Carried,
        Err(pos) if pos < p.depth() => RayVerdict::NotCarried { fail_pos: pos },
        Err(pos) => RayVerdict::Undetermined { fail_pos: pos },
    }
}

/// Outcome of scanning a subgroup automaton for leaf segments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "carriage")]
pub enum LeafVerdict {
    /// Some reduced path of length `window` reads in the graph, starting
    /// anywhere, with every length-k sliding window inside the fingerprint;
    /// `example` is one such path label.
    CarriesLongSegments { example: ReducedWord },
    /// Every such path dies first; `longest` is the length reached.
    No { longest: usize },
}

/// Searches for fingerprint-legal reduced paths of length `window`. The
/// walk state is (automaton state, recent letters), where the memory keeps
/// the last k−1 letters (at least one, so immediate backtracking is always
/// blocked); each step that completes k letters must land its window in
/// `fp`. Layers are explored by path length with parent links, so the
/// returned example is the lexicographically least among shortest-layer
/// representatives and runs are reproducible.
pub fn carries_leaf(
    g: &StallingsGraph,
    fp: &LaminationFingerprint,
    window: usize,
) -> LeafVerdict {
    let k = fp.k();
    let deg = 2 * g.rank();
    let memory = k.saturating_sub(1).max(1);

    type Node = (usize, Vec<Letter>);
    type Layer = BTreeMap<Node, Option<(Node, Letter)>>;
    let mut layers: Vec<Layer> = Vec::new();
    let mut start: Layer = BTreeMap::new();
    for s in 0..g.states() {
        start.insert((s, Vec::new()), None);
    }
    layers.push(start);

    for step in 1..=window {
        let mut next: Layer = BTreeMap::new();
        for (state, tail) in layers[step - 1].keys() {
            for slot in 0..deg {
                let l = Letter::from_slot(slot);
                if tail.last() == Some(&l.inverse()) {
                    continue;
                }
                let Some(t) = g.transitions[*state][slot] else { continue };
                let mut grown = tail.clone();
                grown.push(l);
                if grown.len() >= k && !fp.contains(&word_from(&grown[grown.len() - k..])) {
                    continue;
                }
                while grown.len() > memory {
                    grown.remove(0);
                }
                next.entry((t, grown))
                    .or_insert_with(|| Some(((*state, tail.clone()), l)));
            }
        }
        if next.is_empty() {
            return LeafVerdict::No { longest: step - 1 };
        }
        layers.push(next);
    }

    let (final_node, _) = layers[window].iter().next().expect("non-empty layer");
    let mut letters: Vec<Letter> = Vec::new();
    let mut node = final_node.clone();
    for depth in (1..=window).rev() {
        let Some((prev, l)) = layers[depth][&node].clone() else { break };
        letters.push(l);
        node = prev;
    }
    letters.reverse();
    LeafVerdict::CarriesLongSegments { example: ReducedWord::from_letters(letters) }
}

fn word_from(letters: &[Letter]) -> ReducedWord {
    ReducedWord::from_letters(letters.iter().copied())
}

/// Budgets for [`qc_verdict`]. The fixed-point side reuses the boundary
/// collection knobs; the leaf side reads fingerprints at `k_leaf` and asks
/// for segments of length `leaf_window`, which must be at least `k_leaf`
/// for the window constraint to bind.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QcBudgets {
    pub twist_bound: usize,
    pub seed_len: usize,
    pub guard_max_class_len: usize,
    pub guard_max_period: usize,
    pub k_leaf: usize,
    pub leaf_window: usize,
    pub stabilization_budget: usize,
    pub conv: ConvergenceOpts,
}

impl Default for QcBudgets {
    fn default() -> QcBudgets {
        QcBudgets {
            twist_bound: 2,
            seed_len: 2,
            guard_max_class_len: 4,
            guard_max_period: 4,
            k_leaf: 8,
            leaf_window: 20,
            stabilization_budget: 20,
            conv: ConvergenceOpts::default(),
        }
    }
}

/// Concrete evidence against quasiconvexity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "witness")]
pub enum QcWitness {
    /// A collected attracting fixed point whose stable prefix reads fully
    /// from the base state.
    CarriedFixedPoint { direction: Direction, point: BoundaryPrefix },
    /// A fingerprint-legal segment of the requested length reads inside
    /// the subgroup automaton.
    CarriedLeafSegments { direction: Direction, k: usize, example: ReducedWord },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum QcVerdict {
    NotQuasiconvex { witness: QcWitness },
    /// One-sided conclusion: nothing collected within the budgets is
    /// carried. Not a proof of quasiconvexity.
    NoObstructionFound {
        points_checked: usize,
        fingerprints_checked: usize,
        k_leaf: usize,
        leaf_window: usize,
    },
}

/// Tests ⟨gens⟩ against the dynamics of `phi` in both directions. The pair
/// must verify as mutually inverse, the subgroup must have infinite index,
/// and a periodic-class scan must come back clean before any boundary data
/// is trusted. Fixed points are checked before leaf segments, forward
/// direction before backward, in collection order, and the first carried
/// object is returned as the witness.
pub fn qc_verdict(
    g: &StallingsGraph,
    phi: &Automorphism,
    phi_inv: &Automorphism,
    budgets: &QcBudgets,
) -> Result<QcVerdict, SubgroupError> {
    if g.rank() != phi.alphabet().rank() {
        return Err(SubgroupError::RankMismatch {
            graph: g.rank(),
            automorphism: phi.alphabet().rank(),
        });
    }
    if !is_inverse_pair(phi, phi_inv, budgets.conv.max_word_len) {
        return Err(SubgroupError::NotInverse);
    }
    if !has_infinite_index(g) {
        return Err(SubgroupError::FiniteIndex);
    }
    match certify_hyperbolicity(
        phi,
        budgets.guard_max_class_len,
        budgets.guard_max_period,
        budgets.conv.max_word_len,
    )
    .map_err(flatten_aut)?
    {
        HyperbolicityVerdict::NotHyperbolic { witness, period } => {
            return Err(SubgroupError::NotHyperbolic { witness, period });
        }
        HyperbolicityVerdict::NoObstructionFound { .. } => {}
    }

    let seeds = default_seeds(phi.alphabet(), budgets.seed_len);
    let directions = [(Direction::Forward, phi), (Direction::Backward, phi_inv)];

    let mut points_checked = 0;
    for (direction, aut) in directions {
        let fps = collect_attracting_points(aut, budgets.twist_bound, &seeds, &budgets.conv)
            .map_err(flatten_boundary)?;
        for point in fps.all_points() {
            points_checked += 1;
            if carries_ray(g, point) == RayVerdict::Carried {
                return Ok(QcVerdict::NotQuasiconvex {
                    witness: QcWitness::CarriedFixedPoint { direction, point: point.clone() },
                });
            }
        }
    }

    let mut fingerprints_checked = 0;
    for (direction, aut) in directions {
        let prints = generator_fingerprints(
            aut,
            budgets.k_leaf,
            budgets.stabilization_budget,
            budgets.conv.max_word_len,
        )
        .map_err(flatten_lam)?;
        for fp in &prints {
            fingerprints_checked += 1;
            if let LeafVerdict::CarriesLongSegments { example } =
                carries_leaf(g, fp, budgets.leaf_window.max(budgets.k_leaf))
            {
                return Ok(QcVerdict::NotQuasiconvex {
                    witness: QcWitness::CarriedLeafSegments { direction, k: fp.k(), example },
                });
            }
        }
    }

    Ok(QcVerdict::NoObstructionFound {
        points_checked,
        fingerprints_checked,
        k_leaf: budgets.k_leaf,
        leaf_window: budgets.leaf_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::TwistedLift;
    use crate::boundary::{iterate_to_fixed_point, Provenance};
    use crate::laminations::{lamination_fingerprint, FingerprintSource};
    use crate::words::DEFAULT_MAX_WORD_LEN;
    use std::collections::BTreeSet;

    const MAX: usize = DEFAULT_MAX_WORD_LEN;

    fn alpha(rank: usize) -> Alphabet {
        Alphabet::new(rank).unwrap()
    }

    fn rw(s: &str) -> ReducedWord {
        ReducedWord::parse(s, &alpha(26)).unwrap()
    }

    fn graph(gens: &[&str], rank: usize) -> StallingsGraph {
        let gens: Vec<ReducedWord> = gens.iter().map(|s| rw(s)).collect();
        stallings_graph(&gens, &alpha(rank))
    }

    fn tribonacci() -> Automorphism {
        Automorphism::parse("a->ab; b->ac; c->a").unwrap()
    }

    fn tribonacci_inverse() -> Automorphism {
        Automorphism::parse("a->c; b->Ca; c->Cb").unwrap()
    }

    fn point(prefix: &str, depth: usize) -> BoundaryPrefix {
        BoundaryPrefix::from_parts(
            rw(prefix),
            depth,
            Provenance { twist: ReducedWord::identity(), seed: rw("a"), power: 1 },
        )
    }

    fn synthetic_fp(k: usize, positives: &[&str]) -> LaminationFingerprint {
        let mut subwords: BTreeSet<ReducedWord> = BTreeSet::new();
        for s in positives {
            subwords.insert(rw(s));
            subwords.insert(rw(s).inverse());
        }
        LaminationFingerprint::from_parts(
            k,
            subwords,
            FingerprintSource {
                automorphism: "a->a; b->b".into(),
                generator: Letter::from_char('a').unwrap(),
                stabilized_at: 0,
            },
        )
    }

    #[test]
    fn squares_subgroup_has_three_states() {
        let g = graph(&["aa", "bb"], 2);
        assert_eq!(g.states(), 3);
        assert!(g.membership(&rw("aa")));
        assert!(g.membership(&rw("aabb")));
        assert!(g.membership(&rw("aaBB")));
        assert!(!g.membership(&rw("a")));
        assert!(!g.membership(&rw("ab")));
        assert!(!g.is_complete());
        assert!(has_infinite_index(&g));
    }

    #[test]
    fn single_generator_loop_reads_inverses() {
        let g = graph(&["a"], 3);
        assert_eq!(g.states(), 1);
        assert!(g.membership(&rw("A")));
        assert!(g.membership(&rw("aaa")));
        assert!(!g.membership(&rw("b")));
        assert!(has_infinite_index(&g));
    }

    #[test]
    fn whole_group_bouquet_is_complete() {
        let g = graph(&["a", "b", "c"], 3);
        assert_eq!(g.states(), 1);
        assert!(g.is_complete());
        assert!(!has_infinite_index(&g));
        assert!(g.membership(&rw("abC")));
    }

    #[test]
    fn conjugated_generator_folds_to_two_states() {
        let g = graph(&["abA"], 2);
        assert_eq!(g.states(), 2);
        assert!(g.membership(&rw("abA")));
        assert!(g.membership(&rw("abbA")));
        assert!(!g.membership(&rw("ab")));
        assert!(!g.membership(&rw("b")));
    }

    #[test]
    fn folding_discovers_the_whole_group() {
        // ⟨a, ba⟩ = ⟨a, b⟩: the fold has to chase an inverse-direction
        // conflict at the base.
        let g = graph(&["a", "ba"], 2);
        assert_eq!(g.states(), 1);
        assert!(g.is_complete());
        assert!(g.membership(&rw("b")));
    }

    #[test]
    fn folding_is_order_independent() {
        let sets: [&[&str]; 3] = [&["ab", "ac", "aa"], &["aa", "bb"], &["abA", "acA"]];
        for gens in sets {
            let reference = graph(gens, 3);
            let mut rotated: Vec<&str> = gens.to_vec();
            rotated.rotate_left(1);
            assert_eq!(graph(&rotated, 3), reference);
            let mut reversed: Vec<&str> = gens.to_vec();
            reversed.reverse();
            assert_eq!(graph(&reversed, 3), reference);
        }
        // Redundant generators fold away entirely.
        assert_eq!(graph(&["aa", "aaa"], 2), graph(&["a"], 2));
    }

    #[test]
    fn carries_ray_distinguishes_depth_guarantee() {
        let g = graph(&["aa", "bb"], 2);
        assert_eq!(carries_ray(&g, &point("aaaaaaaaaaaaaaaa", 16)), RayVerdict::Carried);
        // The failing letter sits inside the guarantee.
        assert_eq!(carries_ray(&g, &point("aba", 3)), RayVerdict::NotCarried { fail_pos: 1 });
        // The same failure past the guarantee stays open.
        assert_eq!(carries_ray(&g, &point("aaba", 3)), RayVerdict::Undetermined { fail_pos: 3 });
    }

    #[test]
    fn tribonacci_ray_leaves_the_rank_two_subgroup() {
        let lift = TwistedLift::trivial(tribonacci());
        let p = iterate_to_fixed_point(&lift, &rw("a"), &ConvergenceOpts::default()).unwrap();
        let g = graph(&["a", "b"], 3);
        // abac…: the first c has no transition.
        assert_eq!(carries_ray(&g, &p), RayVerdict::NotCarried { fail_pos: 3 });
    }

    #[test]
    fn complete_bouquet_carries_fingerprint_segments() {
        let g = graph(&["a", "b", "c"], 3);
        let fp = lamination_fingerprint(
            &tribonacci(),
            Letter::from_char('a').unwrap(),
            2,
            20,
            MAX,
        )
        .unwrap();
        match carries_leaf(&g, &fp, 12) {
            LeafVerdict::CarriesLongSegments { example } => {
                assert_eq!(example.len(), 12);
                for sub in example.subwords(2) {
                    assert!(fp.contains(&word_from(sub)));
                }
            }
            other => panic!("expected CarriesLongSegments, got {other:?}"),
        }
    }

    #[test]
    fn loops_carry_only_matching_fingerprints() {
        let fp_aa = synthetic_fp(2, &["aa"]);
        let a_loop = graph(&["a"], 2);
        assert!(matches!(
            carries_leaf(&a_loop, &fp_aa, 10),
            LeafVerdict::CarriesLongSegments { .. }
        ));
        // A b-loop offers only bb windows, so paths die at one letter.
        let b_loop = graph(&["b"], 2);
        assert_eq!(carries_leaf(&b_loop, &fp_aa, 10), LeafVerdict::No { longest: 1 });
    }

    #[test]
    fn leaf_verdict_depends_on_window_length() {
        // Sliding windows of length 2 over {a,b} paths stay inside the
        // Tribonacci fingerprint (ababab… never needs a c), so short
        // windows cannot separate this subgroup from the lamination.
        let g = graph(&["a", "b"], 3);
        let fp2 = lamination_fingerprint(
            &tribonacci(),
            Letter::from_char('a').unwrap(),
            2,
            20,
            MAX,
        )
        .unwrap();
        assert!(matches!(
            carries_leaf(&g, &fp2, 20),
            LeafVerdict::CarriesLongSegments { .. }
        ));
        // At k = 8 every legal window contains a c, because the fixed word
        // never runs seven letters without one; c-free paths die as soon as
        // their first full window closes.
        let fp8 = lamination_fingerprint(
            &tribonacci(),
            Letter::from_char('a').unwrap(),
            8,
            20,
            MAX,
        )
        .unwrap();
        assert_eq!(carries_leaf(&g, &fp8, 20), LeafVerdict::No { longest: 7 });
    }

    #[test]
    fn qc_refuses_degenerate_inputs() {
        let trib = tribonacci();
        let inv = tribonacci_inverse();
        let budgets = QcBudgets::default();

        let whole = graph(&["a", "b", "c"], 3);
        assert_eq!(
            qc_verdict(&whole, &trib, &inv, &budgets),
            Err(SubgroupError::FiniteIndex)
        );

        let g = graph(&["a", "b"], 3);
        assert_eq!(qc_verdict(&g, &trib, &trib, &budgets), Err(SubgroupError::NotInverse));

        let id = Automorphism::identity(alpha(3));
        match qc_verdict(&g, &id, &id, &budgets) {
            Err(SubgroupError::NotHyperbolic { period, .. }) => assert_eq!(period, 1),
            other => panic!("expected NotHyperbolic, got {other:?}"),
        }

        let rank_two = graph(&["a", "b"], 2);
        assert!(matches!(
            qc_verdict(&rank_two, &trib, &inv, &budgets),
            Err(SubgroupError::RankMismatch { graph: 2, automorphism: 3 })
        ));
    }

    #[test]
    fn rank_two_subgroup_passes_one_sided_test() {
        let budgets = QcBudgets { twist_bound: 1, seed_len: 1, ..QcBudgets::default() };
        let g = graph(&["a", "b"], 3);
        match qc_verdict(&g, &tribonacci(), &tribonacci_inverse(), &budgets).unwrap() {
            QcVerdict::NoObstructionFound { points_checked, fingerprints_checked, .. } => {
                assert!(points_checked > 0);
                // All three generators share one fingerprint per direction.
                assert_eq!(fingerprints_checked, 2);
            }
            other => panic!("expected NoObstructionFound, got {other:?}"),
        }
    }

    #[test]
    fn carried_fixed_point_defeats_quasiconvexity() {
        let budgets = QcBudgets { twist_bound: 1, seed_len: 1, ..QcBudgets::default() };
        let trib = tribonacci();
        let lift = TwistedLift::trivial(trib.clone());
        let p = iterate_to_fixed_point(&lift, &rw("a"), &budgets.conv).unwrap();

        // One loop spelling the full recorded prefix: the point reads
        // around the loop exactly once, so it is carried by construction.
        let loop_word = p.prefix().clone();
        let g = stallings_graph(&[loop_word.clone()], &alpha(3));
        assert!(has_infinite_index(&g));

        match qc_verdict(&g, &trib, &tribonacci_inverse(), &budgets).unwrap() {
            QcVerdict::NotQuasiconvex {
                witness: QcWitness::CarriedFixedPoint { direction, point },
            } => {
                assert_eq!(direction, Direction::Forward);
                assert_eq!(point.prefix(), &loop_word);
            }
            other => panic!("expected a carried fixed point, got {other:?}"),
        }

        // The same subgroup also carries leaf segments of the forward
        // lamination: the loop label is a run of the fixed word.
        let fp2 = lamination_fingerprint(
            &trib,
            Letter::from_char('a').unwrap(),
            2,
            20,
            MAX,
        )
        .unwrap();
        assert!(matches!(
            carries_leaf(&g, &fp2, 20),
            LeafVerdict::CarriesLongSegments { .. }
        ));
    }
}
