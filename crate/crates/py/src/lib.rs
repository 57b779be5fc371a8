//! Python bindings for the core word, automorphism, and dynamics pipelines.
//!
//! Scalar results cross the boundary natively. Structured reports (verdicts,
//! fixed-point sets, fingerprints, limit lines, identification graphs) cross
//! as JSON strings in the same shape the CLI reports embed, so callers can
//! `json.loads` them directly.
//!
//! Budget exhaustion raises `RuntimeError` (retry with larger bounds); every
//! other failure is a property of the arguments and raises `ValueError`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use fgdyn_core::automorphism::{AutError, Automorphism as CoreAutomorphism};
use fgdyn_core::boundary::{self, BoundaryError, ConvergenceOpts};
use fgdyn_core::cannon_thurston::{self, CtBudgets, CtError};
use fgdyn_core::dynamics::{self, HyperbolicityVerdict};
use fgdyn_core::laminations::{self, LamError, LaminationContext};
use fgdyn_core::subgroups::{self, QcBudgets, SubgroupError};
use fgdyn_core::words::{
    Alphabet, CyclicWord, ReducedWord, WordError, DEFAULT_MAX_WORD_LEN, MAX_RANK,
};

const MAX: usize = DEFAULT_MAX_WORD_LEN;

fn word_err(e: WordError) -> PyErr {
    match e {
        WordError::LengthBudget { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn aut_err(e: AutError) -> PyErr {
    match e {
        AutError::Word(w) => word_err(w),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn boundary_err(e: BoundaryError) -> PyErr {
    match e {
        BoundaryError::Word(w) => word_err(w),
        BoundaryError::Aut(a) => aut_err(a),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn lam_err(e: LamError) -> PyErr {
    match e {
        LamError::Word(w) => word_err(w),
        LamError::Aut(a) => aut_err(a),
        LamError::Boundary(b) => boundary_err(b),
        LamError::NotAGenerator { .. } => PyValueError::new_err(e.to_string()),
        LamError::NoStabilization { .. } => PyRuntimeError::new_err(e.to_string()),
    }
}

fn ct_err(e: CtError) -> PyErr {
    match e {
        CtError::Lam(l) => lam_err(l),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn subgroup_err(e: SubgroupError) -> PyErr {
    match e {
        SubgroupError::Word(w) => word_err(w),
        SubgroupError::Aut(a) => aut_err(a),
        SubgroupError::Boundary(b) => boundary_err(b),
        SubgroupError::Lam(l) => lam_err(l),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize without error")
}

/// Letter names are permissive on the Python side: words parse over the full
/// rank-26 alphabet and automorphisms pin ranks where it matters.
fn full_alphabet() -> Alphabet {
    Alphabet::new(MAX_RANK).expect("rank 26 is in range")
}

fn conv(depth: usize, max_iterations: usize) -> ConvergenceOpts {
    ConvergenceOpts {
        target_depth: depth,
        max_iterations,
        max_word_len: MAX,
        ..ConvergenceOpts::default()
    }
}

/// Refuses inputs the orbit pipelines are not meaningful for, mirroring the
/// core guards in the Cannon-Thurston and quasiconvexity entry points.
fn require_hyperbolic(phi: &CoreAutomorphism) -> PyResult<()> {
    match dynamics::certify_hyperbolicity(phi, 4, 4, MAX).map_err(aut_err)? {
        HyperbolicityVerdict::NotHyperbolic { witness, period } => Err(PyValueError::new_err(
            format!("not hyperbolic: [{witness}] returns to itself with period {period}"),
        )),
        HyperbolicityVerdict::NoObstructionFound { .. } => Ok(()),
    }
}

/// A freely reduced word. Lowercase letters are generators, uppercase their
/// inverses: `"aBc"` is a * b^-1 * c.
#[pyclass(frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    inner: ReducedWord,
}

#[pymethods]
impl Word {
    /// Parses `text` and freely reduces it; `""` is the identity.
    #[new]
    fn new(text: &str) -> PyResult<Word> {
        let inner = ReducedWord::parse(text, &full_alphabet()).map_err(word_err)?;
        Ok(Word { inner })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Word({:?})", self.inner.to_string())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Reversed word with every letter inverted.
    fn inverse(&self) -> Word {
        Word { inner: self.inner.inverse() }
    }

    /// Concatenation followed by free reduction.
    fn __mul__(&self, other: &Word) -> PyResult<Word> {
        let inner = self.inner.concat_checked(&other.inner, MAX).map_err(word_err)?;
        Ok(Word { inner })
    }

    fn concat(&self, other: &Word) -> PyResult<Word> {
        self.__mul__(other)
    }

    /// g * self * g^-1, reduced.
    fn conjugate_by(&self, g: &Word) -> Word {
        Word { inner: self.inner.conjugate_by(&g.inner) }
    }

    /// The conjugacy class this word represents.
    fn cyclic(&self) -> CyclicClass {
        CyclicClass { inner: CyclicWord::from_word(&self.inner).0 }
    }
}

/// A conjugacy class, stored as the least rotation of the cyclic reduction,
/// so equal values mean conjugate words.
#[pyclass(frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CyclicClass {
    inner: CyclicWord,
}

#[pymethods]
impl CyclicClass {
    /// Parses a representative word and takes its class.
    #[new]
    fn new(text: &str) -> PyResult<CyclicClass> {
        let inner = CyclicWord::parse(text, &full_alphabet()).map_err(word_err)?;
        Ok(CyclicClass { inner })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("CyclicClass({:?})", self.inner.to_string())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// The class of the inverse word.
    fn inverse(&self) -> CyclicClass {
        CyclicClass { inner: self.inner.inverse() }
    }

    /// The canonical rotation as a plain word.
    fn to_word(&self) -> Word {
        Word { inner: self.inner.to_word() }
    }
}

/// A free-group automorphism given by generator images, with an optional
/// verified inverse attached.
#[pyclass(frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct Automorphism {
    inner: CoreAutomorphism,
}

impl Automorphism {
    /// The map with an inverse attached: the embedded one when present,
    /// otherwise found by Nielsen reduction.
    fn ensured(&self) -> PyResult<CoreAutomorphism> {
        self.inner.with_verified_inverse(MAX).map_err(aut_err)
    }

    fn resolved_inverse(&self, explicit: Option<&Automorphism>) -> PyResult<CoreAutomorphism> {
        match explicit {
            Some(inv) => Ok(inv.inner.clone()),
            None => Ok(self.ensured()?.inverse().expect("inverse was just attached")),
        }
    }
}

#[pymethods]
impl Automorphism {
    /// Parses clauses like `"a->ab; b->a"` separated by `;` or newlines. The
    /// rank is inferred from the letters that appear. An optional block after
    /// an `inverse:` marker attaches a verified inverse.
    #[new]
    fn new(text: &str) -> PyResult<Automorphism> {
        let inner = CoreAutomorphism::parse(text).map_err(aut_err)?;
        Ok(Automorphism { inner })
    }

    #[staticmethod]
    fn identity(rank: usize) -> PyResult<Automorphism> {
        let alphabet = Alphabet::new(rank).map_err(word_err)?;
        Ok(Automorphism { inner: CoreAutomorphism::identity(alphabet) })
    }

    fn rank(&self) -> usize {
        self.inner.alphabet().rank()
    }

    /// Canonical clause text; parsing it back yields an equal value.
    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Automorphism({:?})", self.inner.to_text())
    }

    fn is_identity(&self) -> bool {
        self.inner.is_identity()
    }

    /// Image of a word, freely reduced.
    fn apply(&self, w: &Word) -> PyResult<Word> {
        let inner = self.inner.apply(&w.inner, MAX).map_err(aut_err)?;
        Ok(Word { inner })
    }

    /// Image of a conjugacy class.
    fn apply_cyclic(&self, c: &CyclicClass) -> PyResult<CyclicClass> {
        let inner = self.inner.apply_cyclic(&c.inner, MAX).map_err(aut_err)?;
        Ok(CyclicClass { inner })
    }

    /// self after other: `compose(other).apply(w) == apply(other.apply(w))`.
    fn compose(&self, other: &Automorphism) -> PyResult<Automorphism> {
        if self.inner.alphabet() != other.inner.alphabet() {
            return Err(PyValueError::new_err(format!(
                "composition needs a common alphabet (ranks {} and {})",
                self.rank(),
                other.rank()
            )));
        }
        let inner = self.inner.compose(&other.inner, MAX).map_err(aut_err)?;
        Ok(Automorphism { inner })
    }

    /// n-fold composite; negative n uses the inverse, searching for one if
    /// none is attached.
    fn power(&self, n: i64) -> PyResult<Automorphism> {
        let base = if n < 0 { self.ensured()? } else { self.inner.clone() };
        let inner = base.power(n, MAX).map_err(aut_err)?;
        Ok(Automorphism { inner })
    }

    /// The inverse automorphism: the embedded one when present, otherwise
    /// found by Nielsen reduction.
    fn inverse(&self) -> PyResult<Automorphism> {
        let inner = self.ensured()?.inverse().expect("inverse was just attached");
        Ok(Automorphism { inner })
    }
}

/// Scans conjugacy classes up to `max_class_len` for orbits of period up to
/// `max_period`. Returns a JSON verdict: either the shortest periodic class
/// with its period, or the scan bounds that came back clean.
#[pyfunction]
#[pyo3(signature = (phi, max_class_len = 5, max_period = 5))]
fn certify_hyperbolicity(
    phi: &Automorphism,
    max_class_len: usize,
    max_period: usize,
) -> PyResult<String> {
    let verdict = dynamics::certify_hyperbolicity(&phi.inner, max_class_len, max_period, MAX)
        .map_err(aut_err)?;
    Ok(json(&verdict))
}

/// Cyclic lengths of one orbit plus a growth-rate estimate, as JSON with
/// fields `class`, `lengths`, and `estimated_rate`.
#[pyfunction]
#[pyo3(signature = (phi, cls, iterations = 20))]
fn growth_profile(phi: &Automorphism, cls: &CyclicClass, iterations: usize) -> PyResult<String> {
    let profile =
        dynamics::growth_profile(&phi.inner, &cls.inner, iterations, MAX).map_err(aut_err)?;
    Ok(json(&profile))
}

/// Attracting boundary fixed points over lift twists up to `twist_bound`,
/// with the word-count audit. JSON object with `fixed_points` and `gjll`.
#[pyfunction]
#[pyo3(signature = (phi, twist_bound = 2, seed_len = 2, depth = 32, max_iterations = 48))]
fn attracting_points(
    phi: &Automorphism,
    twist_bound: usize,
    seed_len: usize,
    depth: usize,
    max_iterations: usize,
) -> PyResult<String> {
    let seeds = boundary::default_seeds(phi.inner.alphabet(), seed_len);
    let set = boundary::collect_attracting_points(
        &phi.inner,
        twist_bound,
        &seeds,
        &conv(depth, max_iterations),
    )
    .map_err(boundary_err)?;
    let audit = set.gjll_audit();
    Ok(json(&serde_json::json!({ "fixed_points": set, "gjll": audit })))
}

/// Stabilized subword fingerprints of the generator orbits, deduplicated, as
/// a JSON array.
#[pyfunction]
#[pyo3(signature = (phi, k = 2, budget = 20))]
fn fingerprints(phi: &Automorphism, k: usize, budget: usize) -> PyResult<String> {
    let fps =
        laminations::generator_fingerprints(&phi.inner, k, budget, MAX).map_err(lam_err)?;
    Ok(json(&fps))
}

/// Weak-limit lines of one orbit with endpoint classification, as JSON.
/// Refuses non-hyperbolic input.
#[pyfunction]
#[pyo3(signature = (phi, cls, k = 2, iterations = 12, twist_bound = 2, depth = 32))]
fn weak_limits(
    phi: &Automorphism,
    cls: &CyclicClass,
    k: usize,
    iterations: usize,
    twist_bound: usize,
    depth: usize,
) -> PyResult<String> {
    require_hyperbolic(&phi.inner)?;
    let ctx = LaminationContext::new(&phi.inner, k, 20, twist_bound, &conv(depth, 48))
        .map_err(lam_err)?;
    let limits = laminations::weak_limit_lines(&ctx, &cls.inner, iterations).map_err(lam_err)?;
    Ok(json(&limits))
}

/// Identification graph over the two-sided fixed-point sets, with its fiber
/// audit, as JSON. Short classes seed the sample set. Refuses non-hyperbolic
/// input and mismatched inverses.
#[pyfunction]
#[pyo3(signature = (phi, phi_inv = None, max_sample_len = 2, k = 3, iterations = 12, twist_bound = 2, depth = 32))]
fn ct_graph(
    phi: &Automorphism,
    phi_inv: Option<&Automorphism>,
    max_sample_len: usize,
    k: usize,
    iterations: usize,
    twist_bound: usize,
    depth: usize,
) -> PyResult<String> {
    let inverse = phi.resolved_inverse(phi_inv)?;
    let alphabet = phi.inner.alphabet();
    let mut samples = Vec::new();
    for len in 1..=max_sample_len {
        samples.extend(fgdyn_core::words::cyclic_words_of_len(alphabet, len));
    }
    let budgets = CtBudgets {
        k,
        n_max: iterations,
        twist_bound,
        conv: conv(depth, 48),
        ..CtBudgets::default()
    };
    let els = cannon_thurston::ending_lamination_set(&phi.inner, &inverse, &samples, &budgets)
        .map_err(ct_err)?;
    let graph = cannon_thurston::identification_graph(&els, depth);
    Ok(json(&graph))
}

/// Quasiconvexity verdict for the subgroup generated by `generators`, as a
/// JSON object with `subgroup_states` and `verdict`. Refuses finite-index
/// subgroups and non-hyperbolic input.
#[pyfunction]
#[pyo3(signature = (phi, generators, phi_inv = None, twist_bound = 2, k_leaf = 8, depth = 32))]
fn subgroup_qc(
    phi: &Automorphism,
    generators: Vec<String>,
    phi_inv: Option<&Automorphism>,
    twist_bound: usize,
    k_leaf: usize,
    depth: usize,
) -> PyResult<String> {
    let alphabet = phi.inner.alphabet();
    let gens = generators
        .iter()
        .map(|g| ReducedWord::parse(g, alphabet))
        .collect::<Result<Vec<_>, _>>()
        .map_err(word_err)?;
    if gens.is_empty() {
        return Err(PyValueError::new_err("subgroup needs at least one generator"));
    }
    let inverse = phi.resolved_inverse(phi_inv)?;
    let graph = subgroups::stallings_graph(&gens, alphabet);
    let budgets = QcBudgets { twist_bound, k_leaf, conv: conv(depth, 48), ..QcBudgets::default() };
    let verdict =
        subgroups::qc_verdict(&graph, &phi.inner, &inverse, &budgets).map_err(subgroup_err)?;
    Ok(json(&serde_json::json!({
        "subgroup_states": graph.states(),
        "verdict": verdict,
    })))
}

/// Whether the two maps share a stabilized fingerprint, generator against
/// generator, at subword length `k`.
#[pyfunction]
#[pyo3(signature = (phi, psi, k = 2, budget = 20))]
fn common_lamination(
    phi: &Automorphism,
    psi: &Automorphism,
    k: usize,
    budget: usize,
) -> PyResult<bool> {
    laminations::common_lamination_check(&phi.inner, &psi.inner, k, budget, MAX).map_err(lam_err)
}

/// Experimental dynamics of free-group automorphisms: word and automorphism
/// algebra natively, and the orbit pipelines (hyperbolicity certificates,
/// boundary fixed points, lamination fingerprints, weak limits,
/// identification graphs, quasiconvexity) as JSON reports.
#[pymodule]
fn fgdyn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Word>()?;
    m.add_class::<CyclicClass>()?;
    m.add_class::<Automorphism>()?;
    m.add_function(wrap_pyfunction!(certify_hyperbolicity, m)?)?;
    m.add_function(wrap_pyfunction!(growth_profile, m)?)?;
    m.add_function(wrap_pyfunction!(attracting_points, m)?)?;
    m.add_function(wrap_pyfunction!(fingerprints, m)?)?;
    m.add_function(wrap_pyfunction!(weak_limits, m)?)?;
    m.add_function(wrap_pyfunction!(ct_graph, m)?)?;
    m.add_function(wrap_pyfunction!(subgroup_qc, m)?)?;
    m.add_function(wrap_pyfunction!(common_lamination, m)?)?;
    m.add("DEFAULT_MAX_WORD_LEN", DEFAULT_MAX_WORD_LEN)?;
    m.add("MAX_RANK", MAX_RANK)?;
    Ok(())
}
