//! One handler per subcommand. Every handler reads its inputs, runs the
//! corresponding core pipeline, and packs the outcome into a report whose
//! `result` field reuses the core types' own serializations.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use fgdyn_core::automorphism::{invert, AutError, Automorphism};
use fgdyn_core::boundary::{
    collect_attracting_points, default_seeds, BoundaryError, ConvergenceOpts, Provenance,
};
use fgdyn_core::cannon_thurston::{ending_lamination_set, identification_graph, CtBudgets, CtError};
use fgdyn_core::dynamics::{certify_hyperbolicity, HyperbolicityVerdict};
use fgdyn_core::laminations::{
    common_lamination_check, generator_fingerprints, weak_limit_lines, LamError,
    LaminationContext, LineClass,
};
use fgdyn_core::subgroups::{qc_verdict, stallings_graph, QcBudgets, QcVerdict, SubgroupError};
use fgdyn_core::words::{cyclic_words_of_len, CyclicWord, ReducedWord, WordError};

use crate::report::{Failure, Outcome, Progress, Report};

fn read_automorphism(path: &Path) -> Result<Automorphism, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Automorphism::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Inverse resolution order: explicit file, then the `inverse:` block of
/// the automorphism file, then a basis search.
fn resolve_inverse(
    phi: &Automorphism,
    path: Option<&Path>,
    max_len: usize,
) -> Result<Automorphism, Failure> {
    if let Some(p) = path {
        return read_automorphism(p);
    }
    if let Some(inv) = phi.inverse() {
        return Ok(inv);
    }
    invert(phi, max_len).map_err(|e| match e {
        AutError::Word(WordError::LengthBudget { .. }) => Failure::Budget(e.to_string()),
        _ => Failure::Input(format!(
            "no --inverse given, none embedded in the file, and the search failed: {e}"
        )),
    })
}

fn map_word(e: WordError) -> Failure {
    match e {
        WordError::LengthBudget { .. } => Failure::Budget(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

fn map_aut(e: AutError) -> Failure {
    match e {
        AutError::Word(w) => map_word(w),
        _ => Failure::Input(e.to_string()),
    }
}

fn map_boundary(e: BoundaryError) -> Failure {
    match e {
        BoundaryError::NoConvergence { .. } | BoundaryError::IterationBudget { .. } => {
            Failure::Budget(e.to_string())
        }
        BoundaryError::Word(w) => map_word(w),
        BoundaryError::Aut(a) => map_aut(a),
    }
}

fn map_lam(e: LamError) -> Failure {
    match e {
        LamError::NoStabilization { .. } => Failure::Budget(e.to_string()),
        LamError::NotAGenerator { .. } => Failure::Input(e.to_string()),
        LamError::Word(w) => map_word(w),
        LamError::Aut(a) => map_aut(a),
        LamError::Boundary(b) => map_boundary(b),
    }
}

fn map_ct(e: CtError) -> Failure {
    match e {
        CtError::NotHyperbolic { .. } => Failure::Refused(e.to_string()),
        CtError::NotInverse => Failure::Input(e.to_string()),
        CtError::Lam(l) => map_lam(l),
    }
}

fn map_subgroup(e: SubgroupError) -> Failure {
    match e {
        SubgroupError::FiniteIndex | SubgroupError::NotHyperbolic { .. } => {
            Failure::Refused(e.to_string())
        }
        SubgroupError::NotInverse | SubgroupError::RankMismatch { .. } => {
            Failure::Input(e.to_string())
        }
        SubgroupError::Word(w) => map_word(w),
        SubgroupError::Aut(a) => map_aut(a),
        SubgroupError::Boundary(b) => map_boundary(b),
        SubgroupError::Lam(l) => map_lam(l),
    }
}

fn skip_flags(skips: &[Provenance]) -> Vec<String> {
    skips
        .iter()
        .map(|p| {
            format!("budget exhausted: twist '{}', seed '{}', power {}", p.twist, p.seed, p.power)
        })
        .collect()
}

fn conv_opts(depth: usize, max_iter: usize, max_len: usize) -> ConvergenceOpts {
    ConvergenceOpts {
        target_depth: depth,
        max_iterations: max_iter,
        max_word_len: max_len,
        ..ConvergenceOpts::default()
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("core types serialize")
}

pub fn hyperbolic(
    auto: &Path,
    class_len: usize,
    max_period: usize,
    max_len: usize,
    progress: &mut Progress,
) -> Result<Outcome, Failure> {
    let phi = read_automorphism(auto)?;
    progress.event("phase", json!({"name": "periodic-class scan"}));
    let verdict = certify_hyperbolicity(&phi, class_len, max_period, max_len).map_err(map_aut)?;
    let summary = vec![match &verdict {
        HyperbolicityVerdict::NotHyperbolic { witness, period } => {
            format!("verdict: not hyperbolic; [{witness}] returns to itself with period {period}")
        }
        HyperbolicityVerdict::NoObstructionFound { max_class_len, max_period } => format!(
            "verdict: no periodic class up to length {max_class_len} and period {max_period}"
        ),
    }];
    let report = Report::new(
        "hyperbolic",
        json!({ "automorphism": phi.to_text() }),
        json!({ "class_len": class_len, "max_period": max_period, "max_word_len": max_len }),
        to_value(&verdict),
    );
    Ok(Outcome::new(report, summary))
}

pub fn fixed_points(
    auto: &Path,
    twist_bound: usize,
    seed_len: usize,
    depth: usize,
    max_iter: usize,
    max_len: usize,
    progress: &mut Progress,
) -> Result<Outcome, Failure> {
    let phi = read_automorphism(auto)?;
    let conv = conv_opts(depth, max_iter, max_len);
    let seeds = default_seeds(phi.alphabet(), seed_len);
    progress.event("phase", json!({"name": "fixed-point collection", "seeds": seeds.len()}));
    let points = collect_attracting_points(&phi, twist_bound, &seeds, &conv)
        .map_err(map_boundary)?;
    let audit = points.gjll_audit();
    let summary = vec![format!(
        "collected {} attracting points ({} distinct) across {} lifts; per-lift bound {}",
        points.total_points(),
        points.distinct_points().len(),
        points.lifts.len(),
        audit.bound
    )];
    let violation = (!audit.violations.is_empty()).then(|| {
        format!("per-lift point bound exceeded for {} lifts", audit.violations.len())
    });
    let mut report = Report::new(
        "fixed-points",
        json!({ "automorphism": phi.to_text() }),
        json!({
            "twist_bound": twist_bound,
            "seed_len": seed_len,
            "target_depth": depth,
            "max_iterations": max_iter,
            "max_word_len": max_len,
        }),
        json!({ "fixed_points": to_value(&points), "gjll": to_value(&audit) }),
    );
    report.budget_flags = skip_flags(&points.budget_skips);
    Ok(Outcome { report, summary, violation })
}

pub fn laminate(
    auto: &Path,
    k: usize,
    max_iter: usize,
    max_len: usize,
    progress: &mut Progress,
) -> Result<Outcome, Failure> {
    let phi = read_automorphism(auto)?;
    progress.event("phase", json!({"name": "fingerprint stabilization", "k": k}));
    let fingerprints = generator_fingerprints(&phi, k, max_iter, max_len).map_err(map_lam)?;
    let mut summary = vec![format!("distinct fingerprints at k = {k}: {}", fingerprints.len())];
    for fp in &fingerprints {
        summary.push(format!(
            "generator '{}': {} subwords, stabilized at iterate {}",
            fp.source().generator,
            fp.subwords().len(),
            fp.source().stabilized_at
        ));
    }
    let report = Report::new(
        "laminate",
        json!({ "automorphism": phi.to_text() }),
        json!({ "k": k, "stabilization_budget": max_iter, "max_word_len": max_len }),
        json!({ "fingerprints": to_value(&fingerprints) }),
    );
    Ok(Outcome::new(report, summary))
}

/// Refuses non-hyperbolic input before any orbit work: weak limits of a
/// periodic class say nothing about laminations.
fn guard_hyperbolic(phi: &Automorphism, max_len: usize) -> Result<(), Failure> {
    match certify_hyperbolicity(phi, 4, 4, max_len).map_err(map_aut)? {
        HyperbolicityVerdict::NotHyperbolic { witness, period } => Err(Failure::Refused(format!(
            "refused: input is not hyperbolic ([{witness}] has period {period})"
        ))),
        HyperbolicityVerdict::NoObstructionFound { .. } => Ok(()),
    }
}

pub fn limits(
    auto: &Path,
    class: &str,
    k: usize,
    max_iter: usize,
    twist_bound: usize,
    depth: usize,
    max_len: usize,
    progress: &mut Progress,
) -> Result<Outcome, Failure> {
    let phi = read_automorphism(auto)?;
    guard_hyperbolic(&phi, max_len)?;
    let class = CyclicWord::parse(class, phi.alphabet())
        .map_err(|e| Failure::Input(format!("--class: {e}")))?;
    let conv = conv_opts(depth, 48, max_len);
    progress.event("phase", json!({"name": "lamination context"}));
    let ctx = LaminationContext::new(&phi, k, 20, twist_bound, &conv).map_err(map_lam)?;
    progress.event("phase", json!({"name": "weak-limit extraction", "class": class.to_string()}));
    let limits = weak_limit_lines(&ctx, &class, max_iter).map_err(map_lam)?;
    let generic = limits
        .lines
        .iter()
        .filter(|l| matches!(l.classification, LineClass::GenericLeafLike { .. }))
        .count();
    let joining = limits
        .lines
        .iter()
        .filter(|l| l.classification == LineClass::FixPlusJoining)
        .count();
    let unclassified = limits.unclassified().len();
    let summary = vec![format!(
        "{} limit lines: {generic} generic-leaf-like, {joining} fix-plus-joining, \
         {unclassified} unclassified; {} unresolved windows",
        limits.lines.len(),
        limits.unresolved.len()
    )];
    let violation = (unclassified > 0)
        .then(|| format!("{unclassified} lines unclassified at converged depth"));
    let report = Report::new(
        "limits",
        json!({ "automorphism": phi.to_text(), "class": class.to_string() }),
        json!({
            "k": k,
            "orbit_iterations": max_iter,
            "twist_bound": twist_bound,
            "target_depth": depth,
            "max_word_len": max_len,
        }),
        to_value(&limits),
    );
    Ok(Outcome { report, summary, violation })
}

pub fn ct_graph(
    auto: &Path,
    inverse: Option<&Path>,
    max_sample_len: usize,
    k: usize,
    max_iter: usize,
    twist_bound: usize,
    depth: usize,
    max_len: usize,
    progress: &mut Progress,
) -> Result<Outcome, Failure> {
    let phi = read_automorphism(auto)?;
    let inv = resolve_inverse(&phi, inverse, max_len)?;
    let samples: Vec<CyclicWord> = (1..=max_sample_len)
        .flat_map(|len| cyclic_words_of_len(phi.alphabet(), len))
        .collect();
    let budgets = CtBudgets {
        k,
        n_max: max_iter,
        twist_bound,
        conv: conv_opts(depth, 48, max_len),
        ..CtBudgets::default()
    };
    progress.event("phase", json!({"name": "ending laminations", "samples": samples.len()}));
    let els = ending_lamination_set(&phi, &inv, &samples, &budgets).map_err(map_ct)?;
    progress.event("phase", json!({"name": "identification graph"}));
    let graph = identification_graph(&els, depth);
    let summary = vec![
        format!(
            "lines: {} over {} samples; unresolved windows: {}",
            els.lines.len(),
            samples.len(),
            els.unresolved.len()
        ),
        format!(
            "graph: {} nodes, {} edges, {} components (max size {}, ceiling {}); audit {}",
            graph.nodes.len(),
            graph.edges.len(),
            graph.components.len(),
            graph.audit.max_component_size,
            graph.audit.ceiling,
            if graph.audit.passed { "passed" } else { "FAILED" }
        ),
    ];
    let violation = (!graph.audit.passed).then(|| {
        format!(
            "identification-graph audit failed: {} unmatched junctions, max component {} vs ceiling {}",
            graph.audit.unmatched_junctions.len(),
            graph.audit.max_component_size,
            graph.audit.ceiling
        )
    });
    let mut report = Report::new(
        "ct-graph",
        json!({ "automorphism": phi.to_text(), "inverse": inv.to_text() }),
        json!({
            "max_sample_len": max_sample_len,
            "k": k,
            "orbit_iterations": max_iter,
            "twist_bound": twist_bound,
            "target_depth": depth,
            "max_word_len": max_len,
        }),
        to_value(&graph),
    );
    report.budget_flags = skip_flags(&els.fixed_points_forward.budget_skips)
        .into_iter()
        .chain(skip_flags(&els.fixed_points_backward.budget_skips))
        .collect();
    Ok(Outcome { report, summary, violation })
}

pub fn qc(
    auto: &Path,
    inverse: Option<&Path>,
    subgroup: &str,
    twist_bound: usize,
    k_leaf: usize,
    depth: usize,
    max_len: usize,
    progress: &mut Progress,
) -> Result<Outcome, Failure> {
    let phi = read_automorphism(auto)?;
    let inv = resolve_inverse(&phi, inverse, max_len)?;
    let gens = subgroup
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| ReducedWord::parse(s, phi.alphabet()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Input(format!("--subgroup: {e}")))?;
    if gens.is_empty() {
        return Err(Failure::Input("--subgroup needs at least one generator word".into()));
    }
    progress.event("phase", json!({"name": "folding", "generators": gens.len()}));
    let graph = stallings_graph(&gens, phi.alphabet());
    let budgets = QcBudgets {
        twist_bound,
        k_leaf,
        conv: conv_opts(depth, 48, max_len),
        ..QcBudgets::default()
    };
    progress.event("phase", json!({"name": "carriage checks", "states": graph.states()}));
    let verdict = qc_verdict(&graph, &phi, &inv, &budgets).map_err(map_subgroup)?;
    let summary = vec![
        format!("subgroup automaton states: {}, index: infinite", graph.states()),
        match &verdict {
            QcVerdict::NotQuasiconvex { .. } => {
                "verdict: not quasiconvex (an ending-lamination witness is carried)".into()
            }
            QcVerdict::NoObstructionFound { points_checked, fingerprints_checked, .. } => format!(
                "verdict: no obstruction found ({points_checked} fixed points and \
                 {fingerprints_checked} fingerprints checked)"
            ),
        },
    ];
    let report = Report::new(
        "qc",
        json!({
            "automorphism": phi.to_text(),
            "inverse": inv.to_text(),
            "subgroup": gens.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        }),
        json!({
            "twist_bound": twist_bound,
            "k_leaf": k_leaf,
            "target_depth": depth,
            "max_word_len": max_len,
        }),
        json!({
            "subgroup_states": graph.states(),
            "verdict": to_value(&verdict),
        }),
    );
    Ok(Outcome::new(report, summary))
}

pub fn compat(
    autos: &[std::path::PathBuf],
    k: usize,
    max_iter: usize,
    max_len: usize,
    progress: &mut Progress,
) -> Result<Outcome, Failure> {
    if autos.len() != 2 {
        return Err(Failure::Input(format!(
            "compat compares exactly two automorphisms; got {} --auto flags",
            autos.len()
        )));
    }
    let phi = read_automorphism(&autos[0])?;
    let psi = read_automorphism(&autos[1])?;
    progress.event("phase", json!({"name": "fingerprint comparison", "k": k}));
    let common = common_lamination_check(&phi, &psi, k, max_iter, max_len).map_err(map_lam)?;
    let summary = vec![if common {
        format!("common attracting lamination at k = {k}: yes (shared fingerprint)")
    } else {
        format!("common attracting lamination at k = {k}: none found")
    }];
    let report = Report::new(
        "compat",
        json!({ "automorphisms": [phi.to_text(), psi.to_text()] }),
        json!({ "k": k, "stabilization_budget": max_iter, "max_word_len": max_len }),
        json!({ "common_lamination": common }),
    );
    Ok(Outcome::new(report, summary))
}
