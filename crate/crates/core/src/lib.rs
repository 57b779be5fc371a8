//! Experimental dynamics of free-group automorphisms.
//!
//! The crate follows one pipeline: words and conjugacy classes
//! ([`words`]), automorphisms and their lifts ([`automorphism`]), growth and
//! hyperbolicity certification ([`dynamics`]), boundary fixed points
//! ([`boundary`]), lamination fingerprints and weak limits ([`laminations`]),
//! ending laminations and identification graphs ([`cannon_thurston`]), and
//! Stallings-graph quasiconvexity probes ([`subgroups`]).
//!
//! Every search is budgeted: exceeding a word-length or iteration budget is a
//! reported error, never silent truncation. All values are immutable and all
//! operations pure, so orbit searches parallelize freely; results are merged
//! in a deterministic order.

pub mod automorphism;
pub mod boundary;
pub mod cannon_thurston;
pub mod dynamics;
pub mod laminations;
pub mod subgroups;
pub mod words;

pub use automorphism::{invert, sample_lifts, AutError, Automorphism, TwistedLift};
pub use boundary::{
    collect_attracting_points, default_seeds, iterate_to_fixed_point, same_point, BoundaryError,
    BoundaryPrefix, ConvergenceOpts, FixedPointSet, PointCmp,
};
pub use cannon_thurston::{
    assemble_singular_lines, ending_lamination_set, identification_graph, CtBudgets, CtError,
    Direction, EndingLaminationSet, IdentificationGraph,
};
pub use dynamics::{
    certify_hyperbolicity, find_periodic_classes, growth_profile, GrowthProfile,
    HyperbolicityVerdict,
};
pub use laminations::{
    attraction_test, common_lamination_check, fingerprint_equal, lamination_fingerprint,
    weak_limit_lines, Attraction, LamError, LaminationContext, LaminationFingerprint, LimitLine,
    LineClass, WeakLimits,
};
pub use subgroups::{
    carries_leaf, carries_ray, has_infinite_index, qc_verdict, stallings_graph, LeafVerdict,
    QcBudgets, QcVerdict, QcWitness, RayVerdict, StallingsGraph, SubgroupError,
};
pub use words::{
    is_conjugate, Alphabet, CyclicWord, Letter, ReducedWord, WordError, DEFAULT_MAX_WORD_LEN,
};
