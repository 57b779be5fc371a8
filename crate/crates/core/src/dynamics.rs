//! Orbit growth of conjugacy classes and one-sided hyperbolicity
//! certification.
//!
//! An outer automorphism with no periodic conjugacy class stretches every
//! class at a uniform exponential rate under forward or backward iteration.
//! The certifier searches the contrapositive: an exhaustive scan of short
//! classes for orbit returns. Finding one disproves hyperbolicity with an
//! exact witness; finding none within the bounds is evidence, not proof, and
//! is reported as such.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automorphism::{AutError, Automorphism};
use crate::words::{cyclic_words_of_len, CyclicWord};

/// Lengths of the cyclic reductions of φⁿ([c]) together with a growth-rate
/// estimate read off the tail of the sequence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub class: CyclicWord,
    /// `lengths[n]` is |φⁿ([c])| for n = 0..=iterations.
    pub lengths: Vec<usize>,
    /// exp of the least-squares slope of log-length over the final third of
    /// the sequence; clamped to ≥ 1.
    pub estimated_rate: f64,
}

/// Least-squares slope of ln(lengths) over the tail, exponentiated. A
/// constant or shrinking tail estimates 1.
fn tail_rate(lengths: &[usize]) -> f64 {
    let tail_start = (lengths.len() * 2) / 3;
    let tail: Vec<f64> = lengths[tail_start..]
        .iter()
        .map(|&l| (l.max(1) as f64).ln())
        .collect();
    let n = tail.len();
    if n < 2 {
        return 1.0;
    }
    let xs = 0..n;
    let mean_x = (n as f64 - 1.0) / 2.0;
    let mean_y = tail.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.zip(&tail) {
        let dx = x as f64 - mean_x;
        cov += dx * (y - mean_y);
        var += dx * dx;
    }
    (cov / var).exp().max(1.0)
}

/// Iterates the class action and records lengths; `iterations` + 1 entries.
pub fn growth_profile(
    phi: &Automorphism,
    class: &CyclicWord,
    iterations: usize,
    max_word_len: usize,
) -> Result<GrowthProfile, AutError> {
    let mut lengths = Vec::with_capacity(iterations + 1);
    let mut cur = class.clone();
    lengths.push(cur.len());
    for _ in 0..iterations {
        cur = phi.apply_cyclic(&cur, max_word_len)?;
        lengths.push(cur.len());
    }
    Ok(GrowthProfile { class: class.clone(), estimated_rate: tail_rate(&lengths), lengths })
}

/// Exhaustive orbit-return scan: every conjugacy class with a representative
/// of length ≤ `max_class_len` whose φ-orbit returns to it within
/// `max_period` steps, with the minimal period. Classes are enumerated by
/// length then canonical rotation; the scan runs in parallel and the result
/// order is deterministic.
pub fn find_periodic_classes(
    phi: &Automorphism,
    max_class_len: usize,
    max_period: usize,
    max_word_len: usize,
) -> Result<Vec<(CyclicWord, usize)>, AutError> {
    let mut found = Vec::new();
    for len in 1..=max_class_len {
        let classes = cyclic_words_of_len(phi.alphabet(), len);
        let returns = classes
            .into_par_iter()
            .map(|c| -> Result<Option<(CyclicWord, usize)>, AutError> {
                let mut cur = c.clone();
                for p in 1..=max_period {
                    cur = phi.apply_cyclic(&cur, max_word_len)?;
                    if cur == c {
                        return Ok(Some((c, p)));
                    }
                }
                Ok(None)
            })
            .collect::<Result<Vec<_>, _>>()?;
        found.extend(returns.into_iter().flatten());
    }
    Ok(found)
}

/// Outcome of the hyperbolicity scan. `NotHyperbolic` is a certificate;
/// `NoObstructionFound` records how far the search went and nothing more.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum HyperbolicityVerdict {
    NotHyperbolic { witness: CyclicWord, period: usize },
    NoObstructionFound { max_class_len: usize, max_period: usize },
}

impl HyperbolicityVerdict {
    pub fn is_obstructed(&self) -> bool {
        matches!(self, HyperbolicityVerdict::NotHyperbolic { .. })
    }
}

/// Scans for periodic classes and reports the shortest witness (ties broken
/// by canonical-rotation order). Requires an invertible input: a verified
/// inverse is attached first, and failure to invert is an error rather than
/// a verdict.
pub fn certify_hyperbolicity(
    phi: &Automorphism,
    max_class_len: usize,
    max_period: usize,
    max_word_len: usize,
) -> Result<HyperbolicityVerdict, AutError> {
    let phi = phi.with_verified_inverse(max_word_len)?;
    let mut periodic = find_periodic_classes(&phi, max_class_len, max_period, max_word_len)?;
    periodic.sort_by(|(c1, p1), (c2, p2)| {
        (c1.len(), c1, p1).cmp(&(c2.len(), c2, p2))
    });
    Ok(match periodic.into_iter().next() {
        Some((witness, period)) => HyperbolicityVerdict::NotHyperbolic { witness, period },
        None => HyperbolicityVerdict::NoObstructionFound { max_class_len, max_period },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    const MAX: usize = 1 << 22;

    fn tribonacci() -> Automorphism {
        Automorphism::parse("a->ab; b->ac; c->a").unwrap()
    }

    fn fibonacci() -> Automorphism {
        Automorphism::parse("a->ab; b->a").unwrap()
    }

    fn class(s: &str, rank: usize) -> CyclicWord {
        CyclicWord::parse(s, &Alphabet::new(rank).unwrap()).unwrap()
    }

    #[test]
    fn tribonacci_growth_follows_recurrence() {
        let g = growth_profile(&tribonacci(), &class("a", 3), 5, MAX).unwrap();
        assert_eq!(g.lengths, [1, 2, 4, 7, 13, 24]);
        let g = growth_profile(&tribonacci(), &class("a", 3), 20, MAX).unwrap();
        for k in 3..g.lengths.len() {
            assert_eq!(g.lengths[k], g.lengths[k - 1] + g.lengths[k - 2] + g.lengths[k - 3]);
        }
    }

    #[test]
    fn fibonacci_growth() {
        let g = growth_profile(&fibonacci(), &class("a", 2), 5, MAX).unwrap();
        assert_eq!(g.lengths, [1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn identity_rate_is_one() {
        let id = Automorphism::identity(Alphabet::new(3).unwrap());
        let g = growth_profile(&id, &class("abc", 3), 10, MAX).unwrap();
        assert_eq!(g.lengths, vec![3; 11]);
        assert_eq!(g.estimated_rate, 1.0);
    }

    #[test]
    fn tribonacci_rate_approximates_perron_root() {
        // x³ = x² + x + 1 has its real root near 1.8393
        let g = growth_profile(&tribonacci(), &class("a", 3), 15, MAX).unwrap();
        assert!((g.estimated_rate - 1.8393).abs() / 1.8393 < 0.05, "rate {}", g.estimated_rate);
    }

    #[test]
    fn identity_periodic_classes_are_everything() {
        let id = Automorphism::identity(Alphabet::new(2).unwrap());
        let found = find_periodic_classes(&id, 2, 1, MAX).unwrap();
        let expected: usize = (1..=2)
            .map(|l| cyclic_words_of_len(&Alphabet::new(2).unwrap(), l).len())
            .sum();
        assert_eq!(found.len(), expected);
        assert!(found.iter().all(|(_, p)| *p == 1));
    }

    #[test]
    fn fibonacci_commutator_witness() {
        let v = certify_hyperbolicity(&fibonacci(), 4, 2, MAX).unwrap();
        assert_eq!(
            v,
            HyperbolicityVerdict::NotHyperbolic { witness: class("abAB", 2), period: 2 }
        );
    }

    #[test]
    fn permutation_and_identity_witnesses() {
        let perm = Automorphism::parse("a->b; b->c; c->a").unwrap();
        let v = certify_hyperbolicity(&perm, 2, 4, MAX).unwrap();
        assert_eq!(v, HyperbolicityVerdict::NotHyperbolic { witness: class("a", 3), period: 3 });
        let id = Automorphism::identity(Alphabet::new(3).unwrap());
        let v = certify_hyperbolicity(&id, 2, 2, MAX).unwrap();
        assert_eq!(v, HyperbolicityVerdict::NotHyperbolic { witness: class("a", 3), period: 1 });
    }

    #[test]
    fn tribonacci_short_scan_is_clean() {
        let v = certify_hyperbolicity(&tribonacci(), 5, 5, MAX).unwrap();
        assert_eq!(
            v,
            HyperbolicityVerdict::NoObstructionFound { max_class_len: 5, max_period: 5 }
        );
    }

    #[test]
    fn witness_soundness() {
        // every reported (w, p) satisfies φᵖ([w]) = [w]
        let perm = Automorphism::parse("a->b; b->c; c->a").unwrap();
        for (w, p) in find_periodic_classes(&perm, 3, 6, MAX).unwrap() {
            let img = perm.power(p as i64, MAX).unwrap().apply_cyclic(&w, MAX).unwrap();
            assert_eq!(img, w);
            // and p is minimal
            let mut cur = w.clone();
            for q in 1..p {
                cur = perm.apply_cyclic(&cur, MAX).unwrap();
                assert_ne!(cur, w, "period {p} not minimal at {q}");
            }
        }
    }
}
