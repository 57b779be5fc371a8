//! Automorphisms of the free group, given by generator images.
//!
//! The text format is one clause per generator, `g->word`, separated by `;`
//! or newlines, e.g. `a->ab; b->ac; c->a`. An optional `inverse:` block
//! supplies the inverse's clauses; when present the composition is verified
//! to fix every generator. Inverses can also be searched for with [`invert`].

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Alphabet, CyclicWord, Letter, ReducedWord, WordError, MAX_RANK};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("clause {0:?} is not of the form \"g->word\"")]
    BadClause(String),
    #[error("no image clause for generator {0:?}")]
    MissingImage(char),
    #[error("generator {0:?} has more than one image clause")]
    DuplicateClause(char),
    #[error("declared inverse fails to invert: composite sends {gen:?} to {image:?}")]
    InverseCheckFailed { gen: char, image: String },
    #[error("no verified inverse available (required for negative powers and two-sided checks)")]
    NoInverse,
    #[error("Nielsen reduction did not reach a basis within the search budget; the map may not be an automorphism")]
    InversionFailed,
}

/// A free-group endomorphism that is intended to be an automorphism, stored
/// as the tuple of generator images. A verified inverse may be attached.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automorphism {
    alphabet: Alphabet,
    images: Vec<ReducedWord>,
    inverse_images: Option<Vec<ReducedWord>>,
}

impl Automorphism {
    /// Builds from generator images, reducing each and validating letters
    /// against the alphabet.
    pub fn from_images(
        alphabet: Alphabet,
        images: Vec<ReducedWord>,
    ) -> Result<Automorphism, AutError> {
        assert_eq!(images.len(), alphabet.rank(), "one image per generator");
        for img in &images {
            for &l in img.letters() {
                if !alphabet.contains(l) {
                    return Err(WordError::BadLetter {
                        ch: l.to_char(),
                        pos: 0,
                        rank: alphabet.rank(),
                    }
                    .into());
                }
            }
        }
        Ok(Automorphism { alphabet, images, inverse_images: None })
    }

    pub fn identity(alphabet: Alphabet) -> Automorphism {
        let images = alphabet
            .generators()
            .map(|g| ReducedWord::from_letters([g]))
            .collect::<Vec<_>>();
        let mut id = Automorphism { alphabet, images, inverse_images: None };
        id.inverse_images = Some(id.images.clone());
        id
    }

    /// Parses the text format, inferring the rank from the letters present.
    pub fn parse(text: &str) -> Result<Automorphism, AutError> {
        let clauses = text.replace("inverse:", ";");
        let mut max_index = 0usize;
        for ch in clauses.chars() {
            if let Some(l) = Letter::from_char(ch) {
                max_index = max_index.max(l.index());
            }
        }
        let alphabet = Alphabet::new((max_index + 1).min(MAX_RANK))?;
        Automorphism::parse_with_alphabet(text, alphabet)
    }

    /// Parses the text format against a fixed alphabet; every generator must
    /// receive exactly one clause.
    pub fn parse_with_alphabet(text: &str, alphabet: Alphabet) -> Result<Automorphism, AutError> {
        let (forward, inverse) = match text.split_once("inverse:") {
            Some((f, i)) => (f, Some(i)),
            None => (text, None),
        };
        let images = parse_clause_block(forward, &alphabet)?;
        let mut aut = Automorphism { alphabet, images, inverse_images: None };
        if let Some(block) = inverse {
            let inv = parse_clause_block(block, &alphabet)?;
            aut.attach_inverse(inv)?;
        }
        Ok(aut)
    }

    /// Renders back to the text format (round-trips through `parse`).
    pub fn to_text(&self) -> String {
        let clause = |images: &[ReducedWord]| {
            images
                .iter()
                .enumerate()
                .map(|(i, w)| format!("{}->{}", Letter::generator(i), w))
                .collect::<Vec<_>>()
                .join("; ")
        };
        match &self.inverse_images {
            None => clause(&self.images),
            Some(inv) => format!("{}\ninverse: {}", clause(&self.images), clause(inv)),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn image_of_gen(&self, index: usize) -> &ReducedWord {
        &self.images[index]
    }

    /// Image of a single letter; inverse letters map to inverted images.
    pub fn image(&self, l: Letter) -> ReducedWord {
        let img = &self.images[l.index()];
        if l.is_inverse() {
            img.inverse()
        } else {
            img.clone()
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, w)| w.letters() == [Letter::generator(i)])
    }

    /// True when no image uses an inverse letter.
    pub fn is_positive(&self) -> bool {
        self.images.iter().all(|w| w.letters().iter().all(|l| !l.is_inverse()))
    }

    /// Homomorphic substitution with free reduction, capped at `max_len`.
    pub fn apply(&self, w: &ReducedWord, max_len: usize) -> Result<ReducedWord, AutError> {
        let mut out: Vec<Letter> = Vec::new();
        let push = |out: &mut Vec<Letter>, l: Letter| {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        };
        for &l in w.letters() {
            let img = &self.images[l.index()];
            if l.is_inverse() {
                for &m in img.letters().iter().rev() {
                    push(&mut out, m.inverse());
                }
            } else {
                for &m in img.letters() {
                    push(&mut out, m);
                }
            }
            if out.len() > max_len {
                return Err(WordError::LengthBudget { len: out.len(), max: max_len }.into());
            }
        }
        Ok(ReducedWord::from_letters(out))
    }

    /// Action on conjugacy classes: apply to a representative, cyclically
    /// reduce. Well-defined because conjugate inputs give conjugate images.
    pub fn apply_cyclic(&self, c: &CyclicWord, max_len: usize) -> Result<CyclicWord, AutError> {
        Ok(CyclicWord::from_word(&self.apply(&c.to_word(), max_len)?).0)
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Automorphism, max_len: usize) -> Result<Automorphism, AutError> {
        assert_eq!(self.alphabet, other.alphabet, "composition needs a common alphabet");
        let images = other
            .images
            .iter()
            .map(|w| self.apply(w, max_len))
            .collect::<Result<Vec<_>, _>>()?;
        let inverse_images = match (&self.inverse_images, &other.inverse_images) {
            (Some(_), Some(_)) => {
                // (φψ)⁻¹ = ψ⁻¹φ⁻¹
                let si = self.inverse().unwrap();
                let oi = other.inverse().unwrap();
                Some(
                    si.images
                        .iter()
                        .map(|w| oi.apply(w, max_len))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
            _ => None,
        };
        Ok(Automorphism { alphabet: self.alphabet, images, inverse_images })
    }

    /// Iterated composition; negative exponents need a verified inverse.
    pub fn power(&self, n: i64, max_len: usize) -> Result<Automorphism, AutError> {
        let base = if n >= 0 {
            self.clone()
        } else {
            self.inverse().ok_or(AutError::NoInverse)?
        };
        let mut acc = Automorphism::identity(self.alphabet);
        for _ in 0..n.unsigned_abs() {
            acc = base.compose(&acc, max_len)?;
        }
        Ok(acc)
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse_images.is_some()
    }

    /// The verified inverse, if attached; its own inverse field points back.
    pub fn inverse(&self) -> Option<Automorphism> {
        self.inverse_images.as_ref().map(|inv| Automorphism {
            alphabet: self.alphabet,
            images: inv.clone(),
            inverse_images: Some(self.images.clone()),
        })
    }

    /// Attaches inverse images after verifying both composites fix every
    /// generator.
    pub fn attach_inverse(&mut self, inverse_images: Vec<ReducedWord>) -> Result<(), AutError> {
        let inv = Automorphism::from_images(self.alphabet, inverse_images)?;
        let max_len = crate::words::DEFAULT_MAX_WORD_LEN;
        for g in self.alphabet.generators() {
            let gen_word = ReducedWord::from_letters([g]);
            for (first, second) in [(&*self, &inv), (&inv, &*self)] {
                let round = second.apply(&first.apply(&gen_word, max_len)?, max_len)?;
                if round != gen_word {
                    return Err(AutError::InverseCheckFailed {
                        gen: g.to_char(),
                        image: round.to_string(),
                    });
                }
            }
        }
        self.inverse_images = Some(inv.images);
        Ok(())
    }

    /// Returns a copy carrying a verified inverse, searching with [`invert`]
    /// if none is attached yet.
    pub fn with_verified_inverse(&self, max_len: usize) -> Result<Automorphism, AutError> {
        if self.has_inverse() {
            return Ok(self.clone());
        }
        let inv = invert(self, max_len)?;
        let mut out = self.clone();
        out.attach_inverse(inv.images)?;
        Ok(out)
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Automorphism({})", self.to_text().replace('\n', " "))
    }
}

fn parse_clause_block(block: &str, alphabet: &Alphabet) -> Result<Vec<ReducedWord>, AutError> {
    let mut images: Vec<Option<ReducedWord>> = vec![None; alphabet.rank()];
    for clause in block.split(|c| c == ';' || c == '\n') {
        let clause = clause.trim();
        if clause.is_empty() {
            continue;
        }
        let (lhs, rhs) = clause.split_once("->").ok_or_else(|| AutError::BadClause(clause.into()))?;
        let lhs = lhs.trim();
        let gen = match lhs.chars().collect::<Vec<_>>()[..] {
            [c] => Letter::from_char(c)
                .filter(|l| !l.is_inverse() && alphabet.contains(*l))
                .ok_or_else(|| AutError::BadClause(clause.into()))?,
            _ => return Err(AutError::BadClause(clause.into())),
        };
        let image = ReducedWord::parse(rhs, alphabet)?;
        let slot = &mut images[gen.index()];
        if slot.is_some() {
            return Err(AutError::DuplicateClause(gen.to_char()));
        }
        *slot = Some(image);
    }
    images
        .into_iter()
        .enumerate()
        .map(|(i, img)| img.ok_or(AutError::MissingImage(Letter::generator(i).to_char())))
        .collect()
}

/// Upper bound on tuple states the plateau search may visit before giving up.
const PLATEAU_NODE_BUDGET: usize = 50_000;

/// Best-effort inversion by greedy length-reducing Nielsen transformations on
/// the image tuple, with a bounded breadth-first search across
/// length-preserving moves when the greedy phase stalls.
///
/// Alongside the working tuple `W` a witness tuple `V` is carried with the
/// invariant `φ(Vᵢ) = Wᵢ`; once `W` is a signed permutation of the basis the
/// witnesses read off the inverse images. The result has the verified inverse
/// attached (pointing back at `φ`).
pub fn invert(phi: &Automorphism, max_len: usize) -> Result<Automorphism, AutError> {
    type State = (Vec<ReducedWord>, Vec<ReducedWord>);
    let rank = phi.alphabet.rank();
    let start: State = (
        phi.images.clone(),
        phi.alphabet.generators().map(|g| ReducedWord::from_letters([g])).collect(),
    );

    // Nielsen moves: replace Wᵢ by Wᵢ·Wⱼ^±1 or Wⱼ^±1·Wᵢ (i ≠ j), mirrored on V.
    let moves = |s: &State| {
        let mut out: Vec<(State, isize)> = Vec::new();
        for i in 0..rank {
            for j in 0..rank {
                if i == j {
                    continue;
                }
                for invert_j in [false, true] {
                    for left in [false, true] {
                        let wj = if invert_j { s.0[j].inverse() } else { s.0[j].clone() };
                        let vj = if invert_j { s.1[j].inverse() } else { s.1[j].clone() };
                        let (nw, nv) = if left {
                            (wj.concat(&s.0[i]), vj.concat(&s.1[i]))
                        } else {
                            (s.0[i].concat(&wj), s.1[i].concat(&vj))
                        };
                        if nw.len() > max_len || nv.len() > max_len {
                            continue;
                        }
                        let gain = s.0[i].len() as isize - nw.len() as isize;
                        let mut next = s.clone();
                        next.0[i] = nw;
                        next.1[i] = nv;
                        out.push((next, gain));
                    }
                }
            }
        }
        out
    };

    let as_signed_permutation = |s: &State| -> Option<Vec<ReducedWord>> {
        let mut inverse_images: Vec<Option<ReducedWord>> = vec![None; rank];
        for (w, v) in s.0.iter().zip(&s.1) {
            let &[l] = w.letters() else { return None };
            let u = if l.is_inverse() { v.inverse() } else { v.clone() };
            let slot = &mut inverse_images[l.index()];
            if slot.is_some() {
                return None;
            }
            *slot = Some(u);
        }
        inverse_images.into_iter().collect()
    };

    let mut state = start;
    let mut plateau_nodes = 0usize;
    loop {
        // greedy phase: take the best strictly reducing move
        if let Some((next, _)) = moves(&state)
            .into_iter()
            .filter(|(_, gain)| *gain > 0)
            .max_by_key(|(_, gain)| *gain)
        {
            state = next;
            continue;
        }
        if let Some(inv) = as_signed_permutation(&state) {
            let mut out = phi.clone();
            out.attach_inverse(inv)?;
            return invert_result(out);
        }
        // plateau phase: breadth-first over length-preserving moves until a
        // state with a reducing move appears
        let mut seen: HashSet<Vec<ReducedWord>> = HashSet::from([state.0.clone()]);
        let mut queue: VecDeque<State> = VecDeque::from([state.clone()]);
        let mut escaped = None;
        'bfs: while let Some(s) = queue.pop_front() {
            plateau_nodes += 1;
            if plateau_nodes > PLATEAU_NODE_BUDGET {
                break;
            }
            for (next, gain) in moves(&s) {
                if gain > 0 {
                    escaped = Some(next);
                    break 'bfs;
                }
                if gain == 0 && seen.insert(next.0.clone()) {
                    queue.push_back(next);
                }
            }
            if let Some(inv) = as_signed_permutation(&s) {
                let mut out = phi.clone();
                out.attach_inverse(inv)?;
                return invert_result(out);
            }
        }
        match escaped {
            Some(next) => state = next,
            None => return Err(AutError::InversionFailed),
        }
    }
}

/// Flips a freshly inverted automorphism so the caller gets ψ = φ⁻¹ with φ
/// attached as ψ's inverse.
fn invert_result(phi_with_inverse: Automorphism) -> Result<Automorphism, AutError> {
    phi_with_inverse.inverse().ok_or(AutError::InversionFailed)
}

/// The lift of φ determined by a twist word: x ↦ w·φ(x)·w⁻¹.
///
/// Twist words enumerate lifts of the outer class; the trivial twist is φ
/// itself. Lifts act on words and, through iteration, on boundary points.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistedLift {
    base: Automorphism,
    twist: ReducedWord,
}

impl TwistedLift {
    pub fn new(base: Automorphism, twist: ReducedWord) -> TwistedLift {
        debug_assert!(twist.letters().iter().all(|l| base.alphabet.contains(*l)));
        TwistedLift { base, twist }
    }

    pub fn trivial(base: Automorphism) -> TwistedLift {
        TwistedLift { twist: ReducedWord::identity(), base }
    }

    pub fn base(&self) -> &Automorphism {
        &self.base
    }

    pub fn twist(&self) -> &ReducedWord {
        &self.twist
    }

    pub fn apply(&self, u: &ReducedWord, max_len: usize) -> Result<ReducedWord, AutError> {
        let w = self.base.apply(u, max_len)?.conjugate_by(&self.twist);
        if w.len() > max_len {
            Err(WordError::LengthBudget { len: w.len(), max: max_len }.into())
        } else {
            Ok(w)
        }
    }

    /// The q-th iterate as a lift of φ^q: twist w·φ(w)·…·φ^{q-1}(w).
    pub fn power(&self, q: usize, max_len: usize) -> Result<TwistedLift, AutError> {
        let mut twist = ReducedWord::identity();
        let mut phi_k_w = self.twist.clone();
        for _ in 0..q {
            twist = twist.concat_checked(&phi_k_w, max_len)?;
            phi_k_w = self.base.apply(&phi_k_w, max_len)?;
        }
        Ok(TwistedLift { base: self.base.power(q as i64, max_len)?, twist })
    }
}

impl fmt::Debug for TwistedLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwistedLift(twist=\"{}\")", self.twist)
    }
}

/// All twisted lifts with twist words of length ≤ `twist_bound`, trivial
/// twist first, then by length and lexicographic order.
pub fn sample_lifts(phi: &Automorphism, twist_bound: usize) -> Vec<TwistedLift> {
    let mut out = vec![TwistedLift::trivial(phi.clone())];
    for len in 1..=twist_bound {
        for w in crate::words::reduced_words_of_len(phi.alphabet(), len) {
            out.push(TwistedLift::new(phi.clone(), w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAX: usize = 1 << 20;

    fn tribonacci() -> Automorphism {
        Automorphism::parse("a->ab; b->ac; c->a").unwrap()
    }

    fn fibonacci() -> Automorphism {
        Automorphism::parse("a->ab; b->a").unwrap()
    }

    fn rw(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    #[test]
    fn parse_infers_rank_and_validates() {
        assert_eq!(tribonacci().alphabet().rank(), 3);
        assert_eq!(fibonacci().alphabet().rank(), 2);
        let err =
            Automorphism::parse_with_alphabet("a->ab; b->a", Alphabet::new(3).unwrap()).unwrap_err();
        assert_eq!(err, AutError::MissingImage('c'));
        assert_eq!(
            Automorphism::parse("a->ab; a->b; b->a").unwrap_err(),
            AutError::DuplicateClause('a')
        );
        assert!(matches!(Automorphism::parse("a=>ab; b->a").unwrap_err(), AutError::BadClause(_)));
    }

    #[test]
    fn text_round_trip() {
        for phi in [tribonacci(), fibonacci().with_verified_inverse(MAX).unwrap()] {
            assert_eq!(Automorphism::parse(&phi.to_text()).unwrap(), phi);
        }
    }

    #[test]
    fn apply_substitutes_and_reduces() {
        assert_eq!(tribonacci().apply(&rw("abc"), MAX).unwrap(), rw("abaca"));
        assert_eq!(fibonacci().apply(&rw("ab"), MAX).unwrap(), rw("aba"));
        // inverse letters map through inverted images: φ(b⁻¹a) = c⁻¹a⁻¹·ab = c⁻¹b
        assert_eq!(tribonacci().apply(&rw("Ba"), MAX).unwrap(), rw("Cb"));
    }

    #[test]
    fn apply_cyclic_is_class_level() {
        let phi = fibonacci();
        let (comm, _) = CyclicWord::from_word(&rw("abAB"));
        let img = phi.apply_cyclic(&comm, MAX).unwrap();
        assert_eq!(img, CyclicWord::from_word(&rw("baBA")).0);
        let trib = tribonacci();
        let (a, _) = CyclicWord::from_word(&rw("a"));
        assert_eq!(trib.apply_cyclic(&a, MAX).unwrap().to_string(), "ab");
    }

    #[test]
    fn compose_and_power() {
        let trib = tribonacci();
        let sq = trib.compose(&trib, MAX).unwrap();
        assert_eq!(sq.image_of_gen(0), &rw("abac"));
        assert_eq!(trib.power(2, MAX).unwrap(), sq);
        assert_eq!(trib.power(0, MAX).unwrap(), Automorphism::identity(*trib.alphabet()));
    }

    #[test]
    fn budget_is_an_error_not_truncation() {
        let trib = tribonacci();
        let err = trib.power(30, 1000).unwrap_err();
        assert!(matches!(err, AutError::Word(WordError::LengthBudget { .. })));
    }

    #[test]
    fn invert_fibonacci_and_tribonacci() {
        let psi = invert(&fibonacci(), MAX).unwrap();
        assert_eq!(psi.image_of_gen(0), &rw("b"));
        assert_eq!(psi.image_of_gen(1), &rw("Ba"));
        let tinv = invert(&tribonacci(), MAX).unwrap();
        assert_eq!(tinv.image_of_gen(0), &rw("c"));
        assert_eq!(tinv.image_of_gen(1), &rw("Ca"));
        assert_eq!(tinv.image_of_gen(2), &rw("Cb"));
        // inverting again restores the original images
        let back = invert(&tinv, MAX).unwrap();
        assert_eq!(back, tribonacci().with_verified_inverse(MAX).unwrap());
    }

    #[test]
    fn invert_rejects_non_automorphisms() {
        let endo = Automorphism::parse("a->a; b->a").unwrap();
        assert_eq!(invert(&endo, MAX).unwrap_err(), AutError::InversionFailed);
        let proper = Automorphism::parse("a->aa; b->b").unwrap();
        assert_eq!(invert(&proper, MAX).unwrap_err(), AutError::InversionFailed);
    }

    #[test]
    fn declared_inverse_is_checked() {
        let good = Automorphism::parse("a->ab; b->a\ninverse: a->b; b->Ba").unwrap();
        assert!(good.has_inverse());
        let bad = Automorphism::parse("a->ab; b->a\ninverse: a->b; b->ab");
        assert!(matches!(bad.unwrap_err(), AutError::InverseCheckFailed { .. }));
    }

    #[test]
    fn twisted_lift_conjugates() {
        let lift = TwistedLift::new(tribonacci(), rw("b"));
        assert_eq!(lift.apply(&rw("a"), MAX).unwrap(), rw("ba"));
        // Φ²  as a lift of φ²: twist b·φ(b) = b·ac
        let sq = lift.power(2, MAX).unwrap();
        assert_eq!(sq.twist(), &rw("bac"));
        assert_eq!(
            sq.apply(&rw("a"), MAX).unwrap(),
            lift.apply(&lift.apply(&rw("a"), MAX).unwrap(), MAX).unwrap()
        );
    }

    #[test]
    fn lift_sampling_is_exhaustive_and_ordered() {
        let lifts = sample_lifts(&fibonacci(), 2);
        assert_eq!(lifts.len(), 1 + 4 + 12);
        assert!(lifts[0].twist().is_empty());
        assert_eq!(lifts[1].twist(), &rw("a"));
    }
}
