//! Free-group words over a fixed finite basis.
//!
//! Letters are the generators `a..z` of a rank-N free group together with
//! their formal inverses, written as the corresponding uppercase characters
//! (`A` is the inverse of `a`). A [`ReducedWord`] is stored freely reduced; a
//! [`CyclicWord`] is additionally cyclically reduced and held in a canonical
//! rotation, so `CyclicWord` equality is equality of conjugacy classes.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported rank: one generator per ASCII letter.
pub const MAX_RANK: usize = 26;

/// Hard default cap on word length. Exceeding a cap is always a reported
/// error, never silent truncation.
pub const DEFAULT_MAX_WORD_LEN: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("rank {0} outside supported range 2..={MAX_RANK}")]
    BadRank(usize),
    #[error("character {ch:?} at position {pos} is not a letter of the rank-{rank} alphabet")]
    BadLetter { ch: char, pos: usize, rank: usize },
    #[error("word length {len} exceeds the {max}-letter budget")]
    LengthBudget { len: usize, max: usize },
}

/// One generator or inverse generator. Positive values are generators
/// (`1` = a), negative their inverses (`-1` = a⁻¹); zero never occurs.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Letter(i8);

impl Letter {
    pub fn generator(index: usize) -> Letter {
        debug_assert!(index < MAX_RANK);
        Letter(index as i8 + 1)
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Index of the underlying generator, ignoring orientation.
    pub fn index(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.index() as u8) as char
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a'..='z' => Some(Letter((c as u8 - b'a') as i8 + 1)),
            'A'..='Z' => Some(Letter(-((c as u8 - b'A') as i8 + 1))),
            _ => None,
        }
    }

    /// Slot in `0..2*rank`, generators and inverses interleaved. Used to
    /// index transition tables.
    pub fn slot(self) -> usize {
        2 * self.index() + self.is_inverse() as usize
    }

    pub fn from_slot(slot: usize) -> Letter {
        let l = Letter(slot as i8 / 2 + 1);
        if slot % 2 == 1 {
            l.inverse()
        } else {
            l
        }
    }
}

/// Letters sort a < a⁻¹ < b < b⁻¹ < …, the order behind every canonical
/// rotation and every deterministic enumeration in this crate.
impl Ord for Letter {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.slot().cmp(&other.slot())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_char(self.to_char())
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let c = char::deserialize(d)?;
        Letter::from_char(c)
            .ok_or_else(|| serde::de::Error::custom(format!("'{c}' is not a letter")))
    }
}

/// The basis of the free group: generators `a`, `b`, … up to the rank.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Alphabet {
    rank: usize,
}

impl Alphabet {
    pub fn new(rank: usize) -> Result<Alphabet, WordError> {
        if (2..=MAX_RANK).contains(&rank) {
            Ok(Alphabet { rank })
        } else {
            Err(WordError::BadRank(rank))
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn contains(&self, l: Letter) -> bool {
        l.index() < self.rank
    }

    pub fn generators(&self) -> impl Iterator<Item = Letter> {
        (0..self.rank).map(Letter::generator)
    }

    /// All `2*rank` letters in canonical order a, a⁻¹, b, b⁻¹, …
    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..2 * self.rank).map(Letter::from_slot)
    }
}

fn parse_letters(s: &str, alphabet: &Alphabet) -> Result<Vec<Letter>, WordError> {
    let mut out = Vec::new();
    for (pos, ch) in s.chars().enumerate() {
        if ch.is_whitespace() {
            continue;
        }
        let l = Letter::from_char(ch).filter(|l| alphabet.contains(*l)).ok_or({
            WordError::BadLetter { ch, pos, rank: alphabet.rank }
        })?;
        out.push(l);
    }
    Ok(out)
}

/// Stack-based free reduction: adjacent inverse pairs cancel until none remain.
fn reduce_letters(raw: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in raw {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity() -> ReducedWord {
        ReducedWord::default()
    }

    /// Reduces an arbitrary letter sequence.
    pub fn from_letters(raw: impl IntoIterator<Item = Letter>) -> ReducedWord {
        ReducedWord { letters: reduce_letters(raw) }
    }

    /// Parses the text format (lowercase generators, uppercase inverses,
    /// whitespace ignored) and reduces.
    pub fn parse(s: &str, alphabet: &Alphabet) -> Result<ReducedWord, WordError> {
        Ok(ReducedWord::from_letters(parse_letters(s, alphabet)?))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    /// Product u·v with free reduction at the seam only; u and v are already
    /// reduced so no interior cancellation can occur.
    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        let mut left = self.letters.clone();
        let mut i = 0;
        while i < other.letters.len() {
            if left.last() == Some(&other.letters[i].inverse()) {
                left.pop();
                i += 1;
            } else {
                break;
            }
        }
        left.extend_from_slice(&other.letters[i..]);
        ReducedWord { letters: left }
    }

    pub fn concat_checked(
        &self,
        other: &ReducedWord,
        max_len: usize,
    ) -> Result<ReducedWord, WordError> {
        let w = self.concat(other);
        if w.len() > max_len {
            Err(WordError::LengthBudget { len: w.len(), max: max_len })
        } else {
            Ok(w)
        }
    }

    /// Conjugate g·w·g⁻¹.
    pub fn conjugate_by(&self, g: &ReducedWord) -> ReducedWord {
        g.concat(self).concat(&g.inverse())
    }

    pub fn prefix(&self, n: usize) -> ReducedWord {
        ReducedWord { letters: self.letters[..n.min(self.len())].to_vec() }
    }

    pub fn common_prefix_len(&self, other: &ReducedWord) -> usize {
        self.letters.iter().zip(&other.letters).take_while(|(a, b)| a == b).count()
    }

    /// All length-k windows, in order of occurrence.
    pub fn subwords(&self, k: usize) -> impl Iterator<Item = &[Letter]> {
        self.letters.windows(k)
    }

    pub fn contains_subword(&self, sub: &[Letter]) -> bool {
        !sub.is_empty() && self.letters.windows(sub.len()).any(|w| w == sub)
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl Serialize for ReducedWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReducedWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Parses against the full 26-letter alphabet; use [`ReducedWord::parse`]
/// when the rank matters.
impl FromStr for ReducedWord {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReducedWord::parse(s, &Alphabet { rank: MAX_RANK })
    }
}

/// Index of the lexicographically least rotation (two-pointer scan over the
/// doubled word).
fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    if n < 2 {
        return 0;
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = s[(i + k) % n];
        let b = s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

/// A conjugacy class: cyclically reduced and stored in the lexicographically
/// least rotation, so equal values mean conjugate words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    /// Cyclically reduces a word, returning the class together with the
    /// stripped conjugator: `w = g · core · g⁻¹` where `core` is a rotation
    /// of the returned class.
    pub fn from_word(w: &ReducedWord) -> (CyclicWord, ReducedWord) {
        let mut letters = w.letters.clone();
        let mut conj = Vec::new();
        while letters.len() >= 2 && *letters.last().unwrap() == letters[0].inverse() {
            conj.push(letters[0]);
            letters.pop();
            letters.remove(0);
        }
        let rot = least_rotation(&letters);
        letters.rotate_left(rot);
        (CyclicWord { letters }, ReducedWord { letters: conj })
    }

    pub fn parse(s: &str, alphabet: &Alphabet) -> Result<CyclicWord, WordError> {
        Ok(CyclicWord::from_word(&ReducedWord::parse(s, alphabet)?).0)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// A representative of the class as a linear word.
    pub fn to_word(&self) -> ReducedWord {
        ReducedWord { letters: self.letters.clone() }
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::from_word(&self.to_word().inverse()).0
    }

    /// Length-k subwords of the periodic bi-infinite word `…www…`, one per
    /// starting phase. Defined for every k ≥ 1.
    pub fn cyclic_subwords(&self, k: usize) -> Vec<ReducedWord> {
        if self.is_empty() || k == 0 {
            return Vec::new();
        }
        let ext: Vec<Letter> =
            self.letters.iter().copied().cycle().take(self.len() + k - 1).collect();
        (0..self.len()).map(|i| ReducedWord { letters: ext[i..i + k].to_vec() }).collect()
    }

    /// Does `sub` occur in the periodic word `…www…`?
    pub fn contains_cyclic(&self, sub: &[Letter]) -> bool {
        if sub.is_empty() || self.is_empty() {
            return false;
        }
        let ext: Vec<Letter> =
            self.letters.iter().copied().cycle().take(self.len() + sub.len() - 1).collect();
        ext.windows(sub.len()).any(|w| w == sub)
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl Serialize for CyclicWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CyclicWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w: ReducedWord = Deserialize::deserialize(d)?;
        Ok(CyclicWord::from_word(&w).0)
    }
}

/// Conjugacy test: cyclic reductions agree up to rotation.
pub fn is_conjugate(u: &ReducedWord, v: &ReducedWord) -> bool {
    CyclicWord::from_word(u).0 == CyclicWord::from_word(v).0
}

/// All freely reduced words of exactly `len` letters, lexicographic order.
pub fn reduced_words_of_len(alphabet: &Alphabet, len: usize) -> Vec<ReducedWord> {
    let mut out = Vec::new();
    let mut cur: Vec<Letter> = Vec::with_capacity(len);
    fn go(alphabet: &Alphabet, len: usize, cur: &mut Vec<Letter>, out: &mut Vec<ReducedWord>) {
        if cur.len() == len {
            out.push(ReducedWord { letters: cur.clone() });
            return;
        }
        for l in alphabet.letters() {
            if cur.last() == Some(&l.inverse()) {
                continue;
            }
            cur.push(l);
            go(alphabet, len, cur, out);
            cur.pop();
        }
    }
    go(alphabet, len, &mut cur, &mut out);
    out
}

/// All conjugacy classes with representatives of exactly `len` letters,
/// deduplicated, in lexicographic order of the canonical rotation.
pub fn cyclic_words_of_len(alphabet: &Alphabet, len: usize) -> Vec<CyclicWord> {
    let mut out: Vec<CyclicWord> = reduced_words_of_len(alphabet, len)
        .into_iter()
        .filter_map(|w| {
            let (c, conj) = CyclicWord::from_word(&w);
            // keep only words that were already cyclically reduced, so every
            // class of this exact length appears
            (conj.is_empty() && c.len() == len).then_some(c)
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(rank: usize) -> Alphabet {
        Alphabet::new(rank).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s, &ab(3)).unwrap()
    }

    #[test]
    fn reduce_cancels_inverse_pairs() {
        assert_eq!(w("abBa").to_string(), "aa");
        assert_eq!(w("aA"), ReducedWord::identity());
        assert_eq!(w("a b\tB\na"), w("aa")); // whitespace ignored
        assert_eq!(w("abBAba").to_string(), "ba"); // cascading cancellation
    }

    #[test]
    fn parse_rejects_foreign_letters() {
        let err = ReducedWord::parse("abd", &ab(3)).unwrap_err();
        assert_eq!(err, WordError::BadLetter { ch: 'd', pos: 2, rank: 3 });
    }

    #[test]
    fn cyclic_reduction_strips_conjugator() {
        let (core, conj) = CyclicWord::from_word(&w("baB"));
        assert_eq!(core.to_string(), "a");
        assert_eq!(conj.to_string(), "b");
        // w = conj · core' · conj⁻¹ for some rotation core' of core
        assert_eq!(w("baB"), core.to_word().conjugate_by(&conj));
    }

    #[test]
    fn canonical_rotation_is_least() {
        let c = CyclicWord::parse("bca", &ab(3)).unwrap();
        assert_eq!(c.to_string(), "abc");
        let c = CyclicWord::parse("baB", &ab(3)).unwrap();
        assert_eq!(c.to_string(), "a");
    }

    #[test]
    fn conjugacy_by_rotation_and_conjugation() {
        assert!(is_conjugate(&w("ab"), &w("ba")));
        assert!(is_conjugate(&w("abc"), &w("cab")));
        assert!(!is_conjugate(&w("ab"), &w("aB")));
        let u = w("abAc");
        assert!(is_conjugate(&u, &u.conjugate_by(&w("bAcb"))));
    }

    #[test]
    fn letter_order_is_gen_then_inverse() {
        let l: Vec<String> = ab(2).letters().map(|l| l.to_string()).collect();
        assert_eq!(l, ["a", "A", "b", "B"]);
        assert!(w("ab") < w("aB"));
    }

    #[test]
    fn inverse_reverses_and_flips() {
        assert_eq!(w("abC").inverse().to_string(), "cBA");
        assert_eq!(w("abC").concat(&w("abC").inverse()), ReducedWord::identity());
    }

    #[test]
    fn cyclic_subwords_wrap() {
        let c = CyclicWord::parse("ab", &ab(2)).unwrap();
        let subs: Vec<String> = c.cyclic_subwords(3).iter().map(|s| s.to_string()).collect();
        assert_eq!(subs, ["aba", "bab"]);
        assert!(c.contains_cyclic(w("ba").letters()));
        // the class [a] is the periodic line …aaa…
        let a = CyclicWord::parse("a", &ab(2)).unwrap();
        assert!(a.contains_cyclic(w("aa").letters()));
    }

    #[test]
    fn enumeration_counts() {
        // 2N·(2N−1)^(len−1) reduced words
        assert_eq!(reduced_words_of_len(&ab(2), 1).len(), 4);
        assert_eq!(reduced_words_of_len(&ab(2), 2).len(), 12);
        assert_eq!(reduced_words_of_len(&ab(3), 3).len(), 150);
        // every class exactly once: {aa, AA, bb, BB} ∪ {ab, aB, Ab, AB} up to rotation
        assert_eq!(cyclic_words_of_len(&ab(2), 1).len(), 4);
        let len2 = cyclic_words_of_len(&ab(2), 2);
        assert_eq!(len2.len(), 8);
        assert!(len2.iter().all(|c| c.len() == 2));
        assert!(len2.contains(&CyclicWord::parse("ba", &ab(2)).unwrap()));
        assert_eq!(CyclicWord::parse("ba", &ab(2)).unwrap().to_string(), "ab");
    }
}
