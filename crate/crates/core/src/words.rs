//! Letters, words, rewrite rules and the almost-quantum word set.
//!
//! A letter records one measurement event `a|x` of one black-box party; words
//! are concatenations of letters. Three rewrite rules generate the word
//! equivalences: the empty word is the unit, repeating a letter is idempotent,
//! and letters of distinct parties commute. Letters of one party never
//! commute with each other, so within-party order is preserved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the size of a generated word set.
pub const DEFAULT_WORD_CAP: usize = 20_000;

/// One measurement event `output|input` of black-box party `party` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub party: usize,
    pub output: usize,
    pub input: usize,
}

impl Letter {
    pub fn new(party: usize, output: usize, input: usize) -> Self {
        Letter {
            party,
            output,
            input,
        }
    }
}

/// Outcome/input cardinalities of one black-box party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyDims {
    pub n_outputs: usize,
    pub n_inputs: usize,
}

/// Per-party cardinalities of a (possibly heterogeneous) collection of
/// black-box parties. Uniform EPR scenarios produce one via
/// [`Scenario::layout`]; appending a characterised party as one more black
/// box (e.g. Bob with his tomographic measurements) produces a mixed one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyLayout(pub Vec<PartyDims>);

impl PartyLayout {
    pub fn uniform(n_parties: usize, n_outputs: usize, n_inputs: usize) -> Self {
        PartyLayout(vec![
            PartyDims {
                n_outputs,
                n_inputs
            };
            n_parties
        ])
    }

    pub fn n_parties(&self) -> usize {
        self.0.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::invalid("layout needs at least one party"));
        }
        for (k, p) in self.0.iter().enumerate() {
            if p.n_outputs < 1 || p.n_inputs < 1 {
                return Err(Error::invalid(format!(
                    "party {k}: cardinalities must be at least 1"
                )));
            }
        }
        Ok(())
    }

    pub fn check_letter(&self, l: &Letter) -> Result<()> {
        let p = self.0.get(l.party).ok_or_else(|| {
            Error::invalid(format!(
                "letter party {} out of bounds ({} parties)",
                l.party,
                self.n_parties()
            ))
        })?;
        if l.output >= p.n_outputs || l.input >= p.n_inputs {
            return Err(Error::invalid(format!(
                "letter {}|{}@{} out of bounds for party with {} outputs, {} inputs",
                l.output,
                l.input,
                l.party + 1,
                p.n_outputs,
                p.n_inputs
            )));
        }
        Ok(())
    }

    /// Number of words with at most one letter per party, as u128 to guard
    /// against overflow before the cap check.
    pub fn aq_word_count(&self) -> u128 {
        self.0
            .iter()
            .map(|p| 1 + (p.n_outputs as u128) * (p.n_inputs as u128))
            .product()
    }

    /// Append one more party.
    pub fn with_party(&self, dims: PartyDims) -> PartyLayout {
        let mut v = self.0.clone();
        v.push(dims);
        PartyLayout(v)
    }
}

/// An EPR scenario: N black-box parties sharing outcome/input label sets, and
/// one characterised party of Hilbert-space dimension `bob_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_parties: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub bob_dim: usize,
}

impl Scenario {
    pub fn new(n_parties: usize, n_inputs: usize, n_outputs: usize, bob_dim: usize) -> Result<Self> {
        let s = Scenario {
            n_parties,
            n_inputs,
            n_outputs,
            bob_dim,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_parties < 1 {
            return Err(Error::invalid("scenario needs at least one black-box party"));
        }
        if self.n_inputs < 1 {
            return Err(Error::invalid("scenario needs at least one input label"));
        }
        if self.n_outputs < 2 {
            return Err(Error::invalid("scenario needs at least two output labels"));
        }
        if self.bob_dim < 1 {
            return Err(Error::invalid("bob_dim must be at least 1"));
        }
        Ok(())
    }

    pub fn layout(&self) -> PartyLayout {
        PartyLayout::uniform(self.n_parties, self.n_outputs, self.n_inputs)
    }

    /// Number of joint outcome tuples of the black boxes.
    pub fn n_output_tuples(&self) -> usize {
        self.n_outputs.pow(self.n_parties as u32)
    }

    /// Number of joint input tuples of the black boxes.
    pub fn n_input_tuples(&self) -> usize {
        self.n_inputs.pow(self.n_parties as u32)
    }
}

/// A word in canonical form: letters stably sorted by party with adjacent
/// duplicates collapsed. Within one party's block the original order is
/// preserved; only blocks of distinct parties commute.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word {
            letters: Vec::new(),
        }
    }

    /// Canonicalize a raw letter sequence without bounds checking.
    pub fn from_letters(raw: &[Letter]) -> Self {
        let mut letters = raw.to_vec();
        // stable sort keeps within-party order
        letters.sort_by_key(|l| l.party);
        // idempotence vv -> v to a fixed point; one pass suffices after a
        // stable sort but the loop keeps the rewrite honest for any input
        let bound = letters.len() * letters.len() + 1;
        for _ in 0..bound {
            let mut collapsed = Vec::with_capacity(letters.len());
            for l in &letters {
                if collapsed.last() == Some(l) {
                    continue;
                }
                collapsed.push(*l);
            }
            if collapsed.len() == letters.len() {
                break;
            }
            letters = collapsed;
        }
        Word { letters }
    }

    pub fn single(l: Letter) -> Self {
        Word { letters: vec![l] }
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

    /// Letters written in reverse order (and re-canonicalized, which restores
    /// the party sort while reversing each within-party block).
    pub fn dagger(&self) -> Word {
        let rev: Vec<Letter> = self.letters.iter().rev().copied().collect();
        Word::from_letters(&rev)
    }

    /// True iff some party contributes two adjacent letters with the same
    /// input and different outputs. On canonical words all letters of one
    /// party are adjacent, and the products this crate forms carry at most
    /// two letters per party, where adjacency covers every same-party pair.
    pub fn is_null(&self) -> bool {
        self.letters.windows(2).any(|w| {
            w[0].party == w[1].party && w[0].input == w[1].input && w[0].output != w[1].output
        })
    }

    /// At most one letter per party (membership in the almost-quantum set of
    /// words for some layout).
    pub fn is_single_per_party(&self) -> bool {
        self.letters.windows(2).all(|w| w[0].party != w[1].party)
    }

    /// Word concatenation v·w followed by canonicalization.
    pub fn concat(&self, other: &Word) -> Word {
        let mut raw = self.letters.clone();
        raw.extend_from_slice(&other.letters);
        Word::from_letters(&raw)
    }

    fn order_key(&self) -> (usize, Vec<usize>, Vec<usize>, Vec<usize>) {
        (
            self.letters.len(),
            self.letters.iter().map(|l| l.party).collect(),
            self.letters.iter().map(|l| l.input).collect(),
            self.letters.iter().map(|l| l.output).collect(),
        )
    }

    /// Serialization: "a|x@k . a|x@k"; the empty word is "∅". Parties are
    /// 1-based in the text form.
    pub fn to_text(&self) -> String {
        if self.letters.is_empty() {
            return "∅".to_string();
        }
        self.letters
            .iter()
            .map(|l| format!("{}|{}@{}", l.output, l.input, l.party + 1))
            .collect::<Vec<_>>()
            .join(" . ")
    }

    pub fn from_text(s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "∅" || s.is_empty() {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for part in s.split('.') {
            let part = part.trim();
            let (ax, k) = part
                .split_once('@')
                .ok_or_else(|| Error::format(format!("bad letter '{part}': missing '@'")))?;
            let (a, x) = ax
                .split_once('|')
                .ok_or_else(|| Error::format(format!("bad letter '{part}': missing '|'")))?;
            let party: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::format(format!("bad party index in '{part}'")))?;
            if party == 0 {
                return Err(Error::format("party indices are 1-based in text form"));
            }
            letters.push(Letter {
                party: party - 1,
                output: a
                    .trim()
                    .parse()
                    .map_err(|_| Error::format(format!("bad output in '{part}'")))?,
                input: x
                    .trim()
                    .parse()
                    .map_err(|_| Error::format(format!("bad input in '{part}'")))?,
            });
        }
        Ok(Word::from_letters(&letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Canonical form of a raw letter sequence under the rewrite rules.
///
/// Errors on letters outside the layout bounds.
pub fn canonicalize(raw: &[Letter], layout: &PartyLayout) -> Result<Word> {
    for l in raw {
        layout.check_letter(l)?;
    }
    Ok(Word::from_letters(raw))
}

/// Product key of v†w under the full rewriting, or the null marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProductKey {
    Null,
    Key(Word),
}

impl ProductKey {
    pub fn is_null(&self) -> bool {
        matches!(self, ProductKey::Null)
    }

    /// Dagger-reversal of the key.
    pub fn dagger(&self) -> ProductKey {
        match self {
            ProductKey::Null => ProductKey::Null,
            ProductKey::Key(w) => ProductKey::Key(w.dagger()),
        }
    }
}

/// Canonical key of the product v†w, or the null marker. Two pairs with equal
/// products modulo the symmetry operations map to the same key.
pub fn product_key(v: &Word, w: &Word) -> ProductKey {
    let prod = v.dagger().concat(w);
    if prod.is_null() {
        ProductKey::Null
    } else {
        ProductKey::Key(prod)
    }
}

/// The almost-quantum word set over a layout: the empty word plus every word
/// with at most one letter per party, ordered by (length, parties, inputs,
/// outputs) with ∅ first.
pub fn generate_aq_words_layout(layout: &PartyLayout, cap: usize) -> Result<Vec<Word>> {
    layout.validate()?;
    let count = layout.aq_word_count();
    if count > cap as u128 {
        return Err(Error::ScenarioTooLarge { words: count, cap });
    }
    let n = layout.n_parties();
    let mut words: Vec<Word> = Vec::with_capacity(count as usize);
    // one slot per party: None or a letter; depth-first over parties
    let mut current: Vec<Option<Letter>> = vec![None; n];
    fn rec(
        layout: &PartyLayout,
        k: usize,
        current: &mut Vec<Option<Letter>>,
        words: &mut Vec<Word>,
    ) {
        if k == layout.n_parties() {
            let letters: Vec<Letter> = current.iter().flatten().copied().collect();
            words.push(Word::from_letters(&letters));
            return;
        }
        current[k] = None;
        rec(layout, k + 1, current, words);
        let dims = layout.0[k];
        for x in 0..dims.n_inputs {
            for a in 0..dims.n_outputs {
                current[k] = Some(Letter::new(k, a, x));
                rec(layout, k + 1, current, words);
            }
        }
        current[k] = None;
    }
    rec(layout, 0, &mut current, &mut words);
    words.sort();
    debug_assert_eq!(words.len() as u128, count);
    Ok(words)
}

/// Uniform-scenario wrapper around [`generate_aq_words_layout`] with the
/// default cap.
pub fn generate_aq_words(scenario: &Scenario) -> Result<Vec<Word>> {
    scenario.validate()?;
    generate_aq_words_layout(&scenario.layout(), DEFAULT_WORD_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(party: usize, output: usize, input: usize) -> Letter {
        Letter::new(party, output, input)
    }

    #[test]
    fn canonicalize_sorts_across_parties() {
        let layout = PartyLayout::uniform(2, 2, 2);
        let w = canonicalize(&[l(1, 0, 1), l(0, 1, 0)], &layout).unwrap();
        assert_eq!(w.letters(), &[l(0, 1, 0), l(1, 0, 1)]);
    }

    #[test]
    fn canonicalize_applies_idempotence() {
        let layout = PartyLayout::uniform(1, 2, 2);
        let w = canonicalize(&[l(0, 0, 0), l(0, 0, 0)], &layout).unwrap();
        assert_eq!(w.letters(), &[l(0, 0, 0)]);
        let e = canonicalize(&[], &layout).unwrap();
        assert!(e.is_empty());
    }

    #[test]
    fn canonicalize_rejects_out_of_bounds() {
        let layout = PartyLayout::uniform(1, 2, 2);
        assert!(canonicalize(&[l(1, 0, 0)], &layout).is_err());
        assert!(canonicalize(&[l(0, 2, 0)], &layout).is_err());
        assert!(canonicalize(&[l(0, 0, 5)], &layout).is_err());
    }

    #[test]
    fn null_detection() {
        assert!(Word::from_letters(&[l(0, 0, 0), l(0, 1, 0)]).is_null());
        assert!(!Word::from_letters(&[l(0, 0, 0), l(0, 1, 1)]).is_null());
        assert!(!Word::empty().is_null());
    }

    #[test]
    fn aq_word_counts() {
        let s = Scenario::new(1, 2, 2, 2).unwrap();
        assert_eq!(generate_aq_words(&s).unwrap().len(), 5);
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        assert_eq!(generate_aq_words(&s).unwrap().len(), 25);
        // single-outcome parties are legal at the layout level
        let layout = PartyLayout::uniform(1, 1, 1);
        let words = generate_aq_words_layout(&layout, DEFAULT_WORD_CAP).unwrap();
        assert_eq!(words.len(), 2);
        assert!(words[0].is_empty());
        assert_eq!(words[1].letters(), &[l(0, 0, 0)]);
    }

    #[test]
    fn aq_words_start_with_empty_and_are_sorted() {
        let s = Scenario::new(2, 2, 2, 2).unwrap();
        let words = generate_aq_words(&s).unwrap();
        assert!(words[0].is_empty());
        for w in words.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let layout = PartyLayout::uniform(6, 3, 3);
        let err = generate_aq_words_layout(&layout, 20_000).unwrap_err();
        assert!(matches!(err, Error::ScenarioTooLarge { .. }));
    }

    #[test]
    fn product_key_examples() {
        let a00 = Word::single(l(0, 0, 0));
        let a10 = Word::single(l(0, 1, 0));
        let b11 = Word::single(l(1, 1, 1));
        // projector squared
        assert_eq!(product_key(&a00, &a00), ProductKey::Key(a00.clone()));
        // orthogonal outcomes
        assert_eq!(product_key(&a00, &a10), ProductKey::Null);
        // cross-party commutation: key(v,w) = key(∅, vw)
        let combined = a00.concat(&b11);
        assert_eq!(
            product_key(&a00, &b11),
            product_key(&Word::empty(), &combined)
        );
    }

    #[test]
    fn scenario_invariants() {
        assert!(Scenario::new(0, 2, 2, 2).is_err());
        assert!(Scenario::new(1, 0, 2, 2).is_err());
        assert!(Scenario::new(1, 2, 1, 2).is_err());
        assert!(Scenario::new(1, 2, 2, 0).is_err());
    }

    #[test]
    fn word_text_roundtrip() {
        let w = Word::from_letters(&[l(0, 1, 0), l(1, 0, 1)]);
        assert_eq!(w.to_text(), "1|0@1 . 0|1@2");
        assert_eq!(Word::from_text(&w.to_text()).unwrap(), w);
        assert_eq!(Word::from_text("∅").unwrap(), Word::empty());
    }

    fn arb_letter(n_parties: usize, n_out: usize, n_in: usize) -> impl Strategy<Value = Letter> {
        (0..n_parties, 0..n_out, 0..n_in).prop_map(|(k, a, x)| Letter::new(k, a, x))
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(raw in prop::collection::vec(arb_letter(3, 3, 3), 0..12)) {
            let once = Word::from_letters(&raw);
            let twice = Word::from_letters(once.letters());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn product_key_dagger_symmetry(
            va in prop::collection::vec(arb_letter(3, 2, 2), 0..3),
            wa in prop::collection::vec(arb_letter(3, 2, 2), 0..3),
        ) {
            let v = Word::from_letters(&va);
            let w = Word::from_letters(&wa);
            let k_vw = product_key(&v, &w);
            let k_wv = product_key(&w, &v);
            prop_assert_eq!(k_vw, k_wv.dagger());
        }

        #[test]
        fn null_products_get_null_marker(
            va in prop::collection::vec(arb_letter(3, 2, 2), 0..3),
            wa in prop::collection::vec(arb_letter(3, 2, 2), 0..3),
        ) {
            let v = Word::from_letters(&va);
            let w = Word::from_letters(&wa);
            let prod = v.dagger().concat(&w);
            if prod.is_null() {
                prop_assert!(product_key(&v, &w).is_null());
            }
        }

        #[test]
        fn aq_count_matches_formula(n in 1usize..=3, a in 1usize..=3, x in 1usize..=3) {
            let layout = PartyLayout::uniform(n, a, x);
            let words = generate_aq_words_layout(&layout, DEFAULT_WORD_CAP).unwrap();
            let expected = (1 + a * x).pow(n as u32);
            prop_assert_eq!(words.len(), expected);
        }
    }
}
