use serde::{Deserialize, Serialize};

use super::generators::{GeneratorSet, Token};

/// A freely reduced word over a [`GeneratorSet`].
///
/// The letters never contain an adjacent pair `s, s^-1`; every constructor
/// reduces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Token>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(t: Token) -> Self {
        Word(vec![t])
    }

    pub fn from_letters<I: IntoIterator<Item = Token>>(letters: I, gens: &GeneratorSet) -> Self {
        let mut w = Word::identity();
        for t in letters {
            w.push(t, gens);
        }
        w
    }

    /// Appends `t` on the right, cancelling against the last letter.
    pub fn push(&mut self, t: Token, gens: &GeneratorSet) {
        match self.0.last() {
            Some(&last) if gens.inv(last) == t => {
                self.0.pop();
            }
            _ => self.0.push(t),
        }
    }

    pub fn letters(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn last(&self) -> Option<Token> {
        self.0.last().copied()
    }

    pub fn mul(&self, other: &Word, gens: &GeneratorSet) -> Word {
        let mut out = self.clone();
        for &t in &other.0 {
            out.push(t, gens);
        }
        out
    }

    pub fn inverse(&self, gens: &GeneratorSet) -> Word {
        Word(self.0.iter().rev().map(|&t| gens.inv(t)).collect())
    }

    /// Strips matching `s ... s^-1` from both ends. In a free group the
    /// result has minimal length in the conjugacy class.
    pub fn cyclic_reduction(&self, gens: &GeneratorSet) -> Word {
        let letters = &self.0;
        let (mut lo, mut hi) = (0usize, letters.len());
        while hi - lo >= 2 && gens.inv(letters[lo]) == letters[hi - 1] {
            lo += 1;
            hi -= 1;
        }
        Word(letters[lo..hi].to_vec())
    }

    pub fn is_cyclically_reduced(&self, gens: &GeneratorSet) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&a), Some(&b)) if self.0.len() >= 2 => gens.inv(a) != b,
            _ => true,
        }
    }

    pub fn is_reduced(&self, gens: &GeneratorSet) -> bool {
        self.0.windows(2).all(|p| gens.inv(p[0]) != p[1])
    }

    pub fn format(&self, gens: &GeneratorSet) -> String {
        if self.0.is_empty() {
            return "e".to_string();
        }
        self.0
            .iter()
            .map(|&t| gens.name(t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> GeneratorSet {
        GeneratorSet::free(2)
    }

    // a = g0 (0), A = g0^-1 (1), b = g1 (2), B = g1^-1 (3)
    const A: Token = Token(0);
    const AI: Token = Token(1);
    const B: Token = Token(2);
    const BI: Token = Token(3);

    #[test]
    fn products_cancel() {
        let s = f2();
        let w = Word::from_letters([A, AI], &s).mul(&Word::letter(B), &s);
        assert_eq!(w.letters(), &[B]);
        let w = Word::from_letters([A, B], &s).mul(&Word::from_letters([BI, A], &s), &s);
        assert_eq!(w.letters(), &[A, A]);
    }

    #[test]
    fn inverse_reverses() {
        let s = f2();
        let w = Word::from_letters([A, B], &s);
        assert_eq!(w.inverse(&s).letters(), &[BI, AI]);
        assert!(w.mul(&w.inverse(&s), &s).is_identity());
        assert!(Word::identity().inverse(&s).is_identity());
    }

    #[test]
    fn cyclic_reduction_strips_conjugators() {
        let s = f2();
        let w = Word::from_letters([A, B, AI], &s);
        assert_eq!(w.cyclic_reduction(&s).letters(), &[B]);
        let w = Word::from_letters([A, B], &s);
        assert_eq!(w.cyclic_reduction(&s).len(), 2);
        let w = Word::from_letters([A, B, A, BI, AI], &s);
        assert_eq!(w.cyclic_reduction(&s).letters(), &[A]);
        assert!(!w.is_cyclically_reduced(&s));
    }

    #[test]
    fn format_uses_token_names() {
        let s = f2();
        assert_eq!(Word::identity().format(&s), "e");
        assert_eq!(Word::from_letters([A, BI], &s).format(&s), "g0 g1^-1");
    }
}
