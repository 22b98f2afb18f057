//! Group backends: free groups `F_m` with reduced words, and explicit finite
//! groups given by a multiplication table.
//!
//! Elements are canonical (reduced words or table indices), so they can key
//! measures directly. Ball enumeration and random-walk convolution refuse to
//! grow beyond a configurable support cap rather than truncate.

mod finite;
mod generators;
mod spec;
mod walk;
mod word;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use finite::{cyclic_table, product_cyclic_table, s3_table, FiniteTable};
pub use generators::{GeneratorSet, Token};
pub use spec::GroupSpec;
pub use walk::WalkMeasure;
pub use word::Word;

pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("token {0} is not in the generating set")]
    UnknownToken(String),
    #[error("element {0} does not belong to this group")]
    ForeignElement(String),
    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),
    #[error("multiplication is not associative on ({0}, {1}, {2})")]
    NotAssociative(u32, u32, u32),
    #[error("invalid generating set: {0}")]
    InvalidGenerator(String),
    #[error("generating set does not reach element {0}")]
    NotGenerating(u32),
    #[error("support of size {size} exceeds the cap of {cap} elements")]
    CapExceeded { size: u128, cap: usize },
    #[error("free group rank must be at least 1")]
    ZeroRank,
}

/// A group element in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Word(Word),
    Index(u32),
}

impl Element {
    pub fn as_word(&self) -> Option<&Word> {
        match self {
            Element::Word(w) => Some(w),
            Element::Index(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
enum Backend {
    Free { rank: usize },
    Finite(FiniteTable),
}

/// A finitely generated group with a symmetric generating set.
#[derive(Clone, Debug)]
pub struct GroupContext {
    backend: Backend,
    gens: GeneratorSet,
    cap: usize,
}

impl fmt::Display for GroupContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.backend {
            Backend::Free { rank } => write!(f, "F_{rank}"),
            Backend::Finite(t) => write!(f, "finite group of order {}", t.order()),
        }
    }
}

impl GroupContext {
    pub fn free(rank: usize) -> Result<Self, GroupError> {
        if rank == 0 {
            return Err(GroupError::ZeroRank);
        }
        Ok(GroupContext {
            backend: Backend::Free { rank },
            gens: GeneratorSet::free(rank),
            cap: DEFAULT_SUPPORT_CAP,
        })
    }

    pub fn finite(table: &[Vec<u32>], generators: &[u32]) -> Result<Self, GroupError> {
        let (table, gens) = FiniteTable::new(table, generators)?;
        Ok(GroupContext {
            backend: Backend::Finite(table),
            gens,
            cap: DEFAULT_SUPPORT_CAP,
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    /// `#S`.
    pub fn degree(&self) -> usize {
        self.gens.len()
    }

    pub fn free_rank(&self) -> Option<usize> {
        match self.backend {
            Backend::Free { rank } => Some(rank),
            Backend::Finite(_) => None,
        }
    }

    pub fn finite_table(&self) -> Option<&FiniteTable> {
        match &self.backend {
            Backend::Finite(t) => Some(t),
            Backend::Free { .. } => None,
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self.backend, Backend::Free { .. })
    }

    pub fn identity(&self) -> Element {
        match &self.backend {
            Backend::Free { .. } => Element::Word(Word::identity()),
            Backend::Finite(t) => Element::Index(t.identity()),
        }
    }

    pub fn generator(&self, t: Token) -> Result<Element, GroupError> {
        if !self.gens.contains(t) {
            return Err(GroupError::UnknownToken(t.to_string()));
        }
        Ok(match &self.backend {
            Backend::Free { .. } => Element::Word(Word::letter(t)),
            Backend::Finite(table) => Element::Index(table.token_element(t)),
        })
    }

    /// Checks that `g` is a canonical element of this group.
    pub fn validate(&self, g: &Element) -> Result<(), GroupError> {
        match (&self.backend, g) {
            (Backend::Free { .. }, Element::Word(w)) => {
                if let Some(bad) = w.letters().iter().find(|t| !self.gens.contains(**t)) {
                    return Err(GroupError::UnknownToken(bad.to_string()));
                }
                if !w.is_reduced(&self.gens) {
                    return Err(GroupError::ForeignElement("unreduced word".into()));
                }
                Ok(())
            }
            (Backend::Finite(t), Element::Index(i)) if (*i as usize) < t.order() => Ok(()),
            _ => Err(GroupError::ForeignElement(format!("{g:?}"))),
        }
    }

    pub fn multiply(&self, g: &Element, h: &Element) -> Result<Element, GroupError> {
        self.validate(g)?;
        self.validate(h)?;
        Ok(match (&self.backend, g, h) {
            (Backend::Free { .. }, Element::Word(a), Element::Word(b)) => {
                Element::Word(a.mul(b, &self.gens))
            }
            (Backend::Finite(t), Element::Index(a), Element::Index(b)) => {
                Element::Index(t.mul(*a, *b))
            }
            _ => unreachable!("validated"),
        })
    }

    /// `g s` for a single token, without re-validating `g`.
    pub fn mul_token(&self, g: &Element, t: Token) -> Element {
        match (&self.backend, g) {
            (Backend::Free { .. }, Element::Word(w)) => {
                let mut w = w.clone();
                w.push(t, &self.gens);
                Element::Word(w)
            }
            (Backend::Finite(table), Element::Index(a)) => {
                Element::Index(table.mul(*a, table.token_element(t)))
            }
            _ => panic!("element {g:?} does not belong to {self}"),
        }
    }

    pub fn inverse(&self, g: &Element) -> Result<Element, GroupError> {
        self.validate(g)?;
        Ok(match (&self.backend, g) {
            (Backend::Free { .. }, Element::Word(w)) => Element::Word(w.inverse(&self.gens)),
            (Backend::Finite(t), Element::Index(a)) => Element::Index(t.inv(*a)),
            _ => unreachable!("validated"),
        })
    }

    /// A word in the tokens spelling `g`: the reduced word itself, or a
    /// Cayley-graph geodesic in the finite case.
    pub fn letters(&self, g: &Element) -> Result<Vec<Token>, GroupError> {
        self.validate(g)?;
        Ok(match (&self.backend, g) {
            (Backend::Free { .. }, Element::Word(w)) => w.letters().to_vec(),
            (Backend::Finite(t), Element::Index(a)) => t.geodesic(*a).to_vec(),
            _ => unreachable!("validated"),
        })
    }

    pub fn word_length(&self, g: &Element) -> Result<usize, GroupError> {
        self.validate(g)?;
        Ok(match (&self.backend, g) {
            (Backend::Free { .. }, Element::Word(w)) => w.len(),
            (Backend::Finite(t), Element::Index(a)) => t.dist(*a) as usize,
            _ => unreachable!("validated"),
        })
    }

    /// Minimal word length over the conjugacy class of `g`.
    pub fn conjugacy_length(&self, g: &Element) -> Result<usize, GroupError> {
        self.validate(g)?;
        Ok(match (&self.backend, g) {
            (Backend::Free { .. }, Element::Word(w)) => w.cyclic_reduction(&self.gens).len(),
            (Backend::Finite(t), Element::Index(a)) => (0..t.order() as u32)
                .map(|h| t.dist(t.mul(t.mul(h, *a), t.inv(h))) as usize)
                .min()
                .unwrap_or(0),
            _ => unreachable!("validated"),
        })
    }

    /// Number of elements of word length at most `radius`.
    pub fn ball_size(&self, radius: usize) -> u128 {
        match &self.backend {
            Backend::Free { .. } => {
                let s = self.gens.len() as u128;
                let mut total: u128 = 1;
                let mut sphere: u128 = s;
                for _ in 0..radius {
                    total = total.saturating_add(sphere);
                    sphere = sphere.saturating_mul(s - 1);
                }
                total
            }
            Backend::Finite(t) => (0..t.order() as u32)
                .filter(|&a| t.dist(a) as usize <= radius)
                .count() as u128,
        }
    }

    /// All elements of word length at most `radius`, ordered by length.
    pub fn ball(&self, radius: usize) -> Result<Vec<Element>, GroupError> {
        let size = self.ball_size(radius);
        if size > self.cap as u128 {
            return Err(GroupError::CapExceeded {
                size,
                cap: self.cap,
            });
        }
        match &self.backend {
            Backend::Free { .. } => {
                let mut out = Vec::with_capacity(size as usize);
                let mut sphere = vec![Word::identity()];
                out.push(Element::Word(Word::identity()));
                for _ in 0..radius {
                    let mut next = Vec::with_capacity(sphere.len() * self.gens.len());
                    for w in &sphere {
                        for t in self.gens.tokens() {
                            if w.last().map_or(true, |l| self.gens.inv(l) != t) {
                                let mut u = w.clone();
                                u.push(t, &self.gens);
                                next.push(u);
                            }
                        }
                    }
                    out.extend(next.iter().cloned().map(Element::Word));
                    sphere = next;
                }
                Ok(out)
            }
            Backend::Finite(t) => {
                let mut elems: Vec<u32> = (0..t.order() as u32)
                    .filter(|&a| t.dist(a) as usize <= radius)
                    .collect();
                elems.sort_by_key(|&a| (t.dist(a), a));
                Ok(elems.into_iter().map(Element::Index).collect())
            }
        }
    }

    /// Exact law of the `n`-step standard random walk from the identity,
    /// obtained by `n` pushforwards of the uniform step on `S`.
    pub fn walk_convolution(&self, n: usize) -> Result<WalkMeasure, GroupError> {
        let step = 1.0 / self.gens.len() as f64;
        match &self.backend {
            Backend::Free { .. } => {
                let mut current: BTreeMap<Word, f64> = BTreeMap::new();
                current.insert(Word::identity(), 1.0);
                for _ in 0..n {
                    let mut next: BTreeMap<Word, f64> = BTreeMap::new();
                    for (w, &p) in &current {
                        for t in self.gens.tokens() {
                            let mut u = w.clone();
                            u.push(t, &self.gens);
                            *next.entry(u).or_insert(0.0) += p * step;
                        }
                    }
                    if next.len() > self.cap {
                        return Err(GroupError::CapExceeded {
                            size: next.len() as u128,
                            cap: self.cap,
                        });
                    }
                    current = next;
                }
                let masses = current
                    .into_iter()
                    .map(|(w, p)| (Element::Word(w), p))
                    .collect();
                Ok(WalkMeasure::from_masses(self.identity(), masses))
            }
            Backend::Finite(t) => {
                let order = t.order();
                if order > self.cap {
                    return Err(GroupError::CapExceeded {
                        size: order as u128,
                        cap: self.cap,
                    });
                }
                let mut current = vec![0.0; order];
                current[t.identity() as usize] = 1.0;
                for _ in 0..n {
                    let mut next = vec![0.0; order];
                    for (a, &p) in current.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        for tok in self.gens.tokens() {
                            next[t.mul(a as u32, t.token_element(tok)) as usize] += p * step;
                        }
                    }
                    current = next;
                }
                let masses = current
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, p)| p > 0.0)
                    .map(|(a, p)| (Element::Index(a as u32), p))
                    .collect();
                Ok(WalkMeasure::from_masses(self.identity(), masses))
            }
        }
    }

    /// Parses `"e"`, a whitespace-separated token word such as `"g0 g1^-1"`,
    /// or (finite backend) a bare element index.
    pub fn parse_element(&self, text: &str) -> Result<Element, GroupError> {
        let text = text.trim();
        if let (Backend::Finite(_), Ok(i)) = (&self.backend, text.parse::<u32>()) {
            let g = Element::Index(i);
            self.validate(&g)?;
            return Ok(g);
        }
        let mut g = self.identity();
        for part in text.split_whitespace() {
            if part == "e" {
                continue;
            }
            let t = self
                .gens
                .token(part)
                .ok_or_else(|| GroupError::UnknownToken(part.to_string()))?;
            g = self.mul_token(&g, t);
        }
        Ok(g)
    }

    pub fn format_element(&self, g: &Element) -> String {
        match g {
            Element::Word(w) => w.format(&self.gens),
            Element::Index(i) => i.to_string(),
        }
    }

    pub fn word(&self, letters: &[Token]) -> Result<Element, GroupError> {
        let mut g = self.identity();
        for &t in letters {
            if !self.gens.contains(t) {
                return Err(GroupError::UnknownToken(t.to_string()));
            }
            g = self.mul_token(&g, t);
        }
        Ok(g)
    }
}
