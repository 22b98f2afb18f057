use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a generator symbol inside a [`GeneratorSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Token(pub u16);

impl Token {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// A finite symmetric generating set.
///
/// Tokens come in inverse pairs `gk`, `gk^-1`. An involutive generator
/// (`s = s^-1`) occupies a single token named `gk` whose inverse is itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    names: Vec<String>,
    inverse: Vec<Token>,
    /// First token of every inverse pair, in pair order.
    representatives: Vec<Token>,
}

impl GeneratorSet {
    /// `2m` tokens `g0, g0^-1, ..., g(m-1)^-1` of the free group `F_m`.
    pub fn free(rank: usize) -> Self {
        let mut names = Vec::with_capacity(2 * rank);
        let mut inverse = Vec::with_capacity(2 * rank);
        let mut representatives = Vec::with_capacity(rank);
        for k in 0..rank {
            let t = (2 * k) as u16;
            names.push(format!("g{k}"));
            names.push(format!("g{k}^-1"));
            inverse.push(Token(t + 1));
            inverse.push(Token(t));
            representatives.push(Token(t));
        }
        GeneratorSet {
            names,
            inverse,
            representatives,
        }
    }

    /// Builds a generating set from pair descriptions: `true` marks an
    /// involutive generator (one token), `false` an ordinary inverse pair.
    pub fn from_pairs(involutive: &[bool]) -> Self {
        let mut names = Vec::new();
        let mut inverse = Vec::new();
        let mut representatives = Vec::new();
        for (k, &inv) in involutive.iter().enumerate() {
            let t = names.len() as u16;
            representatives.push(Token(t));
            names.push(format!("g{k}"));
            if inv {
                inverse.push(Token(t));
            } else {
                names.push(format!("g{k}^-1"));
                inverse.push(Token(t + 1));
                inverse.push(Token(t));
            }
        }
        GeneratorSet {
            names,
            inverse,
            representatives,
        }
    }

    /// Number of tokens `#S`.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn inv(&self, t: Token) -> Token {
        self.inverse[t.index()]
    }

    pub fn is_involutive(&self, t: Token) -> bool {
        self.inverse[t.index()] == t
    }

    pub fn name(&self, t: Token) -> &str {
        &self.names[t.index()]
    }

    pub fn token(&self, name: &str) -> Option<Token> {
        self.names.iter().position(|n| n == name).map(|i| Token(i as u16))
    }

    pub fn tokens(&self) -> impl Iterator<Item = Token> + '_ {
        (0..self.names.len()).map(|i| Token(i as u16))
    }

    /// One token per inverse pair; the data for the other token is derived.
    pub fn representatives(&self) -> &[Token] {
        &self.representatives
    }

    pub fn contains(&self, t: Token) -> bool {
        t.index() < self.names.len()
    }
}
