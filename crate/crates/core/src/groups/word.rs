//! Reduced words in a free group.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A generator or its inverse. Orders as `a < A < b < B < ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Self {
            generator: generator as u16,
            inverse,
        }
    }

    #[inline]
    pub fn inv(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    #[inline]
    pub fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    /// All `2 * rank` letters in enumeration order.
    pub fn alphabet(rank: usize) -> Vec<Letter> {
        (0..rank)
            .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
            .collect()
    }
}

/// A freely reduced word. Construction always reduces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Freely reduces `letters`.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// `g^n` for a single generator.
    pub fn power(generator: usize, n: i64) -> Self {
        let l = Letter::new(generator, n < 0);
        Word(vec![l; n.unsigned_abs() as usize])
    }

    pub(crate) fn push_reduced(&self, l: Letter) -> Self {
        let mut v = self.0.clone();
        v.push(l);
        Word(v)
    }

    #[inline]
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        Word::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator as usize).max()
    }

    /// Signed exponent sum of each generator.
    pub fn abelianization(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for l in &self.0 {
            if let Some(slot) = v.get_mut(l.generator as usize) {
                *slot += l.exponent();
            }
        }
        v
    }
}

pub fn abelianization(w: &Word, rank: usize) -> Vec<i64> {
    w.abelianization(rank)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for l in &self.0 {
            if l.generator < 26 {
                let ch = (b'a' + l.generator as u8) as char;
                let ch = if l.inverse { ch.to_ascii_uppercase() } else { ch };
                write!(f, "{ch}")?;
            } else if l.inverse {
                write!(f, "[X{}]", l.generator)?;
            } else {
                write!(f, "[x{}]", l.generator)?;
            }
        }
        Ok(())
    }
}

/// Parses `a`..`z` as generators and `A`..`Z` as their inverses; `1` or `""` is the identity.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let letters = s
            .chars()
            .map(|ch| match ch {
                'a'..='z' => Ok(Letter::new((ch as u8 - b'a') as usize, false)),
                'A'..='Z' => Ok(Letter::new((ch as u8 - b'A') as usize, true)),
                _ => Err(Error::InvalidArgument(format!("bad letter {ch:?} in word {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::new(letters))
    }
}
