//! Words in the generators `a`, `S`, `T` of `Z^2 ⋊ SL_2(Z)` and their images in finite quotients.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::group::{GroupElement, IndexedGroup, SL2Elem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    A,
    AInv,
    S,
    SInv,
    T,
    TInv,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::S => Letter::SInv,
            Letter::SInv => Letter::S,
            Letter::T => Letter::TInv,
            Letter::TInv => Letter::T,
        }
    }

    /// Image of the letter in `R^2 ⋊ SL_2(R)`.
    pub fn image(self, group: &IndexedGroup) -> GroupElement {
        let r = group.ring();
        let base = match self {
            Letter::A | Letter::AInv => group.translation(r.one(), r.zero()),
            Letter::S | Letter::SInv => group.linear(SL2Elem::s(r)),
            Letter::T | Letter::TInv => group.linear(SL2Elem::t(r)),
        };
        match self {
            Letter::A | Letter::S | Letter::T => base,
            _ => group.inv_elem(&base),
        }
    }
}

/// A word over `{a, S, T}` and their inverses; inverses are written with a trailing `'`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out: Vec<Letter> = Vec::new();
        for ch in s.chars().filter(|c| !c.is_whitespace()) {
            let letter = match ch {
                'a' => Letter::A,
                'S' => Letter::S,
                'T' => Letter::T,
                'e' => continue,
                '\'' => {
                    let last = out
                        .pop()
                        .ok_or_else(|| Error::Parse("inverse mark without a letter".into()))?;
                    if matches!(last, Letter::AInv | Letter::SInv | Letter::TInv) {
                        return Err(Error::Parse("double inverse mark".into()));
                    }
                    last.inverse()
                }
                other => return Err(Error::Parse(format!("unknown letter {other:?}"))),
            };
            out.push(letter);
        }
        Ok(Word(out))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            let s = match l {
                Letter::A => "a",
                Letter::AInv => "a'",
                Letter::S => "S",
                Letter::SInv => "S'",
                Letter::T => "T",
                Letter::TInv => "T'",
            };
            f.write_str(s)?;
        }
        Ok(())
    }
}

/// Evaluates a word in a finite quotient group.
pub fn reduce_word(w: &Word, group: &IndexedGroup) -> GroupElement {
    w.0.iter().fold(group.identity_element(), |acc, l| {
        group.mul_elem(&acc, &l.image(group))
    })
}

/// `[aS, T, e, ..., e]` of length `m`.
pub fn generator_words(m: usize) -> Result<Vec<Word>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need m >= 2, got {m}")));
    }
    let mut out = vec![Word(vec![Letter::A, Letter::S]), Word(vec![Letter::T])];
    out.resize(m, Word::empty());
    Ok(out)
}

pub fn generator_tuple(group: &IndexedGroup, m: usize) -> Result<Vec<GroupElement>> {
    Ok(generator_words(m)?
        .iter()
        .map(|w| reduce_word(w, group))
        .collect())
}
