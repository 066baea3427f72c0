//! Words over the side-pairing generators `a, b, c, d` and their inverses `A, B, C, D`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ALPHABET: [char; 8] = ['a', 'b', 'c', 'd', 'A', 'B', 'C', 'D'];

/// A generator letter. Letters `0..4` are `a..d`, letters `4..8` their inverses.
/// Letter `k` is also the index of the octagon side it pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(u8);

impl Letter {
    pub fn new(k: u8) -> Result<Self> {
        if k < 8 {
            Ok(Letter(k))
        } else {
            Err(Error::InvalidInput(format!("letter index {k} out of range")))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn inverse(self) -> Letter {
        Letter((self.0 + 4) % 8)
    }

    pub fn all() -> impl Iterator<Item = Letter> {
        (0..8).map(Letter)
    }

    pub fn to_char(self) -> char {
        ALPHABET[self.0 as usize]
    }

    pub fn from_char(ch: char) -> Result<Self> {
        ALPHABET
            .iter()
            .position(|&c| c == ch)
            .map(|k| Letter(k as u8))
            .ok_or_else(|| Error::InvalidInput(format!("'{ch}' is not a generator letter")))
    }
}

/// A freely reduced word in the generators.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a word and freely reduces it.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut w = Self::empty();
        for l in letters {
            w.push(l);
        }
        w
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

    /// Appends a letter, cancelling against the last one when possible.
    pub fn push(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut w = self.clone();
        for &l in &other.letters {
            w.push(l);
        }
        w
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn pow(&self, k: usize) -> GroupWord {
        let mut w = GroupWord::empty();
        for _ in 0..k {
            w = w.concat(self);
        }
        w
    }

    /// Strips matching letter/inverse pairs from the two ends.
    pub fn cyclically_reduced(&self) -> GroupWord {
        let l = &self.letters;
        let (mut i, mut j) = (0, l.len());
        while j >= i + 2 && l[i] == l[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        GroupWord { letters: l[i..j].to_vec() }
    }

    fn min_rotation(letters: &[Letter]) -> Vec<Letter> {
        let n = letters.len();
        (0..n.max(1))
            .map(|r| letters.iter().cycle().skip(r).take(n).copied().collect::<Vec<_>>())
            .min()
            .unwrap_or_default()
    }

    /// Canonical representative of the conjugacy class up to inversion in the
    /// free group: the lexicographically least rotation of the cyclically
    /// reduced word or of its inverse.
    pub fn canonical_cyclic(&self) -> GroupWord {
        let w = self.cyclically_reduced();
        let a = Self::min_rotation(&w.letters);
        let b = Self::min_rotation(&w.inverse().letters);
        GroupWord { letters: a.min(b) }
    }

    /// Shortest `u` and largest `k` with `self` cyclically equal to `u^k`.
    pub fn primitive_root(&self) -> (GroupWord, usize) {
        let w = self.cyclically_reduced();
        let n = w.len();
        for p in 1..=n {
            if n % p == 0 && (p..n).all(|i| w.letters[i] == w.letters[i - p]) {
                return (GroupWord { letters: w.letters[..p].to_vec() }, n / p);
            }
        }
        (w, 1)
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive_root().1 == 1
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s.trim().chars().map(Letter::from_char).collect::<Result<Vec<_>>>()?;
        Ok(GroupWord::from_letters(letters))
    }
}
