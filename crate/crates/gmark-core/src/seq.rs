//! Reduced mutation sequences over the alphabet {1,2,3} and their
//! combinatorics: validation, enumeration, and tail classification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap for [`enumerate_reduced`]; 3·2^23 sequences is already ~25M.
pub const ENUM_CAP: usize = 24;

/// Default window for [`classify_tail`] heuristics.
pub const TAIL_WINDOW: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    #[error("not reduced: letter {letter} repeats at positions {} and {}", pos - 1, pos)]
    NotReduced { pos: usize, letter: u8 },
    #[error("letter {letter} at position {pos} is outside the alphabet {{1,2,3}}")]
    BadAlphabet { pos: usize, letter: u8 },
    #[error("length {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("window {window} exceeds sequence length {len}")]
    WindowTooLarge { window: usize, len: usize },
}

/// A finite word over {1,2,3} with no equal adjacent letters.
///
/// Text form is comma-separated digits, e.g. `"1,2,3,1"`; the empty word is
/// the empty string. Entry 0 is the first mutation applied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ReducedSeq(Vec<u8>);

impl ReducedSeq {
    pub fn empty() -> Self {
        ReducedSeq(Vec::new())
    }

    /// Validating constructor; alias of [`validate_reduced`].
    pub fn new(entries: Vec<u8>) -> Result<Self, SeqError> {
        validate_reduced(&entries)?;
        Ok(ReducedSeq(entries))
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// The word extended by one letter, or None when that would repeat.
    pub fn child(&self, letter: u8) -> Option<ReducedSeq> {
        debug_assert!((1..=3).contains(&letter));
        if self.last() == Some(letter) {
            return None;
        }
        let mut v = self.0.clone();
        v.push(letter);
        Some(ReducedSeq(v))
    }

    /// Prefix of the first `n` letters.
    pub fn prefix(&self, n: usize) -> ReducedSeq {
        ReducedSeq(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Extension cycling through this word forever, skipping any letter equal
    /// to the one just emitted (so the output stays reduced even when the word
    /// ends with its own first letter). Words with fewer than two distinct
    /// letters have no reduced continuation and yield only themselves.
    pub fn cycle_reduced(&self) -> impl Iterator<Item = u8> + '_ {
        CycleReduced { word: &self.0, pos: 0, last: 0 }
    }
}

struct CycleReduced<'a> {
    word: &'a [u8],
    pos: usize,
    last: u8,
}

impl Iterator for CycleReduced<'_> {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        if self.word.is_empty() {
            return None;
        }
        if self.word.len() == 1 {
            // the single letter once; repeating it would not be reduced
            if self.last == 0 {
                self.last = self.word[0];
                return Some(self.last);
            }
            return None;
        }
        // terminates within one cycle: a reduced word of length >= 2 always
        // contains a letter different from the last emitted one
        loop {
            let letter = self.word[self.pos];
            self.pos = (self.pos + 1) % self.word.len();
            if letter != self.last {
                self.last = letter;
                return Some(letter);
            }
        }
    }
}

impl fmt::Display for ReducedSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for x in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for ReducedSeq {
    type Err = SeqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Ok(ReducedSeq::empty());
        }
        let mut entries = Vec::new();
        for (pos, part) in t.split(',').enumerate() {
            let letter: u8 = part
                .trim()
                .parse()
                .map_err(|_| SeqError::BadAlphabet { pos, letter: 0 })?;
            entries.push(letter);
        }
        validate_reduced(&entries)?;
        Ok(ReducedSeq(entries))
    }
}

impl Serialize for ReducedSeq {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ReducedSeq {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Checks membership in {1,2,3} and the no-adjacent-repeat condition.
pub fn validate_reduced(entries: &[u8]) -> Result<(), SeqError> {
    for (pos, &letter) in entries.iter().enumerate() {
        if !(1..=3).contains(&letter) {
            return Err(SeqError::BadAlphabet { pos, letter });
        }
        if pos > 0 && entries[pos - 1] == letter {
            return Err(SeqError::NotReduced { pos, letter });
        }
    }
    Ok(())
}

/// All reduced sequences of length `n` in lexicographic order
/// (3·2^(n−1) of them for n ≥ 1, one for n = 0).
pub fn enumerate_reduced(n: usize) -> Result<Vec<ReducedSeq>, SeqError> {
    enumerate_reduced_capped(n, ENUM_CAP)
}

pub fn enumerate_reduced_capped(n: usize, cap: usize) -> Result<Vec<ReducedSeq>, SeqError> {
    if n > cap {
        return Err(SeqError::CapExceeded { n, cap });
    }
    let mut out = vec![ReducedSeq::empty()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * 2);
        for w in &out {
            for letter in 1..=3u8 {
                if let Some(c) = w.child(letter) {
                    next.push(c);
                }
            }
        }
        out = next;
    }
    Ok(out)
}

/// Which letters a sequence keeps using near its end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailClass {
    /// All of {1,2,3} occur in the inspected window.
    AllThree,
    /// Only two letters occur; the payload is the absent one.
    TwoAlternating(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailInfo {
    pub class: TailClass,
    /// Every three consecutive letters of the window form {1,2,3}.
    pub three_cyclic: bool,
}

/// Classifies the final `window` letters of `w`.
///
/// This is a finite-window heuristic for the tail behaviour of an infinite
/// word: the caller picks the window, and the verdict only reflects that
/// much evidence. Requires `window >= 2`.
pub fn classify_tail(w: &ReducedSeq, window: usize) -> Result<TailInfo, SeqError> {
    assert!(window >= 2, "classification window must be at least 2");
    let len = w.len();
    if window > len {
        return Err(SeqError::WindowTooLarge { window, len });
    }
    let tail = &w.entries()[len - window..];
    let mut present = [false; 4];
    for &letter in tail {
        present[letter as usize] = true;
    }
    let class = if present[1] && present[2] && present[3] {
        TailClass::AllThree
    } else {
        let absent = (1..=3u8).find(|&l| !present[l as usize]).unwrap();
        TailClass::TwoAlternating(absent)
    };
    let three_cyclic = window >= 3
        && tail.windows(3).all(|t| {
            let mut seen = [false; 4];
            t.iter().for_each(|&l| seen[l as usize] = true);
            seen[1] && seen[2] && seen[3]
        });
    Ok(TailInfo { class, three_cyclic })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> ReducedSeq {
        s.parse().unwrap()
    }

    #[test]
    fn validation() {
        assert!(validate_reduced(&[1, 2, 1]).is_ok());
        assert_eq!(
            validate_reduced(&[1, 1, 2]),
            Err(SeqError::NotReduced { pos: 1, letter: 1 })
        );
        assert_eq!(
            validate_reduced(&[1, 4]),
            Err(SeqError::BadAlphabet { pos: 1, letter: 4 })
        );
        assert!(validate_reduced(&[]).is_ok());
    }

    #[test]
    fn text_round_trip() {
        assert_eq!(seq("1,2,3,1").entries(), &[1, 2, 3, 1]);
        assert_eq!(seq("1,2,3,1").to_string(), "1,2,3,1");
        assert_eq!(seq("").entries(), &[] as &[u8]);
        assert_eq!(ReducedSeq::empty().to_string(), "");
        assert!("1,1".parse::<ReducedSeq>().is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_reduced(0).unwrap().len(), 1);
        let one = enumerate_reduced(1).unwrap();
        assert_eq!(one, vec![seq("1"), seq("2"), seq("3")]);
        assert_eq!(enumerate_reduced(6).unwrap().len(), 96);
        assert!(matches!(
            enumerate_reduced(25),
            Err(SeqError::CapExceeded { n: 25, cap: 24 })
        ));
    }

    #[test]
    fn enumeration_is_lexicographic_and_prefix_closed() {
        let n4 = enumerate_reduced(4).unwrap();
        let mut sorted = n4.clone();
        sorted.sort();
        assert_eq!(n4, sorted);
        let n3: std::collections::HashSet<_> =
            enumerate_reduced(3).unwrap().into_iter().collect();
        for w in &n4 {
            assert!(n3.contains(&w.prefix(3)));
        }
    }

    #[test]
    fn tail_classification() {
        let t = classify_tail(&seq("1,2,3,1,2,3"), 6).unwrap();
        assert_eq!(t.class, TailClass::AllThree);
        assert!(t.three_cyclic);

        let t = classify_tail(&seq("3,1,2,1,2,1"), 4).unwrap();
        assert_eq!(t.class, TailClass::TwoAlternating(3));
        assert!(!t.three_cyclic);

        let t = classify_tail(&seq("1,2"), 2).unwrap();
        assert_eq!(t.class, TailClass::TwoAlternating(3));

        assert_eq!(
            classify_tail(&seq("1,2"), 3),
            Err(SeqError::WindowTooLarge { window: 3, len: 2 })
        );
    }

    #[test]
    fn cyclic_extension_skips_seams() {
        // word ending with its first letter: plain repetition would not be
        // reduced; the skip rule degenerates it to pure alternation
        let w = seq("1,2,1");
        let got: Vec<u8> = w.cycle_reduced().take(8).collect();
        assert_eq!(got, vec![1, 2, 1, 2, 1, 2, 1, 2]);

        let w = seq("1,2,3");
        let got: Vec<u8> = w.cycle_reduced().take(7).collect();
        assert_eq!(got, vec![1, 2, 3, 1, 2, 3, 1]);

        let w = seq("1");
        let got: Vec<u8> = w.cycle_reduced().take(5).collect();
        assert_eq!(got, vec![1]);
    }
}
