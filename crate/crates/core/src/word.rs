//! Words of the free semigroup on `N` letters.
//!
//! Letters are 1-based. Words are ordered by length first and
//! lexicographically within a length, which is the order in which the
//! blocks of a Fock-space operator are laid out.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A finite word over the alphabet `{1, .., N}`.
///
/// The alphabet size is not stored; operations that depend on it take `N`
/// explicitly.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word, checking that every letter lies in `1..=letters`.
    pub fn new(letters: Vec<usize>, alphabet: usize) -> Result<Self> {
        let w = Word(letters);
        if w.is_valid(alphabet) {
            Ok(w)
        } else {
            Err(Error::InvalidWord {
                word: w.0,
                letters: alphabet,
            })
        }
    }

    /// Builds a word without validation.
    pub fn from_letters(letters: &[usize]) -> Self {
        Word(letters.to_vec())
    }

    pub fn letter(k: usize) -> Self {
        Word(vec![k])
    }

    pub fn is_valid(&self, alphabet: usize) -> bool {
        alphabet >= 1 && self.0.iter().all(|&l| (1..=alphabet).contains(&l))
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, letter: usize) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    pub fn prepend(&self, letter: usize) -> Word {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(letter);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// If `prefix` is a prefix of `self`, returns the remaining suffix.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|s| Word(s.to_vec()))
    }

    /// All factorizations `self = α·β`, from `α = ∅` to `β = ∅`.
    pub fn splits(&self) -> impl Iterator<Item = (Word, Word)> + '_ {
        (0..=self.len()).map(move |i| (Word(self.0[..i].to_vec()), Word(self.0[i..].to_vec())))
    }

    /// 0-based position among words of the same length in lexicographic
    /// order, i.e. the base-`N` value of the digits `letter - 1`.
    pub fn index(&self, alphabet: usize) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * alphabet + (l - 1))
    }

    /// Inverse of [`Word::index`].
    pub fn from_index(mut index: usize, len: usize, alphabet: usize) -> Word {
        let mut v = vec![1; len];
        for slot in v.iter_mut().rev() {
            *slot = index % alphabet + 1;
            index /= alphabet;
        }
        Word(v)
    }

    /// Position in the length-then-lexicographic enumeration of all words.
    pub fn global_index(&self, alphabet: usize) -> usize {
        level_offset(alphabet, self.len()) + self.index(alphabet)
    }

    /// The next word in length-then-lexicographic order.
    pub fn successor(&self, alphabet: usize) -> Word {
        let mut v = self.0.clone();
        for slot in v.iter_mut().rev() {
            if *slot < alphabet {
                *slot += 1;
                return Word(v);
            }
            *slot = 1;
        }
        // all letters were N: first word of the next length
        Word(vec![1; self.len() + 1])
    }

    /// The word immediately before `self` in length-then-lexicographic
    /// order; `None` for the empty word.
    pub fn global_predecessor(&self, alphabet: usize) -> Option<Word> {
        if self.is_empty() {
            return None;
        }
        let mut v = self.0.clone();
        for slot in v.iter_mut().rev() {
            if *slot > 1 {
                *slot -= 1;
                return Some(Word(v));
            }
            *slot = alphabet;
        }
        Some(Word(vec![alphabet; self.len() - 1]))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        if self.0.iter().all(|&l| l < 10) {
            write!(f, "{}", parts.concat())
        } else {
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Number of words of length `len`.
pub fn level_size(alphabet: usize, len: usize) -> usize {
    alphabet.pow(len as u32)
}

/// Number of words of length `< len`.
pub fn level_offset(alphabet: usize, len: usize) -> usize {
    (0..len).map(|l| level_size(alphabet, l)).sum()
}

/// Number of words of length `≤ max_degree`.
pub fn count_words(alphabet: usize, max_degree: usize) -> usize {
    level_offset(alphabet, max_degree + 1)
}

/// Words of a single length in lexicographic order.
pub fn words_of_length(alphabet: usize, len: usize) -> impl Iterator<Item = Word> {
    (0..level_size(alphabet, len)).map(move |i| Word::from_index(i, len, alphabet))
}

/// All words of length `≤ max_degree`, by length and then lexicographically.
pub fn enumerate_words(alphabet: usize, max_degree: usize) -> Vec<Word> {
    assert!(alphabet >= 1, "alphabet must be nonempty");
    (0..=max_degree).flat_map(|len| words_of_length(alphabet, len)).collect()
}
