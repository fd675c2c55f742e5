//! Deterministic finite-state and pushdown recognizers.
//!
//! A grammar is a detector in conceptual form; these machines perform the
//! actual detection. Both kinds are deterministic with total transition
//! behavior (a missing pushdown transition goes to an implicit dead state),
//! so each machine has a canonical serialized size.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::{ceil_log2, gamma_len};
use crate::error::RecognizerError;

/// A deterministic finite-state automaton with a total transition table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dfa {
    pub alphabet: Vec<char>,
    pub states: usize,
    pub start: usize,
    pub accept: Vec<usize>,
    /// `transitions[state][symbol_index]` -> next state.
    pub transitions: Vec<Vec<usize>>,
}

impl Dfa {
    /// The shipped recognizer for the regular language (ab)*.
    pub fn ab_star() -> Self {
        // state 0: accept; state 1: saw 'a'; state 2: dead
        Dfa {
            alphabet: vec!['a', 'b'],
            states: 3,
            start: 0,
            accept: vec![0],
            transitions: vec![vec![1, 2], vec![2, 0], vec![2, 2]],
        }
    }

    fn symbol_index(&self, c: char) -> Result<usize, RecognizerError> {
        self.alphabet
            .iter()
            .position(|&a| a == c)
            .ok_or(RecognizerError::AlphabetViolation(c))
    }

    pub fn accepts(&self, word: &[char]) -> Result<bool, RecognizerError> {
        let mut state = self.start;
        for &c in word {
            let idx = self.symbol_index(c)?;
            state = self.transitions[state][idx];
        }
        Ok(self.accept.contains(&state))
    }

    /// Canonical serialized size in bits.
    pub fn encoded_bits(&self) -> u64 {
        let state_bits = ceil_log2(self.states as u64);
        gamma_len(self.states as u64)
            + gamma_len(self.alphabet.len() as u64)
            + gamma_len(self.start as u64 + 1)
            + self.states as u64 // accept bitmap
            + (self.states * self.alphabet.len()) as u64 * state_bits
    }
}

/// What a pushdown transition does to the stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StackAction {
    Push(usize),
    Pop,
    Keep,
}

/// A deterministic pushdown automaton without epsilon moves.
///
/// Transitions are keyed on (state, input symbol, top of stack); a missing
/// key rejects (implicit dead state). Acceptance is by final state, with an
/// optional empty-stack requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pda {
    pub alphabet: Vec<char>,
    pub states: usize,
    pub start: usize,
    pub accept: Vec<usize>,
    pub require_empty_stack: bool,
    pub stack_symbols: usize,
    #[serde(with = "pda_transitions")]
    pub transitions: BTreeMap<(usize, usize, Option<usize>), (usize, StackAction)>,
}

/// Serde helper: map keys as flat records so the type stays JSON/TOML friendly.
mod pda_transitions {
    use super::*;
    use serde::ser::SerializeSeq;

    #[derive(Serialize, Deserialize)]
    struct Row {
        state: usize,
        symbol: usize,
        top: Option<usize>,
        next: usize,
        action: StackAction,
    }

    pub fn serialize<S: serde::Serializer>(
        map: &BTreeMap<(usize, usize, Option<usize>), (usize, StackAction)>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(map.len()))?;
        for (&(state, symbol, top), &(next, action)) in map {
            seq.serialize_element(&Row { state, symbol, top, next, action })?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<(usize, usize, Option<usize>), (usize, StackAction)>, D::Error> {
        let rows = Vec::<Row>::deserialize(de)?;
        Ok(rows
            .into_iter()
            .map(|r| ((r.state, r.symbol, r.top), (r.next, r.action)))
            .collect())
    }
}

impl Pda {
    /// The shipped recognizer for the context-free language { a^n b^n : n >= 0 }.
    pub fn a_n_b_n() -> Self {
        let mut transitions = BTreeMap::new();
        // state 0 reads a's, pushing a counter symbol.
        transitions.insert((0, 0, None), (0, StackAction::Push(0)));
        transitions.insert((0, 0, Some(0)), (0, StackAction::Push(0)));
        // first 'b' switches to state 1 and starts popping.
        transitions.insert((0, 1, Some(0)), (1, StackAction::Pop));
        transitions.insert((1, 1, Some(0)), (1, StackAction::Pop));
        Pda {
            alphabet: vec!['a', 'b'],
            states: 2,
            start: 0,
            accept: vec![0, 1],
            require_empty_stack: true,
            stack_symbols: 1,
            transitions,
        }
    }

    fn symbol_index(&self, c: char) -> Result<usize, RecognizerError> {
        self.alphabet
            .iter()
            .position(|&a| a == c)
            .ok_or(RecognizerError::AlphabetViolation(c))
    }

    pub fn accepts(&self, word: &[char]) -> Result<bool, RecognizerError> {
        let mut state = self.start;
        let mut stack: Vec<usize> = Vec::new();
        for &c in word {
            let idx = self.symbol_index(c)?;
            let key = (state, idx, stack.last().copied());
            let Some(&(next, action)) = self.transitions.get(&key) else {
                return Ok(false);
            };
            state = next;
            match action {
                StackAction::Push(s) => stack.push(s),
                StackAction::Pop => {
                    if stack.pop().is_none() {
                        return Ok(false);
                    }
                }
                StackAction::Keep => {}
            }
        }
        Ok(self.accept.contains(&state) && (!self.require_empty_stack || stack.is_empty()))
    }

    pub fn encoded_bits(&self) -> u64 {
        let state_bits = ceil_log2(self.states as u64);
        let stack_bits = ceil_log2(self.stack_symbols as u64 + 1);
        let per_row = gamma_len(self.states as u64)
            + ceil_log2(self.alphabet.len() as u64)
            + stack_bits
            + state_bits
            + 2 // action tag
            + stack_bits;
        gamma_len(self.states as u64)
            + gamma_len(self.alphabet.len() as u64)
            + gamma_len(self.stack_symbols as u64 + 1)
            + gamma_len(self.start as u64 + 1)
            + self.states as u64
            + 1 // empty-stack flag
            + gamma_len(self.transitions.len() as u64 + 1)
            + self.transitions.len() as u64 * per_row
    }
}

/// A recognition device over symbol sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Automaton {
    FiniteState(Dfa),
    Pushdown(Pda),
}

impl Automaton {
    pub fn alphabet(&self) -> &[char] {
        match self {
            Automaton::FiniteState(d) => &d.alphabet,
            Automaton::Pushdown(p) => &p.alphabet,
        }
    }

    pub fn encoded_bits(&self) -> u64 {
        1 + match self {
            Automaton::FiniteState(d) => d.encoded_bits(),
            Automaton::Pushdown(p) => p.encoded_bits(),
        }
    }
}

/// Standard acceptance; usable as a detector rule over a symbol window.
pub fn automaton_accepts(a: &Automaton, word: &[char]) -> Result<bool, RecognizerError> {
    match a {
        Automaton::FiniteState(d) => d.accepts(word),
        Automaton::Pushdown(p) => p.accepts(word),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn ab_star_basic() {
        let m = Dfa::ab_star();
        assert!(m.accepts(&chars("abab")).unwrap());
        assert!(!m.accepts(&chars("aba")).unwrap());
        assert!(m.accepts(&chars("")).unwrap());
        assert!(!m.accepts(&chars("ba")).unwrap());
    }

    #[test]
    fn a_n_b_n_basic() {
        let m = Pda::a_n_b_n();
        assert!(m.accepts(&chars("aaabbb")).unwrap());
        assert!(!m.accepts(&chars("aabbb")).unwrap());
        assert!(!m.accepts(&chars("abab")).unwrap());
        assert!(m.accepts(&chars("ab")).unwrap());
    }

    #[test]
    fn alphabet_violation() {
        let m = Dfa::ab_star();
        assert!(matches!(
            m.accepts(&chars("abc")),
            Err(RecognizerError::AlphabetViolation('c'))
        ));
    }

    /// Brute-force membership for (ab)*: a word is in the language iff it is
    /// a concatenation of "ab" blocks.
    fn ab_star_member(word: &[char]) -> bool {
        word.len() % 2 == 0 && word.chunks(2).all(|c| c == ['a', 'b'])
    }

    /// Brute-force membership for a^n b^n.
    fn anbn_member(word: &[char]) -> bool {
        let n = word.len() / 2;
        word.len() % 2 == 0
            && word[..n].iter().all(|&c| c == 'a')
            && word[n..].iter().all(|&c| c == 'b')
    }

    fn all_words(max_len: usize) -> Vec<Vec<char>> {
        let mut out = Vec::new();
        for len in 0..=max_len {
            for bits in 0..(1usize << len) {
                let word: Vec<char> = (0..len)
                    .map(|i| if bits >> i & 1 == 0 { 'a' } else { 'b' })
                    .collect();
                out.push(word);
            }
        }
        out
    }

    #[test]
    fn acceptance_matches_enumeration_up_to_len_8() {
        let dfa = Automaton::FiniteState(Dfa::ab_star());
        let pda = Automaton::Pushdown(Pda::a_n_b_n());
        for word in all_words(8) {
            assert_eq!(
                automaton_accepts(&dfa, &word).unwrap(),
                ab_star_member(&word),
                "(ab)* mismatch on {word:?}"
            );
            assert_eq!(
                automaton_accepts(&pda, &word).unwrap(),
                anbn_member(&word),
                "a^n b^n mismatch on {word:?}"
            );
        }
    }
}
