//! Point-wise MITL semantics over lasso timed words.
//!
//! Truth at a position depends only on the word from that position on, so
//! every position inside the cycle is equivalent to its first-lap copy.
//! Searches for until-witnesses are therefore finite: bounded intervals stop
//! at their upper bound, unbounded ones one full lap after the search has
//! entered the cycle and passed the lower bound.

use std::collections::HashMap;

use thiserror::Error;

use crate::formula::Formula;
use crate::interval::Interval;
use crate::word::TimedWord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("positions are numbered from 1, got {0}")]
    BadPosition(usize),
}

/// `(w, j) ⊨ φ` for 1-based position `j`.
pub fn satisfies(word: &TimedWord, phi: &Formula, j: usize) -> Result<bool, MonitorError> {
    if j == 0 {
        return Err(MonitorError::BadPosition(j));
    }
    Ok(Monitor::new(word).eval(phi, j - 1))
}

/// `w ⊨ φ`, i.e. satisfaction at the first position.
pub fn accepts(word: &TimedWord, phi: &Formula) -> bool {
    Monitor::new(word).eval(phi, 0)
}

/// Memoising evaluator bound to one word. Reuse it to check several
/// formulas or positions against the same word.
pub struct Monitor<'w> {
    word: &'w TimedWord,
    memo: HashMap<(*const Formula, usize), bool>,
}

/// Outcome of one step of a witness scan.
enum Scan {
    Found,
    Stop,
    Continue,
}

impl<'w> Monitor<'w> {
    pub fn new(word: &'w TimedWord) -> Self {
        Self {
            word,
            memo: HashMap::new(),
        }
    }

    /// Truth of `phi` at 0-based position `p`.
    pub fn eval(&mut self, phi: &Formula, p: usize) -> bool {
        let p = self.word.canonical(p);
        let key = (phi as *const Formula, p);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = match phi {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => self.word.symbol(p).contains(a),
            Formula::Not(f) => !self.eval(f, p),
            Formula::And(a, b) => self.eval(a, p) && self.eval(b, p),
            Formula::Or(a, b) => self.eval(a, p) || self.eval(b, p),
            Formula::Next(i, f) => {
                let gap = self.word.time(p + 1) - self.word.time(p);
                i.contains(gap) && self.eval(f, p + 1)
            }
            Formula::Eventually(i, f) => self.scan(i, p, |m, k, d| {
                if i.contains(d) && m.eval(f, k) {
                    Scan::Found
                } else {
                    Scan::Continue
                }
            }),
            Formula::Always(i, f) => !self.scan(i, p, |m, k, d| {
                if i.contains(d) && !m.eval(f, k) {
                    Scan::Found
                } else {
                    Scan::Continue
                }
            }),
            // φ₁ must also hold at the witness position itself.
            Formula::Until(i, a, b) => self.scan(i, p, |m, k, d| {
                if !m.eval(a, k) {
                    Scan::Stop
                } else if i.contains(d) && m.eval(b, k) {
                    Scan::Found
                } else {
                    Scan::Continue
                }
            }),
        };
        self.memo.insert(key, v);
        v
    }

    /// Walks positions `k >= p` while a witness with `t_k - t_p ∈ i` is still
    /// possible; true iff `step` reports `Found`.
    fn scan(
        &mut self,
        i: &Interval,
        p: usize,
        mut step: impl FnMut(&mut Self, usize, f64) -> Scan,
    ) -> bool {
        let t0 = self.word.time(p);
        let cycle_start = self.word.cycle_start();
        let lap = self.word.cycle_len();
        let mut settled: Option<usize> = None;
        let mut k = p;
        loop {
            let d = self.word.time(k) - t0;
            if i.is_past(d) {
                return false;
            }
            if !i.is_bounded() {
                // Past the lower bound and inside the cycle, later positions
                // only repeat earlier candidates.
                match settled {
                    Some(s) if k >= s + lap => return false,
                    None if k >= cycle_start && i.is_above_lower(d) => settled = Some(k),
                    _ => {}
                }
            }
            match step(self, k, d) {
                Scan::Found => return true,
                Scan::Stop => return false,
                Scan::Continue => {}
            }
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::word::{symbol, Symbol};

    fn word() -> TimedWord {
        TimedWord::new(
            vec![(symbol(["green"]), 0.0), (symbol(["blue"]), 3.0)],
            vec![(Symbol::new(), 5.0)],
        )
        .unwrap()
    }

    fn check(src: &str) -> bool {
        accepts(&word(), &parse(src).unwrap())
    }

    #[test]
    fn eventually_within_deadline() {
        assert!(check("F[0,5] blue"));
        assert!(!check("F[0,2] blue"));
    }

    #[test]
    fn next_checks_the_gap() {
        assert!(check("X[2,4] blue"));
        assert!(!check("X[0,2] blue"));
        assert!(!check("X[2,4] green"));
    }

    #[test]
    fn until_requires_left_operand_at_witness() {
        // green holds only at position 1, blue only at position 2.
        assert!(!check("green U[0,5] blue"));
        assert!(check("(green | blue) U[0,5] blue"));
    }

    #[test]
    fn unbounded_operators_over_the_cycle() {
        assert!(check("F[10,inf) !green"));
        assert!(!check("F[0,inf) (green & blue)"));
        assert!(check("G[4,inf) !blue"));
        assert!(!check("G[0,inf) !blue"));
        assert!(check("F G !green"));
    }

    #[test]
    fn position_argument_is_one_based() {
        let w = word();
        let phi = parse("blue").unwrap();
        assert_eq!(satisfies(&w, &phi, 2), Ok(true));
        assert_eq!(satisfies(&w, &phi, 1), Ok(false));
        assert_eq!(satisfies(&w, &phi, 0), Err(MonitorError::BadPosition(0)));
    }
}
