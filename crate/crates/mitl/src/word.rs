use std::collections::BTreeSet;

use thiserror::Error;

/// The set of atomic propositions true at one position.
pub type Symbol = BTreeSet<String>;

pub fn symbol<I, S>(props: I) -> Symbol
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    props.into_iter().map(Into::into).collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WordError {
    #[error("a timed word needs at least one prefix position")]
    EmptyPrefix,
    #[error("a timed word needs a non-empty repeating cycle")]
    EmptyCycle,
    #[error("timestamp {0} is negative or not finite")]
    BadTimestamp(f64),
    #[error("timestamps must strictly increase: {prev} then {next}")]
    NotIncreasing { prev: f64, next: f64 },
    #[error("cycle gap {0} must be positive and finite")]
    BadGap(f64),
}

/// An infinite timed word in lasso form: the prefix `(σ, t)` positions,
/// followed by the cycle positions repeated forever. Each cycle entry
/// carries the time gap from the position before it.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedWord {
    prefix: Vec<(Symbol, f64)>,
    cycle: Vec<(Symbol, f64)>,
    /// Offset of each cycle position from the last prefix time, first lap.
    cycle_offsets: Vec<f64>,
    period: f64,
}

impl TimedWord {
    pub fn new(prefix: Vec<(Symbol, f64)>, cycle: Vec<(Symbol, f64)>) -> Result<Self, WordError> {
        if prefix.is_empty() {
            return Err(WordError::EmptyPrefix);
        }
        if cycle.is_empty() {
            return Err(WordError::EmptyCycle);
        }
        let mut prev: Option<f64> = None;
        for &(_, t) in &prefix {
            if !t.is_finite() || t < 0.0 {
                return Err(WordError::BadTimestamp(t));
            }
            if let Some(p) = prev {
                if t <= p {
                    return Err(WordError::NotIncreasing { prev: p, next: t });
                }
            }
            prev = Some(t);
        }
        let mut acc = 0.0;
        let mut cycle_offsets = Vec::with_capacity(cycle.len());
        for &(_, gap) in &cycle {
            if !gap.is_finite() || gap <= 0.0 {
                return Err(WordError::BadGap(gap));
            }
            acc += gap;
            cycle_offsets.push(acc);
        }
        Ok(Self {
            prefix,
            cycle,
            cycle_offsets,
            period: acc,
        })
    }

    pub fn prefix(&self) -> &[(Symbol, f64)] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[(Symbol, f64)] {
        &self.cycle
    }

    /// Duration of one lap of the cycle.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Position index (0-based) of the first cycle position.
    pub fn cycle_start(&self) -> usize {
        self.prefix.len()
    }

    pub fn cycle_len(&self) -> usize {
        self.cycle.len()
    }

    /// Symbol at 0-based position `p`.
    pub fn symbol(&self, p: usize) -> &Symbol {
        let n = self.prefix.len();
        if p < n {
            &self.prefix[p].0
        } else {
            &self.cycle[(p - n) % self.cycle.len()].0
        }
    }

    /// Timestamp at 0-based position `p`.
    pub fn time(&self, p: usize) -> f64 {
        let n = self.prefix.len();
        if p < n {
            return self.prefix[p].1;
        }
        let q = p - n;
        let lap = q / self.cycle.len();
        let r = q % self.cycle.len();
        self.prefix[n - 1].1 + lap as f64 * self.period + self.cycle_offsets[r]
    }

    /// The smallest position whose suffix equals the suffix from `p`.
    pub fn canonical(&self, p: usize) -> usize {
        let n = self.prefix.len();
        if p < n {
            p
        } else {
            n + (p - n) % self.cycle.len()
        }
    }

    /// The first `len` positions as explicit `(σ, t)` pairs.
    pub fn unroll(&self, len: usize) -> Vec<(Symbol, f64)> {
        (0..len)
            .map(|p| (self.symbol(p).clone(), self.time(p)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_repeat_the_cycle() {
        let w = TimedWord::new(
            vec![(symbol(["green"]), 0.0), (symbol(["blue"]), 3.0)],
            vec![(Symbol::new(), 5.0)],
        )
        .unwrap();
        assert_eq!(w.time(0), 0.0);
        assert_eq!(w.time(1), 3.0);
        assert_eq!(w.time(2), 8.0);
        assert_eq!(w.time(5), 23.0);
        assert!(w.symbol(7).is_empty());
        assert_eq!(w.canonical(9), 2);
    }

    #[test]
    fn rejects_malformed_words() {
        assert_eq!(
            TimedWord::new(vec![], vec![(Symbol::new(), 1.0)]),
            Err(WordError::EmptyPrefix)
        );
        assert_eq!(
            TimedWord::new(vec![(Symbol::new(), 0.0)], vec![]),
            Err(WordError::EmptyCycle)
        );
        assert!(matches!(
            TimedWord::new(
                vec![(Symbol::new(), 1.0), (Symbol::new(), 1.0)],
                vec![(Symbol::new(), 1.0)]
            ),
            Err(WordError::NotIncreasing { .. })
        ));
        assert!(matches!(
            TimedWord::new(vec![(Symbol::new(), 0.0)], vec![(Symbol::new(), 0.0)]),
            Err(WordError::BadGap(_))
        ));
    }
}
