//! Reference semantics by exhaustive evaluation over a long finite unrolling
//! of a lasso word, plus random generators for formulas and words.
//!
//! The oracle computes a truth vector per subformula over an explicit
//! unrolling, deriving `F` and `G` from `U`, and searches witnesses only
//! inside a fixed lookahead window that is provably long enough.

#![allow(dead_code)]

use mitl::{Formula, Interval, Symbol, TimedWord};
use rand::Rng;

pub const ATOMS: [&str; 3] = ["a", "b", "c"];

pub struct Unrolled {
    pub symbols: Vec<Symbol>,
    pub times: Vec<f64>,
}

impl Unrolled {
    pub fn new(word: &TimedWord, horizon: usize) -> Self {
        let pairs = word.unroll(horizon);
        Self {
            symbols: pairs.iter().map(|(s, _)| s.clone()).collect(),
            times: pairs.iter().map(|&(_, t)| t).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }
}

fn in_interval(i: &Interval, d: f64) -> bool {
    let lo_ok = if i.lo_closed() {
        d >= i.lo()
    } else {
        d > i.lo()
    };
    let hi_ok = if i.hi().is_infinite() {
        true
    } else if i.hi_closed() {
        d <= i.hi()
    } else {
        d < i.hi()
    };
    lo_ok && hi_ok
}

/// Truth vectors are only trusted on a prefix of positions; every temporal
/// level looks at most `window` positions ahead and so loses that many.
struct Oracle<'a> {
    w: &'a Unrolled,
    window: usize,
}

impl Oracle<'_> {
    fn until(&self, i: &Interval, a: &[bool], b: &[bool]) -> Vec<bool> {
        let valid = a.len().min(b.len());
        let out = valid.saturating_sub(self.window);
        (0..out)
            .map(|j| {
                (j..j + self.window).any(|k| {
                    in_interval(i, self.w.times[k] - self.w.times[j])
                        && b[k]
                        && (j..=k).all(|m| a[m])
                })
            })
            .collect()
    }

    fn truth(&self, phi: &Formula) -> Vec<bool> {
        let w = self.w;
        let n = w.len();
        match phi {
            Formula::True => vec![true; n],
            Formula::False => vec![false; n],
            Formula::Atom(p) => w.symbols.iter().map(|s| s.contains(p)).collect(),
            Formula::Not(f) => self.truth(f).into_iter().map(|v| !v).collect(),
            Formula::And(a, b) => {
                let (x, y) = (self.truth(a), self.truth(b));
                x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.truth(a), self.truth(b));
                x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
            }
            Formula::Next(i, f) => {
                let v = self.truth(f);
                (0..v.len().saturating_sub(1))
                    .map(|j| in_interval(i, w.times[j + 1] - w.times[j]) && v[j + 1])
                    .collect()
            }
            Formula::Eventually(i, f) => {
                let v = self.truth(f);
                self.until(i, &vec![true; v.len()], &v)
            }
            Formula::Always(i, f) => {
                let neg: Vec<bool> = self.truth(f).into_iter().map(|v| !v).collect();
                self.until(i, &vec![true; neg.len()], &neg)
                    .into_iter()
                    .map(|v| !v)
                    .collect()
            }
            Formula::Until(i, a, b) => self.until(i, &self.truth(a), &self.truth(b)),
        }
    }
}

/// How far ahead a witness for an operator with finite bounds at most
/// `max_bound` can lie: past the prefix, far enough to clear the lower
/// bound or reach the upper one, and then one more lap.
pub fn window(word: &TimedWord, max_bound: f64) -> usize {
    let p = word.prefix();
    let min_gap = word
        .cycle()
        .iter()
        .map(|&(_, g)| g)
        .chain(p.windows(2).map(|w| w[1].1 - w[0].1))
        .fold(f64::INFINITY, f64::min);
    word.cycle_start() + (max_bound / min_gap).ceil() as usize + 2 * word.cycle_len() + 2
}

pub fn brute_accepts(word: &TimedWord, phi: &Formula, max_bound: f64) -> bool {
    let window = window(word, max_bound);
    let w = Unrolled::new(word, window * (phi.depth() + 1) + 1);
    let v = Oracle { w: &w, window }.truth(phi);
    assert!(!v.is_empty(), "unrolling too short");
    v[0]
}

pub const MAX_BOUND: f64 = 10.0;
const GAPS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];

pub fn random_interval(rng: &mut impl Rng) -> Interval {
    let lo = rng.random_range(0..=5) as f64;
    if rng.random_bool(0.3) {
        return Interval::new(lo, rng.random_bool(0.7), f64::INFINITY, false).unwrap();
    }
    let hi = lo + rng.random_range(1..=5) as f64;
    Interval::new(lo, rng.random_bool(0.7), hi, rng.random_bool(0.7)).unwrap()
}

pub fn random_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(ATOMS[rng.random_range(0..ATOMS.len())]),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..8) {
        0 => Formula::not(random_formula(rng, d)),
        1 => Formula::and(random_formula(rng, d), random_formula(rng, d)),
        2 => Formula::or(random_formula(rng, d), random_formula(rng, d)),
        3 => Formula::next(random_interval(rng), random_formula(rng, d)),
        4 => Formula::eventually(random_interval(rng), random_formula(rng, d)),
        5 => Formula::always(random_interval(rng), random_formula(rng, d)),
        _ => Formula::until(
            random_interval(rng),
            random_formula(rng, d),
            random_formula(rng, d),
        ),
    }
}

fn random_symbol(rng: &mut impl Rng) -> Symbol {
    ATOMS
        .iter()
        .filter(|_| rng.random_bool(0.45))
        .map(|s| s.to_string())
        .collect()
}

pub fn random_word(rng: &mut impl Rng) -> TimedWord {
    let mut t = if rng.random_bool(0.5) {
        0.0
    } else {
        GAPS[rng.random_range(0..GAPS.len())]
    };
    let mut prefix = Vec::new();
    for _ in 0..rng.random_range(1..=6) {
        prefix.push((random_symbol(rng), t));
        t += GAPS[rng.random_range(0..GAPS.len())];
    }
    let cycle = (0..rng.random_range(1..=3))
        .map(|_| (random_symbol(rng), GAPS[rng.random_range(0..GAPS.len())]))
        .collect();
    TimedWord::new(prefix, cycle).unwrap()
}
