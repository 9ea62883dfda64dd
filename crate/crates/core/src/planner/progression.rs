//! Timed formula progression.
//!
//! `progress(ψ, σ, Δ)` is the obligation for the next position such that
//! the word satisfies `ψ` at the current position (labelled `σ`, next
//! position `Δ` later) iff it satisfies the result at the next position.

use mitl::{Formula, Interval};

use crate::partition::Labels;

/// MITL formula in a normal form used as product-state key: n-ary sorted
/// conjunctions and disjunctions, no constants below a connective, no
/// double negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obligation {
    True,
    False,
    Atom(String),
    Not(Box<Obligation>),
    And(Vec<Obligation>),
    Or(Vec<Obligation>),
    Next(Interval, Box<Obligation>),
    Eventually(Interval, Box<Obligation>),
    Always(Interval, Box<Obligation>),
    Until(Interval, Box<Obligation>, Box<Obligation>),
}

use Obligation as O;

pub fn not(a: O) -> O {
    match a {
        O::True => O::False,
        O::False => O::True,
        O::Not(inner) => *inner,
        other => O::Not(Box::new(other)),
    }
}

fn junction(items: Vec<O>, conj: bool) -> O {
    let (unit, zero) = if conj {
        (O::True, O::False)
    } else {
        (O::False, O::True)
    };
    let mut flat = Vec::new();
    for it in items {
        match it {
            O::And(xs) if conj => flat.extend(xs),
            O::Or(xs) if !conj => flat.extend(xs),
            x if x == zero => return zero,
            x if x == unit => {}
            x => flat.push(x),
        }
    }
    flat.sort();
    flat.dedup();
    match flat.len() {
        0 => unit,
        1 => flat.pop().unwrap(),
        _ if conj => O::And(flat),
        _ => O::Or(flat),
    }
}

pub fn and(items: Vec<O>) -> O {
    junction(items, true)
}

pub fn or(items: Vec<O>) -> O {
    junction(items, false)
}

impl From<&Formula> for Obligation {
    fn from(f: &Formula) -> Self {
        match f {
            Formula::True => O::True,
            Formula::False => O::False,
            Formula::Atom(p) => O::Atom(p.clone()),
            Formula::Not(a) => not(a.as_ref().into()),
            Formula::And(a, b) => and(vec![a.as_ref().into(), b.as_ref().into()]),
            Formula::Or(a, b) => or(vec![a.as_ref().into(), b.as_ref().into()]),
            Formula::Next(i, a) => O::Next(*i, Box::new(a.as_ref().into())),
            Formula::Eventually(i, a) => O::Eventually(*i, Box::new(a.as_ref().into())),
            Formula::Always(i, a) => O::Always(*i, Box::new(a.as_ref().into())),
            Formula::Until(i, a, b) => {
                O::Until(*i, Box::new(a.as_ref().into()), Box::new(b.as_ref().into()))
            }
        }
    }
}

impl Obligation {
    /// Back to a plain formula (binary connectives, left-nested).
    pub fn to_formula(&self) -> Formula {
        let fold = |xs: &[O], f: fn(Formula, Formula) -> Formula| {
            let mut it = xs.iter().map(O::to_formula);
            let first = it.next().expect("normal form has at least two operands");
            it.fold(first, f)
        };
        match self {
            O::True => Formula::True,
            O::False => Formula::False,
            O::Atom(p) => Formula::atom(p.clone()),
            O::Not(a) => Formula::not(a.to_formula()),
            O::And(xs) => fold(xs, Formula::and),
            O::Or(xs) => fold(xs, Formula::or),
            O::Next(i, a) => Formula::next(*i, a.to_formula()),
            O::Eventually(i, a) => Formula::eventually(*i, a.to_formula()),
            O::Always(i, a) => Formula::always(*i, a.to_formula()),
            O::Until(i, a, b) => Formula::until(*i, a.to_formula(), b.to_formula()),
        }
    }
}

fn when(cond: bool, f: impl FnOnce() -> O) -> O {
    if cond {
        f()
    } else {
        O::False
    }
}

pub fn progress(ob: &O, sigma: &Labels, delta: f64) -> O {
    match ob {
        O::True | O::False => ob.clone(),
        O::Atom(p) => {
            if sigma.contains(p) {
                O::True
            } else {
                O::False
            }
        }
        O::Not(a) => not(progress(a, sigma, delta)),
        O::And(xs) => and(xs.iter().map(|x| progress(x, sigma, delta)).collect()),
        O::Or(xs) => or(xs.iter().map(|x| progress(x, sigma, delta)).collect()),
        O::Next(i, a) => when(i.contains(delta), || (**a).clone()),
        O::Eventually(i, a) => or(vec![
            when(i.contains(0.0), || progress(a, sigma, delta)),
            i.shift(delta)
                .map_or(O::False, |j| O::Eventually(j, a.clone())),
        ]),
        O::Always(i, a) => and(vec![
            if i.contains(0.0) {
                progress(a, sigma, delta)
            } else {
                O::True
            },
            i.shift(delta).map_or(O::True, |j| O::Always(j, a.clone())),
        ]),
        O::Until(i, a, b) => {
            let now_a = progress(a, sigma, delta);
            or(vec![
                when(i.contains(0.0), || {
                    and(vec![now_a.clone(), progress(b, sigma, delta)])
                }),
                and(vec![
                    now_a.clone(),
                    i.shift(delta)
                        .map_or(O::False, |j| O::Until(j, a.clone(), b.clone())),
                ]),
            ])
        }
    }
}

fn is_bounded(f: &Formula) -> bool {
    let mut ok = true;
    f.visit(&mut |g| match g {
        Formula::Eventually(i, _) | Formula::Always(i, _) | Formula::Until(i, _, _) => {
            ok &= i.is_bounded()
        }
        _ => {}
    });
    ok
}

fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => out.push(other),
    }
}

/// Why `f` is outside the plannable fragment, if it is: a conjunction whose
/// conjuncts are either free of unbounded `U`, `F`, `G`, or `G[a,inf) ψ`
/// with such a `ψ`.
pub fn fragment_violation(f: &Formula) -> Option<String> {
    let mut parts = Vec::new();
    conjuncts(f, &mut parts);
    parts.into_iter().find_map(|c| match c {
        _ if is_bounded(c) => None,
        Formula::Always(i, inner) if !i.is_bounded() && is_bounded(inner) => None,
        other => Some(format!(
            "`{other}` needs an unbounded interval other than an outermost always"
        )),
    })
}
