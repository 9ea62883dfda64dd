use std::collections::BTreeSet;
use std::fmt;

use crate::interval::Interval;

/// MITL abstract syntax. `Eventually` and `Always` are kept as their own
/// nodes; their meaning is the until-based derivation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
    Always(Interval, Box<Formula>),
    Until(Interval, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn next(i: Interval, f: Formula) -> Self {
        Formula::Next(i, Box::new(f))
    }

    pub fn eventually(i: Interval, f: Formula) -> Self {
        Formula::Eventually(i, Box::new(f))
    }

    pub fn always(i: Interval, f: Formula) -> Self {
        Formula::Always(i, Box::new(f))
    }

    pub fn until(i: Interval, a: Formula, b: Formula) -> Self {
        Formula::Until(i, Box::new(a), Box::new(b))
    }

    /// Nesting depth of temporal and boolean operators; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f)
            | Formula::Next(_, f)
            | Formula::Eventually(_, f)
            | Formula::Always(_, f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p) => {
                out.insert(p.as_str());
            }
            Formula::Not(f)
            | Formula::Next(_, f)
            | Formula::Eventually(_, f)
            | Formula::Always(_, f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Every interval attached to an operator, in pre-order.
    pub fn intervals(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        self.visit(&mut |f| match f {
            Formula::Next(i, _)
            | Formula::Eventually(i, _)
            | Formula::Always(i, _)
            | Formula::Until(i, _, _) => out.push(*i),
            _ => {}
        });
        out
    }

    pub fn visit<'a>(&'a self, visitor: &mut impl FnMut(&'a Formula)) {
        visitor(self);
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => {}
            Formula::Not(f)
            | Formula::Next(_, f)
            | Formula::Eventually(_, f)
            | Formula::Always(_, f) => f.visit(visitor),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.visit(visitor);
                b.visit(visitor);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Until(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(_) | Formula::Next(..) | Formula::Eventually(..) | Formula::Always(..) => {
                4
            }
            Formula::True | Formula::False | Formula::Atom(_) => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let parens = self.precedence() < min_prec;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Formula::True => f.write_str("true")?,
            Formula::False => f.write_str("false")?,
            Formula::Atom(p) => f.write_str(p)?,
            Formula::Not(g) => {
                f.write_str("!")?;
                g.fmt_at(f, 4)?;
            }
            Formula::Next(i, g) => {
                write!(f, "X{i} ")?;
                g.fmt_at(f, 4)?;
            }
            Formula::Eventually(i, g) => {
                write!(f, "F{i} ")?;
                g.fmt_at(f, 4)?;
            }
            Formula::Always(i, g) => {
                write!(f, "G{i} ")?;
                g.fmt_at(f, 4)?;
            }
            // & and | associate to the left, U to the right.
            Formula::And(a, b) => {
                a.fmt_at(f, 3)?;
                f.write_str(" & ")?;
                b.fmt_at(f, 4)?;
            }
            Formula::Or(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(" | ")?;
                b.fmt_at(f, 3)?;
            }
            Formula::Until(i, a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " U{i} ")?;
                b.fmt_at(f, 1)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Canonical text form; `parse` reads it back to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
