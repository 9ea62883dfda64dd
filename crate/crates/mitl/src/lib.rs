//! Metric Interval Temporal Logic over timed words.
//!
//! Formulas are parsed from an ASCII syntax (`! & | X F G U`, intervals such
//! as `[0,50]`, `(2,4]` or `[0,inf)`) and evaluated under the point-wise
//! semantics on infinite words given as a finite prefix plus a repeating
//! cycle.
//!
//! ```
//! use mitl::{parse, accepts, TimedWord, symbol};
//!
//! let phi = parse("G[0,inf) !obs & F[0,50] (green & F[0,20] blue)").unwrap();
//! let word = TimedWord::new(
//!     vec![(symbol(["green"]), 0.0), (symbol(["blue"]), 5.0)],
//!     vec![(symbol(["blue"]), 5.0)],
//! )
//! .unwrap();
//! assert!(accepts(&word, &phi));
//! ```

pub mod formula;
pub mod interval;
pub mod monitor;
pub mod parser;
pub mod word;

pub use formula::Formula;
pub use interval::{Interval, IntervalError};
pub use monitor::{accepts, satisfies, Monitor, MonitorError};
pub use parser::{parse, SyntaxError, SyntaxErrorKind};
pub use word::{symbol, Symbol, TimedWord, WordError};
