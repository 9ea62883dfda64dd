//! Time series of an execution and its CSV form.
//!
//! The first line is a header comment
//! `# coopmitl-trace version=1 seed=<u64> dt=<s> agents=<n>`, followed by a
//! CSV table with one column per scalar:
//!
//! | columns | meaning |
//! |---|---|
//! | `t` | time (s) |
//! | `x0`..`x5` | object pose: position, then roll, pitch, yaw |
//! | `v0`..`v5` | object pose rate |
//! | `u{i}_{k}` | wrench of agent `i` (0-based), component `k` |
//! | `lambda{i}_{k}` | interaction wrench of agent `i` |
//! | `segment` | index of the plan transition being executed |
//! | `from`, `to` | region indices of that transition |
//! | `e_s{k}`, `rho_s{k}` | pose error and its envelope |
//! | `e_v{k}`, `rho_v{k}` | velocity error and its envelope |
//! | `xd{k}` | desired pose |

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DVector;
use thiserror::Error;

use crate::kinematics::Vec6;
use crate::partition::RegionId;

pub const TRACE_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "# coopmitl-trace";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad trace header: {0}")]
    Header(String),
    #[error("unsupported trace format version {0}")]
    Version(u32),
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: Vec6,
    pub v: Vec6,
    pub u: DVector<f64>,
    pub lambda: DVector<f64>,
    pub segment: usize,
    pub from: RegionId,
    pub to: RegionId,
    pub e_s: Vec6,
    pub rho_s: Vec6,
    pub e_v: Vec6,
    pub rho_v: Vec6,
    pub xd: Vec6,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub seed: u64,
    pub dt: f64,
    pub agents: usize,
    pub rows: Vec<TraceRow>,
}

fn column_names(agents: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    let six = |prefix: &str, cols: &mut Vec<String>| {
        cols.extend((0..6).map(|k| format!("{prefix}{k}")));
    };
    six("x", &mut cols);
    six("v", &mut cols);
    for name in ["u", "lambda"] {
        for i in 0..agents {
            six(&format!("{name}{i}_"), &mut cols);
        }
    }
    cols.extend(["segment", "from", "to"].map(String::from));
    for name in ["e_s", "rho_s", "e_v", "rho_v", "xd"] {
        six(name, &mut cols);
    }
    cols
}

impl Trace {
    pub fn new(seed: u64, dt: f64, agents: usize) -> Self {
        Self {
            seed,
            dt,
            agents,
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> Vec<String> {
        column_names(self.agents)
    }

    pub fn start_time(&self) -> Option<f64> {
        self.rows.first().map(|r| r.t)
    }

    pub fn end_time(&self) -> Option<f64> {
        self.rows.last().map(|r| r.t)
    }

    /// The rows up to and including time `t`.
    pub fn truncated(&self, t: f64) -> Self {
        Self {
            rows: self.rows.iter().filter(|r| r.t <= t).cloned().collect(),
            ..*self
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), TraceError> {
        writeln!(
            out,
            "{MAGIC} version={TRACE_FORMAT_VERSION} seed={} dt={} agents={}",
            self.seed, self.dt, self.agents
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns())?;
        let mut rec: Vec<String> = Vec::new();
        for r in &self.rows {
            rec.clear();
            rec.push(r.t.to_string());
            rec.extend(r.x.iter().chain(r.v.iter()).map(f64::to_string));
            rec.extend(r.u.iter().chain(r.lambda.iter()).map(f64::to_string));
            rec.push(r.segment.to_string());
            rec.push(r.from.0.to_string());
            rec.push(r.to.0.to_string());
            for m in [&r.e_s, &r.rho_s, &r.e_v, &r.rho_v, &r.xd] {
                rec.extend(m.iter().map(f64::to_string));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TraceError> {
        let mut input = BufReader::new(input);
        let mut header = String::new();
        input.read_line(&mut header)?;
        let (seed, dt, agents) = parse_header(header.trim_end())?;
        let mut rd = csv::Reader::from_reader(input);
        let expected = column_names(agents);
        let got: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        if got != expected {
            return Err(TraceError::Header(
                "column names do not match the agent count".into(),
            ));
        }
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let bad = |msg: String| TraceError::Row { row: i + 1, msg };
            let nums: Vec<f64> = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("`{f}`: {e}"))))
                .collect::<Result<_, _>>()?;
            let mut it = nums.into_iter();
            let mut take = |n: usize| -> Vec<f64> { it.by_ref().take(n).collect() };
            let six = |v: Vec<f64>| Vec6::from_vec(v);
            let t = take(1)[0];
            let x = six(take(6));
            let v = six(take(6));
            let u = DVector::from_vec(take(6 * agents));
            let lambda = DVector::from_vec(take(6 * agents));
            let idx = take(3);
            let as_index = |f: f64| -> Result<usize, TraceError> {
                if f >= 0.0 && f.fract() == 0.0 {
                    Ok(f as usize)
                } else {
                    Err(bad(format!("`{f}` is not an index")))
                }
            };
            rows.push(TraceRow {
                t,
                x,
                v,
                u,
                lambda,
                segment: as_index(idx[0])?,
                from: RegionId(as_index(idx[1])?),
                to: RegionId(as_index(idx[2])?),
                e_s: six(take(6)),
                rho_s: six(take(6)),
                e_v: six(take(6)),
                rho_v: six(take(6)),
                xd: six(take(6)),
            });
        }
        Ok(Self {
            seed,
            dt,
            agents,
            rows,
        })
    }
}

fn parse_header(line: &str) -> Result<(u64, f64, usize), TraceError> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| TraceError::Header(format!("expected `{MAGIC}`")))?;
    let (mut version, mut seed, mut dt, mut agents) = (None, None, None, None);
    for field in rest.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| TraceError::Header(format!("`{field}` is not key=value")))?;
        let err = |_| TraceError::Header(format!("bad value for {k}: `{v}`"));
        match k {
            "version" => version = Some(v.parse::<u32>().map_err(|e| err(e.to_string()))?),
            "seed" => seed = Some(v.parse::<u64>().map_err(|e| err(e.to_string()))?),
            "dt" => dt = Some(v.parse::<f64>().map_err(|e| err(e.to_string()))?),
            "agents" => agents = Some(v.parse::<usize>().map_err(|e| err(e.to_string()))?),
            _ => {}
        }
    }
    let missing = |k: &str| TraceError::Header(format!("missing {k}"));
    let version = version.ok_or_else(|| missing("version"))?;
    if version != TRACE_FORMAT_VERSION {
        return Err(TraceError::Version(version));
    }
    Ok((
        seed.ok_or_else(|| missing("seed"))?,
        dt.ok_or_else(|| missing("dt"))?,
        agents.ok_or_else(|| missing("agents"))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> TraceRow {
        let v = Vec6::from_fn(|k, _| t + k as f64 / 3.0);
        TraceRow {
            t,
            x: v,
            v: -v,
            u: DVector::from_fn(12, |k, _| k as f64 * 0.1 + t),
            lambda: DVector::from_fn(12, |k, _| -(k as f64) / 7.0),
            segment: 2,
            from: RegionId(3),
            to: RegionId(4),
            e_s: v * 1e-3,
            rho_s: v,
            e_v: v * 1e-17,
            rho_v: v * 2.0,
            xd: v,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut tr = Trace::new(42, 1e-3, 2);
        tr.rows = vec![row(0.0), row(0.001), row(std::f64::consts::PI)];
        let text = tr.to_csv_string();
        assert!(text.starts_with("# coopmitl-trace version=1 seed=42 dt=0.001 agents=2\n"));
        let back = Trace::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, tr);
        assert_eq!(tr.columns().len(), 1 + 12 + 24 + 3 + 30);
    }

    #[test]
    fn rejects_other_versions() {
        let tr = Trace::new(1, 1e-3, 1);
        let text = tr.to_csv_string().replace("version=1", "version=9");
        assert!(matches!(
            Trace::read_csv(text.as_bytes()),
            Err(TraceError::Version(9))
        ));
        assert!(matches!(
            Trace::read_csv("t,x0\n".as_bytes()),
            Err(TraceError::Header(_))
        ));
    }
}
