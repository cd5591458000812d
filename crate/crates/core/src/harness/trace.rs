//! Per-round run records and their CSV / JSON encodings.
//!
//! CSV layout: a first line `# olo-trace <header json>`, then a column row
//! `t,wealth,w_0..,g_0..,gs_0..` followed by optional reduction columns
//! (`z_*`, `gt_*` for constrained and curvature roots; `mag`, `s`, `y_*` for
//! magnitude × direction roots). Floats use the shortest decimal string that
//! round-trips; absent values are empty cells.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{OloError, Result};
use crate::recipe::Recipe;
use crate::spaces::NormSpec;

pub const TRACE_FORMAT: &str = "olo-trace";
const CSV_PREFIX: &str = "# olo-trace ";

/// Run metadata stored at the top of every trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub version: u32,
    pub algo: Recipe,
    pub adversary: String,
    pub space: NormSpec,
    pub rounds: usize,
    pub seed: u64,
    pub eps: f64,
    pub lipschitz: f64,
    pub rng: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub wealth: Option<f64>,
    pub w: Vec<f64>,
    /// Gradient as produced by the adversary.
    pub g: Vec<f64>,
    /// Gradient divided by the Lipschitz constant, as seen by the learner.
    pub g_scaled: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_grad: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar_grad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub rounds: Vec<RoundRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl std::str::FromStr for TraceFormat {
    type Err = OloError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "json" => Ok(TraceFormat::Json),
            other => Err(OloError::Config(format!("unknown trace format '{other}'"))),
        }
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn parse_f64(cell: &str, column: &str, t: usize) -> Result<f64> {
    cell.parse::<f64>()
        .map_err(|_| OloError::Config(format!("row {t}, column {column}: bad number '{cell}'")))
}

#[derive(Default)]
struct Extras {
    inner: bool,
    dimfree: bool,
}

impl RunTrace {
    pub fn dim(&self) -> usize {
        self.header.space.dim()
    }

    /// Played points.
    pub fn plays(&self) -> impl Iterator<Item = &[f64]> {
        self.rounds.iter().map(|r| r.w.as_slice())
    }

    /// Gradients as seen by the learner.
    pub fn scaled_grads(&self) -> impl Iterator<Item = &[f64]> {
        self.rounds.iter().map(|r| r.g_scaled.as_slice())
    }

    fn extras(&self) -> Extras {
        let first = self.rounds.first();
        Extras {
            inner: first.is_some_and(|r| r.inner_point.is_some() && r.inner_grad.is_some()),
            dimfree: first.is_some_and(|r| r.magnitude.is_some() && r.direction.is_some()),
        }
    }

    pub fn columns(&self) -> Vec<String> {
        let d = self.dim();
        let ex = self.extras();
        let mut cols = vec!["t".to_string(), "wealth".to_string()];
        let mut group = |prefix: &str| (0..d).for_each(|i| cols.push(format!("{prefix}_{i}")));
        group("w");
        group("g");
        group("gs");
        if ex.inner {
            group("z");
            group("gt");
        }
        if ex.dimfree {
            cols.push("mag".into());
            cols.push("s".into());
            (0..d).for_each(|i| cols.push(format!("y_{i}")));
        }
        cols
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header = serde_json::to_string(&self.header)?;
        writeln!(out, "{CSV_PREFIX}{header}")?;
        let ex = self.extras();
        let d = self.dim();
        let mut w = csv::WriterBuilder::new().from_writer(out);
        w.write_record(self.columns())?;
        let missing = |len: usize| vec![String::new(); len];
        for r in &self.rounds {
            let mut row = vec![r.t.to_string(), r.wealth.map(fmt_f64).unwrap_or_default()];
            row.extend(r.w.iter().copied().map(fmt_f64));
            row.extend(r.g.iter().copied().map(fmt_f64));
            row.extend(r.g_scaled.iter().copied().map(fmt_f64));
            if ex.inner {
                for v in [&r.inner_point, &r.inner_grad] {
                    match v {
                        Some(v) => row.extend(v.iter().copied().map(fmt_f64)),
                        None => row.extend(missing(d)),
                    }
                }
            }
            if ex.dimfree {
                row.push(r.magnitude.map(fmt_f64).unwrap_or_default());
                row.push(r.scalar_grad.map(fmt_f64).unwrap_or_default());
                match &r.direction {
                    Some(v) => row.extend(v.iter().copied().map(fmt_f64)),
                    None => row.extend(missing(d)),
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| OloError::Io(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let json = first
            .trim_end()
            .strip_prefix(CSV_PREFIX)
            .ok_or_else(|| OloError::Config("missing '# olo-trace' header line".into()))?;
        let header: TraceHeader = serde_json::from_str(json)?;
        let d = header.space.dim();
        let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let find = |name: &str| names.iter().position(|n| n == name);
        let group = |prefix: &str| -> Option<Vec<usize>> {
            (0..d).map(|i| find(&format!("{prefix}_{i}"))).collect()
        };
        let need = |prefix: &str| {
            group(prefix).ok_or_else(|| OloError::Config(format!("trace lacks columns {prefix}_0..{prefix}_{}", d - 1)))
        };
        let (t_col, wealth_col) = (
            find("t").ok_or_else(|| OloError::Config("trace lacks column t".into()))?,
            find("wealth").ok_or_else(|| OloError::Config("trace lacks column wealth".into()))?,
        );
        let (w_cols, g_cols, gs_cols) = (need("w")?, need("g")?, need("gs")?);
        let (z_cols, gt_cols, y_cols) = (group("z"), group("gt"), group("y"));
        let (mag_col, s_col) = (find("mag"), find("s"));

        let mut rounds = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let cell = |i: usize| rec.get(i).unwrap_or("");
            let t: usize = cell(t_col)
                .parse()
                .map_err(|_| OloError::Config(format!("bad round index '{}'", cell(t_col))))?;
            let num = |i: usize| parse_f64(cell(i), &names[i], t);
            let opt = |i: usize| -> Result<Option<f64>> {
                if cell(i).is_empty() {
                    Ok(None)
                } else {
                    num(i).map(Some)
                }
            };
            let vec_of = |cols: &[usize]| cols.iter().map(|&i| num(i)).collect::<Result<Vec<_>>>();
            let opt_vec = |cols: &Option<Vec<usize>>| -> Result<Option<Vec<f64>>> {
                match cols {
                    Some(c) if !cell(c[0]).is_empty() => vec_of(c).map(Some),
                    _ => Ok(None),
                }
            };
            rounds.push(RoundRecord {
                t,
                wealth: opt(wealth_col)?,
                w: vec_of(&w_cols)?,
                g: vec_of(&g_cols)?,
                g_scaled: vec_of(&gs_cols)?,
                inner_point: opt_vec(&z_cols)?,
                inner_grad: opt_vec(&gt_cols)?,
                magnitude: mag_col.map(opt).transpose()?.flatten(),
                scalar_grad: s_col.map(opt).transpose()?.flatten(),
                direction: opt_vec(&y_cols)?,
            });
        }
        Ok(RunTrace { header, rounds })
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }

    pub fn write<W: Write>(&self, out: W, format: TraceFormat) -> Result<()> {
        match format {
            TraceFormat::Csv => self.write_csv(out),
            TraceFormat::Json => self.write_json(out),
        }
    }

    /// Reads either encoding, detected from the first byte.
    pub fn read_any(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::read_json(text.as_bytes())
        } else {
            Self::read_csv(text.as_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(extras: bool) -> RunTrace {
        let header = TraceHeader {
            format: TRACE_FORMAT.into(),
            version: 1,
            algo: Recipe::CoinBanach { eps: None },
            adversary: "rademacher".into(),
            space: NormSpec::euclidean(2).unwrap(),
            rounds: 2,
            seed: 7,
            eps: 1.0,
            lipschitz: 2.0,
            rng: "splitmix64".into(),
        };
        let round = |t: usize, x: f64| RoundRecord {
            t,
            wealth: Some(1.0 + x),
            w: vec![x, -1e-7],
            g: vec![2.0, -0.0],
            g_scaled: vec![1.0, -0.0],
            inner_point: extras.then(|| vec![x, 1.0 / 3.0]),
            inner_grad: extras.then(|| vec![0.5, 0.25]),
            magnitude: extras.then_some(x * 3.0),
            scalar_grad: extras.then_some(0.1),
            direction: extras.then(|| vec![0.6, 0.8]),
        };
        RunTrace { header, rounds: vec![round(1, 0.3), round(2, std::f64::consts::PI)] }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        for extras in [false, true] {
            let tr = sample(extras);
            let text = tr.to_csv_string().unwrap();
            let back = RunTrace::read_csv(text.as_bytes()).unwrap();
            assert_eq!(back, tr);
            assert_eq!(back.to_csv_string().unwrap(), text);
        }
    }

    #[test]
    fn csv_layout() {
        let text = sample(false).to_csv_string().unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# olo-trace {"));
        assert_eq!(lines.next().unwrap(), "t,wealth,w_0,w_1,g_0,g_1,gs_0,gs_1");
        assert_eq!(lines.next().unwrap(), "1,1.3,0.3,-1e-7,2.0,-0.0,1.0,-0.0");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let tr = sample(true);
        let mut buf = Vec::new();
        tr.write_json(&mut buf).unwrap();
        let back = RunTrace::read_any(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, tr);
    }

    #[test]
    fn rejects_headerless_csv() {
        assert!(RunTrace::read_csv("t,wealth\n1,1.0\n".as_bytes()).is_err());
    }
}
