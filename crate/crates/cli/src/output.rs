//! CSV and JSON emission of result tables.

use serde::{Deserialize, Serialize};

use nla_core::analysis::SweepRow;
use nla_core::protocols::{ProtocolConfig, RunResult, Scheme};

use crate::CliError;

pub const CSV_HEADER: [&str; 19] = [
    "scheme",
    "tau",
    "t",
    "eta",
    "distance_km",
    "eps1",
    "eps2",
    "delta1",
    "delta2",
    "dark_prob",
    "pnr",
    "herald_policy",
    "p",
    "F",
    "F_full",
    "X",
    "pop_vac",
    "pop_one",
    "pop_two",
];

/// Marker written in the `p` column of rows whose evaluation failed.
pub const ERROR_MARKER: &str = "error";

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses back")
}

/// Text form of a value rounded to 12 significant digits.
pub fn fmt12(x: f64) -> String {
    let v = round12(x);
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// One row of the output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scheme: Scheme,
    pub tau: f64,
    pub t: Option<f64>,
    pub eta: f64,
    pub distance_km: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub dark_prob: f64,
    pub pnr: bool,
    pub herald_policy: String,
    /// `None` marks a row whose evaluation failed.
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub p: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "F_full")]
    pub f_full: f64,
    #[serde(rename = "X")]
    pub x: f64,
    pub pop_vac: f64,
    pub pop_one: f64,
    pub pop_two: f64,
}

impl Metrics {
    fn from_result(r: &RunResult) -> Self {
        Self {
            p: r.p,
            f: r.fidelity,
            f_full: r.fidelity_full,
            x: r.x,
            pop_vac: r.pop_vac,
            pop_one: r.pop_one,
            pop_two: r.pop_two,
        }
    }

    fn rounded(&self) -> Self {
        Self {
            p: round12(self.p),
            f: round12(self.f),
            f_full: round12(self.f_full),
            x: round12(self.x),
            pop_vac: round12(self.pop_vac),
            pop_one: round12(self.pop_one),
            pop_two: round12(self.pop_two),
        }
    }
}

impl TableRow {
    pub fn new(config: &ProtocolConfig, distance_km: f64, result: Option<&RunResult>) -> Self {
        let t = match config.scheme {
            Scheme::Direct => None,
            _ => Some(result.and_then(|r| r.t_used).unwrap_or(config.t)),
        };
        Self {
            scheme: config.scheme,
            tau: config.tau,
            t,
            eta: config.eta,
            distance_km,
            eps1: config.source_alice.efficiency,
            eps2: config.source_bob.efficiency,
            delta1: config.herald_detectors[0].efficiency,
            delta2: config.char_detectors[0].efficiency,
            dark_prob: config.herald_detectors[0].dark_click_prob,
            pnr: config.herald_detectors[0].pnr,
            herald_policy: config.herald_policy.as_str().to_string(),
            metrics: result.filter(|r| !r.degenerate).map(Metrics::from_result),
        }
    }

    pub fn from_sweep(row: &SweepRow) -> Self {
        Self::new(&row.config, row.distance_km, row.result())
    }

    /// The row as it reads back from CSV.
    pub fn rounded(&self) -> Self {
        Self {
            tau: round12(self.tau),
            t: self.t.map(round12),
            eta: round12(self.eta),
            distance_km: round12(self.distance_km),
            eps1: round12(self.eps1),
            eps2: round12(self.eps2),
            delta1: round12(self.delta1),
            delta2: round12(self.delta2),
            dark_prob: round12(self.dark_prob),
            metrics: self.metrics.map(|m| m.rounded()),
            ..self.clone()
        }
    }

    fn record(&self) -> Vec<String> {
        let mut rec = vec![
            self.scheme.as_str().to_string(),
            fmt12(self.tau),
            self.t.map(fmt12).unwrap_or_default(),
            fmt12(self.eta),
            fmt12(self.distance_km),
            fmt12(self.eps1),
            fmt12(self.eps2),
            fmt12(self.delta1),
            fmt12(self.delta2),
            fmt12(self.dark_prob),
            self.pnr.to_string(),
            self.herald_policy.clone(),
        ];
        match &self.metrics {
            Some(m) => rec.extend([m.p, m.f, m.f_full, m.x, m.pop_vac, m.pop_one, m.pop_two].map(fmt12)),
            None => {
                rec.push(ERROR_MARKER.to_string());
                rec.extend(std::iter::repeat_n(String::new(), 6));
            }
        }
        rec
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self, CliError> {
        let bad = |col: &str| CliError::Config(format!("csv: bad value in column {col}"));
        let get = |i: usize| rec.get(i).ok_or_else(|| bad(CSV_HEADER[i]));
        let num = |i: usize| -> Result<f64, CliError> { get(i)?.parse().map_err(|_| bad(CSV_HEADER[i])) };
        let t = match get(2)? {
            "" => None,
            _ => Some(num(2)?),
        };
        let metrics = if get(12)? == ERROR_MARKER {
            None
        } else {
            Some(Metrics {
                p: num(12)?,
                f: num(13)?,
                f_full: num(14)?,
                x: num(15)?,
                pop_vac: num(16)?,
                pop_one: num(17)?,
                pop_two: num(18)?,
            })
        };
        Ok(Self {
            scheme: get(0)?.parse().map_err(|_| bad("scheme"))?,
            tau: num(1)?,
            t,
            eta: num(3)?,
            distance_km: num(4)?,
            eps1: num(5)?,
            eps2: num(6)?,
            delta1: num(7)?,
            delta2: num(8)?,
            dark_prob: num(9)?,
            pnr: get(10)?.parse().map_err(|_| bad("pnr"))?,
            herald_policy: get(11)?.to_string(),
            metrics,
        })
    }
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[TableRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<TableRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(CliError::Config("csv: unexpected header".into()));
    }
    r.records().map(|rec| TableRow::from_record(&rec?)).collect()
}

/// JSON object for one row with the same keys as the CSV header.
pub fn json_row(row: &TableRow) -> serde_json::Value {
    let n = |x: f64| serde_json::json!(round12(x));
    let mut obj = serde_json::json!({
        "scheme": row.scheme.as_str(),
        "tau": n(row.tau),
        "t": row.t.map(round12),
        "eta": n(row.eta),
        "distance_km": n(row.distance_km),
        "eps1": n(row.eps1),
        "eps2": n(row.eps2),
        "delta1": n(row.delta1),
        "delta2": n(row.delta2),
        "dark_prob": n(row.dark_prob),
        "pnr": row.pnr,
        "herald_policy": row.herald_policy,
    });
    let map = obj.as_object_mut().expect("object literal");
    match &row.metrics {
        Some(m) => {
            for (k, v) in [
                ("p", m.p),
                ("F", m.f),
                ("F_full", m.f_full),
                ("X", m.x),
                ("pop_vac", m.pop_vac),
                ("pop_one", m.pop_one),
                ("pop_two", m.pop_two),
            ] {
                // non-finite values have no JSON number form
                map.insert(k.into(), if v.is_finite() { n(v) } else { serde_json::Value::String(fmt12(v)) });
            }
        }
        None => {
            map.insert("error".into(), serde_json::Value::Bool(true));
        }
    }
    obj
}
