//! Text outputs: the per-horizon CSV table, the `V(t; 0)` histogram CSV and
//! a JSON summary.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! statistics always produce equal bytes.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::analysis::*;
use super::{Accum, EnsembleConfig, EnsembleStats, Histogram};
use crate::error::{Error, Result};
use crate::site::Site;

pub const CSV_HEADER: [&str; 6] = ["t", "stat", "mean", "ci_lo", "ci_hi", "replicas"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub t: u64,
    pub stat: String,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub replicas: u64,
}

/// Label of `V(t; w)` in the `stat` column, e.g. `V[0;0;0]`.
pub fn visit_label(w: Site) -> String {
    format!("V[{};{};{}]", w.x, w.y, w.z)
}

pub const V0_LABEL: &str = "V[0;0;0]";

fn row(t: u64, stat: &str, a: &Accum, divisor: f64) -> CsvRow {
    let s = a.scaled_summary(divisor);
    CsvRow {
        t,
        stat: stat.to_string(),
        mean: s.mean,
        ci_lo: s.ci_lo,
        ci_hi: s.ci_hi,
        replicas: a.count,
    }
}

/// One row per (horizon, statistic): the watched `V`s in watch order, then
/// `N`, `DF`, `F`, `N_new`, `z`, `M` and, with a cylinder, `l`.
pub fn csv_rows(stats: &EnsembleStats) -> Vec<CsvRow> {
    let mut out = Vec::new();
    for h in &stats.horizons {
        for (w, a) in stats.identity.watch.iter().zip(&h.visits) {
            out.push(row(h.t, &visit_label(*w), a, 1.0));
        }
        out.push(row(h.t, "N", &h.n, 1.0));
        out.push(row(h.t, "DF", &h.df, 1.0));
        out.push(row(h.t, "F", &h.f, 1.0));
        out.push(row(h.t, "N_new", &h.n_new, 1.0));
        out.push(row(h.t, "z", &h.z, 1.0));
        out.push(row(h.t, "M", &h.m_x5, 5.0));
        if stats.identity.cylinder_radius.is_some() {
            out.push(row(h.t, "l", &h.l, 1.0));
        }
    }
    out
}

fn csv_err(e: csv::Error) -> Error {
    Error::Precondition(format!("csv: {e}"))
}

pub fn write_csv<W: Write>(rows: &[CsvRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        wr.write_record([
            r.t.to_string(),
            r.stat.clone(),
            r.mean.to_string(),
            r.ci_lo.to_string(),
            r.ci_hi.to_string(),
            r.replicas.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()
        .map_err(|e| Error::Precondition(format!("write: {e}")))
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<CsvRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Precondition(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    rd.deserialize().map(|r| r.map_err(csv_err)).collect()
}

/// `(t, mean)` of `V(t; 0)` rows, in file order.
pub fn returns_from_csv(rows: &[CsvRow]) -> Vec<ReturnsRow> {
    rows.iter()
        .filter(|r| r.stat == V0_LABEL)
        .map(|r| ReturnsRow {
            t: r.t,
            mean: r.mean,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            se: (r.ci_hi - r.ci_lo) / (2.0 * crate::stats::Z95),
            replicas: r.replicas,
        })
        .collect()
}

/// Rows `t,v,count` of the `V(t; 0)` histogram, zero counts omitted.
pub fn write_hist_csv<W: Write>(stats: &EnsembleStats, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "v", "count"]).map_err(csv_err)?;
    for h in &stats.horizons {
        for (k, &c) in h.v0_hist.counts.iter().enumerate() {
            if c > 0 {
                wr.write_record([h.t.to_string(), k.to_string(), c.to_string()])
                    .map_err(csv_err)?;
            }
        }
    }
    wr.flush()
        .map_err(|e| Error::Precondition(format!("write: {e}")))
}

/// Histograms per horizon, in file order.
pub fn read_hist_csv<R: Read>(r: R) -> Result<Vec<(u64, Histogram)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out: Vec<(u64, Histogram)> = Vec::new();
    for rec in rd.deserialize::<(u64, u64, u64)>() {
        let (t, v, c) = rec.map_err(csv_err)?;
        if out.last().map(|l| l.0) != Some(t) {
            out.push((t, Histogram::default()));
        }
        let h = &mut out.last_mut().expect("just pushed").1;
        if v as usize >= h.counts.len() {
            h.counts.resize(v as usize + 1, 0);
        }
        h.counts[v as usize] += c;
    }
    Ok(out)
}

/// Structured summary of an ensemble run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: EnsembleConfig,
    pub replicas: u64,
    pub returns: Vec<ReturnsRow>,
    pub growth_in_half_widths: Option<f64>,
    pub scaling_fit: Option<RegressionResult>,
    pub martingale: Vec<MartingaleRow>,
    pub range: Option<RangeReport>,
    /// Tail of `V(t; 0)` at the last horizon (needs enough replicas).
    pub tail: Option<SurvivalReport>,
    pub cylinder: Option<SurvivalReport>,
}

pub fn summarize(config: &EnsembleConfig, stats: &EnsembleStats) -> RunSummary {
    let returns = returns_table(stats);
    let last = stats.horizons.last().expect("nonempty schedule");
    RunSummary {
        config: config.clone(),
        replicas: stats.replicas,
        growth_in_half_widths: growth_in_half_widths(&returns),
        scaling_fit: fit_returns(&returns).ok(),
        martingale: martingale_table(stats),
        range: range_and_floor_report(stats, 0, 3.0).ok(),
        tail: tail_estimator(last.t, &last.v0_hist).ok(),
        cylinder: config
            .cylinder_radius
            .and_then(|_| cylinder_decay(last).ok()),
        returns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_ensemble, RunOptions};

    #[test]
    fn csv_round_trip_and_layout() {
        let cfg = EnsembleConfig::new(vec![32, 128], 6, 3).with_targets(vec![Site::new(1, 0, 0)]);
        let stats = run_ensemble(&cfg, RunOptions::default()).unwrap();
        let rows = csv_rows(&stats);
        assert_eq!(rows.len(), 2 * 8);
        assert_eq!(rows[0].stat, V0_LABEL);
        assert_eq!(rows[1].stat, "V[1;0;0]");
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,stat,mean,ci_lo,ci_hi,replicas\n32,V[0;0;0],"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
        assert_eq!(returns_from_csv(&rows).len(), 2);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_csv("t,stat,mean,ci_lo,ci_hi,replicas\nx,V,1,1,1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn histogram_round_trip() {
        let cfg = EnsembleConfig::new(vec![16, 64], 30, 4);
        let stats = run_ensemble(&cfg, RunOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_hist_csv(&stats, &mut buf).unwrap();
        let back = read_hist_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for ((t, h), hs) in back.iter().zip(&stats.horizons) {
            assert_eq!(*t, hs.t);
            assert_eq!(h, &hs.v0_hist);
        }
    }
}
