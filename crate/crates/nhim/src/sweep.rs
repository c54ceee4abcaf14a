//! One certification per `ε` interval of a partition.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nhim_core::verify::certify;

use crate::config::RunConfig;
use crate::report::CertificateDoc;

/// Parse a partition file: one interval per line as `lo hi` or `lo,hi`;
/// blank lines and `#` comments are skipped.
pub fn parse_partition(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {s:?}: {e}", no + 1));
        let [lo, hi] = nums.as_slice() else {
            return Err(format!("line {}: expected two numbers, found {:?}", no + 1, line));
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if !(lo <= hi) {
            return Err(format!("line {}: lower end {lo} exceeds upper end {hi}", no + 1));
        }
        if let Some(&(_, prev_hi)) = out.last() {
            if lo < prev_hi {
                return Err(format!("line {}: [{lo}, {hi}] overlaps or precedes the previous interval", no + 1));
            }
        }
        out.push((lo, hi));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub outcome: Result<CertificateDoc, String>,
}

impl SweepRow {
    pub fn order(&self) -> Option<i64> {
        self.outcome.as_ref().ok().and_then(|d| d.rates.as_ref()).map(|r| r.order)
    }
}

fn run_one(cfg: &RunConfig, lo: f64, hi: f64) -> Result<CertificateDoc, String> {
    let c = cfg.with_eps(lo, hi);
    c.validate().map_err(|e| e.to_string())?;
    let model = c.build_model().map_err(|e| e.to_string())?;
    let domain = c.domain_box(model.as_ref()).map_err(|e| e.to_string())?;
    let cert = certify(model.as_ref(), &domain, &c.certify_options());
    Ok(CertificateDoc::new(&cert, &c))
}

/// Certify every interval; rows come back in input order whatever the
/// completion order of the worker threads.
pub fn run_sweep(cfg: &RunConfig, partition: &[(f64, f64)]) -> Vec<SweepRow> {
    let slots: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; partition.len()]);
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(partition.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(lo, hi)) = partition.get(i) else { break };
                let row = SweepRow { eps_lo: lo, eps_hi: hi, outcome: run_one(cfg, lo, hi) };
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(row);
            });
        }
    });
    slots.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every slot filled")).collect()
}

const HEADER: [&str; 8] = ["eps_lo", "eps_hi", "order", "binding_condition", "covering", "backward_cone", "certified", "error"];

fn cells(row: &SweepRow) -> [String; 8] {
    let (lo, hi) = (row.eps_lo.to_string(), row.eps_hi.to_string());
    match &row.outcome {
        Ok(d) => {
            let (order, binding) = match &d.rates {
                Some(r) => (r.order.to_string(), r.binding_condition.clone().unwrap_or_default()),
                None => (String::new(), String::new()),
            };
            [lo, hi, order, binding, d.covering.verdict.clone(), d.backward_cone.verdict.clone(), d.certified.to_string(), d.errors.join("; ")]
        }
        Err(e) => [lo, hi, String::new(), String::new(), String::new(), String::new(), "false".into(), e.clone()],
    }
}

/// Column-aligned text table.
pub fn table(rows: &[SweepRow]) -> String {
    let body: Vec<[String; 8]> = rows.iter().map(cells).collect();
    let mut width: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for r in &body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |r: &[String]| {
        let parts: Vec<String> = r.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&HEADER.map(String::from));
    for r in &body {
        line(r);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv(rows: &[SweepRow]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in rows {
        let line: Vec<String> = cells(r).iter().map(|c| csv_field(c)).collect();
        out += &line.join(",");
        out.push('\n');
    }
    out
}
