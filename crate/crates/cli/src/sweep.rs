//! Accuracy sweep over small triplets.
//!
//! A triplet is accurate when its adversary value meets `k^d / C(n+d-1, d)`.
//! The sweep reports three kinds of finding and never fails on them:
//! a triplet with `n >= d(k-1) + 1` that is not accurate, an accurate triplet
//! followed by an inaccurate one with no smaller `n` and no larger `d` or `k`,
//! and a value that grows with `d`.

use caching_core::game::upper_bound_combinatorial;
use caching_core::rational::{approx, format, parse, Rational};
use caching_core::{Error, GameSpec, Variant};
use serde::{Deserialize, Serialize};

use crate::render::{Report, Table};
use crate::{CliError, Context};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// `None` when the node budget stopped the solve.
    pub value: Option<String>,
    pub bound: String,
    pub accurate: Option<bool>,
    /// `n >= d(k-1) + 1`.
    pub threshold_met: bool,
    pub cached: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub findings: Vec<String>,
}

impl SweepRow {
    fn value(&self) -> Option<Rational> {
        self.value.as_deref().map(|v| parse(v).expect("rows hold p/q strings"))
    }
}

pub fn sweep(ctx: &mut Context, max_n: usize, max_d: usize, max_k: usize) -> Result<SweepReport, CliError> {
    let mut rows = Vec::new();
    for n in 1..=max_n {
        for d in 1..=max_d {
            for k in 1..=max_k.min(n) {
                let spec = GameSpec::new(n, d, k, Variant::Adversary)?;
                let bound = upper_bound_combinatorial(n, d, k);
                let (value, cached) = match ctx.solve(&spec, false) {
                    Ok(s) => (Some(s.value), s.cached),
                    Err(CliError::Core(Error::BudgetExceeded { .. })) => (None, false),
                    Err(e) => return Err(e),
                };
                rows.push(SweepRow {
                    n,
                    d,
                    k,
                    accurate: value.as_ref().map(|v| *v == bound),
                    value: value.as_ref().map(format),
                    bound: format(&bound),
                    threshold_met: n > d * (k - 1),
                    cached,
                });
            }
        }
    }
    let findings = findings(&rows);
    Ok(SweepReport { rows, findings })
}

fn findings(rows: &[SweepRow]) -> Vec<String> {
    let mut out = Vec::new();
    let t = |r: &SweepRow| format!("({},{},{})", r.n, r.d, r.k);
    for r in rows {
        if r.threshold_met && r.accurate == Some(false) {
            out.push(format!("{} meets n >= d(k-1)+1 but is not accurate", t(r)));
        }
    }
    for a in rows.iter().filter(|r| r.accurate == Some(true)) {
        for b in rows {
            if b.n >= a.n && b.d <= a.d && b.k <= a.k && b.accurate == Some(false) {
                out.push(format!("{} is accurate but {} is not", t(a), t(b)));
            }
        }
    }
    for a in rows {
        let Some(next) = rows.iter().find(|b| (b.n, b.d, b.k) == (a.n, a.d + 1, a.k)) else { continue };
        if let (Some(v), Some(w)) = (a.value(), next.value()) {
            if w > v {
                out.push(format!("value grows from {} to {}", t(a), t(next)));
            }
        }
    }
    out
}

pub fn cmd_sweep_accuracy(ctx: &mut Context, max_n: usize, max_d: usize, max_k: usize) -> Result<Report, CliError> {
    let report = sweep(ctx, max_n, max_d, max_k)?;
    let approx_col = ctx.config.approx;
    let mut header = vec!["n", "d", "k", "value", "bound", "accurate", "n >= d(k-1)+1"];
    if approx_col {
        header.push("value approx (not exact)");
    }
    let mut table = Table::new(&header);
    for r in &report.rows {
        let mut row = vec![
            r.n.to_string(),
            r.d.to_string(),
            r.k.to_string(),
            r.value.clone().unwrap_or_else(|| "budget".into()),
            r.bound.clone(),
            r.accurate.map_or("?".into(), |a| if a { "yes".into() } else { "no".into() }),
            if r.threshold_met { "yes".into() } else { "no".into() },
        ];
        if approx_col {
            row.push(r.value().map(|v| approx(&v, 6)).unwrap_or_default());
        }
        table.push(row);
    }
    for f in &report.findings {
        let mut row = vec![String::new(); table.header.len()];
        row[0] = format!("finding: {f}");
        table.push(row);
    }
    let json = serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Report { json, table })
}
