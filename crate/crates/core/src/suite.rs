//! Batch runner over a fixture corpus.

use std::fmt::Write as _;

use serde::Serialize;

use crate::decomp::{analyze, RunConfig};
use crate::fixtures::Fixture;
use crate::symbol::symbol_compile;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub order: Option<usize>,
    pub n: Option<i64>,
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    pub o: Option<usize>,
    pub b: Option<usize>,
    pub expect: Option<usize>,
    pub totally_abelian: Option<bool>,
    pub pass: bool,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub version: String,
    pub config: RunConfig,
    pub rows: Vec<SuiteRow>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteSummary {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let show = |v: Option<i64>| v.map_or("-".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{:<16} {:>5} {:>3} {:>3} {:>3} {:>3} {:>6}  result",
            "fixture", "order", "n", "N", "o", "b", "expect"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<16} {:>5} {:>3} {:>3} {:>3} {:>3} {:>6}  {}",
                r.name,
                show(r.order.map(|v| v as i64)),
                show(r.n),
                show(r.big_n.map(|v| v as i64)),
                show(r.o.map(|v| v as i64)),
                show(r.b.map(|v| v as i64)),
                show(r.expect.map(|v| v as i64)),
                if r.pass {
                    "PASS".to_string()
                } else {
                    format!("FAIL ({})", r.failures.join("; "))
                }
            );
        }
        let _ = writeln!(s, "{} passed, {} failed", self.passed, self.failed);
        s
    }
}

/// Analyzes every fixture. A row passes when the report is complete, the four
/// invariants agree, both divisibility laws hold and the expectation (if any)
/// is met.
pub fn run_suite(fixtures: &[Fixture], config: &RunConfig) -> SuiteSummary {
    let rows: Vec<SuiteRow> = fixtures.iter().map(|f| run_one(f, config)).collect();
    let passed = rows.iter().filter(|r| r.pass).count();
    SuiteSummary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: *config,
        failed: rows.len() - passed,
        passed,
        rows,
    }
}

fn run_one(fixture: &Fixture, config: &RunConfig) -> SuiteRow {
    let mut row = SuiteRow {
        name: fixture.name.clone(),
        order: None,
        n: None,
        big_n: None,
        o: None,
        b: None,
        expect: fixture.expect,
        totally_abelian: None,
        pass: false,
        failures: Vec::new(),
        warnings: Vec::new(),
    };
    let map = match symbol_compile(&fixture.spec, &config.tolerances) {
        Ok(m) => m,
        Err(e) => {
            row.failures.push(format!("compile: {e}"));
            return row;
        }
    };
    let report = analyze(&map, config);
    row.order = Some(report.order);
    row.n = report.n;
    row.big_n = report.big_n;
    row.o = report.o;
    row.b = report.b;
    row.totally_abelian = report.totally_abelian;
    row.warnings = report.warnings.clone();
    if report.partial {
        row.failures.push("partial report".into());
    }
    row.failures.extend(report.equality_check.discrepancies.iter().cloned());
    if let Some(d) = &report.divisibility {
        if !d.fiber_law {
            row.failures.push("fiber divisibility".into());
        }
        if !d.winding_law {
            row.failures.push("winding divisibility".into());
        }
    }
    if let (Some(e), Some(n)) = (fixture.expect, report.n) {
        if n != e as i64 {
            row.failures.push(format!("expected {e}"));
        }
    }
    row.pass = row.failures.is_empty();
    row
}
