use super::aqec::run_harness;
use super::{composed_code, stream_rng, Common, SweepArgs};
use crate::config::echo;
use crate::report::{Check, Report, Table};
use anyhow::Result;
use clap::Args;
use pmdkit_core::aqec::ErasureAdversary;
use pmdkit_core::pmd::{measure_pmd_epsilon, pmd_bound, PmdCode, BOUND_TOLERANCE};
use pmdkit_core::ptc::{measure_pairwise_detectability, measure_strong_ptc_error, PtcFamily};
use pmdkit_core::symplectic::PivotRule;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;

/// Appends the grid rows and the failed-row check. Rows that error keep
/// their grid coordinates and carry the message in `status`.
fn finish(r: &mut Report, mut table: Table, rows: Vec<Vec<Value>>) {
    let pass_col = table.columns.iter().position(|c| c == "pass").expect("pass column");
    let failed = rows.iter().filter(|row| row[pass_col] != json!(true)).count();
    for row in rows {
        table.push(row);
    }
    r.check(Check::at_most(
        "failed_rows",
        "#{grid points that error or miss their bound} <= 0",
        failed as f64,
        0.0,
        0.0,
    ));
    r.measure("rows", table.rows.len());
    r.table = Some(table);
}

fn error_row(prefix: Vec<Value>, width: usize, e: &anyhow::Error) -> Vec<Value> {
    let mut row = prefix;
    row.resize(width - 2, Value::Null);
    row.push(json!(false));
    row.push(json!(format!("error: {e:#}")));
    row
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepPmd {
    /// Block lengths, comma separated.
    #[arg(long, required = true, num_args = 0.., value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Key lengths, comma separated.
    #[arg(long, required = true, num_args = 0.., value_delimiter = ',')]
    pub lambda: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

const PMD_COLUMNS: [&str; 9] = [
    "n",
    "lambda",
    "ptc_epsilon",
    "ptc_delta",
    "pmd_epsilon",
    "bound",
    "exhaustive",
    "pass",
    "status",
];

impl SweepPmd {
    fn row(&self, n: usize, lambda: usize) -> Result<Vec<Value>> {
        let fam = PtcFamily::new(n, lambda)?;
        let mode = self.sweep.mode();
        let strong = measure_strong_ptc_error(&fam, mode)?;
        let pairwise = measure_pairwise_detectability(&fam, mode)?;
        let pmd = PmdCode::new(fam, PivotRule::Lowest)?;
        let eps = measure_pmd_epsilon(&pmd, mode)?;
        let bound = pmd_bound(strong.value, pairwise.value, lambda);
        Ok(vec![
            json!(n),
            json!(lambda),
            json!(strong.value),
            json!(pairwise.value),
            json!(eps.value),
            json!(bound),
            json!(eps.exhaustive && strong.exhaustive && pairwise.exhaustive),
            json!(eps.value <= bound + BOUND_TOLERANCE),
            json!("ok"),
        ])
    }

    pub fn execute(&self) -> Result<Report> {
        let grid: Vec<(usize, usize)> = self
            .n
            .iter()
            .flat_map(|&n| self.lambda.iter().map(move |&l| (n, l)))
            .collect();
        let rows: Vec<Vec<Value>> = grid
            .par_iter()
            .map(|&(n, l)| {
                self.row(n, l)
                    .unwrap_or_else(|e| error_row(vec![json!(n), json!(l)], PMD_COLUMNS.len(), &e))
            })
            .collect();
        let mut r = Report::new("sweep pmd", self.sweep.seed, echo(self));
        finish(&mut r, Table::new(&PMD_COLUMNS), rows);
        Ok(r)
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepAqec {
    /// Block length of the PMD family.
    #[arg(long, default_value_t = 4)]
    pub pmd_n: usize,
    /// Key length of the PMD family.
    #[arg(long, default_value_t = 2)]
    pub pmd_lambda: usize,
    /// Outer stabilizer code file.
    #[arg(long)]
    pub outer: Option<PathBuf>,
    /// Erasure budgets, comma separated.
    #[arg(long, required = true, num_args = 0.., value_delimiter = ',')]
    pub budget: Vec<usize>,
    /// Random non-adaptive adversaries per budget.
    #[arg(long, default_value_t = 10)]
    pub adversaries: usize,
    /// Kraus operators per adversary.
    #[arg(long, default_value_t = 2)]
    pub kraus: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

const AQEC_COLUMNS: [&str; 9] = [
    "budget",
    "adversaries",
    "min_fidelity",
    "mean_fidelity",
    "max_list_size",
    "min_bound",
    "passed",
    "pass",
    "status",
];

impl SweepAqec {
    fn row(&self, budget: usize) -> Result<Vec<Value>> {
        let code = composed_code(self.pmd_n, self.pmd_lambda, self.outer.as_deref())?;
        let adversaries = (0..self.adversaries)
            .map(|i| {
                let mut rng = stream_rng(self.seed, (budget as u64) << 32 | i as u64);
                Ok(ErasureAdversary::random_non_adaptive(code.n(), budget, self.kraus, &mut rng)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let reports = run_harness(&code, &adversaries)?;
        let count = reports.len().max(1) as f64;
        let passed = reports.iter().filter(|h| h.pass).count();
        Ok(vec![
            json!(budget),
            json!(reports.len()),
            json!(reports.iter().map(|h| h.fidelity).fold(f64::INFINITY, f64::min)),
            json!(reports.iter().map(|h| h.fidelity).sum::<f64>() / count),
            json!(reports.iter().map(|h| h.list_size).max().unwrap_or(0)),
            json!(reports.iter().map(|h| h.bound).fold(f64::INFINITY, f64::min)),
            json!(passed),
            json!(passed == reports.len()),
            json!("ok"),
        ])
    }

    pub fn execute(&self) -> Result<Report> {
        let rows: Vec<Vec<Value>> = self
            .budget
            .iter()
            .map(|&t| {
                self.row(t)
                    .unwrap_or_else(|e| error_row(vec![json!(t)], AQEC_COLUMNS.len(), &e))
            })
            .collect();
        let mut r = Report::new("sweep aqec", Some(self.seed), echo(self));
        finish(&mut r, Table::new(&AQEC_COLUMNS), rows);
        Ok(r)
    }
}
