use super::{composed_code, read_file, stream_rng, Common};
use crate::config::echo;
use crate::report::{Check, Report, Table};
use anyhow::{bail, Context, Result};
use clap::Args;
use pmdkit_core::aqec::{erasure_harness, ComposedCode, ErasureAdversary, HarnessReport};
use pmdkit_core::densesim::QuantumChannel;
use pmdkit_core::pmd::BOUND_TOLERANCE;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};

/// Largest deviation of the pipeline's output weight from 1.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AqecSimulate {
    /// Block length of the PMD family.
    #[arg(long, default_value_t = 4)]
    pub pmd_n: usize,
    /// Key length of the PMD family.
    #[arg(long, default_value_t = 2)]
    pub pmd_lambda: usize,
    /// Outer stabilizer code file; its k must equal the PMD register size.
    #[arg(long)]
    pub outer: Option<PathBuf>,
    /// Adversary file, or a channel file whose support is erased.
    #[arg(long, conflicts_with = "adversaries")]
    pub adversary: Option<PathBuf>,
    /// Number of seeded two-stage adaptive adversaries erasing two qubits.
    #[arg(long)]
    pub adversaries: Option<usize>,
    /// Seed; adversary i uses stream i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

/// Reads an adversary file, falling back to a channel file.
pub fn load_adversary(path: &Path, n: usize) -> Result<ErasureAdversary> {
    let text = read_file(path)?;
    match ErasureAdversary::from_json(&text) {
        Ok(adv) => Ok(adv),
        Err(adv_err) => match QuantumChannel::from_json(&text) {
            Ok(ch) => Ok(ErasureAdversary::from_channel(n, &ch)?),
            Err(_) => Err(adv_err).with_context(|| format!("{} is neither an adversary nor a channel", path.display())),
        },
    }
}

/// Seeded adaptive adversaries, each on its own stream.
pub fn seeded_adversaries(n: usize, count: usize, seed: u64) -> Result<Vec<ErasureAdversary>> {
    (0..count)
        .map(|i| Ok(ErasureAdversary::random_adaptive(n, &mut stream_rng(seed, i as u64))?))
        .collect()
}

/// Harness reports in adversary order.
pub fn run_harness(code: &ComposedCode, adversaries: &[ErasureAdversary]) -> Result<Vec<HarnessReport>> {
    code.epsilon()?;
    adversaries
        .par_iter()
        .map(|adv| Ok(erasure_harness(code, adv)?))
        .collect()
}

/// Fidelity-against-bound and trace-preservation checks over a batch.
pub fn harness_checks(r: &mut Report, reports: &[HarnessReport]) {
    let margin = reports
        .iter()
        .map(|h| h.fidelity - h.bound)
        .fold(f64::INFINITY, f64::min);
    let weight = reports
        .iter()
        .map(|h| (h.weight - 1.0).abs())
        .fold(0.0, f64::max);
    if !reports.is_empty() {
        r.check(Check::at_least(
            "fidelity_bound",
            "min_i (F_i - (1 - 3 eps^(1/2) L_i^(3/4))) >= 0",
            margin,
            0.0,
            BOUND_TOLERANCE,
        ));
    }
    r.check(Check::at_most(
        "trace_preservation",
        "max_i |tr(output_i) - 1| <= 1e-9",
        weight,
        WEIGHT_TOLERANCE,
        0.0,
    ));
}

impl AqecSimulate {
    pub fn execute(&self) -> Result<Report> {
        let code = composed_code(self.pmd_n, self.pmd_lambda, self.outer.as_deref())?;
        let (adversaries, seed) = match (&self.adversary, self.adversaries) {
            (Some(path), _) => (vec![load_adversary(path, code.n())?], None),
            (None, count) => (seeded_adversaries(code.n(), count.unwrap_or(1), self.seed)?, Some(self.seed)),
        };
        if let Some(adv) = adversaries.iter().find(|a| a.n() != code.n()) {
            bail!("adversary acts on {} qubits, the code has {}", adv.n(), code.n());
        }
        let reports = run_harness(&code, &adversaries)?;
        let mut table = Table::new(&["adversary", "budget", "fidelity", "list_size", "bound", "weight", "branches", "pass"]);
        for (i, (h, adv)) in reports.iter().zip(&adversaries).enumerate() {
            table.push(vec![
                json!(i),
                json!(adv.budget()),
                json!(h.fidelity),
                json!(h.list_size),
                json!(h.bound),
                json!(h.weight),
                json!(h.branches),
                json!(h.pass),
            ]);
        }
        let mut r = Report::new("aqec simulate", seed, echo(self));
        harness_checks(&mut r, &reports);
        r.measure("n", code.n());
        r.measure("message_qubits", code.message_qubits());
        r.measure("epsilon", code.epsilon()?);
        r.measure(
            "min_fidelity",
            reports.iter().map(|h| h.fidelity).fold(f64::INFINITY, f64::min),
        );
        r.measure("max_list_size", reports.iter().map(|h| h.list_size).max().unwrap_or(0));
        r.table = Some(table);
        Ok(r)
    }
}
