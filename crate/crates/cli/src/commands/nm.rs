use super::auth::load_nm;
use super::{stream_rng, Common};
use crate::config::echo;
use crate::report::{Check, Report, CHECK_TOLERANCE};
use anyhow::{Context, Result};
use clap::Args;
use pmdkit_core::auth::{fit_tampering, nm_search, nm_verify, NmCode, TamperFunction};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct NmSearch {
    /// Message bits.
    #[arg(long)]
    pub k: usize,
    /// Codeword bits.
    #[arg(long)]
    pub n: usize,
    /// Random codes tried; the best verified one is kept.
    #[arg(long, default_value_t = 4)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the best code here.
    #[arg(long)]
    pub save: Option<PathBuf>,
    /// Fail when the best distance exceeds this.
    #[arg(long)]
    pub max_epsilon: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl NmSearch {
    pub fn execute(&self) -> Result<Report> {
        let found = nm_search(self.k, self.n, self.trials, &mut stream_rng(self.seed, 0))?;
        if let Some(path) = &self.save {
            std::fs::write(path, found.code.to_json()).with_context(|| format!("writing {}", path.display()))?;
        }
        let mut r = Report::new("nm search", Some(self.seed), echo(self));
        if let Some(max) = self.max_epsilon {
            r.check(Check::at_most("nm_epsilon", "eps_nm <= max-epsilon", found.report.epsilon, max, CHECK_TOLERANCE));
        }
        r.measure("epsilon", found.report.epsilon);
        r.measure("worst_tampering", &found.report.worst);
        r.measure("history", &found.history);
        r.measure("code", serde_json::from_str::<serde_json::Value>(&found.code.to_json())?);
        Ok(r)
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct NmVerify {
    /// Code file written by `nm search`.
    #[arg(long)]
    pub nm: PathBuf,
    /// Fail when the distance exceeds this.
    #[arg(long)]
    pub max_epsilon: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

/// Largest simulator distance over keep-all and every constant substitution
/// by a valid codeword; both must be simulated exactly.
pub fn trivial_tampering_distance(code: &NmCode) -> Result<f64> {
    let n = code.codeword_bits();
    let mut worst = fit_tampering(code, &TamperFunction::keep_all(n))?.distance;
    for s in 0..1u32 << code.message_bits() {
        for rnd in 0..code.randomness() {
            let w = code.encode(s, rnd)?;
            worst = worst.max(fit_tampering(code, &TamperFunction::constant(n, w))?.distance);
        }
    }
    Ok(worst)
}

impl NmVerify {
    pub fn execute(&self) -> Result<Report> {
        let code = load_nm(&self.nm)?;
        let report = nm_verify(&code)?;
        let trivial = trivial_tampering_distance(&code)?;
        let mut r = Report::new("nm verify", None, echo(self));
        r.check(Check::at_most(
            "trivial_tamperings",
            "simulator distance of keep-all and codeword substitutions <= 1e-9",
            trivial,
            CHECK_TOLERANCE,
            0.0,
        ));
        if let Some(max) = self.max_epsilon {
            r.check(Check::at_most("nm_epsilon", "eps_nm <= max-epsilon", report.epsilon, max, CHECK_TOLERANCE));
        }
        r.measure("message_bits", code.message_bits());
        r.measure("codeword_bits", code.codeword_bits());
        r.measure("verification", report);
        Ok(r)
    }
}
