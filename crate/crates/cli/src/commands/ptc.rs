use super::{Common, SweepArgs};
use crate::config::echo;
use crate::report::{Check, Report, CHECK_TOLERANCE};
use anyhow::Result;
use clap::Args;
use pmdkit_core::ptc::{
    detectability_bound, measure_pairwise_detectability, measure_strong_ptc_error, strong_error_bound, PtcFamily,
};
use serde::Serialize;

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PtcCheck {
    /// Block length.
    #[arg(long)]
    pub n: usize,
    /// Key length in bits.
    #[arg(long)]
    pub lambda: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl PtcCheck {
    pub fn execute(&self) -> Result<Report> {
        let fam = PtcFamily::new(self.n, self.lambda)?;
        let mode = self.sweep.mode();
        let strong = measure_strong_ptc_error(&fam, mode)?;
        let pairwise = measure_pairwise_detectability(&fam, mode)?;
        let mut r = Report::new("ptc check", self.sweep.seed, echo(self));
        r.check(Check::at_most(
            "strong_ptc_error",
            "max_{E != I} Pr_k[E undetected] <= n * 2^-lambda",
            strong.value,
            strong_error_bound(self.n, self.lambda),
            CHECK_TOLERANCE,
        ));
        r.check(Check::at_most(
            "pairwise_detectability",
            "max_{s != 0} Pr_k[S(Q_k) meets N(Q_{k+s}) \\ {I}] <= 2n * 2^-lambda",
            pairwise.value,
            detectability_bound(self.n, self.lambda),
            CHECK_TOLERANCE,
        ));
        r.measure("strong_ptc_error", strong);
        r.measure("pairwise_detectability", pairwise);
        Ok(r)
    }
}
