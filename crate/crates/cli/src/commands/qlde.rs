use super::{load_code, stream_rng, Common};
use crate::config::echo;
use crate::report::{Check, Report};
use anyhow::{bail, Context, Result};
use clap::Args;
use pmdkit_core::bits::BitVec;
use pmdkit_core::qlde::{
    classical_list_size_profile, erasure_list_decode, list_size_profile, sample_random_css, ErasurePattern,
};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct QldeDecode {
    /// Stabilizer code file: `n=<int> k=<int>`, then one generator per line.
    #[arg(long)]
    pub code: PathBuf,
    /// Comma-separated erased qubits.
    #[arg(long)]
    pub erased: String,
    /// Syndrome bits, one per generator, e.g. `01`.
    #[arg(long)]
    pub syndrome: String,
    /// Fail when the list is longer than this.
    #[arg(long)]
    pub max_list: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl QldeDecode {
    pub fn execute(&self) -> Result<Report> {
        let code = load_code(&self.code)?;
        let erased = ErasurePattern::parse(code.n(), &self.erased)?;
        let s = BitVec::parse(self.syndrome.trim())
            .with_context(|| format!("syndrome `{}` is not a bit string", self.syndrome))?;
        if s.len() != code.r() {
            bail!("syndrome has {} bits but the code has {} generators", s.len(), code.r());
        }
        let list = erasure_list_decode(&code, &erased, &s)?;
        let mut wrong_syndrome = 0usize;
        let mut outside = 0usize;
        for e in list.entries() {
            if code.syndrome(e)? != s {
                wrong_syndrome += 1;
            }
            if e.support().iter().any(|q| !erased.erased().contains(q)) {
                outside += 1;
            }
        }
        let mut r = Report::new("qlde decode", None, echo(self));
        r.listing = list.entries().iter().map(|e| e.to_string()).collect();
        r.check(Check::at_most(
            "entries_with_wrong_syndrome",
            "#{E in list : syndrome(E) != s} <= 0",
            wrong_syndrome as f64,
            0.0,
            0.0,
        ));
        r.check(Check::at_most(
            "entries_outside_erased_set",
            "#{E in list : supp(E) not within erased set} <= 0",
            outside as f64,
            0.0,
            0.0,
        ));
        if let Some(max) = self.max_list {
            r.check(Check::at_most("list_size", "|list| <= max-list", list.len() as f64, max as f64, 0.0));
        }
        r.measure("list_size", list.len());
        r.measure("erased", erased.erased());
        Ok(r)
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct QldeProfile {
    /// Stabilizer code file.
    #[arg(long)]
    pub code: PathBuf,
    /// Erased fraction; every erased set of size up to floor(delta * n) is tried.
    #[arg(long)]
    pub delta: f64,
    /// Fail when the largest list is longer than this.
    #[arg(long)]
    pub max_list: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl QldeProfile {
    pub fn execute(&self) -> Result<Report> {
        let code = load_code(&self.code)?;
        let profile = list_size_profile(&code, self.delta)?;
        let mut r = Report::new("qlde profile", None, echo(self));
        if let Some(max) = self.max_list {
            r.check(Check::at_most(
                "max_list",
                "max_{|T| <= delta n} |N_T / S_T| <= max-list",
                profile.max_list as f64,
                max as f64,
                0.0,
            ));
        }
        r.measure("n", code.n());
        r.measure("k", code.k());
        r.measure("profile", profile);
        Ok(r)
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct QldeSampleCss {
    /// Block length.
    #[arg(long)]
    pub n: usize,
    /// Encoded qubits; n + k must be even.
    #[arg(long)]
    pub k: usize,
    /// Seed of the sampler.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Erased fraction for the list profiles.
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// Write the sampled code here.
    #[arg(long)]
    pub save: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

impl QldeSampleCss {
    pub fn execute(&self) -> Result<Report> {
        let sampled = sample_random_css(self.n, self.k, &mut stream_rng(self.seed, 0))?;
        let quantum = list_size_profile(&sampled.code, self.delta)?;
        let first = classical_list_size_profile(&sampled.h1, self.n, self.delta)?;
        let second = classical_list_size_profile(&sampled.h2, self.n, self.delta)?;
        let classical = first.max_list.max(second.max_list);
        if let Some(path) = &self.save {
            std::fs::write(path, sampled.code.to_text()).with_context(|| format!("writing {}", path.display()))?;
        }
        let mut r = Report::new("qlde sample-css", Some(self.seed), echo(self));
        r.check(Check::at_most(
            "css_list_lifting",
            "quantum list profile <= (classical list profile)^2",
            quantum.max_list as f64,
            (classical * classical) as f64,
            0.0,
        ));
        r.measure("code", sampled.code.to_text());
        r.measure("k", sampled.code.k());
        r.measure("draws", sampled.draws);
        r.measure("first_draw_independent", sampled.first_draw_independent);
        r.measure("quantum_profile", quantum);
        r.measure("classical_profile_first", first);
        r.measure("classical_profile_second", second);
        Ok(r)
    }
}
