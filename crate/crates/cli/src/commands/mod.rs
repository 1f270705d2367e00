//! Subcommand arguments and their handlers.

pub mod aqec;
pub mod auth;
pub mod nm;
pub mod pmd;
pub mod ptc;
pub mod qlde;
pub mod sweep;

use crate::report::Format;
use anyhow::{bail, Context, Result};
use clap::Args;
use pmdkit_core::aqec::{compose, ComposedCode};
use pmdkit_core::densesim::{c, DenseState};
use pmdkit_core::pmd::build_pmd;
use pmdkit_core::ptc::{PtcFamily, SweepMode};
use pmdkit_core::symplectic::{PauliOperator, StabilizerCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Output options shared by every subcommand; not part of the config echo.
#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// Report format.
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Flat `key = value` file of long flag names; flags on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the effective parameters of this run as a config file.
    #[arg(long)]
    pub save_config: Option<PathBuf>,
}

/// Exhaustive sweeps by default; `--samples` switches to seeded sampling.
#[derive(Args, Clone, Debug, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    /// Refuse to fall back to sampling above the exhaustive budget.
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    /// Number of seeded samples instead of an exhaustive sweep.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Seed for sampling and random test states.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SweepArgs {
    pub fn mode(&self) -> SweepMode {
        match (self.exhaustive, self.samples) {
            (_, Some(samples)) => SweepMode::Sampled {
                samples,
                seed: self.seed.unwrap_or(0),
            },
            (true, None) => SweepMode::Exhaustive,
            (false, None) => SweepMode::Auto,
        }
    }
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_code(path: &Path) -> Result<StabilizerCode> {
    StabilizerCode::parse(&read_file(path)?).with_context(|| format!("in code file {}", path.display()))
}

/// Outer code used when none is given: `[[m+2, m, 2]]` from all-X and all-Z
/// checks when `m` is even, otherwise `[[m+1, m]]` with a single all-Z check.
pub fn default_outer(m: usize) -> Result<StabilizerCode> {
    if m.is_multiple_of(2) {
        let n = m + 2;
        StabilizerCode::from_strings(&[&"X".repeat(n), &"Z".repeat(n)]).map_err(Into::into)
    } else {
        StabilizerCode::from_strings(&[&"Z".repeat(m + 1)]).map_err(Into::into)
    }
}

/// PMD code of the given family inside the outer code at `outer` or the default.
pub fn composed_code(pmd_n: usize, pmd_lambda: usize, outer: Option<&Path>) -> Result<ComposedCode> {
    let pmd = build_pmd(PtcFamily::new(pmd_n, pmd_lambda)?)?;
    let outer = match outer {
        Some(path) => load_code(path)?,
        None => default_outer(pmd.total_qubits())?,
    };
    if outer.k() != pmd.total_qubits() {
        bail!(
            "outer code encodes {} qubits but PMD({pmd_n}, {pmd_lambda}) has {}",
            outer.k(),
            pmd.total_qubits()
        );
    }
    Ok(compose(pmd, outer)?)
}

/// Haar-like random message from normal amplitudes.
pub fn random_message<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<DenseState> {
    let amps = (0..1usize << k)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let mut s = DenseState::from_amplitudes(k, amps)?;
    s.normalize();
    Ok(s)
}

/// Uniformly random nonidentity Pauli on `n` qubits.
pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliOperator {
    let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    loop {
        let x = rng.random::<u64>() & mask;
        let z = rng.random::<u64>() & mask;
        if x != 0 || z != 0 {
            return PauliOperator::from_masks(n, x, z);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_outer_matches_register() {
        for m in 1..8 {
            assert_eq!(default_outer(m).unwrap().k(), m);
        }
        assert_eq!(default_outer(6).unwrap().n(), 8);
    }

    #[test]
    fn streams_are_independent_and_replayable() {
        let a: u64 = stream_rng(5, 0).random();
        let b: u64 = stream_rng(5, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, stream_rng(5, 0).random::<u64>());
    }

    #[test]
    fn sampling_flag_selects_mode() {
        let mut s = SweepArgs::default();
        assert_eq!(s.mode(), SweepMode::Auto);
        s.samples = Some(10);
        assert_eq!(s.mode(), SweepMode::Sampled { samples: 10, seed: 0 });
    }
}
