use super::{random_message, random_pauli, stream_rng, Common, SweepArgs};
use crate::config::echo;
use crate::report::{Check, Report};
use anyhow::Result;
use clap::{Args, ValueEnum};
use pmdkit_core::densesim::{operator_norm, DenseState};
use pmdkit_core::pmd::{measure_pmd_epsilon, pmd_bound, PmdCode, BOUND_TOLERANCE};
use pmdkit_core::ptc::{measure_pairwise_detectability, measure_strong_ptc_error, PtcFamily};
use pmdkit_core::symplectic::{PauliOperator, PivotRule};
use rayon::prelude::*;
use serde::Serialize;

/// Key-register phase errors must vanish on the code space up to this norm.
pub const KEY_PHASE_TOLERANCE: f64 = 1e-10;

/// Exact recovery tolerance of the authentication map on code states.
pub const RECOVERY_TOLERANCE: f64 = 1e-9;

/// Registers up to this many qubits get every nonidentity Pauli in the
/// disturbance check; larger ones get this many minus one seeded samples.
const EXHAUSTIVE_DISTURBANCE_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pivot {
    #[default]
    Lowest,
    Highest,
}

impl From<Pivot> for PivotRule {
    fn from(p: Pivot) -> Self {
        match p {
            Pivot::Lowest => PivotRule::Lowest,
            Pivot::Highest => PivotRule::Highest,
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PmdVerify {
    /// Block length of the underlying family.
    #[arg(long)]
    pub n: usize,
    /// Key length in bits.
    #[arg(long)]
    pub lambda: usize,
    /// Pivot choice of the encoder synthesis.
    #[arg(long, value_enum, default_value = "lowest")]
    pub pivot: Pivot,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

/// Largest `‖B† E B‖` over nonidentity Z errors on the key register alone.
pub fn key_phase_norm(pmd: &PmdCode) -> Result<f64> {
    let n = pmd.code_qubits();
    let mut worst: f64 = 0.0;
    for b in 1..1u64 << pmd.key_qubits() {
        let e = PauliOperator::from_masks(pmd.total_qubits(), 0, b << n);
        worst = worst.max(operator_norm(&pmd.logical_block(&e)?));
    }
    Ok(worst)
}

/// Distance between the authenticated encoding of `msg` and `msg ⊗ |0…0⟩ ⊗ |1⟩`.
pub fn auth_recovery_distance(pmd: &PmdCode, msg: &DenseState) -> Result<f64> {
    let total = pmd.total_qubits();
    let mut s = pmd.encode(msg)?.extend_zero(1)?;
    pmd.apply_auth(&mut s, 0, total)?;
    let mut want = msg.extend_zero(total - pmd.message_qubits() + 1)?;
    want.apply_pauli(&PauliOperator::from_masks(total + 1, 1 << total, 0))?;
    Ok(s.distance(&want))
}

/// How far the authentication map moves `E Enc|msg⟩ ⊗ |0⟩`.
pub fn auth_disturbance(pmd: &PmdCode, msg: &DenseState, e: &PauliOperator) -> Result<f64> {
    let mut phi = pmd.encode(msg)?;
    phi.apply_pauli(e)?;
    let before = phi.extend_zero(1)?;
    let mut after = before.clone();
    pmd.apply_auth(&mut after, 0, pmd.total_qubits())?;
    Ok(after.distance(&before))
}

impl PmdVerify {
    pub fn execute(&self) -> Result<Report> {
        let fam = PtcFamily::new(self.n, self.lambda)?;
        let mode = self.sweep.mode();
        let strong = measure_strong_ptc_error(&fam, mode)?;
        let pairwise = measure_pairwise_detectability(&fam, mode)?;
        let pmd = PmdCode::new(fam, self.pivot.into())?;
        let eps = measure_pmd_epsilon(&pmd, mode)?;
        let bound = pmd_bound(strong.value, pairwise.value, self.lambda);
        let phase = key_phase_norm(&pmd)?;

        let seed = self.sweep.seed.unwrap_or(0);
        let msg = random_message(pmd.message_qubits(), &mut stream_rng(seed, 0))?;
        let recovery = auth_recovery_distance(&pmd, &msg)?;
        let total = pmd.total_qubits();
        let errors: Vec<PauliOperator> = if total <= EXHAUSTIVE_DISTURBANCE_QUBITS {
            (1..1u64 << (2 * total))
                .map(|v| PauliOperator::from_masks(total, v & ((1 << total) - 1), v >> total))
                .collect()
        } else {
            let mut rng = stream_rng(seed, 1);
            (1..1u64 << (2 * EXHAUSTIVE_DISTURBANCE_QUBITS))
                .map(|_| random_pauli(total, &mut rng))
                .collect()
        };
        // Sampled ε is only a lower bound, so the tested errors' own block
        // norms join it in the disturbance bound.
        let (disturbance, tested_eps) = errors
            .par_iter()
            .map(|e| Ok((auth_disturbance(&pmd, &msg, e)?, operator_norm(&pmd.logical_block(e)?))))
            .collect::<Result<Vec<(f64, f64)>>>()?
            .into_iter()
            .fold((0.0, 0.0), |(d, n), (d2, n2)| (f64::max(d, d2), f64::max(n, n2)));

        let mut r = Report::new("pmd verify", self.sweep.seed, echo(self));
        r.check(Check::at_most(
            "pmd_epsilon_bound",
            "max_{E != I} ||P E P|| <= max(eps_ptc, sqrt(2^-lambda + delta))",
            eps.value,
            bound,
            BOUND_TOLERANCE,
        ));
        r.check(Check::at_most(
            "key_phase_norm",
            "max_{b != 0} ||P Z_key^b P|| <= 1e-10",
            phase,
            KEY_PHASE_TOLERANCE,
            0.0,
        ));
        r.check(Check::at_most(
            "auth_recovery",
            "|| Auth(Enc|m>|0>) - |m>|0..0>|1> || <= 1e-9",
            recovery,
            RECOVERY_TOLERANCE,
            0.0,
        ));
        r.check(Check::at_most(
            "auth_disturbance",
            "max_{E != I} || Auth(E Enc|m>|0>) - E Enc|m>|0> || <= sqrt(2) * eps",
            disturbance,
            2f64.sqrt() * eps.value.max(tested_eps),
            RECOVERY_TOLERANCE,
        ));
        r.measure("ptc_epsilon", strong);
        r.measure("ptc_delta", pairwise);
        r.measure("pmd_epsilon", eps);
        r.measure("bound", bound);
        r.measure("key_phase_norm", phase);
        r.measure("auth_recovery_distance", recovery);
        r.measure("auth_disturbance_max", disturbance);
        r.measure("disturbance_errors", errors.len());
        r.measure("disturbance_exhaustive", total <= EXHAUSTIVE_DISTURBANCE_QUBITS);
        Ok(r)
    }
}
