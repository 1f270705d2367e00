use super::{composed_code, random_message, read_file, stream_rng, Common};
use crate::config::echo;
use crate::report::{Check, Report, CHECK_TOLERANCE};
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use pmdkit_core::auth::{NmCode, QubitwiseAttack, Rate1Protocol, TamperFunction, ThirdProtocol};
use pmdkit_core::densesim::QuantumChannel;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Composed code, per-qubit Pauli pad, one key codeword per qubit.
    #[default]
    Third,
    /// Outer code over PMD blocks, pad from a pairwise independent seed.
    Rate1,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AuthSimulate {
    #[arg(long, value_enum, default_value = "third")]
    pub protocol: Protocol,
    /// Non-malleable code file carrying two-bit key chunks.
    #[arg(long)]
    pub nm: PathBuf,
    /// Attack file, or a single-qubit channel file applied to every quantum wire.
    #[arg(long, conflicts_with = "random_attack")]
    pub attack: Option<PathBuf>,
    /// Seeded random attack with this many Kraus operators per wire.
    #[arg(long)]
    pub random_attack: Option<usize>,
    /// Block length of the PMD family (rate-1/3 protocol).
    #[arg(long, default_value_t = 4)]
    pub pmd_n: usize,
    /// Key length of the PMD family (rate-1/3 protocol).
    #[arg(long, default_value_t = 2)]
    pub pmd_lambda: usize,
    /// Outer code file (rate-1/3 protocol).
    #[arg(long)]
    pub outer: Option<PathBuf>,
    /// Seed for the message, the key and random attacks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

pub fn load_nm(path: &Path) -> Result<NmCode> {
    NmCode::from_json(&read_file(path)?).with_context(|| format!("in code file {}", path.display()))
}

/// Attack file, or a channel broadcast to every wire with the key left alone.
pub fn load_attack(path: &Path, qubits: usize, chunks: usize, codeword_bits: usize) -> Result<QubitwiseAttack> {
    let text = read_file(path)?;
    let attack = match QubitwiseAttack::from_json(&text) {
        Ok(a) => a,
        Err(attack_err) => match QuantumChannel::from_json(&text) {
            Ok(ch) => QubitwiseAttack::new(vec![ch; qubits], vec![TamperFunction::keep_all(codeword_bits); chunks])?,
            Err(_) => {
                return Err(attack_err).with_context(|| format!("{} is neither an attack nor a channel", path.display()))
            }
        },
    };
    if attack.channels.len() != qubits || attack.tampers.len() != chunks {
        bail!(
            "attack has {} channels and {} tamperings; the protocol needs {qubits} and {chunks}",
            attack.channels.len(),
            attack.tampers.len()
        );
    }
    Ok(attack)
}

impl AuthSimulate {
    fn attack(&self, qubits: usize, chunks: usize, codeword_bits: usize) -> Result<QubitwiseAttack> {
        if let Some(path) = &self.attack {
            return load_attack(path, qubits, chunks, codeword_bits);
        }
        match self.random_attack {
            Some(kraus) => {
                let mut a = QubitwiseAttack::random(qubits, codeword_bits, kraus, &mut stream_rng(self.seed, 1))?;
                a.tampers.truncate(chunks);
                Ok(a)
            }
            None => Ok(QubitwiseAttack::identity(qubits, chunks, codeword_bits)),
        }
    }

    pub fn execute(&self) -> Result<Report> {
        let nm = load_nm(&self.nm)?;
        let bits = nm.codeword_bits();
        let mut r = Report::new("auth simulate", Some(self.seed), echo(self));
        match self.protocol {
            Protocol::Third => {
                let code = composed_code(self.pmd_n, self.pmd_lambda, self.outer.as_deref())?;
                let proto = ThirdProtocol::new(code, nm)?;
                let n = proto.quantum_qubits();
                let msg = random_message(proto.code().message_qubits(), &mut stream_rng(self.seed, 0))?;
                let enc = proto.encode_sample(&msg, &mut stream_rng(self.seed, 2))?;
                let dec = proto.decode(&enc.classical, &enc.quantum)?;
                let distance = dec.state.as_ref().map_or(1.0, |s| s.distance(&msg));
                completeness_checks(&mut r, dec.p_accept, distance);
                let report = proto.attack(&self.attack(n, n, bits)?)?;
                r.check(Check::at_most(
                    "probability_total",
                    "|p_accept + p_reject - 1| <= 1e-9",
                    (report.p_accept + report.p_reject - 1.0).abs(),
                    CHECK_TOLERANCE,
                    0.0,
                ));
                r.check(Check::at_most(
                    "recovered_branch",
                    "wrong accept of the key-recovered branch <= eps_pmd^2",
                    report.recovered_wrong_accept,
                    report.recovered_bound,
                    CHECK_TOLERANCE,
                ));
                r.check(Check::at_most(
                    "decomposition_bound",
                    "p_accept_wrong <= eps_nm + eps_pmd^2 + uncorrelated wrong accept",
                    report.p_accept_wrong,
                    report.bound,
                    CHECK_TOLERANCE,
                ));
                r.measure("quantum_qubits", n);
                r.measure("classical_bits", proto.classical_bits());
                r.measure("attack", report);
            }
            Protocol::Rate1 => {
                let proto = Rate1Protocol::toy(nm)?;
                let msg = random_message(proto.message_qubits(), &mut stream_rng(self.seed, 0))?;
                let enc = proto.encode_sample(&msg, &mut stream_rng(self.seed, 2))?;
                let dec = proto.decode(&enc.classical, &enc.quantum)?;
                let mut out = dec.accepted.clone();
                out.normalize();
                completeness_checks(&mut r, dec.p_accept, out.distance(&msg));
                let report = proto.attack(&self.attack(proto.quantum_qubits(), proto.chunks(), bits)?)?;
                r.check(Check::at_most(
                    "probability_total",
                    "|p_accept + p_reject - 1| <= 1e-9",
                    (report.p_accept + report.p_reject - 1.0).abs(),
                    CHECK_TOLERANCE,
                    0.0,
                ));
                r.measure("quantum_qubits", proto.quantum_qubits());
                r.measure("classical_bits", proto.classical_bits());
                r.measure("attack", report);
            }
        }
        Ok(r)
    }
}

fn completeness_checks(r: &mut Report, p_accept: f64, distance: f64) {
    r.check(Check::at_least(
        "completeness_accept",
        "Pr[accept | no tampering] >= 1 - 1e-9",
        p_accept,
        1.0 - CHECK_TOLERANCE,
        0.0,
    ));
    r.check(Check::at_most(
        "completeness_state",
        "|| Dec(Enc(psi)) - psi || <= 1e-9",
        distance,
        CHECK_TOLERANCE,
        0.0,
    ));
}
