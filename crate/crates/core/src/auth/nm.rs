use crate::error::{parse_err, Error, Result};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

/// Largest message length accepted by the verifier.
pub const MAX_NM_MESSAGE_BITS: usize = 3;

/// Largest codeword length accepted by the verifier.
pub const MAX_NM_CODEWORD_BITS: usize = 8;

/// Randomized classical code with an explicit reject symbol.
///
/// Codewords are integers whose bit `i` is codeword bit `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NmCode {
    k: usize,
    n: usize,
    encode: Vec<Vec<u32>>,
    decode: Vec<Option<u32>>,
}

#[derive(Serialize, Deserialize)]
struct NmFile {
    message_bits: usize,
    codeword_bits: usize,
    /// `encode[s][r]` as a bit string, character `i` = bit `i`.
    encode: Vec<Vec<String>>,
    /// Accepted codewords; every other word decodes to reject.
    decode: Vec<DecodeEntry>,
}

#[derive(Serialize, Deserialize)]
struct DecodeEntry {
    codeword: String,
    message: u32,
}

fn word_to_string(w: u32, n: usize) -> String {
    (0..n).map(|i| if w >> i & 1 == 1 { '1' } else { '0' }).collect()
}

fn word_from_str(s: &str, n: usize) -> Result<u32> {
    if s.len() != n {
        return Err(parse_err(1, format!("codeword `{s}` should have {n} bits")));
    }
    s.chars().enumerate().try_fold(0u32, |acc, (i, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << i),
        _ => Err(parse_err(1, format!("bad bit `{ch}` in codeword `{s}`"))),
    })
}

impl NmCode {
    /// `encode[s][r]` is the codeword of message `s` under randomness `r`;
    /// `decode[w]` is the message of word `w` or `None` for reject.
    pub fn new(k: usize, n: usize, encode: Vec<Vec<u32>>, decode: Vec<Option<u32>>) -> Result<Self> {
        if k == 0 || n > 20 || k > n {
            return Err(Error::Invalid(format!("code with {k} message and {n} codeword bits")));
        }
        if encode.len() != 1 << k {
            return Err(Error::Invalid(format!("encode table has {} rows, expected {}", encode.len(), 1 << k)));
        }
        let r = encode[0].len();
        if r == 0 || encode.iter().any(|row| row.len() != r) {
            return Err(Error::Invalid("every message needs the same nonzero number of codewords".into()));
        }
        if decode.len() != 1 << n {
            return Err(Error::Invalid(format!("decode table has {} entries, expected {}", decode.len(), 1 << n)));
        }
        if decode.iter().flatten().any(|&m| m >= 1 << k) {
            return Err(Error::Invalid("decode table names a message out of range".into()));
        }
        for (s, row) in encode.iter().enumerate() {
            for &w in row {
                if w >= 1 << n {
                    return Err(Error::Invalid(format!("codeword {w} has more than {n} bits")));
                }
                if decode[w as usize] != Some(s as u32) {
                    return Err(Error::Invalid(format!(
                        "codeword {} of message {s} does not decode back",
                        word_to_string(w, n)
                    )));
                }
            }
        }
        Ok(NmCode { k, n, encode, decode })
    }

    pub fn message_bits(&self) -> usize {
        self.k
    }

    pub fn codeword_bits(&self) -> usize {
        self.n
    }

    /// Number of equally likely randomness values per message.
    pub fn randomness(&self) -> usize {
        self.encode[0].len()
    }

    pub fn encode(&self, s: u32, r: usize) -> Result<u32> {
        self.encode
            .get(s as usize)
            .and_then(|row| row.get(r))
            .copied()
            .ok_or_else(|| Error::Invalid(format!("no codeword for message {s}, randomness {r}")))
    }

    pub fn decode(&self, w: u32) -> Option<u32> {
        self.decode.get(w as usize).copied().flatten()
    }

    pub fn encode_random<R: Rng + ?Sized>(&self, s: u32, rng: &mut R) -> Result<u32> {
        self.encode(s, rng.random_range(0..self.randomness()))
    }

    /// Exact decode distribution after tampering: row `s` holds the counts
    /// over randomness of each outcome, messages first and reject last.
    pub fn tampered_counts(&self, f: &TamperFunction) -> Result<Vec<Vec<u32>>> {
        if f.len() != self.n {
            return Err(Error::SizeMismatch(f.len(), self.n));
        }
        let reject = 1usize << self.k;
        Ok(self
            .encode
            .iter()
            .map(|row| {
                let mut counts = vec![0u32; reject + 1];
                for &w in row {
                    match self.decode(f.apply(w)) {
                        Some(m) => counts[m as usize] += 1,
                        None => counts[reject] += 1,
                    }
                }
                counts
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        let file = NmFile {
            message_bits: self.k,
            codeword_bits: self.n,
            encode: self
                .encode
                .iter()
                .map(|row| row.iter().map(|&w| word_to_string(w, self.n)).collect())
                .collect(),
            decode: self
                .decode
                .iter()
                .enumerate()
                .filter_map(|(w, m)| {
                    m.map(|message| DecodeEntry {
                        codeword: word_to_string(w as u32, self.n),
                        message,
                    })
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NmFile = serde_json::from_str(text)?;
        let n = file.codeword_bits;
        if n > 20 {
            return Err(Error::Invalid(format!("{n} codeword bits")));
        }
        let encode = file
            .encode
            .iter()
            .map(|row| row.iter().map(|w| word_from_str(w, n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut decode = vec![None; 1 << n];
        for e in &file.decode {
            let w = word_from_str(&e.codeword, n)? as usize;
            if decode[w].replace(e.message).is_some() {
                return Err(parse_err(1, format!("codeword {} listed twice", e.codeword)));
            }
        }
        NmCode::new(file.message_bits, n, encode, decode)
    }
}

/// Action of a bit-wise tampering function on one bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BitTamper {
    Set0,
    Set1,
    Keep,
    Flip,
}

impl BitTamper {
    const ALL: [BitTamper; 4] = [BitTamper::Keep, BitTamper::Flip, BitTamper::Set0, BitTamper::Set1];

    fn symbol(self) -> char {
        match self {
            BitTamper::Set0 => '0',
            BitTamper::Set1 => '1',
            BitTamper::Keep => 'k',
            BitTamper::Flip => 'f',
        }
    }
}

/// Deterministic bit-wise tampering function, one action per codeword bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TamperFunction {
    bits: Vec<BitTamper>,
}

impl TamperFunction {
    pub fn new(bits: Vec<BitTamper>) -> Self {
        TamperFunction { bits }
    }

    pub fn keep_all(n: usize) -> Self {
        TamperFunction::new(vec![BitTamper::Keep; n])
    }

    /// Overwrites every bit with the bits of `w`.
    pub fn constant(n: usize, w: u32) -> Self {
        TamperFunction::new(
            (0..n)
                .map(|i| if w >> i & 1 == 1 { BitTamper::Set1 } else { BitTamper::Set0 })
                .collect(),
        )
    }

    /// The `index`-th of the `4^n` functions, in base-4 digit order.
    pub fn nth(n: usize, mut index: u64) -> Self {
        let bits = (0..n)
            .map(|_| {
                let b = BitTamper::ALL[(index % 4) as usize];
                index /= 4;
                b
            })
            .collect();
        TamperFunction::new(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[BitTamper] {
        &self.bits
    }

    pub fn apply(&self, w: u32) -> u32 {
        self.bits.iter().enumerate().fold(0u32, |acc, (i, t)| {
            let bit = w >> i & 1;
            let out = match t {
                BitTamper::Set0 => 0,
                BitTamper::Set1 => 1,
                BitTamper::Keep => bit,
                BitTamper::Flip => bit ^ 1,
            };
            acc | out << i
        })
    }
}

impl fmt::Display for TamperFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bits.iter().try_for_each(|b| write!(f, "{}", b.symbol()))
    }
}

impl FromStr for TamperFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(BitTamper::Set0),
                '1' => Ok(BitTamper::Set1),
                'k' | 'K' => Ok(BitTamper::Keep),
                'f' | 'F' => Ok(BitTamper::Flip),
                _ => Err(parse_err(1, format!("bad tamper symbol `{ch}` (use 0, 1, k, f)"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(TamperFunction::new)
    }
}

impl Serialize for TamperFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TamperFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Best simulator for one tampering function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulatorFit {
    /// `max_s` total variation between the tampered decode and the simulator.
    pub distance: f64,
    /// Probabilities over messages, then reject, then "same message".
    pub simulator: Vec<f64>,
}

impl SimulatorFit {
    pub fn same(&self) -> f64 {
        self.simulator[self.simulator.len() - 1]
    }

    pub fn reject(&self) -> f64 {
        self.simulator[self.simulator.len() - 2]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NmReport {
    pub epsilon: f64,
    pub worst: TamperFunction,
    /// Tampering functions enumerated.
    pub tamperings: u64,
    /// Distinct tampered-decode tables, one linear program each.
    pub programs: usize,
}

fn check_guards(code: &NmCode) -> Result<()> {
    if code.k > MAX_NM_MESSAGE_BITS || code.n > MAX_NM_CODEWORD_BITS {
        return Err(Error::SizeGuard(format!(
            "verifier handles at most {MAX_NM_MESSAGE_BITS} message and {MAX_NM_CODEWORD_BITS} codeword bits, got {} and {}",
            code.k, code.n
        )));
    }
    Ok(())
}

/// Solves `min_q max_s TV(D_s, p_{q,s})` for the tampered decode table
/// `counts`, where `p_{q,s}` moves the "same" mass of `q` onto `s`.
fn fit_simulator(counts: &[Vec<u32>], randomness: usize) -> Result<SimulatorFit> {
    let messages = counts.len();
    let outcomes = messages + 1;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, 1.0));
    let q: Vec<_> = (0..outcomes + 1).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    lp.add_constraint(q.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    let same = q[outcomes];
    for (s, row) in counts.iter().enumerate() {
        let mut tv = vec![(t, -1.0)];
        for (x, &cnt) in row.iter().enumerate() {
            let target = cnt as f64 / randomness as f64;
            // u ≥ |target - q_x - [x = s]·q_same|
            let u = lp.add_var(0.0, (0.0, 2.0));
            let mut expr = vec![(u, 1.0), (q[x], 1.0)];
            if x == s {
                expr.push((same, 1.0));
            }
            lp.add_constraint(expr.clone(), ComparisonOp::Ge, target);
            for e in expr.iter_mut().skip(1) {
                e.1 = -1.0;
            }
            lp.add_constraint(expr, ComparisonOp::Ge, -target);
            tv.push((u, 0.5));
        }
        lp.add_constraint(tv, ComparisonOp::Le, 0.0);
    }
    let outcome = lp.solve().map_err(|e| Error::Invariant(format!("simulator program failed: {e}")))?;
    let sol = outcome
        .solution()
        .ok_or_else(|| Error::Invariant("simulator program returned no solution".into()))?;
    Ok(SimulatorFit {
        distance: sol.objective().max(0.0),
        simulator: q.iter().map(|&v| sol.var_value(v).max(0.0)).collect(),
    })
}

/// Best simulator and distance for a single tampering function.
pub fn fit_tampering(code: &NmCode, f: &TamperFunction) -> Result<SimulatorFit> {
    check_guards(code)?;
    fit_simulator(&code.tampered_counts(f)?, code.randomness())
}

/// Worst distance over all `4^n` deterministic bit-wise tamperings.
pub fn nm_verify(code: &NmCode) -> Result<NmReport> {
    check_guards(code)?;
    let total = 1u64 << (2 * code.n);
    let mut fits: HashMap<Vec<Vec<u32>>, f64> = HashMap::new();
    let mut worst = (f64::NEG_INFINITY, TamperFunction::keep_all(code.n));
    for idx in 0..total {
        let f = TamperFunction::nth(code.n, idx);
        let counts = code.tampered_counts(&f)?;
        let d = match fits.get(&counts) {
            Some(&d) => d,
            None => {
                let d = fit_simulator(&counts, code.randomness())?.distance;
                fits.insert(counts, d);
                d
            }
        };
        if d > worst.0 {
            worst = (d, f);
        }
    }
    Ok(NmReport {
        epsilon: worst.0,
        worst: worst.1,
        tamperings: total,
        programs: fits.len(),
    })
}

#[derive(Clone, Debug)]
pub struct NmSearchResult {
    pub code: NmCode,
    pub report: NmReport,
    /// Best ε after each trial.
    pub history: Vec<f64>,
}

/// Random codes with `2^{⌊(n-k)/2⌋}` codewords per message drawn without
/// replacement; every unused word rejects. Keeps the first code reaching the
/// smallest verified ε.
pub fn nm_search<R: Rng + ?Sized>(k: usize, n: usize, trials: usize, rng: &mut R) -> Result<NmSearchResult> {
    if k == 0 || k > MAX_NM_MESSAGE_BITS || n > MAX_NM_CODEWORD_BITS || n < k {
        return Err(Error::SizeGuard(format!(
            "search needs 1 ≤ k ≤ {MAX_NM_MESSAGE_BITS} and k ≤ n ≤ {MAX_NM_CODEWORD_BITS}, got k = {k}, n = {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::Invalid("at least one trial is needed".into()));
    }
    let per_message = 1usize << ((n - k) / 2);
    let mut best: Option<(NmCode, NmReport)> = None;
    let mut history = Vec::with_capacity(trials);
    for _ in 0..trials {
        let words = sample(rng, 1 << n, per_message << k).into_vec();
        let mut decode = vec![None; 1 << n];
        let encode: Vec<Vec<u32>> = words
            .chunks(per_message)
            .enumerate()
            .map(|(s, chunk)| {
                chunk
                    .iter()
                    .map(|&w| {
                        decode[w] = Some(s as u32);
                        w as u32
                    })
                    .collect()
            })
            .collect();
        let code = NmCode::new(k, n, encode, decode)?;
        let report = nm_verify(&code)?;
        if best.as_ref().is_none_or(|(_, b)| report.epsilon < b.epsilon) {
            best = Some((code, report));
        }
        history.push(best.as_ref().map(|(_, b)| b.epsilon).expect("set above"));
    }
    let (code, report) = best.expect("at least one trial");
    Ok(NmSearchResult { code, report, history })
}
