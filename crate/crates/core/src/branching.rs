//! Branch bookkeeping over repeated measurements.
//!
//! Every run splits each existing universe into a plus branch and a minus
//! branch. In [`Mode::Naive`] each branch counts once. In [`Mode::Weighted`]
//! the plus branch carries multiplicity `f = 2q` and the minus branch
//! `g = 2(1 − q)`, so after `N` runs the histories with `p` pluses number
//!
//! ```text
//! N(p) = C(N, p) · f^p · g^(N−p)
//! ```
//!
//! When `q` is supplied as a rational the multiplicities are kept exact.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{binomial_row, ln_binomial_row, CompensatedSum};
use crate::spin::{branch_weights, clamp_weight, SpinError};

/// Largest `N` for which [`enumerate_tree`] walks all `2^N` histories.
pub const MAX_ENUMERATION_RUNS: u32 = 24;

/// Histories drawn from one random stream in [`sample_histories`].
pub const SAMPLE_CHUNK: usize = 4096;

/// Above this `N` float tallies are normalized in log space.
const MAX_DIRECT_SCALE_RUNS: u32 = 1000;

/// Relative margin below which two float counts are considered tied.
const FLOAT_TIE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchError {
    #[error("number of runs must be at least 1")]
    NoRuns,
    #[error(transparent)]
    Weight(#[from] SpinError),
    #[error("exact weight {0} lies outside [0, 1]")]
    ExactWeightOutOfRange(BigRational),
    #[error("multiplicity must be finite and nonnegative, got {0}")]
    Multiplicity(f64),
    #[error("explicit enumeration is limited to {max} runs, got {runs}")]
    Capacity { runs: u32, max: u32 },
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("sample count must be at least 1")]
    NoSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every branch counts as one universe.
    Naive,
    /// Branches carry multiplicities `2q` and `2(1 − q)`.
    Weighted,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Naive => "naive",
            Mode::Weighted => "weighted",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Mode::Naive),
            "weighted" => Ok(Mode::Weighted),
            other => Err(format!("unknown mode {other:?}, expected naive or weighted")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchConfig {
    runs: u32,
    q: f64,
    mode: Mode,
    q_exact: Option<BigRational>,
}

impl BranchConfig {
    pub fn new(runs: u32, q: f64, mode: Mode) -> Result<Self, BranchError> {
        if runs == 0 {
            return Err(BranchError::NoRuns);
        }
        Ok(Self {
            runs,
            q: clamp_weight(q)?,
            mode,
            q_exact: None,
        })
    }

    /// Config whose Born weight is the exact rational `q`; counts are then exact.
    pub fn with_exact_q(runs: u32, q: BigRational, mode: Mode) -> Result<Self, BranchError> {
        if runs == 0 {
            return Err(BranchError::NoRuns);
        }
        if q.is_negative() || q > BigRational::one() {
            return Err(BranchError::ExactWeightOutOfRange(q));
        }
        let q_float = q.to_f64().unwrap_or(f64::NAN);
        Ok(Self {
            runs,
            q: clamp_weight(q_float)?,
            mode,
            q_exact: Some(q),
        })
    }

    /// Naive counting; `q` is only a label and defaults to 1/2.
    pub fn naive(runs: u32) -> Result<Self, BranchError> {
        Self::with_exact_q(runs, BigRational::new(1.into(), 2.into()), Mode::Naive)
    }

    pub fn weighted(runs: u32, q: f64) -> Result<Self, BranchError> {
        Self::new(runs, q, Mode::Weighted)
    }

    pub fn runs(&self) -> u32 {
        self.runs
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q_exact(&self) -> Option<&BigRational> {
        self.q_exact.as_ref()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn step_weights(&self) -> StepWeights {
        match (self.mode, &self.q_exact) {
            (Mode::Naive, _) => StepWeights::Exact {
                plus: BigUint::one(),
                minus: BigUint::one(),
                denom: BigUint::one(),
            },
            (Mode::Weighted, Some(q)) => {
                // q = n/d in lowest terms, so f = 2n/d and g = 2(d − n)/d
                let n = q.numer().to_biguint().expect("q checked nonnegative");
                let d = q.denom().to_biguint().expect("denominator is positive");
                StepWeights::Exact {
                    plus: &n * 2u32,
                    minus: (&d - &n) * 2u32,
                    denom: d,
                }
            }
            (Mode::Weighted, None) => {
                let w = branch_weights(self.q).expect("q validated on construction");
                StepWeights::Float {
                    plus: w.f(),
                    minus: w.g(),
                }
            }
        }
    }
}

/// Per-step multiplicities. Exact weights share a denominator so that path
/// products stay integral until the end.
enum StepWeights {
    Exact {
        plus: BigUint,
        minus: BigUint,
        denom: BigUint,
    },
    Float {
        plus: f64,
        minus: f64,
    },
}

/// Plus and minus multiplicities produced when one universe of weight
/// `multiplicity` undergoes a measurement with Born weight `q`.
pub fn branch_once(multiplicity: f64, q: f64) -> Result<(f64, f64), BranchError> {
    if !(multiplicity.is_finite() && multiplicity >= 0.0) {
        return Err(BranchError::Multiplicity(multiplicity));
    }
    let w = branch_weights(q)?;
    Ok((multiplicity * w.f(), multiplicity * w.g()))
}

pub fn branch_once_exact(
    multiplicity: &BigRational,
    q: &BigRational,
) -> Result<(BigRational, BigRational), BranchError> {
    if multiplicity.is_negative() {
        return Err(BranchError::Multiplicity(multiplicity.to_f64().unwrap_or(f64::NAN)));
    }
    if q.is_negative() || *q > BigRational::one() {
        return Err(BranchError::ExactWeightOutOfRange(q.clone()));
    }
    let two = BigRational::from_integer(2.into());
    let f = &two * q;
    let g = &two - &f;
    Ok((multiplicity * f, multiplicity * g))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Counts {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

/// Multiplicity of the histories with `p` pluses, for `p = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryTally {
    runs: u32,
    counts: Counts,
    /// `counts[p] / 2^N`, kept separately so it stays finite for large `N`.
    normalized: Vec<f64>,
}

impl HistoryTally {
    fn exact(runs: u32, numerators: Vec<BigUint>, denom: BigUint) -> Self {
        let denom = BigInt::from(denom);
        let counts: Vec<BigRational> = numerators
            .into_iter()
            .map(|n| BigRational::new(n.into(), denom.clone()))
            .collect();
        let scale = BigRational::from_integer(BigInt::one() << runs as usize);
        let normalized = counts
            .iter()
            .map(|c| (c / &scale).to_f64().unwrap_or(f64::NAN))
            .collect();
        Self {
            runs,
            counts: Counts::Exact(counts),
            normalized,
        }
    }

    pub fn runs(&self) -> u32 {
        self.runs
    }

    pub fn counts(&self) -> &Counts {
        &self.counts
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.counts, Counts::Exact(_))
    }

    pub fn exact_counts(&self) -> Option<&[BigRational]> {
        match &self.counts {
            Counts::Exact(c) => Some(c),
            Counts::Float(_) => None,
        }
    }

    /// Counts as floats; may overflow to infinity for very large `N`.
    pub fn counts_f64(&self) -> Vec<f64> {
        match &self.counts {
            Counts::Exact(c) => c.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect(),
            Counts::Float(c) => c.clone(),
        }
    }

    /// Probability of each plus-count, `N(p)/2^N`.
    pub fn normalized(&self) -> &[f64] {
        &self.normalized
    }

    pub fn total_exact(&self) -> Option<BigRational> {
        self.exact_counts()
            .map(|c| c.iter().fold(BigRational::zero(), |acc, x| acc + x))
    }

    /// Compensated sum of the counts.
    pub fn total_f64(&self) -> f64 {
        match &self.counts {
            Counts::Exact(_) => self.total_exact().and_then(|t| t.to_f64()).unwrap_or(f64::NAN),
            Counts::Float(c) => c.iter().copied().collect::<CompensatedSum>().value(),
        }
    }

    /// Mean plus-count of the normalized distribution, exactly.
    pub fn mean_exact(&self) -> Option<BigRational> {
        let counts = self.exact_counts()?;
        let total = self.total_exact()?;
        if total.is_zero() {
            return None;
        }
        let weighted = counts
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (p, c)| acc + c * BigInt::from(p));
        Some(weighted / total)
    }

    /// Argmax over `p`, ties going to the smaller `p`.
    ///
    /// Exact tallies compare exactly; float tallies treat values within a
    /// relative 1e-12 as tied.
    pub fn peak(&self) -> usize {
        match &self.counts {
            Counts::Exact(c) => {
                let mut best = 0;
                for p in 1..c.len() {
                    if c[p] > c[best] {
                        best = p;
                    }
                }
                best
            }
            Counts::Float(_) => {
                let c = &self.normalized;
                let mut best = 0;
                for p in 1..c.len() {
                    if c[p] > c[best] * (1.0 + FLOAT_TIE) {
                        best = p;
                    }
                }
                best
            }
        }
    }
}

/// Product carried along a path of the branching tree.
trait PathWeight: Clone + Send + Sync {
    type Acc: Send;
    fn unit() -> Self;
    fn extend(&self, step: &Self) -> Self;
    fn new_acc(len: usize) -> Self::Acc;
    fn record(acc: &mut Self::Acc, p: usize, w: &Self);
    fn merge(into: &mut Self::Acc, other: Self::Acc);
}

impl PathWeight for BigUint {
    type Acc = Vec<BigUint>;

    fn unit() -> Self {
        BigUint::from(1u32)
    }

    fn extend(&self, step: &Self) -> Self {
        self * step
    }

    fn new_acc(len: usize) -> Self::Acc {
        vec![BigUint::zero(); len]
    }

    fn record(acc: &mut Self::Acc, p: usize, w: &Self) {
        acc[p] += w;
    }

    fn merge(into: &mut Self::Acc, other: Self::Acc) {
        into.iter_mut().zip(other).for_each(|(a, b)| *a += b);
    }
}

impl PathWeight for f64 {
    type Acc = Vec<CompensatedSum>;

    fn unit() -> Self {
        1.0
    }

    fn extend(&self, step: &Self) -> Self {
        self * step
    }

    fn new_acc(len: usize) -> Self::Acc {
        vec![CompensatedSum::default(); len]
    }

    fn record(acc: &mut Self::Acc, p: usize, w: &Self) {
        acc[p].add(*w);
    }

    fn merge(into: &mut Self::Acc, other: Self::Acc) {
        into.iter_mut().zip(&other).for_each(|(a, b)| a.merge(b));
    }
}

fn walk<W: PathWeight>(remaining: u32, p: usize, weight: &W, plus: &W, minus: &W, acc: &mut W::Acc) {
    if remaining == 0 {
        W::record(acc, p, weight);
        return;
    }
    walk(remaining - 1, p + 1, &weight.extend(plus), plus, minus, acc);
    walk(remaining - 1, p, &weight.extend(minus), plus, minus, acc);
}

/// Walks every one of the `2^runs` histories. The first few levels are
/// expanded into prefixes that are walked in parallel; their tallies are
/// merged in prefix order so float results do not depend on scheduling.
fn enumerate_paths<W: PathWeight>(runs: u32, plus: &W, minus: &W) -> W::Acc {
    let split = runs.min(6);
    let rest = runs - split;
    let len = runs as usize + 1;
    let partials: Vec<W::Acc> = (0..1u64 << split)
        .into_par_iter()
        .map(|prefix| {
            let mut weight = W::unit();
            let mut p = 0;
            for level in 0..split {
                if prefix >> level & 1 == 1 {
                    weight = weight.extend(minus);
                } else {
                    weight = weight.extend(plus);
                    p += 1;
                }
            }
            let mut acc = W::new_acc(len);
            walk(rest, p, &weight, plus, minus, &mut acc);
            acc
        })
        .collect();
    let mut total = W::new_acc(len);
    for partial in partials {
        W::merge(&mut total, partial);
    }
    total
}

/// Tally obtained by explicitly enumerating every history.
pub fn enumerate_tree(config: &BranchConfig) -> Result<HistoryTally, BranchError> {
    let runs = config.runs;
    if runs > MAX_ENUMERATION_RUNS {
        return Err(BranchError::Capacity {
            runs,
            max: MAX_ENUMERATION_RUNS,
        });
    }
    Ok(match config.step_weights() {
        StepWeights::Exact { plus, minus, denom } => {
            let numerators = enumerate_paths(runs, &plus, &minus);
            HistoryTally::exact(runs, numerators, denom.pow(runs))
        }
        StepWeights::Float { plus, minus } => {
            let counts: Vec<f64> = enumerate_paths(runs, &plus, &minus)
                .iter()
                .map(CompensatedSum::value)
                .collect();
            let scale = 0.5f64.powi(runs as i32);
            let normalized = counts.iter().map(|c| c * scale).collect();
            HistoryTally {
                runs,
                counts: Counts::Float(counts),
                normalized,
            }
        }
    })
}

/// Tally from `N(p) = C(N,p)·f^p·g^(N−p)` with exact binomial coefficients.
pub fn closed_form(config: &BranchConfig) -> HistoryTally {
    let runs = config.runs;
    let n = runs as usize;
    let binomials = binomial_row(runs);
    match config.step_weights() {
        StepWeights::Exact { plus, minus, denom } => {
            let mut minus_pows = Vec::with_capacity(n + 1);
            minus_pows.push(BigUint::one());
            for k in 0..n {
                minus_pows.push(&minus_pows[k] * &minus);
            }
            let mut plus_pow = BigUint::one();
            let mut numerators = Vec::with_capacity(n + 1);
            for (p, c) in binomials.iter().enumerate() {
                numerators.push(c * &plus_pow * &minus_pows[n - p]);
                plus_pow *= &plus;
            }
            HistoryTally::exact(runs, numerators, denom.pow(runs))
        }
        StepWeights::Float { plus, minus } => {
            let counts: Vec<f64> = binomials
                .iter()
                .enumerate()
                .map(|(p, c)| {
                    let c = c.to_f64().unwrap_or(f64::INFINITY);
                    c * plus.powi(p as i32) * minus.powi((n - p) as i32)
                })
                .collect();
            // scaling by 2^-N is exact while it stays a normal number, which
            // makes q = 1/2 reproduce the naive distribution bit for bit
            let normalized = if runs <= MAX_DIRECT_SCALE_RUNS && counts.iter().all(|c| c.is_finite()) {
                let scale = 0.5f64.powi(runs as i32);
                counts.iter().map(|c| c * scale).collect()
            } else {
                binomial_pmf(runs, config.q)
            };
            HistoryTally {
                runs,
                counts: Counts::Float(counts),
                normalized,
            }
        }
    }
}

/// `C(N,p) q^p (1−q)^(N−p)` evaluated in log space.
fn binomial_pmf(runs: u32, q: f64) -> Vec<f64> {
    let n = runs as usize;
    if q == 0.0 || q == 1.0 {
        let mut point = vec![0.0; n + 1];
        point[if q == 1.0 { n } else { 0 }] = 1.0;
        return point;
    }
    let (ln_q, ln_r) = (q.ln(), (1.0 - q).ln());
    ln_binomial_row(runs)
        .iter()
        .enumerate()
        .map(|(p, lc)| (lc + p as f64 * ln_q + (n - p) as f64 * ln_r).exp())
        .collect()
}

/// Most populated plus-count of the closed-form tally.
pub fn peak(config: &BranchConfig) -> usize {
    closed_form(config).peak()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Plus,
    Minus,
}

/// The sequence of results seen by one observer copy.
///
/// The environment label of the branch is the history string itself, e.g.
/// `+-` for the world where the first run gave plus and the second minus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObserverHistory {
    outcomes: Vec<Outcome>,
    plus_count: usize,
}

impl ObserverHistory {
    pub fn new(outcomes: Vec<Outcome>) -> Self {
        let plus_count = outcomes.iter().filter(|o| **o == Outcome::Plus).count();
        Self { outcomes, plus_count }
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn plus_count(&self) -> usize {
        self.plus_count
    }
}

impl fmt::Display for ObserverHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            f.write_str(match o {
                Outcome::Plus => "+",
                Outcome::Minus => "-",
            })?;
        }
        Ok(())
    }
}

fn draw(runs: u32, q: f64, count: usize, seed: u64) -> Vec<ObserverHistory> {
    let coin = Bernoulli::new(q).expect("q validated on construction");
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let len = SAMPLE_CHUNK.min(count - chunk * SAMPLE_CHUNK);
            (0..len)
                .map(|_| {
                    let outcomes = (0..runs)
                        .map(|_| {
                            if coin.sample(&mut rng) {
                                Outcome::Plus
                            } else {
                                Outcome::Minus
                            }
                        })
                        .collect();
                    ObserverHistory::new(outcomes)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Draws `count` histories, each with probability `f^p g^(N−p) / 2^N`, i.e.
/// `N` independent Bernoulli(q) outcomes.
///
/// Reproducible for a fixed seed: history `i` comes from ChaCha8 stream
/// `i / SAMPLE_CHUNK` seeded with `seed`, independent of the thread count.
pub fn sample_histories(config: &BranchConfig, count: usize, seed: u64) -> Result<Vec<ObserverHistory>, BranchError> {
    if config.mode == Mode::Naive {
        return Err(BranchError::Unsupported(
            "naive counting gives every history equal weight; use sample_uniform_histories",
        ));
    }
    if count == 0 {
        return Err(BranchError::NoSamples);
    }
    Ok(draw(config.runs, config.q, count, seed))
}

/// Uniform draw over all `2^N` histories, the naive-counting contrast to
/// [`sample_histories`].
pub fn sample_uniform_histories(
    config: &BranchConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<ObserverHistory>, BranchError> {
    if count == 0 {
        return Err(BranchError::NoSamples);
    }
    Ok(draw(config.runs, 0.5, count, seed))
}
