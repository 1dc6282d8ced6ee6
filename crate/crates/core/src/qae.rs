//! Simulated quantum summation: amplitude estimation of the mean of `n`
//! numbers in `[−1, 1]`, with exact query and qubit accounting.
//!
//! The state preparation `A` maps `|0⟩|0⟩` to
//! `Σ_{i<n} n^{−1/2} |i⟩ (cos θ_i |0⟩ + sin θ_i |1⟩)` with `sin² θ_i = (y_i + 1)/2`,
//! so the probability of the ancilla reading 1 is `a = (S_n + 1)/2`. Phase
//! estimation with `M` points over the Grover iterate `Q = −A S₀ A⁻¹ S_χ`
//! yields `j` and the estimate `ã = sin²(πj/M)`.
//!
//! Query convention: the initial `A` is one query and every application of
//! `Q` costs two (`A` and `A⁻¹`), so one run costs `2(M − 1) + 1`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DEFAULT_ENUMERATION_CAP;
use crate::oracle::SummandOracle;

/// Statevector size limit, in real amplitudes stored (`2·n'·M`).
pub const DEFAULT_MEMORY_CAP: u128 = 1 << 25;

pub const QUERY_CONVENTION: &str = "A and A^-1 each count one query; 2(M-1)+1 per repetition";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaeMode {
    Statevector,
    AnalyticDistribution,
}

/// `⌈log₂ x⌉` for `x ≥ 1`.
pub fn ceil_log2(x: u128) -> u32 {
    assert!(x >= 1);
    128 - (x - 1).leading_zeros()
}

/// `M = 2^⌈log₂(4π/δ)⌉`, at least 2.
pub fn phase_grid_for(delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0,1), got {delta}")));
    }
    let t = (4.0 * PI / delta).log2().ceil().max(1.0);
    if t > 62.0 {
        return Err(Error::Domain(format!("delta {delta} needs more than 2^62 phase points")));
    }
    Ok(1u64 << t as u32)
}

pub fn queries_per_repetition(phase_grid: u64) -> u64 {
    2 * (phase_grid - 1) + 1
}

/// `⌈log₂ n⌉ + log₂ M + 1`: index register, phase register, ancilla.
pub fn qubit_count(n: u128, phase_grid: u64) -> u64 {
    ceil_log2(n) as u64 + phase_grid.trailing_zeros() as u64 + 1
}

/// Fully resolved parameters of one summation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaePlan {
    pub n: u128,
    pub phase_grid: u64,
    pub repetitions: u32,
    pub seed: u64,
    pub mode: QaeMode,
}

impl QaePlan {
    pub fn new(n: u128, delta: f64, repetitions: u32, seed: u64, mode: QaeMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("cannot sum zero numbers".into()));
        }
        if repetitions == 0 || repetitions.is_multiple_of(2) {
            return Err(Error::Domain(format!("repetitions must be odd, got {repetitions}")));
        }
        Ok(Self {
            n,
            phase_grid: phase_grid_for(delta)?,
            repetitions,
            seed,
            mode,
        })
    }

    pub fn total_queries(&self) -> u64 {
        self.repetitions as u64 * queries_per_repetition(self.phase_grid)
    }

    pub fn qubits(&self) -> u64 {
        qubit_count(self.n, self.phase_grid)
    }

    /// Generator for repetition `rep`: a pure function of `(seed, rep)`.
    pub fn rng(&self, rep: u32) -> ChaCha8Rng {
        repetition_rng(self.seed, rep)
    }
}

pub fn repetition_rng(seed: u64, rep: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Phase-estimation kernel `F_M(δ) = sin²(Mπδ) / (M² sin²(πδ))`, 1 at integers.
fn fejer(m: u64, delta: f64) -> f64 {
    let r = delta - delta.round();
    if r.abs() < 1e-15 {
        return 1.0;
    }
    let mf = m as f64;
    let num = (mf * PI * r).sin();
    let den = mf * (PI * r).sin();
    (num / den).powi(2)
}

/// Outcome law of phase estimation for good-state probability `a = (s + 1)/2`.
pub fn analytic_law(s_true: f64, phase_grid: u64) -> Vec<f64> {
    let a = ((s_true + 1.0) / 2.0).clamp(0.0, 1.0);
    let omega = a.sqrt().asin() / PI;
    let m = phase_grid as f64;
    let mut law: Vec<f64> = (0..phase_grid)
        .map(|j| {
            let x = j as f64 / m;
            0.5 * (fejer(phase_grid, x - omega) + fejer(phase_grid, x + omega))
        })
        .collect();
    let total: f64 = law.iter().sum();
    law.iter_mut().for_each(|p| *p /= total);
    law
}

/// Working register of the simulator: `n'` index states times one ancilla,
/// stored as `[i][ancilla]`. All gates involved are real.
struct Register {
    n: usize,
    padded: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    applications: u64,
}

impl Register {
    fn new(oracle: &SummandOracle) -> Result<Self> {
        let n = usize::try_from(oracle.n()).map_err(|_| Error::MemoryCap {
            required: oracle.n(),
            cap: usize::MAX as u128,
        })?;
        let padded = n.next_power_of_two();
        let mut cos = vec![1.0; padded];
        let mut sin = vec![0.0; padded];
        for i in 0..n {
            let y = oracle.peek(i as u128)?;
            let theta = ((y + 1.0) / 2.0).clamp(0.0, 1.0).sqrt().asin();
            cos[i] = theta.cos();
            sin[i] = theta.sin();
        }
        Ok(Self {
            n,
            padded,
            cos,
            sin,
            applications: 0,
        })
    }

    fn dim(&self) -> usize {
        2 * self.padded
    }

    /// Householder reflection on the index register taking `|0⟩` to the
    /// uniform superposition over the first `n` indices (self-inverse).
    fn uniform(&self, x: &mut [f64]) {
        if self.n == 1 {
            return;
        }
        let s = 1.0 / (self.n as f64).sqrt();
        let norm2 = 2.0 - 2.0 * s;
        for anc in 0..2 {
            // u = e_0 − s·1_{i<n}
            let mut dot = x[anc];
            for i in 0..self.n {
                dot -= s * x[2 * i + anc];
            }
            let c = 2.0 * dot / norm2;
            x[anc] -= c;
            for i in 0..self.n {
                x[2 * i + anc] += c * s;
            }
        }
    }

    fn rotate(&self, x: &mut [f64], inverse: bool) {
        for i in 0..self.padded {
            let (c, s) = (self.cos[i], if inverse { -self.sin[i] } else { self.sin[i] });
            let (x0, x1) = (x[2 * i], x[2 * i + 1]);
            x[2 * i] = c * x0 - s * x1;
            x[2 * i + 1] = s * x0 + c * x1;
        }
    }

    fn prepare(&mut self, x: &mut [f64]) {
        self.applications += 1;
        self.uniform(x);
        self.rotate(x, false);
    }

    fn unprepare(&mut self, x: &mut [f64]) {
        self.applications += 1;
        self.rotate(x, true);
        self.uniform(x);
    }

    /// `Q = −A S₀ A⁻¹ S_χ`.
    fn grover(&mut self, x: &mut [f64]) {
        for i in 0..self.padded {
            x[2 * i + 1] = -x[2 * i + 1];
        }
        self.unprepare(x);
        x[0] = -x[0];
        self.prepare(x);
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Exact outcome law of the full phase-estimation circuit, together with the
/// number of `A`/`A⁻¹` applications the circuit made.
pub fn statevector_law(oracle: &SummandOracle, phase_grid: u64, memory_cap: u128) -> Result<(Vec<f64>, u64)> {
    let padded = oracle.n().checked_next_power_of_two().unwrap_or(u128::MAX);
    let required = padded.saturating_mul(2).saturating_mul(phase_grid as u128);
    if required > memory_cap {
        return Err(Error::MemoryCap {
            required,
            cap: memory_cap,
        });
    }
    let mut reg = Register::new(oracle)?;
    let dim = reg.dim();
    let m = phase_grid as usize;

    // Row k holds Q^k A|0⟩, the branch entangled with phase-register state |k⟩.
    let mut branches = vec![0.0; m * dim];
    {
        let first = &mut branches[..dim];
        first[0] = 1.0;
        reg.prepare(first);
    }
    for k in 1..m {
        let (done, rest) = branches.split_at_mut(k * dim);
        let next = &mut rest[..dim];
        next.copy_from_slice(&done[(k - 1) * dim..]);
        reg.grover(next);
    }

    // Inverse QFT on the phase register: amplitude of |j⟩ ⊗ e_c is
    // M⁻¹ Σ_k e^{−2πi jk/M} branches[k][c].
    let twiddle: Vec<(f64, f64)> = (0..m)
        .map(|r| {
            let phase = -2.0 * PI * r as f64 / m as f64;
            (phase.cos(), phase.sin())
        })
        .collect();
    let mut law = vec![0.0; m];
    for c in 0..dim {
        if (0..m).all(|k| branches[k * dim + c] == 0.0) {
            continue;
        }
        for (j, p) in law.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for k in 0..m {
                let v = branches[k * dim + c];
                let (tc, ts) = twiddle[(j * k) % m];
                re += tc * v;
                im += ts * v;
            }
            *p += (re * re + im * im) / (m * m) as f64;
        }
    }
    let total: f64 = law.iter().sum();
    law.iter_mut().for_each(|p| *p /= total);
    Ok((law, reg.applications))
}

fn sample(law: &[f64], rng: &mut impl Rng) -> u64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (j, p) in law.iter().enumerate() {
        acc += p;
        if u < acc {
            return j as u64;
        }
    }
    // u landed in the rounding gap above the last partial sum.
    law.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u64
}

/// One statevector run: `(measured j, queries)`.
pub fn run_statevector(oracle: &SummandOracle, phase_grid: u64, rng: &mut impl Rng) -> Result<(u64, u64)> {
    let (law, queries) = statevector_law(oracle, phase_grid, DEFAULT_MEMORY_CAP)?;
    Ok((sample(&law, rng), queries))
}

/// One run drawn from the closed-form outcome law: `(measured j, queries)`.
pub fn run_analytic(s_true: f64, phase_grid: u64, rng: &mut impl Rng) -> (u64, u64) {
    let law = analytic_law(s_true, phase_grid);
    (sample(&law, rng), queries_per_repetition(phase_grid))
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// What to sum: an oracle, or (analytic mode only) a known mean over `n` items.
#[derive(Debug, Clone, Copy)]
pub enum SumSource<'a> {
    Oracle(&'a SummandOracle),
    ExactMean { n: u128, mean: f64 },
}

impl SumSource<'_> {
    pub fn n(&self) -> u128 {
        match self {
            SumSource::Oracle(o) => o.n(),
            SumSource::ExactMean { n, .. } => *n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QsumConfig {
    pub delta: f64,
    pub repetitions: u32,
    pub mode: QaeMode,
    pub seed: u64,
    pub memory_cap: u128,
    pub enumeration_cap: u128,
}

impl QsumConfig {
    pub fn new(delta: f64, repetitions: u32, mode: QaeMode, seed: u64) -> Self {
        Self {
            delta,
            repetitions,
            mode,
            seed,
            memory_cap: DEFAULT_MEMORY_CAP,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaeResult {
    /// Median estimate of `S_n`.
    pub estimate: f64,
    pub queries: u64,
    pub qubits: u64,
    /// Measured phase index per repetition.
    pub outcomes: Vec<u64>,
    /// `ã = sin²(πj/M)` per repetition.
    pub amplitude_estimates: Vec<f64>,
    pub n: String,
    pub delta: f64,
    pub phase_grid: u64,
    pub repetitions: u32,
    pub mode: QaeMode,
    pub seed: u64,
    pub query_convention: String,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Estimates `S_n` to within `delta` with probability at least 3/4 per
/// repetition; the median over `R` odd repetitions boosts that.
pub fn qsum(source: SumSource<'_>, cfg: &QsumConfig) -> Result<QaeResult> {
    let plan = QaePlan::new(source.n(), cfg.delta, cfg.repetitions, cfg.seed, cfg.mode)?;
    let m = plan.phase_grid;

    // Every repetition runs the same circuit, so its law is computed once.
    let (law, per_rep) = match (cfg.mode, source) {
        (QaeMode::Statevector, SumSource::Oracle(o)) => statevector_law(o, m, cfg.memory_cap)?,
        (QaeMode::Statevector, SumSource::ExactMean { .. }) => {
            return Err(Error::InvalidConfig("statevector mode needs the summands, not just their mean".into()))
        }
        (QaeMode::AnalyticDistribution, SumSource::Oracle(o)) => {
            (analytic_law(o.true_mean(cfg.enumeration_cap)?, m), queries_per_repetition(m))
        }
        (QaeMode::AnalyticDistribution, SumSource::ExactMean { mean, .. }) => {
            if !(mean.abs() <= 1.0) {
                return Err(Error::BoundViolation {
                    index: 0,
                    point: "mean".into(),
                    value: mean,
                    bound: 1.0,
                });
            }
            (analytic_law(mean, m), queries_per_repetition(m))
        }
    };
    debug_assert_eq!(per_rep, queries_per_repetition(m));

    let mut outcomes = Vec::with_capacity(cfg.repetitions as usize);
    let mut amplitudes = Vec::with_capacity(cfg.repetitions as usize);
    let mut sums = Vec::with_capacity(cfg.repetitions as usize);
    for rep in 0..cfg.repetitions {
        let j = sample(&law, &mut plan.rng(rep));
        let a = (PI * j as f64 / m as f64).sin().powi(2);
        outcomes.push(j);
        amplitudes.push(a);
        sums.push(2.0 * a - 1.0);
    }

    Ok(QaeResult {
        estimate: median(&sums),
        queries: per_rep * cfg.repetitions as u64,
        qubits: plan.qubits(),
        outcomes,
        amplitude_estimates: amplitudes,
        n: plan.n.to_string(),
        delta: cfg.delta,
        phase_grid: m,
        repetitions: cfg.repetitions,
        mode: cfg.mode,
        seed: cfg.seed,
        query_convention: QUERY_CONVENTION.into(),
    })
}

/// Summands bounded by `B` rather than 1, rescaled to `[−1, 1]`.
pub struct RescaledOracle {
    pub oracle: SummandOracle,
    pub multiplier: f64,
}

/// Wraps `raw` values in `[−B, B]` as an oracle of `raw/B`. A value outside
/// `[−B, B]` is reported against `B` when queried.
pub fn rescale_bounds<F>(n: u128, raw: F, bound: f64) -> Result<RescaledOracle>
where
    F: Fn(u128) -> f64 + Send + Sync + 'static,
{
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::Domain(format!("bound B must be positive, got {bound}")));
    }
    if n == 0 {
        return Err(Error::Domain("cannot sum zero numbers".into()));
    }
    let oracle = SummandOracle::from_fallible(n, move |i| {
        let v = raw(i);
        if v.abs() > bound || v.is_nan() {
            return Err(Error::BoundViolation {
                index: i,
                point: format!("y[{i}]"),
                value: v,
                bound,
            });
        }
        Ok(v / bound)
    });
    Ok(RescaledOracle {
        oracle,
        multiplier: bound,
    })
}

/// Runs [`qsum`] at accuracy `delta / B` and scales the estimate back by `B`.
pub fn qsum_rescaled(rescaled: &RescaledOracle, cfg: &QsumConfig) -> Result<QaeResult> {
    let b = rescaled.multiplier;
    let inner = QsumConfig {
        delta: cfg.delta / b,
        ..cfg.clone()
    };
    let mut result = qsum(SumSource::Oracle(&rescaled.oracle), &inner)?;
    result.estimate *= b;
    result.delta = cfg.delta;
    Ok(result)
}
