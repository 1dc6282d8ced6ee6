//! End-to-end pipeline: truncate, build the grid, estimate the grid mean,
//! rescale by `K₀`, and report every resource spent.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::baselines::{mc_sample_count, monte_carlo, BenchRecord};
use crate::error::{Error, Result};
use crate::grid::{build_grid, select_m, DEFAULT_ENUMERATION_CAP};
use crate::measure::EigenSpectrum;
use crate::oracle::{make_oracle, Integrand};
use crate::qae::{
    phase_grid_for, qsum, queries_per_repetition, repetition_rng, QaeMode, QsumConfig, SumSource,
    DEFAULT_MEMORY_CAP, QUERY_CONVENTION,
};
use crate::truncate::{dimension_by_tail, dimension_scaled, SmoothnessClass};

pub const REPORT_SCHEMA: &str = "qpath.report/1";
pub const CONFIG_SCHEMA: &str = "qpath.config/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WorstCaseClassical,
    MonteCarlo,
    QuantumStatevector,
    QuantumAnalytic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::WorstCaseClassical => "worst_case_classical",
            Method::MonteCarlo => "monte_carlo",
            Method::QuantumStatevector => "quantum_statevector",
            Method::QuantumAnalytic => "quantum_analytic",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "worst_case_classical" | "classical" => Ok(Method::WorstCaseClassical),
            "monte_carlo" | "mc" => Ok(Method::MonteCarlo),
            "quantum_statevector" | "statevector" => Ok(Method::QuantumStatevector),
            "quantum_analytic" | "analytic" => Ok(Method::QuantumAnalytic),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// Error budget: truncation, grid and summation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Splits {
    pub eps_trunc: f64,
    pub eps_grid: f64,
    pub eps_sum: f64,
}

impl Splits {
    /// `ε/4, ε/4, ε/2`.
    pub fn default_for(eps: f64) -> Self {
        Self {
            eps_trunc: eps / 4.0,
            eps_grid: eps / 4.0,
            eps_sum: eps / 2.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.eps_trunc + self.eps_grid + self.eps_sum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub eps: f64,
    pub splits: Splits,
    pub method: Method,
    /// Odd; quantum methods take the median over this many runs.
    pub repetitions: u32,
    pub seed: u64,
    pub enumeration_cap: u128,
    pub memory_cap: u128,
}

impl PipelineConfig {
    pub fn new(eps: f64, method: Method, seed: u64) -> Self {
        Self {
            eps,
            splits: Splits::default_for(eps),
            method,
            repetitions: 1,
            seed,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }

    pub fn with_splits(mut self, eps_trunc: f64, eps_grid: f64, eps_sum: f64) -> Self {
        self.splits = Splits {
            eps_trunc,
            eps_grid,
            eps_sum,
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        let s = &self.splits;
        if !(s.eps_trunc > 0.0 && s.eps_grid > 0.0 && s.eps_sum > 0.0) {
            return Err(Error::InvalidConfig(format!("splits must be positive, got {s:?}")));
        }
        if (s.total() - self.eps).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "splits sum to {} but eps is {}",
                s.total(),
                self.eps
            )));
        }
        if self.repetitions.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("repetitions must be odd, got {}", self.repetitions)));
        }
        Ok(())
    }
}

fn default_repetitions() -> u32 {
    1
}

/// Everything one pipeline run needs, as read from a JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub spectrum: EigenSpectrum,
    pub class: SmoothnessClass,
    pub integrand: Integrand,
    pub method: Method,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<Splits>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_cap: Option<u64>,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s)?;
        if let Some(schema) = &cfg.schema {
            if schema != CONFIG_SCHEMA {
                return Err(Error::InvalidConfig(format!("unsupported config schema {schema:?}")));
            }
        }
        Ok(cfg)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            eps: self.eps,
            splits: self.splits.unwrap_or_else(|| Splits::default_for(self.eps)),
            method: self.method,
            repetitions: self.repetitions,
            seed: self.seed,
            enumeration_cap: self.enumeration_cap.map_or(DEFAULT_ENUMERATION_CAP, u128::from),
            memory_cap: self.memory_cap.map_or(DEFAULT_MEMORY_CAP, u128::from),
        }
    }

    pub fn run(&self) -> Result<PipelineReport> {
        integrate(&self.pipeline(), &self.spectrum, &self.class, &self.integrand)
    }
}

/// Reference resource estimates for the Wiener measure: dimension with `K₀`
/// folded in, `2K₀/ε` queries and the matching qubit and cost figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePrediction {
    pub d_up: usize,
    /// `2K₀/ε`.
    pub queries: f64,
    /// `d_up · log₂(16K₀K₁/ε)`.
    pub qubits: f64,
    /// Cost is `cost_per_unit · c + cost_offset` for unit query cost `c`.
    pub cost_per_unit: f64,
    pub cost_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageErrors {
    /// `|I − I_d|`.
    pub truncation: f64,
    /// `|I_d − K₀ S_n|`.
    pub grid: f64,
    /// `|estimate − K₀ S_n|`.
    pub summation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema: String,
    pub method: Method,
    pub seed: u64,
    pub eps: f64,
    pub splits: Splits,
    pub estimate: f64,
    pub d: usize,
    pub m: u64,
    /// `m^d` in decimal.
    pub n: String,
    /// Oracle queries: grid evaluations for classical methods, `A`/`A⁻¹`
    /// applications for quantum ones.
    pub queries: u64,
    /// Zero for classical methods.
    pub qubits: u64,
    pub phase_grid: Option<u64>,
    pub repetitions: u32,
    pub query_convention: Option<String>,
    pub reference: Option<ReferencePrediction>,
    /// `I(f)`, when known.
    pub exact: Option<f64>,
    /// `I_d(f)`, when known.
    pub exact_truncated: Option<f64>,
    /// `K₀ S_n`, when known.
    pub grid_value: Option<f64>,
    pub stage_errors: Option<StageErrors>,
    pub observed_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl PipelineReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_constants(cls: &SmoothnessClass, f: &Integrand) -> Result<()> {
    let exceeds = |name: &str, declared: f64, allowed: f64| {
        if declared > allowed * (1.0 + 1e-12) {
            Err(Error::InvalidConfig(format!(
                "integrand {name}={declared} exceeds class {name}={allowed}"
            )))
        } else {
            Ok(())
        }
    };
    exceeds("K0", f.k0(), cls.k0())?;
    exceeds("K1", f.k1(), cls.k1())?;
    if let Some(k2) = cls.k2() {
        match f.k2() {
            Some(fk2) => exceeds("K2", fk2, k2)?,
            None => return Err(Error::InvalidConfig("class has r ≥ 2 but integrand declares no K2".into())),
        }
    }
    Ok(())
}

/// `(2K₀ d_up/ε)(c + 2 log₂(16K₀K₁/ε))` with `d_up` from
/// [`dimension_scaled`]; Wiener measure only.
pub fn report_cost(eps: f64, spec: &EigenSpectrum, cls: &SmoothnessClass, k0: f64, unit_cost: f64) -> Result<f64> {
    let p = reference_prediction(eps, spec, cls, k0)?;
    Ok(p.cost_per_unit * unit_cost + p.cost_offset)
}

pub fn reference_prediction(
    eps: f64,
    spec: &EigenSpectrum,
    cls: &SmoothnessClass,
    k0: f64,
) -> Result<ReferencePrediction> {
    if *spec != EigenSpectrum::Wiener {
        return Err(Error::Domain("the reference cost display is stated for the Wiener measure only".into()));
    }
    let d_up = dimension_scaled(cls, k0, eps)?;
    let log_term = (16.0 * k0 * cls.k1() / eps).log2();
    let per_unit = 2.0 * k0 * d_up as f64 / eps;
    Ok(ReferencePrediction {
        d_up,
        queries: 2.0 * k0 / eps,
        qubits: d_up as f64 * log_term,
        cost_per_unit: per_unit,
        cost_offset: per_unit * 2.0 * log_term,
    })
}

/// Runs the pipeline. With the configured splits the total error is at most
/// `eps`: deterministically for [`Method::WorstCaseClassical`], with
/// probability at least ¾ otherwise.
pub fn integrate(
    cfg: &PipelineConfig,
    spec: &EigenSpectrum,
    cls: &SmoothnessClass,
    f: &Integrand,
) -> Result<PipelineReport> {
    cfg.validate()?;
    check_constants(cls, f)?;
    let k0 = cls.k0();
    let exact = f.exact(spec);
    let reference = reference_prediction(cfg.eps, spec, cls, k0).ok();

    let mut report = PipelineReport {
        schema: REPORT_SCHEMA.into(),
        method: cfg.method,
        seed: cfg.seed,
        eps: cfg.eps,
        splits: cfg.splits,
        estimate: 0.0,
        d: 0,
        m: 1,
        n: "1".into(),
        queries: 0,
        qubits: 0,
        phase_grid: None,
        repetitions: cfg.repetitions,
        query_convention: None,
        reference,
        exact,
        exact_truncated: None,
        grid_value: None,
        stage_errors: None,
        observed_error: exact.map(|e| e.abs()),
        timing_ms: None,
    };
    // |I(f)| ≤ K₀, so 0 is already within eps.
    if cfg.eps >= 2.0 * k0 {
        return Ok(report);
    }

    let s = cfg.splits;
    let d = dimension_by_tail(spec, cls, s.eps_trunc)?;
    // select_m guarantees half its argument.
    let m = select_m(spec, d, cls.k1(), 2.0 * s.eps_grid)?;
    let grid = build_grid(spec, d, m)?;
    let oracle = make_oracle(&grid, f, k0)?;
    let n = grid.n();
    let delta = s.eps_sum / k0;

    let sum = match cfg.method {
        Method::WorstCaseClassical => {
            let mean = oracle.classical_mean(cfg.enumeration_cap)?;
            report.queries = oracle.queries();
            mean
        }
        Method::MonteCarlo => {
            let samples = mc_sample_count(k0, s.eps_sum)?;
            let mean = monte_carlo(&oracle, samples, &mut repetition_rng(cfg.seed, 0))?;
            report.queries = oracle.queries();
            mean
        }
        Method::QuantumAnalytic | Method::QuantumStatevector => {
            let mode = if cfg.method == Method::QuantumAnalytic {
                QaeMode::AnalyticDistribution
            } else {
                QaeMode::Statevector
            };
            if delta >= 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "summation accuracy eps_sum/K0 = {delta} must be below 1"
                )));
            }
            let qcfg = QsumConfig {
                delta,
                repetitions: cfg.repetitions,
                mode,
                seed: cfg.seed,
                memory_cap: cfg.memory_cap,
                enumeration_cap: cfg.enumeration_cap,
            };
            let r = qsum(SumSource::Oracle(&oracle), &qcfg)?;
            report.queries = r.queries;
            report.qubits = r.qubits;
            report.phase_grid = Some(r.phase_grid);
            report.query_convention = Some(QUERY_CONVENTION.into());
            r.estimate
        }
    };

    report.estimate = k0 * sum;
    report.d = d;
    report.m = m;
    report.n = n.to_string();
    report.exact_truncated = f.exact_truncated(spec, d);
    report.grid_value = oracle.exact_mean().map(|mean| k0 * mean);
    report.observed_error = exact.map(|e| (report.estimate - e).abs());
    if let (Some(i), Some(id), Some(sn)) = (exact, report.exact_truncated, report.grid_value) {
        report.stage_errors = Some(StageErrors {
            truncation: (i - id).abs(),
            grid: (id - sn).abs(),
            summation: (report.estimate - sn).abs(),
        });
    }
    Ok(report)
}

/// Runs the pipeline at each accuracy with splits in proportion
/// `fractions` and records the resources of every method side by side.
/// A classical run refused for size leaves `observed_error` empty.
pub fn bench(
    spec: &EigenSpectrum,
    cls: &SmoothnessClass,
    f: &Integrand,
    eps_list: &[f64],
    fractions: (f64, f64, f64),
    method: Method,
    seed: u64,
) -> Result<Vec<BenchRecord>> {
    let (a, b, c) = fractions;
    let total = a + b + c;
    eps_list
        .iter()
        .map(|&eps| {
            let cfg = PipelineConfig::new(eps, method, seed).with_splits(eps * a / total, eps * b / total, eps * c / total);
            // Re-derive the sum so it matches eps to rounding.
            let cfg = PipelineConfig {
                splits: Splits {
                    eps_sum: eps - cfg.splits.eps_trunc - cfg.splits.eps_grid,
                    ..cfg.splits
                },
                ..cfg
            };
            let k0 = cls.k0();
            let d = dimension_by_tail(spec, cls, cfg.splits.eps_trunc)?;
            let m = select_m(spec, d, cls.k1(), 2.0 * cfg.splits.eps_grid)?;
            let n = BigUint::from(m).pow(d as u32);
            let phase_grid = phase_grid_for((cfg.splits.eps_sum / k0).min(0.999))?;
            let observed_error = match integrate(&cfg, spec, cls, f) {
                Ok(r) => r.observed_error,
                Err(Error::EnumerationCap { .. } | Error::MemoryCap { .. } | Error::GridOverflow { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(BenchRecord {
                eps,
                d,
                m,
                n_digits: n.to_string().len() as u64,
                mc_samples: mc_sample_count(k0, cfg.splits.eps_sum)?,
                q_queries: queries_per_repetition(phase_grid),
                q_qubits: (&n - 1u32).bits() + phase_grid.trailing_zeros() as u64 + 1,
                method: method.as_str().into(),
                observed_error,
                seed,
            })
        })
        .collect()
}
