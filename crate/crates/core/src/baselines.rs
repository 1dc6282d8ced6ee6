//! Classical comparators: Monte Carlo mean estimation and resource
//! predictions for the worst-case, randomized and quantum settings.

use num_bigint::BigUint;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::select_m;
use crate::measure::EigenSpectrum;
use crate::oracle::{Integrand, SummandOracle};
use crate::qae::{phase_grid_for, queries_per_repetition};
use crate::sum::KahanSum;
use crate::truncate::{dimension_upper, SmoothnessClass};

/// Mean of `samples` i.i.d. uniform-index draws of the oracle; exactly
/// `samples` queries.
pub fn monte_carlo(oracle: &SummandOracle, samples: u64, rng: &mut impl Rng) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Domain("Monte Carlo needs at least one sample".into()));
    }
    let n = oracle.n();
    let mut acc = KahanSum::new();
    for _ in 0..samples {
        acc.add(oracle.value(rng.random_range(0..n))?);
    }
    Ok(acc.total() / samples as f64)
}

/// Plain Monte Carlo for `I_d(f)`: fresh Gaussian points with variances
/// `λ_1..λ_d`, no grid involved.
pub fn monte_carlo_gaussian(
    spec: &EigenSpectrum,
    d: usize,
    f: &Integrand,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<f64> {
    if samples == 0 || d == 0 {
        return Err(Error::Domain("need d ≥ 1 and at least one sample".into()));
    }
    let scale: Vec<f64> = (1..=d as u64).map(|j| spec.eigenvalue(j).sqrt()).collect();
    let mut x = vec![0.0; d];
    let mut acc = KahanSum::new();
    for _ in 0..samples {
        for (xi, s) in x.iter_mut().zip(&scale) {
            let z: f64 = rng.sample(StandardNormal);
            *xi = s * z;
        }
        acc.add(f.eval(&x));
    }
    Ok(acc.total() / samples as f64)
}

/// `⌈(2K₀/ε)²⌉`: by Chebyshev, enough draws of values in `[−K₀, K₀]` for
/// error `ε` with probability ¾.
pub fn mc_sample_count(k0: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && k0 > 0.0) {
        return Err(Error::Domain(format!("need K0 > 0 and eps > 0, got {k0}, {eps}")));
    }
    let n = (2.0 * k0 / eps).powi(2).ceil();
    if n >= u64::MAX as f64 {
        return Err(Error::Domain(format!("sample count {n} not representable")));
    }
    Ok(n as u64)
}

// Past this many digits n is reported by its digit count only.
const MAX_EXACT_DIGITS: f64 = 10_000.0;

fn ser_opt_biguint<S: Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(n) => s.serialize_some(&n.to_string()),
        None => s.serialize_none(),
    }
}

fn de_opt_biguint<'de, D>(d: D) -> std::result::Result<Option<BigUint>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let s: Option<String> = Option::deserialize(d)?;
    s.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
}

/// Predicted resources at one accuracy level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub eps: f64,
    pub split: f64,
    pub d: usize,
    pub m: u64,
    /// `m^d`, omitted when it has more than 10⁴ digits.
    #[serde(serialize_with = "ser_opt_biguint", deserialize_with = "de_opt_biguint")]
    pub n_worst: Option<BigUint>,
    pub n_digits: u64,
    pub mc_samples: u64,
    pub quantum_queries: u64,
    pub qubits: u64,
    /// Reference query count `2K₀/ε`, for comparison.
    pub reference_queries: f64,
}

/// Resources for accuracy `eps` with truncation error `split·eps` and grid
/// budget `(1 − split)·eps`; summation is sized for accuracy `eps/K₀`.
pub fn predict_resources(
    spec: &EigenSpectrum,
    cls: &SmoothnessClass,
    k0: f64,
    eps: f64,
    split: f64,
) -> Result<ComplexityRow> {
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::Domain(format!("split must lie in (0,1), got {split}")));
    }
    if !(k0 > 0.0) {
        return Err(Error::Domain(format!("K0 must be positive, got {k0}")));
    }
    let d = dimension_upper(spec, cls, split * eps)?;
    let m = select_m(spec, d, cls.k1(), (1.0 - split) * eps)?;

    let log10 = d as f64 * (m as f64).log10();
    let (n_worst, n_digits, index_qubits) = if log10 < MAX_EXACT_DIGITS {
        let n = BigUint::from(m).pow(d as u32);
        let digits = n.to_string().len() as u64;
        let bits = (&n - 1u32).bits();
        (Some(n), digits, bits)
    } else {
        (None, log10.floor() as u64 + 1, (d as f64 * (m as f64).log2()).ceil() as u64)
    };

    let delta = (eps / k0).min(0.999);
    let phase_grid = phase_grid_for(delta)?;
    Ok(ComplexityRow {
        eps,
        split,
        d,
        m,
        n_worst,
        n_digits,
        mc_samples: mc_sample_count(k0, eps)?,
        quantum_queries: queries_per_repetition(phase_grid),
        qubits: index_qubits + phase_grid.trailing_zeros() as u64 + 1,
        reference_queries: 2.0 * k0 / eps,
    })
}

/// One line of `bench` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub eps: f64,
    pub d: usize,
    pub m: u64,
    pub n_digits: u64,
    pub mc_samples: u64,
    pub q_queries: u64,
    pub q_qubits: u64,
    pub method: String,
    pub observed_error: Option<f64>,
    pub seed: u64,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str = "eps,d,m,n_digits,mc_samples,q_queries,q_qubits,method,observed_error,seed";
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
