//! Test integrands with closed-form Gaussian integrals, and the scaled summand
//! oracle that classical and quantum summation both read from.
//!
//! Integrands act on eigencoordinates `t = (t_1, …, t_d)`, i.e. they are the
//! restrictions `f_d(t) = f(Σ_j t_j η_j)`. Under the measure the coordinates are
//! independent `N(0, λ_j)`, so for `f = A cos(Σ w_j t_j)` the truncated integral
//! is `A exp(−½ Σ_{j≤d} w_j² λ_j)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CurberaGrid;
use crate::measure::EigenSpectrum;
use crate::sum::{par_block_sum, KahanSum};

/// Linear functional coefficients `w_j`, one-based in the math, zero-based here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    Explicit(Vec<f64>),
    Named(NamedCoefficients),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedCoefficients {
    /// `w_j = ⟨η_j, 1⟩ = 2√2 / ((2j−1)π)`: the functional `x ↦ ∫₀¹ x(t) dt`
    /// written in Wiener eigencoordinates. `‖w‖₂ = 1`.
    WienerMean,
}

impl Coefficients {
    /// `w_j` for zero-based `j`; zero past the end of an explicit list.
    pub fn get(&self, j: usize) -> f64 {
        match self {
            Coefficients::Explicit(w) => w.get(j).copied().unwrap_or(0.0),
            Coefficients::Named(NamedCoefficients::WienerMean) => {
                2.0 * 2f64.sqrt() / ((2 * j + 1) as f64 * PI)
            }
        }
    }

    /// Number of nonzero-capable coefficients, `None` if infinite.
    pub fn len(&self) -> Option<usize> {
        match self {
            Coefficients::Explicit(w) => Some(w.len()),
            Coefficients::Named(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn norm(&self) -> f64 {
        match self {
            Coefficients::Explicit(w) => w.iter().map(|x| x * x).sum::<f64>().sqrt(),
            // Σ 8/(π²(2j−1)²) = 1
            Coefficients::Named(NamedCoefficients::WienerMean) => 1.0,
        }
    }

    fn dot(&self, x: &[f64]) -> f64 {
        x.iter().enumerate().map(|(j, t)| self.get(j) * t).sum()
    }
}

pub type PathFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// User-supplied `f_d`. Trusted to respect its declared constants; only the
/// bound `|f| ≤ K₀` is checked, at evaluated points.
#[derive(Clone)]
pub struct CustomFn(pub Arc<PathFn>);

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomFn(..)")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Constant {
        c: f64,
    },
    Linear {
        w: Coefficients,
    },
    CosineLinear {
        w: Coefficients,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    #[serde(skip)]
    Custom(CustomFn),
}

fn unit() -> f64 {
    1.0
}

/// An integrand together with its declared class constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "IntegrandRepr")]
pub struct Integrand {
    #[serde(flatten)]
    family: Family,
    #[serde(rename = "K0")]
    k0: f64,
    #[serde(rename = "K1")]
    k1: f64,
    #[serde(rename = "K2", skip_serializing_if = "Option::is_none", default)]
    k2: Option<f64>,
}

#[derive(Deserialize)]
struct IntegrandRepr {
    #[serde(flatten)]
    family: Family,
    #[serde(rename = "K0")]
    k0: f64,
    #[serde(rename = "K1")]
    k1: f64,
    #[serde(rename = "K2", default)]
    k2: Option<f64>,
}

impl TryFrom<IntegrandRepr> for Integrand {
    type Error = Error;

    fn try_from(r: IntegrandRepr) -> Result<Self> {
        Integrand::new(r.family, r.k0, r.k1, r.k2)
    }
}

// Relative slack for comparing declared constants against computed norms.
const DECLARED_SLACK: f64 = 1e-12;

impl Integrand {
    pub fn new(family: Family, k0: f64, k1: f64, k2: Option<f64>) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {v}")))
            }
        };
        positive("K0", k0)?;
        positive("K1", k1)?;
        if let Some(k2) = k2 {
            positive("K2", k2)?;
        }
        let at_least = |name: &str, declared: f64, needed: f64| {
            if declared >= needed * (1.0 - DECLARED_SLACK) {
                Ok(())
            } else {
                Err(Error::Domain(format!("declared {name} = {declared} is below the required {needed}")))
            }
        };
        match &family {
            Family::Constant { c } => at_least("K0", k0, c.abs())?,
            Family::Linear { w } => at_least("K1", k1, w.norm())?,
            Family::CosineLinear { w, amplitude } => {
                let a = amplitude.abs();
                let norm = w.norm();
                at_least("K0", k0, a)?;
                at_least("K1", k1, a * norm)?;
                if let Some(k2) = k2 {
                    at_least("K2", k2, a * norm * norm)?;
                }
            }
            Family::Custom(_) => {}
        }
        Ok(Self { family, k0, k1, k2 })
    }

    pub fn constant(c: f64) -> Self {
        let k = c.abs().max(f64::MIN_POSITIVE);
        Self::new(Family::Constant { c }, k, k, Some(k)).expect("constant integrand is valid")
    }

    /// `cos(Σ w_j t_j)` with the tightest constants `K₀ = 1`, `K₁ = ‖w‖`, `K₂ = ‖w‖²`.
    pub fn cosine(w: Coefficients) -> Self {
        let norm = w.norm().max(f64::MIN_POSITIVE);
        Self::new(
            Family::CosineLinear { w, amplitude: 1.0 },
            1.0,
            norm,
            Some(norm * norm),
        )
        .expect("cosine integrand is valid")
    }

    pub fn custom<F>(f: F, k0: f64, k1: f64, k2: Option<f64>) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(Family::Custom(CustomFn(Arc::new(f))), k0, k1, k2)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> Option<f64> {
        self.k2
    }

    /// `f_d(t)` at eigencoordinates `t`.
    pub fn eval(&self, t: &[f64]) -> f64 {
        match &self.family {
            Family::Constant { c } => *c,
            Family::Linear { w } => w.dot(t),
            Family::CosineLinear { w, amplitude } => amplitude * w.dot(t).cos(),
            Family::Custom(f) => (f.0)(t),
        }
    }

    /// `I_d(f)` when known in closed form.
    pub fn exact_truncated(&self, spec: &EigenSpectrum, d: usize) -> Option<f64> {
        match &self.family {
            Family::Constant { c } => Some(*c),
            Family::Linear { .. } => Some(0.0),
            Family::CosineLinear { w, amplitude } => Some(amplitude * exact_gaussian_value(w, spec, Some(d))),
            Family::Custom(_) => None,
        }
    }

    /// `I(f)` when known in closed form.
    pub fn exact(&self, spec: &EigenSpectrum) -> Option<f64> {
        match &self.family {
            Family::Constant { c } => Some(*c),
            Family::Linear { .. } => Some(0.0),
            Family::CosineLinear { w, amplitude } => Some(amplitude * exact_gaussian_value(w, spec, None)),
            Family::Custom(_) => None,
        }
    }

    /// Grid mean `S_n(f_d)` by separability, in `O(d·m)`; `None` for custom
    /// integrands.
    pub fn grid_mean(&self, grid: &CurberaGrid) -> Option<f64> {
        match &self.family {
            Family::Constant { c } => Some(*c),
            Family::Linear { w } => Some(
                grid.axes()
                    .iter()
                    .enumerate()
                    .map(|(i, axis)| w.get(i) * axis.iter().copied().collect::<KahanSum>().total() / axis.len() as f64)
                    .sum(),
            ),
            // Axes are symmetric, so each factor E[e^{i w t}] is the real mean of cos(w t).
            Family::CosineLinear { w, amplitude } => Some(
                amplitude
                    * grid
                        .axes()
                        .iter()
                        .enumerate()
                        .map(|(i, axis)| {
                            let wi = w.get(i);
                            axis.iter().map(|t| (wi * t).cos()).collect::<KahanSum>().total() / axis.len() as f64
                        })
                        .product::<f64>(),
            ),
            Family::Custom(_) => None,
        }
    }
}

/// `exp(−½ Σ w_j² λ_j)`, truncated at `d` coordinates or, for `d = None`,
/// summed until the remaining tail is below `1e−14`.
pub fn exact_gaussian_value(w: &Coefficients, spec: &EigenSpectrum, d: Option<usize>) -> f64 {
    let term = |j: usize| {
        let wj = w.get(j);
        wj * wj * spec.eigenvalue(j as u64 + 1)
    };
    let mut acc = KahanSum::new();
    match (d, w.len()) {
        (Some(d), Some(len)) => (0..d.min(len)).for_each(|j| acc.add(term(j))),
        (Some(d), None) => (0..d).for_each(|j| acc.add(term(j))),
        (None, Some(len)) => (0..len).for_each(|j| acc.add(term(j))),
        (None, None) => {
            // Named coefficients decrease in |w_j|, so the tail past J is at
            // most w_J² · Σ_{j>J} λ_j.
            let mut j = 0;
            loop {
                let stop = (j + 1024).max(2 * j);
                while j < stop {
                    acc.add(term(j));
                    j += 1;
                }
                let wj = w.get(j);
                if wj * wj * spec.tail_bound(j as u64) < 1e-14 {
                    break;
                }
            }
        }
    }
    (-0.5 * acc.total()).exp()
}

type ValueFn = dyn Fn(u128) -> Result<f64> + Send + Sync;

/// Deterministic map `i ↦ y_i ∈ [−1, 1]` over `0..n`, with a query tally.
pub struct SummandOracle {
    n: u128,
    value: Arc<ValueFn>,
    queries: AtomicU64,
    exact_mean: Option<f64>,
}

impl fmt::Debug for SummandOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SummandOracle")
            .field("n", &self.n)
            .field("queries", &self.queries())
            .field("exact_mean", &self.exact_mean)
            .finish()
    }
}

impl SummandOracle {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("oracle needs at least one summand".into()));
        }
        let n = values.len() as u128;
        Ok(Self::from_fallible(n, move |i| Ok(values[i as usize])))
    }

    pub fn from_fn<F>(n: u128, f: F) -> Result<Self>
    where
        F: Fn(u128) -> f64 + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::Domain("oracle needs at least one summand".into()));
        }
        Ok(Self::from_fallible(n, move |i| Ok(f(i))))
    }

    pub(crate) fn from_fallible<F>(n: u128, f: F) -> Self
    where
        F: Fn(u128) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            n,
            value: Arc::new(f),
            queries: AtomicU64::new(0),
            exact_mean: None,
        }
    }

    /// Attaches the known mean `S_n`, letting the analytic quantum mode skip
    /// enumeration.
    pub fn with_exact_mean(mut self, mean: f64) -> Self {
        self.exact_mean = Some(mean);
        self
    }

    pub fn n(&self) -> u128 {
        self.n
    }

    pub fn exact_mean(&self) -> Option<f64> {
        self.exact_mean
    }

    /// Number of `value` calls so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::SeqCst)
    }

    pub fn reset_queries(&self) {
        self.queries.store(0, Ordering::SeqCst);
    }

    /// `y_i`, counted as one query.
    pub fn value(&self, i: u128) -> Result<f64> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.peek(i)
    }

    /// `y_i` without touching the tally. Used by simulators that account for
    /// queries by circuit structure rather than by call.
    pub(crate) fn peek(&self, i: u128) -> Result<f64> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        let v = (self.value)(i)?;
        if v.abs() > 1.0 || v.is_nan() {
            return Err(Error::BoundViolation {
                index: i,
                point: format!("y[{i}]"),
                value: v,
                bound: 1.0,
            });
        }
        Ok(v)
    }

    /// `S_n(y) = n⁻¹ Σ y_i` by full enumeration; exactly `n` queries.
    pub fn classical_mean(&self, enumeration_cap: u128) -> Result<f64> {
        if self.n > enumeration_cap {
            return Err(Error::EnumerationCap {
                n: self.n,
                cap: enumeration_cap,
            });
        }
        Ok(par_block_sum(self.n, |i| self.value(i))? / self.n as f64)
    }

    /// `S_n(y)` for simulation bookkeeping: the attached exact mean if any,
    /// otherwise an uncounted enumeration.
    pub(crate) fn true_mean(&self, enumeration_cap: u128) -> Result<f64> {
        if let Some(mean) = self.exact_mean {
            return Ok(mean);
        }
        if self.n > enumeration_cap {
            return Err(Error::EnumerationCap {
                n: self.n,
                cap: enumeration_cap,
            });
        }
        Ok(par_block_sum(self.n, |i| self.peek(i))? / self.n as f64)
    }
}

/// Oracle `y_i = f_d(x_i) / K₀` over the grid points. A point with
/// `|f_d(x)| > K₀` is reported when queried.
pub fn make_oracle(grid: &CurberaGrid, f: &Integrand, k0: f64) -> Result<SummandOracle> {
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::Domain(format!("scale K0 must be positive, got {k0}")));
    }
    let exact = f.grid_mean(grid).map(|s| s / k0);
    let grid = grid.clone();
    let f = f.clone();
    let oracle = SummandOracle::from_fallible(grid.n(), move |i| {
        let x = grid.point(i)?;
        let v = f.eval(&x);
        if v.abs() > k0 || v.is_nan() {
            return Err(Error::BoundViolation {
                index: i,
                point: format!("{x:?}"),
                value: v,
                bound: k0,
            });
        }
        Ok(v / k0)
    });
    Ok(match exact {
        Some(mean) if mean.abs() <= 1.0 => oracle.with_exact_mean(mean),
        _ => oracle,
    })
}
