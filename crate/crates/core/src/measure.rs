//! Gaussian measures described by the eigenvalues of their covariance operator.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::KahanSum;

/// Eigenvalue model of the covariance operator. Eigenvalues are computed on
/// demand; nothing is stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "SpectrumRepr")]
pub enum EigenSpectrum {
    /// Wiener measure on C[0,1]: `λ_j = 4 / (π² (2j−1)²)`.
    Wiener,
    /// `λ_j = a · j^(−k)` with `a > 0`, `k > 1`.
    PowerLaw { a: f64, k: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SpectrumRepr {
    Wiener,
    PowerLaw { a: f64, k: f64 },
}

impl TryFrom<SpectrumRepr> for EigenSpectrum {
    type Error = Error;

    fn try_from(r: SpectrumRepr) -> Result<Self> {
        match r {
            SpectrumRepr::Wiener => Ok(EigenSpectrum::Wiener),
            SpectrumRepr::PowerLaw { a, k } => EigenSpectrum::power_law(a, k),
        }
    }
}

impl EigenSpectrum {
    pub fn power_law(a: f64, k: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("power-law scale a must be positive, got {a}")));
        }
        if !(k > 1.0 && k.is_finite()) {
            return Err(Error::Domain(format!("power-law decay k must exceed 1, got {k}")));
        }
        Ok(EigenSpectrum::PowerLaw { a, k })
    }

    /// `λ_j`, one-based.
    ///
    /// Panics if `j == 0`.
    pub fn eigenvalue(&self, j: u64) -> f64 {
        assert!(j >= 1, "eigenvalues are indexed from 1");
        match *self {
            EigenSpectrum::Wiener => {
                let odd = (2 * j - 1) as f64;
                4.0 / (PI * PI * odd * odd)
            }
            EigenSpectrum::PowerLaw { a, k } => a * (j as f64).powf(-k),
        }
    }

    /// `Σ_{j=1}^{d} λ_j`, accumulated in increasing `j`.
    pub fn partial_trace(&self, d: u64) -> f64 {
        (1..=d).map(|j| self.eigenvalue(j)).collect::<KahanSum>().total()
    }

    /// Upper bound on `Σ_{j>d} λ_j`, from the integral comparison test.
    ///
    /// Panics if `d == 0`.
    pub fn tail_bound(&self, d: u64) -> f64 {
        assert!(d >= 1, "tail bound needs d >= 1");
        let d = d as f64;
        match *self {
            EigenSpectrum::Wiener => 1.0 / (PI * PI * (d - 0.5)),
            EigenSpectrum::PowerLaw { a, k } => a / ((k - 1.0) * d.powf(k - 1.0)),
        }
    }

    /// Full trace `Σ_j λ_j`. Closed form for Wiener; Euler–Maclaurin for power laws.
    pub fn trace(&self) -> f64 {
        match *self {
            EigenSpectrum::Wiener => 0.5,
            EigenSpectrum::PowerLaw { a, k } => {
                const N: u64 = 1000;
                let head = (1..N).map(|j| (j as f64).powf(-k)).collect::<KahanSum>().total();
                let n = N as f64;
                let tail = n.powf(1.0 - k) / (k - 1.0) + 0.5 * n.powf(-k) + k * n.powf(-k - 1.0) / 12.0;
                a * (head + tail)
            }
        }
    }
}

/// Wiener eigenfunction `η_i(t) = √2 sin((2i−1)πt/2)` on `[0,1]`.
pub fn wiener_eigenfunction(i: u64, t: f64) -> f64 {
    assert!(i >= 1, "eigenfunctions are indexed from 1");
    SQRT_2 * ((2 * i - 1) as f64 * PI * t / 2.0).sin()
}
