//! Truncation dimension bounds.
//!
//! Three routes are provided: the closed forms for exact power-law and Wiener
//! spectra, the variant that folds the integrand bound `K₀` into the dimension
//! (used for the quantum resource display), and a direct search on the tail
//! condition. The pipeline uses the tail search.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::EigenSpectrum;

/// Integrand class: `r − 1` bounded derivatives with Lipschitz top derivative,
/// constants `K₀ … K_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassRepr")]
pub struct SmoothnessClass {
    r: u32,
    #[serde(rename = "K")]
    k: Vec<f64>,
}

#[derive(Deserialize)]
struct ClassRepr {
    r: u32,
    #[serde(rename = "K")]
    k: Vec<f64>,
}

impl TryFrom<ClassRepr> for SmoothnessClass {
    type Error = Error;

    fn try_from(c: ClassRepr) -> Result<Self> {
        SmoothnessClass::new(c.r, c.k)
    }
}

impl SmoothnessClass {
    pub fn new(r: u32, k: Vec<f64>) -> Result<Self> {
        if r < 1 {
            return Err(Error::Domain("smoothness r must be at least 1".into()));
        }
        if k.len() != r as usize + 1 {
            return Err(Error::Domain(format!(
                "class r={r} needs {} constants K0..K{r}, got {}",
                r + 1,
                k.len()
            )));
        }
        if let Some(bad) = k.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::Domain(format!("class constants must be positive, got {bad}")));
        }
        Ok(Self { r, k })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn constants(&self) -> &[f64] {
        &self.k
    }

    pub fn k0(&self) -> f64 {
        self.k[0]
    }

    pub fn k1(&self) -> f64 {
        self.k[1]
    }

    /// `K₂`, present only for `r ≥ 2`.
    pub fn k2(&self) -> Option<f64> {
        self.k.get(2).copied()
    }

    /// `γ(r)`: 1 for `r = 1`, 0 otherwise.
    pub fn gamma(&self) -> u32 {
        u32::from(self.r == 1)
    }

    /// `β(r)`: `2K₁` for `r = 1`, `K₂` otherwise.
    pub fn beta(&self) -> f64 {
        match self.k2() {
            Some(k2) if self.r >= 2 => k2,
            _ => 2.0 * self.k1(),
        }
    }

    fn second(&self) -> f64 {
        self.k2().expect("r >= 2 carries K2")
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && !eps.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("eps must be positive, got {eps}")))
    }
}

// Ceiling that ignores a few ulp of noise above an exact integer.
fn ceil_dim(x: f64) -> usize {
    if x.is_finite() {
        ((x * (1.0 - 4.0 * f64::EPSILON)).ceil() as usize).max(1)
    } else {
        usize::MAX
    }
}

/// Closed-form upper bound on the truncation dimension.
pub fn dimension_upper(spec: &EigenSpectrum, cls: &SmoothnessClass, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    let pi2 = PI * PI;
    let x = match (*spec, cls.r) {
        (EigenSpectrum::Wiener, 1) => (2.0 * cls.k1() / (pi2 * eps)).powi(2) + 0.5,
        (EigenSpectrum::Wiener, _) => cls.second() / (pi2 * eps) + 0.5,
        // Power laws: the integer ⌈expr⌉, which never exceeds the bound 1 + expr.
        (EigenSpectrum::PowerLaw { a, k }, 1) => {
            (4.0 * a * cls.k1().powi(2) / (k - 1.0)).powf(1.0 / (k - 1.0)) * eps.powf(-2.0 / (k - 1.0))
        }
        (EigenSpectrum::PowerLaw { a, k }, _) => {
            (a * cls.second() / (k - 1.0)).powf(1.0 / (k - 1.0)) * eps.powf(-1.0 / (k - 1.0))
        }
    };
    Ok(ceil_dim(x))
}

/// Dimension bound with the integrand scale `K₀` folded in (Wiener only):
/// `⌈(K₀ β(r) / (π² ε))^(1+γ(r)) + 1/2⌉`.
pub fn dimension_scaled(cls: &SmoothnessClass, k0: f64, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    if !(k0 > 0.0) {
        return Err(Error::Domain(format!("K0 must be positive, got {k0}")));
    }
    let base = k0 * cls.beta() / (PI * PI * eps);
    Ok(ceil_dim(base.powi(1 + cls.gamma() as i32) + 0.5))
}

/// Smallest `d ≥ 1` meeting the tail condition: `tail(d) ≤ ε²/(2K₁)²` for
/// `r = 1`, `(K₂/2)·tail(d) ≤ ε` for `r ≥ 2`.
pub fn dimension_by_tail(spec: &EigenSpectrum, cls: &SmoothnessClass, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    let ok = |d: u64| -> bool {
        let tail = spec.tail_bound(d);
        if cls.r == 1 {
            tail <= (eps / (2.0 * cls.k1())).powi(2)
        } else {
            0.5 * cls.second() * tail <= eps
        }
    };
    if ok(1) {
        return Ok(1);
    }
    // Doubling, then bisection on (lo, hi] with ok(hi) and !ok(lo).
    let mut lo = 1u64;
    let mut hi = 2u64;
    while !ok(hi) {
        lo = hi;
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::Domain(format!("no representable dimension meets eps={eps}")))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    usize::try_from(hi).map_err(|_| Error::Domain("dimension overflow".into()))
}
