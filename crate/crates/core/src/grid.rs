//! Product grid of equal-probability Gaussian quantiles and the deterministic
//! summation algorithm over it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::EigenSpectrum;
use crate::probit::gauss_quantile;
use crate::sum::par_block_sum;

/// Largest grid `classical_sum` will enumerate unless told otherwise.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CurberaGrid {
    d: usize,
    m: u64,
    spec: EigenSpectrum,
    nodes: Vec<Vec<f64>>,
    n: u128,
}

/// Smallest odd `m` with `m ≥ 4K₁ (π Σ_{i≤d} λ_i)^{1/2} / eps_grid`.
pub fn select_m(spec: &EigenSpectrum, d: usize, k1: f64, eps_grid: f64) -> Result<u64> {
    if !(eps_grid > 0.0) {
        return Err(Error::Domain(format!("grid accuracy must be positive, got {eps_grid}")));
    }
    let bound = 4.0 * k1 * (PI * spec.partial_trace(d as u64)).sqrt() / eps_grid;
    if !bound.is_finite() || bound >= u64::MAX as f64 / 2.0 {
        return Err(Error::Domain(format!("node count {bound} not representable")));
    }
    let m = (bound.ceil() as u64).max(1);
    Ok(if m.is_multiple_of(2) { m + 1 } else { m })
}

/// Nodes closest to the origin among each candidate and its outward neighbour,
/// on a nonnegative increasing half-axis with `+∞` past the end. Ties keep the
/// left node.
fn select_inner(raw: &[f64]) -> Vec<f64> {
    (0..raw.len())
        .map(|j| {
            let next = raw.get(j + 1).copied().unwrap_or(f64::INFINITY);
            if raw[j].abs() <= next.abs() {
                raw[j]
            } else {
                next
            }
        })
        .collect()
}

/// Builds the grid with `m` nodes per axis on the first `d` eigencoordinates.
///
/// Axis `i` uses the quantiles `√λ_i · Φ⁻¹((j − 1/2)/m)`, `j = 1..m`. The
/// nonnegative half is built with the nearest-to-origin selection and mirrored,
/// so every axis is exactly antisymmetric with its middle node at 0.
pub fn build_grid(spec: &EigenSpectrum, d: usize, m: u64) -> Result<CurberaGrid> {
    if d == 0 {
        return Err(Error::Domain("grid dimension must be positive".into()));
    }
    if m == 0 || m.is_multiple_of(2) {
        return Err(Error::Domain(format!("nodes per axis must be odd, got {m}")));
    }
    let n = u32::try_from(d)
        .ok()
        .and_then(|d32| (m as u128).checked_pow(d32))
        .ok_or(Error::GridOverflow { m, d })?;

    let half = (m as usize).div_ceil(2);
    let mut unit_half = Vec::with_capacity(half);
    for k in 0..half {
        let j = (m as usize).div_ceil(2) + k; // one-based index of the node
        unit_half.push(gauss_quantile((j as f64 - 0.5) / m as f64)?);
    }
    let unit_half = select_inner(&unit_half);

    let nodes = (1..=d as u64)
        .map(|i| {
            let scale = spec.eigenvalue(i).sqrt();
            let mut axis = Vec::with_capacity(m as usize);
            axis.extend(unit_half[1..].iter().rev().map(|u| -scale * u));
            axis.extend(unit_half.iter().map(|u| scale * u));
            axis
        })
        .collect();

    Ok(CurberaGrid {
        d,
        m,
        spec: *spec,
        nodes,
        n,
    })
}

impl CurberaGrid {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u128 {
        self.n
    }

    pub fn spec(&self) -> &EigenSpectrum {
        &self.spec
    }

    /// Node sequence of axis `i` (zero-based), increasing.
    pub fn axis(&self, i: usize) -> &[f64] {
        &self.nodes[i]
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// Zero-based per-axis digits of `index`; axis 0 is least significant.
    pub fn digits(&self, index: u128) -> Result<Vec<u64>> {
        self.check(index)?;
        let mut rest = index;
        let m = self.m as u128;
        Ok((0..self.d)
            .map(|_| {
                let digit = (rest % m) as u64;
                rest /= m;
                digit
            })
            .collect())
    }

    pub fn encode(&self, digits: &[u64]) -> Result<u128> {
        if digits.len() != self.d || digits.iter().any(|&j| j >= self.m) {
            return Err(Error::Domain(format!("digits {digits:?} do not address an m={} grid", self.m)));
        }
        Ok(digits.iter().rev().fold(0u128, |acc, &j| acc * self.m as u128 + j as u128))
    }

    fn check(&self, index: u128) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n })
        }
    }

    /// Grid point with linear index `index`.
    pub fn point(&self, index: u128) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.d];
        self.point_into(index, &mut out)?;
        Ok(out)
    }

    pub fn point_into(&self, index: u128, out: &mut [f64]) -> Result<()> {
        self.check(index)?;
        let m = self.m as u128;
        let mut rest = index;
        for (axis, slot) in self.nodes.iter().zip(out.iter_mut()) {
            *slot = axis[(rest % m) as usize];
            rest /= m;
        }
        Ok(())
    }

    /// `2K₁ (π Σ_{i≤d} λ_i)^{1/2} / m`.
    pub fn worst_case_error_bound(&self, k1: f64) -> f64 {
        2.0 * k1 * (PI * self.spec.partial_trace(self.d as u64)).sqrt() / self.m as f64
    }

    pub fn info(&self, k1: f64) -> GridInfo {
        GridInfo {
            d: self.d,
            m: self.m,
            n: self.n.to_string(),
            axes: self
                .nodes
                .iter()
                .map(|a| AxisExtent {
                    min: a[0],
                    max: a[a.len() - 1],
                })
                .collect(),
            worst_case_bound: self.worst_case_error_bound(k1),
        }
    }
}

/// Mean of `f` over every grid point, compensated and block-reduced so the
/// result does not depend on the thread count.
pub fn classical_sum<F>(grid: &CurberaGrid, f: F, enumeration_cap: u128) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    try_classical_sum(grid, |x| Ok(f(x)), enumeration_cap)
}

/// As [`classical_sum`] with a fallible integrand.
pub fn try_classical_sum<F>(grid: &CurberaGrid, f: F, enumeration_cap: u128) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if grid.n > enumeration_cap {
        return Err(Error::EnumerationCap {
            n: grid.n,
            cap: enumeration_cap,
        });
    }
    let total = par_block_sum(grid.n, |i| {
        let mut x = vec![0.0; grid.d];
        grid.point_into(i, &mut x)?;
        f(&x)
    })?;
    Ok(total / grid.n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisExtent {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub d: usize,
    pub m: u64,
    /// Exact decimal point count.
    pub n: String,
    pub axes: Vec<AxisExtent>,
    pub worst_case_bound: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::collections::HashSet;

    const W: EigenSpectrum = EigenSpectrum::Wiener;

    #[test]
    fn select_m_examples() {
        assert_eq!(select_m(&W, 1, 1.0, 0.5).unwrap(), 11);
        assert_eq!(select_m(&W, 1, 1.0, 1e9).unwrap(), 1);
        assert_eq!(select_m(&W, 2, 1.0, 0.1).unwrap(), 49);
        assert!(select_m(&W, 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn select_m_meets_half_eps() {
        for d in 1..6 {
            for &eps in &[1.0, 0.3, 0.1, 0.02] {
                let m = select_m(&W, d, 1.7, eps).unwrap();
                assert_eq!(m % 2, 1);
                let g = build_grid(&W, d, m).unwrap();
                assert!(g.worst_case_error_bound(1.7) <= eps / 2.0 * (1.0 + 1e-12));
                if m > 1 {
                    let smaller = build_grid(&W, d, m - 2).unwrap();
                    assert!(smaller.worst_case_error_bound(1.7) > eps / 2.0);
                }
            }
        }
    }

    #[test]
    fn single_node_grid_is_origin() {
        for d in 1..5 {
            let g = build_grid(&W, d, 1).unwrap();
            assert_eq!(g.n(), 1);
            assert_eq!(g.point(0).unwrap(), vec![0.0; d]);
        }
    }

    #[test]
    fn three_node_axis() {
        let g = build_grid(&W, 1, 3).unwrap();
        let expected = (4.0 / (PI * PI)).sqrt() * gauss_quantile(1.0 / 6.0).unwrap();
        assert_abs_diff_eq!(g.axis(0)[0], expected, epsilon = 1e-14);
        assert_abs_diff_eq!(g.axis(0)[0], -0.6158797, epsilon = 1e-7);
        assert_eq!(g.axis(0)[1], 0.0);
    }

    #[test]
    fn axis_invariants() {
        for spec in [W, EigenSpectrum::PowerLaw { a: 2.0, k: 3.0 }] {
            for m in [1u64, 3, 5, 11, 41, 201] {
                let g = build_grid(&spec, 4, m).unwrap();
                for i in 0..4 {
                    let a = g.axis(i);
                    assert_eq!(a.len(), m as usize);
                    assert_eq!(a[(m as usize - 1) / 2], 0.0);
                    for w in a.windows(2) {
                        assert!(w[0] < w[1]);
                    }
                    for j in 0..m as usize {
                        assert!((a[j] + a[m as usize - 1 - j]).abs() <= 1e-10);
                    }
                    let cap = (3.0 * spec.eigenvalue(i as u64 + 1)).sqrt()
                        * gauss_quantile(1.0 - 1.0 / (2.0 * m as f64)).unwrap();
                    assert!(a[m as usize - 1].abs() <= cap + 1e-15);
                }
            }
        }
    }

    #[test]
    fn selection_rule_on_half_axis() {
        assert_eq!(select_inner(&[0.0, 1.0, 2.0]), vec![0.0, 1.0, 2.0]);
        assert_eq!(select_inner(&[3.0, 1.0]), vec![1.0, 1.0]);
        assert_eq!(select_inner(&[1.0, -1.0]), vec![1.0, -1.0]);
    }

    #[test]
    fn point_examples() {
        let g = build_grid(&W, 2, 3).unwrap();
        assert_eq!(g.point(0).unwrap(), vec![g.axis(0)[0], g.axis(1)[0]]);
        assert_eq!(g.point(5).unwrap(), vec![g.axis(0)[2], g.axis(1)[1]]);
        assert_eq!(g.digits(5).unwrap(), vec![2, 1]);
        assert!(matches!(g.point(9), Err(Error::IndexOutOfRange { index: 9, n: 9 })));
    }

    #[test]
    fn indexing_is_bijective() {
        let g = build_grid(&W, 5, 9).unwrap();
        assert_eq!(g.n(), 59_049);
        let mut seen = HashSet::new();
        for i in 0..g.n() {
            let digits = g.digits(i).unwrap();
            assert_eq!(g.encode(&digits).unwrap(), i);
            let p: Vec<u64> = g.point(i).unwrap().iter().map(|x| x.to_bits()).collect();
            assert!(seen.insert(p));
        }
        assert_eq!(seen.len() as u128, g.n());
    }

    #[test]
    fn overflow_detected() {
        assert!(matches!(build_grid(&W, 200, 3), Err(Error::GridOverflow { .. })));
        assert!(build_grid(&W, 2, 4).is_err());
    }

    #[test]
    fn classical_sum_examples() {
        let g = build_grid(&W, 3, 7).unwrap();
        assert_abs_diff_eq!(classical_sum(&g, |_| 0.3, u128::MAX).unwrap(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(classical_sum(&g, |x| x[0], u128::MAX).unwrap(), 0.0, epsilon = 1e-15);

        let g = build_grid(&W, 1, 11).unwrap();
        let lam = W.eigenvalue(1);
        let s = classical_sum(&g, |x| x[0].cos(), u128::MAX).unwrap();
        let bound = 2.0 * (PI * lam).sqrt() / 11.0;
        assert!((s - (-lam / 2.0).exp()).abs() <= bound);
    }

    #[test]
    fn classical_sum_refuses_over_cap() {
        let g = build_grid(&W, 3, 11).unwrap();
        match classical_sum(&g, |_| 1.0, 1000) {
            Err(Error::EnumerationCap { n, cap }) => assert_eq!((n, cap), (1331, 1000)),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn bound_examples() {
        let g = build_grid(&W, 1, 11).unwrap();
        // 2·√(π · 4/π²)/11 = 4/(11√π)
        assert_abs_diff_eq!(g.worst_case_error_bound(1.0), 4.0 / (11.0 * PI.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(g.worst_case_error_bound(1.0), 0.2051598, epsilon = 1e-7);
        let g21 = build_grid(&W, 1, 21).unwrap();
        assert_abs_diff_eq!(g.worst_case_error_bound(1.0) / g21.worst_case_error_bound(1.0), 21.0 / 11.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_info_json() {
        let g = build_grid(&W, 2, 5).unwrap();
        let info = g.info(1.0);
        assert_eq!(info.n, "25");
        assert_eq!(info.axes[0].min, -info.axes[0].max);
        let back: GridInfo = serde_json::from_str(&serde_json::to_string(&info).unwrap()).unwrap();
        assert_eq!(back, info);
    }

    proptest! {
        #[test]
        fn digits_roundtrip(d in 1usize..6, half in 0u64..6, seed in any::<u64>()) {
            let m = 2 * half + 1;
            let g = build_grid(&W, d, m).unwrap();
            let i = seed as u128 % g.n();
            prop_assert_eq!(g.encode(&g.digits(i).unwrap()).unwrap(), i);
        }
    }
}
