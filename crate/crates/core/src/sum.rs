//! Compensated summation.

use rayon::prelude::*;

/// Kahan–Babuška–Neumaier accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Block size for [`par_block_sum`]. Fixed so the reduction tree does not depend
/// on the thread count.
pub const BLOCK: u128 = 1 << 14;

/// Sums `f(i)` for `i` in `0..n` with compensated per-block sums combined in
/// block order. Bit-identical for any rayon pool size. The first error raised
/// by any block (lowest block index) is returned.
pub fn par_block_sum<E, F>(n: u128, f: F) -> std::result::Result<f64, E>
where
    E: Send,
    F: Fn(u128) -> std::result::Result<f64, E> + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let partials: Vec<std::result::Result<KahanSum, E>> = (0..blocks as u64)
        .into_par_iter()
        .map(|b| {
            let lo = b as u128 * BLOCK;
            let hi = (lo + BLOCK).min(n);
            let mut acc = KahanSum::new();
            for i in lo..hi {
                acc.add(f(i)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = KahanSum::new();
    for p in partials {
        total.merge(p?);
    }
    Ok(total.total())
}
