use alloc::vec::Vec;

use super::special::chi2_sf;
use super::{Effect, RepeatedMeasures, StatTestResult, StatsError, TestKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FriedmanOptions {
    /// Divide χ² by `1 - Σ(t³ - t) / (n (k³ - k))`. Off by default.
    pub tie_correction: bool,
}

/// 1-based ranks with ties sharing the mean of their positions.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn friedman(data: &RepeatedMeasures) -> Result<StatTestResult, StatsError> {
    friedman_with(data, FriedmanOptions::default())
}

pub fn friedman_with(data: &RepeatedMeasures, opts: FriedmanOptions) -> Result<StatTestResult, StatsError> {
    let (n, k) = (data.subjects(), data.conditions());
    let mut rank_sums = alloc::vec![0.0; k];
    let mut tie_term = 0.0;
    for i in 0..n {
        let ranks = mid_ranks(data.row(i));
        for (s, r) in rank_sums.iter_mut().zip(&ranks) {
            *s += r;
        }
        let mut sorted = ranks.clone();
        sorted.sort_by(f64::total_cmp);
        let mut a = 0;
        while a < k {
            let mut b = a;
            while b + 1 < k && sorted[b + 1] == sorted[a] {
                b += 1;
            }
            let t = (b - a + 1) as f64;
            tie_term += t * t * t - t;
            a = b + 1;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let expected = nf * (kf + 1.0) / 2.0;
    // rank sums are multiples of 0.5, so S is exact
    let s: f64 = rank_sums.iter().map(|r| (r - expected) * (r - expected)).sum();
    let mut chi2 = 12.0 * s / (nf * kf * (kf + 1.0));
    if opts.tie_correction {
        let c = 1.0 - tie_term / (nf * (kf * kf * kf - kf));
        chi2 = if c > 0.0 { chi2 / c } else { 0.0 };
    }
    let df = kf - 1.0;
    Ok(StatTestResult {
        test: TestKind::Friedman,
        statistic: chi2,
        df1: df,
        df2: None,
        p: chi2_sf(chi2, df).clamp(0.0, 1.0),
        effect: Effect::KendallW((chi2 / (nf * df)).clamp(0.0, 1.0)),
    })
}
