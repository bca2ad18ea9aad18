use alloc::string::String;
use alloc::vec::Vec;

use super::special::{normal_sf, t_two_sided};
use super::{mid_ranks, RepeatedMeasures};

pub const ALPHA: f64 = 0.05;

/// Exact Wilcoxon null distribution is enumerated up to this many pairs.
const WILCOXON_EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosthocFamily {
    PairedT,
    Wilcoxon,
}

impl core::str::FromStr for PosthocFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paired_t" | "paired-t" | "t" => Ok(PosthocFamily::PairedT),
            "wilcoxon" => Ok(PosthocFamily::Wilcoxon),
            other => Err(alloc::format!("unknown post-hoc family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTest {
    /// t for paired t, W+ for Wilcoxon.
    pub statistic: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairOutcome {
    Tested(PairTest),
    NoVariability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosthocPair {
    pub a: usize,
    pub b: usize,
    pub outcome: PairOutcome,
    pub p_corrected: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosthocTable {
    pub family: PosthocFamily,
    pub labels: Vec<String>,
    /// Number of comparisons, k(k-1)/2.
    pub m: usize,
    pub pairs: Vec<PosthocPair>,
}

impl PosthocTable {
    pub fn get(&self, a: usize, b: usize) -> Option<&PosthocPair> {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.pairs.iter().find(|p| p.a == a && p.b == b)
    }
}

/// Paired t-test on `x - y`. `None` when the differences have no spread.
pub fn paired_t(x: &[f64], y: &[f64]) -> Option<PairTest> {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    if d.len() < 2 {
        return None;
    }
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return None;
    }
    let t = mean / crate::math::sqrt(var / n);
    Some(PairTest { statistic: t, p: t_two_sided(t, n - 1.0) })
}

/// Wilcoxon signed-rank test; zero differences are dropped.
///
/// Exact two-sided p for up to 25 untied nonzero differences, otherwise the
/// normal approximation with tie-corrected variance and continuity correction.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Option<PairTest> {
    let raw: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let first = *raw.first()?;
    if raw.iter().all(|v| *v == first) {
        return None;
    }
    let d: Vec<f64> = raw.into_iter().filter(|v| *v != 0.0).collect();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = mid_ranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let n = d.len();
    let tied = {
        let mut s = abs.clone();
        s.sort_by(f64::total_cmp);
        s.windows(2).any(|w| w[0] == w[1])
    };
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let p = if n <= WILCOXON_EXACT_MAX_N && !tied {
        exact_wilcoxon_p(n, w_plus)
    } else {
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut tie = 0.0;
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie += t * t * t - t;
            i = j + 1;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie / 48.0;
        if var <= 0.0 {
            return None;
        }
        let z = ((w_plus - mean).abs() - 0.5).max(0.0) / crate::math::sqrt(var);
        (2.0 * normal_sf(z)).min(1.0)
    };
    Some(PairTest { statistic: w_plus, p })
}

/// Two-sided exact p: 2 * P(W+ <= min(w, n(n+1)/2 - w)), capped at 1.
fn exact_wilcoxon_p(n: usize, w: f64) -> f64 {
    let max = n * (n + 1) / 2;
    // counts[s] = number of sign assignments with W+ = s
    let mut counts = alloc::vec![0.0f64; max + 1];
    counts[0] = 1.0;
    for r in 1..=n {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = crate::math::pow(2.0, n as f64);
    let lo = w.min(max as f64 - w);
    let tail: f64 = counts.iter().enumerate().filter(|(s, _)| (*s as f64) <= lo + 1e-9).map(|(_, c)| c).sum();
    (2.0 * tail / total).min(1.0)
}

/// All k(k-1)/2 pairwise tests with Bonferroni-corrected p = min(1, m p).
pub fn posthoc_bonferroni(data: &RepeatedMeasures, family: PosthocFamily) -> PosthocTable {
    let k = data.conditions();
    let m = k * (k - 1) / 2;
    let mut pairs = Vec::with_capacity(m);
    for a in 0..k {
        for b in a + 1..k {
            let (x, y) = (data.column(a), data.column(b));
            let test = match family {
                PosthocFamily::PairedT => paired_t(&x, &y),
                PosthocFamily::Wilcoxon => wilcoxon_signed_rank(&x, &y),
            };
            let pair = match test {
                Some(t) => {
                    let pc = (m as f64 * t.p).min(1.0);
                    PosthocPair { a, b, outcome: PairOutcome::Tested(t), p_corrected: Some(pc), significant: pc < ALPHA }
                }
                None => PosthocPair { a, b, outcome: PairOutcome::NoVariability, p_corrected: None, significant: false },
            };
            pairs.push(pair);
        }
    }
    PosthocTable { family, labels: data.labels.clone(), m, pairs }
}
