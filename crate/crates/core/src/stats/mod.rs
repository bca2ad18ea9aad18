//! Within-subject statistics: percent change from baseline, one-way
//! repeated-measures ANOVA, the Friedman test and Bonferroni-corrected
//! pairwise post-hoc tests.

mod anova;
mod friedman;
mod posthoc;
pub mod special;

pub use anova::{anova_table, rm_anova, AnovaTable};
pub use friedman::{friedman, friedman_with, mid_ranks, FriedmanOptions};
pub use posthoc::{
    paired_t, posthoc_bonferroni, wilcoxon_signed_rank, PairOutcome, PairTest, PosthocFamily,
    PosthocPair, PosthocTable, ALPHA,
};

use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("undefined baseline")]
    UndefinedBaseline,
    #[error("need at least 2 subjects and 2 conditions, got {n} x {k}")]
    TooSmall { n: usize, k: usize },
    #[error("matrix has {got} cells, expected {n} x {k}")]
    Shape { n: usize, k: usize, got: usize },
    #[error("non-finite value in row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("degenerate: zero within-subject variance")]
    ZeroErrorVariance,
}

/// `100 * (post - baseline) / baseline`.
pub fn percent_change(baseline: f64, post: f64) -> Result<f64, StatsError> {
    if baseline == 0.0 || !baseline.is_finite() {
        return Err(StatsError::UndefinedBaseline);
    }
    Ok(100.0 * (post - baseline) / baseline)
}

/// Complete subjects x conditions matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedMeasures {
    values: Vec<f64>,
    n: usize,
    k: usize,
    pub labels: Vec<String>,
}

impl RepeatedMeasures {
    pub fn new(values: Vec<f64>, n: usize, k: usize, labels: Vec<String>) -> Result<Self, StatsError> {
        if n < 2 || k < 2 {
            return Err(StatsError::TooSmall { n, k });
        }
        if values.len() != n * k {
            return Err(StatsError::Shape { n, k, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { row: i / k, col: i % k });
        }
        let labels = if labels.len() == k {
            labels
        } else {
            (1..=k).map(|j| alloc::format!("C{j}")).collect()
        };
        Ok(RepeatedMeasures { values, n, k, labels })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, StatsError> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(StatsError::Shape { n, k, got: bad.len() });
        }
        Self::new(rows.concat(), n, k, Vec::new())
    }

    pub fn subjects(&self) -> usize {
        self.n
    }

    pub fn conditions(&self) -> usize {
        self.k
    }

    pub fn get(&self, subject: usize, condition: usize) -> f64 {
        self.values[subject * self.k + condition]
    }

    pub fn row(&self, subject: usize) -> &[f64] {
        &self.values[subject * self.k..(subject + 1) * self.k]
    }

    pub fn column(&self, condition: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, condition)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        RepeatedMeasures {
            values: self.values.iter().map(|&v| f(v)).collect(),
            n: self.n,
            k: self.k,
            labels: self.labels.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Effect {
    PartialEtaSquared(f64),
    KendallW(f64),
}

impl Effect {
    pub fn value(self) -> f64 {
        match self {
            Effect::PartialEtaSquared(v) | Effect::KendallW(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestKind {
    RmAnova,
    Friedman,
}

/// F or chi-square result with degrees of freedom, p-value and effect size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatTestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub df1: f64,
    /// Denominator df for F; `None` for chi-square.
    pub df2: Option<f64>,
    pub p: f64,
    pub effect: Effect,
}

impl StatTestResult {
    /// Report line such as `F(3, 36) = 91.31, p < .001, η²_p = .88`.
    pub fn summary(&self) -> String {
        let p = format_p(self.p);
        match (self.test, self.df2) {
            (TestKind::RmAnova, Some(df2)) => alloc::format!(
                "F({}, {}) = {:.2}, {p}, η²_p = {}",
                self.df1,
                df2,
                self.statistic,
                format_unit(self.effect.value())
            ),
            _ => alloc::format!(
                "χ²({}) = {:.2}, {p}, W = {:.2}",
                self.df1,
                self.statistic,
                self.effect.value()
            ),
        }
    }
}

/// APA-style p: `p < .001` or `p = .034`.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "p < .001".into()
    } else {
        alloc::format!("p = {}", format_unit(p))
    }
}

/// Value in [0, 1] without the leading zero, e.g. `.92`.
fn format_unit(v: f64) -> String {
    let s = if v < 0.01 { alloc::format!("{v:.3}") } else { alloc::format!("{v:.2}") };
    match s.strip_prefix('0') {
        Some(rest) => rest.into(),
        None => s,
    }
}
