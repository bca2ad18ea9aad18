use super::special::f_sf;
use super::{Effect, RepeatedMeasures, StatTestResult, StatsError, TestKind};

/// Sums of squares of the one-way within-subject decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaTable {
    pub ss_total: f64,
    pub ss_subject: f64,
    pub ss_condition: f64,
    pub ss_error: f64,
    pub df_condition: f64,
    pub df_error: f64,
}

pub fn anova_table(data: &RepeatedMeasures) -> AnovaTable {
    let (n, k) = (data.subjects(), data.conditions());
    let grand = (0..n).flat_map(|i| data.row(i).iter().copied()).sum::<f64>() / (n * k) as f64;
    let mut ss_total = 0.0;
    let mut ss_subject = 0.0;
    for i in 0..n {
        let row = data.row(i);
        let m = row.iter().sum::<f64>() / k as f64;
        ss_subject += (m - grand) * (m - grand);
        ss_total += row.iter().map(|v| (v - grand) * (v - grand)).sum::<f64>();
    }
    ss_subject *= k as f64;
    let mut ss_condition = 0.0;
    for j in 0..k {
        let m = data.column(j).iter().sum::<f64>() / n as f64;
        ss_condition += (m - grand) * (m - grand);
    }
    ss_condition *= n as f64;
    // residuals computed directly rather than by subtraction
    let mut ss_error = 0.0;
    let col_means: alloc::vec::Vec<f64> =
        (0..k).map(|j| data.column(j).iter().sum::<f64>() / n as f64).collect();
    for i in 0..n {
        let row = data.row(i);
        let rm = row.iter().sum::<f64>() / k as f64;
        for j in 0..k {
            let r = row[j] - rm - col_means[j] + grand;
            ss_error += r * r;
        }
    }
    AnovaTable {
        ss_total,
        ss_subject,
        ss_condition,
        ss_error,
        df_condition: (k - 1) as f64,
        df_error: ((n - 1) * (k - 1)) as f64,
    }
}

/// One-way repeated-measures ANOVA without sphericity correction.
pub fn rm_anova(data: &RepeatedMeasures) -> Result<StatTestResult, StatsError> {
    let t = anova_table(data);
    if t.ss_error <= 1e-12 * t.ss_total || t.ss_error == 0.0 {
        return Err(StatsError::ZeroErrorVariance);
    }
    let f = (t.ss_condition / t.df_condition) / (t.ss_error / t.df_error);
    Ok(StatTestResult {
        test: TestKind::RmAnova,
        statistic: f,
        df1: t.df_condition,
        df2: Some(t.df_error),
        p: f_sf(f, t.df_condition, t.df_error).clamp(0.0, 1.0),
        effect: Effect::PartialEtaSquared(t.ss_condition / (t.ss_condition + t.ss_error)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn additive_data_is_degenerate() {
        let rows: alloc::vec::Vec<_> = (0..5)
            .map(|i| (0..4).map(|j| i as f64 * 1.7 + j as f64 * 0.3).collect())
            .collect();
        let d = RepeatedMeasures::from_rows(&rows).unwrap();
        assert_eq!(rm_anova(&d), Err(StatsError::ZeroErrorVariance));
    }

    #[test]
    fn matches_reference_fixture() {
        // F(2, 6) = 57, p = 1.25e-4, partial eta squared = .95
        let d = RepeatedMeasures::from_rows(&[
            vec![1.0, 3.0, 5.0],
            vec![2.0, 3.0, 6.0],
            vec![2.0, 4.0, 5.0],
            vec![3.0, 4.0, 7.0],
        ])
        .unwrap();
        let r = rm_anova(&d).unwrap();
        assert_eq!((r.df1, r.df2), (2.0, Some(6.0)));
        let t = anova_table(&d);
        assert!((t.ss_total - (t.ss_subject + t.ss_condition + t.ss_error)).abs() < 1e-12);
        assert!((r.statistic - 57.0).abs() < 1e-9);
        assert!((r.p - 1.25e-4).abs() < 1e-9);
        assert!((r.effect.value() - 0.95).abs() < 1e-12);
    }
}
