use mobility_core::stats::special::{chi2_sf, f_sf};
use mobility_core::stats::{
    anova_table, friedman, paired_t, posthoc_bonferroni, rm_anova, wilcoxon_signed_rank, PairOutcome,
    PosthocFamily, RepeatedMeasures, StatsError,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn rm(rows: &[Vec<f64>]) -> RepeatedMeasures {
    RepeatedMeasures::from_rows(rows).unwrap()
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    let z = Normal::new(0.0, 1.0).unwrap();
    (0..n).map(|_| (0..k).map(|_| z.sample(rng)).collect()).collect()
}

/// Textbook F from cell, row and column means.
fn oracle_f(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let k = rows[0].len();
    let grand = rows.iter().flatten().sum::<f64>() / (n * k) as f64;
    let row_mean: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / k as f64).collect();
    let col_mean: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let ss_cond: f64 = col_mean.iter().map(|m| n as f64 * (m - grand).powi(2)).sum();
    let mut ss_err = 0.0;
    for i in 0..n {
        for j in 0..k {
            ss_err += (rows[i][j] - row_mean[i] - col_mean[j] + grand).powi(2);
        }
    }
    (ss_cond / (k - 1) as f64) / (ss_err / ((n - 1) * (k - 1)) as f64)
}

/// Rank of each value by direct counting.
fn count_ranks(row: &[f64]) -> Vec<f64> {
    row.iter()
        .map(|&v| {
            let less = row.iter().filter(|&&u| u < v).count() as f64;
            let equal = row.iter().filter(|&&u| u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn oracle_friedman(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    let k = rows[0].len();
    let ranks: Vec<Vec<f64>> = rows.iter().map(|r| count_ranks(r)).collect();
    let sums: Vec<f64> = (0..k).map(|j| ranks.iter().map(|r| r[j]).sum()).collect();
    let kf = k as f64;
    12.0 / (n * kf * (kf + 1.0)) * sums.iter().map(|s| s * s).sum::<f64>() - 3.0 * n * (kf + 1.0)
}

#[test]
fn two_conditions_f_is_t_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let rows = random_rows(&mut rng, 9, 2);
        let d: Vec<f64> = rows.iter().map(|r| r[0] - r[1]).collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let t = mean / (sd / n.sqrt());
        let f = rm_anova(&rm(&rows)).unwrap().statistic;
        assert!((f - t * t).abs() <= 1e-9 * f, "{f} vs {}", t * t);
    }
}

#[test]
fn sums_of_squares_decompose() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let rows = random_rows(&mut rng, 5, 4);
        let t = anova_table(&rm(&rows));
        let parts = t.ss_subject + t.ss_condition + t.ss_error;
        assert!((t.ss_total - parts).abs() <= 1e-9 * t.ss_total);
        let f = rm_anova(&rm(&rows)).unwrap().statistic;
        assert!((f - oracle_f(&rows)).abs() <= 1e-9 * f);
    }
}

#[test]
fn additive_data_is_degenerate() {
    let rows: Vec<Vec<f64>> = (0..5).map(|i| (0..4).map(|j| i as f64 * 3.0 + j as f64 * 0.5).collect()).collect();
    assert!(matches!(rm_anova(&rm(&rows)), Err(StatsError::ZeroErrorVariance)));
}

#[test]
fn f_invariances() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows = random_rows(&mut rng, 7, 4);
    let f0 = rm_anova(&rm(&rows)).unwrap().statistic;
    let shifted: Vec<Vec<f64>> = rows.iter().enumerate().map(|(i, r)| r.iter().map(|v| v + 10.0 * i as f64).collect()).collect();
    let affine: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| 3.7 * v - 12.0).collect()).collect();
    for other in [shifted, affine] {
        let f = rm_anova(&rm(&other)).unwrap().statistic;
        assert!((f - f0).abs() <= 1e-9 * f0);
    }
}

#[test]
fn rm_anova_p_matches_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut rows = random_rows(&mut rng, 5, 4);
    for r in rows.iter_mut() {
        r[3] += 0.8;
    }
    let p = rm_anova(&rm(&rows)).unwrap().p;
    let f_obs = oracle_f(&rows);
    let draws = 100_000;
    let mut perm = rows.clone();
    let mut hits = 0usize;
    for _ in 0..draws {
        for r in perm.iter_mut() {
            r.shuffle(&mut rng);
        }
        if oracle_f(&perm) >= f_obs - 1e-12 {
            hits += 1;
        }
    }
    let p_perm = hits as f64 / draws as f64;
    assert!((p - p_perm).abs() < 0.01, "F-test p {p} vs permutation {p_perm}");
}

#[test]
fn friedman_closed_forms() {
    let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0 + i as f64, 2.0 + 2.0 * i as f64, 5.0 + 3.0 * i as f64, 9.0 + 4.0 * i as f64]).collect();
    let r = friedman(&rm(&rows)).unwrap();
    assert_eq!(r.statistic, 15.0);
    assert_eq!(r.effect.value(), 1.0);
    let r = friedman(&rm(&vec![vec![2.0; 4]; 6])).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert_eq!(r.effect.value(), 0.0);
}

#[test]
fn friedman_matches_counting_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        // coarse values so ties occur
        let rows: Vec<Vec<f64>> = (0..8).map(|_| (0..4).map(|_| rng.random_range(0..5) as f64).collect()).collect();
        let got = friedman(&rm(&rows)).unwrap().statistic;
        let want = oracle_friedman(&rows);
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn friedman_monotone_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows = random_rows(&mut rng, 8, 4);
    let a = friedman(&rm(&rows)).unwrap().statistic;
    let b = friedman(&rm(&rows).map(|v| v.exp() * 5.0 + v.powi(3))).unwrap().statistic;
    assert_eq!(a, b);
}

#[test]
fn p_values_monotone_in_statistic() {
    let mut prev = 1.0;
    for i in 1..200 {
        let x = i as f64 * 0.1;
        let (pf, pc) = (f_sf(x, 3.0, 36.0), chi2_sf(x, 3.0));
        assert!(pf <= prev + 1e-15);
        assert!((0.0..=1.0).contains(&pc));
        prev = pf;
    }
    assert!((chi2_sf(9.487729036781158, 4.0) - 0.05).abs() < 1e-12);
}

/// Exact sign-flip distribution of W+ by enumeration.
fn brute_wilcoxon(d: &[f64]) -> f64 {
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = count_ranks(&abs);
    let n = d.len();
    let total: f64 = ranks.iter().sum();
    let w: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let obs = (w - total / 2.0).abs();
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let wm: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (wm - total / 2.0).abs() >= obs - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

#[test]
fn wilcoxon_exact_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 4..=12 {
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.2).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let got = wilcoxon_signed_rank(&x, &y).unwrap().p;
        assert!((got - brute_wilcoxon(&d)).abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn bonferroni_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data = rm(&random_rows(&mut rng, 10, 5));
    for family in [PosthocFamily::PairedT, PosthocFamily::Wilcoxon] {
        let t = posthoc_bonferroni(&data, family);
        assert_eq!(t.pairs.len(), 10);
        for p in &t.pairs {
            let PairOutcome::Tested(raw) = p.outcome else { panic!("untested pair") };
            let pc = p.p_corrected.unwrap();
            assert!(pc >= raw.p && pc <= 1.0);
        }
    }
    let two = rm(&random_rows(&mut rng, 10, 2));
    let t = posthoc_bonferroni(&two, PosthocFamily::PairedT);
    let PairOutcome::Tested(raw) = t.pairs[0].outcome else { panic!() };
    assert_eq!(t.pairs[0].p_corrected, Some(raw.p));
    assert_eq!(paired_t(&two.column(0), &two.column(1)).unwrap(), raw);
}

#[test]
fn wilcoxon_constant_difference_flagged() {
    let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64 + 1.0, (i * i) as f64]).collect();
    let t = posthoc_bonferroni(&rm(&rows), PosthocFamily::Wilcoxon);
    assert_eq!(t.get(0, 1).unwrap().outcome, PairOutcome::NoVariability);
    assert!(matches!(t.get(0, 2).unwrap().outcome, PairOutcome::Tested(_)));
}

#[test]
fn separated_condition_matches_permutation_decisions() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut rows = random_rows(&mut rng, 12, 4);
    for r in rows.iter_mut() {
        r[2] += 4.0;
    }
    let data = rm(&rows);
    let table = posthoc_bonferroni(&data, PosthocFamily::PairedT);
    for p in &table.pairs {
        // sign-flip permutation test of the mean difference
        let d: Vec<f64> = data.column(p.a).iter().zip(data.column(p.b)).map(|(x, y)| x - y).collect();
        let obs = d.iter().sum::<f64>().abs();
        let draws = 20_000;
        let hits = (0..draws)
            .filter(|_| d.iter().map(|v| if rng.random::<bool>() { *v } else { -*v }).sum::<f64>().abs() >= obs)
            .count();
        let oracle_sig = (hits as f64 / draws as f64 * table.m as f64).min(1.0) < 0.05;
        assert_eq!(p.significant, oracle_sig, "pair {}-{}", p.a, p.b);
        assert_eq!(p.significant, p.a == 2 || p.b == 2);
    }
}
