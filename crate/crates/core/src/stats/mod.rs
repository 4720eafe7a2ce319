//! Nonparametric comparison of optimizer samples: Wilcoxon rank-sum per
//! problem, Friedman average ranks across problems with a post-hoc z test
//! against a control and Hochberg's step-up correction.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains NaN")]
    NanSample,
    #[error("need at least {needed} {what}, found {found}")]
    TooFew {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("p-value {0} outside [0, 1]")]
    PValueRange(f64),
    #[error("control index {control} out of range for {k} columns")]
    Control { control: usize, k: usize },
}

/// Ascending ranks starting at 1; tied values share their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

fn standard_normal_sf(z: f64) -> f64 {
    Normal::standard().sf(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The first sample has significantly smaller values.
    Better,
    Worse,
    Indistinguishable,
}

impl Verdict {
    pub fn symbol(self) -> char {
        match self {
            Verdict::Better => '+',
            Verdict::Worse => '-',
            Verdict::Indistinguishable => '=',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSumMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSumTest {
    pub verdict: Verdict,
    pub p_value: f64,
    /// Rank sum of the first sample in the pooled ranking.
    pub rank_sum: f64,
    pub method: RankSumMethod,
}

/// Samples with fewer than this many entries use the exact null distribution.
pub const EXACT_THRESHOLD: usize = 10;

fn check_sample(x: &[f64]) -> Result<(), StatsError> {
    if x.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(StatsError::NanSample);
    }
    Ok(())
}

fn pooled_ranks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    average_ranks(&pooled)
}

/// Two-sided Wilcoxon rank-sum test at level `alpha`, smaller is better.
/// Exact when either sample has fewer than [`EXACT_THRESHOLD`] entries,
/// otherwise the tie-corrected normal approximation without continuity
/// correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alpha: f64) -> Result<RankSumTest, StatsError> {
    let method = if a.len().min(b.len()) < EXACT_THRESHOLD {
        RankSumMethod::Exact
    } else {
        RankSumMethod::NormalApproximation
    };
    wilcoxon_with(a, b, alpha, method)
}

/// As [`wilcoxon_rank_sum`] with an explicit method.
pub fn wilcoxon_with(
    a: &[f64],
    b: &[f64],
    alpha: f64,
    method: RankSumMethod,
) -> Result<RankSumTest, StatsError> {
    check_sample(a)?;
    check_sample(b)?;
    let ranks = pooled_ranks(a, b);
    let rank_sum: f64 = ranks[..a.len()].iter().sum();
    let p_value = match method {
        RankSumMethod::Exact => exact_p(&ranks, a.len()),
        RankSumMethod::NormalApproximation => normal_p(&ranks, a.len()),
    };
    let mean_a = rank_sum / a.len() as f64;
    let mean_b = (ranks.iter().sum::<f64>() - rank_sum) / b.len() as f64;
    let verdict = if p_value < alpha && mean_a < mean_b {
        Verdict::Better
    } else if p_value < alpha && mean_a > mean_b {
        Verdict::Worse
    } else {
        Verdict::Indistinguishable
    };
    Ok(RankSumTest {
        verdict,
        p_value,
        rank_sum,
        method,
    })
}

/// Two-sided exact p-value: twice the smaller tail of the permutation
/// distribution of the rank sum, ties included.
fn exact_p(ranks: &[f64], n_a: usize) -> f64 {
    // Doubled ranks are integers even with ties.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..n_a].iter().sum();
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled rank sum s.
    let mut counts = vec![vec![0.0f64; max_sum + 1]; n_a + 1];
    counts[0][0] = 1.0;
    for (seen, &r) in doubled.iter().enumerate() {
        for k in (1..=n_a.min(seen + 1)).rev() {
            let (lower, upper) = counts.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for s in (r..=max_sum).rev() {
                if prev[s - r] != 0.0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    let dist = &counts[n_a];
    let total: f64 = dist.iter().sum();
    let lower: f64 = dist[..=observed].iter().sum();
    let upper: f64 = dist[observed..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

fn normal_p(ranks: &[f64], n_a: usize) -> f64 {
    let n = ranks.len() as f64;
    let na = n_a as f64;
    let nb = n - na;
    let w: f64 = ranks[..n_a].iter().sum();
    let mean = na * (n + 1.0) / 2.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let z = (w - mean) / var.sqrt();
    (2.0 * standard_normal_sf(z.abs())).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub avg_ranks: Vec<f64>,
    pub chi_square: f64,
    pub df: usize,
    pub p_value: f64,
    /// Number of problems (blocks).
    pub n: usize,
}

/// Friedman test on an `n x k` matrix of scores (problems by algorithms),
/// smaller is better.
pub fn friedman(scores: &[Vec<f64>]) -> Result<FriedmanResult, StatsError> {
    if scores.len() < 2 {
        return Err(StatsError::TooFew {
            what: "problems",
            needed: 2,
            found: scores.len(),
        });
    }
    let k = scores[0].len();
    let mut sums = vec![0.0; k];
    for (row, values) in scores.iter().enumerate() {
        if values.len() != k {
            return Err(StatsError::Ragged {
                row,
                expected: k,
                found: values.len(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(StatsError::NanSample);
        }
        for (s, r) in sums.iter_mut().zip(average_ranks(values)) {
            *s += r;
        }
    }
    let n = scores.len();
    let avg: Vec<f64> = sums.into_iter().map(|s| s / n as f64).collect();
    friedman_from_ranks(&avg, n)
}

/// Friedman statistic from precomputed average ranks over `n` problems.
pub fn friedman_from_ranks(avg_ranks: &[f64], n: usize) -> Result<FriedmanResult, StatsError> {
    let k = avg_ranks.len();
    if k < 2 {
        return Err(StatsError::TooFew {
            what: "algorithms",
            needed: 2,
            found: k,
        });
    }
    if n < 2 {
        return Err(StatsError::TooFew {
            what: "problems",
            needed: 2,
            found: n,
        });
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let chi_square = 12.0 * nf / (kf * (kf + 1.0)) * sum_sq - 3.0 * nf * (kf + 1.0);
    let df = k - 1;
    let p_value = ChiSquared::new(df as f64)
        .expect("df is positive")
        .sf(chi_square.max(0.0));
    Ok(FriedmanResult {
        avg_ranks: avg_ranks.to_vec(),
        chi_square,
        df,
        p_value,
        n,
    })
}

/// Standard error of a difference of Friedman average ranks.
pub fn rank_difference_se(k: usize, n: usize) -> f64 {
    let kf = k as f64;
    (kf * (kf + 1.0) / (6.0 * n as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostHocRow {
    /// Column index in the Friedman matrix.
    pub index: usize,
    /// `(R_control - R_index) / se`.
    pub z: f64,
    pub p_value: f64,
    pub adjusted_p: f64,
}

/// Compares every column with `control`; rows are in column order with the
/// control omitted. P-values are two-sided and Hochberg-adjusted over the
/// `k - 1` comparisons.
pub fn post_hoc_vs_control(
    result: &FriedmanResult,
    control: usize,
) -> Result<Vec<PostHocRow>, StatsError> {
    let k = result.avg_ranks.len();
    if control >= k {
        return Err(StatsError::Control { control, k });
    }
    let se = rank_difference_se(k, result.n);
    let rc = result.avg_ranks[control];
    let mut rows: Vec<PostHocRow> = (0..k)
        .filter(|&j| j != control)
        .map(|j| {
            let z = (rc - result.avg_ranks[j]) / se;
            PostHocRow {
                index: j,
                z,
                p_value: (2.0 * standard_normal_sf(z.abs())).min(1.0),
                adjusted_p: f64::NAN,
            }
        })
        .collect();
    let raw: Vec<f64> = rows.iter().map(|r| r.p_value).collect();
    for (row, adj) in rows.iter_mut().zip(hochberg_adjust(&raw)?) {
        row.adjusted_p = adj;
    }
    Ok(rows)
}

/// Hochberg step-up adjustment. With `p_(1) >= ... >= p_(m)` sorted
/// descending, `adj_(i) = min_{j <= i} j p_(j)`, capped at 1, returned in
/// input order.
pub fn hochberg_adjust(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::PValueRange(bad));
    }
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    order.sort_by(|&a, &b| p_values[b].total_cmp(&p_values[a]));
    let mut adjusted = vec![0.0; p_values.len()];
    let mut running = f64::INFINITY;
    for (pos, &idx) in order.iter().enumerate() {
        running = running.min((pos + 1) as f64 * p_values[idx]);
        adjusted[idx] = running.min(1.0);
    }
    Ok(adjusted)
}
