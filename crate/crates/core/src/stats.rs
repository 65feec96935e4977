//! Rank-order statistics over measure rankings: average ranks, tie-aware
//! Spearman correlation, the pairwise correlation matrix, significance
//! filtering, and per-measure mean correlation.
//!
//! Correlations are computed as the Pearson correlation of average ranks
//! over the journal-set intersection of the two rankings, which matches
//! the classical `1 - 6*sum(d^2)/(n(n^2-1))` form on tie-free data.
//! Undefined pairs (constant rankings) are carried as missing values, not
//! coerced to 0.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::measures::{MeasureDescriptor, MeasureRanking};

/// Average-rank assignment (1-based): tied scores share the mean of the
/// positions they occupy, so the ranks always sum to `n(n+1)/2`.
pub fn average_rank(scores: &[f64]) -> Vec<f64> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut ranks = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average 1-based rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// A defined Spearman correlation, or the reason there is none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpearmanOutcome {
    Defined { rho: f64, n: u64 },
    /// One of the rank vectors has zero variance over the intersection.
    Undefined { n: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    IntersectionTooSmall { a: String, b: String, n: u64 },
    NotEnoughRankings { count: usize },
    BadAlpha { alpha: f64 },
    BadMatrixParts { why: &'static str },
    EmptyInput,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IntersectionTooSmall { a, b, n } => write!(
                f,
                "rankings {a:?} and {b:?} share only {n} journals; need at least 3"
            ),
            Self::NotEnoughRankings { count } => {
                write!(f, "correlation matrix needs at least 2 rankings, got {count}")
            }
            Self::BadAlpha { alpha } => write!(f, "alpha {alpha} must lie in (0, 1)"),
            Self::BadMatrixParts { why } => write!(f, "bad correlation matrix parts: {why}"),
            Self::EmptyInput => write!(f, "input must be non-empty"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Spearman rank-order correlation over the journal-set intersection of
/// two rankings. Ranks are re-assigned within the intersection.
pub fn spearman(x: &MeasureRanking, y: &MeasureRanking) -> Result<SpearmanOutcome, StatsError> {
    let (xs, ys) = paired_scores(x, y);
    let n = xs.len() as u64;
    if n < 3 {
        return Err(StatsError::IntersectionTooSmall {
            a: String::from(x.descriptor().name),
            b: String::from(y.descriptor().name),
            n,
        });
    }
    let rx = average_rank(&xs);
    let ry = average_rank(&ys);
    match rank_pearson(&rx, &ry) {
        Some(rho) => Ok(SpearmanOutcome::Defined { rho, n }),
        None => Ok(SpearmanOutcome::Undefined { n }),
    }
}

/// Scores of the two rankings over their journal intersection, paired in
/// a deterministic order.
fn paired_scores(x: &MeasureRanking, y: &MeasureRanking) -> (Vec<f64>, Vec<f64>) {
    if x.universe_ptr_eq(y) {
        return (x.scores().to_vec(), y.scores().to_vec());
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (id, sx) in x.iter() {
        if let Some(sy) = y.score_of(id) {
            xs.push(sx);
            ys.push(sy);
        }
    }
    (xs, ys)
}

/// Pearson correlation of two rank vectors; `None` when either side has
/// zero variance.
fn rank_pearson(rx: &[f64], ry: &[f64]) -> Option<f64> {
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in rx.iter().zip(ry) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / math::sqrt(sxx * syy))
}

/// A pair whose correlation could not be defined.
#[derive(Debug, Clone, PartialEq)]
pub struct UndefinedPair {
    pub a: MeasureDescriptor,
    pub b: MeasureDescriptor,
}

/// Symmetric matrix of pairwise Spearman correlations with per-pair
/// observation counts. Missing entries mark undefined correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    descriptors: Vec<MeasureDescriptor>,
    values: Vec<Option<f64>>,
    pair_n: Vec<u64>,
    undefined: Vec<UndefinedPair>,
}

impl CorrelationMatrix {
    /// Reassembles a matrix from stored parts (persistence support).
    /// The diagonal must be exactly 1 and the data symmetric.
    pub fn from_parts(
        descriptors: Vec<MeasureDescriptor>,
        values: Vec<Option<f64>>,
        pair_n: Vec<u64>,
    ) -> Result<Self, StatsError> {
        let n = descriptors.len();
        if values.len() != n * n || pair_n.len() != n * n {
            return Err(StatsError::BadMatrixParts {
                why: "value and pair count arrays must be n*n",
            });
        }
        for i in 0..n {
            if values[i * n + i] != Some(1.0) {
                return Err(StatsError::BadMatrixParts {
                    why: "diagonal must be exactly 1",
                });
            }
            for j in 0..n {
                if values[i * n + j] != values[j * n + i] {
                    return Err(StatsError::BadMatrixParts {
                        why: "values must be symmetric",
                    });
                }
            }
        }
        Ok(Self {
            descriptors,
            values,
            pair_n,
            undefined: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptors(&self) -> &[MeasureDescriptor] {
        &self.descriptors
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.len() + j]
    }

    pub fn pair_n(&self, i: usize, j: usize) -> u64 {
        self.pair_n[i * self.len() + j]
    }

    pub fn undefined_pairs(&self) -> &[UndefinedPair] {
        &self.undefined
    }

    /// True when every entry is defined.
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Row `i` as a dense vector; missing entries surface as an error in
    /// the consumers that need completeness, so this returns options.
    pub fn row(&self, i: usize) -> &[Option<f64>] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Keeps only the listed indices (in their given order).
    pub fn submatrix(&self, keep: &[usize]) -> CorrelationMatrix {
        let n = keep.len();
        let mut values = alloc::vec![None; n * n];
        let mut pair_n = alloc::vec![0u64; n * n];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                values[a * n + b] = self.value(i, j);
                pair_n[a * n + b] = self.pair_n(i, j);
            }
        }
        let descriptors: Vec<MeasureDescriptor> =
            keep.iter().map(|&i| self.descriptors[i].clone()).collect();
        let kept_ids: Vec<u8> = descriptors.iter().map(|d| d.id).collect();
        let undefined = self
            .undefined
            .iter()
            .filter(|p| kept_ids.contains(&p.a.id) && kept_ids.contains(&p.b.id))
            .cloned()
            .collect();
        CorrelationMatrix {
            descriptors,
            values,
            pair_n,
            undefined,
        }
    }
}

/// All pairwise Spearman correlations. The diagonal is exactly 1; an
/// undefined pair is recorded and its entries stay missing.
pub fn correlation_matrix(
    rankings: &[MeasureRanking],
) -> Result<CorrelationMatrix, StatsError> {
    let n = rankings.len();
    if n < 2 {
        return Err(StatsError::NotEnoughRankings { count: n });
    }
    let mut values = alloc::vec![None; n * n];
    let mut pair_n = alloc::vec![0u64; n * n];
    let mut undefined = Vec::new();
    for i in 0..n {
        values[i * n + i] = Some(1.0);
        pair_n[i * n + i] = rankings[i].len() as u64;
        for j in (i + 1)..n {
            match spearman(&rankings[i], &rankings[j])? {
                SpearmanOutcome::Defined { rho, n: count } => {
                    values[i * n + j] = Some(rho);
                    values[j * n + i] = Some(rho);
                    pair_n[i * n + j] = count;
                    pair_n[j * n + i] = count;
                }
                SpearmanOutcome::Undefined { n: count } => {
                    pair_n[i * n + j] = count;
                    pair_n[j * n + i] = count;
                    undefined.push(UndefinedPair {
                        a: rankings[i].descriptor().clone(),
                        b: rankings[j].descriptor().clone(),
                    });
                }
            }
        }
    }
    Ok(CorrelationMatrix {
        descriptors: rankings.iter().map(|r| r.descriptor().clone()).collect(),
        values,
        pair_n,
        undefined,
    })
}

/// Two-sided p-value of the t statistic for a Spearman rho with `n`
/// paired observations: `t = rho * sqrt((n-2) / (1-rho^2))` on `n-2`
/// degrees of freedom. A perfect correlation is maximally significant.
pub fn spearman_p_value(rho: f64, n: u64) -> f64 {
    if n < 3 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    let denom = 1.0 - rho * rho;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = math::abs(rho) * math::sqrt(df / denom);
    student_t_two_sided(t, df)
}

/// Two-sided tail probability of Student's t via the regularized
/// incomplete beta function: `p = I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    regularized_incomplete_beta(df / 2.0, 0.5, x)
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = math::lgamma(a + b) - math::lgamma(a) - math::lgamma(b)
        + a * math::ln(x)
        + b * math::ln(1.0 - x);
    let front = math::exp(ln_front);
    // Use the symmetry that keeps the continued fraction convergent.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - regularized_incomplete_beta(b, a, 1.0 - x)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: u32 = 300;
    const EPS: f64 = 1e-14;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if math::abs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if math::abs(delta - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Result of the one-shot significance filter.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceOutcome {
    pub kept: CorrelationMatrix,
    pub removed: Vec<MeasureDescriptor>,
}

/// Removes every measure none of whose pairwise correlations is
/// significant at `alpha` (two-sided, using each pair's observation
/// count). Missing correlations count as not significant. Removal is a
/// single pass; survivors are not re-tested.
pub fn significance_filter(
    matrix: &CorrelationMatrix,
    alpha: f64,
) -> Result<SignificanceOutcome, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha { alpha });
    }
    let n = matrix.len();
    let mut keep = Vec::new();
    let mut removed = Vec::new();
    for i in 0..n {
        let mut any_significant = false;
        for j in 0..n {
            if i == j {
                continue;
            }
            if let Some(rho) = matrix.value(i, j) {
                if spearman_p_value(rho, matrix.pair_n(i, j)) < alpha {
                    any_significant = true;
                    break;
                }
            }
        }
        if any_significant {
            keep.push(i);
        } else {
            removed.push(matrix.descriptors()[i].clone());
        }
    }
    Ok(SignificanceOutcome {
        kept: matrix.submatrix(&keep),
        removed,
    })
}

/// Mean correlation of each measure to all others, skipping the diagonal
/// and missing entries. `None` when a row has no defined off-diagonal
/// entry.
pub fn mean_correlation(matrix: &CorrelationMatrix) -> Vec<Option<f64>> {
    let n = matrix.len();
    (0..n)
        .map(|i| {
            let mut sum = 0.0;
            let mut count = 0u64;
            for j in 0..n {
                if i == j {
                    continue;
                }
                if let Some(rho) = matrix.value(i, j) {
                    sum += rho;
                    count += 1;
                }
            }
            (count > 0).then(|| sum / count as f64)
        })
        .collect()
}
