//! Principal component analysis of the measure correlation matrix,
//! varimax rotation of the leading components, and projection onto a 2-D
//! measure map.
//!
//! The correlation matrix itself is decomposed (measures as variables).
//! Eigenpairs come from a cyclic Jacobi diagonalization, which is exact
//! to round-off at this size and has no solver dependencies. Every output
//! is deterministic: eigenvalues sort descending with stable ties, each
//! eigenvector's largest-magnitude entry is made positive, and rotated
//! columns are ordered by explained sum of squares.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::matrix::Matrix;
use crate::measures::{DataSource, MeasureDescriptor};
use crate::stats::CorrelationMatrix;

/// Eigenvalues below `-NEGATIVE_EIGENVALUE_TOL` mean the input was not
/// positive semidefinite; values inside the band clamp to zero.
const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub descriptors: Vec<MeasureDescriptor>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `lambda_i / sum(lambda)`, non-negative, sums to 1.
    pub variance_proportion: Vec<f64>,
    pub cumulative_proportion: Vec<f64>,
    /// Columns are eigenvectors, same order as `eigenvalues`.
    pub eigenvectors: Matrix,
    /// Column `i` is eigenvector `i` scaled by `sqrt(max(lambda_i, 0))`.
    pub loadings: Matrix,
    pub rotation: Option<VarimaxRotation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarimaxRotation {
    pub k: usize,
    /// Measures x k, after rotation, column-ordered by sum of squares.
    pub rotated_loadings: Matrix,
    /// The k x k orthogonal rotation applied to the first k loading
    /// columns (including the final column permutation and signs).
    pub rotation_matrix: Matrix,
    pub converged: bool,
    pub sweeps: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactorError {
    IncompleteMatrix,
    Asymmetric { max_gap: f64 },
    NotPositiveSemidefinite { eigenvalue: f64 },
    TooFewComponents { k: usize, available: usize },
    NotRotated,
}

impl fmt::Display for FactorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IncompleteMatrix => {
                write!(f, "correlation matrix has missing entries; filter before decomposing")
            }
            Self::Asymmetric { max_gap } => {
                write!(f, "matrix asymmetry {max_gap} exceeds tolerance")
            }
            Self::NotPositiveSemidefinite { eigenvalue } => {
                write!(f, "eigenvalue {eigenvalue} is negative beyond round-off")
            }
            Self::TooFewComponents { k, available } => {
                write!(f, "requested {k} components but only {available} exist")
            }
            Self::NotRotated => write!(f, "model has no varimax rotation yet"),
        }
    }
}

impl core::error::Error for FactorError {}

/// Full eigendecomposition of a complete correlation matrix.
pub fn pca(matrix: &CorrelationMatrix) -> Result<FactorModel, FactorError> {
    let n = matrix.len();
    if !matrix.is_complete() {
        return Err(FactorError::IncompleteMatrix);
    }
    let mut dense = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            dense.set(i, j, matrix.value(i, j).expect("checked complete"));
        }
    }
    let mut max_gap = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = math::abs(dense.get(i, j) - dense.get(j, i));
            if gap > max_gap {
                max_gap = gap;
            }
        }
    }
    if max_gap > 1e-9 {
        return Err(FactorError::Asymmetric { max_gap });
    }
    decompose(dense, matrix.descriptors().to_vec())
}

/// Eigendecomposition of an arbitrary symmetric matrix with the same
/// conventions as [`pca`]; the descriptor list may be empty when the
/// caller has no measure identities (tests, generic use).
pub fn decompose(
    input: Matrix,
    descriptors: Vec<MeasureDescriptor>,
) -> Result<FactorModel, FactorError> {
    let n = input.rows();
    let (mut eigenvalues, mut vectors) = jacobi_eigen(input);

    // Sort descending, stable in the original index for equal values.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]).then(a.cmp(&b)));
    eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut sorted_vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            sorted_vectors.set(row, new_col, vectors.get(row, old_col));
        }
    }
    vectors = sorted_vectors;

    // Fixed sign: the largest-magnitude entry of each eigenvector is
    // positive; first index wins magnitude ties.
    for col in 0..n {
        let mut best = 0;
        let mut best_abs = -1.0;
        for row in 0..n {
            let a = math::abs(vectors.get(row, col));
            if a > best_abs {
                best_abs = a;
                best = row;
            }
        }
        if vectors.get(best, col) < 0.0 {
            for row in 0..n {
                vectors.set(row, col, -vectors.get(row, col));
            }
        }
    }

    let mut clamped = Vec::with_capacity(n);
    for &ev in &eigenvalues {
        if ev < -NEGATIVE_EIGENVALUE_TOL {
            return Err(FactorError::NotPositiveSemidefinite { eigenvalue: ev });
        }
        clamped.push(if ev < 0.0 { 0.0 } else { ev });
    }
    let total: f64 = clamped.iter().sum();
    let variance_proportion: Vec<f64> = if total > 0.0 {
        clamped.iter().map(|ev| ev / total).collect()
    } else {
        vec![0.0; n]
    };
    let mut cumulative_proportion = Vec::with_capacity(n);
    let mut acc = 0.0;
    for p in &variance_proportion {
        acc += p;
        cumulative_proportion.push(acc);
    }

    let mut loadings = Matrix::zeros(n, n);
    for col in 0..n {
        let scale = math::sqrt(clamped[col]);
        for row in 0..n {
            loadings.set(row, col, vectors.get(row, col) * scale);
        }
    }

    Ok(FactorModel {
        descriptors,
        eigenvalues,
        variance_proportion,
        cumulative_proportion,
        eigenvectors: vectors,
        loadings,
        rotation: None,
    })
}

/// Cyclic Jacobi diagonalization of a symmetric matrix. Returns
/// (eigenvalues, eigenvector columns), unsorted.
fn jacobi_eigen(mut a: Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    let mut v = Matrix::identity(n);
    if n <= 1 {
        let evs = (0..n).map(|i| a.get(i, i)).collect();
        return (evs, v);
    }
    let frob: f64 = {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a.get(i, j) * a.get(i, j);
            }
        }
        math::sqrt(s)
    };
    let threshold = if frob > 0.0 { frob * 1e-15 } else { 0.0 };

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q) * a.get(p, q);
            }
        }
        if math::sqrt(2.0 * off) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if math::abs(apq) <= threshold * 1e-3 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + math::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + math::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;

                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for i in 0..n {
                    let api = a.get(p, i);
                    let aqi = a.get(q, i);
                    a.set(p, i, c * api - s * aqi);
                    a.set(q, i, s * api + c * aqi);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }
    let evs = (0..n).map(|i| a.get(i, i)).collect();
    (evs, v)
}

/// Varimax rotation of the first `k` loading columns: iterative pairwise
/// rotations maximizing the variance of squared loadings, with Kaiser row
/// normalization applied for the optimization and undone afterwards.
/// Columns of the result are ordered by explained sum of squares and
/// sign-fixed like eigenvectors.
pub fn varimax(
    loadings: &Matrix,
    k: usize,
    tol: f64,
    max_iter: u32,
) -> Result<VarimaxRotation, FactorError> {
    let p = loadings.rows();
    if k < 2 || k > loadings.cols() {
        return Err(FactorError::TooFewComponents {
            k,
            available: loadings.cols(),
        });
    }
    let mut l = loadings.truncate_cols(k);

    // Kaiser normalization: scale each row to unit communality.
    let mut communality = vec![0.0f64; p];
    for i in 0..p {
        let h: f64 = (0..k).map(|j| l.get(i, j) * l.get(i, j)).sum();
        communality[i] = math::sqrt(h);
        if communality[i] > 0.0 {
            for j in 0..k {
                l.set(i, j, l.get(i, j) / communality[i]);
            }
        }
    }

    let mut rotation = Matrix::identity(k);
    let mut previous = varimax_criterion(&l);
    let mut converged = false;
    let mut sweeps = 0;
    for sweep in 1..=max_iter {
        sweeps = sweep;
        for a in 0..k {
            for b in (a + 1)..k {
                rotate_pair(&mut l, &mut rotation, a, b, p);
            }
        }
        let current = varimax_criterion(&l);
        if math::abs(current - previous) < tol {
            converged = true;
            break;
        }
        previous = current;
    }

    // Undo row normalization.
    for i in 0..p {
        if communality[i] > 0.0 {
            for j in 0..k {
                l.set(i, j, l.get(i, j) * communality[i]);
            }
        }
    }

    // Canonical column order (descending sum of squares) and signs.
    let mut ss: Vec<(usize, f64)> = (0..k)
        .map(|j| {
            let s: f64 = (0..p).map(|i| l.get(i, j) * l.get(i, j)).sum();
            (j, s)
        })
        .collect();
    ss.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut rotated = Matrix::zeros(p, k);
    let mut final_rotation = Matrix::zeros(k, k);
    for (new_col, &(old_col, _)) in ss.iter().enumerate() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..p {
            let a = math::abs(l.get(i, old_col));
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        let sign = if l.get(best, old_col) < 0.0 { -1.0 } else { 1.0 };
        for i in 0..p {
            rotated.set(i, new_col, sign * l.get(i, old_col));
        }
        for i in 0..k {
            final_rotation.set(i, new_col, sign * rotation.get(i, old_col));
        }
    }

    Ok(VarimaxRotation {
        k,
        rotated_loadings: rotated,
        rotation_matrix: final_rotation,
        converged,
        sweeps,
    })
}

/// Raw varimax criterion: per-column variance of squared loadings.
fn varimax_criterion(l: &Matrix) -> f64 {
    let p = l.rows() as f64;
    let mut total = 0.0;
    for j in 0..l.cols() {
        let mut sum2 = 0.0;
        let mut sum4 = 0.0;
        for i in 0..l.rows() {
            let x = l.get(i, j) * l.get(i, j);
            sum2 += x;
            sum4 += x * x;
        }
        total += sum4 / p - (sum2 / p) * (sum2 / p);
    }
    total
}

/// One pairwise planar rotation by the closed-form varimax angle.
fn rotate_pair(l: &mut Matrix, rotation: &mut Matrix, a: usize, b: usize, p: usize) {
    let mut sum_u = 0.0;
    let mut sum_v = 0.0;
    let mut sum_u2_v2 = 0.0;
    let mut sum_2uv = 0.0;
    for i in 0..p {
        let x = l.get(i, a);
        let y = l.get(i, b);
        let u = x * x - y * y;
        let v = 2.0 * x * y;
        sum_u += u;
        sum_v += v;
        sum_u2_v2 += u * u - v * v;
        sum_2uv += 2.0 * u * v;
    }
    let pf = p as f64;
    let num = sum_2uv - 2.0 * sum_u * sum_v / pf;
    let den = sum_u2_v2 - (sum_u * sum_u - sum_v * sum_v) / pf;
    if num == 0.0 && den == 0.0 {
        return;
    }
    let theta = 0.25 * math::atan2(num, den);
    if math::abs(theta) < 1e-15 {
        return;
    }
    let c = math::cos(theta);
    let s = math::sin(theta);
    for i in 0..p {
        let x = l.get(i, a);
        let y = l.get(i, b);
        l.set(i, a, c * x + s * y);
        l.set(i, b, -s * x + c * y);
    }
    for i in 0..rotation.rows() {
        let x = rotation.get(i, a);
        let y = rotation.get(i, b);
        rotation.set(i, a, c * x + s * y);
        rotation.set(i, b, -s * x + c * y);
    }
}

impl FactorModel {
    /// Applies a varimax rotation to the first `k` loading columns and
    /// stores it on the model.
    pub fn rotate(&mut self, k: usize, tol: f64, max_iter: u32) -> Result<(), FactorError> {
        self.rotation = Some(varimax(&self.loadings, k, tol, max_iter)?);
        Ok(())
    }
}

/// A measure's position on the first two rotated components.
#[derive(Debug, Clone, PartialEq)]
pub struct MapPoint {
    pub descriptor: MeasureDescriptor,
    pub pc1: f64,
    pub pc2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureMap {
    pub points: Vec<MapPoint>,
}

impl MeasureMap {
    pub fn sources(&self) -> impl Iterator<Item = DataSource> + '_ {
        self.points.iter().map(|p| p.descriptor.source)
    }
}

/// Projects measures onto the first two rotated components.
pub fn project_map(model: &FactorModel) -> Result<MeasureMap, FactorError> {
    let rotation = model.rotation.as_ref().ok_or(FactorError::NotRotated)?;
    if rotation.k < 2 {
        return Err(FactorError::TooFewComponents {
            k: 2,
            available: rotation.k,
        });
    }
    let l = &rotation.rotated_loadings;
    let points = model
        .descriptors
        .iter()
        .enumerate()
        .map(|(i, d)| MapPoint {
            descriptor: d.clone(),
            pc1: l.get(i, 0),
            pc2: l.get(i, 1),
        })
        .collect();
    Ok(MeasureMap { points })
}
