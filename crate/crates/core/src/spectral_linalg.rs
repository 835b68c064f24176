//! DFT conventions, circulant-system solution, dense and least-squares
//! solvers, and condition numbers.
//!
//! The forward DFT carries the `1/N` factor:
//!
//! ```text
//! a^(m) = (1/N) sum_p a_p e^{-i 2 pi m p / N},
//! a_p   =       sum_m a^(m) e^{+i 2 pi m p / N}.
//! ```
//!
//! This normalization is load-bearing: a symmetric circulant system
//! `sum_l B_{l-p} x_l = d_p` diagonalizes to `x^(m) = d^(m) / (N B^(m))`,
//! and the `N B^(m)` are simultaneously the matrix eigenvalues and singular
//! values. The DFT is evaluated directly (O(N^2)); N stays in the hundreds
//! here.

use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::ops::{Index, IndexMut};

/// Forward DFT with the `1/N` factor.
pub fn dft(v: &[f64]) -> Vec<Complex64> {
    let n = v.len();
    let scale = 1.0 / n as f64;
    (0..n)
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, &x) in v.iter().enumerate() {
                let ang = -TAU * (m * p) as f64 / n as f64;
                acc += Complex64::from_polar(x, ang);
            }
            acc * scale
        })
        .collect()
}

/// Inverse DFT of a conjugate-symmetric spectrum back to a real vector.
///
/// The imaginary residue is checked against `1e-10` of the output scale and
/// discarded; a larger residue means the spectrum was not conjugate-symmetric.
pub fn idft(s: &[Complex64]) -> Result<Vec<f64>> {
    let full = idft_complex(s);
    let scale = full
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let residue = full.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    if residue > 1e-10 * scale {
        return Err(Error::ImaginaryResidue(residue));
    }
    Ok(full.into_iter().map(|z| z.re).collect())
}

pub fn idft_complex(s: &[Complex64]) -> Vec<Complex64> {
    let n = s.len();
    (0..n)
        .map(|p| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &z) in s.iter().enumerate() {
                let ang = TAU * (m * p) as f64 / n as f64;
                acc += z * Complex64::from_polar(1.0, ang);
            }
            acc
        })
        .collect()
}

/// Dense row-major matrix; `M x N` with `M >= N` throughout this crate.
#[derive(Debug, Clone)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * v[r];
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Full matrix of the symmetric circulant system `sum_l B_{l-p} x_l = d_p`:
/// entry `(p, l) = B_{(l-p) mod N}`.
pub fn circulant_matrix(first_row: &[f64]) -> Matrix {
    let n = first_row.len();
    let mut m = Matrix::zeros(n, n);
    for p in 0..n {
        for l in 0..n {
            m[(p, l)] = first_row[(l + n - p) % n];
        }
    }
    m
}

fn check_symmetric_first_row(first_row: &[f64]) -> Result<()> {
    let n = first_row.len();
    let scale = first_row.iter().map(|x| x.abs()).fold(0.0f64, f64::max).max(1e-300);
    for p in 1..n {
        if (first_row[p] - first_row[n - p]).abs() > 1e-12 * scale {
            return Err(Error::Domain(format!(
                "circulant first row is not symmetric at index {p}"
            )));
        }
    }
    Ok(())
}

/// Eigenvalues `N B^(m)` of the symmetric circulant matrix with the given
/// first row (real because the row is real and even).
pub fn circulant_eigenvalues(first_row: &[f64]) -> Result<Vec<f64>> {
    check_symmetric_first_row(first_row)?;
    let n = first_row.len() as f64;
    Ok(dft(first_row).into_iter().map(|z| n * z.re).collect())
}

#[derive(Debug, Clone)]
pub struct CirculantSolution {
    pub solution: Vec<f64>,
    /// DFT of the solution, `x^(m) = d^(m) / (N B^(m))`.
    pub spectrum: Vec<Complex64>,
    /// `||C x - d||_inf` against the assembled dense matrix.
    pub residual_inf: f64,
    pub condition_number: f64,
    /// Set when the condition number exceeds 1e15.
    pub ill_conditioned: bool,
}

/// Solve a symmetric circulant system by DFT diagonalization.
pub fn solve_circulant(first_row: &[f64], rhs: &[f64]) -> Result<CirculantSolution> {
    if first_row.len() != rhs.len() || first_row.is_empty() {
        return Err(Error::Domain("first row and rhs must have equal nonzero length".into()));
    }
    let eig = circulant_eigenvalues(first_row)?;
    let mut max_e = 0.0f64;
    let mut min_e = f64::INFINITY;
    for &e in &eig {
        max_e = max_e.max(e.abs());
        min_e = min_e.min(e.abs());
    }
    if min_e == 0.0 {
        return Err(Error::Singular("a circulant eigenvalue N B^(m) is exactly zero".into()));
    }
    let condition_number = max_e / min_e;
    let d_spec = dft(rhs);
    let spectrum: Vec<Complex64> = d_spec
        .iter()
        .zip(&eig)
        .map(|(d, &e)| d / e)
        .collect();
    let solution = idft(&spectrum)?;
    let matrix = circulant_matrix(first_row);
    let residual_inf = matrix
        .mul_vec(&solution)
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(CirculantSolution {
        solution,
        spectrum,
        residual_inf,
        condition_number,
        ill_conditioned: condition_number > 1e15,
    })
}

/// 2-norm condition number of the symmetric circulant matrix:
/// `max_m |N B^(m)| / min_m |N B^(m)|` (infinite when the minimum vanishes).
pub fn condition_number_circulant(first_row: &[f64]) -> Result<f64> {
    let eig = circulant_eigenvalues(first_row)?;
    let max_e = eig.iter().map(|e| e.abs()).fold(0.0f64, f64::max);
    let min_e = eig.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    Ok(if min_e == 0.0 { f64::INFINITY } else { max_e / min_e })
}

#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub solution: Vec<f64>,
    pub residual_inf: f64,
}

/// LU with partial pivoting for square systems.
pub fn solve_dense(a: &Matrix, b: &[f64]) -> Result<DenseSolution> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::Domain("solve_dense needs a square system".into()));
    }
    let mut lu = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].abs();
        for r in k + 1..n {
            if lu[(r, k)].abs() > best {
                best = lu[(r, k)].abs();
                piv = r;
            }
        }
        if best <= 1e-300 {
            return Err(Error::Singular(format!("zero pivot at elimination step {k}")));
        }
        if piv != k {
            for c in 0..n {
                let tmp = lu[(k, c)];
                lu[(k, c)] = lu[(piv, c)];
                lu[(piv, c)] = tmp;
            }
            x.swap(k, piv);
        }
        for r in k + 1..n {
            let f = lu[(r, k)] / lu[(k, k)];
            lu[(r, k)] = f;
            for c in k + 1..n {
                lu[(r, c)] -= f * lu[(k, c)];
            }
            x[r] -= f * x[k];
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for c in r + 1..n {
            s -= lu[(r, c)] * x[c];
        }
        x[r] = s / lu[(r, r)];
    }
    let residual_inf = a
        .mul_vec(&x)
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0f64, f64::max);
    Ok(DenseSolution { solution: x, residual_inf })
}

#[derive(Debug, Clone)]
pub struct LeastSquaresSolution {
    pub solution: Vec<f64>,
    /// `||A x - b||_2` of the minimizer.
    pub residual_norm: f64,
    /// Set when a diagonal factor entry fell below `1e-13` of the largest.
    pub rank_deficient: bool,
}

/// Householder-QR least squares for `M >= N`.
pub fn solve_least_squares(a: &Matrix, b: &[f64]) -> Result<LeastSquaresSolution> {
    let (m, n) = (a.rows(), a.cols());
    if m < n || b.len() != m {
        return Err(Error::Domain("least squares needs M >= N and matching rhs".into()));
    }
    let mut r = a.clone();
    let mut y = b.to_vec();
    for k in 0..n {
        // Householder vector for column k below the diagonal.
        let mut norm = 0.0f64;
        for i in k..m {
            norm += r[(i, k)] * r[(i, k)];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m - k];
        v[0] = r[(k, k)] - alpha;
        for i in k + 1..m {
            v[i - k] = r[(i, k)];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
        for c in k + 1..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * r[(i, c)]).sum();
            let f = 2.0 * dot / vtv;
            for i in k..m {
                r[(i, c)] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * y[i]).sum();
        let f = 2.0 * dot / vtv;
        for i in k..m {
            y[i] -= f * v[i - k];
        }
    }
    let max_diag = (0..n).map(|k| r[(k, k)].abs()).fold(0.0f64, f64::max);
    let rank_deficient = (0..n).any(|k| r[(k, k)].abs() < 1e-13 * max_diag);
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = y[k];
        for c in k + 1..n {
            s -= r[(k, c)] * x[c];
        }
        if r[(k, k)] == 0.0 {
            return Err(Error::Singular(format!("zero diagonal in QR factor at {k}")));
        }
        x[k] = s / r[(k, k)];
    }
    let residual_norm = a
        .mul_vec(&x)
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    Ok(LeastSquaresSolution { solution: x, residual_norm, rank_deficient })
}

/// Singular values by one-sided Jacobi, descending order. Keeps high
/// relative accuracy for tiny singular values, which the elliptic
/// bounded-scheme matrices need.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    app += w[(i, p)] * w[(i, p)];
                    aqq += w[(i, q)] * w[(i, q)];
                    apq += w[(i, p)] * w[(i, q)];
                }
                if apq.abs() <= eps * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let vp = w[(i, p)];
                    let vq = w[(i, q)];
                    w[(i, p)] = c * vp - s * vq;
                    w[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|c| (0..m).map(|i| w[(i, c)] * w[(i, c)]).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Ratio of extreme singular values.
pub fn condition_number_dense(a: &Matrix) -> f64 {
    let sv = singular_values(a);
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
