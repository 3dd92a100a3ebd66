//! Dense complex Hermitian linear algebra for small matrices.
//!
//! Everything downstream (thermal states, metric engines, distance oracles)
//! is built on three pieces: a square complex [`Matrix`], a validated
//! [`HermitianOperator`], and the Jacobi spectral decomposition in [`eig`].
//! Matrices here are tiny (qubit models are 2x2, the generic model tops out
//! around 8x8), so the solver is tuned for robustness, not speed.

use num_complex::Complex64;

use crate::{Error, Result};

/// Hermiticity tolerance for operator construction: absolute deviation of
/// `A - A^H` entries, matrices being O(1) in natural units.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Maximum number of cyclic Jacobi sweeps before reporting non-convergence.
const MAX_JACOBI_SWEEPS: usize = 64;

/// Square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds from row-major entries; `entries.len()` must equal `dim * dim`.
    pub fn from_vec(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        let expected = dim.checked_mul(dim);
        if dim == 0 || expected != Some(entries.len()) {
            return Err(Error::ShapeMismatch(dim, entries.len()));
        }
        Ok(Matrix { dim, data: entries })
    }

    /// Convenience constructor from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::from_vec(
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    fn check_same_dim(&self, other: &Matrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Matrix {
            dim: self.dim,
            data,
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            dim: self.dim,
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude (max norm).
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Matrix) -> Result<Matrix> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `(A + A^H) / 2`, exactly Hermitian by construction.
    pub fn hermitian_part(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            out.set(i, i, Complex64::new(self.get(i, i).re, 0.0));
            for j in (i + 1)..n {
                let v = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                out.set(i, j, v);
                out.set(j, i, v.conj());
            }
        }
        out
    }

    /// Inner product of column `col_a` of `self` with column `col_b` of
    /// `other`: `Σ_k conj(self[k, col_a]) · other[k, col_b]`.
    pub fn column_dot(&self, col_a: usize, other: &Matrix, col_b: usize) -> Complex64 {
        (0..self.dim)
            .map(|k| self.get(k, col_a).conj() * other.get(k, col_b))
            .sum()
    }

    fn max_hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            dev = dev.max(self.get(i, i).im.abs());
            for j in (i + 1)..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    fn first_non_finite(&self) -> Option<(usize, usize)> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = self.get(i, j);
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Validated Hermitian matrix. Construction checks finiteness and
/// `A == A^H` within [`HERMITICITY_TOL`], then stores the exactly
/// symmetrized `(A + A^H) / 2` so downstream spectral code never sees
/// residual asymmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: Matrix,
}

impl HermitianOperator {
    pub fn new(mat: Matrix) -> Result<Self> {
        if let Some((row, col)) = mat.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        let deviation = mat.max_hermitian_deviation();
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: HERMITICITY_TOL,
            });
        }
        Ok(HermitianOperator {
            mat: mat.hermitian_part(),
        })
    }

    /// For matrices Hermitian by construction (spectral sums, symmetrized
    /// differences); still symmetrizes but skips the tolerance check.
    pub(crate) fn from_trusted(mat: Matrix) -> Self {
        HermitianOperator {
            mat: mat.hermitian_part(),
        }
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_real(dim, entries)?)
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n);
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, Complex64::new(x, 0.0));
        }
        HermitianOperator { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.mat.get(row, col)
    }

    /// Trace of a Hermitian operator is real.
    pub fn trace_real(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator {
            mat: self.mat.add(&other.mat)?,
        })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator {
            mat: self.mat.sub(&other.mat)?,
        })
    }

    pub fn scale(&self, factor: f64) -> HermitianOperator {
        HermitianOperator {
            mat: self.mat.scale(factor),
        }
    }
}

/// Eigensystem of a Hermitian operator: ascending real eigenvalues and the
/// matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector columns, `k`-th column pairing with `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim())
            .map(|i| self.eigenvectors.get(i, k))
            .collect()
    }

    /// Spectral radius `max |λ_k|`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// Smallest gap between adjacent (ascending) eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ_k f(λ_k) |v_k⟩⟨v_k|` as a raw matrix.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.dim();
        let mut out = Matrix::zeros(n);
        for k in 0..n {
            let w = f(self.eigenvalues[k]);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.eigenvectors.get(i, k);
                for j in 0..n {
                    let vj = self.eigenvectors.get(j, k);
                    let v = out.get(i, j) + vi * vj.conj() * w;
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// `Σ_k λ_k |v_k⟩⟨v_k|`.
    pub fn reconstruct(&self) -> Matrix {
        self.apply_fn(|x| x)
    }

    /// `Σ_k w_k |v_k⟩⟨v_k|` with one weight per eigenvector column.
    pub fn weighted_sum(&self, weights: &[f64]) -> Result<Matrix> {
        if weights.len() != self.dim() {
            return Err(Error::ShapeMismatch(self.dim(), weights.len()));
        }
        let n = self.dim();
        let mut out = Matrix::zeros(n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.eigenvectors.get(i, k);
                for j in 0..n {
                    let vj = self.eigenvectors.get(j, k);
                    let v = out.get(i, j) + vi * vj.conj() * w;
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Represents `x` in this eigenbasis: `V^H x V`.
    pub fn to_eigenbasis(&self, x: &Matrix) -> Result<Matrix> {
        let vh = self.eigenvectors.adjoint();
        vh.mul(x)?.mul(&self.eigenvectors)
    }
}

/// Spectral decomposition of a Hermitian operator by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending; exact ties keep the order the diagonal
/// had before sorting, so the result is deterministic. Eigenvectors are
/// orthonormal to machine precision because the transform is a product of
/// exact unitary rotations.
pub fn eig(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    eig_named(a, "matrix")
}

/// Same as [`eig`] but names the matrix in the non-convergence error.
pub fn eig_named(a: &HermitianOperator, context: &str) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = Matrix::identity(n);

    let frob: f64 = m.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let off_tol = f64::EPSILON * frob.max(f64::MIN_POSITIVE);

    let off_norm = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += m.get(p, q).norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut converged = n <= 1;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_JACOBI_SWEEPS {
        if off_norm(&m) <= off_tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    if !converged {
        let residual = off_norm(&m);
        if residual > off_tol {
            return Err(Error::SolverFailure {
                context: context.to_string(),
                residual,
                sweeps,
            });
        }
    }

    let raw: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[i].partial_cmp(&raw[j]).expect("finite eigenvalues"));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let mut eigenvectors = Matrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors.set(row, new_col, v.get(row, old_col));
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// One two-sided rotation zeroing the (p, q) entry: `A <- U^H A U`,
/// `V <- V U`, with `U` the unitary Jacobi rotation in the (p, q) plane.
fn jacobi_rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = m.get(p, p).re;
    let aqq = m.get(q, q).re;

    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = m.dim();
    // Column update A <- A U.
    for k in 0..n {
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        m.set(k, p, akp * c - akq * s * phase.conj());
        m.set(k, q, akp * s * phase + akq * c);
    }
    // Row update A <- U^H A.
    for k in 0..n {
        let apk = m.get(p, k);
        let aqk = m.get(q, k);
        m.set(p, k, apk * c - aqk * s * phase);
        m.set(q, k, apk * s * phase.conj() + aqk * c);
    }
    // The rotation zeroes (p, q) analytically; pin it and keep the diagonal
    // exactly real against accumulated roundoff.
    m.set(p, q, Complex64::new(0.0, 0.0));
    m.set(q, p, Complex64::new(0.0, 0.0));
    m.set(p, p, Complex64::new(m.get(p, p).re, 0.0));
    m.set(q, q, Complex64::new(m.get(q, q).re, 0.0));

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * c - vkq * s * phase.conj());
        v.set(k, q, vkp * s * phase + vkq * c);
    }
}

/// `f(A) = Σ_k f(λ_k) |v_k⟩⟨v_k|` for real `f` on the spectrum of `A`.
///
/// Errors with the offending eigenvalue if `f` returns a non-finite value
/// there.
pub fn spectral_fn(a: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let spec = eig(a)?;
    for &lambda in spec.eigenvalues() {
        if !f(lambda).is_finite() {
            return Err(Error::SpectralDomain { eigenvalue: lambda });
        }
    }
    Ok(HermitianOperator::from_trusted(spec.apply_fn(f)))
}
