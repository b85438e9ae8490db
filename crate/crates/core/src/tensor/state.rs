use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::space::{RealState, Rotation};
use crate::ANALYTIC_TOL;

/// Two-clone output density matrix.
///
/// Element `(i*d + j, k*d + l)` holds `r_{ij,kl}`: clone 1 carries the major
/// index on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoCloneState {
    dim: usize,
    matrix: DMatrix<Complex64>,
}

impl TwoCloneState {
    pub fn new(dim: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        let n = dim * dim;
        Self {
            dim,
            matrix: DMatrix::zeros(n, n),
        }
    }

    pub fn from_real(dim: usize, matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(dim, matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// `r_{ij,kl}`.
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        let d = self.dim;
        self.matrix[(i * d + j, k * d + l)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Entrywise max of `|rho - rho^dagger|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Largest imaginary part of any entry.
    pub fn imaginary_residual(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.im.abs()))
    }

    /// Entrywise max of `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `S rho S` with `S` the clone-swap permutation `|i>|j> -> |j>|i>`.
    pub fn swapped(&self) -> Self {
        let d = self.dim;
        let n = d * d;
        let swap = |r: usize| (r % d) * d + r / d;
        let matrix = DMatrix::from_fn(n, n, |r, c| self.matrix[(swap(r), swap(c))]);
        Self { dim: d, matrix }
    }

    /// `(R (x) R) rho (R (x) R)^T`, evaluated index by index.
    pub fn rotated(&self, r: &Rotation) -> Result<Self> {
        let d = self.dim;
        if r.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.dim(),
            });
        }
        let n = d * d;
        let rm = r.matrix();
        // flat tensor t[((i*d + j)*d + k)*d + l]
        let mut t: Vec<Complex64> = (0..n * n)
            .map(|idx| self.matrix[(idx / n, idx % n)])
            .collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); t.len()];
        for axis in 0..4 {
            let stride = d.pow(3 - axis as u32);
            for (idx, out) in scratch.iter_mut().enumerate() {
                let x = (idx / stride) % d;
                let base = idx - x * stride;
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..d {
                    acc += t[base + y * stride] * rm[(x, y)];
                }
                *out = acc;
            }
            std::mem::swap(&mut t, &mut scratch);
        }
        let matrix = DMatrix::from_fn(n, n, |row, col| t[row * n + col]);
        Ok(Self { dim: d, matrix })
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn clone_marginal(&self, which: Which) -> CloneMarginal {
        let d = self.dim;
        let matrix = DMatrix::from_fn(d, d, |a, b| {
            (0..d)
                .map(|s| match which {
                    // trace out clone 2: sum_j r_{aj,bj}
                    Which::First => self.entry(a, s, b, s),
                    Which::Second => self.entry(s, a, s, b),
                })
                .sum()
        });
        CloneMarginal { dim: d, matrix }
    }

    /// `F = n_i n_k r_{ij,kj}`.
    pub fn fidelity(&self, n: &RealState) -> Result<f64> {
        let d = self.dim;
        if n.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: n.dim(),
            });
        }
        let a = n.as_slice();
        let mut f = 0.0;
        for i in 0..d {
            for k in 0..d {
                let w = a[i] * a[k];
                if w == 0.0 {
                    continue;
                }
                for j in 0..d {
                    f += w * self.entry(i, j, k, j).re;
                }
            }
        }
        Ok(f)
    }
}

impl std::ops::Add for TwoCloneState {
    type Output = TwoCloneState;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            matrix: self.matrix + rhs.matrix,
        }
    }
}

/// Selects one of the two output clones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    First,
    Second,
}

/// Reduced density matrix of one clone.
#[derive(Debug, Clone)]
pub struct CloneMarginal {
    dim: usize,
    matrix: DMatrix<Complex64>,
}

impl CloneMarginal {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// True when the trace deviates from 1 by more than [`ANALYTIC_TOL`].
    pub fn trace_flagged(&self) -> bool {
        (self.trace() - 1.0).abs() > ANALYTIC_TOL
    }

    pub fn expectation(&self, n: &RealState) -> f64 {
        let a = n.as_slice();
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            for k in 0..d {
                acc += a[i] * a[k] * self.matrix[(i, k)].re;
            }
        }
        acc
    }

    /// Entrywise distance to the isotropic shrunk form
    /// `F |n><n| + (1 - F)/(d - 1) (1 - |n><n|)`.
    pub fn shrunk_form_residual(&self, n: &RealState, fidelity: f64) -> f64 {
        let closed = shrunk_marginal(n, fidelity);
        self.matrix
            .iter()
            .zip(closed.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - Complex64::new(*b, 0.0)).norm()))
    }
}

/// `[(d F - 1) n n^T + (1 - F) I] / (d - 1)`.
pub fn shrunk_marginal(n: &RealState, fidelity: f64) -> DMatrix<f64> {
    let d = n.dim();
    let a = n.amplitudes();
    let scale = 1.0 / (d as f64 - 1.0);
    (a * a.transpose() * (d as f64 * fidelity - 1.0)
        + DMatrix::<f64>::identity(d, d) * (1.0 - fidelity))
        * scale
}
