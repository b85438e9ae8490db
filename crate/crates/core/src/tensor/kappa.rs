//! The seven-coefficient form of a rotation-covariant, clone-symmetric
//! output tensor:
//!
//! ```text
//! r_{ij,kl}(n) = k1 d_ik d_jl + k2 d_il d_jk + k3 d_ij d_kl
//!              + k4 (n_i n_k d_jl + n_j n_l d_ik)
//!              + k5 (n_i n_l d_jk + n_j n_k d_il)
//!              + k6 (n_i n_j d_kl + n_k n_l d_ij)
//!              + k7 n_i n_j n_k n_l
//! ```

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::state::TwoCloneState;
use crate::error::{Error, Result};
use crate::space::RealState;
use crate::EIG_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaParams {
    pub kappa: [f64; 7],
}

impl KappaParams {
    pub fn new(kappa: [f64; 7]) -> Self {
        Self { kappa }
    }

    pub fn zero() -> Self {
        Self { kappa: [0.0; 7] }
    }

    /// Coefficient `k_index` with the one-based numbering used above.
    pub fn get(&self, index: usize) -> f64 {
        self.kappa[index - 1]
    }

    /// The quartic "perfect cloning" coefficient.
    pub fn k7(&self) -> f64 {
        self.kappa[6]
    }

    /// Only the identity term: `r = I / d^2`.
    pub fn maximally_mixed(d: usize) -> Self {
        let mut kappa = [0.0; 7];
        kappa[0] = 1.0 / (d * d) as f64;
        Self { kappa }
    }

    /// Only the quartic term: the projector onto `n (x) n`.
    pub fn perfect_cloner() -> Self {
        let mut kappa = [0.0; 7];
        kappa[6] = 1.0;
        Self { kappa }
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Value of tensor structure `index` (1..=7) at `(i, j, k, l)`.
pub fn structure(index: usize, n: &[f64], i: usize, j: usize, k: usize, l: usize) -> f64 {
    match index {
        1 => delta(i, k) * delta(j, l),
        2 => delta(i, l) * delta(j, k),
        3 => delta(i, j) * delta(k, l),
        4 => n[i] * n[k] * delta(j, l) + n[j] * n[l] * delta(i, k),
        5 => n[i] * n[l] * delta(j, k) + n[j] * n[k] * delta(i, l),
        6 => n[i] * n[j] * delta(k, l) + n[k] * n[l] * delta(i, j),
        7 => n[i] * n[j] * n[k] * n[l],
        _ => panic!("tensor structure index {index} out of range 1..=7"),
    }
}

pub fn rho_from_kappa(kappa: &KappaParams, n: &RealState) -> TwoCloneState {
    let d = n.dim();
    let a = n.as_slice();
    let dd = d * d;
    let real = DMatrix::from_fn(dd, dd, |row, col| {
        let (i, j, k, l) = (row / d, row % d, col / d, col % d);
        (1..=7)
            .map(|s| kappa.kappa[s - 1] * structure(s, a, i, j, k, l))
            .sum()
    });
    TwoCloneState::from_real(d, real).expect("shape is d^2 x d^2 by construction")
}

/// Result of fitting the seven structures to a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaFit {
    pub kappa: KappaParams,
    /// Entrywise max of `|rho_from_kappa(kappa, e_0) - Re rho|` over the full matrix.
    pub residual: f64,
    /// Largest imaginary part of `rho`. The real part of any covariant
    /// Hermitian tensor has the κ form; the imaginary part never does.
    pub imaginary: f64,
}

/// Least-squares fit of the seven structures to `rho`, assumed to be the
/// output for input `e_0`.
///
/// The probes are all entries with indices in `{0, 1, 2}` (`{0, 1}` for
/// `d = 2`). For `d >= 3` the structures are independent there and the fit is
/// unique. For `d = 2` they span only five dimensions; the gauge `k2 = k3 = 0`
/// picks the representative, and `k7` is the same in every representative.
pub fn fit_kappa(rho: &TwoCloneState) -> KappaFit {
    let d = rho.dim();
    let e0 = RealState::basis(d, 0).expect("d >= 2");
    let a = e0.as_slice();
    let span = d.min(3);

    let mut rows: Vec<[f64; 7]> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for p in 0..span.pow(4) {
        let (i, j, k, l) = (p / span.pow(3), (p / span.pow(2)) % span, (p / span) % span, p % span);
        let mut row = [0.0; 7];
        for (s, slot) in row.iter_mut().enumerate() {
            *slot = structure(s + 1, a, i, j, k, l);
        }
        rows.push(row);
        rhs.push(rho.entry(i, j, k, l).re);
    }
    if d == 2 {
        for gauge in [1usize, 2] {
            let mut row = [0.0; 7];
            row[gauge] = 1.0;
            rows.push(row);
            rhs.push(0.0);
        }
    }

    let design = DMatrix::from_fn(rows.len(), 7, |r, c| rows[r][c]);
    let b = DVector::from_vec(rhs);
    let solution = design
        .svd(true, true)
        .solve(&b, 1e-12)
        .expect("SVD was computed with both factors");
    let mut kappa = [0.0; 7];
    kappa.copy_from_slice(solution.as_slice());
    let kappa = KappaParams { kappa };

    let rebuilt = rho_from_kappa(&kappa, &e0);
    let residual = rebuilt
        .matrix()
        .iter()
        .zip(rho.matrix().iter())
        .fold(0.0f64, |m, (a, b)| m.max((a.re - b.re).abs()));
    KappaFit {
        kappa,
        residual,
        imaginary: rho.imaginary_residual(),
    }
}

/// [`fit_kappa`] with the full complex residual required to be below [`EIG_TOL`].
pub fn fit_kappa_checked(rho: &TwoCloneState) -> Result<KappaParams> {
    let fit = fit_kappa(rho);
    let residual = fit.residual.max(fit.imaginary);
    if residual > EIG_TOL {
        return Err(Error::KappaFit {
            residual,
            tolerance: EIG_TOL,
        });
    }
    Ok(fit.kappa)
}
