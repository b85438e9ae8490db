//! The explicit cloner
//!
//! ```text
//! |n> -> sum_{ijk} (A n_i d_jk + A n_j d_ik + C n_k d_ij) |i>_1 |j>_2 |k>_anc
//! ```
//!
//! with real `A`, `C` and `2(d+1) A^2 + d C^2 + 4 A C = 1`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::constraints::OutputMap;
use crate::error::{check_dim, Error, Result};
use crate::space::{RealState, Rotation};
use crate::tensor::{fit_kappa, KappaFit, KappaParams, TwoCloneState};
use crate::{ANALYTIC_TOL, EIG_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClonerCoefficients {
    pub d: usize,
    pub a: f64,
    pub c: f64,
}

/// `2(d+1) A^2 + d C^2 + 4 A C`.
pub fn normalization(d: usize, a: f64, c: f64) -> f64 {
    let d = d as f64;
    2.0 * (d + 1.0) * a * a + d * c * c + 4.0 * a * c
}

impl ClonerCoefficients {
    pub fn new(d: usize, a: f64, c: f64) -> Result<Self> {
        check_dim(d, usize::MAX)?;
        let norm = normalization(d, a, c);
        if (norm - 1.0).abs() > ANALYTIC_TOL {
            return Err(Error::NotNormalized { norm: norm.sqrt() });
        }
        Ok(Self { d, a, c })
    }

    pub fn normalization(&self) -> f64 {
        normalization(self.d, self.a, self.c)
    }

    /// The κ form of the output, read off term by term:
    /// `k3 = C^2`, `k4 = k5 = A^2`, `k6 = 2 A C`, all others zero.
    pub fn kappa(&self) -> KappaParams {
        let (a, c) = (self.a, self.c);
        KappaParams::new([0.0, 0.0, c * c, a * a, a * a, 2.0 * a * c, 0.0])
    }
}

pub fn optimal_real_coefficients(d: usize) -> Result<ClonerCoefficients> {
    check_dim(d, usize::MAX)?;
    let df = d as f64;
    let root = (df * df + 4.0 * df + 20.0).sqrt();
    let a = ((df * root + 2.0 * df + df * df - 8.0) / (4.0 * (df - 1.0) * (df + 2.0) * root)).sqrt();
    let c = (root - df - 2.0) / 4.0 * a;
    Ok(ClonerCoefficients { d, a, c })
}

pub fn universal_coefficients(d: usize) -> Result<ClonerCoefficients> {
    check_dim(d, usize::MAX)?;
    Ok(ClonerCoefficients {
        d,
        a: 1.0 / (2.0 * (d as f64 + 1.0)).sqrt(),
        c: 0.0,
    })
}

/// `(d+3) A^2 + C^2 + 4 A C`.
pub fn clone_fidelity(c: &ClonerCoefficients) -> f64 {
    (c.d as f64 + 3.0) * c.a * c.a + c.c * c.c + 4.0 * c.a * c.c
}

/// Output of the cloner, amplitude `(i, j, k)` at `(i d + j) d + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteState {
    dim: usize,
    amplitudes: DVector<f64>,
}

impl TripartiteState {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &DVector<f64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim;
        self.amplitudes[(i * d + j) * d + k]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Exchanges the two clone indices.
    pub fn swapped(&self) -> Self {
        let d = self.dim;
        let amplitudes = DVector::from_fn(d * d * d, |p, _| {
            let (i, j, k) = (p / (d * d), (p / d) % d, p % d);
            self.amplitude(j, i, k)
        });
        Self { dim: d, amplitudes }
    }

    /// `(R (x) R (x) R) psi`.
    pub fn rotated(&self, r: &Rotation) -> Result<Self> {
        let d = self.dim;
        if r.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.dim(),
            });
        }
        let m = r.matrix();
        // contract one axis at a time: psi[a, b, c] -> sum_x R[a', x] psi[x, b, c]
        let mut cur = self.amplitudes.as_slice().to_vec();
        for axis in 0..3 {
            let stride = d.pow(2 - axis as u32);
            let mut next = vec![0.0; cur.len()];
            for (p, out) in next.iter_mut().enumerate() {
                let idx = (p / stride) % d;
                let base = p - idx * stride;
                *out = (0..d).map(|x| m[(idx, x)] * cur[base + x * stride]).sum();
            }
            cur = next;
        }
        Ok(Self {
            dim: d,
            amplitudes: DVector::from_vec(cur),
        })
    }

    /// Reduced state of the two clones, `Tr_anc |psi><psi|`.
    pub fn two_clone_density(&self) -> TwoCloneState {
        let d = self.dim;
        let m = DMatrix::from_row_slice(d * d, d, self.amplitudes.as_slice());
        TwoCloneState::from_real(d, &m * m.transpose()).expect("shape is d^2 x d^2 by construction")
    }
}

pub fn clone(n: &RealState, c: &ClonerCoefficients) -> Result<TripartiteState> {
    let d = c.d;
    if n.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: n.dim(),
        });
    }
    let v = n.as_slice();
    let delta = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
    let amplitudes = DVector::from_fn(d * d * d, |p, _| {
        let (i, j, k) = (p / (d * d), (p / d) % d, p % d);
        c.a * v[i] * delta(j, k) + c.a * v[j] * delta(i, k) + c.c * v[k] * delta(i, j)
    });
    Ok(TripartiteState { dim: d, amplitudes })
}

pub fn two_clone_density(n: &RealState, c: &ClonerCoefficients) -> Result<TwoCloneState> {
    Ok(clone(n, c)?.two_clone_density())
}

/// Fits the κ form to the output at `e_0`; errors if the fit does not
/// reproduce the matrix to [`EIG_TOL`].
pub fn extract_kappa(c: &ClonerCoefficients) -> Result<KappaFit> {
    let rho = two_clone_density(&RealState::basis(c.d, 0)?, c)?;
    let fit = fit_kappa(&rho);
    let residual = fit.residual.max(fit.imaginary);
    if residual > EIG_TOL {
        return Err(Error::KappaFit {
            residual,
            tolerance: EIG_TOL,
        });
    }
    Ok(fit)
}

/// The cloner as an input-to-output map.
#[derive(Debug, Clone, Copy)]
pub struct CloneMap(pub ClonerCoefficients);

impl OutputMap for CloneMap {
    fn dim(&self) -> usize {
        self.0.d
    }

    fn output(&self, n: &RealState) -> TwoCloneState {
        two_clone_density(n, &self.0).expect("input dimension checked by caller")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::{real_bound_value, universal_bound_value};
    use crate::constraints::{check_no_signaling, ConstraintReport};
    use crate::space::{random_rotation, random_state, rotate_state};
    use crate::tensor::{rho_from_kappa, shrunk_marginal, Which};
    use std::f64::consts::SQRT_2;

    #[test]
    fn optimal_coefficients_in_two_dimensions() {
        let c = optimal_real_coefficients(2).unwrap();
        assert!((c.a - 1.0 / (2.0 * SQRT_2)).abs() < 1e-15);
        assert!((c.a - 0.3535533906).abs() < 1e-9);
        assert!((c.c - (SQRT_2 - 1.0) * c.a).abs() < 1e-15);
        assert!((c.c - 0.1464466094).abs() < 1e-9);
        let norm = 6.0 * c.a * c.a + 2.0 * c.c * c.c + 4.0 * c.a * c.c;
        assert!((norm - 1.0).abs() < 1e-15);
        assert!((clone_fidelity(&c) - 0.8535533906).abs() < 1e-9);
    }

    #[test]
    fn universal_coefficients_values() {
        let c = universal_coefficients(2).unwrap();
        assert!((c.a - 0.4082482905).abs() < 1e-9);
        assert!((clone_fidelity(&c) - 5.0 / 6.0).abs() < 1e-15);
        for d in 2..=32 {
            let c = universal_coefficients(d).unwrap();
            assert!((c.normalization() - 1.0).abs() < 1e-15);
            let want = (d as f64 + 3.0) / (2.0 * (d as f64 + 1.0));
            assert!((clone_fidelity(&c) - want).abs() < 1e-15);
            assert!((clone_fidelity(&c) - universal_bound_value(d)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_small_dimension_and_bad_normalization() {
        assert!(optimal_real_coefficients(1).is_err());
        assert!(universal_coefficients(0).is_err());
        assert!(matches!(
            ClonerCoefficients::new(2, 1.0, 0.0),
            Err(Error::NotNormalized { .. })
        ));
        let c = optimal_real_coefficients(5).unwrap();
        assert!(ClonerCoefficients::new(5, c.a, c.c).is_ok());
    }

    #[test]
    fn saturates_real_bound() {
        for d in 2..=32 {
            let c = optimal_real_coefficients(d).unwrap();
            assert!((c.normalization() - 1.0).abs() < 1e-12, "d = {d}");
            assert!(c.a > 0.0 && c.c > 0.0);
            assert!((clone_fidelity(&c) - real_bound_value(d)).abs() < 1e-9, "d = {d}");
            assert!((clone_fidelity(&c) - real_bound_value(d)).abs() < 1e-13, "d = {d}");
        }
    }

    /// Maximizes the fidelity/normalization ratio over `x = C / A` by a grid
    /// scan followed by golden-section refinement.
    fn ratio_search(d: usize) -> (f64, f64) {
        let df = d as f64;
        let ratio = |x: f64| ((df + 3.0) + x * x + 4.0 * x) / (2.0 * (df + 1.0) + df * x * x + 4.0 * x);
        let (lo, hi, steps) = (-10.0, 10.0, 20_000);
        let h = (hi - lo) / steps as f64;
        let best = (0..=steps)
            .map(|k| lo + h * k as f64)
            .max_by(|a, b| ratio(*a).total_cmp(&ratio(*b)))
            .unwrap();
        let (mut a, mut b) = (best - h, best + h);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-14 {
            let x1 = b - g * (b - a);
            let x2 = a + g * (b - a);
            if ratio(x1) < ratio(x2) {
                a = x1;
            } else {
                b = x2;
            }
        }
        let x = (a + b) / 2.0;
        let amp = 1.0 / normalization(d, 1.0, x).sqrt();
        (amp, x * amp)
    }

    #[test]
    fn closed_form_coefficients_match_ratio_search() {
        for d in 2..=32 {
            let (a, c) = ratio_search(d);
            let want = optimal_real_coefficients(d).unwrap();
            assert!((a - want.a).abs() < 1e-8, "d = {d}: {a} vs {}", want.a);
            assert!((c - want.c).abs() < 1e-8, "d = {d}: {c} vs {}", want.c);
        }
    }

    #[test]
    fn output_is_normalized_and_swap_symmetric() {
        for d in [2, 3, 4, 7] {
            for seed in 0..10 {
                let n = random_state(d, seed).unwrap();
                for c in [optimal_real_coefficients(d).unwrap(), universal_coefficients(d).unwrap()] {
                    let psi = clone(&n, &c).unwrap();
                    assert!((psi.norm() - 1.0).abs() < 1e-9);
                    assert!((&psi.swapped().amplitudes - &psi.amplitudes).amax() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn universal_support_in_two_dimensions() {
        let c = universal_coefficients(2).unwrap();
        let psi = clone(&RealState::basis(2, 0).unwrap(), &c).unwrap();
        let support: Vec<(usize, usize, usize)> = (0..8)
            .map(|p| (p / 4, (p / 2) % 2, p % 2))
            .filter(|&(i, j, k)| psi.amplitude(i, j, k) != 0.0)
            .collect();
        assert_eq!(support, vec![(0, 0, 0), (0, 1, 1), (1, 0, 1)]);
        assert!((psi.amplitude(0, 0, 0) - 2.0 * c.a).abs() < 1e-15);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let c = universal_coefficients(3).unwrap();
        let n = random_state(2, 0).unwrap();
        assert!(matches!(clone(&n, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn covariant_output_state() {
        for d in [2, 3, 4, 5] {
            let c = optimal_real_coefficients(d).unwrap();
            for seed in 0..10 {
                let n = random_state(d, seed).unwrap();
                let r = random_rotation(d, seed + 50).unwrap();
                let lhs = clone(&rotate_state(&r, &n).unwrap(), &c).unwrap();
                let rhs = clone(&n, &c).unwrap().rotated(&r).unwrap();
                assert!((lhs.amplitudes() - rhs.amplitudes()).amax() < 1e-9);
            }
        }
    }

    #[test]
    fn fidelity_from_density_is_state_independent() {
        for d in [2, 3, 4, 5] {
            let c = optimal_real_coefficients(d).unwrap();
            for seed in 0..100 {
                let n = random_state(d, seed).unwrap();
                let rho = two_clone_density(&n, &c).unwrap();
                let f = rho.fidelity(&n).unwrap();
                assert!((f - clone_fidelity(&c)).abs() < 1e-9);
                assert!((rho.trace().re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginal_has_shrunk_form() {
        for d in [2, 3, 6] {
            let c = optimal_real_coefficients(d).unwrap();
            let n = random_state(d, 11).unwrap();
            let rho = two_clone_density(&n, &c).unwrap();
            let f = clone_fidelity(&c);
            for which in [Which::First, Which::Second] {
                let marginal = rho.clone_marginal(which);
                assert!(marginal.shrunk_form_residual(&n, f) < 1e-8);
                let want = shrunk_marginal(&n, f);
                let diff = marginal.matrix().map(|z| z.re) - want;
                assert!(diff.amax() < 1e-12);
            }
        }
    }

    #[test]
    fn kappa_matches_closed_form() {
        for d in [3, 4, 5] {
            for c in [optimal_real_coefficients(d).unwrap(), universal_coefficients(d).unwrap()] {
                let fit = extract_kappa(&c).unwrap();
                assert!(fit.residual < 1e-12);
                for (a, b) in fit.kappa.kappa.iter().zip(c.kappa().kappa.iter()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
        // d = 2: only the map is identifiable
        for c in [optimal_real_coefficients(2).unwrap(), universal_coefficients(2).unwrap()] {
            let fit = extract_kappa(&c).unwrap();
            let n = random_state(2, 3).unwrap();
            let diff = rho_from_kappa(&fit.kappa, &n).max_abs_diff(&two_clone_density(&n, &c).unwrap());
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn fitted_kappa_is_no_signaling() {
        for d in 2..=8 {
            for c in [optimal_real_coefficients(d).unwrap(), universal_coefficients(d).unwrap()] {
                let fit = extract_kappa(&c).unwrap();
                assert!(fit.residual < 1e-8);
                assert!(fit.kappa.k7().abs() < 1e-9);
                let check = check_no_signaling(&fit.kappa, d, 20, d as u64).unwrap();
                assert!(check.passed && check.agree());
            }
            let universal = extract_kappa(&universal_coefficients(d).unwrap()).unwrap().kappa;
            assert!(universal.get(3).abs() < 1e-9 && universal.get(6).abs() < 1e-9);
        }
    }

    #[test]
    fn output_passes_all_constraints() {
        for d in [2, 3, 4] {
            let map = CloneMap(optimal_real_coefficients(d).unwrap());
            let report = ConstraintReport::evaluate(&map, 20, 5).unwrap();
            assert!(report.all_passed(), "d = {d}: {report:?}");
        }
    }
}
