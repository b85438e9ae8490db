//! Positivity, trace preservation, no-signaling, covariance and clone-swap
//! symmetry, checked both on matrices and on parameters.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::space::{random_basis_using, random_rotation_using, random_state_using, rotate_state, RealState};
use crate::tensor::{
    fit_kappa, rho_from_kappa, rho_from_spectral_canonical, KappaParams, SpectralBasis,
    SpectralParams, TableOne, TwoCloneState,
};
use crate::{ANALYTIC_TOL, EIG_TOL, PSD_TOL, SPECTRAL_PSD_TOL};

/// An input-to-output map `n -> rho(n)` of a cloner.
pub trait OutputMap: Sync {
    fn dim(&self) -> usize;

    fn output(&self, n: &RealState) -> TwoCloneState;
}

#[derive(Debug, Clone, Copy)]
pub struct KappaMap {
    pub kappa: KappaParams,
    pub dim: usize,
}

impl OutputMap for KappaMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn output(&self, n: &RealState) -> TwoCloneState {
        rho_from_kappa(&self.kappa, n)
    }
}

/// Spectral tensor evaluated with the canonical frame of each input.
#[derive(Clone)]
pub struct SpectralMap {
    pub basis: Arc<dyn SpectralBasis>,
    pub params: SpectralParams,
    pub dim: usize,
}

impl OutputMap for SpectralMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn output(&self, n: &RealState) -> TwoCloneState {
        // swap constraint is not enforced here so that violations can be reported
        crate::tensor::assemble_spectral(
            self.basis.as_ref(),
            &self.params,
            &crate::space::canonical_frame(n),
        )
    }
}

/// Wraps any closure as an [`OutputMap`].
pub struct FnMap<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> OutputMap for FnMap<F>
where
    F: Fn(&RealState) -> TwoCloneState + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn output(&self, n: &RealState) -> TwoCloneState {
        (self.f)(n)
    }
}

/// A pass/fail verdict with the number that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub value: f64,
}

impl Check {
    fn at_most(value: f64, tolerance: f64) -> Self {
        Self {
            passed: value <= tolerance,
            value,
        }
    }
}

pub fn check_positivity(rho: &TwoCloneState) -> Result<Check> {
    let residual = rho.hermitian_residual();
    if residual > EIG_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let min = rho.eigenvalues().first().copied().unwrap_or(0.0);
    Ok(Check {
        passed: min >= PSD_TOL,
        value: min,
    })
}

/// Positivity on the spectral path: every `lambda >= -1e-12`.
///
/// Exact for the orthonormal basis, where the lambdas are the eigenvalues.
/// For the tabulated families the assembled matrix is a non-negative
/// combination of rank-one projectors whenever this passes, so it is a
/// sufficient condition there.
pub fn check_positivity_spectral(s: &SpectralParams) -> Check {
    let min = s.min_lambda();
    Check {
        passed: min >= SPECTRAL_PSD_TOL,
        value: min,
    }
}

pub fn check_trace(rho: &TwoCloneState) -> Check {
    let trace = rho.trace().re;
    Check {
        passed: (trace - 1.0).abs() <= EIG_TOL,
        value: trace,
    }
}

/// `d(d-1)/2 lambda_A + lambda_B + (d-1)(lambda_C + lambda_D) + (d-1)(d-2)/2 lambda_E`.
pub fn check_trace_spectral(s: &SpectralParams, d: usize) -> Check {
    let trace = s.trace(d);
    Check {
        passed: (trace - 1.0).abs() <= EIG_TOL,
        value: trace,
    }
}

/// `S rho S = rho` to [`EIG_TOL`].
pub fn check_swap_symmetry(rho: &TwoCloneState) -> Check {
    Check::at_most(rho.swapped().max_abs_diff(rho), EIG_TOL)
}

/// Left minus right side of the spectral no-signaling condition in the
/// tabulated convention.
pub fn no_signaling_spectral_residual(s: &SpectralParams, d: usize) -> f64 {
    TableOne.no_signaling_residual(s, d)
}

/// Worst entrywise difference between the outputs of two basis mixtures,
/// over `trials` random basis pairs.
pub fn no_signaling_deviation(map: &dyn OutputMap, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let d = map.dim();
    let stream = Stream::new(seed, "no-signaling");
    let worst = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream.child(t).rng();
            let first = random_basis_using(d, &mut rng);
            let second = random_basis_using(d, &mut rng);
            let mixture = |basis: &crate::space::RealBasis| {
                basis
                    .states()
                    .iter()
                    .map(|n| map.output(n))
                    .reduce(|a, b| a + b)
                    .expect("a basis has d >= 2 states")
            };
            mixture(&first).max_abs_diff(&mixture(&second))
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoSignalingCheck {
    /// Both tests passed.
    pub passed: bool,
    /// `|k7| <= ANALYTIC_TOL`.
    pub algebraic: bool,
    /// Basis-mixture deviation `<= EIG_TOL`.
    pub operational: bool,
    pub k7: f64,
    pub max_deviation: f64,
    /// Residual of the κ fit that produced `k7` (zero for κ input).
    pub kappa_fit_residual: f64,
}

impl NoSignalingCheck {
    pub fn agree(&self) -> bool {
        self.algebraic == self.operational
    }

    fn new(k7: f64, max_deviation: f64, kappa_fit_residual: f64) -> Self {
        let algebraic = k7.abs() <= ANALYTIC_TOL && kappa_fit_residual <= EIG_TOL;
        let operational = max_deviation <= EIG_TOL;
        Self {
            passed: algebraic && operational,
            algebraic,
            operational,
            k7,
            max_deviation,
            kappa_fit_residual,
        }
    }
}

pub fn check_no_signaling(
    kappa: &KappaParams,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<NoSignalingCheck> {
    let map = KappaMap { kappa: *kappa, dim: d };
    let deviation = no_signaling_deviation(&map, trials, seed)?;
    Ok(NoSignalingCheck::new(kappa.k7(), deviation, 0.0))
}

/// No-signaling for an arbitrary map; `k7` comes from a κ fit of the real
/// part of the output at `e_0`.
pub fn check_no_signaling_map(map: &dyn OutputMap, trials: usize, seed: u64) -> Result<NoSignalingCheck> {
    let d = map.dim();
    let fit = fit_kappa(&map.output(&RealState::basis(d, 0)?));
    let deviation = no_signaling_deviation(map, trials, seed)?;
    Ok(NoSignalingCheck::new(fit.kappa.k7(), deviation, fit.residual))
}

/// Worst entrywise violation of `rho(R n) = (R (x) R) rho(n) (R (x) R)^T` over
/// `trials` random `(R, n)` pairs.
pub fn covariance_residual(map: &dyn OutputMap, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let d = map.dim();
    let stream = Stream::new(seed, "covariance");
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream.child(t).rng();
            let n = random_state_using(d, &mut rng);
            let r = random_rotation_using(d, &mut rng);
            let lhs = map.output(&rotate_state(&r, &n)?);
            let rhs = map.output(&n).rotated(&r)?;
            Ok(lhs.max_abs_diff(&rhs))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

pub fn check_covariance(kappa: &KappaParams, d: usize, trials: usize, seed: u64) -> Result<Check> {
    let map = KappaMap { kappa: *kappa, dim: d };
    Ok(Check::at_most(covariance_residual(&map, trials, seed)?, EIG_TOL))
}

pub fn check_covariance_map(map: &dyn OutputMap, trials: usize, seed: u64) -> Result<Check> {
    Ok(Check::at_most(covariance_residual(map, trials, seed)?, EIG_TOL))
}

/// All constraints for one cloner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintReport {
    /// Minimum eigenvalue of `rho(n)` for a random `n`.
    pub positive: Check,
    pub unit_trace: Check,
    pub no_signaling: NoSignalingCheck,
    pub covariant: Check,
    pub swap_symmetric: Check,
}

impl ConstraintReport {
    pub fn evaluate(map: &dyn OutputMap, trials: usize, seed: u64) -> Result<Self> {
        let d = map.dim();
        let mut rng = Stream::new(seed, "report-state").rng();
        let rho = map.output(&random_state_using(d, &mut rng));
        Ok(Self {
            positive: check_positivity(&rho)?,
            unit_trace: check_trace(&rho),
            no_signaling: check_no_signaling_map(map, trials, seed)?,
            covariant: check_covariance_map(map, trials, seed)?,
            swap_symmetric: check_swap_symmetry(&rho),
        })
    }

    pub fn for_kappa(kappa: &KappaParams, d: usize, trials: usize, seed: u64) -> Result<Self> {
        Self::evaluate(&KappaMap { kappa: *kappa, dim: d }, trials, seed)
    }

    pub fn for_spectral(
        basis: Arc<dyn SpectralBasis>,
        s: &SpectralParams,
        d: usize,
        trials: usize,
        seed: u64,
    ) -> Result<Self> {
        let map = SpectralMap {
            basis,
            params: *s,
            dim: d,
        };
        Self::evaluate(&map, trials, seed)
    }

    pub fn all_passed(&self) -> bool {
        self.positive.passed
            && self.unit_trace.passed
            && self.no_signaling.passed
            && self.covariant.passed
            && self.swap_symmetric.passed
    }
}

/// Spectral tensor at `n` using the canonical frame, for callers that want
/// the swap constraint enforced.
pub fn spectral_output(
    basis: &dyn SpectralBasis,
    s: &SpectralParams,
    n: &RealState,
) -> Result<TwoCloneState> {
    rho_from_spectral_canonical(basis, s, n)
}
