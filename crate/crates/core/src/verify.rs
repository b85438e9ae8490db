//! Randomized property suite, one named check per property.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{real_bound_value, universal_bound_value};
use crate::cloner::{clone_fidelity, optimal_real_coefficients, two_clone_density, universal_coefficients};
use crate::constraints::{check_no_signaling, check_positivity};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::space::{canonical_frame, random_rotation_using, random_state_using, rotate_state, RealState};
use crate::tensor::{
    assemble_spectral, kappa_from_spectral, random_spectral_using, rho_from_kappa, KappaParams, Orthonormal,
    SpectralParams, Which,
};
use crate::{ANALYTIC_TOL, EIG_TOL, PSD_TOL};

/// Deliberate corruption for exercising failure paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// Replaces `lambda_B` by a negative value in spectral draws.
    NegativeLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub d: usize,
    pub passed: bool,
    /// Worst residual over all trials. For positivity this is the smallest
    /// eigenvalue seen, compared from below.
    pub worst: f64,
    pub tolerance: f64,
    pub trials: usize,
}

pub trait VerifyCheck: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn tolerance(&self) -> f64;

    /// Residual of one trial, drawing from `rng`.
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, fault: Fault) -> Result<f64>;

    /// True when larger residuals are better (lower-bound checks).
    fn lower_bound(&self) -> bool {
        false
    }

    fn run(&self, d: usize, trials: usize, seed: u64, fault: Fault) -> Result<CheckOutcome> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        let stream = Stream::new(seed, self.name()).child(d as u64);
        let values: Vec<f64> = (0..trials as u64)
            .into_par_iter()
            .map(|t| self.trial(d, &mut stream.child(t).rng(), fault))
            .collect::<Result<_>>()?;
        let (worst, passed) = if self.lower_bound() {
            let worst = values.iter().copied().fold(f64::INFINITY, f64::min);
            (worst, worst >= self.tolerance())
        } else {
            let worst = values.iter().copied().fold(0.0, f64::max);
            (worst, worst <= self.tolerance())
        };
        Ok(CheckOutcome {
            name: self.name(),
            d,
            passed: passed && !worst.is_nan(),
            worst,
            tolerance: self.tolerance(),
            trials,
        })
    }
}

fn random_kappa<R: Rng>(rng: &mut R) -> KappaParams {
    let mut kappa = [0.0; 7];
    kappa.iter_mut().for_each(|k| *k = rng.random_range(-1.0..1.0));
    KappaParams::new(kappa)
}

/// Random κ scaled to unit trace.
fn random_unit_trace_kappa<R: Rng>(d: usize, rng: &mut R) -> KappaParams {
    let e0 = RealState::basis(d, 0).expect("d >= 2");
    loop {
        let kappa = random_kappa(rng);
        let trace = rho_from_kappa(&kappa, &e0).trace().re;
        if trace.abs() > 0.1 {
            return KappaParams::new(kappa.kappa.map(|k| k / trace));
        }
    }
}

fn spectral_draw<R: Rng>(d: usize, rng: &mut R, fault: Fault) -> SpectralParams {
    let mut s = random_spectral_using(d, rng);
    if fault == Fault::NegativeLambda {
        s.lambda_b = -0.1;
    }
    s
}

struct Covariance;

impl VerifyCheck for Covariance {
    fn name(&self) -> &'static str {
        "covariance"
    }
    fn description(&self) -> &'static str {
        "rho(R n) = (R x R) rho(n) (R x R)^T for random kappa, n, R"
    }
    fn tolerance(&self) -> f64 {
        EIG_TOL
    }
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, _: Fault) -> Result<f64> {
        let kappa = random_kappa(rng);
        let n = random_state_using(d, rng);
        let r = random_rotation_using(d, rng);
        let lhs = rho_from_kappa(&kappa, &rotate_state(&r, &n)?);
        Ok(lhs.max_abs_diff(&rho_from_kappa(&kappa, &n).rotated(&r)?))
    }
}

struct SwapSymmetry;

impl VerifyCheck for SwapSymmetry {
    fn name(&self) -> &'static str {
        "swap-symmetry"
    }
    fn description(&self) -> &'static str {
        "S rho S = rho for kappa tensors and swap-constrained spectral tensors"
    }
    fn tolerance(&self) -> f64 {
        EIG_TOL
    }
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, _: Fault) -> Result<f64> {
        let n = random_state_using(d, rng);
        let kappa_rho = rho_from_kappa(&random_kappa(rng), &n);
        let s = random_spectral_using(d, rng);
        let spectral_rho = assemble_spectral(&Orthonormal, &s, &canonical_frame(&n));
        Ok(kappa_rho
            .swapped()
            .max_abs_diff(&kappa_rho)
            .max(spectral_rho.swapped().max_abs_diff(&spectral_rho)))
    }
}

struct Positivity;

impl VerifyCheck for Positivity {
    fn name(&self) -> &'static str {
        "positivity"
    }
    fn description(&self) -> &'static str {
        "smallest eigenvalue of spectral tensors with non-negative lambdas"
    }
    fn tolerance(&self) -> f64 {
        PSD_TOL
    }
    fn lower_bound(&self) -> bool {
        true
    }
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, fault: Fault) -> Result<f64> {
        let s = spectral_draw(d, rng, fault);
        let n = random_state_using(d, rng);
        let rho = assemble_spectral(&Orthonormal, &s, &canonical_frame(&n));
        Ok(check_positivity(&rho)?.value)
    }
}

struct Trace;

impl VerifyCheck for Trace {
    fn name(&self) -> &'static str {
        "trace"
    }
    fn description(&self) -> &'static str {
        "matrix trace equals the multiplicity-weighted lambda sum and 1"
    }
    fn tolerance(&self) -> f64 {
        EIG_TOL
    }
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, _: Fault) -> Result<f64> {
        let s = random_spectral_using(d, rng);
        let n = random_state_using(d, rng);
        let trace = assemble_spectral(&Orthonormal, &s, &canonical_frame(&n)).trace().re;
        Ok((trace - s.trace(d)).abs().max((trace - 1.0).abs()))
    }
}

struct NoSignaling;

impl VerifyCheck for NoSignaling {
    fn name(&self) -> &'static str {
        "no-signaling"
    }
    fn description(&self) -> &'static str {
        "algebraic (k7 = 0) and operational (basis mixtures) tests agree; mixture deviation when k7 = 0"
    }
    fn tolerance(&self) -> f64 {
        EIG_TOL
    }
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, _: Fault) -> Result<f64> {
        let mut kappa = random_kappa(rng);
        let zero_k7 = rng.random_bool(0.5);
        if zero_k7 {
            kappa.kappa[6] = 0.0;
        }
        let check = check_no_signaling(&kappa, d, 4, rng.random())?;
        if !check.agree() {
            return Ok(f64::INFINITY);
        }
        Ok(if zero_k7 { check.max_deviation } else { 0.0 })
    }
}

struct SpectralReconstruction;

impl VerifyCheck for SpectralReconstruction {
    fn name(&self) -> &'static str {
        "spectral-reconstruction"
    }
    fn description(&self) -> &'static str {
        "eigenvalues of rho(kappa(s)) equal the lambda multiset"
    }
    fn tolerance(&self) -> f64 {
        EIG_TOL
    }
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, _: Fault) -> Result<f64> {
        let s = random_spectral_using(d, rng);
        let kappa = kappa_from_spectral(&Orthonormal, &s, d)?;
        let n = random_state_using(d, rng);
        let got = rho_from_kappa(&kappa, &n).eigenvalues();
        let want = s.eigenvalue_multiset(d);
        Ok(got.iter().zip(&want).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

struct MarginalForm;

impl VerifyCheck for MarginalForm {
    fn name(&self) -> &'static str {
        "marginal-form"
    }
    fn description(&self) -> &'static str {
        "clone marginals equal F nn + (1 - F)/(d - 1) (1 - nn)"
    }
    fn tolerance(&self) -> f64 {
        EIG_TOL
    }
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, _: Fault) -> Result<f64> {
        let kappa = random_unit_trace_kappa(d, rng);
        let n = random_state_using(d, rng);
        let rho = rho_from_kappa(&kappa, &n);
        let f = rho.fidelity(&n)?;
        Ok([Which::First, Which::Second]
            .iter()
            .map(|&w| rho.clone_marginal(w).shrunk_form_residual(&n, f))
            .fold(0.0, f64::max))
    }
}

struct BoundSaturation;

impl VerifyCheck for BoundSaturation {
    fn name(&self) -> &'static str {
        "bound-saturation"
    }
    fn description(&self) -> &'static str {
        "explicit cloners reach the real and universal bounds on random inputs"
    }
    fn tolerance(&self) -> f64 {
        ANALYTIC_TOL
    }
    fn trial(&self, d: usize, rng: &mut rand_chacha::ChaCha20Rng, _: Fault) -> Result<f64> {
        let n = random_state_using(d, rng);
        let mut worst = 0.0f64;
        for (c, bound) in [
            (optimal_real_coefficients(d)?, real_bound_value(d)),
            (universal_coefficients(d)?, universal_bound_value(d)),
        ] {
            let via_state = two_clone_density(&n, &c)?.fidelity(&n)?;
            worst = worst
                .max((clone_fidelity(&c) - bound).abs())
                .max((via_state - bound).abs());
        }
        Ok(worst)
    }
}

/// Checks by name, run in name order.
#[derive(Clone)]
pub struct CheckRegistry {
    entries: BTreeMap<&'static str, Arc<dyn VerifyCheck>>,
}

impl CheckRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, check: Arc<dyn VerifyCheck>) {
        self.entries.insert(check.name(), check);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn VerifyCheck>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "check",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn VerifyCheck>> {
        self.entries.values()
    }

    /// Every check at every `d`, ordered by `d` then check name.
    pub fn run_all(&self, dims: &[usize], trials: usize, seed: u64, fault: Fault) -> Result<Vec<CheckOutcome>> {
        let mut out = Vec::new();
        for &d in dims {
            for check in self.iter() {
                out.push(check.run(d, trials, seed, fault)?);
            }
        }
        Ok(out)
    }
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(Covariance));
        registry.register(Arc::new(SwapSymmetry));
        registry.register(Arc::new(Positivity));
        registry.register(Arc::new(Trace));
        registry.register(Arc::new(NoSignaling));
        registry.register(Arc::new(SpectralReconstruction));
        registry.register(Arc::new(MarginalForm));
        registry.register(Arc::new(BoundSaturation));
        registry
    }
}
