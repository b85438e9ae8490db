//! Multi-start numerical maximization of the single-clone fidelity over the
//! spectral parameters, under unit trace and no-signaling.
//!
//! Two branches satisfy clone-swap symmetry: `cos 2theta = 0` (case a, with
//! `theta = pi/4` or `3 pi/4`) and `lambda_C = lambda_D` (case b). In case a
//! the trace and no-signaling equalities are solved for `(lambda_C, lambda_D)`;
//! in case b for `(lambda_C = lambda_D, lambda_B)`. The remaining eigenvalues
//! are drawn from the region where the eliminated ones stay non-negative: a
//! point `p` of the probability simplex (squared and normalized search
//! coordinates) is mapped to `lambda_X = p_X / w_X`, where `w_X` is the
//! weight of `lambda_X` in the linear inequality that keeps the eliminated
//! eigenvalue non-negative, and one slack coordinate absorbs the rest.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bound::Case;
use crate::constraints::ConstraintReport;
use crate::error::{check_dim, Error, Result};
use crate::family::{ClonerFamily, SearchSpace};
use crate::rng::Stream;
use crate::tensor::{t_b, SpectralBasis, SpectralParams, TableOne};
use crate::SPECTRAL_PSD_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub restarts: usize,
    pub seed: u64,
    /// Convergence threshold on the spread of objective values across the simplex.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            tolerance: 1e-14,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptResult {
    pub d: usize,
    pub family: &'static str,
    pub basis: &'static str,
    pub best_params: SpectralParams,
    pub f_numeric: f64,
    pub f_analytic: f64,
    /// `f_analytic - f_numeric`.
    pub gap_to_analytic: f64,
    pub restarts_used: usize,
    pub case_label: Case,
    /// Best fidelity found in each branch.
    pub case_a_best: f64,
    pub case_b_best: f64,
}

impl OptResult {
    pub fn constraint_report(&self, basis: Arc<dyn SpectralBasis>, trials: usize, seed: u64) -> Result<ConstraintReport> {
        ConstraintReport::for_spectral(basis, &self.best_params, self.d, trials, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch {
    case: Case,
    theta: f64,
}

const BRANCHES: [Branch; 3] = [
    Branch { case: Case::A, theta: FRAC_PI_4 },
    Branch { case: Case::A, theta: 3.0 * FRAC_PI_4 },
    Branch { case: Case::B, theta: 0.0 },
];

/// Search coordinates: simplex weights first, then the free angles.
struct Problem<'a> {
    d: usize,
    basis: &'a dyn SpectralBasis,
    space: SearchSpace,
    branch: Branch,
}

impl Problem<'_> {
    /// Free eigenvalues plus one slack coordinate.
    fn weight_count(&self) -> usize {
        let free = match self.branch.case {
            Case::A => 2,
            Case::B => 1,
        };
        // lambda_E has no vectors in two dimensions
        free + usize::from(self.d > 2) + 1
    }

    fn angles(&self, x: &[f64]) -> (f64, f64) {
        let mut rest = x[self.weight_count()..].iter();
        let alpha = if self.space.alpha { *rest.next().unwrap() } else { 0.0 };
        let phi = if self.space.phi { *rest.next().unwrap() } else { 0.0 };
        (alpha, phi)
    }

    fn decode(&self, x: &[f64]) -> Option<SpectralParams> {
        let d = self.d as f64;
        let q = d - 1.0;
        let (alpha, phi) = self.angles(x);
        let ta = self.basis.t_a(alpha, phi, self.d);
        let tb = t_b(phi, self.d);
        let we = q * (d - 2.0) / 2.0;

        let u = &x[..self.weight_count()];
        let total: f64 = u.iter().map(|v| v * v).sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        let p: Vec<f64> = u.iter().map(|v| v * v / total).collect();
        let lambda_e_from = |idx: usize| if self.d > 2 { p[idx] / we } else { 0.0 };

        let mut s = SpectralParams::zero();
        s.alpha = alpha;
        s.phi = phi;
        s.theta = self.branch.theta;
        match self.branch.case {
            Case::A => {
                s.lambda_a = p[0] / (d * q / 2.0 + q * ta / 2.0);
                s.lambda_b = p[1] / (1.0 + q * tb / 2.0);
                s.lambda_e = lambda_e_from(2);
                let rest = 1.0 - d * q / 2.0 * s.lambda_a - s.lambda_b - we * s.lambda_e;
                let ns = s.lambda_a * ta + s.lambda_b * tb;
                let (near, far) = (ns / 2.0, rest / q - ns / 2.0);
                if (2.0 * self.branch.theta).sin() > 0.0 {
                    s.lambda_c = near;
                    s.lambda_d = far;
                } else {
                    s.lambda_c = far;
                    s.lambda_d = near;
                }
            }
            Case::B => {
                s.lambda_a = p[0] / (q * (d + 2.0 * ta) / 2.0);
                s.lambda_e = lambda_e_from(1);
                s.lambda_b = (1.0 - q * (d + 2.0 * ta) / 2.0 * s.lambda_a - we * s.lambda_e) / (1.0 + q * tb);
                let ns = s.lambda_a * ta + s.lambda_b * tb;
                s.lambda_c = ns / 2.0;
                s.lambda_d = ns / 2.0;
            }
        }
        if s.min_lambda() < SPECTRAL_PSD_TOL {
            return None;
        }
        Some(s)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        match self.decode(x) {
            Some(s) => self.basis.fidelity(&s, self.d),
            None => f64::NEG_INFINITY,
        }
    }

    fn random_start<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.weight_count()).map(|_| rng.random_range(0.05..1.0)).collect();
        if self.space.alpha {
            x.push(rng.random_range(0.0..PI));
        }
        if self.space.phi {
            x.push(rng.random_range(-FRAC_PI_2..FRAC_PI_2));
        }
        x
    }
}

/// Derivative-free maximization; returns the best vertex and its value.
fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], step: f64, settings: &Settings) -> (Vec<f64>, f64) {
    let n = start.len();
    // minimize the negative
    let g = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), g(start)));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step;
        let v = g(&x);
        simplex.push((x, v));
    }

    for _ in 0..settings.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.is_finite() && spread <= settings.tolerance {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let reflected = along(1.0);
        let fr = g(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = g(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < simplex[n].1 {
            let x = along(0.5);
            let v = g(&x);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = g(&x);
            (x, v)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            let v = g(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, -v)
}

/// One restart of one branch: a wide search, then two tighter restarts from
/// the best point to undo simplex collapse.
fn ascend(problem: &Problem, start: &[f64], settings: &Settings) -> (Vec<f64>, f64) {
    let f = |x: &[f64]| problem.objective(x);
    let (mut x, mut v) = nelder_mead(f, start, 0.3, settings);
    for step in [0.05, 1e-3] {
        let (x2, v2) = nelder_mead(f, &x, step, settings);
        if v2 >= v {
            x = x2;
            v = v2;
        }
    }
    (x, v)
}

fn wrap_angles(mut s: SpectralParams) -> SpectralParams {
    s.alpha = s.alpha.rem_euclid(PI);
    s.phi = (s.phi + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    s
}

/// Maximizes the closed-form fidelity of `basis`. Deterministic for fixed
/// settings regardless of thread count.
pub fn numeric_optimize_with(
    d: usize,
    family: &dyn ClonerFamily,
    basis: &dyn SpectralBasis,
    settings: &Settings,
) -> Result<OptResult> {
    check_dim(d, usize::MAX)?;
    if settings.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let space = family.search_space();
    let root = Stream::new(settings.seed, "optimize");

    // per restart: best (fidelity, params) of each branch, in branch order
    let runs: Vec<Vec<Option<(f64, SpectralParams)>>> = (0..settings.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = root.child(r as u64).rng();
            BRANCHES
                .iter()
                .map(|&branch| {
                    let problem = Problem { d, basis, space, branch };
                    // resample until the start decodes; the simplex map makes this rare
                    let start = (0..100)
                        .map(|_| problem.random_start(&mut rng))
                        .find(|x| problem.decode(x).is_some())?;
                    let (x, v) = ascend(&problem, &start, settings);
                    let s = problem.decode(&x)?;
                    v.is_finite().then_some((v, s))
                })
                .collect()
        })
        .collect();

    // deterministic reduction: strict improvement only, so ties keep the
    // lowest restart index and branch order
    let mut best: [Option<(f64, SpectralParams)>; 2] = [None, None];
    for run in &runs {
        for (branch, found) in BRANCHES.iter().zip(run) {
            if let Some((v, s)) = found {
                let slot = &mut best[usize::from(branch.case == Case::B)];
                if slot.is_none_or(|(bv, _)| *v > bv) {
                    *slot = Some((*v, *s));
                }
            }
        }
    }
    let case_a_best = best[0].map_or(f64::NEG_INFINITY, |b| b.0);
    let case_b_best = best[1].map_or(f64::NEG_INFINITY, |b| b.0);
    let (case_label, (f_numeric, params)) = match (best[0], best[1]) {
        (Some(a), Some(b)) if b.0 > a.0 => (Case::B, b),
        (Some(a), _) => (Case::A, a),
        (None, Some(b)) => (Case::B, b),
        (None, None) => {
            return Err(Error::Infeasible {
                restarts: settings.restarts,
            })
        }
    };
    let f_analytic = family.analytic_bound(d)?.f_max;
    Ok(OptResult {
        d,
        family: family.name(),
        basis: basis.name(),
        best_params: wrap_angles(params),
        f_numeric,
        f_analytic,
        gap_to_analytic: f_analytic - f_numeric,
        restarts_used: settings.restarts,
        case_label,
        case_a_best,
        case_b_best,
    })
}

/// [`numeric_optimize_with`] using the tabulated eigenvector families.
pub fn numeric_optimize(d: usize, family: &dyn ClonerFamily, settings: &Settings) -> Result<OptResult> {
    numeric_optimize_with(d, family, &TableOne, settings)
}
