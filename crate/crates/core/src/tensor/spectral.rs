//! Spectral parameterization of the output tensor: five eigenvalue families
//! `lambda_A .. lambda_E` and three angles `(alpha, phi, theta)`.
//!
//! Two conventions for the eigenvector families are available through the
//! [`SpectralBasis`] trait:
//!
//! * [`TableOne`] (`"table1"`) builds the vectors exactly as tabulated, with
//!   the `lambda_A` diagonal block carrying `cos(alpha) sin(2 phi)` and an
//!   `e^{i alpha}` phase. Its closed forms for the fidelity and for the
//!   no-signaling coefficient `t_A` are the tabulated ones, and the matrix it
//!   assembles reproduces them exactly. The diagonal `lambda_A` vectors are
//!   not orthogonal to the `lambda_B` vector when `phi != 0`
//!   (overlap `e^{i alpha} sin(phi) / sqrt(d - 1)`), so the assembled matrix
//!   does not have the `lambda`s as its eigenvalues in general.
//! * [`Orthonormal`] (`"orthonormal"`) replaces the scalar part of the
//!   `lambda_A` diagonal block by the unique direction orthogonal to the
//!   `lambda_B` vector. The families form an orthonormal eigenbasis, the
//!   assembled matrix is real, and `alpha` has no effect. Its closed forms
//!   carry `sin^2(phi)` as the `lambda_A` fidelity weight and
//!   `t_A = 1 + (d-2)/(d-1) sin^2(phi) + sin(2 phi)/sqrt(d-1)`.
//!
//! The two conventions coincide whenever `lambda_A = 0`, which covers every
//! optimum of the fidelity.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::kappa::{fit_kappa_checked, KappaParams};
use super::state::TwoCloneState;
use crate::error::{Error, Result};
use crate::space::{canonical_frame, ComplementFrame, RealState};
use crate::ANALYTIC_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralParams {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub lambda_c: f64,
    pub lambda_d: f64,
    pub lambda_e: f64,
    pub alpha: f64,
    pub phi: f64,
    pub theta: f64,
}

impl SpectralParams {
    pub fn zero() -> Self {
        Self {
            lambda_a: 0.0,
            lambda_b: 0.0,
            lambda_c: 0.0,
            lambda_d: 0.0,
            lambda_e: 0.0,
            alpha: 0.0,
            phi: 0.0,
            theta: 0.0,
        }
    }

    pub fn lambdas(&self) -> [f64; 5] {
        [
            self.lambda_a,
            self.lambda_b,
            self.lambda_c,
            self.lambda_d,
            self.lambda_e,
        ]
    }

    pub fn lambda(&self, family: Family) -> f64 {
        self.lambdas()[family as usize]
    }

    pub fn set_lambda(&mut self, family: Family, value: f64) {
        match family {
            Family::A => self.lambda_a = value,
            Family::B => self.lambda_b = value,
            Family::C => self.lambda_c = value,
            Family::D => self.lambda_d = value,
            Family::E => self.lambda_e = value,
        }
    }

    /// `(lambda_C - lambda_D) cos(2 theta)`, zero for clone-swap symmetric tensors.
    pub fn swap_constraint_residual(&self) -> f64 {
        (self.lambda_c - self.lambda_d) * (2.0 * self.theta).cos()
    }

    pub fn validate(&self) -> Result<()> {
        let residual = self.swap_constraint_residual();
        if residual.abs() > ANALYTIC_TOL {
            return Err(Error::SwapConstraint { residual });
        }
        Ok(())
    }

    /// Trace implied by the family multiplicities.
    pub fn trace(&self, d: usize) -> f64 {
        Family::ALL
            .iter()
            .map(|&f| f.multiplicity(d) as f64 * self.lambda(f))
            .sum()
    }

    /// The eigenvalue multiset, ascending.
    pub fn eigenvalue_multiset(&self, d: usize) -> Vec<f64> {
        let mut values: Vec<f64> = Family::ALL
            .iter()
            .flat_map(|&f| std::iter::repeat_n(self.lambda(f), f.multiplicity(d)))
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_lambda(&self) -> f64 {
        self.lambdas().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalue family label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
    E = 4,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::A, Family::B, Family::C, Family::D, Family::E];

    pub fn multiplicity(self, d: usize) -> usize {
        match self {
            Family::A => d * (d - 1) / 2,
            Family::B => 1,
            Family::C | Family::D => d - 1,
            Family::E => (d - 1) * (d - 2) / 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = ['A', 'B', 'C', 'D', 'E'][*self as usize];
        write!(f, "lambda_{c}")
    }
}

/// One member of an eigenvector family.
///
/// `weight` is 2 for the off-diagonal `lambda_A` vectors, which stand for both
/// orderings `(mu, nu)` and `(nu, mu)` and have squared norm 1/2; it is 1
/// otherwise. `sum weight * V V^dagger` over a family is the family projector.
#[derive(Debug, Clone)]
pub struct EigenVector {
    pub family: Family,
    pub weight: f64,
    pub vector: DVector<Complex64>,
}

impl EigenVector {
    /// Squared norm prescribed by the normalization convention.
    pub fn stated_norm(&self) -> f64 {
        1.0 / self.weight
    }
}

#[derive(Debug, Clone)]
pub struct EigenFamilies {
    pub dim: usize,
    pub vectors: Vec<EigenVector>,
}

impl EigenFamilies {
    pub fn count(&self, family: Family) -> usize {
        self.vectors.iter().filter(|v| v.family == family).count()
    }

    pub fn multiplicities(&self) -> [usize; 5] {
        Family::ALL.map(|f| self.count(f))
    }

    /// Worst deviation of the Gram matrix from `diag(stated_norm)`.
    pub fn gram_residual(&self) -> f64 {
        self.gram_residual_where(|_, _| true)
    }

    /// Gram residual restricted to pairs accepted by `keep`.
    pub fn gram_residual_where(&self, keep: impl Fn(&EigenVector, &EigenVector) -> bool) -> f64 {
        let mut worst = 0.0f64;
        for (a, va) in self.vectors.iter().enumerate() {
            for (b, vb) in self.vectors.iter().enumerate().skip(a) {
                if !keep(va, vb) {
                    continue;
                }
                let overlap = va.vector.dotc(&vb.vector);
                let target = if a == b { va.stated_norm() } else { 0.0 };
                worst = worst.max((overlap - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// `t_B = (cos phi - sin phi / sqrt(d - 1))^2`.
pub fn t_b(phi: f64, d: usize) -> f64 {
    let r = (d as f64 - 1.0).sqrt();
    (phi.cos() - phi.sin() / r).powi(2)
}

/// A convention for the eigenvector families and the closed forms that go
/// with it.
pub trait SpectralBasis: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// The `d(d-1)/2` vectors of the `lambda_A` family.
    fn lambda_a_vectors(
        &self,
        n: &DVector<f64>,
        frame: &[DVector<f64>],
        alpha: f64,
        phi: f64,
    ) -> Vec<EigenVector>;

    /// Fidelity carried by a unit `lambda_A`.
    fn lambda_a_fidelity_weight(&self, alpha: f64, phi: f64, d: usize) -> f64;

    /// Quartic (`n_i n_j n_k n_l`) coefficient carried by a unit `lambda_A`.
    fn t_a(&self, alpha: f64, phi: f64, d: usize) -> f64;

    /// Closed-form single-clone fidelity.
    fn fidelity(&self, s: &SpectralParams, d: usize) -> f64 {
        let (c, sn) = (s.theta.cos(), s.theta.sin());
        s.lambda_a * self.lambda_a_fidelity_weight(s.alpha, s.phi, d)
            + s.lambda_b * s.phi.cos().powi(2)
            + (s.lambda_c * c * c + s.lambda_d * sn * sn) * (d as f64 - 1.0)
    }

    /// `lambda_A t_A + lambda_B t_B - lambda_C (1 + sin 2theta) - lambda_D (1 - sin 2theta)`,
    /// which equals `k7` of the assembled tensor.
    fn no_signaling_residual(&self, s: &SpectralParams, d: usize) -> f64 {
        let s2 = (2.0 * s.theta).sin();
        s.lambda_a * self.t_a(s.alpha, s.phi, d) + s.lambda_b * t_b(s.phi, d)
            - s.lambda_c * (1.0 + s2)
            - s.lambda_d * (1.0 - s2)
    }

    fn eigenvectors(&self, frame: &ComplementFrame, alpha: f64, phi: f64, theta: f64) -> EigenFamilies {
        let n = frame.base().amplitudes();
        let m = frame.vectors();
        let d = n.len();
        let sqrt_dm1 = (d as f64 - 1.0).sqrt();
        let nn = n * n.transpose();
        let projector = DMatrix::<f64>::identity(d, d) - &nn;

        let mut vectors = self.lambda_a_vectors(n, m, alpha, phi);

        let vb = &nn * phi.cos() + &projector * (phi.sin() / sqrt_dm1);
        vectors.push(real_vector(Family::B, 1.0, &vb));

        let (st, ct) = theta.sin_cos();
        for mu in m {
            let vc = n * mu.transpose() * ct + mu * n.transpose() * st;
            vectors.push(real_vector(Family::C, 1.0, &vc));
        }
        for mu in m {
            let vd = n * mu.transpose() * (-st) + mu * n.transpose() * ct;
            vectors.push(real_vector(Family::D, 1.0, &vd));
        }
        // antisymmetric pairs span the same space as the epsilon contraction
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for a in 0..m.len() {
            for b in a + 1..m.len() {
                let ve = (&m[a] * m[b].transpose() - &m[b] * m[a].transpose()) * inv_sqrt2;
                vectors.push(real_vector(Family::E, 1.0, &ve));
            }
        }
        EigenFamilies { dim: d, vectors }
    }
}

/// Row-major flattening `V_{ij} -> v[i*d + j]`.
fn flatten(matrix: &DMatrix<Complex64>) -> DVector<Complex64> {
    let d = matrix.nrows();
    DVector::from_fn(d * d, |r, _| matrix[(r / d, r % d)])
}

fn real_vector(family: Family, weight: f64, matrix: &DMatrix<f64>) -> EigenVector {
    EigenVector {
        family,
        weight,
        vector: flatten(&matrix.map(|x| Complex64::new(x, 0.0))),
    }
}

/// `lambda_A` vectors `diag * delta_{mu nu} + phase/2 (m^mu m^nu^T + m^nu m^mu^T)`,
/// over `mu <= nu`.
fn lambda_a_block(
    frame: &[DVector<f64>],
    diagonal: &DMatrix<f64>,
    phase: Complex64,
) -> Vec<EigenVector> {
    let mut out = Vec::with_capacity(frame.len() * (frame.len() + 1) / 2);
    for mu in 0..frame.len() {
        for nu in mu..frame.len() {
            let sym = &frame[mu] * frame[nu].transpose() + &frame[nu] * frame[mu].transpose();
            let mut v = sym.map(|x| phase * x * 0.5);
            let weight = if mu == nu {
                v += diagonal.map(|x| Complex64::new(x, 0.0));
                1.0
            } else {
                2.0
            };
            out.push(EigenVector {
                family: Family::A,
                weight,
                vector: flatten(&v),
            });
        }
    }
    out
}

/// The eigenvector families as tabulated.
#[derive(Debug, Clone, Copy, Default)]
pub struct TableOne;

impl SpectralBasis for TableOne {
    fn name(&self) -> &'static str {
        "table1"
    }

    fn description(&self) -> &'static str {
        "tabulated families; lambda_A diagonal block mixes in cos(alpha) sin(2 phi) and e^{i alpha}"
    }

    fn lambda_a_vectors(
        &self,
        n: &DVector<f64>,
        frame: &[DVector<f64>],
        alpha: f64,
        phi: f64,
    ) -> Vec<EigenVector> {
        let d = n.len() as f64;
        let nn = n * n.transpose();
        let projector = DMatrix::<f64>::identity(n.len(), n.len()) - &nn;
        // sin(2 phi) cot(phi) = 2 cos^2(phi), finite at phi = 0
        let diagonal = (&nn * ((2.0 * phi).sin() / (d - 1.0).sqrt())
            - &projector * (2.0 * phi.cos().powi(2) / (d - 1.0)))
            * alpha.cos();
        lambda_a_block(frame, &diagonal, Complex64::from_polar(1.0, alpha))
    }

    fn lambda_a_fidelity_weight(&self, alpha: f64, phi: f64, _d: usize) -> f64 {
        alpha.cos().powi(2) * (2.0 * phi).sin().powi(2)
    }

    fn t_a(&self, alpha: f64, phi: f64, d: usize) -> f64 {
        let d = d as f64;
        alpha.cos().powi(2)
            * ((d - 2.0) / (d - 1.0) * (2.0 * phi).sin().powi(2)
                + (4.0 * phi).sin() / (d - 1.0).sqrt())
            + 1.0
    }
}

/// Orthonormal eigenbasis; `alpha` is inert.
#[derive(Debug, Clone, Copy, Default)]
pub struct Orthonormal;

impl SpectralBasis for Orthonormal {
    fn name(&self) -> &'static str {
        "orthonormal"
    }

    fn description(&self) -> &'static str {
        "orthonormal eigenbasis; lambda_A scalar direction orthogonal to the lambda_B vector"
    }

    fn lambda_a_vectors(
        &self,
        n: &DVector<f64>,
        frame: &[DVector<f64>],
        _alpha: f64,
        phi: f64,
    ) -> Vec<EigenVector> {
        let d = n.len() as f64;
        let nn = n * n.transpose();
        let projector = DMatrix::<f64>::identity(n.len(), n.len()) - &nn;
        // W/sqrt(d-1) - P/(d-1) with W = sin(phi) nn - cos(phi) P/sqrt(d-1)
        let diagonal =
            &nn * (phi.sin() / (d - 1.0).sqrt()) - &projector * ((1.0 + phi.cos()) / (d - 1.0));
        lambda_a_block(frame, &diagonal, Complex64::new(1.0, 0.0))
    }

    fn lambda_a_fidelity_weight(&self, _alpha: f64, phi: f64, _d: usize) -> f64 {
        phi.sin().powi(2)
    }

    fn t_a(&self, _alpha: f64, phi: f64, d: usize) -> f64 {
        let d = d as f64;
        1.0 + (d - 2.0) / (d - 1.0) * phi.sin().powi(2) + (2.0 * phi).sin() / (d - 1.0).sqrt()
    }
}

/// Named spectral conventions.
#[derive(Clone)]
pub struct SpectralBases {
    entries: BTreeMap<&'static str, Arc<dyn SpectralBasis>>,
}

impl SpectralBases {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, basis: Arc<dyn SpectralBasis>) {
        self.entries.insert(basis.name(), basis);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SpectralBasis>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "spectral basis",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn SpectralBasis>> {
        self.entries.values()
    }
}

impl Default for SpectralBases {
    fn default() -> Self {
        let mut bases = Self::empty();
        bases.register(Arc::new(TableOne));
        bases.register(Arc::new(Orthonormal));
        bases
    }
}

/// `sum_f lambda_f sum_{V in f} weight V V^dagger`, without validation.
pub fn assemble_spectral(
    basis: &dyn SpectralBasis,
    s: &SpectralParams,
    frame: &ComplementFrame,
) -> TwoCloneState {
    let families = basis.eigenvectors(frame, s.alpha, s.phi, s.theta);
    let d = families.dim;
    let dd = d * d;
    let mut matrix = DMatrix::<Complex64>::zeros(dd, dd);
    for v in &families.vectors {
        let scale = s.lambda(v.family) * v.weight;
        if scale == 0.0 {
            continue;
        }
        matrix.ger(
            Complex64::new(scale, 0.0),
            &v.vector,
            &v.vector.map(|z| z.conj()),
            Complex64::new(1.0, 0.0),
        );
    }
    TwoCloneState::new(d, matrix).expect("shape is d^2 x d^2 by construction")
}

/// Two-clone state from spectral parameters. `frame` must be a complement
/// frame of `n`.
pub fn rho_from_spectral(
    basis: &dyn SpectralBasis,
    s: &SpectralParams,
    n: &RealState,
    frame: &ComplementFrame,
) -> Result<TwoCloneState> {
    s.validate()?;
    if frame.base().dim() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: n.dim(),
            got: frame.base().dim(),
        });
    }
    let offset = (frame.base().amplitudes() - n.amplitudes()).amax();
    if offset > ANALYTIC_TOL || frame.residual() > ANALYTIC_TOL {
        return Err(Error::InvalidArgument(
            "complement frame was not built on the given state".into(),
        ));
    }
    Ok(assemble_spectral(basis, s, frame))
}

/// The unique `kappa` reproducing the spectral tensor for every input.
///
/// The tensor is assembled at `n = e_0` with the canonical frame and fitted;
/// a fit residual above tolerance is an error (complex tensors from
/// [`TableOne`] with `cos(alpha) sin(alpha) != 0` land here).
pub fn kappa_from_spectral(
    basis: &dyn SpectralBasis,
    s: &SpectralParams,
    d: usize,
) -> Result<KappaParams> {
    s.validate()?;
    let e0 = RealState::basis(d, 0)?;
    let rho = assemble_spectral(basis, s, &canonical_frame(&e0));
    fit_kappa_checked(&rho)
}

/// Closed-form fidelity in the tabulated convention:
/// `lambda_A cos^2(alpha) sin^2(2 phi) + lambda_B cos^2(phi)
///  + (lambda_C cos^2(theta) + lambda_D sin^2(theta)) (d - 1)`.
pub fn fidelity_spectral(s: &SpectralParams, d: usize) -> f64 {
    TableOne.fidelity(s, d)
}

/// Random spectral parameters satisfying the clone-swap constraint and unit
/// trace. Half of the draws take `cos 2theta = 0`, the other half
/// `lambda_C = lambda_D`.
pub fn random_spectral_using<R: Rng>(d: usize, rng: &mut R) -> SpectralParams {
    let mut s = SpectralParams {
        lambda_a: rng.random(),
        lambda_b: rng.random(),
        lambda_c: rng.random(),
        lambda_d: rng.random(),
        lambda_e: rng.random(),
        alpha: rng.random_range(0.0..std::f64::consts::PI),
        phi: rng.random_range(-FRAC_PI_2..FRAC_PI_2),
        theta: 0.0,
    };
    if rng.random_bool(0.5) {
        s.theta = if rng.random_bool(0.5) {
            std::f64::consts::FRAC_PI_4
        } else {
            3.0 * std::f64::consts::FRAC_PI_4
        };
    } else {
        s.lambda_d = s.lambda_c;
        s.theta = rng.random_range(0.0..std::f64::consts::PI);
    }
    let tr = s.trace(d);
    for f in Family::ALL {
        s.set_lambda(f, s.lambda(f) / tr);
    }
    s
}
