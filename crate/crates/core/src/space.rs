//! Real `d`-dimensional state space.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::ANALYTIC_TOL;

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension {
            d,
            min: 2,
            max: usize::MAX,
        });
    }
    Ok(())
}

fn gaussian_vector<R: Rng>(d: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

/// A pure state with real amplitudes, `sum n_i^2 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealState {
    amplitudes: DVector<f64>,
}

impl RealState {
    /// Wraps `amplitudes`, rejecting vectors whose norm is off by more than
    /// [`ANALYTIC_TOL`].
    pub fn new(amplitudes: DVector<f64>) -> Result<Self> {
        require_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > ANALYTIC_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes a non-zero vector.
    pub fn normalized(amplitudes: DVector<f64>) -> Result<Self> {
        require_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: amplitudes / norm,
        })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    /// Computational basis state `e_k`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        require_dim(d)?;
        if k >= d {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for d = {d}"
            )));
        }
        Ok(Self {
            amplitudes: DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 }),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<f64> {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[f64] {
        self.amplitudes.as_slice()
    }
}

/// An element of SO(d).
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(d: usize) -> Self {
        Self {
            matrix: DMatrix::identity(d, d),
        }
    }

    /// Checks orthogonality and unit determinant to [`ANALYTIC_TOL`].
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("rotation must be square".into()));
        }
        require_dim(matrix.nrows())?;
        let residual = orthogonality_residual(&matrix);
        if residual > ANALYTIC_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not orthogonal: residual {residual:e}"
            )));
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > ANALYTIC_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix has determinant {det}, expected +1"
            )));
        }
        Ok(Self { matrix })
    }

    /// Plane rotation by `angle` in the `(p, q)` coordinate plane.
    pub fn givens(d: usize, p: usize, q: usize, angle: f64) -> Self {
        let mut matrix = DMatrix::identity(d, d);
        let (s, c) = angle.sin_cos();
        matrix[(p, p)] = c;
        matrix[(q, q)] = c;
        matrix[(q, p)] = s;
        matrix[(p, q)] = -s;
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Entrywise max of `R R^T - I`.
    pub fn orthogonality_residual(&self) -> f64 {
        orthogonality_residual(&self.matrix)
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }
}

fn orthogonality_residual(m: &DMatrix<f64>) -> f64 {
    let d = m.nrows();
    (m * m.transpose() - DMatrix::<f64>::identity(d, d)).amax()
}

/// `d - 1` orthonormal vectors spanning the complement of a state.
#[derive(Debug, Clone)]
pub struct ComplementFrame {
    base: RealState,
    vectors: Vec<DVector<f64>>,
}

impl ComplementFrame {
    pub fn base(&self) -> &RealState {
        &self.base
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    /// Worst violation of `m.n = 0` and `m.m' = delta`.
    pub fn residual(&self) -> f64 {
        let n = self.base.amplitudes();
        let mut worst = 0.0f64;
        for (a, ma) in self.vectors.iter().enumerate() {
            worst = worst.max(ma.dot(n).abs());
            for (b, mb) in self.vectors.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((ma.dot(mb) - target).abs());
            }
        }
        worst
    }

    /// Applies the same rotation to the base state and every frame vector.
    pub fn rotated(&self, r: &Rotation) -> Result<Self> {
        Ok(Self {
            base: rotate_state(r, &self.base)?,
            vectors: self.vectors.iter().map(|m| r.matrix() * m).collect(),
        })
    }
}

/// Orthogonalizes `candidates` against `n` and each other, keeping the first
/// `d - 1` that survive.
fn gram_schmidt_fill<I>(n: &RealState, candidates: I) -> Option<Vec<DVector<f64>>>
where
    I: IntoIterator<Item = DVector<f64>>,
{
    let d = n.dim();
    let mut basis: Vec<DVector<f64>> = vec![n.amplitudes().clone()];
    for mut v in candidates {
        if basis.len() == d {
            break;
        }
        // two passes keep the frame orthogonal to machine precision
        for _ in 0..2 {
            for u in &basis {
                let proj = u.dot(&v);
                v.axpy(-proj, u, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }
    (basis.len() == d).then(|| basis.split_off(1))
}

/// Seeded complement frame: Gram–Schmidt on Gaussian fill vectors.
pub fn complement_frame(n: &RealState, seed: u64) -> ComplementFrame {
    let mut rng = Stream::new(seed, "complement-frame").rng();
    let d = n.dim();
    let vectors = gram_schmidt_fill(n, std::iter::repeat_with(|| gaussian_vector(d, &mut rng)))
        .expect("Gaussian fill vectors are almost surely independent");
    ComplementFrame {
        base: n.clone(),
        vectors,
    }
}

/// Deterministic complement frame built from the computational basis. For
/// `n = e_0` this is `e_1, ..., e_{d-1}`.
pub fn canonical_frame(n: &RealState) -> ComplementFrame {
    let d = n.dim();
    let candidates = (0..d).map(|k| DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 }));
    let vectors = gram_schmidt_fill(n, candidates)
        .expect("the computational basis spans the complement of any unit vector");
    ComplementFrame {
        base: n.clone(),
        vectors,
    }
}

/// An orthonormal basis of R^d.
#[derive(Debug, Clone)]
pub struct RealBasis {
    states: Vec<RealState>,
}

impl RealBasis {
    pub fn canonical(d: usize) -> Result<Self> {
        Ok(Self {
            states: (0..d).map(|k| RealState::basis(d, k)).collect::<Result<_>>()?,
        })
    }

    pub fn from_rotation(r: &Rotation) -> Self {
        let states = r
            .matrix()
            .column_iter()
            .map(|c| RealState {
                amplitudes: c.into_owned(),
            })
            .collect();
        Self { states }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[RealState] {
        &self.states
    }

    /// Entrywise max of `sum_mu n^mu (n^mu)^T - I`.
    pub fn completion_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = DMatrix::<f64>::zeros(d, d);
        for s in &self.states {
            let n = s.amplitudes();
            sum += n * n.transpose();
        }
        (sum - DMatrix::<f64>::identity(d, d)).amax()
    }
}

pub fn random_state(d: usize, seed: u64) -> Result<RealState> {
    require_dim(d)?;
    let mut rng = Stream::new(seed, "random-state").rng();
    Ok(random_state_using(d, &mut rng))
}

pub fn random_state_using<R: Rng>(d: usize, rng: &mut R) -> RealState {
    loop {
        let v = gaussian_vector(d, rng);
        let norm = v.norm();
        if norm > 1e-12 {
            return RealState {
                amplitudes: v / norm,
            };
        }
    }
}

/// Haar-distributed element of SO(d).
pub fn random_rotation(d: usize, seed: u64) -> Result<Rotation> {
    require_dim(d)?;
    let mut rng = Stream::new(seed, "random-rotation").rng();
    Ok(random_rotation_using(d, &mut rng))
}

pub fn random_rotation_using<R: Rng>(d: usize, rng: &mut R) -> Rotation {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // positive diagonal on the triangular factor makes Q Haar on O(d)
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Rotation { matrix: q }
}

pub fn rotate_state(r: &Rotation, n: &RealState) -> Result<RealState> {
    if r.dim() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            got: n.dim(),
        });
    }
    Ok(RealState {
        amplitudes: r.matrix() * n.amplitudes(),
    })
}

/// The columns of a random rotation.
pub fn random_basis(d: usize, seed: u64) -> Result<RealBasis> {
    require_dim(d)?;
    let mut rng = Stream::new(seed, "random-basis").rng();
    Ok(random_basis_using(d, &mut rng))
}

pub fn random_basis_using<R: Rng>(d: usize, rng: &mut R) -> RealBasis {
    RealBasis::from_rotation(&random_rotation_using(d, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn random_state_is_normalized_and_deterministic() {
        let a = random_state(2, 3).unwrap();
        assert_abs_diff_eq!(a.amplitudes().norm(), 1.0, epsilon = 1e-12);
        assert_eq!(random_state(5, 42).unwrap(), random_state(5, 42).unwrap());
        assert_ne!(random_state(5, 42).unwrap(), random_state(5, 43).unwrap());
    }

    #[test]
    fn rejects_dimension_one() {
        assert!(matches!(random_state(1, 0), Err(Error::Dimension { d: 1, .. })));
        assert!(random_rotation(1, 0).is_err());
        assert!(random_basis(0, 0).is_err());
        assert!(RealState::from_slice(&[1.0]).is_err());
    }

    #[test]
    fn rejects_unnormalized_state() {
        assert!(matches!(
            RealState::from_slice(&[1.0, 1.0]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn complement_of_e0() {
        let e0 = RealState::basis(2, 0).unwrap();
        let f = complement_frame(&e0, 9);
        assert_eq!(f.vectors().len(), 1);
        let m = &f.vectors()[0];
        assert_abs_diff_eq!(m[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[1].abs(), 1.0, epsilon = 1e-12);

        let e0 = RealState::basis(3, 0).unwrap();
        let f = complement_frame(&e0, 9);
        assert_eq!(f.vectors().len(), 2);
        for m in f.vectors() {
            assert_abs_diff_eq!(m[0], 0.0, epsilon = 1e-12);
        }
        assert!(f.residual() < 1e-12);

        let c = canonical_frame(&e0);
        assert_eq!(c.vectors()[0], DVector::from_column_slice(&[0.0, 1.0, 0.0]));
        assert_eq!(c.vectors()[1], DVector::from_column_slice(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn rotation_invariants_and_determinism() {
        for d in 2..=32 {
            let r = random_rotation(d, d as u64).unwrap();
            assert!(r.orthogonality_residual() < 1e-9, "d = {d}");
            assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-9);
        }
        assert_eq!(random_rotation(2, 5).unwrap(), random_rotation(2, 5).unwrap());
    }

    #[test]
    fn haar_mean_of_corner_entry_vanishes() {
        // diag(-1, -1, 1, ..) is in SO(d) and flips the sign of R_00, so the
        // Haar mean is 0; 10^4 samples give a standard error near 0.005-0.007.
        for d in [2, 3, 5] {
            let mut rng = Stream::new(11, "haar-mean").rng();
            let samples = 10_000;
            let mean: f64 = (0..samples)
                .map(|_| random_rotation_using(d, &mut rng).matrix()[(0, 0)])
                .sum::<f64>()
                / samples as f64;
            assert!(mean.abs() < 0.05, "d = {d}, mean = {mean}");
        }
    }

    #[test]
    fn rotate_state_examples() {
        let n = random_state(4, 1).unwrap();
        let id = Rotation::identity(4);
        assert_eq!(rotate_state(&id, &n).unwrap(), n);

        let quarter = Rotation::givens(2, 0, 1, std::f64::consts::FRAC_PI_2);
        let e0 = RealState::basis(2, 0).unwrap();
        let out = rotate_state(&quarter, &e0).unwrap();
        assert_abs_diff_eq!(out.as_slice()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.as_slice()[1].abs(), 1.0, epsilon = 1e-15);

        let r = random_rotation(6, 2).unwrap();
        let n = random_state(6, 2).unwrap();
        assert_abs_diff_eq!(rotate_state(&r, &n).unwrap().amplitudes().norm(), 1.0, epsilon = 1e-12);

        let r3 = random_rotation(3, 2).unwrap();
        assert!(matches!(
            rotate_state(&r3, &n),
            Err(Error::DimensionMismatch { expected: 3, got: 6 })
        ));
    }

    #[test]
    fn basis_completion() {
        for d in [2, 3, 5, 8] {
            assert_eq!(RealBasis::canonical(d).unwrap().completion_residual(), 0.0);
            for seed in 0..100 {
                let b = random_basis(d, seed).unwrap();
                assert!(b.completion_residual() < 1e-9, "d = {d}, seed = {seed}");
            }
        }
        let a = random_basis(3, 1).unwrap();
        let b = random_basis(3, 2).unwrap();
        assert_ne!(a.states()[0], b.states()[0]);
    }

    #[test]
    fn from_matrix_validates() {
        assert!(Rotation::from_matrix(DMatrix::identity(3, 3)).is_ok());
        let mut reflect = DMatrix::<f64>::identity(3, 3);
        reflect[(0, 0)] = -1.0;
        assert!(Rotation::from_matrix(reflect).is_err());
        assert!(Rotation::from_matrix(DMatrix::from_element(2, 2, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn rotated_frame_stays_valid(d in 2usize..9, seed in any::<u64>()) {
            let n = random_state(d, seed).unwrap();
            let frame = complement_frame(&n, seed ^ 1);
            prop_assert!(frame.residual() < 1e-9);
            let r = random_rotation(d, seed ^ 2).unwrap();
            let rotated = frame.rotated(&r).unwrap();
            prop_assert!(rotated.residual() < 1e-9);
        }

        #[test]
        fn rotation_invariants_hold(d in 2usize..=32, seed in any::<u64>()) {
            let r = random_rotation(d, seed).unwrap();
            prop_assert!(r.orthogonality_residual() < 1e-9);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }
}
