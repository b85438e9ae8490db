//! The two-clone output tensor in its κ form and its spectral form.

pub mod kappa;
pub mod spectral;
pub mod state;

pub use kappa::{fit_kappa, fit_kappa_checked, rho_from_kappa, KappaFit, KappaParams};
pub use spectral::{
    assemble_spectral, fidelity_spectral, kappa_from_spectral, random_spectral_using,
    rho_from_spectral, t_b, EigenFamilies, EigenVector, Family, Orthonormal, SpectralBases,
    SpectralBasis, SpectralParams, TableOne,
};
pub use state::{shrunk_marginal, CloneMarginal, TwoCloneState, Which};

use crate::space::{canonical_frame, ComplementFrame, RealState};

/// Table of eigenvector families for `basis` on `frame`.
pub fn table1_eigenvectors(
    basis: &dyn SpectralBasis,
    frame: &ComplementFrame,
    alpha: f64,
    phi: f64,
    theta: f64,
) -> EigenFamilies {
    basis.eigenvectors(frame, alpha, phi, theta)
}

/// `fidelity(rho, n)`, the single-clone overlap `n_i n_k r_{ij,kj}`.
pub fn fidelity(rho: &TwoCloneState, n: &RealState) -> crate::Result<f64> {
    rho.fidelity(n)
}

/// Spectral tensor at `n` using the canonical complement frame.
pub fn rho_from_spectral_canonical(
    basis: &dyn SpectralBasis,
    s: &SpectralParams,
    n: &RealState,
) -> crate::Result<TwoCloneState> {
    rho_from_spectral(basis, s, n, &canonical_frame(n))
}
