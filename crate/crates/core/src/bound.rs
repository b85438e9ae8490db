//! Closed-form no-signaling fidelity bounds.

use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::tensor::{t_b, SpectralBasis, TableOne};

/// Which permutation-symmetry branch an optimum belongs to: `cos 2theta = 0`
/// or `lambda_C = lambda_D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    A,
    B,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Case::A => "a",
            Case::B => "b",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub d: usize,
    pub family: &'static str,
    pub f_max: f64,
    /// Maximizing `phi` (radians); real family only.
    pub optimal_phi: Option<f64>,
    pub case_label: Case,
    pub expression: &'static str,
}

fn sqrt_disc(d: f64) -> f64 {
    (d * d + 4.0 * d + 20.0).sqrt()
}

/// `1/2 + (sqrt(d^2 + 4d + 20) - d + 2) / (4 (d + 2))`.
pub fn real_bound_value(d: usize) -> f64 {
    let d = d as f64;
    0.5 + (sqrt_disc(d) - d + 2.0) / (4.0 * (d + 2.0))
}

/// `tan(phi) = (d + 4 - sqrt(d^2 + 4d + 20)) / (2 sqrt(d - 1))`.
pub fn real_optimal_tan_phi(d: usize) -> f64 {
    let d = d as f64;
    (d + 4.0 - sqrt_disc(d)) / (2.0 * (d - 1.0).sqrt())
}

/// `1/2 + 1/(d + 1)`.
pub fn universal_bound_value(d: usize) -> f64 {
    0.5 + 1.0 / (d as f64 + 1.0)
}

pub const REAL_EXPRESSION: &str = "F_max = 1/2 + (sqrt(d^2 + 4d + 20) - d + 2) / (4 (d + 2))";
pub const UNIVERSAL_EXPRESSION: &str = "F_max = 1/2 + 1/(d + 1)";

pub fn analytic_bound_real(d: usize) -> Result<BoundResult> {
    check_dim(d, usize::MAX)?;
    Ok(BoundResult {
        d,
        family: "real",
        f_max: real_bound_value(d),
        optimal_phi: Some(real_optimal_tan_phi(d).atan()),
        case_label: Case::A,
        expression: REAL_EXPRESSION,
    })
}

pub fn analytic_bound_universal(d: usize) -> Result<BoundResult> {
    check_dim(d, usize::MAX)?;
    Ok(BoundResult {
        d,
        family: "universal",
        f_max: universal_bound_value(d),
        optimal_phi: None,
        case_label: Case::A,
        expression: UNIVERSAL_EXPRESSION,
    })
}

/// The three candidate fidelities of the `cos 2theta = 0` branch, one per
/// surviving eigenvalue (`lambda_A`, `lambda_B`, `lambda_D`), in the
/// tabulated convention.
pub fn case_a_candidates(d: usize, alpha: f64, phi: f64) -> [f64; 3] {
    case_a_candidates_with(&TableOne, d, alpha, phi)
}

pub fn case_a_candidates_with(basis: &dyn SpectralBasis, d: usize, alpha: f64, phi: f64) -> [f64; 3] {
    let q = d as f64 - 1.0;
    let ta = basis.t_a(alpha, phi, d);
    let tb = t_b(phi, d);
    let ga = basis.lambda_a_fidelity_weight(alpha, phi, d);
    [
        (ga + q / 4.0 * ta) / (q / 2.0 * (d as f64 + ta)),
        (phi.cos().powi(2) + q / 4.0 * tb) / (1.0 + q / 2.0 * tb),
        0.5,
    ]
}

/// The two candidate fidelities of the `lambda_C = lambda_D` branch
/// (`lambda_A` and `lambda_B` surviving), in the tabulated convention.
pub fn case_b_candidates(d: usize, alpha: f64, phi: f64) -> [f64; 2] {
    case_b_candidates_with(&TableOne, d, alpha, phi)
}

pub fn case_b_candidates_with(basis: &dyn SpectralBasis, d: usize, alpha: f64, phi: f64) -> [f64; 2] {
    let q = d as f64 - 1.0;
    let ta = basis.t_a(alpha, phi, d);
    let tb = t_b(phi, d);
    let ga = basis.lambda_a_fidelity_weight(alpha, phi, d);
    [
        (ga + q / 2.0 * ta) / (q / 2.0 * (d as f64 + 2.0 * ta)),
        (phi.cos().powi(2) + q / 2.0 * tb) / (1.0 + q * tb),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    #[test]
    fn real_bound_values() {
        let f2 = analytic_bound_real(2).unwrap();
        assert!((f2.f_max - (1.0 + 1.0 / SQRT_2) / 2.0).abs() < 1e-15);
        assert!((f2.f_max - 0.8535533906).abs() < 1e-9);
        let f3 = analytic_bound_real(3).unwrap().f_max;
        assert!((f3 - (9.0 + 41f64.sqrt()) / 20.0).abs() < 1e-15);
        assert!((f3 - 0.7701562119).abs() < 1e-9);
        // d = 4: 1/2 + (sqrt(52) - 2) / 24
        let f4 = analytic_bound_real(4).unwrap().f_max;
        assert!((f4 - (0.5 + (52f64.sqrt() - 2.0) / 24.0)).abs() < 1e-15);
        assert!((f4 - 0.7171292730).abs() < 1e-9);
        assert!((real_optimal_tan_phi(2) - (3.0 - 2.0 * SQRT_2)).abs() < 1e-15);
        assert!((real_optimal_tan_phi(2) - 0.1715728753).abs() < 1e-9);
    }

    #[test]
    fn universal_bound_values() {
        assert!((analytic_bound_universal(2).unwrap().f_max - 5.0 / 6.0).abs() < 1e-15);
        assert!((analytic_bound_universal(3).unwrap().f_max - 0.75).abs() < 1e-15);
        assert!((analytic_bound_universal(9).unwrap().f_max - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(analytic_bound_real(1).is_err());
        assert!(analytic_bound_universal(0).is_err());
    }

    #[test]
    fn bounds_ordered_and_decreasing() {
        for d in 2..200 {
            let real = real_bound_value(d);
            let uni = universal_bound_value(d);
            assert!(real > uni && real > 0.5 && real <= 1.0);
            assert!(real_bound_value(d + 1) < real);
            assert!(universal_bound_value(d + 1) < uni);
        }
    }

    #[test]
    fn asymptotic_slope() {
        // sqrt(d^2 + 4d + 20) = d + 2 + 8/d + O(1/d^2), so d (F - 1/2) -> 1
        let d = 1000;
        let slope = d as f64 * (real_bound_value(d) - 0.5);
        assert!((slope - 1.0).abs() < 0.01, "{slope}");
        assert!((slope - 1.0).abs() < 3.0 / d as f64);
    }

    #[test]
    fn second_term_at_optimal_phi_equals_bound() {
        for d in 2..=32 {
            let phi = real_optimal_tan_phi(d).atan();
            let [_, second, third] = case_a_candidates(d, 0.3, phi);
            assert_eq!(third, 0.5);
            assert!((second - real_bound_value(d)).abs() < 1e-12, "d = {d}");
            assert!((analytic_bound_real(d).unwrap().optimal_phi.unwrap() - phi).abs() < 1e-15);
        }
    }

    #[test]
    fn second_term_is_maximal_at_optimal_phi() {
        for d in [2, 3, 5, 10] {
            let best = (0..200_000)
                .map(|k| -FRAC_PI_2 + PI * k as f64 / 200_000.0)
                .map(|phi| case_a_candidates(d, 0.0, phi)[1])
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(best <= real_bound_value(d) + 1e-15);
            assert!(real_bound_value(d) - best < 1e-9);
        }
    }

    #[test]
    fn case_a_examples() {
        let phi = real_optimal_tan_phi(2).atan();
        assert!((case_a_candidates(2, 0.0, phi)[1] - 0.8535533906).abs() < 1e-9);
        for alpha in [0.0, 0.7, 2.0] {
            assert!((case_a_candidates(3, alpha, 0.0)[1] - 0.75).abs() < 1e-15);
        }
    }

    #[test]
    fn case_b_examples() {
        let phi = real_optimal_tan_phi(2).atan();
        assert!(case_b_candidates(2, 0.0, phi)[1] < 0.8535533906);
        for alpha in [0.0, 1.3] {
            assert!((case_b_candidates(3, alpha, FRAC_PI_2)[1] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn case_b_never_beats_case_a() {
        let mut rng = Stream::new(0, "case-b").rng();
        for _ in 0..100_000 {
            let d = rng.random_range(2..=12);
            let alpha = rng.random_range(0.0..PI);
            let phi = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
            let a = case_a_candidates(d, alpha, phi);
            let b = case_b_candidates(d, alpha, phi);
            let max_a = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let max_b = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(max_b <= max_a + 1e-15);

            // termwise comparison holds under its own condition on each term
            let gb = phi.cos().powi(2);
            if gb >= 0.5 {
                assert!(b[1] <= a[1] + 1e-15);
            }
            let ga = alpha.cos().powi(2) * (2.0 * phi).sin().powi(2);
            if ga >= (d * (d - 1)) as f64 / 4.0 {
                assert!(b[0] <= a[0] + 1e-15);
            }
        }
    }

    #[test]
    fn termwise_claim_fails_without_its_own_condition() {
        // cos^2(alpha) sin^2(2 phi) > 1/2 alone does not order the lambda_B terms
        let (d, alpha, phi) = (3usize, 0.0f64, -0.9f64);
        assert!(alpha.cos().powi(2) * (2.0 * phi).sin().powi(2) > 0.5);
        assert!(phi.cos().powi(2) < 0.5);
        let a = case_a_candidates(d, alpha, phi);
        let b = case_b_candidates(d, alpha, phi);
        assert!(b[1] > a[1], "{a:?} {b:?}");
    }

    #[test]
    fn first_term_in_two_dimensions_peaks_at_the_bound() {
        // coarse grid + golden refinement over phi at alpha = 0
        let f = |phi: f64| case_a_candidates(2, 0.0, phi)[0];
        let (mut best_phi, mut best) = (0.0, f64::NEG_INFINITY);
        for k in 0..100_000 {
            let phi = -FRAC_PI_2 + PI * k as f64 / 100_000.0;
            let v = f(phi);
            if v > best {
                best = v;
                best_phi = phi;
            }
        }
        assert!((best - real_bound_value(2)).abs() < 1e-8);
        assert!(best <= real_bound_value(2) + 1e-15);
        // the maximizer satisfies pi <= 4 phi <= 3 pi / 2 modulo 2 pi
        let four_phi = (4.0 * best_phi).rem_euclid(2.0 * PI);
        assert!((PI..=1.5 * PI).contains(&four_phi), "{four_phi}");
        // and no alpha does better
        for alpha in [0.2, 0.9, 1.5, 2.4] {
            for k in 0..2000 {
                let phi = -FRAC_PI_2 + PI * k as f64 / 2000.0;
                assert!(case_a_candidates(2, alpha, phi)[0] <= best + 1e-12);
            }
        }
    }

    #[test]
    fn first_term_below_half_for_larger_d() {
        let mut rng = Stream::new(1, "first-term").rng();
        for _ in 0..50_000 {
            let d = rng.random_range(3..=20);
            let alpha = rng.random_range(0.0..PI);
            let phi = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
            assert!(case_a_candidates(d, alpha, phi)[0] < 0.5);
        }
    }
}
