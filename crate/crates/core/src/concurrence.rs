//! Wootters concurrence.

use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::XState;

/// Eigenvalues of `ρ ρ̃` below this are rounding noise of true zeros.
const EIGEN_FLOOR: f64 = 1e-12;

/// `σ_y ⊗ σ_y` in the `HH, HV, VH, VV` basis.
fn sigma_yy() -> Matrix4<Complex64> {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    Matrix4::new(z, z, z, -o, z, z, o, z, z, o, z, z, -o, z, z, z)
}

/// `max(0, √λ1 - √λ2 - √λ3 - √λ4)` with `λ_i` the decreasing eigenvalues of
/// `ρ (σy⊗σy) ρ* (σy⊗σy)`, for an arbitrary 4x4 density matrix.
pub fn concurrence_of_matrix(rho: &Matrix4<Complex64>) -> Result<f64> {
    let yy = sigma_yy();
    let product = rho * yy * rho.map(|z| z.conj()) * yy;
    let eigen = Schur::try_new(product, f64::EPSILON, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or(Error::EigenSolver)?;

    let mut lambda: Vec<f64> = eigen
        .iter()
        .map(|z| if z.re < EIGEN_FLOOR { 0.0 } else { z.re })
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    let roots: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).clamp(0.0, 1.0))
}

/// Concurrence by the general eigenvalue route.
pub fn concurrence(state: &XState) -> Result<f64> {
    concurrence_of_matrix(&state.to_matrix())
}

/// X-state closed form `2 max(0, |ρ14| - √(ρ22 ρ33), |ρ23| - √(ρ11 ρ44))`.
pub fn concurrence_xstate_closed(state: &XState) -> f64 {
    let [r11, r22, r33, r44] = state.diag;
    let a = state.outer.norm() - (r22 * r33).sqrt();
    let b = state.inner.norm() - (r11 * r44).sqrt();
    2.0 * a.max(b).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::tests::arb_xstate;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn bell_state_is_maximally_entangled() {
        let bell = XState::bell_phi_plus();
        assert_abs_diff_eq!(concurrence(&bell).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(concurrence_xstate_closed(&bell), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn maximally_mixed_is_separable() {
        let mixed = XState::maximally_mixed();
        assert_eq!(concurrence(&mixed).unwrap(), 0.0);
        assert_eq!(concurrence_xstate_closed(&mixed), 0.0);
    }

    #[test]
    fn default_initial_state_has_one_third() {
        let s = XState::default_initial();
        assert_abs_diff_eq!(concurrence(&s).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(concurrence_xstate_closed(&s), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn werner_threshold_is_one_third() {
        let w = XState::werner(1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(concurrence_xstate_closed(&w), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(concurrence(&w).unwrap(), 0.0, epsilon = 1e-12);
        let w = XState::werner(0.6).unwrap();
        assert_abs_diff_eq!(concurrence(&w).unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn fully_dephased_state_is_separable() {
        let s = XState::default_initial().dephase(0.0);
        assert_eq!(concurrence(&s).unwrap(), 0.0);
    }

    #[test]
    fn non_x_pure_state() {
        // cosθ|HH⟩ + sinθ|HV⟩ is a product state.
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let psi = [c, s, 0.0, 0.0];
        let rho = Matrix4::from_fn(|i, j| Complex64::new(psi[i] * psi[j], 0.0));
        assert_abs_diff_eq!(concurrence_of_matrix(&rho).unwrap(), 0.0, epsilon = 1e-7);
        // a|HH⟩ + b|VV⟩ has C = 2|ab|.
        let psi = [c, 0.0, 0.0, s];
        let rho = Matrix4::from_fn(|i, j| Complex64::new(psi[i] * psi[j], 0.0));
        assert_abs_diff_eq!(
            concurrence_of_matrix(&rho).unwrap(),
            2.0 * c * s,
            epsilon = 1e-7
        );
    }

    proptest! {
        #[test]
        fn routes_agree(s in arb_xstate()) {
            let general = concurrence(&s).unwrap();
            let closed = concurrence_xstate_closed(&s);
            prop_assert!((general - closed).abs() < 1e-10, "{} vs {}", general, closed);
        }

        #[test]
        fn dephasing_never_increases_concurrence(s in arb_xstate(), g in 0.0f64..=1.0) {
            let before = concurrence(&s).unwrap();
            let after = concurrence(&s.dephase(g)).unwrap();
            prop_assert!(after <= before + 1e-10);
        }

        #[test]
        fn piecewise_linear_in_gamma(s in arb_xstate(), g in 0.0f64..=1.0) {
            let [r11, r22, r33, r44] = s.diag;
            let expected = 2.0 * (g * s.outer.norm() - (r22 * r33).sqrt())
                .max(g * s.inner.norm() - (r11 * r44).sqrt())
                .max(0.0);
            prop_assert!((concurrence_xstate_closed(&s.dephase(g)) - expected).abs() < 1e-14);
        }
    }
}
