//! Spin-1/2 states in the measurement (μ = ±1/2) basis.
//!
//! Incoming states are parameterised by the angle θ between the spin and the
//! measurement axis. The azimuthal phase is fixed to `(cos θ/2, i·sin θ/2)`;
//! only `|up|²` is used downstream so the choice never affects counts.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Tolerance for `|up|² + |down|² = 1` on construction.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Tolerance applied when an operation receives a state that should be normalized.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

/// Born weights this close to 0 or 1 are snapped onto the boundary.
pub const WEIGHT_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("spinor is not normalized: |up|^2 + |down|^2 = {0}")]
    NotNormalized(f64),
    #[error("Born weight {0} lies outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),
}

/// Two complex amplitudes over the μ = +1/2 (`up`) and μ = −1/2 (`down`) states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spinor {
    #[serde(serialize_with = "complex_pair")]
    up: Complex64,
    #[serde(serialize_with = "complex_pair")]
    down: Complex64,
}

fn complex_pair<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl Spinor {
    pub fn new(up: Complex64, down: Complex64) -> Result<Self, SpinError> {
        let norm = up.norm_sqr() + down.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SpinError::NotNormalized(norm));
        }
        Ok(Self { up, down })
    }

    /// Builds a spinor without checking normalization. Used for amplitudes read
    /// off an evolved wavepacket, which [`born_weight`] validates on use.
    pub fn from_amplitudes(up: Complex64, down: Complex64) -> Self {
        Self { up, down }
    }

    pub fn up(&self) -> Complex64 {
        self.up
    }

    pub fn down(&self) -> Complex64 {
        self.down
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// Multiplies both amplitudes by `e^{iφ}`.
    pub fn with_global_phase(self, phi: f64) -> Self {
        let phase = Complex64::from_polar(1.0, phi);
        Self {
            up: self.up * phase,
            down: self.down * phase,
        }
    }
}

/// Spin state at angle `theta` (radians) from the measurement axis.
///
/// The angle is reduced into `[0, 2π)` first, so `theta` and `theta + 2π`
/// produce the same spinor.
pub fn make_skew_state(theta: f64) -> Result<Spinor, SpinError> {
    if !theta.is_finite() {
        return Err(SpinError::NonFiniteAngle(theta));
    }
    let half = 0.5 * theta.rem_euclid(TAU);
    Ok(Spinor {
        up: Complex64::new(half.cos(), 0.0),
        down: Complex64::new(0.0, half.sin()),
    })
}

/// `|⟨μ=+1/2|state⟩|²`, the weight of the plus outcome.
pub fn born_weight(state: &Spinor) -> Result<f64, SpinError> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(SpinError::NotNormalized(norm));
    }
    clamp_weight(state.up.norm_sqr())
}

/// `cos²(θ/2)` evaluated as `(1 + cos θ)/2`.
///
/// This form lands exactly on 1/2 at θ = π/2 in double precision, which
/// `cos(π/4)²` does not.
pub fn skew_born_weight(theta: f64) -> Result<f64, SpinError> {
    if !theta.is_finite() {
        return Err(SpinError::NonFiniteAngle(theta));
    }
    clamp_weight(0.5 * (1.0 + theta.cos()))
}

/// Snaps `q` onto `[0, 1]` if it is within [`WEIGHT_CLAMP`] of the interval,
/// rejects it otherwise.
pub fn clamp_weight(q: f64) -> Result<f64, SpinError> {
    if !(-WEIGHT_CLAMP..=1.0 + WEIGHT_CLAMP).contains(&q) {
        return Err(SpinError::WeightOutOfRange(q));
    }
    Ok(q.clamp(0.0, 1.0))
}

/// Universe multiplicities of the two outcomes of one measurement.
///
/// Only `q` is stored; `f = 2q` and `g = 2 − f` are derived so that
/// `f + g = 2` holds in floating point as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchWeights {
    q: f64,
}

impl BranchWeights {
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Multiplicity of the plus branch.
    pub fn f(&self) -> f64 {
        2.0 * self.q
    }

    /// Multiplicity of the minus branch.
    pub fn g(&self) -> f64 {
        2.0 - self.f()
    }
}

pub fn branch_weights(q: f64) -> Result<BranchWeights, SpinError> {
    Ok(BranchWeights { q: clamp_weight(q)? })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    use proptest::prelude::*;

    use super::*;

    #[test]
    fn aligned_and_anti_aligned() {
        let s = make_skew_state(0.0).unwrap();
        assert_eq!(s.up(), Complex64::new(1.0, 0.0));
        assert_eq!(s.down(), Complex64::new(0.0, 0.0));

        let s = make_skew_state(PI).unwrap();
        assert!(s.up().norm() < 1e-15);
        assert!((s.down() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(born_weight(&s).unwrap() < 1e-30);
    }

    #[test]
    fn equal_split_at_right_angle() {
        let s = make_skew_state(FRAC_PI_2).unwrap();
        assert!((s.up().norm_sqr() - 0.5).abs() < 1e-15);
        assert!((s.down().norm_sqr() - 0.5).abs() < 1e-15);
        assert!((born_weight(&s).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(skew_born_weight(FRAC_PI_2).unwrap(), 0.5);
    }

    #[test]
    fn weight_at_two_thirds_pi() {
        // cos(π/3) = 1/2
        let s = make_skew_state(2.0 * FRAC_PI_3).unwrap();
        assert!((born_weight(&s).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(born_weight(&make_skew_state(0.0).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn angle_reduced_mod_two_pi() {
        let a = make_skew_state(0.7).unwrap();
        let b = make_skew_state(0.7 + TAU).unwrap();
        assert!((a.up() - b.up()).norm() < 1e-12);
        assert!((a.down() - b.down()).norm() < 1e-12);
        assert!(make_skew_state(f64::NAN).is_err());
    }

    #[test]
    fn rejects_unnormalized() {
        let s = Spinor::from_amplitudes(Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0));
        assert!(matches!(born_weight(&s), Err(SpinError::NotNormalized(_))));
        assert!(Spinor::new(Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn branch_weight_examples() {
        let w = branch_weights(0.5).unwrap();
        assert_eq!((w.f(), w.g()), (1.0, 1.0));
        let w = branch_weights(1.0).unwrap();
        assert_eq!((w.f(), w.g()), (2.0, 0.0));
        let w = branch_weights(0.75).unwrap();
        assert_eq!((w.f(), w.g()), (1.5, 0.5));
    }

    #[test]
    fn weight_clamping() {
        assert_eq!(branch_weights(1.0 + 5e-13).unwrap().q(), 1.0);
        assert_eq!(branch_weights(-5e-13).unwrap().q(), 0.0);
        assert!(branch_weights(1.0 + 1e-9).is_err());
        assert!(branch_weights(-0.1).is_err());
        assert!(branch_weights(f64::NAN).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn skew_state_is_normalized(theta in -20.0f64..20.0) {
            let s = make_skew_state(theta).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn weight_is_cos_squared(theta in -20.0f64..20.0) {
            let q = born_weight(&make_skew_state(theta).unwrap()).unwrap();
            prop_assert!((q - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
            prop_assert!((q - skew_born_weight(theta).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn weights_sum_to_two(q in 0.0f64..=1.0) {
            let w = branch_weights(q).unwrap();
            prop_assert_eq!(w.f() + w.g(), 2.0);
            prop_assert!(w.g() >= 0.0);
        }

        #[test]
        fn weight_ignores_global_phase(theta in 0.0f64..TAU, phi in -10.0f64..10.0) {
            let s = make_skew_state(theta).unwrap();
            let a = born_weight(&s).unwrap();
            let b = born_weight(&s.with_global_phase(phi)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
