//! Split-operator propagation of a spinor wavepacket through a Stern-Gerlach
//! field gradient.
//!
//! Units are natural (ħ = 1). Along the gradient axis the Hamiltonian is
//!
//! ```text
//! H = p²/2M − C μ B0 − C μ y G,   μ = ±1/2
//! ```
//!
//! which is diagonal in μ, so the two spin components evolve independently,
//! each in its own linear potential. The grid is periodic over `[−L/2, L/2)`;
//! instead of absorbing layers the solver refuses to run once a packet would
//! come within five widths of the edge.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use thiserror::Error;

use crate::spin::Spinor;

/// Packets must stay this many widths away from the grid edge.
pub const BOUNDARY_WIDTHS: f64 = 5.0;

/// Minimum initial width in grid spacings.
pub const MIN_SIGMA_SPACINGS: f64 = 8.0;

/// Components with less population than this are treated as absent.
pub const EMPTY_POPULATION: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("initial width {sigma0} is below {MIN_SIGMA_SPACINGS} grid spacings ({spacing})")]
    Resolution { sigma0: f64, spacing: f64 },
    #[error("packet reaches the boundary region at t = {t}: extent {extent} vs half-length {half_length}")]
    Boundary { t: f64, extent: f64, half_length: f64 },
    #[error("evolution time must be finite and nonnegative, got {0}")]
    InvalidDuration(f64),
    #[error("state has {got} grid points but the parameters describe {expected}")]
    GridMismatch { got: usize, expected: usize },
}

/// Physical constants and discretization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgParams {
    /// Particle mass M.
    pub mass: f64,
    /// Magnetic-moment scale C.
    pub coupling: f64,
    /// Uniform field B0 at the packet centre.
    pub field: f64,
    /// Field gradient G = ∂B/∂y.
    pub gradient: f64,
    /// Initial packet width σ0.
    pub sigma0: f64,
    /// Grid length L; the grid covers `[−L/2, L/2)`.
    pub grid_length: f64,
    /// Number of grid points, a power of two.
    pub grid_points: usize,
    pub dt: f64,
    pub t_final: f64,
}

impl Default for SgParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            coupling: 1.0,
            field: 0.0,
            gradient: 1.0,
            sigma0: 0.5,
            grid_length: 64.0,
            grid_points: 1024,
            dt: 1e-3,
            t_final: 4.0,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> DynamicsError {
    DynamicsError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl SgParams {
    /// Range checks on every field. The boundary guard is separate, see
    /// [`SgParams::check_boundary`].
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let finite = [
            ("mass", self.mass),
            ("coupling", self.coupling),
            ("field", self.field),
            ("gradient", self.gradient),
            ("sigma0", self.sigma0),
            ("grid_length", self.grid_length),
            ("dt", self.dt),
            ("t_final", self.t_final),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(invalid(name, format!("{value} is not finite")));
            }
        }
        if self.mass <= 0.0 {
            return Err(invalid("mass", "must be positive"));
        }
        if self.grid_length <= 0.0 {
            return Err(invalid("grid_length", "must be positive"));
        }
        if self.grid_points < 16 || !self.grid_points.is_power_of_two() {
            return Err(invalid(
                "grid_points",
                format!("{} is not a power of two >= 16", self.grid_points),
            ));
        }
        if self.dt <= 0.0 {
            return Err(invalid("dt", "must be positive"));
        }
        if self.t_final < 0.0 {
            return Err(invalid("t_final", "must be nonnegative"));
        }
        if self.sigma0 <= 0.0 {
            return Err(invalid("sigma0", "must be positive"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.grid_length / self.grid_points as f64
    }

    /// Ehrenfest displacement `C·G·t²/(4M)` of the μ = +1/2 component.
    pub fn displacement(&self, t: f64) -> f64 {
        self.coupling * self.gradient * t * t / (4.0 * self.mass)
    }

    /// Width of a freely spreading Gaussian that started with width `sigma0`.
    pub fn free_width(&self, sigma0: f64, t: f64) -> f64 {
        let r = t / (2.0 * self.mass * sigma0 * sigma0);
        sigma0 * (1.0 + r * r).sqrt()
    }

    /// Predicted guard at time `t` for a packet launched from the origin.
    pub fn check_boundary(&self, sigma0: f64, t: f64) -> Result<(), DynamicsError> {
        let extent = self.displacement(t).abs() + BOUNDARY_WIDTHS * self.free_width(sigma0, t);
        let half_length = 0.5 * self.grid_length;
        if extent >= half_length {
            return Err(DynamicsError::Boundary { t, extent, half_length });
        }
        Ok(())
    }

    /// Number of steps used for a requested duration, rounded to the nearest.
    pub fn steps_for(&self, duration: f64) -> usize {
        (duration / self.dt).round() as usize
    }
}

/// Spinor-valued wavefunction on the periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketState {
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
    grid_length: f64,
    sigma0: f64,
    t: f64,
}

impl PacketState {
    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn spacing(&self) -> f64 {
        self.grid_length / self.len() as f64
    }

    pub fn position(&self, k: usize) -> f64 {
        -0.5 * self.grid_length + k as f64 * self.spacing()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.position(k))
    }

    /// μ = +1/2 component ψ₊(y_k).
    pub fn plus(&self) -> &[Complex64] {
        &self.plus
    }

    /// μ = −1/2 component ψ₋(y_k).
    pub fn minus(&self) -> &[Complex64] {
        &self.minus
    }

    /// `Σ_k (|ψ₊|² + |ψ₋|²)·Δy`
    pub fn norm(&self) -> f64 {
        let dy = self.spacing();
        (sum_sqr(&self.plus) + sum_sqr(&self.minus)) * dy
    }
}

fn sum_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}

/// Gaussian packet at the origin with zero mean momentum and the spin factor
/// applied uniformly. `|ψ|² ∝ exp(−y²/(2σ0²))`.
pub fn init_packet(spin: &Spinor, sigma0: f64, params: &SgParams) -> Result<PacketState, DynamicsError> {
    params.validate()?;
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(invalid("sigma0", "must be positive"));
    }
    let spacing = params.spacing();
    if sigma0 < MIN_SIGMA_SPACINGS * spacing * (1.0 - 1e-12) {
        return Err(DynamicsError::Resolution { sigma0, spacing });
    }
    let n = params.grid_points;
    let mut profile: Vec<f64> = (0..n)
        .map(|k| {
            let y = -0.5 * params.grid_length + k as f64 * spacing;
            (-y * y / (4.0 * sigma0 * sigma0)).exp()
        })
        .collect();
    let norm = (profile.iter().map(|a| a * a).sum::<f64>() * spacing).sqrt();
    profile.iter_mut().for_each(|a| *a /= norm);

    Ok(PacketState {
        plus: profile.iter().map(|&a| spin.up() * a).collect(),
        minus: profile.iter().map(|&a| spin.down() * a).collect(),
        grid_length: params.grid_length,
        sigma0,
        t: 0.0,
    })
}

/// Component means, widths, populations and the normalized cross-component
/// overlap of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitDiagnostics {
    pub mean_y_plus: f64,
    pub mean_y_minus: f64,
    pub width_plus: f64,
    pub width_minus: f64,
    pub pop_plus: f64,
    pub pop_minus: f64,
    /// `|∫ψ₊*ψ₋ dy| / sqrt(pop₊·pop₋)`, zero when either component is empty.
    pub spatial_overlap: f64,
}

struct Moments {
    pop: f64,
    mean: f64,
    width: f64,
}

fn moments(state: &PacketState, psi: &[Complex64]) -> Moments {
    let dy = state.spacing();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (y, z) in state.positions().zip(psi) {
        let w = z.norm_sqr();
        m0 += w;
        m1 += w * y;
        m2 += w * y * y;
    }
    let pop = m0 * dy;
    if pop < EMPTY_POPULATION {
        return Moments {
            pop,
            mean: 0.0,
            width: 0.0,
        };
    }
    let mean = m1 / m0;
    let var = (m2 / m0 - mean * mean).max(0.0);
    Moments {
        pop,
        mean,
        width: var.sqrt(),
    }
}

pub fn diagnostics(state: &PacketState) -> SplitDiagnostics {
    let p = moments(state, &state.plus);
    let m = moments(state, &state.minus);
    let spatial_overlap = if p.pop < EMPTY_POPULATION || m.pop < EMPTY_POPULATION {
        0.0
    } else {
        let cross: Complex64 = state.plus.iter().zip(&state.minus).map(|(a, b)| a.conj() * b).sum();
        (cross * state.spacing()).norm() / (p.pop * m.pop).sqrt()
    };
    SplitDiagnostics {
        mean_y_plus: p.mean,
        mean_y_minus: m.mean,
        width_plus: p.width,
        width_minus: m.width,
        pop_plus: p.pop,
        pop_minus: m.pop,
        spatial_overlap,
    }
}

/// Spin populations `(q₊, q₋)`; `q₊` is the measured Born weight.
pub fn extract_branch_amplitudes(state: &PacketState) -> (f64, f64) {
    let dy = state.spacing();
    (sum_sqr(&state.plus) * dy, sum_sqr(&state.minus) * dy)
}

/// One Strang step per call: half potential kick, spectral kinetic drift,
/// half potential kick.
pub struct Propagator {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `exp(−i k² dt / 2M) / n`; the `1/n` undoes the unnormalized inverse FFT.
    kinetic: Vec<Complex64>,
    half_kick_plus: Vec<Complex64>,
    half_kick_minus: Vec<Complex64>,
    scratch: Vec<Complex64>,
    dt: f64,
}

impl Propagator {
    pub fn new(params: &SgParams) -> Result<Self, DynamicsError> {
        params.validate()?;
        let n = params.grid_points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch = vec![Complex64::default(); forward.get_inplace_scratch_len()];

        let dk = std::f64::consts::TAU / params.grid_length;
        let kinetic = (0..n)
            .map(|j| {
                let index = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                let k = index * dk;
                Complex64::from_polar(1.0 / n as f64, -k * k * params.dt / (2.0 * params.mass))
            })
            .collect();

        let spacing = params.spacing();
        let kick = |mu: f64| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    let y = -0.5 * params.grid_length + k as f64 * spacing;
                    let v = -params.coupling * mu * (params.field + params.gradient * y);
                    Complex64::from_polar(1.0, -v * 0.5 * params.dt)
                })
                .collect()
        };

        Ok(Self {
            forward,
            inverse,
            kinetic,
            half_kick_plus: kick(0.5),
            half_kick_minus: kick(-0.5),
            scratch,
            dt: params.dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&mut self, state: &mut PacketState) {
        self.step_component(&mut state.plus, true);
        self.step_component(&mut state.minus, false);
        state.t += self.dt;
    }

    pub fn advance(&mut self, state: &mut PacketState, steps: usize) {
        for _ in 0..steps {
            self.step(state);
        }
    }

    fn step_component(&mut self, psi: &mut [Complex64], plus: bool) {
        let kick = if plus {
            &self.half_kick_plus
        } else {
            &self.half_kick_minus
        };
        psi.iter_mut().zip(kick).for_each(|(z, k)| *z *= k);
        self.forward.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(&self.kinetic).for_each(|(z, k)| *z *= k);
        self.inverse.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(kick).for_each(|(z, k)| *z *= k);
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub norm: f64,
    pub diagnostics: SplitDiagnostics,
}

impl Sample {
    pub fn of(state: &PacketState) -> Self {
        Self {
            t: state.time(),
            norm: state.norm(),
            diagnostics: diagnostics(state),
        }
    }
}

fn check_measured_extent(state: &PacketState) -> Result<(), DynamicsError> {
    let d = diagnostics(state);
    let half_length = 0.5 * state.grid_length;
    let components = [
        (d.pop_plus, d.mean_y_plus, d.width_plus),
        (d.pop_minus, d.mean_y_minus, d.width_minus),
    ];
    for (pop, mean, width) in components {
        if pop < EMPTY_POPULATION {
            continue;
        }
        let extent = mean.abs() + BOUNDARY_WIDTHS * width;
        if extent >= half_length {
            return Err(DynamicsError::Boundary {
                t: state.time(),
                extent,
                half_length,
            });
        }
    }
    Ok(())
}

fn check_state(state: &PacketState, params: &SgParams) -> Result<(), DynamicsError> {
    params.validate()?;
    if state.len() != params.grid_points {
        return Err(DynamicsError::GridMismatch {
            got: state.len(),
            expected: params.grid_points,
        });
    }
    Ok(())
}

/// Evolves `state` forward by `duration`, rounded to a whole number of steps.
/// The time actually reached is `state.time()` of the result.
pub fn evolve(state: PacketState, params: &SgParams, duration: f64) -> Result<PacketState, DynamicsError> {
    evolve_recorded(state, params, duration, None).map(|(state, _)| state)
}

/// Like [`evolve`], also recording a [`Sample`] at the start and then every
/// `record_every` (rounded to whole steps, at least one step) plus the end.
pub fn evolve_recorded(
    mut state: PacketState,
    params: &SgParams,
    duration: f64,
    record_every: Option<f64>,
) -> Result<(PacketState, Vec<Sample>), DynamicsError> {
    check_state(&state, params)?;
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(DynamicsError::InvalidDuration(duration));
    }
    let steps = params.steps_for(duration);
    let t_end = state.time() + steps as f64 * params.dt;
    params.check_boundary(state.sigma0(), t_end)?;
    check_measured_extent(&state)?;

    let chunk = match record_every {
        Some(every) if every.is_finite() && every > 0.0 => params.steps_for(every).max(1),
        Some(every) => return Err(DynamicsError::InvalidDuration(every)),
        None => steps.max(1),
    };

    let mut propagator = Propagator::new(params)?;
    let mut samples = Vec::new();
    if record_every.is_some() {
        samples.push(Sample::of(&state));
    }
    let start = state.time();
    let mut done = 0;
    while done < steps {
        let n = chunk.min(steps - done);
        propagator.advance(&mut state, n);
        done += n;
        // absolute time from the step count avoids drift from repeated `t += dt`
        state.t = start + done as f64 * params.dt;
        check_measured_extent(&state)?;
        if record_every.is_some() {
            samples.push(Sample::of(&state));
        }
    }
    Ok((state, samples))
}

/// Squared overlap of the unitarily evolved state with the detected minus
/// branch `|μ=−1/2, Y₋⟩`, taken as the evolved minus component renormalized.
///
/// Equals the minus population `sin²(θ/2)`, so it is strictly below one
/// whenever the plus branch is populated. Returns 0 when there is no minus
/// branch at all.
pub fn projection_infidelity(theta: f64, params: &SgParams) -> Result<f64, DynamicsError> {
    let spin = crate::spin::make_skew_state(theta).map_err(|e| invalid("theta", e.to_string()))?;
    let state = init_packet(&spin, params.sigma0, params)?;
    let state = evolve(state, params, params.t_final)?;

    let dy = state.spacing();
    let minus_norm = (sum_sqr(state.minus()) * dy).sqrt();
    if minus_norm * minus_norm < EMPTY_POPULATION {
        return Ok(0.0);
    }
    // ⟨χ|ψ⟩ with χ = (0, ψ₋/‖ψ₋‖)
    let overlap: Complex64 = state
        .minus()
        .iter()
        .map(|z| (z / minus_norm).conj() * z)
        .sum::<Complex64>()
        * dy;
    Ok(overlap.norm_sqr())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::spin::make_skew_state;

    fn small() -> SgParams {
        SgParams {
            grid_points: 512,
            grid_length: 32.0,
            dt: 5e-3,
            t_final: 1.0,
            ..SgParams::default()
        }
    }

    #[test]
    fn defaults_are_valid_and_guarded() {
        let p = SgParams::default();
        p.validate().unwrap();
        p.check_boundary(p.sigma0, p.t_final).unwrap();
        assert_eq!(p.spacing(), 0.0625);
    }

    #[test]
    fn rejects_bad_params() {
        let bad = [
            SgParams { mass: 0.0, ..small() },
            SgParams {
                grid_points: 100,
                ..small()
            },
            SgParams {
                grid_points: 8,
                ..small()
            },
            SgParams { dt: 0.0, ..small() },
            SgParams {
                grid_length: -1.0,
                ..small()
            },
            SgParams {
                t_final: -1.0,
                ..small()
            },
            SgParams {
                coupling: f64::NAN,
                ..small()
            },
        ];
        for p in bad {
            assert!(
                matches!(p.validate(), Err(DynamicsError::InvalidParameter { .. })),
                "{p:?}"
            );
        }
    }

    #[test]
    fn init_aligned_packet() {
        let p = small();
        let s = init_packet(&make_skew_state(0.0).unwrap(), 0.5, &p).unwrap();
        let d = diagnostics(&s);
        assert!((d.pop_plus - 1.0).abs() < 1e-12);
        assert_eq!(d.pop_minus, 0.0);
        assert!(d.mean_y_plus.abs() < 1e-12);
        assert!((d.width_plus - 0.5).abs() < 1e-9);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn init_equal_superposition() {
        let p = small();
        let s = init_packet(&make_skew_state(FRAC_PI_2).unwrap(), 0.5, &p).unwrap();
        let d = diagnostics(&s);
        assert!((d.pop_plus - 0.5).abs() < 1e-12);
        assert!((d.spatial_overlap - 1.0).abs() < 1e-6);
    }

    #[test]
    fn resolution_error() {
        let p = small();
        let spin = make_skew_state(0.0).unwrap();
        assert!(matches!(
            init_packet(&spin, p.spacing(), &p),
            Err(DynamicsError::Resolution { .. })
        ));
        init_packet(&spin, 8.0 * p.spacing(), &p).unwrap();
    }

    #[test]
    fn time_is_rounded_to_steps() {
        let p = small();
        let s = init_packet(&make_skew_state(0.0).unwrap(), 0.5, &p).unwrap();
        let s = evolve(s, &p, 0.0124).unwrap();
        assert!((s.time() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn no_force_means_no_drift() {
        let p = SgParams {
            gradient: 0.0,
            ..small()
        };
        let s = init_packet(&make_skew_state(FRAC_PI_2).unwrap(), 0.5, &p).unwrap();
        let s = evolve(s, &p, 1.0).unwrap();
        let d = diagnostics(&s);
        assert!(d.mean_y_plus.abs() < 1e-10);
        assert!(d.mean_y_minus.abs() < 1e-10);
        let expected = p.free_width(0.5, 1.0);
        assert!((d.width_plus - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn boundary_guard() {
        let p = SgParams {
            t_final: 20.0,
            ..small()
        };
        let s = init_packet(&make_skew_state(FRAC_PI_2).unwrap(), 0.5, &p).unwrap();
        assert!(matches!(evolve(s, &p, p.t_final), Err(DynamicsError::Boundary { .. })));
    }

    #[test]
    fn grid_mismatch() {
        let p = small();
        let s = init_packet(&make_skew_state(0.0).unwrap(), 0.5, &p).unwrap();
        let other = SgParams {
            grid_points: 1024,
            ..small()
        };
        assert!(matches!(
            evolve(s, &other, 0.1),
            Err(DynamicsError::GridMismatch { .. })
        ));
    }

    #[test]
    fn recorded_samples() {
        let p = small();
        let s = init_packet(&make_skew_state(FRAC_PI_2).unwrap(), 0.5, &p).unwrap();
        let (_, samples) = evolve_recorded(s, &p, 1.0, Some(0.25)).unwrap();
        let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for s in &samples {
            assert!((s.norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn infidelity_limits() {
        let p = small();
        assert!(projection_infidelity(0.0, &p).unwrap().abs() < 1e-9);
        assert!((projection_infidelity(PI, &p).unwrap() - 1.0).abs() < 1e-6);
        assert!((projection_infidelity(FRAC_PI_2, &p).unwrap() - 0.5).abs() < 1e-6);
    }
}
