//! Closed-form Gaussian solutions used as independent references.
#![allow(dead_code)]

use multiverse_core::{PacketState, SgParams, Spinor};
use num_complex::Complex64;

/// Exact solution for one spin component (`mu = ±1/2`) of a packet that
/// started as `(2πσ0²)^{-1/4} exp(−y²/4σ0²)` at the origin.
///
/// With force `F = C·μ·G` the solution is a free Gaussian translated by
/// `F t²/2M`, boosted by momentum `F t`, with phase `−F²t³/6M` and the
/// Zeeman phase `C·μ·B0·t`.
pub fn component(y: f64, t: f64, mu: f64, sigma0: f64, p: &SgParams) -> Complex64 {
    let m = p.mass;
    let force = p.coupling * mu * p.gradient;
    let xi = y - force * t * t / (2.0 * m);
    let spread = Complex64::new(1.0, t / (2.0 * m * sigma0 * sigma0));
    let free = (2.0 * std::f64::consts::PI * sigma0 * sigma0).powf(-0.25) / spread.sqrt()
        * (-(xi * xi) / (4.0 * sigma0 * sigma0 * spread)).exp();
    let phase = force * t * y - force * force * t.powi(3) / (6.0 * m) + p.coupling * mu * p.field * t;
    free * Complex64::from_polar(1.0, phase)
}

pub fn exact_state(spin: &Spinor, t: f64, state: &PacketState, p: &SgParams) -> (Vec<Complex64>, Vec<Complex64>) {
    let sigma0 = state.sigma0();
    let plus = state
        .positions()
        .map(|y| spin.up() * component(y, t, 0.5, sigma0, p))
        .collect();
    let minus = state
        .positions()
        .map(|y| spin.down() * component(y, t, -0.5, sigma0, p))
        .collect();
    (plus, minus)
}

/// L2 distance between the grid state and the exact solution.
pub fn l2_error(spin: &Spinor, state: &PacketState, p: &SgParams) -> f64 {
    let (plus, minus) = exact_state(spin, state.time(), state, p);
    let d: f64 = state
        .plus()
        .iter()
        .zip(&plus)
        .chain(state.minus().iter().zip(&minus))
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    (d * state.spacing()).sqrt()
}

/// `(mean, width)` of `|ψ|²` by quadrature over a wide interval.
pub fn exact_moments(t: f64, mu: f64, sigma0: f64, p: &SgParams) -> (f64, f64) {
    let (lo, hi, n) = (-200.0, 200.0, 400_000);
    let h = (hi - lo) / n as f64;
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for k in 0..=n {
        let y = lo + k as f64 * h;
        let w = component(y, t, mu, sigma0, p).norm_sqr() * if k == 0 || k == n { 0.5 } else { 1.0 };
        m0 += w;
        m1 += w * y;
        m2 += w * y * y;
    }
    let mean = m1 / m0;
    (mean, (m2 / m0 - mean * mean).sqrt())
}

/// Overlap `|∫ψ₊*ψ₋ dy|` of the two exact components by quadrature.
pub fn exact_overlap(t: f64, sigma0: f64, p: &SgParams) -> f64 {
    let (lo, hi, n) = (-200.0, 200.0, 400_000);
    let h = (hi - lo) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        let y = lo + k as f64 * h;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += component(y, t, 0.5, sigma0, p).conj() * component(y, t, -0.5, sigma0, p) * w;
    }
    (acc * h).norm()
}

/// L2 distance between two grid states.
pub fn distance(a: &PacketState, b: &PacketState) -> f64 {
    let d: f64 = a
        .plus()
        .iter()
        .zip(b.plus())
        .chain(a.minus().iter().zip(b.minus()))
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    (d * a.spacing()).sqrt()
}
