//! Numerical tail inversion: from a delay generating function to
//! Pr(D >= x) and the reliability index.
//!
//! The tail sequence of a lattice distribution has generating function
//! G(z) = (1 - z * D(z)) / (1 - z); its x-th coefficient is recovered by a
//! trapezoidal contour sum on a circle of radius r < 1. With 2N sample
//! points and tail values bounded by one, the aliasing error is at most
//! r^2N / (1 - r^2N), so r = 10^(-8 / (2x)) with N = x keeps it below 1e-8.

use crate::delay_gf::{GfContext, GfError};
use crate::scenario::PhyProfile;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

/// Reliability index cap: -log10 of the double-precision tail floor.
pub const THETA_CAP: f64 = 16.0;

/// One inverted tail point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcdfResult {
    /// Threshold in lattice steps.
    pub x_slots: u64,
    /// Pr(D >= x), clamped to [0, 1] after inversion noise.
    pub probability: f64,
    /// Contour radius used.
    pub radius: f64,
    /// Half the number of contour samples (N = x * l).
    pub lattice_size: u64,
    /// Reliability index -log10(probability), capped at [`THETA_CAP`].
    pub theta: f64,
}

#[derive(Debug, Error)]
pub enum CcdfError {
    #[error("threshold must be at least one lattice step")]
    ZeroThreshold,
    #[error("generating function evaluation failed even after shrinking the radius: {0}")]
    Evaluation(#[from] GfError),
}

/// Reliability index: -log10 of a violation probability, with zero (or
/// anything below the double-precision floor) capped.
pub fn reliability_index(prob: f64) -> f64 {
    let prob = prob.clamp(0.0, 1.0);
    if prob <= 0.0 {
        THETA_CAP
    } else {
        (-prob.log10()).clamp(0.0, THETA_CAP)
    }
}

/// Invert the tail probability Pr(D >= x) of the distribution behind `gf`.
///
/// `l` scales the number of contour samples (N = x * l); the default radius
/// 10^(-8/(2x)) bounds aliasing by 1e-8 and can be overridden. A failed
/// evaluation (pole proximity) is retried once with the radius squared.
pub fn invert_ccdf<F>(
    gf: F,
    x: u64,
    l: u32,
    r_override: Option<f64>,
) -> Result<CcdfResult, CcdfError>
where
    F: Fn(Complex64) -> Result<Complex64, GfError> + Sync,
{
    if x == 0 {
        return Err(CcdfError::ZeroThreshold);
    }
    let n = x * l.max(1) as u64;
    let radius = r_override.unwrap_or_else(|| 10f64.powf(-8.0 / (2.0 * x as f64)));
    match invert_at(&gf, x, n, radius) {
        Ok(prob) if prob.is_finite() => Ok(finish(x, n, radius, prob)),
        _ => {
            let shrunk = radius * radius;
            let prob = invert_at(&gf, x, n, shrunk)?;
            if !prob.is_finite() {
                return Err(CcdfError::Evaluation(GfError::Degenerate(
                    "inversion produced a non-finite value".into(),
                )));
            }
            Ok(finish(x, n, shrunk, prob))
        }
    }
}

fn finish(x: u64, n: u64, radius: f64, prob: f64) -> CcdfResult {
    let probability = prob.clamp(0.0, 1.0);
    CcdfResult {
        x_slots: x,
        probability,
        radius,
        lattice_size: n,
        theta: reliability_index(probability),
    }
}

/// Tail generating function (1 - z D(z)) / (1 - z) at one point.
fn tail_gf<F>(gf: &F, z: Complex64) -> Result<Complex64, GfError>
where
    F: Fn(Complex64) -> Result<Complex64, GfError>,
{
    let one = Complex64::new(1.0, 0.0);
    Ok((one - z * gf(z)?) / (one - z))
}

fn invert_at<F>(gf: &F, x: u64, n: u64, radius: f64) -> Result<f64, GfError>
where
    F: Fn(Complex64) -> Result<Complex64, GfError> + Sync,
{
    // Conjugate symmetry folds the 2N samples onto n = 0..N with the two
    // real-axis endpoints counted once.
    let interior: Result<Vec<f64>, GfError> = (1..n)
        .into_par_iter()
        .map(|j| {
            let theta = PI * j as f64 / n as f64;
            let z = Complex64::from_polar(radius, theta);
            // exact reduction of j*x mod 2N keeps the phase accurate for
            // large thresholds
            let k = (j * x) % (2 * n);
            let phase = Complex64::from_polar(1.0, -PI * k as f64 / n as f64);
            Ok(2.0 * (tail_gf(gf, z)? * phase).re)
        })
        .collect();
    let interior = interior?;
    let endpoint_pos = tail_gf(gf, Complex64::new(radius, 0.0))?.re;
    let endpoint_neg = tail_gf(gf, Complex64::new(-radius, 0.0))?.re
        * if x % 2 == 0 { 1.0 } else { -1.0 };

    // compensated summation; the terms alternate in sign and nearly cancel
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for term in interior.iter().copied().chain([endpoint_pos, endpoint_neg]) {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum / (2.0 * n as f64 * radius.powi(x as i32)))
}

/// Tail probability of AC `ctx.ac`'s head-of-line delay at its delay bound.
/// The bound is mapped onto the lattice by rounding.
pub fn delay_violation(
    ctx: &GfContext,
    phy: &PhyProfile,
    dmax_ms: f64,
) -> Result<CcdfResult, CcdfError> {
    let x = threshold_slots(dmax_ms, phy.delta_us);
    invert_ccdf(|z| ctx.total_delay_gf(z), x, 1, None)
}

/// Delay bound in lattice steps: round(D_max * 1000 / delta).
pub fn threshold_slots(dmax_ms: f64, delta_us: f64) -> u64 {
    (dmax_ms * 1000.0 / delta_us).round().max(1.0) as u64
}
