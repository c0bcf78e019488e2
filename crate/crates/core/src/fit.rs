//! Single-tone fit `A cos(ωτ + φ₀) + C` for uniformly sampled fringes.
//!
//! The frequency is located coarsely from the peak of a zero-padded discrete
//! spectrum, then all four parameters are refined by Levenberg–Marquardt.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Result, StaError};

/// Spectral peak must exceed this multiple of the median spectral magnitude.
const PEAK_TO_FLOOR: f64 = 8.0;

const ZERO_PAD: usize = 16;
const MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineFit {
    pub amplitude: f64,
    /// Angular frequency in rad per unit of the sample axis.
    pub omega: f64,
    /// Phase at `τ = 0`.
    pub phase: f64,
    pub offset: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

impl CosineFit {
    pub fn eval(&self, tau: f64) -> f64 {
        self.amplitude * (self.omega * tau + self.phase).cos() + self.offset
    }
}

fn check_uniform(tau: &[f64]) -> Result<f64> {
    let step = tau[1] - tau[0];
    if !(step > 0.0) {
        return Err(StaError::Input("sample axis must be increasing".into()));
    }
    for w in tau.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
            return Err(StaError::Input("samples must be uniformly spaced".into()));
        }
    }
    Ok(step)
}

/// Coarse angular frequency from the zero-padded periodogram peak, refined by
/// a parabola through the three bins around it.
fn coarse_frequency(y: &[f64], step: f64) -> Result<f64> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let nfft = (n * ZERO_PAD).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = y
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(nfft)
        .collect();
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let mags: Vec<f64> = buf[..nfft / 2].iter().map(|z| z.norm()).collect();

    // skip the DC lobe
    let first = ZERO_PAD.min(mags.len() - 1);
    let (k, &peak) = mags[first..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, m)| (i + first, m))
        .ok_or_else(|| StaError::FitFailure("empty spectrum".into()))?;
    let mut sorted = mags[first..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    if !(peak > PEAK_TO_FLOOR * floor) || peak <= 1e-9 * n as f64 {
        return Err(StaError::FitFailure(format!(
            "no spectral peak above the noise floor (peak {peak:.3e}, floor {floor:.3e})"
        )));
    }
    let delta = if k > 0 && k + 1 < mags.len() {
        let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
        let den = a - 2.0 * b + c;
        if den != 0.0 {
            0.5 * (a - c) / den
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(TAU * (k as f64 + delta) / (nfft as f64 * step))
}

/// Linear least squares for `a cos ωτ + b sin ωτ + c` at fixed `ω`.
fn linear_at(tau: &[f64], y: &[f64], omega: f64) -> Option<Vector3<f64>> {
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (&t, &v) in tau.iter().zip(y) {
        let row = Vector3::new((omega * t).cos(), (omega * t).sin(), 1.0);
        ata += row * row.transpose();
        aty += row * v;
    }
    ata.cholesky().map(|c| c.solve(&aty))
}

fn sum_sq(tau: &[f64], y: &[f64], p: &Vector4<f64>) -> f64 {
    tau.iter()
        .zip(y)
        .map(|(&t, &v)| {
            let r = p[0] * (p[1] * t + p[2]).cos() + p[3] - v;
            r * r
        })
        .sum()
}

/// Fits `A cos(ωτ + φ₀) + C` to uniformly spaced samples.
pub fn fit_cosine(tau: &[f64], y: &[f64]) -> Result<CosineFit> {
    if tau.len() != y.len() {
        return Err(StaError::Input("sample axis and values differ in length".into()));
    }
    if tau.len() < 8 {
        return Err(StaError::Input(format!("need at least 8 samples, got {}", tau.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StaError::Input("non-finite sample".into()));
    }
    let step = check_uniform(tau)?;
    let omega0 = coarse_frequency(y, step)?;

    // work on a centred axis so that ω and φ₀ decouple
    let centre = 0.5 * (tau[0] + tau[tau.len() - 1]);
    let tc: Vec<f64> = tau.iter().map(|t| t - centre).collect();
    let lin = linear_at(&tc, y, omega0).ok_or_else(|| StaError::FitFailure("singular initial linear fit".into()))?;
    let mut p = Vector4::new(lin[0].hypot(lin[1]), omega0, (-lin[1]).atan2(lin[0]), lin[2]);

    let mut lambda = 1e-3;
    let mut cost = sum_sq(&tc, y, &p);
    for _ in 0..MAX_ITER {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (&t, &v) in tc.iter().zip(y) {
            let arg = p[1] * t + p[2];
            let (s, c) = arg.sin_cos();
            let r = p[0] * c + p[3] - v;
            let j = Vector4::new(c, -p[0] * t * s, -p[0] * s, 1.0);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for i in 0..4 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-30);
            }
            let Some(delta) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + delta;
            let trial_cost = sum_sq(&tc, y, &trial);
            if trial_cost <= cost {
                let rel = (cost - trial_cost) / cost.max(1e-300);
                p = trial;
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-12);
                improved = rel > 1e-15 && delta.norm() > 1e-15 * p.norm();
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let (mut amplitude, omega, mut phase, offset) = (p[0], p[1], p[2], p[3]);
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += std::f64::consts::PI;
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(StaError::FitFailure(format!(
            "refined frequency {omega} is not positive"
        )));
    }
    // phase referred back to τ = 0
    phase = (phase - omega * centre).rem_euclid(TAU);
    Ok(CosineFit {
        amplitude,
        omega,
        phase,
        offset,
        residual: (cost / tau.len() as f64).sqrt(),
    })
}
