//! Quantum geometric tensor of the reference eigenstates over `(θ, φ)`,
//! its link to the excess work fluctuations, and the finite-difference
//! estimator applied to Bloch trajectories.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Result, StaError};
use crate::evolution::{
    propagate_lindblad_sampled, propagate_pure_sampled, DissipationParams, FieldSource, PropagatorConfig,
};
use crate::protocol::{project_out, Branch, Schedule};
use crate::quantum::{hamiltonian_from_field, spectral_decompose, FieldVector, PureState};
use crate::units::HBAR;
use crate::work::tbar_grid;

/// Below this polar angle (rad) the azimuth of a Bloch sample is reported
/// as 0 and flagged.
pub const POLE_THETA: f64 = 1e-6;

/// Estimator points whose stencil reaches below this polar angle (rad) are
/// flagged as having an ill-conditioned azimuth.
pub const ESTIMATOR_FLAG_THETA: f64 = 0.1;

/// Real part of the quantum geometric tensor on `(θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricTensor {
    pub g_theta_theta: f64,
    pub g_theta_phi: f64,
    pub g_phi_phi: f64,
    pub evaluated_at: (f64, f64),
}

impl GeometricTensor {
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.g_theta_theta + self.g_phi_phi);
        let half_diff = 0.5 * (self.g_theta_theta - self.g_phi_phi);
        let r = half_diff.hypot(self.g_theta_phi);
        (mean - r, mean + r)
    }

    /// `Σ g_μν v_μ v_ν` for a velocity `(θ̇, φ̇)`.
    pub fn contract(&self, d_theta: f64, d_phi: f64) -> f64 {
        self.g_theta_theta * d_theta * d_theta
            + 2.0 * self.g_theta_phi * d_theta * d_phi
            + self.g_phi_phi * d_phi * d_phi
    }

    pub fn max_abs_diff(&self, other: &GeometricTensor) -> f64 {
        (self.g_theta_theta - other.g_theta_theta)
            .abs()
            .max((self.g_theta_phi - other.g_theta_phi).abs())
            .max((self.g_phi_phi - other.g_phi_phi).abs())
    }
}

/// Bloch coordinates of the qubit at one reduced time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    pub tbar: f64,
    pub r_q: f64,
    pub theta_q: f64,
    pub phi_q: f64,
    /// Set when the polar angle is too small for a meaningful azimuth.
    pub phase_uncertain: bool,
}

/// One interior point of the geometric-quantity estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricEstimate {
    pub tbar: f64,
    /// `(1/4)[(dθ_q/dt̃)² + sin²θ_q (dφ_q/dt̃)²]`.
    pub value: f64,
    pub high_uncertainty: bool,
}

/// `g = (1/4) diag(1, sin²θ)`, identical for both branches.
pub fn qgt_analytic(theta: f64) -> GeometricTensor {
    GeometricTensor {
        g_theta_theta: 0.25,
        g_theta_phi: 0.0,
        g_phi_phi: 0.25 * theta.sin().powi(2),
        evaluated_at: (theta, 0.0),
    }
}

fn eigenstate_on_sphere(n: Branch, theta: f64, phi: f64) -> Result<PureState> {
    let h = hamiltonian_from_field(&FieldVector::from_spherical(1.0, theta, phi))?;
    let sd = spectral_decompose(&h)?;
    Ok(match n {
        Branch::Up => sd.psi_plus,
        Branch::Down => sd.psi_minus,
    })
}

/// Geometric tensor by central differences of numerically diagonalized
/// eigenstates of a unit field at `(θ, φ)`.
pub fn qgt_numeric(n: Branch, theta: f64, phi: f64, d_lambda: f64) -> Result<GeometricTensor> {
    qgt_from_states(|th, ph| eigenstate_on_sphere(n, th, ph), theta, phi, d_lambda)
}

/// Geometric tensor of an arbitrary state family `(θ, φ) ↦ |n⟩`.
///
/// Stencil states are phase-aligned to the centre state before differencing,
/// and the derivatives are projected with `P⊥_n`.
pub fn qgt_from_states<F>(states: F, theta: f64, phi: f64, d_lambda: f64) -> Result<GeometricTensor>
where
    F: Fn(f64, f64) -> Result<PureState>,
{
    if !(d_lambda > 0.0 && d_lambda <= 1e-2) {
        return Err(StaError::Input(format!(
            "d_lambda must lie in (0, 1e-2], got {d_lambda}"
        )));
    }
    let centre = states(theta, phi)?;
    let derivative = |dth: f64, dph: f64| -> Result<(Complex64, Complex64)> {
        let fwd = states(theta + dth, phi + dph)?.aligned_to(&centre);
        let bwd = states(theta - dth, phi - dph)?.aligned_to(&centre);
        let k = 1.0 / (2.0 * d_lambda);
        Ok(project_out(&centre, ((fwd.up - bwd.up) * k, (fwd.down - bwd.down) * k)))
    };
    let d_th = derivative(d_lambda, 0.0)?;
    let d_ph = derivative(0.0, d_lambda)?;
    let q = |a: (Complex64, Complex64), b: (Complex64, Complex64)| (a.0.conj() * b.0 + a.1.conj() * b.1).re;
    Ok(GeometricTensor {
        g_theta_theta: q(d_th, d_th),
        g_theta_phi: q(d_th, d_ph),
        g_phi_phi: q(d_ph, d_ph),
        evaluated_at: (theta, phi),
    })
}

/// `(1/4)[(dθ/dt̃)² + sin²θ (dφ/dt̃)²]`, the squared line element per unit
/// reduced time.
pub fn line_element_sq(sch: &dyn Schedule, tbar: f64) -> f64 {
    let (dth, dph) = (sch.d_theta(tbar), sch.d_phi(tbar));
    0.25 * (dth * dth + sch.theta(tbar).sin().powi(2) * dph * dph)
}

/// `ħ² Σ g_μν λ̇_μ λ̇_ν`, equal to
/// `(ħ²/4T²)[(dθ/dt̃)² + sin²θ (dφ/dt̃)²]`.
pub fn excess_from_qgt(sch: &dyn Schedule, tbar: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tbar) {
        return Err(StaError::Range {
            t: tbar,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let big_t = sch.duration();
    Ok(HBAR * HBAR * line_element_sq(sch, tbar) / (big_t * big_t))
}

fn bloch_from_vector(tbar: f64, r: [f64; 3]) -> BlochSample {
    let r_q = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let theta_q = if r_q > 0.0 {
        (r[2] / r_q).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    let uncertain = theta_q < POLE_THETA || (PI - theta_q) < POLE_THETA;
    let phi_q = if uncertain { 0.0 } else { r[1].atan2(r[0]) };
    BlochSample {
        tbar,
        r_q,
        theta_q,
        phi_q,
        phase_uncertain: uncertain,
    }
}

/// Makes the azimuth continuous along the trajectory.
fn unwrap_azimuth(samples: &mut [BlochSample]) {
    let mut prev: Option<f64> = None;
    for s in samples.iter_mut() {
        if s.phase_uncertain {
            continue;
        }
        if let Some(p) = prev {
            s.phi_q -= TAU * ((s.phi_q - p) / TAU).round();
        }
        prev = Some(s.phi_q);
    }
}

/// Tomography-style Bloch trajectory of `|↑⟩` driven by the total field,
/// sampled every `step` in reduced time.
pub fn bloch_trajectory(
    sch: &dyn Schedule,
    step: f64,
    cfg: &PropagatorConfig,
    diss: &DissipationParams,
) -> Result<Vec<BlochSample>> {
    let grid = tbar_grid(step)?;
    let big_t = sch.duration();
    let times: Vec<f64> = grid.iter().map(|tb| tb * big_t).collect();
    let vectors: Vec<[f64; 3]> = if diss.enabled {
        let rho0 = PureState::spin_up().to_density();
        propagate_lindblad_sampled(sch, FieldSource::Total, &times, &rho0, cfg, diss)?
            .iter()
            .map(|r| r.bloch())
            .collect()
    } else {
        propagate_pure_sampled(sch, FieldSource::Total, &times, &PureState::spin_up(), cfg)?
            .iter()
            .map(|s| s.bloch())
            .collect()
    };
    let mut samples: Vec<BlochSample> = grid
        .iter()
        .zip(vectors)
        .map(|(&tb, r)| bloch_from_vector(tb, r))
        .collect();
    unwrap_azimuth(&mut samples);
    Ok(samples)
}

/// Central-difference estimate of `[dl/dt̃]²` at interior grid points.
pub fn geometric_quantity_estimator(samples: &[BlochSample], step: f64) -> Result<Vec<GeometricEstimate>> {
    if samples.len() < 3 {
        return Err(StaError::Input(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if !(step > 0.0) {
        return Err(StaError::Input(format!("grid step must be positive, got {step}")));
    }
    for w in samples.windows(2) {
        if ((w[1].tbar - w[0].tbar) - step).abs() > 1e-9 {
            return Err(StaError::Input("samples are not on a uniform grid".into()));
        }
    }
    Ok(samples
        .windows(3)
        .map(|w| {
            let d_theta = (w[2].theta_q - w[0].theta_q) / (2.0 * step);
            let d_phi = (w[2].phi_q - w[0].phi_q) / (2.0 * step);
            let mid = &w[1];
            let value = 0.25 * (d_theta * d_theta + mid.theta_q.sin().powi(2) * d_phi * d_phi);
            let high_uncertainty = w.iter().any(|s| s.phase_uncertain || s.theta_q < ESTIMATOR_FLAG_THETA);
            GeometricEstimate {
                tbar: mid.tbar,
                value,
                high_uncertainty,
            }
        })
        .collect())
}
