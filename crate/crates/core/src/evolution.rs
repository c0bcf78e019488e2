//! Time propagation of pure states and density matrices.
//!
//! Pure states use the midpoint exponential rule: on each step the field is
//! sampled at the interval midpoint and the exact SU(2) propagator is applied,
//! giving a second-order method that preserves the norm to rounding.
//! Density matrices are integrated with classical RK4 on the Lindblad
//! generator.

use num_complex::Complex64;

use crate::error::{Result, StaError};
use crate::protocol::{reference_field, total_field, Schedule};
use crate::quantum::{hamiltonian_from_field, su2_apply, DensityMatrix, FieldVector, Mat2, PureState};
use crate::units::{us_to_ns, HBAR};

/// Largest admissible `dt · max(1/T1, 1/T2*)`.
const MAX_RATE_STEP: f64 = 1e-3;

/// Trace / positivity tolerance for propagated density matrices.
const LINDBLAD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    MidpointExponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    /// Step size in ns.
    pub dt: f64,
    pub method: Method,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            dt: 0.005,
            method: Method::MidpointExponential,
        }
    }
}

impl PropagatorConfig {
    pub fn with_dt(dt: f64) -> Self {
        PropagatorConfig {
            dt,
            ..Default::default()
        }
    }

    /// `dt > 0` and at most `T/100` of the schedule it drives.
    pub fn validate_for(&self, sch: &dyn Schedule) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(StaError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        let limit = sch.duration() / 100.0;
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(StaError::Config(format!(
                "dt = {} ns exceeds T/100 = {} ns",
                self.dt, limit
            )));
        }
        Ok(())
    }
}

/// Relaxation (`T1`) and pure dephasing (`T2*`) times in ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationParams {
    pub t1: f64,
    pub t2_star: f64,
    pub enabled: bool,
}

impl DissipationParams {
    pub fn new(t1: f64, t2_star: f64) -> Result<Self> {
        let p = DissipationParams {
            t1,
            t2_star,
            enabled: true,
        };
        p.validate()?;
        Ok(p)
    }

    /// The qubit's measured coherence: `T1 = 22 µs`, `T2* = 64 µs`.
    pub fn measured_device() -> Self {
        DissipationParams {
            t1: us_to_ns(22.0),
            t2_star: us_to_ns(64.0),
            enabled: true,
        }
    }

    pub fn disabled() -> Self {
        DissipationParams {
            t1: f64::INFINITY,
            t2_star: f64::INFINITY,
            enabled: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.enabled && !(self.t1 > 0.0 && self.t2_star > 0.0) {
            return Err(StaError::Config(format!(
                "coherence times must be positive (t1 = {}, t2* = {})",
                self.t1, self.t2_star
            )));
        }
        Ok(())
    }

    /// `T2 = [(2 T1)⁻¹ + (T2*)⁻¹]⁻¹`.
    pub fn t2(&self) -> f64 {
        1.0 / (0.5 / self.t1 + 1.0 / self.t2_star)
    }

    /// `(γ₁, γ_φ)` with `γ₁ = 1/T1` on `σ₋` and `γ_φ = 1/(2 T2*)` on `σz`.
    pub fn rates(&self) -> (f64, f64) {
        if !self.enabled {
            return (0.0, 0.0);
        }
        (1.0 / self.t1, 0.5 / self.t2_star)
    }
}

/// Which field drives the qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSource {
    /// `B₀(t)` only.
    Reference,
    /// `B₀(t) + B_cd(t)`.
    Total,
    /// Total field up to `tau_m`, then held at `B(tau_m)` indefinitely.
    Frozen { tau_m: f64 },
    /// A constant field, independent of the schedule.
    Constant(FieldVector),
}

impl FieldSource {
    pub fn field(&self, sch: &dyn Schedule, t: f64) -> Result<FieldVector> {
        match *self {
            FieldSource::Reference => reference_field(sch, t),
            FieldSource::Total => total_field(sch, t),
            FieldSource::Frozen { tau_m } => total_field(sch, t.min(tau_m)),
            FieldSource::Constant(b) => Ok(b),
        }
    }

    /// Time after which the field no longer changes, if any.
    fn freeze_time(&self) -> Option<f64> {
        match *self {
            FieldSource::Frozen { tau_m } => Some(tau_m),
            FieldSource::Constant(_) => Some(f64::NEG_INFINITY),
            _ => None,
        }
    }
}

fn check_interval(t0: f64, t1: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(StaError::Input(format!("need t0 ≤ t1, got [{t0}, {t1}]")));
    }
    Ok(())
}

fn steps_for(span: f64, dt: f64) -> usize {
    ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Propagates `s0` from `t0` to `t1`.
pub fn propagate_pure(
    sch: &dyn Schedule,
    source: FieldSource,
    t0: f64,
    t1: f64,
    s0: &PureState,
    cfg: &PropagatorConfig,
) -> Result<PureState> {
    cfg.validate_for(sch)?;
    check_interval(t0, t1)?;
    pure_segment(sch, source, t0, t1, *s0, cfg.dt)
}

/// Propagates through an ascending list of times and returns the state at
/// each; `times[0]` is the time at which `s0` is given.
pub fn propagate_pure_sampled(
    sch: &dyn Schedule,
    source: FieldSource,
    times: &[f64],
    s0: &PureState,
    cfg: &PropagatorConfig,
) -> Result<Vec<PureState>> {
    cfg.validate_for(sch)?;
    let mut out = Vec::with_capacity(times.len());
    let Some(&first) = times.first() else {
        return Ok(out);
    };
    let mut s = *s0;
    let mut t = first;
    out.push(s);
    for &next in &times[1..] {
        check_interval(t, next)?;
        s = pure_segment(sch, source, t, next, s, cfg.dt)?;
        t = next;
        out.push(s);
    }
    Ok(out)
}

fn pure_segment(
    sch: &dyn Schedule,
    source: FieldSource,
    t0: f64,
    t1: f64,
    mut s: PureState,
    dt: f64,
) -> Result<PureState> {
    if t1 == t0 {
        return Ok(s);
    }
    if let Some(tf) = source.freeze_time() {
        if t0 < tf && tf < t1 {
            s = pure_segment(sch, source, t0, tf, s, dt)?;
            return pure_segment(sch, source, tf, t1, s, dt);
        }
        if t0 >= tf {
            // constant field: one exact step
            let b = source.field(sch, t0)?;
            return Ok(su2_apply(&b, t1 - t0, &s));
        }
    }
    let n = steps_for(t1 - t0, dt);
    let h = (t1 - t0) / n as f64;
    for i in 0..n {
        let b = source.field(sch, t0 + (i as f64 + 0.5) * h)?;
        s = su2_apply(&b, h, &s);
    }
    Ok(s)
}

/// Right-hand side of the master equation,
/// `−(i/ħ)[H, ρ] + γ₁ D[σ₋]ρ + γ_φ D[σz]ρ`.
pub fn lindblad_rhs(h: &Mat2, rho: &Mat2, gamma1: f64, gamma_phi: f64) -> Mat2 {
    let mut d = h.commutator(rho).scale(Complex64::new(0.0, -1.0 / HBAR));
    if gamma1 > 0.0 {
        d = d + dissipator(&Mat2::sigma_minus(), rho).scale_re(gamma1);
    }
    if gamma_phi > 0.0 {
        d = d + dissipator(&Mat2::sigma_z(), rho).scale_re(gamma_phi);
    }
    d
}

/// `D[L]ρ = LρL† − ½{L†L, ρ}`.
pub fn dissipator(l: &Mat2, rho: &Mat2) -> Mat2 {
    let ld = l.dagger();
    let ldl = ld * *l;
    *l * *rho * ld - ldl.anticommutator(rho).scale_re(0.5)
}

fn check_rates(cfg: &PropagatorConfig, diss: &DissipationParams) -> Result<(f64, f64)> {
    diss.validate()?;
    let (g1, gphi) = diss.rates();
    let fastest = (g1).max(2.0 * gphi);
    if cfg.dt * fastest > MAX_RATE_STEP {
        return Err(StaError::Config(format!(
            "dt = {} ns too large for dissipation rate {fastest:e} /ns",
            cfg.dt
        )));
    }
    Ok((g1, gphi))
}

/// Integrates the Lindblad equation from `t0` to `t1`.
pub fn propagate_lindblad(
    sch: &dyn Schedule,
    source: FieldSource,
    t0: f64,
    t1: f64,
    rho0: &DensityMatrix,
    cfg: &PropagatorConfig,
    diss: &DissipationParams,
) -> Result<DensityMatrix> {
    cfg.validate_for(sch)?;
    check_interval(t0, t1)?;
    let (g1, gphi) = check_rates(cfg, diss)?;
    let m = lindblad_segment(sch, source, t0, t1, *rho0.matrix(), cfg.dt, g1, gphi)?;
    finish_density(m)
}

/// Sampled variant of [`propagate_lindblad`].
pub fn propagate_lindblad_sampled(
    sch: &dyn Schedule,
    source: FieldSource,
    times: &[f64],
    rho0: &DensityMatrix,
    cfg: &PropagatorConfig,
    diss: &DissipationParams,
) -> Result<Vec<DensityMatrix>> {
    cfg.validate_for(sch)?;
    let (g1, gphi) = check_rates(cfg, diss)?;
    let mut out = Vec::with_capacity(times.len());
    let Some(&first) = times.first() else {
        return Ok(out);
    };
    let mut m = *rho0.matrix();
    let mut t = first;
    out.push(*rho0);
    for &next in &times[1..] {
        check_interval(t, next)?;
        m = lindblad_segment(sch, source, t, next, m, cfg.dt, g1, gphi)?;
        t = next;
        out.push(finish_density(m)?);
    }
    Ok(out)
}

fn finish_density(m: Mat2) -> Result<DensityMatrix> {
    // symmetrize away rounding drift in the Hermitian part
    let m = (m + m.dagger()).scale_re(0.5);
    DensityMatrix::with_tolerance(m, LINDBLAD_TOL)
}

#[allow(clippy::too_many_arguments)]
fn lindblad_segment(
    sch: &dyn Schedule,
    source: FieldSource,
    t0: f64,
    t1: f64,
    mut rho: Mat2,
    dt: f64,
    g1: f64,
    gphi: f64,
) -> Result<Mat2> {
    if t1 == t0 {
        return Ok(rho);
    }
    if let Some(tf) = source.freeze_time() {
        if t0 < tf && tf < t1 {
            rho = lindblad_segment(sch, source, t0, tf, rho, dt, g1, gphi)?;
            return lindblad_segment(sch, source, tf, t1, rho, dt, g1, gphi);
        }
    }
    let hamiltonian = |t: f64| -> Result<Mat2> { hamiltonian_from_field(&source.field(sch, t)?) };
    let n = steps_for(t1 - t0, dt);
    let h = (t1 - t0) / n as f64;
    let constant = source.freeze_time().is_some_and(|tf| t0 >= tf);
    let h_const = if constant { Some(hamiltonian(t0)?) } else { None };
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let (ha, hm, hb) = match h_const {
            Some(hc) => (hc, hc, hc),
            None => (hamiltonian(t)?, hamiltonian(t + 0.5 * h)?, hamiltonian(t + h)?),
        };
        let k1 = lindblad_rhs(&ha, &rho, g1, gphi);
        let k2 = lindblad_rhs(&hm, &(rho + k1.scale_re(0.5 * h)), g1, gphi);
        let k3 = lindblad_rhs(&hm, &(rho + k2.scale_re(0.5 * h)), g1, gphi);
        let k4 = lindblad_rhs(&hb, &(rho + k3.scale_re(h)), g1, gphi);
        rho = rho + (k1 + k2.scale_re(2.0) + k3.scale_re(2.0) + k4).scale_re(h / 6.0);
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::StandardSchedule;

    #[test]
    fn zero_duration_is_identity() {
        let s = StandardSchedule::standard(25.0).unwrap();
        let psi = PureState::normalized(Complex64::new(0.3, 0.2), Complex64::new(0.1, -0.9)).unwrap();
        let out = propagate_pure(&s, FieldSource::Total, 7.0, 7.0, &psi, &PropagatorConfig::default()).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn config_errors() {
        let s = StandardSchedule::standard(25.0).unwrap();
        let psi = PureState::spin_up();
        for dt in [0.0, -1.0, 0.3, f64::NAN] {
            let e = propagate_pure(&s, FieldSource::Total, 0.0, 1.0, &psi, &PropagatorConfig::with_dt(dt));
            assert!(matches!(e, Err(StaError::Config(_))), "dt = {dt}");
        }
        let e = propagate_pure(&s, FieldSource::Total, 2.0, 1.0, &psi, &PropagatorConfig::default());
        assert!(matches!(e, Err(StaError::Input(_))));
    }

    #[test]
    fn rate_limit_enforced() {
        let s = StandardSchedule::standard(25.0).unwrap();
        let rho = PureState::spin_down().to_density();
        let diss = DissipationParams::new(1.0, 1.0).unwrap();
        let e = propagate_lindblad(
            &s,
            FieldSource::Total,
            0.0,
            1.0,
            &rho,
            &PropagatorConfig::default(),
            &diss,
        );
        assert!(matches!(e, Err(StaError::Config(_))));
    }

    #[test]
    fn t2_combination() {
        let d = DissipationParams::measured_device();
        let want = 1.0 / (1.0 / 44_000.0 + 1.0 / 64_000.0);
        assert!((d.t2() - want).abs() < 1e-9);
        assert!(DissipationParams::new(0.0, 5.0).is_err());
    }

    #[test]
    fn dissipator_is_traceless() {
        let rho = PureState::normalized(Complex64::new(0.6, 0.1), Complex64::new(0.2, 0.7))
            .unwrap()
            .projector();
        for l in [Mat2::sigma_minus(), Mat2::sigma_z()] {
            assert!(dissipator(&l, &rho).trace().norm() < 1e-15);
        }
    }
}
