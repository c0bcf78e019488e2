//! Control schedules, the reference field, the analytic counter-diabatic
//! field, and a projector-based counter-diabatic constructor that serves as
//! an independent cross-check.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Debug;

use num_complex::Complex64;

use crate::error::{Result, StaError};
use crate::quantum::{hamiltonian_from_field, spectral_decompose, FieldVector, Mat2, PureState};
use crate::units::{mhz_to_rad_per_ns, HBAR};

/// Slack (ns) tolerated at the ends of a schedule's time domain.
const DOMAIN_SLACK: f64 = 1e-9;

/// Default finite-difference step of the generic oracle, as a fraction of T.
pub const DEFAULT_FD_FRACTION: f64 = 1e-4;

/// Which reference eigenstate is tracked: `Up` is aligned with the field
/// (`ε_↑ = +ħΩ/2`), `Down` anti-aligned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Up,
    Down,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Up, Branch::Down];

    /// `+1` for `Up`, `−1` for `Down`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Up => 1.0,
            Branch::Down => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Up => "up",
            Branch::Down => "down",
        }
    }
}

/// A control path `λ(t̃) = {Ω, θ, φ}` on reduced time `t̃ = t/T ∈ [0, 1]`,
/// with analytic derivatives in `t̃`.
///
/// `omega` must stay strictly positive on `[0, 1]`.
pub trait Schedule: Debug + Send + Sync {
    /// Operation time `T` in ns.
    fn duration(&self) -> f64;
    fn omega(&self, tbar: f64) -> f64;
    fn theta(&self, tbar: f64) -> f64;
    fn phi(&self, tbar: f64) -> f64;
    fn d_omega(&self, tbar: f64) -> f64;
    fn d_theta(&self, tbar: f64) -> f64;
    fn d_phi(&self, tbar: f64) -> f64;

    /// The same path compressed or stretched to a new operation time.
    fn rescaled(&self, duration: f64) -> Box<dyn Schedule>;
}

/// The reference path used in the experiment:
/// `Ω = Ω0 + Ω1 sin(πt̃/2)`, `θ = (π/6)(1 − cos πt̃)`, `φ = (π/2)(1 − cos πt̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardSchedule {
    pub omega0: f64,
    pub omega1: f64,
    pub duration: f64,
}

impl StandardSchedule {
    /// Amplitudes in rad/ns, duration in ns.
    pub fn new(omega0: f64, omega1: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(StaError::Input(format!(
                "operation time must be positive, got {duration}"
            )));
        }
        if !(omega0 > 0.0) || !omega1.is_finite() || omega0 + omega1.min(0.0) <= 0.0 {
            return Err(StaError::Input(format!(
                "amplitude must stay positive (omega0 = {omega0}, omega1 = {omega1})"
            )));
        }
        Ok(StandardSchedule {
            omega0,
            omega1,
            duration,
        })
    }

    /// Amplitudes given as ordinary frequencies `Ω/2π` in MHz.
    pub fn from_mhz(omega0_mhz: f64, omega1_mhz: f64, duration: f64) -> Result<Self> {
        Self::new(mhz_to_rad_per_ns(omega0_mhz), mhz_to_rad_per_ns(omega1_mhz), duration)
    }

    /// `Ω0/2π = Ω1/2π = 10 MHz`.
    pub fn standard(duration: f64) -> Result<Self> {
        Self::from_mhz(10.0, 10.0, duration)
    }
}

impl Schedule for StandardSchedule {
    fn duration(&self) -> f64 {
        self.duration
    }
    fn omega(&self, tbar: f64) -> f64 {
        self.omega0 + self.omega1 * (FRAC_PI_2 * tbar).sin()
    }
    fn theta(&self, tbar: f64) -> f64 {
        (PI / 6.0) * (1.0 - (PI * tbar).cos())
    }
    fn phi(&self, tbar: f64) -> f64 {
        FRAC_PI_2 * (1.0 - (PI * tbar).cos())
    }
    fn d_omega(&self, tbar: f64) -> f64 {
        self.omega1 * FRAC_PI_2 * (FRAC_PI_2 * tbar).cos()
    }
    fn d_theta(&self, tbar: f64) -> f64 {
        (PI * PI / 6.0) * (PI * tbar).sin()
    }
    fn d_phi(&self, tbar: f64) -> f64 {
        (PI * PI / 2.0) * (PI * tbar).sin()
    }
    fn rescaled(&self, duration: f64) -> Box<dyn Schedule> {
        Box::new(StandardSchedule { duration, ..*self })
    }
}

/// Geodesic drag from a starting field direction to `+z` at fixed azimuth
/// and constant amplitude, with profile `s(t̃) = [1 − cos πt̃]/2` so that
/// the path speed vanishes at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DragSchedule {
    pub amplitude: f64,
    pub theta_start: f64,
    pub phi_start: f64,
    pub duration: f64,
}

impl DragSchedule {
    fn profile(tbar: f64) -> f64 {
        0.5 * (1.0 - (PI * tbar).cos())
    }
}

impl Schedule for DragSchedule {
    fn duration(&self) -> f64 {
        self.duration
    }
    fn omega(&self, _tbar: f64) -> f64 {
        self.amplitude
    }
    fn theta(&self, tbar: f64) -> f64 {
        self.theta_start * (1.0 - Self::profile(tbar))
    }
    fn phi(&self, _tbar: f64) -> f64 {
        self.phi_start
    }
    fn d_omega(&self, _tbar: f64) -> f64 {
        0.0
    }
    fn d_theta(&self, tbar: f64) -> f64 {
        -self.theta_start * FRAC_PI_2 * (PI * tbar).sin()
    }
    fn d_phi(&self, _tbar: f64) -> f64 {
        0.0
    }
    fn rescaled(&self, duration: f64) -> Box<dyn Schedule> {
        Box::new(DragSchedule { duration, ..*self })
    }
}

/// Maps a time in ns onto reduced time, rejecting times outside `[0, T]`.
pub fn reduced_time(sch: &dyn Schedule, t: f64) -> Result<f64> {
    let big_t = sch.duration();
    if !t.is_finite() || t < -DOMAIN_SLACK || t > big_t + DOMAIN_SLACK {
        return Err(StaError::Range { t, lo: 0.0, hi: big_t });
    }
    Ok((t / big_t).clamp(0.0, 1.0))
}

/// `B₀(t) = Ω (sinθ cosφ, sinθ sinφ, cosθ)` at `t̃ = t/T`.
pub fn reference_field(sch: &dyn Schedule, t: f64) -> Result<FieldVector> {
    let tb = reduced_time(sch, t)?;
    Ok(FieldVector::from_spherical(sch.omega(tb), sch.theta(tb), sch.phi(tb)))
}

/// Counter-diabatic field for a qubit,
///
/// ```text
/// B_cd,x = −θ̇ sinφ − φ̇ sinθ cosθ cosφ
/// B_cd,y =  θ̇ cosφ − φ̇ sinθ cosθ sinφ
/// B_cd,z =  φ̇ sin²θ
/// ```
///
/// with `θ̇ = (dθ/dt̃)/T` and `φ̇ = (dφ/dt̃)/T`.
pub fn cd_field_analytic(sch: &dyn Schedule, t: f64) -> Result<FieldVector> {
    let tb = reduced_time(sch, t)?;
    let big_t = sch.duration();
    let (th, ph) = (sch.theta(tb), sch.phi(tb));
    let (th_dot, ph_dot) = (sch.d_theta(tb) / big_t, sch.d_phi(tb) / big_t);
    let (st, ct) = th.sin_cos();
    let (sp, cp) = ph.sin_cos();
    Ok(FieldVector::new(
        -th_dot * sp - ph_dot * st * ct * cp,
        th_dot * cp - ph_dot * st * ct * sp,
        ph_dot * st * st,
    ))
}

/// `B = B₀ + B_cd`.
pub fn total_field(sch: &dyn Schedule, t: f64) -> Result<FieldVector> {
    Ok(reference_field(sch, t)? + cd_field_analytic(sch, t)?)
}

/// Closed-form reference eigenstates
/// `|s_↑⟩ = cos(θ/2)|↑⟩ + sin(θ/2)e^{iφ}|↓⟩`,
/// `|s_↓⟩ = −sin(θ/2)e^{−iφ}|↑⟩ + cos(θ/2)|↓⟩`.
pub fn reference_eigenstate(branch: Branch, theta: f64, phi: f64) -> PureState {
    let (s, c) = (0.5 * theta).sin_cos();
    let (up, down) = match branch {
        Branch::Up => (Complex64::new(c, 0.0), Complex64::from_polar(s, phi)),
        Branch::Down => (-Complex64::from_polar(s, -phi), Complex64::new(c, 0.0)),
    };
    PureState::from_unchecked(up, down)
}

/// Adiabatic eigenenergy `ε_n = ±ħΩ/2` of the reference Hamiltonian.
pub fn reference_energy(sch: &dyn Schedule, t: f64, branch: Branch) -> Result<f64> {
    let tb = reduced_time(sch, t)?;
    Ok(branch.sign() * 0.5 * HBAR * sch.omega(tb))
}

/// Numerically diagonalized reference eigenstate at time `t`.
pub(crate) fn reference_state_numeric(sch: &dyn Schedule, t: f64, branch: Branch) -> Result<PureState> {
    let sd = spectral_decompose(&hamiltonian_from_field(&reference_field(sch, t)?)?)?;
    Ok(match branch {
        Branch::Up => sd.psi_plus,
        Branch::Down => sd.psi_minus,
    })
}

/// Reference eigenstate and its time derivative from a gauge-smoothed
/// central difference of numerically diagonalized states.
///
/// The stencil states are phase-aligned to the centre state before
/// differencing.
pub fn reference_state_derivative(
    sch: &dyn Schedule,
    t: f64,
    branch: Branch,
    dt_fd: f64,
) -> Result<(PureState, (Complex64, Complex64))> {
    check_stencil(sch, t, dt_fd)?;
    let centre = reference_state_numeric(sch, t, branch)?;
    let fwd = reference_state_numeric(sch, t + dt_fd, branch)?.aligned_to(&centre);
    let bwd = reference_state_numeric(sch, t - dt_fd, branch)?.aligned_to(&centre);
    let k = 1.0 / (2.0 * dt_fd);
    Ok((centre, ((fwd.up - bwd.up) * k, (fwd.down - bwd.down) * k)))
}

pub(crate) fn check_stencil(sch: &dyn Schedule, t: f64, dt_fd: f64) -> Result<()> {
    if !(dt_fd > 0.0) || !dt_fd.is_finite() {
        return Err(StaError::Input(format!(
            "finite-difference step must be positive, got {dt_fd}"
        )));
    }
    let hi = sch.duration() - dt_fd;
    if t < dt_fd - DOMAIN_SLACK || t > hi + DOMAIN_SLACK {
        return Err(StaError::Range { t, lo: dt_fd, hi });
    }
    Ok(())
}

/// `P⊥_n |v⟩` for the projector orthogonal to `n`.
pub(crate) fn project_out(n: &PureState, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
    let ov = n.up.conj() * v.0 + n.down.conj() * v.1;
    (v.0 - n.up * ov, v.1 - n.down * ov)
}

/// Counter-diabatic Hamiltonian built directly from
/// `iħ Σ_n P⊥_n |∂_t n⟩⟨n|` with finite-difference eigenstate derivatives.
pub fn cd_hamiltonian_generic(sch: &dyn Schedule, t: f64, dt_fd: f64) -> Result<Mat2> {
    let mut h = Mat2::zero();
    for branch in Branch::BOTH {
        let (n, dn) = reference_state_derivative(sch, t, branch, dt_fd)?;
        let perp = project_out(&n, dn);
        h = h + Mat2::outer(perp, n.as_pair());
    }
    Ok(h.scale(Complex64::new(0.0, HBAR)))
}
