//! Simulated measurement protocols in the instantaneous eigenbasis of the
//! total Hamiltonian.
//!
//! * Frozen Hamiltonian: a Ramsey sequence whose drive is held at `B(τ_m)`
//!   for a further `τ_d`; the fringe frequency is `(E₊ − E₋)/h`.
//! * Frozen population: at `τ_m` the drive is replaced by a second,
//!   counter-diabatically assisted geodesic drag to `+z`, which maps
//!   `|ψ_±(τ_m)⟩` onto `|↑⟩`, `|↓⟩` for readout.

use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Result, StaError};
use crate::evolution::{
    propagate_lindblad_sampled, propagate_pure_sampled, DissipationParams, FieldSource, PropagatorConfig,
};
use crate::fit::{fit_cosine, CosineFit};
use crate::protocol::{reduced_time, total_field, Branch, DragSchedule, Schedule};
use crate::quantum::{su2_apply, su2_matrix, FieldVector, Mat2, PureState};
use crate::units::HBAR;

/// Free-evolution span of a Ramsey record (ns).
pub const RAMSEY_SPAN_NS: usize = 1000;

/// Default duration of the population-freezing drag (ns).
pub const DEFAULT_DRAG_TIME_NS: f64 = 100.0;

/// Initial preparation by ideal instantaneous pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preparation {
    Up,
    /// π-pulse from `|↑⟩`.
    Down,
    /// π/2-pulse about y from `|↑⟩`.
    Superposition,
}

impl From<Branch> for Preparation {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Up => Preparation::Up,
            Branch::Down => Preparation::Down,
        }
    }
}

pub fn prepare_initial(prep: Preparation) -> PureState {
    match prep {
        Preparation::Up => PureState::spin_up(),
        Preparation::Down => PureState::spin_down(),
        Preparation::Superposition => ramsey_pulse_apply(&PureState::spin_up()),
    }
}

/// π/2 rotation about y: `exp(−iπσy/4)`.
fn ramsey_pulse() -> Mat2 {
    // su2_matrix rotates by |B|·dt about B̂
    su2_matrix(&FieldVector::new(0.0, 1.0, 0.0), FRAC_PI_2)
}

fn ramsey_pulse_apply(s: &PureState) -> PureState {
    su2_apply(&FieldVector::new(0.0, 1.0, 0.0), FRAC_PI_2, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyRecord {
    pub tau_m: f64,
    /// Hold times `0, 1, …, 1000` ns.
    pub tau_d: Vec<f64>,
    pub p_up: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenPopResult {
    pub tau_m: f64,
    pub n: Branch,
    pub p_plus_given_n: f64,
    pub p_minus_given_n: f64,
}

/// Eigenenergies recovered from a Ramsey record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenenergyFit {
    pub e_plus: f64,
    pub e_minus: f64,
    pub fit: CosineFit,
}

fn ramsey_hold_grid() -> Vec<f64> {
    (0..=RAMSEY_SPAN_NS).map(|k| k as f64).collect()
}

fn check_tau(sch: &dyn Schedule, tau_m: f64) -> Result<()> {
    reduced_time(sch, tau_m).map(|_| ())
}

/// Ramsey sequence with the drive frozen at `τ_m`.
///
/// A π/2 pulse about y prepares `(|↑⟩ + |↓⟩)/√2`; the total field acts
/// until `τ_m` and is then held; a second π/2 pulse about y precedes the
/// z-basis readout.
pub fn frozen_hamiltonian_run(
    sch: &dyn Schedule,
    tau_m: f64,
    cfg: &PropagatorConfig,
    diss: &DissipationParams,
) -> Result<RamseyRecord> {
    check_tau(sch, tau_m)?;
    let tau_d = ramsey_hold_grid();
    let s0 = prepare_initial(Preparation::Superposition);
    let pulse = ramsey_pulse();
    let p_up = if diss.enabled {
        let mut times = Vec::with_capacity(tau_d.len() + 1);
        times.push(0.0);
        times.extend(tau_d.iter().map(|d| tau_m + d));
        let rhos = propagate_lindblad_sampled(sch, FieldSource::Frozen { tau_m }, &times, &s0.to_density(), cfg, diss)?;
        rhos[1..]
            .iter()
            .map(|r| (pulse * *r.matrix() * pulse.dagger()).get(0, 0).re)
            .collect()
    } else {
        let at_tau = *propagate_pure_sampled(sch, FieldSource::Total, &[0.0, tau_m], &s0, cfg)?
            .last()
            .expect("two samples");
        let b = total_field(sch, tau_m)?;
        tau_d
            .iter()
            .map(|&d| {
                let s = if d == 0.0 { at_tau } else { su2_apply(&b, d, &at_tau) };
                let (up, _) = pulse.apply(&s);
                up.norm_sqr()
            })
            .collect()
    };
    Ok(RamseyRecord { tau_m, tau_d, p_up })
}

/// Fits the fringe and returns `E_± = ±ħω/2`.
pub fn extract_eigenenergies(rec: &RamseyRecord) -> Result<EigenenergyFit> {
    let fit = fit_cosine(&rec.tau_d, &rec.p_up)?;
    let span = rec.tau_d.last().copied().unwrap_or(0.0) - rec.tau_d.first().copied().unwrap_or(0.0);
    let periods = fit.omega * span / std::f64::consts::TAU;
    if periods < 3.0 {
        return Err(StaError::FitFailure(format!(
            "record spans only {periods:.2} oscillation periods"
        )));
    }
    let e_plus = 0.5 * HBAR * fit.omega;
    Ok(EigenenergyFit {
        e_plus,
        e_minus: -e_plus,
        fit,
    })
}

/// Geodesic drag from the direction of `b_start` to `+z` over `t_prime` ns,
/// at constant amplitude `|b_start|`.
pub fn make_drag_schedule(b_start: &FieldVector, t_prime: f64) -> Result<DragSchedule> {
    if !b_start.is_finite() || b_start.norm() == 0.0 {
        return Err(StaError::InvalidField(format!(
            "drag needs a nonzero start field, got {b_start:?}"
        )));
    }
    if !(t_prime > 0.0) || !t_prime.is_finite() {
        return Err(StaError::Input(format!("drag time must be positive, got {t_prime}")));
    }
    let (theta_start, phi_start) = b_start.angles();
    Ok(DragSchedule {
        amplitude: b_start.norm(),
        theta_start,
        phi_start,
        duration: t_prime,
    })
}

/// Frozen-population readout of `P_{±|n}(τ_m)`.
pub fn frozen_population_run(
    sch: &dyn Schedule,
    tau_m: f64,
    n: Branch,
    t_prime: f64,
    cfg: &PropagatorConfig,
    diss: &DissipationParams,
) -> Result<FrozenPopResult> {
    check_tau(sch, tau_m)?;
    let drag = make_drag_schedule(&total_field(sch, tau_m)?, t_prime)?;
    let s0 = prepare_initial(n.into());
    let (p_up, p_down) = if diss.enabled {
        let rho = propagate_lindblad_sampled(sch, FieldSource::Total, &[0.0, tau_m], &s0.to_density(), cfg, diss)?;
        let rho = propagate_lindblad_sampled(&drag, FieldSource::Total, &[0.0, t_prime], &rho[1], cfg, diss)?;
        (rho[1].p_up(), rho[1].p_down())
    } else {
        let s = propagate_pure_sampled(sch, FieldSource::Total, &[0.0, tau_m], &s0, cfg)?[1];
        let s = propagate_pure_sampled(&drag, FieldSource::Total, &[0.0, t_prime], &s, cfg)?[1];
        (s.up.norm_sqr(), s.down.norm_sqr())
    };
    Ok(FrozenPopResult {
        tau_m,
        n,
        p_plus_given_n: p_up,
        p_minus_given_n: p_down,
    })
}

/// Projective-readout shot noise: each probability is replaced by the
/// fraction of `shots` binomial successes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotNoise {
    pub shots: u64,
    pub seed: u64,
}

impl ShotNoise {
    /// Independent, reproducible generator for one sweep cell.
    pub fn rng_for(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn sample(&self, p: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
        if self.shots == 0 {
            return Err(StaError::Input("shot count must be positive".into()));
        }
        let dist = Binomial::new(self.shots, p.clamp(0.0, 1.0))
            .map_err(|e| StaError::Input(format!("binomial sampling: {e}")))?;
        Ok(dist.sample(rng) as f64 / self.shots as f64)
    }

    pub fn apply_record(&self, rec: &mut RamseyRecord, rng: &mut ChaCha8Rng) -> Result<()> {
        for p in rec.p_up.iter_mut() {
            *p = self.sample(*p, rng)?;
        }
        Ok(())
    }

    pub fn apply_populations(&self, res: &mut FrozenPopResult, rng: &mut ChaCha8Rng) -> Result<()> {
        let p_plus = self.sample(res.p_plus_given_n, rng)?;
        res.p_plus_given_n = p_plus;
        res.p_minus_given_n = 1.0 - p_plus;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::StandardSchedule;
    use crate::units::{mhz_to_rad_per_ns, rad_per_ns_to_mhz};
    use std::f64::consts::PI;

    #[test]
    fn preparations() {
        assert_eq!(prepare_initial(Preparation::Up), PureState::spin_up());
        assert_eq!(prepare_initial(Preparation::Down), PureState::spin_down());
        let s = prepare_initial(Preparation::Superposition);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((s.up.norm() - s.down.norm()).abs() < 1e-15);
        assert!(s.up.im.abs() < 1e-16 && s.down.im.abs() < 1e-16);
        assert!(s.up.re > 0.0 && s.down.re > 0.0);
    }

    #[test]
    fn record_grid_has_1001_samples() {
        let s = StandardSchedule::standard(25.0).unwrap();
        let rec =
            frozen_hamiltonian_run(&s, 3.0, &PropagatorConfig::default(), &DissipationParams::disabled()).unwrap();
        assert_eq!(rec.tau_d.len(), 1001);
        assert_eq!(rec.p_up.len(), 1001);
        assert_eq!(rec.tau_d[1000], 1000.0);
        assert!(rec.p_up.iter().all(|p| (-1e-9..=1.0 + 1e-9).contains(p)));
    }

    #[test]
    fn ramsey_at_start_oscillates_at_ten_mhz() {
        let s = StandardSchedule::standard(25.0).unwrap();
        let rec =
            frozen_hamiltonian_run(&s, 0.0, &PropagatorConfig::default(), &DissipationParams::disabled()).unwrap();
        let fit = extract_eigenenergies(&rec).unwrap();
        assert!((rad_per_ns_to_mhz(fit.fit.omega) - 10.0).abs() < 1e-6);
        assert!((rad_per_ns_to_mhz(fit.e_plus) - 5.0).abs() < 1e-6);
    }

    #[test]
    fn tau_out_of_range() {
        let s = StandardSchedule::standard(25.0).unwrap();
        let cfg = PropagatorConfig::default();
        let off = DissipationParams::disabled();
        assert!(matches!(
            frozen_hamiltonian_run(&s, 26.0, &cfg, &off),
            Err(StaError::Range { .. })
        ));
        assert!(matches!(
            frozen_population_run(&s, -1.0, Branch::Up, 100.0, &cfg, &off),
            Err(StaError::Range { .. })
        ));
    }

    #[test]
    fn drag_schedule_shapes() {
        let z = make_drag_schedule(&FieldVector::new(0.0, 0.0, 0.3), 100.0).unwrap();
        assert_eq!(z.theta_start, 0.0);
        assert_eq!(z.d_theta(0.5), 0.0);
        let b = FieldVector::from_spherical(0.2, PI / 3.0, 1.0);
        let d = make_drag_schedule(&b, 100.0).unwrap();
        assert!((d.theta_start - PI / 3.0).abs() < 1e-12);
        assert_eq!(d.theta(1.0), 0.0);
        assert!((d.omega(0.3) - 0.2).abs() < 1e-15);
        assert!(matches!(
            make_drag_schedule(&FieldVector::zero(), 100.0),
            Err(StaError::InvalidField(_))
        ));
    }

    #[test]
    fn population_at_start() {
        let s = StandardSchedule::standard(25.0).unwrap();
        let r = frozen_population_run(
            &s,
            0.0,
            Branch::Up,
            100.0,
            &PropagatorConfig::default(),
            &DissipationParams::disabled(),
        )
        .unwrap();
        assert!((r.p_plus_given_n - 1.0).abs() < 1e-12, "{r:?}");
        assert!(r.p_minus_given_n.abs() < 1e-12);
    }

    #[test]
    fn shot_noise_is_reproducible() {
        let noise = ShotNoise { shots: 1000, seed: 7 };
        let a: Vec<f64> = {
            let mut rng = noise.rng_for(3);
            (0..5).map(|_| noise.sample(0.3, &mut rng).unwrap()).collect()
        };
        let b: Vec<f64> = {
            let mut rng = noise.rng_for(3);
            (0..5).map(|_| noise.sample(0.3, &mut rng).unwrap()).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (p - 0.3).abs() < 0.1));
    }

    #[test]
    fn constant_field_frequency_independent_of_tau() {
        let s = DragSchedule {
            amplitude: mhz_to_rad_per_ns(12.0),
            theta_start: 0.0,
            phi_start: 0.0,
            duration: 40.0,
        };
        let cfg = PropagatorConfig::default();
        for tau in [0.0, 13.0, 40.0] {
            let rec = frozen_hamiltonian_run(&s, tau, &cfg, &DissipationParams::disabled()).unwrap();
            let f = rad_per_ns_to_mhz(extract_eigenenergies(&rec).unwrap().fit.omega);
            assert!((f - 12.0).abs() < 1e-6, "tau = {tau}: {f}");
        }
    }
}
