//! Two-point-measurement work statistics for a given initial reference
//! eigenstate `|n(0)⟩`.
//!
//! The first energy measurement projects onto `|n(0)⟩` with outcome
//! `ε_n(0)`; the second projects onto the instantaneous eigenbasis
//! `{|ψ_±(t)⟩}` of the total Hamiltonian with outcomes `E_±(t)`. Work values
//! are `E_k(t) − ε_n(0)` with probabilities `P_{k|n}(t)`.

use crate::error::{Result, StaError};
use crate::evolution::{
    propagate_lindblad_sampled, propagate_pure_sampled, DissipationParams, FieldSource, PropagatorConfig,
};
use crate::protocol::{
    cd_field_analytic, project_out, reduced_time, reference_energy, reference_state_derivative,
    reference_state_numeric, total_field, Branch, Schedule,
};
use crate::quantum::{hamiltonian_from_field, spectral_decompose, DensityMatrix, PureState, SpectralDecomposition};
use crate::units::HBAR;

/// Tolerance on `|B_cd(0)|` for the two-point-measurement precondition.
const CD_START_TOL: f64 = 1e-12;

/// Finite support `{(w_k, p_k)}` of the work distribution at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkDistribution {
    pub support: Vec<(f64, f64)>,
    pub t: f64,
    pub initial: Branch,
}

impl WorkDistribution {
    /// `Σ_k w_k^m p_k`.
    pub fn moment(&self, m: u32) -> f64 {
        self.support.iter().map(|&(w, p)| w.powi(m as i32) * p).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.support.iter().map(|&(_, p)| p).sum()
    }
}

/// First and second work moments at one grid point, with their adiabatic
/// references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRecord {
    pub tbar: f64,
    pub w1: f64,
    pub w2: f64,
    pub w1_ad: f64,
    pub w2_ad: f64,
    /// `w2 − w2_ad`.
    pub excess2: f64,
}

/// Where the adiabatic second moment comes from in
/// [`excess_fluctuation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdiabaticReference {
    /// `[ε_n(t) − ε_n(0)]²` in closed form.
    Analytic,
    /// The measured second moment of the same path run with operation time
    /// `T_ref` (ns), at the same reduced time.
    RunAtT(f64),
}

/// Operation time of the default empirical reference run, in ns.
pub const DEFAULT_REFERENCE_TIME_NS: f64 = 500.0;

impl AdiabaticReference {
    pub fn empirical() -> Self {
        AdiabaticReference::RunAtT(DEFAULT_REFERENCE_TIME_NS)
    }
}

/// Uniform reduced-time grid `0, step, …, 1`.
pub fn tbar_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || step > 1.0 {
        return Err(StaError::Input(format!("grid step must lie in (0, 1], got {step}")));
    }
    let n = (1.0 / step).round() as usize;
    if ((n as f64) * step - 1.0).abs() > 1e-9 {
        return Err(StaError::Input(format!("grid step {step} does not divide [0, 1]")));
    }
    Ok((0..=n).map(|i| i as f64 / n as f64).collect())
}

fn initial_state(branch: Branch) -> PureState {
    // reference eigenstates at t = 0, where the field lies on +z
    match branch {
        Branch::Up => PureState::spin_up(),
        Branch::Down => PureState::spin_down(),
    }
}

fn total_spectrum(sch: &dyn Schedule, t: f64) -> Result<SpectralDecomposition> {
    spectral_decompose(&hamiltonian_from_field(&total_field(sch, t)?)?)
}

fn check_initial_cd(sch: &dyn Schedule) -> Result<()> {
    let cd0 = cd_field_analytic(sch, 0.0)?;
    if cd0.norm() > CD_START_TOL {
        return Err(StaError::Protocol(format!(
            "counter-diabatic field must vanish at t = 0, |B_cd(0)| = {:e}",
            cd0.norm()
        )));
    }
    let b0 = crate::protocol::reference_field(sch, 0.0)?;
    if b0.bx.hypot(b0.by) > CD_START_TOL * b0.norm().max(1.0) || b0.bz <= 0.0 {
        return Err(StaError::Protocol("reference field must start along +z".into()));
    }
    Ok(())
}

fn probs_from_pure(sd: &SpectralDecomposition, s: &PureState) -> (f64, f64) {
    (sd.psi_plus.fidelity(s), sd.psi_minus.fidelity(s))
}

fn probs_from_density(sd: &SpectralDecomposition, rho: &DensityMatrix) -> (f64, f64) {
    (rho.population_of(&sd.psi_plus), rho.population_of(&sd.psi_minus))
}

/// `(P_{+|n}(t), P_{−|n}(t))` for a unitary run under the total field.
pub fn conditional_probs(sch: &dyn Schedule, t: f64, n: Branch, cfg: &PropagatorConfig) -> Result<(f64, f64)> {
    conditional_probs_open(sch, t, n, cfg, &DissipationParams::disabled())
}

/// Same as [`conditional_probs`], with Lindblad dissipation when `diss` is
/// enabled.
pub fn conditional_probs_open(
    sch: &dyn Schedule,
    t: f64,
    n: Branch,
    cfg: &PropagatorConfig,
    diss: &DissipationParams,
) -> Result<(f64, f64)> {
    reduced_time(sch, t)?;
    Ok(conditional_probs_on_grid(sch, &[t], n, cfg, diss)?[0])
}

/// Conditional probabilities at each of an ascending list of times in
/// `[0, T]`, from a single propagation.
pub fn conditional_probs_on_grid(
    sch: &dyn Schedule,
    times: &[f64],
    n: Branch,
    cfg: &PropagatorConfig,
    diss: &DissipationParams,
) -> Result<Vec<(f64, f64)>> {
    for &t in times {
        reduced_time(sch, t)?;
    }
    let mut path = Vec::with_capacity(times.len() + 1);
    path.push(0.0);
    path.extend_from_slice(times);
    let spectra = times
        .iter()
        .map(|&t| total_spectrum(sch, t))
        .collect::<Result<Vec<_>>>()?;
    let s0 = initial_state(n);
    if diss.enabled {
        let rhos = propagate_lindblad_sampled(sch, FieldSource::Total, &path, &s0.to_density(), cfg, diss)?;
        Ok(spectra
            .iter()
            .zip(&rhos[1..])
            .map(|(sd, r)| probs_from_density(sd, r))
            .collect())
    } else {
        let states = propagate_pure_sampled(sch, FieldSource::Total, &path, &s0, cfg)?;
        Ok(spectra
            .iter()
            .zip(&states[1..])
            .map(|(sd, s)| probs_from_pure(sd, s))
            .collect())
    }
}

/// Builds the distribution `{(E_±(t) − ε_n(0), P_{±|n}(t))}` from given
/// conditional probabilities.
pub fn distribution_from_probs(sch: &dyn Schedule, t: f64, n: Branch, probs: (f64, f64)) -> Result<WorkDistribution> {
    check_initial_cd(sch)?;
    let sd = total_spectrum(sch, t)?;
    let e0 = reference_energy(sch, 0.0, n)?;
    Ok(WorkDistribution {
        support: vec![(sd.e_plus - e0, probs.0), (sd.e_minus - e0, probs.1)],
        t,
        initial: n,
    })
}

/// Work distribution of a unitary run at time `t`.
pub fn work_distribution(sch: &dyn Schedule, t: f64, n: Branch, cfg: &PropagatorConfig) -> Result<WorkDistribution> {
    check_initial_cd(sch)?;
    let probs = conditional_probs(sch, t, n, cfg)?;
    distribution_from_probs(sch, t, n, probs)
}

/// `Σ_k w_k^m p_k`.
pub fn moments(dist: &WorkDistribution, m: u32) -> f64 {
    dist.moment(m)
}

/// `[ε_n(t) − ε_n(0)]^m`.
pub fn adiabatic_moment(sch: &dyn Schedule, t: f64, n: Branch, m: u32) -> Result<f64> {
    let dw = reference_energy(sch, t, n)? - reference_energy(sch, 0.0, n)?;
    Ok(dw.powi(m as i32))
}

/// Moment records along the reduced-time grid.
pub fn moment_records(
    sch: &dyn Schedule,
    n: Branch,
    grid: &[f64],
    cfg: &PropagatorConfig,
    diss: &DissipationParams,
) -> Result<Vec<MomentRecord>> {
    check_initial_cd(sch)?;
    let big_t = sch.duration();
    let times: Vec<f64> = grid.iter().map(|&tb| tb * big_t).collect();
    let probs = conditional_probs_on_grid(sch, &times, n, cfg, diss)?;
    grid.iter()
        .zip(&times)
        .zip(probs)
        .map(|((&tbar, &t), p)| {
            let dist = distribution_from_probs(sch, t, n, p)?;
            let (w1, w2) = (dist.moment(1), dist.moment(2));
            let (w1_ad, w2_ad) = (adiabatic_moment(sch, t, n, 1)?, adiabatic_moment(sch, t, n, 2)?);
            Ok(MomentRecord {
                tbar,
                w1,
                w2,
                w1_ad,
                w2_ad,
                excess2: w2 - w2_ad,
            })
        })
        .collect()
}

/// STA excess of work fluctuations `w2 − w2_ad` at time `t`.
pub fn excess_fluctuation(
    sch: &dyn Schedule,
    t: f64,
    n: Branch,
    cfg: &PropagatorConfig,
    reference: AdiabaticReference,
) -> Result<f64> {
    let w2 = work_distribution(sch, t, n, cfg)?.moment(2);
    let w2_ad = match reference {
        AdiabaticReference::Analytic => adiabatic_moment(sch, t, n, 2)?,
        AdiabaticReference::RunAtT(t_ref) => {
            let tbar = reduced_time(sch, t)?;
            let slow = sch.rescaled(t_ref);
            work_distribution(slow.as_ref(), tbar * t_ref, n, cfg)?.moment(2)
        }
    };
    Ok(w2 - w2_ad)
}

/// Gibbs weights `P_n(0) ∝ exp[−β ε_n(0)]` for `(up, down)`.
pub fn gibbs_weights(sch: &dyn Schedule, beta: f64) -> Result<(f64, f64)> {
    if !(beta >= 0.0) {
        return Err(StaError::Input(format!("beta must be non-negative, got {beta}")));
    }
    let e_up = reference_energy(sch, 0.0, Branch::Up)?;
    let e_dn = reference_energy(sch, 0.0, Branch::Down)?;
    if beta.is_infinite() {
        return Ok(if e_up < e_dn { (1.0, 0.0) } else { (0.0, 1.0) });
    }
    let (a, b) = (-beta * e_up, -beta * e_dn);
    let top = a.max(b);
    let (wu, wd) = ((a - top).exp(), (b - top).exp());
    Ok((wu / (wu + wd), wd / (wu + wd)))
}

/// Thermally averaged `⟨W^m(t)⟩ = Σ_n W^m_n(t) P_n(0)`.
pub fn thermal_moments(sch: &dyn Schedule, t: f64, beta: f64, m: u32, cfg: &PropagatorConfig) -> Result<f64> {
    let (pu, pd) = gibbs_weights(sch, beta)?;
    let wu = work_distribution(sch, t, Branch::Up, cfg)?.moment(m);
    let wd = work_distribution(sch, t, Branch::Down, cfg)?.moment(m);
    Ok(pu * wu + pd * wd)
}

/// `ħ² ⟨∂_t n|P⊥_n|∂_t n⟩` from gauge-smoothed finite differences of the
/// numerically diagonalized reference eigenstates.
pub fn parallel_transport_excess(sch: &dyn Schedule, t: f64, n: Branch, dt_fd: f64) -> Result<f64> {
    let (state, dn) = reference_state_derivative(sch, t, n, dt_fd)?;
    let perp = project_out(&state, dn);
    Ok(HBAR * HBAR * (perp.0.norm_sqr() + perp.1.norm_sqr()))
}

/// Largest modulus over `k ∈ {+,−}`, `n ∈ {↑,↓}` of
/// `[E_k − ε_n]⟨n|ψ_k⟩ − iħ Σ_m ⟨n|P⊥_m|∂_t m⟩⟨m|ψ_k⟩`,
/// which vanishes for the eigenstates of `H₀ + H_cd`.
pub fn eigenstate_identity_residual(sch: &dyn Schedule, t: f64, dt_fd: f64) -> Result<f64> {
    use num_complex::Complex64;
    let sd = total_spectrum(sch, t)?;
    let mut refs = Vec::with_capacity(2);
    for m in Branch::BOTH {
        let (state, dm) = reference_state_derivative(sch, t, m, dt_fd)?;
        refs.push((m, state, project_out(&state, dm)));
    }
    let mut worst = 0.0f64;
    for (e_k, psi_k) in [(sd.e_plus, sd.psi_plus), (sd.e_minus, sd.psi_minus)] {
        for (n, n_state, _) in &refs {
            let eps_n = reference_energy(sch, t, *n)?;
            let lhs = n_state.inner(&psi_k) * (e_k - eps_n);
            let mut sum = Complex64::new(0.0, 0.0);
            for (_, m_state, perp_dm) in &refs {
                let n_perp_dm = n_state.up.conj() * perp_dm.0 + n_state.down.conj() * perp_dm.1;
                sum += n_perp_dm * m_state.inner(&psi_k);
            }
            let resid = lhs - Complex64::new(0.0, HBAR) * sum;
            worst = worst.max(resid.norm());
        }
    }
    Ok(worst)
}

/// Reference eigenstate at time `t` as used by the finite-difference
/// routines.
pub fn reference_state(sch: &dyn Schedule, t: f64, n: Branch) -> Result<PureState> {
    reference_state_numeric(sch, t, n)
}
