//! Sweeps behind each subcommand. Every sweep returns tables in a fixed
//! order, so output is independent of scheduling.

use rayon::prelude::*;

use sta_core::geometry::{bloch_trajectory, geometric_quantity_estimator, line_element_sq};
use sta_core::lab::{extract_eigenenergies, frozen_hamiltonian_run, frozen_population_run};
use sta_core::protocol::{cd_field_analytic, reference_field, total_field};
use sta_core::quantum::{hamiltonian_from_field, spectral_decompose};
use sta_core::units::{energy2_to_hmhz2, energy_to_hmhz, rad_per_ns_to_mhz};
use sta_core::verify::{run_all, CriterionOutcome};
use sta_core::work::{conditional_probs_on_grid, moment_records, tbar_grid};
use sta_core::{Branch, Result as CoreResult, StandardSchedule};

use crate::config::RunConfig;
use crate::csv::{time_tag, Cell, Table};
use crate::CliError;

pub const FIELDS_HEADER: [&str; 10] = ["t_ns", "b0x", "b0y", "b0z", "bcdx", "bcdy", "bcdz", "bx", "by", "bz"];
pub const EIGEN_HEADER: [&str; 6] = [
    "tau_m_ns",
    "e_plus_mhz",
    "e_minus_mhz",
    "e_plus_exact_mhz",
    "fit_residual",
    "status",
];
pub const POP_HEADER: [&str; 5] = ["tau_m_ns", "p_plus", "p_minus", "p_plus_exact", "p_minus_exact"];
pub const MOMENTS_HEADER: [&str; 6] = ["tbar", "w1_hmhz", "w2_hmhz2", "w1_ad", "w2_ad", "excess2"];
pub const QGT_HEADER: [&str; 6] = [
    "tbar",
    "T2_excess2",
    "dl_dt_sq_estimator",
    "dl_dt_sq_analytic",
    "theta_q",
    "phi_q",
];
pub const VERIFY_HEADER: [&str; 4] = ["criterion_id", "status", "measured", "tolerance"];

fn schedule(cfg: &RunConfig, t: f64) -> CoreResult<StandardSchedule> {
    StandardSchedule::from_mhz(cfg.omega0_mhz, cfg.omega1_mhz, t)
}

/// Whole-nanosecond measurement times `0, 1, …, ⌊T⌋`.
fn tau_grid(t: f64) -> Vec<f64> {
    (0..=t.floor() as usize).map(|k| k as f64).collect()
}

fn mhz(v: f64) -> Cell {
    Cell::Num(rad_per_ns_to_mhz(v))
}

pub fn fields(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let grid = tbar_grid(cfg.grid_step_tbar)?;
    cfg.operation_times_ns
        .par_iter()
        .map(|&t| {
            let sch = schedule(cfg, t)?;
            let mut table = Table::new(format!("fields_T{}.csv", time_tag(t)), &FIELDS_HEADER);
            for tb in &grid {
                let time = tb * t;
                let (b0, bcd, b) = (
                    reference_field(&sch, time)?,
                    cd_field_analytic(&sch, time)?,
                    total_field(&sch, time)?,
                );
                let mut row = vec![Cell::Num(time)];
                row.extend([b0, bcd, b].iter().flat_map(|f| f.as_array()).map(mhz));
                table.push(row);
            }
            Ok(table)
        })
        .collect()
}

struct EigenCell {
    t_index: usize,
    tau: f64,
    row: Vec<Cell>,
}

pub fn eigenenergies(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let (prop, diss, noise) = (cfg.propagator(), cfg.dissipation(), cfg.shot_noise());
    let schedules: Vec<StandardSchedule> = cfg
        .operation_times_ns
        .iter()
        .map(|&t| schedule(cfg, t))
        .collect::<CoreResult<_>>()?;
    let cells: Vec<(usize, f64)> = schedules
        .iter()
        .enumerate()
        .flat_map(|(i, s)| tau_grid(s.duration).into_iter().map(move |tau| (i, tau)))
        .collect();
    let mut rows: Vec<EigenCell> = cells
        .par_iter()
        .enumerate()
        .map(|(stream, &(t_index, tau))| {
            let sch = &schedules[t_index];
            let exact = spectral_decompose(&hamiltonian_from_field(&total_field(sch, tau)?)?)?.e_plus;
            let mut rec = frozen_hamiltonian_run(sch, tau, &prop, &diss)?;
            if let Some(noise) = noise {
                noise.apply_record(&mut rec, &mut noise.rng_for(stream as u64))?;
            }
            let row = match extract_eigenenergies(&rec) {
                Ok(fit) => vec![
                    Cell::Num(tau),
                    Cell::Num(energy_to_hmhz(fit.e_plus)),
                    Cell::Num(energy_to_hmhz(fit.e_minus)),
                    Cell::Num(energy_to_hmhz(exact)),
                    Cell::Num(fit.fit.residual),
                    "ok".into(),
                ],
                Err(sta_core::StaError::FitFailure(_)) => vec![
                    Cell::Num(tau),
                    Cell::Num(f64::NAN),
                    Cell::Num(f64::NAN),
                    Cell::Num(energy_to_hmhz(exact)),
                    Cell::Num(f64::NAN),
                    "fit_failure".into(),
                ],
                Err(e) => return Err(e),
            };
            Ok(EigenCell { t_index, tau, row })
        })
        .collect::<CoreResult<_>>()?;
    rows.sort_by(|a, b| a.t_index.cmp(&b.t_index).then(a.tau.total_cmp(&b.tau)));

    let mut tables: Vec<Table> = cfg
        .operation_times_ns
        .iter()
        .map(|&t| Table::new(format!("eigenenergies_T{}.csv", time_tag(t)), &EIGEN_HEADER))
        .collect();
    for cell in rows {
        tables[cell.t_index].push(cell.row);
    }
    Ok(tables)
}

pub fn populations(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let (prop, diss, noise) = (cfg.propagator(), cfg.dissipation(), cfg.shot_noise());
    let unitary = sta_core::DissipationParams::disabled();
    let jobs: Vec<(usize, f64, Branch)> = cfg
        .operation_times_ns
        .iter()
        .enumerate()
        .flat_map(|(i, &t)| Branch::BOTH.into_iter().map(move |n| (i, t, n)))
        .collect();
    jobs.par_iter()
        .map(|&(i, t, n)| {
            let sch = schedule(cfg, t)?;
            let taus = tau_grid(t);
            let exact = conditional_probs_on_grid(&sch, &taus, n, &prop, &unitary)?;
            let mut table = Table::new(format!("populations_T{}_{}.csv", time_tag(t), n.label()), &POP_HEADER);
            for (k, (&tau, ex)) in taus.iter().zip(&exact).enumerate() {
                let mut res = frozen_population_run(&sch, tau, n, cfg.t_prime_ns, &prop, &diss)?;
                if let Some(noise) = noise {
                    let stream = ((i as u64) << 33) | ((n == Branch::Down) as u64) << 32 | k as u64;
                    noise.apply_populations(&mut res, &mut noise.rng_for(stream))?;
                }
                table.push(vec![
                    Cell::Num(tau),
                    Cell::Num(res.p_plus_given_n),
                    Cell::Num(res.p_minus_given_n),
                    Cell::Num(ex.0),
                    Cell::Num(ex.1),
                ]);
            }
            Ok(table)
        })
        .collect()
}

pub fn moments(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let (prop, diss) = (cfg.propagator(), cfg.dissipation());
    let grid = tbar_grid(cfg.grid_step_tbar)?;
    let jobs: Vec<(f64, Branch)> = cfg
        .operation_times_ns
        .iter()
        .flat_map(|&t| Branch::BOTH.into_iter().map(move |n| (t, n)))
        .collect();
    jobs.par_iter()
        .map(|&(t, n)| {
            let sch = schedule(cfg, t)?;
            let mut table = Table::new(format!("moments_T{}_{}.csv", time_tag(t), n.label()), &MOMENTS_HEADER);
            for r in moment_records(&sch, n, &grid, &prop, &diss)? {
                table.push(vec![
                    Cell::Num(r.tbar),
                    Cell::Num(energy_to_hmhz(r.w1)),
                    Cell::Num(energy2_to_hmhz2(r.w2)),
                    Cell::Num(energy_to_hmhz(r.w1_ad)),
                    Cell::Num(energy2_to_hmhz2(r.w2_ad)),
                    Cell::Num(energy2_to_hmhz2(r.excess2)),
                ]);
            }
            Ok(table)
        })
        .collect()
}

/// `T2_excess2` is `T²(⟨w²⟩ − ⟨w²⟩_ad)/ħ²` in natural units, so it is
/// directly comparable with the two line-element columns.
pub fn qgt(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let (prop, diss) = (cfg.propagator(), cfg.dissipation());
    let step = cfg.grid_step_tbar;
    let grid = tbar_grid(step)?;
    cfg.operation_times_ns
        .par_iter()
        .map(|&t| {
            let sch = schedule(cfg, t)?;
            let records = moment_records(&sch, Branch::Up, &grid, &prop, &diss)?;
            let samples = bloch_trajectory(&sch, step, &prop, &diss)?;
            let estimates = geometric_quantity_estimator(&samples, step)?;
            let mut table = Table::new(format!("qgt_T{}.csv", time_tag(t)), &QGT_HEADER);
            for (k, (r, s)) in records.iter().zip(&samples).enumerate() {
                let est = estimates
                    .iter()
                    .find(|e| (e.tbar - r.tbar).abs() < 1e-12)
                    .map_or(f64::NAN, |e| e.value);
                debug_assert!(k == 0 || k == grid.len() - 1 || est.is_finite());
                table.push(vec![
                    Cell::Num(r.tbar),
                    Cell::Num(t * t * r.excess2),
                    Cell::Num(est),
                    Cell::Num(line_element_sq(&sch, r.tbar)),
                    Cell::Num(s.theta_q),
                    Cell::Num(s.phi_q),
                ]);
            }
            Ok(table)
        })
        .collect()
}

pub fn verify(cfg: &RunConfig) -> (Vec<CriterionOutcome>, Table) {
    let outcomes = run_all(&cfg.verify_config());
    let mut table = Table::new("verify_report.csv", &VERIFY_HEADER);
    for o in &outcomes {
        if let Some(err) = &o.error {
            table.push(vec![
                Cell::Text(o.number.to_string()),
                "ERROR".into(),
                Cell::Num(f64::NAN),
                Cell::Text(err.clone()),
            ]);
        }
        for c in &o.checks {
            table.push(vec![
                Cell::Text(c.id.clone()),
                if c.passed { "PASS" } else { "FAIL" }.into(),
                Cell::Num(c.measured),
                Cell::Text(c.tolerance.clone()),
            ]);
        }
    }
    (outcomes, table)
}
