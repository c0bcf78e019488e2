//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use sta_core::lab::{ShotNoise, DEFAULT_DRAG_TIME_NS};
use sta_core::units::us_to_ns;
use sta_core::verify::VerifyConfig;
use sta_core::{DissipationParams, PropagatorConfig};

use crate::CliError;

pub const OUTPUT_DIR_ENV: &str = "STA_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega0_mhz: f64,
    pub omega1_mhz: f64,
    pub operation_times_ns: Vec<f64>,
    pub grid_step_tbar: f64,
    pub dt_ns: f64,
    pub dissipation_enabled: bool,
    pub t1_us: f64,
    pub t2star_us: f64,
    pub shot_noise_enabled: bool,
    pub shots: u64,
    pub seed: Option<u64>,
    pub t_prime_ns: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            omega0_mhz: 10.0,
            omega1_mhz: 10.0,
            operation_times_ns: vec![25.0, 50.0, 100.0, 200.0, 500.0],
            grid_step_tbar: 0.02,
            dt_ns: 0.005,
            dissipation_enabled: false,
            t1_us: 22.0,
            t2star_us: 64.0,
            shot_noise_enabled: false,
            shots: 1000,
            seed: None,
            t_prime_ns: DEFAULT_DRAG_TIME_NS,
            output_dir: PathBuf::from("output"),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: expected a number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(CliError::Config(format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn parse_u64(key: &str, v: &str) -> Result<u64, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "omega0_mhz" => cfg.omega0_mhz = parse_f64(key, value)?,
                "omega1_mhz" => cfg.omega1_mhz = parse_f64(key, value)?,
                "operation_times_ns" => {
                    cfg.operation_times_ns = value
                        .split(',')
                        .map(|v| parse_f64(key, v.trim()))
                        .collect::<Result<_, _>>()?
                }
                "grid_step_tbar" => cfg.grid_step_tbar = parse_f64(key, value)?,
                "dt_ns" => cfg.dt_ns = parse_f64(key, value)?,
                "dissipation_enabled" => cfg.dissipation_enabled = parse_bool(key, value)?,
                "t1_us" => cfg.t1_us = parse_f64(key, value)?,
                "t2star_us" => cfg.t2star_us = parse_f64(key, value)?,
                "shot_noise_enabled" => cfg.shot_noise_enabled = parse_bool(key, value)?,
                "shots" => cfg.shots = parse_u64(key, value)?,
                "seed" => cfg.seed = Some(parse_u64(key, value)?),
                "t_prime_ns" => cfg.t_prime_ns = parse_f64(key, value)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                _ => return Err(CliError::Config(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.operation_times_ns.is_empty() {
            return Err(CliError::Config("operation_times_ns is empty".into()));
        }
        if let Some(t) = self.operation_times_ns.iter().find(|t| !(**t > 0.0)) {
            return Err(CliError::Config(format!("operation time {t} ns is not positive")));
        }
        for (key, v) in [
            ("omega0_mhz", self.omega0_mhz),
            ("dt_ns", self.dt_ns),
            ("t1_us", self.t1_us),
            ("t2star_us", self.t2star_us),
            ("t_prime_ns", self.t_prime_ns),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Config(format!("{key} must be positive, got {v}")));
            }
        }
        if self.omega1_mhz < 0.0 {
            return Err(CliError::Config(format!(
                "omega1_mhz must be non-negative, got {}",
                self.omega1_mhz
            )));
        }
        sta_core::work::tbar_grid(self.grid_step_tbar).map_err(|e| CliError::Config(e.to_string()))?;
        if self.shot_noise_enabled {
            if self.seed.is_none() {
                return Err(CliError::Config("shot noise requires an explicit seed".into()));
            }
            if self.shots == 0 {
                return Err(CliError::Config("shots must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn propagator(&self) -> PropagatorConfig {
        PropagatorConfig::with_dt(self.dt_ns)
    }

    pub fn dissipation(&self) -> DissipationParams {
        DissipationParams {
            t1: us_to_ns(self.t1_us),
            t2_star: us_to_ns(self.t2star_us),
            enabled: self.dissipation_enabled,
        }
    }

    pub fn shot_noise(&self) -> Option<ShotNoise> {
        match (self.shot_noise_enabled, self.seed) {
            (true, Some(seed)) => Some(ShotNoise {
                shots: self.shots,
                seed,
            }),
            _ => None,
        }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            omega0_mhz: self.omega0_mhz,
            omega1_mhz: self.omega1_mhz,
            grid_step: self.grid_step_tbar,
            propagator: self.propagator(),
            dissipation: DissipationParams {
                enabled: true,
                ..self.dissipation()
            },
            drag_time: self.t_prime_ns,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_every_key() {
        let text = "omega0_mhz = 12\nomega1_mhz=8 # trailing\noperation_times_ns = 25, 100\n\
                    grid_step_tbar = 0.05\ndt_ns = 0.002\ndissipation_enabled = true\nt1_us = 10\n\
                    t2star_us = 20\nshot_noise_enabled = yes\nshots = 500\nseed = 42\nt_prime_ns = 50\n\
                    output_dir = /tmp/out\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.operation_times_ns, vec![25.0, 100.0]);
        assert_eq!(c.shot_noise(), Some(ShotNoise { shots: 500, seed: 42 }));
        assert_eq!(c.output_dir, PathBuf::from("/tmp/out"));
        assert!(c.dissipation().enabled);
        assert_eq!(c.dissipation().t1, 10_000.0);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "bogus = 1",
            "omega0_mhz",
            "dt_ns = fast",
            "dt_ns = -1",
            "grid_step_tbar = 0.03",
            "shot_noise_enabled = true",
            "operation_times_ns = 25, 0",
            "dissipation_enabled = maybe",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }
}
