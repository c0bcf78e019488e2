//! Unit conventions.
//!
//! Internally ħ = 1, time is in ns, and fields and energies are angular
//! frequencies in rad/ns. Reporting uses ordinary frequencies in MHz, so an
//! energy `E` is reported as `E / h` in MHz.

use std::f64::consts::TAU;

/// Reduced Planck constant in internal units.
pub const HBAR: f64 = 1.0;

/// Converts an ordinary frequency in MHz to an angular frequency in rad/ns.
pub fn mhz_to_rad_per_ns(f_mhz: f64) -> f64 {
    TAU * f_mhz * 1e-3
}

/// Converts an angular frequency in rad/ns to an ordinary frequency in MHz.
pub fn rad_per_ns_to_mhz(w: f64) -> f64 {
    w / TAU * 1e3
}

/// Energy (ħ·rad/ns) to `E / h` in MHz.
pub fn energy_to_hmhz(e: f64) -> f64 {
    rad_per_ns_to_mhz(e / HBAR)
}

/// `E / h` in MHz back to energy in ħ·rad/ns.
pub fn hmhz_to_energy(e_mhz: f64) -> f64 {
    HBAR * mhz_to_rad_per_ns(e_mhz)
}

/// Converts µs to ns.
pub fn us_to_ns(t_us: f64) -> f64 {
    t_us * 1e3
}

/// Squared energy `(ħ·rad/ns)²` to `(h·MHz)²`.
pub fn energy2_to_hmhz2(e2: f64) -> f64 {
    let k = energy_to_hmhz(1.0);
    e2 * k * k
}
