#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand::Rng;
use sta_core::Schedule;

/// Smooth schedule with random trigonometric components and closed-form
/// derivatives, kept away from the poles.
#[derive(Debug, Clone, Copy)]
pub struct RandomSchedule {
    pub duration: f64,
    pub omega: (f64, f64, f64),
    pub theta: (f64, f64, f64, f64),
    pub phi: (f64, f64, f64, f64),
}

impl RandomSchedule {
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        RandomSchedule {
            duration: rng.random_range(10.0..200.0),
            omega: (
                rng.random_range(0.05..0.2),
                rng.random_range(0.0..0.04),
                rng.random_range(0.5..3.0),
            ),
            theta: (
                rng.random_range(1.0..2.1),
                rng.random_range(0.0..0.8),
                rng.random_range(0.5..3.0),
                rng.random_range(0.0..TAU),
            ),
            phi: (
                rng.random_range(-PI..PI),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.0..1.5),
                rng.random_range(0.5..3.0),
            ),
        }
    }
}

impl Schedule for RandomSchedule {
    fn duration(&self) -> f64 {
        self.duration
    }
    fn omega(&self, s: f64) -> f64 {
        self.omega.0 + self.omega.1 * (self.omega.2 * PI * s).cos()
    }
    fn theta(&self, s: f64) -> f64 {
        let (c, a, f, p) = self.theta;
        c + a * (f * PI * s + p).sin()
    }
    fn phi(&self, s: f64) -> f64 {
        let (c, lin, a, f) = self.phi;
        c + lin * s + a * (f * PI * s).sin()
    }
    fn d_omega(&self, s: f64) -> f64 {
        -self.omega.1 * self.omega.2 * PI * (self.omega.2 * PI * s).sin()
    }
    fn d_theta(&self, s: f64) -> f64 {
        let (_, a, f, p) = self.theta;
        a * f * PI * (f * PI * s + p).cos()
    }
    fn d_phi(&self, s: f64) -> f64 {
        let (_, lin, a, f) = self.phi;
        lin + a * f * PI * (f * PI * s).cos()
    }
    fn rescaled(&self, duration: f64) -> Box<dyn Schedule> {
        Box::new(RandomSchedule { duration, ..*self })
    }
}

/// `n̂ × dn̂/dt` from the closed-form unit vector and its derivative.
pub fn cross_cd_field(sch: &dyn Schedule, t: f64) -> [f64; 3] {
    let s = t / sch.duration();
    let (th, ph) = (sch.theta(s), sch.phi(s));
    let (dth, dph) = (sch.d_theta(s) / sch.duration(), sch.d_phi(s) / sch.duration());
    let n = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
    let dn = [
        dth * th.cos() * ph.cos() - dph * th.sin() * ph.sin(),
        dth * th.cos() * ph.sin() + dph * th.sin() * ph.cos(),
        -dth * th.sin(),
    ];
    [
        n[1] * dn[2] - n[2] * dn[1],
        n[2] * dn[0] - n[0] * dn[2],
        n[0] * dn[1] - n[1] * dn[0],
    ]
}
