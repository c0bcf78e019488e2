//! Two-level linear algebra: Pauli algebra, pure states, density matrices,
//! spectral decomposition with a fixed phase gauge, and the exact SU(2)
//! propagator for a constant field.
//!
//! States are written in the `(|↑⟩, |↓⟩)` basis, so `σz|↑⟩ = +|↑⟩`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Result, StaError};
use crate::units::HBAR;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Splittings below this (rad/ns) are treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Tolerance for the Hermitian / traceless checks in [`spectral_decompose`].
const HERMITIAN_TOL: f64 = 1e-10;

/// Magnitudes closer than this count as a tie in the eigenvector gauge.
const GAUGE_TIE_TOL: f64 = 1e-12;

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn sigma_x() -> Self {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn sigma_y() -> Self {
        Mat2([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]])
    }

    pub const fn sigma_z() -> Self {
        Mat2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]])
    }

    /// Lowering operator `|↑⟩⟨↓|`, which takes the excited `|↓⟩` to `|↑⟩`.
    pub const fn sigma_minus() -> Self {
        Mat2([[ZERO, ONE], [ZERO, ZERO]])
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.0[r][c]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * z, m[0][1] * z], [m[1][0] * z, m[1][1] * z]])
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(Complex64::new(x, 0.0))
    }

    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Mat2) -> Self {
        *self * *other + *other * *self
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity, measured as `max |M − M†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (*self - self.dagger()).max_abs()
    }

    pub fn apply(&self, s: &PureState) -> (Complex64, Complex64) {
        let m = &self.0;
        (m[0][0] * s.up + m[0][1] * s.down, m[1][0] * s.up + m[1][1] * s.down)
    }

    /// `|a⟩⟨b|` for two (not necessarily normalized) spinors.
    pub fn outer(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> Self {
        Mat2([
            [a.0 * b.0.conj(), a.0 * b.1.conj()],
            [a.1 * b.0.conj(), a.1 * b.1.conj()],
        ])
    }

    /// Bloch components `(x, y, z)` of a traceless Hermitian matrix written as
    /// `x σx + y σy + z σz`.
    pub fn pauli_components(&self) -> (f64, f64, f64) {
        let m = &self.0;
        let off = 0.5 * (m[0][1] + m[1][0].conj());
        (off.re, -off.im, 0.5 * (m[0][0].re - m[1][1].re))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Normalized qubit state `c_up |↑⟩ + c_down |↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    pub up: Complex64,
    pub down: Complex64,
}

impl PureState {
    const NORM_TOL: f64 = 1e-12;

    /// Builds a state, rejecting amplitudes whose norm is not 1 within 1e-12.
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let s = PureState { up, down };
        let n = s.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > Self::NORM_TOL {
            return Err(StaError::InvalidState(format!("norm² = {n}")));
        }
        Ok(s)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(up: Complex64, down: Complex64) -> Result<Self> {
        let n = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(StaError::InvalidState("zero or non-finite amplitudes".into()));
        }
        Ok(PureState {
            up: up / n,
            down: down / n,
        })
    }

    pub(crate) fn from_unchecked(up: Complex64, down: Complex64) -> Self {
        PureState { up, down }
    }

    pub fn spin_up() -> Self {
        PureState { up: ONE, down: ZERO }
    }

    pub fn spin_down() -> Self {
        PureState { up: ZERO, down: ONE }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn with_phase(&self, alpha: f64) -> Self {
        let p = Complex64::from_polar(1.0, alpha);
        PureState {
            up: self.up * p,
            down: self.down * p,
        }
    }

    pub fn as_pair(&self) -> (Complex64, Complex64) {
        (self.up, self.down)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> Mat2 {
        Mat2::outer(self.as_pair(), self.as_pair())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix(self.projector())
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, m: &Mat2) -> Complex64 {
        let (a, b) = m.apply(self);
        self.up.conj() * a + self.down.conj() * b
    }

    /// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        self.to_density().bloch()
    }

    /// Returns the state with the gauge used throughout the crate: the
    /// largest-magnitude component is real and non-negative; on a tie the
    /// up-component is.
    pub fn gauge_fixed(&self) -> Self {
        let (au, ad) = (self.up.norm(), self.down.norm());
        let pivot = if au + GAUGE_TIE_TOL >= ad { self.up } else { self.down };
        if pivot.norm() == 0.0 {
            return *self;
        }
        let phase = pivot.conj() / pivot.norm();
        let mut s = PureState {
            up: self.up * phase,
            down: self.down * phase,
        };
        // pin the pivot exactly onto the real axis
        if au + GAUGE_TIE_TOL >= ad {
            s.up = Complex64::new(s.up.norm(), 0.0);
        } else {
            s.down = Complex64::new(s.down.norm(), 0.0);
        }
        s
    }

    /// Multiplies by the phase that makes `⟨reference|self⟩` real and
    /// non-negative.
    pub fn aligned_to(&self, reference: &PureState) -> Self {
        let ov = reference.inner(self);
        if ov.norm() == 0.0 {
            return *self;
        }
        let phase = ov.conj() / ov.norm();
        PureState {
            up: self.up * phase,
            down: self.down * phase,
        }
    }
}

/// Qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    /// Strict validation tolerance for user-supplied matrices.
    pub const STRICT_TOL: f64 = 1e-12;

    pub fn new(m: Mat2) -> Result<Self> {
        Self::with_tolerance(m, Self::STRICT_TOL)
    }

    /// Validates Hermiticity, trace and positivity within `tol`.
    pub fn with_tolerance(m: Mat2, tol: f64) -> Result<Self> {
        let herm = m.hermiticity_error();
        if !herm.is_finite() || herm > tol {
            return Err(StaError::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > tol {
            return Err(StaError::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let rho = DensityMatrix(m);
        let (lo, _) = rho.eigenvalues();
        if lo < -tol {
            return Err(StaError::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(rho)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// Population `ρ_↑↑`.
    pub fn p_up(&self) -> f64 {
        self.0.get(0, 0).re
    }

    /// Population `ρ_↓↓`.
    pub fn p_down(&self) -> f64 {
        self.0.get(1, 1).re
    }

    pub fn coherence(&self) -> Complex64 {
        self.0.get(0, 1)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn population_of(&self, s: &PureState) -> f64 {
        s.expectation(&self.0).re
    }

    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.0;
        let off = m.get(0, 1) + m.get(1, 0);
        let off_im = m.get(1, 0) - m.get(0, 1);
        [off.re, off_im.im, (m.get(0, 0) - m.get(1, 1)).re]
    }

    /// Eigenvalues `(λ_min, λ_max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let [x, y, z] = self.bloch();
        let r = (x * x + y * y + z * z).sqrt();
        let half_tr = 0.5 * self.trace();
        (half_tr - 0.5 * r, half_tr + 0.5 * r)
    }
}

/// Drive field `B` in rad/ns; the Hamiltonian is `ħ B·σ / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldVector {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl FieldVector {
    pub const fn new(bx: f64, by: f64, bz: f64) -> Self {
        FieldVector { bx, by, bz }
    }

    pub const fn zero() -> Self {
        FieldVector {
            bx: 0.0,
            by: 0.0,
            bz: 0.0,
        }
    }

    /// Field of magnitude `omega` pointing along polar angle `theta`,
    /// azimuth `phi`.
    pub fn from_spherical(omega: f64, theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        FieldVector {
            bx: omega * st * cp,
            by: omega * st * sp,
            bz: omega * ct,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.bx.is_finite() && self.by.is_finite() && self.bz.is_finite()
    }

    pub fn dot(&self, o: &FieldVector) -> f64 {
        self.bx * o.bx + self.by * o.by + self.bz * o.bz
    }

    pub fn scaled(&self, k: f64) -> Self {
        FieldVector {
            bx: self.bx * k,
            by: self.by * k,
            bz: self.bz * k,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.bx, self.by, self.bz]
    }

    /// `(θ, φ)` of the field direction; `φ = 0` when the field lies on the
    /// z-axis.
    pub fn angles(&self) -> (f64, f64) {
        let r = self.norm();
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let theta = (self.bz / r).clamp(-1.0, 1.0).acos();
        let rho = self.bx.hypot(self.by);
        let phi = if rho <= 1e-15 * r { 0.0 } else { self.by.atan2(self.bx) };
        (theta, phi)
    }
}

impl Add for FieldVector {
    type Output = FieldVector;
    fn add(self, o: FieldVector) -> FieldVector {
        FieldVector {
            bx: self.bx + o.bx,
            by: self.by + o.by,
            bz: self.bz + o.bz,
        }
    }
}

impl Sub for FieldVector {
    type Output = FieldVector;
    fn sub(self, o: FieldVector) -> FieldVector {
        FieldVector {
            bx: self.bx - o.bx,
            by: self.by - o.by,
            bz: self.bz - o.bz,
        }
    }
}

/// Eigenpairs of a qubit Hamiltonian, `e_plus ≥ e_minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDecomposition {
    pub e_plus: f64,
    pub e_minus: f64,
    pub psi_plus: PureState,
    pub psi_minus: PureState,
}

/// `ħ (bx σx + by σy + bz σz) / 2`.
pub fn hamiltonian_from_field(b: &FieldVector) -> Result<Mat2> {
    if !b.is_finite() {
        return Err(StaError::InvalidField(format!("non-finite component in {b:?}")));
    }
    let h = 0.5 * HBAR;
    Ok(Mat2::new(
        Complex64::new(h * b.bz, 0.0),
        Complex64::new(h * b.bx, -h * b.by),
        Complex64::new(h * b.bx, h * b.by),
        Complex64::new(-h * b.bz, 0.0),
    ))
}

/// Diagonalizes a traceless Hermitian 2×2 matrix.
///
/// Eigenvectors are returned in the crate gauge (see
/// [`PureState::gauge_fixed`]).
pub fn spectral_decompose(h: &Mat2) -> Result<SpectralDecomposition> {
    let herm = h.hermiticity_error();
    if !herm.is_finite() || herm > HERMITIAN_TOL {
        return Err(StaError::NotHermitian(format!("|H − H†| = {herm:e}")));
    }
    let tr = h.trace().norm();
    if tr > HERMITIAN_TOL {
        return Err(StaError::NotHermitian(format!("|tr H| = {tr:e}")));
    }
    let (x, y, z) = h.pauli_components();
    let r = (x * x + y * y + z * z).sqrt();
    if 2.0 * r < DEGENERACY_THRESHOLD {
        return Err(StaError::Degenerate { splitting: 2.0 * r });
    }

    // Two algebraically equivalent eigenvector forms; use whichever is
    // better conditioned for this field direction.
    let plus = if z >= 0.0 {
        (Complex64::new(r + z, 0.0), Complex64::new(x, y))
    } else {
        (Complex64::new(x, -y), Complex64::new(r - z, 0.0))
    };
    let minus = if z >= 0.0 {
        (Complex64::new(x, -y), Complex64::new(-(r + z), 0.0))
    } else {
        (Complex64::new(r - z, 0.0), Complex64::new(-x, -y))
    };
    let psi_plus = PureState::normalized(plus.0, plus.1)?.gauge_fixed();
    let psi_minus = PureState::normalized(minus.0, minus.1)?.gauge_fixed();
    Ok(SpectralDecomposition {
        e_plus: r,
        e_minus: -r,
        psi_plus,
        psi_minus,
    })
}

/// Exact SU(2) propagator for a constant field over `dt`:
/// `cos(|B|dt/2) I − i sin(|B|dt/2) B̂·σ`.
pub fn su2_matrix(b: &FieldVector, dt: f64) -> Mat2 {
    let mag = b.norm();
    if mag == 0.0 {
        return Mat2::identity();
    }
    let (s, c) = (0.5 * mag * dt).sin_cos();
    let k = s / mag;
    let (nx, ny, nz) = (b.bx * k, b.by * k, b.bz * k);
    Mat2::new(
        Complex64::new(c, -nz),
        Complex64::new(-ny, -nx),
        Complex64::new(ny, -nx),
        Complex64::new(c, nz),
    )
}

/// Applies the exact constant-field propagator for a step `dt > 0`.
pub fn su2_step(b: &FieldVector, dt: f64, s: &PureState) -> Result<PureState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(StaError::Input(format!("step dt must be positive, got {dt}")));
    }
    if !b.is_finite() {
        return Err(StaError::InvalidField(format!("non-finite component in {b:?}")));
    }
    Ok(su2_apply(b, dt, s))
}

#[inline]
pub(crate) fn su2_apply(b: &FieldVector, dt: f64, s: &PureState) -> PureState {
    let (up, down) = su2_matrix(b, dt).apply(s);
    // remove rounding drift so long runs stay on the unit sphere
    let k = (up.norm_sqr() + down.norm_sqr()).sqrt().recip();
    PureState::from_unchecked(up * k, down * k)
}
