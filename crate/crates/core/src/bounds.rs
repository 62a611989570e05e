//! Secret-key-rate bounds for noisy reciprocal channel estimates.
//!
//! Alice and Bob observe X = H + W_X and Y = H + W_Y; the eavesdropper
//! observes Z = H_Z + W_Z where H_Z is correlated with H through the spatial
//! correlation coefficient ρ. All variables are zero-mean circularly-symmetric
//! complex Gaussian, so every information quantity reduces to covariance
//! determinants:
//!
//! - I(X;Y)   = log2(1 + P²/((P+N_X)(P+N_Y) − P²))
//! - I(X;Z)   = log2(1 + |ρP|²/((P+N_X)(P+N_Z) − |ρP|²)), I(Y;Z) alike
//! - I(X;Y|Z) = log2(|C_XZ||C_YZ|/((P+N_Z)·|C_XYZ|))
//!
//! and the secret-key rate S is sandwiched by
//! I(X;Y) − min(I(X;Z), I(Y;Z)) ≤ S ≤ min(I(X;Y), I(X;Y|Z)).
//!
//! Degenerate noiseless or perfectly-correlated configurations return an
//! explicit +∞ (produced by dedicated branches, never by overflow) so callers
//! can render "unbounded". All arithmetic is linear; dB conversion belongs to
//! the configuration boundary.

use crate::correlation::CorrelationCoefficient;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Transmit power, receiver noise variances and carrier wavelength — the
/// physics knobs of one analysis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scenario {
    /// Mean channel power P (linear).
    pub power: f64,
    /// Noise variance of Alice's estimate.
    pub noise_x: f64,
    /// Noise variance of Bob's estimate.
    pub noise_y: f64,
    /// Noise variance of Eve's estimate.
    pub noise_z: f64,
    /// Carrier wavelength in meters (used only for meter/wavelength
    /// conversion at the interface level).
    pub wavelength: f64,
}

impl Scenario {
    pub fn new(power: f64, noise_x: f64, noise_y: f64, noise_z: f64, wavelength: f64) -> Result<Self> {
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::domain("power must be finite and > 0"));
        }
        for (name, n) in [("N_X", noise_x), ("N_Y", noise_y), ("N_Z", noise_z)] {
            if !(n.is_finite() && n >= 0.0) {
                return Err(Error::domain(format!("{name} must be finite and >= 0")));
            }
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::domain("wavelength must be finite and > 0"));
        }
        Ok(Self {
            power,
            noise_x,
            noise_y,
            noise_z,
            wavelength,
        })
    }

    /// Both legitimate estimates noiseless: I(X;Y) diverges.
    pub fn is_degenerate(&self) -> bool {
        self.noise_x == 0.0 && self.noise_y == 0.0
    }
}

/// The joint covariance blocks of (X, Y, Z) for one (scenario, ρ) pair.
#[derive(Clone, Debug)]
pub struct CovarianceSet {
    pub c_xy: [[Complex64; 2]; 2],
    pub c_xz: [[Complex64; 2]; 2],
    pub c_yz: [[Complex64; 2]; 2],
    pub c_xyz: [[Complex64; 3]; 3],
}

/// All four mutual informations plus the secret-key-rate sandwich for one
/// (scenario, ρ) pair, in bits per observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsReport {
    pub i_xy: f64,
    pub i_xz: f64,
    pub i_yz: f64,
    pub i_xy_given_z: f64,
    /// May be negative (then carries no guarantee).
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Which tight special case to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TightCase {
    /// N_Y = 0 (Y = H): X → Y → Z is a Markov chain.
    NoiselessBob,
    /// N_X = 0 (X = H), the mirror image.
    NoiselessAlice,
    /// ρ = 0: Eve's observation is independent.
    IndependentEve,
}

/// Builds C_XY, C_XZ, C_YZ and C_XYZ exactly as the joint Gaussian model
/// prescribes: diagonals P+N, legitimate cross-term P, Eve cross-terms ρP.
pub fn covariances(s: &Scenario, rho: &CorrelationCoefficient) -> CovarianceSet {
    let p = Complex64::new(s.power, 0.0);
    let rp = rho.value() * s.power;
    let a = Complex64::new(s.power + s.noise_x, 0.0);
    let b = Complex64::new(s.power + s.noise_y, 0.0);
    let c = Complex64::new(s.power + s.noise_z, 0.0);
    CovarianceSet {
        c_xy: [[a, p], [p, b]],
        c_xz: [[a, rp], [rp.conj(), c]],
        c_yz: [[b, rp], [rp.conj(), c]],
        c_xyz: [[a, p, rp], [p, b, rp], [rp.conj(), rp.conj(), c]],
    }
}

/// Hermitian 2x2 determinant; the imaginary residue must vanish.
fn det2_hermitian(m: &[[Complex64; 2]; 2]) -> Result<f64> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = frobenius2(&m[0]) + frobenius2(&m[1]);
    if det.im.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::degenerate(format!(
            "2x2 Hermitian determinant has imaginary residue {:.3e}",
            det.im
        )));
    }
    Ok(det.re)
}

fn frobenius2(row: &[Complex64]) -> f64 {
    row.iter().map(|z| z.norm_sqr()).sum()
}

/// Hermitian 3x3 determinant by cofactor expansion along the first row with
/// Kahan-compensated accumulation. The determinant of a Hermitian matrix is
/// real; an imaginary residue above 1e-9·‖C‖³ reports numerical degeneracy.
pub fn det3_hermitian(m: &[[Complex64; 3]; 3]) -> Result<f64> {
    let minor0 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let minor1 = m[1][0] * m[2][2] - m[1][2] * m[2][0];
    let minor2 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let terms = [m[0][0] * minor0, -(m[0][1] * minor1), m[0][2] * minor2];

    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for t in terms {
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }

    let norm = m
        .iter()
        .map(|row| frobenius2(row))
        .sum::<f64>()
        .sqrt();
    if sum.im.abs() > 1e-9 * norm.powi(3).max(1.0) {
        return Err(Error::degenerate(format!(
            "3x3 Hermitian determinant has imaginary residue {:.3e}",
            sum.im
        )));
    }
    Ok(sum.re)
}

/// I(X;Y) in bits. Returns +∞ when both legitimate estimates are noiseless.
pub fn mi_xy(s: &Scenario) -> f64 {
    if s.is_degenerate() {
        return f64::INFINITY;
    }
    let denom = (s.power + s.noise_x) * (s.power + s.noise_y) - s.power * s.power;
    (1.0 + s.power * s.power / denom).log2()
}

fn mi_with_eve(power: f64, noise_legit: f64, noise_z: f64, rho_mag: f64) -> f64 {
    let cross = (rho_mag * power).powi(2);
    let denom = (power + noise_legit) * (power + noise_z) - cross;
    if denom <= 0.0 {
        // only reachable for |ρ| = 1 with both receivers noiseless
        return f64::INFINITY;
    }
    (1.0 + cross / denom).log2()
}

/// I(X;Z) in bits.
pub fn mi_xz(s: &Scenario, rho: &CorrelationCoefficient) -> f64 {
    mi_with_eve(s.power, s.noise_x, s.noise_z, rho.magnitude())
}

/// I(Y;Z) in bits.
pub fn mi_yz(s: &Scenario, rho: &CorrelationCoefficient) -> f64 {
    mi_with_eve(s.power, s.noise_y, s.noise_z, rho.magnitude())
}

/// I(X;Y|Z) = log2(|C_XZ||C_YZ|/((P+N_Z)|C_XYZ|)) in bits, from the 3x3
/// Hermitian determinant. Tiny negative values from rounding are clamped to
/// zero; a nonpositive |C_XYZ| beyond tolerance is reported as degeneracy.
pub fn mi_xy_given_z(s: &Scenario, rho: &CorrelationCoefficient) -> Result<f64> {
    if s.is_degenerate() {
        return Ok(f64::INFINITY);
    }
    let cov = covariances(s, rho);
    let det_xz = det2_hermitian(&cov.c_xz)?;
    let det_yz = det2_hermitian(&cov.c_yz)?;
    let det_xyz = det3_hermitian(&cov.c_xyz)?;
    let c = s.power + s.noise_z;
    let scale = (s.power + s.noise_x) * (s.power + s.noise_y) * c;
    if det_xyz <= 1e-14 * scale {
        if rho.magnitude() >= 1.0 && (s.noise_x == 0.0 || s.noise_y == 0.0) && s.noise_z == 0.0 {
            // Z literally reveals H to the noiseless party
            return Ok(0.0);
        }
        return Err(Error::degenerate(format!(
            "|C_XYZ| = {det_xyz:.3e} is not positive"
        )));
    }
    let v = (det_xz * det_yz / (c * det_xyz)).log2();
    if v < 0.0 && v > -1e-9 {
        return Ok(0.0);
    }
    Ok(v)
}

/// Lower bound I(X;Y) − min(I(X;Z), I(Y;Z)); may be negative.
pub fn lower_bound(s: &Scenario, rho: &CorrelationCoefficient) -> f64 {
    let xy = mi_xy(s);
    let eve = mi_xz(s, rho).min(mi_yz(s, rho));
    if xy.is_infinite() && eve.is_infinite() {
        return f64::NAN;
    }
    xy - eve
}

/// The same lower bound through the single-logarithm closed form; kept as an
/// independent algebraic route and checked against [`lower_bound`] in tests.
pub fn lower_bound_single_log(s: &Scenario, rho: &CorrelationCoefficient) -> f64 {
    if s.is_degenerate() {
        return f64::INFINITY;
    }
    let p2 = s.power * s.power;
    let num = 1.0 + p2 / ((s.power + s.noise_x) * (s.power + s.noise_y) - p2);
    let cross = (rho.magnitude() * s.power).powi(2);
    let worst = s.noise_x.max(s.noise_y);
    let den = 1.0 + cross / ((s.power + worst) * (s.power + s.noise_z) - cross);
    (num / den).log2()
}

/// Upper bound min(I(X;Y), I(X;Y|Z)). Under this channel model the minimum is
/// always attained by I(X;Y|Z); that is verified numerically as a property,
/// never assumed here.
pub fn upper_bound(s: &Scenario, rho: &CorrelationCoefficient) -> Result<f64> {
    Ok(mi_xy(s).min(mi_xy_given_z(s, rho)?))
}

/// Smallest noise variance at Eve for which the lower bound is positive:
/// N_Z > P(|ρ|² − 1) + |ρ|²·min(N_X, N_Y). A negative value means any
/// physical N_Z ≥ 0 suffices.
pub fn nz_threshold(power: f64, noise_x: f64, noise_y: f64, rho: &CorrelationCoefficient) -> f64 {
    let r2 = rho.magnitude().powi(2);
    power * (r2 - 1.0) + r2 * noise_x.min(noise_y)
}

/// Largest |ρ|² admitting a positive lower bound, clamped to 1:
/// |ρ|² < (P+N_Z)/(P+min(N_X,N_Y)); a ratio above one means every physical
/// correlation admits a positive bound.
pub fn rho_sq_max(s: &Scenario) -> f64 {
    ((s.power + s.noise_z) / (s.power + s.noise_x.min(s.noise_y))).min(1.0)
}

/// Closed-form capacity in the three tight cases. The named degeneracy must
/// hold (noise within 1e-12·P, or |ρ| ≤ 1e-12).
pub fn tight_capacity(s: &Scenario, rho: &CorrelationCoefficient, which: TightCase) -> Result<f64> {
    let tol = 1e-12 * s.power;
    let cross = (rho.magnitude() * s.power).powi(2);
    match which {
        TightCase::IndependentEve => {
            if rho.magnitude() > 1e-12 {
                return Err(Error::domain("independent-Eve case requires rho = 0"));
            }
            Ok(mi_xy(s))
        }
        TightCase::NoiselessBob => {
            if s.noise_y > tol {
                return Err(Error::domain("noiseless-Bob case requires N_Y = 0"));
            }
            if s.noise_x == 0.0 {
                return Ok(f64::INFINITY);
            }
            let den = (s.power + s.noise_x) * (s.power + s.noise_z) - cross;
            Ok(((1.0 + s.power / s.noise_x) / (1.0 + cross / den)).log2())
        }
        TightCase::NoiselessAlice => {
            if s.noise_x > tol {
                return Err(Error::domain("noiseless-Alice case requires N_X = 0"));
            }
            if s.noise_y == 0.0 {
                return Ok(f64::INFINITY);
            }
            let den = (s.power + s.noise_y) * (s.power + s.noise_z) - cross;
            Ok(((1.0 + s.power / s.noise_y) / (1.0 + cross / den)).log2())
        }
    }
}

/// Large-power limit of Eve's mutual informations:
/// I(X;Z), I(Y;Z) → −log2(1 − |ρ|²) as P → ∞. Unbounded at |ρ| = 1.
pub fn eve_mi_asymptote(rho: &CorrelationCoefficient) -> f64 {
    let r2 = rho.magnitude().powi(2);
    if r2 >= 1.0 {
        return f64::INFINITY;
    }
    -(1.0 - r2).log2()
}

/// Evaluate everything for one (scenario, ρ) pair.
pub fn bounds_report(s: &Scenario, rho: &CorrelationCoefficient) -> Result<BoundsReport> {
    let i_xy = mi_xy(s);
    let i_xz = mi_xz(s, rho);
    let i_yz = mi_yz(s, rho);
    let i_xy_given_z = mi_xy_given_z(s, rho)?;
    let eve = i_xz.min(i_yz);
    let lower = if i_xy.is_infinite() && eve.is_infinite() {
        f64::NAN
    } else {
        i_xy - eve
    };
    Ok(BoundsReport {
        i_xy,
        i_xz,
        i_yz,
        i_xy_given_z,
        lower_bound: lower,
        upper_bound: i_xy.min(i_xy_given_z),
    })
}
