//! Spatial correlation coefficient between the legitimate channel and the
//! eavesdropper channel for a given angular spectrum and antenna displacement.
//!
//! The coefficient is
//!
//! ```text
//! ρ = ∫ f(Ω) · e^{-j·2π·u(Ω)·d} dΩ,      u(Ω) = (sinθcosφ, sinθsinφ, cosθ)
//! ```
//!
//! with the displacement d = (r_B - r_E)/λ expressed in wavelengths. The wave
//! vector is taken to point in the incoming direction (φ, θ), so the phase is
//! e^{-j·β·(r_B-r_E)} exactly; |ρ| does not depend on this sign convention,
//! arg(ρ) flips with it. Conjugate symmetry ρ(-d) = ρ(d)* follows from the
//! density being real.
//!
//! Closed forms: a discrete path set sums exactly; the 3D-isotropic spectrum
//! gives ρ = sinc(2π·‖d‖); the 2D-isotropic spectrum gives ρ = J0(2π·d_h)
//! with d_h the horizontal separation. Everything else goes through nested
//! Gauss-Legendre panel quadrature (azimuth inside, elevation outside) with
//! dyadic refinement, from `quadrature`.

use crate::bessel::{bessel_j0, sinc};
use crate::error::{Error, Result};
use crate::quadrature::{graded_edges, integrate_complex};
use crate::spectrum::{laplacian_normalization, AngularSpectrum, PathComponent};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

/// Tolerance targets: successive outer refinements must agree to 1e-7; inner
/// (azimuth) integrals are resolved an order tighter so their error does not
/// pollute the outer convergence check.
const OUTER_TOL: f64 = 1e-7;
const INNER_TOL: f64 = 1e-8;
const TOL_1D: f64 = 1e-9;

/// Modulus slack accepted from quadrature before construction fails.
const MODULUS_SLACK: f64 = 1e-6;

/// Bob-Eve displacement (r_B - r_E) in wavelength units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Displacement {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Displacement {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Result<Self> {
        if !(dx.is_finite() && dy.is_finite() && dz.is_finite()) {
            return Err(Error::domain("displacement components must be finite"));
        }
        Ok(Self { dx, dy, dz })
    }

    /// Displacement of length `distance_wl` along a (not necessarily unit)
    /// axis vector.
    pub fn along(axis: [f64; 3], distance_wl: f64) -> Result<Self> {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::domain("displacement axis must be a nonzero vector"));
        }
        Self::new(
            axis[0] / norm * distance_wl,
            axis[1] / norm * distance_wl,
            axis[2] / norm * distance_wl,
        )
    }

    pub fn norm(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.dx.hypot(self.dy)
    }

    pub fn negated(&self) -> Self {
        Self {
            dx: -self.dx,
            dy: -self.dy,
            dz: -self.dz,
        }
    }
}

/// Complex spatial correlation coefficient with |ρ| ≤ 1.
///
/// Construction clamps a modulus in (1, 1 + 1e-6] back to the unit circle
/// (quadrature slack) and rejects anything larger, so downstream expressions
/// that divide by (1 - |ρ|²)-like terms stay well defined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationCoefficient(Complex64);

impl CorrelationCoefficient {
    pub fn new(value: Complex64) -> Result<Self> {
        let m = value.norm();
        if !m.is_finite() {
            return Err(Error::domain("correlation coefficient must be finite"));
        }
        if m <= 1.0 {
            Ok(Self(value))
        } else if m <= 1.0 + MODULUS_SLACK {
            Ok(Self(value / m))
        } else {
            Err(Error::degenerate(format!(
                "correlation modulus {m} exceeds 1 beyond the accepted slack"
            )))
        }
    }

    pub fn from_magnitude(m: f64) -> Result<Self> {
        Self::new(Complex64::new(m, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    pub fn arg(&self) -> f64 {
        self.0.arg()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conj())
    }
}

/// Exact correlation of a discrete path set: Σ_l (P_l/P)·e^{-j·2π·u_l·d}.
pub fn rho_discrete(paths: &[PathComponent], disp: &Displacement) -> Result<CorrelationCoefficient> {
    if paths.is_empty() {
        return Err(Error::domain("discrete correlation needs at least one path"));
    }
    let total: f64 = paths.iter().map(|p| p.relative_power).sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::domain("path powers must sum to a positive value"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for p in paths {
        if p.relative_power <= 0.0 {
            return Err(Error::domain("path powers must be > 0"));
        }
        let (sin_el, cos_el) = p.elevation.sin_cos();
        let (sin_az, cos_az) = p.azimuth.sin_cos();
        let dot = sin_el * cos_az * disp.dx + sin_el * sin_az * disp.dy + cos_el * disp.dz;
        acc += (p.relative_power / total) * Complex64::from_polar(1.0, -TAU * dot);
    }
    CorrelationCoefficient::new(acc)
}

/// Closed form for the 3D-isotropic spectrum: ρ = sinc(2π·d).
pub fn rho_iso3d(distance_wl: f64) -> Result<CorrelationCoefficient> {
    if !(distance_wl.is_finite() && distance_wl >= 0.0) {
        return Err(Error::domain("distance must be finite and nonnegative"));
    }
    CorrelationCoefficient::new(Complex64::new(sinc(TAU * distance_wl), 0.0))
}

/// Closed form for the 2D-isotropic spectrum: ρ = J0(2π·d) with d the
/// horizontal separation.
pub fn rho_iso2d(horizontal_distance_wl: f64) -> Result<CorrelationCoefficient> {
    if !(horizontal_distance_wl.is_finite() && horizontal_distance_wl >= 0.0) {
        return Err(Error::domain("distance must be finite and nonnegative"));
    }
    CorrelationCoefficient::new(Complex64::new(bessel_j0(TAU * horizontal_distance_wl), 0.0))
}

/// Correlation coefficient by spherical quadrature of ∫ f(Ω) e^{-j2π·u·d} dΩ.
///
/// Continuous variants integrate numerically (absolute error ≤ 1e-6 per
/// component); `Discrete` routes to [`rho_discrete`] and `Isotropic2D`
/// collapses to a 1D azimuth quadrature (the elevation delta removes one
/// integral).
pub fn rho_quadrature(
    spectrum: &AngularSpectrum,
    disp: &Displacement,
) -> Result<CorrelationCoefficient> {
    match spectrum {
        AngularSpectrum::Discrete(set) => rho_discrete(set.paths(), disp),
        AngularSpectrum::Isotropic2D => iso2d_collapsed_quadrature(disp),
        AngularSpectrum::Isotropic3D => iso3d_sphere_quadrature(disp),
        AngularSpectrum::Laplacian { phi_rms, theta_rms } => {
            laplacian_sphere_quadrature(*phi_rms, *theta_rms, disp)
        }
    }
}

/// Correlation via closed forms where they exist, quadrature otherwise.
pub fn rho(spectrum: &AngularSpectrum, disp: &Displacement) -> Result<CorrelationCoefficient> {
    match spectrum {
        AngularSpectrum::Isotropic3D => rho_iso3d(disp.norm()),
        AngularSpectrum::Isotropic2D => rho_iso2d(disp.horizontal_norm()),
        AngularSpectrum::Discrete(set) => rho_discrete(set.paths(), disp),
        AngularSpectrum::Laplacian { .. } => rho_quadrature(spectrum, disp),
    }
}

/// 1D azimuth quadrature for the 2D-isotropic spectrum:
/// ρ = (1/2π)·∫ e^{-j2π(dx·cosφ + dy·sinφ)} dφ. The vertical displacement
/// drops out because all power arrives at θ = π/2.
fn iso2d_collapsed_quadrature(disp: &Displacement) -> Result<CorrelationCoefficient> {
    let (dx, dy) = (disp.dx, disp.dy);
    let rate = TAU * disp.horizontal_norm();
    let f = |phi: f64| {
        let (s, c) = phi.sin_cos();
        Complex64::from_polar(1.0, -TAU * (dx * c + dy * s))
    };
    let q = integrate_complex(&f, graded_edges(-PI, PI, None, rate), TOL_1D)?;
    CorrelationCoefficient::new(q.value / TAU)
}

/// Azimuth-inside / elevation-outside quadrature over the sphere for the
/// 3D-isotropic density f = 1/(4π).
fn iso3d_sphere_quadrature(disp: &Displacement) -> Result<CorrelationCoefficient> {
    let rate_az = TAU * disp.horizontal_norm();
    let rate_el = TAU * disp.norm();
    let (dx, dy, dz) = (disp.dx, disp.dy, disp.dz);

    // even in φ when dy = 0, symmetric about θ = π/2 when dz = 0
    let half_az = dy == 0.0;
    let half_el = dz == 0.0;

    let inner = |theta: f64| -> Result<Complex64> {
        let st = theta.sin();
        let f = |phi: f64| {
            let (s, c) = phi.sin_cos();
            Complex64::from_polar(1.0, -TAU * st * (dx * c + dy * s))
        };
        let (a, b, mul) = if half_az {
            (0.0, PI, 2.0)
        } else {
            (-PI, PI, 1.0)
        };
        Ok(mul * integrate_complex(&f, graded_edges(a, b, None, rate_az), INNER_TOL)?.value)
    };

    let run = || -> Result<Complex64> {
        let g = |theta: f64| -> Complex64 {
            let w = theta.sin() * Complex64::from_polar(1.0, -TAU * dz * theta.cos());
            w * inner(theta).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        };
        let (a, b, mul) = if half_el {
            (0.0, FRAC_PI_2, 2.0)
        } else {
            (0.0, PI, 1.0)
        };
        let q = integrate_complex(&g, graded_edges(a, b, None, rate_el.max(1.0)), OUTER_TOL)?;
        Ok(mul * q.value / (4.0 * PI))
    };
    let value = run()?;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::QuadratureNotConverged {
            error_estimate: f64::INFINITY,
        });
    }
    CorrelationCoefficient::new(value)
}

/// Nested quadrature for the truncated Laplacian density. The sinθ Jacobian
/// cancels against the 1/sinθ in the density, leaving the separable kernel
/// γ·e^{-√2|φ|/φ_rms}·e^{-√2|θ-π/2|/θ_rms} times the displacement phase.
fn laplacian_sphere_quadrature(
    phi_rms: f64,
    theta_rms: f64,
    disp: &Displacement,
) -> Result<CorrelationCoefficient> {
    let gamma = laplacian_normalization(phi_rms, theta_rms)?;
    let b_az = phi_rms / SQRT_2;
    let b_el = theta_rms / SQRT_2;
    let rate_az = TAU * disp.horizontal_norm();
    let rate_el = TAU * disp.norm();
    let (dx, dy, dz) = (disp.dx, disp.dy, disp.dz);

    let half_az = dy == 0.0;
    let half_el = dz == 0.0;

    let inner = |theta: f64| -> Result<Complex64> {
        let st = theta.sin();
        let f = |phi: f64| {
            let (s, c) = phi.sin_cos();
            let w = (-SQRT_2 * phi.abs() / phi_rms).exp();
            w * Complex64::from_polar(1.0, -TAU * st * (dx * c + dy * s))
        };
        let (a, b, mul, peak) = if half_az {
            (0.0, PI, 2.0, Some((0.0, b_az)))
        } else {
            (-PI, PI, 1.0, Some((0.0, b_az)))
        };
        Ok(mul * integrate_complex(&f, graded_edges(a, b, peak, rate_az), INNER_TOL)?.value)
    };

    let g = |theta: f64| -> Complex64 {
        let w = (-SQRT_2 * (theta - FRAC_PI_2).abs() / theta_rms).exp()
            * Complex64::from_polar(1.0, -TAU * dz * theta.cos());
        w * inner(theta).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let (a, b, mul) = if half_el {
        (0.0, FRAC_PI_2, 2.0)
    } else {
        (0.0, PI, 1.0)
    };
    let edges = graded_edges(a, b, Some((FRAC_PI_2, b_el)), rate_el.max(1.0));
    let q = integrate_complex(&g, edges, OUTER_TOL)?;
    let value = mul * gamma * q.value;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::QuadratureNotConverged {
            error_estimate: f64::INFINITY,
        });
    }
    CorrelationCoefficient::new(value)
}
