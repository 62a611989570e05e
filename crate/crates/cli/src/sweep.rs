//! Sweep execution: correlation tables, bounds tables, admissible-distance
//! solving and Monte Carlo validation runs.

use crate::config::{CriterionConfig, SweepSpec};
use crate::CliError;
use rayon::prelude::*;
use serde::Serialize;
use skc_core::bounds::{self, BoundsReport};
use skc_core::correlation::{self, Displacement};
use skc_core::montecarlo::{self, McConfig, ValidationReport};

/// Distance step of the coarse admissible-distance scan, in wavelengths.
const SCAN_STEP_WL: f64 = 0.01;
/// Bisection stops when the bracket is this narrow, in wavelengths.
const BISECTION_RESOLUTION_WL: f64 = 1e-4;
/// Points evaluated per parallel batch while scanning backwards.
const SCAN_CHUNK: usize = 64;

#[derive(Debug, Clone)]
pub struct RhoRow {
    pub spectrum: String,
    pub distance_wl: f64,
    pub distance_m: f64,
    pub rho_abs: f64,
    pub rho_arg: f64,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct SkcRow {
    pub spectrum: String,
    pub distance_wl: f64,
    pub distance_m: f64,
    pub rho_abs: f64,
    pub rho_arg: f64,
    pub report: Option<BoundsReport>,
    pub nz_threshold: f64,
    pub rho_sq_max: f64,
    pub status: String,
}

fn displacement(spec: &SweepSpec, d: f64) -> Result<Displacement, CliError> {
    Displacement::along(spec.axis, d).map_err(CliError::from)
}

/// Correlation against distance, one row per grid point per spectrum.
/// Closed forms are used where available, quadrature otherwise; a quadrature
/// failure is recorded in the row's status and the sweep continues.
pub fn run_rho_sweep(spec: &SweepSpec) -> Result<Vec<RhoRow>, CliError> {
    let grid = spec.grid();
    let wavelength = spec.scenario.wavelength;
    let mut jobs = Vec::new();
    for (label, spectrum) in &spec.spectra {
        for &d in &grid {
            jobs.push((label.clone(), spectrum.clone(), d));
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(label, spectrum, d)| {
            let disp = displacement(spec, d)?;
            let row = match correlation::rho(&spectrum, &disp) {
                Ok(r) => RhoRow {
                    spectrum: label,
                    distance_wl: d,
                    distance_m: d * wavelength,
                    rho_abs: r.magnitude(),
                    rho_arg: r.arg(),
                    status: "ok".to_string(),
                },
                Err(e) => RhoRow {
                    spectrum: label,
                    distance_wl: d,
                    distance_m: d * wavelength,
                    rho_abs: f64::NAN,
                    rho_arg: f64::NAN,
                    status: format!("error: {e}"),
                },
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(rows)
}

/// Bounds against distance: composes the per-distance ρ with the full
/// information-theoretic report. I(X;Y) does not depend on ρ, so its column
/// doubles as the independent-eavesdropper reference.
pub fn run_skc_sweep(spec: &SweepSpec) -> Result<Vec<SkcRow>, CliError> {
    let grid = spec.grid();
    let wavelength = spec.scenario.wavelength;
    let scenario = spec.scenario;
    let mut jobs = Vec::new();
    for (label, spectrum) in &spec.spectra {
        for &d in &grid {
            jobs.push((label.clone(), spectrum.clone(), d));
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(label, spectrum, d)| {
            let disp = displacement(spec, d)?;
            let row = match correlation::rho(&spectrum, &disp)
                .and_then(|r| bounds::bounds_report(&scenario, &r).map(|rep| (r, rep)))
            {
                Ok((r, rep)) => SkcRow {
                    spectrum: label,
                    distance_wl: d,
                    distance_m: d * wavelength,
                    rho_abs: r.magnitude(),
                    rho_arg: r.arg(),
                    nz_threshold: bounds::nz_threshold(
                        scenario.power,
                        scenario.noise_x,
                        scenario.noise_y,
                        &r,
                    ),
                    rho_sq_max: bounds::rho_sq_max(&scenario),
                    report: Some(rep),
                    status: "ok".to_string(),
                },
                Err(e) => SkcRow {
                    spectrum: label,
                    distance_wl: d,
                    distance_m: d * wavelength,
                    rho_abs: f64::NAN,
                    rho_arg: f64::NAN,
                    nz_threshold: f64::NAN,
                    rho_sq_max: bounds::rho_sq_max(&scenario),
                    report: None,
                    status: format!("error: {e}"),
                },
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct DistanceSolution {
    pub achievable: bool,
    /// Smallest distance from which the criterion holds through the end of
    /// the scanned range; NaN when unachievable.
    pub distance_wl: f64,
    /// Lower bound at the solution, or the best value over the scanned grid
    /// when the criterion is unachievable.
    pub lb_bits: f64,
}

fn criterion_holds(criterion: &CriterionConfig, lb: f64) -> bool {
    match criterion {
        CriterionConfig::PositiveLb => lb > 0.0,
        CriterionConfig::LbAtLeast { bits } => lb >= *bits,
    }
}

/// Smallest distance d* in [start, stop] such that the criterion holds at d*
/// and at every sampled point beyond it (oscillating correlation can
/// re-violate a bare first crossing, so the suffix semantics are used).
/// Coarse scan at λ/100 from the far end, then bisection to 1e-4 λ.
pub fn solve_admissible_distance(
    lb_at: &(impl Fn(f64) -> Result<f64, CliError> + Sync),
    criterion: &CriterionConfig,
    start_wl: f64,
    stop_wl: f64,
) -> Result<DistanceSolution, CliError> {
    let points = crate::config::grid_points(start_wl, stop_wl, SCAN_STEP_WL);
    let n = points.len();

    // scan backwards in parallel batches until the first violation
    let mut violation: Option<usize> = None;
    let mut hi = n;
    while hi > 0 && violation.is_none() {
        let lo = hi.saturating_sub(SCAN_CHUNK);
        let lbs: Vec<f64> = points[lo..hi]
            .par_iter()
            .map(|&d| lb_at(d))
            .collect::<Result<Vec<_>, _>>()?;
        for j in (0..lbs.len()).rev() {
            if !criterion_holds(criterion, lbs[j]) {
                violation = Some(lo + j);
                break;
            }
        }
        hi = lo;
    }

    match violation {
        None => Ok(DistanceSolution {
            achievable: true,
            distance_wl: start_wl,
            lb_bits: lb_at(start_wl)?,
        }),
        Some(j) if j + 1 >= n => {
            // violated at the far end of the range: no distance can be
            // certified; report the best value seen as a diagnostic
            let best = points
                .par_iter()
                .map(|&d| lb_at(d))
                .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?;
            Ok(DistanceSolution {
                achievable: false,
                distance_wl: f64::NAN,
                lb_bits: best,
            })
        }
        Some(j) => {
            let mut lo = points[j];
            let mut hi = points[j + 1];
            while hi - lo > BISECTION_RESOLUTION_WL {
                let mid = 0.5 * (lo + hi);
                if criterion_holds(criterion, lb_at(mid)?) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(DistanceSolution {
                achievable: true,
                distance_wl: hi,
                lb_bits: lb_at(hi)?,
            })
        }
    }
}

/// Lower bound as a function of distance for one spectrum under the sweep's
/// scenario.
pub fn lb_of_distance<'a>(
    spec: &'a SweepSpec,
    spectrum: &'a skc_core::AngularSpectrum,
) -> impl Fn(f64) -> Result<f64, CliError> + Sync + 'a {
    move |d: f64| {
        let disp = displacement(spec, d)?;
        let r = correlation::rho(spectrum, &disp)?;
        Ok(bounds::lower_bound(&spec.scenario, &r))
    }
}

#[derive(Debug, Serialize)]
pub struct McRunEntry {
    pub spectrum: String,
    pub displacement_wl: f64,
    pub report: ValidationReport,
}

#[derive(Debug, Serialize)]
pub struct McValidateOutput {
    pub num_observations: usize,
    pub seed: u64,
    pub runs: Vec<McRunEntry>,
    pub all_pass: bool,
}

/// Monte Carlo validation for every configured spectrum at every configured
/// displacement.
pub fn run_mc_validate(
    spec: &SweepSpec,
    seed_override: Option<u64>,
    samples_override: Option<usize>,
) -> Result<McValidateOutput, CliError> {
    if spec.mc.mode == skc_core::montecarlo::PathMode::Frozen {
        return Err(CliError::Config(
            "mc.mode = \"frozen\" estimates a single-geometry conditional correlation and is \
             for exploration only; validation requires \"ensemble\""
                .to_string(),
        ));
    }
    let seed = seed_override.unwrap_or(spec.mc.seed);
    let samples = samples_override.unwrap_or(spec.mc.num_observations);
    let mut runs = Vec::new();
    for (label, spectrum) in &spec.spectra {
        for &d in &spec.mc.displacements_wl {
            let mut cfg = McConfig::new(
                spec.mc.num_paths,
                samples,
                seed,
                spec.scenario,
                spectrum.clone(),
                displacement(spec, d)?,
            )?;
            cfg.mode = spec.mc.mode;
            let report = montecarlo::validate(&cfg)?;
            runs.push(McRunEntry {
                spectrum: label.clone(),
                displacement_wl: d,
                report,
            });
        }
    }
    let all_pass = runs.iter().all(|r| r.report.all_pass);
    Ok(McValidateOutput {
        num_observations: samples,
        seed,
        runs,
        all_pass,
    })
}

impl From<skc_core::Error> for CliError {
    fn from(e: skc_core::Error) -> Self {
        match e {
            skc_core::Error::Domain(_) | skc_core::Error::SingularSupport => {
                CliError::Config(e.to_string())
            }
            skc_core::Error::QuadratureNotConverged { .. }
            | skc_core::Error::NumericalDegeneracy(_) => CliError::Numerical(e.to_string()),
        }
    }
}
