//! Acceptance suite: one test per release criterion, each printing a PASS
//! line with its measured numbers (run with `--nocapture` to see them).
//!
//! The tests serialize on a mutex so the timed criteria see the whole
//! machine rather than competing with each other.

use rayon::prelude::*;
use skc_cli::config::{CriterionConfig, McSettings, Outputs, SpectrumConfig, SweepSpec};
use skc_cli::sweep;
use skc_core::bessel::bessel_j0;
use skc_core::bessel::sinc;
use skc_core::bounds::{self, Scenario, TightCase};
use skc_core::correlation::{self, CorrelationCoefficient, Displacement};
use skc_core::montecarlo::{self, McConfig};
use skc_core::rng::CounterRng;
use skc_core::spectrum::{AngularSpectrum, PathComponent};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::Command;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

fn lock() -> std::sync::MutexGuard<'static, ()> {
    static GATE: OnceLock<Mutex<()>> = OnceLock::new();
    GATE.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
}

fn deg(x: f64) -> f64 {
    x * PI / 180.0
}

fn along_x(d: f64) -> Displacement {
    Displacement::new(d, 0.0, 0.0).unwrap()
}

/// Reference configuration: 10 dB legitimate SNR, 20 dB at the eavesdropper.
fn reference_scenario() -> Scenario {
    Scenario::new(1.0, 0.1, 0.1, 0.01, 0.3).unwrap()
}

fn reference_spec(spectra: Vec<SpectrumConfig>, stop: f64, step: f64) -> SweepSpec {
    let built = spectra
        .iter()
        .map(|c| {
            let label = format!("{c:?}");
            (label, skc_cli::config::build_spectrum(c).unwrap())
        })
        .collect();
    SweepSpec {
        scenario: reference_scenario(),
        spectra: built,
        spectra_config: spectra,
        axis: [1.0, 0.0, 0.0],
        grid_start: 0.0,
        grid_stop: stop,
        grid_step: step,
        outputs: Outputs {
            rho: true,
            bounds: true,
            threshold: true,
        },
        criterion: CriterionConfig::PositiveLb,
        mc: McSettings {
            num_paths: 64,
            num_observations: 10_000,
            seed: 1,
            mode: Default::default(),
            displacements_wl: vec![0.0, 0.5, 2.0],
        },
    }
}

#[test]
fn criterion_01_quadrature_matches_closed_forms() {
    let _gate = lock();
    let start = Instant::now();
    let grid: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();

    let worst = grid
        .par_iter()
        .map(|&d| {
            let q3 = correlation::rho_quadrature(&AngularSpectrum::isotropic_3d(), &along_x(d))
                .unwrap();
            let e3 = (q3.value().re - sinc(TAU * d)).abs().max(q3.value().im.abs());
            let q2 = correlation::rho_quadrature(&AngularSpectrum::isotropic_2d(), &along_x(d))
                .unwrap();
            let e2 = (q2.value().re - bessel_j0(TAU * d))
                .abs()
                .max(q2.value().im.abs());
            e3.max(e2)
        })
        .reduce(|| 0.0, f64::max);

    let elapsed = start.elapsed();
    assert!(worst <= 1e-6, "worst deviation {worst:e}");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 01 PASS: sphere quadrature vs sinc and J0 over 0..10 wl, \
         worst |err| = {worst:.2e}, {elapsed:?}"
    );
}

#[test]
fn criterion_02_spread_ordering_of_correlation() {
    let _gate = lock();
    for d in [2.0, 10.0] {
        let lap = |phi: f64| {
            correlation::rho_quadrature(
                &AngularSpectrum::laplacian(deg(phi), deg(5.0)).unwrap(),
                &along_x(d),
            )
            .unwrap()
            .magnitude()
        };
        let (l1, l10, l40) = (lap(1.0), lap(10.0), lap(40.0));
        let i2 = correlation::rho_iso2d(d).unwrap().magnitude();
        let i3 = correlation::rho_iso3d(d).unwrap().magnitude();
        assert!(
            l1 > l10 && l10 > l40 && l40 > i2 && i2 >= i3,
            "d={d}: {l1} {l10} {l40} {i2} {i3}"
        );
        println!(
            "criterion 02 PASS at {d} wl: lap(1)= {l1:.4} > lap(10)= {l10:.4} > \
             lap(40)= {l40:.4} > iso2d= {i2:.4} >= iso3d= {i3:.4}"
        );
    }
}

#[test]
fn criterion_03_reference_configuration_sanity() {
    let _gate = lock();
    let spec = reference_spec(
        vec![
            SpectrumConfig::Iso3d,
            SpectrumConfig::Iso2d,
            SpectrumConfig::Laplacian {
                phi_rms_deg: 10.0,
                theta_rms_deg: 5.0,
            },
        ],
        10.0,
        0.1,
    );
    let i_xy = bounds::mi_xy(&spec.scenario);
    assert!(
        (i_xy - 2.527).abs() <= 1e-3,
        "independent-eavesdropper reference {i_xy}"
    );

    let rows = sweep::run_skc_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 3 * 101);
    for row in &rows {
        assert_eq!(row.status, "ok", "{row:?}");
        let rep = row.report.as_ref().unwrap();
        assert!(rep.lower_bound <= rep.upper_bound + 1e-10, "{row:?}");
        assert!(rep.upper_bound <= rep.i_xy + 1e-12, "{row:?}");
        assert!((rep.i_xy - i_xy).abs() < 1e-12);
    }
    println!(
        "criterion 03 PASS: I(X;Y) = {i_xy:.6} bits, LB <= UB <= I(X;Y) on all {} rows",
        rows.len()
    );
}

#[test]
fn criterion_04_conditioning_never_helps_eve() {
    let _gate = lock();
    let start = Instant::now();
    let mut rng = CounterRng::new(20_240_401);
    let log_span = |r: &mut CounterRng| 10f64.powf(-3.0 + 6.0 * r.next_f64());
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let s = Scenario::new(
            log_span(&mut rng),
            log_span(&mut rng),
            log_span(&mut rng),
            log_span(&mut rng),
            0.3,
        )
        .unwrap();
        let rho = CorrelationCoefficient::new(skc_core::Complex64::from_polar(
            rng.next_f64(),
            rng.next_phase(),
        ))
        .unwrap();
        let cond = bounds::mi_xy_given_z(&s, &rho).unwrap();
        let xy = bounds::mi_xy(&s);
        worst = worst.max(cond - xy);
        assert!(cond <= xy + 1e-10, "{s:?} |rho|={}", rho.magnitude());
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 04 PASS: I(X;Y|Z) <= I(X;Y) on 10^4 random scenarios, \
         worst margin {worst:.2e}, {elapsed:?}"
    );
}

#[test]
fn criterion_05_threshold_brackets_the_sign_change() {
    let _gate = lock();
    // scale invariance lets P = 1; the threshold is positive by construction
    // of |rho|^2 in (1/(1+min N), 1)
    let mut rng = CounterRng::new(20_240_402);
    let log_span = |r: &mut CounterRng| 10f64.powf(-3.0 + 6.0 * r.next_f64());
    let mut widest = 0.0f64;
    for _ in 0..100 {
        let (nx, ny) = (log_span(&mut rng), log_span(&mut rng));
        let min_n = nx.min(ny);
        let u = 1e-3 + (1.0 - 2e-3) * rng.next_f64();
        let r2 = (1.0 + u * min_n) / (1.0 + min_n);
        let rho = CorrelationCoefficient::new(skc_core::Complex64::from_polar(
            r2.sqrt(),
            rng.next_phase(),
        ))
        .unwrap();
        let t = bounds::nz_threshold(1.0, nx, ny, &rho);
        assert!(t > 0.0);
        let delta = 1e-6 * (1.0 + t.abs());
        let lb = |nz: f64| {
            bounds::lower_bound(&Scenario::new(1.0, nx, ny, nz, 0.3).unwrap(), &rho)
        };
        let (below, above) = (lb(t - delta), lb(t + delta));
        assert!(below < 0.0 && above > 0.0, "t={t}: {below} / {above}");
        widest = widest.max(below.abs().max(above.abs()));
    }
    println!(
        "criterion 05 PASS: LB brackets zero at the noise threshold on 100 scenarios \
         (largest |LB| at the bracket {widest:.2e})"
    );
}

#[test]
fn criterion_06_bounds_tighten_as_bob_goes_noiseless() {
    let _gate = lock();
    let rho = CorrelationCoefficient::from_magnitude(0.9).unwrap();
    let case2 = bounds::tight_capacity(
        &Scenario::new(1.0, 0.1, 0.0, 0.01, 0.3).unwrap(),
        &rho,
        TightCase::NoiselessBob,
    )
    .unwrap();

    let mut prev_gap = f64::INFINITY;
    let mut last = (0.0, 0.0);
    for k in 1..=8 {
        let ny = 10f64.powi(-k);
        let s = Scenario::new(1.0, 0.1, ny, 0.01, 0.3).unwrap();
        let lb = bounds::lower_bound(&s, &rho);
        let ub = bounds::upper_bound(&s, &rho).unwrap();
        let gap = ub - lb;
        assert!(gap >= -1e-12, "gap {gap} at N_Y=1e-{k}");
        assert!(gap <= prev_gap + 1e-15, "not monotone at N_Y=1e-{k}");
        prev_gap = gap;
        last = (lb, ub);
    }
    assert!((last.0 - case2).abs() <= 1e-6, "LB {} vs {case2}", last.0);
    assert!((last.1 - case2).abs() <= 1e-6, "UB {} vs {case2}", last.1);
    println!(
        "criterion 06 PASS: UB-LB shrinks monotonically to {prev_gap:.1e}; both within \
         {:.1e} of the Markov closed form {case2:.6}",
        (last.1 - case2).abs().max((last.0 - case2).abs())
    );
}

#[test]
fn criterion_07_eavesdropper_mi_asymptote() {
    let _gate = lock();
    let rho = CorrelationCoefficient::from_magnitude(0.9).unwrap();
    let s = Scenario::new(1e9, 1.0, 1.0, 1.0, 0.3).unwrap();
    let value = bounds::mi_xz(&s, &rho);
    let limit = bounds::eve_mi_asymptote(&rho);
    assert!((limit - 2.396).abs() < 1e-3);
    assert!((value - limit).abs() <= 1e-3, "{value} vs {limit}");
    println!(
        "criterion 07 PASS: I(X;Z) at P = 1e9 is {value:.6} bits, asymptote {limit:.6}"
    );
}

#[test]
fn criterion_08_monte_carlo_cross_validation() {
    let _gate = lock();
    let start = Instant::now();
    let spectra: Vec<(&str, AngularSpectrum)> = vec![
        ("iso3d", AngularSpectrum::isotropic_3d()),
        ("iso2d", AngularSpectrum::isotropic_2d()),
        (
            "laplacian(10,5)",
            AngularSpectrum::laplacian(deg(10.0), deg(5.0)).unwrap(),
        ),
        (
            "discrete-2path",
            AngularSpectrum::discrete(vec![
                PathComponent {
                    relative_power: 0.6,
                    azimuth: deg(20.0),
                    elevation: FRAC_PI_2,
                },
                PathComponent {
                    relative_power: 0.4,
                    azimuth: deg(-35.0),
                    elevation: deg(80.0),
                },
            ])
            .unwrap(),
        ),
    ];
    let mut runs = 0;
    for (name, spectrum) in &spectra {
        for d in [0.0, 0.5, 2.0] {
            let cfg = McConfig::new(
                64,
                1_000_000,
                0xACCE97 + runs,
                reference_scenario(),
                spectrum.clone(),
                along_x(d),
            )
            .unwrap();
            let report = montecarlo::validate(&cfg).unwrap();
            assert!(report.all_pass, "{name} at {d} wl: {report:?}");

            // the correlation estimate additionally meets the bare 3-sigma gate
            let rho_ref = correlation::rho(spectrum, &along_x(d)).unwrap();
            let est = skc_core::Complex64::new(report.rho.estimate_re, report.rho.estimate_im);
            let dev = (est - rho_ref.value()).norm();
            assert!(
                dev <= 3.0 * report.rho.stderr + 1e-12,
                "{name} at {d} wl: rho dev {dev} vs 3se {}",
                3.0 * report.rho.stderr
            );
            runs += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 08 PASS: {runs} configurations x 10^6 observations all validate, {elapsed:?}"
    );
}

#[test]
fn criterion_09_scale_invariance_of_reports() {
    let _gate = lock();
    let mut rng = CounterRng::new(20_240_409);
    for _ in 0..200 {
        let base = Scenario::new(
            0.5 + rng.next_f64(),
            rng.next_f64(),
            rng.next_f64(),
            rng.next_f64(),
            0.3,
        )
        .unwrap();
        let rho = CorrelationCoefficient::new(skc_core::Complex64::from_polar(
            rng.next_f64(),
            rng.next_phase(),
        ))
        .unwrap();
        let reference = bounds::bounds_report(&base, &rho).unwrap();
        for c in [1e-3, 1.0, 1e3] {
            let scaled = Scenario::new(
                base.power * c,
                base.noise_x * c,
                base.noise_y * c,
                base.noise_z * c,
                base.wavelength,
            )
            .unwrap();
            let rep = bounds::bounds_report(&scaled, &rho).unwrap();
            for (a, b) in [
                (rep.i_xy, reference.i_xy),
                (rep.i_xz, reference.i_xz),
                (rep.i_yz, reference.i_yz),
                (rep.i_xy_given_z, reference.i_xy_given_z),
                (rep.lower_bound, reference.lower_bound),
                (rep.upper_bound, reference.upper_bound),
            ] {
                assert!((a - b).abs() <= 1e-10, "c={c}: {a} vs {b}");
            }
        }
    }
    println!("criterion 09 PASS: common power scaling leaves every report field unchanged");
}

#[test]
fn criterion_10_byte_identical_reruns() {
    let _gate = lock();
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.json");
    std::fs::write(
        &cfg_path,
        r#"{
  "scenario": { "snr_x_db": 10.0, "snr_y_db": 10.0, "snr_z_db": 20.0, "wavelength_m": 0.3 },
  "spectra": [ { "type": "iso3d" }, { "type": "iso2d" },
               { "type": "laplacian", "phi_rms_deg": 10.0, "theta_rms_deg": 5.0 } ],
  "axis": { "x": 1.0 },
  "grid": { "start": 0.0, "stop": 1.0, "step": 0.05 },
  "mc": { "num_paths": 16, "num_observations": 10000, "seed": 77, "displacements_wl": [0.5] }
}"#,
    )
    .unwrap();

    let run = |cmd: &str, out: &std::path::Path| {
        let res = Command::new(env!("CARGO_BIN_EXE_skc"))
            .args([
                cmd,
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            res.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&res.stderr)
        );
        std::fs::read(out).unwrap()
    };

    let a = run("skc-sweep", &dir.path().join("a.csv"));
    let b = run("skc-sweep", &dir.path().join("b.csv"));
    assert_eq!(a, b, "skc-sweep outputs differ between identical runs");

    let ma = run("mc-validate", &dir.path().join("a.json"));
    let mb = run("mc-validate", &dir.path().join("b.json"));
    assert_eq!(ma, mb, "mc-validate reports differ for an identical seed");
    println!(
        "criterion 10 PASS: byte-identical CSV ({} bytes) and JSON ({} bytes) across reruns",
        a.len(),
        ma.len()
    );
}
