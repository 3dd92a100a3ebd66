//! Acceptance suite: the quantitative claims the artifact stands on, each
//! criterion as one test with pinned tolerances and runtime budgets.
//!
//! Run with `cargo test -p qig-cli --test acceptance -- --nocapture` to see
//! one pass line with the worst residual per criterion.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qig::closed_form::{closed_form_for, discrepancy_nc, flux_ground_projector};
use qig::hermitian::eig;
use qig::metrics::{
    bures_distance_sq, bures_metric_hubner, bures_metric_thermal, finite_diff_drho,
    fubini_study_metric, sjoqvist_distance_sq, sjoqvist_metric, Coord, MetricTensor,
    DEFAULT_FD_STEP,
};
use qig::models::{thermal_state, ModelSpec};

fn grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    qig::scan::RangeSpec::new(start, stop, count)
        .unwrap()
        .values()
}

struct WorstCase {
    residual: f64,
    at: String,
}

impl WorstCase {
    fn new() -> Self {
        WorstCase {
            residual: 0.0,
            at: "-".into(),
        }
    }

    fn update(&mut self, residual: f64, at: impl FnOnce() -> String) {
        if residual > self.residual {
            self.residual = residual;
            self.at = at();
        }
    }

    fn gate(&self, criterion: &str, tolerance: f64, elapsed: Duration, budget: Duration) {
        assert!(
            self.residual <= tolerance,
            "{criterion}: worst residual {:e} exceeds {tolerance:e} at {}",
            self.residual,
            self.at
        );
        assert!(
            elapsed <= budget,
            "{criterion}: took {elapsed:?}, budget {budget:?}"
        );
        println!(
            "PASS {criterion}: worst residual {:e} (tolerance {tolerance:e}) in {elapsed:?}",
            self.residual
        );
    }
}

/// Spin-qubit-z coincidence: over a 20x20 grid, both engines and both
/// metrics agree componentwise within 1e-10 and equal the closed forms.
#[test]
fn criterion_1_spin_z_coincidence() {
    let start = Instant::now();
    let model = ModelSpec::spin_z(1.0);
    let mut worst = WorstCase::new();
    for &beta in &grid(0.1, 5.0, 20) {
        for &omega in &grid(0.1, 5.0, 20) {
            let at = || format!("(β={beta:.3}, ω={omega:.3})");
            let cf = closed_form_for(&model, beta, omega).unwrap();
            let bures = bures_metric_thermal(&model, beta, omega).unwrap();
            let sjoqvist = sjoqvist_metric(&model, beta, omega).unwrap();
            worst.update(bures.max_abs_diff(&sjoqvist), at);
            worst.update(bures.max_abs_diff(&cf.tensor_bures), at);
            worst.update(sjoqvist.max_abs_diff(&cf.tensor_sjoqvist), at);
            worst.update(cf.tensor_bures.max_abs_diff(&cf.tensor_sjoqvist), at);
        }
    }
    worst.gate(
        "criterion 1 (spin-z coincidence)",
        1e-10,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

/// Flux-qubit discrepancy: the Sjöqvist-minus-Bures hh difference equals
/// the closed-form discrepancy within 1e-10 and is nonnegative; all other
/// components agree within 1e-10.
#[test]
fn criterion_2_flux_discrepancy() {
    let start = Instant::now();
    let model = ModelSpec::flux_qubit(1.0, 1.0);
    let mut worst = WorstCase::new();
    for &beta in &grid(0.1, 5.0, 20) {
        for &eps in &grid(-2.0, 2.0, 20) {
            let at = || format!("(β={beta:.3}, ε={eps:.3})");
            let bures = bures_metric_thermal(&model, beta, eps).unwrap();
            let sjoqvist = sjoqvist_metric(&model, beta, eps).unwrap();
            let difference = sjoqvist.g_hh() - bures.g_hh();
            let expected = discrepancy_nc(beta, eps, 1.0, 1.0).unwrap();
            worst.update((difference - expected).abs(), at);
            worst.update(-difference, at);
            worst.update((sjoqvist.g_bb() - bures.g_bb()).abs(), at);
            worst.update((sjoqvist.g_bh() - bures.g_bh()).abs(), at);
            worst.update((sjoqvist.hh.classical - bures.hh.classical).abs(), at);
        }
    }
    worst.gate(
        "criterion 2 (flux discrepancy)",
        1e-10,
        start.elapsed(),
        Duration::from_secs(1),
    );
}

fn builtin_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::spin_z(1.0),
        ModelSpec::spin_xz(1.0, 1.0).unwrap(),
        ModelSpec::flux_qubit(1.0, 1.0),
    ]
}

fn sample_point(rng: &mut ChaCha8Rng, model: &ModelSpec) -> (f64, f64) {
    let beta = rng.gen_range(0.3..3.0);
    let h = if model.name() == "spin-z" {
        let magnitude = rng.gen_range(0.3..3.0);
        if rng.gen_bool(0.5) {
            magnitude
        } else {
            -magnitude
        }
    } else {
        rng.gen_range(-1.5..1.5)
    };
    (beta, h)
}

/// Engine equivalence: the eigenbasis sum fed with finite-difference dρ
/// matches the direct thermal form within 1e-7 on 50 seeded points per
/// model.
#[test]
fn criterion_3_engine_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = WorstCase::new();
    for model in builtin_models() {
        for _ in 0..50 {
            let (beta, h) = sample_point(&mut rng, &model);
            let direct = bures_metric_thermal(&model, beta, h).unwrap();
            let drho_beta =
                finite_diff_drho(&model, beta, h, Coord::Beta, DEFAULT_FD_STEP).unwrap();
            let drho_h = finite_diff_drho(&model, beta, h, Coord::H, DEFAULT_FD_STEP).unwrap();
            let spec = eig(thermal_state(&model, beta, h).unwrap().rho()).unwrap();
            let summed = bures_metric_hubner(&spec, [&drho_beta, &drho_h], model.h_name()).unwrap();
            worst.update(direct.max_abs_diff(&summed), || {
                format!("{} at (β={beta:.3}, h={h:.3})", model.name())
            });
        }
    }
    worst.gate(
        "criterion 3 (engine equivalence)",
        1e-7,
        start.elapsed(),
        Duration::from_secs(5),
    );
}

/// Distance-oracle convergence on the noncommuting models: the ratio of
/// squared distance to the midpoint quadratic form sits within 1±5e-3 at
/// |δ|=1e-3 and 1±5e-5 at |δ|=1e-4.
#[test]
fn criterion_4_distance_oracle_convergence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_coarse = WorstCase::new();
    let mut worst_fine = WorstCase::new();
    for model in [
        ModelSpec::spin_xz(1.0, 1.0).unwrap(),
        ModelSpec::flux_qubit(1.0, 1.0),
    ] {
        for use_bures in [false, true] {
            for _ in 0..10 {
                let (beta, h) = sample_point(&mut rng, &model);
                let tensor_at = |b: f64, hh: f64| -> MetricTensor {
                    if use_bures {
                        bures_metric_thermal(&model, b, hh).unwrap()
                    } else {
                        sjoqvist_metric(&model, b, hh).unwrap()
                    }
                };
                let here = tensor_at(beta, h);
                let floor = 0.25 * (here.g_bb() + here.g_hh());
                let (dir_beta, dir_h) = loop {
                    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                    let dir = (angle.cos(), angle.sin());
                    if here.quadratic_form(dir.0, dir.1) >= floor {
                        break dir;
                    }
                };
                for (scale, worst) in [(1e-3, &mut worst_coarse), (1e-4, &mut worst_fine)] {
                    let (db, dh) = (dir_beta * scale, dir_h * scale);
                    let mid = tensor_at(beta + db / 2.0, h + dh / 2.0);
                    let form = mid.quadratic_form(db, dh);
                    let a = thermal_state(&model, beta, h).unwrap();
                    let b = thermal_state(&model, beta + db, h + dh).unwrap();
                    let d2 = if use_bures {
                        bures_distance_sq(a.rho(), b.rho()).unwrap()
                    } else {
                        sjoqvist_distance_sq(&a, &b).unwrap()
                    };
                    worst.update((d2 / form - 1.0).abs(), || {
                        format!(
                            "{} {} at (β={beta:.3}, h={h:.3})",
                            if use_bures { "bures" } else { "sjoqvist" },
                            model.name()
                        )
                    });
                }
            }
        }
    }
    let elapsed = start.elapsed();
    worst_coarse.gate(
        "criterion 4a (oracle convergence, |δ|=1e-3)",
        5e-3,
        elapsed,
        Duration::from_secs(5),
    );
    worst_fine.gate(
        "criterion 4b (oracle convergence, |δ|=1e-4)",
        5e-5,
        elapsed,
        Duration::from_secs(5),
    );
}

/// Zero-temperature limit: at β=50 both metrics' εε components are within
/// 1e-6 of Δ²/4ν⁴, which is exactly half the Fubini-Study value.
#[test]
fn criterion_5_zero_temperature_limit() {
    let start = Instant::now();
    let model = ModelSpec::flux_qubit(1.0, 1.0);
    let mut worst_limit = WorstCase::new();
    let mut worst_factor = WorstCase::new();
    for &eps in &grid(-3.0, 3.0, 21) {
        let at = || format!("ε={eps:.2}");
        let nu_sq = 1.0 + eps * eps;
        let limit = 0.25 / (nu_sq * nu_sq);
        let bures = bures_metric_thermal(&model, 50.0, eps).unwrap();
        let sjoqvist = sjoqvist_metric(&model, 50.0, eps).unwrap();
        worst_limit.update((bures.g_hh() - limit).abs(), at);
        worst_limit.update((sjoqvist.g_hh() - limit).abs(), at);

        let (rho_inf, drho_inf) = flux_ground_projector(1.0, eps).unwrap();
        let fs = fubini_study_metric(&rho_inf, &drho_inf).unwrap();
        worst_factor.update((fs - 2.0 * limit).abs(), at);
    }
    let elapsed = start.elapsed();
    worst_limit.gate(
        "criterion 5a (β=50 limit)",
        1e-6,
        elapsed,
        Duration::from_secs(5),
    );
    worst_factor.gate(
        "criterion 5b (Fubini-Study factor 2)",
        1e-10,
        elapsed,
        Duration::from_secs(5),
    );
}

/// Fig. 2 reproduction through the real binary: intercepts at β=0, strict
/// decrease along β, and decay below 1e-6 by β=10 for ε=1.
#[test]
fn criterion_6_fig2_reproduction() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let output = Command::new(env!("CARGO_BIN_EXE_qig"))
        .args(["fig2", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");

    let text = std::fs::read_to_string(&out).unwrap();
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        rows.push(fields);
    }
    assert_eq!(rows.len(), 201);

    let mut worst = WorstCase::new();
    worst.update((rows[0][1] - 0.0625).abs(), || "intercept ε=1".into());
    worst.update((rows[0][2] - 0.0380725).abs(), || "intercept ε=1.25".into());
    worst.update((rows[0][3] - 0.0236686).abs(), || "intercept ε=1.5".into());
    for column in 1..=3 {
        for pair in rows.windows(2) {
            assert!(
                pair[1][column] < pair[0][column],
                "column {column} not strictly decreasing at β={}",
                pair[1][0]
            );
        }
    }
    let last = rows.last().unwrap();
    assert_eq!(last[0], 10.0);
    assert!(last[1] <= 1e-6, "ε=1 tail {} at β=10", last[1]);
    worst.gate(
        "criterion 6 (Fig. 2 reproduction)",
        1e-6,
        start.elapsed(),
        Duration::from_secs(10),
    );
}

/// Tilted-spin ratio: the Bures-to-Sjöqvist nonclassical ratio equals
/// tanh²(βħν/2) within 1e-10 and stays inside [0, 1] on 50 seeded points.
#[test]
fn criterion_7_tilted_spin_ratio() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = ModelSpec::spin_xz(1.0, 1.0).unwrap();
    let mut worst = WorstCase::new();
    for _ in 0..50 {
        let (beta, omega_z) = sample_point(&mut rng, &model);
        let at = || format!("(β={beta:.3}, ω_z={omega_z:.3})");
        let bures = bures_metric_thermal(&model, beta, omega_z).unwrap();
        let sjoqvist = sjoqvist_metric(&model, beta, omega_z).unwrap();
        let ratio = bures.hh.nonclassical / sjoqvist.hh.nonclassical;
        let nu = (1.0 + omega_z * omega_z).sqrt();
        let expected = (beta * nu / 2.0).tanh().powi(2);
        worst.update((ratio - expected).abs(), at);
        worst.update((-ratio).max(0.0), at);
        worst.update((ratio - 1.0).max(0.0), at);
    }
    worst.gate(
        "criterion 7 (tilted-spin ratio)",
        1e-10,
        start.elapsed(),
        Duration::from_secs(5),
    );
}

/// Property suites: the full `qig check` run (hermitian-core properties,
/// thermal-state invariants, PSD, and the cross-validation suites) exits 0
/// inside the time budget.
#[test]
fn criterion_8_property_suites_via_check() {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_qig"))
        .arg("check")
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        output.status.success(),
        "qig check failed:\n{stdout}\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert_eq!(stdout.matches("[PASS]").count(), 12, "{stdout}");
    assert!(
        elapsed <= Duration::from_secs(60),
        "qig check took {elapsed:?}"
    );
    println!("PASS criterion 8 (property suites): qig check exit 0 in {elapsed:?}");
}
