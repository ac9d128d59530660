//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use tripc_core::conelab::{annihilator, central_sa_maximal, orderable_probe};
use tripc_core::suite::{verify, SuiteConfig, SuiteReport};
use tripc_core::tripotent::Tripotent;
use tripc_core::tro::TroSpace;
use tripc_core::{CMatrix, TolerancePolicy};

const ORDER_EQUIV_SECONDS: f64 = 30.0;
const END_TO_END_SECONDS: f64 = 300.0;
const RESIDUAL: f64 = 1e-8;
const NORM_SLACK: f64 = 1e-9;
const EIGEN_SLACK: f64 = 1e-10;
const PSD_SLACK: f64 = 1e-9;

struct Outcome {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn run_suite(name: &str, trials: usize, dim_max: usize) -> SuiteReport {
    let config = SuiteConfig {
        trials: Some(trials),
        dim_max,
        ..SuiteConfig::new(name)
    };
    verify(&config).expect("suite runs")
}

fn residual(r: &SuiteReport, key: &str) -> f64 {
    r.max_residuals.get(key).copied().unwrap_or(f64::NAN)
}

/// Zero failures, the requested trial count and every listed residual within its limit.
fn suite_outcome(name: &'static str, r: &SuiteReport, trials: usize, limits: &[(&str, f64)]) -> Outcome {
    let mut ok = r.failed == 0 && r.trials == trials;
    let mut detail = format!("{}/{} trials passed", r.passed, r.trials);
    for (key, limit) in limits {
        let v = residual(r, key);
        ok &= v <= *limit;
        detail.push_str(&format!(", {key} {v:.2e} (≤ {limit:.0e})"));
    }
    if let Some(f) = r.failures.first() {
        detail.push_str(&format!(", first failure at trial {}: {:?}", f.trial, f.messages));
    }
    Outcome { name, ok, detail }
}

fn order_equiv() -> Outcome {
    let r = run_suite("order-equiv", 500, 8);
    let mut out = suite_outcome("order-equiv", &r, 500, &[("order_residual", RESIDUAL), ("support_psd_slack", PSD_SLACK)]);
    out.ok &= r.elapsed_seconds < ORDER_EQUIV_SECONDS;
    out.detail.push_str(&format!(", {:.2} s (< {ORDER_EQUIV_SECONDS} s)", r.elapsed_seconds));
    out
}

fn sup_inf() -> Outcome {
    let r = run_suite("sup-inf", 500, 4);
    suite_outcome(
        "sup-inf",
        &r,
        500,
        &[
            ("sup_dominates", RESIDUAL),
            ("sup_vs_oracle", RESIDUAL),
            ("inf_tripotent", RESIDUAL),
            ("inf_below", RESIDUAL),
        ],
    )
}

fn cone_lemmas() -> Outcome {
    let r = run_suite("cone-lemmas", 500, 4);
    suite_outcome(
        "cone-lemmas",
        &r,
        500,
        &[
            ("natural_cone_mismatches", 0.0),
            ("abs_identity", RESIDUAL),
            ("cone_members_rejected", 0.0),
            ("cone_vs_range_order_mismatches", 0.0),
        ],
    )
}

fn hat_lemmas() -> Outcome {
    let r = run_suite("hat-lemmas", 500, 4);
    suite_outcome(
        "hat-lemmas",
        &r,
        500,
        &[
            ("hat_negative_eigenvalue", EIGEN_SLACK),
            ("hat_norm_excess", NORM_SLACK),
            ("hat_limit_residual", RESIDUAL),
            ("hat_range_residual", RESIDUAL),
        ],
    )
}

fn block_bounds() -> Outcome {
    let r = run_suite("block-bounds", 300, 4);
    suite_outcome(
        "block-bounds",
        &r,
        300,
        &[
            ("inf_below_limit", PSD_SLACK),
            ("limit_below_x", PSD_SLACK),
            ("x_below_range", PSD_SLACK),
            ("range_below_sup", PSD_SLACK),
        ],
    )
}

fn peirce_cstar() -> Outcome {
    let r = run_suite("peirce-cstar", 300, 4);
    let keys = [
        "product_closure",
        "involution_closure",
        "involution_period",
        "anti_multiplicative",
        "unit",
        "associativity",
        "iso_product",
        "iso_involution",
        "cstar_norm",
    ];
    let limits: Vec<_> = keys.iter().map(|k| (*k, RESIDUAL)).collect();
    suite_outcome("peirce-cstar", &r, 300, &limits)
}

fn quotient_positivity() -> Outcome {
    let r = run_suite("quotient-positivity", 200, 4);
    suite_outcome(
        "quotient-positivity",
        &r,
        200,
        &[
            ("quotient_ternary_residual", RESIDUAL),
            ("ideal_image", RESIDUAL),
            ("image_negative_eigenvalue", PSD_SLACK),
        ],
    )
}

fn boundary_cone() -> Outcome {
    let r = run_suite("boundary-cone", 200, 4);
    suite_outcome(
        "boundary-cone",
        &r,
        200,
        &[("level1_residual", RESIDUAL), ("level2_residual", RESIDUAL)],
    )
}

fn offdiagonal_witness() -> Outcome {
    let tol = TolerancePolicy::default();
    let basis = vec![CMatrix::unit(2, 2, 0, 1), CMatrix::unit(2, 2, 1, 0)];
    let z = Arc::new(TroSpace::from_basis(2, 2, true, basis, &tol).expect("valid TRO"));
    let j_dim = z.j_subalgebra(&tol).map(|j| j.dim());
    let u = Tripotent::zero(z.clone());
    let maximal = central_sa_maximal(&u, &tol);
    let ann = annihilator(&z, &[CMatrix::zeros(2, 2)], &tol).map(|a| (a.dim(), a.same_span(z.subspace(), &tol)));
    let probe = orderable_probe(&u, &tol).map(|r| r.verdict);
    let ok = matches!(j_dim, Ok(0))
        && matches!(maximal, Ok(true))
        && matches!(ann, Ok((2, true)))
        && matches!(probe, Ok(Some(false)));
    Outcome {
        name: "offdiagonal-witness",
        ok,
        detail: format!("dim J(Z) {j_dim:?}, u = 0 maximal {maximal:?}, annihilator (dim, = Z) {ann:?}, probe verdict {probe:?}"),
    }
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_tripc"))
        .args(["verify", "--suite", "all"])
        .env_remove("TRIPC_TOL_EQ")
        .output()
        .expect("run tripc");
    let seconds = start.elapsed().as_secs_f64();
    let report: Option<SuiteReport> = serde_json::from_slice(&out.stdout).ok();
    let code = out.status.code();
    let (failed, suites) = report
        .as_ref()
        .map(|r| (r.failed, r.suites.len()))
        .unwrap_or((usize::MAX, 0));
    Outcome {
        name: "end-to-end",
        ok: code == Some(0) && failed == 0 && suites == 9 && seconds < END_TO_END_SECONDS,
        detail: format!("exit {code:?}, {suites} suites, {failed} failures, {seconds:.1} s (< {END_TO_END_SECONDS} s)"),
    }
}

fn main() {
    let checks: [fn() -> Outcome; 10] = [
        order_equiv,
        sup_inf,
        cone_lemmas,
        hat_lemmas,
        block_bounds,
        peirce_cstar,
        quotient_positivity,
        boundary_cone,
        offdiagonal_witness,
        end_to_end,
    ];
    let mut failed = 0;
    for check in checks {
        let o = check();
        println!("{} {}: {}", if o.ok { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += usize::from(!o.ok);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
