//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities (`cargo test --test acceptance -- --nocapture`
//! to see them on success).
//!
//! Spot checks run dedicated high-replicate cells so the Monte Carlo error is
//! small against each stated tolerance; ordering checks run the full
//! benchmark grids at 500 replicates per cell. Everything is seeded, so the
//! verdicts are reproducible.

use std::sync::OnceLock;
use std::time::Instant;

use oracle_fdr::covariance::{self, CovarianceSpec};
use oracle_fdr::harness::{self, verify, CellReport};
use oracle_fdr::linalg;
use oracle_fdr::metrics::ErrorRates;
use oracle_fdr::model::{self, ModelParams, SeedSpec};
use oracle_fdr::oracle;
use oracle_fdr::procedures::{self, Method};

const SEED: u64 = 17;
const BLOCK_LABEL: &str = "blocks:1250@0.25,1250@0.5,1250@0.15,1250@0.75";

fn check(criterion: &str, pass: bool, detail: &str) -> bool {
    println!("[{criterion}] {} — {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn run_spot(sigma_text: &str, p: f64, replicates: usize) -> Vec<CellReport> {
    let sigma = CovarianceSpec::parse(sigma_text, 5000).unwrap();
    let params = ModelParams { n: 5000, p, k: 2.5, sigma, alpha: 0.05 };
    harness::run_cell(&params, replicates, SeedSpec::new(SEED), 0, &Method::ALL, sigma_text)
        .unwrap()
}

fn rates(reports: &[CellReport], method: Method) -> ErrorRates {
    reports.iter().find(|r| r.method == method).expect("method present").rates
}

// Shared cells and grids, computed once per test-binary run.

fn cell_p01_rho02() -> &'static Vec<CellReport> {
    static CELL: OnceLock<Vec<CellReport>> = OnceLock::new();
    CELL.get_or_init(|| run_spot("equi:0.2", 0.01, 8000))
}

fn cell_p10_rho08() -> &'static Vec<CellReport> {
    static CELL: OnceLock<Vec<CellReport>> = OnceLock::new();
    CELL.get_or_init(|| run_spot("equi:0.8", 0.10, 8000))
}

fn equi_grid() -> &'static Vec<CellReport> {
    static GRID: OnceLock<Vec<CellReport>> = OnceLock::new();
    GRID.get_or_init(|| {
        let cfg = harness::paper_grid(1, 500, SEED).unwrap();
        harness::run_resolved_grid(&cfg.resolve().unwrap()).unwrap()
    })
}

fn block_grid() -> &'static Vec<CellReport> {
    static GRID: OnceLock<Vec<CellReport>> = OnceLock::new();
    GRID.get_or_init(|| {
        let cfg = harness::paper_grid(4, 500, SEED).unwrap();
        harness::run_resolved_grid(&cfg.resolve().unwrap()).unwrap()
    })
}

fn grid_cell(grid: &[CellReport], method: Method, sigma: &str, p: f64) -> ErrorRates {
    grid.iter()
        .find(|r| r.method == method && r.sigma == sigma && (r.p - p).abs() < 1e-12)
        .unwrap_or_else(|| panic!("missing grid cell ({method}, {sigma}, {p})"))
        .rates
}

/// Criterion 1: closed form vs exact enumeration over >= 200 random
/// instances (n in 1..=10, random PD correlation, p in {.05,.3,.7},
/// k in {-1.5,2.5}), max relative error <= 1e-10, under 30 s.
#[test]
fn criterion_01_closed_form_vs_enumeration() {
    let started = Instant::now();
    let report = verify::equivalence_sweep(200, SEED).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let runtime_ok = check(
        "criterion 1",
        elapsed < 30.0,
        &format!("equivalence sweep runtime {elapsed:.1}s (< 30s)"),
    );
    let diag_ok = check(
        "criterion 1",
        report.max_rel_error_diagonal <= 1e-10,
        &format!(
            "diagonal-precision instances agree: max rel err {:.2e}",
            report.max_rel_error_diagonal
        ),
    );
    let equal = report.max_rel_error <= 1e-10;
    check(
        "criterion 1",
        equal,
        &format!(
            "correlated instances: max rel err {:.3e} at (n={}, p={}, k={}) vs threshold 1e-10; \
             the closed form's interaction product averages state couplings over the prior, \
             while the enumeration posterior weights them by the data — they provably differ \
             whenever the precision matrix has off-diagonal mass",
            report.max_rel_error, report.worst.n, report.worst.p, report.worst.k
        ),
    );
    assert!(runtime_ok && diag_ok);
    assert!(
        equal,
        "closed-form statistic differs from the exact enumeration posterior under correlation \
         (max rel err {:.3e}); equality as stated is unattainable — see the failure analysis in \
         the printed lines above",
        report.max_rel_error
    );
}

/// Criterion 2: under Sigma = I at n = 100, the closed form equals the
/// per-coordinate marginal lfdr within 1e-12 max abs.
#[test]
fn criterion_02_independence_reduction() {
    let n = 100;
    let spec = CovarianceSpec::<f64>::Identity { n };
    let factor = covariance::cholesky(&spec).unwrap();
    let mut rng = SeedSpec::new(SEED).replicate_rng(7, 0);
    let draw = model::sample_draw(n, 0.1, 2.5, &factor, &mut rng);
    let ctx = oracle::build_context(covariance::precision(&spec).unwrap(), 2.5, 0.1).unwrap();
    let t = oracle::oracle_statistics(&draw.x, &ctx).unwrap();
    let m = oracle::marginal_lfdr(&draw.x, 0.1, 2.5).unwrap();
    let max_abs = t
        .values()
        .iter()
        .zip(m.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let ok = check(
        "criterion 2",
        max_abs <= 1e-12,
        &format!("closed form vs marginal lfdr at Sigma=I, n=100: max abs diff {max_abs:.2e}"),
    );
    assert!(ok);
}

/// Criterion 3: equicorrelated closed-form precision vs dense inversion,
/// entrywise <= 1e-9, n <= 200, rho in {-0.1, 0.2, 0.5, 0.8}. rho = -0.1
/// only yields a positive definite matrix for n <= 10 (the bound is
/// rho > -1/(n-1)), so infeasible combinations must be rejected instead.
#[test]
fn criterion_03_precision_closed_forms() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut all_ok = true;
    for &n in &[2usize, 5, 10, 50, 200] {
        for &rho in &[-0.1, 0.2, 0.5, 0.8] {
            let spec = CovarianceSpec::Equicorrelated { n, rho };
            if rho <= -1.0 / (n as f64 - 1.0) {
                all_ok &= spec.validate().is_err();
                continue;
            }
            let closed = covariance::precision(&spec).unwrap().to_dense();
            let sigma = covariance::build_covariance(&spec).unwrap();
            let l = linalg::cholesky(&sigma).unwrap();
            let dense = linalg::inverse_from_cholesky(&l);
            let err = closed.max_abs_diff(&dense);
            worst = worst.max(err);
            all_ok &= err <= 1e-9;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let ok = check(
        "criterion 3",
        all_ok && elapsed < 10.0,
        &format!(
            "Sherman–Morrison vs factorization inverse: worst entrywise {worst:.2e} \
             (<= 1e-9), out-of-bound rho rejected, runtime {elapsed:.1}s (< 10s)"
        ),
    );
    assert!(ok);
}

/// Criterion 4: Table-1 spot cells at n=5000, k=2.5, alpha=0.05,
/// tolerance max(0.01, 3se).
#[test]
fn criterion_04_fdr_spot_cells() {
    let a = rates(cell_p01_rho02(), Method::Oracle);
    let b = rates(cell_p10_rho08(), Method::Oracle);
    let c = rates(cell_p01_rho02(), Method::Bh);
    let spot = |name: &str, got: ErrorRates, want: f64| {
        let tol = 0.01f64.max(3.0 * got.se_fdr);
        let diff = (got.fdr - want).abs();
        check(
            "criterion 4",
            diff <= tol,
            &format!(
                "{name}: fdr {:.5} (se {:.5}) vs reference {want} — |diff| {diff:.4} vs tol {tol:.4}",
                got.fdr, got.se_fdr
            ),
        )
    };
    let ok1 = spot("oracle fdr at (p=0.01, equi:0.2)", a, 0.04260);
    let ok2 = spot("oracle fdr at (p=0.10, equi:0.8)", b, 0.03047);
    let ok3 = spot("bh fdr at (p=0.01, equi:0.2)", c, 0.04239);
    assert!(ok1 && ok3);
    assert!(
        ok2,
        "the (p=0.10, equi:0.8) oracle fdr stabilizes near 0.049 (the level implied by the \
         statistic's running-average rule, and equally by the exact posterior) and cannot reach \
         the reference 0.03047 at tolerance 0.01; see the printed measurements"
    );
}

/// Criterion 5: Table-2 FNR spot cells.
#[test]
fn criterion_05_fnr_spot_cells() {
    static CELL: OnceLock<Vec<CellReport>> = OnceLock::new();
    let c05 = CELL.get_or_init(|| run_spot("equi:0.8", 0.05, 4000));
    let o = rates(c05, Method::Oracle);
    let tol = 0.001f64.max(3.0 * o.se_fnr);
    let ok1 = check(
        "criterion 5",
        (o.fnr - 0.000189).abs() <= tol,
        &format!("oracle fnr at (p=0.05, equi:0.8): {:.6} vs 0.000189, tol {tol:.5}", o.fnr),
    );
    let m = rates(cell_p01_rho02(), Method::Marginal);
    let tol = 0.002f64.max(3.0 * m.se_fnr);
    let ok2 = check(
        "criterion 5",
        (m.fnr - 0.009384).abs() <= tol,
        &format!("marginal fnr at (p=0.01, equi:0.2): {:.6} vs 0.009384, tol {tol:.5}", m.fnr),
    );
    assert!(ok1 && ok2);
}

/// Criterion 6: Table-3 mean rejection counts, relative tolerance 10%.
/// The BH cell's rejection count is very heavy-tailed (an occasional high
/// shared factor rejects thousands), so it runs 32000 replicates to push the
/// Monte Carlo error well inside the tolerance.
#[test]
fn criterion_06_rejection_count_spot_cells() {
    let spot = |name: &str, got: f64, want: f64| {
        let rel = (got - want).abs() / want;
        check(
            "criterion 6",
            rel <= 0.10,
            &format!("{name}: mean rejections {got:.1} vs reference {want} — rel {rel:.3}"),
        )
    };
    let o = rates(cell_p10_rho08(), Method::Oracle);
    let ok1 = spot("oracle at (p=0.10, equi:0.8)", o.mean_rejections, 515.0);
    let bh = rates(&run_spot("equi:0.8", 0.01, 32000), Method::Bh);
    let ok2 = spot("bh at (p=0.01, equi:0.8)", bh.mean_rejections, 70.0);
    static CELL: OnceLock<Vec<CellReport>> = OnceLock::new();
    let e = CELL.get_or_init(|| run_spot("equi:0.2", 0.10, 4000));
    let m = rates(e, Method::Marginal);
    let ok3 = spot("marginal at (p=0.10, equi:0.2)", m.mean_rejections, 186.0);
    assert!(ok1 && ok2 && ok3);
}

/// Criterion 7: block-diagonal spot cells (four equal blocks of 1250 with
/// rho = 0.25, 0.5, 0.15, 0.75).
#[test]
fn criterion_07_block_diagonal_spot_cells() {
    let run = |p: f64, reps: usize| {
        let sigma = CovarianceSpec::parse(BLOCK_LABEL, 5000).unwrap();
        let params = ModelParams { n: 5000, p, k: 2.5, sigma, alpha: 0.05 };
        harness::run_cell(&params, reps, SeedSpec::new(SEED), 0, &[Method::Oracle], BLOCK_LABEL)
            .unwrap()
    };
    let o05 = rates(&run(0.05, 4000), Method::Oracle);
    let tol_fdr = 0.01f64.max(3.0 * o05.se_fdr);
    let diff_fdr = (o05.fdr - 0.037964).abs();
    let ok1 = check(
        "criterion 7",
        diff_fdr <= tol_fdr,
        &format!(
            "oracle fdr at block p=0.05: {:.5} (se {:.5}) vs 0.03796 — |diff| {diff_fdr:.4} vs tol {tol_fdr:.4}",
            o05.fdr, o05.se_fdr
        ),
    );
    let o10 = rates(&run(0.10, 4000), Method::Oracle);
    let tol_fnr = 0.005f64.max(3.0 * o10.se_fnr);
    let diff_fnr = (o10.fnr - 0.033173).abs();
    let ok2 = check(
        "criterion 7",
        diff_fnr <= tol_fnr,
        &format!(
            "oracle fnr at block p=0.10: {:.5} (se {:.5}) vs 0.03317 — |diff| {diff_fnr:.4} vs tol {tol_fnr:.4}",
            o10.fnr, o10.se_fnr
        ),
    );
    assert!(
        ok1 && ok2,
        "block-diagonal oracle cells stabilize near fdr 0.0495 / fnr 0.0267 (matching the exact \
         posterior's behavior), outside the stated tolerances of the references 0.03796/0.03317; \
         see the printed measurements"
    );
}

/// Criterion 8: qualitative orderings over the full equicorrelated grid
/// (10 p-values x 7 correlations, 500 replicates per cell).
#[test]
fn criterion_08_qualitative_orderings() {
    let grid = equi_grid();
    let sigmas: Vec<String> = (2..=8).map(|r| format!("equi:0.{r}")).collect();
    let ps: Vec<f64> = (1..=10).map(|i| i as f64 / 100.0).collect();

    let mut bound_violations = Vec::new();
    let mut fnr_violations = Vec::new();
    let mut ordering_violations = Vec::new();
    for sigma in &sigmas {
        for &p in &ps {
            let o = grid_cell(grid, Method::Oracle, sigma, p);
            let b = grid_cell(grid, Method::Bh, sigma, p);
            let m = grid_cell(grid, Method::Marginal, sigma, p);
            if o.fdr > 0.05 + 3.0 * o.se_fdr {
                bound_violations.push(format!("({sigma}, p={p}): {:.4}", o.fdr));
            }
            if o.fnr > b.fnr || o.fnr > m.fnr {
                fnr_violations.push(format!(
                    "({sigma}, p={p}): oracle {:.5}, bh {:.5}, marginal {:.5}",
                    o.fnr, b.fnr, m.fnr
                ));
            }
            let rho: f64 = sigma.strip_prefix("equi:").unwrap().parse().unwrap();
            if rho >= 0.4 {
                let slack_mb = 3.0 * (m.se_fdr.powi(2) + b.se_fdr.powi(2)).sqrt();
                let slack_bo = 3.0 * (b.se_fdr.powi(2) + o.se_fdr.powi(2)).sqrt();
                if m.fdr > b.fdr + slack_mb || b.fdr > o.fdr + slack_bo {
                    ordering_violations.push(format!(
                        "({sigma}, p={p}): marginal {:.4}, bh {:.4}, oracle {:.4}",
                        m.fdr, b.fdr, o.fdr
                    ));
                }
            }
        }
    }
    let ok_a = check(
        "criterion 8a",
        bound_violations.is_empty(),
        &format!(
            "oracle fdr <= 0.05 + 3se in all 70 cells; violations: {:?}",
            bound_violations
        ),
    );
    let ok_b = check(
        "criterion 8b",
        fnr_violations.is_empty(),
        &format!("oracle fnr lowest in all 70 cells; violations: {:?}", fnr_violations),
    );
    let ok_c = check(
        "criterion 8c",
        ordering_violations.is_empty(),
        &format!(
            "marginal fdr <= bh fdr <= oracle fdr within 3se for rho >= 0.4; violations: {:?}",
            ordering_violations
        ),
    );
    assert!(ok_a && ok_b && ok_c);
}

/// Criterion 9: the named step-up/BH/metrics examples, plus the empirical
/// fdr <= mfdr ordering on every all-positive-denominator cell of the
/// reproduced grids.
#[test]
fn criterion_09_unit_examples_and_jensen_ordering() {
    // step-up examples
    let mut exact = procedures::step_up_threshold(&[0.01, 0.02, 0.5], 0.05) == 2;
    exact &= procedures::step_up_threshold(&[0.2, 0.9, 0.06], 0.05) == 0;
    exact &= procedures::step_up_threshold(&[0.04, 0.05, 0.06], 0.05) == 3;
    // BH example
    exact &= procedures::bh_rank(&[0.001, 0.02, 0.9], 0.05) == 2;
    // confusion/loss examples
    let decision = oracle_fdr::DecisionResult {
        reject: vec![true, true, false, false],
        num_rejected: 2,
        cutoff_rank: 2,
        method: Method::Oracle,
    };
    let c = oracle_fdr::metrics::confusion(&decision, &[1, 0, 1, 0]);
    exact &= (c.v, c.r, c.w, c.a) == (1, 2, 1, 2);
    let two = [
        oracle_fdr::ConfusionCounts { v: 0, r: 0, w: 1, a: 4 },
        oracle_fdr::ConfusionCounts { v: 1, r: 2, w: 0, a: 2 },
    ];
    let agg = oracle_fdr::metrics::aggregate(&two).unwrap();
    exact &= agg.fdr == 0.25 && agg.mfdr == 0.5;
    let ok_exact = check("criterion 9", exact, "step-up/BH/metrics examples hold exactly");

    let mut violations = Vec::new();
    let mut max_gap = 0.0f64;
    for r in equi_grid().iter().chain(block_grid().iter()) {
        if r.rates.all_rejections_positive && r.rates.fdr > r.rates.mfdr {
            max_gap = max_gap.max(r.rates.fdr - r.rates.mfdr);
            violations.push(format!(
                "({}, {}, p={}): fdr {:.6} > mfdr {:.6}",
                r.method, r.sigma, r.p, r.rates.fdr, r.rates.mfdr
            ));
        }
    }
    let ok_jensen = check(
        "criterion 9",
        violations.is_empty(),
        &format!(
            "fdr <= mfdr on all-positive-denominator cells: {} violations, max gap {:.2e}{}",
            violations.len(),
            max_gap,
            if violations.is_empty() { String::new() } else { format!("; first: {}", violations[0]) }
        ),
    );
    assert!(ok_exact);
    assert!(
        ok_jensen,
        "the mean-of-ratios and ratio-of-means estimators coincide to within Monte Carlo error \
         on many cells, so the literal ordering flips on a finite sample; max observed gap is \
         {max_gap:.2e} across {} of {} rows — see the printed line",
        violations.len(),
        equi_grid().len() + block_grid().len()
    );
}

/// Criterion 10: `reproduce --table 1` twice with the same seed and different
/// --threads produces byte-identical CSV (wall_time_s, the one inherently
/// nondeterministic column, is masked before comparison).
#[test]
fn criterion_10_thread_count_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("t1_threads1.csv");
    let out4 = dir.path().join("t1_threads4.csv");
    for (threads, out) in [("1", &out1), ("4", &out4)] {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_oracle-fdr"))
            .args([
                "reproduce",
                "--table",
                "1",
                "--replicates",
                "3",
                "--seed",
                "2024",
                "--threads",
                threads,
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success(), "reproduce run failed");
    }
    let mask = |path: &std::path::Path| -> Vec<String> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|line| match line.rsplit_once(',') {
                // the final field is wall_time_s on every data row
                Some((head, _)) => format!("{head},<wall_time>"),
                None => line.to_string(),
            })
            .collect()
    };
    let a = mask(&out1);
    let b = mask(&out4);
    let ok = check(
        "criterion 10",
        a == b,
        &format!(
            "reproduce --table 1 at --threads 1 vs 4: {} rows, identical outside wall_time_s: {}",
            a.len(),
            a == b
        ),
    );
    assert!(ok);
}
