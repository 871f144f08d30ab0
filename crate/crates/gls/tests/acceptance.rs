//! Acceptance suite: one test per criterion, each printing a pass line
//! (run with `cargo test -p gls --test acceptance -- --nocapture` to see
//! them). Tolerances are pinned in the asserts.

use gls::rng::stream_seed;
use gls::{
    anti_norm, bphi_norm, bphi_norm_sum, empirical_tail, fit_envelope, geometric_grid, gls_norm,
    lp_norm, lp_norm_quadrature, natural_function, run_suite, suite_csv, theta_closed,
    theta_numeric, young_fenchel, EnvelopeFamily, EnvelopeFitConfig, GeneratingFunction,
    Normalization, PhiFunction, RandomVariableModel, SuiteConfig, SumModel, Verdict,
};
use std::time::Instant;

mod verify {
    pub use gls::mc_verify::*;
}

fn pass(n: u32, what: &str) {
    println!("acceptance {n:2} [{what}]: PASS");
}

#[test]
fn acceptance_01_theta_closed_form_vs_grid_oracle() {
    let start = Instant::now();
    let z_grid = gls::gls_calculus::default_z_grid();
    let mut worst = 0.0f64;
    for i in 0..19 {
        for j in 0..19 {
            let p = 1.0 + 0.5 * i as f64;
            let q = 1.0 + 0.5 * j as f64;
            let diff = (theta_numeric(p, q, &z_grid) - theta_closed(p, q)).abs();
            worst = worst.max(diff);
            assert!(diff < 1e-8, "p={p} q={q}: |diff|={diff:e}");
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "361-pair grid took {elapsed:?}, budget 5 s"
    );
    pass(1, &format!("theta oracle, 361 pairs, worst diff {worst:.2e}, {elapsed:?}"));
}

#[test]
fn acceptance_02_example_a_closed_form_and_asymptotics() {
    let a = RandomVariableModel::example_a();
    for p in [1.0, 2.0, 3.0, 5.0, 10.0, 20.0] {
        let closed = lp_norm(&a, p).unwrap();
        let quad = lp_norm_quadrature(&a, p).unwrap();
        let rel = (quad - closed).abs() / closed;
        assert!(rel < 1e-6, "p={p}: relative error {rel:e}");
    }
    let p = 50.0;
    let ratio = lp_norm(&a, p).unwrap() / (p / std::f64::consts::E).sqrt();
    assert!(
        (0.9..=1.1).contains(&ratio),
        "psi_X(50)/sqrt(50/e) = {ratio}"
    );
    pass(2, &format!("ExampleA quadrature vs closed form; asymptotic ratio {ratio:.4}"));
}

#[test]
fn acceptance_03_naor_oleszkiewicz_exact() {
    let r = RandomVariableModel::rademacher();
    // Two iid Rademachers: equality at q = 2, margin 2^{3/4} - 2^{1/4} at q = 4.
    let rep2 = verify::verify_naor_pair(&r, &r, 2.0, 1, 0).unwrap();
    assert_eq!(rep2.sigma, 0.0);
    assert!(rep2.margin.abs() < 1e-12, "q=2 margin {}", rep2.margin);
    let rep4 = verify::verify_naor_pair(&r, &r, 4.0, 1, 0).unwrap();
    let expect = 2.0f64.powf(0.75) - 2.0f64.powf(0.25);
    assert!(
        (rep4.margin - expect).abs() < 1e-12,
        "q=4 margin {} vs {expect}",
        rep4.margin
    );
    // n = 4 enumeration: equality at q = 2 (variance identity), strictly
    // positive margins at q = 3 and 4.
    for q in [2.0, 3.0, 4.0] {
        let reps = verify::verify_naor_n(&r, 4, q, 1, 0).unwrap();
        assert_eq!(reps[0].sigma, 0.0);
        assert!(
            reps[0].margin >= -1e-12,
            "n=4 q={q}: margin {}",
            reps[0].margin
        );
        if q > 2.0 {
            assert!(reps[0].margin > 0.0, "n=4 q={q}: expected strict margin");
        }
        assert_eq!(reps[0].verdict, Verdict::Holds);
    }
    pass(3, "Naor-Oleszkiewicz enumeration (pair and n=4)");
}

#[test]
fn acceptance_04_theorem21_empirical_anti_norm() {
    let start = Instant::now();
    let a = RandomVariableModel::example_a();
    let p_range = (2.0, 16.0);
    let grid = geometric_grid(p_range.0, p_range.1, 24);
    let psi = GeneratingFunction::natural(natural_function(&a, &grid).unwrap()).unwrap();
    for (i, n) in [2u32, 4, 8].into_iter().enumerate() {
        let rep = verify::verify_theorem21(
            &a,
            &psi,
            n,
            2.0,
            1_000_000,
            stream_seed(41, i as u64),
            p_range,
        )
        .unwrap();
        // V(X_i) = 1 under the natural psi, so the bound is 2^{-1/2} sqrt(n).
        let bound = 2.0f64.powf(-0.5) * (n as f64).sqrt();
        assert!(
            (rep.rhs - bound).abs() < 1e-9,
            "n={n}: rhs {} vs closed bound {bound}",
            rep.rhs
        );
        assert!(
            rep.lhs >= bound - 3.0 * rep.sigma,
            "n={n}: lhs {} < {bound} - 3*{}",
            rep.lhs,
            rep.sigma
        );
        assert_ne!(rep.verdict, Verdict::Violated, "n={n}: {rep:?}");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "Theorem 2.1 sweep took {elapsed:?}, budget 2 min"
    );
    pass(4, &format!("Theorem 2.1 lower bound, n in {{2,4,8}}, 1e6 draws, {elapsed:?}"));
}

#[test]
fn acceptance_05_remark_21_unit_norms() {
    let a = RandomVariableModel::example_a();
    let prof = natural_function(&a, &geometric_grid(1.0, 64.0, 128)).unwrap();
    let psi = GeneratingFunction::natural(prof.clone()).unwrap();
    let sup = gls_norm(&prof, &psi).unwrap();
    let inf = anti_norm(&prof, &psi, (2.0, 64.0)).unwrap().value;
    assert!((sup - 1.0).abs() < 1e-6, "gls norm {sup}");
    assert!((inf - 1.0).abs() < 1e-6, "anti norm {inf}");
    pass(5, &format!("natural psi gives unit norms (sup {sup:.9}, inf {inf:.9})"));
}

#[test]
fn acceptance_06_young_fenchel_values() {
    let phi2 = PhiFunction::quadratic();
    for u in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let v = young_fenchel(&phi2, u).unwrap();
        assert!((v - 0.5 * u * u).abs() < 1e-8, "u={u}: {v}");
    }
    let clamped = PhiFunction::quadratic_clamped(1.0).unwrap();
    let got = young_fenchel(&clamped, 2.0).unwrap();
    assert!((got - 1.5).abs() < 1e-8, "clamped value {got}");
    // Grid-search oracle over the clamped domain.
    let oracle = (0..=200_000)
        .map(|i| {
            let l = i as f64 / 200_000.0;
            2.0 * l - 0.5 * l * l
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((got - oracle).abs() < 1e-8, "{got} vs oracle {oracle}");
    pass(6, "Young-Fenchel transform of phi_2 (free and clamped)");
}

#[test]
fn acceptance_07_chernoff_dominates_gaussian_tail() {
    let g = RandomVariableModel::gaussian(1.0).unwrap();
    let single = SumModel::new(g, 1, Normalization::None).unwrap();
    let emp = empirical_tail(&single, &[1.0, 2.0, 3.0], 10_000_000, 424242).unwrap();
    for (i, &u) in emp.u_grid.iter().enumerate() {
        let bound = (-0.5 * u * u).exp();
        let upper_ci = emp.wilson_center[i] + emp.wilson_half[i];
        assert!(
            bound >= upper_ci,
            "u={u}: bound {bound} < Wilson upper {upper_ci}"
        );
    }
    pass(7, "Chernoff bound vs 1e7-draw Gaussian tail at u in {1,2,3}");
}

#[test]
fn acceptance_08_envelopes_bracket_empirical_tails() {
    let start = Instant::now();
    let u_grid: Vec<f64> = (0..7).map(|i| 1.0 + 0.25 * i as f64).collect(); // 1.0 ..= 2.5
    let cases: [(RandomVariableModel, EnvelopeFamily, f64); 3] = [
        (
            RandomVariableModel::example_a(),
            EnvelopeFamily::Subgaussian,
            2.0,
        ),
        (
            RandomVariableModel::weibull_sym(1.0, 1.0).unwrap(),
            EnvelopeFamily::Weibull { m: 1.0 },
            1.0,
        ),
        (
            RandomVariableModel::weibull_sym(4.0, 1.0).unwrap(),
            EnvelopeFamily::Weibull { m: 4.0 },
            2.0,
        ),
    ];
    for (k, (base, family, want_e)) in cases.into_iter().enumerate() {
        let label = base.label().to_string();
        let sum = SumModel::new(base, 16, Normalization::InvSqrtN).unwrap();
        let cfg = EnvelopeFitConfig {
            count: 1_000_000,
            seed: stream_seed(88, k as u64),
            ..Default::default()
        };
        let env = fit_envelope(&sum, family, &u_grid, &cfg).unwrap();
        env.validate().unwrap();
        assert_eq!(env.exponent(), want_e, "{label}: exponent");
        let emp = empirical_tail(&sum, &u_grid, 10_000_000, stream_seed(89, k as u64)).unwrap();
        for (i, &u) in u_grid.iter().enumerate() {
            assert!(
                env.lower[i] <= emp.p_hat[i] && emp.p_hat[i] <= env.upper[i],
                "{label} u={u}: {} not in [{}, {}]",
                emp.p_hat[i],
                env.lower[i],
                env.upper[i]
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "envelope sweep took {elapsed:?}, budget 5 min"
    );
    pass(8, &format!("three envelopes bracket 1e7-draw tails on [1, 2.5], {elapsed:?}"));
}

#[test]
fn acceptance_09_subgaussian_sum_stability() {
    let base = RandomVariableModel::gaussian(1.0).unwrap();
    let phi = PhiFunction::quadratic();
    let grid = gls::moment_engine::default_lambda_grid(f64::INFINITY);
    let single = bphi_norm(&base, &phi, &grid).unwrap().value;
    for n in [1u32, 4, 16] {
        let sum = SumModel::new(base.clone(), n, Normalization::InvSqrtN).unwrap();
        let v = bphi_norm_sum(&sum, &phi, &grid).unwrap().value;
        assert!(
            (v - single).abs() < 1e-6,
            "n={n}: {v} vs single {single}"
        );
    }
    pass(9, &format!("normalized Gaussian sums keep B(phi_2) norm {single:.8}"));
}

#[test]
fn acceptance_10_suite_determinism_across_workers() {
    let cfg = SuiteConfig {
        count: 50_000,
        seed: 0x474C53,
    };
    let baseline = suite_csv(&run_suite(&cfg).unwrap());
    let again = suite_csv(&run_suite(&cfg).unwrap());
    assert_eq!(baseline, again, "two runs differ");
    for workers in [1usize, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        let csv = pool.install(|| suite_csv(&run_suite(&cfg).unwrap()));
        assert_eq!(baseline, csv, "workers={workers} differs");
    }
    assert_eq!(
        verify::count_nonexempt_violations(&run_suite(&cfg).unwrap()),
        0
    );
    pass(10, "verify suite byte-identical across runs and worker counts {1,4}");
}
