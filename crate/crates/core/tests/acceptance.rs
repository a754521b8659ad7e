//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p liouville-core --test acceptance -- --nocapture --test-threads=1`
//! to see them in order.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use liouville_core::energy::{
    construct_e_point, degree_from_chi, in_e, lambda_j, mask_members, project_to_pohozaev,
    EPoint, ENTIRE,
};
use liouville_core::matrix::{check_h1, check_h2, check_lemma21, CoefficientMatrix};
use liouville_core::mean_field::{
    continuation, solve_mean_field, MeanFieldProblem, SolveOptions, TorusField, TorusGrid,
    WeightSpec,
};
use liouville_core::par::{self, Execution};
use liouville_core::radial::{integrate_radial, RadialOptions, TotalMass};
use liouville_core::sampling::{random_h1h2, rng, uniform_vec};
use rand::Rng;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] AC{id:<2} {name}: {detail}");
}

fn involution() -> CoefficientMatrix {
    CoefficientMatrix::symmetric(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
}

#[test]
fn ac01_closed_form_oracle() {
    let a = CoefficientMatrix::symmetric(&[vec![1.0]]).unwrap();
    let start = Instant::now();
    let sol = integrate_radial(&a, &[0.0], &RadialOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let sup = sol
        .r_grid
        .iter()
        .zip(&sol.u[0])
        .filter(|(r, _)| **r <= 1e3)
        .map(|(r, u)| (u + 2.0 * (1.0 + r * r / 8.0).ln()).abs())
        .fold(0.0, f64::max);
    let sigma = sol.sigma_infinity.masses().unwrap().sigma()[0];
    let ok = sup <= 1e-7 && (sigma - 4.0).abs() <= 1e-4 && elapsed < Duration::from_secs(1);
    report(
        1,
        "closed-form radial oracle",
        ok,
        format!("sup error {sup:.3e}, sigma {sigma:.10}, {elapsed:?}"),
    );
    assert!(ok);
}

#[test]
fn ac02_pohozaev_suite() {
    let start = Instant::now();
    let cases: Vec<(usize, u64)> = (0..25).map(|k| (2 + k % 2, 1000 + k as u64)).collect();
    let opts = RadialOptions::default();
    let results = par::map(Execution::Parallel, &cases, |&(n, seed)| {
        let mut r = rng(seed);
        let a = random_h1h2(&mut r, n, 3.0);
        let mut found = Vec::new();
        let mut attempts = 0;
        while found.len() < 4 && attempts < 40 {
            attempts += 1;
            let mut alpha = uniform_vec(&mut r, n, -1.0, 1.0);
            alpha[n - 1] = 0.0;
            let sol = integrate_radial(&a, &alpha, &opts).unwrap();
            if let TotalMass::Converged { masses } = &sol.sigma_infinity {
                let rel = masses.pohozaev_defect(&a).abs() / (ENTIRE * masses.total());
                found.push((alpha, rel, masses.m_min()));
            }
        }
        (a, found)
    });
    let elapsed = start.elapsed();
    let mut worst_rel: f64 = 0.0;
    let mut worst_m = f64::INFINITY;
    let mut short = 0;
    for (_, found) in &results {
        if found.len() < 4 {
            short += 1;
        }
        for (_, rel, m) in found {
            worst_rel = worst_rel.max(*rel);
            worst_m = worst_m.min(*m);
        }
    }
    let ok = short == 0 && worst_rel <= 1e-3 && worst_m > 2.0 && elapsed < Duration::from_secs(120);
    report(
        2,
        "Pohozaev suite (25 matrices x 4 heights)",
        ok,
        format!(
            "max |Lambda_I|/(4 sum sigma) {worst_rel:.3e}, min m {worst_m:.4}, matrices short of 4 converged: {short}, {elapsed:?}"
        ),
    );
    assert!(ok);
}

fn proper_subsets_positive(a: &CoefficientMatrix, sigma: &[f64]) -> Option<f64> {
    let n = a.n();
    let mut min = f64::INFINITY;
    for mask in 1..((1u64 << n) - 1) {
        let l = lambda_j(a, sigma, &mask_members(mask, n), ENTIRE).unwrap();
        min = min.min(l);
    }
    (min > 0.0).then_some(min)
}

#[test]
fn ac03_subset_positivity_on_hypersurface() {
    let seeds: Vec<u64> = (0..1000).collect();
    let exceptions = par::map(Execution::Parallel, &seeds, |&s| {
        let mut r = rng(30_000 + s);
        let n = r.gen_range(2..=4);
        let a = random_h1h2(&mut r, n, 3.0);
        let s0 = uniform_vec(&mut r, n, 0.05, 1.0);
        let sigma = project_to_pohozaev(&a, &s0).unwrap();
        usize::from(proper_subsets_positive(&a, &sigma).is_none())
    })
    .into_iter()
    .sum::<usize>();
    let ok = exceptions == 0;
    report(
        3,
        "proper-subset positivity on Lambda_I = 0",
        ok,
        format!("1000 matrices, {exceptions} exceptions"),
    );
    assert!(ok);
}

fn two_by_two_condition(a: f64, b: f64, c: f64) -> bool {
    a >= 0.0 && b >= 0.0 && c >= 0.0 && a.max(b) <= c && c * c != a * b
}

#[test]
fn ac04_entrywise_consequences() {
    let seeds: Vec<u64> = (0..1000).collect();
    let exceptions = par::map(Execution::Parallel, &seeds, |&s| {
        let mut r = rng(40_000 + s);
        let n = r.gen_range(2..=4);
        let a = random_h1h2(&mut r, n, 3.0);
        usize::from(check_lemma21(&a).unwrap().lemma21_pass != Some(true))
    })
    .into_iter()
    .sum::<usize>();

    let steps = 50;
    let pts: Vec<f64> = (0..steps).map(|k| 2.0 * k as f64 / (steps - 1) as f64).collect();
    let mut triples = Vec::with_capacity(steps * steps * steps);
    for &a in &pts {
        for &b in &pts {
            for &c in &pts {
                triples.push((a, b, c));
            }
        }
    }
    let disagreements: Vec<(f64, f64, f64)> = par::map(Execution::Parallel, &triples, |&(a, b, c)| {
        let m = CoefficientMatrix::symmetric(&[vec![a, c], vec![c, b]]).unwrap();
        let tol = m.default_zero_tol();
        let checker = check_h1(&m, tol).h1_pass == Some(true)
            && check_h2(&m, tol).map(|r| r.h2_pass == Some(true)).unwrap_or(false);
        (checker != two_by_two_condition(a, b, c)).then_some((a, b, c))
    })
    .into_iter()
    .flatten()
    .collect();

    let ok = exceptions == 0 && disagreements.is_empty();
    report(
        4,
        "entrywise consequences + 2x2 closed-form condition",
        ok,
        format!(
            "1000 matrices, {exceptions} exceptions; 50^3 grid, {} disagreements{}",
            disagreements.len(),
            disagreements
                .first()
                .map(|d| format!(" (first {d:?})"))
                .unwrap_or_default()
        ),
    );
    assert!(ok);
}

#[test]
fn ac05_degree_table() {
    let mut ok = (0..=12).all(|n| degree_from_chi(0, n).unwrap() == 1);
    ok &= degree_from_chi(2, 1).unwrap() == -1;
    ok &= (2..=12).all(|n| degree_from_chi(2, n).unwrap() == 0);
    ok &= degree_from_chi(-2, 1).unwrap() == 3;
    ok &= degree_from_chi(-2, 2).unwrap() == 6;
    report(
        5,
        "degree table",
        ok,
        "torus N<=12 -> 1; sphere -1, 0; genus 2 -> 3, 6".into(),
    );
    assert!(ok);
}

#[test]
fn ac06_e_point_consistency() {
    let a = involution();
    let sigma = match construct_e_point(&a).unwrap() {
        EPoint::Full { sigma, .. } => sigma,
        other => panic!("{other:?}"),
    };
    let sol = integrate_radial(&a, &[0.0, 0.0], &RadialOptions::default()).unwrap();
    let radial = sol.sigma_infinity.masses().unwrap().clone();
    let diff = sigma
        .sigma()
        .iter()
        .zip(radial.sigma())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let exact = sigma.sigma() == [4.0, 4.0];

    let mut tested = 0;
    let mut failures = 0;
    let mut seed = 60_000;
    while tested < 100 {
        seed += 1;
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let a = random_h1h2(&mut r, n, 3.0);
        if let EPoint::Full { sigma, .. } = construct_e_point(&a).unwrap() {
            tested += 1;
            if !in_e(&a, &sigma, 1e-10) {
                failures += 1;
            }
        }
    }
    let ok = exact && diff <= 1e-4 && failures == 0;
    report(
        6,
        "E-point consistency",
        ok,
        format!(
            "construct = {:?}, radial = {:?} (diff {diff:.2e}); {failures}/100 random E-points outside E",
            sigma.sigma(),
            radial.sigma()
        ),
    );
    assert!(ok);
}

#[test]
fn ac07_trivial_fixed_point() {
    let grid = TorusGrid::new(32).unwrap();
    let mut all_ok = true;
    let mut details = Vec::new();
    let cases: Vec<(CoefficientMatrix, Vec<f64>)> = vec![
        (CoefficientMatrix::symmetric(&[vec![1.0]]).unwrap(), vec![PI]),
        (CoefficientMatrix::symmetric(&[vec![1.0]]).unwrap(), vec![4.0 * PI]),
        (CoefficientMatrix::symmetric(&[vec![2.0]]).unwrap(), vec![3.0 * PI]),
        (involution(), vec![PI, PI]),
        (involution(), vec![2.0 * PI, 0.5 * PI]),
        (
            CoefficientMatrix::symmetric(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap(),
            vec![PI, 2.0 * PI],
        ),
    ];
    for (a, rho) in cases {
        let n = a.n();
        let point = liouville_core::classify_rho(&a, &rho, 1e-9).unwrap();
        assert_eq!(
            point.classification,
            liouville_core::Classification::InteriorO(0)
        );
        let p = MeanFieldProblem::from_specs(a, rho.clone(), &vec![WeightSpec::constant(1.0); n], grid)
            .unwrap();
        let sol = solve_mean_field(&p, &SolveOptions::default()).unwrap();
        let ok = sol.iterations == 1 && sol.residual_norm == 0.0 && sol.sup_norm() == 0.0;
        all_ok &= ok;
        details.push(format!("rho={rho:.3?}: it={} res={}", sol.iterations, sol.residual_norm));
    }
    report(7, "mean-field trivial fixed point", all_ok, details.join("; "));
    assert!(all_ok);
}

fn scalar_problem(k: usize) -> MeanFieldProblem {
    MeanFieldProblem::from_specs(
        CoefficientMatrix::symmetric(&[vec![1.0]]).unwrap(),
        vec![4.0 * PI],
        &[WeightSpec::constant(1.0).with_cos(1, 0, 0.1)],
        TorusGrid::new(k).unwrap(),
    )
    .unwrap()
}

/// Random smooth zero-mean direction built from a few low Fourier modes.
fn random_direction<R: Rng>(r: &mut R, grid: TorusGrid) -> TorusField {
    let modes: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                r.gen_range(-3..=3) as f64,
                r.gen_range(-3..=3) as f64,
                r.gen_range(-1.0..1.0),
                r.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let f = grid.sample(|x, y| {
        modes
            .iter()
            .map(|(kx, ky, amp, ph)| amp * (2.0 * PI * (kx * x + ky * y) + ph).cos())
            .sum()
    });
    let f = f.project_zero_mean();
    let s = f.max_abs().max(1e-300);
    f.map(|v| v / s).project_zero_mean()
}

#[test]
fn ac08_mean_field_convergence() {
    let opts = SolveOptions::default();
    let p64 = scalar_problem(64);
    let s64 = solve_mean_field(&p64, &opts).unwrap();
    let recheck = p64.residual_norm(&s64.u).unwrap();
    let p128 = scalar_problem(128);
    let s128 = solve_mean_field(&p128, &opts).unwrap();
    let mut grid_diff: f64 = 0.0;
    for iy in 0..64 {
        for ix in 0..64 {
            let a = s64.u[0].values()[iy * 64 + ix];
            let b = s128.u[0].values()[(2 * iy) * 128 + 2 * ix];
            grid_diff = grid_diff.max((a - b).abs());
        }
    }

    let mut r = rng(8);
    let step = 1e-5;
    let mut worst_fd: f64 = 0.0;
    for _ in 0..10 {
        let w = random_direction(&mut r, p64.grid());
        let shifted = |s: f64| vec![s64.u[0].zip_map(&w, |a, b| a + s * b).project_zero_mean()];
        let d = (p64.phi_functional(&shifted(step)).unwrap()
            - p64.phi_functional(&shifted(-step)).unwrap())
            / (2.0 * step);
        worst_fd = worst_fd.max(d.abs());
    }
    let ok = s64.converged
        && s64.residual_norm <= 1e-8
        && recheck <= 1e-8
        && s64.iterations <= 2000
        && grid_diff <= 1e-6
        && worst_fd <= 1e-5;
    report(
        8,
        "mean-field convergence (n=1, rho=4pi)",
        ok,
        format!(
            "K=64: {} iterations, residual {:.2e} (recheck {recheck:.2e}); K=128 diff {grid_diff:.2e}; max |dPhi| {worst_fd:.2e}",
            s64.iterations, s64.residual_norm
        ),
    );
    assert!(ok);
}

#[test]
fn ac09_symmetric_reduction() {
    let grid = TorusGrid::new(64).unwrap();
    let h = WeightSpec::constant(1.0).with_cos(1, 0, 0.2);
    let p = MeanFieldProblem::from_specs(involution(), vec![PI, PI], &[h.clone(), h], grid).unwrap();
    let sol = solve_mean_field(&p, &SolveOptions::default()).unwrap();
    let diff = sol.u[0].max_diff(&sol.u[1]);
    let ok = sol.converged && diff <= 1e-10;
    report(
        9,
        "symmetric reduction u_1 = u_2",
        ok,
        format!(
            "{} iterations, residual {:.2e}, max|u1-u2| {diff:.2e}, max|u1| {:.3e}",
            sol.iterations,
            sol.residual_norm,
            sol.u[0].max_abs()
        ),
    );
    assert!(ok);
}

#[test]
fn ac10_a_priori_bound_probe() {
    let p = scalar_problem(64);
    let path: Vec<Vec<f64>> = (0..13).map(|k| vec![PI + 0.5 * PI * k as f64]).collect();
    let (steps, err) = continuation(&p, &path, &SolveOptions::default());
    let bound = steps.iter().map(|s| s.sup_norm).fold(0.0, f64::max);
    for s in &steps {
        println!(
            "      rho = {:>8.5}  sup|u| = {:.6e}  residual = {:.2e}  iterations = {}",
            s.rho[0], s.sup_norm, s.residual_norm, s.iterations
        );
    }
    // A blow-up would show as accelerating growth of sup|u| along the path.
    let incs: Vec<f64> = steps.windows(2).map(|w| w[1].sup_norm - w[0].sup_norm).collect();
    let mean_inc = incs.iter().sum::<f64>() / incs.len().max(1) as f64;
    let accelerating = incs.last().is_some_and(|&l| l > 10.0 * mean_inc.abs().max(1e-12));
    let ok = err.is_none()
        && steps.len() == 13
        && steps.iter().all(|s| s.converged && s.residual_norm <= 1e-8)
        && bound.is_finite()
        && !accelerating;
    report(
        10,
        "a priori bound probe along rho in [pi, 7pi]",
        ok,
        format!("path-wide bound max|u| = {bound:.6e}, error: {err:?}"),
    );
    assert!(ok);
}
