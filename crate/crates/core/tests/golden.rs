mod common;

use common::*;
use num_complex::Complex64;
use ruinwalk::initial_values::solve_closed_form;
use ruinwalk::survival::{ultimate_survival, xi_coeffs, UltimateOptions};

fn table(model: &ruinwalk::RiskModel, u_max: usize) -> Vec<f64> {
    let (roots, init) = solve(model);
    ultimate_survival(model, &roots, &init, u_max, &UltimateOptions::default()).unwrap().phis
}

#[test]
fn example_one_closed_forms() {
    let model = example_one();
    let (roots, _) = solve(&model);
    assert_eq!(roots.roots.len(), 1);
    assert!((roots.roots[0].value - Complex64::new(1.0 - 2f64.sqrt(), 0.0)).norm() < 1e-12);
    let r2 = 2f64.sqrt();
    let want = [r2 / 4.0, 2.0 - r2, 2.0 * (r2 - 1.0), 8.0 - 5.0 * r2];
    for (u, (got, want)) in table(&model, 3).iter().zip(want).enumerate() {
        assert!((got - want).abs() < 1e-12, "phi({u}) = {got}, want {want}");
    }
}

#[test]
fn example_two_roots_and_table() {
    let model = example_two();
    assert_eq!(model.m(), 4);
    let (roots, _) = solve(&model);
    let want = [
        Complex64::new(-0.289014, 0.0),
        Complex64::new(-0.15434, -0.342115),
        Complex64::new(-0.15434, 0.342115),
    ];
    assert_eq!(roots.roots.len(), 3);
    for w in want {
        assert!(roots.roots.iter().any(|r| (r.value - w).norm() < 5e-6), "{w} missing");
    }
    let want = [0.535194, 0.697233, 0.802783, 0.871536, 0.916321];
    for (u, (got, want)) in table(&model, 4).iter().zip(want).enumerate() {
        assert!((got - want).abs() < 1e-6, "phi({u}) = {got}, want {want}");
    }
}

#[test]
fn example_three_double_root() {
    for p in [0.1, 0.5, 0.9] {
        let model = example_three(p);
        let (roots, init) = solve(&model);
        assert_eq!(roots.roots.len(), 1, "p = {p}");
        assert_eq!(roots.roots[0].multiplicity, 2);
        assert!((roots.roots[0].value.re - example_three_root(p)).abs() < 1e-8);
        for (got, want) in init.pi.iter().zip([1.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-9, "p = {p}: pi = {:?}", init.pi);
        }
        let phis = ultimate_survival(&model, &roots, &init, 10, &UltimateOptions::default()).unwrap().phis;
        let phi0 = (1.0 - p + (1.0 - p).sqrt()) / 2.0;
        assert!((phis[0] - phi0).abs() < 1e-10);
        for v in xi_coeffs(&model, &roots, &init, 20).unwrap() {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn example_four_root_counts() {
    for (m, count) in [(10, 9), (15, 14)] {
        let (roots, _) = solve(&example_four(m));
        assert_eq!(roots.total_multiplicity(), count);
    }
}

#[test]
fn example_four_truncation_order() {
    let a = table(&example_four(10), 10);
    let b = table(&example_four(15), 10);
    for u in 0..=10 {
        let d = b[u] - a[u];
        assert!(d > 0.0 && d <= 2e-7, "u = {u}: {d}");
    }
}

#[test]
fn closed_form_matches_linear_solve() {
    for model in [example_one(), example_two(), example_four(10), example_four(15)] {
        let (roots, lin) = solve(&model);
        let cf = solve_closed_form(&model, &roots).unwrap();
        for (a, b) in lin.pi.iter().zip(&cf.pi) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn xi_series_matches_table() {
    for model in [example_one(), example_two(), example_three(0.5)] {
        let (roots, init) = solve(&model);
        let phis = ultimate_survival(&model, &roots, &init, 21, &UltimateOptions::default()).unwrap().phis;
        let xi = xi_coeffs(&model, &roots, &init, 20).unwrap();
        for (i, v) in xi.iter().enumerate() {
            assert!((v - phis[i + 1]).abs() < 1e-9, "i = {i}: {v} vs {}", phis[i + 1]);
        }
    }
}

#[test]
fn long_tables_stay_bounded() {
    for model in [example_one(), example_two(), example_four(10), example_four(15)] {
        let (roots, init) = solve(&model);
        let t = ultimate_survival(&model, &roots, &init, 200, &UltimateOptions::default()).unwrap();
        assert!(t.phis.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(t.phis.iter().all(|v| (-1e-9..=1.0 + 1e-9).contains(v)));
    }
}
