use gcm_peres::model::{self, ModelParams};
use gcm_peres::spectra::{self, Grid, Quantization};
use gcm_peres::Operator;

fn solve(b: f64, q: Quantization, n_max: u32) -> spectra::EigenSolution {
    let p = ModelParams::new(b, 0.1);
    spectra::solve(&p, q, n_max, spectra::default_length(&p).unwrap()).unwrap()
}

#[test]
fn reflected_b_gives_the_same_spectrum() {
    for q in [Quantization::TwoDEven, Quantization::TwoDOdd, Quantization::FiveD] {
        let p = ModelParams::new(0.62, 0.1);
        let len = spectra::default_length(&p).unwrap();
        let (plus, np) = spectra::solve_energies(&p, q, 50, len).unwrap();
        let (minus, nm) = spectra::solve_energies(&p.with_b(-0.62), q, 50, len).unwrap();
        assert_eq!(np, nm, "{q}");
        for (a, b) in plus.iter().zip(&minus) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{q}: {a} vs {b}");
        }
    }
}

#[test]
fn trace_equals_eigenvalue_sum() {
    for q in [Quantization::TwoDEven, Quantization::FiveD] {
        let sol = solve(0.62, q, 40);
        let h = sol.operator(Operator::H).unwrap();
        let trace: f64 = (0..sol.dimension()).map(|i| h[(i, i)]).sum();
        let sum: f64 = sol.energies.iter().sum();
        assert!((trace - sum).abs() < 1e-9 * trace.abs().max(1.0), "{q}: {trace} vs {sum}");
    }
}

#[test]
fn hprime_identity_holds_for_each_quantization() {
    for q in [Quantization::TwoDEven, Quantization::TwoDOdd, Quantization::FiveD] {
        let sol = solve(0.45, q, 50);
        assert!(sol.n_converged > 10, "{q}: {}", sol.n_converged);
        let residual = spectra::check_identity_hprime(&sol).unwrap();
        assert!(residual < 1e-9, "{q}: {residual}");
    }
    assert!(spectra::check_identity_hprime(&solve(0.0, Quantization::TwoDEven, 30)).is_err());
}

#[test]
fn five_d_and_two_d_spectra_differ_at_finite_b() {
    let p = ModelParams::new(0.62, 0.1);
    let len = spectra::default_length(&p).unwrap();
    let (e2, n2) = spectra::solve_energies(&p, Quantization::TwoDEven, 60, len).unwrap();
    let (e5, n5) = spectra::solve_energies(&p, Quantization::FiveD, 60, len).unwrap();
    let n = n2.min(n5);
    assert!(n > 20);
    let max_diff = e2[..n].iter().zip(&e5[..n]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(max_diff > 1e-3, "{max_diff}");
}

#[test]
fn ground_state_sits_above_the_well_bottom() {
    for b in [0.24, 0.62, 1.09] {
        let sol = solve(b, Quantization::TwoDEven, 40);
        let min = model::global_minimum(&sol.meta.params).unwrap().energy;
        assert!(sol.energies[0] > min, "B = {b}");
    }
}

#[test]
fn densities_are_normalized() {
    for q in [Quantization::TwoDEven, Quantization::TwoDOdd, Quantization::FiveD] {
        let sol = solve(0.62, q, 60);
        for level in [0, 3, sol.n_converged / 2] {
            let grid = spectra::default_grid(&sol, level, 160).unwrap();
            let field = spectra::wavefunction_density(&sol, level, &grid).unwrap();
            assert!((0.98..=1.02).contains(&field.integral), "{q} level {level}: {}", field.integral);
            assert!(field.values.iter().all(|v| *v >= 0.0));
        }
    }
}

#[test]
fn unconverged_level_is_rejected() {
    let sol = solve(0.62, Quantization::TwoDEven, 30);
    let grid = Grid { x_range: [-1.0, 1.0], y_range: [-1.0, 1.0], nx: 4, ny: 4 };
    assert!(spectra::wavefunction_density(&sol, sol.n_converged, &grid).is_err());
    assert!(spectra::wavefunction_density(&sol, 10_000, &grid).is_err());
}

#[test]
fn zero_b_ground_state_is_gamma_uniform() {
    let sol = solve(0.0, Quantization::TwoDEven, 40);
    let r = 0.8;
    let eps = 1e-9;
    let at = |theta: f64| {
        let (x, y) = (r * theta.cos(), r * theta.sin());
        let g = Grid { x_range: [x - eps, x + eps], y_range: [y - eps, y + eps], nx: 1, ny: 1 };
        spectra::wavefunction_density(&sol, 0, &g).unwrap().values[0]
    };
    let reference = at(0.0);
    assert!(reference > 1e-3);
    for k in 1..12 {
        let v = at(k as f64 * 0.37);
        assert!((v - reference).abs() < 1e-9 * reference, "{v} vs {reference}");
    }
}

#[test]
fn convergence_study_stabilizes_low_levels() {
    let p = ModelParams::new(0.62, 0.1);
    let rows = spectra::convergence_study(&p, Quantization::TwoDEven, &[20, 30, 40, 50], spectra::default_length(&p).unwrap()).unwrap();
    let stable = spectra::stable_from(&rows, 0, 1e-8).expect("ground state converges");
    assert!(stable <= 50);
    assert!(spectra::convergence_study(&p, Quantization::TwoDEven, &[30, 20], 0.2).is_err());
}
