use std::f64::consts::PI;

use gcm_peres::model::{self, ModelParams};
use proptest::prelude::*;

proptest! {
    #[test]
    fn potential_has_threefold_symmetry(b in -1.5f64..1.5, beta in 0.0f64..2.0, gamma in -PI..PI) {
        let p = ModelParams::new(b, 0.1);
        let v = p.potential(beta, gamma);
        prop_assert!((p.potential(beta, gamma + 2.0 * PI / 3.0) - v).abs() < 1e-12 * v.abs().max(1.0));
        prop_assert!((p.potential(beta, -gamma) - v).abs() < 1e-12 * v.abs().max(1.0));
    }

    #[test]
    fn reflecting_b_rotates_by_sixty_degrees(b in -1.5f64..1.5, beta in 0.0f64..2.0, gamma in -PI..PI) {
        let p = ModelParams::new(b, 0.1);
        let q = p.with_b(-b);
        let v = p.potential(beta, gamma);
        prop_assert!((q.potential(beta, gamma + PI / 3.0) - v).abs() < 1e-12 * v.abs().max(1.0));
    }

    #[test]
    fn gradient_matches_finite_differences(b in -1.5f64..1.5, x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let p = ModelParams::new(b, 0.1);
        let h = 1e-6;
        let g = p.gradient_cartesian(x, y);
        let gx = (p.potential_cartesian(x + h, y) - p.potential_cartesian(x - h, y)) / (2.0 * h);
        let gy = (p.potential_cartesian(x, y + h) - p.potential_cartesian(x, y - h)) / (2.0 * h);
        prop_assert!((g[0] - gx).abs() < 1e-6 && (g[1] - gy).abs() < 1e-6);
    }

    #[test]
    fn minimum_is_a_stationary_point_below_the_origin(b in 0.05f64..1.5) {
        let p = ModelParams::new(b, 0.1);
        let m = model::global_minimum(&p).unwrap();
        let (x, y) = (m.beta * m.gamma.cos(), m.beta * m.gamma.sin());
        let g = p.gradient_cartesian(x, y);
        prop_assert!(g[0].abs() < 1e-9 && g[1].abs() < 1e-9);
        prop_assert!(m.energy < 0.0);
        prop_assert!((p.potential(m.beta, m.gamma) - m.energy).abs() < 1e-12);
    }
}

#[test]
fn zero_b_minimum_is_the_ring() {
    // V = −β² + β⁴ has its minimum −1/4 at β² = 1/2
    let m = model::global_minimum(&ModelParams::new(0.0, 0.1)).unwrap();
    assert!((m.beta - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((m.energy + 0.25).abs() < 1e-12);
}

#[test]
fn axis_interval_bounds_the_section() {
    let p = ModelParams::new(0.62, 0.1);
    let (lo, hi) = model::axis_interval(&p, 0.2).unwrap();
    assert!((p.potential_on_axis(lo) - 0.2).abs() < 1e-9);
    assert!((p.potential_on_axis(hi) - 0.2).abs() < 1e-9);
    assert!(p.potential_on_axis(0.5 * (lo + hi)) < 0.2);
}
