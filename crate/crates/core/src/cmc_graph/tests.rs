use super::*;
use crate::delaunay::{period_s, NeckParams};

fn half(eps: f64, jmax: i32) -> HalfCylinder {
    let p = NeckParams::new(eps).unwrap();
    HalfCylinder::new(p, period_s(p).unwrap() / 8.0, jmax).unwrap()
}

fn data(eps: f64, jmax: i32) -> BoundaryData {
    BoundaryData::single(jmax, 2, 0.3 * eps.powf(0.75))
}

#[test]
fn zero_graph_has_zero_defect() {
    let hc = half(0.3, 3);
    let q = nonlinear_defect(&hc, &hc.zero_field()).unwrap();
    assert_eq!(q.max_abs(), 0.0);
    let base = DelaunayBase { profile: &hc.profile, offset: 0 };
    assert!(h_deviation(&base, &hc.zero_field(), 2000, 1.0).unwrap() < 1e-10);
}

#[test]
fn defect_is_quadratic() {
    let hc = half(0.3, 3);
    let shape = |t: f64| {
        hc.field_from_fn(|j, s| match j {
            2 => t * (-(s - hc.s0)).exp(),
            0 => 0.5 * t * (-2.0 * (s - hc.s0)).exp(),
            _ => 0.0,
        })
    };
    let r: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&t| nonlinear_defect(&hc, &shape(t)).unwrap().max_abs() / (t * t))
        .collect();
    assert!(r[0] > 0.0);
    assert!((r[1] / r[0] - 1.0).abs() < 0.05 && (r[2] / r[1] - 1.0).abs() < 0.03, "{r:?}");
}

#[test]
fn cylinder_constant_graph() {
    let hc = HalfCylinder::new(NeckParams::new(1.0).unwrap(), 0.0, 2).unwrap();
    for u in [1e-2, 2e-3] {
        let a0 = u * (2.0 * std::f64::consts::PI).sqrt();
        let w = hc.field_from_fn(|j, _| if j == 0 { a0 } else { 0.0 });
        let q = nonlinear_defect(&hc, &w).unwrap();
        // a constant field projects onto chi_0 with coefficient sqrt(2 pi) times the value
        let got = q.mode(0)[100] / (2.0 * std::f64::consts::PI).sqrt();
        let closed = -u * u / (1.0 - u);
        assert!((got - closed).abs() < 1e-12, "{got} vs {closed}");
        assert!((got + u * u).abs() < 2.0 * u * u * u);
    }
}

#[test]
fn trivial_data_gives_trivial_graph() {
    let hc = half(0.1, 4);
    let s = solve_graph(&hc, &BoundaryData::zeros(4), 1.5, &GraphOptions::default()).unwrap();
    assert_eq!(s.iterations, 0);
    assert_eq!(s.w.max_abs(), 0.0);
    let c = cauchy_data(&s);
    assert_eq!(c.low_norm() + c.high_norm(), 0.0);
    let big = BoundaryData::single(4, 2, 0.5);
    assert!(matches!(solve_graph(&hc, &big, 1.5, &GraphOptions::default()), Err(Error::Precondition(_))));
}

#[test]
fn contraction_at_moderate_necksize() {
    let eps = 0.1;
    let hc = half(eps, GRAPH_JMAX);
    let phi = data(eps, GRAPH_JMAX);
    let s = solve_graph(&hc, &phi, 1.5, &GraphOptions::default()).unwrap();
    // the asymptotic update ratio is about 0.32 at this data size
    assert!(s.iterations <= 25, "{} {:?}", s.iterations, s.updates);
    assert!(s.ratios().iter().all(|&r| r <= 0.5), "{:?}", s.ratios());
    assert!(s.h_residual <= 1e-5, "{}", s.h_residual);
    let trace = s.w.trace(0);
    for j in -GRAPH_JMAX..=GRAPH_JMAX {
        if j.abs() >= 2 {
            assert!((trace.get(j) - phi.get(j)).abs() < 1e-8);
        }
    }
    let tight = GraphOptions { tolerance: 5e-11, ..GraphOptions::default() };
    let t = solve_graph(&hc, &phi, 1.5, &tight).unwrap();
    assert!(s.w.max_diff(&t.w) < 1e-8);
    let c = cauchy_data(&s);
    assert!(c.low_norm() > 0.0);
}

#[test]
fn rotation_equivariance() {
    let eps = 0.2;
    let hc = half(eps, 6);
    let mut phi = BoundaryData::single(6, 2, 0.25 * eps.powf(0.75));
    phi.set(-3, 0.05 * eps.powf(0.75));
    let th = 0.37;
    let a = solve_graph(&hc, &phi, 1.5, &GraphOptions::default()).unwrap();
    let b = solve_graph(&hc, &phi.rotated(th), 1.5, &GraphOptions::default()).unwrap();
    let ca = cauchy_data(&a);
    let cb = cauchy_data(&b);
    assert!(ca.values.rotated(th).sub(&cb.values).norm() < 1e-9);
    assert!(ca.slopes.rotated(th).sub(&cb.slopes).norm() < 1e-9);
}
