use super::collar::PlacedEnd;
use super::*;
use crate::bvp::BoundaryData;
use crate::cmc_graph::{CauchyData, GraphOptions, GRAPH_JMAX};
use crate::jacobi::chi;
use approx::assert_relative_eq;
use proptest::prelude::*;

fn pair(eps: f64) -> Vec<EndConfig> {
    GlueConfig::two_ends(eps).end_configs().unwrap()
}

fn one(eps: f64, p: EndDeformation) -> DeformationSet {
    DeformationSet { epsilon: eps, ends: vec![p, p] }
}

#[test]
fn graph_examples() {
    let ends = pair(0.1);
    let e = &ends[0];
    let s = e.interface - 0.5;
    let zero = DeformationSet::zeros(0.1, 2);
    assert_eq!(deformation_graph(e, &zero, 1.25, s, 0.3).unwrap(), 0.0);
    let d = one(0.1, EndDeformation { d: 0.01, ..Default::default() });
    assert_relative_eq!(deformation_graph(e, &d, 1.25, s, 1.1).unwrap(), 0.01, max_relative = 1e-15);
    let dl = one(0.1, EndDeformation { delta: 0.005, ..Default::default() });
    assert_relative_eq!(deformation_graph(e, &dl, 1.25, s, 2.0).unwrap(), 0.005 * s, max_relative = 1e-15);
}

#[test]
fn graph_outside_collar_or_ball() {
    let ends = pair(0.1);
    let e = &ends[0];
    let zero = DeformationSet::zeros(0.1, 2);
    assert!(matches!(deformation_graph(e, &zero, 1.25, e.interface + 0.1, 0.0), Err(Error::Range(_))));
    assert!(matches!(deformation_graph(e, &zero, 1.25, e.interface - 2.5, 0.0), Err(Error::Range(_))));
    let big = one(0.1, EndDeformation { d: 0.5, ..Default::default() });
    assert!(matches!(deformation_graph(e, &big, 1.25, e.interface, 0.0), Err(Error::Consistency(_))));
}

fn small_deformation() -> impl Strategy<Value = EndDeformation> {
    prop::array::uniform6(-1e-3..1e-3f64).prop_map(|x| EndDeformation::from_array(&x))
}

proptest! {
    #[test]
    fn graph_is_linear(p in small_deformation(), q in small_deformation(), s in -0.5..1.0f64, th in 0.0..6.28f64) {
        let sum = EndDeformation::from_array(&std::array::from_fn::<f64, 6, _>(|i| p.to_array()[i] + q.to_array()[i]));
        let lhs = graph_value(0.1, &sum, s, th);
        let rhs = graph_value(0.1, &p, s, th) + graph_value(0.1, &q, s, th);
        prop_assert!((lhs - rhs).abs() <= 1e-15 * (1.0 + lhs.abs()));
        let twice = EndDeformation::from_array(&p.to_array().map(|x| 2.0 * x));
        prop_assert!((graph_value(0.1, &twice, s, th) - 2.0 * graph_value(0.1, &p, s, th)).abs() <= 1e-17);
    }

    #[test]
    fn graph_modes_match_quadrature(p in small_deformation(), s in 0.0..1.2f64) {
        let m = graph_modes(0.1, &p, s);
        let th = theta_grid();
        let w = 2.0 * PI / th.len() as f64;
        let h = 1e-4;
        for (k, j) in (-1..=1).enumerate() {
            let v: f64 = th.iter().map(|&t| w * graph_value(0.1, &p, s, t) * chi(j, t)).sum();
            let d: f64 = th
                .iter()
                .map(|&t| w * (graph_value(0.1, &p, s + h, t) - graph_value(0.1, &p, s - h, t)) / (2.0 * h) * chi(j, t))
                .sum();
            prop_assert!((v - m[k]).abs() < 1e-14);
            prop_assert!((d - m[3 + k]).abs() < 1e-10);
        }
    }
}

#[test]
fn cutoff_profile() {
    assert_eq!(cutoff(-2.0), 1.0);
    assert_eq!(cutoff(-1.5), 1.0);
    assert_eq!(cutoff(-1.0), 0.0);
    assert_eq!(cutoff(0.0), 0.0);
    assert_relative_eq!(cutoff(-1.25), 0.5, epsilon = 1e-15);
    let h = 1e-6;
    for k in 0..20 {
        let x = -1.6 + 0.035 * k as f64;
        let fd = (cutoff(x + h) - cutoff(x - h)) / (2.0 * h);
        assert!((fd - cutoff_d(x)).abs() < 1e-6, "x = {x}");
        assert!(cutoff(x + 0.01) <= cutoff(x));
    }
}

#[test]
fn deformed_normal_near_interface_is_placed_delaunay_normal() {
    let ends = pair(0.1);
    let e = &ends[0];
    let p = EndDeformation { t1: 2e-3, r2: 1e-3, d: 1e-3, delta: 5e-4, ..Default::default() };
    let dn = DeformedNormal::new(e, p).unwrap();
    let (rot, _) = p.placement();
    let tau = dn.profile.params.tau;
    for &s in &[e.interface - 0.9, e.interface - 0.3, e.interface] {
        let q = dn.profile.eval(s).unwrap();
        let nu = rot * delaunay_normal_jet(tau, &q, 0.7).x;
        let v = dn.eval(s, 0.7).unwrap();
        assert!((v - nu).norm() < 1e-12, "s = {s}");
    }
    let deep = dn.eval(e.interface - 1.8, 0.7).unwrap();
    assert_relative_eq!(deep.norm(), 1.0, epsilon = 1e-12);
    let q = dn.profile.eval(e.interface - 1.8).unwrap();
    assert!((deep - rot * delaunay_normal_jet(tau, &q, 0.7).x).norm() > 1e-5);
    assert!(matches!(dn.eval(e.interface + 0.5, 0.0), Err(Error::Range(_))));
}

#[test]
fn config_parsing_and_frames() {
    let cfg = GlueConfig::from_json(r#"{"epsilon": 0.1, "ends": [{"a": 1.0, "axis": [0,0,1]}, {"a": 1.0, "axis": [0,0,-1]}]}"#).unwrap();
    assert_eq!(cfg.kappa, DEFAULT_KAPPA);
    assert_eq!(cfg.mu, DEFAULT_MU);
    let ends = cfg.end_configs().unwrap();
    assert!(is_catenoid_pair(&ends));
    let m = ends[1].rotation.matrix();
    assert_relative_eq!(m[(1, 1)], -1.0, epsilon = 1e-15);
    assert_relative_eq!(m[(2, 2)], -1.0, epsilon = 1e-15);

    let mut bad = GlueConfig::two_ends(0.1);
    bad.kappa = 1.6;
    assert!(matches!(bad.end_configs(), Err(Error::Domain(_))));
    let mut cut = GlueConfig::two_ends(0.2);
    cut.ends[0].cut = 0.0;
    assert!(matches!(cut.end_configs(), Err(Error::Config(_))));
}

#[test]
fn flat_model_gives_minus_two_j() {
    let ends = pair(0.1);
    let set = DeformationSet::zeros(0.1, 2);
    let maps = flat_maps(&ends, &set, 6);
    for j in [-5, -2, 2, 3, 6] {
        let phi = vec![BoundaryData::single(6, j, 0.7), BoundaryData::zeros(6)];
        let s = (maps.s_map)(&phi).unwrap();
        let t = (maps.t_map)(&phi).unwrap();
        let diff = s[0].slopes.get(j) - t[0].slopes.get(j);
        assert_relative_eq!(diff, -2.0 * j.abs() as f64 * 0.7, max_relative = 1e-15);
    }
    let hm = match_high_modes(&maps, &MatchOptions::default()).unwrap();
    assert_eq!(hm.norm(), 0.0);
    assert_eq!(hm.iterations, 1);
}

fn forced_maps<'a>(fs: &'a [BoundaryData], ft: &'a [BoundaryData], gain: f64) -> DtnMaps<'a> {
    let side = move |phi: &[BoundaryData], f: &[BoundaryData], sign: f64| -> Vec<CauchyData> {
        phi.iter()
            .zip(f)
            .map(|(p, f)| {
                let slopes = p.modes().map(|(j, c)| sign * j.abs() as f64 * c + f.get(j)).collect();
                CauchyData { values: p.clone(), slopes: BoundaryData { jmax: p.jmax, coeffs: slopes } }
            })
            .collect()
    };
    DtnMaps {
        s_map: Box::new(move |phi| Ok(side(phi, fs, gain))),
        t_map: Box::new(move |phi| Ok(side(phi, ft, 1.0))),
        ends: 2,
        jmax: 5,
    }
}

#[test]
fn high_matching_with_forcing() {
    let mut fs = vec![BoundaryData::zeros(5); 2];
    let ft = vec![BoundaryData::zeros(5); 2];
    fs[0].set(2, 0.04);
    fs[0].set(-3, -0.03);
    fs[1].set(5, 0.01);
    let maps = forced_maps(&fs, &ft, -1.0);
    let hm = match_high_modes(&maps, &MatchOptions::default()).unwrap();
    assert_relative_eq!(hm.phi[0].get(2), 0.04 / 4.0, max_relative = 1e-14);
    assert_relative_eq!(hm.phi[0].get(-3), -0.03 / 6.0, max_relative = 1e-14);
    assert_relative_eq!(hm.phi[1].get(5), 0.01 / 10.0, max_relative = 1e-14);
    assert!(hm.iterations <= 3);

    // S_0 - T_0 with the wrong sign: the preconditioned update doubles each time.
    let maps = forced_maps(&fs, &ft, 3.0);
    assert!(matches!(match_high_modes(&maps, &MatchOptions::default()), Err(Error::Divergence(_))));
}

fn constant_mismatch(c: [f64; 6]) -> impl Fn(&DeformationSet) -> crate::Result<Vec<[f64; 6]>> {
    move |set: &DeformationSet| Ok(vec![c; set.ends.len()])
}

#[test]
fn low_matching_is_block_triangular() {
    let ends = pair(0.1);
    let r2p = (2.0 * PI).sqrt();
    let m = 1e-3;
    let lm = match_low_modes(0.1, &ends, 1.25, &constant_mismatch([0.0, -r2p * m, 0.0, 0.0, 0.0, 0.0])).unwrap();
    let p = lm.deformation.ends[0];
    assert_relative_eq!(p.d, m, max_relative = 1e-12);
    for x in [p.t1, p.t2, p.r1, p.r2, p.delta] {
        assert!(x.abs() < 1e-16);
    }
    let sl = 2e-3;
    let lm = match_low_modes(0.1, &ends, 1.25, &constant_mismatch([0.0, 0.0, 0.0, 0.0, -r2p * sl, 0.0])).unwrap();
    let p = lm.deformation.ends[1];
    assert_relative_eq!(p.delta, sl, max_relative = 1e-12);
    assert_relative_eq!(p.d, -sl * ends[1].interface, max_relative = 1e-12);
    assert!(p.t1.abs() + p.t2.abs() + p.r1.abs() + p.r2.abs() < 1e-16);
}

#[test]
fn low_matching_zero_and_too_large() {
    let ends = pair(0.1);
    let lm = match_low_modes(0.1, &ends, 1.25, &constant_mismatch([0.0; 6])).unwrap();
    assert_eq!(lm.deformation, DeformationSet::zeros(0.1, 2));
    assert_eq!(lm.iterations, 0);
    let r = match_low_modes(0.1, &ends, 1.25, &constant_mismatch([0.0, -1.0, 0.0, 0.0, 0.0, 0.0]));
    assert!(matches!(r, Err(Error::Consistency(_))));
}

#[test]
fn weighted_condition_is_finite() {
    for k in 0..=8 {
        let eps = 0.05 + 0.15 * k as f64 / 8.0;
        let e = &pair(eps)[0];
        let c = weighted_condition(eps, e.epsilon, e.interface);
        assert!(c.is_finite() && c >= 1.0, "eps = {eps}: {c}");
    }
}

fn translation_deviation(eps: f64) -> f64 {
    let e = &pair(eps)[0];
    let base = PlacedEnd::new(e, &EndDeformation::default()).unwrap().cauchy(e.interface, 3).unwrap().0;
    let p = EndDeformation { t1: 1e-4 * eps, t2: -2e-4 * eps, ..Default::default() };
    let moved = PlacedEnd::new(e, &p).unwrap().cauchy(e.interface, 3).unwrap().0;
    let g = graph_modes(e.epsilon, &p, e.interface);
    // D_eps is rotationally symmetric: only mode 0 at P = 0
    for j in [-3, -2, -1, 1, 2, 3] {
        assert!(base.values.get(j).abs() < 1e-14);
    }
    [(-1, 0), (1, 2)]
        .into_iter()
        .map(|(j, k)| ((moved.values.get(j) - base.values.get(j) + g[k]) / g[k]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn placed_end_follows_the_translation_graph() {
    let coarse = translation_deviation(0.1);
    let fine = translation_deviation(0.01);
    assert!(coarse < 0.25, "{coarse}");
    assert!(fine < coarse, "{fine} vs {coarse}");
}

fn interior_data(eps: f64) -> Vec<BoundaryData> {
    let c = 0.2 * eps.powf(0.75);
    vec![BoundaryData::single(GRAPH_JMAX, 2, c), BoundaryData::single(GRAPH_JMAX, 2, c)]
}

#[test]
fn interior_example_and_mirror_symmetry() {
    let ends = pair(0.1);
    let phi = interior_data(0.1);
    let sol = interior_solve(&ends, &phi, DEFAULT_MU, InteriorModel::Nonlinear, &GraphOptions::default()).unwrap();
    assert!(sol.h_residual <= 1e-4, "{}", sol.h_residual);
    assert!(sol.norm <= 10.0 * (phi[0].norm() + 0.1f64.powi(2) * ends[0].interface.cosh().powi(2)));
    let (a, b) = (&sol.cauchy[0], &sol.cauchy[1]);
    for j in -GRAPH_JMAX..=GRAPH_JMAX {
        assert!((a.values.get(j) - b.values.get(j)).abs() < 1e-12, "j = {j}");
        assert!((a.slopes.get(j) - b.slopes.get(j)).abs() < 1e-9, "j = {j}");
    }
    assert_relative_eq!(a.values.get(2), phi[0].get(2), max_relative = 1e-14);
}

#[test]
fn interior_rejects_low_modes_and_unpaired_ends() {
    let ends = pair(0.1);
    let mut phi = interior_data(0.1);
    phi[0].set(1, 1e-3);
    let r = interior_solve(&ends, &phi, DEFAULT_MU, InteriorModel::Flat, &GraphOptions::default());
    assert!(matches!(r, Err(Error::Precondition(_))));
    let three = GlueConfig {
        ends: vec![
            EndSpec { a: 1.0, axis: [0.0, 0.0, 1.0], cut: -1.5, base: [0.0; 3] },
            EndSpec { a: 1.0, axis: [1.0, 0.0, -0.5], cut: -1.5, base: [0.0; 3] },
            EndSpec { a: 1.0, axis: [-1.0, 0.0, -0.5], cut: -1.5, base: [0.0; 3] },
        ],
        ..GlueConfig::two_ends(0.1)
    };
    let ends = three.end_configs().unwrap();
    let phi = vec![BoundaryData::zeros(GRAPH_JMAX); 3];
    let r = interior_solve(&ends, &phi, DEFAULT_MU, InteriorModel::Nonlinear, &GraphOptions::default());
    assert!(matches!(r, Err(Error::Config(_))));
    let flat = interior_solve(&ends, &phi, DEFAULT_MU, InteriorModel::Flat, &GraphOptions::default()).unwrap();
    assert_eq!(flat.cauchy.len(), 3);
}

#[test]
fn interior_rotation_equivariance() {
    let ends = pair(0.1);
    let c = 0.1 * 0.1f64.powf(0.75);
    let mut p1 = BoundaryData::single(GRAPH_JMAX, 2, c);
    p1.set(-3, 0.5 * c);
    let p2 = BoundaryData::single(GRAPH_JMAX, 3, 0.7 * c);
    let opts = GraphOptions::default();
    let base = interior_solve(&ends, &[p1.clone(), p2.clone()], DEFAULT_MU, InteriorModel::Nonlinear, &opts).unwrap();
    let th = 0.4;
    let turned = [p1.rotated(th), p2.rotated(-th)];
    let rot = interior_solve(&ends, &turned, DEFAULT_MU, InteriorModel::Nonlinear, &opts).unwrap();
    for (l, sign) in [(0, 1.0), (1, -1.0)] {
        let want = base.cauchy[l].values.rotated(sign * th);
        let got = &rot.cauchy[l].values;
        let want_s = base.cauchy[l].slopes.rotated(sign * th);
        for j in -GRAPH_JMAX..=GRAPH_JMAX {
            assert!((got.get(j) - want.get(j)).abs() < 1e-8, "end {l} j {j}");
            assert!((rot.cauchy[l].slopes.get(j) - want_s.get(j)).abs() < 1e-8, "end {l} j {j}");
        }
    }
}

#[test]
fn deformation_rotation_turns_transverse_pairs() {
    let p = EndDeformation { t1: 1e-3, t2: 2e-3, r1: -1e-3, r2: 5e-4, d: 3e-4, delta: 1e-4 };
    let q = p.rotated(0.3);
    assert_eq!((q.d, q.delta), (p.d, p.delta));
    // the graph turns with the frame
    for k in 0..8 {
        let th = 0.7 * k as f64;
        assert_relative_eq!(graph_value(0.1, &q, 0.5, th + 0.3), graph_value(0.1, &p, 0.5, th), epsilon = 1e-15);
    }
}
