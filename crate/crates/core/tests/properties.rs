use delaunay_glue::delaunay::{default_step, period_s, solve_profile, NeckParams};
use delaunay_glue::geometry::{export_mesh, parse_obj_vertices, sample_mesh, DelaunayPatch, MeshFormat};
use delaunay_glue::jacobi::floquet;
use proptest::prelude::*;
use std::sync::Arc;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn profile_is_symmetric_and_periodic(eps in 0.02f64..0.95) {
        let p = NeckParams::new(eps).unwrap();
        let s = period_s(p).unwrap();
        let pr = solve_profile(p, s, default_step(p).unwrap()).unwrap();
        let n = pr.len();
        prop_assert!(pr.max_invariant_drift() <= 1e-9);
        // sigma is even about the neck, k is odd
        for i in (0..n).step_by(97) {
            prop_assert!((pr.sigma[i] - pr.sigma[n - 1 - i]).abs() < 1e-9);
            prop_assert!((pr.k[i] + pr.k[n - 1 - i]).abs() < 1e-9);
        }
        // one full period returns to the neck
        prop_assert!((pr.sigma[n - 1] - pr.sigma[n / 2]).abs() < 1e-8);
        prop_assert!((pr.rho(n / 2) - eps).abs() < 1e-12);
    }

    #[test]
    fn floquet_is_area_preserving_and_ordered(eps in 0.01f64..0.9) {
        let p = NeckParams::new(eps).unwrap();
        let g: Vec<_> = (2..=4).map(|j| floquet(p, j).unwrap()).collect();
        for f in &g {
            prop_assert!((f.det - 1.0).abs() < 1e-9);
            prop_assert!(f.trace.abs() > 2.0);
        }
        prop_assert!(g[0].gamma < g[1].gamma && g[1].gamma < g[2].gamma);
        // gamma_j lies between the sqrt(j^2 - 1) cylinder value and j
        for (j, f) in (2..=4).zip(&g) {
            let j = j as f64;
            prop_assert!(f.gamma > (j * j - 1.0).sqrt() - 1e-9 && f.gamma < j);
        }
    }
}

#[test]
fn obj_export_round_trip() {
    let p = NeckParams::new(0.4).unwrap();
    let pr = solve_profile(p, 2.0, 0.01).unwrap();
    let m = sample_mesh(&DelaunayPatch::new(Arc::new(pr)), 25, 12).unwrap();
    let path = std::env::temp_dir().join(format!("dg_roundtrip_{}.obj", std::process::id()));
    export_mesh(&m, MeshFormat::Obj, &path).unwrap();
    let v = parse_obj_vertices(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let _ = std::fs::remove_file(&path);
    assert_eq!(v.len(), m.vertices.len());
    for (a, b) in v.iter().zip(&m.vertices) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() <= 1e-8 * b[k].abs().max(1.0));
        }
    }
}
