//! Floquet exponents of the periodic mode operators from the monodromy matrix.

use crate::delaunay::integrator::{substeps, Flow, ModeState};
use crate::delaunay::{period_s, state_at, DelaunayProfile, NeckParams, MAX_INNER_STEP};
use crate::{Error, Result};
use serde::Serialize;

/// Segments whose transfer determinants are multiplied for the Liouville check.
const SEGMENTS: usize = 64;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FloquetResult {
    pub epsilon: f64,
    pub j: i32,
    pub gamma: f64,
    pub trace: f64,
    pub det: f64,
    /// Period of the potential, S/2 (1 for the cylinder).
    pub period: f64,
}

/// Monodromy of w'' = (j^2 - tau^2 cosh 2 sigma) w over one potential period.
pub fn floquet(params: NeckParams, j: i32) -> Result<FloquetResult> {
    if j.abs() <= 1 {
        return Err(Error::Domain(format!("Floquet exponent defined here for |j| >= 2, got {j}")));
    }
    let period = if params.is_cylinder() { 1.0 } else { 0.5 * period_s(params)? };
    let flow = Flow::new(params.tau2());
    let j2 = (j * j) as f64;
    let n = substeps(period, MAX_INNER_STEP).div_ceil(SEGMENTS) * SEGMENTS;
    let h = period / n as f64;
    let per = n / SEGMENTS;
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let mut det = 1.0;
    let mut base = state_at(params, 0.0);
    for _ in 0..SEGMENTS {
        let mut st = ModeState { base, w: [1.0, 0.0], v: [0.0, 1.0] };
        for _ in 0..per {
            flow.mode_step(&mut st, j2, h);
        }
        base = st.base;
        let t = [[st.w[0], st.w[1]], [st.v[0], st.v[1]]];
        det *= t[0][0] * t[1][1] - t[0][1] * t[1][0];
        m = [
            [t[0][0] * m[0][0] + t[0][1] * m[1][0], t[0][0] * m[0][1] + t[0][1] * m[1][1]],
            [t[1][0] * m[0][0] + t[1][1] * m[1][0], t[1][0] * m[0][1] + t[1][1] * m[1][1]],
        ];
    }
    let trace = m[0][0] + m[1][1];
    if !trace.is_finite() {
        return Err(Error::Numerical(format!("monodromy trace not finite for mode {j}")));
    }
    if trace.abs() <= 2.0 {
        return Err(Error::Elliptic { j, trace });
    }
    if trace < 0.0 {
        return Err(Error::Numerical(format!("negative multiplier, trace {trace}")));
    }
    let gamma = (0.5 * trace.abs()).acosh() / period;
    Ok(FloquetResult { epsilon: params.epsilon, j, gamma, trace, det, period })
}

/// Exponent gamma_j for the necksize of `profile`, which must span one potential period.
pub fn floquet_exponent(profile: &DelaunayProfile, j: i32) -> Result<f64> {
    let params = profile.params;
    let period = if params.is_cylinder() { 0.0 } else { 0.5 * period_s(params)? };
    let (a, b) = (profile.grid[0], profile.grid[profile.len() - 1]);
    if b - a < period {
        return Err(Error::Range(format!("profile window {} shorter than the period {period}", b - a)));
    }
    Ok(floquet(params, j)?.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delaunay::solve_profile;

    #[test]
    fn constant_potential() {
        let c = NeckParams::new(1.0).unwrap();
        let g2 = floquet(c, 2).unwrap();
        assert!((g2.gamma - 3f64.sqrt()).abs() < 1e-7, "{}", g2.gamma);
        assert!((floquet(c, 3).unwrap().gamma - 8f64.sqrt()).abs() < 1e-7);
        assert!((g2.det - 1.0).abs() < 1e-9);
        assert!(matches!(floquet(c, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn symmetric_in_j_and_liouville() {
        for eps in [0.5, 0.1, 0.01] {
            let p = NeckParams::new(eps).unwrap();
            let a = floquet(p, 2).unwrap();
            let b = floquet(p, -2).unwrap();
            assert_eq!(a.gamma, b.gamma);
            assert!((a.det - 1.0).abs() < 1e-9, "{eps} det {}", a.det);
            for j in [3, 4] {
                assert!(floquet(p, j).unwrap().gamma >= 2.0 - 1e-6);
            }
        }
    }

    #[test]
    fn gamma2_scan_increases() {
        let g: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| floquet(NeckParams::new(e).unwrap(), 2).unwrap().gamma)
            .collect();
        assert!(g[0] < g[1] && g[1] < g[2] && g[2] < 2.0, "{g:?}");
    }

    #[test]
    fn needs_a_period() {
        let p = solve_profile(NeckParams::new(0.3).unwrap(), 0.5, 0.01).unwrap();
        assert!(matches!(floquet_exponent(&p, 2), Err(Error::Range(_))));
    }

    #[test]
    fn wronskian_is_constant() {
        let params = NeckParams::new(0.2).unwrap();
        let flow = Flow::new(params.tau2());
        let mut st = ModeState { base: state_at(params, 0.0), w: [1.0, 0.3], v: [-0.5, 2.0] };
        let w0 = st.w[0] * st.v[1] - st.w[1] * st.v[0];
        let mut worst: f64 = 0.0;
        for _ in 0..1600 {
            flow.mode_step(&mut st, 4.0, 0.0025);
            let w = st.w[0] * st.v[1] - st.w[1] * st.v[0];
            worst = worst.max((w - w0).abs() / w0.abs().max(1.0));
        }
        // relative to the solution scale
        let scale = st.w[0].abs().max(st.v[1].abs()).max(1.0);
        assert!(worst / scale < 1e-8, "{worst}");
    }
}
