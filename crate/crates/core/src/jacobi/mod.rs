//! Mode decomposition of the Jacobi operator on Delaunay surfaces.
//!
//! In isothermal coordinates the Jacobi operator is
//! (tau^2 e^{2 sigma})^{-1} (d_s^2 + d_theta^2 + tau^2 cosh 2 sigma), and on the
//! angular mode chi_j it reduces to L_j = d_s^2 + tau^2 cosh 2 sigma - j^2.

mod fields;
mod floquet;

pub use fields::{
    explicit_jacobi, jacobi_limits_report, jacobi_residual, limit_profile, mode_residual, LimitReport, LimitRow, TauDerivatives,
};
pub use floquet::{floquet, floquet_exponent, FloquetResult};

use crate::delaunay::DelaunayProfile;
use serde::Serialize;
use std::f64::consts::PI;

/// Orthonormal angular basis on the circle: cos(j theta)/sqrt(pi) for j > 0,
/// sin(|j| theta)/sqrt(pi) for j < 0 and 1/sqrt(2 pi) for j = 0.
pub fn chi(j: i32, theta: f64) -> f64 {
    match j.signum() {
        0 => 1.0 / (2.0 * PI).sqrt(),
        1 => (j as f64 * theta).cos() / PI.sqrt(),
        _ => ((-j) as f64 * theta).sin() / PI.sqrt(),
    }
}

/// d/dtheta chi_j.
pub fn chi_theta(j: i32, theta: f64) -> f64 {
    let a = j.abs() as f64;
    match j.signum() {
        0 => 0.0,
        1 => -a * (a * theta).sin() / PI.sqrt(),
        _ => a * (a * theta).cos() / PI.sqrt(),
    }
}

/// Mode indices -jmax..=jmax in the fixed reassembly order.
pub fn mode_range(jmax: i32) -> Vec<i32> {
    (-jmax..=jmax).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// A radial profile of a single angular mode.
#[derive(Clone, Debug, Serialize)]
pub struct ModeFunction {
    pub j: i32,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Option<Vec<f64>>,
}

impl ModeFunction {
    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }
}

/// Closed-form Jacobi field of a low mode.
#[derive(Clone, Debug, Serialize)]
pub struct JacobiField {
    pub j: i32,
    pub sign: Sign,
    pub f: ModeFunction,
}

/// Samples of Q_j = j^2 - tau^2 cosh 2 sigma, the potential of -d_s^2 + Q_j.
pub fn mode_potential(profile: &DelaunayProfile, j: i32) -> ModeFunction {
    let j2 = (j * j) as f64;
    ModeFunction {
        j,
        grid: profile.grid.clone(),
        values: (0..profile.len()).map(|i| j2 - profile.potential(i)).collect(),
        derivs: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delaunay::{solve_profile, NeckParams};

    #[test]
    fn basis_is_orthonormal() {
        let n = 256;
        for a in -3..=3 {
            for b in -3..=3 {
                let ip: f64 = (0..n)
                    .map(|k| {
                        let th = 2.0 * PI * k as f64 / n as f64;
                        chi(a, th) * chi(b, th)
                    })
                    .sum::<f64>()
                    * 2.0
                    * PI
                    / n as f64;
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12, "{a} {b} {ip}");
            }
        }
        let h = 1e-6;
        for j in -3..=3 {
            let fd = (chi(j, 0.7 + h) - chi(j, 0.7 - h)) / (2.0 * h);
            assert!((fd - chi_theta(j, 0.7)).abs() < 1e-8);
        }
    }

    #[test]
    fn potential_examples() {
        let cyl = solve_profile(NeckParams::new(1.0).unwrap(), 2.0, 0.01).unwrap();
        assert!(mode_potential(&cyl, 2).values.iter().all(|&q| (q - 3.0).abs() < 1e-15));
        for &eps in &[0.05, 0.3, 0.8] {
            let p = solve_profile(NeckParams::new(eps).unwrap(), 8.0, 0.01).unwrap();
            let t2 = p.tau2();
            assert!(mode_potential(&p, 2).values.iter().all(|&q| q >= 2.0 + t2 - 1e-12));
        }
        let eps = 1e-3;
        let p = solve_profile(NeckParams::new(eps).unwrap(), 3.0, 0.01).unwrap();
        let q = mode_potential(&p, 2);
        let dev = (0..p.len())
            .map(|i| (q.values[i] - (4.0 - 2.0 / p.grid[i].cosh().powi(2))).abs())
            .fold(0.0, f64::max);
        assert!(dev < 2.0 * eps.sqrt(), "{dev}");
    }
}
