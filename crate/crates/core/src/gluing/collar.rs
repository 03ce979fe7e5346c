//! Exact normal offset of a placed Delaunay end over the catenoid collar.

use super::{theta_grid, EndConfig, EndDeformation};
use crate::bvp::BoundaryData;
use crate::cmc_graph::CauchyData;
use crate::delaunay::{DelaunayProfile, NeckParams};
use crate::geometry::V3;
use crate::jacobi::chi;
use crate::{Error, Result};
use nalgebra::Rotation3;
use std::f64::consts::PI;

/// Step of the slope stencil.
const SLOPE_STEP: f64 = 0.01;

/// Delaunay end of necksize eps_l - delta moved by the placement of `p`,
/// seen from the catenoid eps_l C_1 in the end frame.
pub(crate) struct PlacedEnd {
    profile: DelaunayProfile,
    tau: f64,
    a: f64,
    rotation: Rotation3<f64>,
    translation: V3,
}

impl PlacedEnd {
    pub(crate) fn new(end: &EndConfig, p: &EndDeformation) -> Result<Self> {
        let params = NeckParams::new(end.epsilon - p.delta)?;
        let h = 1e-3;
        let profile = DelaunayProfile::on_grid(params, end.interface - 1.5, h, 3001)?;
        let (rotation, translation) = p.placement();
        Ok(PlacedEnd { profile, tau: params.tau, a: end.epsilon, rotation, translation })
    }

    /// Isothermal parameter u with k(u) = z.
    fn invert_k(&self, z: f64) -> Result<f64> {
        let pr = &self.profile;
        let n = pr.len();
        if z < pr.k[0] || z > pr.k[n - 1] {
            return Err(Error::Range(format!("height {z} outside the end profile")));
        }
        let i = pr.k.partition_point(|&k| k < z).min(n - 1);
        let mut u = pr.grid[i];
        for _ in 0..50 {
            let q = pr.eval(u.clamp(pr.grid[0], pr.grid[n - 1]))?;
            let du = (q.k - z) / q.k_s;
            u -= du;
            if du.abs() < 1e-15 {
                return Ok(u);
            }
        }
        Err(Error::Numerical(format!("profile height inversion failed at z = {z}")))
    }

    /// Signed distance G along the catenoid normal at (s, theta) to the end,
    /// and the end parameter u hit there.
    pub(crate) fn offset(&self, s: f64, th: f64) -> Result<(f64, f64)> {
        let (st, ct) = th.sin_cos();
        let c = self.a * V3::new(s.cosh() * ct, s.cosh() * st, s);
        let n = V3::new(-ct / s.cosh(), -st / s.cosh(), s.tanh());
        let inv = self.rotation.inverse();
        let f = |g: f64| -> Result<(f64, f64)> {
            let y = inv * (c + g * n - self.translation);
            let u = self.invert_k(y.z)?;
            let rho = self.tau * self.profile.eval(u)?.sigma.exp();
            Ok((rho - y.x.hypot(y.y), u))
        };
        let (mut g0, mut g1) = (0.0, 1e-3);
        let (mut f0, _) = f(g0)?;
        for _ in 0..60 {
            let (f1, u) = f(g1)?;
            if (g1 - g0).abs() < 1e-15 || f1 == 0.0 {
                return Ok((g1, u));
            }
            let g2 = g1 - f1 * (g1 - g0) / (f1 - f0);
            (g0, f0, g1) = (g1, f1, g2);
        }
        Err(Error::Numerical(format!("normal offset did not converge at s = {s}")))
    }

    /// Mode values and slopes of the offset at s, with the mean parameter hit.
    pub(crate) fn cauchy(&self, s: f64, jmax: i32) -> Result<(CauchyData, f64)> {
        let thetas = theta_grid();
        let h = SLOPE_STEP;
        let mut values = Vec::with_capacity(thetas.len());
        let mut slopes = Vec::with_capacity(thetas.len());
        let mut u_mean = 0.0;
        for &th in &thetas {
            let (g, u) = self.offset(s, th)?;
            let at = |m: f64| self.offset(s + m * h, th).map(|r| r.0);
            let d = (at(-2.0)? - 8.0 * at(-1.0)? + 8.0 * at(1.0)? - at(2.0)?) / (12.0 * h);
            values.push(g);
            slopes.push(d);
            u_mean += u;
        }
        let w = 2.0 * PI / thetas.len() as f64;
        let project = |f: &[f64]| BoundaryData {
            jmax,
            coeffs: (-jmax..=jmax).map(|j| w * f.iter().zip(&thetas).map(|(v, &t)| v * chi(j, t)).sum::<f64>()).collect(),
        };
        let data = CauchyData { values: project(&values), slopes: project(&slopes) };
        Ok((data, u_mean / thetas.len() as f64))
    }
}
