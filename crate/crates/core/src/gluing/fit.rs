//! Nearest exact Delaunay surface to a point cloud (necksize, axis, offset).

use crate::delaunay::{default_step, period_s, solve_profile, DelaunayProfile, NeckParams};
use crate::geometry::V3;
use crate::{Error, Result};
use serde::Serialize;
use std::cell::RefCell;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitOptions {
    pub max_evals: usize,
    /// Stop when the simplex values agree to this relative spread.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_evals: 800, tolerance: 1e-10 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BestFitDelaunay {
    pub necksize: f64,
    pub axis: [f64; 3],
    /// Neck center.
    pub center: [f64; 3],
    pub rms_distance: f64,
    pub max_distance: f64,
    pub evaluations: usize,
}

/// Meridian of one Delaunay surface, neck at s = 0, k(0) = 0.
struct Meridian {
    profile: DelaunayProfile,
    /// Axial period T.
    period: f64,
}

impl Meridian {
    fn new(epsilon: f64) -> Result<Self> {
        let params = NeckParams::new(epsilon)?;
        let s_period = period_s(params)?;
        let profile = solve_profile(params, 0.75 * s_period, default_step(params)?)?;
        let half = profile.eval(0.5 * s_period)?.k;
        Ok(Meridian { profile, period: 2.0 * half })
    }

    /// Distance from (r, z) in the meridian half-plane to the curve.
    fn distance(&self, r: f64, z: f64) -> f64 {
        let pr = &self.profile;
        let z = z - self.period * (z / self.period).round();
        let i = pr.k.partition_point(|&k| k < z).min(pr.len() - 1);
        let (lo, hi) = (pr.grid[0], pr.grid[pr.len() - 1]);
        let tau = pr.params.tau;
        let mut s = pr.grid[i];
        let mut best = f64::INFINITY;
        for _ in 0..8 {
            let Ok(p) = pr.eval(s.clamp(lo, hi)) else { break };
            let rho = tau * p.sigma.exp();
            let (r1, r2) = (rho * p.sigma_s, rho * (p.sigma_ss + p.sigma_s * p.sigma_s));
            let (dr, dz) = (rho - r, p.k - z);
            best = best.min(dr.hypot(dz));
            let g = dr * r1 + dz * p.k_s;
            let gp = r1 * r1 + dr * r2 + p.k_s * p.k_s + dz * p.k_ss;
            if !(gp > 0.0) {
                break;
            }
            let ds = g / gp;
            s -= ds;
            if ds.abs() < 1e-13 {
                break;
            }
        }
        best
    }
}

fn orthonormal_pair(u: V3) -> (V3, V3) {
    let t = if u.x.abs() < 0.9 { V3::x() } else { V3::y() };
    let e1 = (t - u * u.dot(&t)).normalize();
    (e1, u.cross(&e1))
}

/// Nelder-Mead minimization of f from x0 with per-coordinate initial steps.
pub(crate) fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    opts: &FitOptions,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    while evals < opts.max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() <= opts.tolerance * vals[0].abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (pts[n][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let t = if fr < vals[n] { -0.5 } else { 0.5 };
            let xc = along(t);
            let fc = f(&xc);
            evals += 1;
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    pts[i] = (0..n).map(|k| pts[0][k] + 0.5 * (pts[i][k] - pts[0][k])).collect();
                    vals[i] = f(&pts[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (pts[best].clone(), vals[best], evals)
}

/// Fit necksize, axis direction and neck center to `points`, starting from a
/// Delaunay surface of necksize `epsilon0` with neck at the origin along `axis0`.
pub fn best_fit_delaunay(points: &[[f64; 3]], epsilon0: f64, axis0: [f64; 3], opts: &FitOptions) -> Result<BestFitDelaunay> {
    if points.is_empty() {
        return Err(Error::Domain("no points to fit".into()));
    }
    let u0 = V3::from(axis0).normalize();
    let (e1, e2) = orthonormal_pair(u0);
    let cache: RefCell<Option<(f64, Meridian)>> = RefCell::new(None);
    let frame = |x: &[f64]| -> (V3, V3) {
        let n = (u0 + x[2] * e1 + x[3] * e2).normalize();
        (n, x[1] * u0 + x[4] * e1 + x[5] * e2)
    };
    let distances = |x: &[f64]| -> Result<Vec<f64>> {
        let eps = x[0];
        let mut c = cache.borrow_mut();
        if c.as_ref().map_or(true, |(e, _)| *e != eps) {
            *c = Some((eps, Meridian::new(eps)?));
        }
        let m = &c.as_ref().expect("cached meridian").1;
        let (n, center) = frame(x);
        Ok(points
            .iter()
            .map(|p| {
                let q = V3::from(*p) - center;
                let z = q.dot(&n);
                m.distance((q - z * n).norm(), z)
            })
            .collect())
    };
    let objective = |x: &[f64]| -> f64 {
        if !(x[0] > 0.0 && x[0] < 1.0) {
            return f64::INFINITY;
        }
        match distances(x) {
            Ok(d) => (d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64).sqrt(),
            Err(_) => f64::INFINITY,
        }
    };
    let x0 = [epsilon0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let steps = [0.05 * epsilon0, 0.05 * epsilon0, 1e-3, 1e-3, 0.02 * epsilon0, 0.02 * epsilon0];
    let (x, rms, evaluations) = nelder_mead(&objective, &x0, &steps, opts);
    let d = distances(&x)?;
    let (n, center) = frame(&x);
    Ok(BestFitDelaunay {
        necksize: x[0],
        axis: [n.x, n.y, n.z],
        center: [center.x, center.y, center.z],
        rms_distance: rms,
        max_distance: d.iter().cloned().fold(0.0, f64::max),
        evaluations,
    })
}
