//! Interior solves over the truncated catenoid.

use super::{is_catenoid_pair, EndConfig};
use crate::bvp::{is_low, weighted_sup, BoundaryData, ModeField};
use crate::cmc_graph::{evaluate_defect, h_deviation, CatenoidBase, CauchyData, GraphOptions, GRAPH_JMAX};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Target grid step of the interior solve.
const INTERIOR_STEP: f64 = 0.005;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InteriorModel {
    /// H = 1 graph over the exact catenoid (two opposite ends only).
    Nonlinear,
    /// Harmonic extension per mode on a flat half-cylinder, any number of ends.
    Flat,
}

#[derive(Clone, Debug, Serialize)]
pub struct InteriorSolution {
    pub model: InteriorModel,
    pub epsilon: f64,
    pub interface: f64,
    pub mu: f64,
    /// Interior graph on [-S/8, S/8] (nonlinear model only).
    #[serde(skip)]
    pub w: Option<ModeField>,
    /// Per end, per mode value and slope at the interface in the end frame.
    pub cauchy: Vec<CauchyData>,
    pub iterations: usize,
    pub updates: Vec<f64>,
    /// sup |H - 1| over the interior grid.
    pub h_residual: f64,
    pub norm: f64,
    pub aliased: f64,
}

/// Interior weighted norm normalized at the interface:
/// sup (cosh s / cosh S/8)^{-mu} times the summed |partials| up to order two.
pub fn interior_norm(w: &ModeField, mu: f64, interface: f64) -> f64 {
    let ci = interface.cosh();
    weighted_sup(w, 2, |s| (s.cosh() / ci).powf(-mu))
}

/// Mode coefficients seen from the mirrored frame (theta -> -theta).
fn mirrored(data: &BoundaryData) -> BoundaryData {
    let coeffs = data.modes().map(|(j, c)| if j < 0 { -c } else { c }).collect();
    BoundaryData { jmax: data.jmax, coeffs }
}

fn padded(data: &BoundaryData, jmax: i32) -> BoundaryData {
    BoundaryData { jmax, coeffs: (-jmax..=jmax).map(|j| data.get(j)).collect() }
}

/// Interior solve with high-mode Dirichlet data `phi` per end (end frames).
pub fn interior_solve(
    ends: &[EndConfig],
    phi: &[BoundaryData],
    mu: f64,
    model: InteriorModel,
    opts: &GraphOptions,
) -> Result<InteriorSolution> {
    crate::bvp::check_mu(mu)?;
    if phi.len() != ends.len() {
        return Err(Error::Config(format!("{} data sets for {} ends", phi.len(), ends.len())));
    }
    if phi.iter().any(BoundaryData::has_low_modes) {
        return Err(Error::Precondition("interface data must have no modes |j| <= 1".into()));
    }
    match model {
        InteriorModel::Flat => Ok(flat_solve(ends, phi, mu)),
        InteriorModel::Nonlinear => {
            if !is_catenoid_pair(ends) {
                return Err(Error::Config("nonlinear interior needs two opposite ends of equal weight".into()));
            }
            nonlinear_solve(ends, phi, mu, opts)
        }
    }
}

fn flat_solve(ends: &[EndConfig], phi: &[BoundaryData], mu: f64) -> InteriorSolution {
    let cauchy = phi
        .iter()
        .map(|p| {
            let slopes = p.modes().map(|(j, c)| j.abs() as f64 * c).collect();
            CauchyData { values: p.clone(), slopes: BoundaryData { jmax: p.jmax, coeffs: slopes } }
        })
        .collect();
    InteriorSolution {
        model: InteriorModel::Flat,
        epsilon: ends[0].epsilon,
        interface: ends[0].interface,
        mu,
        w: None,
        cauchy,
        iterations: 0,
        updates: vec![],
        h_residual: 0.0,
        norm: 0.0,
        aliased: 0.0,
    }
}

struct Grid {
    base: CatenoidBase,
    mid: usize,
}

impl Grid {
    fn new(a: f64, interface: f64) -> Self {
        // a multiple of 20 so that the mesh rows fall on grid rows
        let m = 20 * (interface / (20.0 * INTERIOR_STEP)).ceil() as usize;
        let h = interface / m as f64;
        Grid { base: CatenoidBase { a, s0: -interface, h, n: 2 * m + 1 }, mid: m }
    }

    fn s(&self, i: usize) -> f64 {
        self.base.s0 + i as f64 * self.base.h
    }
}

/// Numerov solve of w'' = (j^2 - 2 / cosh^2 s) w + f on the interior grid.
/// High modes take Dirichlet values at both ends; low modes start from
/// w(0) = w'(0) = 0 at the waist.
fn solve_mode(g: &Grid, j: i32, f: &[f64], left: f64, right: f64) -> Result<Vec<f64>> {
    let n = g.base.n;
    let h = g.base.h;
    let h12 = h * h / 12.0;
    let j2 = (j * j) as f64;
    let q: Vec<f64> = (0..n).map(|i| j2 - 2.0 / g.s(i).cosh().powi(2)).collect();
    let rhs = |i: usize| h12 * (f[i - 1] + 10.0 * f[i] + f[i + 1]);
    let lo = |i: usize| 1.0 - h12 * q[i];
    let mid = |i: usize| -2.0 * (1.0 + 5.0 * h12 * q[i]);
    let mut w = vec![0.0; n];
    if is_low(j) {
        let m = g.mid;
        // Zero Cauchy data at the waist. q is even, so the Numerov relation at the
        // waist fixes the even part; the odd part comes from the Taylor series.
        let f1 = (f[m - 2] - 8.0 * f[m - 1] + 8.0 * f[m + 1] - f[m + 2]) / (12.0 * h);
        let f3 = (f[m + 2] - 2.0 * f[m + 1] + 2.0 * f[m - 1] - f[m - 2]) / (2.0 * h * h * h);
        let even = 0.5 * rhs(m) / lo(m + 1);
        let odd = h.powi(3) / 6.0 * f1 + h.powi(5) / 120.0 * (q[m] * f1 + f3);
        w[m + 1] = even + odd;
        w[m - 1] = even - odd;
        for i in m + 1..n - 1 {
            w[i + 1] = (rhs(i) - mid(i) * w[i] - lo(i - 1) * w[i - 1]) / lo(i + 1);
        }
        for i in (1..m).rev() {
            w[i - 1] = (rhs(i) - mid(i) * w[i] - lo(i + 1) * w[i + 1]) / lo(i - 1);
        }
    } else {
        let k = n - 2;
        let (mut a, mut b, mut c, mut d) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
        for r in 0..k {
            let i = r + 1;
            a[r] = lo(i - 1);
            b[r] = mid(i);
            c[r] = lo(i + 1);
            d[r] = rhs(i);
        }
        d[0] -= a[0] * left;
        d[k - 1] -= c[k - 1] * right;
        a[0] = 0.0;
        c[k - 1] = 0.0;
        let x = crate::bvp::thomas(&a, &b, &c, &d)?;
        w[0] = left;
        w[n - 1] = right;
        w[1..n - 1].copy_from_slice(&x);
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("interior mode {j} not finite")));
    }
    Ok(w)
}

fn nonlinear_solve(ends: &[EndConfig], phi: &[BoundaryData], mu: f64, opts: &GraphOptions) -> Result<InteriorSolution> {
    let end = &ends[0];
    let eps = end.epsilon;
    let g = Grid::new(eps, end.interface);
    let jmax = GRAPH_JMAX.max(phi.iter().map(|p| p.jmax).max().unwrap_or(0));
    let right = padded(&phi[0], jmax);
    let left = mirrored(&padded(&phi[1], jmax));
    let n = g.base.n;
    let r2p = (2.0 * PI).sqrt();
    let forcing: Vec<f64> = (0..n).map(|i| r2p * (eps * g.s(i).cosh()).powi(2)).collect();
    let mut w = ModeField::zeros(g.base.s0, g.base.h, n, jmax);
    let mut updates: Vec<f64> = Vec::new();
    let mut aliased: f64 = 0.0;
    let mut rises = 0;
    let mut converged = false;
    for it in 0..opts.max_iter {
        let d = evaluate_defect(&g.base, &w, None)?;
        aliased = aliased.max(d.aliased);
        let modes: Vec<i32> = (-jmax..=jmax).collect();
        let values = modes
            .par_iter()
            .map(|&j| {
                let mut f = d.q.mode(j).to_vec();
                if j == 0 {
                    f.iter_mut().zip(&forcing).for_each(|(a, b)| *a += b);
                }
                let (l, r) = (left.get(j), right.get(j));
                if !is_low(j) && l == 0.0 && r == 0.0 && f.iter().all(|&v| v == 0.0) {
                    return Ok(vec![0.0; n]);
                }
                solve_mode(&g, j, &f, l, r)
            })
            .collect::<Result<Vec<_>>>()?;
        let next = ModeField { s0: w.s0, h: w.h, jmax, values };
        let mut diff = next.clone();
        diff.axpy(-1.0, &w);
        let u = interior_norm(&diff, mu, end.interface);
        log::debug!("interior iteration {it}: update {u:e}");
        if let Some(&last) = updates.last() {
            rises = if u > last { rises + 1 } else { 0 };
            if rises >= 2 {
                return Err(Error::Divergence(format!("interior update grew twice, last {u:e}")));
            }
        }
        updates.push(u);
        w = next;
        if u <= opts.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Divergence(format!("interior: no convergence in {} iterations", opts.max_iter)));
    }
    let h_residual = h_deviation(&g.base, &w, n, 1.0)?;
    let (v1, s1) = (w.trace(n - 1), w.slope_trace(n - 1));
    let (v2, s2) = (mirrored(&w.trace(0)), mirrored(&w.slope_trace(0)).scaled(-1.0));
    Ok(InteriorSolution {
        model: InteriorModel::Nonlinear,
        epsilon: eps,
        interface: end.interface,
        mu,
        norm: interior_norm(&w, mu, end.interface),
        w: Some(w),
        cauchy: vec![CauchyData { values: v1, slopes: s1 }, CauchyData { values: v2, slopes: s2 }],
        iterations: updates.len(),
        updates,
        h_residual,
        aliased,
    })
}
