//! Dirichlet-to-Neumann maps of both sides and the two matching solves.

use super::interior::{interior_solve, InteriorModel};
use super::{graph_modes, mode_matrix, parameter_weights, DeformationSet, EndConfig, EndDeformation};
use crate::bvp::{is_low, BoundaryData, HalfCylinder};
use crate::cmc_graph::{cauchy_data, solve_graph, CauchyData, GraphOptions, GRAPH_JMAX};
use crate::delaunay::NeckParams;
use crate::{Error, Result};
use nalgebra::{Matrix6, Vector6};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::OnceLock;

/// Per-end Dirichlet data to per-end Cauchy data.
pub type CauchyMap<'a> = Box<dyn Fn(&[BoundaryData]) -> Result<Vec<CauchyData>> + Sync + 'a>;

/// S (Delaunay side) and T (interior side, leading-order graph included).
pub struct DtnMaps<'a> {
    pub s_map: CauchyMap<'a>,
    pub t_map: CauchyMap<'a>,
    pub ends: usize,
    pub jmax: i32,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MatchOptions {
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions { tolerance: 1e-10, max_iter: 50 }
    }
}

fn zero_cauchy(jmax: i32) -> CauchyData {
    CauchyData { values: BoundaryData::zeros(jmax), slopes: BoundaryData::zeros(jmax) }
}

fn flat_side(phi: &[BoundaryData], sign: f64) -> Vec<CauchyData> {
    phi.iter()
        .map(|p| {
            let slopes = p.modes().map(|(j, c)| if is_low(j) { 0.0 } else { sign * j.abs() as f64 * c }).collect();
            CauchyData { values: p.high_part(), slopes: BoundaryData { jmax: p.jmax, coeffs: slopes } }
        })
        .collect()
}

/// Add the low-mode coefficients of the leading-order graph at each interface.
fn with_deformation(mut data: Vec<CauchyData>, ends: &[EndConfig], set: &DeformationSet) -> Vec<CauchyData> {
    for (c, e) in data.iter_mut().zip(ends) {
        let m = graph_modes(e.epsilon, &set.ends[e.index], e.interface);
        for (k, j) in (-1..=1).enumerate() {
            c.values.set(j, c.values.get(j) + m[k]);
            c.slopes.set(j, c.slopes.get(j) + m[3 + k]);
        }
    }
    data
}

/// Flat models on both sides: S_0 phi_j has slope -|j| phi_j, T_0 phi_j has +|j| phi_j.
pub fn flat_maps<'a>(ends: &'a [EndConfig], set: &'a DeformationSet, jmax: i32) -> DtnMaps<'a> {
    DtnMaps {
        s_map: Box::new(|phi: &[BoundaryData]| Ok(flat_side(phi, -1.0))),
        t_map: Box::new(move |phi: &[BoundaryData]| Ok(with_deformation(flat_side(phi, 1.0), ends, set))),
        ends: ends.len(),
        jmax,
    }
}

/// Delaunay end of necksize eps_l - delta from the interface outward.
pub(crate) fn end_cylinder(end: &EndConfig, p: &EndDeformation) -> Result<HalfCylinder> {
    HalfCylinder::new(NeckParams::new(end.epsilon - p.delta)?, end.interface, GRAPH_JMAX)
}

/// S from the nonlinear graph solver on each Delaunay end, T from the interior
/// solve of the given model plus the leading-order graph.
pub fn dtn_maps<'a>(
    ends: &'a [EndConfig],
    set: &'a DeformationSet,
    mu: f64,
    model: InteriorModel,
    opts: &'a GraphOptions,
) -> Result<DtnMaps<'a>> {
    if set.ends.len() != ends.len() {
        return Err(Error::Config("deformation set does not match the ends".into()));
    }
    let cylinders: Vec<OnceLock<Result<HalfCylinder>>> = ends.iter().map(|_| OnceLock::new()).collect();
    let s_map = move |phi: &[BoundaryData]| -> Result<Vec<CauchyData>> {
        ends.par_iter()
            .zip(phi.par_iter())
            .map(|(e, p)| {
                if p.high_part().norm() == 0.0 {
                    return Ok(zero_cauchy(GRAPH_JMAX));
                }
                let half = match cylinders[e.index].get_or_init(|| end_cylinder(e, &set.ends[e.index])) {
                    Ok(h) => h,
                    Err(err) => return Err(Error::Numerical(format!("end {}: {err}", e.index))),
                };
                Ok(cauchy_data(&solve_graph(half, &p.high_part(), mu, opts)?))
            })
            .collect()
    };
    let t_map = move |phi: &[BoundaryData]| -> Result<Vec<CauchyData>> {
        let sol = interior_solve(ends, phi, mu, model, opts)?;
        Ok(with_deformation(sol.cauchy, ends, set))
    };
    Ok(DtnMaps { s_map: Box::new(s_map), t_map: Box::new(t_map), ends: ends.len(), jmax: GRAPH_JMAX })
}

#[derive(Clone, Debug, Serialize)]
pub struct HighMatch {
    pub phi: Vec<BoundaryData>,
    pub iterations: usize,
    pub updates: Vec<f64>,
    /// Maps evaluated at the returned data.
    pub s_data: Vec<CauchyData>,
    pub t_data: Vec<CauchyData>,
}

impl HighMatch {
    /// l2 norm of the matched data over all ends.
    pub fn norm(&self) -> f64 {
        self.phi.iter().map(|p| p.norm().powi(2)).sum::<f64>().sqrt()
    }
}

/// Fixed point of phi = phi - (S_0 - T_0)^{-1} (S(phi) - T(phi)), with
/// (S_0 - T_0) acting as -2|j| on mode j.
pub fn match_high_modes(maps: &DtnMaps, opts: &MatchOptions) -> Result<HighMatch> {
    let mut phi = vec![BoundaryData::zeros(maps.jmax); maps.ends];
    let mut updates: Vec<f64> = Vec::new();
    let mut rises = 0;
    for _ in 0..opts.max_iter {
        let s = (maps.s_map)(&phi)?;
        let t = (maps.t_map)(&phi)?;
        let mut size = 0.0;
        let mut next = phi.clone();
        for (l, p) in next.iter_mut().enumerate() {
            for j in -maps.jmax..=maps.jmax {
                if is_low(j) {
                    continue;
                }
                let step = (s[l].slopes.get(j) - t[l].slopes.get(j)) / (2.0 * j.abs() as f64);
                p.set(j, p.get(j) + step);
                size += step * step;
            }
        }
        let u = size.sqrt();
        log::debug!("high-mode matching update {u:e}");
        if let Some(&last) = updates.last() {
            rises = if u > last { rises + 1 } else { 0 };
            if rises >= 2 {
                return Err(Error::Divergence(format!("high-mode matching update grew twice, last {u:e}")));
            }
        }
        updates.push(u);
        if u <= opts.tolerance {
            let converged_here = u == 0.0;
            phi = next;
            let (s_data, t_data) = if converged_here { (s, t) } else { ((maps.s_map)(&phi)?, (maps.t_map)(&phi)?) };
            return Ok(HighMatch { phi, iterations: updates.len(), updates, s_data, t_data });
        }
        phi = next;
    }
    Err(Error::Divergence(format!("high-mode matching: no convergence in {} iterations", opts.max_iter)))
}

/// The 6 x 6 map from (t1, t2, r1, r2, d, delta) to the low-mode values and
/// slopes [v_-1, v_0, v_1, s_-1, s_0, s_1] of the leading-order graph at s.
pub fn low_mode_matrix(eps_l: f64, s: f64) -> Matrix6<f64> {
    let m = mode_matrix(eps_l, s);
    Matrix6::from_fn(|r, c| m[r][c])
}

/// Condition number of the low-mode matrix after the parameter weighting.
pub fn weighted_condition(epsilon: f64, eps_l: f64, s: f64) -> f64 {
    let w = parameter_weights(epsilon);
    let m = low_mode_matrix(eps_l, s) * Matrix6::from_diagonal(&Vector6::from_fn(|i, _| 1.0 / w[i]));
    let sv = m.singular_values();
    sv.max() / sv.min()
}

#[derive(Clone, Debug, Serialize)]
pub struct LowMatch {
    pub deformation: DeformationSet,
    pub norm: f64,
    /// eps^kappa
    pub bound: f64,
    pub iterations: usize,
    /// Largest remaining low-mode mismatch.
    pub residual: f64,
    /// Weighted condition number of each end's 6 x 6 block.
    pub condition: Vec<f64>,
}

/// Solve, per end, graph_modes(P) + c(P) = 0 for the six parameters by damped
/// Newton, where `mismatch(P)` returns the low-mode (interior - end) data
/// [v_-1, v_0, v_1, s_-1, s_0, s_1] without the leading-order graph.
pub fn match_low_modes(
    epsilon: f64,
    ends: &[EndConfig],
    kappa: f64,
    mismatch: &dyn Fn(&DeformationSet) -> Result<Vec<[f64; 6]>>,
) -> Result<LowMatch> {
    let k = ends.len();
    let mut set = DeformationSet::zeros(epsilon, k);
    let residual = |set: &DeformationSet| -> Result<Vec<Vector6<f64>>> {
        let c = mismatch(set)?;
        if c.len() != k {
            return Err(Error::Config(format!("mismatch for {} ends, expected {k}", c.len())));
        }
        Ok(ends
            .iter()
            .zip(&c)
            .map(|(e, c)| {
                let g = graph_modes(e.epsilon, &set.ends[e.index], e.interface);
                Vector6::from_fn(|r, _| g[r] + c[r])
            })
            .collect())
    };
    let size = |r: &[Vector6<f64>]| r.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    let lus: Vec<_> = ends.iter().map(|e| low_mode_matrix(e.epsilon, e.interface).lu()).collect();
    let mut r = residual(&set)?;
    // relative tolerance with an absolute floor at the roundoff of the mismatch
    let tol = (1e-13 * size(&r)).max(1e-12);
    let mut iterations = 0;
    while size(&r) > tol && iterations < 30 {
        iterations += 1;
        let steps = r
            .iter()
            .zip(&lus)
            .map(|(v, lu)| lu.solve(&(-v)).ok_or_else(|| Error::Numerical("singular low-mode matrix".into())))
            .collect::<Result<Vec<_>>>()?;
        let current = size(&r);
        let mut lambda = 1.0;
        loop {
            let mut trial = set.clone();
            for (p, d) in trial.ends.iter_mut().zip(&steps) {
                let x = Vector6::from(p.to_array()) + lambda * d;
                *p = EndDeformation::from_array(x.as_slice());
            }
            let rt = residual(&trial)?;
            if size(&rt) < current {
                set = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(Error::Numerical(format!("low-mode Newton stagnated at residual {current:e}")));
            }
        }
    }
    let norm = set.norm();
    let bound = epsilon.powf(kappa);
    let condition = ends.iter().map(|e| weighted_condition(epsilon, e.epsilon, e.interface)).collect();
    let residual = r.iter().map(|v| v.amax()).fold(0.0, f64::max);
    set.check(kappa)?;
    Ok(LowMatch { deformation: set, norm, bound, iterations, residual, condition })
}
