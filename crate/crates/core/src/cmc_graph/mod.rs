//! CMC-1 normal graphs over half-Delaunay surfaces by the fixed point
//! w = P phi + G Q(w), and their Cauchy data at the interface.

mod defect;

pub(crate) use defect::{evaluate_defect, h_deviation, CatenoidBase, DelaunayBase};

use crate::bvp::{green_field, is_low, poisson_apply, BoundaryData, HalfCylinder, ModeField, WeightedNorm};
use crate::{Error, Result};
use serde::Serialize;

/// Mode cutoff for nonlinear graph solves. With 12 modes the discarded defect
/// leaves |H - 1| near 3e-5 at the interface for data of size 0.3 eps^{3/4}.
pub const GRAPH_JMAX: i32 = 16;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GraphOptions {
    /// Radius factor of the admissible data ball ||phi|| <= c0 eps^{3/4}.
    pub c0: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions { c0: 0.3, tolerance: 1e-10, max_iter: 50 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSolution {
    pub epsilon: f64,
    pub s0: f64,
    pub mu: f64,
    #[serde(skip)]
    pub w: ModeField,
    pub boundary_data: BoundaryData,
    pub iterations: usize,
    /// Weighted norms of successive updates.
    pub updates: Vec<f64>,
    /// sup |H - 1| on [s0, s0 + 2 S].
    pub h_residual: f64,
    /// Weighted order-2 norm of w.
    pub norm: f64,
    /// Largest per-row defect energy lost beyond jmax.
    pub aliased: f64,
}

impl GraphSolution {
    /// Ratios of successive update norms.
    pub fn ratios(&self) -> Vec<f64> {
        self.updates.windows(2).map(|u| u[1] / u[0]).collect()
    }
}

/// Values and s-slopes of each mode at the interface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyData {
    pub values: BoundaryData,
    pub slopes: BoundaryData,
}

impl CauchyData {
    pub fn low_norm(&self) -> f64 {
        (-1..=1).map(|j| self.values.get(j).powi(2) + self.slopes.get(j).powi(2)).sum::<f64>().sqrt()
    }

    pub fn high_norm(&self) -> f64 {
        let v = self.values.high_part().norm();
        let s = self.slopes.high_part().norm();
        (v * v + s * s).sqrt()
    }
}

/// Q(w) = L w - tau^2 e^{2 sigma} (H(x_w) - 1) on the grid of `half`.
pub fn nonlinear_defect(half: &HalfCylinder, w: &ModeField) -> Result<ModeField> {
    Ok(evaluate_defect(&DelaunayBase { profile: &half.profile, offset: 0 }, w, None)?.q)
}

/// Solve H = 1 for the normal graph of w over [s0, s_far] with high-mode trace phi.
pub fn solve_graph(half: &HalfCylinder, phi: &BoundaryData, mu: f64, opts: &GraphOptions) -> Result<GraphSolution> {
    let eps = half.profile.params.epsilon;
    if phi.has_low_modes() {
        return Err(Error::Precondition("graph data must have no modes |j| <= 1".into()));
    }
    let bound = opts.c0 * eps.powf(0.75);
    if phi.norm() > bound {
        return Err(Error::Precondition(format!("||phi|| = {} exceeds c0 eps^(3/4) = {bound}", phi.norm())));
    }
    let norm = WeightedNorm::new(mu, half.s0, 2)?;
    let base = DelaunayBase { profile: &half.profile, offset: 0 };
    let window = half.index_within(2.0 * half.profile.period_s.unwrap_or(1.0)) + 1;
    let jmax = half.jmax;
    let phi = BoundaryData { jmax, coeffs: (-jmax..=jmax).map(|j| phi.get(j)).collect() };
    if phi.norm() == 0.0 {
        let w = half.zero_field();
        let h_residual = h_deviation(&base, &w, window, 1.0)?;
        return Ok(GraphSolution {
            epsilon: eps,
            s0: half.s0,
            mu,
            w,
            boundary_data: phi,
            iterations: 0,
            updates: vec![],
            h_residual,
            norm: 0.0,
            aliased: 0.0,
        });
    }
    let w_eps = poisson_apply(half, &phi, mu)?.field;
    let mut v = half.zero_field();
    let mut updates: Vec<f64> = Vec::new();
    let mut aliased: f64 = 0.0;
    let mut rises = 0;
    let mut converged = false;
    for it in 0..opts.max_iter {
        let mut w = w_eps.clone();
        w.axpy(1.0, &v);
        let d = evaluate_defect(&base, &w, Some((mu, half.s0)))?;
        aliased = aliased.max(d.aliased);
        let next = green_field(half, &d.q)?;
        let mut diff = next.clone();
        diff.axpy(-1.0, &v);
        let u = norm.eval(&diff);
        log::debug!("graph iteration {it}: update {u:e}");
        if let Some(&last) = updates.last() {
            rises = if u > last { rises + 1 } else { 0 };
            if rises >= 2 {
                return Err(Error::Divergence(format!("graph update grew twice, last {u:e}")));
            }
        }
        updates.push(u);
        v = next;
        if u <= opts.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Divergence(format!("no convergence in {} iterations", opts.max_iter)));
    }
    if aliased > 1e-20 {
        log::info!("graph defect energy beyond jmax: {aliased:e}");
    }
    let mut w = w_eps;
    w.axpy(1.0, &v);
    let h_residual = h_deviation(&base, &w, window, 1.0)?;
    Ok(GraphSolution {
        epsilon: eps,
        s0: half.s0,
        mu,
        norm: norm.eval(&w),
        w,
        boundary_data: phi,
        iterations: updates.len(),
        updates,
        h_residual,
        aliased,
    })
}

/// Per-mode value and slope of the solution at s0.
pub fn cauchy_data(solution: &GraphSolution) -> CauchyData {
    CauchyData { values: solution.w.trace(0), slopes: solution.w.slope_trace(0) }
}

/// Split the Cauchy data into the low block (j = -1, 0, 1) and the rest.
pub fn split_low(data: &BoundaryData) -> ([f64; 3], BoundaryData) {
    let low = [data.get(-1), data.get(0), data.get(1)];
    let mut high = data.clone();
    for j in -1..=1 {
        if is_low(j) {
            high.set(j, 0.0);
        }
    }
    (low, high)
}

#[cfg(test)]
mod tests;
