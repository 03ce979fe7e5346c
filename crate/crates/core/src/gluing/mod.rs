//! Catenoidal ends, the six-parameter end deformations, interior solves,
//! Dirichlet-to-Neumann matching and assembly of glued surfaces.
//!
//! Conventions. Each end carries its own frame in which the end points along
//! +z. For k = 2 the interior is the catenoid eps a (cosh s cos theta,
//! cosh s sin theta, s); end 1 uses (s, theta) and end 2 the mirrored
//! coordinates (-s, -theta), so sine-mode coefficients change sign between the
//! interior and the end-2 frame. Interface slopes are taken along increasing
//! end coordinate s on both sides.

mod assemble;
mod collar;
mod fit;
mod interior;
mod matching;

pub use assemble::{assemble_glued, write_glued, GlueOptions, GlueReport, GluedSurface, ModeMismatch};
pub use fit::{best_fit_delaunay, BestFitDelaunay, FitOptions};
pub use interior::{interior_norm, interior_solve, InteriorModel, InteriorSolution};
pub use matching::{
    dtn_maps, flat_maps, low_mode_matrix, match_high_modes, match_low_modes, weighted_condition, DtnMaps, HighMatch,
    LowMatch, MatchOptions,
};

use crate::bvp::THETA_POINTS;
use crate::delaunay::{period_s, DelaunayProfile, NeckParams};
use crate::geometry::patches::{delaunay_jet, delaunay_normal_jet};
use crate::geometry::V3;
use crate::{Error, Result};
use nalgebra::{Matrix3, Rotation3, Unit};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_KAPPA: f64 = 1.25;
pub const DEFAULT_MU: f64 = 1.5;

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}
fn default_mu() -> f64 {
    DEFAULT_MU
}
fn default_cut() -> f64 {
    -1.5
}
fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

/// One end as read from a gluing config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndSpec {
    pub a: f64,
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
    #[serde(default = "default_cut")]
    pub cut: f64,
    #[serde(default)]
    pub base: [f64; 3],
}

/// JSON gluing config `{ epsilon, kappa, mu, ends: [{a, axis, cut}] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueConfig {
    pub epsilon: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub ends: Vec<EndSpec>,
}

impl GlueConfig {
    /// Symmetric two-ended configuration along the z-axis.
    pub fn two_ends(epsilon: f64) -> Self {
        let end = |z: f64| EndSpec { a: 1.0, axis: [0.0, 0.0, z], cut: default_cut(), base: [0.0; 3] };
        GlueConfig { epsilon, kappa: DEFAULT_KAPPA, mu: DEFAULT_MU, ends: vec![end(1.0), end(-1.0)] }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!("epsilon = {} outside (0, 1)", self.epsilon)));
        }
        if !(self.kappa > 1.0 && self.kappa < 1.5) {
            return Err(Error::Domain(format!("kappa = {} outside (1, 3/2)", self.kappa)));
        }
        crate::bvp::check_mu(self.mu)?;
        if self.ends.is_empty() {
            return Err(Error::Config("no ends configured".into()));
        }
        Ok(())
    }

    /// Validated end configurations. For two opposite ends the second frame is
    /// the first one composed with the half-turn about x.
    pub fn end_configs(&self) -> Result<Vec<EndConfig>> {
        self.validate()?;
        let mut out = self
            .ends
            .iter()
            .enumerate()
            .map(|(i, e)| EndConfig::new(i, self.epsilon, e))
            .collect::<Result<Vec<_>>>()?;
        if out.len() == 2 && is_catenoid_pair(&out) {
            out[1].rotation = out[0].rotation * half_turn();
        }
        Ok(out)
    }
}

fn half_turn() -> Rotation3<f64> {
    Rotation3::from_matrix_unchecked(Matrix3::from_diagonal(&V3::new(1.0, -1.0, -1.0)))
}

/// Rotation taking e_z to `axis`; the antipodal case is the half-turn about x.
fn frame_of(axis: V3) -> Rotation3<f64> {
    let ez = V3::z();
    match Rotation3::rotation_between(&ez, &axis) {
        Some(r) => r,
        None => half_turn(),
    }
}

pub(crate) fn is_catenoid_pair(ends: &[EndConfig]) -> bool {
    if ends.len() != 2 {
        return false;
    }
    let (a, b) = (&ends[0], &ends[1]);
    let opposite = (a.axis + b.axis).norm() < 1e-12;
    let same_base = (a.base - b.base).norm() < 1e-12;
    opposite && same_base && (a.weight - b.weight).abs() < 1e-12 && (a.cut - b.cut).abs() < 1e-12
}

/// A catenoidal end with its frame and scaled necksize eps_l = a_l eps.
#[derive(Clone, Debug)]
pub struct EndConfig {
    pub index: usize,
    pub weight: f64,
    pub axis: V3,
    pub base: V3,
    pub rotation: Rotation3<f64>,
    pub cut: f64,
    pub epsilon: f64,
    /// S_{eps_l} / 8, the interface position.
    pub interface: f64,
}

impl EndConfig {
    pub fn new(index: usize, epsilon: f64, spec: &EndSpec) -> Result<Self> {
        if !(spec.a > 0.0) {
            return Err(Error::Config(format!("end {index}: weight {} must be positive", spec.a)));
        }
        let axis = V3::from(spec.axis);
        if !(axis.norm() > 1e-12) {
            return Err(Error::Config(format!("end {index}: zero axis")));
        }
        let axis = axis.normalize();
        let eps_l = spec.a * epsilon;
        let params = NeckParams::new(eps_l)?;
        if params.is_cylinder() || eps_l >= 1.0 {
            return Err(Error::Config(format!("end {index}: scaled necksize {eps_l} not below 1")));
        }
        let interface = period_s(params)? / 8.0;
        if !(interface > spec.cut + 2.0) {
            return Err(Error::Config(format!(
                "end {index}: S/8 = {interface} must exceed cut + 2 = {}",
                spec.cut + 2.0
            )));
        }
        Ok(EndConfig {
            index,
            weight: spec.a,
            axis,
            base: V3::from(spec.base),
            rotation: frame_of(axis),
            cut: spec.cut,
            epsilon: eps_l,
            interface,
        })
    }

    /// The same end with its frame turned by theta0 about the global z-axis.
    pub fn rotated(&self, theta0: f64) -> Self {
        let r = Rotation3::from_axis_angle(&Unit::new_normalize(V3::z()), theta0);
        EndConfig { axis: r * self.axis, base: r * self.base, rotation: r * self.rotation, ..self.clone() }
    }

    fn check_collar(&self, s: f64) -> Result<()> {
        let lo = self.interface - 2.0;
        if s < lo - 1e-12 || s > self.interface + 1e-12 {
            return Err(Error::Range(format!("s = {s} outside the collar [{lo}, {}]", self.interface)));
        }
        Ok(())
    }
}

/// (t1, t2, r1, r2, d, delta) of one end.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EndDeformation {
    pub t1: f64,
    pub t2: f64,
    pub r1: f64,
    pub r2: f64,
    pub d: f64,
    pub delta: f64,
}

impl EndDeformation {
    pub fn to_array(&self) -> [f64; 6] {
        [self.t1, self.t2, self.r1, self.r2, self.d, self.delta]
    }

    pub fn from_array(x: &[f64]) -> Self {
        EndDeformation { t1: x[0], t2: x[1], r1: x[2], r2: x[3], d: x[4], delta: x[5] }
    }

    /// Rigid motion of the end frame: x -> R x + b with R = exp(A),
    /// A e_x = r1 e_z, A e_y = r2 e_z, and b = -(t1, t2, d + delta).
    ///
    /// With the inward normal, the catenoid is then, to leading order, the graph of
    /// the leading-order function over the moved Delaunay end of necksize eps_l - delta.
    pub fn placement(&self) -> (Rotation3<f64>, V3) {
        let w = V3::new(self.r2, -self.r1, 0.0);
        (Rotation3::new(w), V3::new(-self.t1, -self.t2, -(self.d + self.delta)))
    }

    /// Rotate the transverse pairs by theta0.
    pub fn rotated(&self, theta0: f64) -> Self {
        let (s, c) = theta0.sin_cos();
        EndDeformation {
            t1: c * self.t1 - s * self.t2,
            t2: s * self.t1 + c * self.t2,
            r1: c * self.r1 - s * self.r2,
            r2: s * self.r1 + c * self.r2,
            ..*self
        }
    }
}

fn end_norm(e: f64, p: &EndDeformation) -> f64 {
    e.powf(0.25) * p.t1.hypot(p.t2) + e.powf(0.75) * p.r1.hypot(p.r2) + p.d.abs() + (1.0 / e).ln() * p.delta.abs()
}

/// Deformation parameters of all ends.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeformationSet {
    pub epsilon: f64,
    pub ends: Vec<EndDeformation>,
}

impl DeformationSet {
    pub fn zeros(epsilon: f64, k: usize) -> Self {
        DeformationSet { epsilon, ends: vec![EndDeformation::default(); k] }
    }

    /// Largest per-end eps^{1/4} |t| + eps^{3/4} |r| + |d| + log(1/eps) |delta|.
    pub fn norm(&self) -> f64 {
        self.ends.iter().map(|p| end_norm(self.epsilon, p)).fold(0.0, f64::max)
    }

    pub fn check(&self, kappa: f64) -> Result<()> {
        let n = self.norm();
        let bound = self.epsilon.powf(kappa);
        if n > bound {
            return Err(Error::Consistency(format!("||P|| = {n:e} exceeds eps^kappa = {bound:e}")));
        }
        Ok(())
    }
}

/// Column weights (eps^{1/4}, eps^{1/4}, eps^{3/4}, eps^{3/4}, 1, log 1/eps).
pub fn parameter_weights(epsilon: f64) -> [f64; 6] {
    let (a, b) = (epsilon.powf(0.25), epsilon.powf(0.75));
    [a, a, b, b, 1.0, (1.0 / epsilon).ln()]
}

/// Leading-order graph of the interior over the deformed end:
/// -(t1 cos + t2 sin) / cosh s - (r1 cos + r2 sin) eps_l cosh s + d + delta s.
pub fn deformation_graph(
    end: &EndConfig,
    set: &DeformationSet,
    kappa: f64,
    s: f64,
    theta: f64,
) -> Result<f64> {
    set.check(kappa)?;
    end.check_collar(s)?;
    let p = set
        .ends
        .get(end.index)
        .ok_or_else(|| Error::Config(format!("no deformation for end {}", end.index)))?;
    Ok(graph_value(end.epsilon, p, s, theta))
}

pub(crate) fn graph_value(eps_l: f64, p: &EndDeformation, s: f64, theta: f64) -> f64 {
    let (sn, c) = theta.sin_cos();
    -(p.t1 * c + p.t2 * sn) / s.cosh() - (p.r1 * c + p.r2 * sn) * eps_l * s.cosh() + p.d + p.delta * s
}

/// s-jet (value, d/ds, d2/ds2, d/dtheta, d2/ds dtheta, d2/dtheta2) of the graph.
fn graph_jet(eps_l: f64, p: &EndDeformation, s: f64, theta: f64) -> [f64; 6] {
    let (sn, c) = theta.sin_cos();
    let (ch, sh) = (s.cosh(), s.sinh());
    let (a, at) = (p.t1 * c + p.t2 * sn, -p.t1 * sn + p.t2 * c);
    let (b, bt) = (p.r1 * c + p.r2 * sn, -p.r1 * sn + p.r2 * c);
    let sech = 1.0 / ch;
    let d1 = sh * sech * sech; // -(1/cosh)'
    let d2 = sech * (1.0 - 2.0 * (sh * sech).powi(2)); // -(1/cosh)''
    [
        -a * sech - b * eps_l * ch + p.d + p.delta * s,
        a * d1 - b * eps_l * sh + p.delta,
        a * d2 - b * eps_l * ch,
        -at * sech - bt * eps_l * ch,
        at * d1 - bt * eps_l * sh,
        a * sech + b * eps_l * ch,
    ]
}

/// Low-mode coefficients of the graph at s: [v_-1, v_0, v_1, s_-1, s_0, s_1].
pub(crate) fn graph_modes(eps_l: f64, p: &EndDeformation, s: f64) -> [f64; 6] {
    let x = p.to_array();
    let m = mode_matrix(eps_l, s);
    let mut out = [0.0; 6];
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..6).map(|c| m[r][c] * x[c]).sum();
    }
    out
}

/// Linear map from (t1, t2, r1, r2, d, delta) to the low-mode coefficients.
pub(crate) fn mode_matrix(eps_l: f64, s: f64) -> [[f64; 6]; 6] {
    let (rp, r2p) = (PI.sqrt(), (2.0 * PI).sqrt());
    let (ch, sh) = (s.cosh(), s.sinh());
    let (tv, ts) = (-rp / ch, rp * sh / (ch * ch));
    let (rv, rs) = (-rp * eps_l * ch, -rp * eps_l * sh);
    [
        [0.0, tv, 0.0, rv, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, r2p, r2p * s],
        [tv, 0.0, rv, 0.0, 0.0, 0.0],
        [0.0, ts, 0.0, rs, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, r2p],
        [ts, 0.0, rs, 0.0, 0.0, 0.0],
    ]
}

/// Smooth quintic step: 1 for x <= -3/2, 0 for x >= -1.
pub fn cutoff(x: f64) -> f64 {
    let t = ((x + 1.5) / 0.5).clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

fn cutoff_d(x: f64) -> f64 {
    if x <= -1.5 || x >= -1.0 {
        return 0.0;
    }
    let t = (x + 1.5) / 0.5;
    -30.0 * t * t * (1.0 - t) * (1.0 - t) / 0.5
}

/// The transverse field used near an end: the unit normal of
/// placed(x_D + eta(s - S/8) w0 nu_D), over the Delaunay end of necksize eps_l - delta.
pub struct DeformedNormal {
    pub profile: DelaunayProfile,
    pub end: EndConfig,
    pub deformation: EndDeformation,
}

impl DeformedNormal {
    pub fn new(end: &EndConfig, deformation: EndDeformation) -> Result<Self> {
        let params = NeckParams::new(end.epsilon - deformation.delta)?;
        let lo = end.interface - 2.0;
        let h: f64 = 1e-3;
        let n = ((2.0 / h).round() as usize) + 1;
        let profile = DelaunayProfile::on_grid(params, lo, h, n)?;
        Ok(DeformedNormal { profile, end: end.clone(), deformation })
    }

    /// Field in the end frame at collar coordinates (s, theta).
    pub fn eval(&self, s: f64, theta: f64) -> Result<V3> {
        self.end.check_collar(s)?;
        let p = self.profile.eval(s)?;
        let tau = self.profile.params.tau;
        let x = delaunay_jet(tau, &p, theta);
        let nu = delaunay_normal_jet(tau, &p, theta);
        let off = s - self.end.interface;
        let (eta, eta_s) = (cutoff(off), cutoff_d(off));
        let g = graph_jet(self.end.epsilon, &self.deformation, s, theta);
        let (f, f_s, f_t) = (eta * g[0], eta_s * g[0] + eta * g[1], eta * g[3]);
        let y1 = x.x1 + f_s * nu.x + f * nu.x1;
        let y2 = x.x2 + f_t * nu.x + f * nu.x2;
        let (rot, _) = self.deformation.placement();
        let c = y1.cross(&y2);
        Ok(rot * (c / c.norm()))
    }
}

/// Angular grid shared by the residual reports.
pub(crate) fn theta_grid() -> Vec<f64> {
    (0..THETA_POINTS).map(|k| 2.0 * PI * k as f64 / THETA_POINTS as f64).collect()
}

#[cfg(test)]
mod tests;
