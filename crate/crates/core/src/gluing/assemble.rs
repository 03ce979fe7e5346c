//! End-to-end assembly of a two-ended glued surface.

use super::fit::{best_fit_delaunay, BestFitDelaunay, FitOptions};
use super::interior::{interior_solve, InteriorModel, InteriorSolution};
use super::matching::{dtn_maps, end_cylinder, match_high_modes, match_low_modes, MatchOptions};
use super::collar::PlacedEnd;
use super::{graph_modes, is_catenoid_pair, theta_grid, DeformationSet, EndConfig, EndDeformation, GlueConfig};
use crate::bvp::{derivative, BoundaryData, ModeField};
use crate::cmc_graph::{cauchy_data, solve_graph, CauchyData, GraphOptions, GRAPH_JMAX};
use crate::delaunay::{period_s, DelaunayProfile, NeckParams};
use crate::geometry::{
    export_obj_objects, sample_mesh, CatenoidPatch, DelaunayPatch, Moved, NormalGraphPatch, ScalarField,
    ScalarJet, SurfaceMesh,
};
use crate::jacobi::{chi, chi_theta};
use crate::output::write_json;
use crate::{Error, Result};
use serde::Serialize;
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GlueOptions {
    pub graph: GraphOptions,
    pub matching: MatchOptions,
    pub fit: FitOptions,
    /// Rows of the interior mesh.
    pub interior_rows: usize,
    /// Rows of each end mesh.
    pub end_rows: usize,
    pub theta_points: usize,
    /// Length of each end mesh in periods S.
    pub end_periods: f64,
    /// Alternations of high- and low-mode matching.
    pub rounds: usize,
}

impl Default for GlueOptions {
    fn default() -> Self {
        GlueOptions {
            graph: GraphOptions::default(),
            matching: MatchOptions::default(),
            fit: FitOptions::default(),
            interior_rows: 41,
            end_rows: 81,
            theta_points: 32,
            end_periods: 1.0,
            rounds: 4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeMismatch {
    pub end: usize,
    pub j: i32,
    pub value: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlueReport {
    pub epsilon: f64,
    pub kappa: f64,
    pub mu: f64,
    pub interface: f64,
    pub rounds: usize,
    pub high_iterations: usize,
    pub phi_norm: f64,
    /// ||phi|| / (eps^{2 kappa - 1} + eps^{3/2}).
    pub phi_ratio: f64,
    pub deformation: DeformationSet,
    pub deformation_norm: f64,
    /// eps^kappa
    pub deformation_bound: f64,
    pub low_iterations: usize,
    pub condition: Vec<f64>,
    pub interior_iterations: usize,
    pub interior_updates: Vec<f64>,
    pub mismatch: Vec<ModeMismatch>,
    pub max_value_mismatch: f64,
    pub max_slope_mismatch: f64,
    /// sup |H - 1| over the interior mesh.
    pub h_interior: f64,
    /// sup |H - 1| over the end meshes.
    pub h_ends: f64,
    /// sup |H - 1| over all pieces.
    pub h_max: f64,
    /// sup |H - 1| over all pieces outside a unit collar of the interface.
    pub h_away: f64,
    /// Largest distance between the interior and end boundary circles.
    pub interface_gap: f64,
    pub best_fit: BestFitDelaunay,
}

#[derive(Clone, Debug)]
pub struct GluedSurface {
    pub report: GlueReport,
    pub phi: Vec<BoundaryData>,
    pub interior_mesh: SurfaceMesh,
    pub end_meshes: Vec<SurfaceMesh>,
}

/// Graph function from mode samples; jets from fourth-order differences,
/// linear in s between grid rows.
struct ModeGraph {
    w: ModeField,
    d1: Vec<Vec<f64>>,
    d2: Vec<Vec<f64>>,
}

impl ModeGraph {
    fn new(w: ModeField) -> Self {
        let (d1, d2) = w.values.iter().map(|v| derivative(v, w.h)).unzip();
        ModeGraph { w, d1, d2 }
    }

    fn row_jet(&self, i: usize, th: f64) -> ScalarJet {
        let mut s = ScalarJet::default();
        for (m, j) in (-self.w.jmax..=self.w.jmax).enumerate() {
            let v = self.w.values[m][i];
            if v == 0.0 && self.d1[m][i] == 0.0 && self.d2[m][i] == 0.0 {
                continue;
            }
            let (c, ct) = (chi(j, th), chi_theta(j, th));
            s.w += v * c;
            s.w1 += self.d1[m][i] * c;
            s.w2 += v * ct;
            s.w11 += self.d2[m][i] * c;
            s.w12 += self.d1[m][i] * ct;
            s.w22 -= (j * j) as f64 * v * c;
        }
        s
    }
}

impl ScalarField for ModeGraph {
    fn value(&self, s: f64, th: f64) -> f64 {
        self.jet(s, th).map_or(0.0, |j| j.w)
    }

    fn jet(&self, s: f64, th: f64) -> Option<ScalarJet> {
        let n = self.w.len();
        let x = ((s - self.w.s0) / self.w.h).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 1);
        let t = x - i as f64;
        if t < 1e-9 || i + 1 >= n {
            return Some(self.row_jet(i, th));
        }
        if t > 1.0 - 1e-9 {
            return Some(self.row_jet(i + 1, th));
        }
        let (a, b) = (self.row_jet(i, th), self.row_jet(i + 1, th));
        let mix = |p: f64, q: f64| (1.0 - t) * p + t * q;
        Some(ScalarJet {
            w: mix(a.w, b.w),
            w1: mix(a.w1, b.w1),
            w2: mix(a.w2, b.w2),
            w11: mix(a.w11, b.w11),
            w12: mix(a.w12, b.w12),
            w22: mix(a.w22, b.w22),
        })
    }
}

/// Low-mode (interior - end) data minus the leading-order graph.
fn low_mismatch(interior: &CauchyData, end: &CauchyData, lead: [f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (k, j) in (-1..=1).enumerate() {
        out[k] = interior.values.get(j) - end.values.get(j) - lead[k];
        out[3 + k] = interior.slopes.get(j) - end.slopes.get(j) - lead[3 + k];
    }
    out
}

struct EndSide {
    /// Graph of the end over the catenoid at the interface, in modes.
    data: CauchyData,
    /// High-mode graph over the Delaunay end, when the matched data is nonzero.
    graph: Option<ModeField>,
    /// Mean Delaunay parameter of the interface circle.
    start: f64,
}

/// Exact normal offset of the placed end plus the Cauchy data of its graph solution.
fn end_side(end: &EndConfig, p: &EndDeformation, phi: &BoundaryData, mu: f64, opts: &GraphOptions) -> Result<EndSide> {
    let (mut data, start) = PlacedEnd::new(end, p)?.cauchy(end.interface, GRAPH_JMAX)?;
    let mut graph = None;
    if phi.high_part().norm() > 0.0 {
        let half = end_cylinder(end, p)?;
        let sol = solve_graph(&half, &phi.high_part(), mu, opts)?;
        let c = cauchy_data(&sol);
        data.values = data.values.sub(&c.values.scaled(-1.0));
        data.slopes = data.slopes.sub(&c.slopes.scaled(-1.0));
        graph = Some(sol.w);
    }
    Ok(EndSide { data, graph, start })
}

/// Match and assemble the two-ended surface of `config`.
pub fn assemble_glued(config: &GlueConfig, opts: &GlueOptions) -> Result<GluedSurface> {
    let ends = config.end_configs()?;
    if !is_catenoid_pair(&ends) {
        return Err(Error::Config("assembly supports two opposite ends of equal weight only".into()));
    }
    let (eps, kappa, mu) = (config.epsilon, config.kappa, config.mu);
    let mut set = DeformationSet::zeros(eps, ends.len());
    let mut rounds = 0;
    let mut high_iterations = 0;
    let mut phi = vec![BoundaryData::zeros(GRAPH_JMAX); ends.len()];
    let mut low = None;
    for _ in 0..opts.rounds.max(1) {
        rounds += 1;
        let hm = {
            let maps = dtn_maps(&ends, &set, mu, InteriorModel::Nonlinear, &opts.graph)?;
            match_high_modes(&maps, &opts.matching)?
        };
        high_iterations = hm.iterations;
        phi = hm.phi;
        let interior = interior_solve(&ends, &phi, mu, InteriorModel::Nonlinear, &opts.graph)?;
        let mismatch = |trial: &DeformationSet| -> Result<Vec<[f64; 6]>> {
            ends.iter()
                .map(|e| {
                    let p = &trial.ends[e.index];
                    let side = end_side(e, p, &phi[e.index], mu, &opts.graph)?;
                    let lead = graph_modes(e.epsilon, p, e.interface);
                    Ok(low_mismatch(&interior.cauchy[e.index], &side.data, lead))
                })
                .collect()
        };
        let lm = match_low_modes(eps, &ends, kappa, &mismatch)?;
        let change = set
            .ends
            .iter()
            .zip(&lm.deformation.ends)
            .flat_map(|(a, b)| a.to_array().into_iter().zip(b.to_array()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        set = lm.deformation.clone();
        low = Some(lm);
        if change <= 1e-13 {
            break;
        }
    }
    let low = low.expect("at least one matching round");
    let interior = interior_solve(&ends, &phi, mu, InteriorModel::Nonlinear, &opts.graph)?;
    let sides = ends
        .iter()
        .map(|e| end_side(e, &set.ends[e.index], &phi[e.index], mu, &opts.graph))
        .collect::<Result<Vec<_>>>()?;

    let mut mismatch = Vec::new();
    let mut gap: f64 = 0.0;
    for e in &ends {
        let (ic, ec) = (&interior.cauchy[e.index], &sides[e.index].data);
        let diff = ic.values.sub(&ec.values);
        gap = theta_grid().into_iter().map(|t| diff.eval(t).abs()).fold(gap, f64::max);
        for j in -GRAPH_JMAX..=GRAPH_JMAX {
            mismatch.push(ModeMismatch {
                end: e.index,
                j,
                value: ic.values.get(j) - ec.values.get(j),
                slope: ic.slopes.get(j) - ec.slopes.get(j),
            });
        }
    }
    let max_value_mismatch = mismatch.iter().map(|m| m.value.abs()).fold(0.0, f64::max);
    let max_slope_mismatch = mismatch.iter().map(|m| m.slope.abs()).fold(0.0, f64::max);

    let (interior_mesh, end_meshes) = build_meshes(&ends, &set, &interior, &sides, opts)?;
    let s_i = ends[0].interface;
    let h_of = |m: &SurfaceMesh, keep: &dyn Fn(f64) -> bool| {
        m.mean_curvature
            .iter()
            .zip(&m.params)
            .filter(|(_, p)| keep(p[0]))
            .map(|(h, _)| (h - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let h_interior = h_of(&interior_mesh, &|_| true);
    let h_ends = end_meshes.iter().map(|m| h_of(m, &|_| true)).fold(0.0, f64::max);
    let away_in = h_of(&interior_mesh, &|s| s.abs() <= s_i - 1.0);
    let away_end = end_meshes.iter().map(|m| h_of(m, &|s| s >= s_i + 1.0)).fold(0.0, f64::max);

    let base = ends[0].base;
    let mut points: Vec<[f64; 3]> = Vec::new();
    for m in std::iter::once(&interior_mesh).chain(&end_meshes) {
        points.extend(m.vertices.iter().map(|v| [v[0] - base.x, v[1] - base.y, v[2] - base.z]));
    }
    let axis = ends[0].axis;
    let best_fit = best_fit_delaunay(&points, eps * ends[0].weight, [axis.x, axis.y, axis.z], &opts.fit)?;

    let phi_norm = phi.iter().map(|p| p.norm().powi(2)).sum::<f64>().sqrt();
    let report = GlueReport {
        epsilon: eps,
        kappa,
        mu,
        interface: s_i,
        rounds,
        high_iterations,
        phi_norm,
        phi_ratio: phi_norm / (eps.powf(2.0 * kappa - 1.0) + eps.powf(1.5)),
        deformation_norm: set.norm(),
        deformation_bound: eps.powf(kappa),
        deformation: set,
        low_iterations: low.iterations,
        condition: low.condition,
        interior_iterations: interior.iterations,
        interior_updates: interior.updates.clone(),
        mismatch,
        max_value_mismatch,
        max_slope_mismatch,
        h_interior,
        h_ends,
        h_max: h_interior.max(h_ends),
        h_away: away_in.max(away_end),
        interface_gap: gap,
        best_fit,
    };
    Ok(GluedSurface { report, phi, interior_mesh, end_meshes })
}


fn build_meshes(
    ends: &[EndConfig],
    set: &DeformationSet,
    interior: &InteriorSolution,
    sides: &[EndSide],
    opts: &GlueOptions,
) -> Result<(SurfaceMesh, Vec<SurfaceMesh>)> {
    let e0 = &ends[0];
    let s_i = e0.interface;
    let w = interior.w.clone().ok_or_else(|| Error::Numerical("interior graph missing".into()))?;
    let graph = ModeGraph::new(w);
    let cat = CatenoidPatch { a: e0.epsilon, s_range: (-s_i, s_i) };
    let inner = NormalGraphPatch::new(cat, &graph);
    let interior_patch = Moved { inner, rotation: e0.rotation, translation: e0.base };
    let interior_mesh = sample_mesh(&interior_patch, opts.interior_rows, opts.theta_points)?;

    let mut end_meshes = Vec::new();
    for e in ends {
        let p = &set.ends[e.index];
        let side = &sides[e.index];
        let params = NeckParams::new(e.epsilon - p.delta)?;
        let period = period_s(params)?;
        // mesh rows on profile grid nodes
        let len = opts.end_periods * period;
        let rows = opts.end_rows.max(2) - 1;
        let per_row = (len / ((period / 4000.0).min(0.01) * rows as f64)).ceil() as usize;
        let n = rows * per_row + 1;
        let step = len / (n - 1) as f64;
        let profile = Arc::new(DelaunayProfile::on_grid(params, side.start, step, n)?);
        let w = match &side.graph {
            Some(w) => w.truncated(n.min(w.len())),
            None => ModeField::zeros(s_i, step, n, 2),
        };
        let graph = ModeGraph::new(w);
        let patch = DelaunayPatch::with_range(profile, side.start, side.start + (n - 1) as f64 * step)?;
        let (r, b) = p.placement();
        let moved = Moved {
            inner: NormalGraphPatch::new(patch, &graph),
            rotation: e.rotation * r,
            translation: e.rotation * b + e.base,
        };
        end_meshes.push(sample_mesh(&moved, opts.end_rows, opts.theta_points)?);
    }
    Ok((interior_mesh, end_meshes))
}

/// Write `glued.obj` (objects interior, end_1, end_2, ...) and `residual.json`.
pub fn write_glued(surface: &GluedSurface, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let names: Vec<String> = (1..=surface.end_meshes.len()).map(|i| format!("end_{i}")).collect();
    let mut pieces: Vec<(&str, &SurfaceMesh)> = vec![("interior", &surface.interior_mesh)];
    for (n, m) in names.iter().zip(&surface.end_meshes) {
        pieces.push((n.as_str(), m));
    }
    export_obj_objects(&pieces, &dir.join("glued.obj"))?;
    write_json(&dir.join("residual.json"), &surface.report)
}
