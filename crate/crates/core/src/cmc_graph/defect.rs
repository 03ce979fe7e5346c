//! Mean curvature of normal graphs given by mode fields, and the nonlinear defect.

use crate::bvp::{derivative, AngularTable, ModeField, THETA_POINTS};
use crate::delaunay::DelaunayProfile;
use crate::geometry::patches::{catenoid_normal_jet, delaunay_jet, delaunay_normal_jet};
use crate::geometry::{graph_mean_curvature, Jet, ScalarJet, V3};
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Rows whose summed mode size |w| + |w'| + |w''| is below this carry a zero defect.
const NEGLIGIBLE: f64 = 1e-150;
/// Rows whose weighted quadratic size e^{mu (s - s0)} size^2 / conformal is below
/// this carry a zero defect when a decay weight is supplied.
const WEIGHTED_NEGLIGIBLE: f64 = 1e-16;
/// Rows smaller than this are evaluated on lambda w with lambda = SMALL / size and the
/// defect divided by lambda^2: H - 1 has absolute roundoff near 1e-16, which would swamp
/// the quadratic defect once the graph falls below 1e-8.
const SMALL: f64 = 1e-4;

/// A surface with analytic position and unit-normal jets on a uniform s-grid.
///
/// The operator L w = w'' + w_theta_theta + potential * w is `conformal` times
/// the linearized mean curvature.
pub(crate) trait GraphBase: Sync {
    fn s0(&self) -> f64;
    fn h(&self) -> f64;
    fn len(&self) -> usize;
    fn jets(&self, i: usize, theta: f64) -> (Jet, Jet);
    fn conformal(&self, i: usize) -> f64;
    fn potential(&self, i: usize) -> f64;
    /// Mean curvature of the base itself.
    fn base_h(&self) -> f64;
}

/// Delaunay profile rows starting at index `offset`.
pub(crate) struct DelaunayBase<'a> {
    pub profile: &'a DelaunayProfile,
    pub offset: usize,
}

impl GraphBase for DelaunayBase<'_> {
    fn s0(&self) -> f64 {
        self.profile.grid[self.offset]
    }
    fn h(&self) -> f64 {
        self.profile.step()
    }
    fn len(&self) -> usize {
        self.profile.len() - self.offset
    }
    fn jets(&self, i: usize, theta: f64) -> (Jet, Jet) {
        let p = self.profile.point(i + self.offset);
        let tau = self.profile.params.tau;
        (delaunay_jet(tau, &p, theta), delaunay_normal_jet(tau, &p, theta))
    }
    fn conformal(&self, i: usize) -> f64 {
        self.profile.conformal(i + self.offset)
    }
    fn potential(&self, i: usize) -> f64 {
        self.profile.potential(i + self.offset)
    }
    fn base_h(&self) -> f64 {
        1.0
    }
}

/// The catenoid a (cosh s cos theta, cosh s sin theta, s) on s0 + i h.
pub(crate) struct CatenoidBase {
    pub a: f64,
    pub s0: f64,
    pub h: f64,
    pub n: usize,
}

impl GraphBase for CatenoidBase {
    fn s0(&self) -> f64 {
        self.s0
    }
    fn h(&self) -> f64 {
        self.h
    }
    fn len(&self) -> usize {
        self.n
    }
    fn jets(&self, i: usize, theta: f64) -> (Jet, Jet) {
        let s = self.s0 + i as f64 * self.h;
        let (ch, sh) = (s.cosh(), s.sinh());
        let (sn, c) = theta.sin_cos();
        let a = self.a;
        let x = Jet {
            x: a * V3::new(ch * c, ch * sn, s),
            x1: a * V3::new(sh * c, sh * sn, 1.0),
            x2: a * V3::new(-ch * sn, ch * c, 0.0),
            x11: a * V3::new(ch * c, ch * sn, 0.0),
            x12: a * V3::new(-sh * sn, sh * c, 0.0),
            x22: a * V3::new(-ch * c, -ch * sn, 0.0),
        };
        (x, catenoid_normal_jet(s, theta))
    }
    fn conformal(&self, i: usize) -> f64 {
        let s = self.s0 + i as f64 * self.h;
        (self.a * s.cosh()).powi(2)
    }
    fn potential(&self, i: usize) -> f64 {
        let s = self.s0 + i as f64 * self.h;
        2.0 / s.cosh().powi(2)
    }
    fn base_h(&self) -> f64 {
        0.0
    }
}

/// Defect of one evaluation pass.
#[derive(Clone, Debug)]
pub(crate) struct Defect {
    /// Q(w) = L w - conformal (H(x_w) - H_base), projected on |j| <= jmax.
    pub q: ModeField,
    /// Energy of the projected defect that falls beyond jmax.
    pub aliased: f64,
}


struct Rows<'a> {
    w: &'a ModeField,
    table: AngularTable,
    active: Vec<usize>,
    d1: Vec<Vec<f64>>,
    d2: Vec<Vec<f64>>,
}

impl<'a> Rows<'a> {
    fn new(w: &'a ModeField) -> Self {
        let active = w.active_modes();
        let (d1, d2) = active.iter().map(|&m| derivative(&w.values[m], w.h)).unzip();
        Rows { w, table: AngularTable::new(w.jmax), active, d1, d2 }
    }

    fn size(&self, i: usize) -> f64 {
        (0..self.active.len())
            .map(|a| self.w.values[self.active[a]][i].abs() + self.d1[a][i].abs() + self.d2[a][i].abs())
            .sum()
    }

    fn jet(&self, i: usize, k: usize, scale: f64) -> ScalarJet {
        let mut s = ScalarJet::default();
        for (a, &m) in self.active.iter().enumerate() {
            let (c, ct) = (self.table.c(k, m), self.table.ct(k, m));
            let (v, v1, v2) = (self.w.values[m][i], self.d1[a][i], self.d2[a][i]);
            s.w += v * c;
            s.w1 += v1 * c;
            s.w2 += v * ct;
            s.w11 += v2 * c;
            s.w12 += v1 * ct;
            s.w22 -= self.table.j2[m] * v * c;
        }
        ScalarJet {
            w: scale * s.w,
            w1: scale * s.w1,
            w2: scale * s.w2,
            w11: scale * s.w11,
            w12: scale * s.w12,
            w22: scale * s.w22,
        }
    }
}

fn check_grid<B: GraphBase>(base: &B, w: &ModeField) -> Result<()> {
    if w.len() > base.len() || (w.h - base.h()).abs() > 1e-12 || (w.s0 - base.s0()).abs() > 1e-9 {
        return Err(Error::Domain("mode field grid does not match the base surface".into()));
    }
    Ok(())
}

fn mean_curvature_at<B: GraphBase>(base: &B, i: usize, theta: f64, wj: &ScalarJet, s: f64) -> Result<f64> {
    let (x, n) = base.jets(i, theta);
    graph_mean_curvature(&x, &n, wj, 1.0).ok_or(Error::Degenerate { u1: s, u2: theta, det: 0.0 })
}

/// Nonlinear defect of the graph of w, evaluated on the angular grid.
///
/// With `decay = Some((mu, s0))` rows far enough out that the weighted defect is
/// negligible are skipped.
pub(crate) fn evaluate_defect<B: GraphBase>(base: &B, w: &ModeField, decay: Option<(f64, f64)>) -> Result<Defect> {
    check_grid(base, w)?;
    let rows = Rows::new(w);
    let dth = 2.0 * PI / THETA_POINTS as f64;
    let nm = rows.table.nm;
    let mut q = ModeField::zeros(w.s0, w.h, w.len(), w.jmax);
    let mut aliased: f64 = 0.0;
    if rows.active.is_empty() {
        return Ok(Defect { q, aliased });
    }
    let per_row: Vec<(Vec<f64>, f64)> = (0..w.len())
        .into_par_iter()
        .map(|i| {
            let mut coeffs = vec![0.0; nm];
            let size = rows.size(i);
            let c = base.conformal(i);
            let skip = size < NEGLIGIBLE
                || decay.is_some_and(|(mu, s0)| (mu * (w.s(i) - s0)).exp() * size * size / c < WEIGHTED_NEGLIGIBLE);
            if skip {
                return Ok((coeffs, 0.0));
            }
            let s = w.s(i);
            let v = base.potential(i);
            let lam = (SMALL / size).max(1.0);
            let mut energy = 0.0;
            for (k, &th) in rows.table.thetas.iter().enumerate() {
                let wj = rows.jet(i, k, lam);
                let hm = mean_curvature_at(base, i, th, &wj, s)?;
                let qv = (wj.w11 + wj.w22 + v * wj.w - c * (hm - base.base_h())) / (lam * lam);
                energy += qv * qv * dth;
                for (m, cm) in coeffs.iter_mut().enumerate() {
                    *cm += qv * rows.table.c(k, m) * dth;
                }
            }
            let kept: f64 = coeffs.iter().map(|x| x * x).sum();
            Ok((coeffs, (energy - kept).max(0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, (coeffs, e)) in per_row.into_iter().enumerate() {
        for (m, c) in coeffs.into_iter().enumerate() {
            q.values[m][i] = c;
        }
        aliased = aliased.max(e);
    }
    Ok(Defect { q, aliased })
}

/// sup |H(x_w) - target| over rows [0, rows) and the angular grid.
pub(crate) fn h_deviation<B: GraphBase>(base: &B, w: &ModeField, rows_end: usize, target: f64) -> Result<f64> {
    h_deviation_rows(base, w, 0, rows_end, target)
}

/// sup |H(x_w) - target| over rows [start, end).
pub(crate) fn h_deviation_rows<B: GraphBase>(
    base: &B,
    w: &ModeField,
    start: usize,
    end: usize,
    target: f64,
) -> Result<f64> {
    check_grid(base, w)?;
    let rows = Rows::new(w);
    let per_row = (start..end.min(w.len()))
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for (k, &th) in rows.table.thetas.iter().enumerate() {
                let wj = rows.jet(i, k, 1.0);
                worst = worst.max((mean_curvature_at(base, i, th, &wj, w.s(i))? - target).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_row.into_iter().fold(0.0, f64::max))
}
