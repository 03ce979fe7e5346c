//! Linear Green and Poisson operators of the Jacobi operator on half-Delaunay
//! cylinders [s0, s_far] x S^1, mode by mode.

mod solve;

pub(crate) use solve::{green_field, thomas};
pub use solve::{flat_poisson, green_apply, poisson_apply, poisson_deviation, BvpSolution};

use crate::delaunay::{period_s, DelaunayProfile, NeckParams};
use crate::jacobi::{chi, chi_theta, floquet};
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

pub const DEFAULT_JMAX: i32 = 12;
/// Angular sample count for reassembled fields.
pub const THETA_POINTS: usize = 64;

/// True for the modes j in {-1, 0, 1}.
pub fn is_low(j: i32) -> bool {
    j.abs() <= 1
}

/// Coefficients phi_j, |j| <= jmax, of data on the interface circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryData {
    pub jmax: i32,
    pub coeffs: Vec<f64>,
}

impl BoundaryData {
    pub fn zeros(jmax: i32) -> Self {
        BoundaryData { jmax, coeffs: vec![0.0; (2 * jmax + 1) as usize] }
    }

    pub fn single(jmax: i32, j: i32, value: f64) -> Self {
        let mut b = Self::zeros(jmax);
        b.set(j, value);
        b
    }

    pub fn get(&self, j: i32) -> f64 {
        if j.abs() > self.jmax {
            0.0
        } else {
            self.coeffs[(j + self.jmax) as usize]
        }
    }

    pub fn set(&mut self, j: i32, value: f64) {
        assert!(j.abs() <= self.jmax, "mode {j} beyond jmax {}", self.jmax);
        self.coeffs[(j + self.jmax) as usize] = value;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i32 - self.jmax, c))
    }

    pub fn has_low_modes(&self) -> bool {
        (-1..=1).any(|j| self.get(j) != 0.0)
    }

    pub fn high_part(&self) -> Self {
        let mut b = self.clone();
        for j in -1..=1 {
            b.set(j, 0.0);
        }
        b
    }

    /// l2 norm of the orthonormal coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, a: f64) -> Self {
        BoundaryData { jmax: self.jmax, coeffs: self.coeffs.iter().map(|c| a * c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        BoundaryData {
            jmax: self.jmax,
            coeffs: (-self.jmax..=self.jmax).map(|j| self.get(j) - other.get(j)).collect(),
        }
    }

    /// Coefficients of u(theta - theta0).
    pub fn rotated(&self, theta0: f64) -> Self {
        let mut out = self.clone();
        for j in 1..=self.jmax {
            let (a, b) = (self.get(j), self.get(-j));
            let (sn, cs) = (j as f64 * theta0).sin_cos();
            out.set(j, a * cs - b * sn);
            out.set(-j, a * sn + b * cs);
        }
        out
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.modes().map(|(j, c)| c * chi(j, theta)).sum()
    }
}

/// Per-mode samples on the uniform grid s0 + i h.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeField {
    pub s0: f64,
    pub h: f64,
    pub jmax: i32,
    pub values: Vec<Vec<f64>>,
}

impl ModeField {
    pub fn zeros(s0: f64, h: f64, n: usize, jmax: i32) -> Self {
        ModeField { s0, h, jmax, values: vec![vec![0.0; n]; (2 * jmax + 1) as usize] }
    }

    /// Field with w_j(s) = f(j, s).
    pub fn from_fn(s0: f64, h: f64, n: usize, jmax: i32, f: impl Fn(i32, f64) -> f64) -> Self {
        let values = (-jmax..=jmax)
            .map(|j| (0..n).map(|i| f(j, s0 + i as f64 * h)).collect())
            .collect();
        ModeField { s0, h, jmax, values }
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    /// Indices (into `values`) of the modes that are not identically zero.
    pub fn active_modes(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&m| self.values[m].iter().any(|&v| v != 0.0)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.values[0].is_empty()
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s0 + i as f64 * self.h
    }

    pub fn mode(&self, j: i32) -> &[f64] {
        &self.values[(j + self.jmax) as usize]
    }

    pub fn mode_mut(&mut self, j: i32) -> &mut Vec<f64> {
        &mut self.values[(j + self.jmax) as usize]
    }

    pub fn trace(&self, i: usize) -> BoundaryData {
        BoundaryData { jmax: self.jmax, coeffs: self.values.iter().map(|v| v[i]).collect() }
    }

    /// s-derivative samples of mode j.
    pub fn slope(&self, j: i32) -> Vec<f64> {
        derivative(self.mode(j), self.h).0
    }

    pub fn slope_trace(&self, i: usize) -> BoundaryData {
        let coeffs = (-self.jmax..=self.jmax).map(|j| derivative(self.mode(j), self.h).0[i]).collect();
        BoundaryData { jmax: self.jmax, coeffs }
    }

    /// Rows with supremum over the grid of |a - b|.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (u, v) in self.values.iter_mut().zip(&x.values) {
            for (p, q) in u.iter_mut().zip(v) {
                *p += a * q;
            }
        }
    }

    /// Restrict to the first n grid points.
    pub fn truncated(&self, n: usize) -> Self {
        let values = self.values.iter().map(|v| v[..n.min(v.len())].to_vec()).collect();
        ModeField { values, ..*self }
    }

    /// Field with the modes above `jmax` removed (or zero-padded).
    pub fn with_jmax(&self, jmax: i32) -> Self {
        let n = self.len();
        let values = (-jmax..=jmax)
            .map(|j| if j.abs() <= self.jmax { self.mode(j).to_vec() } else { vec![0.0; n] })
            .collect();
        ModeField { values, jmax, ..*self }
    }

    /// Value at grid index i and angle theta.
    pub fn eval(&self, i: usize, theta: f64) -> f64 {
        (-self.jmax..=self.jmax).map(|j| self.mode(j)[i] * chi(j, theta)).sum()
    }
}

// One-sided seven-point stencils at offsets 0..6 (row 0) and -1..5 (row 1).
const EDGE0_D1: [f64; 7] = [-49.0 / 20.0, 6.0, -15.0 / 2.0, 20.0 / 3.0, -15.0 / 4.0, 6.0 / 5.0, -1.0 / 6.0];
const EDGE0_D2: [f64; 7] = [203.0 / 45.0, -87.0 / 5.0, 117.0 / 4.0, -254.0 / 9.0, 33.0 / 2.0, -27.0 / 5.0, 137.0 / 180.0];
const EDGE1_D1: [f64; 7] = [-1.0 / 6.0, -77.0 / 60.0, 5.0 / 2.0, -5.0 / 3.0, 5.0 / 6.0, -1.0 / 4.0, 1.0 / 30.0];
const EDGE1_D2: [f64; 7] = [137.0 / 180.0, -49.0 / 60.0, -17.0 / 12.0, 47.0 / 18.0, -19.0 / 12.0, 31.0 / 60.0, -13.0 / 180.0];

/// Fourth-order central first and second differences; one-sided seven-point
/// stencils on the two rows at each end.
pub fn derivative(w: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = w.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    if n < 7 {
        return (d1, d2);
    }
    for i in 2..n - 2 {
        d1[i] = (w[i - 2] - 8.0 * w[i - 1] + 8.0 * w[i + 1] - w[i + 2]) / (12.0 * h);
        d2[i] = (-w[i - 2] + 16.0 * w[i - 1] - 30.0 * w[i] + 16.0 * w[i + 1] - w[i + 2]) / (12.0 * h * h);
    }
    let dot = |c: &[f64; 7], f: &dyn Fn(usize) -> f64| (0..7).map(|k| c[k] * f(k)).sum::<f64>();
    let head = |k: usize| w[k];
    let tail = |k: usize| w[n - 1 - k];
    d1[0] = dot(&EDGE0_D1, &head) / h;
    d2[0] = dot(&EDGE0_D2, &head) / (h * h);
    d1[1] = dot(&EDGE1_D1, &head) / h;
    d2[1] = dot(&EDGE1_D2, &head) / (h * h);
    d1[n - 1] = -dot(&EDGE0_D1, &tail) / h;
    d2[n - 1] = dot(&EDGE0_D2, &tail) / (h * h);
    d1[n - 2] = -dot(&EDGE1_D1, &tail) / h;
    d2[n - 2] = dot(&EDGE1_D2, &tail) / (h * h);
    (d1, d2)
}

/// Discrete weighted norm sup e^{mu (s - s0)} sum of |partials| up to `order`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeightedNorm {
    pub mu: f64,
    pub s0: f64,
    pub order: u8,
}

impl WeightedNorm {
    pub fn new(mu: f64, s0: f64, order: u8) -> Result<Self> {
        check_mu(mu)?;
        if order > 2 {
            return Err(Error::Domain(format!("norm order {order} > 2")));
        }
        Ok(WeightedNorm { mu, s0, order })
    }

    pub fn eval(&self, w: &ModeField) -> f64 {
        weighted_sup(w, self.order, |s| (self.mu * (s - self.s0)).exp())
    }
}

/// sup over the grid and the angular grid of weight(s) times the summed
/// |partials| of w up to `order`.
pub(crate) fn weighted_sup(w: &ModeField, order: u8, weight: impl Fn(f64) -> f64) -> f64 {
    let active = w.active_modes();
    if active.is_empty() {
        return 0.0;
    }
    let table = AngularTable::new(w.jmax);
    let ders: Vec<(Vec<f64>, Vec<f64>)> = active.iter().map(|&m| derivative(&w.values[m], w.h)).collect();
    let terms = match order {
        0 => 1,
        1 => 3,
        _ => 6,
    };
    let mut best: f64 = 0.0;
    for i in 0..w.len() {
        let wt = weight(w.s(i));
        for k in 0..THETA_POINTS {
            let mut p = [0.0; 6];
            for (a, &m) in active.iter().enumerate() {
                let (v, d1, d2) = (w.values[m][i], ders[a].0[i], ders[a].1[i]);
                let (c, ct, j2) = (table.c(k, m), table.ct(k, m), table.j2[m]);
                p[0] += v * c;
                p[1] += d1 * c;
                p[2] += v * ct;
                p[3] += d2 * c;
                p[4] += d1 * ct;
                p[5] -= v * j2 * c;
            }
            let total: f64 = p[..terms].iter().map(|x| x.abs()).sum();
            best = best.max(wt * total);
        }
    }
    best
}

/// chi_j and d/dtheta chi_j on the angular grid, for |j| <= jmax.
pub(crate) struct AngularTable {
    pub nm: usize,
    pub thetas: Vec<f64>,
    pub j2: Vec<f64>,
    c: Vec<f64>,
    ct: Vec<f64>,
}

impl AngularTable {
    pub fn new(jmax: i32) -> Self {
        let js: Vec<i32> = (-jmax..=jmax).collect();
        let nm = js.len();
        let thetas: Vec<f64> = (0..THETA_POINTS).map(|k| 2.0 * PI * k as f64 / THETA_POINTS as f64).collect();
        let mut c = Vec::with_capacity(nm * THETA_POINTS);
        let mut ct = Vec::with_capacity(nm * THETA_POINTS);
        for &t in &thetas {
            for &j in &js {
                c.push(chi(j, t));
                ct.push(chi_theta(j, t));
            }
        }
        let j2 = js.iter().map(|&j| (j * j) as f64).collect();
        AngularTable { nm, thetas, j2, c, ct }
    }

    #[inline]
    pub fn c(&self, k: usize, m: usize) -> f64 {
        self.c[k * self.nm + m]
    }

    #[inline]
    pub fn ct(&self, k: usize, m: usize) -> f64 {
        self.ct[k * self.nm + m]
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 1.0 && mu < 2.0) {
        return Err(Error::Domain(format!("weight mu = {mu} outside (1, 2)")));
    }
    Ok(())
}

/// Profile on [s0, s_far] together with the decay rates of the high modes.
#[derive(Clone, Debug)]
pub struct HalfCylinder {
    pub profile: DelaunayProfile,
    pub s0: f64,
    pub s_far: f64,
    pub jmax: i32,
    /// gamma_j for |j| = 2..=jmax.
    pub gammas: Vec<f64>,
}

impl HalfCylinder {
    /// Default truncation s_far = s0 + max(4 S, 40), step min(0.01, S/4000).
    pub fn new(params: NeckParams, s0: f64, jmax: i32) -> Result<Self> {
        let len = if params.is_cylinder() { 40.0 } else { (4.0 * period_s(params)?).max(40.0) };
        Self::with_far(params, s0, s0 + len, jmax)
    }

    pub fn with_far(params: NeckParams, s0: f64, s_far: f64, jmax: i32) -> Result<Self> {
        let period = if params.is_cylinder() { 0.0 } else { period_s(params)? };
        if s_far < s0 + 4.0 * period {
            return Err(Error::Precondition(format!("s_far {s_far} closer than 4 periods to s0 {s0}")));
        }
        if jmax < 1 {
            return Err(Error::Domain(format!("jmax {jmax} < 1")));
        }
        let step = if params.is_cylinder() { 0.01 } else { (period / 4000.0).min(0.01) };
        // fixed step, far end rounded up to a whole number of steps
        let n = ((s_far - s0) / step - 1e-9).ceil() as usize;
        let profile = DelaunayProfile::on_grid(params, s0, step, n + 1)?;
        let gammas = (2..=jmax.max(2)).map(|j| floquet(params, j).map(|f| f.gamma)).collect::<Result<Vec<_>>>()?;
        Ok(HalfCylinder { profile, s0, s_far: s0 + n as f64 * step, jmax, gammas })
    }

    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.profile.step()
    }

    pub fn gamma(&self, j: i32) -> f64 {
        self.gammas[(j.abs() - 2) as usize]
    }

    pub fn zero_field(&self) -> ModeField {
        ModeField::zeros(self.s0, self.h(), self.len(), self.jmax)
    }

    pub fn field_from_fn(&self, f: impl Fn(i32, f64) -> f64) -> ModeField {
        ModeField::from_fn(self.s0, self.h(), self.len(), self.jmax, f)
    }

    /// Index of the last grid point with s <= s0 + len.
    pub fn index_within(&self, len: f64) -> usize {
        (((len / self.h()) + 1e-9).floor() as usize).min(self.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_of_data() {
        let mut b = BoundaryData::zeros(3);
        b.set(2, 0.7);
        b.set(-3, -0.2);
        b.set(0, 0.1);
        let r = b.rotated(0.4);
        for k in 0..10 {
            let t = 0.6 * k as f64;
            assert!((r.eval(t) - b.eval(t - 0.4)).abs() < 1e-14);
        }
        assert!((r.norm() - b.norm()).abs() < 1e-14);
        assert!(!b.high_part().has_low_modes());
    }

    #[test]
    fn differences_are_fourth_order() {
        let h = 0.01;
        let w: Vec<f64> = (0..200).map(|i| (0.3 * i as f64 * h).sin()).collect();
        let (d1, d2) = derivative(&w, h);
        for i in [0, 1, 100, 198, 199] {
            let s = i as f64 * h;
            assert!((d1[i] - 0.3 * (0.3 * s).cos()).abs() < 1e-9, "{i}");
            assert!((d2[i] + 0.09 * (0.3 * s).sin()).abs() < 1e-7, "{i}");
        }
    }

    #[test]
    fn norm_of_exponential_mode() {
        let f = ModeField::from_fn(1.0, 0.01, 500, 2, |j, s| if j == 2 { (-1.5 * (s - 1.0)).exp() } else { 0.0 });
        let n0 = WeightedNorm::new(1.5, 1.0, 0).unwrap().eval(&f);
        assert!((n0 - 1.0 / PI.sqrt()).abs() < 1e-9, "{n0}");
        assert!(WeightedNorm::new(2.0, 0.0, 0).is_err());
    }
}
