//! Delaunay surfaces in isothermal coordinates.
//!
//! The profile is x(s, theta) = (tau e^sigma cos theta, tau e^sigma sin theta, k(s))
//! with sigma'' + (tau^2/2) sinh 2 sigma = 0 and k' = (tau^2/2)(1 + e^{2 sigma}).

mod estimates;
pub(crate) mod integrator;
mod period;

pub use estimates::{check_profile_estimates, EstimateCheck, EstimateReport};
pub use integrator::{ModeState, PhaseState};
pub use period::{period_s, quarter_crossing};

use crate::error::{Error, Result};
use integrator::{substeps, Flow};
use serde::Serialize;
use std::io::Write;

/// Largest internal integration step.
pub(crate) const MAX_INNER_STEP: f64 = 0.0025;

/// Necksize pair with tau^2 = epsilon (2 - epsilon).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NeckParams {
    pub epsilon: f64,
    pub tau: f64,
}

impl NeckParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Domain(format!("necksize {epsilon} outside (0, 1]")));
        }
        Ok(NeckParams { epsilon, tau: (epsilon * (2.0 - epsilon)).sqrt() })
    }

    pub fn from_tau(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Domain(format!("tau {tau} outside (0, 1]")));
        }
        // 1 - sqrt(1 - tau^2) without cancellation
        let epsilon = tau * tau / (1.0 + (1.0 - tau * tau).sqrt());
        Ok(NeckParams { epsilon, tau })
    }

    pub fn tau2(&self) -> f64 {
        self.tau * self.tau
    }

    /// sigma(0) = log(epsilon / tau).
    pub fn sigma0(&self) -> f64 {
        (self.epsilon / self.tau).ln()
    }

    pub fn is_cylinder(&self) -> bool {
        self.epsilon == 1.0
    }

    /// Largest radius 1 + sqrt(1 - tau^2).
    pub fn max_radius(&self) -> f64 {
        2.0 - self.epsilon
    }
}

/// Convenience wrapper for the operation of the same name.
pub fn neck_params(epsilon: f64) -> Result<NeckParams> {
    NeckParams::new(epsilon)
}

/// Values of the profile at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub sigma: f64,
    pub sigma_s: f64,
    pub sigma_ss: f64,
    pub k: f64,
    pub k_s: f64,
    pub k_ss: f64,
}

/// Isothermal Delaunay solution sampled on a uniform s-grid.
#[derive(Clone, Debug)]
pub struct DelaunayProfile {
    pub params: NeckParams,
    pub grid: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_s: Vec<f64>,
    pub k: Vec<f64>,
    /// None for the cylinder, whose profile is constant.
    pub period_s: Option<f64>,
    h: f64,
}

/// Integrate from s = 0 to `s` (either sign) and return the state there.
pub fn state_at(params: NeckParams, s: f64) -> PhaseState {
    let mut st = PhaseState { sigma: params.sigma0(), p: 0.0, k: 0.0 };
    if params.is_cylinder() {
        st.k = s;
        return st;
    }
    let flow = Flow::new(params.tau2());
    let n = substeps(s, MAX_INNER_STEP);
    let h = s.abs() / n as f64;
    for _ in 0..n {
        flow.step(&mut st, h);
    }
    if s < 0.0 {
        st.p = -st.p;
        st.k = -st.k;
    }
    st
}

/// Solve on [-s_max, s_max] with grid spacing at most `step`.
pub fn solve_profile(params: NeckParams, s_max: f64, step: f64) -> Result<DelaunayProfile> {
    if !(s_max > 0.0) || !(step > 0.0) {
        return Err(Error::Domain(format!("bad window s_max = {s_max}, step = {step}")));
    }
    let n = (s_max / step).ceil() as usize;
    let h = s_max / n as f64;
    DelaunayProfile::on_grid(params, -s_max, h, 2 * n + 1)
}

/// Default grid step min(0.01, S / 4000).
pub fn default_step(params: NeckParams) -> Result<f64> {
    if params.is_cylinder() {
        return Ok(0.01);
    }
    Ok((period_s(params)? / 4000.0).min(0.01))
}

impl DelaunayProfile {
    /// Profile on the grid start + i h, i = 0..n.
    pub fn on_grid(params: NeckParams, start: f64, h: f64, n: usize) -> Result<Self> {
        if n < 2 || !(h > 0.0) {
            return Err(Error::Domain("profile grid needs at least two points".into()));
        }
        let grid: Vec<f64> = (0..n).map(|i| start + i as f64 * h).collect();
        let period = if params.is_cylinder() { None } else { Some(period_s(params)?) };
        let mut sigma = Vec::with_capacity(n);
        let mut sigma_s = Vec::with_capacity(n);
        let mut k = Vec::with_capacity(n);
        if params.is_cylinder() {
            for &s in &grid {
                sigma.push(0.0);
                sigma_s.push(0.0);
                k.push(s);
            }
        } else {
            let flow = Flow::new(params.tau2());
            let mut st = state_at(params, start);
            let m = substeps(h, MAX_INNER_STEP);
            let hi = h / m as f64;
            for i in 0..n {
                if i > 0 {
                    for _ in 0..m {
                        flow.step(&mut st, hi);
                    }
                }
                sigma.push(st.sigma);
                sigma_s.push(st.p);
                k.push(st.k);
            }
        }
        let prof = DelaunayProfile { params, grid, sigma, sigma_s, k, period_s: period, h };
        let drift = prof.max_invariant_drift();
        if drift > 1e-9 {
            return Err(Error::Integration(format!("energy invariant drift {drift:e}")));
        }
        Ok(prof)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn tau2(&self) -> f64 {
        self.params.tau2()
    }

    /// sigma_s^2 + tau^2 cosh^2 sigma - 1 at sample i.
    pub fn invariant_drift(&self, i: usize) -> f64 {
        let c = self.sigma[i].cosh();
        self.sigma_s[i] * self.sigma_s[i] + self.tau2() * c * c - 1.0
    }

    pub fn max_invariant_drift(&self) -> f64 {
        (0..self.len()).map(|i| self.invariant_drift(i).abs()).fold(0.0, f64::max)
    }

    /// Radius tau e^sigma at sample i.
    pub fn rho(&self, i: usize) -> f64 {
        self.params.tau * self.sigma[i].exp()
    }

    /// Conformal factor tau^2 e^{2 sigma} at sample i.
    pub fn conformal(&self, i: usize) -> f64 {
        self.tau2() * (2.0 * self.sigma[i]).exp()
    }

    /// Jacobi potential tau^2 cosh 2 sigma at sample i.
    pub fn potential(&self, i: usize) -> f64 {
        self.tau2() * (2.0 * self.sigma[i]).cosh()
    }

    fn derived(&self, sigma: f64, sigma_s: f64) -> (f64, f64, f64) {
        let t2 = self.tau2();
        let e2 = (2.0 * sigma).exp();
        (-0.5 * t2 * (2.0 * sigma).sinh(), 0.5 * t2 * (1.0 + e2), t2 * e2 * sigma_s)
    }

    pub fn point(&self, i: usize) -> ProfilePoint {
        let (sigma_ss, k_s, k_ss) = self.derived(self.sigma[i], self.sigma_s[i]);
        ProfilePoint { sigma: self.sigma[i], sigma_s: self.sigma_s[i], sigma_ss, k: self.k[i], k_s, k_ss }
    }

    pub fn covers(&self, a: f64, b: f64) -> bool {
        let tol = 1e-9 * self.h;
        a >= self.grid[0] - tol && b <= self.grid[self.len() - 1] + tol
    }

    /// Quintic Hermite interpolation of sigma and k (exact derivatives at the nodes).
    pub fn eval(&self, s: f64) -> Result<ProfilePoint> {
        if !self.covers(s, s) {
            return Err(Error::Range(format!(
                "s = {s} outside profile [{}, {}]",
                self.grid[0],
                self.grid[self.len() - 1]
            )));
        }
        let x = ((s - self.grid[0]) / self.h).max(0.0);
        let i = (x.floor() as usize).min(self.len() - 2);
        let t = x - i as f64;
        let a = self.point(i);
        let b = self.point(i + 1);
        let h = self.h;
        let (sg, sg1, sg2) = quintic(t, h, [a.sigma, a.sigma_s, a.sigma_ss], [b.sigma, b.sigma_s, b.sigma_ss]);
        let (kk, k1, k2) = quintic(t, h, [a.k, a.k_s, a.k_ss], [b.k, b.k_s, b.k_ss]);
        Ok(ProfilePoint { sigma: sg, sigma_s: sg1, sigma_ss: sg2, k: kk, k_s: k1, k_ss: k2 })
    }

    /// Index of the grid point nearest to `s`.
    pub fn index_of(&self, s: f64) -> usize {
        let x = ((s - self.grid[0]) / self.h).round();
        (x.max(0.0) as usize).min(self.len() - 1)
    }

    /// CSV with columns s, sigma, sigma_s, k, rho, invariant_drift.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,sigma,sigma_s,k,rho,invariant_drift")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                crate::output::fmt9(self.grid[i]),
                crate::output::fmt9(self.sigma[i]),
                crate::output::fmt9(self.sigma_s[i]),
                crate::output::fmt9(self.k[i]),
                crate::output::fmt9(self.rho(i)),
                crate::output::fmt9(self.invariant_drift(i))
            )?;
        }
        Ok(())
    }
}

/// Quintic Hermite interpolant on [0, h] at fraction t; returns value and two derivatives.
pub(crate) fn quintic(t: f64, h: f64, a: [f64; 3], b: [f64; 3]) -> (f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
    let d00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d20 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let d01 = -d00;
    let d11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d21 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let e00 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    let e10 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    let e20 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
    let e01 = -e00;
    let e11 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    let e21 = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);
    let v = h00 * a[0] + h * h10 * a[1] + h * h * h20 * a[2] + h01 * b[0] + h * h11 * b[1] + h * h * h21 * b[2];
    let d = (d00 * a[0] + d01 * b[0]) / h + d10 * a[1] + d11 * b[1] + h * (d20 * a[2] + d21 * b[2]);
    let e = (e00 * a[0] + e01 * b[0]) / (h * h) + (e10 * a[1] + e11 * b[1]) / h + e20 * a[2] + e21 * b[2];
    (v, d, e)
}

/// T = k(S) - k(0); the profile must cover [0, S].
pub fn period_t(profile: &DelaunayProfile) -> Result<f64> {
    let s = profile
        .period_s
        .ok_or_else(|| Error::Domain("the cylinder has no period".into()))?;
    if !profile.covers(0.0, s) {
        return Err(Error::Range(format!("profile does not cover [0, S = {s}]")));
    }
    Ok(profile.eval(s)?.k - profile.eval(0.0)?.k)
}

/// Radius as a function of the axial coordinate t = k(s).
#[derive(Clone, Debug)]
pub struct CylindricalProfile {
    pub params: NeckParams,
    pub t: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_t: Vec<f64>,
}

impl CylindricalProfile {
    /// rho^2 - 2 rho / sqrt(1 + rho_t^2) at sample i; constant eps(eps - 2).
    pub fn hamiltonian(&self, i: usize) -> f64 {
        self.rho[i] * self.rho[i] - 2.0 * self.rho[i] / (1.0 + self.rho_t[i] * self.rho_t[i]).sqrt()
    }
}

pub fn to_cylindrical(profile: &DelaunayProfile) -> Result<CylindricalProfile> {
    let mut t = Vec::with_capacity(profile.len());
    let mut rho = Vec::with_capacity(profile.len());
    let mut rho_t = Vec::with_capacity(profile.len());
    for i in 0..profile.len() {
        let ss = profile.sigma_s[i];
        if ss * ss >= 1.0 {
            return Err(Error::Numerical(format!(
                "sigma_s^2 = {} >= 1 at s = {}",
                ss * ss,
                profile.grid[i]
            )));
        }
        t.push(profile.k[i]);
        rho.push(profile.rho(i));
        rho_t.push(ss / (1.0 - ss * ss).sqrt());
    }
    Ok(CylindricalProfile { params: profile.params, t, rho, rho_t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn neck_params_examples() {
        assert_eq!(NeckParams::new(1.0).unwrap().tau, 1.0);
        assert_relative_eq!(NeckParams::new(0.5).unwrap().tau, 0.75f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(NeckParams::new(0.0), Err(Error::Domain(_))));
        assert!(NeckParams::new(1.5).is_err());
        let p = NeckParams::from_tau(0.3).unwrap();
        assert_relative_eq!(p.tau2(), p.epsilon * (2.0 - p.epsilon), epsilon = 1e-16);
    }

    #[test]
    fn cylinder_profile_is_constant() {
        let p = solve_profile(NeckParams::new(1.0).unwrap(), 3.0, 0.01).unwrap();
        assert!(p.sigma.iter().all(|&x| x == 0.0));
        for i in 0..p.len() {
            assert!((p.k[i] - p.grid[i]).abs() < 1e-14);
        }
        let c = to_cylindrical(&p).unwrap();
        assert!(c.rho.iter().all(|&r| (r - 1.0).abs() < 1e-15));
    }

    #[test]
    fn initial_conditions_and_symmetry() {
        let params = NeckParams::new(0.3).unwrap();
        let prof = solve_profile(params, 4.0, 0.01).unwrap();
        let z = prof.index_of(0.0);
        assert!(prof.grid[z].abs() < 1e-12);
        assert!((prof.sigma[z] - params.sigma0()).abs() < 1e-12);
        assert!(prof.sigma_s[z].abs() < 1e-12);
        assert!(prof.k[z].abs() < 1e-12);
        for i in 0..prof.len() {
            let m = prof.len() - 1 - i;
            assert!((prof.sigma[i] - prof.sigma[m]).abs() < 1e-11);
            assert!((prof.k[i] + prof.k[m]).abs() < 1e-11);
        }
    }

    #[test]
    fn hermite_interpolation_matches_direct_integration() {
        let params = NeckParams::new(0.2).unwrap();
        let prof = solve_profile(params, 3.0, 0.01).unwrap();
        for &s in &[0.123456, 1.7777, -2.4321] {
            let a = prof.eval(s).unwrap();
            let b = state_at(params, s);
            assert!((a.sigma - b.sigma).abs() < 1e-11, "{s}");
            assert!((a.sigma_s - b.p).abs() < 1e-10);
            assert!((a.k - b.k).abs() < 1e-11);
        }
        assert!(matches!(prof.eval(3.5), Err(Error::Range(_))));
    }

    #[test]
    fn quintic_reproduces_quintic_polynomials() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) + 0.25 * x.powi(5);
        let f1 = |x: f64| -2.0 + 1.5 * x * x + 1.25 * x.powi(4);
        let f2 = |x: f64| 3.0 * x + 5.0 * x.powi(3);
        let (a, h) = (0.4, 0.3);
        let t = 0.37;
        let (v, d, e) = quintic(t, h, [f(a), f1(a), f2(a)], [f(a + h), f1(a + h), f2(a + h)]);
        let x = a + t * h;
        assert!((v - f(x)).abs() < 1e-14);
        assert!((d - f1(x)).abs() < 1e-13);
        assert!((e - f2(x)).abs() < 1e-12);
    }

    #[test]
    fn cylindrical_hamiltonian_is_constant() {
        let params = NeckParams::new(0.2).unwrap();
        let prof = solve_profile(params, 8.0, 0.005).unwrap();
        let cyl = to_cylindrical(&prof).unwrap();
        let h0 = params.epsilon * (params.epsilon - 2.0);
        for i in 0..cyl.t.len() {
            assert!((cyl.hamiltonian(i) - h0).abs() < 1e-8);
            assert!(cyl.rho[i] >= params.epsilon - 1e-12);
            assert!(cyl.rho[i] <= params.max_radius() + 1e-12);
        }
        let z = prof.index_of(0.0);
        assert!((cyl.rho[z] - 0.2).abs() < 1e-13);
        assert!(cyl.rho_t[z].abs() < 1e-13);
    }
}
