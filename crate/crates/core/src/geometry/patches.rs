use super::{Jet, ParamPatch, ParamRect, V3};
use crate::delaunay::DelaunayProfile;
use crate::error::{Error, Result};
use nalgebra::Rotation3;
use std::f64::consts::PI;
use std::sync::Arc;

const FULL_TURN: (f64, f64) = (0.0, 2.0 * PI);

fn revolution_jet(rho: f64, rho_t: f64, rho_tt: f64, t: f64, th: f64) -> Jet {
    let (sn, c) = th.sin_cos();
    Jet {
        x: V3::new(rho * c, rho * sn, t),
        x1: V3::new(rho_t * c, rho_t * sn, 1.0),
        x2: V3::new(-rho * sn, rho * c, 0.0),
        x11: V3::new(rho_tt * c, rho_tt * sn, 0.0),
        x12: V3::new(-rho_t * sn, rho_t * c, 0.0),
        x22: V3::new(-rho * c, -rho * sn, 0.0),
    }
}

/// Delaunay surface in isothermal coordinates (s, theta).
#[derive(Clone, Debug)]
pub struct DelaunayPatch {
    pub profile: Arc<DelaunayProfile>,
    pub s_range: (f64, f64),
}

impl DelaunayPatch {
    pub fn new(profile: Arc<DelaunayProfile>) -> Self {
        let s_range = (profile.grid[0], profile.grid[profile.len() - 1]);
        DelaunayPatch { profile, s_range }
    }

    pub fn with_range(profile: Arc<DelaunayProfile>, a: f64, b: f64) -> Result<Self> {
        if !profile.covers(a, b) {
            return Err(Error::Range(format!("[{a}, {b}] not covered by the profile")));
        }
        Ok(DelaunayPatch { profile, s_range: (a, b) })
    }

    fn radial(&self, s: f64) -> (crate::delaunay::ProfilePoint, f64) {
        let p = self.profile.eval(s).expect("s inside the profile");
        (p, self.profile.params.tau * p.sigma.exp())
    }
}

/// Jet of the Delaunay immersion from profile values at one s.
pub(crate) fn delaunay_jet(tau: f64, p: &crate::delaunay::ProfilePoint, th: f64) -> Jet {
    let rho = tau * p.sigma.exp();
    let rho_s = rho * p.sigma_s;
    let rho_ss = rho * (p.sigma_ss + p.sigma_s * p.sigma_s);
    let (sn, c) = th.sin_cos();
    Jet {
        x: V3::new(rho * c, rho * sn, p.k),
        x1: V3::new(rho_s * c, rho_s * sn, p.k_s),
        x2: V3::new(-rho * sn, rho * c, 0.0),
        x11: V3::new(rho_ss * c, rho_ss * sn, p.k_ss),
        x12: V3::new(-rho_s * sn, rho_s * c, 0.0),
        x22: V3::new(-rho * c, -rho * sn, 0.0),
    }
}

/// Jet of the inward normal (-tau cosh sigma cos, -tau cosh sigma sin, sigma_s).
pub(crate) fn delaunay_normal_jet(tau: f64, p: &crate::delaunay::ProfilePoint, th: f64) -> Jet {
    let t2 = tau * tau;
    let (ch, sh) = (p.sigma.cosh(), p.sigma.sinh());
    let a = tau * ch;
    let a_s = tau * sh * p.sigma_s;
    let a_ss = tau * (ch * p.sigma_s * p.sigma_s + sh * p.sigma_ss);
    let sigma_sss = -t2 * (2.0 * p.sigma).cosh() * p.sigma_s;
    let (sn, c) = th.sin_cos();
    Jet {
        x: V3::new(-a * c, -a * sn, p.sigma_s),
        x1: V3::new(-a_s * c, -a_s * sn, p.sigma_ss),
        x2: V3::new(a * sn, -a * c, 0.0),
        x11: V3::new(-a_ss * c, -a_ss * sn, sigma_sss),
        x12: V3::new(a_s * sn, -a_s * c, 0.0),
        x22: V3::new(a * c, a * sn, 0.0),
    }
}

impl ParamPatch for DelaunayPatch {
    fn jet(&self, s: f64, th: f64) -> Jet {
        let (p, _) = self.radial(s);
        delaunay_jet(self.profile.params.tau, &p, th)
    }
    fn domain(&self) -> ParamRect {
        ParamRect { u1: self.s_range, u2: FULL_TURN, periodic2: true }
    }
    fn normal_jet(&self, s: f64, th: f64) -> Option<Jet> {
        let (p, _) = self.radial(s);
        Some(delaunay_normal_jet(self.profile.params.tau, &p, th))
    }
}

/// Delaunay surface as a graph of revolution over the axis: (t, theta).
#[derive(Clone, Debug)]
pub struct CylindricalDelaunayPatch {
    pub profile: Arc<DelaunayProfile>,
    pub t_range: (f64, f64),
}

impl CylindricalDelaunayPatch {
    pub fn new(profile: Arc<DelaunayProfile>) -> Self {
        let t_range = (profile.k[0], profile.k[profile.len() - 1]);
        CylindricalDelaunayPatch { profile, t_range }
    }

    /// Solve k(s) = t by Newton (k is strictly increasing).
    pub fn s_of_t(&self, t: f64) -> f64 {
        let pr = &self.profile;
        let i = match pr.k.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.min(pr.len() - 1),
        };
        let mut s = pr.grid[i];
        for _ in 0..50 {
            let p = pr.eval(s.clamp(pr.grid[0], pr.grid[pr.len() - 1])).unwrap();
            let ds = (p.k - t) / p.k_s;
            s -= ds;
            if ds.abs() < 1e-15 {
                break;
            }
        }
        s
    }

    /// (rho, rho_t, rho_tt) at axial position t.
    pub fn radius(&self, t: f64) -> (f64, f64, f64) {
        let s = self.s_of_t(t);
        let p = self.profile.eval(s).unwrap();
        let rho = self.profile.params.tau * p.sigma.exp();
        let rho_s = rho * p.sigma_s;
        let rho_ss = rho * (p.sigma_ss + p.sigma_s * p.sigma_s);
        let rho_t = rho_s / p.k_s;
        let rho_tt = (rho_ss * p.k_s - rho_s * p.k_ss) / p.k_s.powi(3);
        (rho, rho_t, rho_tt)
    }
}

impl ParamPatch for CylindricalDelaunayPatch {
    fn jet(&self, t: f64, th: f64) -> Jet {
        let (r, rt, rtt) = self.radius(t);
        revolution_jet(r, rt, rtt, t, th)
    }
    fn domain(&self) -> ParamRect {
        ParamRect { u1: self.t_range, u2: FULL_TURN, periodic2: true }
    }
}

/// Round sphere centered on the axis, parametrized by (t, theta).
#[derive(Clone, Copy, Debug)]
pub struct SpherePatch {
    pub radius: f64,
    pub center_z: f64,
}

impl ParamPatch for SpherePatch {
    fn jet(&self, t: f64, th: f64) -> Jet {
        let z = t - self.center_z;
        let r2 = self.radius * self.radius;
        let rho = (r2 - z * z).sqrt();
        revolution_jet(rho, -z / rho, -r2 / rho.powi(3), t, th)
    }
    fn domain(&self) -> ParamRect {
        let m = 0.999 * self.radius;
        ParamRect { u1: (self.center_z - m, self.center_z + m), u2: FULL_TURN, periodic2: true }
    }
}

/// Round cylinder of radius r about the z-axis, parametrized by (t, theta).
#[derive(Clone, Copy, Debug)]
pub struct CylinderPatch {
    pub radius: f64,
    pub t_range: (f64, f64),
}

impl ParamPatch for CylinderPatch {
    fn jet(&self, t: f64, th: f64) -> Jet {
        revolution_jet(self.radius, 0.0, 0.0, t, th)
    }
    fn domain(&self) -> ParamRect {
        ParamRect { u1: self.t_range, u2: FULL_TURN, periodic2: true }
    }
    fn normal_jet(&self, _t: f64, th: f64) -> Option<Jet> {
        let (sn, c) = th.sin_cos();
        let z = V3::zeros();
        Some(Jet {
            x: V3::new(-c, -sn, 0.0),
            x1: z,
            x2: V3::new(sn, -c, 0.0),
            x11: z,
            x12: z,
            x22: V3::new(c, sn, 0.0),
        })
    }
}

/// Catenoid a (cosh s cos theta, cosh s sin theta, s).
#[derive(Clone, Copy, Debug)]
pub struct CatenoidPatch {
    pub a: f64,
    pub s_range: (f64, f64),
}

impl ParamPatch for CatenoidPatch {
    fn jet(&self, s: f64, th: f64) -> Jet {
        let a = self.a;
        let (ch, sh) = (s.cosh(), s.sinh());
        let (sn, c) = th.sin_cos();
        Jet {
            x: a * V3::new(ch * c, ch * sn, s),
            x1: a * V3::new(sh * c, sh * sn, 1.0),
            x2: a * V3::new(-ch * sn, ch * c, 0.0),
            x11: a * V3::new(ch * c, ch * sn, 0.0),
            x12: a * V3::new(-sh * sn, sh * c, 0.0),
            x22: a * V3::new(-ch * c, -ch * sn, 0.0),
        }
    }
    fn domain(&self) -> ParamRect {
        ParamRect { u1: self.s_range, u2: FULL_TURN, periodic2: true }
    }
    fn normal_jet(&self, s: f64, th: f64) -> Option<Jet> {
        Some(catenoid_normal_jet(s, th))
    }
}

/// Jet of (-cos theta / cosh s, -sin theta / cosh s, tanh s).
pub(crate) fn catenoid_normal_jet(s: f64, th: f64) -> Jet {
    let sech = 1.0 / s.cosh();
    let th_ = s.tanh();
    let d1 = -sech * th_;
    let d2 = sech * (th_ * th_ - sech * sech);
    let (sn, c) = th.sin_cos();
    Jet {
        x: V3::new(-sech * c, -sech * sn, th_),
        x1: V3::new(-d1 * c, -d1 * sn, sech * sech),
        x2: V3::new(sech * sn, -sech * c, 0.0),
        x11: V3::new(-d2 * c, -d2 * sn, -2.0 * sech * sech * th_),
        x12: V3::new(d1 * sn, -d1 * c, 0.0),
        x22: V3::new(sech * c, sech * sn, 0.0),
    }
}

/// Patch moved by a rigid motion x -> R x + b.
#[derive(Clone, Debug)]
pub struct Moved<P> {
    pub inner: P,
    pub rotation: Rotation3<f64>,
    pub translation: V3,
}

impl<P: ParamPatch> ParamPatch for Moved<P> {
    fn jet(&self, u1: f64, u2: f64) -> Jet {
        let j = self.inner.jet(u1, u2);
        let r = &self.rotation;
        Jet { x: r * j.x + self.translation, x1: r * j.x1, x2: r * j.x2, x11: r * j.x11, x12: r * j.x12, x22: r * j.x22 }
    }
    fn domain(&self) -> ParamRect {
        self.inner.domain()
    }
    fn orientation(&self) -> f64 {
        self.inner.orientation()
    }
    fn scale(&self) -> f64 {
        self.inner.scale()
    }
    fn normal_jet(&self, u1: f64, u2: f64) -> Option<Jet> {
        let r = &self.rotation;
        self.inner
            .normal_jet(u1, u2)
            .map(|j| Jet { x: r * j.x, x1: r * j.x1, x2: r * j.x2, x11: r * j.x11, x12: r * j.x12, x22: r * j.x22 })
    }
}

/// Patch dilated by lambda about the origin.
#[derive(Clone, Debug)]
pub struct Dilated<P> {
    pub inner: P,
    pub lambda: f64,
}

impl<P: ParamPatch> ParamPatch for Dilated<P> {
    fn jet(&self, u1: f64, u2: f64) -> Jet {
        let j = self.inner.jet(u1, u2);
        let l = self.lambda;
        Jet { x: l * j.x, x1: l * j.x1, x2: l * j.x2, x11: l * j.x11, x12: l * j.x12, x22: l * j.x22 }
    }
    fn domain(&self) -> ParamRect {
        self.inner.domain()
    }
    fn orientation(&self) -> f64 {
        self.inner.orientation()
    }
    fn normal_jet(&self, u1: f64, u2: f64) -> Option<Jet> {
        self.inner.normal_jet(u1, u2)
    }
}

/// Same immersion with the opposite normal.
#[derive(Clone, Debug)]
pub struct Flipped<P>(pub P);

impl<P: ParamPatch> ParamPatch for Flipped<P> {
    fn jet(&self, u1: f64, u2: f64) -> Jet {
        self.0.jet(u1, u2)
    }
    fn domain(&self) -> ParamRect {
        self.0.domain()
    }
    fn orientation(&self) -> f64 {
        -self.0.orientation()
    }
    fn normal_jet(&self, u1: f64, u2: f64) -> Option<Jet> {
        self.0
            .normal_jet(u1, u2)
            .map(|j| Jet { x: -j.x, x1: -j.x1, x2: -j.x2, x11: -j.x11, x12: -j.x12, x22: -j.x22 })
    }
}
