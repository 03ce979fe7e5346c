//! Parametrized surface patches, fundamental forms and mean curvature.
//!
//! H is the sum of the principal curvatures,
//! H = (L G - 2 M F + N E) / (E G - F^2), taken with respect to the normal
//! orientation * (x_1 x x_2) / |x_1 x x_2|.

mod graph;
mod mesh;
pub(crate) mod patches;

pub(crate) use graph::graph_mean_curvature;
pub use graph::{GraphField, NormalGraphPatch, ScalarField, ScalarJet, VectorField};
pub use mesh::{export_mesh, export_obj_objects, parse_obj_vertices, sample_mesh, MeshFormat, SurfaceMesh};
pub use patches::{
    CatenoidPatch, CylinderPatch, CylindricalDelaunayPatch, DelaunayPatch, Dilated, Flipped, Moved, SpherePatch,
};

use crate::delaunay::DelaunayProfile;
use crate::error::{Error, Result};
use nalgebra::Vector3;

pub type V3 = Vector3<f64>;

/// Position and parameter derivatives up to order two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub x: V3,
    pub x1: V3,
    pub x2: V3,
    pub x11: V3,
    pub x12: V3,
    pub x22: V3,
}

impl Jet {
    pub fn zero() -> Self {
        let z = V3::zeros();
        Jet { x: z, x1: z, x2: z, x11: z, x12: z, x22: z }
    }
}

/// Parameter rectangle; `periodic2` marks a closed second parameter (theta).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRect {
    pub u1: (f64, f64),
    pub u2: (f64, f64),
    pub periodic2: bool,
}

impl ParamRect {
    pub fn contains(&self, u1: f64, u2: f64) -> bool {
        let tol = 1e-9;
        let ok1 = u1 >= self.u1.0 - tol && u1 <= self.u1.1 + tol;
        let ok2 = self.periodic2 || (u2 >= self.u2.0 - tol && u2 <= self.u2.1 + tol);
        ok1 && ok2
    }
}

/// Smooth immersion of a parameter rectangle.
pub trait ParamPatch: Sync {
    fn jet(&self, u1: f64, u2: f64) -> Jet;
    fn domain(&self) -> ParamRect;

    /// +1 keeps x_1 x x_2, -1 flips the normal.
    fn orientation(&self) -> f64 {
        1.0
    }

    /// Typical parameter scale, used for finite-difference steps.
    fn scale(&self) -> f64 {
        1.0
    }

    /// Analytic jet of the oriented unit normal, when known.
    fn normal_jet(&self, _u1: f64, _u2: f64) -> Option<Jet> {
        None
    }

    fn position(&self, u1: f64, u2: f64) -> V3 {
        self.jet(u1, u2).x
    }
}

impl<P: ParamPatch + ?Sized> ParamPatch for &P {
    fn jet(&self, u1: f64, u2: f64) -> Jet {
        (**self).jet(u1, u2)
    }
    fn domain(&self) -> ParamRect {
        (**self).domain()
    }
    fn orientation(&self) -> f64 {
        (**self).orientation()
    }
    fn scale(&self) -> f64 {
        (**self).scale()
    }
    fn normal_jet(&self, u1: f64, u2: f64) -> Option<Jet> {
        (**self).normal_jet(u1, u2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl FundamentalForms {
    pub fn det_first(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    pub fn mean_curvature(&self) -> f64 {
        (self.l * self.g - 2.0 * self.m * self.f + self.n * self.e) / self.det_first()
    }

    pub fn gauss_curvature(&self) -> f64 {
        (self.l * self.n - self.m * self.m) / self.det_first()
    }
}

/// Forms of a jet for the given orientation; also returns the unit normal.
pub fn forms_of_jet(j: &Jet, orientation: f64, u1: f64, u2: f64) -> Result<(FundamentalForms, V3)> {
    let e = j.x1.dot(&j.x1);
    let f = j.x1.dot(&j.x2);
    let g = j.x2.dot(&j.x2);
    let det = e * g - f * f;
    if !(det > 1e-300) || !det.is_finite() {
        return Err(Error::Degenerate { u1, u2, det });
    }
    let c = j.x1.cross(&j.x2);
    let nu = orientation * c / c.norm();
    Ok((FundamentalForms { e, f, g, l: j.x11.dot(&nu), m: j.x12.dot(&nu), n: j.x22.dot(&nu) }, nu))
}

pub fn fundamental_forms<P: ParamPatch + ?Sized>(patch: &P, u1: f64, u2: f64) -> Result<FundamentalForms> {
    check_domain(patch, u1, u2)?;
    Ok(forms_of_jet(&patch.jet(u1, u2), patch.orientation(), u1, u2)?.0)
}

pub fn unit_normal<P: ParamPatch + ?Sized>(patch: &P, u1: f64, u2: f64) -> Result<V3> {
    Ok(forms_of_jet(&patch.jet(u1, u2), patch.orientation(), u1, u2)?.1)
}

pub fn mean_curvature<P: ParamPatch + ?Sized>(patch: &P, u1: f64, u2: f64) -> Result<f64> {
    Ok(fundamental_forms(patch, u1, u2)?.mean_curvature())
}

fn check_domain<P: ParamPatch + ?Sized>(patch: &P, u1: f64, u2: f64) -> Result<()> {
    let d = patch.domain();
    if !d.contains(u1, u2) {
        return Err(Error::Range(format!("parameter ({u1}, {u2}) outside the patch domain")));
    }
    Ok(())
}

/// sup over the grid interior of |sigma_ss + (tau^2/2) sinh 2 sigma| with a
/// five-point second difference; the Gauss equation for a Delaunay surface.
pub fn gauss_equation_residual(profile: &DelaunayProfile) -> f64 {
    let h = profile.step();
    let t2 = profile.tau2();
    let s = &profile.sigma;
    let mut worst: f64 = 0.0;
    for i in 2..profile.len().saturating_sub(2) {
        let d2 = (-s[i - 2] + 16.0 * s[i - 1] - 30.0 * s[i] + 16.0 * s[i + 1] - s[i + 2]) / (12.0 * h * h);
        worst = worst.max((d2 + 0.5 * t2 * (2.0 * s[i]).sinh()).abs());
    }
    worst
}
