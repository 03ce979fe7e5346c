use super::{forms_of_jet, Jet, ParamPatch, ParamRect, V3};

/// A scalar function w and its derivatives at one parameter point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScalarJet {
    pub w: f64,
    pub w1: f64,
    pub w2: f64,
    pub w11: f64,
    pub w12: f64,
    pub w22: f64,
}

pub trait ScalarField: Sync {
    fn value(&self, u1: f64, u2: f64) -> f64;

    /// Analytic derivatives, if available.
    fn jet(&self, _u1: f64, _u2: f64) -> Option<ScalarJet> {
        None
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> ScalarField for F {
    fn value(&self, u1: f64, u2: f64) -> f64 {
        self(u1, u2)
    }
}

pub trait VectorField: Sync {
    fn value(&self, u1: f64, u2: f64) -> V3;
    fn jet(&self, _u1: f64, _u2: f64) -> Option<Jet> {
        None
    }
}

/// Direction along which the graph is taken.
pub enum GraphField<'a> {
    /// The oriented unit normal of the base patch.
    Normal,
    /// A prescribed transverse field, such as a cutoff-interpolated normal.
    Custom(&'a dyn VectorField),
}

/// The patch u -> x(u) + w(u) V(u).
///
/// The base jet is used as is; derivatives of the perturbation w V come from
/// the product rule when w and V have analytic jets, and otherwise from
/// fourth-order central differences with step 1e-4 times the parameter scale.
pub struct NormalGraphPatch<'a, B: ParamPatch> {
    pub base: B,
    pub w: &'a dyn ScalarField,
    pub field: GraphField<'a>,
}

impl<'a, B: ParamPatch> NormalGraphPatch<'a, B> {
    pub fn new(base: B, w: &'a dyn ScalarField) -> Self {
        NormalGraphPatch { base, w, field: GraphField::Normal }
    }

    pub fn with_field(base: B, w: &'a dyn ScalarField, field: &'a dyn VectorField) -> Self {
        NormalGraphPatch { base, w, field: GraphField::Custom(field) }
    }

    fn direction(&self, u1: f64, u2: f64) -> V3 {
        match &self.field {
            GraphField::Normal => {
                let j = self.base.jet(u1, u2);
                let c = j.x1.cross(&j.x2);
                self.base.orientation() * c / c.norm()
            }
            GraphField::Custom(v) => v.value(u1, u2),
        }
    }

    fn direction_jet(&self, u1: f64, u2: f64) -> Option<Jet> {
        match &self.field {
            GraphField::Normal => self.base.normal_jet(u1, u2),
            GraphField::Custom(v) => v.jet(u1, u2),
        }
    }

    fn perturbation(&self, u1: f64, u2: f64) -> V3 {
        self.w.value(u1, u2) * self.direction(u1, u2)
    }

    fn perturbation_jet(&self, u1: f64, u2: f64) -> Jet {
        if let (Some(w), Some(v)) = (self.w.jet(u1, u2), self.direction_jet(u1, u2)) {
            return Jet {
                x: w.w * v.x,
                x1: w.w1 * v.x + w.w * v.x1,
                x2: w.w2 * v.x + w.w * v.x2,
                x11: w.w11 * v.x + 2.0 * w.w1 * v.x1 + w.w * v.x11,
                x12: w.w12 * v.x + w.w1 * v.x2 + w.w2 * v.x1 + w.w * v.x12,
                x22: w.w22 * v.x + 2.0 * w.w2 * v.x2 + w.w * v.x22,
            };
        }
        let h = 1e-4 * self.base.scale();
        let f = |a: f64, b: f64| self.perturbation(a, b);
        let d1 = |a: f64, b: f64| (f(a - 2.0 * h, b) - 8.0 * f(a - h, b) + 8.0 * f(a + h, b) - f(a + 2.0 * h, b)) / (12.0 * h);
        let c = f(u1, u2);
        let second = |g: &dyn Fn(f64) -> V3| (-g(-2.0 * h) + 16.0 * g(-h) - 30.0 * c + 16.0 * g(h) - g(2.0 * h)) / (12.0 * h * h);
        let first = |g: &dyn Fn(f64) -> V3| (g(-2.0 * h) - 8.0 * g(-h) + 8.0 * g(h) - g(2.0 * h)) / (12.0 * h);
        let x1 = first(&|d| f(u1 + d, u2));
        let x2 = first(&|d| f(u1, u2 + d));
        let x11 = second(&|d| f(u1 + d, u2));
        let x22 = second(&|d| f(u1, u2 + d));
        let x12 = first(&|d| d1(u1, u2 + d));
        Jet { x: c, x1, x2, x11, x12, x22 }
    }
}

impl<'a, B: ParamPatch> ParamPatch for NormalGraphPatch<'a, B> {
    fn jet(&self, u1: f64, u2: f64) -> Jet {
        let b = self.base.jet(u1, u2);
        let p = self.perturbation_jet(u1, u2);
        Jet { x: b.x + p.x, x1: b.x1 + p.x1, x2: b.x2 + p.x2, x11: b.x11 + p.x11, x12: b.x12 + p.x12, x22: b.x22 + p.x22 }
    }
    fn domain(&self) -> ParamRect {
        self.base.domain()
    }
    fn orientation(&self) -> f64 {
        self.base.orientation()
    }
    fn scale(&self) -> f64 {
        self.base.scale()
    }
}

/// Mean curvature of x + w V from jets, with the orientation of the base.
pub(crate) fn graph_mean_curvature(base: &Jet, field: &Jet, w: &ScalarJet, orientation: f64) -> Option<f64> {
    let y = Jet {
        x: base.x + w.w * field.x,
        x1: base.x1 + w.w1 * field.x + w.w * field.x1,
        x2: base.x2 + w.w2 * field.x + w.w * field.x2,
        x11: base.x11 + w.w11 * field.x + 2.0 * w.w1 * field.x1 + w.w * field.x11,
        x12: base.x12 + w.w12 * field.x + w.w1 * field.x2 + w.w2 * field.x1 + w.w * field.x12,
        x22: base.x22 + w.w22 * field.x + 2.0 * w.w2 * field.x2 + w.w * field.x22,
    };
    forms_of_jet(&y, orientation, 0.0, 0.0).ok().map(|(f, _)| f.mean_curvature())
}
