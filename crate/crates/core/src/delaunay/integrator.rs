//! Composition integrator for the isothermal Delaunay system.
//!
//! The system is split into a drift (sigma' = p, w' = v) and a kick whose right
//! hand side depends only on positions, so both sub-flows are exact. The
//! Verlet step is lifted to order six with the triple-jump composition.

/// Sub-step weights of the order-six triple jump.
pub(crate) fn composition_weights() -> [f64; 9] {
    let g1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
    let g0 = 1.0 - 2.0 * g1;
    let d1 = 1.0 / (2.0 - 2f64.powf(1.0 / 5.0));
    let d0 = 1.0 - 2.0 * d1;
    let inner = [g1, g0, g1];
    let mut out = [0.0; 9];
    for (n, outer) in [d1, d0, d1].iter().enumerate() {
        for (m, c) in inner.iter().enumerate() {
            out[3 * n + m] = outer * c;
        }
    }
    out
}

/// State of the profile system: sigma, its derivative and the axial coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseState {
    pub sigma: f64,
    pub p: f64,
    pub k: f64,
}

/// Profile state carried together with a 2x2 block of mode solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeState {
    pub base: PhaseState,
    /// Columns of the fundamental matrix: values.
    pub w: [f64; 2],
    /// Columns of the fundamental matrix: derivatives.
    pub v: [f64; 2],
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Flow {
    pub tau2: f64,
    weights: [f64; 9],
}

impl Flow {
    pub fn new(tau2: f64) -> Self {
        Flow { tau2, weights: composition_weights() }
    }

    #[inline]
    fn kick(&self, st: &mut PhaseState, h: f64) {
        let s2 = 2.0 * st.sigma;
        st.p -= h * 0.5 * self.tau2 * s2.sinh();
        st.k += h * 0.5 * self.tau2 * (1.0 + s2.exp());
    }

    #[inline]
    fn verlet(&self, st: &mut PhaseState, h: f64) {
        self.kick(st, 0.5 * h);
        st.sigma += h * st.p;
        self.kick(st, 0.5 * h);
    }

    /// One composed step of size `h` followed by projection on the energy level.
    pub fn step(&self, st: &mut PhaseState, h: f64) {
        for c in self.weights {
            self.verlet(st, c * h);
        }
        self.project(&mut st.sigma, &mut st.p);
    }

    /// Newton projection of (sigma, p) onto p^2 + tau^2 cosh^2 sigma = 1.
    pub fn project(&self, sigma: &mut f64, p: &mut f64) {
        for _ in 0..8 {
            let c = sigma.cosh();
            let e = *p * *p + self.tau2 * c * c - 1.0;
            if e.abs() < 1e-16 {
                return;
            }
            let gs = self.tau2 * (2.0 * *sigma).sinh();
            let gp = 2.0 * *p;
            let g2 = gs * gs + gp * gp;
            if g2 < 1e-300 || e == 0.0 {
                return;
            }
            let lam = e / g2;
            *sigma -= lam * gs;
            *p -= lam * gp;
        }
    }

    /// Composed step of the profile plus the mode equation w'' = (j^2 - tau^2 cosh 2 sigma) w.
    pub fn mode_step(&self, st: &mut ModeState, j2: f64, h: f64) {
        for c in self.weights {
            let hc = c * h;
            self.mode_kick(st, j2, 0.5 * hc);
            st.base.sigma += hc * st.base.p;
            st.w[0] += hc * st.v[0];
            st.w[1] += hc * st.v[1];
            self.mode_kick(st, j2, 0.5 * hc);
        }
        self.project(&mut st.base.sigma, &mut st.base.p);
    }

    #[inline]
    fn mode_kick(&self, st: &mut ModeState, j2: f64, h: f64) {
        let q = j2 - self.tau2 * (2.0 * st.base.sigma).cosh();
        self.kick(&mut st.base, h);
        st.v[0] += h * q * st.w[0];
        st.v[1] += h * q * st.w[1];
    }
}

/// Number of internal sub-steps used to cross an interval of length `len`.
pub(crate) fn substeps(len: f64, max_h: f64) -> usize {
    ((len.abs() / max_h).ceil() as usize).max(1)
}
