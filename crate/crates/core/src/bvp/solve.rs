use super::{check_mu, is_low, BoundaryData, HalfCylinder, ModeField, WeightedNorm};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Mode-resolved solution with the recorded weighted amplification.
#[derive(Clone, Debug, Serialize)]
pub struct BvpSolution {
    pub field: ModeField,
    /// ||w|| / ||input|| in the order-2 weighted norm (0 for zero input).
    pub amplification: f64,
}

/// Thomas algorithm for a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = d[i].
pub(crate) fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut m = b[0];
    for i in 0..n {
        if i > 0 {
            m = b[i] - a[i] * cp[i - 1];
        }
        if m.abs() < 1e-300 || !m.is_finite() {
            return Err(Error::Numerical(format!("singular tridiagonal pivot at row {i}")));
        }
        cp[i] = c[i] / m;
        dp[i] = (d[i] - if i > 0 { a[i] * dp[i - 1] } else { 0.0 }) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

/// Solve w'' = q w + f on the grid of `half`.
/// High modes: w(s0) = dirichlet and decay at s_far; low modes: zero Cauchy data at s_far.
fn solve_mode(half: &HalfCylinder, j: i32, f: Option<&[f64]>, dirichlet: f64) -> Result<Vec<f64>> {
    let n = half.len();
    let h = half.h();
    let h12 = h * h / 12.0;
    let j2 = (j * j) as f64;
    let q: Vec<f64> = (0..n).map(|i| j2 - half.profile.potential(i)).collect();
    let rhs = |i: usize| f.map_or(0.0, |f| h12 * (f[i - 1] + 10.0 * f[i] + f[i + 1]));
    let lo = |i: usize| 1.0 - h12 * q[i];
    let mid = |i: usize| -2.0 * (1.0 + 5.0 * h12 * q[i]);
    let w = if is_low(j) {
        let mut w = vec![0.0; n];
        w[n - 2] = f.map_or(0.0, |f| 0.5 * h * h * f[n - 1]);
        for i in (1..n - 1).rev() {
            w[i - 1] = (rhs(i) - mid(i) * w[i] - lo(i + 1) * w[i + 1]) / lo(i - 1);
        }
        w
    } else {
        // unknowns w[1..n]; last row closes with w[n-2] = e^{gamma h} w[n-1]
        let m = n - 1;
        let (mut a, mut b, mut c, mut d) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for r in 0..m - 1 {
            let i = r + 1;
            a[r] = lo(i - 1);
            b[r] = mid(i);
            c[r] = lo(i + 1);
            d[r] = rhs(i);
        }
        d[0] -= a[0] * dirichlet;
        a[0] = 0.0;
        a[m - 1] = 1.0;
        b[m - 1] = -(half.gamma(j) * h).exp();
        let x = thomas(&a, &b, &c, &d)?;
        std::iter::once(dirichlet).chain(x).collect()
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("mode {j} solution not finite")));
    }
    Ok(w)
}

fn check_grid(half: &HalfCylinder, f: &ModeField) -> Result<()> {
    if f.len() != half.len() || (f.h - half.h()).abs() > 1e-12 || (f.s0 - half.s0).abs() > 1e-12 {
        return Err(Error::Domain("field grid does not match the half-cylinder grid".into()));
    }
    Ok(())
}

fn amplification(out: &ModeField, input: f64, mu: f64, s0: f64) -> Result<f64> {
    if input == 0.0 {
        return Ok(0.0);
    }
    Ok(WeightedNorm::new(mu, s0, 2)?.eval(out) / input)
}

fn run_modes(half: &HalfCylinder, jmax: i32, solve: impl Fn(i32) -> Result<Vec<f64>> + Sync + Send) -> Result<ModeField> {
    let values = (-jmax..=jmax).collect::<Vec<_>>().into_par_iter().map(solve).collect::<Result<Vec<_>>>()?;
    Ok(ModeField { s0: half.s0, h: half.h(), jmax, values })
}

/// Green operator without the norm bookkeeping.
pub(crate) fn green_field(half: &HalfCylinder, f: &ModeField) -> Result<ModeField> {
    check_grid(half, f)?;
    if f.jmax > half.jmax {
        return Err(Error::Domain(format!("forcing has modes up to {}, solver up to {}", f.jmax, half.jmax)));
    }
    run_modes(half, f.jmax, |j| {
        let fj = f.mode(j);
        if fj.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; fj.len()]);
        }
        solve_mode(half, j, Some(fj), 0.0)
    })
}

/// Green operator: L_j w_j = f_j with w_j(s0) = 0 on the high modes.
pub fn green_apply(half: &HalfCylinder, f: &ModeField, mu: f64) -> Result<BvpSolution> {
    check_mu(mu)?;
    let field = green_field(half, f)?;
    let fin = WeightedNorm::new(mu, half.s0, 0)?.eval(f);
    let amplification = amplification(&field, fin, mu, half.s0)?;
    Ok(BvpSolution { field, amplification })
}

/// Poisson operator: homogeneous L_j w_j = 0 with w_j(s0) = phi_j on the high modes.
pub fn poisson_apply(half: &HalfCylinder, phi: &BoundaryData, mu: f64) -> Result<BvpSolution> {
    check_mu(mu)?;
    if phi.has_low_modes() {
        return Err(Error::Precondition("Poisson data must have no modes |j| <= 1".into()));
    }
    if phi.jmax > half.jmax {
        return Err(Error::Domain(format!("data has modes up to {}, solver up to {}", phi.jmax, half.jmax)));
    }
    let field = run_modes(half, phi.jmax, |j| {
        let v = phi.get(j);
        if v == 0.0 {
            return Ok(vec![0.0; half.len()]);
        }
        solve_mode(half, j, None, v)
    })?;
    let amplification = amplification(&field, phi.norm(), mu, half.s0)?;
    Ok(BvpSolution { field, amplification })
}

/// Harmonic extension w_j(s) = phi_j e^{-|j| (s - s0)} on the grid s0 + i h.
pub fn flat_poisson(s0: f64, h: f64, n: usize, phi: &BoundaryData) -> Result<ModeField> {
    if phi.has_low_modes() {
        return Err(Error::Precondition("flat Poisson data must have no modes |j| <= 1".into()));
    }
    Ok(ModeField::from_fn(s0, h, n, phi.jmax, |j, s| phi.get(j) * (-(j.abs() as f64) * (s - s0)).exp()))
}

/// ||P_eps phi - P_0 phi|| / ||phi|| at s0 = S/8 in the order-2 weighted norm.
pub fn poisson_deviation(epsilon: f64, mu: f64, phi: &BoundaryData) -> Result<f64> {
    check_mu(mu)?;
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::Domain(format!("deviation scan needs eps <= 0.1, got {epsilon}")));
    }
    if phi.norm() == 0.0 {
        return Ok(0.0);
    }
    let params = crate::delaunay::NeckParams::new(epsilon)?;
    let s0 = crate::delaunay::period_s(params)? / 8.0;
    let half = HalfCylinder::new(params, s0, phi.jmax.max(2))?;
    let p = poisson_apply(&half, phi, mu)?.field;
    let mut d = flat_poisson(s0, half.h(), half.len(), phi)?.with_jmax(p.jmax);
    d.axpy(-1.0, &p);
    Ok(WeightedNorm::new(mu, s0, 2)?.eval(&d) / phi.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delaunay::{period_s, NeckParams};
    use crate::jacobi::mode_residual;

    fn half(eps: f64, s0: f64, jmax: i32) -> HalfCylinder {
        HalfCylinder::new(NeckParams::new(eps).unwrap(), s0, jmax).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let hc = half(0.3, 0.5, 3);
        let g = green_apply(&hc, &hc.zero_field(), 1.5).unwrap();
        assert_eq!(g.field.max_abs(), 0.0);
        let p = poisson_apply(&hc, &BoundaryData::zeros(3), 1.5).unwrap();
        assert_eq!(p.field.max_abs(), 0.0);
        assert!(green_apply(&hc, &hc.zero_field(), 2.5).is_err());
    }

    #[test]
    fn green_residuals() {
        let hc = half(0.3, 0.5, 3);
        for j in [2, 0, -1] {
            let f = hc.field_from_fn(|m, s| if m == j { (-1.5 * s).exp() } else { 0.0 });
            let w = green_apply(&hc, &f, 1.5).unwrap().field;
            let r = mode_residual(w.mode(j), &hc.profile, j, Some(f.mode(j)));
            assert!(r < 1e-7, "mode {j} residual {r}");
            for m in -3..=3 {
                if m != j {
                    assert!(w.mode(m).iter().all(|&v| v == 0.0));
                }
            }
            let decay = (0..w.len()).map(|i| w.mode(j)[i].abs() * (1.5 * w.s(i)).exp()).fold(0.0, f64::max);
            assert!(decay < 10.0, "{decay}");
            if j == 2 {
                assert_eq!(w.mode(j)[0], 0.0);
            }
        }
    }

    #[test]
    fn cylinder_poisson_is_exponential() {
        let hc = half(1.0, 0.0, 2);
        let p = poisson_apply(&hc, &BoundaryData::single(2, 2, 1.0), 1.5).unwrap().field;
        let dev = (0..p.len()).map(|i| (p.mode(2)[i] - (-(3f64.sqrt()) * p.s(i)).exp()).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-8, "{dev}");
    }

    #[test]
    fn poisson_decays_at_small_necksize() {
        let params = NeckParams::new(0.1).unwrap();
        let s0 = period_s(params).unwrap() / 8.0;
        let hc = HalfCylinder::new(params, s0, 2).unwrap();
        let p = poisson_apply(&hc, &BoundaryData::single(2, 2, 1.0), 1.5).unwrap();
        assert!(p.field.mode(2).last().unwrap().abs() < 1e-20);
        assert!(p.amplification.is_finite() && p.amplification < 50.0, "{}", p.amplification);
        assert!(poisson_apply(&hc, &BoundaryData::single(2, 1, 1.0), 1.5).is_err());
    }

    #[test]
    fn linear_in_the_forcing() {
        let hc = half(0.3, 0.5, 2);
        let f = hc.field_from_fn(|j, s| (j as f64 + 0.5) * (-1.4 * s).exp());
        let g = hc.field_from_fn(|j, s| (s * j as f64).cos() * (-1.7 * s).exp());
        let mut comb = f.clone();
        for v in comb.values.iter_mut().flatten() {
            *v *= 2.0;
        }
        comb.axpy(-3.0, &g);
        let lhs = green_apply(&hc, &comb, 1.5).unwrap().field;
        let mut rhs = green_apply(&hc, &f, 1.5).unwrap().field;
        for v in rhs.values.iter_mut().flatten() {
            *v *= 2.0;
        }
        rhs.axpy(-3.0, &green_apply(&hc, &g, 1.5).unwrap().field);
        assert!(lhs.max_diff(&rhs) < 1e-9);
    }

    #[test]
    fn far_boundary_is_harmless() {
        let params = NeckParams::new(0.3).unwrap();
        let s = period_s(params).unwrap();
        let a = HalfCylinder::new(params, 0.5, 2).unwrap();
        let b = HalfCylinder::with_far(params, 0.5, 0.5 + 2.0 * (a.s_far - 0.5), 2).unwrap();
        let f = |hc: &HalfCylinder| hc.field_from_fn(|j, s| if j.abs() != 1 { (-1.5 * s).exp() } else { 0.0 });
        let wa = green_apply(&a, &f(&a), 1.5).unwrap().field;
        let wb = green_apply(&b, &f(&b), 1.5).unwrap().field;
        let n = a.index_within(2.0 * s) + 1;
        let scale = wa.truncated(n).max_abs();
        let diff = wa.truncated(n).max_diff(&wb.truncated(n));
        assert!(diff <= 1e-6 * scale, "{diff} vs {scale}");
    }

    #[test]
    fn flat_extension() {
        let mut phi = BoundaryData::single(3, 3, 1.0);
        phi.set(-2, 1.0);
        let w = flat_poisson(1.0, 0.01, 300, &phi).unwrap();
        assert!((w.mode(3)[100] - (-3.0f64).exp()).abs() < 1e-15);
        assert!((w.mode(-2)[100] - (-2.0f64).exp()).abs() < 1e-15);
        let slope = w.slope(-2)[0];
        assert!((slope + 2.0).abs() < 1e-7);
        assert_eq!(poisson_deviation(0.01, 1.5, &BoundaryData::zeros(2)).unwrap(), 0.0);
    }
}
