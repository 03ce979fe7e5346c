//! Closed-form Jacobi fields of the low modes and their small-necksize limits.

use super::{JacobiField, ModeFunction, Sign};
use crate::delaunay::{DelaunayProfile, NeckParams};
use crate::{Error, Result};
use serde::Serialize;

/// Relative step in tau for the parameter derivatives. The quotients are
/// Richardson-extrapolated, so the truncation error is O(step^4) while the
/// roundoff of the two profile solves is divided by tau * step.
const TAU_STEP: f64 = 1e-3;

/// Smallest relative step accepted near the cylinder.
const MIN_TAU_STEP: f64 = 1e-5;

/// d sigma / d tau and d k / d tau sampled on a profile grid.
#[derive(Clone, Debug)]
pub struct TauDerivatives {
    pub d_sigma: Vec<f64>,
    pub d_k: Vec<f64>,
    /// sup difference between the step-h and step-h/2 quotients.
    pub richardson_gap: f64,
}

impl TauDerivatives {
    pub fn compute(profile: &DelaunayProfile) -> Result<Self> {
        let tau = profile.params.tau;
        // tau (1 + step) must stay below the cylinder value 1
        let step = TAU_STEP.min(0.5 * (1.0 / tau - 1.0));
        if step < MIN_TAU_STEP {
            return Err(Error::Config(format!(
                "tau derivatives need tau (1 + 2 {MIN_TAU_STEP}) <= 1, got tau = {tau}"
            )));
        }
        let quotient = |h: f64| -> Result<(Vec<f64>, Vec<f64>)> {
            let dt = tau * h;
            let p = pair(profile, tau + dt)?;
            let m = pair(profile, tau - dt)?;
            let ds = p.0.iter().zip(&m.0).map(|(a, b)| (a - b) / (2.0 * dt)).collect();
            let dk = p.1.iter().zip(&m.1).map(|(a, b)| (a - b) / (2.0 * dt)).collect();
            Ok((ds, dk))
        };
        let (s1, k1) = quotient(step)?;
        let (s2, k2) = quotient(0.5 * step)?;
        let gap = s1.iter().zip(&s2).chain(k1.iter().zip(&k2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let extrapolate = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (4.0 * y - x) / 3.0).collect();
        Ok(TauDerivatives { d_sigma: extrapolate(&s1, &s2), d_k: extrapolate(&k1, &k2), richardson_gap: gap })
    }
}

fn pair(profile: &DelaunayProfile, tau: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let params = NeckParams::from_tau(tau)?;
    let p = DelaunayProfile::on_grid(params, profile.grid[0], profile.step(), profile.len())?;
    Ok((p.sigma, p.k))
}

/// Sample the closed-form field of mode j in {-1, 0, 1}.
pub fn explicit_jacobi(profile: &DelaunayProfile, j: i32, sign: Sign) -> Result<JacobiField> {
    if j.abs() > 1 {
        return Err(Error::Domain(format!("closed-form Jacobi fields exist for |j| <= 1, got {j}")));
    }
    let tau = profile.params.tau;
    let n = profile.len();
    let values: Vec<f64> = match (j.abs(), sign) {
        (0, Sign::Plus) => profile.sigma_s.clone(),
        (0, Sign::Minus) => {
            let d = TauDerivatives::compute(profile)?;
            let c = (1.0 - tau * tau).sqrt();
            (0..n)
                .map(|i| {
                    let (sg, ss) = (profile.sigma[i], profile.sigma_s[i]);
                    c / tau * ss * d.d_k[i] - c * sg.exp() * sg.cosh() * (1.0 + tau * d.d_sigma[i])
                })
                .collect()
        }
        (_, Sign::Plus) => profile.sigma.iter().map(|s| -tau * s.cosh()).collect(),
        (_, Sign::Minus) => (0..n)
            .map(|i| {
                let (sg, ss, k) = (profile.sigma[i], profile.sigma_s[i], profile.k[i]);
                -k * tau * sg.cosh() - tau * ss * sg.exp()
            })
            .collect(),
    };
    Ok(JacobiField { j, sign, f: ModeFunction { j, grid: profile.grid.clone(), values, derivs: None } })
}

/// sup |w'' + (tau^2 cosh 2 sigma - j^2) w| with a five-point second difference.
pub fn jacobi_residual(field: &JacobiField, profile: &DelaunayProfile) -> f64 {
    mode_residual(&field.f.values, profile, field.j, None)
}

/// Residual of w'' - Q_j w = f on the grid interior (f = 0 when absent).
pub fn mode_residual(w: &[f64], profile: &DelaunayProfile, j: i32, f: Option<&[f64]>) -> f64 {
    let h = profile.step();
    let j2 = (j * j) as f64;
    let c = 1.0 / (12.0 * h * h);
    (2..w.len().saturating_sub(2))
        .map(|i| {
            let d2 = c * (-w[i - 2] + 16.0 * w[i - 1] - 30.0 * w[i] + 16.0 * w[i + 1] - w[i + 2]);
            let r = d2 + (profile.potential(i) - j2) * w[i] - f.map_or(0.0, |f| f[i]);
            r.abs()
        })
        .fold(0.0, f64::max)
}

/// Limit of the field as the necksize goes to zero (rescaled by 1/eps for (1, -)).
pub fn limit_profile(j: i32, sign: Sign, s: f64) -> f64 {
    match (j.abs(), sign) {
        (0, Sign::Plus) => s.tanh(),
        (0, Sign::Minus) => -(1.0 - s * s.tanh()),
        (_, Sign::Plus) => -1.0 / s.cosh(),
        (_, Sign::Minus) => -(s / s.cosh() + s.sinh()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitRow {
    pub epsilon: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub j: i32,
    pub sign: Sign,
    pub rows: Vec<LimitRow>,
    pub monotone: bool,
}

/// Deviation from the limit on |s| <= 3 for each necksize of the scan.
pub fn jacobi_limits_report(epsilons: &[f64], j: i32, sign: Sign) -> Result<LimitReport> {
    if let Some(e) = epsilons.iter().find(|&&e| !(e > 0.0 && e <= 0.01)) {
        return Err(Error::Domain(format!("limit scan needs 0 < eps <= 0.01, got {e}")));
    }
    let rows = epsilons
        .iter()
        .map(|&eps| {
            let profile = crate::delaunay::solve_profile(NeckParams::new(eps)?, 3.0, 0.01)?;
            let field = explicit_jacobi(&profile, j, sign)?;
            let scale = if j != 0 && sign == Sign::Minus { 1.0 / eps } else { 1.0 };
            let deviation = profile
                .grid
                .iter()
                .zip(&field.f.values)
                .map(|(&s, &v)| (scale * v - limit_profile(j, sign, s)).abs())
                .fold(0.0, f64::max);
            Ok(LimitRow { epsilon: eps, deviation })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    Ok(LimitReport { j, sign, rows, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delaunay::solve_profile;

    fn profile(eps: f64, s_max: f64) -> DelaunayProfile {
        solve_profile(NeckParams::new(eps).unwrap(), s_max, 0.01).unwrap()
    }

    #[test]
    fn cylinder_rotation_field() {
        let p = profile(1.0, 2.0);
        let f = explicit_jacobi(&p, 1, Sign::Plus).unwrap();
        assert!(f.f.values.iter().all(|&v| (v + 1.0).abs() < 1e-15));
        assert!(jacobi_residual(&f, &p) < 1e-12);
        assert!(matches!(explicit_jacobi(&p, 0, Sign::Minus), Err(Error::Config(_))));
    }

    #[test]
    fn residuals_at_moderate_necksize() {
        let p = profile(0.3, 12.0);
        for (j, sign, tol) in [
            (0, Sign::Plus, 1e-6),
            (1, Sign::Plus, 1e-6),
            (-1, Sign::Minus, 1e-6),
            (1, Sign::Minus, 1e-6),
            (0, Sign::Minus, 1e-4),
        ] {
            let f = explicit_jacobi(&p, j, sign).unwrap();
            let r = jacobi_residual(&f, &p);
            assert!(r < tol, "({j}, {sign:?}) residual {r}");
        }
    }

    // The variant -k tau (cosh sigma + sigma_s e^sigma) is not a Jacobi field.
    #[test]
    fn grouped_rotation_variant_fails() {
        let p = profile(0.3, 12.0);
        let tau = p.params.tau;
        let w: Vec<f64> = (0..p.len())
            .map(|i| -p.k[i] * tau * (p.sigma[i].cosh() + p.sigma_s[i] * p.sigma[i].exp()))
            .collect();
        assert!(mode_residual(&w, &p, 1, None) > 1e-2);
    }

    #[test]
    fn necksize_field_at_waist() {
        let p = profile(0.2, 2.0);
        let f = explicit_jacobi(&p, 0, Sign::Minus).unwrap();
        let i0 = p.index_of(0.0);
        assert!((f.f.values[i0] + 1.0).abs() < 1e-8);
        let d = TauDerivatives::compute(&p).unwrap();
        assert!(d.richardson_gap < 1e-5, "{}", d.richardson_gap);
    }

    #[test]
    fn growth_is_at_most_linear() {
        let p = profile(0.3, 40.0);
        for sign in [Sign::Plus, Sign::Minus] {
            for j in [0, 1] {
                let f = explicit_jacobi(&p, j, sign).unwrap();
                let c = p
                    .grid
                    .iter()
                    .zip(&f.f.values)
                    .map(|(s, v)| v.abs() / (1.0 + s.abs()))
                    .fold(0.0, f64::max);
                assert!(c < 10.0, "({j}, {sign:?}) {c}");
            }
        }
        let f = explicit_jacobi(&p, 1, Sign::Plus).unwrap();
        assert!(f.f.values.iter().all(|v| v.abs() <= 2.0));
    }

    #[test]
    fn limits_decrease() {
        let eps = [1e-2, 1e-3, 1e-4];
        for (j, sign) in [(0, Sign::Plus), (0, Sign::Minus), (1, Sign::Plus), (1, Sign::Minus)] {
            let r = jacobi_limits_report(&eps, j, sign).unwrap();
            assert!(r.monotone, "({j}, {sign:?}) {:?}", r.rows);
        }
        let p = profile(1e-4, 2.0);
        let f = explicit_jacobi(&p, 1, Sign::Plus).unwrap();
        let v = f.f.values[p.index_of(1.0)];
        assert!((v + 1.0 / 1f64.cosh()).abs() <= 0.05);
        assert!(jacobi_limits_report(&[0.1], 0, Sign::Plus).is_err());
    }
}
