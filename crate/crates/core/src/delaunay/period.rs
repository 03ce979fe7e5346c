use super::integrator::{substeps, Flow, PhaseState};
use super::{NeckParams, MAX_INNER_STEP};
use crate::error::{Error, Result};
use crate::quad::integrate;

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// Period S of sigma, four times the quarter-period integral
/// of dx / sqrt(1 - tau^2 cosh^2 x) over [sigma(0), 0].
///
/// With x = sigma0 + a y^2 (a = -sigma0) the turning-point singularity cancels
/// against dx = 2 a y dy once the radicand is written in product form.
pub fn period_s(params: NeckParams) -> Result<f64> {
    if params.is_cylinder() {
        return Err(Error::Domain("period is undefined for the cylinder".into()));
    }
    let s0 = params.sigma0();
    let a = -s0;
    let t2 = params.tau2();
    let ch0 = s0.cosh();
    let f = |y: f64| {
        let x = s0 + a * y * y;
        let u = 0.5 * a * y * y;
        // 1 - tau^2 cosh^2 x = tau^2 a y^2 sinh(|s0 + x| / 2) sinhc(u) (cosh s0 + cosh x)
        let rad = t2 * a * (0.5 * (s0 + x).abs()).sinh() * sinhc(u) * (ch0 + x.cosh());
        2.0 * a / rad.sqrt()
    };
    let (q, err) = integrate(f, 0.0, 1.0, 1e-13)?;
    if !(q.is_finite() && q > 0.0) || err > 1e-9 {
        return Err(Error::Numerical(format!("period quadrature failed (value {q}, error {err:e})")));
    }
    Ok(4.0 * q)
}

/// First zero of sigma for s > 0 located on the integrated trajectory; equals S/4.
pub fn quarter_crossing(params: NeckParams) -> Result<f64> {
    if params.is_cylinder() {
        return Err(Error::Domain("sigma vanishes identically on the cylinder".into()));
    }
    let flow = Flow::new(params.tau2());
    let h = MAX_INNER_STEP;
    let mut st = PhaseState { sigma: params.sigma0(), p: 0.0, k: 0.0 };
    let mut s = 0.0;
    let limit = 200.0 + 10.0 * (1.0 / params.epsilon).ln();
    while s < limit {
        let prev = st;
        flow.step(&mut st, h);
        if prev.sigma < 0.0 && st.sigma >= 0.0 {
            // Newton on the quintic Hermite interpolant of the bracketing step
            let t2 = params.tau2();
            let acc = |x: f64| -0.5 * t2 * (2.0 * x).sinh();
            let a = [prev.sigma, prev.p, acc(prev.sigma)];
            let b = [st.sigma, st.p, acc(st.sigma)];
            let mut t = -prev.sigma / (st.sigma - prev.sigma);
            for _ in 0..30 {
                let (v, d, _) = super::quintic(t, h, a, b);
                let dt = v / (d * h);
                t -= dt;
                if dt.abs() < 1e-15 {
                    break;
                }
            }
            // refine with a short direct integration to the estimated root
            let root = s + t * h;
            let mut probe = prev;
            let n = substeps(t * h, 1e-4);
            for _ in 0..n {
                flow.step(&mut probe, t * h / n as f64);
            }
            let corr = -probe.sigma / probe.p;
            return Ok(root + corr);
        }
        s += h;
    }
    Err(Error::Numerical("no zero crossing of sigma found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_agrees_with_zero_crossing() {
        for &eps in &[0.5, 0.1, 0.01] {
            let p = NeckParams::new(eps).unwrap();
            let s = period_s(p).unwrap();
            let q = quarter_crossing(p).unwrap();
            assert!((s / 4.0 - q).abs() < 1e-9, "eps {eps}: {} vs {q}", s / 4.0);
        }
    }

    #[test]
    fn near_cylinder_period_approaches_small_oscillation_limit() {
        // linearizing at sigma = 0 with tau -> 1 gives sigma'' = -tau^2 sigma
        let p = NeckParams::new(1.0 - 1e-6).unwrap();
        let s = period_s(p).unwrap();
        assert!((s - 2.0 * std::f64::consts::PI / p.tau).abs() < 1e-4);
    }
}
