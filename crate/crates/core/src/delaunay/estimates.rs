use super::DelaunayProfile;
use serde::Serialize;

/// One asymptotic estimate: a normalized error measured over its range and
/// compared with a constant fitted over decade scans.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateCheck {
    pub name: &'static str,
    pub range: String,
    /// "upper": measured <= constant; "lower": measured >= constant.
    pub kind: &'static str,
    pub measured: f64,
    pub constant: f64,
    pub pass: bool,
    pub skipped: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub epsilon: f64,
    pub asymptotic: bool,
    pub note: Option<String>,
    pub period_s: Option<f64>,
    pub checks: Vec<EstimateCheck>,
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.skipped || c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&EstimateCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

// Constants fitted over eps in {1e-1, ..., 1e-4}, with a factor two of headroom.
// The eps^2 log(1/eps) normalization of the axial expansion is not uniform below
// eps ~ 1e-3 (measured 0.41, 0.49, 0.89, 1.99 per decade); the remainder at
// s = S/8 scales like eps^{3/2}, which the second axial check tracks.
const C_NECK_COSH: f64 = 0.5;
const C_AXIAL: f64 = 1.0;
const C_AXIAL_RATE: f64 = 0.5;
const C_RADIUS: f64 = 0.1;
const C_RADIUS_FLOOR: f64 = 0.5;
const C_POT_MID: f64 = 5.0;
const C_POT_TAIL: f64 = 0.5;
const C_POT_LIMIT: f64 = 2.0;

fn sup_over<F: Fn(usize) -> Option<f64>>(p: &DelaunayProfile, a: f64, b: f64, f: F) -> Option<f64> {
    if !p.covers(a, b) {
        return None;
    }
    let mut m: Option<f64> = None;
    for i in 0..p.len() {
        let s = p.grid[i];
        if s < a - 1e-12 || s > b + 1e-12 {
            continue;
        }
        if let Some(v) = f(i) {
            m = Some(m.map_or(v, |x: f64| x.max(v)));
        }
    }
    m
}

fn check(name: &'static str, range: String, kind: &'static str, measured: Option<f64>, constant: f64) -> EstimateCheck {
    match measured {
        Some(m) => EstimateCheck {
            name,
            range,
            kind,
            measured: m,
            constant,
            pass: if kind == "lower" { m >= constant } else { m <= constant },
            skipped: false,
        },
        None => EstimateCheck { name, range, kind, measured: f64::NAN, constant, pass: false, skipped: true },
    }
}

/// Measure the small-necksize estimates on a profile.
///
/// Profiles with eps > 0.1 are flagged as outside the asymptotic regime and
/// every check is skipped.
pub fn check_profile_estimates(profile: &DelaunayProfile) -> EstimateReport {
    let params = profile.params;
    let eps = params.epsilon;
    if eps > 0.1 || profile.period_s.is_none() {
        return EstimateReport {
            epsilon: eps,
            asymptotic: false,
            note: Some("out of asymptotic regime".into()),
            period_s: profile.period_s,
            checks: Vec::new(),
        };
    }
    let s_per = profile.period_s.unwrap();
    let tau = params.tau;
    let t2 = params.tau2();
    let log_inv = (1.0 / eps).ln();
    let s8 = s_per / 8.0;
    let mut checks = Vec::new();

    let m = sup_over(profile, -s8, s8, |i| {
        let s = profile.grid[i];
        Some((tau * profile.sigma[i].cosh() - 1.0 / s.cosh()).abs() / eps.sqrt())
    });
    checks.push(check("neck_cosh", format!("|s| <= {s8:.6}"), "upper", m, C_NECK_COSH));

    let m = sup_over(profile, 0.0, s8, |i| {
        let s = profile.grid[i];
        let model = eps * s + eps * eps / 8.0 * (2.0 * s).exp();
        Some((profile.k[i] - model).abs() / (eps * eps * log_inv))
    });
    checks.push(check("axial_expansion", format!("0 <= s <= {s8:.6}"), "upper", m, C_AXIAL));
    let m = m.map(|x| x * eps * eps * log_inv / eps.powf(1.5));
    checks.push(check("axial_expansion_rate", format!("0 <= s <= {s8:.6}"), "upper", m, C_AXIAL_RATE));

    let t_max = 0.5 * eps * log_inv;
    let m = sup_over(profile, 0.0, s8, |i| {
        let t = profile.k[i];
        if t <= 0.0 || t >= t_max {
            return None;
        }
        let rho = profile.rho(i);
        Some((rho - eps * (t / eps).cosh()).abs() / (eps * eps * (3.0 * t / eps).exp()))
    });
    checks.push(check("radius_vs_catenoid", format!("0 < t < {t_max:.6}"), "upper", m, C_RADIUS));

    let m = sup_over(profile, s8, 3.0 * s8, |i| Some(-profile.rho(i) / eps.powf(0.75)));
    checks.push(check(
        "radius_floor",
        format!("{s8:.6} <= s <= {:.6}", 3.0 * s8),
        "lower",
        m.map(|x| -x),
        C_RADIUS_FLOOR,
    ));

    let m = sup_over(profile, s8, 3.0 * s8, |i| Some(profile.potential(i) / eps.sqrt()));
    checks.push(check("potential_middle", format!("{s8:.6} <= s <= {:.6}", 3.0 * s8), "upper", m, C_POT_MID));

    let m = sup_over(profile, 3.0 * s8, 4.0 * s8, |i| {
        Some(profile.potential(i) / (eps * eps * (2.0 * profile.grid[i]).exp()))
    });
    checks.push(check("potential_tail", format!("{:.6} <= s <= {:.6}", 3.0 * s8, 4.0 * s8), "upper", m, C_POT_TAIL));

    let lo = profile.grid[0];
    let hi = profile.grid[profile.len() - 1];
    let m = sup_over(profile, lo, hi, |i| Some(profile.potential(i) - (2.0 - t2)));
    checks.push(check("potential_ceiling", "whole profile".into(), "upper", m, 1e-12));

    let m = sup_over(profile, -3.0, 3.0, |i| {
        let s = profile.grid[i];
        Some((profile.potential(i) - 2.0 / s.cosh().powi(2)).abs() / eps.sqrt())
    });
    checks.push(check("potential_limit", "|s| <= 3".into(), "upper", m, C_POT_LIMIT));

    EstimateReport { epsilon: eps, asymptotic: true, note: None, period_s: Some(s_per), checks }
}
