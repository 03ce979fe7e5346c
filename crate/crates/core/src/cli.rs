//! Command line driver: one subcommand per experiment, JSON config files with
//! flag overrides, CSV/JSON/OBJ outputs and a summary JSON for every run.

use crate::bvp::{poisson_apply, poisson_deviation, BoundaryData, HalfCylinder};
use crate::cmc_graph::{cauchy_data, solve_graph, GraphOptions, GRAPH_JMAX};
use crate::delaunay::{check_profile_estimates, default_step, period_s, period_t, solve_profile, NeckParams};
use crate::geometry::{
    export_mesh, sample_mesh, CatenoidPatch, CylinderPatch, DelaunayPatch, MeshFormat, SpherePatch, SurfaceMesh,
};
use crate::gluing::{assemble_glued, write_glued, GlueConfig, GlueOptions};
use crate::jacobi::{explicit_jacobi, floquet, jacobi_residual, Sign};
use crate::output::{round9, to_json_value, write_csv_rows, write_json};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

/// Version with the source revision, e.g. `0.1.0-g3045f26`.
pub fn version() -> String {
    match option_env!("DELAUNAY_GLUE_GIT") {
        Some(rev) if !rev.is_empty() => format!("{}-g{rev}", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Parser, Debug)]
#[command(name = "delaunay-glue", about = "CMC surfaces with Delaunay ends", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Necksize.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Weight exponent of the weighted norms.
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Size exponent of the end deformations.
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Angular mode.
    #[arg(long, global = true, allow_hyphen_values = true)]
    j: Option<i32>,
    /// JSON config; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Iteration tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Summary JSON path (default: <out-dir>/summary.json, <out>.summary.json or <command>.summary.json).
    #[arg(long, global = true)]
    summary: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Delaunay profile over a window of whole periods, as CSV.
    Profile {
        #[arg(long)]
        periods: Option<f64>,
    },
    /// Periods S and T with their small-necksize normalizations.
    Periods {
        #[arg(long, value_delimiter = ',')]
        epsilons: Vec<f64>,
    },
    /// Small-necksize estimates of one profile.
    Estimates,
    /// Residuals of the closed-form low-mode Jacobi fields.
    Jacobi,
    /// Floquet exponent of mode j.
    Floquet,
    /// Poisson operator of a single mode on the half-cylinder from S/8.
    Bvp,
    /// Nonlinear CMC graph with data amplitude * eps^{3/4} chi_j.
    Graph {
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Two-ended gluing: OBJ pieces and residual JSON.
    Glue,
    /// Sample and export a surface patch with its mean curvature.
    Mesh {
        /// delaunay, catenoid, sphere or cylinder.
        #[arg(long)]
        surface: Option<String>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        /// obj or ply.
        #[arg(long)]
        format: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Profile { .. } => "profile",
            Command::Periods { .. } => "periods",
            Command::Estimates => "estimates",
            Command::Jacobi => "jacobi",
            Command::Floquet => "floquet",
            Command::Bvp => "bvp",
            Command::Graph { .. } => "graph",
            Command::Glue => "glue",
            Command::Mesh { .. } => "mesh",
        }
    }
}

/// Resolved parameters: flags first, then the config file.
struct Params {
    file: Map<String, Value>,
    echo: Map<String, Value>,
}

impl Params {
    fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            None => Map::new(),
            Some(p) => match serde_json::from_str(&std::fs::read_to_string(p)?)? {
                Value::Object(m) => m,
                _ => return Err(Error::Config(format!("{}: config must be a JSON object", p.display()))),
            },
        };
        Ok(Params { file, echo: Map::new() })
    }

    fn value(&mut self, key: &str, flag: Option<Value>) -> Option<Value> {
        let v = flag.or_else(|| self.file.get(key).cloned());
        if let Some(v) = &v {
            self.echo.insert(key.into(), v.clone());
        }
        v
    }

    fn f64(&mut self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        match self.value(key, flag.map(|x| json!(x))) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| Error::Config(format!("{key} must be a number"))),
        }
    }

    fn f64_or(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        let v = self.f64(key, flag)?.unwrap_or(default);
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn require(&mut self, key: &str, flag: Option<f64>) -> Result<f64> {
        self.f64(key, flag)?.ok_or_else(|| Error::Config(format!("--{key} is required")))
    }

    fn int_or(&mut self, key: &str, flag: Option<i64>, default: i64) -> Result<i64> {
        let v = match self.value(key, flag.map(|x| json!(x))) {
            None => default,
            Some(v) => v.as_i64().ok_or_else(|| Error::Config(format!("{key} must be an integer")))?,
        };
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn string_or(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<String> {
        let v = match self.value(key, flag.map(Value::String)) {
            None => default.to_string(),
            Some(v) => v.as_str().ok_or_else(|| Error::Config(format!("{key} must be a string")))?.to_string(),
        };
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }
}

struct Outputs {
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
}

impl Outputs {
    /// `--out`, else `<out-dir>/<default_name>`, else nothing.
    fn file(&self, default_name: &str) -> Result<Option<PathBuf>> {
        if let Some(p) = &self.out {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            return Ok(Some(p.clone()));
        }
        match &self.out_dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                Ok(Some(d.join(default_name)))
            }
            None => Ok(None),
        }
    }
}

fn summary_path(common: &Common, name: &str) -> PathBuf {
    if let Some(p) = &common.summary {
        return p.clone();
    }
    if let Some(d) = &common.out_dir {
        return d.join("summary.json");
    }
    if let Some(o) = &common.out {
        let mut s = o.clone().into_os_string();
        s.push(".summary.json");
        return PathBuf::from(s);
    }
    PathBuf::from(format!("{name}.summary.json"))
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("DELAUNAY_GLUE_LOG", "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parse `argv` (program name first), run the subcommand and return the exit
/// code: 0 success, 1 usage, 2 precondition or configuration error, 3 numerical failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let name = cli.command.name();
    let start = Instant::now();
    let mut params = match Params::load(cli.common.config.as_deref()) {
        Ok(p) => p,
        Err(e) => Params { file: Map::new(), echo: Map::from_iter([("config_error".to_string(), json!(e.to_string()))]) },
    };
    let load_error = params.echo.remove("config_error");
    let outcome = match load_error {
        Some(msg) => Err(Error::Config(msg.as_str().unwrap_or_default().to_string())),
        None => with_threads(cli.common.threads, || dispatch(&cli.command, &cli.common, &mut params)),
    };
    let (code, status) = match &outcome {
        Ok(_) => (0, "ok"),
        Err(e) => (e.exit_code(), "error"),
    };
    let mut summary = json!({
        "version": version(),
        "subcommand": name,
        "config": Value::Object(params.echo.clone()),
        "status": status,
        "exit_code": code,
    });
    match outcome {
        Ok(result) => summary["result"] = result,
        Err(e) => {
            eprintln!("error: {e}");
            summary["error"] = json!(e.to_string());
        }
    }
    summary["wall_time_s"] = json!(round9(start.elapsed().as_secs_f64()));
    let path = summary_path(&cli.common, name);
    if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        let _ = std::fs::create_dir_all(parent);
    }
    if let Err(e) = write_json(&path, &summary) {
        eprintln!("error: cannot write summary {}: {e}", path.display());
        return if code == 0 { 3 } else { code };
    }
    code
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads.filter(|&n| n > 0).map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build()) {
        Some(Ok(pool)) => pool.install(f),
        _ => f(),
    }
}

fn dispatch(cmd: &Command, c: &Common, p: &mut Params) -> Result<Value> {
    let outs = Outputs { out: c.out.clone(), out_dir: c.out_dir.clone() };
    match cmd {
        Command::Profile { periods } => profile(c, p, &outs, *periods),
        Command::Periods { epsilons } => periods(c, p, &outs, epsilons),
        Command::Estimates => estimates(c, p, &outs),
        Command::Jacobi => jacobi(c, p, &outs),
        Command::Floquet => floquet_cmd(c, p, &outs),
        Command::Bvp => bvp(c, p, &outs),
        Command::Graph { amplitude } => graph(c, p, &outs, *amplitude),
        Command::Glue => glue(c, p, &outs),
        Command::Mesh { surface, rows, cols, format } => mesh(c, p, &outs, surface.clone(), *rows, *cols, format.clone()),
    }
}

fn profile(c: &Common, p: &mut Params, outs: &Outputs, periods: Option<f64>) -> Result<Value> {
    let eps = p.require("epsilon", c.epsilon)?;
    let periods = p.f64_or("periods", periods, 2.0)?;
    let params = NeckParams::new(eps)?;
    let (window, s) = if params.is_cylinder() { (periods * 10.0, None) } else {
        let s = period_s(params)?;
        (periods * s, Some(s))
    };
    let pr = solve_profile(params, window, default_step(params)?)?;
    if let Some(path) = outs.file("profile.csv")? {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        pr.write_csv(&mut w)?;
        std::io::Write::flush(&mut w)?;
    }
    let t = if s.is_some() { Some(period_t(&pr)?) } else { None };
    Ok(json!({
        "epsilon": eps,
        "tau": params.tau,
        "period_s": s,
        "period_t": t,
        "points": pr.len(),
        "max_invariant_drift": pr.max_invariant_drift(),
    }))
}

fn period_row(eps: f64) -> Result<Vec<f64>> {
    let params = NeckParams::new(eps)?;
    if params.is_cylinder() {
        return Err(Error::Domain("the cylinder has no period".into()));
    }
    let s = period_s(params)?;
    let pr = solve_profile(params, 1.01 * s, default_step(params)?)?;
    let t = period_t(&pr)?;
    let tau = params.tau;
    Ok(vec![eps, tau, s, t, s + 4.0 * tau.ln(), (t - 4.0 - 2.0 * eps * (1.0 / eps).ln()) / eps])
}

fn periods(c: &Common, p: &mut Params, outs: &Outputs, list: &[f64]) -> Result<Value> {
    let eps: Vec<f64> = if !list.is_empty() {
        list.to_vec()
    } else if let Some(v) = p.file.get("epsilons").and_then(Value::as_array) {
        v.iter().map(|x| x.as_f64().ok_or_else(|| Error::Config("epsilons must be numbers".into()))).collect::<Result<_>>()?
    } else {
        vec![p.require("epsilon", c.epsilon)?]
    };
    p.echo.insert("epsilons".into(), json!(eps));
    let rows = eps.iter().map(|&e| period_row(e)).collect::<Result<Vec<_>>>()?;
    let header = ["epsilon", "tau", "period_s", "period_t", "s_plus_4_log_tau", "t_deviation_over_eps"];
    if let Some(path) = outs.file("periods.csv")? {
        write_csv_rows(&path, &header, &rows)?;
    }
    let table: Vec<Value> =
        rows.iter().map(|r| Value::Object(header.iter().zip(r).map(|(h, v)| (h.to_string(), json!(v))).collect())).collect();
    Ok(json!({ "rows": table }))
}

fn estimates(c: &Common, p: &mut Params, outs: &Outputs) -> Result<Value> {
    let eps = p.require("epsilon", c.epsilon)?;
    let params = NeckParams::new(eps)?;
    let window = if params.is_cylinder() { 10.0 } else { 1.01 * period_s(params)? };
    let pr = solve_profile(params, window, default_step(params)?)?;
    let report = check_profile_estimates(&pr);
    if let Some(path) = outs.file("estimates.json")? {
        write_json(&path, &report)?;
    }
    let mut v = to_json_value(&report)?;
    v["all_pass"] = json!(report.all_pass());
    Ok(v)
}

fn jacobi(c: &Common, p: &mut Params, outs: &Outputs) -> Result<Value> {
    let eps = p.require("epsilon", c.epsilon)?;
    let modes: Vec<i32> = match p.value("j", c.j.map(|j| json!(j))) {
        Some(v) => vec![v.as_i64().ok_or_else(|| Error::Config("j must be an integer".into()))? as i32],
        None => vec![-1, 0, 1],
    };
    let params = NeckParams::new(eps)?;
    let window = if params.is_cylinder() { 10.0 } else { period_s(params)? };
    let pr = solve_profile(params, window, default_step(params)?)?;
    let mut rows = Vec::new();
    for &j in &modes {
        for sign in [Sign::Plus, Sign::Minus] {
            let field = explicit_jacobi(&pr, j, sign)?;
            rows.push(json!({ "j": j, "sign": sign, "residual": jacobi_residual(&field, &pr) }));
        }
    }
    let result = json!({ "epsilon": eps, "fields": rows });
    if let Some(path) = outs.file("jacobi.json")? {
        write_json(&path, &result)?;
    }
    Ok(result)
}

fn floquet_cmd(c: &Common, p: &mut Params, outs: &Outputs) -> Result<Value> {
    let eps = p.require("epsilon", c.epsilon)?;
    let j = p.int_or("j", c.j.map(i64::from), 2)? as i32;
    let f = floquet(NeckParams::new(eps)?, j)?;
    println!("gamma = {}", round9(f.gamma));
    if let Some(path) = outs.file("floquet.json")? {
        write_json(&path, &f)?;
    }
    to_json_value(&f)
}

fn bvp(c: &Common, p: &mut Params, outs: &Outputs) -> Result<Value> {
    let eps = p.require("epsilon", c.epsilon)?;
    let mu = p.f64_or("mu", c.mu, crate::gluing::DEFAULT_MU)?;
    let j = p.int_or("j", c.j.map(i64::from), 2)? as i32;
    let params = NeckParams::new(eps)?;
    let s0 = if params.is_cylinder() { 0.0 } else { period_s(params)? / 8.0 };
    let jmax = j.abs().max(2);
    let half = HalfCylinder::new(params, s0, jmax)?;
    let phi = BoundaryData::single(jmax, j, 1.0);
    let sol = poisson_apply(&half, &phi, mu)?;
    let deviation = if eps <= 0.1 { Some(poisson_deviation(eps, mu, &phi)?) } else { None };
    if let Some(path) = outs.file("bvp.csv")? {
        let w = &sol.field;
        let slope = w.slope(j);
        let rows: Vec<Vec<f64>> = (0..w.len()).map(|i| vec![w.s(i), w.mode(j)[i], slope[i]]).collect();
        write_csv_rows(&path, &["s", "w", "w_s"], &rows)?;
    }
    Ok(json!({
        "epsilon": eps,
        "s0": s0,
        "j": j,
        "gamma": half.gamma(j),
        "amplification": sol.amplification,
        "interface_slope": sol.field.slope(j)[0],
        "poisson_deviation": deviation,
    }))
}

fn graph(c: &Common, p: &mut Params, outs: &Outputs, amplitude: Option<f64>) -> Result<Value> {
    let eps = p.require("epsilon", c.epsilon)?;
    let mu = p.f64_or("mu", c.mu, crate::gluing::DEFAULT_MU)?;
    let j = p.int_or("j", c.j.map(i64::from), 2)? as i32;
    let amp = p.f64_or("amplitude", amplitude, 0.3)?;
    let mut opts = GraphOptions::default();
    opts.tolerance = p.f64_or("tolerance", c.tolerance, opts.tolerance)?;
    let params = NeckParams::new(eps)?;
    let half = HalfCylinder::new(params, period_s(params)? / 8.0, GRAPH_JMAX)?;
    let phi = BoundaryData::single(GRAPH_JMAX, j, amp * eps.powf(0.75));
    let sol = solve_graph(&half, &phi, mu, &opts)?;
    let cd = cauchy_data(&sol);
    let result = json!({
        "epsilon": eps,
        "iterations": sol.iterations,
        "updates": sol.updates,
        "ratios": sol.ratios(),
        "h_residual": sol.h_residual,
        "norm": sol.norm,
        "cauchy": to_json_value(&cd)?,
    });
    if let Some(path) = outs.file("graph.json")? {
        write_json(&path, &result)?;
    }
    Ok(result)
}

fn glue(c: &Common, p: &mut Params, outs: &Outputs) -> Result<Value> {
    let mut cfg = if p.file.contains_key("ends") {
        GlueConfig::from_json(&Value::Object(p.file.clone()).to_string())?
    } else {
        GlueConfig::two_ends(p.require("epsilon", c.epsilon)?)
    };
    if let Some(e) = c.epsilon {
        cfg.epsilon = e;
    }
    if let Some(k) = c.kappa {
        cfg.kappa = k;
    }
    if let Some(m) = c.mu {
        cfg.mu = m;
    }
    p.echo = match to_json_value(&cfg)? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    let mut opts = GlueOptions::default();
    if let Some(t) = c.tolerance {
        opts.graph.tolerance = t;
        opts.matching.tolerance = t;
        p.echo.insert("tolerance".into(), json!(t));
    }
    let surface = assemble_glued(&cfg, &opts)?;
    if let Some(dir) = &outs.out_dir {
        write_glued(&surface, dir)?;
    }
    let r = &surface.report;
    Ok(json!({
        "epsilon": r.epsilon,
        "deformation_norm": r.deformation_norm,
        "deformation_bound": r.deformation_bound,
        "phi_norm": r.phi_norm,
        "max_value_mismatch": r.max_value_mismatch,
        "max_slope_mismatch": r.max_slope_mismatch,
        "h_max": r.h_max,
        "h_away": r.h_away,
        "interface_gap": r.interface_gap,
        "best_fit_max_distance": r.best_fit.max_distance,
        "best_fit_necksize": r.best_fit.necksize,
    }))
}

#[allow(clippy::too_many_arguments)]
fn mesh(
    c: &Common,
    p: &mut Params,
    outs: &Outputs,
    surface: Option<String>,
    rows: Option<usize>,
    cols: Option<usize>,
    format: Option<String>,
) -> Result<Value> {
    let kind = p.string_or("surface", surface, "delaunay")?;
    let rows = p.int_or("rows", rows.map(|x| x as i64), 200)? as usize;
    let cols = p.int_or("cols", cols.map(|x| x as i64), 64)? as usize;
    let format = match p.string_or("format", format, "obj")?.as_str() {
        "obj" => MeshFormat::Obj,
        "ply" => MeshFormat::Ply,
        f => return Err(Error::Config(format!("unknown mesh format {f}"))),
    };
    let (m, target): (SurfaceMesh, f64) = match kind.as_str() {
        "delaunay" => {
            let eps = p.require("epsilon", c.epsilon)?;
            let params = NeckParams::new(eps)?;
            let window = if params.is_cylinder() { 5.0 } else { period_s(params)? };
            let pr = Arc::new(solve_profile(params, window, default_step(params)?)?);
            (sample_mesh(&DelaunayPatch::new(pr), rows, cols)?, 1.0)
        }
        "catenoid" => {
            let a = p.f64_or("epsilon", c.epsilon, 1.0)?;
            (sample_mesh(&CatenoidPatch { a, s_range: (-2.0, 2.0) }, rows, cols)?, 0.0)
        }
        "sphere" => (sample_mesh(&SpherePatch { radius: 2.0, center_z: 0.0 }, rows, cols)?, 1.0),
        "cylinder" => (sample_mesh(&CylinderPatch { radius: 1.0, t_range: (-2.0, 2.0) }, rows, cols)?, 1.0),
        other => return Err(Error::Config(format!("unknown surface {other}"))),
    };
    let ext = if format == MeshFormat::Obj { "obj" } else { "ply" };
    if let Some(path) = outs.file(&format!("mesh.{ext}"))? {
        export_mesh(&m, format, &path)?;
    }
    Ok(json!({
        "surface": kind,
        "vertices": m.vertices.len(),
        "faces": m.faces.len(),
        "target_h": target,
        "max_abs_h_deviation": m.max_abs_h_minus(target),
    }))
}
