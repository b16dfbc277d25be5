use std::fmt::Write as _;
use std::path::PathBuf;

use ncschur::displacement::{displacement_residual_with_dim, generator_from_schur, interior_mismatch};
use ncschur::linalg;
use ncschur::realization::{realize_from_rows, transfer_coefficients, verify_coisometry};
use ncschur::scattering::{construct_interpolant, degree_for_tail, max_point_norm, pick_instance};
use ncschur::schur::{schur_analyze, schur_synthesize};
use ncschur::toeplitz::{build_kn, kernel_to_schur, schur_to_kernel};
use ncschur::{Error, Matrix, Series};
use serde_json::Value;

use crate::json::{self, InputError, PickData};
use crate::random;

pub const SUBCOMMANDS: &[&str] = &[
    "schur-analyze",
    "schur-synthesize",
    "kernel-to-schur",
    "schur-to-kernel",
    "kernel-check",
    "verify-displacement",
    "pick-check",
    "scatter-solve",
    "realize",
    "transfer",
    "roundtrip-selftest",
    "random-schur",
];

const DISPLACEMENT_TOL: f64 = 1e-10;
const ROUNDTRIP_TOL: f64 = 1e-9;
const INTERPOLATION_TOL: f64 = 1e-6;
const DEFAULT_DEGREE: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub letters: Option<usize>,
    pub degree: Option<usize>,
    pub levels: Option<usize>,
    pub depth: Option<usize>,
    pub seed: u64,
    pub tol_psd: f64,
    pub tol_contraction: f64,
    pub tol_inv: f64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub points: Option<PathBuf>,
    pub values: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            letters: None,
            degree: None,
            levels: None,
            depth: None,
            seed: 0,
            tol_psd: 1e-10,
            tol_contraction: 1e-8,
            tol_inv: 1e-10,
            input: None,
            output: None,
            points: None,
            values: None,
        }
    }
}

/// Result of one pipeline run: exit code, the one-line summary, the output
/// document (if any) and diagnostics for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
    pub output: Option<String>,
    pub diagnostics: Vec<String>,
}

enum Failure {
    Malformed(String),
    Tolerance(String, Vec<(&'static str, String)>),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Malformed(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension(_)
            | Error::InvalidWord { .. }
            | Error::InvalidPoint { .. }
            | Error::NotHermitian { .. }
            | Error::Invalid(_) => Failure::Malformed(e.to_string()),
            _ => Failure::Tolerance(e.to_string(), vec![]),
        }
    }
}

struct Report {
    pairs: Vec<(&'static str, String)>,
    output: Option<Value>,
    diagnostics: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report {
            pairs: vec![],
            output: None,
            diagnostics: vec![],
        }
    }

    fn kv(mut self, key: &'static str, value: impl ToString) -> Self {
        self.pairs.push((key, value.to_string()));
        self
    }

    fn with_output(mut self, v: Value) -> Self {
        self.output = Some(v);
        self
    }
}

fn line(status: &str, pairs: &[(&'static str, String)]) -> String {
    let mut s = format!("status={status}");
    for (k, v) in pairs {
        let _ = write!(s, " {k}={v}");
    }
    s
}

pub fn run_pipeline(name: &str, cfg: &RunConfig) -> Outcome {
    let result = match name {
        "schur-analyze" => analyze(cfg),
        "schur-synthesize" => synthesize(cfg),
        "kernel-to-schur" => kernel_to_schur_cmd(cfg),
        "schur-to-kernel" => schur_to_kernel_cmd(cfg),
        "kernel-check" => kernel_check(cfg),
        "verify-displacement" => verify_displacement(cfg),
        "pick-check" => pick_check(cfg),
        "scatter-solve" => scatter_solve(cfg),
        "realize" => realize(cfg),
        "transfer" => transfer(cfg),
        "roundtrip-selftest" => roundtrip(cfg),
        "random-schur" => random_schur(cfg),
        other => Err(Failure::Malformed(format!("unknown subcommand {other:?}"))),
    };
    match result {
        Ok(r) => Outcome {
            code: 0,
            summary: line("ok", &r.pairs),
            output: r.output.as_ref().map(json::to_text),
            diagnostics: r.diagnostics,
        },
        Err(Failure::Malformed(msg)) => Outcome {
            code: 2,
            summary: line("error", &[("reason", "malformed-input".into())]),
            output: None,
            diagnostics: vec![msg],
        },
        Err(Failure::Tolerance(msg, pairs)) => {
            let mut all = vec![("reason", "tolerance".to_string())];
            all.extend(pairs);
            Outcome {
                code: 1,
                summary: line("fail", &all),
                output: None,
                diagnostics: vec![msg],
            }
        }
    }
}

fn read_json(path: &Option<PathBuf>, flag: &str) -> Result<Value, Failure> {
    let path = path
        .as_ref()
        .ok_or_else(|| Failure::Malformed(format!("missing {flag}")))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", path.display())))?;
    Ok(json::parse_text(&text)?)
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn analyze(cfg: &RunConfig) -> Result<Report, Failure> {
    let t = json::series_from_json(&read_json(&cfg.input, "--input")?)?;
    let depth = cfg.depth.or(cfg.degree).unwrap_or(t.max_degree());
    let data = schur_analyze(&t, depth)?;
    Ok(Report::new()
        .kv("depth", data.depth())
        .kv("max_param_norm", fmt(data.max_norm()))
        .with_output(json::params_to_json(&data)))
}

fn synthesize(cfg: &RunConfig) -> Result<Report, Failure> {
    let data = json::params_from_json(&read_json(&cfg.input, "--input")?)?;
    let degree = cfg.degree.unwrap_or(data.depth());
    let t = schur_synthesize(&data, degree)?;
    let levels = cfg.levels.unwrap_or(degree).max(degree);
    Ok(Report::new()
        .kv("degree", degree)
        .kv("contraction", t.is_contraction(levels, cfg.tol_contraction))
        .with_output(json::series_to_json(&t)))
}

fn symbol_degree(cfg: &RunConfig, s: &ncschur::Symbol) -> usize {
    cfg.degree.unwrap_or(s.max_degree())
}

fn kernel_to_schur_cmd(cfg: &RunConfig) -> Result<Report, Failure> {
    let s = json::symbol_from_json(&read_json(&cfg.input, "--input")?)?;
    let degree = symbol_degree(cfg, &s);
    let scale = max_abs_eigenvalue(&build_kn(&s, degree));
    let out = kernel_to_schur(&s, degree, Some(cfg.tol_psd * scale))?;
    if !out.positive {
        return Err(Failure::Tolerance(
            "kernel is not positive semidefinite".into(),
            vec![("min_eig", fmt(out.min_eigenvalue))],
        ));
    }
    Ok(Report::new()
        .kv("degree", degree)
        .kv("min_eig", fmt(out.min_eigenvalue))
        .with_output(json::series_to_json(&out.z)))
}

fn schur_to_kernel_cmd(cfg: &RunConfig) -> Result<Report, Failure> {
    let z = json::series_from_json(&read_json(&cfg.input, "--input")?)?;
    let degree = cfg.degree.unwrap_or(z.max_degree());
    let s = schur_to_kernel(&z, degree)?;
    Ok(Report::new()
        .kv("degree", degree)
        .kv("min_eig", fmt(linalg::min_eigenvalue(&build_kn(&s, degree))))
        .with_output(json::symbol_to_json(&s)))
}

fn max_abs_eigenvalue(m: &Matrix) -> f64 {
    linalg::hermitian_eigen(m).0.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn kernel_check(cfg: &RunConfig) -> Result<Report, Failure> {
    let s = json::symbol_from_json(&read_json(&cfg.input, "--input")?)?;
    let degree = symbol_degree(cfg, &s);
    let k = build_kn(&s, degree);
    let min_eig = linalg::min_eigenvalue(&k);
    if min_eig < -cfg.tol_psd * max_abs_eigenvalue(&k) {
        return Err(Failure::Tolerance(
            "kernel is not positive semidefinite".into(),
            vec![("min_eig", fmt(min_eig)), ("positive", "false".into())],
        ));
    }
    Ok(Report::new()
        .kv("degree", degree)
        .kv("min_eig", fmt(min_eig))
        .kv("positive", true))
}

fn verify_displacement(cfg: &RunConfig) -> Result<Report, Failure> {
    let t = json::series_from_json(&read_json(&cfg.input, "--input")?)?;
    let levels = cfg.levels.unwrap_or(t.max_degree());
    let phi = t.phi_embed(levels).into_matrix();
    let a = linalg::identity::<f64>(phi.ncols()) - phi.adjoint() * &phi;
    let gen = generator_from_schur(&t, levels);
    let residual = displacement_residual_with_dim(&a, t.letters(), levels, t.in_dim())?;
    let mismatch = interior_mismatch(&residual, &gen.gjg(), t.letters(), levels, t.in_dim());
    if mismatch > DISPLACEMENT_TOL {
        return Err(Failure::Tolerance(
            "displacement residual differs from the generator".into(),
            vec![("mismatch", fmt(mismatch))],
        ));
    }
    Ok(Report::new().kv("levels", levels).kv("mismatch", fmt(mismatch)))
}

fn read_pick(cfg: &RunConfig) -> Result<PickData, Failure> {
    if let (Some(_), Some(_)) = (&cfg.points, &cfg.values) {
        let pv = read_json(&cfg.points, "--points")?;
        let vv = read_json(&cfg.values, "--values")?;
        // either bare arrays or documents carrying the named field
        let points = json::parse_points(pv.get("points").unwrap_or(&pv), "")?;
        let values = json::parse_values(vv.get("values").unwrap_or(&vv), "")?;
        return Ok((points, values));
    }
    let path = cfg.input.as_ref().or(cfg.points.as_ref()).cloned();
    Ok(json::pick_from_json(&read_json(&path, "--input or --points/--values")?)?)
}

fn pick_check(cfg: &RunConfig) -> Result<Report, Failure> {
    let (points, values) = read_pick(cfg)?;
    let p = pick_instance(&points, &values)?;
    let min_eig = linalg::min_eigenvalue(&p.r);
    if min_eig < -cfg.tol_psd * max_abs_eigenvalue(&p.r) {
        return Err(Failure::Tolerance(
            "Pick matrix is not positive semidefinite".into(),
            vec![("min_eig", fmt(min_eig)), ("feasible", "false".into())],
        ));
    }
    Ok(Report::new()
        .kv("points", points.len())
        .kv("min_eig", fmt(min_eig))
        .kv("feasible", true))
}

fn scatter_solve(cfg: &RunConfig) -> Result<Report, Failure> {
    let doc = match &cfg.input {
        Some(_) => read_json(&cfg.input, "--input")?,
        None => {
            let (points, values) = read_pick(cfg)?;
            return scatter_pick(cfg, &points, &values);
        }
    };
    if doc.get("points").is_some() {
        let (points, values) = json::pick_from_json(&doc)?;
        return scatter_pick(cfg, &points, &values);
    }
    let data = json::scattering_from_json(&doc)?;
    let degree = cfg.degree.unwrap_or(DEFAULT_DEGREE);
    let it = construct_interpolant(&data, None, degree, None)?;
    // V* against Σ_{|w| ≤ degree} c_w U* F_w*
    let mut acc = Matrix::zeros(data.e2(), data.g_dim);
    for (w, c) in it.series.iter() {
        let fw = w
            .letters()
            .iter()
            .fold(linalg::identity::<f64>(data.g_dim), |m, &l| m * &data.f[l - 1]);
        acc += c * data.u.adjoint() * fw.adjoint();
    }
    let residual = linalg::frobenius(&(acc - data.v.adjoint()));
    Ok(Report::new()
        .kv("degree", degree)
        .kv("k_max", it.solution.k_max)
        .kv("state_dim", it.theta.state_dim())
        .kv("unitarity", fmt(it.theta.unitarity_defect()))
        .kv("residual", fmt(residual))
        .with_output(json::series_to_json(&it.series)))
}

fn scatter_pick(cfg: &RunConfig, points: &[Vec<ncschur::C<f64>>], values: &[ncschur::C<f64>]) -> Result<Report, Failure> {
    let p = pick_instance(points, values)?;
    let degree = cfg.degree.unwrap_or(DEFAULT_DEGREE);
    let it = construct_interpolant(&p.data, None, degree, None)?;
    let eval_degree = degree_for_tail(max_point_norm(points), 1e-7);
    let mut diagnostics = vec![];
    let mut worst = 0.0f64;
    for (i, (pt, b)) in points.iter().zip(values).enumerate() {
        let r = (it.evaluate_pick(pt, eval_degree)?[(0, 0)] - b).norm();
        diagnostics.push(format!("point {i}: |T(lambda) - b| = {r:e}"));
        worst = worst.max(r);
    }
    let pairs = vec![
        ("degree", degree.to_string()),
        ("eval_degree", eval_degree.to_string()),
        ("k_max", it.solution.k_max.to_string()),
        ("state_dim", it.theta.state_dim().to_string()),
        ("unitarity", fmt(it.theta.unitarity_defect())),
        ("max_residual", fmt(worst)),
    ];
    if worst >= INTERPOLATION_TOL {
        return Err(Failure::Tolerance("interpolation residual above tolerance".into(), pairs));
    }
    let mut r = Report::new().with_output(json::series_to_json(&it.pick_series()));
    r.pairs = pairs;
    r.diagnostics = diagnostics;
    Ok(r)
}

fn realize(cfg: &RunConfig) -> Result<Report, Failure> {
    let data = json::params_from_json(&read_json(&cfg.input, "--input")?)?;
    let sys = realize_from_rows(data.letters, &data.rows)?;
    Ok(Report::new()
        .kv("f_dim", sys.f_dim)
        .kv("f_next_dim", sys.f_next_dim)
        .kv("coisometry", fmt(verify_coisometry(&sys)))
        .with_output(json::system_to_json(&sys)))
}

fn transfer(cfg: &RunConfig) -> Result<Report, Failure> {
    let sys = json::system_from_json(&read_json(&cfg.input, "--input")?)?;
    let degree = cfg.degree.unwrap_or(DEFAULT_DEGREE);
    let t = transfer_coefficients(&sys, degree)?;
    Ok(Report::new()
        .kv("degree", degree)
        .kv("a0_norm", fmt(linalg::operator_norm(&sys.a0)))
        .with_output(json::series_to_json(&t)))
}

fn validated(cfg: &RunConfig) -> Result<(usize, usize, usize), Failure> {
    let letters = cfg.letters.unwrap_or(2);
    let degree = cfg.degree.unwrap_or(DEFAULT_DEGREE);
    let levels = cfg.levels.unwrap_or(degree);
    if letters == 0 {
        return Err(Failure::Malformed("--letters must be at least 1".into()));
    }
    if levels < degree {
        return Err(Failure::Malformed(format!(
            "--levels {levels} must be at least --degree {degree}"
        )));
    }
    Ok((letters, degree, levels))
}

/// Seeded Schur-class series, following the configuration.
pub fn random_schur_instance(cfg: &RunConfig) -> Series {
    let letters = cfg.letters.unwrap_or(2).max(1);
    let degree = cfg.degree.unwrap_or(DEFAULT_DEGREE);
    let levels = cfg.levels.unwrap_or(degree).max(degree);
    random::schur_instance(&mut random::stream(cfg.seed), letters, degree, levels)
}

fn roundtrip(cfg: &RunConfig) -> Result<Report, Failure> {
    let (letters, degree, _) = validated(cfg)?;
    let t = random_schur_instance(cfg);
    let data = schur_analyze(&t, degree)?;
    let back = schur_synthesize(&data, degree)?;
    let err = back.max_coeff_diff(&t, degree);
    let pairs = vec![
        ("letters", letters.to_string()),
        ("degree", degree.to_string()),
        ("seed", cfg.seed.to_string()),
        ("max_err", fmt(err)),
    ];
    if err >= ROUNDTRIP_TOL {
        return Err(Failure::Tolerance("round trip error above tolerance".into(), pairs));
    }
    let mut r = Report::new().with_output(json::series_to_json(&back));
    r.pairs = pairs;
    Ok(r)
}

fn random_schur(cfg: &RunConfig) -> Result<Report, Failure> {
    let (letters, degree, levels) = validated(cfg)?;
    let t = random_schur_instance(cfg);
    let norm = ncschur::series::operator_norm(&t.phi_embed(levels));
    Ok(Report::new()
        .kv("letters", letters)
        .kv("degree", degree)
        .kv("seed", cfg.seed)
        .kv("phi_norm", fmt(norm))
        .with_output(json::series_to_json(&t)))
}
