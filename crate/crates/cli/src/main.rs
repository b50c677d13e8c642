use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use design_curves::assembly::assemble_design_curve;
use design_curves::curve::{
    design_residual, to_json_17, write_trace_csv, CurveDocument, QuadratureReport,
    CURVE_CERTIFY_THRESHOLD, DEFAULT_TOL,
};
use design_curves::families::{solve_design_param, tennis_curve, DEFAULT_SOLVE_TOL};
use design_curves::geometry::fibonacci_mesh;
use design_curves::points::{
    point_design_residual, resolve_points, CERTIFY_THRESHOLD, DEFAULT_MESH,
};
use design_curves::polynomial::monomial_basis;
use design_curves::sampling::{read_value_trace, reconstruct_coeffs, require_design, CurveTrace};
use design_curves::weighted::{rd_exact_integral, rd_weighted_integral};
use design_curves::{Error, SphericalPolynomial};

mod inputs;

use inputs::{resolve_curve, resolve_polynomial};

const EXIT_CERTIFICATE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "design-curves",
    version,
    about = "Spherical t-design curves on S^2"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the tennis-family parameter making gamma^(k,a) a k-design.
    SolveFamily {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = DEFAULT_SOLVE_TOL)]
        tol: f64,
        #[arg(long, default_value_t = CURVE_CERTIFY_THRESHOLD)]
        threshold: f64,
        /// Write the curve JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Join the cap boundary circles around a point design into one curve.
    Assemble {
        /// Point file or builtin name (tetrahedron, octahedron, cube, icosahedron).
        #[arg(long)]
        points: String,
        #[arg(long)]
        degree: usize,
        /// Radius as a multiple of the covering radius of the points.
        #[arg(long, default_value_t = 1.0)]
        radius_factor: f64,
        #[arg(long, default_value_t = CURVE_CERTIFY_THRESHOLD)]
        threshold: f64,
        /// Write the curve JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the design residual of a curve.
    Verify {
        /// Curve JSON, `great-circle`, `tennis:K` or `tennis:K:A`.
        #[arg(long)]
        curve: String,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = CURVE_CERTIFY_THRESHOLD)]
        threshold: f64,
    },
    /// Write `n` samples of a curve as CSV.
    Sample {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Add a `value` column with this polynomial (JSON file or monomial).
        #[arg(long)]
        poly: Option<String>,
    },
    /// Recover a polynomial from a trace CSV with `s` and `value` columns.
    Reconstruct {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        degree: usize,
        /// Also print the recovered polynomial at this many Fibonacci points.
        #[arg(long)]
        eval_points: Option<usize>,
        /// Write the polynomial JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate against `exp(-|x|)` on R^3 with rings of a design curve.
    RdQuad {
        #[arg(long)]
        curve: String,
        /// Design degree of the curve.
        #[arg(long)]
        degree: usize,
        /// Number of Laguerre rings.
        #[arg(long)]
        order: usize,
        /// Integrand; every monomial of degree <= the curve degree if absent.
        #[arg(long)]
        poly: Option<String>,
        /// Allowed gap, relative to max(1, |exact|).
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
    /// Check the residual and covering radius of a point set.
    PointsVerify {
        #[arg(long)]
        points: String,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = CERTIFY_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_MESH)]
        mesh: usize,
    },
}

#[derive(Debug)]
enum Failure {
    /// A certificate or threshold check did not pass.
    Certificate(String),
    Lib(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Certificate(_) => EXIT_CERTIFICATE,
            Failure::Input(_) => EXIT_INPUT,
            Failure::Lib(e) => match e {
                Error::IsolatedCircle(_)
                | Error::NotStronglyConnected
                | Error::Unbalanced(_)
                | Error::NearTangency(..)
                | Error::Uncertified { .. }
                | Error::SignCondition { .. }
                | Error::RankDeficient { .. } => EXIT_CERTIFICATE,
                Error::NonConvergence { .. } | Error::SpectrumTail { .. } | Error::Eigen(_) => {
                    EXIT_NUMERICAL
                }
                _ => EXIT_INPUT,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Certificate(m) | Failure::Input(m) => write!(f, "{m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(f) = configure_threads().and_then(|_| run(cli.command)) {
        eprintln!("error: {f}");
        return ExitCode::from(f.exit_code());
    }
    ExitCode::SUCCESS
}

fn configure_threads() -> CmdResult {
    let Ok(raw) = std::env::var("DESIGN_CURVES_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Input(format!(
            "DESIGN_CURVES_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(e.to_string()))
}

fn positive(name: &str, v: f64) -> CmdResult {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::SolveFamily {
            k,
            tol,
            threshold,
            out,
        } => solve_family(k, tol, threshold, out.as_deref()),
        Command::Assemble {
            points,
            degree,
            radius_factor,
            threshold,
            out,
        } => assemble(&points, degree, radius_factor, threshold, out.as_deref()),
        Command::Verify {
            curve,
            degree,
            threshold,
        } => verify(&curve, degree, threshold),
        Command::Sample {
            curve,
            n,
            out,
            poly,
        } => sample(&curve, n, &out, poly.as_deref()),
        Command::Reconstruct {
            curve,
            trace,
            degree,
            eval_points,
            out,
        } => reconstruct(&curve, &trace, degree, eval_points, out.as_deref()),
        Command::RdQuad {
            curve,
            degree,
            order,
            poly,
            threshold,
        } => rd_quad(&curve, degree, order, poly.as_deref(), threshold),
        Command::PointsVerify {
            points,
            degree,
            threshold,
            mesh,
        } => points_verify(&points, degree, threshold, mesh),
    }
}

fn print_residuals(report: &QuadratureReport) {
    println!("{:>6}  {:<12}  {:>24}", "degree", "monomial", "residual");
    for (m, r) in &report.residuals {
        println!("{:>6}  {:<12}  {:>24.16e}", m.degree(), m.to_string(), r);
    }
}

/// Prints the PASS/FAIL line for a residual report.
fn judge(report: &QuadratureReport, threshold: f64) -> CmdResult {
    let (worst, r) = report.worst().expect("residual report is never empty");
    if report.passes(threshold) {
        println!(
            "PASS degree {} max residual {:.3e} (worst monomial {worst}) <= {threshold:.1e}",
            report.degree, r
        );
        Ok(())
    } else {
        println!(
            "FAIL degree {} max residual {:.3e} at monomial {worst} > {threshold:.1e}",
            report.degree, r
        );
        Err(Failure::Certificate(format!(
            "residual {r:.3e} at monomial {worst} exceeds {threshold:.1e}"
        )))
    }
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn solve_family(k: u32, tol: f64, threshold: f64, out: Option<&Path>) -> CmdResult {
    positive("tol", tol)?;
    positive("threshold", threshold)?;
    if k < 2 {
        return Err(Failure::Input("k >= 2 required for solve".into()));
    }
    let a = solve_design_param(k, tol)?;
    let curve = tennis_curve(k, a)?;
    let report = design_residual(&curve, k as usize, DEFAULT_TOL)?;
    let length = curve.length()?;
    println!("k = {k}");
    println!("a_k = {a:.16}");
    println!("length = {length:.16}");
    print_residuals(&report);
    if let Some(path) = out {
        write_text(path, &CurveDocument::from_curve(&curve)?.to_json_string()?)?;
    }
    judge(&report, threshold)
}

#[derive(Serialize)]
struct Certificate {
    degree: usize,
    max_residual: f64,
    worst_monomial: String,
    length: f64,
    n_points: usize,
    n_arcs: usize,
    n_vertices: usize,
    radius: f64,
    point_residual: f64,
}

#[derive(Serialize)]
struct AssembledDocument {
    #[serde(flatten)]
    curve: CurveDocument,
    certificate: Certificate,
}

fn assemble(
    points: &str,
    degree: usize,
    radius_factor: f64,
    threshold: f64,
    out: Option<&Path>,
) -> CmdResult {
    positive("radius-factor", radius_factor)?;
    positive("threshold", threshold)?;
    let x = resolve_points(points, Some(degree))?;
    let r = radius_factor * x.exact_covering_radius()?;
    let assembly = assemble_design_curve(&x, degree, Some(r))?;
    let report = design_residual(&assembly.curve, degree, DEFAULT_TOL)?;
    let (worst, max_residual) = report.worst().expect("residual report is never empty");
    let doc = AssembledDocument {
        curve: CurveDocument::from_curve(&assembly.curve)?,
        certificate: Certificate {
            degree,
            max_residual,
            worst_monomial: worst.to_string(),
            length: assembly.curve.length()?,
            n_points: x.len(),
            n_arcs: assembly.n_arcs,
            n_vertices: assembly.n_vertices,
            radius: assembly.radius,
            point_residual: assembly.point_residual,
        },
    };
    let json = to_json_17(&doc)?;
    match out {
        Some(path) => {
            write_text(path, &json)?;
            println!("points = {}", x.len());
            println!("radius = {:.16e}", assembly.radius);
            println!(
                "arcs = {}, vertices = {}",
                assembly.n_arcs, assembly.n_vertices
            );
            println!("length = {:.16e}", doc.certificate.length);
            judge(&report, threshold)
        }
        None => {
            println!("{json}");
            if report.passes(threshold) {
                Ok(())
            } else {
                Err(Failure::Certificate(format!(
                    "residual {max_residual:.3e} at monomial {worst} exceeds {threshold:.1e}"
                )))
            }
        }
    }
}

fn verify(curve: &str, degree: usize, threshold: f64) -> CmdResult {
    positive("threshold", threshold)?;
    let c = resolve_curve(curve)?;
    let report = design_residual(&c, degree, DEFAULT_TOL)?;
    println!("length = {:.16e}", c.length()?);
    judge(&report, threshold)
}

fn sample(curve: &str, n: usize, out: &Path, poly: Option<&str>) -> CmdResult {
    if n < 2 {
        return Err(Failure::Input("--n must be at least 2".into()));
    }
    let c = resolve_curve(curve)?;
    let rows = c.sample(n)?;
    let values = poly
        .map(|p| {
            resolve_polynomial(p).map(|f| rows.iter().map(|r| f.eval(&r.point)).collect::<Vec<_>>())
        })
        .transpose()?;
    write_trace_csv(&rows, values.as_deref(), BufWriter::new(File::create(out)?))?;
    println!("wrote {n} samples to {}", out.display());
    Ok(())
}

fn reconstruct(
    curve: &str,
    trace: &Path,
    degree: usize,
    eval_points: Option<usize>,
    out: Option<&Path>,
) -> CmdResult {
    let c = resolve_curve(curve)?;
    require_design(&c, 2 * degree)?;
    let (s, values) = read_value_trace(trace)?;
    let trace = CurveTrace::from_values(&c, s, values)?;
    let rec = reconstruct_coeffs(&trace, degree)?;
    println!("samples = {}", trace.len());
    println!("condition = {:.6e}", rec.condition);
    println!("trace_residual = {:.6e}", rec.trace_residual);
    println!("error_estimate = {:.6e}", rec.error_estimate);
    println!("in_span = {}", rec.in_span);
    let json = to_json_17(&rec.polynomial)?;
    match out {
        Some(path) => write_text(path, &json)?,
        None => println!("{json}"),
    }
    if let Some(m) = eval_points {
        println!("x,y,z,value");
        for p in fibonacci_mesh(m) {
            let p = p.xyz()?;
            println!(
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                p[0],
                p[1],
                p[2],
                rec.polynomial.eval(&p)
            );
        }
    }
    if rec.in_span {
        Ok(())
    } else {
        Err(Failure::Certificate(format!(
            "trace is not consistent with a polynomial of degree {degree} (misfit {:.3e})",
            rec.trace_residual
        )))
    }
}

fn rd_quad(
    curve: &str,
    degree: usize,
    order: usize,
    poly: Option<&str>,
    threshold: f64,
) -> CmdResult {
    positive("threshold", threshold)?;
    let c = resolve_curve(curve)?;
    let integrands: Vec<(String, SphericalPolynomial)> = match poly {
        Some(p) => vec![(p.to_string(), resolve_polynomial(p)?)],
        None => monomial_basis(degree)
            .into_iter()
            .map(|m| {
                Ok((
                    m.to_string(),
                    SphericalPolynomial::from_terms(m.degree(), [(m, 1.0)])?,
                ))
            })
            .collect::<design_curves::Result<_>>()?,
    };
    println!(
        "{:<12}  {:>24}  {:>24}  {:>10}",
        "integrand", "value", "exact", "gap"
    );
    let mut worst: Option<(String, f64)> = None;
    for (name, f) in &integrands {
        let q = rd_weighted_integral(f, &c, degree, order)?;
        let exact = rd_exact_integral(f);
        let gap = (q.value - exact).abs() / exact.abs().max(1.0);
        println!(
            "{name:<12}  {:>24.16e}  {exact:>24.16e}  {gap:>10.3e}",
            q.value
        );
        if worst.as_ref().is_none_or(|w| gap > w.1) {
            worst = Some((name.clone(), gap));
        }
    }
    let (name, gap) = worst.expect("at least one integrand");
    if gap <= threshold {
        println!("PASS max gap {gap:.3e} ({name}) <= {threshold:.1e}");
        Ok(())
    } else {
        println!("FAIL max gap {gap:.3e} at {name} > {threshold:.1e}");
        Err(Failure::Certificate(format!(
            "gap {gap:.3e} at {name} exceeds {threshold:.1e}"
        )))
    }
}

fn points_verify(points: &str, degree: usize, threshold: f64, mesh: usize) -> CmdResult {
    positive("threshold", threshold)?;
    let x = resolve_points(points, Some(degree))?;
    let report = point_design_residual(&x, degree);
    let cover = x.covering_radius(mesh)?;
    println!("points = {}", x.len());
    println!(
        "covering radius = {:.6e} (+/- {:.1e}, mesh {mesh})",
        cover.radius, cover.resolution
    );
    judge(&report, threshold)
}
