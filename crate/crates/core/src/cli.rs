//! Command-line driver: argument types, rendering and atomic output.
//!
//! Every command renders either CSV or JSON. CSV output starts with
//! `#schema=v1` and `#command=<name>`, followed by one or more tables, each
//! introduced by a `#section=<name>` line and a header row. Floats are written
//! with 17 significant digits. JSON carries the same tables as arrays of
//! objects under the section names.

use std::fmt::Display;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::branch::{geometric_schedule, trace_branch, Branch, BranchOptions, Sign};
use crate::error::{Error, Result};
use crate::model::ProblemParams;
use crate::numeric::ode::Tolerances;
use crate::shooting::{self, hump_widths, verify_segment_inequalities, RadialSolution};
use crate::specfun::SpectralData;
use crate::timemap::{self, limits};
use crate::verify::{self, Suite, VerifyConfig, VerifyReport};

pub const SCHEMA: &str = "v1";

/// Largest accepted `--kmax`.
pub const KMAX_LIMIT: usize = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "radbif",
    version,
    about = "Radial solutions and bifurcation branches of -Δu = λu - 1/u on a disk of radius R with Neumann data",
    after_help = "Physical defaults: R = 1. Exit codes: 0 success, 1 verification failure, 2 usage or precondition error."
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Relative tolerance of the integrator [default: 1e-10]
    #[arg(long, global = true, value_name = "X")]
    pub tol_rel: Option<f64>,
    /// Absolute tolerance of the integrator [default: 1e-12] and of the time-map quadrature [default: 1e-10]
    #[arg(long, global = true, value_name = "X")]
    pub tol_abs: Option<f64>,
    /// Output format [default: json for verify, csv otherwise]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the output to PATH (atomically) instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed of the randomly sampled checks of verify
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Radial Neumann and Dirichlet eigenvalues μ_k = (y_k/R)², ν_k = (z_k/R)²
    #[command(allow_negative_numbers = true)]
    Eigs {
        /// Rows k = 0..=kmax (row 0 is μ_0 = 0)
        #[arg(long, default_value_t = 5)]
        kmax: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Time map Φ_{λ,h}(h) on a list of levels, with its four limits
    #[command(allow_negative_numbers = true)]
    Timemap {
        #[arg(long)]
        lambda: f64,
        /// Levels h, separated by commas or spaces; may be empty
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        h_grid: String,
    },
    /// One radial shot from w(0) = h0, ẇ(0) = 0 up to ρ = R
    #[command(allow_negative_numbers = true)]
    Shoot {
        #[arg(long)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        h0: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Resample the trajectory on N uniform radii instead of the step ends
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
        /// Interior samples per segment for the inequality checks
        #[arg(long, default_value_t = 8)]
        ineq_samples: usize,
    },
    /// Trace the branch of Neumann solutions with k nodes over a geometric amplitude schedule
    #[command(allow_negative_numbers = true)]
    Branch {
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Sign of w(0): + or -
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long, default_value_t = 1e-5)]
        h0_min: f64,
        #[arg(long, default_value_t = 1e3)]
        h0_max: f64,
        #[arg(long, default_value_t = 33)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Run the invariant suite; exit code 1 if any check fails
    #[command(allow_negative_numbers = true)]
    Verify {
        /// all (default), specfun, timemap, shooting, branch or dirichlet
        #[arg(long, default_value = "default")]
        suite: Suite,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Relative slack allowed on the inequality checks
        #[arg(long, default_value_t = 1e-8)]
        slack_tol: f64,
        /// Replace every pass threshold by X (falsifiability runs)
        #[arg(long, value_name = "X")]
        override_tol: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eigs { .. } => "eigs",
            Command::Timemap { .. } => "timemap",
            Command::Shoot { .. } => "shoot",
            Command::Branch { .. } => "branch",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Rendered output and the exit status it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub body: Vec<u8>,
    /// False only for a failed verification.
    pub success: bool,
    pub notes: Vec<String>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Multi-section CSV document.
struct CsvDoc {
    out: Vec<u8>,
}

impl CsvDoc {
    fn new(command: &str) -> Self {
        let mut out = Vec::new();
        writeln!(out, "#schema={SCHEMA}\n#command={command}").expect("write to memory");
        Self { out }
    }

    fn table(
        &mut self,
        section: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        writeln!(self.out, "#section={section}").expect("write to memory");
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(&r).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Parameter(format!("csv: {e}")))?;
        self.out.extend_from_slice(&bytes);
        Ok(())
    }

    /// `key,value` rows from a JSON object (keys in sorted order).
    fn summary(&mut self, map: &Map<String, Value>) -> Result<()> {
        let rows = map.iter().map(|(k, v)| vec![k.clone(), value_field(v)]);
        self.table("summary", &["key", "value"], rows)
    }
}

fn value_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64 number")),
        other => other.to_string(),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn json_doc(command: &str, fields: Value) -> Vec<u8> {
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(SCHEMA));
    doc.insert("command".into(), json!(command));
    if let Value::Object(m) = fields {
        doc.extend(m);
    }
    let mut out = serde_json::to_vec_pretty(&Value::Object(doc)).expect("json document serializes");
    out.push(b'\n');
    out
}

fn tolerances(common: &Common) -> Result<Tolerances> {
    let d = Tolerances::default();
    Tolerances::new(
        common.tol_rel.unwrap_or(d.rtol),
        common.tol_abs.unwrap_or(d.atol),
    )
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad grid value {t:?}")))
        })
        .collect()
}

/// Runs one command and renders its output.
pub fn execute(cli: &Cli) -> Result<Output> {
    let c = &cli.common;
    let name = cli.command.name();
    let format = c.format.unwrap_or(match cli.command {
        Command::Verify { .. } => Format::Json,
        _ => Format::Csv,
    });
    match &cli.command {
        Command::Eigs { kmax, radius } => eigs(name, format, *kmax, *radius),
        Command::Timemap { lambda, h_grid } => timemap_cmd(name, format, c, *lambda, h_grid),
        Command::Shoot {
            lambda,
            h0,
            radius,
            samples,
            ineq_samples,
        } => shoot(
            name,
            format,
            c,
            *lambda,
            *h0,
            *radius,
            *samples,
            *ineq_samples,
        ),
        Command::Branch {
            k,
            sign,
            h0_min,
            h0_max,
            points,
            radius,
        } => branch_cmd(
            name,
            format,
            c,
            *k,
            *sign,
            (*h0_min, *h0_max, *points),
            *radius,
        ),
        Command::Verify {
            suite,
            radius,
            slack_tol,
            override_tol,
        } => {
            let cfg = VerifyConfig {
                suite: *suite,
                seed: c.seed,
                tol: tolerances(c)?,
                slack_tol: *slack_tol,
                threshold_override: *override_tol,
                radius: *radius,
            };
            verify_cmd(format, &cfg)
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct EigRow {
    k: usize,
    y_k: Option<f64>,
    z_k: Option<f64>,
    mu_k: f64,
    nu_k: Option<f64>,
}

fn eigs(name: &str, format: Format, kmax: usize, radius: f64) -> Result<Output> {
    if kmax > KMAX_LIMIT {
        return Err(Error::Parameter(format!(
            "kmax must be at most {KMAX_LIMIT}, got {kmax}"
        )));
    }
    ProblemParams::new(1.0, radius)?;
    let mut rows = vec![EigRow {
        k: 0,
        y_k: None,
        z_k: None,
        mu_k: 0.0,
        nu_k: None,
    }];
    for k in 1..=kmax {
        let s = SpectralData::new(k, radius)?;
        rows.push(EigRow {
            k,
            y_k: Some(s.y_k),
            z_k: Some(s.z_k),
            mu_k: s.mu_k,
            nu_k: Some(s.nu_k),
        });
    }
    let body = match format {
        Format::Json => json_doc(name, json!({ "radius": radius, "eigenvalues": rows })),
        Format::Csv => {
            let mut doc = CsvDoc::new(name);
            doc.summary(json!({ "radius": radius }).as_object().expect("object"))?;
            doc.table(
                "eigenvalues",
                &["k", "y_k", "z_k", "mu_k", "nu_k"],
                rows.iter().map(|r| {
                    vec![
                        r.k.to_string(),
                        opt_num(r.y_k),
                        opt_num(r.z_k),
                        num(r.mu_k),
                        opt_num(r.nu_k),
                    ]
                }),
            )?;
            doc.out
        }
    };
    Ok(Output {
        body,
        success: true,
        notes: Vec::new(),
    })
}

fn timemap_cmd(name: &str, format: Format, c: &Common, lambda: f64, grid: &str) -> Result<Output> {
    let params = ProblemParams::new(lambda, 1.0)?;
    let tol = c.tol_abs.unwrap_or(timemap::DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let samples = parse_grid(grid)?
        .into_iter()
        .map(|h| timemap::phi_with_tol(&params, h, tol))
        .collect::<Result<Vec<_>>>()?;
    let lim = limits(lambda);
    let body = match format {
        Format::Json => json_doc(
            name,
            json!({ "lambda": lambda, "tol": tol, "limits": lim, "values": samples }),
        ),
        Format::Csv => {
            let mut doc = CsvDoc::new(name);
            let mut m = Map::new();
            m.insert("lambda".into(), json!(lambda));
            m.insert("tol".into(), json!(tol));
            if let Value::Object(l) = to_value(&lim) {
                m.extend(l.into_iter().map(|(k, v)| (format!("limit_{k}"), v)));
            }
            doc.summary(&m)?;
            doc.table(
                "values",
                &["h", "phi", "error"],
                samples
                    .iter()
                    .map(|s| vec![num(s.h), num(s.phi), num(s.quadrature_error_estimate)]),
            )?;
            doc.out
        }
    };
    Ok(Output {
        body,
        success: true,
        notes: Vec::new(),
    })
}

#[derive(Debug, Clone, Serialize)]
struct SegmentRow {
    index: usize,
    case: char,
    r1: f64,
    r2: f64,
    rho_bar: f64,
    rho_0: f64,
    h: f64,
    wdot_rho_0: f64,
    complete: bool,
    checks: usize,
    failures: usize,
    min_relative_slack: f64,
    tightest: String,
}

#[derive(Debug, Clone, Serialize)]
struct HumpRow {
    index: usize,
    r1: f64,
    r2: f64,
    width: f64,
    positive: bool,
    complete: bool,
    bound: f64,
    relative_slack: f64,
}

/// Slack below which an inequality counts as failed in the shot summary.
const SHOOT_SLACK_TOL: f64 = 1e-8;

fn shoot_summary(sol: &RadialSolution, segs: &[SegmentRow], energy: f64) -> Map<String, Value> {
    let failures: usize = segs.iter().map(|s| s.failures).sum();
    let slack = segs
        .iter()
        .map(|s| s.min_relative_slack)
        .fold(f64::INFINITY, f64::min);
    let mut m = Map::new();
    m.insert("lambda".into(), json!(sol.params.lambda));
    m.insert("radius".into(), json!(sol.params.radius));
    m.insert("h0".into(), json!(sol.h0));
    m.insert(
        "termination".into(),
        json!(format!("{:?}", sol.termination)),
    );
    m.insert("end_rho".into(), json!(sol.end_rho));
    m.insert("wdot_end".into(), json!(sol.boundary_residual));
    m.insert("max_abs_wdot".into(), json!(sol.max_abs_wdot));
    m.insert("node_count".into(), json!(sol.node_count()));
    m.insert("sup_w".into(), json!(sol.sup_w));
    m.insert("inf_w".into(), json!(sol.inf_w));
    m.insert("e_norm".into(), json!(sol.e_norm));
    m.insert("min_admissibility".into(), json!(sol.min_admissibility()));
    m.insert("energy_max_relative_residual".into(), json!(energy));
    m.insert("inequality_failures".into(), json!(failures));
    m.insert(
        "inequality_min_relative_slack".into(),
        if slack.is_finite() {
            json!(slack)
        } else {
            Value::Null
        },
    );
    m.insert(
        "classification_error".into(),
        json!(sol.classification_error),
    );
    m
}

#[allow(clippy::too_many_arguments)]
fn shoot(
    name: &str,
    format: Format,
    c: &Common,
    lambda: f64,
    h0: f64,
    radius: f64,
    samples: Option<usize>,
    ineq_samples: usize,
) -> Result<Output> {
    let params = ProblemParams::new(lambda, radius)?;
    let sol = shooting::integrate(&params, h0, tolerances(c)?)?;
    let traj = match samples {
        Some(n) if n >= 2 => sol.resample(n)?,
        Some(n) => {
            return Err(Error::Parameter(format!(
                "need at least 2 samples, got {n}"
            )))
        }
        None => (0..sol.rho.len())
            .map(|i| shooting::Sample {
                rho: sol.rho[i],
                w: sol.w[i],
                wdot: sol.wdot[i],
                log_gap: sol.log_gap[i],
            })
            .collect(),
    };
    let mut segs = Vec::with_capacity(sol.segments.len());
    for (i, seg) in sol.segments.iter().enumerate() {
        let rep = verify_segment_inequalities(&sol, seg, ineq_samples)?;
        let tight = rep
            .checks
            .iter()
            .min_by(|a, b| a.relative().total_cmp(&b.relative()));
        segs.push(SegmentRow {
            index: i,
            case: seg.case_tag.as_char(),
            r1: seg.r1,
            r2: seg.r2,
            rho_bar: seg.rho_bar,
            rho_0: seg.rho_0,
            h: seg.h,
            wdot_rho_0: seg.wdot_rho_0,
            complete: seg.complete,
            checks: rep.checks.len(),
            failures: rep.failures(SHOOT_SLACK_TOL).count(),
            min_relative_slack: tight.map(|t| t.relative()).unwrap_or(f64::INFINITY),
            tightest: tight.map(|t| t.name.clone()).unwrap_or_default(),
        });
    }
    let humps: Vec<HumpRow> = hump_widths(&sol)
        .iter()
        .map(|h| {
            let chk = h.bound_check(lambda);
            HumpRow {
                index: h.index,
                r1: h.r1,
                r2: h.r2,
                width: h.width(),
                positive: h.positive,
                complete: h.complete,
                bound: chk.scale,
                relative_slack: chk.relative(),
            }
        })
        .collect();
    let energy = sol.energy_identity();
    let worst_energy = energy.iter().map(|e| e.relative()).fold(0.0, f64::max);
    let summary = shoot_summary(&sol, &segs, worst_energy);

    let body = match format {
        Format::Json => json_doc(
            name,
            json!({
                "summary": summary,
                "trajectory": traj,
                "nodes": sol.nodes,
                "segments": segs,
                "humps": humps,
                "energy": energy,
            }),
        ),
        Format::Csv => {
            let mut doc = CsvDoc::new(name);
            doc.summary(&summary)?;
            doc.table(
                "trajectory",
                &["rho", "w", "wdot", "log_gap"],
                traj.iter()
                    .map(|s| vec![num(s.rho), num(s.w), num(s.wdot), num(s.log_gap)]),
            )?;
            doc.table(
                "nodes",
                &["index", "rho", "wdot"],
                sol.nodes
                    .iter()
                    .enumerate()
                    .map(|(i, n)| vec![i.to_string(), num(n.rho), num(n.wdot)]),
            )?;
            doc.table(
                "segments",
                &[
                    "index",
                    "case",
                    "r1",
                    "r2",
                    "rho_bar",
                    "rho_0",
                    "h",
                    "wdot_rho_0",
                    "complete",
                    "checks",
                    "failures",
                    "min_relative_slack",
                    "tightest",
                ],
                segs.iter().map(|s| {
                    vec![
                        s.index.to_string(),
                        s.case.to_string(),
                        num(s.r1),
                        num(s.r2),
                        num(s.rho_bar),
                        num(s.rho_0),
                        num(s.h),
                        num(s.wdot_rho_0),
                        s.complete.to_string(),
                        s.checks.to_string(),
                        s.failures.to_string(),
                        num(s.min_relative_slack),
                        s.tightest.clone(),
                    ]
                }),
            )?;
            doc.table(
                "humps",
                &[
                    "index",
                    "r1",
                    "r2",
                    "width",
                    "positive",
                    "complete",
                    "bound",
                    "relative_slack",
                ],
                humps.iter().map(|h| {
                    vec![
                        h.index.to_string(),
                        num(h.r1),
                        num(h.r2),
                        num(h.width),
                        h.positive.to_string(),
                        h.complete.to_string(),
                        num(h.bound),
                        num(h.relative_slack),
                    ]
                }),
            )?;
            doc.table(
                "energy",
                &["r1", "r2", "residual", "scale", "relative"],
                energy.iter().map(|e| {
                    vec![
                        num(e.r1),
                        num(e.r2),
                        num(e.residual),
                        num(e.scale),
                        num(e.relative()),
                    ]
                }),
            )?;
            doc.out
        }
    };
    Ok(Output {
        body,
        success: true,
        notes: Vec::new(),
    })
}

fn branch_summary(b: &Branch) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("k".into(), json!(b.k));
    m.insert("sign".into(), json!(b.sign_class.to_string()));
    m.insert("radius".into(), json!(b.radius));
    m.insert("points".into(), json!(b.points.len()));
    m.insert(
        "certified".into(),
        json!(b.points.iter().filter(|p| p.certified).count()),
    );
    m.insert("lambda_lower".into(), json!(b.bounds.lower));
    m.insert("lambda_upper".into(), json!(b.bounds.upper));
    m.insert("within_bounds".into(), json!(b.within_bounds()));
    if let Some(e) = &b.bifurcation_end {
        m.insert("bifurcation_target".into(), json!(e.target));
        m.insert("first_h0".into(), json!(e.first_h0));
        m.insert("first_lambda".into(), json!(e.first_lambda));
        m.insert("bifurcation_extrapolated".into(), json!(e.extrapolated));
    }
    if let Some(a) = &b.asymptote {
        m.insert(
            "asymptote".into(),
            json!(if a.asserted { "asserted" } else { "unasserted" }),
        );
        m.insert("asymptote_target".into(), json!(a.target));
        m.insert("last_lambda".into(), json!(a.last_lambda));
        m.insert("last_h0".into(), json!(b.points.last().map(|p| p.h0)));
        m.insert("asymptote_estimate".into(), json!(a.estimate));
    }
    m.insert("folds".into(), json!(b.folds.len()));
    if let Some(br) = &b.breakdown {
        m.insert("breakdown_h0".into(), json!(br.h0));
        m.insert("breakdown_reason".into(), json!(br.reason));
    }
    m
}

fn branch_cmd(
    name: &str,
    format: Format,
    c: &Common,
    k: usize,
    sign: Sign,
    (h0_min, h0_max, points): (f64, f64, usize),
    radius: f64,
) -> Result<Output> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    ProblemParams::new(1.0, radius)?;
    let schedule = geometric_schedule(h0_min, h0_max, points)?;
    let opts = BranchOptions {
        radius,
        tol: tolerances(c)?,
        ..BranchOptions::default()
    };
    let b = trace_branch(k, sign, &schedule, &opts)?;
    let summary = branch_summary(&b);
    let mut notes = Vec::new();
    if let Some(br) = &b.breakdown {
        notes.push(format!("branch stopped at h0 = {}: {}", br.h0, br.reason));
    }
    let body = match format {
        Format::Json => json_doc(name, json!({ "summary": summary, "branch": b })),
        Format::Csv => {
            let mut doc = CsvDoc::new(name);
            doc.summary(&summary)?;
            doc.table(
                "points",
                &[
                    "h0",
                    "lambda",
                    "k",
                    "sign",
                    "node_count",
                    "sup_w",
                    "inf_w",
                    "e_norm",
                    "min_admissibility",
                    "boundary_residual",
                    "max_abs_wdot",
                    "radius_mismatch",
                    "boundary_resolution",
                    "max_odd_hump_width",
                    "certified",
                ],
                b.points.iter().map(|p| {
                    vec![
                        num(p.h0),
                        num(p.lambda),
                        p.k.to_string(),
                        p.sign_class.to_string(),
                        p.node_count.to_string(),
                        num(p.sup_w),
                        num(p.inf_w),
                        num(p.e_norm),
                        num(p.min_admissibility),
                        num(p.boundary_residual),
                        num(p.max_abs_wdot),
                        num(p.radius_mismatch),
                        num(p.boundary_resolution),
                        num(p.max_odd_hump_width),
                        p.certified.to_string(),
                    ]
                }),
            )?;
            doc.table(
                "folds",
                &["index", "h0", "lambda"],
                b.folds
                    .iter()
                    .map(|f| vec![f.index.to_string(), num(f.h0), num(f.lambda)]),
            )?;
            doc.out
        }
    };
    Ok(Output {
        body,
        success: true,
        notes,
    })
}

fn verify_cmd(format: Format, cfg: &VerifyConfig) -> Result<Output> {
    let report = verify::run(cfg)?;
    let notes = verify_notes(&report);
    let body = match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&report).expect("report serializes");
            out.push(b'\n');
            out
        }
        Format::Csv => {
            let mut doc = CsvDoc::new("verify");
            let mut m = Map::new();
            m.insert("suite".into(), json!(cfg.suite.to_string()));
            m.insert("seed".into(), json!(cfg.seed));
            m.insert("checks".into(), json!(report.checks.len()));
            m.insert("failures".into(), json!(report.failures));
            m.insert("passed".into(), json!(report.passed));
            doc.summary(&m)?;
            doc.table(
                "checks",
                &["suite", "name", "value", "relation", "limit", "passed"],
                report.checks.iter().map(|c| {
                    vec![
                        c.suite.to_string(),
                        c.name.clone(),
                        num(c.value),
                        value_field(&to_value(&c.relation)),
                        num(c.limit),
                        c.passed.to_string(),
                    ]
                }),
            )?;
            if let Some(d) = &report.dirichlet {
                doc.table(
                    "dirichlet",
                    &[
                        "lambda",
                        "u0",
                        "min_u",
                        "u_at_r",
                        "max_abs_udot",
                        "singular",
                        "hit",
                    ],
                    d.rows.iter().map(|r| {
                        vec![
                            num(r.lambda),
                            num(r.u0),
                            num(r.min_u),
                            num(r.u_at_r),
                            num(r.max_abs_udot),
                            r.singular.to_string(),
                            r.hit.to_string(),
                        ]
                    }),
                )?;
            }
            doc.out
        }
    };
    Ok(Output {
        body,
        success: report.passed,
        notes,
    })
}

fn verify_notes(r: &VerifyReport) -> Vec<String> {
    let mut notes = vec![format!(
        "verify: {} checks, {} failed",
        r.checks.len(),
        r.failures
    )];
    notes.extend(r.failed_checks().map(|c| {
        format!(
            "FAIL [{}] {}: {:e} (limit {:e})",
            c.suite, c.name, c.value, c.limit
        )
    }));
    notes
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let file_name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let res = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut so = io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()
        }
    }
}

fn fail(msg: impl Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(exit_status(&Err(Error::Parameter(String::new()))))
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    run(&cli)
}

/// 0 success, 1 failed verification, 2 usage or precondition error.
pub fn exit_status(res: &Result<Output>) -> u8 {
    match res {
        Ok(o) if o.success => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

pub fn run(cli: &Cli) -> ExitCode {
    let res = execute(cli);
    let output = match &res {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    if let Err(e) = emit(cli.common.out.as_deref(), &output.body) {
        return fail(format!("cannot write output: {e}"));
    }
    for n in &output.notes {
        eprintln!("{n}");
    }
    ExitCode::from(exit_status(&res))
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("radbif").chain(args.iter().copied())).unwrap()
    }

    fn text(args: &[&str]) -> String {
        String::from_utf8(execute(&cli(args)).unwrap().body).unwrap()
    }

    /// Rows of one `#section=` table, header excluded.
    fn section<'a>(csv: &'a str, name: &str) -> Vec<Vec<&'a str>> {
        let tag = format!("#section={name}");
        csv.lines()
            .skip_while(|l| *l != tag)
            .skip(2)
            .take_while(|l| !l.starts_with('#'))
            .map(|l| l.split(',').collect())
            .collect()
    }

    fn summary(csv: &str) -> HashMap<String, String> {
        section(csv, "summary")
            .into_iter()
            .map(|r| (r[0].to_string(), r[1..].join(",")))
            .collect()
    }

    fn num(s: &str) -> f64 {
        s.parse().unwrap()
    }

    #[test]
    fn eigs_rows() {
        let t = text(&["eigs", "--kmax", "1"]);
        assert!(t.starts_with("#schema=v1\n"));
        let rows = section(&t, "eigenvalues");
        assert_eq!(rows[0], vec!["0", "", "", "0.0000000000000000e0", ""]);
        let want = [3.8317059702, 2.4048255577, 14.6819706421, 5.7831859629];
        for (a, b) in rows[1][1..].iter().zip(want) {
            assert!((num(a) - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn eigs_quarter_with_doubled_radius() {
        let a = section(&text(&["eigs", "--kmax", "3"]), "eigenvalues")
            .iter()
            .map(|r| r[3].to_string())
            .collect::<Vec<_>>();
        let b = section(
            &text(&["eigs", "--kmax", "3", "--radius", "2"]),
            "eigenvalues",
        )
        .iter()
        .map(|r| r[3].to_string())
        .collect::<Vec<_>>();
        for k in 1..=3 {
            assert!((num(&a[k]) / num(&b[k]) - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        let t = text(&["eigs", "--kmax", "1"]);
        let y = section(&t, "eigenvalues")[1][1];
        let mantissa = y.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17, "{y}");
    }

    #[test]
    fn timemap_values_and_limits() {
        let t = text(&["timemap", "--lambda", "1", "--h-grid", "1e-6,1e6"]);
        let rows = section(&t, "values");
        assert!((num(rows[0][1]) - 1.1107207).abs() < 1e-5);
        assert!((num(rows[1][1]) - std::f64::consts::FRAC_PI_2).abs() < 1e-2);
        assert!(
            (num(&summary(&t)["limit_plus_infinity"]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15
        );
    }

    #[test]
    fn empty_grid_is_header_only() {
        let t = text(&["timemap", "--lambda", "1", "--h-grid", ""]);
        assert!(t.ends_with("#section=values\nh,phi,error\n"));
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("1e-6, 2 -3").unwrap(), vec![1e-6, 2.0, -3.0]);
        assert!(parse_grid("1,x").is_err());
    }

    #[test]
    fn shoot_at_the_bifurcation_point() {
        let t = text(&["shoot", "--lambda", "7.3409853210619476", "--h0", "1e-6"]);
        let s = summary(&t);
        assert_eq!(s["node_count"], "1");
        assert!(num(&s["wdot_end"]).abs() < 1e-8);
        let node = num(section(&t, "nodes")[0][1]);
        assert!((node - 2.404825557695773 / 3.8317059702075125).abs() < 1e-6);
        assert_eq!(s["inequality_failures"], "0");
    }

    #[test]
    fn zero_shot_has_zero_columns() {
        let t = text(&["shoot", "--lambda", "5", "--h0", "0"]);
        for r in section(&t, "trajectory") {
            assert!(r[1..].iter().all(|x| num(x) == 0.0));
        }
    }

    #[test]
    fn exit_statuses() {
        let bad = execute(&cli(&["shoot", "--lambda", "4", "--h0", "-0.6"]));
        assert!(matches!(bad, Err(Error::Inadmissible { .. })));
        assert_eq!(exit_status(&bad), 2);
        assert_eq!(
            exit_status(&execute(&cli(&["timemap", "--lambda", "-1"]))),
            2
        );
        assert_eq!(exit_status(&execute(&cli(&["branch", "--k", "0"]))), 2);
        assert_eq!(exit_status(&execute(&cli(&["eigs", "--kmax", "1"]))), 0);
        let e = Cli::try_parse_from(["radbif", "eigs", "--kmax", "x"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(
            Cli::try_parse_from(["radbif", "nope"])
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn injected_tolerance_fails_named_checks() {
        let res = execute(&cli(&[
            "verify",
            "--suite",
            "specfun",
            "--override-tol",
            "1e-30",
        ]));
        assert_eq!(exit_status(&res), 1);
        let report: Value = serde_json::from_slice(&res.unwrap().body).unwrap();
        assert_eq!(report["passed"], false);
        assert!(report["checks"]
            .as_array()
            .unwrap()
            .iter()
            .any(|c| c["passed"] == false && c["name"] == "J0'(y1)"));
    }

    #[test]
    fn check_names_with_commas_are_quoted() {
        let t = text(&["verify", "--suite", "specfun", "--format", "csv"]);
        assert!(t.contains("\"J0, J1 against the integral representation, x in [0, 40]\""));
    }

    #[test]
    fn negative_sign_parses() {
        match cli(&["branch", "--sign", "-"]).command {
            Command::Branch { sign, .. } => assert_eq!(sign, Sign::Minus),
            _ => unreachable!(),
        }
    }

    #[test]
    fn branch_summaries() {
        let s = summary(&text(&["branch", "--k", "1"]));
        assert_eq!(s["asymptote"], "asserted");
        assert!((num(&s["first_lambda"]) - 7.3410).abs() < 1e-3);
        assert!((num(&s["last_lambda"]) - 5.7832).abs() < 1e-3);

        let v: Value =
            serde_json::from_str(&text(&["branch", "--k", "2", "--format", "json"])).unwrap();
        assert!((v["summary"]["last_lambda"].as_f64().unwrap() - 14.6820).abs() < 1e-3);

        assert_eq!(
            summary(&text(&["branch", "--k", "1", "--sign", "-"]))["asymptote"],
            "unasserted"
        );
    }

    #[test]
    fn dirichlet_suite_reports_no_hits() {
        let res = execute(&cli(&["verify", "--suite", "dirichlet"]));
        assert_eq!(exit_status(&res), 0);
        let v: Value = serde_json::from_slice(&res.unwrap().body).unwrap();
        assert_eq!(v["dirichlet"]["hits"], 0);
        assert_eq!(v["dirichlet"]["rows"].as_array().unwrap().len(), 400);
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let args = ["shoot", "--lambda", "30", "--h0", "0.8", "--format", "json"];
        assert_eq!(text(&args), text(&args));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("radbif-cli-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.csv");
        write_atomic(&p, b"a").unwrap();
        write_atomic(&p, b"b").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"b");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
