// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcdeform::config::{
    self, Command, ExperimentConfig, OutputFormat, DEFAULT_OUTPUT_DEGREE, MARGIN_TOL,
    SCHEMA_VERSION,
};
use qcdeform::deform::{
    check_deformation, newton_deform, newton_deform_fixed_tau, DeformOptions, DeformationProblem,
    VerificationReport, VerifyPolicy,
};
use qcdeform::extremals::{
    bergman_perturb, bergman_perturb_identity, bound_sweep, parseval_comparison,
    sample_nonvanishing, sample_zero_free_polynomial, series_kappa, verify_bound_with, BoundPolicy,
    SampleStyle,
};
use qcdeform::integral::AnnulusSpec;
use qcdeform::{Error, PowerSeries64, C64};

const EXIT_CONTRACT: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_NONCONVERGENCE: u8 = 4;

/// Allowed excess of the truncated extremal's `H^p` norm over 1.
const KAPPA_NORM_TOL: f64 = 2e-3;

#[derive(Parser)]
#[command(
    name = "qcdeform",
    version,
    about = "Coefficient bounds and quasiconformal deformations of zero-free functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coefficients of the extremal function and the bound margin.
    Kappa(Common),
    /// Bound margins over seeded zero-free functions.
    Sweep(Common),
    /// Coefficient-targeting deformation with contract checks.
    Deform(DeformArgs),
    /// Zero-free perturbation that lowers the A_2 norm.
    BergmanDemo(Common),
    /// |c_1|^2 against the tail of the extremal's Parseval sum.
    Parseval(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Exponent list: `2,2.5,4` or `start:stop:step`.
    #[arg(long = "p", value_parser = parse_p_grid)]
    p: Option<Grid>,
    /// Coefficient indices, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds in a sweep.
    #[arg(long)]
    count: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    degree: Option<usize>,
    /// Inner radius of the deformation annulus.
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct DeformArgs {
    #[command(flatten)]
    common: Common,
    /// Requested change of c_n as `re,im`.
    #[arg(long, value_parser = parse_complex, default_value = "0,0.001", allow_hyphen_values = true)]
    target: C64,
    /// Re-solve the coefficient rows with tau shifted by this amount.
    #[arg(long, allow_hyphen_values = true)]
    corrupt_tau: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

fn parse_p_grid(s: &str) -> Result<Grid, String> {
    let values: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let [a, b, h] = parts[..] else {
            return Err("range needs start:stop:step".into());
        };
        if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
            return Err("range needs finite start <= stop and step > 0".into());
        }
        let count = ((b - a) / h + 1e-9).floor() as usize;
        (0..=count).map(|i| a + i as f64 * h).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("empty p list".into());
    }
    if let Some(p) = values.iter().find(|&&p| !(p > 1.0)) {
        return Err(format!("need p > 1, got {p}"));
    }
    Ok(Grid(values))
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [re, im] = parts[..] else {
        return Err("expected re,im".into());
    };
    let re = re.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = im.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(C64::new(re, im))
}

fn experiment(command: Command, a: &Common) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(command);
    let (p, n, count, eps, degree) = match command {
        Command::Kappa => (vec![2.0], vec![1], 1, 0.0, config::DEFAULT_DEGREE),
        Command::Sweep => (
            vec![2.0, 2.5, 4.0],
            vec![2, 3, 5],
            100,
            0.0,
            config::DEFAULT_DEGREE,
        ),
        Command::Deform => (vec![2.0], vec![3], 1, 1e-2, DEFAULT_OUTPUT_DEGREE),
        Command::BergmanDemo => (vec![2.0], vec![1], 1, 0.1, 0),
        Command::Parseval => {
            let mut grid = vec![1.2, 1.5];
            grid.extend((0..=56).map(|i| 2.0 + 0.25 * i as f64));
            (grid, vec![1], 1, 0.0, 128)
        }
    };
    c.p = a.p.clone().map_or(p, |g| g.0);
    c.n = a.n.clone().unwrap_or(n);
    c.seed = a
        .seed
        .unwrap_or(if command == Command::Deform { 7 } else { 0 });
    c.count = a.count.unwrap_or(count);
    c.eps = a.eps.unwrap_or(eps);
    c.degree = a.degree.unwrap_or(degree);
    c.annulus_r = a.r;
    c.tol = a.tol.unwrap_or(config::NEWTON_TOL);
    c.output_path = a.out.clone();
    c.format = match a.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    c
}

/// Rendered output plus the exit status it implies.
struct Outcome {
    body: String,
    code: u8,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: &'static str,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    report: T,
}

fn json<T: Serialize>(cfg: &ExperimentConfig, report: T) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        report,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
    s.push('\n');
    s
}

fn csv_table<R: Serialize>(command: &str, rows: &[R], trailer: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(w.into_inner().expect("in-memory writer"));
    for t in trailer {
        w.write_record(t).expect("record writes");
    }
    let bytes = w.into_inner().expect("in-memory writer");
    format!(
        "# qcdeform {command} schema {SCHEMA_VERSION}\n{}",
        String::from_utf8(bytes).expect("utf-8")
    )
}

#[derive(Serialize)]
struct KappaRow {
    n: usize,
    p: f64,
    c_n_abs: f64,
    bound: f64,
    margin: f64,
}

#[derive(Serialize)]
struct KappaEntry {
    #[serde(flatten)]
    row: KappaRow,
    hardy_norm: f64,
    /// Nonzero coefficients as `(k, re, im)`.
    coefficients: Vec<(usize, f64, f64)>,
}

fn cmd_kappa(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let policy = BoundPolicy {
        norm_tol: KAPPA_NORM_TOL,
        radius: None,
    };
    let mut entries = Vec::new();
    for &n in &cfg.n {
        for &p in &cfg.p {
            let k = series_kappa(n, p, cfg.degree.max(n))?;
            let r = verify_bound_with(&k, n, p, &policy)?;
            let hardy = qcdeform::norms::hardy_norm(&k, p, 1.0)?.value;
            entries.push(KappaEntry {
                row: KappaRow {
                    n,
                    p,
                    c_n_abs: r.functional_value,
                    bound: r.bound,
                    margin: r.margin,
                },
                hardy_norm: hardy,
                coefficients: k
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm() != 0.0)
                    .map(|(i, c)| (i, c.re, c.im))
                    .collect(),
            });
        }
    }
    let ok = entries.iter().all(|e| e.row.margin >= -MARGIN_TOL);
    let body = match cfg.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct R<'a> {
                rows: &'a [KappaEntry],
            }
            json(cfg, R { rows: &entries })
        }
        OutputFormat::Csv => {
            let rows: Vec<&KappaRow> = entries.iter().map(|e| &e.row).collect();
            csv_table("kappa", &rows, &[])
        }
    };
    Ok(Outcome {
        body,
        code: if ok { 0 } else { EXIT_CONTRACT },
    })
}

fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let rows = bound_sweep(cfg.seed..cfg.seed + cfg.count, &cfg.p, &cfg.n)?;
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let ok = min_margin >= -MARGIN_TOL;
    let body = match cfg.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct R<'a> {
                rows: &'a [qcdeform::extremals::SweepRow],
                min_margin: f64,
            }
            json(
                cfg,
                R {
                    rows: &rows,
                    min_margin,
                },
            )
        }
        OutputFormat::Csv => {
            let summary = vec![
                "min".to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                min_margin.to_string(),
            ];
            csv_table("sweep", &rows, &[summary])
        }
    };
    Ok(Outcome {
        body,
        code: if ok { 0 } else { EXIT_CONTRACT },
    })
}

fn deform_problem(cfg: &ExperimentConfig, target: C64) -> Result<DeformationProblem<f64>, Error> {
    let p = cfg.p[0];
    let n = cfg.n[0];
    let f = sample_nonvanishing::<f64>(cfg.seed, p, SampleStyle::ExpOfSeries)?;
    let mut d = vec![C64::new(0.0, 0.0); n + 1];
    d[n] = target;
    let mut problem = DeformationProblem::new(f, p, n, d, cfg.eps);
    problem.mu_cap = cfg.mu_cap;
    problem.output_degree = cfg.degree.max(problem.f.degree());
    if let Some(r) = cfg.annulus_r {
        problem.annulus = Some(AnnulusSpec::new(problem.f.coeff(0), r)?);
    }
    Ok(problem)
}

fn cmd_deform(cfg: &ExperimentConfig, args: &DeformArgs) -> Result<Outcome, Error> {
    let problem = deform_problem(cfg, args.target)?;
    let opts = DeformOptions {
        tol: cfg.tol,
        ..DeformOptions::default()
    };
    let mut result = newton_deform(&problem, &opts)?;
    if let Some(shift) = args.corrupt_tau {
        result = newton_deform_fixed_tau(&problem, result.tau + shift, &opts)?;
    }
    let report = check_deformation(&result, &problem, &VerifyPolicy::default())?;
    let failure = report.first_failure();
    let code = if failure.is_none() { 0 } else { EXIT_CONTRACT };
    let body = match cfg.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct R<'a> {
                passed: bool,
                failed_contract: Option<String>,
                verification: &'a VerificationReport,
                result: &'a qcdeform::deform::DeformationResult<f64>,
            }
            json(
                cfg,
                R {
                    passed: failure.is_none(),
                    failed_contract: failure.map(|c| c.to_string()),
                    verification: &report,
                    result: &result,
                },
            )
        }
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row {
                contract: u8,
                name: String,
                passed: bool,
            }
            let rows: Vec<Row> = [
                qcdeform::Contract::Coefficients,
                qcdeform::Contract::AreaNorm,
                qcdeform::Contract::HardyNorm,
                qcdeform::Contract::Conformal,
                qcdeform::Contract::Nonvanishing,
            ]
            .iter()
            .zip(report.passed)
            .map(|(&c, passed)| Row {
                contract: c as u8,
                name: c.to_string(),
                passed,
            })
            .collect();
            csv_table("deform", &rows, &[])
        }
    };
    Ok(Outcome { body, code })
}

#[derive(Serialize)]
struct BergmanRow {
    seed: Option<u64>,
    degree: usize,
    eps: f64,
    norm_before: f64,
    norm_after: f64,
    norm_after_sq: f64,
    identity_sq: f64,
    zero_free: bool,
    decreased: bool,
}

fn cmd_bergman_demo(cfg: &ExperimentConfig, seeded: bool) -> Result<Outcome, Error> {
    let poly = if seeded {
        sample_zero_free_polynomial::<f64>(cfg.seed, cfg.degree.max(1))?
    } else {
        PowerSeries64::constant(C64::new(1.0, 0.0)).resized(cfg.degree)
    };
    let r = bergman_perturb(&poly, cfg.eps)?;
    let row = BergmanRow {
        seed: seeded.then_some(cfg.seed),
        degree: poly.degree(),
        eps: cfg.eps,
        norm_before: r.norm_before,
        norm_after: r.norm_after,
        norm_after_sq: r.norm_after * r.norm_after,
        identity_sq: bergman_perturb_identity(&poly, cfg.eps),
        zero_free: r.zero_free,
        decreased: r.norm_after < r.norm_before,
    };
    let linked = (row.norm_after_sq - row.identity_sq).abs() < 1e-12;
    let moved = if cfg.eps == 0.0 {
        row.norm_after == row.norm_before
    } else {
        row.decreased
    };
    let ok = linked && moved && row.zero_free;
    let body = match cfg.format {
        OutputFormat::Json => json(cfg, &row),
        OutputFormat::Csv => csv_table("bergman-demo", &[&row], &[]),
    };
    Ok(Outcome {
        body,
        code: if ok { 0 } else { EXIT_CONTRACT },
    })
}

#[derive(Serialize)]
struct ParsevalRow {
    p: f64,
    c1_sq: f64,
    tail_sq: f64,
    holds: bool,
    hardy_2: f64,
    hardy_p: f64,
    h2_exceeds_hp: bool,
}

fn cmd_parseval(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let rows: Vec<ParsevalRow> = cfg
        .p
        .iter()
        .map(|&p| {
            let r = parseval_comparison(p, cfg.degree)?;
            Ok(ParsevalRow {
                p,
                c1_sq: r.c1_sq,
                tail_sq: r.tail_sq,
                holds: r.inequality_holds,
                hardy_2: r.hardy_2,
                hardy_p: r.hardy_p,
                h2_exceeds_hp: r.h2_exceeds_hp,
            })
        })
        .collect::<Result<_, Error>>()?;
    let ok = rows.iter().filter(|r| r.p >= 2.0).all(|r| r.holds);
    let body = match cfg.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct R<'a> {
                rows: &'a [ParsevalRow],
            }
            json(cfg, R { rows: &rows })
        }
        OutputFormat::Csv => csv_table("parseval", &rows, &[]),
    };
    Ok(Outcome {
        body,
        code: if ok { 0 } else { EXIT_CONTRACT },
    })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ContractViolation { .. } => EXIT_CONTRACT,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_PRECONDITION,
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("QCDEFORM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn emit(cfg: &ExperimentConfig, body: &str) -> std::io::Result<()> {
    match &cfg.output_path {
        Some(path) => std::fs::write(path, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PRECONDITION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_threads();
    let (command, common) = match &cli.command {
        Cmd::Kappa(a) => (Command::Kappa, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Deform(a) => (Command::Deform, &a.common),
        Cmd::BergmanDemo(a) => (Command::BergmanDemo, a),
        Cmd::Parseval(a) => (Command::Parseval, a),
    };
    let cfg = experiment(command, common);
    let run = cfg.validate().and_then(|_| match &cli.command {
        Cmd::Kappa(_) => cmd_kappa(&cfg),
        Cmd::Sweep(_) => cmd_sweep(&cfg),
        Cmd::Deform(a) => cmd_deform(&cfg, a),
        Cmd::BergmanDemo(a) => cmd_bergman_demo(&cfg, a.seed.is_some()),
        Cmd::Parseval(_) => cmd_parseval(&cfg),
    });
    match run {
        Ok(out) => {
            if let Err(e) = emit(&cfg, &out.body) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_PRECONDITION);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("run `qcdeform help` for usage");
            ExitCode::from(exit_code(&e))
        }
    }
}
