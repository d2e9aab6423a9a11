//! Command-line front end.
//!
//! Data goes to stdout (or `--output`), diagnostics to stderr. Exit codes: 0 on
//! success, 2 for configuration errors (including bad flags), 3 for I/O errors,
//! 4 for numeric failures.

use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ar1::{generate_ar1_with, noise_sigma_for_coverage, sign_process, Ar1Params, Init};
use crate::complexity::{formula_op_count, measured_op_count, EstimatorKind};
use crate::dyadic::{
    quantize_dyadic_cost_aware, ConstantRole, DyadicCaps, DyadicRational, REFERENCE_COST_WEIGHT,
};
use crate::error::{Error, ErrorKind, Result};
use crate::estimators::{acf_estimate, kedem_rho, lambda_hat, PiecewiseLinearModel};
use crate::fixed::{FixedWord, QFormat};
use crate::montecarlo::{
    export_plot, run_bias_experiment, to_csv_string, EstimatorPath, ExperimentConfig,
};
use crate::pwl_fit::{fit_piecewise, kedem_target, max_abs_error, FitConfig, InnerFit};
use crate::streaming::{
    quantize_samples, read_le16_samples, read_text_samples, CorrelatorState, RhoBackend,
    RhoPipeline, WindowConfig, DEFAULT_WINDOW,
};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "rho-lite",
    version,
    about = "Low-complexity AR(1) correlation estimators"
)]
pub struct Cli {
    /// Base RNG seed.
    #[arg(long, global = true, env = "RHO_LITE_SEED")]
    pub seed: Option<u64>,

    /// Write data here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an AR(1) sample path, one sample per line.
    Generate(GenerateArgs),
    /// Estimate ρ from a sample stream.
    Estimate(EstimateArgs),
    /// Fit a piecewise-linear approximation of cos(π(1 − λ)).
    Fit(FitArgs),
    /// Operation counts per estimator: closed form and measured.
    Complexity(ComplexityArgs),
    /// Monte Carlo bias study.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    /// Innovation standard deviation.
    #[arg(long, conflicts_with = "coverage")]
    pub sigma: Option<f64>,
    /// Choose σ so this fraction of innovations falls inside ±1.
    #[arg(long)]
    pub coverage: Option<f64>,
    #[arg(long, short)]
    pub n: usize,
    /// Start from zero and discard this many steps instead of a stationary draw.
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorChoice {
    Acf,
    Kedem,
    Proposed,
    ProposedDyadic,
    All,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Sample file; stdin when absent or `-`.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EstimatorChoice::All)]
    pub estimator: EstimatorChoice,
    /// Per-sample sliding-window estimates instead of one batch value.
    #[arg(long)]
    pub streaming: bool,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Quantize samples to B-bit words with B − 2 fraction bits.
    #[arg(long, value_name = "B")]
    pub fixed_point: Option<u32>,
    /// Input is raw little-endian 16-bit words of the fixed-point format.
    #[arg(long)]
    pub raw16: bool,
    /// Emit streaming estimates before the window has filled.
    #[arg(long)]
    pub emit_warmup: bool,
    /// Piecewise model file (as written by `fit --model-out`) for the proposed estimator.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, default_value_t = 5)]
    pub segments: usize,
    #[arg(long, default_value_t = 10_001)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 1_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 40)]
    pub population: usize,
    /// Mirror breakpoints about 1/2.
    #[arg(long)]
    pub antisymmetric: bool,
    /// Per-segment least squares instead of minimax lines.
    #[arg(long)]
    pub least_squares: bool,
    /// Quantize constants to dyadic rationals: max denominator (power of two) and max numerator.
    #[arg(long, num_args = 2, value_names = ["DEN", "NUM"])]
    pub dyadic_caps: Option<Vec<u64>>,
    /// Write the fitted model as CSV.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ComplexityArgs {
    #[arg(long, short, default_value_t = DEFAULT_WINDOW)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// key=value file; flags override its settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, short)]
    pub n: Option<usize>,
    /// `standard`, `closed` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, conflicts_with = "coverage")]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub coverage: Option<f64>,
    /// Clamp estimates to [−1, 1] before averaging.
    #[arg(long)]
    pub clamp: bool,
    /// Use the fixed-point streaming datapaths.
    #[arg(long)]
    pub hardware: bool,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Also write bias.csv and a gnuplot script here.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
}

/// Process entry point; returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Config => EXIT_CONFIG,
        ErrorKind::Io => EXIT_IO,
        ErrorKind::Numeric => EXIT_NUMERIC,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let text = match &cli.command {
        Command::Generate(a) => cmd_generate(a, cli.seed.unwrap_or(0))?,
        Command::Estimate(a) => cmd_estimate(a, cli.format)?,
        Command::Fit(a) => cmd_fit(a, cli.seed.unwrap_or(0), cli.format)?,
        Command::Complexity(a) => cmd_complexity(a, cli.seed.unwrap_or(0), cli.format)?,
        Command::Experiment(a) => cmd_experiment(a, cli.seed, cli.format)?,
    };
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Renders rows as CSV or as a right-aligned text table.
fn render(header: &[&str], rows: &[Vec<String>], format: OutputFormat) -> String {
    let mut s = String::new();
    match format {
        OutputFormat::Csv => {
            s.push_str(&header.join(","));
            s.push('\n');
            for r in rows {
                s.push_str(&r.join(","));
                s.push('\n');
            }
        }
        OutputFormat::Table => {
            let widths: Vec<usize> = (0..header.len())
                .map(|c| {
                    rows.iter()
                        .map(|r| r[c].len())
                        .chain([header[c].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: Vec<&str>| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            s.push_str(&line(header.to_vec()));
            s.push('\n');
            s.push_str(
                &widths
                    .iter()
                    .map(|w| "-".repeat(*w))
                    .collect::<Vec<_>>()
                    .join("  "),
            );
            s.push('\n');
            for r in rows {
                s.push_str(&line(r.iter().map(String::as_str).collect()));
                s.push('\n');
            }
        }
    }
    s
}

fn cmd_generate(a: &GenerateArgs, seed: u64) -> Result<String> {
    let sigma = match (a.sigma, a.coverage) {
        (Some(s), _) => s,
        (None, Some(c)) => noise_sigma_for_coverage(c, 1.0)?,
        (None, None) => return Err(Error::invalid("generate needs --sigma or --coverage")),
    };
    let params = Ar1Params::new(a.rho, sigma)?;
    let init = a.burn_in.map_or(Init::Stationary, Init::BurnIn);
    let series = generate_ar1_with(params, a.n, seed, init)?;
    let mut s = String::with_capacity(series.len() * 22);
    for x in series.iter() {
        s.push_str(&format!("{x}\n"));
    }
    Ok(s)
}

fn input_format(bits: Option<u32>) -> Result<QFormat> {
    match bits {
        None => Ok(QFormat::Q1_8),
        Some(b) if (4..=16).contains(&b) => QFormat::new(b, b - 2),
        Some(b) => Err(Error::invalid(format!(
            "--fixed-point must be in 4..=16, got {b}"
        ))),
    }
}

fn read_input(a: &EstimateArgs, format: QFormat) -> Result<Vec<FixedWordOrFloat>> {
    let name = a.input.clone().unwrap_or_else(|| PathBuf::from("-"));
    let reader: Box<dyn Read> = if name.as_os_str() == "-" {
        Box::new(io::stdin().lock())
    } else {
        Box::new(fs::File::open(&name).map_err(|e| Error::io(&name, e))?)
    };
    if a.raw16 {
        Ok(read_le16_samples(reader, format)?
            .into_iter()
            .map(FixedWordOrFloat::Word)
            .collect())
    } else {
        Ok(read_text_samples(BufReader::new(reader))?
            .into_iter()
            .map(FixedWordOrFloat::Float)
            .collect())
    }
}

#[derive(Clone, Copy)]
enum FixedWordOrFloat {
    Word(FixedWord),
    Float(f64),
}

fn read_model(path: &Path) -> Result<PiecewiseLinearModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::Parse {
        context: path.display().to_string(),
        message,
    };
    let mut breakpoints = vec![];
    let mut intercepts = vec![];
    let mut slopes = vec![];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |k: usize| -> Result<f64> {
            cells.get(k).and_then(|c| c.parse().ok()).ok_or_else(|| {
                bad(format!(
                    "line {}: expected segment,lo,hi,intercept,slope",
                    i + 1
                ))
            })
        };
        if breakpoints.is_empty() {
            breakpoints.push(num(1)?);
        }
        breakpoints.push(num(2)?);
        intercepts.push(num(3)?);
        slopes.push(num(4)?);
    }
    PiecewiseLinearModel::new(breakpoints, intercepts, slopes)
}

fn cmd_estimate(a: &EstimateArgs, format: OutputFormat) -> Result<String> {
    let qf = input_format(a.fixed_point)?;
    if a.raw16 && a.fixed_point.is_none() {
        eprintln!("note: raw 16-bit input read as {qf}");
    }
    let samples = read_input(a, qf)?;
    let model = match &a.model {
        Some(p) => read_model(p)?,
        None => PiecewiseLinearModel::reference(),
    };
    let kinds: Vec<EstimatorChoice> = match a.estimator {
        EstimatorChoice::All => vec![
            EstimatorChoice::Acf,
            EstimatorChoice::Kedem,
            EstimatorChoice::Proposed,
            EstimatorChoice::ProposedDyadic,
        ],
        k => vec![k],
    };
    let name = |k: EstimatorChoice| {
        k.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    };

    if a.streaming {
        let words: Vec<FixedWord> = samples
            .iter()
            .map(|s| match *s {
                FixedWordOrFloat::Word(w) => w,
                FixedWordOrFloat::Float(v) => quantize_samples(&[v], qf)[0],
            })
            .collect();
        // the streaming proposed estimator is the dyadic datapath
        let kinds: Vec<EstimatorChoice> = kinds
            .into_iter()
            .filter(|&k| !(k == EstimatorChoice::Proposed && a.estimator == EstimatorChoice::All))
            .collect();
        let window = WindowConfig {
            emit_during_warmup: a.emit_warmup,
            ..WindowConfig::new(a.window, qf)?
        };
        enum Stage {
            Acf(CorrelatorState),
            Rho(RhoPipeline),
        }
        let mut stages = kinds
            .iter()
            .map(|k| {
                Ok(match k {
                    EstimatorChoice::Acf => Stage::Acf(CorrelatorState::new(window)?),
                    EstimatorChoice::Kedem => {
                        Stage::Rho(RhoPipeline::new(window, RhoBackend::Cordic)?)
                    }
                    _ => Stage::Rho(RhoPipeline::new(window, RhoBackend::DyadicPwl)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for (i, &w) in words.iter().enumerate() {
            let mut row = vec![i.to_string()];
            let mut any = false;
            for st in &mut stages {
                let cell = match st {
                    Stage::Acf(c) => match c.push(w)? {
                        Some(win) => match win.to_word(QFormat::Q1_8) {
                            Ok(v) => Some(v.to_f64().to_string()),
                            Err(Error::Degenerate(_)) => Some("nan".to_string()),
                            Err(e) => return Err(e),
                        },
                        None => None,
                    },
                    Stage::Rho(p) => p.push(w)?.map(|v| v.to_f64().to_string()),
                };
                any |= cell.is_some();
                row.push(cell.unwrap_or_default());
            }
            if any {
                rows.push(row);
            }
        }
        let mut header = vec!["sample_index".to_string()];
        header.extend(kinds.iter().map(|&k| name(k)));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        return Ok(render(&header, &rows, format));
    }

    let values: Vec<f64> = samples
        .iter()
        .map(|s| match *s {
            FixedWordOrFloat::Word(w) => w.to_f64(),
            FixedWordOrFloat::Float(v) => match a.fixed_point {
                Some(_) => quantize_samples(&[v], qf)[0].to_f64(),
                None => v,
            },
        })
        .collect();
    let mut rows = Vec::new();
    let lambda = || -> Result<f64> { Ok(lambda_hat(&sign_process(&values))?.value()) };
    for k in kinds {
        let v = match k {
            EstimatorChoice::Acf => acf_estimate(&values)?,
            EstimatorChoice::Kedem => kedem_rho(lambda()?)?,
            EstimatorChoice::Proposed => model.eval(lambda()?)?,
            EstimatorChoice::ProposedDyadic => {
                PiecewiseLinearModel::reference_dyadic().eval(lambda()?)?
            }
            EstimatorChoice::All => unreachable!("expanded above"),
        };
        rows.push(vec![name(k), v.to_string()]);
    }
    Ok(render(&["estimator", "estimate"], &rows, format))
}

fn model_rows(label: &str, m: &PiecewiseLinearModel, err: f64, rows: &mut Vec<Vec<String>>) {
    for s in 0..m.segments() {
        rows.push(vec![
            label.to_string(),
            (s + 1).to_string(),
            m.breakpoints()[s].to_string(),
            m.breakpoints()[s + 1].to_string(),
            m.intercepts()[s].to_string(),
            m.slopes()[s].to_string(),
            err.to_string(),
        ]);
    }
}

fn quantized_rows(
    label: &str,
    m: &PiecewiseLinearModel,
    caps: &DyadicCaps,
    grid: usize,
    rows: &mut Vec<Vec<String>>,
) -> Result<()> {
    let q = |v: f64, role| -> DyadicRational {
        quantize_dyadic_cost_aware(v, caps, role, REFERENCE_COST_WEIGHT)
    };
    let ic: Vec<DyadicRational> = m
        .intercepts()
        .iter()
        .map(|&v| q(v, ConstantRole::Intercept))
        .collect();
    let sl: Vec<DyadicRational> = m
        .slopes()
        .iter()
        .map(|&v| q(v, ConstantRole::Slope))
        .collect();
    let qm = PiecewiseLinearModel::new(
        m.breakpoints().to_vec(),
        ic.iter().map(DyadicRational::value).collect(),
        sl.iter().map(DyadicRational::value).collect(),
    )?;
    let (err, _) = max_abs_error(&qm, kedem_target, grid);
    for s in 0..m.segments() {
        rows.push(vec![
            label.to_string(),
            (s + 1).to_string(),
            m.breakpoints()[s].to_string(),
            m.breakpoints()[s + 1].to_string(),
            ic[s].reduced().to_string(),
            sl[s].reduced().to_string(),
            err.to_string(),
        ]);
    }
    Ok(())
}

fn cmd_fit(a: &FitArgs, seed: u64, format: OutputFormat) -> Result<String> {
    let cfg = FitConfig {
        n_segments: a.segments,
        grid_size: a.grid_size,
        antisymmetry_constraint: a.antisymmetric,
        max_iterations: a.iterations,
        population: a.population,
        seed,
        inner: if a.least_squares {
            InnerFit::LeastSquares
        } else {
            InnerFit::Minimax
        },
        ..FitConfig::default()
    };
    let caps = match &a.dyadic_caps {
        None => None,
        Some(v) => {
            let (den, num) = (v[0], v[1]);
            if !den.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "dyadic denominator cap must be a power of two, got {den}"
                )));
            }
            Some(DyadicCaps {
                max_log2_denominator: den.trailing_zeros(),
                max_numerator: num,
            })
        }
    };
    let fit = match fit_piecewise(kedem_target, &cfg) {
        Ok(f) => f,
        Err(Error::NotConverged { iterations, best }) => {
            eprintln!(
                "warning: population not converged after {iterations} generations; reporting the best model"
            );
            *best
        }
        Err(e) => return Err(e),
    };
    if let Some(path) = &a.model_out {
        let mut rows = Vec::new();
        model_rows("fit", &fit.model, fit.max_error, &mut rows);
        let rows: Vec<Vec<String>> = rows.into_iter().map(|r| r[1..6].to_vec()).collect();
        let text = render(
            &["segment", "lo", "hi", "intercept", "slope"],
            &rows,
            OutputFormat::Csv,
        );
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    eprintln!(
        "fit: max error {:.6e} at lambda {:.6} after {} generations",
        fit.max_error, fit.argmax, fit.generations
    );

    let reference = PiecewiseLinearModel::reference();
    let mut rows = Vec::new();
    model_rows("fit", &fit.model, fit.max_error, &mut rows);
    model_rows(
        "reference",
        &reference,
        max_abs_error(&reference, kedem_target, a.grid_size).0,
        &mut rows,
    );
    if let Some(caps) = caps {
        quantized_rows("fit-dyadic", &fit.model, &caps, a.grid_size, &mut rows)?;
        quantized_rows(
            "reference-dyadic",
            &reference,
            &caps,
            a.grid_size,
            &mut rows,
        )?;
    }
    Ok(render(
        &[
            "model",
            "segment",
            "lo",
            "hi",
            "intercept",
            "slope",
            "max_error",
        ],
        &rows,
        format,
    ))
}

fn cmd_complexity(a: &ComplexityArgs, seed: u64, format: OutputFormat) -> Result<String> {
    let mut rows = Vec::new();
    for kind in EstimatorKind::ALL {
        let f = formula_op_count(kind, a.n)?;
        let m = measured_op_count(kind, a.n, seed)?;
        rows.push(vec![
            kind.to_string(),
            a.n.to_string(),
            f.multiplications.to_string(),
            m.multiplications.to_string(),
            f.divisions.to_string(),
            m.divisions.to_string(),
            f.additions.to_string(),
            m.additions.to_string(),
            f.shifts.to_string(),
            m.shifts.to_string(),
            f.comparisons.to_string(),
            m.comparisons.to_string(),
        ]);
    }
    Ok(render(
        &[
            "estimator",
            "n",
            "mult",
            "mult_measured",
            "div",
            "div_measured",
            "add",
            "add_measured",
            "shift",
            "shift_measured",
            "compare",
            "compare_measured",
        ],
        &rows,
        format,
    ))
}

fn cmd_experiment(a: &ExperimentArgs, seed: Option<u64>, format: OutputFormat) -> Result<String> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_file_contents(&text)?;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(n) = a.n {
        cfg.series_length = n;
    }
    if let Some(g) = &a.grid {
        cfg.apply("rho_grid", g)?;
    }
    if let Some(s) = a.sigma {
        cfg.noise_sigma = s;
    }
    if let Some(c) = a.coverage {
        cfg.noise_sigma = noise_sigma_for_coverage(c, 1.0)?;
    }
    if a.clamp {
        cfg.clamp_outputs = true;
    }
    if a.hardware {
        cfg.path = EstimatorPath::Hardware;
    }
    if let Some(b) = a.burn_in {
        cfg.init = if b == 0 {
            Init::Stationary
        } else {
            Init::BurnIn(b)
        };
    }
    if let Some(s) = seed {
        cfg.base_seed = s;
    }

    let report = run_bias_experiment(&cfg)?;
    eprintln!(
        "experiment: {} grid points x {} replicates; max |proposed - kedem| {:.4e}, {} replicate(s) at or above the bound",
        cfg.rho_grid.len(),
        cfg.replicates,
        report.max_pair_gap(),
        report.total_violations()
    );
    if let Some(dir) = &a.plot_dir {
        let (_, script) = export_plot(&report, dir)?;
        eprintln!("plot script written to {}", script.display());
    }
    match format {
        OutputFormat::Csv => to_csv_string(&report.rows),
        OutputFormat::Table => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        format!("{:.2}", r.rho),
                        r.estimator.to_string(),
                        format!("{:+.5}", r.mean_error),
                        format!("{:.5}", r.stderr),
                        format!("{:+.5}", r.ci_lo),
                        format!("{:+.5}", r.ci_hi),
                    ]
                })
                .collect();
            Ok(render(
                &["rho", "estimator", "mean_error", "stderr", "ci_lo", "ci_hi"],
                &rows,
                format,
            ))
        }
    }
}
