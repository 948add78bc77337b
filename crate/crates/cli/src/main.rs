//! Command-line front end over the `aggfractal` library.
//!
//! Every artifact the tool writes starts with a `# key = value` preamble
//! recording the tool version, the exact configuration (as canonical JSON)
//! with its SHA-256 digest, and the digest of the input file. Re-running a
//! subcommand with the recorded configuration reproduces the output byte for
//! byte: nothing time- or host-dependent is ever written.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use aggfractal::dma::{f2_curve, DmaConfig};
use aggfractal::io::{self, Preamble};
use aggfractal::mfdma::{fq_curve, multifractal, spectrum_summary, QGrid};
use aggfractal::orderflow::build_series;
use aggfractal::regression::{stepwise_select, DesignMatrix};
use aggfractal::report::{emit_json, emit_table, summary_row};
use aggfractal::scalingfit::{fit_crossover, CrossoverFit};
use aggfractal::synth::{self, GeneratorKind, GeneratorSpec};
use aggfractal::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "aggfractal",
    version,
    about = "Order-aggressiveness series and (multifractal) detrending moving average analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a benchmark series with a pinned, replayable generator.
    Gen(GenArgs),
    /// Randomly permute a series, destroying temporal correlations.
    Shuffle(ShuffleArgs),
    /// Replay an order-event file into an aggressiveness series.
    Classify(ClassifyArgs),
    /// Compute the q = 2 fluctuation curve F(s) of a series.
    Dma(DmaArgs),
    /// Multifractal analysis: h(q), tau(q), and the singularity spectrum.
    Mfdma(MfdmaArgs),
    /// Fit the two-regime crossover model to a fluctuation curve.
    Crossover(CrossoverArgs),
    /// Stepwise OLS variable selection on a design-matrix CSV.
    Regress(RegressArgs),
    /// classify -> dma -> crossover (optionally mfdma) over event files,
    /// emitting one summary row per input series.
    Pipeline(PipelineArgs),
}

/// Scale-grid and moving-average options shared by the analysis commands.
#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Moving-average position: 0 backward, 0.5 centred, 1 forward.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Smallest window scale.
    #[arg(long, default_value_t = 10)]
    s_min: usize,
    /// Largest window scale; defaults to N/10 for the input length.
    #[arg(long)]
    s_max: Option<usize>,
    /// Number of log-spaced scales.
    #[arg(long, default_value_t = 40)]
    n_scales: usize,
    /// Round scales up to odd window lengths (exactly symmetric centred
    /// windows; preferable for measure-like series).
    #[arg(long)]
    odd: bool,
}

/// The grid with `s_max` resolved against a concrete series length; this is
/// what goes into the preamble, so a replay needs no knowledge of defaults.
#[derive(Serialize)]
struct GridConfig {
    theta: f64,
    s_min: usize,
    s_max: usize,
    n_scales: usize,
    odd: bool,
}

impl GridArgs {
    fn resolve(&self, n: usize) -> GridConfig {
        GridConfig {
            theta: self.theta,
            s_min: self.s_min,
            s_max: self.s_max.unwrap_or(n / 10),
            n_scales: self.n_scales,
            odd: self.odd,
        }
    }
}

impl GridConfig {
    fn dma_config(&self, n: usize) -> Result<DmaConfig> {
        if self.odd {
            DmaConfig::with_odd_grid(n, self.theta, self.s_min, self.s_max, self.n_scales)
        } else {
            DmaConfig::with_grid(n, self.theta, self.s_min, self.s_max, self.n_scales)
        }
    }
}

/// q-grid options for multifractal commands.
#[derive(Args, Debug, Clone, Serialize)]
struct QArgs {
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    q_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    q_max: f64,
    #[arg(long, default_value_t = 0.5)]
    q_step: f64,
}

/// Optional scale range for the per-q log-log fits. Left open, backward and
/// forward runs fit the whole grid and centred runs fit the post-crossover
/// regime found on the q = 2 curve.
#[derive(Args, Debug, Clone, Serialize)]
struct FitArgs {
    #[arg(long)]
    fit_lo: Option<f64>,
    #[arg(long)]
    fit_hi: Option<f64>,
}

impl FitArgs {
    fn range(&self) -> Result<Option<(f64, f64)>> {
        match (self.fit_lo, self.fit_hi) {
            (None, None) => Ok(None),
            (Some(lo), Some(hi)) if lo < hi => Ok(Some((lo, hi))),
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "--fit-lo must be strictly below --fit-hi".into(),
            )),
            _ => Err(Error::InvalidConfig(
                "--fit-lo and --fit-hi must be given together".into(),
            )),
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Destination series file.
    #[arg(short, long)]
    output: PathBuf,
    /// RNG seed; AGGFRACTAL_SEED supplies the default.
    #[arg(long, env = "AGGFRACTAL_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Fractional Gaussian noise with exponent H.
    Fgn {
        #[arg(long)]
        hurst: f64,
        #[arg(short, long)]
        n: usize,
    },
    /// Binomial multiplicative cascade of length 2^levels.
    Cascade {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        levels: u32,
        /// Permute the (p, 1-p) split per interval using the seed.
        #[arg(long)]
        randomized: bool,
    },
    /// Independent standard Gaussian samples.
    White {
        #[arg(short, long)]
        n: usize,
    },
    /// White noise plus amplitude-scaled fGn: a constructed crossover.
    Composite {
        #[arg(long)]
        hurst: f64,
        #[arg(long)]
        amplitude: f64,
        #[arg(short, long)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct ShuffleArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// RNG seed; AGGFRACTAL_SEED supplies the default.
    #[arg(long, env = "AGGFRACTAL_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Order-event CSV (seq,side,price_ticks,quantity,kind,order_id,phase).
    #[arg(short, long)]
    input: PathBuf,
    /// Destination aggressiveness-series file.
    #[arg(short, long)]
    output: PathBuf,
    /// Stock code for downstream tables; defaults to the stock_id preamble
    /// key of the input, then to the input file stem.
    #[arg(long)]
    code: Option<String>,
}

#[derive(Args, Debug)]
struct DmaArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Destination curve file (s,F rows).
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct MfdmaArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Destination: q,h,tau,alpha,f,r2 table, or an s,F curve when the q
    /// grid collapses to a single value (--q-min == --q-max).
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    q: QArgs,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args, Debug)]
struct CrossoverArgs {
    /// Fluctuation-curve file produced by dma or mfdma.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Row label; defaults to the input's code/stock_id key, then file stem.
    #[arg(long)]
    code: Option<String>,
    /// csv: three-decimal summary table; json: full-precision fit record.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct RegressArgs {
    /// Design-matrix CSV: header row, one column named `response`, every
    /// other column a predictor.
    #[arg(short, long)]
    input: PathBuf,
    /// Destination JSON record.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    p_enter: f64,
    #[arg(long, default_value_t = 0.10)]
    p_remove: f64,
    /// Center and scale predictors and response before selection.
    #[arg(long)]
    standardize: bool,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Order-event files, one per stock.
    #[arg(required = true)]
    events: Vec<PathBuf>,
    /// Directory receiving per-stock artifacts plus summary.csv/summary.json.
    #[arg(long)]
    output_dir: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Also run the multifractal stage, writing <code>.mf.csv per stock.
    #[arg(long)]
    mf: bool,
    #[command(flatten)]
    q: QArgs,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Shuffle(a) => cmd_shuffle(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Dma(a) => cmd_dma(a),
        Command::Mfdma(a) => cmd_mfdma(a),
        Command::Crossover(a) => cmd_crossover(a),
        Command::Regress(a) => cmd_regress(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// tool / command / config / config_digest header common to every artifact.
fn base_preamble(command: &str, config: &impl Serialize) -> Preamble {
    let json = serde_json::to_string(config).expect("config serializes");
    let mut p = Preamble::new();
    p.push("tool", format!("aggfractal {}", env!("CARGO_PKG_VERSION")));
    p.push("command", command);
    p.push("config", &json);
    p.push("config_digest", io::sha256_hex(json.as_bytes()));
    p
}

fn with_input_digest(mut p: Preamble, input: &Path) -> Result<Preamble> {
    p.push("input_digest", io::file_digest(input)?);
    Ok(p)
}

/// JSON artifacts carry the same metadata as a `meta` object instead of a
/// `#` preamble.
fn json_with_meta(preamble: &Preamble, payload_key: &str, payload: serde_json::Value) -> String {
    let mut meta = serde_json::Map::new();
    for (k, v) in &preamble.entries {
        meta.insert(k.clone(), serde_json::Value::String(v.clone()));
    }
    let mut root = serde_json::Map::new();
    root.insert("meta".into(), serde_json::Value::Object(meta));
    root.insert(payload_key.into(), payload);
    let mut out =
        serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("report serializes");
    out.push('\n');
    out
}

/// Row label for a series or curve file: explicit flag, then the file's own
/// metadata, then its stem.
fn resolve_code(flag: &Option<String>, preamble: &Preamble, path: &Path) -> String {
    flag.clone()
        .or_else(|| preamble.get("code").map(str::to_string))
        .or_else(|| preamble.get("stock_id").map(str::to_string))
        .unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "series".into())
        })
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let kind = match args.kind {
        GenKind::Fgn { hurst, n } => GeneratorKind::Fgn { hurst, n },
        GenKind::Cascade {
            p,
            levels,
            randomized,
        } => GeneratorKind::Cascade {
            p,
            levels,
            randomized,
        },
        GenKind::White { n } => GeneratorKind::White { n },
        GenKind::Composite {
            hurst,
            amplitude,
            n,
        } => GeneratorKind::Composite {
            hurst,
            amplitude,
            n,
        },
    };
    let spec = GeneratorSpec {
        kind,
        seed: args.seed,
    };
    let values = spec.generate()?;
    let mut preamble = base_preamble("gen", &spec);
    preamble.push("n", values.len());
    io::write_series(&args.output, &values, &preamble)
}

fn cmd_shuffle(args: ShuffleArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        seed: u64,
    }
    let (values, _) = io::read_series(&args.input)?;
    let shuffled = synth::shuffle(&values, args.seed);
    let preamble = with_input_digest(
        base_preamble("shuffle", &Config { seed: args.seed }),
        &args.input,
    )?;
    io::write_series(&args.output, &shuffled, &preamble)
}

fn cmd_classify(args: ClassifyArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        code: String,
    }
    let file = io::read_events(&args.input)?;
    let code = resolve_code(&args.code, &file.preamble, &args.input);
    let (series, stats) = build_series(&file.events, &code)?;

    let mut preamble = with_input_digest(
        base_preamble("classify", &Config { code: code.clone() }),
        &args.input,
    )?;
    preamble.push("code", &code);
    preamble.push("submissions", stats.submissions);
    preamble.push("cancels", stats.cancels);
    preamble.push("void_fallbacks", stats.void_fallbacks);
    preamble.push("executed_shares", stats.executed_shares);
    preamble.push("dropped_non_continuous", file.dropped_non_continuous);
    io::write_series(&args.output, &series.to_f64(), &preamble)
}

fn cmd_dma(args: DmaArgs) -> Result<()> {
    let (values, meta) = io::read_series(&args.input)?;
    let grid = args.grid.resolve(values.len());
    let cfg = grid.dma_config(values.len())?;
    let curve = f2_curve(&values, &cfg)?;

    let mut preamble = with_input_digest(base_preamble("dma", &grid), &args.input)?;
    preamble.push("n", values.len());
    // Carry the series label forward so crossover can title its row.
    if let Some(code) = meta.get("code") {
        preamble.push("code", code);
    }
    io::write_curve(&args.output, &curve, &preamble)
}

/// Full configuration of a multifractal run, resolved for one series.
#[derive(Serialize)]
struct MfConfig {
    grid: GridConfig,
    q: QArgs,
    fit: FitArgs,
}

fn cmd_mfdma(args: MfdmaArgs) -> Result<()> {
    args.fit.range()?;
    let (values, meta) = io::read_series(&args.input)?;
    let grid = args.grid.resolve(values.len());
    let cfg = grid.dma_config(values.len())?;

    // A single-point q grid degenerates to one fluctuation curve; F_q(s)
    // shares its implementation with dma, so at q = 2 the rows match that
    // command's output exactly.
    if args.q.q_min == args.q.q_max {
        let config = MfConfig {
            grid,
            q: args.q.clone(),
            fit: args.fit.clone(),
        };
        let mut preamble = with_input_digest(base_preamble("mfdma", &config), &args.input)?;
        if let Some(code) = meta.get("code") {
            preamble.push("code", code);
        }
        let curve = fq_curve(&values, &cfg, args.q.q_min)?;
        return io::write_curve(&args.output, &curve, &preamble);
    }

    write_mf_artifact(
        &args.output,
        &args.input,
        meta.get("code"),
        &values,
        &cfg,
        grid,
        &args.q,
        &args.fit,
    )
}

/// Runs the multifractal stage and writes its table; shared between the
/// mfdma command and the pipeline so both produce identical artifacts.
#[allow(clippy::too_many_arguments)]
fn write_mf_artifact(
    out: &Path,
    input: &Path,
    code: Option<&str>,
    values: &[f64],
    cfg: &DmaConfig,
    grid: GridConfig,
    q: &QArgs,
    fit: &FitArgs,
) -> Result<()> {
    let qgrid = QGrid::uniform(q.q_min, q.q_max, q.q_step)?;
    let res = multifractal(values, cfg, &qgrid, fit.range()?)?;
    let summary = spectrum_summary(&res);
    let config = MfConfig {
        grid,
        q: q.clone(),
        fit: fit.clone(),
    };
    let mut preamble = with_input_digest(base_preamble("mfdma", &config), input)?;
    if let Some(code) = code {
        preamble.push("code", code);
    }
    preamble.push("theta", res.theta);
    preamble.push("fit_lo", res.fit_range.0);
    preamble.push("fit_hi", res.fit_range.1);
    preamble.push("delta_alpha", summary.delta_alpha);
    preamble.push("asymmetry", summary.asymmetry);
    preamble.push("unimodal", summary.unimodal);
    io::write_mf_table(out, &res, &preamble)
}

fn cmd_crossover(args: CrossoverArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        code: String,
        format: &'static str,
    }
    let (curve, curve_meta) = io::read_curve(&args.input)?;
    let code = resolve_code(&args.code, &curve_meta, &args.input);
    let fit = fit_crossover(&curve)?;
    let config = Config {
        code: code.clone(),
        format: match args.format {
            Format::Csv => "csv",
            Format::Json => "json",
        },
    };
    let preamble = with_input_digest(base_preamble("crossover", &config), &args.input)?;

    let rendered = emit_table(&[summary_row(&code, &fit)]);
    print!("{rendered}");
    let contents = match args.format {
        Format::Csv => format!("{}{rendered}", preamble_text(&preamble)),
        Format::Json => {
            let rows = emit_json(&[(code, fit)]);
            let payload: serde_json::Value =
                serde_json::from_str(&rows).expect("summary JSON parses back");
            json_with_meta(&preamble, "fits", payload)
        }
    };
    io::atomic_write(&args.output, &contents)
}

fn preamble_text(p: &Preamble) -> String {
    let mut out = String::new();
    for (k, v) in &p.entries {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

fn cmd_regress(args: RegressArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        p_enter: f64,
        p_remove: f64,
        standardize: bool,
    }
    let design = read_design(&args.input)?;
    let design = if args.standardize {
        design.standardized()
    } else {
        design
    };
    let result = stepwise_select(&design, args.p_enter, args.p_remove)?;
    let config = Config {
        p_enter: args.p_enter,
        p_remove: args.p_remove,
        standardize: args.standardize,
    };
    let preamble = with_input_digest(base_preamble("regress", &config), &args.input)?;
    let payload = serde_json::to_value(&result).expect("result serializes");
    io::atomic_write(&args.output, &json_with_meta(&preamble, "fit", payload))
}

/// Reads a design-matrix CSV: `#` comment lines, then a header naming one
/// `response` column and any number of predictor columns.
fn read_design(path: &Path) -> Result<DesignMatrix> {
    let text = std::fs::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    };

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let Some(resp_col) = headers.iter().position(|h| h == "response") else {
        return Err(parse_err(1, "header lacks a `response` column".into()));
    };
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != resp_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut response = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let mut pred = 0;
        for (i, raw) in record.iter().enumerate() {
            let v: f64 = raw.parse().map_err(|e| {
                parse_err(line, format!("bad value {raw:?} in {}: {e}", headers[i]))
            })?;
            if i == resp_col {
                response.push(v);
            } else {
                columns[pred].push(v);
                pred += 1;
            }
        }
    }
    DesignMatrix::new(names, columns, response)
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config {
        theta: f64,
        s_min: usize,
        s_max: Option<usize>,
        n_scales: usize,
        odd: bool,
        mf: bool,
        q: QArgs,
        fit: FitArgs,
    }
    // Validate everything before spawning work.
    args.fit.range()?;
    if args.mf {
        QGrid::uniform(args.q.q_min, args.q.q_max, args.q.q_step)?;
    }
    std::fs::create_dir_all(&args.output_dir)?;
    let config = Config {
        theta: args.grid.theta,
        s_min: args.grid.s_min,
        s_max: args.grid.s_max,
        n_scales: args.grid.n_scales,
        odd: args.grid.odd,
        mf: args.mf,
        q: args.q.clone(),
        fit: args.fit.clone(),
    };

    // One worker per input series; each stage within a series is
    // sequential, and every artifact write is atomic, so workers never
    // interfere. Results are collected in input order.
    let results: Vec<Result<(String, CrossoverFit, String)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .events
            .iter()
            .map(|path| scope.spawn(|| pipeline_one(path, &args)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("pipeline worker does not panic"))
            .collect()
    });

    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut summary_preamble = base_preamble("pipeline", &config);
    for result in results {
        let (code, fit, digest) = result?;
        rows.push(summary_row(&code, &fit));
        summary_preamble.push("input", format!("{code} {digest}"));
        fits.push((code, fit));
    }

    let table = emit_table(&rows);
    print!("{table}");
    io::atomic_write(
        &args.output_dir.join("summary.csv"),
        &format!("{}{table}", preamble_text(&summary_preamble)),
    )?;
    let payload: serde_json::Value =
        serde_json::from_str(&emit_json(&fits)).expect("summary JSON parses back");
    io::atomic_write(
        &args.output_dir.join("summary.json"),
        &json_with_meta(&summary_preamble, "fits", payload),
    )
}

/// classify -> dma (-> mfdma) -> crossover for one event file, writing the
/// per-stock artifacts and returning the summary ingredients. Each stage
/// reproduces the standalone subcommand byte for byte.
fn pipeline_one(path: &Path, args: &PipelineArgs) -> Result<(String, CrossoverFit, String)> {
    let file = io::read_events(path)?;
    let code = resolve_code(&None, &file.preamble, path);
    let (series, stats) = build_series(&file.events, &code)?;
    let values = series.to_f64();

    let mut series_meta = with_input_digest(
        base_preamble("classify", &serde_json::json!({ "code": code })),
        path,
    )?;
    series_meta.push("code", &code);
    series_meta.push("submissions", stats.submissions);
    series_meta.push("cancels", stats.cancels);
    series_meta.push("void_fallbacks", stats.void_fallbacks);
    series_meta.push("executed_shares", stats.executed_shares);
    series_meta.push("dropped_non_continuous", file.dropped_non_continuous);
    let series_path = args.output_dir.join(format!("{code}.series.csv"));
    io::write_series(&series_path, &values, &series_meta)?;

    let grid = args.grid.resolve(values.len());
    let cfg = grid.dma_config(values.len())?;
    let curve = f2_curve(&values, &cfg)?;
    let mut curve_meta = with_input_digest(base_preamble("dma", &grid), &series_path)?;
    curve_meta.push("n", values.len());
    curve_meta.push("code", &code);
    io::write_curve(
        &args.output_dir.join(format!("{code}.curve.csv")),
        &curve,
        &curve_meta,
    )?;

    if args.mf {
        write_mf_artifact(
            &args.output_dir.join(format!("{code}.mf.csv")),
            &series_path,
            Some(&code),
            &values,
            &cfg,
            args.grid.resolve(values.len()),
            &args.q,
            &args.fit,
        )?;
    }

    let fit = fit_crossover(&curve)?;
    let digest = io::file_digest(path)?;
    Ok((code, fit, digest))
}
