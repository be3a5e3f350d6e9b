use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use simstudy::config::{StreamPolicy, StudyConfig};
use simstudy::engine::{self, Manifest, RunOptions};
use simstudy::error::{Error, Result};
use simstudy::perf::{self, Measure, NsimKind, Summary, SummaryOptions, TrueValues};
use simstudy::records::{self, EstimatesRecord};
use simstudy::report::{self, FigureInput, FigureKind, FigureSpec};
use simstudy::store::{self, StoredRun};
use simstudy::{fmt_float, presets};

const OUT_ENV: &str = "SIMSTUDY_OUT_DIR";
const FALLBACK_OUT: &str = "simstudy-out";

#[derive(Parser)]
#[command(name = "simstudy", version, about = "Run, analyse and report Monte Carlo simulation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study described by a config file.
    Run(RunArgs),
    /// Compute performance measures from an estimates CSV.
    Analyze(AnalyzeArgs),
    /// Render figures from an estimates CSV.
    Plot(PlotArgs),
    /// Repetitions needed for a target Monte Carlo SE.
    Nsim(NsimArgs),
    /// Regenerate one repetition from its stored start state.
    Rerun(RerunArgs),
    /// Add repetitions to a finished run.
    Continue(ContinueArgs),
    /// Run a built-in study.
    Example(ExampleArgs),
}

#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "n-sim")]
    n_sim: Option<u64>,
    /// Administrative censoring time for survival mechanisms.
    #[arg(long = "censor-time")]
    censor_time: Option<f64>,
    /// `per_dgm` or `per_chunk:K`.
    #[arg(long)]
    streams: Option<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to the config, then $SIMSTUDY_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the performance analysis.
    #[arg(long)]
    no_analyze: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Clone, Default)]
struct AnalysisFlags {
    /// Study config to take measures, alpha and comparator from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// True value for every DGM and estimand.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    comparator: Option<String>,
    /// Comma-separated measure ids.
    #[arg(long, value_delimiter = ',')]
    measures: Vec<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Estimates CSV, or a run directory containing one.
    estimates: PathBuf,
    /// Where to write the analysis files; defaults to the estimates' directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    flags: AnalysisFlags,
}

#[derive(Args)]
struct PlotArgs {
    /// Estimates CSV, or a run directory containing one.
    estimates: PathBuf,
    /// Figure kinds: zip, lollipop, nested-loop, strip, scatter-matrix, diff-vs-mean.
    #[arg(long, value_delimiter = ',', required = true)]
    kind: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zip plot: keep the top fraction of ranks.
    #[arg(long)]
    zoom: Option<f64>,
    /// Nested loop: factor nesting, slowest first.
    #[arg(long = "factor-order", value_delimiter = ',')]
    factor_order: Vec<String>,
    #[arg(long)]
    dgm: Option<String>,
    #[arg(long)]
    estimand: Option<String>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    height: Option<f64>,
    #[command(flatten)]
    flags: AnalysisFlags,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliNsimKind {
    Coverage,
    Bias,
}

#[derive(Args)]
struct NsimArgs {
    #[arg(long, value_enum)]
    kind: CliNsimKind,
    /// Expected coverage or power in percent.
    #[arg(long)]
    expected: Option<f64>,
    /// Variance of the estimator, for the bias kind.
    #[arg(long)]
    var: Option<f64>,
    /// Target Monte Carlo SE (percentage points for coverage).
    #[arg(long)]
    mcse: f64,
}

#[derive(Args)]
struct RerunArgs {
    /// Run directory.
    run: PathBuf,
    #[arg(long)]
    dgm: String,
    #[arg(long)]
    rep: u64,
    /// Use this config instead of the stored one, e.g. with an edited tolerance.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Defaults to `<run>/rerun`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ContinueArgs {
    /// Run directory.
    run: PathBuf,
    #[arg(long)]
    extra: u64,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleKind {
    Survival,
    ConditionalCoverage,
}

#[derive(Args)]
struct ExampleArgs {
    #[arg(value_enum)]
    which: ExampleKind,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(a) => run(a),
        Command::Analyze(a) => analyze(a),
        Command::Plot(a) => plot(a),
        Command::Nsim(a) => nsim(a),
        Command::Rerun(a) => rerun(a),
        Command::Continue(a) => continue_run(a),
        Command::Example(a) => example(a),
    }
}

fn apply_overrides(cfg: &mut StudyConfig, o: &Overrides) -> Result<()> {
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(n) = o.n_sim {
        cfg.n_sim = n;
    }
    if let Some(t) = o.censor_time {
        if !cfg.dgm.base.is_survival() {
            return Err(Error::Config("--censor-time needs a survival mechanism".into()));
        }
        cfg.dgm.base.set_factor("censor_time", t)?;
    }
    if let Some(s) = &o.streams {
        cfg.streams = s.parse::<StreamPolicy>()?;
    }
    cfg.validate()
}

fn out_dir(flag: Option<&Path>, from_config: Option<&str>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = from_config {
        return PathBuf::from(p);
    }
    match std::env::var_os(OUT_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from(FALLBACK_OUT),
    }
}

fn run_options(threads: Option<usize>) -> RunOptions {
    RunOptions {
        threads,
        ..RunOptions::default()
    }
}

fn execute(cfg: &StudyConfig, dir: &Path, threads: Option<usize>) -> Result<Option<Summary>> {
    eprintln!(
        "running `{}`: {} repetitions x {} dgm(s) x {} method(s)",
        cfg.name,
        cfg.n_sim,
        cfg.dgms()?.len(),
        cfg.methods.len()
    );
    let (out, summary) = store::run_to_dir(dir, cfg, &run_options(threads))?;
    report_failures(&out.estimates);
    eprintln!(
        "wrote {} estimate rows to {} in {:.1} s",
        out.estimates.len(),
        dir.display(),
        out.manifest.elapsed_seconds
    );
    if let Some(s) = &summary {
        warn_diagnostics(s);
    }
    Ok(summary)
}

fn report_failures(rows: &[EstimatesRecord]) {
    for m in perf::missingness_report(rows) {
        let failed: usize = m
            .counts
            .iter()
            .filter(|(c, _)| *c != simstudy::estimators::ErrorCode::None)
            .map(|(_, n)| n)
            .sum();
        if failed > 0 {
            eprintln!("warning: {failed} of {} fits failed for dgm `{}`, method `{}`", m.n_total, m.dgm_id, m.method_id);
        }
    }
}

fn warn_diagnostics(s: &Summary) {
    for d in &s.diagnostics {
        eprintln!("warning: {d}");
    }
}

fn run(a: RunArgs) -> Result<()> {
    let mut cfg = StudyConfig::load(&a.config)?;
    apply_overrides(&mut cfg, &a.overrides)?;
    if a.no_analyze {
        cfg.output.analyze = false;
    }
    let dir = out_dir(a.out.as_deref(), cfg.output.dir.as_deref());
    if let Some(s) = execute(&cfg, &dir, a.overrides.threads)? {
        print!("{}", report::render_table(&s.estimates, &table_layout(&cfg.measures)).text);
    }
    Ok(())
}

fn table_layout(measures: &[Measure]) -> report::TableLayout {
    report::TableLayout {
        measures: measures.to_vec(),
        methods: Vec::new(),
    }
}

struct Context {
    dir: PathBuf,
    estimates: Vec<EstimatesRecord>,
    truths: TrueValues,
    opts: SummaryOptions,
}

/// Estimates plus the true values and options needed to analyse them. A run
/// directory supplies these through its config and manifest; flags override.
fn load_context(path: &Path, flags: &AnalysisFlags) -> Result<Context> {
    let file = if path.is_dir() { path.join(store::ESTIMATES_FILE) } else { path.to_path_buf() };
    let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = std::fs::read_to_string(&file).map_err(|e| Error::Io {
        path: file.clone(),
        source: e,
    })?;
    let estimates = records::estimates_from_csv(&text, &file.display().to_string())?;

    let config = match &flags.config {
        Some(p) => Some(StudyConfig::load(p)?),
        None if dir.join(store::CONFIG_FILE).is_file() => Some(StudyConfig::load(&dir.join(store::CONFIG_FILE))?),
        None => None,
    };
    let manifest_path = dir.join(store::MANIFEST_FILE);
    let manifest = if manifest_path.is_file() {
        let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::Io {
            path: manifest_path.clone(),
            source: e,
        })?;
        Some(Manifest::from_json(&text, &manifest_path.display().to_string())?)
    } else {
        None
    };

    let mut opts = match &config {
        Some(cfg) => engine::summary_options(cfg),
        None => SummaryOptions {
            alpha: 0.05,
            measures: Vec::new(),
            comparator: None,
        },
    };
    if let Some(alpha) = flags.alpha {
        opts.alpha = alpha;
    }
    if flags.comparator.is_some() {
        opts.comparator = flags.comparator.clone();
    }
    if !flags.measures.is_empty() {
        opts.measures = flags
            .measures
            .iter()
            .map(|m| m.parse::<Measure>())
            .collect::<Result<Vec<_>>>()?;
    }
    if opts.measures.is_empty() {
        opts.measures = default_measures(&estimates, opts.comparator.is_some());
    }

    let truths = match (flags.theta, &manifest) {
        (Some(theta), _) => TrueValues::constant(theta),
        (None, Some(m)) => m.true_values(),
        (None, None) => {
            eprintln!("warning: no manifest and no --theta; measures that need the true value are skipped");
            TrueValues::default()
        }
    };
    Ok(Context {
        dir,
        estimates,
        truths,
        opts,
    })
}

/// Measures a foreign file can support.
fn default_measures(rows: &[EstimatesRecord], comparator: bool) -> Vec<Measure> {
    let mut m = vec![Measure::ConvergencePct, Measure::Bias, Measure::Mean, Measure::Empse, Measure::Mse];
    if comparator {
        m.push(Measure::RelPrecision);
    }
    if rows.iter().any(|r| r.se_hat.is_some()) {
        m.extend([Measure::AvgModse, Measure::RelErrModse]);
    }
    if rows.iter().any(|r| r.ci_low.is_some()) {
        m.extend([Measure::Coverage, Measure::BeCoverage]);
    }
    if rows.iter().any(|r| r.p_value.is_some()) {
        m.push(Measure::RejectionPct);
    }
    m
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let ctx = load_context(&a.estimates, &a.flags)?;
    let dir = a.out.unwrap_or_else(|| ctx.dir.clone());
    let summary = store::write_analysis(&dir, &ctx.estimates, &ctx.truths, &ctx.opts)?;
    warn_diagnostics(&summary);
    eprintln!("wrote {} performance rows to {}", summary.estimates.len(), dir.display());
    print!("{}", report::render_table(&summary.estimates, &table_layout(&ctx.opts.measures)).text);
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let ctx = load_context(&a.estimates, &a.flags)?;
    let dir = a.out.clone().unwrap_or_else(|| ctx.dir.clone());
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let summary = perf::summarize(&ctx.estimates, &ctx.truths, &ctx.opts)?;
    for k in &a.kind {
        let kind: FigureKind = k.parse()?;
        let mut spec = FigureSpec::new(kind);
        spec.alpha = ctx.opts.alpha;
        spec.zoom = a.zoom;
        spec.measures = ctx.opts.measures.clone();
        spec.factor_order = a.factor_order.clone();
        spec.comparator = ctx.opts.comparator.clone();
        spec.dgm_id = a.dgm.clone();
        spec.estimand_id = a.estimand.clone();
        if let Some(w) = a.width {
            spec.panel_width = w;
        }
        if let Some(h) = a.height {
            spec.panel_height = h;
        }
        let fig = report::render_figure(
            &spec,
            FigureInput {
                estimates: &ctx.estimates,
                performance: &summary.estimates,
                truths: &ctx.truths,
            },
        )?;
        let svg = dir.join(format!("{}.svg", kind.as_str()));
        let csv = dir.join(format!("{}.csv", kind.as_str()));
        write(&svg, &fig.svg)?;
        write(&csv, &fig.sidecar)?;
        eprintln!("wrote {}", svg.display());
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn nsim(a: NsimArgs) -> Result<()> {
    let n = match a.kind {
        CliNsimKind::Coverage => {
            let expected = a
                .expected
                .ok_or_else(|| Error::InvalidParameter("coverage kind needs --expected".into()))?;
            perf::required_nsim(NsimKind::Coverage, expected, a.mcse, None)?
        }
        CliNsimKind::Bias => perf::required_nsim(NsimKind::Bias, 0.0, a.mcse, a.var)?,
    };
    println!("{n}");
    Ok(())
}

fn rerun(a: RerunArgs) -> Result<()> {
    let stored = StoredRun::load(&a.run)?;
    let cfg = match &a.config {
        Some(p) => {
            let mut c = StudyConfig::load(p)?;
            c.n_sim = stored.config.n_sim;
            c
        }
        None => stored.config.clone(),
    };
    let (data, rows) = engine::rerun_repetition(&cfg, &stored.states, &a.dgm, a.rep, &RunOptions::default())?;
    let digest = engine::dataset_digest(&data);
    let dir = a.out.unwrap_or_else(|| a.run.join("rerun"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    write(&dir.join("dataset.csv"), &data.to_csv())?;
    write(&dir.join(store::ESTIMATES_FILE), &records::estimates_to_csv(&rows))?;

    match store::read_dataset_digests(&a.run) {
        Ok(digests) => match digests.iter().find(|(d, r, _)| *d == a.dgm && *r == a.rep) {
            Some((_, _, stored_digest)) if *stored_digest == digest => {
                eprintln!("dataset sha256 {digest} matches the stored digest")
            }
            Some((_, _, stored_digest)) => {
                eprintln!("warning: dataset sha256 {digest} differs from stored {stored_digest}")
            }
            None => eprintln!("dataset sha256 {digest} (no stored digest)"),
        },
        Err(_) => eprintln!("dataset sha256 {digest} (no datasets index)"),
    }
    let original: Vec<&EstimatesRecord> = stored
        .estimates
        .iter()
        .filter(|r| r.dgm_id == a.dgm && r.repetition == a.rep)
        .collect();
    for row in &rows {
        let same = original
            .iter()
            .find(|o| o.method_id == row.method_id && o.estimand_id == row.estimand_id)
            .is_some_and(|o| *o == row);
        let theta = row.theta_hat.map(fmt_float).unwrap_or_default();
        println!(
            "{}\t{}\t{}\t{}\t{}",
            row.method_id,
            row.estimand_id,
            theta,
            row.error_code,
            if same { "unchanged" } else { "changed" }
        );
    }
    Ok(())
}

fn continue_run(a: ContinueArgs) -> Result<()> {
    let stored = StoredRun::load(&a.run)?;
    let before = stored.config.n_sim;
    let summary = stored.continue_in_place(a.extra, &run_options(a.threads))?;
    eprintln!(
        "extended {} from {before} to {} repetitions",
        a.run.display(),
        before + a.extra
    );
    if let Some(s) = summary {
        warn_diagnostics(&s);
    }
    Ok(())
}

fn example(a: ExampleArgs) -> Result<()> {
    let mut cfg = match a.which {
        ExampleKind::Survival => presets::survival(),
        ExampleKind::ConditionalCoverage => presets::conditional_coverage(),
    };
    apply_overrides(&mut cfg, &a.overrides)?;
    let dir = out_dir(a.out.as_deref(), None);
    let summary = execute(&cfg, &dir, a.overrides.threads)?;
    match a.which {
        ExampleKind::Survival => {
            if let Some(s) = summary {
                print!("{}", report::render_table(&s.estimates, &table_layout(&cfg.measures)).text);
            }
        }
        ExampleKind::ConditionalCoverage => {
            let stored = StoredRun::load(&dir)?;
            let theta = stored.manifest.true_values().get("base", "mu").unwrap_or(0.0);
            let cc = perf::conditional_coverage(&stored.estimates, theta, 3)?;
            let mut csv = String::from("group,n,coverage_pct,mcse,se_min,se_max\n");
            let mut text = format!("{:<10}{:>8}  {}\n", "ModSE", "n", "Coverage (MCSE)");
            let labels = ["lowest", "middle", "highest"];
            for (label, b) in std::iter::once(("all", &cc.overall)).chain(labels.iter().copied().zip(&cc.bins)) {
                csv.push_str(&format!(
                    "{label},{},{},{},{},{}\n",
                    b.n,
                    fmt_float(b.coverage_pct),
                    fmt_float(b.mcse),
                    fmt_float(b.se_min),
                    fmt_float(b.se_max)
                ));
                text.push_str(&format!("{label:<10}{:>8}  {:.1}% ({:.1})\n", b.n, b.coverage_pct, b.mcse));
            }
            write(&dir.join("conditional_coverage.csv"), &csv)?;
            print!("{text}");
        }
    }
    Ok(())
}
