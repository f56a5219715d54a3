//! The `ecomplex` command line. Each subcommand reads files, runs one stage
//! of the pipeline and writes its artifacts into the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::capability::{run_sweep, SweepConfig};
use crate::empirics::{
    baseline_indices, labor_diversity, new_exports, pooled_growth_regression, GrowthPeriod,
    NewExportOptions, RegressionOptions,
};
use crate::error::{Error, ErrorKind, Result};
use crate::io::{self, Cell, OutputFormat, RunMeta, Table};
use crate::matrix::{compute_rca, threshold_to_binary};
use crate::nulls::{null_comparison, NullLevel, NullModelSpec, DEFAULT_SWAPS_PER_EDGE};
use crate::reflections::{
    correlate_external, normalize, random_walk_check, rank_shift, reflect, DEFAULT_DEPTH,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_DATA: i32 = 3;
pub const EXIT_COMPUTATION: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::NoData => EXIT_NO_DATA,
        ErrorKind::Computation => EXIT_COMPUTATION,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ecomplex",
    version,
    about = "Economic complexity from country-product trade networks"
)]
#[command(after_help = "Exit codes: 0 success, 2 input error, 3 no data, 4 computation error.")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Output directory (created if missing).
    #[arg(long, global = true, env = "ECOMPLEX_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Print progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    #[serde(skip)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build binary country-product matrices from a trade CSV.
    Ingest(IngestArgs),
    /// Run the method of reflections on a matrix artifact.
    Reflect(ReflectArgs),
    /// Simulate the capability model over a parameter sweep.
    Simulate(SimulateArgs),
    /// Compare corr(k_c0, k_c1) with a null-model distribution.
    Null(NullArgs),
    /// Growth regression on reflection levels and initial income.
    Regress(RegressArgs),
    /// New exports between two years and their network position.
    Newexports(NewExportsArgs),
    /// Herfindahl and entropy concentration of export baskets.
    Baseline(BaselineArgs),
    /// Mean attribute (labour input) count of export baskets.
    Labor(LaborArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// CSV with header `year,country,product,value`.
    pub trade: PathBuf,
    /// RCA threshold for an edge (inclusive).
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    /// Only build this year.
    #[arg(long)]
    pub year: Option<i32>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReflectArgs {
    /// Matrix sidecar JSON written by `ingest`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Number of reflection steps after the degrees.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
    /// GDP per capita CSV (`country,value`) for the correlation table.
    #[arg(long)]
    pub gdp: Option<PathBuf>,
    /// Population CSV (`country,value`) for the correlation table.
    #[arg(long)]
    pub population: Option<PathBuf>,
    /// Correlate against the log of the external series.
    #[arg(long)]
    pub log_gdp: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Sweep config JSON; the built-in default grid when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the config's replicate count.
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct NullArgs {
    /// Matrix sidecar JSON written by `ingest`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// density_only, preserve_country_degrees, preserve_product_degrees or preserve_both.
    #[arg(long, default_value = "preserve_both")]
    pub level: String,
    /// Number of null matrices.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Seed of the null sampler.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Attempted double-edge swaps per edge (preserve_both only).
    #[arg(long, default_value_t = DEFAULT_SWAPS_PER_EDGE)]
    pub swaps_per_edge: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RegressArgs {
    /// Matrix sidecar at the start of each period (repeat for pooled panels).
    #[arg(long, required = true)]
    pub matrix: Vec<PathBuf>,
    /// GDP per capita at the start of each period.
    #[arg(long, required = true)]
    pub gdp_start: Vec<PathBuf>,
    /// GDP per capita at the end of each period.
    #[arg(long, required = true)]
    pub gdp_end: Vec<PathBuf>,
    /// Reflection level N; regressors are k_{c,N} and k_{c,N+1}.
    #[arg(long, default_value_t = 0)]
    pub level: usize,
    /// Use ln GDP(t) as the income regressor.
    #[arg(long)]
    pub log_gdp: bool,
    /// Country dummies (pooled panels only).
    #[arg(long)]
    pub country_dummies: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct NewExportsArgs {
    /// Trade CSV for the start year.
    #[arg(long)]
    pub trade_t0: PathBuf,
    /// Trade CSV for the end year (may be the same file).
    #[arg(long)]
    pub trade_t1: PathBuf,
    /// Start year; required when the file holds several years.
    #[arg(long)]
    pub year_t0: Option<i32>,
    /// End year; required when the file holds several years.
    #[arg(long)]
    pub year_t1: Option<i32>,
    /// RCA below this at t0 ...
    #[arg(long, default_value_t = 0.1)]
    pub low: f64,
    /// ... and at least this at t1.
    #[arg(long, default_value_t = 1.0)]
    pub high: f64,
    /// RCA threshold of the t0 matrix.
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    /// Leave the focal country out of k_p1.
    #[arg(long)]
    pub leave_one_out: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    /// CSV with header `year,country,product,value`.
    pub trade: PathBuf,
    /// Year to use; required when the file holds several years.
    #[arg(long)]
    pub year: Option<i32>,
}

#[derive(Debug, Args, Serialize)]
pub struct LaborArgs {
    /// Matrix sidecar JSON written by `ingest`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// CSV with header `product,attribute`.
    #[arg(long)]
    pub attributes: PathBuf,
    /// Reflection levels to correlate against.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
}

struct Ctx<'a> {
    global: &'a GlobalArgs,
}

impl Ctx<'_> {
    fn info(&self, msg: impl AsRef<str>) {
        if self.global.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn warn(&self, msg: impl AsRef<str>) {
        eprintln!("warning: {}", msg.as_ref());
    }

    fn out(&self) -> &Path {
        &self.global.out
    }

    fn table(&self, t: &Table, stem: &str, meta: &RunMeta) -> Result<()> {
        let path = t.write(self.out(), stem, self.global.format, meta)?;
        self.info(format!("wrote {}", path.display()));
        Ok(())
    }

    fn summary<T: Serialize>(&self, name: &str, meta: &RunMeta, body: &T) -> Result<()> {
        let path = self.out().join(name);
        io::write_json_summary(&path, meta, body)?;
        self.info(format!("wrote {}", path.display()));
        Ok(())
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        ))
    }
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("cli args serialize")
}

fn meta_with_inputs(
    command: &str,
    p: serde_json::Value,
    seed: Option<u64>,
    inputs: &[&Path],
) -> Result<RunMeta> {
    inputs
        .iter()
        .try_fold(RunMeta::new(command, p, seed), |m, path| m.with_input(path))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                Ok(())
            } else {
                Err(Error::InvalidArgument(e.kind().to_string()))
            }
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    // validate every input path before doing any work
    let inputs: Vec<&Path> = match &cli.command {
        Command::Ingest(a) => vec![&a.trade],
        Command::Reflect(a) => [Some(&a.matrix), a.gdp.as_ref(), a.population.as_ref()]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path)
            .collect(),
        Command::Simulate(a) => a.config.iter().map(PathBuf::as_path).collect(),
        Command::Null(a) => vec![&a.matrix],
        Command::Regress(a) => a
            .matrix
            .iter()
            .chain(&a.gdp_start)
            .chain(&a.gdp_end)
            .map(PathBuf::as_path)
            .collect(),
        Command::Newexports(a) => vec![&a.trade_t0, &a.trade_t1],
        Command::Baseline(a) => vec![&a.trade],
        Command::Labor(a) => vec![&a.matrix, &a.attributes],
    };
    for p in &inputs {
        require_file(p)?;
    }
    fs::create_dir_all(&cli.global.out).map_err(|e| Error::io(&cli.global.out, e))?;

    let ctx = Ctx {
        global: &cli.global,
    };
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(&ctx, a),
        Command::Reflect(a) => cmd_reflect(&ctx, a),
        Command::Simulate(a) => cmd_simulate(&ctx, a),
        Command::Null(a) => cmd_null(&ctx, a),
        Command::Regress(a) => cmd_regress(&ctx, a),
        Command::Newexports(a) => cmd_newexports(&ctx, a),
        Command::Baseline(a) => cmd_baseline(&ctx, a),
        Command::Labor(a) => cmd_labor(&ctx, a),
    }
}

fn cmd_ingest(ctx: &Ctx, a: &IngestArgs) -> Result<()> {
    if !(a.threshold.is_finite() && a.threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {}",
            a.threshold
        )));
    }
    let mut tables = io::read_trade_csv(&a.trade)?;
    if let Some(y) = a.year {
        let t = io::select_year(tables, Some(y))?;
        tables = BTreeMap::from([(y, t)]);
    }
    let meta = meta_with_inputs("ingest", params(a), None, &[&a.trade])?;
    for (year, table) in &tables {
        let rca = compute_rca(table)?;
        let m = threshold_to_binary(&rca, a.threshold)?;
        let iso_c = m.isolated_countries().len();
        let iso_p = m.isolated_products().len();
        if iso_c + iso_p > 0 {
            ctx.warn(format!(
                "{year}: {iso_c} countries and {iso_p} products have no edges (kept, flagged in sidecar)"
            ));
        }
        let path = io::write_matrix_artifact(
            ctx.out(),
            &format!("matrix_{year}"),
            &m,
            Some(*year),
            Some(a.threshold),
            &meta,
        )?;
        ctx.info(format!(
            "{year}: {} countries x {} products, {} edges -> {}",
            m.n_countries(),
            m.n_products(),
            m.n_edges(),
            path.display()
        ));
    }
    Ok(())
}

fn cmd_reflect(ctx: &Ctx, a: &ReflectArgs) -> Result<()> {
    let (m, _) = io::read_matrix_artifact(&a.matrix)?;
    let inputs: Vec<&Path> = [Some(&a.matrix), a.gdp.as_ref(), a.population.as_ref()]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path)
        .collect();
    let meta = meta_with_inputs("reflect", params(a), None, &inputs)?;
    let t = reflect(&m, a.depth)?;

    let mut traj = Table::new(&["side", "id", "level", "value"]);
    for (side, ids, levels) in [
        ("country", t.countries(), t.country_levels()),
        ("product", t.products(), t.product_levels()),
    ] {
        for (level, values) in levels.iter().enumerate() {
            for (id, v) in ids.iter().zip(values) {
                traj.push(vec![
                    side.into(),
                    id.as_str().into(),
                    level.into(),
                    (*v).into(),
                ]);
            }
        }
    }
    ctx.table(&traj, "trajectory", &meta)?;

    let mut norm = Table::new(&["country", "level", "z", "raw", "mean", "stdev"]);
    for level in 0..=t.depth() {
        match normalize(&t, level) {
            Ok(z) => {
                let raw = t.country_level(level)?;
                for ((c, v), r) in z.countries.iter().zip(&z.values).zip(raw) {
                    norm.push(vec![
                        c.as_str().into(),
                        level.into(),
                        (*v).into(),
                        (*r).into(),
                        z.mean_used.into(),
                        z.stdev_used.into(),
                    ]);
                }
            }
            Err(Error::Degenerate(msg)) => ctx.warn(format!("level {level} not normalised: {msg}")),
            Err(e) => return Err(e),
        }
    }
    ctx.table(&norm, "normalized", &meta)?;

    let mut ranks = Table::new(&[
        "level_a", "level_b", "country", "rank_a", "rank_b", "spearman",
    ]);
    for level_b in (2..=t.depth()).step_by(2) {
        match rank_shift(&t, 0, level_b) {
            Ok(rs) => {
                for r in &rs.rows {
                    ranks.push(vec![
                        0usize.into(),
                        level_b.into(),
                        r.country.as_str().into(),
                        r.rank_a.into(),
                        r.rank_b.into(),
                        rs.correlation.into(),
                    ]);
                }
            }
            Err(Error::Degenerate(msg)) => ctx.warn(format!("rank shift 0 -> {level_b}: {msg}")),
            Err(e) => return Err(e),
        }
    }
    ctx.table(&ranks, "rank_shift", &meta)?;

    let levels: Vec<usize> = (0..=t.depth()).collect();
    let mut corr = Table::new(&["series", "level", "pearson", "abs_pearson", "n"]);
    for (label, path) in [("gdp", &a.gdp), ("population", &a.population)] {
        let Some(path) = path else { continue };
        let series = io::read_series_csv(path, label)?;
        match correlate_external(&t, &series.values, &levels, a.log_gdp) {
            Ok(ec) => {
                for l in &ec.levels {
                    corr.push(vec![
                        label.into(),
                        l.level.into(),
                        l.pearson.into(),
                        l.pearson.map(f64::abs).into(),
                        ec.n().into(),
                    ]);
                }
            }
            Err(Error::InsufficientOverlap { found, .. }) => {
                ctx.warn(format!(
                    "{label}: only {found} countries overlap the matrix, correlation skipped"
                ));
            }
            Err(e) => return Err(e),
        }
    }
    if a.gdp.is_some() || a.population.is_some() {
        ctx.table(&corr, "correlations", &meta)?;
    }

    let rw = if t.depth() >= 1 {
        Some(random_walk_check(&m, &t, t.depth())?)
    } else {
        None
    };
    ctx.summary(
        "reflect_summary.json",
        &meta,
        &json!({
            "depth": t.depth(),
            "n_countries": t.countries().len(),
            "n_products": t.products().len(),
            "excluded_countries": t.excluded_countries(),
            "excluded_products": t.excluded_products(),
            "random_walk_max_discrepancy": rw,
        }),
    )
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<SweepConfig>(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        None => SweepConfig::default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(r) = a.replicates {
        config.replicates = r;
    }
    config.validate()?;
    let inputs: Vec<&Path> = a.config.iter().map(PathBuf::as_path).collect();
    let meta = meta_with_inputs(
        "simulate",
        json!({ "args": params(a), "config": config }),
        Some(config.seed),
        &inputs,
    )?;

    let mut summary = Table::new(&[
        "cell",
        "n_countries",
        "n_products",
        "n_capabilities",
        "r",
        "q",
        "seed",
        "replicates",
        "degenerate_replicates",
        "excluded_countries",
        "n_points",
        "pearson_kc0_kc1",
        "spearman_capabilities_kc0",
        "spearman_capabilities_kc1",
    ]);
    for (cell, report) in run_sweep(&config)? {
        let mut rows = Table::new(&["replicate", "country", "capability_count", "k_c0", "k_c1"]);
        for r in &report.rows {
            rows.push(vec![
                r.replicate.into(),
                r.country.as_str().into(),
                r.capability_count.into(),
                r.k_c0.into(),
                r.k_c1.into(),
            ]);
        }
        let cell_meta = RunMeta {
            params: json!({ "cell": cell, "replicates": config.replicates }),
            ..meta.clone()
        };
        ctx.table(&rows, &format!("cell_{:03}", cell.index), &cell_meta)?;
        let p = &report.pooled;
        if p.degenerate() {
            ctx.warn(format!(
                "cell {}: correlations undefined (zero variance)",
                cell.index
            ));
        }
        summary.push(vec![
            cell.index.into(),
            cell.params.n_countries.into(),
            cell.params.n_products.into(),
            cell.params.n_capabilities.into(),
            cell.params.r.into(),
            cell.params.q.into(),
            cell.seed.into(),
            config.replicates.into(),
            report
                .replicates
                .iter()
                .filter(|r| r.degenerate)
                .count()
                .into(),
            report
                .replicates
                .iter()
                .map(|r| r.excluded_countries)
                .sum::<usize>()
                .into(),
            p.n_points.into(),
            p.pearson_kc0_kc1.into(),
            p.spearman_capabilities_kc0.into(),
            p.spearman_capabilities_kc1.into(),
        ]);
    }
    ctx.table(&summary, "summary", &meta)
}

fn cmd_null(ctx: &Ctx, a: &NullArgs) -> Result<()> {
    let level: NullLevel = a.level.parse()?;
    let (m, _) = io::read_matrix_artifact(&a.matrix)?;
    let meta = meta_with_inputs("null", params(a), Some(a.seed), &[&a.matrix])?;
    let spec = NullModelSpec {
        level,
        n_samples: a.samples,
        seed: a.seed,
        swaps_per_edge: a.swaps_per_edge,
    };
    let cmp = null_comparison(&m, &spec)?;
    if cmp.no_rewiring_possible {
        ctx.warn("no rewiring possible: every null sample equals the input");
    }
    if a.samples < 20 {
        ctx.warn(format!(
            "{} samples give a coarse null distribution",
            a.samples
        ));
    }
    let mut dist = Table::new(&["sample", "statistic"]);
    for (i, s) in cmp.null_statistics.iter().enumerate() {
        dist.push(vec![i.into(), Cell::from(*s)]);
    }
    ctx.table(&dist, "null_distribution", &meta)?;
    ctx.summary(
        "null_summary.json",
        &meta,
        &json!({
            "level": level,
            "n_samples": a.samples,
            "observed": cmp.observed,
            "mean": cmp.null_mean,
            "stdev": cmp.null_stdev,
            "p_value": cmp.p_value,
            "degenerate_samples": cmp.degenerate_samples,
            "no_rewiring_possible": cmp.no_rewiring_possible,
        }),
    )
}

fn cmd_regress(ctx: &Ctx, a: &RegressArgs) -> Result<()> {
    if a.matrix.len() != a.gdp_start.len() || a.matrix.len() != a.gdp_end.len() {
        return Err(Error::InvalidArgument(
            "--matrix, --gdp-start and --gdp-end must be given the same number of times".into(),
        ));
    }
    if a.country_dummies && a.matrix.len() < 2 {
        return Err(Error::InvalidArgument(
            "--country-dummies needs at least two periods".into(),
        ));
    }
    let inputs: Vec<&Path> = a
        .matrix
        .iter()
        .chain(&a.gdp_start)
        .chain(&a.gdp_end)
        .map(PathBuf::as_path)
        .collect();
    let meta = meta_with_inputs("regress", params(a), None, &inputs)?;

    let mut trajectories = Vec::new();
    let mut starts = Vec::new();
    let mut ends = Vec::new();
    for ((mp, g0), g1) in a.matrix.iter().zip(&a.gdp_start).zip(&a.gdp_end) {
        let (m, _) = io::read_matrix_artifact(mp)?;
        trajectories.push(reflect(&m, a.level + 1)?);
        starts.push(io::read_series_csv(g0, "gdp_start")?);
        ends.push(io::read_series_csv(g1, "gdp_end")?);
    }
    let periods: Vec<GrowthPeriod> = (0..trajectories.len())
        .map(|i| GrowthPeriod {
            gdp_start: &starts[i],
            gdp_end: &ends[i],
            trajectory: &trajectories[i],
        })
        .collect();
    let result = pooled_growth_regression(
        &periods,
        a.level,
        RegressionOptions {
            log_gdp: a.log_gdp,
            country_dummies: a.country_dummies,
        },
    )?;
    let mut scatter = Table::new(&["country", "period", "observed_growth", "predicted_growth"]);
    for p in &result.predictions {
        scatter.push(vec![
            p.country.as_str().into(),
            p.period.into(),
            p.observed.into(),
            p.predicted.into(),
        ]);
    }
    ctx.table(&scatter, "growth_scatter", &meta)?;
    let coefficients: serde_json::Map<String, serde_json::Value> = result
        .column_names
        .iter()
        .zip(result.coefficients.iter().zip(&result.standard_errors))
        .map(|(n, (b, se))| (n.clone(), json!({ "estimate": b, "standard_error": se })))
        .collect();
    ctx.summary(
        "regression.json",
        &meta,
        &json!({
            "level": result.level,
            "coefficients": coefficients,
            "r_squared": result.r_squared,
            "n_observations": result.n_observations,
            "dropped_countries": result.dropped,
            "options": result.options,
        }),
    )
}

fn cmd_newexports(ctx: &Ctx, a: &NewExportsArgs) -> Result<()> {
    let t0 = io::select_year(io::read_trade_csv(&a.trade_t0)?, a.year_t0)?;
    let t1 = io::select_year(io::read_trade_csv(&a.trade_t1)?, a.year_t1)?;
    let meta = meta_with_inputs("newexports", params(a), None, &[&a.trade_t0, &a.trade_t1])?;
    let report = new_exports(
        &t0,
        &t1,
        NewExportOptions {
            low_threshold: a.low,
            high_threshold: a.high,
            matrix_threshold: a.threshold,
            leave_one_out: a.leave_one_out,
        },
    )?;
    let mut table = Table::new(&[
        "country",
        "k_c0",
        "k_c1",
        "mean_kp0",
        "mean_kp1",
        "n_new_products",
    ]);
    for c in &report.countries {
        table.push(vec![
            c.country.as_str().into(),
            c.k_c0.into(),
            c.k_c1.into(),
            c.mean_kp0.into(),
            c.mean_kp1.into(),
            c.new_products.len().into(),
        ]);
    }
    ctx.table(&table, "new_exports", &meta)?;
    let products: BTreeMap<&str, &Vec<String>> = report
        .countries
        .iter()
        .map(|c| (c.country.as_str(), &c.new_products))
        .collect();
    ctx.summary(
        "new_exports.json",
        &meta,
        &json!({
            "year_t0": t0.year(),
            "year_t1": t1.year(),
            "new_products": products,
            "no_new_exports": report.no_new_exports,
            "unmeasured": report.unmeasured,
            "options": report.options,
        }),
    )
}

fn cmd_baseline(ctx: &Ctx, a: &BaselineArgs) -> Result<()> {
    let table = io::select_year(io::read_trade_csv(&a.trade)?, a.year)?;
    let meta = meta_with_inputs("baseline", params(a), None, &[&a.trade])?;
    let b = baseline_indices(&table)?;
    let mut out = Table::new(&["country", "hhi", "entropy", "n_products"]);
    for c in &b.countries {
        out.push(vec![
            c.country.as_str().into(),
            c.hhi.into(),
            c.entropy.into(),
            c.n_products.into(),
        ]);
    }
    if !b.excluded.is_empty() {
        ctx.warn(format!(
            "{} countries with zero exports excluded",
            b.excluded.len()
        ));
    }
    ctx.table(&out, "baseline", &meta)
}

fn cmd_labor(ctx: &Ctx, a: &LaborArgs) -> Result<()> {
    let (m, _) = io::read_matrix_artifact(&a.matrix)?;
    let attrs = io::read_attributes_csv(&a.attributes)?;
    let meta = meta_with_inputs("labor", params(a), None, &[&a.matrix, &a.attributes])?;
    let t = reflect(&m, a.depth)?;
    let ld = labor_diversity(&m, &attrs, &t)?;
    let mut per = Table::new(&[
        "country",
        "mean_attributes",
        "mapped_products",
        "exported_products",
    ]);
    for c in &ld.countries {
        per.push(vec![
            c.country.as_str().into(),
            c.mean_attributes.into(),
            c.mapped_products.into(),
            c.exported_products.into(),
        ]);
    }
    ctx.table(&per, "labor_diversity", &meta)?;
    ctx.summary(
        "labor_summary.json",
        &meta,
        &json!({
            "coverage": ld.coverage,
            "excluded": ld.excluded,
            "unmapped_products": ld.unmapped_products,
            "correlations": ld.correlations.iter().map(|(l, r)| json!({ "level": l, "pearson": r })).collect::<Vec<_>>(),
        }),
    )
}
