use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use segclust::batch::{batch_generate, MANIFEST_FILE};
use segclust::config::{parse_config_with_overrides, RunConfig};
use segclust::evalbench::{run_elongation_experiment, score_external, ExperimentConfig, DEFAULT_MAX_ITER, DEFAULT_TOL};
use segclust::io::{read_dataset, write_dataset, write_points, DataFormat};
use segclust::{clugen, clumerge, Error};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "segclust",
    version,
    about = "Generate synthetic clusters around line segments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one dataset.
    Gen(GenArgs),
    /// Generate one dataset per seed and sweep value into a directory.
    Batch(BatchArgs),
    /// Merge labeled datasets, renumbering clusters.
    Merge(MergeArgs),
    /// Run the line-length experiment, or score an external clustering.
    Eval(EvalArgs),
}

/// Generation parameters. Vectors are given as `1,1` or `[1,1]`, matrices as
/// JSON, e.g. `[[0,0],[5,5]]`. Flags override values from `--config`.
#[derive(Args)]
struct ParamArgs {
    /// Parameter file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    num_dims: Option<String>,
    #[arg(long)]
    num_clusters: Option<String>,
    #[arg(long)]
    num_points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    direction: Option<String>,
    #[arg(long)]
    angle_disp: Option<String>,
    #[arg(long)]
    cluster_sep: Option<String>,
    #[arg(long)]
    llength: Option<String>,
    #[arg(long)]
    llength_disp: Option<String>,
    #[arg(long)]
    lateral_disp: Option<String>,
    #[arg(long)]
    allow_empty: bool,
    #[arg(long, allow_hyphen_values = true)]
    cluster_offset: Option<String>,
    /// `norm` or `unif`.
    #[arg(long)]
    proj_dist_fn: Option<String>,
    /// `n-1` or `n`.
    #[arg(long)]
    point_dist_fn: Option<String>,
    /// Explicit cluster sizes.
    #[arg(long)]
    sizes: Option<String>,
    /// Explicit cluster centers.
    #[arg(long, allow_hyphen_values = true)]
    centers: Option<String>,
    /// Explicit line lengths.
    #[arg(long)]
    lengths: Option<String>,
    /// Explicit angle deltas, in radians.
    #[arg(long, allow_hyphen_values = true)]
    angle_deltas: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output file (`gen`) or directory (`batch`).
    #[arg(long, short)]
    output: Option<String>,
    /// `csv` or `json`; inferred from the output extension by default.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Seed list `1,2,3` or inclusive range `1..30`.
    #[arg(long)]
    seeds: Option<String>,
    /// One of num_points, angle_disp, llength, llength_disp, lateral_disp.
    #[arg(long)]
    sweep_param: Option<String>,
    #[arg(long)]
    sweep_values: Option<String>,
}

#[derive(Args)]
struct MergeArgs {
    /// Input datasets (CSV or JSON).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Line lengths to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 6.0, 12.0, 18.0])]
    llength_values: Vec<f64>,
    /// Seed list `1,2,3` or inclusive range `1..30`.
    #[arg(long, default_value = "1..30")]
    seeds: String,
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, short, default_value = "results.csv")]
    output: PathBuf,
    /// Score this dataset's labels against `--assignments` instead of running
    /// the experiment.
    #[arg(long, requires = "assignments")]
    dataset: Option<PathBuf>,
    /// One cluster id per line, in dataset row order.
    #[arg(long, requires = "dataset")]
    assignments: Option<PathBuf>,
}

/// Bare comma lists become JSON arrays so `--direction 1,1` works.
fn as_list(raw: &str) -> String {
    let t = raw.trim();
    if t.contains(',') && !t.starts_with('[') {
        format!("[{t}]")
    } else {
        t.to_string()
    }
}

impl ParamArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let scalars = [
            ("num_dims", &self.num_dims),
            ("num_clusters", &self.num_clusters),
            ("num_points", &self.num_points),
            ("angle_disp", &self.angle_disp),
            ("llength", &self.llength),
            ("llength_disp", &self.llength_disp),
            ("lateral_disp", &self.lateral_disp),
            ("proj_dist_fn", &self.proj_dist_fn),
            ("point_dist_fn", &self.point_dist_fn),
            ("seed", &self.seed),
            ("output", &self.output),
            ("format", &self.format),
        ];
        let lists = [
            ("direction", &self.direction),
            ("cluster_sep", &self.cluster_sep),
            ("cluster_offset", &self.cluster_offset),
            ("sizes", &self.sizes),
            ("centers", &self.centers),
            ("lengths", &self.lengths),
            ("angle_deltas", &self.angle_deltas),
        ];
        let mut out: Vec<(String, String)> = scalars
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        out.extend(
            lists
                .iter()
                .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), as_list(v)))),
        );
        if self.allow_empty {
            out.push(("allow_empty".into(), "true".into()));
        }
        out
    }

    fn load(&self, extra: Vec<(String, String)>) -> Result<RunConfig, Error> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?,
            None => String::new(),
        };
        let mut overrides = self.overrides();
        overrides.extend(extra);
        parse_config_with_overrides(&text, &overrides)
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn format_for(name: Option<&str>, path: &Path) -> Result<DataFormat, Error> {
    match name {
        Some(n) => DataFormat::from_name(n).ok_or_else(|| Error::InvalidArgument(format!("unknown format `{n}`"))),
        None => DataFormat::from_path(path),
    }
}

fn parse_seeds(raw: &str) -> Result<Vec<u64>, Error> {
    let bad = || Error::InvalidArgument(format!("bad seed list `{raw}`"));
    if let Some((a, b)) = raw.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return if a <= b { Ok((a..=b).collect()) } else { Err(bad()) };
    }
    raw.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn gen(args: &GenArgs) -> Result<u8, Error> {
    let config = args.params.load(Vec::new())?;
    let data = clugen(&config.params)?;
    write_dataset(&data, &config.params, config.format, &config.output)?;
    eprintln!("wrote {} points to {}", data.num_points(), config.output.display());
    Ok(0)
}

fn batch(args: &BatchArgs) -> Result<u8, Error> {
    let mut extra = Vec::new();
    if let Some(s) = &args.seeds {
        extra.push((
            "seeds".to_string(),
            if s.contains("..") { s.clone() } else { as_list(s) },
        ));
    }
    if let Some(p) = &args.sweep_param {
        extra.push(("sweep_param".to_string(), p.clone()));
    }
    if let Some(v) = &args.sweep_values {
        let v = as_list(v);
        extra.push((
            "sweep_values".to_string(),
            if v.starts_with('[') { v } else { format!("[{v}]") },
        ));
    }
    let mut config = args.params.load(extra)?;
    if args.params.output.is_none() {
        config.output = PathBuf::from("batch");
    }
    let manifest = batch_generate(&config)?;
    let failed: Vec<_> = manifest.failed().collect();
    for e in &failed {
        eprintln!("{}: {}", e.file.display(), e.error.as_deref().unwrap_or(""));
    }
    eprintln!(
        "wrote {} of {} files to {} (see {MANIFEST_FILE})",
        manifest.entries.len() - failed.len(),
        manifest.entries.len(),
        config.output.display()
    );
    Ok(if failed.is_empty() { 0 } else { EXIT_PARTIAL })
}

fn merge(args: &MergeArgs) -> Result<u8, Error> {
    let inputs = args
        .inputs
        .iter()
        .map(|p| read_dataset(p, DataFormat::from_path(p)?))
        .collect::<Result<Vec<_>, _>>()?;
    let merged = clumerge(&inputs)?;
    write_points(&merged, format_for(args.format.as_deref(), &args.output)?, &args.output)?;
    eprintln!(
        "merged {} points in {} clusters into {}",
        merged.len(),
        merged.num_clusters(),
        args.output.display()
    );
    Ok(0)
}

fn eval(args: &EvalArgs) -> Result<u8, Error> {
    if let (Some(dataset), Some(assignments)) = (&args.dataset, &args.assignments) {
        let score = score_external(dataset, assignments)?;
        println!("h,c,v");
        println!("{},{},{}", score.homogeneity, score.completeness, score.v);
        return Ok(0);
    }
    let config = ExperimentConfig {
        llengths: args.llength_values.clone(),
        seeds: parse_seeds(&args.seeds)?,
        num_points: args.points,
        k: args.k,
        max_iter: args.max_iter,
        tol: DEFAULT_TOL,
    };
    let results = run_elongation_experiment(&config)?;
    std::fs::write(&args.output, results.to_csv()).map_err(|e| Error::Io {
        path: args.output.clone(),
        source: e,
    })?;
    println!("llength,mean_v,median_v");
    for s in &results.summary {
        println!("{},{:.4},{:.4}", s.llength, s.mean_v, s.median_v);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Batch(a) => batch(a),
        Command::Merge(a) => merge(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
