use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinweb::experiment::{
    export_artifacts, import_edgelist, pack_layout, pipeline, sweep_parameter, Depth, ExperimentConfig, SampleSeeds,
    Variant,
};
use spinweb::network::write_edgelist;
use spinweb::placement::NodeLayout;
use spinweb::topology::{topology_report, AnalysisOptions};
use spinweb::{
    build_network, largest_connected_component, percolation_clusters, run_sdrg, sample_disorder, ClusterDecomposition,
    Error, LinkRule, Result,
};

/// Quantum communication networks from ground-state spin clusters.
#[derive(Parser)]
#[command(name = "spinweb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one disorder instance and decompose it into clusters.
    Generate(Stage),
    /// Pack the node layout of one sample.
    Pack(Stage),
    /// Build a network from a decomposition and a layout; writes the network and its LCC.
    Network(NetworkArgs),
    /// Topology report of an edge list (the LCC is taken first).
    Analyze(AnalyzeArgs),
    /// Mean LCC size over a parameter grid.
    Sweep(RunArgs),
    /// Every stage for every grid value, with all artifacts and a manifest.
    Pipeline(RunArgs),
    /// Convert an external `u v` edge list into the spinweb format.
    Import(ImportArgs),
}

/// Configuration keys; flags override the file.
#[derive(Args)]
struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, alias = "lattice_size")]
    lattice_size: Option<String>,
    /// fixed-h, box-h or diluted.
    #[arg(long)]
    variant: Option<String>,
    /// Control parameter ln h; a comma list sweeps.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Bond probability of the diluted variant; a comma list sweeps.
    #[arg(long)]
    p: Option<String>,
    /// spiral, hexagonal or hexagonal-patch.
    #[arg(long)]
    packing: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, alias = "r_min")]
    r_min: Option<String>,
    #[arg(long, alias = "r_max")]
    r_max: Option<String>,
    #[arg(long)]
    coverage: Option<String>,
    #[arg(long)]
    pitch: Option<String>,
    /// Disk radius of the hexagonal patch, or `auto`.
    #[arg(long)]
    radius: Option<String>,
    /// node-exclusive (relaxed) or pair-contained (strict).
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Path-length sources, or `auto`.
    #[arg(long)]
    sources: Option<String>,
    #[arg(long, alias = "bin_ratio")]
    bin_ratio: Option<String>,
    /// Output directory.
    #[arg(long, short)]
    output: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::read(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("lattice_size", &self.lattice_size),
            ("variant", &self.variant),
            ("theta", &self.theta),
            ("p", &self.p),
            ("packing", &self.packing),
            ("gamma", &self.gamma),
            ("r_min", &self.r_min),
            ("r_max", &self.r_max),
            ("coverage", &self.coverage),
            ("pitch", &self.pitch),
            ("radius", &self.radius),
            ("rule", &self.rule),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("sources", &self.sources),
            ("bin_ratio", &self.bin_ratio),
            ("output", &self.output),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct Stage {
    #[command(flatten)]
    config: ConfigArgs,
    /// Grid value to use.
    #[arg(long, default_value_t = 0)]
    grid_index: usize,
    /// Ensemble member to reproduce.
    #[arg(long, default_value_t = 0)]
    sample: usize,
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long)]
    decomposition: PathBuf,
    #[arg(long)]
    layout: PathBuf,
    #[arg(long, default_value = "node-exclusive")]
    rule: LinkRule,
    /// Output directory.
    #[arg(long, short, default_value = ".")]
    output: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// spinweb or plain `u v` edge list.
    input: PathBuf,
    /// Path-length sources; exact below the automatic threshold when omitted.
    #[arg(long)]
    sources: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    bin_ratio: f64,
    /// Report file; defaults to `<input>.report.json`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print the report on standard output instead of writing a file.
    #[arg(long)]
    stdout: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Remove an existing output directory first.
    #[arg(long)]
    force: bool,
    /// Also print the sweep CSV on standard output.
    #[arg(long)]
    stdout: bool,
}

#[derive(Args)]
struct ImportArgs {
    input: PathBuf,
    /// Destination edge list.
    #[arg(long, short)]
    output: PathBuf,
}

fn write_stdout(text: &str) -> Result<()> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn generate(stage: &Stage) -> Result<()> {
    let config = stage.config.resolve()?;
    let value = *config
        .grid()
        .get(stage.grid_index)
        .ok_or_else(|| Error::parameter(format!("grid index {} out of range", stage.grid_index)))?;
    let seeds = SampleSeeds::derive(config.seed, stage.grid_index, stage.sample);
    let instance = sample_disorder(config.spec()?, config.variant.model(value), seeds.disorder)?;
    instance.write(&config.output.join("instance.txt"))?;
    let decomposition = match config.variant {
        Variant::Diluted => percolation_clusters(&instance)?,
        _ => run_sdrg(&instance)?,
    };
    decomposition.write(&config.output.join("decomposition.txt"))?;
    log::info!(
        "{} clusters written to {}",
        decomposition.cluster_count(),
        config.output.display()
    );
    Ok(())
}

fn pack(stage: &Stage) -> Result<()> {
    let config = stage.config.resolve()?;
    let seeds = SampleSeeds::derive(config.seed, stage.grid_index, stage.sample);
    let layout = pack_layout(&config, seeds.layout)?;
    layout.write(&config.output.join("layout.txt"))?;
    log::info!("{} nodes, coverage {:.4}", layout.node_count(), layout.coverage);
    Ok(())
}

fn network(args: &NetworkArgs) -> Result<()> {
    let decomposition = ClusterDecomposition::read(&args.decomposition)?;
    let layout = NodeLayout::read(&args.layout)?;
    let net = build_network(&decomposition, &layout, args.rule)?;
    let lcc = largest_connected_component(&net);
    write_edgelist(&net, &args.output.join("network.txt"))?;
    write_edgelist(&lcc, &args.output.join("lcc.txt"))?;
    log::info!(
        "{} links; LCC {} nodes, {} links",
        net.edge_count(),
        lcc.node_count(),
        lcc.edge_count()
    );
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let net = import_edgelist(&args.input)?.network;
    let lcc = largest_connected_component(&net);
    if lcc.node_count() < net.node_count() {
        log::info!("analysing the LCC: {} of {} nodes", lcc.node_count(), net.node_count());
    }
    let options = AnalysisOptions {
        sources: args.sources,
        seed: args.seed,
        bin_ratio: args.bin_ratio,
    };
    let report = topology_report(&lcc, &options)?;
    if args.stdout {
        return write_stdout(&(report.to_json() + "\n"));
    }
    let path = args
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.report.json", args.input.display())));
    report.write_json(&path)
}

fn prepare(out: &Path, force: bool) -> Result<()> {
    if force && out.exists() {
        fs::remove_dir_all(out).map_err(|e| Error::io(out, e))?;
    }
    Ok(())
}

fn sweep(args: &RunArgs) -> Result<()> {
    let config = args.config.resolve()?;
    prepare(&config.output, args.force)?;
    let (result, records) = sweep_parameter(&config, Depth::Lcc)?;
    export_artifacts(&config.output, &config, &result, &records)?;
    if let Some(best) = result.argmax() {
        log::info!("largest mean LCC at {} = {best}", result.parameter);
    }
    if args.stdout {
        write_stdout(&result.to_csv())?;
    }
    Ok(())
}

fn run_pipeline(args: &RunArgs) -> Result<()> {
    let config = args.config.resolve()?;
    prepare(&config.output, args.force)?;
    let (result, manifest) = pipeline(&config, &config.output)?;
    log::info!("{} artifacts in {}", manifest.files.len(), config.output.display());
    if args.stdout {
        write_stdout(&result.to_csv())?;
    }
    Ok(())
}

fn import(args: &ImportArgs) -> Result<()> {
    let imported = import_edgelist(&args.input)?;
    write_edgelist(&imported.network, &args.output)?;
    let labels = args.output.with_extension("labels.txt");
    let text: String = imported.network.labels().iter().map(|l| format!("{l}\n")).collect();
    fs::write(&labels, text).map_err(|e| Error::io(&labels, e))?;
    let s = imported.summary();
    log::info!(
        "{} nodes, {} edges; dropped {} duplicates and {} self-loops",
        s.nodes,
        s.edges,
        s.duplicates,
        s.self_loops
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(s) => generate(s),
        Command::Pack(s) => pack(s),
        Command::Network(a) => network(a),
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(a),
        Command::Pipeline(a) => run_pipeline(a),
        Command::Import(a) => import(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
