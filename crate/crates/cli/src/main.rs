use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use objnav_core::config::Params;
use objnav_core::episode::{run_episode, run_episode_with, Ablation, EpisodeConfig, EpisodeResult, StepView, Strategy};
use objnav_core::render::{class_layer, distance_layer, occupancy_layer, stamp, unit_layer};
use objnav_core::scene_file::{load_scene, write_scene};
use objnav_core::scenegen::{generate_suite, LayoutSpec};
use objnav_core::suite::{run_suite, Execution, SuiteSummary};
use objnav_core::world::Scene;

#[derive(Parser)]
#[command(name = "objnav", version, about = "Object-goal navigation in a deterministic grid world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Fusion,
    Random,
}

#[derive(clap::Args)]
struct Source {
    /// One scene file.
    #[arg(long, conflicts_with = "suite")]
    scene: Option<PathBuf>,
    /// Directory of `*.scene` files, run in name order.
    #[arg(long)]
    suite: Option<PathBuf>,
    /// TOML parameter file; defaults apply to absent keys.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes and report success rate and SPL.
    Run {
        #[command(flatten)]
        source: Source,
        /// Episode seed (first seed of a suite run).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seeds per scene in a suite run: seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Modules to disable, comma separated: stl, mol, tpm, vm.
        #[arg(long, default_value = "")]
        ablation: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::Fusion)]
        strategy: StrategyArg,
        /// Write per-step PGM panels (occupancy, semantics, value, distance) here.
        #[arg(long)]
        render: Option<PathBuf>,
        /// Render every k-th step.
        #[arg(long, default_value_t = 1)]
        render_every: usize,
        /// Write the decision trace of every episode here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write per-episode results as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Run episodes one at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// Write a generated suite of scene files.
    GenSuite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Full configuration, each single-module ablation and the random baseline.
    Ablations {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
}

fn load_scenes(source: &Source) -> Result<Vec<Scene>, String> {
    if let Some(path) = &source.scene {
        return Ok(vec![load_scene(path).map_err(|e| format!("{}: {e}", path.display()))?]);
    }
    let dir = source.suite.as_ref().ok_or("give --scene or --suite")?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scene"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(format!("no .scene files in {}", dir.display()));
    }
    files.iter().map(|p| load_scene(p).map_err(|e| format!("{}: {e}", p.display()))).collect()
}

fn load_params(source: &Source) -> Result<Params, String> {
    match &source.config {
        Some(p) => Params::load(p).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(Params::default()),
    }
}

fn render_step(dir: &Path, every: usize, v: &StepView<'_>) -> std::io::Result<()> {
    if !v.step.is_multiple_of(every.max(1)) {
        return Ok(());
    }
    let res = v.scene.resolution();
    let stem = format!("{}_{:04}", v.scene.name(), v.step);
    let mut occ = occupancy_layer(v.maps);
    if let Some(path) = v.path {
        stamp(&mut occ, &path.cells, 192);
    }
    if let Some(g) = v.goal {
        stamp(&mut occ, &[g], 224);
    }
    stamp(&mut occ, &[v.pose.cell(res)], 255);
    let panels = [
        ("ofe", occ),
        ("smap", class_layer(&v.maps.smap_multi, v.scene.num_classes())),
        ("value", unit_layer(&v.value.grid)),
    ];
    for (name, img) in panels {
        fs::write(dir.join(format!("{stem}_{name}.pgm")), img.to_pgm())?;
    }
    if let Some(d) = v.distance {
        fs::write(dir.join(format!("{stem}_dist.pgm")), distance_layer(d).to_pgm())?;
    }
    Ok(())
}

fn print_summary(summary: &SuiteSummary) -> Result<(), String> {
    println!("{summary}");
    for kind in ["sparse", "dense"] {
        let part = summary.subset(format!("  {kind}"), |n| n.starts_with(kind)).map_err(|e| e.to_string())?;
        if part.episodes > 0 && part.episodes < summary.episodes {
            println!("{part}");
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    source: &Source,
    seed: u64,
    seeds: u64,
    ablation: &str,
    strategy: StrategyArg,
    render: Option<&Path>,
    render_every: usize,
    trace: Option<&Path>,
    json: Option<&Path>,
    sequential: bool,
) -> Result<(), String> {
    let scenes = load_scenes(source)?;
    let params = load_params(source)?;
    let ablation = Ablation::disabling(ablation).map_err(|e| e.to_string())?;
    let strategy = match strategy {
        StrategyArg::Fusion => Strategy::Fusion,
        StrategyArg::Random => Strategy::RandomFrontier,
    };
    let config = EpisodeConfig::new(params).map_err(|e| e.to_string())?.with_ablation(ablation).with_strategy(strategy);
    let seed_list: Vec<u64> = (seed..seed + seeds.max(1)).collect();
    info!("{} scene(s) x {} seed(s), {}", scenes.len(), seed_list.len(), config.label());

    let results: Vec<EpisodeResult> = if render.is_some() || trace.is_some() {
        if let Some(dir) = render {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        }
        let mut traces = String::new();
        let mut results = Vec::new();
        for scene in &scenes {
            for &k in &seed_list {
                let c = config.clone().with_seed(k);
                let run = match render {
                    Some(dir) => {
                        let mut failed = None;
                        let run = run_episode_with(scene, &c, &mut |v| {
                            if failed.is_none() {
                                failed = render_step(dir, render_every, v).err();
                            }
                        });
                        if let Some(e) = failed {
                            warn!("rendering stopped: {e}");
                        }
                        run
                    }
                    None => run_episode(scene, &c),
                }
                .map_err(|e| format!("{} seed {k}: {e}", scene.name()))?;
                traces.push_str(&run.trace);
                results.push(run.result);
            }
        }
        if let Some(path) = trace {
            fs::write(path, traces).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        results
    } else {
        let exec = if sequential { Execution::Sequential } else { Execution::Auto };
        run_suite(&scenes, &config, &seed_list, exec).map_err(|e| e.to_string())?.results
    };

    if scenes.len() * seed_list.len() == 1 {
        let r = &results[0];
        println!(
            "{} seed={} success={} steps={} path={:.2}m optimal={:.2}m end={}",
            r.scene, r.seed, r.success, r.steps, r.path_length_m, r.optimal_length_m, r.termination
        );
    }
    let summary = SuiteSummary::from_results(config.label(), results).map_err(|e| e.to_string())?;
    print_summary(&summary)?;
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&summary.results).map_err(|e| e.to_string())?;
        fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn gen_suite(out: &Path, count: usize, seed: u64) -> Result<(), String> {
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let scenes = generate_suite(&LayoutSpec::default(), count, seed).map_err(|e| e.to_string())?;
    for s in &scenes {
        let text = write_scene(s).map_err(|e| e.to_string())?;
        let path = out.join(format!("{}.scene", s.name()));
        fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    println!("wrote {} scenes to {}", scenes.len(), out.display());
    Ok(())
}

fn ablations(source: &Source, seed: u64, seeds: u64) -> Result<(), String> {
    let scenes = load_scenes(source)?;
    let base = EpisodeConfig::new(load_params(source)?).map_err(|e| e.to_string())?;
    let seed_list: Vec<u64> = (seed..seed + seeds.max(1)).collect();
    let mut configs: Vec<EpisodeConfig> = ["", "vm", "tpm", "mol", "stl"]
        .iter()
        .map(|off| base.clone().with_ablation(Ablation::disabling(off).expect("known module")))
        .collect();
    configs.push(base.clone().with_strategy(Strategy::RandomFrontier));
    for c in &configs {
        let summary = run_suite(&scenes, c, &seed_list, Execution::Auto).map_err(|e| e.to_string())?;
        print_summary(&summary)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { source, seed, seeds, ablation, strategy, render, render_every, trace, json, sequential } => run(
            source,
            *seed,
            *seeds,
            ablation,
            *strategy,
            render.as_deref(),
            *render_every,
            trace.as_deref(),
            json.as_deref(),
            *sequential,
        ),
        Command::GenSuite { out, count, seed } => gen_suite(out, *count, *seed),
        Command::Ablations { source, seed, seeds } => ablations(source, *seed, *seeds),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("objnav: {msg}");
            ExitCode::FAILURE
        }
    }
}
