use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use image::{Rgb, RgbImage};
use pmfgw::bench::{
    alpha_sweep, iteration_experiment, pairs_from_graphs, random_instance, simplex_grid, timing_experiment,
    write_alpha_csv, write_iterations_csv, write_timing_csv, IterationConfig, PairSource, TimingConfig,
};
use pmfgw::coloring::{generate_dataset, ColoringInstance, ColoringParams, Variant};
use pmfgw::io::{format_float, read_dataset, Graph, Record};
use pmfgw::metrics::{evaluate_dataset, EditConfig, FeatureEquality};
use pmfgw::solver::{Init, SolverOptions, TransportPlan};
use pmfgw::toy::toy_landscape;
use pmfgw::{
    grad_check, pad, pmfgw_general, to_continuous, ContinuousGraph, DiscreteGraph, GroundLoss, LossConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{BenchCommand, Cli, ColoringArgs, Command, ComputeArgs, EvalArgs, GradCheckArgs, LossArgs};

pub enum Failure {
    /// Bad invocation; reported with usage and exit status 2.
    Usage(String),
    /// Valid invocation that failed; exit status 1.
    Domain(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<pmfgw::Error> for Failure {
    fn from(e: pmfgw::Error) -> Self {
        Failure::Domain(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

pub fn parse_alpha(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated weights, got {s:?}"));
    }
    let mut alpha = [0.0; 3];
    for (slot, p) in alpha.iter_mut().zip(&parts) {
        *slot = p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
        if !(*slot >= 0.0 && slot.is_finite()) {
            return Err(format!("weight {p} must be finite and nonnegative"));
        }
    }
    Ok(alpha)
}

fn loss_config(args: &LossArgs, seed: u64) -> anyhow::Result<LossConfig> {
    let cfg = LossConfig {
        alpha: args.alpha,
        loss_h: args.loss_h.parse::<GroundLoss>()?,
        loss_f: args.loss_f.parse::<GroundLoss>()?,
        loss_a: args.loss_a.parse::<GroundLoss>()?,
        normalize_alpha: !args.no_normalize,
        solver: SolverOptions {
            max_iterations: args.solver.max_iter,
            relative_tolerance: args.solver.tol,
            init: if args.solver.init == "random" { Init::Random } else { Init::Uniform },
            restarts: args.solver.restarts,
            seed,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Prints the summary unless quiet and writes the machine-readable form to
/// `--out` when given.
fn emit(cli: &Cli, human: &str, machine: &str) -> anyhow::Result<()> {
    if !cli.quiet {
        print!("{human}");
    }
    if let Some(path) = &cli.out {
        fs::write(path, machine).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn require_out(cli: &Cli) -> std::result::Result<&Path, Failure> {
    cli.out
        .as_deref()
        .ok_or_else(|| Failure::Usage("this command requires --out <FILE>".into()))
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Compute(args) => compute(cli, args),
        Command::GradCheck(args) => grad_check_cmd(cli, args),
        Command::Toy(args) => {
            let points = toy_landscape(args.grid, args.grid)?;
            let mut csv = String::from("a,h,train,eval\n");
            for p in &points {
                writeln!(csv, "{},{},{},{}", p.a, p.h, p.train, p.eval).expect("string write");
            }
            emit(cli, &csv, &csv)?;
            Ok(())
        }
        Command::Eval(args) => eval(cli, args),
        Command::Coloring(args) => coloring(cli, args),
        Command::Bench(cmd) => bench(cli, cmd),
    }
}

fn prediction(graph: Graph, max_nodes: Option<usize>) -> anyhow::Result<ContinuousGraph> {
    match graph {
        Graph::Continuous(g) => {
            if let Some(m) = max_nodes {
                if m != g.size() {
                    bail!("continuous prediction has {} slots but --max-nodes is {m}", g.size());
                }
            }
            Ok(g)
        }
        Graph::Discrete(g) => {
            let m = max_nodes.unwrap_or(g.num_nodes());
            Ok(pad(&g, m)
                .with_context(|| format!("padding a {}-node prediction", g.num_nodes()))?
                .into_continuous())
        }
    }
}

fn target(graph: Graph, max_nodes: usize) -> anyhow::Result<ContinuousGraph> {
    match graph {
        Graph::Continuous(g) => Ok(g),
        Graph::Discrete(g) => Ok(pad(&g, max_nodes)
            .with_context(|| {
                format!("target has {} nodes, pad requires at most {max_nodes}", g.num_nodes())
            })?
            .into_continuous()),
    }
}

fn paired(preds: &[Record], targets: &[Record]) -> anyhow::Result<()> {
    if preds.len() != targets.len() {
        bail!("{} prediction records for {} target records", preds.len(), targets.len());
    }
    Ok(())
}

fn compute(cli: &Cli, args: &ComputeArgs) -> Outcome {
    let cfg = loss_config(&args.loss, cli.seed)?;
    let preds = read_dataset(&args.pred).with_context(|| format!("reading {}", args.pred.display()))?;
    let targets = read_dataset(&args.target).with_context(|| format!("reading {}", args.target.display()))?;
    paired(&preds, &targets)?;
    let mut human = String::new();
    let mut machine = String::new();
    for (i, (p, t)) in preds.into_iter().zip(targets).enumerate() {
        let pred = prediction(p.graph, args.max_nodes).with_context(|| format!("record {i}"))?;
        let tgt = target(t.graph, pred.size()).with_context(|| format!("record {i}"))?;
        let r = pmfgw_general(&pred, &tgt, &cfg).with_context(|| format!("record {i}"))?;
        writeln!(
            human,
            "pair {i}: value {} (h {}, f {}, A {}) iterations {}",
            format_float(r.value),
            format_float(r.term_h),
            format_float(r.term_f),
            format_float(r.term_a),
            r.trace.iterations
        )
        .expect("string write");
        let row = json!({
            "index": i,
            "value": r.value,
            "term_h": r.term_h,
            "term_f": r.term_f,
            "term_a": r.term_a,
            "alpha": r.alpha,
            "iterations": r.trace.iterations,
        });
        machine.push_str(&row.to_string());
        machine.push('\n');
    }
    emit(cli, &human, &machine)?;
    Ok(())
}

/// Random prediction with entries kept away from 0 and 1, where clamped
/// losses have kinks.
fn interior_instance(m: usize, rng: &mut ChaCha8Rng) -> pmfgw::Result<(ContinuousGraph, ContinuousGraph)> {
    let (pred, tgt) = random_instance(m, 3, rng)?;
    let squeeze = |x: f64| 0.05 + 0.9 * x;
    let pred = ContinuousGraph::new(pred.mask().mapv(squeeze), pred.features().clone(), pred.edges().mapv(squeeze))?;
    Ok((pred, tgt.into_continuous()))
}

fn grad_check_cmd(cli: &Cli, args: &GradCheckArgs) -> Outcome {
    if args.max_nodes < 2 {
        return Err(Failure::Usage("--max-nodes must be at least 2".into()));
    }
    let cfg = loss_config(&args.loss, cli.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut worst: f64 = 0.0;
    for k in 0..args.instances {
        let m = 2 + k % (args.max_nodes - 1);
        let (pred, tgt) = interior_instance(m, &mut rng)?;
        let plan = TransportPlan::random(m, &mut rng);
        worst = worst.max(grad_check(&pred, &tgt, &cfg, &plan, args.step)?);
    }
    let human = format!("max relative error {worst:e} over {} instances\n", args.instances);
    let machine = json!({ "instances": args.instances, "step": args.step, "max_relative_error": worst }).to_string() + "\n";
    emit(cli, &human, &machine)?;
    Ok(())
}

fn eval(cli: &Cli, args: &EvalArgs) -> Outcome {
    let feature_equality = match (args.pos_radius, args.argmax) {
        (Some(r), _) => FeatureEquality::positions(r, args.image_width),
        (None, true) => FeatureEquality::ArgMax,
        (None, false) => FeatureEquality::Exact,
    };
    let cfg = EditConfig {
        feature_equality,
        exact_size_limit: args.exact_limit,
    };
    cfg.validate()?;
    let preds = read_dataset(&args.pred).with_context(|| format!("reading {}", args.pred.display()))?;
    let targets = read_dataset(&args.target).with_context(|| format!("reading {}", args.target.display()))?;
    paired(&preds, &targets)?;
    let preds = preds
        .into_iter()
        .map(|r| match r.graph {
            Graph::Continuous(g) => g,
            Graph::Discrete(g) => to_continuous(&g),
        })
        .collect::<Vec<_>>();
    let targets = targets
        .into_iter()
        .enumerate()
        .map(|(i, r)| match r.graph {
            Graph::Discrete(g) => Ok(g),
            Graph::Continuous(_) => Err(anyhow!("target record {i} must be discrete")),
        })
        .collect::<anyhow::Result<Vec<DiscreteGraph>>>()?;
    let report = evaluate_dataset(&preds, &targets, &cfg)?;
    let human = format!(
        "samples {}\nedit {}\ngi_acc {}\nsize_acc {}\nnode_acc {}\nedge_precision {}\nedge_recall {}\napproximate_edits {}\n",
        report.count,
        report.edit,
        report.gi_acc,
        report.size_acc,
        report.node_acc,
        report.edge_precision,
        report.edge_recall,
        report.approximate_edits
    );
    let machine = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)? + "\n";
    emit(cli, &human, &machine)?;
    Ok(())
}

const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [145, 30, 180],
    [245, 130, 48],
    [70, 240, 240],
    [128, 128, 128],
];

fn render_png(instance: &ColoringInstance, path: &Path) -> anyhow::Result<()> {
    let (h, w) = instance.image.dim();
    let img = RgbImage::from_fn(w as u32, h as u32, |x, y| {
        Rgb(PALETTE[instance.image[[y as usize, x as usize]] % PALETTE.len()])
    });
    img.save(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn coloring(cli: &Cli, args: &ColoringArgs) -> Outcome {
    let out = require_out(cli)?;
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let variant: Variant = args.variant.parse()?;
    let base = ColoringParams::for_variant(variant);
    let params = ColoringParams {
        min_nodes: args.min_nodes.unwrap_or(base.min_nodes),
        max_nodes: args.max_nodes.unwrap_or(base.max_nodes),
        resolution: args.resolution.unwrap_or(base.resolution),
        num_colors: args.colors,
        seed: cli.seed,
    };
    params.validate()?;
    let instances = generate_dataset(args.n, &params, variant, out)?;
    if let Some(dir) = &args.png_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, inst) in instances.iter().enumerate() {
            render_png(inst, &dir.join(format!("{i:06}.png")))?;
        }
    }
    if !cli.quiet {
        let mut counts = vec![0usize; params.max_nodes + 1];
        for inst in &instances {
            counts[inst.graph.num_nodes()] += 1;
        }
        println!("wrote {} records to {}", instances.len(), out.display());
        for (m, c) in counts.iter().enumerate().skip(params.min_nodes) {
            println!("  {m} nodes: {c}");
        }
    }
    Ok(())
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> pmfgw::Result<()>) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn bench(cli: &Cli, cmd: &BenchCommand) -> Outcome {
    match cmd {
        BenchCommand::Iters(args) => {
            let cfg = IterationConfig {
                sizes: args.sizes.clone(),
                pairs: args.pairs,
                feature_diffusion: args.fd,
                pad_to: args.pad_to,
                loss: loss_config(&args.loss, cli.seed)?,
            };
            let source = match &args.dataset {
                Some(path) => {
                    let graphs = read_dataset(path)
                        .with_context(|| format!("reading {}", path.display()))?
                        .into_iter()
                        .filter_map(|r| match r.graph {
                            Graph::Discrete(g) => Some(g),
                            Graph::Continuous(_) => None,
                        })
                        .collect();
                    PairSource::Graphs(graphs)
                }
                None => PairSource::Coloring(ColoringParams::default().with_seed(cli.seed)),
            };
            let report = iteration_experiment(&source, &cfg)?;
            for m in &report.skipped {
                eprintln!("warning: fewer than two graphs of size {m}, skipped");
            }
            let csv = csv_string(|w| write_iterations_csv(w, &report.records, &cfg.loss.solver))?;
            emit(cli, &csv, &csv)?;
        }
        BenchCommand::Alpha(args) => {
            let cfg = loss_config(&args.loss, cli.seed)?;
            let records = read_dataset(&args.pairs).with_context(|| format!("reading {}", args.pairs.display()))?;
            if records.len() % 2 != 0 {
                return Err(Failure::Domain(anyhow!(
                    "pairs file holds {} records, expected prediction/target pairs",
                    records.len()
                )));
            }
            let mut preds = Vec::new();
            let mut targets = Vec::new();
            for (k, pair) in records.chunks(2).enumerate() {
                preds.push(prediction(pair[0].graph.clone(), None)?);
                match &pair[1].graph {
                    Graph::Discrete(g) => targets.push(g.clone()),
                    Graph::Continuous(_) => bail_domain(format!("target of pair {k} must be discrete"))?,
                }
            }
            let pairs = pairs_from_graphs(preds, targets)?;
            let rows = alpha_sweep(&pairs, &simplex_grid(args.grid)?, &cfg)?;
            let csv = csv_string(|w| write_alpha_csv(w, &rows, &cfg.solver))?;
            emit(cli, &csv, &csv)?;
        }
        BenchCommand::Timing(args) => {
            let cfg = TimingConfig {
                repeats: args.repeats,
                naive_limit: args.naive_limit,
                seed: cli.seed,
                ..TimingConfig::new(args.sizes.clone())
            };
            let loss = LossConfig::default();
            let rows = timing_experiment(&cfg, &loss)?;
            let csv = csv_string(|w| write_timing_csv(w, &rows, &loss.solver))?;
            emit(cli, &csv, &csv)?;
        }
    }
    Ok(())
}

fn bail_domain(message: String) -> Outcome {
    Err(Failure::Domain(anyhow!(message)))
}
