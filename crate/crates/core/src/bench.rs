//! Empirical studies of the solver: iteration counts as a function of the
//! padded size, the loss surface over the weight simplex, and per-iteration
//! timing of the factorized and naive tensor products.

use std::io::Write;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coloring::{generate, ColoringParams};
use crate::error::{Error, Result};
use crate::graph::{feature_diffuse, pad, ContinuousGraph, DiscreteGraph, PaddedGraph};
use crate::loss::{pmfgw, pmfgw_naive_objective, pmfgw_objective, LossConfig};
use crate::solver::{hungarian, Init, QuadraticObjective, SolverOptions, TransportPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchVariant {
    Plain,
    FeatureDiffused,
}

impl BenchVariant {
    pub fn name(&self) -> &'static str {
        match self {
            BenchVariant::Plain => "plain",
            BenchVariant::FeatureDiffused => "feature-diffused",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub m: usize,
    pub pairs: usize,
    pub mean_iterations: f64,
    pub std_iterations: f64,
    pub mean_value: f64,
    /// Seconds; excluded from determinism guarantees.
    pub mean_time_per_pair: f64,
    pub variant: BenchVariant,
}

/// Where graph pairs of a given size come from.
#[derive(Debug, Clone)]
pub enum PairSource {
    /// Fresh Coloring instances with exactly `M` regions.
    Coloring(ColoringParams),
    /// Consecutive graphs of size `M` taken from a dataset.
    Graphs(Vec<DiscreteGraph>),
}

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub sizes: Vec<usize>,
    pub pairs: usize,
    pub feature_diffusion: bool,
    /// Padded size, `None` for `M` itself.
    pub pad_to: Option<usize>,
    pub loss: LossConfig,
}

impl IterationConfig {
    pub fn new(sizes: Vec<usize>, pairs: usize) -> Self {
        Self {
            sizes,
            pairs,
            feature_diffusion: false,
            pad_to: None,
            loss: LossConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub records: Vec<BenchRecord>,
    /// Sizes with fewer than two graphs available.
    pub skipped: Vec<usize>,
}

fn size_pairs(source: &PairSource, m: usize, pairs: usize) -> Result<Vec<(DiscreteGraph, DiscreteGraph)>> {
    match source {
        PairSource::Coloring(base) => {
            let params = ColoringParams {
                min_nodes: m,
                max_nodes: m,
                resolution: base.resolution.max(m),
                seed: base.seed.wrapping_add(m as u64),
                ..*base
            };
            let graphs: Vec<DiscreteGraph> = generate(2 * pairs, &params)?.into_iter().map(|i| i.graph).collect();
            Ok(graphs.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect())
        }
        PairSource::Graphs(all) => {
            let matching: Vec<&DiscreteGraph> = all.iter().filter(|g| g.num_nodes() == m).collect();
            Ok(matching
                .chunks_exact(2)
                .take(pairs)
                .map(|c| (c[0].clone(), c[1].clone()))
                .collect())
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Solver iteration counts per size. Both graphs of a pair are padded to
/// the same size; the first is the prediction.
pub fn iteration_experiment(source: &PairSource, cfg: &IterationConfig) -> Result<IterationReport> {
    if cfg.sizes.len() < 2 {
        return Err(Error::InvalidConfig("need at least two sizes".into()));
    }
    if cfg.pairs == 0 {
        return Err(Error::InvalidConfig("need at least one pair per size".into()));
    }
    cfg.loss.validate()?;
    let variant = if cfg.feature_diffusion {
        BenchVariant::FeatureDiffused
    } else {
        BenchVariant::Plain
    };
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &m in &cfg.sizes {
        let pairs = size_pairs(source, m, cfg.pairs)?;
        if pairs.is_empty() {
            skipped.push(m);
            continue;
        }
        let padded = cfg.pad_to.unwrap_or(m);
        let runs = pairs
            .par_iter()
            .map(|(g1, g2)| {
                let (g1, g2) = if cfg.feature_diffusion {
                    (feature_diffuse(g1), feature_diffuse(g2))
                } else {
                    (g1.clone(), g2.clone())
                };
                let pred = pad(&g1, padded)?.into_continuous();
                let target = pad(&g2, padded)?;
                let start = Instant::now();
                let result = pmfgw(&pred, &target, &cfg.loss)?;
                Ok((result.trace.iterations as f64, result.value, start.elapsed().as_secs_f64()))
            })
            .collect::<Result<Vec<_>>>()?;
        let iterations: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let (mean_iterations, std_iterations) = mean_std(&iterations);
        records.push(BenchRecord {
            m,
            pairs: runs.len(),
            mean_iterations,
            std_iterations,
            mean_value: runs.iter().map(|r| r.1).sum::<f64>() / runs.len() as f64,
            mean_time_per_pair: runs.iter().map(|r| r.2).sum::<f64>() / runs.len() as f64,
            variant,
        });
    }
    Ok(IterationReport { records, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaRow {
    pub alpha: [f64; 3],
    pub mean_value: f64,
    pub mean_term_h: f64,
    pub mean_term_f: f64,
    pub mean_term_a: f64,
}

/// Points `(i, j, k) / steps` with `i + j + k = steps`.
pub fn simplex_grid(steps: usize) -> Result<Vec<[f64; 3]>> {
    if steps == 0 {
        return Err(Error::InvalidConfig("simplex grid needs at least one step".into()));
    }
    let s = steps as f64;
    Ok((0..=steps)
        .flat_map(|i| (0..=steps - i).map(move |j| [i as f64 / s, j as f64 / s, (steps - i - j) as f64 / s]))
        .collect())
}

/// Mean loss over `pairs` at every weight of the grid.
pub fn alpha_sweep(pairs: &[(ContinuousGraph, PaddedGraph)], grid: &[[f64; 3]], base: &LossConfig) -> Result<Vec<AlphaRow>> {
    if pairs.is_empty() {
        return Err(Error::InvalidConfig("alpha sweep needs at least one pair".into()));
    }
    grid.iter()
        .map(|&alpha| {
            let cfg = base.clone().with_alpha(alpha);
            let results = pairs
                .par_iter()
                .map(|(p, t)| pmfgw(p, t, &cfg))
                .collect::<Result<Vec<_>>>()?;
            let n = results.len() as f64;
            let mean = |f: fn(&crate::loss::LossResult) -> f64| results.iter().map(f).sum::<f64>() / n;
            Ok(AlphaRow {
                alpha,
                mean_value: mean(|r| r.value),
                mean_term_h: mean(|r| r.term_h),
                mean_term_f: mean(|r| r.term_f),
                mean_term_a: mean(|r| r.term_a),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub m: usize,
    /// Median seconds per iteration.
    pub factorized: f64,
    pub naive: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TimingConfig {
    pub sizes: Vec<usize>,
    pub repeats: usize,
    /// Largest size timed on the naive path.
    pub naive_limit: usize,
    pub feature_dim: usize,
    pub seed: u64,
}

impl TimingConfig {
    pub fn new(sizes: Vec<usize>) -> Self {
        Self {
            sizes,
            repeats: 15,
            naive_limit: 32,
            feature_dim: 4,
            seed: 0,
        }
    }
}

/// Random prediction and a random target with `m / 2 ..= m` real nodes.
pub fn random_instance<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<(ContinuousGraph, PaddedGraph)> {
    let mut edges = Array2::from_shape_fn((m, m), |_| rng.random::<f64>());
    for i in 0..m {
        for j in 0..i {
            edges[[i, j]] = edges[[j, i]];
        }
    }
    let pred = ContinuousGraph::new(
        Array1::from_shape_fn(m, |_| rng.random::<f64>()),
        Array2::from_shape_fn((m, d), |_| rng.random::<f64>()),
        edges,
    )?;
    let true_size = rng.random_range(m.div_ceil(2)..=m);
    let mut edge_list = Vec::new();
    for i in 0..true_size {
        for j in 0..i {
            if rng.random_bool(0.3) {
                edge_list.push((i, j));
            }
        }
    }
    let target = DiscreteGraph::from_edges(Array2::from_shape_fn((true_size, d), |_| rng.random::<f64>()), &edge_list)?;
    Ok((pred, pad(&target, m)?))
}

/// One conditional gradient iteration's worth of work at plan `t`:
/// gradient, linear assignment, and the curvature product of the line search.
pub fn iteration_work<O: QuadraticObjective + ?Sized>(obj: &O, t: &Array2<f64>) -> Result<f64> {
    let grad = obj.gradient(t);
    let (vertex, _) = hungarian(&grad)?;
    let direction = vertex.to_matrix() - t;
    let curvature = obj.tensor_apply(&direction);
    Ok(direction.iter().zip(curvature.iter()).map(|(x, y)| x * y).sum())
}

fn median_seconds(repeats: usize, mut f: impl FnMut() -> Result<f64>) -> Result<f64> {
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        std::hint::black_box(f()?);
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok(times[times.len() / 2])
}

/// Median per-iteration time on random instances, factorized and naive.
pub fn timing_experiment(cfg: &TimingConfig, loss: &LossConfig) -> Result<Vec<TimingRow>> {
    if cfg.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    cfg.sizes
        .iter()
        .map(|&m| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(m as u64));
            let (pred, target) = random_instance(m, cfg.feature_dim, &mut rng)?;
            let t = TransportPlan::random(m, &mut rng).into_matrix();
            let fast = pmfgw_objective(&pred, target.as_continuous(), loss)?;
            let factorized = median_seconds(cfg.repeats, || iteration_work(&fast, &t))?;
            let naive = if m <= cfg.naive_limit {
                let slow = pmfgw_naive_objective(&pred, target.as_continuous(), loss)?;
                Some(median_seconds(cfg.repeats, || iteration_work(&slow, &t))?)
            } else {
                None
            };
            Ok(TimingRow { m, factorized, naive })
        })
        .collect()
}

/// Comment line declaring the solver settings behind a table.
pub fn solver_comment(opts: &SolverOptions) -> String {
    format!(
        "# solver: max_iterations={} relative_tolerance={:e} init={} restarts={} seed={}",
        opts.max_iterations,
        opts.relative_tolerance,
        match opts.init {
            Init::Uniform => "uniform",
            Init::Given(_) => "given",
            Init::Random => "random",
        },
        opts.restarts,
        opts.seed
    )
}

/// Columns: `m,pairs,mean_iterations,std_iterations,mean_value,mean_time_per_pair,variant`.
pub fn write_iterations_csv<W: Write>(mut w: W, records: &[BenchRecord], opts: &SolverOptions) -> Result<()> {
    writeln!(w, "{}", solver_comment(opts))?;
    writeln!(w, "m,pairs,mean_iterations,std_iterations,mean_value,mean_time_per_pair,variant")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.m,
            r.pairs,
            r.mean_iterations,
            r.std_iterations,
            r.mean_value,
            r.mean_time_per_pair,
            r.variant.name()
        )?;
    }
    Ok(())
}

/// Columns: `alpha_h,alpha_f,alpha_a,mean_value,mean_term_h,mean_term_f,mean_term_a`.
pub fn write_alpha_csv<W: Write>(mut w: W, rows: &[AlphaRow], opts: &SolverOptions) -> Result<()> {
    writeln!(w, "{}", solver_comment(opts))?;
    writeln!(w, "alpha_h,alpha_f,alpha_a,mean_value,mean_term_h,mean_term_f,mean_term_a")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.alpha[0], r.alpha[1], r.alpha[2], r.mean_value, r.mean_term_h, r.mean_term_f, r.mean_term_a
        )?;
    }
    Ok(())
}

/// Columns: `m,factorized_seconds,naive_seconds` (empty when not timed).
pub fn write_timing_csv<W: Write>(mut w: W, rows: &[TimingRow], opts: &SolverOptions) -> Result<()> {
    writeln!(w, "{}", solver_comment(opts))?;
    writeln!(w, "m,factorized_seconds,naive_seconds")?;
    for r in rows {
        let naive = r.naive.map(|x| x.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{}", r.m, r.factorized, naive)?;
    }
    Ok(())
}

/// Graphs of a dataset converted to prediction/target pairs: consecutive
/// records `(2k, 2k + 1)`, the target padded to the prediction's size.
pub fn pairs_from_graphs(preds: Vec<ContinuousGraph>, targets: Vec<DiscreteGraph>) -> Result<Vec<(ContinuousGraph, PaddedGraph)>> {
    preds
        .into_iter()
        .zip(targets)
        .map(|(p, t)| {
            let padded = pad(&t, p.size())?;
            Ok((p, padded))
        })
        .collect()
}
