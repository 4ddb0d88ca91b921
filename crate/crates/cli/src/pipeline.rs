//! The pipeline stages behind each subcommand.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use molinfer::chemgraph::{ChemicalGraph, ElementTable};
use molinfer::descriptors::{graph_code, DescriptorRegistry, Normalizer};
use molinfer::encode::{build_inverse, InverseInstance, TargetInterval, TopologySpec};
use molinfer::gridsearch::{grid_search, GridGeometry, GridOptions, ProjectionSet};
use molinfer::milp::{MilpSolver, SolveStatus, SolverConfig};
use molinfer::regression::{
    cross_validate, r_squared_values, train_lasso, train_mlp, Dataset, LinearModel, ModelFile, PredictionModel,
    Predictor, RegressionError, TrainConfig,
};

use crate::config::{ModelKind, PipelineConfig, ProjectionSource};
use crate::run::RunDir;

pub const REGISTRY: &str = "registry.txt";
pub const FEATURES: &str = "features.csv";
pub const MODEL: &str = "model.txt";
pub const RANGES: &str = "ranges.csv";
pub const SEED_GRAPH: &str = "seed.graph";
pub const SEED_FEATURES: &str = "seed_features.csv";

/// How a command ended when it did not fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// The solver proved that no graph meets the topological specification.
    Infeasible,
}

const INFEASIBLE_MESSAGE: &str = "the MILP is infeasible: no chemical graph satisfies the topological \
                                  specification with a predicted value in the target interval";

fn element_table(cfg: &PipelineConfig) -> Result<ElementTable> {
    match &cfg.data.elements {
        Some(p) => {
            let path = cfg.resolve(p);
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            ElementTable::parse(&text).with_context(|| format!("in {}", path.display()))
        }
        None => Ok(ElementTable::default()),
    }
}

fn solver(cfg: &PipelineConfig) -> Result<SolverConfig> {
    let s = match &cfg.solver.path {
        Some(p) => SolverConfig::for_executable(cfg.resolve(p)),
        None => SolverConfig::discover()?,
    };
    Ok(s.with_time_limit(cfg.solver.time_limit))
}

fn fmt_row(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// `id,value` rows of the targets file with their graphs.
fn load_dataset(cfg: &PipelineConfig, table: &ElementTable) -> Result<Vec<(String, ChemicalGraph, f64)>> {
    let path = cfg.resolve(&cfg.data.targets);
    let mut reader = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
    let dir = cfg.resolve(&cfg.data.graphs);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{} row {}", path.display(), i + 2))?;
        let (Some(id), Some(value)) = (rec.get(0), rec.get(1)) else {
            bail!("{} row {}: expected `id,value`", path.display(), i + 2);
        };
        let id = id.trim().to_string();
        let y: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("{} row {}: bad value `{value}`", path.display(), i + 2))?;
        let file = dir.join(format!("{id}.graph"));
        let parsed = fs::read_to_string(&file)
            .map_err(anyhow::Error::from)
            .and_then(|text| Ok(ChemicalGraph::parse(&text, table)?));
        match parsed {
            Ok(g) => rows.push((id, g, y)),
            Err(e) => errors.push(format!("  {id}: {e}")),
        }
    }
    if !errors.is_empty() {
        bail!("{} invalid graph(s):\n{}", errors.len(), errors.join("\n"));
    }
    ensure!(!rows.is_empty(), "{} lists no graphs", path.display());
    Ok(rows)
}

fn load_registry(run: &RunDir, table: &ElementTable) -> Result<DescriptorRegistry> {
    Ok(DescriptorRegistry::parse(&run.read(REGISTRY)?, table)?)
}

/// Reads `id,<descriptor ids...>,target` rows.
fn load_features(run: &RunDir, reg: &DescriptorRegistry) -> Result<(Vec<String>, Vec<Vec<f64>>, Vec<f64>)> {
    let text = run.read(FEATURES)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let k = reg.len();
    ensure!(
        header.len() == k + 2 && header[1..=k] == reg.ids()[..],
        "{FEATURES} does not match {REGISTRY}; rerun featurize"
    );
    let (mut ids, mut xs, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    for rec in reader.records() {
        let rec = rec?;
        ids.push(rec[0].to_string());
        let values = rec.iter().skip(1).map(str::parse::<f64>).collect::<Result<Vec<_>, _>>()?;
        ys.push(values[k]);
        xs.push(values[..k].to_vec());
    }
    Ok((ids, xs, ys))
}

fn load_ranges(run: &RunDir, reg: &DescriptorRegistry) -> Result<Vec<(f64, f64)>> {
    let text = run.read(RANGES)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut ranges = Vec::new();
    for (rec, id) in reader.records().zip(reg.ids()) {
        let rec = rec?;
        ensure!(rec[0] == id, "{RANGES} does not match {REGISTRY}");
        ranges.push((rec[1].parse()?, rec[2].parse()?));
    }
    ensure!(ranges.len() == reg.len(), "{RANGES} has {} rows, expected {}", ranges.len(), reg.len());
    Ok(ranges)
}

fn load_model(run: &RunDir, reg: &DescriptorRegistry) -> Result<ModelFile> {
    Ok(ModelFile::parse(&run.read(MODEL)?, |id| reg.index_of_id(id))?)
}

/// Prediction in raw target units for a raw feature vector.
fn predict_raw(model: &ModelFile, ranges: &[(f64, f64)], x: &[f64]) -> Result<f64> {
    let mut ranges = ranges.to_vec();
    for (&j, &r) in model.model.selected().iter().zip(&model.x_ranges) {
        ranges[j] = r;
    }
    let norm = Normalizer::from_ranges(ranges).transform(x)?;
    Ok(model.unscale_y(model.model.predict(&norm)?))
}

pub fn featurize(cfg: &PipelineConfig) -> Result<Outcome> {
    let table = element_table(cfg)?;
    let data = load_dataset(cfg, &table)?;
    let graphs: Vec<ChemicalGraph> = data.iter().map(|(_, g, _)| g.clone()).collect();
    let reg = DescriptorRegistry::build(&graphs, cfg.data.rho, &table)?;
    let mut out = format!("id,{},target\n", reg.ids().join(","));
    let mut errors = Vec::new();
    for (id, g, y) in &data {
        match reg.featurize(g, cfg.data.rho) {
            Ok(x) => writeln!(out, "{id},{},{y}", fmt_row(&x)).unwrap(),
            Err(e) => errors.push(format!("  {id}: {e}")),
        }
    }
    if !errors.is_empty() {
        bail!("{} graph(s) could not be featurized:\n{}", errors.len(), errors.join("\n"));
    }
    let summary = format!(
        "graphs = {}\nedge_configurations = {}\nfringe_classes = {}\nK = {}\n",
        data.len(),
        reg.edge_configuration_count(),
        reg.fringe_class_count(),
        reg.len()
    );
    let mut run = RunDir::open(&cfg.run_dir())?;
    run.write(REGISTRY, reg.to_text())?;
    run.write(FEATURES, out)?;
    run.write("featurize_summary.txt", &summary)?;
    println!(
        "featurized {} graphs: |Γ| = {}, |F| = {}, K = {}",
        data.len(),
        reg.edge_configuration_count(),
        reg.fringe_class_count(),
        reg.len()
    );
    Ok(Outcome::Done)
}

pub fn train(cfg: &PipelineConfig) -> Result<Outcome> {
    let table = element_table(cfg)?;
    let mut run = RunDir::open(&cfg.run_dir())?;
    let reg = load_registry(&run, &table)?;
    let (_, raw, y_raw) = load_features(&run, &reg)?;
    let norm = Normalizer::fit(&raw)?;
    let x = raw.iter().map(|r| norm.transform(r)).collect::<Result<Vec<_>, _>>()?;
    let y_range = y_raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    ensure!(y_range.1 > y_range.0, "all target values are equal");
    let y: Vec<f64> = y_raw.iter().map(|v| (v - y_range.0) / (y_range.1 - y_range.0)).collect();
    let data = Dataset::new(x, y)?;
    // constant columns carry no information
    let informative: Vec<usize> = (0..reg.len()).filter(|&j| norm.ranges()[j].1 > norm.ranges()[j].0).collect();
    ensure!(!informative.is_empty(), "every descriptor is constant over the dataset");
    let t = &cfg.train;

    let fit = |d: &Dataset, seed: u64| -> Result<PredictionModel, RegressionError> {
        let mut tc = t.train_config(seed);
        let mut selected = informative.clone();
        if t.select_lambda > 0.0 && t.model == ModelKind::Mlp {
            let screen = TrainConfig {
                lambda: t.select_lambda,
                ..tc.clone()
            };
            let lasso = train_lasso(&d.select_columns(&informative), &screen)?;
            if !lasso.selected.is_empty() {
                selected = lasso.selected.iter().map(|&c| informative[c]).collect();
            }
        }
        match t.model {
            ModelKind::Mlp => {
                let mut arch = vec![selected.len()];
                arch.extend(&t.hidden);
                arch.push(1);
                train_mlp(d, &selected, &arch, &tc).map(|(m, _)| PredictionModel::Mlp(m))
            }
            ModelKind::Linear => {
                tc.lambda = t.lambda;
                let m = train_lasso(&d.select_columns(&selected), &tc)?;
                let cols = m.selected.iter().map(|&c| selected[c]).collect();
                Ok(PredictionModel::Linear(LinearModel::new(cols, m.weights, m.bias)?))
            }
        }
    };
    let report = cross_validate(&data, t.folds, t.repeats, cfg.seed, fit)?;
    let model = fit(&data, cfg.seed)?;
    let predicted = data.x().iter().map(|r| model.predict(r)).collect::<Result<Vec<_>, _>>()?;
    let train_r2 = r_squared_values(data.y(), &predicted)?;

    let ids = reg.ids();
    let file = ModelFile {
        ids: model.selected().iter().map(|&j| ids[j].clone()).collect(),
        x_ranges: model.selected().iter().map(|&j| norm.ranges()[j]).collect(),
        y_range,
        model,
    };
    let mut ranges = String::from("id,min,max\n");
    for (id, (lo, hi)) in ids.iter().zip(norm.ranges()) {
        writeln!(ranges, "{id},{lo},{hi}").unwrap();
    }
    let mut text = format!(
        "model = {:?}\nfolds = {}\nrepeats = {}\nmedian_test_r2 = {}\ntrain_r2 = {train_r2}\nscores =",
        t.model, report.folds, report.repeats, report.median
    );
    for s in &report.scores {
        write!(text, " {s}").unwrap();
    }
    text.push('\n');
    run.write(MODEL, file.to_text())?;
    run.write(RANGES, ranges)?;
    run.write("cv_report.txt", text)?;
    println!(
        "trained {:?} on {} descriptors: median test R² {:.4} over {} trials, train R² {:.4}",
        t.model,
        file.ids.len(),
        report.median,
        report.scores.len(),
        train_r2
    );
    Ok(Outcome::Done)
}

struct Inverse {
    table: ElementTable,
    reg: DescriptorRegistry,
    model: ModelFile,
    ranges: Vec<(f64, f64)>,
    target: TargetInterval,
    instance: InverseInstance,
}

fn inverse(cfg: &PipelineConfig, run: &RunDir) -> Result<Inverse> {
    let inf = cfg.infer()?;
    let table = element_table(cfg)?;
    let reg = load_registry(run, &table)?;
    let model = load_model(run, &reg)?;
    let ranges = load_ranges(run, &reg)?;
    let spec_path = cfg.resolve(&inf.spec);
    let spec = TopologySpec::parse(&fs::read_to_string(&spec_path)?, &table)
        .with_context(|| format!("in {}", spec_path.display()))?;
    let target = TargetInterval::new(inf.y_lower, inf.y_upper)?;
    let instance = build_inverse(&reg, &table, &spec, &model, &ranges, &target)?;
    Ok(Inverse {
        table,
        reg,
        model,
        ranges,
        target,
        instance,
    })
}

/// Re-featurizes a decoded graph and checks it against the solver's
/// values; returns the raw feature vector and its prediction.
fn check_decoded(inv: &Inverse, g: &ChemicalGraph, values: &[f64]) -> Result<(Vec<f64>, f64)> {
    let x = inv.reg.featurize(g, inv.reg.rho())?;
    for (j, d) in inv.reg.descriptors().iter().enumerate() {
        let assigned = values[inv.instance.graph.x[j].0];
        let ok = if d.is_count() {
            x[j] == assigned
        } else {
            (x[j] - assigned).abs() <= 1e-6
        };
        ensure!(ok, "decoded graph has {d} = {}, the MILP assigned {assigned}", x[j]);
    }
    let y = predict_raw(&inv.model, &inv.ranges, &x)?;
    ensure!(
        inv.target.contains(y, 1e-6),
        "decoded graph predicts {y}, outside [{}, {}]",
        inv.target.y_lower,
        inv.target.y_upper
    );
    Ok((x, y))
}

pub fn infer(cfg: &PipelineConfig) -> Result<Outcome> {
    let mut run = RunDir::open(&cfg.run_dir())?;
    let inv = inverse(cfg, &run)?;
    let s = solver(cfg)?;
    let r = s.solve(&inv.instance.model)?;
    match &r.status {
        SolveStatus::Infeasible => {
            run.write("infer_report.txt", "status = infeasible\n")?;
            println!("{INFEASIBLE_MESSAGE}");
            return Ok(Outcome::Infeasible);
        }
        SolveStatus::Timeout => bail!("time limit reached before a feasible graph was found"),
        SolveStatus::SolverError(e) => bail!("solver failed: {e}"),
        SolveStatus::Optimal | SolveStatus::Feasible => {}
    }
    let g = inv.instance.graph.decode(&r.values)?;
    let (x, y) = check_decoded(&inv, &g, &r.values)?;
    let y_milp = r.values[inv.instance.y.0];
    run.write(SEED_GRAPH, g.to_text())?;
    run.write(SEED_FEATURES, format!("{}\n{}\n", inv.reg.ids().join(","), fmt_row(&x)))?;
    run.write(
        "infer_report.txt",
        format!(
            "status = feasible\natoms = {}\ny_milp = {y_milp}\ny_forward = {y}\ncode = {}\n",
            g.atom_count(),
            graph_code(&g).unwrap_or_default()
        ),
    )?;
    println!(
        "inferred a graph with {} atoms, predicted value {y:.6} (seconds: {:.2})",
        g.atom_count(),
        r.seconds
    );
    Ok(Outcome::Done)
}

/// Projection over raw descriptor values. A linear model file is composed
/// with its feature normalization and target unscaling, so the axis is in
/// the model's target units.
fn projection_row(
    src: &ProjectionSource,
    cfg: &PipelineConfig,
    reg: &DescriptorRegistry,
) -> Result<Vec<f64>> {
    let k = reg.len();
    let mut w = vec![0.0; k + 1];
    w[k] = src.constant;
    if let Some(path) = &src.model {
        let path = cfg.resolve(path);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mf = ModelFile::parse(&text, |id| reg.index_of_id(id)).with_context(|| format!("in {}", path.display()))?;
        let PredictionModel::Linear(lin) = &mf.model else {
            bail!("{} is not a linear model", path.display());
        };
        let scale = mf.y_range.1 - mf.y_range.0;
        w[k] += mf.y_range.0 + scale * lin.bias;
        for ((&j, &c), &(lo, hi)) in lin.selected.iter().zip(&lin.weights).zip(&mf.x_ranges) {
            if hi > lo {
                w[j] += scale * c / (hi - lo);
                w[k] -= scale * c * lo / (hi - lo);
            }
        }
    }
    for (id, &c) in &src.weights {
        let j = reg
            .index_of_id(id)
            .ok_or_else(|| anyhow!("projection weight on unknown descriptor `{id}`"))?;
        w[j] += c;
    }
    Ok(w)
}

fn grid_file(z: &[i64]) -> String {
    let parts: Vec<String> = z.iter().map(i64::to_string).collect();
    format!("witnesses/grid_{}.graph", parts.join("_"))
}

pub fn grid(cfg: &PipelineConfig) -> Result<Outcome> {
    let gs = cfg.grid()?;
    let mut run = RunDir::open(&cfg.run_dir())?;
    if !run.path(SEED_FEATURES).exists() && infer(cfg)? == Outcome::Infeasible {
        return Ok(Outcome::Infeasible);
    }
    let inv = inverse(cfg, &run)?;
    let seed_text = run.read(SEED_FEATURES)?;
    let seed_x = seed_text
        .lines()
        .nth(1)
        .context("empty seed feature file")?
        .split(',')
        .map(str::parse::<f64>)
        .collect::<Result<Vec<_>, _>>()?;
    let seed_graph = ChemicalGraph::parse(&run.read(SEED_GRAPH)?, &inv.table)?;
    let seed_code = graph_code(&seed_graph);

    let rows = gs
        .projection
        .iter()
        .map(|src| projection_row(src, cfg, &inv.reg))
        .collect::<Result<Vec<_>>>()?;
    let ps = ProjectionSet::new(rows)?;
    let geo = GridGeometry::around_seed(&ps, &seed_x, gs.widths.clone(), gs.radius.clone())?;
    let s = solver(cfg)?;
    let opts = GridOptions {
        prune: gs.prune,
        threads: gs.threads,
    };
    let result = grid_search(&inv.instance.model, &inv.instance.graph.x, &ps, &geo, &s, opts)?;

    run.clear("witnesses/")?;
    let mut listing = String::from("witness,grid,file,predicted,code,distinct_from_seed\n");
    let mut distinct = std::collections::BTreeSet::new();
    for (i, w) in result.witnesses.iter().enumerate() {
        let g = inv.instance.graph.decode(&w.values)?;
        let (_, y) = check_decoded(&inv, &g, &w.values)?;
        let code = graph_code(&g);
        let fresh = code.is_some() && code != seed_code;
        if fresh {
            distinct.insert(code.clone());
        }
        let file = grid_file(&w.z);
        run.write(&file, g.to_text())?;
        let z: Vec<String> = w.z.iter().map(i64::to_string).collect();
        writeln!(
            listing,
            "{i},{},{file},{y},{},{fresh}",
            z.join(";"),
            code.unwrap_or_default()
        )
        .unwrap();
    }
    let count = |label: &str| result.grids_with(label).len();
    let summary = format!(
        "grids = {}\nfeasible = {}\ninfeasible = {}\npruned = {}\ntimeout = {}\nfailed = {}\ndistinct_new_graphs = {}\n",
        result.records.len(),
        count("feasible"),
        count("infeasible"),
        count("pruned"),
        count("timeout"),
        count("failed"),
        distinct.len()
    );
    run.write("grid_report.csv", result.to_csv())?;
    run.write("witnesses.csv", listing)?;
    run.write("grid_summary.txt", &summary)?;
    println!(
        "grid search over {} grids: {} feasible, {} infeasible, {} pruned, {} timeout; {} new graph(s)",
        result.records.len(),
        count("feasible"),
        count("infeasible"),
        count("pruned"),
        count("timeout"),
        distinct.len()
    );
    Ok(Outcome::Done)
}

/// Predicts the given graph files, or the whole dataset with its R² when
/// none are given.
pub fn eval(cfg: &PipelineConfig, graphs: &[PathBuf]) -> Result<Outcome> {
    let table = element_table(cfg)?;
    let mut run = RunDir::open(&cfg.run_dir())?;
    let reg = load_registry(&run, &table)?;
    let model = load_model(&run, &reg)?;
    let ranges = load_ranges(&run, &reg)?;
    let predict = |g: &ChemicalGraph| -> Result<f64> { predict_raw(&model, &ranges, &reg.featurize(g, reg.rho())?) };
    if graphs.is_empty() {
        let data = load_dataset(cfg, &table)?;
        let mut out = String::from("id,target,predicted\n");
        let (mut observed, mut predicted) = (Vec::new(), Vec::new());
        for (id, g, y) in &data {
            let p = predict(g).with_context(|| format!("graph {id}"))?;
            writeln!(out, "{id},{y},{p}").unwrap();
            observed.push(*y);
            predicted.push(p);
        }
        let r2 = r_squared_values(&observed, &predicted)?;
        run.write("predictions.csv", out)?;
        run.write("eval_report.txt", format!("graphs = {}\nr2 = {r2}\n", data.len()))?;
        println!("R² on {} dataset graphs: {r2:.6}", data.len());
    } else {
        println!("file,predicted");
        for path in graphs {
            let g = read_graph(path, &table)?;
            println!("{},{}", path.display(), predict(&g).with_context(|| path.display().to_string())?);
        }
    }
    Ok(Outcome::Done)
}

fn read_graph(path: &Path, table: &ElementTable) -> Result<ChemicalGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ChemicalGraph::parse(&text, table).with_context(|| format!("in {}", path.display()))
}
