use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use negfuse_core::data::standardize_with;
use negfuse_core::evaluation::{self, SimSettings};
use negfuse_core::{
    auto_grid_search, difference_sigma2, grid_search, Error, FusionGraph, GridRow,
    GridSearchResult, Model, PipelineConfig, RegressionData, Scaling,
};
use serde_json::json;

use crate::args::{Cli, Command, DenoiseArgs, FitArgs, FlsaArgs, GridArgs, SimulateArgs};
use crate::config::{self, Defaults, FileConfig, GraphSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{self, num, opt_num};
use crate::manifest;
use crate::svg;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(a) => fit(a, false),
        Command::Gridsearch(a) => fit(a, true),
        Command::Flsa(a) => flsa(a),
        Command::Denoise2d(a) => denoise2d(a),
        Command::Simulate(a) => simulate(a),
    }
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn prepare_out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))
}

struct Selection {
    lambda_max: Option<f64>,
    points: usize,
    search: GridSearchResult,
}

/// Grid search with either fixed or automatically laid out `lambda1`.
/// `ebic_sigma2` overrides the per-point noise variance in EBIC.
fn select(
    data: &RegressionData,
    graph: &FusionGraph,
    cfg: &RunConfig,
    ebic_sigma2: Option<f64>,
) -> CliResult<Selection> {
    let model = model_of(cfg);
    let pipeline = PipelineConfig {
        chain: cfg.chain_settings(),
        point: cfg.point,
        ebic_sigma2,
    };
    let selection = match cfg.grid.fixed()? {
        Some(grid) => Selection {
            lambda_max: None,
            points: grid.points(model).len(),
            search: grid_search(data, graph, model, &grid, &pipeline, cfg.seed)?,
        },
        None => {
            let r = auto_grid_search(data, graph, model, &cfg.grid.spec(), &pipeline, cfg.seed)?;
            Selection {
                lambda_max: Some(r.lambda_max),
                points: r.grid.points(model).len(),
                search: r.search,
            }
        }
    };
    for (hp, e) in &selection.search.failures {
        eprintln!(
            "warning: grid point lambda1={} lambda2={} gamma2={} failed: {e}",
            hp.lambda1,
            opt_num(hp.lambda2),
            opt_num(hp.gamma2)
        );
    }
    Ok(selection)
}

fn model_of(cfg: &RunConfig) -> Model {
    cfg.model.unwrap_or(Model::NegFused)
}

fn score_rows(table: &[GridRow]) -> Vec<Vec<String>> {
    table
        .iter()
        .map(|r| {
            vec![
                num(r.hp.lambda1),
                opt_num(r.hp.lambda2),
                opt_num(r.hp.gamma2),
                num(r.score.loglik),
                r.score.df.to_string(),
                r.score.p_g.to_string(),
                num(r.score.value),
            ]
        })
        .collect()
}

const SCORE_HEADER: [&str; 7] = [
    "lambda1", "lambda2", "gamma2", "loglik", "df", "p_g", "ebic",
];

fn selection_json(sel: &Selection, model: Model) -> serde_json::Value {
    let best = &sel.search.best;
    json!({
        "model": model.as_str(),
        "lambda_max": sel.lambda_max,
        "grid_points": sel.points,
        "failed_points": sel.search.failures.len(),
        "selected": {
            "lambda1": best.hp.lambda1,
            "lambda2": best.hp.lambda2,
            "gamma2": best.hp.gamma2,
        },
        "ebic": best.score.value,
        "loglik": best.score.loglik,
        "df": best.score.df,
        "p_g": best.score.p_g,
        "sigma2_hat": best.sigma2_hat,
        "sfa_sweeps": best.fit.sweeps,
        "sfa_truncated": best.fit.truncated,
    })
}

/// Block numbers in order of first appearance; 0 marks zeroed coefficients.
fn block_numbers(labels: &[usize]) -> Vec<usize> {
    let mut seen = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            if l == 0 {
                0
            } else {
                let next = seen.len() + 1;
                *seen.entry(l).or_insert(next)
            }
        })
        .collect()
}

/// Block sizes, zero blocks excluded.
fn block_sizes(blocks: &[usize]) -> Vec<usize> {
    let count = blocks.iter().copied().max().unwrap_or(0);
    let mut sizes = vec![0; count];
    for &b in blocks.iter().filter(|&&b| b > 0) {
        sizes[b - 1] += 1;
    }
    sizes
}

fn fit(args: FitArgs, require_grid: bool) -> CliResult<()> {
    let file = FileConfig::load(args.shared.config.as_deref())?;
    let name = if require_grid { "gridsearch" } else { "fit" };
    let mut cfg = config::resolve(
        name,
        Defaults::fit(),
        &args.shared,
        &args.grid,
        &file,
        args.model,
    )?;
    cfg.graph = Some(match &args.graph {
        Some(s) => s.parse()?,
        None => file.graph.clone().unwrap_or(GraphSpec::Chain),
    });
    cfg.scaling = Some(args.scaling.or(file.scaling).unwrap_or(Scaling::Pooled));
    cfg.response = Some(
        args.response
            .clone()
            .or_else(|| file.response.clone())
            .unwrap_or_else(|| "y".into()),
    );
    cfg.input = args.input.clone().or_else(|| file.input.clone());
    if require_grid {
        require_axes(&args.grid, &file, model_of(&cfg))?;
    }
    let input = cfg.input()?.to_path_buf();
    init_threads(cfg.threads);

    let table = io::read_table(&input)?;
    let response = cfg.response.as_deref().unwrap_or("y");
    let (y, x, names) = io::regression_table(&table, response, &input)?;
    let scaling = cfg.scaling.unwrap_or_default();
    let (data, transform) = standardize_with(&y, &x, scaling).map_err(|e| match e {
        Error::ZeroVarianceColumn { column } => CliError::Data(format!(
            "{}: column '{}' is constant",
            input.display(),
            names[column]
        )),
        other => CliError::Data(format!("{}: {other}", input.display())),
    })?;
    let graph = cfg
        .graph
        .as_ref()
        .unwrap_or(&GraphSpec::Chain)
        .build(data.p())?;
    let sel = select(&data, &graph, &cfg, None)?;
    let best = &sel.search.best;

    let estimate = transform.coefficients_to_raw(&best.fit.beta_hat);
    let mean = transform.coefficients_to_raw(&best.posterior_mean);
    let blocks = block_numbers(&best.fit.assignment.labels);
    let rows: Vec<Vec<String>> = (0..data.p())
        .map(|j| {
            vec![
                (j + 1).to_string(),
                names[j].clone(),
                blocks[j].to_string(),
                num(mean[j]),
                num(estimate[j]),
            ]
        })
        .collect();
    prepare_out_dir(&cfg.out_dir)?;
    io::write_csv(
        &cfg.out_dir.join("estimates.csv"),
        &["index", "name", "block", "posterior_mean", "estimate"],
        &rows,
    )?;
    io::write_csv(
        &cfg.out_dir.join("scores.csv"),
        &SCORE_HEADER,
        &score_rows(&sel.search.table),
    )?;
    let mut result = selection_json(&sel, model_of(&cfg));
    result["n"] = json!(data.n());
    result["p"] = json!(data.p());
    result["intercept"] = json!(transform.intercept(&best.fit.beta_hat));
    result["blocks"] = json!(block_sizes(&blocks).len());
    manifest::write(&cfg.out_dir, &cfg, &["estimates.csv", "scores.csv"], result)
}

/// `gridsearch` takes no automatic axes.
fn require_axes(grid: &GridArgs, file: &FileConfig, model: Model) -> CliResult<()> {
    let missing = |flag: &str| {
        CliError::Usage(format!(
            "gridsearch needs an explicit --{flag} axis (flag or config file)"
        ))
    };
    if grid.lambda1.is_none() && file.lambda1.is_none() {
        return Err(missing("lambda1"));
    }
    if model.uses_lambda2() && grid.lambda2.is_none() && file.lambda2.is_none() {
        return Err(missing("lambda2"));
    }
    if model.uses_gamma2() && grid.gamma2.is_none() && file.gamma2.is_none() {
        return Err(missing("gamma2"));
    }
    Ok(())
}

fn fused_model(cfg: &RunConfig) -> CliResult<Model> {
    let model = model_of(cfg);
    if !model.uses_edges() {
        return Err(CliError::Usage(format!(
            "{} needs a fused model (fused or neg_fused), got {model}",
            cfg.command
        )));
    }
    Ok(model)
}

fn flsa(args: FlsaArgs) -> CliResult<()> {
    let file = FileConfig::load(args.shared.config.as_deref())?;
    let mut cfg = config::resolve(
        "flsa",
        Defaults::flsa(),
        &args.shared,
        &args.grid,
        &file,
        args.model,
    )?;
    fused_model(&cfg)?;
    cfg.graph = Some(GraphSpec::Chain);
    cfg.column = args.column.clone().or_else(|| file.column.clone());
    cfg.input = args.input.clone().or_else(|| file.input.clone());
    let input = cfg.input()?.to_path_buf();
    init_threads(cfg.threads);

    let series = io::read_series(&input, cfg.column.as_deref())?;
    let data = RegressionData::identity(Array1::from(series.clone()))
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let graph = FusionGraph::chain(series.len());
    let noise = difference_sigma2(&series, &graph);
    let sel = select(&data, &graph, &cfg, noise)?;
    let best = &sel.search.best;
    let fitted = &best.fit.beta_hat;
    let blocks = run_blocks(fitted);

    let rows: Vec<Vec<String>> = (0..series.len())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                num(series[i]),
                num(fitted[i]),
                blocks[i].to_string(),
            ]
        })
        .collect();
    prepare_out_dir(&cfg.out_dir)?;
    io::write_csv(
        &cfg.out_dir.join("fitted.csv"),
        &["index", "y", "fitted", "block"],
        &rows,
    )?;
    io::write_csv(
        &cfg.out_dir.join("scores.csv"),
        &SCORE_HEADER,
        &score_rows(&sel.search.table),
    )?;
    io::write_text(
        &cfg.out_dir.join("fitted.svg"),
        &svg::series_overlay(&series, fitted),
    )?;
    let segments = blocks.last().copied().unwrap_or(0);
    let singletons = (1..=segments)
        .filter(|&b| blocks.iter().filter(|&&x| x == b).count() == 1)
        .count();
    let mut result = selection_json(&sel, model_of(&cfg));
    result["ebic_sigma2"] = json!(noise);
    result["segments"] = json!(segments);
    result["singleton_segments"] = json!(singletons);
    manifest::write(
        &cfg.out_dir,
        &cfg,
        &["fitted.csv", "scores.csv", "fitted.svg"],
        result,
    )
}

/// Maximal runs of equal fitted values, numbered from 1.
fn run_blocks(fitted: &[f64]) -> Vec<usize> {
    let mut out = Vec::with_capacity(fitted.len());
    let mut b = 0;
    for (i, v) in fitted.iter().enumerate() {
        if i == 0 || *v != fitted[i - 1] {
            b += 1;
        }
        out.push(b);
    }
    out
}

fn squared_error(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn denoise2d(args: DenoiseArgs) -> CliResult<()> {
    let file = FileConfig::load(args.shared.config.as_deref())?;
    let mut cfg = config::resolve(
        "denoise2d",
        Defaults::denoise(),
        &args.shared,
        &args.grid,
        &file,
        args.model,
    )?;
    fused_model(&cfg)?;
    cfg.input = args.input.clone().or_else(|| file.input.clone());
    cfg.truth = args.truth.clone().or_else(|| file.truth.clone());
    let input = cfg.input()?.to_path_buf();
    init_threads(cfg.threads);

    let noisy = io::read_matrix(&input)?;
    let truth = cfg.truth.as_deref().map(io::read_matrix).transpose()?;
    if let Some(t) = &truth {
        if t.dim() != noisy.dim() {
            return Err(CliError::Data(format!(
                "dimension error: truth is {}x{} but the input is {}x{}",
                t.nrows(),
                t.ncols(),
                noisy.nrows(),
                noisy.ncols()
            )));
        }
    }
    let (rows, cols) = noisy.dim();
    cfg.graph = Some(GraphSpec::Grid { rows, cols });
    let pixels: Vec<f64> = noisy.iter().copied().collect();
    let graph = FusionGraph::grid(rows, cols);
    let noise = difference_sigma2(&pixels, &graph);
    let data = RegressionData::identity(Array1::from(pixels))
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let sel = select(&data, &graph, &cfg, noise)?;
    let beta = &sel.search.best.fit.beta_hat;
    let denoised = Array2::from_shape_fn((rows, cols), |(i, j)| beta[i * cols + j]);

    prepare_out_dir(&cfg.out_dir)?;
    let header: Vec<String> = (1..=cols).map(|j| format!("c{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let matrix_rows: Vec<Vec<String>> = denoised
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|&v| num(v)).collect())
        .collect();
    io::write_csv(&cfg.out_dir.join("denoised.csv"), &header, &matrix_rows)?;
    io::write_csv(
        &cfg.out_dir.join("scores.csv"),
        &SCORE_HEADER,
        &score_rows(&sel.search.table),
    )?;
    let mut outputs = vec!["denoised.csv", "scores.csv"];
    let mut result = selection_json(&sel, model_of(&cfg));
    result["ebic_sigma2"] = json!(noise);
    result["rows"] = json!(rows);
    result["cols"] = json!(cols);
    if let Some(t) = &truth {
        let noisy_se = squared_error(&noisy, t);
        let denoised_se = squared_error(&denoised, t);
        // undefined when the input is already noise free
        let ratio = (noisy_se > 0.0).then(|| denoised_se / noisy_se);
        io::write_csv(
            &cfg.out_dir.join("report.csv"),
            &["metric", "value"],
            &[
                vec!["noisy_squared_error".into(), num(noisy_se)],
                vec!["denoised_squared_error".into(), num(denoised_se)],
                vec!["ratio".into(), opt_num(ratio)],
            ],
        )?;
        outputs.push("report.csv");
        result["noisy_squared_error"] = json!(noisy_se);
        result["denoised_squared_error"] = json!(denoised_se);
    }
    manifest::write(&cfg.out_dir, &cfg, &outputs, result)
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let file = FileConfig::load(args.shared.config.as_deref())?;
    let mut cfg = config::resolve(
        "simulate",
        Defaults::simulate(),
        &args.shared,
        &args.grid,
        &file,
        None,
    )?;
    cfg.model = None;
    if cfg.grid.lambda1.is_some() {
        return Err(CliError::Usage(
            "simulate lays out lambda1 per replication; use --lambda1-count and --lambda1-min"
                .into(),
        ));
    }
    let case = args
        .case
        .or(file.case)
        .ok_or_else(|| CliError::Usage("simulate needs --case (1, 2 or 3)".into()))?;
    if !(1..=3).contains(&case) {
        return Err(CliError::Usage(format!(
            "unknown case {case} (expected 1, 2 or 3)"
        )));
    }
    let replications = args.replications.or(file.replications).unwrap_or(20);
    if replications == 0 {
        return Err(CliError::Usage("--replications must be positive".into()));
    }
    let methods = args
        .methods
        .clone()
        .or_else(|| file.methods.clone())
        .unwrap_or_else(|| vec![Model::Lasso, Model::Fused, Model::NegFused]);
    if methods.is_empty() {
        return Err(CliError::Usage("--methods is empty".into()));
    }
    cfg.case = Some(case);
    cfg.replications = Some(replications);
    cfg.methods = Some(methods.clone());
    init_threads(cfg.threads);

    let settings = SimSettings {
        replications,
        pipeline: PipelineConfig {
            chain: cfg.chain_settings(),
            point: cfg.point,
            ebic_sigma2: None,
        },
        grid: cfg.grid.spec(),
    };
    let rows = evaluation::simulate(case, &methods, &settings, cfg.seed)?;
    let summary = evaluation::summarize(&rows);

    prepare_out_dir(&cfg.out_dir)?;
    let rep_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                (r.replication + 1).to_string(),
                r.method.to_string(),
                opt_num(r.report.p_z),
                opt_num(r.report.p_nz),
                opt_num(r.report.p_b),
                num(r.report.mse),
                opt_num(r.report.pse),
            ]
        })
        .collect();
    io::write_csv(
        &cfg.out_dir.join("replications.csv"),
        &["replication", "method", "p_z", "p_nz", "p_b", "mse", "pse"],
        &rep_rows,
    )?;
    let summary_rows: Vec<Vec<String>> = summary
        .iter()
        .map(|s| {
            vec![
                s.method.to_string(),
                num(s.mse.mean),
                opt_num(s.mse.sd),
                opt_num(s.pse.map(|p| p.mean)),
                opt_num(s.pse.and_then(|p| p.sd)),
                opt_num(s.p_z),
                opt_num(s.p_nz),
                opt_num(s.p_b),
            ]
        })
        .collect();
    io::write_csv(
        &cfg.out_dir.join("summary.csv"),
        &[
            "method", "mse_mean", "mse_sd", "pse_mean", "pse_sd", "p_z", "p_nz", "p_b",
        ],
        &summary_rows,
    )?;
    let result = json!({ "rows": rows.len(), "methods": summary.len() });
    manifest::write(
        &cfg.out_dir,
        &cfg,
        &["replications.csv", "summary.csv"],
        result,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_are_numbered_by_first_appearance() {
        assert_eq!(block_numbers(&[5, 5, 0, 2, 5, 7]), vec![1, 1, 0, 2, 1, 3]);
        assert_eq!(block_sizes(&[1, 1, 0, 2, 1, 3]), vec![3, 1, 1]);
    }

    #[test]
    fn runs_split_on_value_changes() {
        assert_eq!(run_blocks(&[0.0, 0.0, 1.0, 1.0, 0.0]), vec![1, 1, 2, 2, 3]);
        assert!(run_blocks(&[]).is_empty());
    }
}
