//! One function per subcommand. Each reads its inputs, writes its outputs
//! under the output directory and returns what should go to stdout.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use netgame_core::estimate::subnetwork_profile;
use netgame_core::io::{
    read_covariates, read_edges, read_outcomes, write_covariates, write_edges, write_outcomes, write_profile,
};
use netgame_core::npest::{default_radius, DEFAULT_H0};
use netgame_core::rng::{derive_seed, rng_from_seed};
use netgame_core::simulate::{draw_covariates, run_ladder, PURPOSE_ACTIONS, PURPOSE_COVARIATES, PURPOSE_NETWORK};
use netgame_core::{
    amle, draw_actions, np_estimate, solve_equilibrium, AlphaBox, CovariateDist, Dataset, GameState, MonteCarloDesign,
    NpConfig, PayoffParams,
};
use serde::Serialize;

use crate::config::{
    resolve_h, ColumnConfig, EstimateConfig, GenerateConfig, Inputs, MonteCarloConfig, NpEstimateConfig,
    SimulateConfig, SolveConfig, ThetaConfig,
};
use crate::error::{io_err, CliError};
use crate::report::{coefficient_table, coordinate_labels};

/// Version of the JSON result layout.
pub const SPEC_VERSION: &str = "1.0";

/// Settings shared by every subcommand.
pub struct Context {
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl Context {
    fn prepare(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out).map_err(io_err(&self.out))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

#[derive(Serialize)]
struct Document<'a, C, R> {
    spec_version: &'static str,
    command: &'static str,
    config: &'a C,
    #[serde(flatten)]
    result: R,
}

fn write_json<C: Serialize, R: Serialize>(
    path: &Path,
    command: &'static str,
    config: &C,
    result: R,
) -> Result<String, CliError> {
    let doc = Document {
        spec_version: SPEC_VERSION,
        command,
        config,
        result,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, &text).map_err(io_err(path))?;
    Ok(text)
}

fn load_state(inputs: &Inputs) -> Result<(Vec<String>, GameState), CliError> {
    let (names, x) = read_covariates(&inputs.covariates, inputs.missing)?;
    let net = read_edges(&inputs.edges, x.n())?;
    Ok((names, GameState::new(net, x)?))
}

fn check_theta(theta: &ThetaConfig, d: usize) -> Result<PayoffParams, CliError> {
    let params = theta.params()?;
    if params.d() != d {
        return Err(CliError::Config(format!(
            "theta has {} covariate coefficients per action but the data have {d} columns",
            params.d()
        )));
    }
    Ok(params)
}

fn column_dists(columns: &[ColumnConfig]) -> Result<(Vec<String>, Vec<CovariateDist>), CliError> {
    let mut seen = HashSet::new();
    for c in columns {
        if !seen.insert(c.name.as_str()) {
            return Err(CliError::Config(format!("duplicate covariate name `{}`", c.name)));
        }
    }
    Ok((
        columns.iter().map(|c| c.name.clone()).collect(),
        columns.iter().map(|c| c.dist).collect(),
    ))
}

fn seed(ctx: &Context, configured: Option<u64>) -> u64 {
    ctx.seed.or(configured).unwrap_or(0)
}

#[derive(Serialize)]
struct DegreeSummary {
    n: usize,
    edges: usize,
    mean_friends: f64,
    max_friends: usize,
    isolated: usize,
    max_centrality: usize,
}

pub fn generate(mut cfg: GenerateConfig, ctx: &Context) -> Result<String, CliError> {
    let seed = seed(ctx, cfg.seed);
    cfg.seed = Some(seed);
    let (names, dists) = column_dists(&cfg.covariates)?;
    let net = cfg.network.build(cfg.n, derive_seed(seed, 0, PURPOSE_NETWORK))?;
    ctx.prepare()?;
    write_edges(&ctx.path("edges.csv"), &net)?;
    if !dists.is_empty() {
        let x = draw_covariates(
            cfg.n,
            &dists,
            &mut rng_from_seed(derive_seed(seed, 0, PURPOSE_COVARIATES)),
        )?;
        write_covariates(&ctx.path("covariates.csv"), &names, &x)?;
    }

    let degrees = net.out_degrees();
    let summary = DegreeSummary {
        n: net.n(),
        edges: net.edge_count(),
        mean_friends: net.edge_count() as f64 / net.n() as f64,
        max_friends: degrees.iter().copied().max().unwrap_or(0),
        isolated: degrees.iter().filter(|&&q| q == 0).count(),
        max_centrality: net.in_degrees().iter().copied().max().unwrap_or(0),
    };
    write_json(&ctx.path("generate.json"), "generate", &cfg, &summary)?;
    Ok(format!(
        "players {}\nedges {}\nmean friends {:.4}\nmax friends {}\nplayers without friends {}\nmax centrality {}\n",
        summary.n, summary.edges, summary.mean_friends, summary.max_friends, summary.isolated, summary.max_centrality
    ))
}

#[derive(Serialize)]
struct SolveSummary {
    n: usize,
    k: usize,
    lambda: f64,
    h: Option<usize>,
    iterations: Option<usize>,
    final_residual: Option<f64>,
}

pub fn solve(cfg: SolveConfig, ctx: &Context) -> Result<String, CliError> {
    let (_, state) = load_state(&cfg.inputs)?;
    let params = check_theta(&cfg.theta, state.d())?;
    if params.lambda() >= 1.0 {
        log::warn!("lambda = {:.4}; the equilibrium may not be unique", params.lambda());
    }
    let opts = cfg.solver.options();
    let (profile, report) = match cfg.h {
        Some(h) => (subnetwork_profile(&state, &params, h, &opts)?, None),
        None => {
            let (p, r) = solve_equilibrium(&state, &params, &opts)?;
            (p, Some(r))
        }
    };
    ctx.prepare()?;
    write_profile(&ctx.path("profile.csv"), &profile)?;
    let summary = SolveSummary {
        n: state.n(),
        k: params.k(),
        lambda: params.lambda(),
        h: cfg.h,
        iterations: report.as_ref().map(|r| r.iterations),
        final_residual: report.as_ref().map(|r| r.final_residual),
    };
    write_json(&ctx.path("solve.json"), "solve", &cfg, &summary)?;
    let mut text = format!("players {}\nlambda {:.6}\n", summary.n, summary.lambda);
    if let Some(r) = report {
        text.push_str(&format!(
            "iterations {}\nlast step {:e}\n",
            r.iterations, r.final_residual
        ));
    }
    Ok(text)
}

#[derive(Serialize)]
struct SimulateSummary {
    n: usize,
    lambda: f64,
    iterations: usize,
    final_residual: f64,
    action_counts: Vec<usize>,
}

pub fn simulate(mut cfg: SimulateConfig, ctx: &Context) -> Result<String, CliError> {
    let seed = seed(ctx, cfg.seed);
    cfg.seed = Some(seed);
    let (_, state) = load_state(&cfg.inputs)?;
    let params = check_theta(&cfg.theta, state.d())?;
    let (profile, report) = solve_equilibrium(&state, &params, &cfg.solver.options())?;
    let draw = draw_actions(&profile, derive_seed(seed, 0, PURPOSE_ACTIONS));
    ctx.prepare()?;
    write_outcomes(&ctx.path("outcomes.csv"), &draw.actions)?;
    write_profile(&ctx.path("profile.csv"), &profile)?;
    let mut counts = vec![0; params.k() + 1];
    for &y in &draw.actions {
        counts[y] += 1;
    }
    let summary = SimulateSummary {
        n: state.n(),
        lambda: params.lambda(),
        iterations: report.iterations,
        final_residual: report.final_residual,
        action_counts: counts,
    };
    write_json(&ctx.path("simulate.json"), "simulate", &cfg, &summary)?;
    let counts: Vec<String> = summary.action_counts.iter().map(ToString::to_string).collect();
    Ok(format!("players {}\naction counts {}\n", summary.n, counts.join(" ")))
}

fn load_dataset(inputs: &Inputs, outcomes: &Path, k: Option<usize>) -> Result<(Vec<String>, Dataset), CliError> {
    let (names, state) = load_state(inputs)?;
    let y = read_outcomes(outcomes, state.n(), k.unwrap_or(usize::MAX))?;
    let k = match k {
        Some(k) => k,
        None => match y.iter().copied().max() {
            Some(k) if k > 0 => k,
            _ => {
                return Err(CliError::Config(format!(
                    "{}: every outcome is the baseline action; set `k` explicitly",
                    outcomes.display()
                )))
            }
        },
    };
    Ok((names, Dataset::new(state, y, k)?))
}

#[derive(Serialize)]
struct StdErrors {
    beta: Vec<Vec<Option<f64>>>,
    alpha: Vec<Vec<Option<f64>>>,
}

#[derive(Serialize)]
struct EstimateSummary {
    n: usize,
    covariates: Vec<String>,
    theta_hat: ThetaConfig,
    se: StdErrors,
    loglik: f64,
    loglik_total: f64,
    h: usize,
    converged: bool,
    iterations: usize,
    stop: netgame_core::estimate::StopReason,
    gradient_norm: f64,
    fisher_condition: Option<f64>,
}

pub fn estimate(mut cfg: EstimateConfig, ctx: &Context) -> Result<String, CliError> {
    let (names, data) = load_dataset(&cfg.inputs, &cfg.outcomes, cfg.k)?;
    let k = data.k();
    let h = resolve_h(cfg.h, cfg.h_rule, data.n());
    let alpha_box = cfg.alpha_box.unwrap_or_else(|| AlphaBox::default_for(k));
    let init = cfg
        .init
        .as_ref()
        .map(|t| check_theta(t, data.state().d()))
        .transpose()?;
    cfg.k = Some(k);
    cfg.h = Some(h);
    cfg.alpha_box = Some(alpha_box);

    let fit = amle(&data, h, init.as_ref(), &alpha_box, &cfg.optimizer)?;
    let p = &fit.theta_hat;
    let se_at = |i: usize| fit.std_errors[i];
    let se = StdErrors {
        beta: (0..k)
            .map(|r| (0..p.d()).map(|c| se_at(p.beta_index(r, c))).collect())
            .collect(),
        alpha: (0..k)
            .map(|r| (0..k).map(|l| se_at(p.alpha_index(r, l))).collect())
            .collect(),
    };
    let summary = EstimateSummary {
        n: data.n(),
        covariates: names.clone(),
        theta_hat: ThetaConfig::from_params(p),
        se,
        loglik: fit.loglik,
        loglik_total: fit.loglik_total,
        h,
        converged: fit.converged,
        iterations: fit.trace.iterations,
        stop: fit.trace.stop,
        gradient_norm: fit.trace.gradient_norm,
        fisher_condition: fit.fisher_condition,
    };
    ctx.prepare()?;
    write_json(&ctx.path("estimate.json"), "estimate", &cfg, &summary)?;
    let table = coefficient_table(&fit, &names, data.n());
    let path = ctx.path("estimate.txt");
    std::fs::write(&path, &table).map_err(io_err(&path))?;
    if !fit.converged {
        print!("{table}");
        return Err(CliError::NotConverged(format!(
            "optimiser stopped ({:?}) with projected gradient {:e}; results written anyway",
            fit.trace.stop, fit.trace.gradient_norm
        )));
    }
    Ok(table)
}

#[derive(Serialize)]
struct LadderRung {
    h: usize,
    replications: usize,
    failures: usize,
    mean: Vec<f64>,
    bias: Vec<f64>,
    sd: Vec<f64>,
    mean_se: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct MonteCarloSummary {
    coordinates: Vec<String>,
    truth: Vec<f64>,
    results: Vec<LadderRung>,
}

pub fn montecarlo(mut cfg: MonteCarloConfig, ctx: &Context) -> Result<String, CliError> {
    let seed = seed(ctx, cfg.seed);
    let (names, dists) = column_dists(&cfg.covariates)?;
    let theta = check_theta(&cfg.theta, dists.len())?;
    let k = theta.k();
    let h = resolve_h(cfg.h, cfg.h_rule, cfg.n);
    let radii = cfg.ladder.clone().unwrap_or_else(|| vec![h]);
    if radii.is_empty() {
        return Err(CliError::Config("`ladder` must list at least one radius".into()));
    }
    if cfg.replications == 0 {
        return Err(CliError::Config("`replications` must be positive".into()));
    }
    cfg.seed = Some(seed);
    if cfg.ladder.is_none() {
        cfg.h = Some(h);
    }
    let alpha_box = cfg.alpha_box.unwrap_or_else(|| AlphaBox::default_for(k));
    cfg.alpha_box = Some(alpha_box);

    let design = MonteCarloDesign {
        alpha_box,
        optimizer: cfg.optimizer,
        solve_tol: cfg.solver.tol,
        ..MonteCarloDesign::new(
            cfg.network,
            cfg.n,
            theta.clone(),
            dists,
            cfg.replications,
            radii[0],
            seed,
        )
    };
    let results = run_ladder(&design, &radii)?;
    let labels = coordinate_labels(&theta, &names);
    let truth = theta.to_vector();

    ctx.prepare()?;
    write_replications(&ctx.path("replications.csv"), &labels, &results)?;
    let rungs: Vec<LadderRung> = results
        .iter()
        .map(|r| LadderRung {
            h: r.h,
            replications: r.replications,
            failures: r.failures,
            bias: r.mean.iter().zip(&truth).map(|(m, t)| m - t).collect(),
            mean: r.mean.clone(),
            sd: r.sd.clone(),
            mean_se: r.mean_se.clone(),
        })
        .collect();

    let width = labels.iter().map(String::len).max().unwrap_or(0).max(10);
    let mut text = String::new();
    for r in &rungs {
        text.push_str(&format!(
            "h = {}: {} replications, {} failed\n{:width$}  {:>10}  {:>10}  {:>10}  {:>10}\n",
            r.h, r.replications, r.failures, "", "true", "mean", "sd", "mean s.e."
        ));
        for (c, label) in labels.iter().enumerate() {
            let se = r.mean_se[c].map_or_else(|| "n/a".to_owned(), |s| format!("{s:.4}"));
            text.push_str(&format!(
                "{label:width$}  {:>10.4}  {:>10.4}  {:>10.4}  {se:>10}\n",
                truth[c], r.mean[c], r.sd[c]
            ));
        }
    }
    let all_failed = rungs.iter().any(|r| r.failures == r.replications);
    let summary = MonteCarloSummary {
        coordinates: labels,
        truth,
        results: rungs,
    };
    write_json(&ctx.path("montecarlo.json"), "montecarlo", &cfg, &summary)?;
    if all_failed {
        print!("{text}");
        return Err(CliError::NotConverged("no replication converged at some radius".into()));
    }
    Ok(text)
}

fn write_replications(path: &Path, labels: &[String], results: &[netgame_core::MCResult]) -> Result<(), CliError> {
    use netgame_core::io::format_float;
    let csv_err = |e: csv::Error| {
        CliError::Core(netgame_core::Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["replication".to_owned(), "h".to_owned(), "converged".to_owned()];
    header.extend(labels.iter().cloned());
    header.extend(labels.iter().map(|l| format!("se_{l}")));
    header.extend(["loglik".to_owned(), "error".to_owned()]);
    w.write_record(&header).map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for res in results {
        for rec in &res.records {
            let mut row = vec![
                (rec.index + 1).to_string(),
                res.h.to_string(),
                rec.converged.to_string(),
            ];
            match &rec.estimate {
                Some(e) => row.extend(e.iter().map(|&v| format_float(v))),
                None => row.extend(labels.iter().map(|_| String::new())),
            }
            row.extend((0..labels.len()).map(|c| opt(rec.std_errors.get(c).copied().flatten())));
            row.push(opt(rec.loglik));
            row.push(rec.error.clone().unwrap_or_default());
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err(path))
}

#[derive(Serialize)]
struct NpSummary {
    target: usize,
    estimate: f64,
    matches: usize,
    h: usize,
}

pub fn npestimate(
    mut cfg: NpEstimateConfig,
    target: Option<usize>,
    h: Option<usize>,
    ctx: &Context,
) -> Result<String, CliError> {
    let (_, data) = load_dataset(&cfg.inputs, &cfg.outcomes, Some(1))?;
    let n = data.n();
    let target = target
        .or(cfg.target)
        .ok_or_else(|| CliError::Config("a target player is required (`--target` or `target`)".into()))?;
    if target == 0 || target > n {
        return Err(CliError::Config(format!("target {target} outside 1..={n}")));
    }
    let h = h.or(cfg.h).unwrap_or_else(|| default_radius(n, DEFAULT_H0));
    cfg.target = Some(target);
    cfg.h = Some(h);
    let est = np_estimate(
        &data,
        &NpConfig {
            radius: h,
            target: target - 1,
        },
    )?;
    let summary = NpSummary {
        target,
        estimate: est.estimate,
        matches: est.matches,
        h,
    };
    ctx.prepare()?;
    write_json(&ctx.path("npestimate.json"), "npestimate", &cfg, &summary)
}
