//! Batch experiment runner behind the `run` and `sweep` subcommands.
//!
//! Every run is a pure function of `(config, seed)`: reports and CSV files
//! are byte-identical across repetitions and worker counts. Wall-clock timing
//! goes to stdout only, never into artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::black_scholes::BsSpec;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::design::{
    self, estimate_mean_f_integral, estimate_mean_f_squared_integral, optimality_audit,
    AuditSetup, DesignPrediction, RateProcess,
};
use crate::ensemble::{par_map, ErrorPipeline, LimitPipeline, PathSummary};
use crate::error::{Error, Result};
use crate::euler::psi_functional;
use crate::grid::{build_grid, count_sample, CountReport};
use crate::intensity::{ClampLog, Intensity};
use crate::integrand::Integrand;
use crate::limit::{error_rate_process, LimitSampler};
use crate::mesh::TimeMesh;
use crate::model::SdeSpec;
use crate::path::{simulate_brownian, simulate_sde};
use crate::rng::SeedPlan;
use crate::stats::{
    binned_variance_profile, independence_check, joint_law_check, ks_two_sample, moments,
    SampleSet,
};

const PILOT_LABEL: u64 = 0x7069_6c6f;

/// CLI-level options applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed_override: Option<u64>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

/// Deterministic run artifact; serialized as `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub pass: bool,
    pub config: ExperimentConfig,
    pub key_stats: BTreeMap<String, f64>,
    pub results: serde_json::Value,
    pub manifest: Vec<ManifestEntry>,
}

struct KindOutcome {
    results: serde_json::Value,
    key_stats: BTreeMap<String, f64>,
    pass: bool,
    /// (file name, contents) to be written next to report.json
    files: Vec<(String, String)>,
}

/// Executes one experiment end to end and writes `report.json` plus the
/// kind-specific CSV files into `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path, options: &RunOptions) -> Result<RunReport> {
    let mut config = config.clone();
    if let Some(seed) = options.seed_override {
        config.seed = seed;
    }
    config.validate()?;
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;

    let plan = SeedPlan::new(config.seed);
    let outcome = match config.kind {
        ExperimentKind::Convergence => run_convergence(&config, &plan, options.jobs)?,
        ExperimentKind::LimitCompare => run_limit_compare(&config, &plan, options.jobs)?,
        ExperimentKind::CountAsymptotics => run_count(&config, &plan, options.jobs)?,
        ExperimentKind::DesignAudit => run_design_audit(&config, &plan, options.jobs)?,
        ExperimentKind::Hedge => run_hedge(&config, &plan, options.jobs)?,
        ExperimentKind::LemmaPsi => run_lemma_psi(&config, &plan, options.jobs)?,
    };

    let mut manifest = Vec::new();
    for (name, contents) in &outcome.files {
        let path = out_dir.join(name);
        fs::write(&path, contents)?;
        manifest.push(ManifestEntry {
            file: name.clone(),
            sha256: sha256_hex(contents.as_bytes()),
        });
    }
    manifest.sort_by(|a, b| a.file.cmp(&b.file));

    let report = RunReport {
        kind: config.kind,
        seed: config.seed,
        pass: outcome.pass,
        config,
        key_stats: outcome.key_stats,
        results: outcome.results,
        manifest,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("cannot serialize report: {e}")))?;
    fs::write(out_dir.join("report.json"), text + "\n")?;
    Ok(report)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// instrument builders
// ---------------------------------------------------------------------------

fn require(field: Option<f64>, what: &str) -> Result<f64> {
    field.ok_or_else(|| Error::Config(format!("missing model/theta field: {what}")))
}

fn build_bs(config: &ExperimentConfig) -> Result<BsSpec> {
    let m = &config.model;
    BsSpec::new(
        require(m.y0, "y0 (spot)")?,
        require(m.strike, "strike")?,
        m.rate.unwrap_or(0.0),
        require(m.mu, "mu")?,
        require(m.sigma, "sigma")?,
        config.horizon(),
        Some(config.truncation()),
    )
}

fn build_model(config: &ExperimentConfig) -> Result<(SdeSpec, Option<BsSpec>)> {
    match config.model.preset.as_str() {
        "brownian" => {
            let d = config.model.dimension.unwrap_or(1);
            Ok((SdeSpec::brownian(d, vec![0.0; d])?, None))
        }
        "gbm" => Ok((
            SdeSpec::gbm(
                require(config.model.mu, "mu")?,
                require(config.model.sigma, "sigma")?,
                config.model.y0.unwrap_or(1.0),
            )?,
            None,
        )),
        "black-scholes" => {
            let bs = build_bs(config)?;
            Ok((bs.model()?, Some(bs)))
        }
        other => Err(Error::Config(format!("unknown model preset '{other}'"))),
    }
}

fn build_integrand(
    config: &ExperimentConfig,
    model: &SdeSpec,
    bs: Option<&BsSpec>,
) -> Result<Integrand> {
    let preset = config
        .integrand
        .as_ref()
        .map(|i| i.preset.as_str())
        .unwrap_or(if bs.is_some() { "bs-hedge" } else { "identity" });
    let integrand = match preset {
        "identity" => Integrand::identity(model.dim),
        "square" => Integrand::square(),
        "sine" => Integrand::sine(),
        "time-linear" => Integrand::time_linear(),
        "bs-hedge" => {
            let bs = bs.ok_or_else(|| {
                Error::Config("bs-hedge integrand needs the black-scholes model".into())
            })?;
            bs.integrand()
        }
        other => return Err(Error::Config(format!("unknown integrand preset '{other}'"))),
    };
    if integrand.dim != model.dim {
        return Err(Error::Config(format!(
            "integrand '{}' has dimension {}, model '{}' has {}",
            integrand.label, integrand.dim, model.label, model.dim
        )));
    }
    Ok(integrand)
}

fn build_rate(model: &SdeSpec, integrand: &Integrand, bs: Option<&BsSpec>) -> RateProcess {
    match bs {
        // closed form for the hedging rate; identical to the generic route
        Some(spec) if integrand.label == "bs-hedge" => spec.rate_process(),
        _ => Arc::new(error_rate_process(integrand, model)),
    }
}

struct BuiltTheta {
    theta: Intensity,
    prediction: Option<DesignPrediction>,
    mean_f: Option<design::MeanIntegralEstimate>,
}

fn build_theta(
    config: &ExperimentConfig,
    plan: &SeedPlan,
    model: &SdeSpec,
    rate: &RateProcess,
) -> Result<BuiltTheta> {
    let clamp = config.clamp();
    let pilot_plan = plan.derived(PILOT_LABEL);
    let pilot_paths = config.theta.pilot_paths.unwrap_or(2000);
    let pilot_mesh = TimeMesh::new(
        config.horizon(),
        config.theta.pilot_mesh_steps.unwrap_or(4096),
    )?;
    match config.theta.strategy.as_str() {
        "constant" => {
            let value = require(config.theta.value, "theta.value")?;
            Ok(BuiltTheta {
                theta: Intensity::constant(value)?,
                prediction: Some(DesignPrediction {
                    expected_interventions: config.n as f64 * value * config.truncation(),
                    error_variance: f64::NAN, // depends on the rate; filled by audits
                }),
                mean_f: None,
            })
        }
        "no-bad-days" => {
            let c = require(config.theta.c, "theta.c")?;
            let theta = design::no_bad_days_theta(rate, c, clamp)?;
            let fsq = estimate_mean_f_squared_integral(
                model,
                rate,
                config.truncation(),
                pilot_mesh,
                pilot_paths,
                &pilot_plan,
            )?;
            Ok(BuiltTheta {
                theta,
                prediction: Some(design::predict_no_bad_days(
                    c,
                    config.n,
                    config.truncation(),
                    &fsq,
                )),
                mean_f: None,
            })
        }
        "min-std" => {
            let budget = require(config.theta.budget, "theta.budget")?;
            let mean_f = estimate_mean_f_integral(
                model,
                rate,
                config.truncation(),
                pilot_mesh,
                pilot_paths,
                &pilot_plan,
            )?;
            let theta = design::min_std_theta(rate, budget, &mean_f, config.n, clamp)?;
            Ok(BuiltTheta {
                theta,
                prediction: Some(design::predict_min_std(budget, &mean_f)),
                mean_f: Some(mean_f),
            })
        }
        other => Err(Error::Config(format!("unknown theta strategy '{other}'"))),
    }
}

fn mesh_for(config: &ExperimentConfig, theta: &Intensity) -> Result<TimeMesh> {
    match config.mesh_steps {
        Some(steps) => TimeMesh::new(config.horizon(), steps),
        None => TimeMesh::for_grid(
            config.horizon(),
            config.n,
            theta.theta_max,
            config.kappa(),
        ),
    }
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

// Fixed dialect: comma separator, '.' decimal point (Rust float Display),
// header row, LF line endings.
fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn summaries_csv(summaries: &[PathSummary], n: u64) -> String {
    csv(
        "index,y_terminal,u_terminal,u_sup,interventions,eps_terminal",
        summaries.iter().map(|s| {
            format!(
                "{},{},{},{},{},{}",
                s.index,
                s.y_terminal,
                s.u_terminal,
                s.u_sup,
                s.interventions,
                s.u_terminal / (n as f64).sqrt()
            )
        }),
    )
}

fn bins_csv(rows: &[Vec<f64>], bins: usize) -> Result<String> {
    let profile = binned_variance_profile(rows, bins)?;
    Ok(csv(
        "bin,variance,stderr",
        profile
            .iter()
            .enumerate()
            .map(|(b, v)| format!("{b},{},{}", v.variance, v.stderr)),
    ))
}

// ---------------------------------------------------------------------------
// kind handlers
// ---------------------------------------------------------------------------

fn clamp_total(summaries: &[PathSummary]) -> ClampLog {
    summaries.iter().fold(ClampLog::default(), |mut acc, s| {
        acc.merge(s.clamp);
        acc
    })
}

/// Re-simulates the first `dump_paths` paths of an error pipeline and emits
/// per-path CSV files: full state path, grid, and error sample.
fn dump_path_files(
    config: &ExperimentConfig,
    plan: &SeedPlan,
    pipeline: &ErrorPipeline,
    files: &mut Vec<(String, String)>,
) -> Result<()> {
    let Some(k) = config.dump_paths else {
        return Ok(());
    };
    for i in 0..k.min(config.paths) {
        let b = simulate_brownian(pipeline.mesh, pipeline.model.dim, plan.path_stream(i))?;
        let y = simulate_sde(&pipeline.model, &b)?;
        let grid = build_grid(&pipeline.theta, pipeline.n, &y, pipeline.horizon)?;
        let z = crate::euler::z_process(&y, &grid, None)?;
        let mut err = crate::euler::euler_error(&pipeline.integrand, &y, &grid, None)?;
        err.z = z.z;
        files.push((
            format!("path_{i:03}.csv"),
            crate::export::state_path_csv(&y, &b),
        ));
        files.push((format!("grid_{i:03}.csv"), crate::export::grid_csv(&grid)));
        files.push((
            format!("error_{i:03}.csv"),
            crate::export::error_sample_csv(&err, &y),
        ));
    }
    Ok(())
}

fn run_convergence(
    config: &ExperimentConfig,
    plan: &SeedPlan,
    jobs: Option<usize>,
) -> Result<KindOutcome> {
    let (model, bs) = build_model(config)?;
    let integrand = build_integrand(config, &model, bs.as_ref())?;
    let rate = build_rate(&model, &integrand, bs.as_ref());
    let built = build_theta(config, plan, &model, &rate)?;
    let mesh = mesh_for(config, &built.theta)?;
    let mut pipeline = ErrorPipeline::new(
        model,
        integrand,
        built.theta,
        config.n,
        mesh,
        config.truncation(),
    );
    pipeline.bins = config.bins.unwrap_or(8);
    let summaries = pipeline.run(plan, config.paths, jobs)?;

    let terminals: Vec<f64> = summaries.iter().map(|s| s.u_terminal).collect();
    let sups: Vec<f64> = summaries.iter().map(|s| s.u_sup).collect();
    let counts: Vec<f64> = summaries.iter().map(|s| s.interventions as f64).collect();
    let m_term = moments(&terminals);
    let m_sup = moments(&sups);
    let var_stderr = m_term.variance * (2.0 / (terminals.len() as f64 - 1.0)).sqrt();
    let clamp = clamp_total(&summaries);

    let mut key_stats = BTreeMap::new();
    key_stats.insert("u_terminal_var".into(), m_term.variance);
    key_stats.insert("u_terminal_var_stderr".into(), var_stderr);
    key_stats.insert("u_terminal_mean".into(), m_term.mean);
    key_stats.insert("u_sup_mean".into(), m_sup.mean);
    key_stats.insert("mean_interventions".into(), moments(&counts).mean);
    key_stats.insert("clamp_fraction".into(), clamp.fraction());

    let mut pass = true;
    if let (Some(target), Some(tol)) = (config.expect.variance, config.expect.variance_tol) {
        pass = (m_term.variance - target).abs() <= tol * target;
    }

    let rows: Vec<Vec<f64>> = summaries.iter().map(|s| s.u_at_bins.clone()).collect();
    let mut files = vec![
        ("terminals.csv".to_string(), summaries_csv(&summaries, config.n)),
        ("bins.csv".to_string(), bins_csv(&rows, pipeline.bins)?),
    ];
    dump_path_files(config, plan, &pipeline, &mut files)?;
    let results = serde_json::json!({
        "u_terminal": { "mean": m_term.mean, "variance": m_term.variance,
                         "variance_stderr": var_stderr, "stderr": m_term.stderr },
        "u_sup": { "mean": m_sup.mean, "variance": m_sup.variance },
        "interventions": { "mean": moments(&counts).mean },
        "clamp": clamp,
        "prediction": built.prediction,
        "mesh_steps": pipeline.mesh.steps(),
    });
    Ok(KindOutcome {
        results,
        key_stats,
        pass,
        files,
    })
}

fn run_limit_compare(
    config: &ExperimentConfig,
    plan: &SeedPlan,
    jobs: Option<usize>,
) -> Result<KindOutcome> {
    let (model, bs) = build_model(config)?;
    let integrand = build_integrand(config, &model, bs.as_ref())?;
    let rate = build_rate(&model, &integrand, bs.as_ref());
    let built = build_theta(config, plan, &model, &rate)?;
    let mesh = mesh_for(config, &built.theta)?;
    let alpha = config
        .compare
        .as_ref()
        .and_then(|c| c.alpha)
        .unwrap_or(0.01);
    let sampler = match config
        .compare
        .as_ref()
        .and_then(|c| c.sampler.as_deref())
        .unwrap_or("array")
    {
        "collapsed" => LimitSampler::Collapsed,
        _ => LimitSampler::Array,
    };

    let pipeline = ErrorPipeline::new(
        model.clone(),
        integrand.clone(),
        built.theta.clone(),
        config.n,
        mesh,
        config.truncation(),
    );
    let summaries = pipeline.run(plan, config.paths, jobs)?;

    // the limit ensemble rides the same state paths (path substreams) with
    // the Brownian array drawn from the disjoint limit substreams; sharing Y
    // couples the two samples through the mixture level, so the comparison
    // probes the conditional error law instead of ensemble-level luck in the
    // heavy-tailed conditional variance
    let limit = LimitPipeline {
        model,
        integrand,
        theta: built.theta,
        mesh,
        horizon: config.truncation(),
        sampler,
    };
    let star = limit.run(plan, config.paths, jobs)?;

    let seed_note = format!("seed={}", config.seed);
    let u_n = SampleSet::new(
        "u_n_terminal",
        summaries.iter().map(|s| s.u_terminal).collect(),
        &seed_note,
    )?;
    let u_star = SampleSet::new(
        "u_star_terminal",
        star.iter().map(|s| s.u_terminal).collect(),
        &seed_note,
    )?;
    let sup_n = SampleSet::new(
        "u_n_sup",
        summaries.iter().map(|s| s.u_sup).collect(),
        &seed_note,
    )?;
    let sup_star = SampleSet::new(
        "u_star_sup",
        star.iter().map(|s| s.u_sup).collect(),
        &seed_note,
    )?;
    let y_n = SampleSet::new(
        "y_terminal",
        summaries.iter().map(|s| s.y_terminal).collect(),
        &seed_note,
    )?;

    let ks_terminal = ks_two_sample(&u_n, &u_star, alpha)?;
    let ks_sup = ks_two_sample(&sup_n, &sup_star, alpha)?;
    let pairs_n: Vec<(f64, f64)> = summaries
        .iter()
        .map(|s| (s.y_terminal, s.u_terminal))
        .collect();
    let pairs_star: Vec<(f64, f64)> = star
        .iter()
        .map(|s| (s.y_terminal, s.u_terminal))
        .collect();
    let joint = joint_law_check(&pairs_n, &pairs_star, alpha)?;
    // the hard independence guarantee is on the sampled limit: its driver is
    // drawn from substreams disjoint from the path streams, so its
    // correlation with Y(T) is pure noise and must sit inside 3/√paths
    let independence = independence_check(&u_star, &y_n)?;
    // the same correlation for U^n only vanishes as n grows; reported as a
    // convergence diagnostic, the joint-law check is its pass/fail test
    let finite_n_probe = independence_check(&u_n, &y_n)?;

    let pass = ks_terminal.pass && ks_sup.pass && joint.pass && independence.pass;
    let mut key_stats = BTreeMap::new();
    key_stats.insert("ks_terminal".into(), ks_terminal.statistic);
    key_stats.insert("ks_sup".into(), ks_sup.statistic);
    key_stats.insert("ks_critical".into(), ks_terminal.critical_value);
    key_stats.insert("independence_r".into(), independence.r_linear);
    key_stats.insert("finite_n_r".into(), finite_n_probe.r_linear);
    key_stats.insert("u_n_var".into(), ks_terminal.moments_a.variance);
    key_stats.insert("u_star_var".into(), ks_terminal.moments_b.variance);

    let mut files = vec![
        (
            "terminals_n.csv".to_string(),
            summaries_csv(&summaries, config.n),
        ),
        (
            "terminals_star.csv".to_string(),
            csv(
                "index,y_terminal,u_terminal,u_sup",
                star.iter().map(|s| {
                    format!("{},{},{},{}", s.index, s.y_terminal, s.u_terminal, s.u_sup)
                }),
            ),
        ),
    ];
    files.push((
        "ks.csv".to_string(),
        csv(
            crate::stats::ComparisonReport::CSV_HEADER,
            [ks_terminal.csv_row(), ks_sup.csv_row()],
        ),
    ));
    if let Some(k) = config.dump_paths {
        for i in 0..k.min(config.paths) {
            let b = simulate_brownian(mesh, limit.model.dim, plan.path_stream(i))?;
            let y = simulate_sde(&limit.model, &b)?;
            let delta = crate::limit::delta_field(
                &limit.integrand,
                &limit.model,
                &limit.theta,
                &y,
                limit.horizon,
            )?;
            let sample = crate::limit::sample_limit(&delta, plan.limit_stream(i), sampler)?;
            files.push((
                format!("limit_{i:03}.csv"),
                crate::export::limit_sample_csv(&sample, &mesh),
            ));
        }
    }
    let results = serde_json::json!({
        "ks_terminal": ks_terminal,
        "ks_sup": ks_sup,
        "joint_law": joint,
        "independence": independence,
        "finite_n_probe": finite_n_probe,
        "clamp": clamp_total(&summaries),
    });
    Ok(KindOutcome {
        results,
        key_stats,
        pass,
        files,
    })
}

fn run_count(
    config: &ExperimentConfig,
    plan: &SeedPlan,
    jobs: Option<usize>,
) -> Result<KindOutcome> {
    let (model, bs) = build_model(config)?;
    let integrand = build_integrand(config, &model, bs.as_ref())?;
    let rate = build_rate(&model, &integrand, bs.as_ref());
    let built = build_theta(config, plan, &model, &rate)?;
    let mesh = TimeMesh::new(config.horizon(), config.mesh_steps.unwrap_or(8192))?;
    let horizon = config.truncation();

    let theta = built.theta;
    let results = par_map(config.paths, jobs, |i| {
        let b = simulate_brownian(mesh, model.dim, plan.path_stream(i))?;
        let y = simulate_sde(&model, &b)?;
        count_sample(&theta, config.n, &y, horizon)
    })?;
    let mut clamp = ClampLog::default();
    let mut samples = Vec::with_capacity(results.len());
    for (s, c) in results {
        clamp.merge(c);
        samples.push(s);
    }
    let report = CountReport::from_samples(samples, clamp)?;

    let mean_dev = (report.mean_count_over_n - report.mean_theta_integral).abs()
        / report.mean_theta_integral;
    let mut key_stats = BTreeMap::new();
    key_stats.insert("mean_count_over_n".into(), report.mean_count_over_n);
    key_stats.insert("mean_theta_integral".into(), report.mean_theta_integral);
    key_stats.insert("mean_rel_dev".into(), report.mean_relative_deviation);
    key_stats.insert("max_rel_dev".into(), report.max_relative_deviation);
    key_stats.insert("ensemble_rel_dev".into(), mean_dev);

    let pass = match config.expect.count_rel_dev {
        Some(bound) => mean_dev <= bound,
        None => true,
    };
    let files = vec![(
        "counts.csv".to_string(),
        csv(
            "index,count_over_n,theta_integral,relative_deviation",
            report.samples.iter().enumerate().map(|(i, s)| {
                format!(
                    "{i},{},{},{}",
                    s.count_over_n, s.theta_integral, s.relative_deviation
                )
            }),
        ),
    )];
    let results = serde_json::json!({
        "mean_count_over_n": report.mean_count_over_n,
        "mean_theta_integral": report.mean_theta_integral,
        "mean_relative_deviation": report.mean_relative_deviation,
        "max_relative_deviation": report.max_relative_deviation,
        "ensemble_relative_deviation": mean_dev,
        "clamp": report.clamp_log,
    });
    Ok(KindOutcome {
        results,
        key_stats,
        pass,
        files,
    })
}

fn run_design_audit(
    config: &ExperimentConfig,
    plan: &SeedPlan,
    jobs: Option<usize>,
) -> Result<KindOutcome> {
    let (model, bs) = build_model(config)?;
    let integrand = build_integrand(config, &model, bs.as_ref())?;
    let rate = build_rate(&model, &integrand, bs.as_ref());
    let budget = require(config.theta.budget, "theta.budget")?;
    let clamp = config.clamp();

    let setup = AuditSetup {
        model: model.clone(),
        integrand,
        rate: rate.clone(),
        budget,
        n: config.n,
        kappa: config.kappa(),
        mesh_horizon: config.horizon(),
        horizon: config.truncation(),
        eval_paths: config.paths,
        pilot_paths: config.theta.pilot_paths.unwrap_or(2000),
        pilot_mesh_steps: config.theta.pilot_mesh_steps.unwrap_or(4096),
        jobs,
    };

    let names = config
        .audit
        .as_ref()
        .map(|a| a.candidates.clone())
        .unwrap_or_else(|| vec!["constant".into(), "min-std".into()]);
    let pilot_plan = plan.derived(PILOT_LABEL);
    let pilot_mesh = TimeMesh::new(setup.mesh_horizon, setup.pilot_mesh_steps)?;
    let mut candidates = Vec::new();
    for name in &names {
        let theta = match name.as_str() {
            // initial guess EN ≈ C; normalization refines it
            "constant" => {
                Intensity::constant_in_band(budget / (config.n as f64 * setup.horizon), clamp)?
            }
            "min-std" => {
                let mean_f = estimate_mean_f_integral(
                    &model,
                    &rate,
                    setup.horizon,
                    pilot_mesh,
                    setup.pilot_paths,
                    &pilot_plan,
                )?;
                design::min_std_theta(&rate, budget, &mean_f, config.n, clamp)?
            }
            "no-bad-days" => {
                design::no_bad_days_theta(&rate, require(config.theta.c, "theta.c")?, clamp)?
            }
            other => {
                return Err(Error::AuditConfig(format!(
                    "unknown audit candidate '{other}'"
                )))
            }
        };
        candidates.push((name.clone(), theta));
    }

    let rows = optimality_audit(&setup, candidates, plan)?;

    // min-std must attain the minimum realized variance among candidates
    // within Monte Carlo noise
    let pass = match rows.iter().find(|r| r.strategy == "min-std") {
        Some(ms) => rows.iter().all(|r| {
            r.strategy == "min-std"
                || ms.var_real <= r.var_real + 3.0 * (ms.var_real_stderr + r.var_real_stderr)
        }),
        None => true,
    };

    let mut key_stats = BTreeMap::new();
    for row in &rows {
        key_stats.insert(format!("var_real_{}", row.strategy), row.var_real);
        key_stats.insert(format!("en_real_{}", row.strategy), row.en_real);
    }
    if let Some(first) = rows.first() {
        key_stats.insert("bound".into(), first.bound);
    }

    let files = vec![(
        "audit.csv".to_string(),
        csv(
            "strategy,en_pred,en_real,var_pred,var_real,var_real_stderr,bound,clamp_fraction",
            rows.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    r.strategy,
                    r.en_pred,
                    r.en_real,
                    r.var_pred,
                    r.var_real,
                    r.var_real_stderr,
                    r.bound,
                    r.clamp_fraction
                )
            }),
        ),
    )];
    let results = serde_json::json!({ "rows": rows });
    Ok(KindOutcome {
        results,
        key_stats,
        pass,
        files,
    })
}

fn run_hedge(
    config: &ExperimentConfig,
    plan: &SeedPlan,
    jobs: Option<usize>,
) -> Result<KindOutcome> {
    let (model, bs) = build_model(config)?;
    let bs_spec =
        bs.ok_or_else(|| Error::Config("hedge experiments need the black-scholes model".into()))?;
    let integrand = build_integrand(config, &model, Some(&bs_spec))?;
    let rate = build_rate(&model, &integrand, Some(&bs_spec));
    let built = build_theta(config, plan, &model, &rate)?;
    let mesh = mesh_for(config, &built.theta)?;
    let mut pipeline = ErrorPipeline::new(
        model,
        integrand,
        built.theta,
        config.n,
        mesh,
        config.truncation(),
    );
    pipeline.bins = config.bins.unwrap_or(8);
    let summaries = pipeline.run(plan, config.paths, jobs)?;

    let eps: Vec<f64> = summaries
        .iter()
        .map(|s| s.u_terminal / (config.n as f64).sqrt())
        .collect();
    let counts: Vec<f64> = summaries.iter().map(|s| s.interventions as f64).collect();
    let eps_m = moments(&eps);
    let count_m = moments(&counts);
    let var_stderr = eps_m.variance * (2.0 / (eps.len() as f64 - 1.0)).sqrt();
    let clamp = clamp_total(&summaries);
    let rows: Vec<Vec<f64>> = summaries.iter().map(|s| s.u_at_bins.clone()).collect();
    let profile = binned_variance_profile(&rows, pipeline.bins)?;
    let (bin_max, bin_min) = profile.iter().fold((0.0_f64, f64::INFINITY), |(hi, lo), b| {
        (hi.max(b.variance), lo.min(b.variance))
    });

    let mut key_stats = BTreeMap::new();
    key_stats.insert("eps_terminal_var".into(), eps_m.variance);
    key_stats.insert("eps_terminal_var_stderr".into(), var_stderr);
    key_stats.insert("mean_interventions".into(), count_m.mean);
    key_stats.insert("bin_var_max_over_min".into(), bin_max / bin_min);
    key_stats.insert("clamp_fraction".into(), clamp.fraction());
    if let Some(pred) = &built.prediction {
        key_stats.insert("predicted_interventions".into(), pred.expected_interventions);
        key_stats.insert("predicted_eps_var".into(), pred.error_variance);
    }

    let mut pass = true;
    if let (Some(target), Some(tol)) = (config.expect.variance, config.expect.variance_tol) {
        pass = (eps_m.variance - target).abs() <= tol * target;
    }

    // time profile at the bin boundaries: mean/variance of U plus the
    // increment variance of the bin ending at each boundary
    let boundaries = crate::ensemble::bin_boundaries(&pipeline.mesh, pipeline.horizon, pipeline.bins);
    let mut profile_csv = String::from("t,mean_u,var_u,bin_increment_variance,bin_increment_stderr\n");
    for (b, &idx) in boundaries.iter().enumerate() {
        let at: Vec<f64> = rows.iter().map(|r| r[b]).collect();
        let m = moments(&at);
        let (bin_var, bin_se) = if b == 0 {
            (0.0, 0.0)
        } else {
            (profile[b - 1].variance, profile[b - 1].stderr)
        };
        profile_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            pipeline.mesh.time(idx),
            m.mean,
            m.variance,
            bin_var,
            bin_se
        ));
    }

    let mut files = vec![
        (
            "terminals.csv".to_string(),
            summaries_csv(&summaries, config.n),
        ),
        ("bins.csv".to_string(), bins_csv(&rows, pipeline.bins)?),
        ("profile.csv".to_string(), profile_csv),
    ];
    dump_path_files(config, plan, &pipeline, &mut files)?;
    let results = serde_json::json!({
        "spec": bs_spec,
        "eps_terminal": { "mean": eps_m.mean, "variance": eps_m.variance,
                           "variance_stderr": var_stderr },
        "interventions": { "mean": count_m.mean, "stderr": count_m.stderr },
        "prediction": built.prediction,
        "mean_f": built.mean_f,
        "bin_profile": profile,
        "clamp": clamp,
        "mesh_steps": pipeline.mesh.steps(),
    });
    Ok(KindOutcome {
        results,
        key_stats,
        pass,
        files,
    })
}

fn run_lemma_psi(
    config: &ExperimentConfig,
    plan: &SeedPlan,
    jobs: Option<usize>,
) -> Result<KindOutcome> {
    let power = config
        .psi
        .as_ref()
        .map(|p| p.power)
        .ok_or_else(|| Error::Config("lemma-psi needs a [psi] section with power".into()))?;
    let (model, _) = build_model(config)?;
    if model.dim != 1 {
        return Err(Error::UnsupportedDimension {
            got: model.dim,
            expected: 1,
        });
    }
    let built = build_theta(
        config,
        plan,
        &model,
        &(Arc::new(|_t: f64, _y: &[f64]| 1.0) as RateProcess),
    )?;
    let theta = built.theta;
    let mesh = match config.mesh_steps {
        Some(steps) => TimeMesh::new(config.horizon(), steps)?,
        None => TimeMesh::for_grid(config.horizon(), config.n, theta.theta_max, config.kappa())?,
    };
    let horizon = config.truncation();

    let deviations = par_map(config.paths, jobs, |i| {
        let b = simulate_brownian(mesh, 1, plan.path_stream(i))?;
        let y = simulate_sde(&SdeSpec::brownian(1, vec![0.0])?, &b)?;
        let grid = build_grid(&theta, config.n, &y, horizon)?;
        // unit weight a ≡ 1: the locally bounded weight of the functional
        psi_functional(&|_, _| 1.0, &theta, &b, &y, &grid, power)
    })?;

    let mut sorted = deviations.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let pct = |q: f64| sorted[((sorted.len() as f64 - 1.0) * q).round() as usize];
    let p50 = pct(0.50);
    let p95 = pct(0.95);
    let max = *sorted.last().unwrap();

    let mut key_stats = BTreeMap::new();
    key_stats.insert("deviation_p50".into(), p50);
    key_stats.insert("deviation_p95".into(), p95);
    key_stats.insert("deviation_max".into(), max);

    let pass = match config.expect.psi_p95 {
        Some(bound) => p95 < bound,
        None => true,
    };
    let files = vec![(
        "psi.csv".to_string(),
        csv(
            "index,sup_deviation",
            deviations
                .iter()
                .enumerate()
                .map(|(i, d)| format!("{i},{d}")),
        ),
    )];
    let results = serde_json::json!({
        "power": power,
        "deviation_p50": p50,
        "deviation_p95": p95,
        "deviation_max": max,
        "mesh_steps": mesh.steps(),
    });
    Ok(KindOutcome {
        results,
        key_stats,
        pass,
        files,
    })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

/// Aggregated sweep artifact; serialized as `report.json` in the sweep root.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: String,
    pub pass: bool,
    pub runs: Vec<SweepRun>,
    pub manifest: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRun {
    pub axis_value: f64,
    pub out_dir: String,
    pub pass: bool,
    pub key_stats: BTreeMap<String, f64>,
}

fn axis_value(config: &ExperimentConfig, axis: &str) -> Result<f64> {
    let missing = || Error::AxisViolation(format!("axis '{axis}' not set in config"));
    Ok(match axis {
        "n" => config.n as f64,
        "paths" => config.paths as f64,
        "seed" => config.seed as f64,
        "mesh_factor" => config.mesh_factor.map(f64::from).ok_or_else(missing)?,
        "mesh_steps" => config.mesh_steps.ok_or_else(missing)? as f64,
        "theta.value" => config.theta.value.ok_or_else(missing)?,
        "theta.c" => config.theta.c.ok_or_else(missing)?,
        "theta.budget" => config.theta.budget.ok_or_else(missing)?,
        other => {
            return Err(Error::AxisViolation(format!(
                "unknown sweep axis '{other}'"
            )))
        }
    })
}

fn clear_axis(config: &mut ExperimentConfig, axis: &str) {
    match axis {
        "n" => config.n = 0,
        "paths" => config.paths = 0,
        "seed" => config.seed = 0,
        "mesh_factor" => config.mesh_factor = None,
        "mesh_steps" => config.mesh_steps = None,
        "theta.value" => config.theta.value = None,
        "theta.c" => config.theta.c = None,
        "theta.budget" => config.theta.budget = None,
        _ => {}
    }
}

/// Runs a list of configs that differ only along `axis` and aggregates the
/// per-run key statistics into one CSV.
pub fn sweep(
    configs: &[ExperimentConfig],
    axis: &str,
    out_dir: &Path,
    options: &RunOptions,
) -> Result<SweepReport> {
    if configs.len() < 2 {
        return Err(Error::Config("sweep needs at least two configs".into()));
    }
    // configs must agree once the axis field is blanked out
    let canonical: Vec<serde_json::Value> = configs
        .iter()
        .map(|c| {
            let mut c = c.clone();
            clear_axis(&mut c, axis);
            serde_json::to_value(&c).map_err(|e| Error::Config(e.to_string()))
        })
        .collect::<Result<_>>()?;
    for (i, value) in canonical.iter().enumerate().skip(1) {
        if value != &canonical[0] {
            return Err(Error::AxisViolation(format!(
                "config #{i} differs from config #0 outside axis '{axis}'"
            )));
        }
    }

    fs::create_dir_all(out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut runs = Vec::new();
    let mut key_union: Vec<String> = Vec::new();
    for (i, config) in configs.iter().enumerate() {
        let value = axis_value(config, axis)?;
        let sub: PathBuf = out_dir.join(format!("run_{i:02}"));
        let report = run(config, &sub, options)?;
        for k in report.key_stats.keys() {
            if !key_union.contains(k) {
                key_union.push(k.clone());
            }
        }
        runs.push(SweepRun {
            axis_value: value,
            out_dir: format!("run_{i:02}"),
            pass: report.pass,
            key_stats: report.key_stats,
        });
    }
    key_union.sort();

    let header = std::iter::once(axis.to_string())
        .chain(key_union.iter().cloned())
        .chain(std::iter::once("pass".to_string()))
        .collect::<Vec<_>>()
        .join(",");
    let body = runs.iter().map(|r| {
        let mut cells = vec![r.axis_value.to_string()];
        for k in &key_union {
            cells.push(
                r.key_stats
                    .get(k)
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
            );
        }
        cells.push(if r.pass { "pass" } else { "fail" }.to_string());
        cells.join(",")
    });
    let sweep_csv = csv(&header, body);
    fs::write(out_dir.join("sweep.csv"), &sweep_csv)?;

    let manifest = vec![ManifestEntry {
        file: "sweep.csv".into(),
        sha256: sha256_hex(sweep_csv.as_bytes()),
    }];
    let report = SweepReport {
        axis: axis.to_string(),
        pass: runs.iter().all(|r| r.pass),
        runs,
        manifest,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("cannot serialize sweep report: {e}")))?;
    fs::write(out_dir.join("report.json"), text + "\n")?;
    Ok(report)
}
