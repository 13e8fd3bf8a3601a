use std::fmt;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use edgebreak::breakpoints::{
    cse_probability, increments, psi_sequence_with, restart_sample, BreakPointSeries, IncrementSample, PsiOptions,
};
use edgebreak::contact::{
    agreement_on_set, evolve_family, right_edge_sample, shape_agreement, survival_estimate, survival_sweep,
    Configuration,
};
use edgebreak::graph::{build_event_log, EdgeMask};
use edgebreak::percolation::{
    coupling_identity_check, decay_table, deficit_counts, density_deficit, extinction_counts, gen_field, origin_run,
    row_sites, scan_counts, write_decay_csv, DecayRow, DeficitSpec, DeficitVariant, ScanSpec,
};
use edgebreak::stats::{
    decay_fit, edge_speed, geometric_fit, ks_two_sample, normality_test, pooled_lag_autocorrelation, run_experiment,
    wilson_ci, EstimateReport, DEFAULT_LEVEL,
};

use crate::config::{Config, DeficitEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Survival,
    EndpointEquality,
    Agreement,
    Shape,
    Breakpoints,
    Restart,
    Clt,
    Percolation,
    DeficitDecay,
    ScanRuns,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Survival,
        Command::EndpointEquality,
        Command::Agreement,
        Command::Shape,
        Command::Breakpoints,
        Command::Restart,
        Command::Clt,
        Command::Percolation,
        Command::DeficitDecay,
        Command::ScanRuns,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Survival => "survival",
            Command::EndpointEquality => "endpoint-equality",
            Command::Agreement => "agreement",
            Command::Shape => "shape",
            Command::Breakpoints => "breakpoints",
            Command::Restart => "restart",
            Command::Clt => "clt",
            Command::Percolation => "percolation",
            Command::DeficitDecay => "deficit-decay",
            Command::ScanRuns => "scan-runs",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// In-memory result of one command.
#[derive(Debug, Default)]
pub struct Outcome {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, Vec<u8>)>,
    /// Estimates compared by the window-doubling check.
    pub headline: Vec<(String, EstimateReport)>,
    /// Replicas dropped because the window edge may have mattered.
    pub excluded: u64,
    pub replicas: u64,
}

impl Outcome {
    fn new(replicas: u64) -> Self {
        Outcome {
            replicas,
            ..Outcome::default()
        }
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        self.files.push((name.to_string(), w.into_inner()?));
        Ok(())
    }

    fn raw(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> edgebreak::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }
}

fn estimate_row(label: String, r: &EstimateReport) -> Vec<String> {
    vec![
        label,
        r.trials.to_string(),
        r.successes.to_string(),
        r.p_hat.to_string(),
        r.ci_low.to_string(),
        r.ci_high.to_string(),
        r.excluded_boundary.to_string(),
    ]
}

const ESTIMATE_TAIL: [&str; 6] = ["trials", "successes", "p_hat", "ci_low", "ci_high", "excluded_boundary"];

fn header(first: &'static str) -> Vec<&'static str> {
    std::iter::once(first).chain(ESTIMATE_TAIL).collect()
}

fn opt(v: Option<impl ToString>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Runs `cmd` on `cfg` without touching the file system.
pub fn run_command(cmd: Command, cfg: &Config) -> Result<Outcome> {
    cfg.validate()?;
    match cmd {
        Command::Survival => survival(cfg),
        Command::EndpointEquality => endpoint_equality(cfg),
        Command::Agreement => agreement(cfg),
        Command::Shape => shape(cfg),
        Command::Breakpoints => breakpoints(cfg),
        Command::Restart => restart(cfg),
        Command::Clt => clt(cfg),
        Command::Percolation => percolation(cfg),
        Command::DeficitDecay => deficit_decay(cfg),
        Command::ScanRuns => scan_runs(cfg),
    }
}

fn survival(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let start = Configuration::single(0);
    if cfg.mus.is_empty() {
        let r = survival_estimate(&cfg.sim(), cfg.mask(), &start, cfg.replicas, cfg.exec())?;
        out.excluded = r.excluded_boundary;
        out.csv("survival.csv", &header("mu"), [estimate_row(cfg.mu.to_string(), &r)])?;
        out.json("survival.json", &r)?;
        out.headline.push((format!("survival mu={}", cfg.mu), r));
        return Ok(out);
    }
    let sweep = survival_sweep(&cfg.sim(), &cfg.mus, &start, cfg.replicas, cfg.exec())?;
    out.excluded = sweep.excluded_boundary;
    let mut rows = Vec::new();
    for p in &sweep.points {
        for (graph, r) in [("full_graph", &p.full), ("half_line", &p.half)] {
            let mut row = estimate_row(p.mu.to_string(), r);
            row.insert(1, graph.to_string());
            rows.push(row);
            out.headline.push((format!("survival mu={} {graph}", p.mu), r.clone()));
        }
    }
    let mut head = header("mu");
    head.insert(1, "graph");
    out.csv("survival.csv", &head, rows)?;
    out.json("survival.json", &sweep)?;
    Ok(out)
}

fn endpoint_equality(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let horizons = if cfg.horizons.is_empty() { vec![cfg.horizon] } else { cfg.horizons.clone() };
    let est = cse_probability(&cfg.sim(), &horizons, cfg.replicas, cfg.exec())?;
    out.excluded = est.violations.iter().filter(|v| v.is_none()).count() as u64;
    out.csv(
        "endpoint_equality.csv",
        &header("horizon"),
        est.horizons.iter().zip(&est.reports).map(|(t, r)| estimate_row(t.to_string(), r)),
    )?;
    out.csv(
        "violations.csv",
        &["replica", "excluded", "first_violation"],
        est.violations.iter().enumerate().map(|(i, v)| {
            vec![i.to_string(), v.is_none().to_string(), opt(v.flatten())]
        }),
    )?;
    for (t, r) in est.horizons.iter().zip(&est.reports) {
        out.headline.push((format!("endpoint equality T={t}"), r.clone()));
    }
    out.json("endpoint_equality.json", &json!({ "horizons": est.horizons, "reports": est.reports }))?;
    Ok(out)
}

fn agreement(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let sim = cfg.sim();
    let f = Configuration::new(cfg.agreement_set.iter().copied());
    let rows = run_experiment(
        &|_, seed| {
            let log = build_event_log(sim.with_seed(seed))?;
            let fam = evolve_family(log.view(EdgeMask::HalfLine), &[Configuration::half_line(&log, 0), f.clone()], sim.horizon)?;
            let report = agreement_on_set(&fam[0], &fam[1], &f, cfg.from_time)?;
            Ok((fam[0].boundary_contaminated(), report))
        },
        cfg.replicas,
        cfg.seed,
        cfg.exec(),
    )?;
    out.excluded = rows.iter().filter(|r| r.0).count() as u64;
    let ok = rows.iter().filter(|r| !r.0 && r.1.agrees).count() as u64;
    let r = tally(ok, cfg.replicas - out.excluded, out.excluded, "agreement on F", cfg.horizon)?;
    out.csv(
        "agreement.csv",
        &["replica", "excluded", "agrees", "first_violation"],
        rows.iter().enumerate().map(|(i, (c, a))| {
            vec![i.to_string(), c.to_string(), a.agrees.to_string(), opt(a.first_violation_time)]
        }),
    )?;
    out.json("agreement.json", &json!({ "set": cfg.agreement_set, "from_time": cfg.from_time, "estimate": r }))?;
    out.headline.push(("agreement".into(), r));
    Ok(out)
}

fn tally(ok: u64, trials: u64, excluded: u64, what: &str, horizon: f64) -> Result<EstimateReport> {
    if trials == 0 {
        bail!("all {excluded} replicas were boundary-contaminated");
    }
    Ok(wilson_ci(ok, trials, 0.95)?
        .with_excluded(excluded)
        .with_note(format!("{what} on [0, {horizon}]; truncation at the horizon biases the estimate upward")))
}

fn shape(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let sim = cfg.sim();
    let rows = run_experiment(
        &|_, seed| {
            let log = build_event_log(sim.with_seed(seed))?;
            let view = log.view(EdgeMask::HalfLine);
            let fam = evolve_family(view, &[Configuration::half_line(&log, 0), Configuration::single(0)], sim.horizon)?;
            if fam[0].boundary_contaminated() || fam[1].boundary_contaminated() {
                return Ok(None);
            }
            if !fam[1].survived() {
                return Ok(Some(None));
            }
            Ok(Some(Some(shape_agreement(&fam[0], &fam[1], cfg.shape_a, cfg.shape_t0)?)))
        },
        cfg.replicas,
        cfg.seed,
        cfg.exec(),
    )?;
    out.excluded = rows.iter().filter(|r| r.is_none()).count() as u64;
    let surviving: Vec<bool> = rows.iter().flatten().flatten().copied().collect();
    let ok = surviving.iter().filter(|&&b| b).count() as u64;
    let r = tally(ok, surviving.len() as u64, out.excluded, "shape agreement among surviving runs", cfg.horizon)?;
    out.csv(
        "shape.csv",
        &["replica", "excluded", "survived", "agrees"],
        rows.iter().enumerate().map(|(i, r)| {
            vec![
                i.to_string(),
                r.is_none().to_string(),
                opt(r.map(|s| s.is_some())),
                opt(r.flatten()),
            ]
        }),
    )?;
    out.json("shape.json", &json!({ "a": cfg.shape_a, "t0": cfg.shape_t0, "estimate": r }))?;
    out.headline.push(("shape".into(), r));
    Ok(out)
}

fn psi_options(cfg: &Config) -> PsiOptions {
    PsiOptions {
        margin: cfg.psi_margin,
        ..PsiOptions::default()
    }
}

fn breakpoints(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let sim = cfg.sim();
    let opts = psi_options(cfg);
    let series: Vec<BreakPointSeries> = run_experiment(
        &|_, seed| Ok(psi_sequence_with(&build_event_log(sim.with_seed(seed))?, sim.horizon, &opts)?),
        cfg.replicas,
        cfg.seed,
        cfg.exec(),
    )?;
    out.excluded = series.iter().filter(|s| s.window_suspect).count() as u64;
    let mut psi_rows = Vec::new();
    let mut inc_rows = Vec::new();
    let mut runs: Vec<IncrementSample> = Vec::new();
    for (i, s) in series.iter().enumerate() {
        for p in &s.points {
            psi_rows.push(vec![
                i.to_string(),
                p.k.to_string(),
                p.time.to_string(),
                p.position.to_string(),
                p.censored.to_string(),
                s.window_suspect.to_string(),
            ]);
        }
        if s.window_suspect {
            continue;
        }
        if let Ok(inc) = increments(s) {
            inc_rows.extend(inc.pairs.iter().map(|(dr, dt)| vec![i.to_string(), dr.to_string(), dt.to_string()]));
            runs.push(inc);
        }
    }
    out.csv("psi.csv", &["replica", "k", "psi", "r_psi", "censored", "excluded"], psi_rows)?;
    out.csv("increments.csv", &["replica", "dr", "dpsi"], inc_rows)?;
    let summary = increment_summary(&runs)?;
    out.json("breakpoints.json", &summary)?;
    Ok(out)
}

/// Pooled i.i.d. diagnostics of per-run increment sequences.
pub fn increment_summary(runs: &[IncrementSample]) -> Result<serde_json::Value> {
    let mut pooled = IncrementSample::default();
    let (mut first, mut second) = (IncrementSample::default(), IncrementSample::default());
    for r in runs {
        pooled.extend(r);
        let mid = r.pairs.len() / 2;
        first.pairs.extend_from_slice(&r.pairs[..mid]);
        second.pairs.extend_from_slice(&r.pairs[mid..]);
    }
    let n = pooled.pairs.len();
    let ks_dr = ks_two_sample(&first.dr(), &second.dr(), DEFAULT_LEVEL).ok();
    let ks_dpsi = ks_two_sample(&first.dpsi(), &second.dpsi(), DEFAULT_LEVEL).ok();
    let dr: Vec<Vec<f64>> = runs.iter().map(|r| r.dr()).collect();
    let dpsi: Vec<Vec<f64>> = runs.iter().map(|r| r.dpsi()).collect();
    let ac_dr = pooled_lag_autocorrelation(&dr, 1).ok();
    let ac_dpsi = pooled_lag_autocorrelation(&dpsi, 1).ok();
    Ok(json!({
        "runs": runs.len(),
        "pairs": n,
        "ks_dr": ks_dr,
        "ks_dpsi": ks_dpsi,
        "lag1_dr": ac_dr,
        "lag1_dpsi": ac_dpsi,
        "edge_speed": edge_speed(&pooled.pairs, 0.95).ok(),
    }))
}

fn restart(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let sample = restart_sample(&cfg.sim(), cfg.replicas, &psi_options(cfg), cfg.exec())?;
    out.excluded = sample.excluded_boundary;
    out.csv(
        "restart.csv",
        &["n", "sigma_n", "final_position", "restarts", "censored"],
        sample.records.iter().map(|r| {
            vec![
                r.n.to_string(),
                opt(r.sigma.last()),
                r.final_position.to_string(),
                r.extinction_times.len().to_string(),
                r.censored.to_string(),
            ]
        }),
    )?;
    let fit = geometric_fit(&sample.attempts(), DEFAULT_LEVEL).ok();
    out.json(
        "restart.json",
        &json!({ "records": sample.records.len(), "excluded_boundary": sample.excluded_boundary, "geometric_fit": fit }),
    )?;
    Ok(out)
}

fn clt(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let sample = right_edge_sample(&cfg.sim(), cfg.replicas, cfg.exec())?;
    out.excluded = sample.excluded_boundary;
    let z = sample.standardized().ok();
    out.csv(
        "endpoints.csv",
        &["r_T", "standardized"],
        sample.values.iter().enumerate().map(|(i, r)| {
            vec![r.to_string(), opt(z.as_ref().map(|z| z[i]))]
        }),
    )?;
    let test = z.as_ref().and_then(|z| normality_test(z, DEFAULT_LEVEL).ok());
    let n = sample.values.len() as f64;
    let mean = sample.values.iter().map(|&v| v as f64).sum::<f64>() / n.max(1.0);
    out.json(
        "clt.json",
        &json!({
            "horizon": sample.horizon,
            "surviving": sample.values.len(),
            "extinct": sample.extinct,
            "excluded_boundary": sample.excluded_boundary,
            "alpha_hat": mean / sample.horizon,
            "normality": test,
        }),
    )?;
    Ok(out)
}

fn percolation(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let perc = cfg.perc();
    let n_max = cfg.n_max;
    let runs = run_experiment(
        &|_, seed| {
            let field = gen_field(perc.with_seed(seed))?;
            let origin = origin_run(&field)?;
            let rows: Vec<Vec<String>> = (0..=n_max)
                .map(|n| {
                    let ys = row_sites(n, -cfg.y_fraction * n as f64, cfg.y_fraction * n as f64);
                    let deficit = if n == 0 {
                        None
                    } else {
                        density_deficit(&origin, &ys, cfg.rho, n, DeficitVariant::OriginAlive).ok()
                    };
                    vec![
                        n.to_string(),
                        origin.level(n).len().to_string(),
                        opt(origin.left(n)),
                        opt(origin.right(n)),
                        opt(origin.tau),
                        opt(deficit),
                    ]
                })
                .collect();
            let identity = coupling_identity_check(&field, n_max)?;
            Ok((rows, identity))
        },
        cfg.replicas,
        cfg.seed,
        cfg.exec(),
    )?;
    let mut csv_rows = Vec::new();
    for (i, (rows, _)) in runs.iter().enumerate() {
        csv_rows.extend(rows.iter().map(|r| std::iter::once(i.to_string()).chain(r.iter().cloned()).collect()));
    }
    out.csv("runs.csv", &["replica", "n", "size", "L", "R", "tau_proxy", "deficit"], csv_rows)?;
    let surviving = runs.iter().filter(|r| r.1.is_some()).count();
    let violations = runs.iter().filter(|r| r.1 == Some(false)).count();
    out.json(
        "percolation.json",
        &json!({
            "n_max": n_max,
            "surviving": surviving,
            "identity_checks": surviving,
            "identity_violations": violations,
        }),
    )?;
    Ok(out)
}

fn decay_outputs(out: &mut Outcome, rows: &[DecayRow], extra: serde_json::Value) -> Result<()> {
    out.raw("decay.csv", |w| write_decay_csv(rows, w))?;
    let fit = decay_fit(&rows.iter().map(|r| r.point()).collect::<Vec<_>>());
    let (fit, err) = match fit {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    out.json("decay_fit.json", &json!({ "fit": fit, "fit_error": err, "parameters": extra }))?;
    Ok(())
}

fn default_rows(cfg: &Config, defaults: &[u32]) -> Vec<u32> {
    if !cfg.rows.is_empty() {
        return cfg.rows.clone();
    }
    defaults.iter().copied().filter(|&n| n <= cfg.n_max).collect()
}

fn deficit_decay(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let perc = cfg.perc();
    let note = format!("survival to row {} stands in for an infinite cluster", cfg.n_max);
    match cfg.deficit_event {
        DeficitEvent::Deficit => {
            let ns = default_rows(cfg, &[20, 40, 60, 80]);
            let spec = DeficitSpec {
                fraction: cfg.y_fraction,
                variant: cfg.variant(),
            };
            let raw = deficit_counts(&perc, &ns, spec, cfg.replicas, cfg.exec())?;
            let mut raw_rows = Vec::new();
            for r in &raw {
                for (i, c) in r.counts.iter().enumerate() {
                    raw_rows.push(vec![r.n.to_string(), i.to_string(), r.size_y.to_string(), opt(*c)]);
                }
            }
            out.csv("raw_counts.csv", &["n", "replica", "size_y", "count"], raw_rows)?;
            let counts: Vec<(u32, u64, u64)> = raw.iter().map(|r| (r.n, r.successes(cfg.rho), r.trials())).collect();
            let rows = decay_table(&counts, &note)?;
            decay_outputs(&mut out, &rows, json!({ "event": "deficit", "rho": cfg.rho, "spec": spec }))?;
        }
        DeficitEvent::ExtinctionTail => {
            let ns = default_rows(cfg, &[2, 4, 6, 8, 10, 12]);
            let rows = decay_table(&extinction_counts(&perc, &ns, cfg.replicas, cfg.exec())?, &note)?;
            decay_outputs(&mut out, &rows, json!({ "event": "extinction_tail" }))?;
        }
    }
    Ok(out)
}

fn scan_runs(cfg: &Config) -> Result<Outcome> {
    let mut out = Outcome::new(cfg.replicas);
    let ns = default_rows(cfg, &[20, 40, 60, 80]);
    let spec = ScanSpec {
        b: cfg.scan_b,
        beta: cfg.scan_beta,
        rho: cfg.rho,
    };
    let counts = scan_counts(&cfg.perc(), &ns, spec, cfg.replicas, cfg.exec())?;
    let rows = decay_table(&counts, "scan of consecutive blocks")?;
    decay_outputs(&mut out, &rows, json!({ "event": "scan", "spec": spec }))?;
    Ok(out)
}
