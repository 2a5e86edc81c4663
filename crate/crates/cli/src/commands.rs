//! One function per experiment kind.

use serde_json::json;

use msalab::decay::{central_half, mass_profile};
use msalab::geometry::{covering_check, projection_check};
use msalab::hamiltonian::OperatorMatrix;
use msalab::msa::{
    estimate_count_tail, estimate_ds, estimate_s0, estimate_ws1, estimate_ws2,
    j_ns_criterion_check, scale_sequence, CountOptions, McEstimate,
};
use msalab::report::fmt17;
use msalab::spectral::{classify, ClassifyOptions};
use msalab::{assemble, diagonalize, green, BoxSpec};

use crate::config::{ExperimentConfig, GeometrySuite, Kind, WegnerEvent};
use crate::error::CliError;
use crate::output::{Artifacts, SummaryRow};

pub fn run(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    match c.kind() {
        Kind::Assemble => run_assemble(c),
        Kind::Spectrum => run_spectrum(c),
        Kind::Green => run_green(c),
        Kind::Classify => run_classify(c),
        Kind::GeometryCheck => run_geometry(c),
        Kind::Scales => run_scales(c),
        Kind::McWegner | Kind::McS0 | Kind::McDs | Kind::McCount => run_monte_carlo(c),
        Kind::JnsCheck => run_jns(c),
        Kind::Decay => run_decay(c),
    }
}

fn realization(c: &ExperimentConfig) -> u64 {
    c.experiment.realization.expect("resolved")
}

fn run_assemble(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let b = c.primary_box();
    let v = c.model.potential_for(&b, realization(c));
    let op = assemble(&b, &c.model, &v)?;
    let mut coo = Vec::new();
    op.write_coo(&mut coo)?;
    let mut a = Artifacts::default();
    a.records.push(json!({
        "record": "operator",
        "box": b,
        "realization": realization(c),
        "dim": op.dim(),
        "storage": match op.matrix {
            OperatorMatrix::Dense(_) => "dense",
            OperatorMatrix::Sparse { .. } => "sparse",
        },
        "nonzeros": op.matrix.triplets().len(),
        "adjacency": op.adjacency,
    }));
    a.files
        .push(("assemble.coo".into(), String::from_utf8(coo).expect("ascii")));
    Ok(a)
}

fn run_spectrum(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let b = c.primary_box();
    let v = c.model.potential_for(&b, realization(c));
    let s = diagonalize(&assemble(&b, &c.model, &v)?)?;
    let mut a = Artifacts::default();
    a.records.push(json!({
        "record": "spectrum",
        "box": b,
        "realization": realization(c),
        "eigenvalues": s.eigenvalues,
    }));
    Ok(a)
}

fn run_green(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let b = c.primary_box();
    let ex = &c.experiment;
    let (x, y, e) = (ex.x.clone().unwrap(), ex.y.clone().unwrap(), ex.energy.unwrap());
    let v = c.model.potential_for(&b, realization(c));
    let g = green(&assemble(&b, &c.model, &v)?, e, &x, &y)?;
    let mut a = Artifacts::default();
    a.records.push(json!({
        "record": "green",
        "box": b,
        "realization": realization(c),
        "E": e,
        "x": x,
        "y": y,
        "value": g,
    }));
    Ok(a)
}

fn run_classify(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let b = c.primary_box();
    let ex = &c.experiment;
    let v = c.model.potential_for(&b, realization(c));
    let opts = ClassifyOptions {
        beta: c.msa.beta,
        alpha: c.msa.alpha,
        grid: c.grid(),
        sub_side: ex.sub_side,
        stride: ex.stride.unwrap(),
    };
    let report = classify(&b, &c.model, &v, ex.energy.unwrap(), ex.mass.unwrap(), &opts)?;
    let mut a = Artifacts::default();
    a.record("classification", &report);
    Ok(a)
}

fn run_geometry(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let ex = &c.experiment;
    let suite = ex.suite.unwrap();
    let mut a = Artifacts::default();
    let mut violations = 0;
    let lengths = ex.lengths.clone().unwrap();
    if matches!(suite, GeometrySuite::Covering | GeometrySuite::Both) {
        for x in ex.points.as_ref().unwrap() {
            for &l in &lengths {
                let check = covering_check(x, l, ex.range.unwrap());
                violations += check.violations.len();
                a.record("covering", &check);
            }
        }
    }
    if matches!(suite, GeometrySuite::Projections | GeometrySuite::Both) {
        for &l in &lengths {
            let check = projection_check(2, l, ex.r0.unwrap(), ex.samples.unwrap(), c.model.disorder.seed);
            violations += check.violations.len();
            a.record("projections", &check);
        }
    }
    if violations > 0 {
        a.failure = Some(format!("{} geometry violations", violations));
    }
    Ok(a)
}

fn run_scales(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let s = scale_sequence(&c.msa, c.experiment.k_max.unwrap())?;
    let mut a = Artifacts::default();
    a.record("scales", &s);
    Ok(a)
}

fn count_options(c: &ExperimentConfig) -> CountOptions {
    let ex = &c.experiment;
    CountOptions {
        kind: ex.count_kind.unwrap(),
        stride: ex.stride,
        cap: ex.cap.unwrap(),
    }
}

fn run_monte_carlo(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let ex = &c.experiment;
    let trials = c.trials.unwrap();
    let center = ex.center.clone().unwrap();
    let mut a = Artifacts::default();
    for &side in ex.sides.as_ref().unwrap() {
        let b = BoxSpec::new(center.clone(), side);
        let pair = || BoxSpec::new(ex.other_center.clone().unwrap(), side);
        let (est, m): (McEstimate, Option<f64>) = match c.kind() {
            Kind::McWegner => match ex.event.unwrap() {
                WegnerEvent::Ws1 => (
                    estimate_ws1(&b, &c.model, ex.energy.unwrap(), c.msa.beta, trials)?,
                    None,
                ),
                WegnerEvent::Ws2 => (estimate_ws2(&b, &pair(), &c.model, c.msa.beta, trials)?, None),
            },
            Kind::McS0 => (
                estimate_s0(&b, &c.model, &c.grid(), c.msa.m0, trials)?,
                Some(c.msa.m0),
            ),
            Kind::McDs => {
                let m = ex.mass.unwrap();
                (estimate_ds(&b, &pair(), &c.model, &c.grid(), m, trials)?, Some(m))
            }
            Kind::McCount => {
                let m = ex.mass.unwrap();
                let est = estimate_count_tail(
                    &b,
                    ex.sub_side.unwrap(),
                    &c.model,
                    &c.grid(),
                    m,
                    ex.threshold.unwrap(),
                    &count_options(c),
                    trials,
                )?;
                (est, Some(m))
            }
            _ => unreachable!("not a Monte Carlo kind"),
        };
        for (i, &hit) in est.outcomes.iter().enumerate() {
            a.records.push(json!({
                "record": "realization",
                "event": est.event,
                "L": side,
                "index": i,
                "hit": hit,
            }));
        }
        a.record("estimate", &json!({ "L": side, "m": m, "estimate": est }));
        a.summary.push(SummaryRow {
            event: est.event.clone(),
            side,
            n: c.model.n_particles,
            d: c.model.dim,
            g: c.model.coupling,
            m,
            estimate: est,
            seed: c.model.disorder.seed,
        });
    }
    Ok(a)
}

fn run_jns(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let ex = &c.experiment;
    let b = c.primary_box();
    let v = c.model.potential_for(&b, realization(c));
    let report = j_ns_criterion_check(
        &b,
        ex.sub_side.unwrap(),
        &c.model,
        &v,
        ex.energy.unwrap(),
        c.msa.j,
        ex.mass.unwrap(),
        c.msa.alpha,
        c.msa.beta,
        &count_options(c),
    )?;
    let mut a = Artifacts::default();
    if report.conclusion_holds == Some(false) {
        a.failure = Some("criterion hypotheses hold but the container is singular".into());
    }
    a.record("jns", &report);
    Ok(a)
}

fn run_decay(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let b = c.primary_box();
    let v = c.model.potential_for(&b, realization(c));
    let op = assemble(&b, &c.model, &v)?;
    let s = diagonalize(&op)?;
    let window = c.experiment.window.unwrap_or_else(|| central_half(&s));
    let profile = mass_profile(&s, op.sites(), window, c.experiment.statistic.unwrap());
    let mut a = Artifacts::default();
    let mut rows = Vec::new();
    for f in &profile.fits {
        a.record("eigenstate", f);
        rows.push(vec![
            f.index.to_string(),
            fmt17(f.eigenvalue),
            format!("{:?}", f.fit.center),
            fmt17(f.fit.mass_hat),
            fmt17(f.fit.r2),
            f.fit.shells_used.to_string(),
        ]);
    }
    a.record(
        "profile",
        &json!({
            "window": profile.window,
            "skipped": profile.skipped,
            "summary": profile.summary,
            "realization": realization(c),
        }),
    );
    let header = ["eigenindex", "eigenvalue", "center", "mass_hat", "r2", "shells_used"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    a.tables.push(("decay.csv".into(), header, rows));
    Ok(a)
}
