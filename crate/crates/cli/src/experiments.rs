//! The six experiments. Each returns a table for `series.csv`, a JSON summary
//! and verification records.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};
use sos_core::mcmc::{
    default_cap, detailed_balance_defect, half_sweep_kernel, run_chain, stationarity_defect,
    sweep_kernel, MAX_KERNEL_STATES,
};
use sos_core::observables::{
    critical_downward_excess, downward_excess, mode_heights, theorem_events, two_level_fraction,
    upward_excess, zero_counts, BatchSummary,
};
use sos_core::oracle::{
    check_level_lift_injectivity, check_signed_lift_injectivity, check_zero_lift_injectivity,
    pattern_common_bound, pattern_lhs, pattern_reference, random_lifting_cases,
    verify_lifting_inequalities, verify_marginalization, verify_spike_identity, CappedSpace,
    ExactLaw, PatternGraph, PatternReference, VerificationRecord,
};
use sos_core::{kappa, typical_heights, Field, Parameters};

use crate::config::ExperimentConfig;
use crate::runner::{
    coupled_run, holley_record, jobs, par_jobs, run_spec, sample, ExperimentOutput, Job, Sampled,
};
use crate::table::{num, Table};

/// Mean and batch-means error for every column.
fn summarize(names: &[String], columns: &[Vec<f64>]) -> Value {
    let mut map = Map::new();
    for (name, col) in names.iter().zip(columns) {
        map.insert(name.clone(), json!(BatchSummary::from_values(col)));
    }
    Value::Object(map)
}

fn push_samples(table: &mut Table, job: &Job, extra: &[String], sampled: &Sampled) {
    for (i, s) in sampled.sweeps.iter().enumerate() {
        let mut row = vec![job.index.to_string(), job.n.to_string(), num(job.h)];
        row.extend(extra.iter().cloned());
        row.push(s.to_string());
        row.extend(sampled.columns.iter().map(|c| num(c[i])));
        table.push(row);
    }
}

fn job_params(config: &ExperimentConfig, job: &Job) -> Result<Parameters> {
    Parameters::new(config.beta, job.h, job.n).context("invalid job parameters")
}

fn heights_json(params: &Parameters) -> Value {
    let t = typical_heights(params);
    json!({ "H": t.typical, "H_w": t.critical })
}

// ---------------------------------------------------------------- oracle

const SPIKE_BETAS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
const SPIKE_TOL: f64 = 1e-10;
const PATTERN_TOL: f64 = 1e-10;
const MARGINAL_PIN: f64 = 1e-4;

pub(crate) fn oracle_verify(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut table = Table::new(["check", "beta", "case", "lhs", "rhs", "discrepancy", "pass"]);
    let mut records = Vec::new();
    let row = |table: &mut Table,
               check: &str,
               beta: f64,
               case: String,
               lhs: f64,
               rhs: f64,
               d: f64,
               pass: bool| {
        table.push(vec![
            check.into(),
            num(beta),
            case,
            num(lhs),
            num(rhs),
            num(d),
            pass.to_string(),
        ]);
    };

    // spike identity over x in {0..5}^4
    let mut betas = SPIKE_BETAS.to_vec();
    if !betas.contains(&config.beta) {
        betas.push(config.beta);
    }
    for &beta in &betas {
        let mut worst = (0.0f64, 0.0, 0.0);
        let mut cases = 0;
        for i in 0..6u32.pow(4) {
            let x = [i % 6, (i / 6) % 6, (i / 36) % 6, i / 216];
            let sides = verify_spike_identity(x, beta);
            let rel = sides.relative_error();
            let case = format!("x={};{};{};{}", x[0], x[1], x[2], x[3]);
            row(
                &mut table,
                "spike_identity",
                beta,
                case,
                sides.lhs,
                sides.rhs,
                rel,
                rel <= SPIKE_TOL,
            );
            cases += 1;
            if rel >= worst.0 {
                worst = (rel, sides.lhs, sides.rhs);
            }
        }
        records.push(
            VerificationRecord::new(
                "spike_identity",
                worst.1,
                worst.2,
                worst.0,
                worst.0 <= SPIKE_TOL,
            )
            .with("beta", beta)
            .with("cases", cases as f64)
            .with("tolerance", SPIKE_TOL),
        );
    }

    // pattern sums at the wetting threshold over beta in [1, 4]
    let mut grid: Vec<f64> = (0..=60).map(|i| 1.0 + 0.05 * i as f64).collect();
    if !grid.iter().any(|b| (b - config.beta).abs() < 1e-12) {
        grid.push(config.beta);
    }
    let mut worst: BTreeMap<(String, &'static str), (f64, f64, f64, bool)> = BTreeMap::new();
    for &beta in &grid {
        let params = Parameters::critical(beta, 1)?;
        for pattern in PatternGraph::all() {
            let lhs = pattern_lhs(&pattern, &params)?;
            let mut checks = Vec::new();
            match pattern_reference(pattern.id(), beta) {
                Some(PatternReference::Exact(r)) => {
                    let rel = (lhs - r).abs() / r;
                    checks.push(("pattern_closed_form", r, rel, rel <= PATTERN_TOL));
                }
                Some(PatternReference::LowerBound(r)) => {
                    checks.push(("pattern_partial_sum_bound", r, (r - lhs).max(0.0), lhs >= r));
                }
                None => {}
            }
            let bound = pattern_common_bound(beta);
            checks.push((
                "pattern_common_bound",
                bound,
                (bound - lhs).max(0.0),
                lhs >= bound,
            ));
            for (check, rhs, d, pass) in checks {
                row(
                    &mut table,
                    check,
                    beta,
                    pattern.shape().replace(' ', "_"),
                    lhs,
                    rhs,
                    d,
                    pass,
                );
                let entry = worst.entry((pattern.shape().to_owned(), check)).or_insert((
                    f64::NEG_INFINITY,
                    0.0,
                    0.0,
                    true,
                ));
                if d >= entry.0 {
                    *entry = (d, lhs, rhs, entry.3);
                }
                entry.3 &= pass;
            }
        }
    }
    for ((shape, check), (d, lhs, rhs, pass)) in worst {
        let id = PatternGraph::all()
            .iter()
            .find(|p| p.shape() == shape)
            .map_or(0, |p| p.id());
        records.push(
            VerificationRecord::new(
                format!("{check}/{}", shape.replace(' ', "_")),
                lhs,
                rhs,
                d,
                pass,
            )
            .with("pattern_id", id as f64)
            .with("betas", grid.len() as f64),
        );
    }

    // signed-space marginal at increasing truncation depth
    let reports: Vec<_> = (0..=3)
        .map(|d| verify_marginalization(2, 2, d, config.beta))
        .collect::<Result<_, _>>()
        .context("marginalization check")?;
    for r in &reports {
        let pass = r.max_discrepancy <= r.analytic_bound;
        row(
            &mut table,
            "marginalization",
            r.beta,
            format!("D={}", r.depth),
            r.max_discrepancy,
            r.analytic_bound,
            r.max_discrepancy,
            pass,
        );
        records.push(
            VerificationRecord::new(
                "marginalization_within_bound",
                r.max_discrepancy,
                r.analytic_bound,
                r.max_discrepancy,
                pass,
            )
            .with("N", 2.0)
            .with("cap", 2.0)
            .with("depth", r.depth as f64)
            .with("beta", r.beta),
        );
    }
    let monotone = reports
        .windows(2)
        .all(|w| w[1].max_discrepancy < w[0].max_discrepancy);
    records.push(
        VerificationRecord::new(
            "marginalization_decreasing_in_depth",
            reports[0].max_discrepancy,
            reports[3].max_discrepancy,
            0.0,
            monotone,
        )
        .with("beta", config.beta),
    );
    let last = reports[3].max_discrepancy;
    records.push(
        VerificationRecord::new(
            "marginalization_depth_3_pin",
            last,
            MARGINAL_PIN,
            last,
            last < MARGINAL_PIN,
        )
        .with("beta", config.beta),
    );

    // lifting maps
    let lifting =
        verify_lifting_inequalities(random_lifting_cases(&[2, 3, 4, 5], 5, 2_000, config.seed));
    row(
        &mut table,
        "lifting_inequalities",
        config.beta,
        "random".into(),
        lifting.violations.len() as f64,
        0.0,
        lifting.violations.len() as f64,
        lifting.passed(),
    );
    records.push(
        VerificationRecord::new(
            "lifting_inequalities",
            lifting.violations.len() as f64,
            0.0,
            lifting.violations.len() as f64,
            lifting.passed(),
        )
        .with("zero_cases", lifting.zero_cases as f64)
        .with("level_cases", lifting.level_cases as f64),
    );
    let space = CappedSpace::new(2, 2)?;
    let injectivity = [
        ("zero_lift_injective", check_zero_lift_injectivity(&space)),
        (
            "level_1_lift_injective",
            check_level_lift_injectivity(&space, 1),
        ),
        (
            "level_2_lift_injective",
            check_level_lift_injectivity(&space, 2),
        ),
        (
            "signed_lift_injective",
            check_signed_lift_injectivity(&CappedSpace::signed(2, 2, 2)?),
        ),
    ];
    for (name, rep) in injectivity {
        row(
            &mut table,
            name,
            config.beta,
            "N=2".into(),
            rep.pairs as f64,
            rep.distinct_images as f64,
            (rep.pairs - rep.distinct_images) as f64,
            rep.injective(),
        );
        records.push(
            VerificationRecord::new(
                name,
                rep.pairs as f64,
                rep.distinct_images as f64,
                (rep.pairs - rep.distinct_images) as f64,
                rep.injective(),
            )
            .with("N", 2.0),
        );
    }

    let failed: Vec<&str> = records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check_name.as_str())
        .collect();
    let summary = json!({
        "checks": records.len(),
        "failed": failed,
        "spike_cases": 6u32.pow(4) as usize * betas.len(),
        "pattern_betas": grid.len(),
        "marginalization": reports,
    });
    Ok(ExperimentOutput {
        table,
        summary,
        records,
    })
}

// ---------------------------------------------------------------- sampler

const TV_TOL: f64 = 0.01;
const BALANCE_TOL: f64 = 1e-10;

pub(crate) fn sampler_validate(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let all = jobs(config);
    let results = par_jobs(&all, |job| {
        let params = job_params(config, job)?;
        let spec = run_spec(config, &params, job.index as u64, false);
        let cap = spec.cap.expect("resolved cap");
        let space = CappedSpace::new(job.n, cap)
            .with_context(|| format!("exact enumeration for N = {}, cap = {cap}", job.n))?;
        let law = ExactLaw::new(&space, &params)?;
        let mut counts = vec![0u64; space.size() as usize];
        let meta = run_chain(&params, &spec, |_, s| {
            counts[space.index_of(&s.field()).expect("heights within cap") as usize] += 1;
        })?;
        let kernels = if space.size() <= MAX_KERNEL_STATES {
            let balance = (0..2)
                .map(|c| {
                    half_sweep_kernel(&space, &params, c)
                        .map(|k| detailed_balance_defect(law.probabilities(), &k))
                })
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let stationarity =
                stationarity_defect(law.probabilities(), &sweep_kernel(&space, &params)?);
            Some((balance, stationarity))
        } else {
            None
        };
        Ok((params, law, counts, meta, kernels))
    })?;

    let mut table = Table::new(["job", "N", "h", "state", "count", "empirical", "exact"]);
    let mut records = Vec::new();
    let mut job_summaries = Vec::new();
    for (job, (params, law, counts, meta, kernels)) in all.iter().zip(results) {
        let total: u64 = counts.iter().sum();
        for (state, (&c, &p)) in counts.iter().zip(law.probabilities()).enumerate() {
            let emp = if total == 0 {
                f64::NAN
            } else {
                c as f64 / total as f64
            };
            table.push(vec![
                job.index.to_string(),
                job.n.to_string(),
                num(job.h),
                state.to_string(),
                c.to_string(),
                num(emp),
                num(p),
            ]);
        }
        let tv = if total == 0 {
            f64::NAN
        } else {
            law.total_variation(&counts)
        };
        records.push(
            VerificationRecord::new("sampler_total_variation", tv, TV_TOL, tv, tv < TV_TOL)
                .soft()
                .with("N", job.n as f64)
                .with("h", job.h)
                .with("samples", total as f64),
        );
        if let Some((balance, stationarity)) = kernels {
            records.push(
                VerificationRecord::new(
                    "detailed_balance",
                    balance,
                    0.0,
                    balance,
                    balance < BALANCE_TOL,
                )
                .with("N", job.n as f64)
                .with("h", job.h),
            );
            records.push(
                VerificationRecord::new(
                    "sweep_stationarity",
                    stationarity,
                    0.0,
                    stationarity,
                    stationarity < BALANCE_TOL,
                )
                .with("N", job.n as f64)
                .with("h", job.h),
            );
        }
        job_summaries.push(json!({
            "job": job,
            "params": params,
            "states": law.probabilities().len(),
            "total_variation": tv,
            "detailed_balance_defect": kernels.map(|k| k.0),
            "stationarity_defect": kernels.map(|k| k.1),
            "run": meta,
        }));
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({ "jobs": job_summaries }),
        records,
    })
}

// ---------------------------------------------------------------- domination

pub(crate) fn domination(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut hs = config.h_resolved.clone();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    let pairs: Vec<(f64, f64)> = hs.windows(2).map(|w| (w[0], w[1])).collect();
    if pairs.is_empty() {
        anyhow::bail!("domination needs two distinct h values");
    }
    let mut pair_jobs = Vec::new();
    for &n in &config.n {
        for &(h1, h2) in &pairs {
            pair_jobs.push((
                Job {
                    index: pair_jobs.len(),
                    n,
                    h: h1,
                },
                h2,
            ));
        }
    }
    let mut names = vec![
        "zeros_h1".to_owned(),
        "zeros_h2".into(),
        "q2_h1".into(),
        "q2_h2".into(),
    ];
    for m in &config.m {
        names.push(format!("upward_m{m}_h1"));
        names.push(format!("upward_m{m}_h2"));
    }
    let width = names.len();
    let ms = config.m.clone();

    let plain: Vec<Job> = pair_jobs.iter().map(|(j, _)| *j).collect();
    let results = par_jobs(&plain, |job| {
        let h2 = pair_jobs[job.index].1;
        let p1 = job_params(config, job)?;
        let p2 = p1.with_h(h2)?;
        let spec = run_spec(config, &p1, job.index as u64, false);
        let observe = |lo: &Field, hi: &Field| {
            let (zl, zh) = (zero_counts(lo), zero_counts(hi));
            let mut v = vec![
                zl.total as f64,
                zh.total as f64,
                zl.non_isolated as f64,
                zh.non_isolated as f64,
            ];
            for &m in &ms {
                v.push(upward_excess(lo, &p1, m) as f64);
                v.push(upward_excess(hi, &p2, m) as f64);
            }
            v
        };
        Ok((p1, p2, spec, coupled_run(&p1, &p2, &spec, observe, width)))
    })?;

    let mut header = vec![
        "job".to_owned(),
        "N".into(),
        "h1".into(),
        "h2".into(),
        "sweep_index".into(),
    ];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    let mut records = vec![holley_record(config)];
    let mut job_summaries = Vec::new();
    for ((job, h2), (p1, _p2, _spec, (sampled, failure, done))) in pair_jobs.iter().zip(results) {
        push_samples(&mut table, job, &[num(*h2)], &sampled);
        let z1 = BatchSummary::from_values(&sampled.columns[0]);
        let z2 = BatchSummary::from_values(&sampled.columns[1]);
        records.push(
            VerificationRecord::new(
                "coupled_ordering",
                done as f64,
                config.sweeps as f64,
                failure.is_some() as u8 as f64,
                failure.is_none(),
            )
            .with("N", job.n as f64)
            .with("h1", job.h)
            .with("h2", *h2),
        );
        records.push(
            VerificationRecord::new(
                "zero_count_dominance_2sigma",
                z2.mean,
                z1.mean,
                z2.mean - z1.mean,
                z2.exceeds(&z1, 2.0),
            )
            .soft()
            .with("N", job.n as f64)
            .with("h1", job.h)
            .with("h2", *h2),
        );
        job_summaries.push(json!({
            "job": job.index,
            "N": job.n,
            "h1": job.h,
            "h2": h2,
            "heights": heights_json(&p1),
            "sweeps_completed": done,
            "ordering_violation": failure.map(|e| e.to_string()),
            "observables": summarize(&names, &sampled.columns),
            "zeros_h2_exceeds_h1_2sigma": z2.exceeds(&z1, 2.0),
            "run": sampled.metadata,
        }));
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({ "jobs": job_summaries }),
        records,
    })
}

// ---------------------------------------------------------------- subcritical

fn event_frequency(col: &[f64]) -> f64 {
    if col.is_empty() {
        f64::NAN
    } else {
        col.iter().sum::<f64>() / col.len() as f64
    }
}

pub(crate) fn subcritical_height(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut names: Vec<String> = [
        "mode",
        "fraction_at_mode",
        "fraction_at_mode_minus_1",
        "two_level_fraction_H",
        "zeros",
        "q1",
        "q2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for m in &config.m {
        names.push(format!("upward_m{m}"));
        names.push(format!("downward_m{m}"));
        names.push(format!("event_upward_m{m}"));
        names.push(format!("event_downward_m{m}"));
    }
    let all = jobs(config);
    let results = par_jobs(&all, |job| {
        let params = job_params(config, job)?;
        let spec = run_spec(config, &params, job.index as u64, false);
        let h_typ = typical_heights(&params).typical;
        let sampled = sample(&params, &spec, names.len(), |f| {
            let mh = mode_heights(f);
            let z = zero_counts(f);
            let mut v = vec![
                mh.mode as f64,
                mh.fraction_at_mode,
                mh.fraction_at_mode_minus_1,
                two_level_fraction(f, h_typ),
                z.total as f64,
                z.isolated as f64,
                z.non_isolated as f64,
            ];
            for &m in &config.m {
                let e = theorem_events(f, &params, m, config.c[0]);
                v.push(upward_excess(f, &params, m) as f64);
                v.push(downward_excess(f, &params, m) as f64);
                v.push(e.upward as u8 as f64);
                v.push(e.downward as u8 as f64);
            }
            v
        })?;
        Ok((params, sampled))
    })?;

    let mut header = vec![
        "job".to_owned(),
        "N".into(),
        "h".into(),
        "sweep_index".into(),
    ];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    let mut job_summaries = Vec::new();
    for (job, (params, sampled)) in all.iter().zip(results) {
        push_samples(&mut table, job, &[], &sampled);
        let col = |name: &str| {
            &sampled.columns[names.iter().position(|n| n == name).expect("known column")]
        };
        let n2 = (job.n * job.n) as f64;
        let mut per_m = Vec::new();
        for &m in &config.m {
            per_m.push(json!({
                "m": m,
                "upward_density_mean": event_frequency(col(&format!("upward_m{m}"))) / n2,
                "downward_density_mean": event_frequency(col(&format!("downward_m{m}"))) / n2,
                "event_upward_frequency": event_frequency(col(&format!("event_upward_m{m}"))),
                "event_downward_frequency": event_frequency(col(&format!("event_downward_m{m}"))),
                "upward_threshold": (-2.0 * params.beta() * m as f64).exp() * n2,
                "downward_threshold": 2.0 * (-2.0 * params.beta() * m as f64).exp() * n2,
            }));
        }
        job_summaries.push(json!({
            "job": job.index,
            "N": job.n,
            "h": job.h,
            "h_fraction_of_hw": job.h / config.h_w,
            "kappa": kappa(&params).ok(),
            "heights": heights_json(&params),
            "observables": summarize(&names, &sampled.columns),
            "two_level_fraction_H": event_frequency(col("two_level_fraction_H")),
            "by_m": per_m,
            "run": sampled.metadata,
        }));
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({ "jobs": job_summaries }),
        records: Vec::new(),
    })
}

// ---------------------------------------------------------------- critical

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / k,
        pts.iter().map(|p| p.1).sum::<f64>() / k,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub(crate) fn critical_zeros(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut names: Vec<String> = ["zeros", "q1", "q2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for m in &config.m {
        names.push(format!("critical_downward_m{m}"));
    }
    for c in &config.c {
        names.push(format!("event_q2_C{c}"));
    }
    for m in &config.m {
        for c in &config.c {
            names.push(format!("event_joint_m{m}_C{c}"));
        }
    }
    let all = jobs(config);
    let results = par_jobs(&all, |job| {
        let params = job_params(config, job)?;
        let spec = run_spec(config, &params, job.index as u64, true);
        let sampled = sample(&params, &spec, names.len(), |f| {
            let z = zero_counts(f);
            let mut v = vec![z.total as f64, z.isolated as f64, z.non_isolated as f64];
            for &m in &config.m {
                v.push(critical_downward_excess(f, &params, m) as f64);
            }
            for &c in &config.c {
                v.push(theorem_events(f, &params, 1, c).non_isolated_linear as u8 as f64);
            }
            for &m in &config.m {
                for &c in &config.c {
                    v.push(theorem_events(f, &params, m, c).critical_joint as u8 as f64);
                }
            }
            v
        })?;
        Ok((params, sampled))
    })?;

    let mut header = vec![
        "job".to_owned(),
        "N".into(),
        "h".into(),
        "sweep_index".into(),
    ];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    let mut job_summaries = Vec::new();
    let mut by_h: BTreeMap<String, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for (job, (params, sampled)) in all.iter().zip(results) {
        push_samples(&mut table, job, &[], &sampled);
        let q1 = event_frequency(&sampled.columns[1]);
        let q2 = event_frequency(&sampled.columns[2]);
        by_h.entry(num(job.h)).or_default().push((job.n, q1, q2));
        job_summaries.push(json!({
            "job": job.index,
            "N": job.n,
            "h": job.h,
            "is_critical": params.is_critical(),
            "heights": heights_json(&params),
            "observables": summarize(&names, &sampled.columns),
            "q1_over_q2": q1 / q2,
            "run": sampled.metadata,
        }));
    }
    let fits: Vec<Value> = by_h
        .into_iter()
        .map(|(h, pts)| {
            let q2: Vec<(f64, f64)> = pts.iter().map(|&(n, _, q2)| (n as f64, q2)).collect();
            let q1: Vec<(f64, f64)> = pts.iter().map(|&(n, q1, _)| (n as f64, q1)).collect();
            let largest = pts.iter().max_by_key(|p| p.0).copied();
            json!({
                "h": h.parse::<f64>().unwrap_or(f64::NAN),
                "N": pts.iter().map(|p| p.0).collect::<Vec<_>>(),
                "q2_exponent": log_log_slope(&q2),
                "q1_exponent": log_log_slope(&q1),
                "q1_over_q2_at_largest_N": largest.map(|p| p.1 / p.2),
            })
        })
        .collect();
    Ok(ExperimentOutput {
        table,
        summary: json!({ "jobs": job_summaries, "fits": fits }),
        records: Vec::new(),
    })
}

pub(crate) fn critical_height_explore(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let names: Vec<String> = [
        "mode",
        "fraction_at_mode",
        "fraction_at_mode_minus_1",
        "two_level_fraction_Hw",
        "mean_height",
        "zeros",
        "q1",
        "q2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let all = jobs(config);
    let results = par_jobs(&all, |job| {
        let params = job_params(config, job)?;
        let spec = run_spec(config, &params, job.index as u64, true);
        let hw = typical_heights(&params).critical;
        let sampled = sample(&params, &spec, names.len(), |f| {
            let mh = mode_heights(f);
            let z = zero_counts(f);
            let mean = f.heights().iter().map(|&v| v as f64).sum::<f64>() / f.len() as f64;
            vec![
                mh.mode as f64,
                mh.fraction_at_mode,
                mh.fraction_at_mode_minus_1,
                two_level_fraction(f, hw),
                mean,
                z.total as f64,
                z.isolated as f64,
                z.non_isolated as f64,
            ]
        })?;
        Ok((params, sampled))
    })?;

    let mut header = vec![
        "job".to_owned(),
        "N".into(),
        "h".into(),
        "sweep_index".into(),
    ];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    let mut job_summaries = Vec::new();
    for (job, (params, sampled)) in all.iter().zip(results) {
        push_samples(&mut table, job, &[], &sampled);
        job_summaries.push(json!({
            "job": job.index,
            "N": job.n,
            "h": job.h,
            "is_critical": params.is_critical(),
            "heights": heights_json(&params),
            "default_cap": default_cap(params.beta(), params.n()),
            "observables": summarize(&names, &sampled.columns),
            "run": sampled.metadata,
        }));
    }
    Ok(ExperimentOutput {
        table,
        summary: json!({ "jobs": job_summaries }),
        records: Vec::new(),
    })
}
