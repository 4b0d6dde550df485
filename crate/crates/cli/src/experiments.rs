//! Preset runners. Each runner reads its knobs, writes its artifacts into the
//! output directory and records named checks against tolerances.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use seqdyn_core::conjugacy::{
    conjugacy_residual, itinerary_oracle, quasi_conjugacy_expanding, sequential_conjugacy, shifted_conjugacy,
    ConjugacySample, PointwiseConjugacy,
};
use seqdyn_core::digits::DigitProgram;
use seqdyn_core::entropy::{analytic_entropy, entropy_comparison_report, entropy_estimate, CandidateSet};
use seqdyn_core::ergodic::{
    average_invariance_defect, empirical_measure, for_each_orbit_point, irregular_point, irregular_transport,
    measure_distance, periodic_limit_measure, EmpiricalMeasure, OrbitStart, Provenance, Support, TransportOptions,
};
use seqdyn_core::limit_stats::{
    asip_rate_schedule, clt_check, partial_sum_ensemble, pathwise_drift, rate_status, sigma_green_kubo, RateStatus,
    SeriesStats,
};
use seqdyn_core::shadowing::{lipschitz_fit, FitOptions};
use seqdyn_core::{seq_distance, MapSequence, Observable, Order, Point, SequenceForm, SmoothMap, Space};

use crate::artifacts::{write_json, CsvSink, Field};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::presets::Preset;

/// Default knob values and tolerances, shared with `describe`.
pub mod defaults {
    pub const DELTAS: [f64; 3] = [1e-2, 1e-3, 1e-4];
    pub const TRIALS: usize = 100;
    pub const LEN: usize = 500;
    pub const TOL: f64 = 1e-9;
    pub const SLOPE_TOL: f64 = 0.1;

    pub const RESOLUTION: usize = 4096;
    pub const DEPTH: usize = 40;
    pub const ORACLE_POINTS: usize = 1024;
    pub const TAIL_SHIFTS: usize = 12;
    pub const RESIDUAL_TOL: f64 = 1e-6;
    pub const SPREAD_TOL: f64 = 2.0;
    pub const TAIL_FINAL_TOL: f64 = 1e-4;

    pub const QUASI_RESOLUTION: usize = 4096;

    pub const STARTS: usize = 200;
    pub const ORBIT_N: usize = 1_000_000;
    pub const BINS: usize = 4096;
    pub const WINDOW: f64 = 0.01;
    pub const WITHIN_FRACTION: f64 = 0.95;
    pub const KS_MEDIAN_TOL: f64 = 0.01;
    /// Steps of the averaged invariance defect reported as a metric.
    pub const DEFECT_STEPS: usize = 64;

    pub const PERIODIC_KS_TOL: f64 = 0.02;

    pub const TRACE_LEN: usize = 1_000_000;
    pub const TRACE_STRIDE: usize = 1000;
    pub const TRANSPORT_RESOLUTION: usize = 1024;
    pub const LIMSUP_MIN: f64 = 0.9;
    pub const LIMINF_MAX: f64 = -0.4;
    pub const GAP_TOL: f64 = 0.1;

    pub const COMPARE_NS: [usize; 4] = [8, 10, 12, 14];
    pub const COMPARE_RESOLUTION: usize = 1 << 18;
    pub const ENTROPY_TOL_CIRCLE: f64 = 0.05;
    pub const ENTROPY_TOL_TORUS: f64 = 0.1;
    /// Shifts searched for N_ε.
    pub const MAX_SHIFTS: usize = 64;

    pub const SAMPLES: usize = 1 << 24;
    pub const LAG_MAX: usize = 64;
    pub const ENSEMBLE_N: usize = 1 << 16;
    pub const ENSEMBLE: usize = 2000;
    pub const COBOUNDARY: bool = false;
    pub const RATE_C: f64 = 1.0;
    pub const RATE_EPSILON: f64 = 0.1;
    pub const RATE_ALPHA: f64 = 1.0;
    pub const N_MAX: usize = 1 << 16;
    pub const SIGMA2_TOL: f64 = 0.01;
    pub const CLT_P: f64 = 0.01;
    pub const SIGMA2_COBOUNDARY_TOL: f64 = 0.02;
    pub const COLLAPSE_TOL: f64 = 0.05;
    pub const DRIFT_TOL: f64 = 0.05;
    /// Shifts whose conjugacy samples calibrate L in d(h_j, id) ≤ L·a_j.
    pub const CALIBRATION_SHIFTS: usize = 16;
    pub const CALIBRATION_RESOLUTION: usize = 1024;
}

use defaults as d;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    fn holds(self, measured: f64, tolerance: f64) -> bool {
        match self {
            Relation::Lt => measured < tolerance,
            Relation::Le => measured <= tolerance,
            Relation::Gt => measured > tolerance,
            Relation::Ge => measured >= tolerance,
        }
    }
}

/// One declared check: `measured relation tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
}

/// What a preset run produced besides its files.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    out: &'a Path,
    outcome: Outcome,
}

impl Context<'_> {
    fn seed(&self) -> u64 {
        self.cfg.seed
    }

    /// A NaN measurement fails every relation.
    fn check(&mut self, name: &str, measured: f64, relation: Relation, default_tol: f64) {
        let tolerance = self.cfg.tolerance(name, default_tol);
        self.check_exact(name, measured, relation, tolerance);
    }

    /// A check against a derived bound that the config cannot override.
    fn check_exact(&mut self, name: &str, measured: f64, relation: Relation, tolerance: f64) {
        let pass = !measured.is_nan() && relation.holds(measured, tolerance);
        log::info!(
            "check {name}: {measured} {relation:?} {tolerance} -> {}",
            if pass { "pass" } else { "FAIL" }
        );
        self.outcome.checks.push(Check {
            name: name.to_string(),
            measured,
            relation,
            tolerance,
            pass,
        });
    }

    fn metric<T: Serialize>(&mut self, name: &str, value: T) -> Result<(), CliError> {
        self.outcome.metrics.insert(name.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    fn csv(&self, name: &str, header: &[&str]) -> Result<CsvSink, CliError> {
        CsvSink::create(self.out, name, header)
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        write_json(self.out, name, value).map(|_| ())
    }
}

/// Run one preset and return its checks and metrics.
pub fn run_preset(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut ctx = Context {
        cfg,
        out,
        outcome: Outcome::default(),
    };
    match cfg.preset()? {
        Preset::ShadowingLipschitz => shadowing_lipschitz(&mut ctx)?,
        Preset::ConjugacyResidual => conjugacy_residual_preset(&mut ctx)?,
        Preset::QuasiConjugacy => quasi_conjugacy(&mut ctx)?,
        Preset::BirkhoffStability => birkhoff_stability(&mut ctx)?,
        Preset::PeriodicMeasure => periodic_measure(&mut ctx)?,
        Preset::IrregularPoint => irregular(&mut ctx)?,
        Preset::Entropy => entropy(&mut ctx)?,
        Preset::CltAsip => clt_asip(&mut ctx)?,
    }
    if ctx.outcome.checks.is_empty() {
        return Err(CliError::Config(format!(
            "preset {} declared no checks with this config",
            cfg.preset
        )));
    }
    Ok(ctx.outcome)
}

fn require_circle(seq: &MapSequence, name: &str) -> Result<(), CliError> {
    if seq.space() != Space::Circle {
        return Err(CliError::Config(format!("sequence '{name}' must be a circle sequence")));
    }
    Ok(())
}

fn constant_map<'a>(seq: &'a MapSequence, name: &str) -> Result<&'a SmoothMap, CliError> {
    match seq.form() {
        SequenceForm::Constant(f) => Ok(f),
        _ => Err(CliError::Config(format!("sequence '{name}' must be constant"))),
    }
}

fn limit_of<'a>(seq: &'a MapSequence, name: &str) -> Result<&'a SmoothMap, CliError> {
    seq.limit()
        .ok_or_else(|| CliError::Config(format!("sequence '{name}' must be a convergent tail")))
}

fn point_fields(p: &Point) -> Vec<Field<'static>> {
    p.coords().iter().map(|&c| Field::F(c)).collect()
}

fn shadowing_lipschitz(ctx: &mut Context) -> Result<(), CliError> {
    let k = &ctx.cfg.knobs;
    let seq = ctx.cfg.sequence("F")?;
    let deltas = k.deltas.clone().unwrap_or(d::DELTAS.to_vec());
    let opts = FitOptions {
        len: k.len.unwrap_or(d::LEN),
        tol: k.tol.unwrap_or(d::TOL),
    };
    let fit = lipschitz_fit(&seq, &deltas, k.trials.unwrap_or(d::TRIALS), ctx.seed(), opts)?;

    let mut trials = ctx.csv("trials.csv", &["delta", "trial", "beta", "iterations", "certified"])?;
    for r in &fit.records {
        trials.row(&[
            Field::F(r.delta),
            Field::U(r.trial as u64),
            Field::F(r.beta),
            Field::U(r.iterations as u64),
            Field::B(r.certified),
        ])?;
    }
    trials.finish()?;
    let mut per = ctx.csv("deltas.csv", &["delta", "max_beta", "mean_beta", "ratio", "failures"])?;
    for s in &fit.per_delta {
        per.row(&[
            Field::F(s.delta),
            Field::F(s.max_beta),
            Field::F(s.mean_beta),
            Field::F(s.ratio),
            Field::U(s.failures as u64),
        ])?;
    }
    per.finish()?;
    if let Some(e) = fit.records.iter().find_map(|r| r.error.as_ref()) {
        log::warn!("shadowing trial failed: {e}");
    }

    let uncertified = fit.records.iter().filter(|r| !r.certified).count() as f64 / fit.records.len().max(1) as f64;
    ctx.check("certified", uncertified, Relation::Le, 0.0);
    match seq.space() {
        Space::Circle => {
            let lambda = seq.rates().lambda;
            let excess = fit
                .per_delta
                .iter()
                .map(|s| s.max_beta - lambda * s.delta / (1.0 - lambda))
                .fold(f64::NEG_INFINITY, f64::max);
            let excess = if fit.per_delta.iter().any(|s| s.failures > 0) {
                f64::NAN
            } else {
                excess
            };
            ctx.check("beta-bound", excess, Relation::Le, opts.tol);
        }
        Space::Torus => {
            let dev = fit.slope.map(|s| (s - 1.0).abs()).unwrap_or(f64::NAN);
            ctx.check("slope", dev, Relation::Le, d::SLOPE_TOL);
        }
    }
    ctx.metric("slope", fit.slope)?;
    ctx.metric("l_hat", fit.l_hat)?;
    ctx.metric("failure_fraction", fit.failure_fraction)?;
    ctx.metric("lambda", seq.rates().lambda)?;
    Ok(())
}

fn write_conjugacy(ctx: &Context, name: &str, h: &ConjugacySample) -> Result<(), CliError> {
    let header: &[&str] = match h.space {
        Space::Circle => &["grid_x", "image_x"],
        Space::Torus => &["grid_x", "grid_y", "image_x", "image_y"],
    };
    let mut w = ctx.csv(name, header)?;
    for (x, hx) in h.grid().iter().zip(&h.images) {
        let mut row = point_fields(x);
        row.extend(point_fields(hx));
        w.row(&row)?;
    }
    w.finish()
}

/// d(h_k, id) for k = 0..=shifts, h_k conjugating the tail's k-shift to the
/// limit. It is computed as the inverse conjugacy, whose orbits are shadowed
/// by the limit: the stability threshold then comes from the limit's rates
/// and admits the large early perturbations. d(h, id) = d(h⁻¹, id).
fn tail_distances(seq: &MapSequence, r: usize, depth: usize, shifts: usize) -> Result<Vec<f64>, CliError> {
    let limit = MapSequence::constant(limit_of(seq, "T")?.clone());
    (0..=shifts)
        .map(|k| Ok(shifted_conjugacy(&limit, seq, k as i64, r, depth)?.sup_dist_to_identity))
        .collect()
}

fn conjugacy_residual_preset(ctx: &mut Context) -> Result<(), CliError> {
    let k = ctx.cfg.knobs.clone();
    let r = k.resolution.unwrap_or(d::RESOLUTION);
    let depth = k.depth.unwrap_or(d::DEPTH);
    let f = ctx.cfg.sequence("F")?;

    if ctx.cfg.has_sequence("G") {
        let g = ctx.cfg.sequence("G")?;
        if let Some(steps) = k.steps {
            let rep = conjugacy_residual(&f, &g, steps, r, depth)?;
            let mut w = ctx.csv("residual.csv", &["n", "residual"])?;
            for (n, v) in rep.per_shift.iter().enumerate() {
                w.row(&[Field::U(n as u64), Field::F(*v)])?;
            }
            w.finish()?;
            let h = sequential_conjugacy(&g, &f, r, depth)?;
            write_conjugacy(ctx, "conjugacy.csv", &h)?;
            ctx.json(
                "conjugacy.json",
                &serde_json::json!({
                    "sup_dist": h.sup_dist_to_identity,
                    "residual": rep.pointwise,
                    "interpolated_residual": rep.interpolated,
                    "interpolation_budget": rep.interpolation_budget,
                    "depth": depth,
                    "R": r,
                }),
            )?;
            ctx.check("residual", rep.pointwise, Relation::Lt, d::RESIDUAL_TOL);
            ctx.metric("interpolated_residual", rep.interpolated)?;
            ctx.metric("interpolation_budget", rep.interpolation_budget)?;
        }
        let points = k.oracle_points.unwrap_or(d::ORACLE_POINTS);
        if points > 0 && f.space() == Space::Circle {
            let (fm, gm) = (constant_map(&f, "F")?, constant_map(&g, "G")?);
            let h = PointwiseConjugacy::new(&g, &f, depth)?;
            let seed = ctx.seed();
            let gaps: Vec<Result<f64, CliError>> = (0..points as u64)
                .into_par_iter()
                .map(|i| {
                    let x = Point::Circle(DigitProgram::random(seed, i).to_f64());
                    Ok(h.eval(&x)?.dist(&itinerary_oracle(fm, gm, &x, depth)?))
                })
                .collect();
            let mut worst = 0.0f64;
            for gap in gaps {
                worst = worst.max(gap?);
            }
            ctx.check("oracle", worst, Relation::Lt, d::RESIDUAL_TOL);
        }
    }

    if let Some(names) = &k.compare {
        let mut w = ctx.csv("proximity.csv", &["sequence", "epsilon", "sup_dist", "ratio"])?;
        let mut ratios = Vec::new();
        for name in names {
            let s = ctx.cfg.sequence(name)?;
            let eps = seq_distance(&f, &s, Order::C0, 1024)?.lower;
            let h = sequential_conjugacy(&s, &f, r, depth)?;
            let ratio = h.sup_dist_to_identity / eps;
            w.row(&[Field::S(name), Field::F(eps), Field::F(h.sup_dist_to_identity), Field::F(ratio)])?;
            ratios.push(ratio);
        }
        w.finish()?;
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let lambda = f.rates().lambda;
        ctx.check("proximity-spread", hi / lo, Relation::Lt, d::SPREAD_TOL);
        ctx.check_exact("proximity-lipschitz", hi, Relation::Le, lambda / (1.0 - lambda));
        ctx.metric("l_hat", hi)?;
    }

    if ctx.cfg.has_sequence("T") {
        let t = ctx.cfg.sequence("T")?;
        let shifts = k.tail_shifts.unwrap_or(d::TAIL_SHIFTS);
        let dist = tail_distances(&t, r, depth, shifts)?;
        let mut w = ctx.csv("tail.csv", &["k", "a_k", "sup_dist"])?;
        for (j, v) in dist.iter().enumerate() {
            w.row(&[Field::U(j as u64), Field::F(t.tail_decay(j as u64)?), Field::F(*v)])?;
        }
        w.finish()?;
        let increases = dist.windows(2).filter(|p| p[1] >= p[0]).count();
        ctx.check("tail-monotone", increases as f64, Relation::Le, 0.0);
        ctx.check("tail-final", *dist.last().expect("shifts ≥ 0"), Relation::Lt, d::TAIL_FINAL_TOL);
    }
    Ok(())
}

fn quasi_conjugacy(ctx: &mut Context) -> Result<(), CliError> {
    let k = ctx.cfg.knobs.clone();
    let r = k.resolution.unwrap_or(d::QUASI_RESOLUTION);
    let depth = k.depth.unwrap_or(d::DEPTH);
    let f = ctx.cfg.sequence("F")?;
    let names = k
        .compare
        .ok_or_else(|| CliError::Config("quasi-conjugacy needs knobs.compare".into()))?;
    let mut w = ctx.csv(
        "quasi.csv",
        &[
            "sequence",
            "epsilon",
            "lambda",
            "defect",
            "defect_bound",
            "sup_dist",
            "distance_bound",
            "slack",
            "holds",
        ],
    )?;
    for name in &names {
        let g = ctx.cfg.sequence(name)?;
        let rep = quasi_conjugacy_expanding(&f, &g, r, depth)?;
        w.row(&[
            Field::S(name),
            Field::F(rep.epsilon),
            Field::F(rep.lambda),
            Field::F(rep.defect),
            Field::F(rep.defect_bound),
            Field::F(rep.sample.sup_dist_to_identity),
            Field::F(rep.distance_bound),
            Field::F(rep.slack),
            Field::B(rep.holds),
        ])?;
        ctx.check_exact(&format!("defect-{name}"), rep.defect, Relation::Le, rep.defect_bound + rep.slack);
        ctx.check_exact(
            &format!("distance-{name}"),
            rep.sample.sup_dist_to_identity,
            Relation::Le,
            rep.distance_bound + rep.slack,
        );
    }
    w.finish()
}

fn histogram(points_in_bins: &[u64], n: usize) -> EmpiricalMeasure {
    EmpiricalMeasure {
        space: Space::Circle,
        support: Support::Histogram {
            bins: points_in_bins.len(),
            mass: points_in_bins.iter().map(|&c| c as f64 / n as f64).collect(),
        },
        count: n,
        provenance: Provenance::Orbit,
    }
}

fn lebesgue_histogram(bins: usize) -> EmpiricalMeasure {
    EmpiricalMeasure {
        space: Space::Circle,
        support: Support::Histogram {
            bins,
            mass: vec![1.0 / bins as f64; bins],
        },
        count: bins,
        provenance: Provenance::Samples,
    }
}

struct StartResult {
    x0: f64,
    average: f64,
    ks: f64,
    trace: Vec<f64>,
    counts: Vec<u64>,
}

fn birkhoff_stability(ctx: &mut Context) -> Result<(), CliError> {
    let k = &ctx.cfg.knobs;
    let f = ctx.cfg.sequence("F")?;
    require_circle(&f, "F")?;
    let phi = ctx.cfg.observable()?;
    let reference = limit_of(&f, "F")?.clone();
    let starts = k.starts.unwrap_or(d::STARTS);
    let n = k.n.unwrap_or(d::ORBIT_N);
    let bins = k.bins.unwrap_or(d::BINS);
    let window = k.window.unwrap_or(d::WINDOW);
    let stride = k.trace_stride.unwrap_or((n / 1000).max(1));
    if starts == 0 || n == 0 || bins == 0 {
        return Err(CliError::Config("starts, n and bins must be positive".into()));
    }
    let lebesgue = lebesgue_histogram(bins);
    let seed = ctx.seed();
    let results: Vec<Result<StartResult, CliError>> = (0..starts as u64)
        .into_par_iter()
        .map(|i| {
            let start = OrbitStart::Conjugate {
                reference: reference.clone(),
                program: DigitProgram::random(seed, i),
            };
            let mut counts = vec![0u64; bins];
            let (mut s, mut x0) = (0.0, 0.0);
            let mut trace = Vec::new();
            for_each_orbit_point(&f, &start, n, |j, p| {
                let x = p.x();
                if j == 0 {
                    x0 = x;
                }
                s += phi.eval_circle(x);
                counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
                if i == 0 && (j + 1) % stride == 0 {
                    trace.push(s / (j + 1) as f64);
                }
            })?;
            let ks = measure_distance(&histogram(&counts, n), &lebesgue)?;
            Ok(StartResult {
                x0,
                average: s / n as f64,
                ks,
                trace,
                counts: if i == 0 { counts } else { Vec::new() },
            })
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut w = ctx.csv("starts.csv", &["start", "x0", "average", "ks"])?;
    for (i, r) in results.iter().enumerate() {
        w.row(&[Field::U(i as u64), Field::F(r.x0), Field::F(r.average), Field::F(r.ks)])?;
    }
    w.finish()?;
    let mut w = ctx.csv("trace.csv", &["m", "running_avg"])?;
    for (j, v) in results[0].trace.iter().enumerate() {
        w.row(&[Field::U(((j + 1) * stride) as u64), Field::F(*v)])?;
    }
    w.finish()?;
    let mut w = ctx.csv("histogram.csv", &["bin_left", "mass"])?;
    for (b, &c) in results[0].counts.iter().enumerate() {
        w.row(&[Field::F(b as f64 / bins as f64), Field::F(c as f64 / n as f64)])?;
    }
    w.finish()?;

    let target = lebesgue_mean(&phi);
    let within = results.iter().filter(|r| (r.average - target).abs() <= window).count() as f64 / starts as f64;
    let mut ks: Vec<f64> = results.iter().map(|r| r.ks).collect();
    ks.sort_by(f64::total_cmp);
    let median = seqdyn_core::stats::median(&ks);
    ctx.check("within-fraction", within, Relation::Ge, d::WITHIN_FRACTION);
    ctx.check("ks-median", median, Relation::Lt, d::KS_MEDIAN_TOL);
    let leb_atoms = EmpiricalMeasure::lebesgue_grid(Space::Circle, bins);
    ctx.metric(
        "invariance_defect",
        average_invariance_defect(&f, &leb_atoms, d::DEFECT_STEPS)?,
    )?;
    ctx.metric("ks_max", ks.last().copied())?;
    ctx.metric("lebesgue_mean", target)?;
    Ok(())
}

/// ∫φ dLeb by the midpoint rule on 2^16 points; exact for trigonometric φ of
/// frequency below 2^16.
fn lebesgue_mean(phi: &Observable) -> f64 {
    let m = 1usize << 16;
    (0..m).map(|i| phi.eval_circle((i as f64 + 0.5) / m as f64)).sum::<f64>() / m as f64
}

fn periodic_measure(ctx: &mut Context) -> Result<(), CliError> {
    let k = &ctx.cfg.knobs;
    let f = ctx.cfg.sequence("F")?;
    require_circle(&f, "F")?;
    let maps = match f.form() {
        SequenceForm::Periodic(v) => v.clone(),
        _ => return Err(CliError::Config("periodic-measure needs a periodic sequence F".into())),
    };
    let reference = match &k.reference {
        Some(name) => ctx.cfg.map(name)?,
        None => maps[0].clone(),
    };
    let r = k.resolution.unwrap_or(d::RESOLUTION);
    let depth = k.depth.unwrap_or(d::DEPTH);
    let n = k.n.unwrap_or(d::ORBIT_N);
    let bins = k.bins.unwrap_or(d::BINS);
    let c = MapSequence::constant(reference.clone());
    let hs = (0..maps.len() as i64)
        .map(|i| shifted_conjugacy(&f, &c, i, r, depth))
        .collect::<Result<Vec<_>, _>>()?;
    let lebesgue = EmpiricalMeasure::lebesgue_grid(Space::Circle, r);
    let mixture = periodic_limit_measure(&hs, &lebesgue)?;
    let program = DigitProgram::random(ctx.seed(), 0);
    let direct = empirical_measure(
        &f,
        &OrbitStart::Conjugate {
            reference,
            program: program.clone(),
        },
        n,
        bins,
    )?;
    let ks = measure_distance(&direct, &mixture)?;
    // forward float orbit: rounding noise selects the physical measure
    let noisy = empirical_measure(&f, &OrbitStart::Digits(program), n, bins)?;

    let mixture_hist = bin_atoms(&mixture, bins);
    let mut w = ctx.csv("histogram.csv", &["bin_left", "direct_mass", "mixture_mass"])?;
    if let Support::Histogram { mass, .. } = &direct.support {
        for (b, (&m, &q)) in mass.iter().zip(&mixture_hist).enumerate() {
            w.row(&[Field::F(b as f64 / bins as f64), Field::F(m), Field::F(q)])?;
        }
    }
    w.finish()?;
    ctx.check("ks", ks, Relation::Lt, d::PERIODIC_KS_TOL);
    ctx.metric("noisy_forward_ks", measure_distance(&noisy, &mixture)?)?;
    ctx.metric("mixture_vs_lebesgue_ks", measure_distance(&mixture, &lebesgue)?)?;
    ctx.metric(
        "conjugacy_sup_dist",
        hs.iter().map(|h| h.sup_dist_to_identity).collect::<Vec<_>>(),
    )?;
    Ok(())
}

fn bin_atoms(m: &EmpiricalMeasure, bins: usize) -> Vec<f64> {
    let (pts, ws) = m.to_atoms();
    let mut out = vec![0.0; bins];
    for (p, w) in pts.iter().zip(ws) {
        out[((p.x() * bins as f64) as usize).min(bins - 1)] += w;
    }
    out
}

fn irregular(ctx: &mut Context) -> Result<(), CliError> {
    let k = ctx.cfg.knobs.clone();
    let f = ctx.cfg.map(k.reference.as_deref().unwrap_or("f"))?;
    let phi = ctx.cfg.observable()?;
    let trace_len = k.trace_len.unwrap_or(d::TRACE_LEN);
    let stride = k.trace_stride.unwrap_or(d::TRACE_STRIDE).max(1);
    let probe = irregular_point(&f, &phi, trace_len)?;
    ctx.check("limsup", probe.limsup, Relation::Ge, d::LIMSUP_MIN);
    ctx.check("liminf", probe.liminf, Relation::Le, d::LIMINF_MAX);
    ctx.json("probe.json", &probe)?;

    let transport = if ctx.cfg.has_sequence("T") {
        let t = ctx.cfg.sequence("T")?;
        let opts = TransportOptions {
            resolution: k.resolution.unwrap_or(d::TRANSPORT_RESOLUTION),
            depth: k.depth.unwrap_or(d::DEPTH),
            ..TransportOptions::default()
        };
        Some(irregular_transport(&probe, &t, &phi, opts)?)
    } else {
        None
    };
    let header: &[&str] = if transport.is_some() {
        &["m", "running_avg", "running_avg_sequence"]
    } else {
        &["m", "running_avg"]
    };
    let mut w = ctx.csv("trace.csv", header)?;
    for m in (stride..=trace_len).step_by(stride) {
        let mut row = vec![Field::U(m as u64), Field::F(probe.trace[m - 1])];
        if let Some(t) = &transport {
            row.push(Field::F(t.trace[m - 1]));
        }
        w.row(&row)?;
    }
    w.finish()?;
    if let Some(t) = transport {
        ctx.check("gap-persistence", (t.gap_sequence - t.gap_limit).abs(), Relation::Le, d::GAP_TOL);
        ctx.check_exact("transport-budget", t.measured_shift, Relation::Le, t.budget);
        ctx.metric("transport", &t)?;
    }
    ctx.metric("gap", probe.limsup - probe.liminf)?;
    Ok(())
}

fn entropy(ctx: &mut Context) -> Result<(), CliError> {
    let k = ctx.cfg.knobs.clone();
    let depth = k.depth.unwrap_or(d::DEPTH);
    let estimates = k.estimates.clone().unwrap_or_default();
    if !estimates.is_empty() {
        let mut w = ctx.csv("counts.csv", &["sequence", "epsilon", "n", "count", "slope"])?;
        for spec in &estimates {
            let seq = ctx.cfg.sequence(&spec.sequence)?;
            let candidates = if spec.randomized {
                CandidateSet::jittered(seq.space(), spec.resolution, ctx.seed()).shuffled(ctx.seed())
            } else {
                CandidateSet::grid(seq.space(), spec.resolution)
            };
            let est = entropy_estimate(&seq, &spec.epsilons, &spec.ns, spec.window_start, &candidates)?;
            for (i, eps) in est.epsilons.iter().enumerate() {
                for (j, n) in est.ns.iter().enumerate() {
                    w.row(&[
                        Field::S(&spec.sequence),
                        Field::F(*eps),
                        Field::U(*n as u64),
                        Field::U(est.counts[i][j]),
                        Field::F(est.fits[i].slope),
                    ])?;
                }
            }
            let analytic = analytic_entropy(&seq);
            let tol = match seq.space() {
                Space::Circle => d::ENTROPY_TOL_CIRCLE,
                Space::Torus => d::ENTROPY_TOL_TORUS,
            };
            ctx.check(
                &format!("entropy-{}", spec.sequence),
                (est.estimate - analytic).abs(),
                Relation::Le,
                tol,
            );
            ctx.metric(
                &format!("estimate-{}", spec.sequence),
                serde_json::json!({
                    "estimate": est.estimate,
                    "error_bar": est.error_bar,
                    "extrapolated": est.extrapolated,
                    "analytic": analytic,
                    "window_start": est.window_start,
                    "candidates": est.candidates,
                    "order_seed": est.order_seed,
                }),
            )?;
        }
        w.finish()?;
    }

    if let Some(eps) = k.compare_epsilon {
        let t = ctx.cfg.sequence("T")?;
        let limit = limit_of(&t, "T")?.clone();
        let ns = k.compare_ns.clone().unwrap_or(d::COMPARE_NS.to_vec());
        let dist = tail_distances(&t, d::CALIBRATION_RESOLUTION, depth, d::MAX_SHIFTS)?;
        let n_eps = dist
            .iter()
            .position(|&v| v < eps / 3.0)
            .ok_or_else(|| CliError::Config(format!("d(h_k, id) stays above ε/3 for k ≤ {}", d::MAX_SHIFTS)))?;
        let candidates = CandidateSet::grid(t.space(), k.resolution.unwrap_or(d::COMPARE_RESOLUTION));
        let rep = entropy_comparison_report(&t, &limit, eps, &ns, n_eps, &candidates)?;
        let mut w = ctx.csv(
            "comparison.csv",
            &[
                "n",
                "seq_fine",
                "limit_coarse",
                "limit_fine",
                "seq_coarse",
                "margin",
                "reciprocal_margin",
                "checked",
            ],
        )?;
        for r in &rep.rows {
            w.row(&[
                Field::U(r.n as u64),
                Field::U(r.seq_fine),
                Field::U(r.limit_coarse),
                Field::U(r.limit_fine),
                Field::U(r.seq_coarse),
                Field::F(r.margin),
                Field::F(r.reciprocal_margin),
                Field::B(r.checked),
            ])?;
        }
        w.finish()?;
        let tested = rep.rows.iter().filter(|r| r.checked).count();
        if tested == 0 {
            return Err(CliError::Config(format!("no compare_ns at or beyond N_ε = {n_eps}")));
        }
        ctx.check("comparison", rep.violations().count() as f64, Relation::Le, 0.0);
        ctx.metric("n_eps", n_eps)?;
        ctx.metric("comparison_rows_checked", tested)?;
    }
    Ok(())
}

fn write_series(w: &mut CsvSink, name: &str, stats: &SeriesStats) -> Result<(), CliError> {
    for (k, &n) in stats.checkpoints.iter().enumerate() {
        for (m, row) in stats.sums.iter().enumerate() {
            w.row(&[Field::S(name), Field::U(n as u64), Field::U(m as u64), Field::F(row[k])])?;
        }
    }
    Ok(())
}

fn clt_asip(ctx: &mut Context) -> Result<(), CliError> {
    let k = ctx.cfg.knobs.clone();
    let seed = ctx.seed();
    let f = ctx.cfg.sequence("F")?;
    let fmap = constant_map(&f, "F")?.clone();
    let phi = ctx.cfg.observable()?;
    let samples = k.samples.unwrap_or(d::SAMPLES);
    let lag_max = k.lag_max.unwrap_or(d::LAG_MAX);
    let n = k.n.unwrap_or(d::ENSEMBLE_N);
    let ensemble = k.ensemble.unwrap_or(d::ENSEMBLE);

    let gk = sigma_green_kubo(&fmap, &phi, samples, lag_max, seed)?;
    let mut w = ctx.csv("autocov.csv", &["lag", "autocov"])?;
    for (j, c) in gk.autocov.iter().enumerate() {
        w.row(&[Field::U(j as u64), Field::F(*c)])?;
    }
    w.finish()?;
    if let Some(expected) = k.sigma2_expected {
        ctx.check("sigma2", (gk.sigma2 - expected).abs(), Relation::Le, d::SIGMA2_TOL);
    }
    ctx.metric("sigma2", gk.sigma2)?;
    ctx.metric("sigma2_std_error", gk.std_error)?;

    let mut sums = ctx.csv("sums.csv", &["sequence", "n", "member", "S_n"])?;
    let mut ks = ctx.csv("ks.csv", &["sequence", "n", "ks", "p_value", "sample_variance"])?;
    let mut run = |ctx: &mut Context, name: &str, seq: &MapSequence, obs: &Observable, sigma2: f64| {
        let stats = partial_sum_ensemble(seq, obs, n, ensemble, seed)?;
        let rep = clt_check(&stats, sigma2)?;
        write_series(&mut sums, name, &stats)?;
        for c in &rep.checkpoints {
            ks.row(&[
                Field::S(name),
                Field::U(c.n as u64),
                Field::F(c.ks),
                Field::F(c.p_value),
                Field::F(c.sample_variance),
            ])?;
        }
        let last = rep.checkpoints.last().expect("one checkpoint").clone();
        ctx.metric(&format!("clt-{name}"), &rep)?;
        Ok::<_, CliError>(last)
    };

    let last = run(ctx, "F", &f, &phi, gk.sigma2)?;
    ctx.check("clt-p-F", last.p_value, Relation::Gt, d::CLT_P);

    if ctx.cfg.has_sequence("T") {
        let t = ctx.cfg.sequence("T")?;
        let status = rate_status(&t, phi.alpha());
        let admissible = matches!(status, RateStatus::Admissible { .. });
        ctx.check_exact("rate-admissible-T", admissible as u8 as f64, Relation::Ge, 1.0);
        ctx.metric("rate-T", status)?;
        let last = run(ctx, "T", &t, &phi, gk.sigma2)?;
        ctx.check("clt-p-T", last.p_value, Relation::Gt, d::CLT_P);

        if t.space() == Space::Circle {
            let dist = tail_distances(&t, d::CALIBRATION_RESOLUTION, d::DEPTH, d::CALIBRATION_SHIFTS)?;
            let l = dist
                .iter()
                .enumerate()
                .filter_map(|(j, &v)| {
                    let a = t.tail_decay(j as u64).ok()?;
                    (a > 0.0).then_some(v / a)
                })
                .fold(0.0, f64::max);
            let drift = pathwise_drift(&t, &phi, &DigitProgram::random(seed, 0), n, l)?;
            ctx.check_exact("pathwise-T", drift.max_gap, Relation::Le, drift.budget + 1e-9 * n as f64);
            ctx.metric("pathwise-T", &drift)?;
            ctx.metric("lipschitz-T", l)?;
        }
    }

    if k.coboundary.unwrap_or(d::COBOUNDARY) {
        let cob = Observable::coboundary(phi.clone(), fmap.clone());
        let gk0 = sigma_green_kubo(&fmap, &cob, samples, lag_max, seed)?;
        ctx.check("sigma2-coboundary", gk0.sigma2.abs(), Relation::Le, d::SIGMA2_COBOUNDARY_TOL);
        ctx.metric("sigma2-coboundary", gk0.sigma2)?;
        let last = run(ctx, "coboundary", &f, &cob, gk0.sigma2.max(0.0))?;
        ctx.check("collapse", last.sample_variance, Relation::Lt, d::COLLAPSE_TOL);
    }
    sums.finish()?;
    ks.finish()?;

    let eps = k.rate_epsilon.unwrap_or(d::RATE_EPSILON);
    let sched = asip_rate_schedule(
        k.rate_c.unwrap_or(d::RATE_C),
        eps,
        k.rate_alpha.unwrap_or(d::RATE_ALPHA),
        k.n_max.unwrap_or(d::N_MAX),
    )?;
    let mut w = ctx.csv("rate.csv", &["n", "drift"])?;
    for (n, v) in sched.drift_n.iter().zip(&sched.drift) {
        w.row(&[Field::U(*n as u64), Field::F(*v)])?;
    }
    w.finish()?;
    ctx.check(
        "drift-exponent",
        (sched.fitted_exponent - (0.5 - eps)).abs(),
        Relation::Le,
        d::DRIFT_TOL,
    );
    ctx.check_exact("drift-bound", sched.c_prime, Relation::Le, sched.analytic_bound);
    ctx.metric("rate_schedule", &sched)?;
    Ok(())
}
