//! Testable consequences of the almost sure invariance principle: Green–Kubo
//! variance, partial-sum ensembles, CLT normality and the rate-condition
//! bookkeeping for convergent-tail sequences.
//!
//! The Brownian coupling itself is not constructed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::digits::DigitProgram;
use crate::ergodic::{conjugate_orbit_pair, for_each_orbit_point, OrbitStart};
use crate::error::{Error, Result};
use crate::phase_maps::{DecayLaw, MapSequence, Observable, Point, SequenceForm, SmoothMap, Space};
use crate::stats::{self, least_squares};

/// Orbit length per Green–Kubo chain, after burn-in.
pub const CHAIN_LEN: usize = 1 << 14;
const BURN_IN: usize = 64;

/// A reference-distributed start for ensemble member `index`: Lebesgue on S¹
/// via random digits, uniform on T².
pub fn reference_start(space: Space, seed: u64, index: u64) -> OrbitStart {
    match space {
        Space::Circle => OrbitStart::Digits(DigitProgram::random(seed, index)),
        Space::Torus => {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(index);
            OrbitStart::Point(Point::Torus([r.random(), r.random()]))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenKubo {
    pub sigma2: f64,
    /// Batch-means standard error over chains.
    pub std_error: f64,
    pub mean: f64,
    pub mean_std_error: f64,
    /// Autocovariances C(j) = ∫φ·φ∘f^j, j = 0..=lag_max.
    pub autocov: Vec<f64>,
    pub chains: usize,
    pub samples: usize,
}

/// σ² = C(0) + 2Σ_{1≤j≤lag_max} C(j), estimated along independent orbit
/// chains after a burn-in, so the reference measure is the invariant one.
pub fn sigma_green_kubo(f: &SmoothMap, phi: &Observable, n_samples: usize, lag_max: usize, seed: u64) -> Result<GreenKubo> {
    if phi.space() != f.space() {
        return Err(Error::IncompatiblePhaseSpaces);
    }
    let chains = n_samples / CHAIN_LEN;
    if chains < 2 || lag_max >= CHAIN_LEN / 4 {
        return Err(Error::ParameterOutOfRange(format!(
            "need n_samples ≥ {} and lag_max < {}",
            2 * CHAIN_LEN,
            CHAIN_LEN / 4
        )));
    }
    let seq = MapSequence::constant(f.clone());
    let total = BURN_IN + CHAIN_LEN + lag_max;
    let per_chain: Vec<(f64, Vec<f64>)> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let start = reference_start(f.space(), seed, c as u64);
            let mut v = Vec::with_capacity(total);
            for_each_orbit_point(&seq, &start, total, |j, p| {
                if j >= BURN_IN {
                    v.push(phi.eval(&p));
                }
            })
            .expect("spaces checked");
            let mean = v[..CHAIN_LEN].iter().sum::<f64>() / CHAIN_LEN as f64;
            let cov = (0..=lag_max)
                .map(|lag| v[..CHAIN_LEN].iter().zip(&v[lag..]).map(|(a, b)| a * b).sum::<f64>() / CHAIN_LEN as f64)
                .collect();
            (mean, cov)
        })
        .collect();
    let means: Vec<f64> = per_chain.iter().map(|c| c.0).collect();
    let sig: Vec<f64> = per_chain
        .iter()
        .map(|(_, c)| c[0] + 2.0 * c[1..].iter().sum::<f64>())
        .collect();
    let nc = chains as f64;
    let mean = stats::mean(&means);
    let mean_se = (stats::variance(&means) / nc).sqrt();
    if mean.abs() > 3.0 * mean_se && mean.abs() > 1e-12 {
        return Err(Error::NotMeanZero {
            mean,
            std_error: mean_se,
        });
    }
    let autocov = (0..=lag_max)
        .map(|j| per_chain.iter().map(|(_, c)| c[j]).sum::<f64>() / nc)
        .collect();
    Ok(GreenKubo {
        sigma2: stats::mean(&sig),
        std_error: (stats::variance(&sig) / nc).sqrt(),
        mean,
        mean_std_error: mean_se,
        autocov,
        chains,
        samples: chains * CHAIN_LEN,
    })
}

/// Whether the tail decay of a sequence meets a_j ≤ C j^{−(1/2+ε)/α}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RateStatus {
    Constant,
    /// Largest admissible ε, capped just below 1/2.
    Admissible { epsilon: f64 },
    /// Decay too slow for any ε > 0.
    Inadmissible,
    /// The sequence form carries no declared decay law.
    Unchecked,
}

pub fn rate_status(seq: &MapSequence, alpha: f64) -> RateStatus {
    match seq.form() {
        SequenceForm::Constant(_) => RateStatus::Constant,
        SequenceForm::Periodic(_) => RateStatus::Unchecked,
        SequenceForm::ConvergentTail { law, .. } => match *law {
            DecayLaw::Zero | DecayLaw::Geometric { .. } => RateStatus::Admissible { epsilon: 0.5 - 1e-9 },
            DecayLaw::Power { exponent, .. } => {
                let e = exponent * alpha - 0.5;
                if e > 0.0 {
                    RateStatus::Admissible {
                        epsilon: e.min(0.5 - 1e-9),
                    }
                } else {
                    RateStatus::Inadmissible
                }
            }
        },
    }
}

/// Partial sums S_n(x) = Σ_{j<n} φ(F_j(x)) at checkpoints, per ensemble member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesStats {
    pub checkpoints: Vec<usize>,
    /// sums[member][checkpoint]
    pub sums: Vec<Vec<f64>>,
    pub seed: u64,
    pub ensemble: usize,
    pub rate: RateStatus,
}

impl SeriesStats {
    /// S_n/√n at checkpoint `k` across the ensemble.
    pub fn normalized(&self, k: usize) -> Vec<f64> {
        let s = (self.checkpoints[k] as f64).sqrt();
        self.sums.iter().map(|row| row[k] / s).collect()
    }
}

/// Powers of two from 16 up to n, then n.
pub fn checkpoints(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (4..usize::BITS).map(|k| 1usize << k).take_while(|&c| c < n).collect();
    v.push(n);
    v
}

pub fn partial_sum_ensemble(seq: &MapSequence, phi: &Observable, n: usize, ensemble: usize, seed: u64) -> Result<SeriesStats> {
    if phi.space() != seq.space() {
        return Err(Error::IncompatiblePhaseSpaces);
    }
    if n == 0 || ensemble == 0 {
        return Err(Error::ParameterOutOfRange("n and ensemble must be positive".into()));
    }
    let rate = rate_status(seq, phi.alpha());
    if matches!(rate, RateStatus::Unchecked | RateStatus::Inadmissible) {
        log::warn!("rate precondition not met for {}: {:?}", seq.label(), rate);
    }
    let cps = checkpoints(n);
    let sums: Vec<Vec<f64>> = (0..ensemble)
        .into_par_iter()
        .map(|i| {
            let start = reference_start(seq.space(), seed, i as u64);
            let mut row = Vec::with_capacity(cps.len());
            let (mut s, mut k) = (0.0, 0);
            for_each_orbit_point(seq, &start, n, |j, p| {
                s += phi.eval(&p);
                if j + 1 == cps[k] {
                    row.push(s);
                    k += 1;
                }
            })
            .expect("spaces checked");
            row
        })
        .collect();
    Ok(SeriesStats {
        checkpoints: cps,
        sums,
        seed,
        ensemble,
        rate,
    })
}

/// σ² at or below this counts as degenerate.
pub const DEGENERATE_SIGMA2: f64 = 0.05;
/// Collapse threshold on the sample variance of S_n/√n.
pub const COLLAPSE_VARIANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CltMode {
    Normal,
    DegenerateVariance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointTest {
    pub n: usize,
    pub ks: f64,
    pub p_value: f64,
    pub sample_variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltReport {
    pub mode: CltMode,
    pub sigma2: f64,
    pub checkpoints: Vec<CheckpointTest>,
    pub pass: bool,
}

/// KS test of S_n/(σ√n) against N(0,1); pass iff p > 0.01 at the final
/// checkpoint. For σ² ≤ DEGENERATE_SIGMA2 the test is instead that the sample
/// variance of S_n/√n at the final checkpoint is below COLLAPSE_VARIANCE.
pub fn clt_check(stats: &SeriesStats, sigma2: f64) -> Result<CltReport> {
    if stats.ensemble < 500 {
        return Err(Error::ParameterOutOfRange(format!("ensemble {} < 500", stats.ensemble)));
    }
    if sigma2 < 0.0 || sigma2.is_nan() {
        return Err(Error::ParameterOutOfRange(format!("σ² = {sigma2}")));
    }
    let mode = if sigma2 <= DEGENERATE_SIGMA2 {
        CltMode::DegenerateVariance
    } else {
        CltMode::Normal
    };
    let sigma = sigma2.sqrt();
    let tests: Vec<CheckpointTest> = (0..stats.checkpoints.len())
        .map(|k| {
            let v = stats.normalized(k);
            let sample_variance = stats::variance(&v);
            let (ks, p_value) = if mode == CltMode::Normal {
                let z: Vec<f64> = v.iter().map(|x| x / sigma).collect();
                stats::ks_normal(&z)
            } else {
                (f64::NAN, f64::NAN)
            };
            CheckpointTest {
                n: stats.checkpoints[k],
                ks,
                p_value,
                sample_variance,
            }
        })
        .collect();
    let last = tests.last().expect("at least one checkpoint");
    let pass = match mode {
        CltMode::Normal => last.p_value > 0.01,
        CltMode::DegenerateVariance => last.sample_variance < COLLAPSE_VARIANCE,
    };
    Ok(CltReport {
        mode,
        sigma2,
        checkpoints: tests,
        pass,
    })
}

/// The admissible schedule a_j = C j^{−(1/2+ε)/α} and its drift budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSchedule {
    pub c: f64,
    pub epsilon: f64,
    pub alpha: f64,
    /// a_j for j = 1..=n_max.
    #[serde(skip)]
    pub a: Vec<f64>,
    /// Power-of-two n and D(n) = Σ_{j≤n} a_j^α.
    pub drift_n: Vec<usize>,
    pub drift: Vec<f64>,
    /// Log-log slope of D over the upper six octaves.
    pub fitted_exponent: f64,
    /// max_n D(n)/n^{1/2−ε}.
    pub c_prime: f64,
    /// C^α/(1/2−ε), an upper bound on C′ for every n_max.
    pub analytic_bound: f64,
    /// ε close to 1/2, where the budget degenerates to logarithmic growth.
    pub boundary: bool,
}

pub fn asip_rate_schedule(c: f64, epsilon: f64, alpha: f64, n_max: usize) -> Result<RateSchedule> {
    if !(c > 0.0) || !(epsilon > 0.0 && epsilon < 0.5) || !(alpha > 0.0 && alpha <= 1.0) || n_max < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "need C > 0, ε ∈ (0, 1/2), α ∈ (0, 1], n_max ≥ 2; got C={c}, ε={epsilon}, α={alpha}, n_max={n_max}"
        )));
    }
    let p = (0.5 + epsilon) / alpha;
    let a: Vec<f64> = (1..=n_max).map(|j| c * (j as f64).powf(-p)).collect();
    let g = 0.5 - epsilon;
    let (mut s, mut c_prime) = (0.0, 0.0f64);
    let (mut drift_n, mut drift) = (Vec::new(), Vec::new());
    for (i, &aj) in a.iter().enumerate() {
        let n = i + 1;
        s += aj.powf(alpha);
        c_prime = c_prime.max(s / (n as f64).powf(g));
        if n.is_power_of_two() {
            drift_n.push(n);
            drift.push(s);
        }
    }
    let lo = drift_n.len().saturating_sub(7);
    let xs: Vec<f64> = drift_n[lo..].iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = drift[lo..].iter().map(|d| d.ln()).collect();
    let fitted_exponent = least_squares(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN);
    Ok(RateSchedule {
        c,
        epsilon,
        alpha,
        a,
        drift_n,
        drift,
        fitted_exponent,
        c_prime,
        analytic_bound: c.powf(alpha) / g,
        boundary: epsilon > 0.45,
    })
}

/// Pathwise comparison of Birkhoff sums along F and along its limit f.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathwiseDrift {
    pub n: usize,
    /// max_{m≤n} |S_m^F(h(y)) − S_m^f(y)|
    pub max_gap: f64,
    /// |φ|_α L^α Σ_{j<n} a_j^α
    pub budget: f64,
    pub holds: bool,
}

/// Compares S_m along the F-orbit of h(y) with S_m along the f-orbit of y for
/// the programmed point y, where h is the conjugacy to the limit and L bounds
/// d(h_j, id) ≤ L·a_j.
pub fn pathwise_drift(
    seq: &MapSequence,
    phi: &Observable,
    program: &DigitProgram,
    n: usize,
    lipschitz: f64,
) -> Result<PathwiseDrift> {
    let limit = seq.limit().ok_or(Error::NoDeclaredLimit)?;
    if seq.space() != Space::Circle {
        return Err(Error::WrongFamily {
            expected: "expanding-circle",
            found: limit.family(),
        });
    }
    let (ys, z) = conjugate_orbit_pair(seq, limit, program, n)?;
    let (alpha, hc) = (phi.alpha(), phi.holder_constant());
    let (mut sf, mut sg, mut gap, mut budget) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in 0..n {
        sf += phi.eval_circle(z[j]);
        sg += phi.eval_circle(ys[j]);
        gap = gap.max((sf - sg).abs());
        budget += hc * (lipschitz * seq.tail_decay(j as u64)?).powf(alpha);
    }
    Ok(PathwiseDrift {
        n,
        max_gap: gap,
        budget,
        holds: gap <= budget + 1e-9 * n as f64,
    })
}
