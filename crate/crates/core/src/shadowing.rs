//! Pseudo-orbits and their shadowing points.
//!
//! Expanding sequences are shadowed by pulling the terminal point back through
//! the inverse branches selected along the pseudo-orbit. Hyperbolic torus
//! sequences are shadowed by solving the orbit-correction equation
//! A·e_n − e_{n+1} = −r_n with the splitting of the linear model A.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_maps::{circle_dist, wrap_signed, LinearModel, MapSequence, Point, Space};
use crate::stats::least_squares;

/// A finite sequence (x_0, …, x_k) with per-step defect
/// δ = max_n d(f_{n+offset}(x_n), x_{n+1}).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PseudoOrbit {
    pub points: Vec<Point>,
    pub defect: f64,
    pub seed: u64,
    /// Sequence index of `points[0]`.
    pub index_offset: i64,
}

impl PseudoOrbit {
    pub fn new(seq: &MapSequence, points: Vec<Point>, index_offset: i64, seed: u64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::ParameterOutOfRange("a pseudo-orbit needs at least two points".into()));
        }
        if points.iter().any(|p| p.space() != seq.space()) {
            return Err(Error::IncompatiblePhaseSpaces);
        }
        let mut p = PseudoOrbit {
            points,
            defect: 0.0,
            seed,
            index_offset,
        };
        p.defect = p.recompute_defect(seq);
        Ok(p)
    }

    pub fn recompute_defect(&self, seq: &MapSequence) -> f64 {
        self.points
            .windows(2)
            .enumerate()
            .map(|(n, w)| seq.map(self.index_offset + n as i64).eval(&w[0]).dist(&w[1]))
            .fold(0.0, f64::max)
    }

    /// Number of steps k.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    /// Position of sequence time 0 within `points`.
    pub fn anchor(&self) -> usize {
        (-self.index_offset).clamp(0, self.steps() as i64) as usize
    }
}

/// Orbit of x0 with uniform noise of size at most δ added after every step.
pub fn perturbed_orbit(seq: &MapSequence, x0: &Point, delta: f64, len: usize, seed: u64) -> Result<PseudoOrbit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturbed_orbit_with(seq, x0, delta, len, seed, &mut rng)
}

fn perturbed_orbit_with(
    seq: &MapSequence,
    x0: &Point,
    delta: f64,
    len: usize,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<PseudoOrbit> {
    if !(delta >= 0.0) || len < 1 {
        return Err(Error::ParameterOutOfRange(format!("delta {delta}, len {len}")));
    }
    // shave the noise so the recorded defect stays ≤ δ after rounding
    let amp = delta * (1.0 - 1e-9);
    let mut pts = Vec::with_capacity(len + 1);
    let mut x = x0.normalized();
    pts.push(x);
    for n in 0..len {
        let y = seq.map(n as i64).eval(&x);
        x = match y {
            Point::Circle(v) => Point::circle(v + amp * rng.random_range(-1.0..1.0)),
            Point::Torus(v) => {
                let r = amp * rng.random::<f64>().sqrt();
                let a = std::f64::consts::TAU * rng.random::<f64>();
                Point::torus(v[0] + r * a.cos(), v[1] + r * a.sin())
            }
        };
        pts.push(x);
    }
    PseudoOrbit::new(seq, pts, 0, seed)
}

/// Shadowing point of a pseudo-orbit and its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowResult {
    /// The shadowing point at sequence time 0 (or at the first point for
    /// orbits starting after time 0).
    pub point: Point,
    /// The corrected orbit, aligned with the pseudo-orbit.
    pub orbit: Vec<Point>,
    pub anchor: usize,
    /// β = max_n d(orbit_n, x_n)
    pub beta: f64,
    pub delta: f64,
    pub iterations: usize,
    /// Number of orbit steps used.
    pub depth: usize,
    /// Bound on the distance to the infinite-orbit shadow.
    pub truncation_error: f64,
    /// max_n d(f_n(orbit_n), orbit_{n+1}): how exact the corrected orbit is.
    pub orbit_residual: f64,
    pub unique: bool,
}

impl ShadowResult {
    /// β recomputed from the stored orbit against a pseudo-orbit.
    pub fn recompute_beta(&self, p: &PseudoOrbit) -> f64 {
        self.orbit
            .iter()
            .zip(&p.points)
            .map(|(a, b)| a.dist(b))
            .fold(0.0, f64::max)
    }
}

/// Pull `xs[k]` back through the inverse branches of f_{offset+n} nearest to
/// `xs[n]`. Returns the pulled-back orbit.
pub(crate) fn pullback_circle(seq: &MapSequence, offset: i64, xs: &[f64], delta0: f64) -> Result<Vec<f64>> {
    let k = xs.len() - 1;
    let mut z = vec![0.0; xs.len()];
    z[k] = xs[k];
    for n in (0..k).rev() {
        let p = seq.map(offset + n as i64).nearest_preimage(z[n + 1], xs[n])?;
        if circle_dist(p, xs[n]) >= delta0 {
            return Err(Error::DefectTooLarge {
                index: n,
                detail: format!("pullback lands {} from x_n, δ₀ = {delta0}", circle_dist(p, xs[n])),
            });
        }
        z[n] = p;
    }
    Ok(z)
}

/// Shadow a pseudo-orbit of an expanding circle sequence by nested pullback.
pub fn shadow_expanding(seq: &MapSequence, p: &PseudoOrbit, tol: f64) -> Result<ShadowResult> {
    if seq.space() != Space::Circle {
        return Err(Error::WrongFamily {
            expected: "expanding-circle",
            found: "torus-hyperbolic",
        });
    }
    let r = seq.rates();
    let (lambda, delta0) = (r.lambda, r.delta0);
    if lambda * p.defect / (1.0 - lambda) >= delta0 {
        return Err(Error::DefectTooLarge {
            index: 0,
            detail: format!("λδ/(1−λ) = {} ≥ δ₀ = {delta0}", lambda * p.defect / (1.0 - lambda)),
        });
    }
    let k = p.steps();
    let truncation_error = lambda.powi(k as i32) * delta0;
    if truncation_error > tol {
        let need = ((tol / delta0).ln() / lambda.ln()).ceil() as usize;
        return Err(Error::TruncationDominates { len: k, depth: need });
    }
    let xs: Vec<f64> = p.points.iter().map(|q| q.x()).collect();
    let z = pullback_circle(seq, p.index_offset, &xs, delta0)?;
    let beta = z.iter().zip(&xs).map(|(a, b)| circle_dist(*a, *b)).fold(0.0, f64::max);
    let orbit_residual = (0..k)
        .map(|n| circle_dist(seq.map(p.index_offset + n as i64).eval_circle(z[n]), z[n + 1]))
        .fold(0.0, f64::max);
    let orbit: Vec<Point> = z.into_iter().map(Point::Circle).collect();
    let anchor = p.anchor();
    Ok(ShadowResult {
        point: orbit[anchor],
        orbit,
        anchor,
        beta,
        delta: p.defect,
        iterations: k,
        depth: k,
        truncation_error,
        orbit_residual,
        // two β-shadows lie within 2β of each other, below the expansiveness constant δ₀
        unique: 2.0 * beta < delta0,
    })
}

/// Linear-model splitting of a hyperbolic torus sequence with cone-certified rates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperbolicSplitting {
    pub linear: LinearModel,
    /// Contraction rate certified on the cone boundary, ≥ the linear rate.
    pub lambda_tilde: f64,
    /// Cone 𝒞⁺_a = {v_u·u + v_s·s : |v_s| ≤ a|v_u|} (and symmetrically 𝒞⁻_a).
    pub cone: f64,
    pub delta1: f64,
    pub sup_derivative: f64,
    pub block: usize,
    /// Lower bound on the angle between vectors of 𝒞⁺_a and 𝒞⁻_a.
    pub theta: f64,
    pub sample_grid: usize,
}

impl HyperbolicSplitting {
    pub const DEFAULT_CONE: f64 = 0.5;
    pub const DEFAULT_DELTA1: f64 = 0.1;

    pub fn new(seq: &MapSequence) -> Result<Self> {
        Self::with_params(seq, Self::DEFAULT_CONE, Self::DEFAULT_DELTA1, 32)
    }

    /// Certify Df(x)𝒞⁺_a ⊂ 𝒞⁺_{λ̃a} and Df(x)⁻¹𝒞⁻_a ⊂ 𝒞⁻_{λ̃a} with expansion
    /// λ̃⁻¹ on a grid, for every representative map of the sequence.
    pub fn with_params(seq: &MapSequence, cone: f64, delta1: f64, grid: usize) -> Result<Self> {
        let maps = seq.representatives();
        let linear = maps[0].linear_model().ok_or(Error::WrongFamily {
            expected: "torus-hyperbolic",
            found: "expanding-circle",
        })?;
        let mut lt = linear
            .stable_eigenvalue
            .abs()
            .max(1.0 / linear.unstable_eigenvalue.abs());
        let h = 1.0 / grid as f64;
        let ts = [-1.0, -0.5, 0.0, 0.5, 1.0];
        for m in &maps {
            for i in 0..grid {
                for j in 0..grid {
                    let d = m.derivative(&Point::Torus([i as f64 * h, j as f64 * h]));
                    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
                    for &t in &ts {
                        // unstable cone, forward
                        let v = linear.compose([1.0, t * cone]);
                        let w = linear.decompose([d[0][0] * v[0] + d[0][1] * v[1], d[1][0] * v[0] + d[1][1] * v[1]]);
                        lt = lt.max(w[1].abs() / (cone * w[0].abs())).max(1.0 / w[0].abs());
                        // stable cone, backward
                        let v = linear.compose([t * cone, 1.0]);
                        let inv = [
                            (d[1][1] * v[0] - d[0][1] * v[1]) / det,
                            (-d[1][0] * v[0] + d[0][0] * v[1]) / det,
                        ];
                        let w = linear.decompose(inv);
                        lt = lt.max(w[0].abs() / (cone * w[1].abs())).max(1.0 / w[1].abs());
                    }
                }
            }
        }
        if !(lt < 1.0) {
            return Err(Error::ConeConditionFailed(format!("certified rate λ̃ = {lt} ≥ 1")));
        }
        let half = |dir: [f64; 2], other: [f64; 2]| {
            // widest angle between dir and dir + cone·other
            let w = [dir[0] + cone * other[0], dir[1] + cone * other[1]];
            let c = (dir[0] * w[0] + dir[1] * w[1]) / w[0].hypot(w[1]);
            c.clamp(-1.0, 1.0).acos()
        };
        let theta = linear.angle()
            - half(linear.unstable, linear.stable)
            - half(linear.stable, linear.unstable);
        if theta <= 0.0 {
            return Err(Error::ConeConditionFailed(format!(
                "cones of size {cone} overlap (θ = {theta})"
            )));
        }
        Ok(HyperbolicSplitting {
            linear,
            lambda_tilde: lt,
            cone,
            delta1,
            sup_derivative: seq.rates().sup_derivative,
            block: 1,
            theta,
            sample_grid: grid,
        })
    }

    /// ζ = (1 − λ̃)·δ₁ / (8·L·M^N) with L = 1.
    pub fn admissible_defect(&self) -> f64 {
        (1.0 - self.lambda_tilde) * self.delta1 / (8.0 * self.sup_derivative.powi(self.block as i32))
    }

    /// Smallest k with λ̃^k·δ₁ < tol/10.
    pub fn truncation_depth(&self, tol: f64) -> usize {
        let k = ((tol / 10.0 / self.delta1).ln() / self.lambda_tilde.ln()).floor() as i64 + 1;
        k.max(0) as usize
    }
}

const ANOSOV_ITER_CAP: usize = 100;
const ANOSOV_RESIDUAL: f64 = 1e-13;
const RESTART_KICK: [f64; 2] = [1e-3, 1e-3];
const RESTART_AGREEMENT: f64 = 1e-10;

/// Shadow a pseudo-orbit of a hyperbolic torus sequence.
///
/// Boundary conditions: the stable component of e at the first point and the
/// unstable component at the last point vanish. The uniqueness flag is set
/// when a solve started from a perturbed first point converges to the same orbit.
pub fn shadow_anosov(
    seq: &MapSequence,
    p: &PseudoOrbit,
    split: &HyperbolicSplitting,
    tol: f64,
) -> Result<ShadowResult> {
    if seq.space() != Space::Torus {
        return Err(Error::WrongFamily {
            expected: "torus-hyperbolic",
            found: "expanding-circle",
        });
    }
    let zeta = split.admissible_defect();
    if p.defect > zeta {
        return Err(Error::DefectTooLarge {
            index: 0,
            detail: format!("defect {} exceeds admissible ζ = {zeta}", p.defect),
        });
    }
    let depth = split.truncation_depth(tol);
    let k = p.steps();
    // the anchor must sit `depth` steps from an open end to be resolved to tol
    let anchor = p.anchor();
    let reach = if p.index_offset < 0 { anchor.min(k - anchor) } else { k - anchor };
    if reach < depth {
        return Err(Error::TruncationDominates { len: k, depth });
    }
    let xs: Vec<[f64; 2]> = p.points.iter().map(|q| torus(q)).collect();
    let (e, iterations) = correct_orbit(seq, p.index_offset, &xs, &split.linear, None)?;
    let (e2, _) = correct_orbit(seq, p.index_offset, &xs, &split.linear, Some(RESTART_KICK))?;
    let agreement = e
        .iter()
        .zip(&e2)
        .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
        .fold(0.0, f64::max);
    let orbit: Vec<Point> = xs
        .iter()
        .zip(&e)
        .map(|(x, d)| Point::torus(x[0] + d[0], x[1] + d[1]))
        .collect();
    let beta = e.iter().map(|d| d[0].hypot(d[1])).fold(0.0, f64::max);
    let orbit_residual = (0..k)
        .map(|n| seq.map(p.index_offset + n as i64).eval(&orbit[n]).dist(&orbit[n + 1]))
        .fold(0.0, f64::max);
    Ok(ShadowResult {
        point: orbit[anchor],
        orbit,
        anchor,
        beta,
        delta: p.defect,
        iterations,
        depth: k,
        truncation_error: split.lambda_tilde.powi(reach as i32) * split.delta1,
        orbit_residual,
        unique: agreement < RESTART_AGREEMENT && 2.0 * beta < split.delta1,
    })
}

fn torus(p: &Point) -> [f64; 2] {
    match *p {
        Point::Torus(v) => v,
        Point::Circle(x) => [x, 0.0],
    }
}

/// Quasi-Newton solve for corrections e_n making x_n + e_n an exact orbit.
fn correct_orbit(
    seq: &MapSequence,
    offset: i64,
    xs: &[[f64; 2]],
    lm: &LinearModel,
    kick: Option<[f64; 2]>,
) -> Result<(Vec<[f64; 2]>, usize)> {
    let k = xs.len() - 1;
    let mut e = vec![[0.0f64; 2]; k + 1];
    if let Some(d) = kick {
        e[0] = d;
    }
    let (mu, ms) = (lm.unstable_eigenvalue, lm.stable_eigenvalue);
    let mut rho = vec![[0.0f64; 2]; k];
    let mut last = f64::INFINITY;
    for it in 0..ANOSOV_ITER_CAP {
        let mut worst = 0.0f64;
        for n in 0..k {
            let y = [xs[n][0] + e[n][0], xs[n][1] + e[n][1]];
            let fy = seq.map(offset + n as i64).lift2(y);
            let r = [
                wrap_signed(fy[0] - xs[n + 1][0] - e[n + 1][0]),
                wrap_signed(fy[1] - xs[n + 1][1] - e[n + 1][1]),
            ];
            worst = worst.max(r[0].abs()).max(r[1].abs());
            rho[n] = lm.decompose(r);
        }
        let cs0 = lm.decompose(e[0])[1];
        let cuk = lm.decompose(e[k])[0];
        worst = worst.max(cs0.abs()).max(cuk.abs());
        if worst < ANOSOV_RESIDUAL || (it > 5 && worst >= last && worst < 1e-11) {
            return Ok((e, it));
        }
        last = worst;
        // stable coordinates forward, unstable backward
        let mut s = vec![0.0f64; k + 1];
        let mut u = vec![0.0f64; k + 1];
        s[0] = -cs0;
        for n in 0..k {
            s[n + 1] = ms * s[n] + rho[n][1];
        }
        u[k] = -cuk;
        for n in (0..k).rev() {
            u[n] = (u[n + 1] - rho[n][0]) / mu;
        }
        for n in 0..=k {
            let d = lm.compose([u[n], s[n]]);
            e[n][0] += d[0];
            e[n][1] += d[1];
        }
    }
    Err(Error::NonConvergence(format!(
        "orbit correction residual {last} after {ANOSOV_ITER_CAP} iterations"
    )))
}

/// Smallest N such that every sampled pair at distance ≥ δ separates to ≥ ε₀
/// within N steps (forward, and backward too for two-sided sequences).
pub fn expansiveness_probe(seq: &MapSequence, eps0: f64, delta: f64, grid: usize) -> Result<usize> {
    const CAP: usize = 64;
    if !(delta > 0.0 && eps0 > 0.0) || grid == 0 {
        return Err(Error::ParameterOutOfRange(format!("ε₀ {eps0}, δ {delta}, grid {grid}")));
    }
    let thresh = eps0 * (1.0 - 1e-12);
    let diam = seq.space().diameter();
    let mut radii = vec![delta];
    while *radii.last().unwrap() * 1.25 < diam {
        radii.push(radii.last().unwrap() * 1.25);
    }
    let pairs: Vec<(Point, Point)> = match seq.space() {
        Space::Circle => (0..grid)
            .flat_map(|i| {
                let x = i as f64 / grid as f64;
                radii.iter().map(move |&r| (Point::circle(x), Point::circle(x + r)))
            })
            .collect(),
        Space::Torus => {
            let side = (grid as f64).sqrt().ceil() as usize;
            let dirs: Vec<[f64; 2]> = (0..8)
                .map(|j| {
                    let a = std::f64::consts::PI * j as f64 / 8.0;
                    [a.cos(), a.sin()]
                })
                .collect();
            let mut v = Vec::new();
            for i in 0..side {
                for j in 0..side {
                    let x = [i as f64 / side as f64, j as f64 / side as f64];
                    for d in &dirs {
                        for &r in &radii {
                            v.push((
                                Point::torus(x[0], x[1]),
                                Point::torus(x[0] + r * d[0], x[1] + r * d[1]),
                            ));
                        }
                    }
                }
            }
            v
        }
    };
    let backward = seq.is_two_sided();
    let times: Vec<Option<usize>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let (mut a, mut b) = (*x, *y);
            let (mut ra, mut rb) = (*x, *y);
            for n in 0..=CAP {
                if a.dist(&b) >= thresh || (backward && ra.dist(&rb) >= thresh) {
                    return Some(n);
                }
                a = seq.map(n as i64).eval(&a);
                b = seq.map(n as i64).eval(&b);
                if backward {
                    let f = seq.map(-(n as i64) - 1);
                    ra = f.invert(&ra).ok()?;
                    rb = f.invert(&rb).ok()?;
                }
            }
            None
        })
        .collect();
    times
        .into_iter()
        .try_fold(0usize, |acc, t| t.map(|t| acc.max(t)))
        .ok_or(Error::NoSeparationWithinCap { cap: CAP })
}

/// One shadowing trial inside a Lipschitz fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub delta: f64,
    pub trial: usize,
    pub beta: f64,
    pub iterations: usize,
    pub certified: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaStats {
    pub delta: f64,
    pub max_beta: f64,
    pub mean_beta: f64,
    pub ratio: f64,
    pub failures: usize,
}

/// β-vs-δ statistics and the log-log fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzFit {
    pub per_delta: Vec<DeltaStats>,
    pub records: Vec<TrialRecord>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub l_hat: f64,
    /// Every β was zero: the pseudo-orbits were exact orbits.
    pub exact: bool,
    pub failure_fraction: f64,
    pub all_certified: bool,
}

/// Options for a Lipschitz fit.
#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub len: usize,
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { len: 500, tol: 1e-9 }
    }
}

/// Shadow `trials` pseudo-orbits per δ and fit log β against log δ.
///
/// Trial i draws its start and noise from stream i of `seed` for every δ, so
/// noise patterns are shared across the schedule and only their scale changes.
pub fn lipschitz_fit(
    seq: &MapSequence,
    schedule: &[f64],
    trials: usize,
    seed: u64,
    opts: FitOptions,
) -> Result<LipschitzFit> {
    if schedule.is_empty() {
        return Err(Error::EmptyList);
    }
    let split = match seq.space() {
        Space::Torus => Some(HyperbolicSplitting::new(seq)?),
        Space::Circle => None,
    };
    let jobs: Vec<(f64, usize)> = schedule
        .iter()
        .flat_map(|&d| (0..trials).map(move |t| (d, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(delta, trial)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let x0 = match seq.space() {
                Space::Circle => Point::circle(rng.random()),
                Space::Torus => Point::torus(rng.random(), rng.random()),
            };
            let res = perturbed_orbit_with(seq, &x0, delta, opts.len, seed, &mut rng).and_then(|p| {
                match &split {
                    Some(s) => shadow_anosov(seq, &p, s, opts.tol),
                    None => shadow_expanding(seq, &p, opts.tol),
                }
            });
            match res {
                Ok(r) => TrialRecord {
                    delta,
                    trial,
                    beta: r.beta,
                    iterations: r.iterations,
                    certified: r.unique,
                    error: None,
                },
                Err(e) => TrialRecord {
                    delta,
                    trial,
                    beta: f64::NAN,
                    iterations: 0,
                    certified: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut per_delta = Vec::new();
    for &d in schedule {
        let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.delta == d).collect();
        let ok: Vec<f64> = rs.iter().filter(|r| r.error.is_none()).map(|r| r.beta).collect();
        let max_beta = ok.iter().cloned().fold(0.0, f64::max);
        per_delta.push(DeltaStats {
            delta: d,
            max_beta,
            mean_beta: if ok.is_empty() { f64::NAN } else { ok.iter().sum::<f64>() / ok.len() as f64 },
            ratio: if d > 0.0 { max_beta / d } else { 0.0 },
            failures: rs.len() - ok.len(),
        });
    }
    let fit_pts: Vec<(f64, f64)> = per_delta
        .iter()
        .filter(|s| s.delta > 0.0 && s.max_beta > 0.0)
        .map(|s| (s.delta.ln(), s.max_beta.ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = fit_pts.into_iter().unzip();
    let fit = least_squares(&xs, &ys);
    let failures: usize = per_delta.iter().map(|s| s.failures).sum();
    let exact = records.iter().all(|r| r.error.is_none() && r.beta == 0.0);
    Ok(LipschitzFit {
        l_hat: per_delta.iter().map(|s| s.ratio).fold(0.0, f64::max),
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        exact,
        failure_fraction: failures as f64 / records.len().max(1) as f64,
        all_certified: records.iter().all(|r| r.certified),
        per_delta,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_maps::SmoothMap;

    #[test]
    fn exact_orbit_has_zero_defect_and_beta() {
        let seq = MapSequence::constant(SmoothMap::perturbed_doubling(0.05).unwrap());
        let p = perturbed_orbit(&seq, &Point::circle(0.3), 0.0, 30, 1).unwrap();
        assert_eq!(p.defect, 0.0);
        let r = shadow_expanding(&seq, &p, 1e-6).unwrap();
        assert_eq!(r.point, p.points[0]);
        assert_eq!(r.beta, 0.0);
        assert!(r.unique);
    }

    #[test]
    fn perturbed_orbit_is_deterministic() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let a = perturbed_orbit(&seq, &Point::circle(0.2), 1e-3, 100, 7).unwrap();
        let b = perturbed_orbit(&seq, &Point::circle(0.2), 1e-3, 100, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.defect > 0.0 && a.defect <= 1e-3);
        assert!((a.defect - a.recompute_defect(&seq)).abs() < 1e-14);
    }

    #[test]
    fn doubling_shadow_within_bound() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let p = perturbed_orbit(&seq, &Point::circle(0.2), 1e-3, 200, 3).unwrap();
        let r = shadow_expanding(&seq, &p, 1e-9).unwrap();
        assert!(r.beta <= 1e-3 + 1e-9);
        assert!((r.recompute_beta(&p) - r.beta).abs() < 1e-12);
        assert!(r.orbit_residual < 1e-12);
    }

    #[test]
    fn cat_map_exact_orbit() {
        let seq = MapSequence::constant(SmoothMap::cat_map());
        let split = HyperbolicSplitting::new(&seq).unwrap();
        let p = perturbed_orbit(&seq, &Point::torus(0.1, 0.2), 0.0, 40, 0).unwrap();
        let r = shadow_anosov(&seq, &p, &split, 1e-6).unwrap();
        assert!(r.point.dist(&p.points[0]) < 1e-12);
        assert!(r.beta < 1e-12);
        assert!(r.unique);
    }

    #[test]
    fn probe_examples() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        assert_eq!(expansiveness_probe(&seq, 0.25, 0.25, 100).unwrap(), 0);
        assert_eq!(expansiveness_probe(&seq, 0.25, 0.01, 10_000).unwrap(), 5);
    }

    #[test]
    fn splitting_for_cat_map() {
        let seq = MapSequence::constant(SmoothMap::cat_map());
        let s = HyperbolicSplitting::new(&seq).unwrap();
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((s.lambda_tilde - 1.0 / golden).abs() < 1e-12);
        assert!(s.theta > 0.0);
    }
}
