//! Topological entropy of map sequences from (n,ε)-separated sets.
//!
//! Counts come from a greedy pass over a candidate set in a fixed order: a
//! candidate is kept iff d_n to every kept point exceeds ε. The kept set is
//! (n,ε)-separated, so every count is a certified lower bound on s_n(ε).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_maps::{grid_points, wrap_signed, MapSequence, Point, SequenceForm, SmoothMap, Space};
use crate::stats::{least_squares, LinearFit};

/// Candidate points for the greedy pass, in greedy order.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub space: Space,
    pub points: Vec<Point>,
    /// Largest distance from a point of the region to the nearest candidate.
    pub spacing: f64,
    /// Seed of the shuffle applied to the greedy order; None for grid order.
    pub order_seed: Option<u64>,
}

impl CandidateSet {
    /// The uniform grid with `resolution` points per axis.
    pub fn grid(space: Space, resolution: usize) -> Self {
        CandidateSet {
            space,
            points: grid_points(space, resolution),
            spacing: 1.0 / resolution as f64,
            order_seed: None,
        }
    }

    /// One point per grid cell at a seeded uniform offset inside the cell.
    /// Hyperbolic toral automorphisms permute rational grids, so lattice
    /// candidates have periodic orbits and the counts saturate; jittered
    /// candidates do not.
    pub fn jittered(space: Space, resolution: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1.0 / resolution as f64;
        let points = match space {
            Space::Circle => (0..resolution)
                .map(|i| Point::Circle((i as f64 + rng.random::<f64>()) * h))
                .collect(),
            Space::Torus => {
                let mut v = Vec::with_capacity(resolution * resolution);
                for i in 0..resolution {
                    for j in 0..resolution {
                        let (u, w): (f64, f64) = (rng.random(), rng.random());
                        v.push(Point::Torus([(i as f64 + u) * h, (j as f64 + w) * h]));
                    }
                }
                v
            }
        };
        CandidateSet {
            space,
            points,
            spacing: h * (space.dim() as f64).sqrt(),
            order_seed: None,
        }
    }

    /// Random greedy order. Random sequential packing fills a fixed fraction
    /// of space for every ellipse aspect ratio, so the counts track
    /// 1/vol(d_n-ball) even as the balls grow thin; raster order does not.
    pub fn shuffled(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.points.shuffle(&mut rng);
        self.order_seed = Some(seed);
        self
    }

    /// Candidates restricted to a subset Z, with a declared spacing.
    pub fn subset(space: Space, points: Vec<Point>, spacing: f64) -> Self {
        CandidateSet {
            space,
            points,
            spacing,
            order_seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

const CHUNK: usize = 1 << 16;
const MAX_CELLS: f64 = (1u64 << 22) as f64;

/// Greedy state for one (ε, n) pair.
struct Greedy {
    eps: f64,
    n: usize,
    dim: usize,
    /// Cells per axis at time 0 and at time n−1; each cell is at least twice
    /// the radius of the d_n-ball projected to that time.
    k0: f64,
    k1: f64,
    orbits: Vec<f64>,
    index: FxHashMap<[u32; 4], Vec<u32>>,
    count: u64,
}

impl Greedy {
    fn new(seq: &MapSequence, eps: f64, n: usize) -> Self {
        let space = seq.space();
        let rates = seq.rates();
        // On S¹ with ε ≤ δ₀ a d_n-ball of radius ε has time-0 radius at most λ^{n−1}ε
        let r0 = if space == Space::Circle && eps <= rates.delta0 {
            eps * rates.lambda.powi(n as i32 - 1) * (1.0 + 1e-6)
        } else {
            eps
        };
        let cells = |r: f64| (1.0 / (2.0 * r)).floor().clamp(1.0, MAX_CELLS);
        Greedy {
            eps,
            n,
            dim: space.dim(),
            k0: cells(r0),
            k1: cells(eps),
            orbits: Vec::new(),
            index: FxHashMap::default(),
            count: 0,
        }
    }

    /// Own cell and the neighbor on the nearer side, per coordinate.
    fn cell_pair(v: f64, k: f64) -> [u32; 2] {
        let u = v * k;
        let c = u.floor().min(k - 1.0).max(0.0);
        let nb = if u - c < 0.5 { c - 1.0 } else { c + 1.0 };
        [c as u32, nb.rem_euclid(k) as u32]
    }

    fn coords<'a>(&self, orbit: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        let d = self.dim;
        (&orbit[..d], &orbit[(self.n - 1) * d..self.n * d])
    }

    fn dn_within(&self, a: &[f64], b: &[f64]) -> bool {
        let e2 = self.eps * self.eps;
        if self.dim == 1 {
            a.iter().zip(b).all(|(x, y)| wrap_signed(x - y).abs() <= self.eps)
        } else {
            a.chunks_exact(2).zip(b.chunks_exact(2)).all(|(p, q)| {
                let dx = wrap_signed(p[0] - q[0]);
                let dy = wrap_signed(p[1] - q[1]);
                dx * dx + dy * dy <= e2
            })
        }
    }

    /// `orbit` holds at least n points of dimension dim.
    fn offer(&mut self, orbit: &[f64]) {
        let orbit = &orbit[..self.n * self.dim];
        let (first, last) = self.coords(orbit);
        let mut pairs: Vec<[u32; 2]> = Vec::with_capacity(4);
        for &v in first {
            pairs.push(Self::cell_pair(v, self.k0));
        }
        for &v in last {
            pairs.push(Self::cell_pair(v, self.k1));
        }
        let own = {
            let mut key = [0u32; 4];
            for (i, p) in pairs.iter().enumerate() {
                key[i] = p[0];
            }
            key
        };
        let m = pairs.len();
        let mut keys: Vec<[u32; 4]> = Vec::with_capacity(1 << m);
        for mask in 0..(1u32 << m) {
            let mut key = [0u32; 4];
            for (i, p) in pairs.iter().enumerate() {
                key[i] = p[((mask >> i) & 1) as usize];
            }
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let stride = self.n * self.dim;
        for key in &keys {
            if let Some(bucket) = self.index.get(key) {
                // recent points are the likeliest neighbours in grid order
                for &id in bucket.iter().rev() {
                    let s = id as usize * stride;
                    if self.dn_within(orbit, &self.orbits[s..s + stride]) {
                        return;
                    }
                }
            }
        }
        let id = self.count as u32;
        self.orbits.extend_from_slice(orbit);
        self.index.entry(own).or_default().push(id);
        self.count += 1;
    }
}

fn orbit_into(seq: &MapSequence, p: &Point, len: usize, out: &mut [f64]) {
    match *p {
        Point::Circle(x0) => {
            let mut x = x0;
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = x;
                if j + 1 < len {
                    x = seq.map(j as i64).eval_circle(x);
                }
            }
        }
        Point::Torus(x0) => {
            let mut x = x0;
            for (j, slot) in out.chunks_exact_mut(2).enumerate() {
                slot.copy_from_slice(&x);
                if j + 1 < len {
                    x = seq.map(j as i64).eval_torus(x);
                }
            }
        }
    }
}

/// Greedy separated counts for every (ε, n) pair, indexed [ε][n]. Candidate
/// orbits are computed once up to the largest n and shared by all pairs.
pub fn separated_counts(
    seq: &MapSequence,
    epsilons: &[f64],
    ns: &[usize],
    candidates: &CandidateSet,
) -> Result<Vec<Vec<u64>>> {
    if candidates.space != seq.space() {
        return Err(Error::IncompatiblePhaseSpaces);
    }
    if candidates.is_empty() || ns.contains(&0) {
        return Err(Error::ParameterOutOfRange("need candidates and n ≥ 1".into()));
    }
    for &eps in epsilons {
        if !(eps > 0.0) {
            return Err(Error::ParameterOutOfRange(format!("ε = {eps} must be positive")));
        }
        if candidates.spacing >= eps / 4.0 {
            return Err(Error::GridTooCoarse {
                spacing: candidates.spacing,
                limit: eps / 4.0,
            });
        }
    }
    let n_max = ns.iter().copied().max().unwrap_or(1);
    let dim = seq.space().dim();
    let mut states: Vec<Greedy> = epsilons
        .iter()
        .flat_map(|&e| ns.iter().map(move |&n| (e, n)))
        .map(|(e, n)| Greedy::new(seq, e, n))
        .collect();
    let stride = n_max * dim;
    let mut buf = vec![0.0; CHUNK * stride];
    for chunk in candidates.points.chunks(CHUNK) {
        let used = &mut buf[..chunk.len() * stride];
        used.par_chunks_mut(stride)
            .zip(chunk.par_iter())
            .for_each(|(out, p)| orbit_into(seq, p, n_max, out));
        let used = &*used;
        // each state sees candidates in the same order, so counts are thread-count independent
        states.par_iter_mut().for_each(|st| {
            for orbit in used.chunks_exact(stride) {
                st.offer(orbit);
            }
        });
    }
    Ok(epsilons
        .iter()
        .enumerate()
        .map(|(i, _)| (0..ns.len()).map(|j| states[i * ns.len() + j].count).collect())
        .collect())
}

/// Size of a greedy (n,ε)-separated subset of the candidates.
pub fn separated_count(seq: &MapSequence, n: usize, eps: f64, candidates: &CandidateSet) -> Result<u64> {
    Ok(separated_counts(seq, &[eps], &[n], candidates)?[0][0])
}

/// Entropy slopes per ε with a least-squares fit of log s_n against n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub epsilons: Vec<f64>,
    pub ns: Vec<usize>,
    /// counts[i][j] = s_{ns[j]}(epsilons[i]).
    pub counts: Vec<Vec<u64>>,
    /// Smallest n used in the fits.
    pub window_start: usize,
    pub fits: Vec<LinearFit>,
    /// Slope at the smallest ε.
    pub estimate: f64,
    /// Slope standard error from the fit residuals.
    pub error_bar: f64,
    /// Linear extrapolation of the last two slopes to ε = 0.
    pub extrapolated: f64,
    pub candidates: usize,
    pub grid_spacing: f64,
    /// Shuffle seed of the greedy order, None for grid order.
    pub order_seed: Option<u64>,
}

/// Schedules must be strictly decreasing in ε and strictly increasing in n.
pub fn entropy_estimate(
    seq: &MapSequence,
    epsilons: &[f64],
    ns: &[usize],
    window_start: usize,
    candidates: &CandidateSet,
) -> Result<EntropyEstimate> {
    if epsilons.is_empty() || !epsilons.windows(2).all(|w| w[1] < w[0]) {
        return Err(Error::ParameterOutOfRange("ε schedule must be decreasing".into()));
    }
    if !ns.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::ParameterOutOfRange("n schedule must be increasing".into()));
    }
    let xs: Vec<f64> = ns.iter().filter(|&&n| n >= window_start).map(|&n| n as f64).collect();
    if xs.len() < 2 {
        return Err(Error::ParameterOutOfRange("fit window needs at least two n".into()));
    }
    let counts = separated_counts(seq, epsilons, ns, candidates)?;
    let fits: Vec<LinearFit> = counts
        .iter()
        .map(|row| {
            let ys: Vec<f64> = ns
                .iter()
                .zip(row)
                .filter(|(&n, _)| n >= window_start)
                .map(|(_, &c)| (c as f64).ln())
                .collect();
            least_squares(&xs, &ys).expect("two distinct n")
        })
        .collect();
    let last = fits.len() - 1;
    let estimate = fits[last].slope;
    let extrapolated = if last > 0 {
        let (e1, e2) = (epsilons[last - 1], epsilons[last]);
        estimate + (estimate - fits[last - 1].slope) * e2 / (e1 - e2)
    } else {
        estimate
    };
    Ok(EntropyEstimate {
        epsilons: epsilons.to_vec(),
        ns: ns.to_vec(),
        counts,
        window_start,
        error_bar: fits[last].slope_se,
        fits,
        estimate,
        extrapolated,
        candidates: candidates.len(),
        grid_spacing: candidates.spacing,
        order_seed: candidates.order_seed,
    })
}

/// Topological entropy of a constant, periodic or convergent-tail sequence
/// of the families here: log(degree) for expanding circle maps, log|μ_u| for
/// hyperbolic toral maps, averaged over a period. Convergent tails take the
/// value of their limit.
pub fn analytic_entropy(seq: &MapSequence) -> f64 {
    fn of(f: &SmoothMap) -> f64 {
        match (f.degree(), f.linear_model()) {
            (Some(d), _) => (d as f64).ln(),
            (None, Some(l)) => l.unstable_eigenvalue.abs().ln(),
            (None, None) => unreachable!("every map is a circle or torus map"),
        }
    }
    match seq.form() {
        SequenceForm::Constant(f) => of(f),
        SequenceForm::Periodic(v) => v.iter().map(of).sum::<f64>() / v.len() as f64,
        SequenceForm::ConvergentTail { limit, .. } => of(limit),
    }
}

/// One row of the separated-count comparison between F and its limit f.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    /// s_n(F, ε/3)
    pub seq_fine: u64,
    /// s_n(f, ε)
    pub limit_coarse: u64,
    /// s_n(f, ε/3)
    pub limit_fine: u64,
    /// s_n(F, ε)
    pub seq_coarse: u64,
    /// log(s_n(F, ε/3) / s_n(f, ε))
    pub margin: f64,
    /// log(s_n(f, ε/3) / s_n(F, ε))
    pub reciprocal_margin: f64,
    /// n ≥ N_ε
    pub checked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub epsilon: f64,
    pub n_eps: usize,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    /// Rows at n ≥ N_ε where either inequality fails.
    pub fn violations(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows
            .iter()
            .filter(|r| r.checked && (r.seq_fine < r.limit_coarse || r.limit_fine < r.seq_coarse))
    }
}

/// Counts for s_n(F, ε/3) ≥ s_n(f, ε) and s_n(f, ε/3) ≥ s_n(F, ε). Both
/// follow from d_{C⁰}(h_n, id) < ε/3 beyond N_ε: a set that is ε-separated
/// for one system is mapped by the conjugacy to an ε/3-separated set for the
/// other.
pub fn entropy_comparison_report(
    seq: &MapSequence,
    limit: &SmoothMap,
    eps: f64,
    ns: &[usize],
    n_eps: usize,
    candidates: &CandidateSet,
) -> Result<ComparisonReport> {
    if limit.space() != seq.space() {
        return Err(Error::IncompatiblePhaseSpaces);
    }
    let f = MapSequence::constant(limit.clone());
    let eps_pair = [eps, eps / 3.0];
    let seq_counts = separated_counts(seq, &eps_pair, ns, candidates)?;
    let lim_counts = separated_counts(&f, &eps_pair, ns, candidates)?;
    let rows = ns
        .iter()
        .enumerate()
        .map(|(j, &n)| ComparisonRow {
            n,
            seq_fine: seq_counts[1][j],
            limit_coarse: lim_counts[0][j],
            limit_fine: lim_counts[1][j],
            seq_coarse: seq_counts[0][j],
            margin: (seq_counts[1][j] as f64 / lim_counts[0][j] as f64).ln(),
            reciprocal_margin: (lim_counts[1][j] as f64 / seq_counts[0][j] as f64).ln(),
            checked: n >= n_eps,
        })
        .collect();
    Ok(ComparisonReport {
        epsilon: eps,
        n_eps,
        rows,
    })
}

/// As `entropy_comparison_report`, failing on the first violated inequality.
pub fn entropy_comparison(
    seq: &MapSequence,
    limit: &SmoothMap,
    eps: f64,
    ns: &[usize],
    n_eps: usize,
    candidates: &CandidateSet,
) -> Result<ComparisonReport> {
    let report = entropy_comparison_report(seq, limit, eps, ns, n_eps, candidates)?;
    if let Some(r) = report.violations().next() {
        let (lhs, rhs) = if r.seq_fine < r.limit_coarse {
            (r.seq_fine, r.limit_coarse)
        } else {
            (r.limit_fine, r.seq_coarse)
        };
        return Err(Error::InequalityViolated {
            n: r.n,
            lhs: lhs as usize,
            rhs: rhs as usize,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_epsilon_gives_one() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let c = CandidateSet::grid(Space::Circle, 64);
        assert_eq!(separated_count(&seq, 1, 0.6, &c).unwrap(), 1);
    }

    #[test]
    fn coarse_grid_rejected() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let c = CandidateSet::grid(Space::Circle, 16);
        assert!(matches!(
            separated_count(&seq, 3, 0.1, &c),
            Err(Error::GridTooCoarse { .. })
        ));
    }
}
