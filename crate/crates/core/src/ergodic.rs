//! Birkhoff averages, empirical measures and their pushforwards, and an
//! explicit Birkhoff-irregular point for the doubling map.

use rayon::prelude::*;
use serde::Serialize;

use crate::conjugacy::{shifted_conjugacy, ConjugacySample};
use crate::digits::{Block, CircleOrbit, DigitProgram};
use crate::error::{Error, Result};
use crate::phase_maps::{wrap, MapSequence, Observable, Point, SmoothMap, Space};
use crate::shadowing::pullback_circle;

/// Where an orbit starts.
#[derive(Clone, Debug, PartialEq)]
pub enum OrbitStart {
    /// A circle point given digit by digit; exact for the doubling map.
    Digits(DigitProgram),
    /// A float point. Circle orbits refill the low mantissa bit from a
    /// random stream keyed by the bits of the point, i.e. they follow a
    /// Lebesgue-typical point within 2^-53 of it rather than collapsing to 0.
    Point(Point),
    /// h(y) for the programmed point y, where h carries orbits of the
    /// constant sequence {reference} to orbits of the sequence being run. The
    /// orbit is the pullback of the reference orbit of y through the inverse
    /// branches of the sequence: a true orbit up to rounding, unlike a
    /// forward float orbit whose rounding noise selects the physical measure.
    Conjugate { reference: SmoothMap, program: DigitProgram },
}

/// Extra reference steps pulled back beyond the requested length; the
/// endpoint error contracts by λ per step.
pub const PULLBACK_MARGIN: usize = 64;

impl OrbitStart {
    pub fn space(&self) -> Space {
        match self {
            OrbitStart::Digits(_) => Space::Circle,
            OrbitStart::Point(p) => p.space(),
            OrbitStart::Conjugate { reference, .. } => reference.space(),
        }
    }
}

/// Visit F_j(x) for j = 0..n.
pub fn for_each_orbit_point(
    seq: &MapSequence,
    start: &OrbitStart,
    n: usize,
    mut visit: impl FnMut(usize, Point),
) -> Result<()> {
    if start.space() != seq.space() {
        return Err(Error::IncompatiblePhaseSpaces);
    }
    match start {
        OrbitStart::Digits(prog) => {
            let mut o = CircleOrbit::new(seq, prog);
            for j in 0..n {
                visit(j, Point::Circle(o.current()));
                o.advance();
            }
        }
        OrbitStart::Point(Point::Circle(x)) => {
            let refill = DigitProgram::random(x.to_bits(), 0x5eed);
            let mut o = CircleOrbit::from_point(seq, *x, &refill);
            for j in 0..n {
                visit(j, Point::Circle(o.current()));
                o.advance();
            }
        }
        OrbitStart::Conjugate { reference, program } => {
            for (j, z) in conjugate_orbit(seq, reference, program, n)?.into_iter().take(n).enumerate() {
                visit(j, Point::Circle(z));
            }
        }
        OrbitStart::Point(p @ Point::Torus(_)) => {
            let mut x = p.normalized();
            for j in 0..n {
                visit(j, x);
                x = seq.map(j as i64).eval(&x);
            }
        }
    }
    Ok(())
}

/// The reference orbit of y (n + PULLBACK_MARGIN points) and the sequence
/// orbit of h(y) pulled back from it, in that order.
pub fn conjugate_orbit_pair(
    seq: &MapSequence,
    reference: &SmoothMap,
    program: &DigitProgram,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if reference.space() != Space::Circle || seq.space() != Space::Circle {
        return Err(Error::WrongFamily {
            expected: "expanding-circle",
            found: "torus-hyperbolic",
        });
    }
    let f = MapSequence::constant(reference.clone());
    let mut ys = Vec::with_capacity(n + PULLBACK_MARGIN);
    let mut o = CircleOrbit::new(&f, program);
    for _ in 0..n + PULLBACK_MARGIN {
        ys.push(o.current());
        o.advance();
    }
    let z = pullback_circle(seq, 0, &ys, seq.rates().delta0)?;
    Ok((ys, z))
}

fn conjugate_orbit(seq: &MapSequence, reference: &SmoothMap, program: &DigitProgram, n: usize) -> Result<Vec<f64>> {
    Ok(conjugate_orbit_pair(seq, reference, program, n)?.1)
}

/// Running averages (1/m)Σ_{j<m} φ(F_j(x)) for m = 1..n.
pub fn birkhoff_average(seq: &MapSequence, phi: &Observable, start: &OrbitStart, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("n must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut s = 0.0;
    for_each_orbit_point(seq, start, n, |j, p| {
        s += phi.eval(&p);
        out.push(s / (j + 1) as f64);
    })?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Orbit,
    Samples,
    Pushforward,
    Mixture,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Support {
    /// Weighted atoms.
    Atoms { points: Vec<Point>, weights: Vec<f64> },
    /// `bins` per axis, row-major masses.
    Histogram { bins: usize, mass: Vec<f64> },
}

/// A probability measure on S¹ or T² given by atoms or a fixed-bin histogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    pub space: Space,
    pub support: Support,
    /// Number of underlying samples.
    pub count: usize,
    pub provenance: Provenance,
}

impl EmpiricalMeasure {
    pub fn point_mass(p: Point) -> Self {
        Self::from_points(vec![p], Provenance::Samples)
    }

    pub fn from_points(points: Vec<Point>, provenance: Provenance) -> Self {
        let n = points.len();
        EmpiricalMeasure {
            space: points.first().map(|p| p.space()).unwrap_or(Space::Circle),
            support: Support::Atoms {
                weights: vec![1.0 / n as f64; n],
                points,
            },
            count: n,
            provenance,
        }
    }

    /// Atoms at the centers of a uniform grid: Lebesgue up to discretization.
    pub fn lebesgue_grid(space: Space, per_axis: usize) -> Self {
        let h = 1.0 / per_axis as f64;
        let pts = match space {
            Space::Circle => (0..per_axis).map(|i| Point::Circle((i as f64 + 0.5) * h)).collect(),
            Space::Torus => (0..per_axis)
                .flat_map(|i| (0..per_axis).map(move |j| Point::Torus([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h])))
                .collect(),
        };
        Self::from_points(pts, Provenance::Samples)
    }

    pub fn total_mass(&self) -> f64 {
        match &self.support {
            Support::Atoms { weights, .. } => weights.iter().sum(),
            Support::Histogram { mass, .. } => mass.iter().sum(),
        }
    }

    /// Atoms representation; histogram bins split into sub-cell atoms.
    pub fn to_atoms(&self) -> (Vec<Point>, Vec<f64>) {
        const SUB: usize = 4;
        match &self.support {
            Support::Atoms { points, weights } => (points.clone(), weights.clone()),
            Support::Histogram { bins, mass } => {
                let h = 1.0 / *bins as f64;
                let mut pts = Vec::new();
                let mut ws = Vec::new();
                match self.space {
                    Space::Circle => {
                        for (i, &m) in mass.iter().enumerate() {
                            if m == 0.0 {
                                continue;
                            }
                            for s in 0..SUB {
                                pts.push(Point::Circle((i as f64 + (s as f64 + 0.5) / SUB as f64) * h));
                                ws.push(m / SUB as f64);
                            }
                        }
                    }
                    Space::Torus => {
                        for (k, &m) in mass.iter().enumerate() {
                            if m == 0.0 {
                                continue;
                            }
                            let (i, j) = (k / bins, k % bins);
                            for a in 0..2 {
                                for b in 0..2 {
                                    pts.push(Point::Torus([
                                        (i as f64 + (a as f64 + 0.5) / 2.0) * h,
                                        (j as f64 + (b as f64 + 0.5) / 2.0) * h,
                                    ]));
                                    ws.push(m / 4.0);
                                }
                            }
                        }
                    }
                }
                (pts, ws)
            }
        }
    }

    /// Marginal on coordinate `axis` as a circle measure.
    fn marginal(&self, axis: usize) -> EmpiricalMeasure {
        let support = match &self.support {
            Support::Atoms { points, weights } => Support::Atoms {
                points: points.iter().map(|p| Point::Circle(p.coords()[axis])).collect(),
                weights: weights.clone(),
            },
            Support::Histogram { bins, mass } => {
                let mut m = vec![0.0; *bins];
                for (k, &v) in mass.iter().enumerate() {
                    m[if axis == 0 { k / bins } else { k % bins }] += v;
                }
                Support::Histogram { bins: *bins, mass: m }
            }
        };
        EmpiricalMeasure {
            space: Space::Circle,
            support,
            count: self.count,
            provenance: self.provenance,
        }
    }
}

/// Histogram of F_j(x), j < n.
pub fn empirical_measure(seq: &MapSequence, start: &OrbitStart, n: usize, bins: usize) -> Result<EmpiricalMeasure> {
    if n == 0 || bins == 0 {
        return Err(Error::ParameterOutOfRange("n and bins must be positive".into()));
    }
    let space = seq.space();
    let cells = match space {
        Space::Circle => bins,
        Space::Torus => bins * bins,
    };
    let mut counts = vec![0u64; cells];
    let b = bins as f64;
    for_each_orbit_point(seq, start, n, |_, p| {
        let idx = match p {
            Point::Circle(x) => ((x * b) as usize).min(bins - 1),
            Point::Torus([x, y]) => ((x * b) as usize).min(bins - 1) * bins + ((y * b) as usize).min(bins - 1),
        };
        counts[idx] += 1;
    })?;
    Ok(EmpiricalMeasure {
        space,
        support: Support::Histogram {
            bins,
            mass: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        },
        count: n,
        provenance: Provenance::Orbit,
    })
}

/// h_*μ with h interpolated from its grid sample.
pub fn pushforward(h: &ConjugacySample, mu: &EmpiricalMeasure) -> Result<EmpiricalMeasure> {
    if h.space != mu.space {
        return Err(Error::GridMismatch(format!(
            "conjugacy on {} applied to a measure on {}",
            h.space.name(),
            mu.space.name()
        )));
    }
    let (pts, ws) = mu.to_atoms();
    let mapped: Vec<Point> = pts.par_iter().map(|p| h.eval(p)).collect();
    Ok(EmpiricalMeasure {
        space: mu.space,
        support: Support::Atoms {
            points: mapped,
            weights: ws,
        },
        count: mu.count,
        provenance: Provenance::Pushforward,
    })
}

/// Uniform mixture (1/N)Σ (h_i)_*μ.
pub fn periodic_limit_measure(h_list: &[ConjugacySample], mu: &EmpiricalMeasure) -> Result<EmpiricalMeasure> {
    if h_list.is_empty() {
        return Err(Error::EmptyList);
    }
    let n = h_list.len() as f64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for h in h_list {
        let pushed = pushforward(h, mu)?;
        if let Support::Atoms { points: p, weights: w } = pushed.support {
            points.extend(p);
            weights.extend(w.into_iter().map(|v| v / n));
        }
    }
    Ok(EmpiricalMeasure {
        space: mu.space,
        support: Support::Atoms { points, weights },
        count: mu.count * h_list.len(),
        provenance: Provenance::Mixture,
    })
}

/// Distance between (1/n)Σ_{j<n}(f_j)_*μ and μ.
pub fn average_invariance_defect(seq: &MapSequence, mu: &EmpiricalMeasure, n: usize) -> Result<f64> {
    if mu.space != seq.space() {
        return Err(Error::IncompatiblePhaseSpaces);
    }
    if n == 0 {
        return Err(Error::ParameterOutOfRange("n must be at least 1".into()));
    }
    let (pts, ws) = mu.to_atoms();
    let mut points = Vec::with_capacity(pts.len() * n);
    let mut weights = Vec::with_capacity(pts.len() * n);
    for j in 0..n {
        let f = seq.map(j as i64);
        for (p, w) in pts.iter().zip(&ws) {
            points.push(f.eval(p));
            weights.push(w / n as f64);
        }
    }
    let avg = EmpiricalMeasure {
        space: mu.space,
        support: Support::Atoms { points, weights },
        count: mu.count * n,
        provenance: Provenance::Mixture,
    };
    measure_distance(&avg, mu)
}

/// Kolmogorov–Smirnov distance on S¹, minimized over the cut point:
/// half the range of D(t) = μ[0,t) − ν[0,t). On T² the larger of the two
/// marginal distances.
pub fn measure_distance(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if mu.space != nu.space {
        return Err(Error::IncompatiblePhaseSpaces);
    }
    match mu.space {
        Space::Circle => Ok(circle_ks(mu, nu)),
        Space::Torus => Ok(circle_ks(&mu.marginal(0), &nu.marginal(0)).max(circle_ks(&mu.marginal(1), &nu.marginal(1)))),
    }
}

/// Cumulative mass function of a circle measure, evaluated at sorted queries.
struct Cdf {
    atoms: Vec<(f64, f64)>,
    prefix: Vec<f64>,
    bins: usize,
}

impl Cdf {
    fn new(m: &EmpiricalMeasure) -> Self {
        match &m.support {
            Support::Atoms { points, weights } => {
                let mut atoms: Vec<(f64, f64)> = points.iter().map(|p| wrap(p.x())).zip(weights.iter().cloned()).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                Cdf {
                    atoms,
                    prefix: Vec::new(),
                    bins: 0,
                }
            }
            Support::Histogram { bins, mass } => {
                let mut prefix = Vec::with_capacity(bins + 1);
                prefix.push(0.0);
                for &v in mass {
                    prefix.push(prefix.last().unwrap() + v);
                }
                Cdf {
                    atoms: Vec::new(),
                    prefix,
                    bins: *bins,
                }
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        if self.bins > 0 {
            (0..=self.bins).map(|i| i as f64 / self.bins as f64).collect()
        } else {
            self.atoms.iter().map(|a| a.0).collect()
        }
    }

    /// (mass of [0,t), mass of [0,t]) for ascending t.
    fn eval_sorted(&self, ts: &[f64]) -> Vec<(f64, f64)> {
        if self.bins > 0 {
            let b = self.bins as f64;
            ts.iter()
                .map(|&t| {
                    let u = t * b;
                    let i = (u.floor() as usize).min(self.bins);
                    let v = if i == self.bins {
                        self.prefix[i]
                    } else {
                        self.prefix[i] + (u - i as f64) * (self.prefix[i + 1] - self.prefix[i])
                    };
                    (v, v)
                })
                .collect()
        } else {
            let mut out = Vec::with_capacity(ts.len());
            let (mut k, mut below) = (0usize, 0.0f64);
            for &t in ts {
                while k < self.atoms.len() && self.atoms[k].0 < t {
                    below += self.atoms[k].1;
                    k += 1;
                }
                let mut at = below;
                let mut j = k;
                while j < self.atoms.len() && self.atoms[j].0 == t {
                    at += self.atoms[j].1;
                    j += 1;
                }
                out.push((below, at));
            }
            out
        }
    }
}

fn circle_ks(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> f64 {
    let (a, b) = (Cdf::new(mu), Cdf::new(nu));
    let mut ts = a.breakpoints();
    ts.extend(b.breakpoints());
    ts.push(0.0);
    ts.sort_by(|x, y| x.total_cmp(y));
    ts.dedup();
    let (ea, eb) = (a.eval_sorted(&ts), b.eval_sorted(&ts));
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (x, y) in ea.iter().zip(&eb) {
        for d in [x.0 - y.0, x.1 - y.1] {
            hi = hi.max(d);
            lo = lo.min(d);
        }
    }
    0.5 * (hi - lo)
}

/// An explicit point whose doubling-map Birkhoff averages oscillate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrregularProbe {
    pub program: DigitProgram,
    pub block_lengths: Vec<u64>,
    pub growth: u64,
    /// Running averages for m = 1..trace_len.
    #[serde(skip)]
    pub trace: Vec<f64>,
    /// limsup and liminf are measured over m ≥ window_start.
    pub window_start: usize,
    pub liminf: f64,
    pub limsup: f64,
    pub fixed_average: f64,
    pub period_two_average: f64,
}

/// Block growth factor. Each block is 20 times longer than everything before
/// it combined (up to 5%), so its average dominates the running average at its end.
pub const BLOCK_GROWTH: u64 = 20;

/// Alternating blocks of 0s (tracking the fixed point 0) and of 01s
/// (tracking the period-2 orbit {1/3, 2/3}), of lengths 20^k.
pub fn irregular_point(f: &SmoothMap, phi: &Observable, trace_len: usize) -> Result<IrregularProbe> {
    if !f.is_doubling() {
        return Err(Error::WrongFamily {
            expected: "doubling map",
            found: f.family(),
        });
    }
    if phi.space() != Space::Circle || trace_len == 0 {
        return Err(Error::ParameterOutOfRange("irregular point needs a circle observable and trace_len ≥ 1".into()));
    }
    let fixed = phi.eval_circle(0.0);
    let p2 = 0.5 * (phi.eval_circle(1.0 / 3.0) + phi.eval_circle(2.0 / 3.0));
    if (fixed - p2).abs() < 1e-12 {
        return Err(Error::DegenerateObservable);
    }
    let mut blocks = Vec::new();
    let mut lengths = Vec::new();
    let (mut total, mut len) = (0u64, 1u64);
    let mut k = 0;
    // 53 extra digits feed the mantissa window at the end of the trace
    while total < trace_len as u64 + 64 {
        let block = if k % 2 == 0 {
            Block {
                pattern: vec![0],
                repeats: len,
            }
        } else {
            Block {
                pattern: vec![0, 1],
                repeats: len / 2,
            }
        };
        total += block.len();
        lengths.push(block.len());
        blocks.push(block);
        len *= BLOCK_GROWTH;
        k += 1;
    }
    let program = DigitProgram::Blocks {
        blocks,
        tail: vec![0],
    };
    let seq = MapSequence::constant(f.clone());
    let trace = birkhoff_average(&seq, phi, &OrbitStart::Digits(program.clone()), trace_len)?;
    let window_start = (trace_len / 1000).max(1);
    let (liminf, limsup) = window_extremes(&trace, window_start);
    Ok(IrregularProbe {
        program,
        block_lengths: lengths,
        growth: BLOCK_GROWTH,
        trace,
        window_start,
        liminf,
        limsup,
        fixed_average: fixed,
        period_two_average: p2,
    })
}

fn window_extremes(trace: &[f64], start: usize) -> (f64, f64) {
    trace[start - 1..]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// The irregular point carried to a convergent-tail sequence F → f by the conjugacy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportReport {
    pub gap_limit: f64,
    pub gap_sequence: f64,
    /// Running averages along F for m = 1..trace_len.
    #[serde(skip)]
    pub trace: Vec<f64>,
    pub liminf_sequence: f64,
    pub limsup_sequence: f64,
    /// max_m (1/m)Σ_{j<m} |φ|_α·sup d(h_j, id)^α over the window.
    pub budget: f64,
    /// max_m |average along F − average along f| over the window.
    pub measured_shift: f64,
    /// measured_shift ≤ budget at every m in the window.
    pub within_budget: bool,
    /// sup d(h_j, id) for the measured shifts j.
    pub sup_dist: Vec<f64>,
    /// Fitted L̂ with sup d(h_j, id) ≤ L̂·a_j, used beyond the measured shifts.
    pub l_hat: f64,
}

/// Options for the conjugacy measurements behind the transport budget.
#[derive(Clone, Copy, Debug)]
pub struct TransportOptions {
    pub measured_shifts: usize,
    pub resolution: usize,
    pub depth: usize,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            measured_shifts: 64,
            resolution: 1024,
            depth: 40,
        }
    }
}

/// Evaluate φ along the F-orbit of h(y), y the irregular point, where
/// F_j(h(y)) = h_j(f^j(y)). The F-orbit is the pullback of the f-orbit of y
/// through the inverse branches of F.
pub fn irregular_transport(
    probe: &IrregularProbe,
    seq: &MapSequence,
    phi: &Observable,
    opts: TransportOptions,
) -> Result<TransportReport> {
    let limit = seq.limit().ok_or(Error::NoDeclaredLimit)?;
    if !limit.is_doubling() {
        return Err(Error::WrongFamily {
            expected: "sequence converging to the doubling map",
            found: limit.family(),
        });
    }
    let n = probe.trace.len();
    let f = MapSequence::constant(limit.clone());
    let (_, z) = conjugate_orbit_pair(seq, limit, &probe.program, n)?;
    let mut trace = Vec::with_capacity(n);
    let mut s = 0.0;
    for (j, &x) in z.iter().take(n).enumerate() {
        s += phi.eval_circle(x);
        trace.push(s / (j + 1) as f64);
    }
    let (liminf, limsup) = window_extremes(&trace, probe.window_start);

    // sup d(h_j, id): measured for small j, L̂·a_j beyond
    let sup_dist: Vec<f64> = (0..opts.measured_shifts)
        .map(|j| shifted_conjugacy(seq, &f, j as i64, opts.resolution, opts.depth).map(|h| h.sup_dist_to_identity))
        .collect::<Result<_>>()?;
    let mut l_hat = 0.0f64;
    for (j, &d) in sup_dist.iter().enumerate() {
        let a = seq.tail_decay(j as u64)?;
        if a > 0.0 {
            l_hat = l_hat.max(d / a);
        }
    }
    let (alpha, c) = (phi.alpha(), phi.holder_constant());
    let (mut acc, mut budget, mut measured, mut within) = (0.0, 0.0f64, 0.0f64, true);
    for m in 1..=n {
        let j = m - 1;
        let d = if j < sup_dist.len() {
            sup_dist[j]
        } else {
            l_hat * seq.tail_decay(j as u64)?
        };
        acc += c * d.powf(alpha);
        if m >= probe.window_start {
            let b = acc / m as f64;
            let shift = (trace[j] - probe.trace[j]).abs();
            budget = budget.max(b);
            measured = measured.max(shift);
            // rounding of the two running sums
            within &= shift <= b + 1e-9;
        }
    }
    Ok(TransportReport {
        gap_limit: probe.limsup - probe.liminf,
        gap_sequence: limsup - liminf,
        trace,
        liminf_sequence: liminf,
        limsup_sequence: limsup,
        budget,
        measured_shift: measured,
        within_budget: within,
        sup_dist,
        l_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_observable_average() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let phi = Observable::constant(Space::Circle, 1.0);
        let a = birkhoff_average(&seq, &phi, &OrbitStart::Digits(DigitProgram::random(1, 0)), 100).unwrap();
        assert!(a.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn period_two_average() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let phi = Observable::cos_circle(1);
        let a = birkhoff_average(&seq, &phi, &OrbitStart::Digits(DigitProgram::one_third()), 10_000).unwrap();
        assert!((a[9_999] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn measure_distance_examples() {
        let a = EmpiricalMeasure::point_mass(Point::Circle(0.0));
        let b = EmpiricalMeasure::point_mass(Point::Circle(0.5));
        assert_eq!(measure_distance(&a, &a).unwrap(), 0.0);
        assert!((measure_distance(&a, &b).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn point_mass_defect_at_non_fixed_point() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let mu = EmpiricalMeasure::point_mass(Point::Circle(0.1));
        let d = average_invariance_defect(&seq, &mu, 1).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_observable_is_degenerate() {
        let phi = Observable::constant(Space::Circle, 2.0);
        assert_eq!(
            irregular_point(&SmoothMap::doubling(), &phi, 1000).unwrap_err(),
            Error::DegenerateObservable
        );
    }

    #[test]
    fn identity_pushforward_is_identity() {
        let mu = EmpiricalMeasure::from_points(vec![Point::Circle(0.3), Point::Circle(0.71)], Provenance::Samples);
        let h = ConjugacySample::identity(Space::Circle, 64);
        let pushed = pushforward(&h, &mu).unwrap();
        assert_eq!(pushed.to_atoms(), mu.to_atoms());
    }
}
