//! Sequential conjugacies and quasi-conjugacies, computed pointwise as
//! shadowing points.
//!
//! `h_{F,G}(x)` is the point whose F-orbit shadows the G-orbit of x. On the
//! circle it is obtained by pulling G_depth(x) back through the inverse
//! branches of F selected along the G-orbit; on the torus by shadowing the
//! two-sided G-orbit of x, truncated at ±depth.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_maps::{
    grid_points, seq_distance, wrap, wrap_signed, MapSequence, Order, Point, SmoothMap, Space,
};
use crate::shadowing::{pullback_circle, shadow_anosov, HyperbolicSplitting, PseudoOrbit};

/// A homeomorphism sampled on the uniform grid of resolution R.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugacySample {
    pub space: Space,
    pub resolution: usize,
    /// Images of the grid points in row-major order.
    pub images: Vec<Point>,
    pub sup_dist_to_identity: f64,
    /// Which shifted conjugacy h^(n) this is.
    pub shift: i64,
    pub depth: usize,
    /// Bound on |interpolated h − h| between grid points.
    pub interpolation_bound: f64,
}

impl ConjugacySample {
    pub fn identity(space: Space, resolution: usize) -> Self {
        Self::from_images(space, resolution, grid_points(space, resolution), 0, 0)
    }

    pub fn from_images(space: Space, resolution: usize, images: Vec<Point>, shift: i64, depth: usize) -> Self {
        let grid = grid_points(space, resolution);
        let sup = grid.iter().zip(&images).map(|(x, h)| x.dist(h)).fold(0.0, f64::max);
        let mut s = ConjugacySample {
            space,
            resolution,
            images,
            sup_dist_to_identity: sup,
            shift,
            depth,
            interpolation_bound: 0.0,
        };
        s.interpolation_bound = s.estimate_interpolation_bound();
        s
    }

    pub fn grid(&self) -> Vec<Point> {
        grid_points(self.space, self.resolution)
    }

    /// Lifted images H_i = x_i + wrap_signed(h_i − x_i) on the circle.
    pub fn lifted(&self) -> Vec<f64> {
        let r = self.resolution as f64;
        self.images
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let x = i as f64 / r;
                x + wrap_signed(h.x() - x)
            })
            .collect()
    }

    /// Degree-one orientation-preserving certificate: lifted images strictly
    /// increase and H_last < H_0 + 1. Torus samples return the empty list.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        if self.space != Space::Circle {
            return Vec::new();
        }
        let h = self.lifted();
        let n = h.len();
        (0..n)
            .filter(|&i| {
                let next = if i + 1 == n { h[0] + 1.0 } else { h[i + 1] };
                next <= h[i]
            })
            .collect()
    }

    fn estimate_interpolation_bound(&self) -> f64 {
        match self.space {
            // h and its interpolant both lie in [H_i, H_{i+1}] on cell i
            Space::Circle => {
                let h = self.lifted();
                let n = h.len();
                (0..n)
                    .map(|i| if i + 1 == n { h[0] + 1.0 - h[i] } else { h[i + 1] - h[i] })
                    .fold(0.0, f64::max)
            }
            // variation of the displacement across a cell
            Space::Torus => {
                let r = self.resolution;
                let disp = self.displacements();
                let mut worst = 0.0f64;
                for i in 0..r {
                    for j in 0..r {
                        let a = disp[i * r + j];
                        for b in [disp[((i + 1) % r) * r + j], disp[i * r + (j + 1) % r]] {
                            worst = worst.max((a[0] - b[0]).hypot(a[1] - b[1]));
                        }
                    }
                }
                worst
            }
        }
    }

    fn displacements(&self) -> Vec<[f64; 2]> {
        self.grid()
            .iter()
            .zip(&self.images)
            .map(|(x, h)| match (x, h) {
                (Point::Torus(a), Point::Torus(b)) => [wrap_signed(b[0] - a[0]), wrap_signed(b[1] - a[1])],
                (Point::Circle(a), Point::Circle(b)) => [wrap_signed(b - a), 0.0],
                _ => [0.0, 0.0],
            })
            .collect()
    }

    /// Interpolated h(x): monotone piecewise-linear on S¹, bilinear displacement on T².
    pub fn eval(&self, x: &Point) -> Point {
        let r = self.resolution;
        match *x {
            Point::Circle(v) => {
                let u = wrap(v) * r as f64;
                let i = (u.floor() as usize).min(r - 1);
                let t = u - i as f64;
                let xi = i as f64 / r as f64;
                let hi = xi + wrap_signed(self.images[i].x() - xi);
                let (j, shift) = if i + 1 == r { (0, 1.0) } else { (i + 1, 0.0) };
                let xj = j as f64 / r as f64;
                let hj = xj + wrap_signed(self.images[j].x() - xj) + shift;
                Point::circle(hi + t * (hj - hi))
            }
            Point::Torus(v) => {
                let u = [wrap(v[0]) * r as f64, wrap(v[1]) * r as f64];
                let i = [(u[0].floor() as usize).min(r - 1), (u[1].floor() as usize).min(r - 1)];
                let t = [u[0] - i[0] as f64, u[1] - i[1] as f64];
                let d = |a: usize, b: usize| -> [f64; 2] {
                    let x = [a as f64 / r as f64, b as f64 / r as f64];
                    let h = match self.images[(a % r) * r + b % r] {
                        Point::Torus(h) => h,
                        Point::Circle(h) => [h, 0.0],
                    };
                    // displacement relative to the (possibly unreduced) corner
                    [wrap_signed(h[0] - x[0]), wrap_signed(h[1] - x[1])]
                };
                let (d00, d10, d01, d11) = (
                    d(i[0], i[1]),
                    d(i[0] + 1, i[1]),
                    d(i[0], i[1] + 1),
                    d(i[0] + 1, i[1] + 1),
                );
                let mix = |k: usize| {
                    (1.0 - t[0]) * (1.0 - t[1]) * d00[k]
                        + t[0] * (1.0 - t[1]) * d10[k]
                        + (1.0 - t[0]) * t[1] * d01[k]
                        + t[0] * t[1] * d11[k]
                };
                Point::torus(v[0] + mix(0), v[1] + mix(1))
            }
        }
    }
}

/// Resolves h_{F,G} one point at a time.
pub struct PointwiseConjugacy<'a> {
    f: &'a MapSequence,
    g: &'a MapSequence,
    depth: usize,
    split: Option<HyperbolicSplitting>,
    tol: f64,
}

impl<'a> PointwiseConjugacy<'a> {
    /// Checks |||F − G|||_{C⁰} against the stability threshold of F.
    pub fn new(f: &'a MapSequence, g: &'a MapSequence, depth: usize) -> Result<Self> {
        if f.space() != g.space() {
            return Err(Error::IncompatiblePhaseSpaces);
        }
        if depth == 0 {
            return Err(Error::ParameterOutOfRange("depth must be positive".into()));
        }
        let grid = match f.space() {
            Space::Circle => 1024,
            Space::Torus => 64,
        };
        let dist = seq_distance(f, g, Order::C0, grid)?.lower;
        let (threshold, split) = match f.space() {
            Space::Circle => {
                let r = f.rates();
                // λε/(1−λ) < δ₀ keeps every pullback inside a branch domain
                ((1.0 - r.lambda) * r.delta0 / r.lambda, None)
            }
            Space::Torus => {
                let s = HyperbolicSplitting::new(f)?;
                (s.admissible_defect(), Some(s))
            }
        };
        if dist >= threshold {
            return Err(Error::StabilityThresholdExceeded {
                distance: dist,
                threshold,
            });
        }
        let tol = match &split {
            Some(s) => 10.0 * s.delta1 * s.lambda_tilde.powi(depth as i32) * 1.0001,
            None => 1.0,
        };
        Ok(PointwiseConjugacy {
            f,
            g,
            depth,
            split,
            tol,
        })
    }

    /// h_{F,G}(x).
    pub fn eval(&self, x: &Point) -> Result<Point> {
        match *x {
            Point::Circle(x0) => {
                let mut ys = Vec::with_capacity(self.depth + 1);
                let mut y = wrap(x0);
                ys.push(y);
                for n in 0..self.depth {
                    y = self.g.map(n as i64).eval_circle(y);
                    ys.push(y);
                }
                let z = pullback_circle(self.f, 0, &ys, self.f.rates().delta0)?;
                Ok(Point::Circle(z[0]))
            }
            Point::Torus(_) => {
                let d = self.depth;
                let mut pts = vec![*x; 2 * d + 1];
                for n in 0..d {
                    pts[d + n + 1] = self.g.map(n as i64).eval(&pts[d + n]);
                    pts[d - n - 1] = self.g.map(-(n as i64) - 1).invert(&pts[d - n])?;
                }
                let p = PseudoOrbit::new(self.f, pts, -(d as i64), 0)?;
                let split = self.split.as_ref().expect("torus conjugacy has a splitting");
                Ok(shadow_anosov(self.f, &p, split, self.tol)?.point)
            }
        }
    }

    /// h_{F,G} on every grid point, in parallel; failures are collected by index.
    pub fn sample(&self, resolution: usize, shift: i64) -> Result<ConjugacySample> {
        let grid = grid_points(self.f.space(), resolution);
        let res: Vec<Result<Point>> = grid.par_iter().map(|x| self.eval(x)).collect();
        let failed: Vec<usize> = res
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_err())
            .map(|(i, _)| i)
            .collect();
        if !failed.is_empty() {
            return Err(Error::ShadowFailure { locations: failed });
        }
        let images = res.into_iter().map(|r| r.expect("checked")).collect();
        let s = ConjugacySample::from_images(self.f.space(), resolution, images, shift, self.depth);
        let bad = s.monotonicity_violations();
        if !bad.is_empty() {
            return Err(Error::ShadowFailure { locations: bad });
        }
        Ok(s)
    }
}

fn check_resolution(r: usize) -> Result<()> {
    if r == 0 || !r.is_power_of_two() {
        return Err(Error::ParameterOutOfRange(format!("grid resolution {r} is not a power of two")));
    }
    Ok(())
}

/// h_{F,G} sampled on the grid of resolution R.
pub fn sequential_conjugacy(f: &MapSequence, g: &MapSequence, r: usize, depth: usize) -> Result<ConjugacySample> {
    check_resolution(r)?;
    PointwiseConjugacy::new(f, g, depth)?.sample(r, 0)
}

/// h_{F^(k),G^(k)}.
pub fn shifted_conjugacy(
    f: &MapSequence,
    g: &MapSequence,
    k: i64,
    r: usize,
    depth: usize,
) -> Result<ConjugacySample> {
    check_resolution(r)?;
    let (fk, gk) = (f.shifted(k)?, g.shifted(k)?);
    PointwiseConjugacy::new(&fk, &gk, depth)?.sample(r, k)
}

/// Defect of the relation h^(n)∘F_n = G_n∘h^(0), with h^(n) = h_{G^(n),F^(n)}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    /// max over n ≤ k_max and grid x, with h^(n) evaluated pointwise.
    pub pointwise: f64,
    /// The same with h^(n) interpolated from its grid sample.
    pub interpolated: f64,
    /// Largest interpolation bound among the h^(n) samples.
    pub interpolation_budget: f64,
    /// Pointwise residual per n.
    pub per_shift: Vec<f64>,
}

pub fn conjugacy_residual(
    f: &MapSequence,
    g: &MapSequence,
    k_max: usize,
    r: usize,
    depth: usize,
) -> Result<ResidualReport> {
    check_resolution(r)?;
    let h0 = PointwiseConjugacy::new(g, f, depth)?.sample(r, 0)?;
    let grid = h0.grid();
    let mut per_shift = Vec::with_capacity(k_max + 1);
    let (mut interpolated, mut budget) = (0.0f64, 0.0f64);
    for n in 0..=k_max as i64 {
        let (gn, fnn) = (g.shifted(n)?, f.shifted(n)?);
        let hn = PointwiseConjugacy::new(&gn, &fnn, depth)?;
        let hs = hn.sample(r, n)?;
        budget = budget.max(hs.interpolation_bound);
        let pairs: Vec<Result<(f64, f64)>> = grid
            .par_iter()
            .zip(&h0.images)
            .map(|(x, hx)| {
                let fx = f.compose(n, x)?;
                let rhs = g.compose(n, hx)?;
                let a = hn.eval(&fx)?.dist(&rhs);
                let b = hs.eval(&fx).dist(&rhs);
                Ok((a, b))
            })
            .collect();
        let mut worst = 0.0f64;
        for p in pairs {
            let (a, b) = p?;
            worst = worst.max(a);
            interpolated = interpolated.max(b);
        }
        per_shift.push(worst);
    }
    Ok(ResidualReport {
        pointwise: per_shift.iter().cloned().fold(0.0, f64::max),
        interpolated,
        interpolation_budget: budget,
        per_shift,
    })
}

/// A single homeomorphism h with max_n d_{C⁰}(G_n∘h, h∘F_n) certified on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiConjugacyReport {
    pub sample: ConjugacySample,
    /// |||F − G|||_{C⁰}, grid estimate.
    pub epsilon: f64,
    pub lambda: f64,
    /// λε/(1−λ): bound on ‖h − id‖_{C⁰}.
    pub distance_bound: f64,
    /// 2λε/(1−λ): bound on the quasi-conjugacy defect.
    pub defect_bound: f64,
    pub defect: f64,
    /// Truncation and rounding allowance added to both bounds in `holds`.
    pub slack: f64,
    pub horizon: usize,
    pub holds: bool,
}

/// h(x) = the point whose G-orbit shadows the F-orbit of x.
pub fn quasi_conjugacy_expanding(
    f: &MapSequence,
    g: &MapSequence,
    r: usize,
    depth: usize,
) -> Result<QuasiConjugacyReport> {
    check_resolution(r)?;
    if f.space() != Space::Circle {
        return Err(Error::WrongFamily {
            expected: "expanding-circle",
            found: "torus-hyperbolic",
        });
    }
    let eps = seq_distance(f, g, Order::C0, 1024)?.lower;
    let lambda = f.rates().lambda;
    let delta0 = f.rates().delta0.min(g.rates().delta0);
    // ε < (1−λ)δ/λ for some δ < δ₀/2
    let admissible = (1.0 - lambda) * delta0 / (2.0 * lambda);
    if eps >= admissible {
        return Err(Error::AdmissibilityViolated(format!(
            "|||F − G||| = {eps} ≥ (1−λ)δ₀/(2λ) = {admissible}"
        )));
    }
    let h = PointwiseConjugacy::new(g, f, depth)?;
    let sample = h.sample(r, 0)?;
    let horizon = depth / 2;
    let grid = sample.grid();
    let worst: Vec<Result<f64>> = grid
        .par_iter()
        .zip(&sample.images)
        .map(|(x, hx)| {
            let (mut fx, mut ghx) = (*x, *hx);
            let mut w = 0.0f64;
            for n in 0..=horizon {
                w = w.max(ghx.dist(&h.eval(&fx)?));
                fx = f.map(n as i64).eval(&fx);
                ghx = g.map(n as i64).eval(&ghx);
            }
            Ok(w)
        })
        .collect();
    let mut defect = 0.0f64;
    for w in worst {
        defect = defect.max(w?);
    }
    let distance_bound = lambda * eps / (1.0 - lambda);
    let defect_bound = 2.0 * distance_bound;
    let slack = g.rates().lambda.powi(depth as i32) * delta0 + 1e-12;
    Ok(QuasiConjugacyReport {
        holds: defect <= defect_bound + slack && sample.sup_dist_to_identity <= distance_bound + slack,
        sample,
        epsilon: eps,
        lambda,
        distance_bound,
        defect_bound,
        defect,
        slack,
        horizon,
    })
}

/// max over the grid of d(h_GF(h_FG(x)), x), with h_GF interpolated.
pub fn inverse_check(h_fg: &ConjugacySample, h_gf: &ConjugacySample) -> Result<f64> {
    if h_fg.space != h_gf.space || h_fg.resolution != h_gf.resolution {
        return Err(Error::GridMismatch(format!(
            "{} R={} vs {} R={}",
            h_fg.space.name(),
            h_fg.resolution,
            h_gf.space.name(),
            h_gf.resolution
        )));
    }
    Ok(h_fg
        .grid()
        .iter()
        .zip(&h_fg.images)
        .map(|(x, hx)| h_gf.eval(hx).dist(x))
        .fold(0.0, f64::max))
}

/// The point whose g-itinerary equals the f-itinerary of x to `depth` symbols,
/// found by nested inverse branches of g.
pub fn itinerary_oracle(f: &SmoothMap, g: &SmoothMap, x: &Point, depth: usize) -> Result<Point> {
    let (Some(df), Some(dg)) = (f.degree(), g.degree()) else {
        return Err(Error::WrongFamily {
            expected: "expanding-circle",
            found: "torus-hyperbolic",
        });
    };
    if df != dg {
        return Err(Error::InvalidMap(format!("degrees differ: {df} vs {dg}")));
    }
    let l0 = f.lift(0.0)?;
    let mut y = wrap(x.x());
    let mut code = Vec::with_capacity(depth);
    for step in 0..depth {
        let v = f.lift(y)? - l0;
        let off = (v - v.round()).abs();
        if off > 0.0 && off < 1e-13 {
            return Err(Error::BoundaryItinerary { step });
        }
        code.push((v.floor().max(0.0) as u32).min(df - 1));
        y = f.view().eval_circle(y);
    }
    let mut p = Point::Circle(y);
    for &b in code.iter().rev() {
        p = g.inverse_branch(&p, b)?;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_conjugacy_for_equal_sequences() {
        let f = MapSequence::constant(SmoothMap::perturbed_doubling(0.05).unwrap());
        let h = sequential_conjugacy(&f, &f, 256, 40).unwrap();
        assert!(h.sup_dist_to_identity < 1e-12);
        assert!(h.monotonicity_violations().is_empty());
    }

    #[test]
    fn fixed_point_is_preserved() {
        let f = MapSequence::constant(SmoothMap::doubling());
        let g = MapSequence::constant(SmoothMap::perturbed_doubling(0.05).unwrap());
        let h = sequential_conjugacy(&f, &g, 64, 40).unwrap();
        assert_eq!(h.images[0].x(), 0.0);
    }

    #[test]
    fn oracle_one_third_is_period_two() {
        let f = SmoothMap::doubling();
        let g = SmoothMap::perturbed_doubling(0.05).unwrap();
        let p = itinerary_oracle(&f, &g, &Point::circle(1.0 / 3.0), 40).unwrap();
        let g2 = g.eval(&g.eval(&p));
        assert!(g2.dist(&p) < 1e-12);
        assert_eq!(g.branch_of(p.x()).unwrap(), 0);
        assert_eq!(g.branch_of(g.eval(&p).x()).unwrap(), 1);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let f = MapSequence::constant(SmoothMap::doubling());
        assert!(sequential_conjugacy(&f, &f, 1000, 10).is_err());
    }
}
