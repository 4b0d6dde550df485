use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::point::{wrap, wrap_signed, Point, Space};
use crate::error::{Error, Result};

/// One term `amplitude · sin(2π⟨frequency, x⟩ + phase)` added to coordinate
/// `component` of a lift. Circle maps only read `frequency[0]` and use component 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub frequency: [i32; 2],
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub component: usize,
}

impl TrigTerm {
    pub fn circle(amplitude: f64, frequency: i32) -> Self {
        TrigTerm {
            amplitude,
            frequency: [frequency, 0],
            phase: 0.0,
            component: 0,
        }
    }

    pub fn torus(component: usize, amplitude: f64, frequency: [i32; 2]) -> Self {
        TrigTerm {
            amplitude,
            frequency,
            phase: 0.0,
            component,
        }
    }

    #[inline]
    fn arg1(&self, x: f64) -> f64 {
        TAU * self.frequency[0] as f64 * x + self.phase
    }

    #[inline]
    fn arg2(&self, x: [f64; 2]) -> f64 {
        TAU * (self.frequency[0] as f64 * x[0] + self.frequency[1] as f64 * x[1]) + self.phase
    }

    fn freq_norm(&self, space: Space) -> f64 {
        match space {
            Space::Circle => self.frequency[0].abs() as f64,
            Space::Torus => (self.frequency[0] as f64).hypot(self.frequency[1] as f64),
        }
    }

    /// Bound on |d/dx| of the term.
    fn c1_bound(&self, space: Space) -> f64 {
        self.amplitude.abs() * TAU * self.freq_norm(space)
    }

    /// Bound on |d²/dx²| of the term.
    fn c2_bound(&self, space: Space) -> f64 {
        self.amplitude.abs() * (TAU * self.freq_norm(space)).powi(2)
    }
}

/// Uniform hyperbolicity data of a map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rates {
    /// Contraction rate of inverse branches (expanding) or of the cone dynamics (torus).
    pub lambda: f64,
    /// Radius of the balls on which the nearest inverse branch is unambiguous.
    pub delta0: f64,
    /// Upper bound on the operator norm of the derivative.
    pub sup_derivative: f64,
    /// Upper bound on the second derivative, used for grid-to-sup gap bounds.
    pub sup_second_derivative: f64,
}

/// Spectral data of the integer matrix of a torus map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearModel {
    pub unstable_eigenvalue: f64,
    pub stable_eigenvalue: f64,
    /// Unit eigenvectors.
    pub unstable: [f64; 2],
    pub stable: [f64; 2],
}

impl LinearModel {
    fn from_matrix(a: [[i64; 2]; 2]) -> Result<Self> {
        let tr = (a[0][0] + a[1][1]) as f64;
        let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) as f64;
        let disc = tr * tr - 4.0 * det;
        if disc <= 0.0 {
            return Err(Error::InvalidMap("matrix has complex eigenvalues".into()));
        }
        let r = disc.sqrt();
        let (m1, m2) = ((tr + r) / 2.0, (tr - r) / 2.0);
        let (mu, ms) = if m1.abs() >= m2.abs() { (m1, m2) } else { (m2, m1) };
        if (mu.abs() - 1.0).abs() < 1e-12 || (ms.abs() - 1.0).abs() < 1e-12 {
            return Err(Error::InvalidMap("eigenvalue on the unit circle".into()));
        }
        let eigvec = |m: f64| -> [f64; 2] {
            // (A - m I) v = 0
            let (a00, a01, a10, a11) = (a[0][0] as f64, a[0][1] as f64, a[1][0] as f64, a[1][1] as f64);
            let v = if a01.abs() > 0.0 || (a00 - m).abs() > 0.0 {
                if a01.abs() >= (a00 - m).abs() {
                    [a01, m - a00]
                } else {
                    [m - a11, a10]
                }
            } else {
                [0.0, 1.0]
            };
            let n = v[0].hypot(v[1]);
            [v[0] / n, v[1] / n]
        };
        Ok(LinearModel {
            unstable_eigenvalue: mu,
            stable_eigenvalue: ms,
            unstable: eigvec(mu),
            stable: eigvec(ms),
        })
    }

    /// Coordinates (unstable, stable) of v in the eigenbasis.
    pub fn decompose(&self, v: [f64; 2]) -> [f64; 2] {
        let (u, s) = (self.unstable, self.stable);
        let det = u[0] * s[1] - u[1] * s[0];
        [
            (v[0] * s[1] - v[1] * s[0]) / det,
            (u[0] * v[1] - u[1] * v[0]) / det,
        ]
    }

    pub fn compose(&self, c: [f64; 2]) -> [f64; 2] {
        [
            c[0] * self.unstable[0] + c[1] * self.stable[0],
            c[0] * self.unstable[1] + c[1] * self.stable[1],
        ]
    }

    /// ‖P‖·‖P⁻¹‖ for the eigenbasis matrix P (Frobenius bounds).
    fn conditioning(&self) -> f64 {
        let (u, s) = (self.unstable, self.stable);
        let det = (u[0] * s[1] - u[1] * s[0]).abs();
        let fro = (u[0] * u[0] + u[1] * u[1] + s[0] * s[0] + s[1] * s[1]).sqrt();
        fro * fro / det
    }

    /// Angle between the eigendirections, in (0, π/2].
    pub fn angle(&self) -> f64 {
        let c = (self.unstable[0] * self.stable[0] + self.unstable[1] * self.stable[1]).abs();
        c.min(1.0).acos()
    }
}

/// Certified bounds on the derivative of a circle lift from a uniform grid:
/// the derivative is c2-Lipschitz, so it is within c2/(2G) of its value at
/// the nearest of G grid points. Tighter than degree ± Σ|term'| when several
/// terms cannot peak together.
fn derivative_range(degree: u32, terms: &[TrigTerm], c2: f64) -> (f64, f64) {
    const G: usize = 1 << 12;
    if terms.len() < 2 {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..G {
        let x = i as f64 / G as f64;
        let d = degree as f64
            + terms
                .iter()
                .map(|t| t.amplitude * TAU * t.frequency[0] as f64 * t.arg1(x).cos())
                .sum::<f64>();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let gap = c2 / (2.0 * G as f64);
    (lo - gap, hi + gap)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircleMap {
    degree: u32,
    shift: f64,
    terms: Vec<TrigTerm>,
    rates: Rates,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMap {
    matrix: [[i64; 2]; 2],
    inverse: [[i64; 2]; 2],
    terms: Vec<TrigTerm>,
    linear: LinearModel,
    rates: Rates,
}

/// Closed-form map of S¹ (expanding, lift `d·x + shift + Σ terms`) or T²
/// (hyperbolic, lift `A·x + Σ terms`).
#[derive(Clone, Debug, PartialEq)]
pub enum SmoothMap {
    Circle(CircleMap),
    Torus(TorusMap),
}

impl SmoothMap {
    /// Expanding circle map with lift `degree·x + shift + Σ terms`.
    pub fn expanding_circle(degree: u32, shift: f64, terms: Vec<TrigTerm>) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidMap(format!("degree {degree} < 2")));
        }
        let c1: f64 = terms.iter().map(|t| t.c1_bound(Space::Circle)).sum();
        let c2: f64 = terms.iter().map(|t| t.c2_bound(Space::Circle)).sum();
        let (grid_min, grid_max) = derivative_range(degree, &terms, c2);
        let min_der = (degree as f64 - c1).max(grid_min);
        if min_der <= 1.0 {
            return Err(Error::InvalidMap(format!(
                "derivative lower bound {min_der} is not > 1; map is not expanding"
            )));
        }
        let sup = (degree as f64 + c1).min(grid_max);
        Ok(SmoothMap::Circle(CircleMap {
            degree,
            shift,
            terms,
            rates: Rates {
                lambda: 1.0 / min_der,
                delta0: 1.0 / (2.0 * sup),
                sup_derivative: sup,
                sup_second_derivative: c2,
            },
        }))
    }

    /// The doubling map x ↦ 2x mod 1.
    pub fn doubling() -> Self {
        Self::expanding_circle(2, 0.0, Vec::new()).expect("doubling map is expanding")
    }

    /// `2x + amplitude·sin(2πx)`.
    pub fn perturbed_doubling(amplitude: f64) -> Result<Self> {
        Self::expanding_circle(2, 0.0, vec![TrigTerm::circle(amplitude, 1)])
    }

    /// Hyperbolic torus map with lift `A·x + Σ terms`; `A` must be unimodular.
    pub fn torus_hyperbolic(matrix: [[i64; 2]; 2], terms: Vec<TrigTerm>) -> Result<Self> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det.abs() != 1 {
            return Err(Error::InvalidMap(format!("det A = {det}, expected ±1")));
        }
        if terms.iter().any(|t| t.component > 1) {
            return Err(Error::InvalidMap("term component must be 0 or 1".into()));
        }
        let inverse = [
            [matrix[1][1] * det, -matrix[0][1] * det],
            [-matrix[1][0] * det, matrix[0][0] * det],
        ];
        let linear = LinearModel::from_matrix(matrix)?;
        let c1: f64 = terms.iter().map(|t| t.c1_bound(Space::Torus)).sum();
        let c2: f64 = terms.iter().map(|t| t.c2_bound(Space::Torus)).sum();
        let pert = c1 * linear.conditioning();
        let mu = linear.unstable_eigenvalue.abs();
        let ms = linear.stable_eigenvalue.abs();
        if mu - pert <= 1.0 || ms + pert >= 1.0 {
            return Err(Error::InvalidMap(format!(
                "perturbation C¹ size {c1} destroys the hyperbolic splitting"
            )));
        }
        let lambda = (ms + pert).max(1.0 / (mu - pert));
        let m = matrix.iter().flatten().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        let sup = m + c1;
        Ok(SmoothMap::Torus(TorusMap {
            matrix,
            inverse,
            terms,
            linear,
            rates: Rates {
                lambda,
                delta0: 1.0 / (2.0 * sup),
                sup_derivative: sup,
                sup_second_derivative: c2,
            },
        }))
    }

    /// Arnold's cat map [[2,1],[1,1]].
    pub fn cat_map() -> Self {
        Self::torus_hyperbolic([[2, 1], [1, 1]], Vec::new()).expect("cat map is hyperbolic")
    }

    /// Cat map plus `amplitude·(sin 2πx, sin 2πy)`.
    pub fn perturbed_cat_map(amplitude: f64) -> Result<Self> {
        Self::torus_hyperbolic(
            [[2, 1], [1, 1]],
            vec![
                TrigTerm::torus(0, amplitude, [1, 0]),
                TrigTerm::torus(1, amplitude, [0, 1]),
            ],
        )
    }

    /// Same linear part, with `weight·extra` appended to the perturbation.
    pub fn with_perturbation(&self, weight: f64, extra: &[TrigTerm]) -> Result<Self> {
        let scaled = extra.iter().map(|t| TrigTerm {
            amplitude: t.amplitude * weight,
            ..t.clone()
        });
        match self {
            SmoothMap::Circle(c) => {
                let mut terms = c.terms.clone();
                terms.extend(scaled);
                Self::expanding_circle(c.degree, c.shift, terms)
            }
            SmoothMap::Torus(t) => {
                let mut terms = t.terms.clone();
                terms.extend(scaled);
                Self::torus_hyperbolic(t.matrix, terms)
            }
        }
    }

    pub fn space(&self) -> Space {
        match self {
            SmoothMap::Circle(_) => Space::Circle,
            SmoothMap::Torus(_) => Space::Torus,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            SmoothMap::Circle(_) => "expanding-circle",
            SmoothMap::Torus(_) => "torus-hyperbolic",
        }
    }

    pub fn rates(&self) -> Rates {
        match self {
            SmoothMap::Circle(c) => c.rates,
            SmoothMap::Torus(t) => t.rates,
        }
    }

    pub fn degree(&self) -> Option<u32> {
        match self {
            SmoothMap::Circle(c) => Some(c.degree),
            SmoothMap::Torus(_) => None,
        }
    }

    pub fn terms(&self) -> &[TrigTerm] {
        match self {
            SmoothMap::Circle(c) => &c.terms,
            SmoothMap::Torus(t) => &t.terms,
        }
    }

    pub fn matrix(&self) -> Option<[[i64; 2]; 2]> {
        match self {
            SmoothMap::Torus(t) => Some(t.matrix),
            SmoothMap::Circle(_) => None,
        }
    }

    pub fn linear_model(&self) -> Option<LinearModel> {
        match self {
            SmoothMap::Torus(t) => Some(t.linear),
            SmoothMap::Circle(_) => None,
        }
    }

    /// True for x ↦ 2x mod 1 exactly.
    pub fn is_doubling(&self) -> bool {
        matches!(self, SmoothMap::Circle(c) if c.degree == 2 && c.shift == 0.0 && c.terms.iter().all(|t| t.amplitude == 0.0))
    }

    pub(crate) fn view(&self) -> MapView<'_> {
        MapView {
            base: self,
            extra: &[],
            weight: 0.0,
        }
    }

    pub fn eval(&self, x: &Point) -> Point {
        self.view().eval(x)
    }

    /// Jacobian of the lift, row-major; 1×1 maps fill only `[0][0]`.
    pub fn derivative(&self, x: &Point) -> [[f64; 2]; 2] {
        self.view().derivative(x)
    }

    /// Lift of a circle map, L(x) with L(x + 1) = L(x) + degree.
    pub fn lift(&self, x: f64) -> Result<f64> {
        match self {
            SmoothMap::Circle(_) => Ok(self.view().lift1(x)),
            _ => Err(Error::WrongFamily {
                expected: "expanding-circle",
                found: self.family(),
            }),
        }
    }

    /// Preimage of `y` in the `branch`-th fundamental interval of the lift.
    pub fn inverse_branch(&self, y: &Point, branch: u32) -> Result<Point> {
        self.view().inverse_branch(y, branch)
    }

    /// Index of the fundamental interval containing x: ⌊L(x) − L(0)⌋.
    pub fn branch_of(&self, x: f64) -> Result<u32> {
        let l0 = self.lift(0.0)?;
        let v = self.view().lift1(wrap(x)) - l0;
        Ok((v.floor().max(0.0) as u32).min(self.degree().unwrap_or(1) - 1))
    }

    /// Preimage under a torus diffeomorphism.
    pub fn invert(&self, y: &Point) -> Result<Point> {
        self.view().invert(y)
    }
}

/// A map possibly carrying an extra scaled perturbation, without allocation.
/// Sequence elements of convergent-tail form are evaluated through this view.
#[derive(Clone, Copy, Debug)]
pub struct MapView<'a> {
    pub(crate) base: &'a SmoothMap,
    pub(crate) extra: &'a [TrigTerm],
    pub(crate) weight: f64,
}

const NEWTON_CAP: usize = 60;

impl<'a> MapView<'a> {
    pub fn base(&self) -> &'a SmoothMap {
        self.base
    }

    /// Exactly the unperturbed base map.
    pub fn is_plain(&self) -> bool {
        self.weight == 0.0 || self.extra.is_empty()
    }

    #[inline]
    pub fn lift1(&self, x: f64) -> f64 {
        let SmoothMap::Circle(c) = self.base else {
            unreachable!("lift1 on torus map")
        };
        let mut v = c.degree as f64 * x + c.shift;
        for t in &c.terms {
            v += t.amplitude * t.arg1(x).sin();
        }
        if self.weight != 0.0 {
            for t in self.extra {
                v += self.weight * t.amplitude * t.arg1(x).sin();
            }
        }
        v
    }

    #[inline]
    pub fn deriv1(&self, x: f64) -> f64 {
        let SmoothMap::Circle(c) = self.base else {
            unreachable!("deriv1 on torus map")
        };
        let mut v = c.degree as f64;
        for t in &c.terms {
            v += t.amplitude * TAU * t.frequency[0] as f64 * t.arg1(x).cos();
        }
        if self.weight != 0.0 {
            for t in self.extra {
                v += self.weight * t.amplitude * TAU * t.frequency[0] as f64 * t.arg1(x).cos();
            }
        }
        v
    }

    #[inline]
    pub fn lift2(&self, x: [f64; 2]) -> [f64; 2] {
        let SmoothMap::Torus(m) = self.base else {
            unreachable!("lift2 on circle map")
        };
        let a = m.matrix;
        let mut v = [
            a[0][0] as f64 * x[0] + a[0][1] as f64 * x[1],
            a[1][0] as f64 * x[0] + a[1][1] as f64 * x[1],
        ];
        for t in &m.terms {
            v[t.component] += t.amplitude * t.arg2(x).sin();
        }
        if self.weight != 0.0 {
            for t in self.extra {
                v[t.component] += self.weight * t.amplitude * t.arg2(x).sin();
            }
        }
        v
    }

    #[inline]
    pub fn deriv2(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let SmoothMap::Torus(m) = self.base else {
            unreachable!("deriv2 on circle map")
        };
        let a = m.matrix;
        let mut d = [
            [a[0][0] as f64, a[0][1] as f64],
            [a[1][0] as f64, a[1][1] as f64],
        ];
        let mut add = |t: &TrigTerm, w: f64| {
            let c = w * t.amplitude * TAU * t.arg2(x).cos();
            d[t.component][0] += c * t.frequency[0] as f64;
            d[t.component][1] += c * t.frequency[1] as f64;
        };
        for t in &m.terms {
            add(t, 1.0);
        }
        if self.weight != 0.0 {
            for t in self.extra {
                add(t, self.weight);
            }
        }
        d
    }

    #[inline]
    pub fn eval_circle(&self, x: f64) -> f64 {
        wrap(self.lift1(x))
    }

    #[inline]
    pub fn eval_torus(&self, x: [f64; 2]) -> [f64; 2] {
        let v = self.lift2(x);
        [wrap(v[0]), wrap(v[1])]
    }

    pub fn eval(&self, x: &Point) -> Point {
        match *x {
            Point::Circle(v) => Point::Circle(self.eval_circle(v)),
            Point::Torus(v) => Point::Torus(self.eval_torus(v)),
        }
    }

    pub fn derivative(&self, x: &Point) -> [[f64; 2]; 2] {
        match *x {
            Point::Circle(v) => [[self.deriv1(v), 0.0], [0.0, 0.0]],
            Point::Torus(v) => self.deriv2(v),
        }
    }

    /// Solve L(p) = target for p in the bracket [lo, hi], starting at `guess`.
    fn solve_lift(&self, target: f64, mut lo: f64, mut hi: f64, guess: f64) -> Result<f64> {
        let mut p = guess.clamp(lo, hi);
        for _ in 0..NEWTON_CAP {
            let r = self.lift1(p) - target;
            if r == 0.0 {
                return Ok(p);
            }
            if r > 0.0 {
                hi = p;
            } else {
                lo = p;
            }
            let step = r / self.deriv1(p);
            let mut next = p - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - p).abs() <= 2e-16 * p.abs().max(1.0) {
                return Ok(next);
            }
            p = next;
        }
        // Newton converges quadratically; the bracket collapse is the fallback certificate.
        if hi - lo < 1e-14 {
            Ok(p)
        } else {
            Err(Error::NonConvergence(format!(
                "inverse branch for target {target}"
            )))
        }
    }

    pub fn inverse_branch(&self, y: &Point, branch: u32) -> Result<Point> {
        let SmoothMap::Circle(c) = self.base else {
            return Err(Error::WrongFamily {
                expected: "expanding-circle",
                found: self.base.family(),
            });
        };
        if branch >= c.degree {
            return Err(Error::BranchOutOfRange {
                branch,
                degree: c.degree,
            });
        }
        let y = y.x();
        let l0 = self.lift1(0.0);
        // smallest t ≥ L(0) with t ≡ y (mod 1)
        let t0 = l0 + wrap(y - l0);
        let target = t0 + branch as f64;
        let guess = (target - l0) / c.degree as f64;
        let p = self.solve_lift(target, 0.0, 1.0, guess)?;
        Ok(Point::circle(p))
    }

    /// Preimage of y closest to `near`, returning the point and its distance to `near`.
    #[inline]
    pub fn nearest_preimage(&self, y: f64, near: f64) -> Result<f64> {
        let ln = self.lift1(near);
        let target = ln + wrap_signed(y - ln);
        let guess = near + (target - ln) / self.deriv1(near);
        let p = self.solve_lift(target, near - 0.5, near + 0.5, guess)?;
        Ok(wrap(p))
    }

    pub fn invert(&self, y: &Point) -> Result<Point> {
        let SmoothMap::Torus(m) = self.base else {
            return Err(Error::WrongFamily {
                expected: "torus-hyperbolic",
                found: self.base.family(),
            });
        };
        let Point::Torus(yv) = *y else {
            return Err(Error::IncompatiblePhaseSpaces);
        };
        let b = m.inverse;
        let mut x = [
            b[0][0] as f64 * yv[0] + b[0][1] as f64 * yv[1],
            b[1][0] as f64 * yv[0] + b[1][1] as f64 * yv[1],
        ];
        for _ in 0..NEWTON_CAP {
            let v = self.lift2(x);
            let r = [wrap_signed(v[0] - yv[0]), wrap_signed(v[1] - yv[1])];
            if r[0].abs().max(r[1].abs()) < 1e-15 {
                return Ok(Point::torus(x[0], x[1]));
            }
            let j = self.deriv2(x);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            x[0] -= (j[1][1] * r[0] - j[0][1] * r[1]) / det;
            x[1] -= (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        }
        let p = Point::torus(x[0], x[1]);
        if self.eval(&p).dist(y) < 1e-12 {
            Ok(p)
        } else {
            Err(Error::NonConvergence(
                "Newton inverse of torus map; perturbation too large?".into(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_examples() {
        let d = SmoothMap::doubling();
        assert_abs_diff_eq!(d.eval(&Point::circle(0.1)).x(), 0.2, epsilon = 1e-15);
        let cat = SmoothMap::cat_map();
        assert_eq!(cat.eval(&Point::torus(0.0, 0.0)), Point::torus(0.0, 0.0));
        let g = SmoothMap::perturbed_doubling(0.05).unwrap();
        assert_abs_diff_eq!(g.eval(&Point::circle(0.25)).x(), 0.55, epsilon = 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let d = SmoothMap::doubling();
        assert_eq!(d.derivative(&Point::circle(0.3))[0][0], 2.0);
        let cat = SmoothMap::cat_map();
        assert_eq!(cat.derivative(&Point::torus(0.2, 0.9)), [[2.0, 1.0], [1.0, 1.0]]);
        let eps = 0.01;
        let g = SmoothMap::perturbed_doubling(eps).unwrap();
        assert_abs_diff_eq!(g.derivative(&Point::circle(0.0))[0][0], 2.0 + TAU * eps, epsilon = 1e-15);
    }

    #[test]
    fn inverse_branch_examples() {
        let d = SmoothMap::doubling();
        assert_eq!(d.inverse_branch(&Point::circle(0.5), 0).unwrap().x(), 0.25);
        assert_eq!(d.inverse_branch(&Point::circle(0.5), 1).unwrap().x(), 0.75);
        assert_eq!(d.inverse_branch(&Point::circle(0.0), 0).unwrap().x(), 0.0);
        let g = SmoothMap::perturbed_doubling(0.05).unwrap();
        let p = g.inverse_branch(&Point::circle(0.55), 0).unwrap().x();
        // independent check: bisection on the lift
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 2.0 * mid + 0.05 * (TAU * mid).sin() < 0.55 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(p, lo, epsilon = 1e-14);
        assert_abs_diff_eq!(p, 0.25, epsilon = 1e-14);
        assert!(matches!(
            d.inverse_branch(&Point::circle(0.1), 2),
            Err(Error::BranchOutOfRange { .. })
        ));
        assert!(matches!(
            SmoothMap::cat_map().inverse_branch(&Point::circle(0.1), 0),
            Err(Error::WrongFamily { .. })
        ));
    }

    #[test]
    fn invert_examples() {
        let cat = SmoothMap::cat_map();
        assert_eq!(cat.invert(&Point::torus(0.0, 0.0)).unwrap().dist(&Point::torus(0.0, 0.0)), 0.0);
        let x = Point::torus(0.3, 0.7);
        let y = cat.eval(&x);
        assert!(cat.invert(&y).unwrap().dist(&x) < 1e-15);
        let pc = SmoothMap::perturbed_cat_map(0.01).unwrap();
        for k in 0..50 {
            let y = Point::torus(0.137 * k as f64, 0.311 * k as f64 + 0.05);
            let x = pc.invert(&y).unwrap();
            assert!(pc.eval(&x).dist(&y) < 1e-12);
        }
        assert!(matches!(
            SmoothMap::doubling().invert(&Point::circle(0.1)),
            Err(Error::WrongFamily { .. })
        ));
    }

    #[test]
    fn rejects_invalid_maps() {
        assert!(SmoothMap::expanding_circle(1, 0.0, vec![]).is_err());
        assert!(SmoothMap::perturbed_doubling(0.2).is_err());
        assert!(SmoothMap::torus_hyperbolic([[1, 1], [0, 1]], vec![]).is_err());
        assert!(SmoothMap::torus_hyperbolic([[2, 0], [0, 1]], vec![]).is_err());
    }

    #[test]
    fn cat_map_linear_model() {
        let lm = SmoothMap::cat_map().linear_model().unwrap();
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(lm.unstable_eigenvalue, golden, epsilon = 1e-14);
        assert_abs_diff_eq!(lm.stable_eigenvalue, 1.0 / golden, epsilon = 1e-14);
        let c = lm.decompose(lm.compose([0.3, -0.7]));
        assert_abs_diff_eq!(c[0], 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1], -0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(lm.angle(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }
}
