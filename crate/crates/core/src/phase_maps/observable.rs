use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::map::SmoothMap;
use super::point::{circle_dist, Point, Space};

/// One Fourier mode `coefficient · cos(2π⟨frequency, x⟩ + phase)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub coefficient: f64,
    pub frequency: [i32; 2],
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Formula {
    /// constant + Σ modes
    Trig { constant: f64, modes: Vec<Mode> },
    /// d(x, 0)^α − 2^{−α}/(α+1) on S¹: α-Hölder with constant 1, Lebesgue mean zero.
    Cusp { alpha: f64 },
    /// ψ∘f − ψ
    Coboundary { psi: Box<Observable>, map: SmoothMap },
}

/// A real observable φ on the phase space with its Hölder data.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    formula: Formula,
    space: Space,
    alpha: f64,
    holder: f64,
    mean_zero: bool,
}

impl Observable {
    pub fn trig(space: Space, constant: f64, modes: Vec<Mode>) -> Self {
        let holder = modes
            .iter()
            .map(|m| {
                let k = match space {
                    Space::Circle => m.frequency[0].abs() as f64,
                    Space::Torus => (m.frequency[0] as f64).hypot(m.frequency[1] as f64),
                };
                m.coefficient.abs() * TAU * k
            })
            .sum();
        let mean_zero = constant == 0.0
            && modes
                .iter()
                .all(|m| m.frequency != [0, 0] || m.coefficient * m.phase.cos() == 0.0);
        Observable {
            formula: Formula::Trig { constant, modes },
            space,
            alpha: 1.0,
            holder,
            mean_zero,
        }
    }

    /// cos(2π k x) on S¹.
    pub fn cos_circle(k: i32) -> Self {
        Self::trig(
            Space::Circle,
            0.0,
            vec![Mode {
                coefficient: 1.0,
                frequency: [k, 0],
                phase: 0.0,
            }],
        )
    }

    pub fn constant(space: Space, c: f64) -> Self {
        Self::trig(space, c, Vec::new())
    }

    /// d(x, 0)^α minus its Lebesgue mean, a piecewise-smooth α-Hölder preset.
    pub fn cusp(alpha: f64) -> Self {
        Observable {
            formula: Formula::Cusp { alpha },
            space: Space::Circle,
            alpha,
            holder: 1.0,
            mean_zero: true,
        }
    }

    /// ψ∘f − ψ. Mean zero for every f-invariant measure.
    pub fn coboundary(psi: Observable, map: SmoothMap) -> Self {
        let space = psi.space;
        let m = map.rates().sup_derivative;
        Observable {
            alpha: psi.alpha,
            holder: psi.holder * (m.powf(psi.alpha) + 1.0),
            formula: Formula::Coboundary {
                psi: Box::new(psi),
                map,
            },
            space,
            mean_zero: true,
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Hölder exponent α ∈ (0, 1].
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Hölder constant |φ|_α.
    pub fn holder_constant(&self) -> f64 {
        self.holder
    }

    /// Mean zero with respect to Lebesgue (or every invariant measure for coboundaries).
    pub fn is_mean_zero(&self) -> bool {
        self.mean_zero
    }

    /// Constant function, detected syntactically.
    pub fn is_constant(&self) -> bool {
        match &self.formula {
            Formula::Trig { modes, .. } => modes.iter().all(|m| m.coefficient == 0.0 || m.frequency == [0, 0]),
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match &self.formula {
            Formula::Trig { constant, modes } => {
                let mut s = format!("{constant}");
                for m in modes {
                    s.push_str(&format!(
                        " + {}·cos(2π⟨{:?},x⟩ + {})",
                        m.coefficient, m.frequency, m.phase
                    ));
                }
                s
            }
            Formula::Cusp { alpha } => format!("d(x,0)^{alpha} - mean"),
            Formula::Coboundary { psi, .. } => format!("({})∘f - ({})", psi.describe(), psi.describe()),
        }
    }

    #[inline]
    pub fn eval_circle(&self, x: f64) -> f64 {
        match &self.formula {
            Formula::Trig { constant, modes } => {
                let mut v = *constant;
                for m in modes {
                    v += m.coefficient * (TAU * m.frequency[0] as f64 * x + m.phase).cos();
                }
                v
            }
            Formula::Cusp { alpha } => {
                circle_dist(x, 0.0).powf(*alpha) - 0.5f64.powf(*alpha) / (alpha + 1.0)
            }
            Formula::Coboundary { psi, map } => {
                psi.eval_circle(map.view().eval_circle(x)) - psi.eval_circle(x)
            }
        }
    }

    #[inline]
    pub fn eval_torus(&self, x: [f64; 2]) -> f64 {
        match &self.formula {
            Formula::Trig { constant, modes } => {
                let mut v = *constant;
                for m in modes {
                    let arg = TAU * (m.frequency[0] as f64 * x[0] + m.frequency[1] as f64 * x[1]);
                    v += m.coefficient * (arg + m.phase).cos();
                }
                v
            }
            Formula::Cusp { alpha } => {
                Point::Torus(x).dist(&Point::Torus([0.0, 0.0])).powf(*alpha)
            }
            Formula::Coboundary { psi, map } => {
                psi.eval_torus(map.view().eval_torus(x)) - psi.eval_torus(x)
            }
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match *x {
            Point::Circle(v) => self.eval_circle(v),
            Point::Torus(v) => self.eval_torus(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_values() {
        let phi = Observable::cos_circle(1);
        assert!((phi.eval_circle(0.0) - 1.0).abs() < 1e-15);
        let p2 = (phi.eval_circle(1.0 / 3.0) + phi.eval_circle(2.0 / 3.0)) / 2.0;
        assert!((p2 + 0.5).abs() < 1e-15);
        assert!(phi.is_mean_zero());
        assert!((phi.holder_constant() - TAU).abs() < 1e-15);
    }

    #[test]
    fn cusp_is_mean_zero() {
        let phi = Observable::cusp(0.5);
        let n = 1 << 16;
        let mean: f64 = (0..n).map(|i| phi.eval_circle((i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-4);
    }

    #[test]
    fn coboundary_telescopes_on_orbits() {
        let f = SmoothMap::doubling();
        let phi = Observable::coboundary(Observable::cos_circle(1), f.clone());
        let mut x = 0.137;
        let mut s = 0.0;
        let x0 = x;
        for _ in 0..10 {
            s += phi.eval_circle(x);
            x = f.view().eval_circle(x);
        }
        let psi = Observable::cos_circle(1);
        assert!((s - (psi.eval_circle(x) - psi.eval_circle(x0))).abs() < 1e-12);
    }
}
