use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::map::{MapView, TrigTerm};
use super::point::{circle_dist, Space};

/// Regularity of a map distance: C⁰, or C¹ = max(C⁰ gap, derivative gap).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    C0,
    C1,
}

/// A sup-norm estimated on a grid: `lower` is attained on the grid, `upper`
/// adds a Lipschitz bound for the gap between grid points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceBound {
    pub lower: f64,
    pub upper: f64,
    pub grid: usize,
}

impl DistanceBound {
    pub fn sup(self, other: DistanceBound) -> DistanceBound {
        DistanceBound {
            lower: self.lower.max(other.lower),
            upper: self.upper.max(other.upper),
            grid: self.grid,
        }
    }
}

/// Operator 2-norm of a 2×2 matrix.
pub fn op_norm(m: [[f64; 2]; 2]) -> f64 {
    let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let d = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    (0.5 * (tr + disc)).max(0.0).sqrt()
}

/// d_{C^r}(f, g) on a uniform grid of `grid` points per axis.
pub fn map_distance(f: MapView<'_>, g: MapView<'_>, order: Order, grid: usize) -> DistanceBound {
    let h = 1.0 / grid as f64;
    let space = f.base().space();
    let (mut c0, mut c1) = (0.0f64, 0.0f64);
    match space {
        Space::Circle => {
            for i in 0..grid {
                let x = i as f64 * h;
                c0 = c0.max(circle_dist(f.lift1(x), g.lift1(x)));
                if order == Order::C1 {
                    c1 = c1.max((f.deriv1(x) - g.deriv1(x)).abs());
                }
            }
        }
        Space::Torus => {
            for i in 0..grid {
                for j in 0..grid {
                    let x = [i as f64 * h, j as f64 * h];
                    let (a, b) = (f.lift2(x), g.lift2(x));
                    c0 = c0.max(circle_dist(a[0], b[0]).hypot(circle_dist(a[1], b[1])));
                    if order == Order::C1 {
                        let (da, db) = (f.deriv2(x), g.deriv2(x));
                        let diff = [
                            [da[0][0] - db[0][0], da[0][1] - db[0][1]],
                            [da[1][0] - db[1][0], da[1][1] - db[1][1]],
                        ];
                        c1 = c1.max(op_norm(diff));
                    }
                }
            }
        }
    }
    // distance from any point to the nearest grid point
    let r = match space {
        Space::Circle => h / 2.0,
        Space::Torus => h / std::f64::consts::SQRT_2,
    };
    let (rf, rg) = (view_rates(&f), view_rates(&g));
    let gap0 = (rf.0 + rg.0) * r;
    let lower0 = c0;
    let upper0 = c0 + gap0;
    match order {
        Order::C0 => DistanceBound {
            lower: lower0,
            upper: upper0,
            grid,
        },
        Order::C1 => DistanceBound {
            lower: lower0.max(c1),
            upper: upper0.max(c1 + (rf.1 + rg.1) * r),
            grid,
        },
    }
}

/// (sup ‖Df‖, sup ‖D²f‖) bounds for a view, including its extra terms.
fn view_rates(v: &MapView<'_>) -> (f64, f64) {
    let r = v.base().rates();
    let space = v.base().space();
    let w = v.weight.abs();
    let (e1, e2) = v.extra.iter().fold((0.0, 0.0), |(a, b), t| {
        let k = freq_norm(t, space);
        (
            a + w * t.amplitude.abs() * TAU * k,
            b + w * t.amplitude.abs() * (TAU * k).powi(2),
        )
    });
    (r.sup_derivative + e1, r.sup_second_derivative + e2)
}

fn freq_norm(t: &TrigTerm, space: Space) -> f64 {
    match space {
        Space::Circle => t.frequency[0].abs() as f64,
        Space::Torus => (t.frequency[0] as f64).hypot(t.frequency[1] as f64),
    }
}

/// ‖ψ‖_{C¹} = max(sup |ψ|, sup ‖Dψ‖) for a trig-polynomial displacement field,
/// as a grid lower estimate.
pub fn perturbation_c1_norm(space: Space, terms: &[TrigTerm], grid: usize) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let h = 1.0 / grid as f64;
    let eval = |x: [f64; 2]| -> ([f64; 2], [[f64; 2]; 2]) {
        let mut v = [0.0; 2];
        let mut d = [[0.0; 2]; 2];
        for t in terms {
            let arg = TAU * (t.frequency[0] as f64 * x[0] + t.frequency[1] as f64 * x[1]) + t.phase;
            v[t.component] += t.amplitude * arg.sin();
            let c = t.amplitude * TAU * arg.cos();
            d[t.component][0] += c * t.frequency[0] as f64;
            d[t.component][1] += c * t.frequency[1] as f64;
        }
        (v, d)
    };
    let mut best = 0.0f64;
    match space {
        Space::Circle => {
            for i in 0..grid {
                let (v, d) = eval([i as f64 * h, 0.0]);
                best = best.max(v[0].abs()).max(d[0][0].abs());
            }
        }
        Space::Torus => {
            for i in 0..grid {
                for j in 0..grid {
                    let (v, d) = eval([i as f64 * h, j as f64 * h]);
                    best = best.max(v[0].hypot(v[1])).max(op_norm(d));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op_norm_of_diagonal_and_rotation() {
        assert!((op_norm([[3.0, 0.0], [0.0, -1.0]]) - 3.0).abs() < 1e-14);
        let (s, c) = 0.3f64.sin_cos();
        assert!((op_norm([[c, -s], [s, c]]) - 1.0).abs() < 1e-14);
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((op_norm([[2.0, 1.0], [1.0, 1.0]]) - golden).abs() < 1e-14);
    }
}
