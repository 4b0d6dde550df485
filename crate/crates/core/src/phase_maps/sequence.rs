use serde::{Deserialize, Serialize};

use super::map::{MapView, Rates, SmoothMap, TrigTerm};
use super::norms::{map_distance, perturbation_c1_norm, DistanceBound, Order};
use super::point::{Point, Space};
use crate::error::{Error, Result};

/// Weight schedule w_n multiplying the perturbation direction ψ of a convergent tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
#[serde(deny_unknown_fields)]
pub enum DecayLaw {
    /// w_n = scale · ratio^n
    Geometric { scale: f64, ratio: f64 },
    /// w_n = scale · n^(−exponent), with w_0 = scale
    Power { scale: f64, exponent: f64 },
    /// w_n = 0
    Zero,
}

impl DecayLaw {
    pub fn weight(&self, n: u64) -> f64 {
        match *self {
            DecayLaw::Geometric { scale, ratio } => scale * ratio.powf(n as f64),
            DecayLaw::Power { scale, exponent } => {
                if n == 0 {
                    scale
                } else {
                    scale * (n as f64).powf(-exponent)
                }
            }
            DecayLaw::Zero => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DecayLaw::Geometric { scale, ratio } => scale >= 0.0 && (0.0..=1.0).contains(&ratio),
            DecayLaw::Power { scale, exponent } => scale >= 0.0 && exponent >= 0.0,
            DecayLaw::Zero => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange(format!(
                "decay law {self:?} is not nonincreasing and nonnegative"
            )))
        }
    }
}

/// Finite description of n ↦ f_n.
#[derive(Clone, Debug)]
pub enum SequenceForm {
    Constant(SmoothMap),
    /// f_n = maps[n mod N]
    Periodic(Vec<SmoothMap>),
    /// f_n = leading[n] for n < leading.len(), else limit + w_n·ψ.
    ConvergentTail {
        leading: Vec<SmoothMap>,
        limit: SmoothMap,
        direction: Vec<TrigTerm>,
        law: DecayLaw,
    },
}

/// A sequence of maps F = {f_n}, with F_n = f_{n−1} ∘ … ∘ f_0.
#[derive(Clone, Debug)]
pub struct MapSequence {
    form: SequenceForm,
    two_sided: bool,
    start: i64,
    space: Space,
    rates: Rates,
    // ‖ψ‖_{C¹} and per-leading-map C¹ distances to the limit, grid estimates
    psi_norm: f64,
    leading_gaps: Vec<f64>,
}

/// Grid resolution used for cached norm estimates.
pub(crate) const NORM_GRID_CIRCLE: usize = 4096;
pub(crate) const NORM_GRID_TORUS: usize = 128;

pub(crate) fn norm_grid(space: Space) -> usize {
    match space {
        Space::Circle => NORM_GRID_CIRCLE,
        Space::Torus => NORM_GRID_TORUS,
    }
}

impl MapSequence {
    pub fn constant(f: SmoothMap) -> Self {
        Self::new(SequenceForm::Constant(f)).expect("constant sequence is always valid")
    }

    pub fn periodic(maps: Vec<SmoothMap>) -> Result<Self> {
        Self::new(SequenceForm::Periodic(maps))
    }

    pub fn convergent_tail(
        leading: Vec<SmoothMap>,
        limit: SmoothMap,
        direction: Vec<TrigTerm>,
        law: DecayLaw,
    ) -> Result<Self> {
        Self::new(SequenceForm::ConvergentTail {
            leading,
            limit,
            direction,
            law,
        })
    }

    pub fn new(form: SequenceForm) -> Result<Self> {
        let reps = representatives(&form)?;
        let space = reps[0].space();
        if reps.iter().any(|m| m.space() != space) {
            return Err(Error::IncompatiblePhaseSpaces);
        }
        if reps.iter().any(|m| m.degree() != reps[0].degree()) {
            return Err(Error::InvalidMap("maps of a sequence must share the degree".into()));
        }
        let rates = reps.iter().map(|m| m.rates()).fold(reps[0].rates(), |a, b| Rates {
            lambda: a.lambda.max(b.lambda),
            delta0: a.delta0.min(b.delta0),
            sup_derivative: a.sup_derivative.max(b.sup_derivative),
            sup_second_derivative: a.sup_second_derivative.max(b.sup_second_derivative),
        });
        let (psi_norm, leading_gaps) = match &form {
            SequenceForm::ConvergentTail {
                leading,
                limit,
                direction,
                ..
            } => {
                let g = norm_grid(space);
                let gaps = leading
                    .iter()
                    .map(|m| map_distance(m.view(), limit.view(), Order::C1, g).lower)
                    .collect();
                (perturbation_c1_norm(space, direction, g), gaps)
            }
            _ => (0.0, Vec::new()),
        };
        Ok(MapSequence {
            form,
            two_sided: false,
            start: 0,
            space,
            rates,
            psi_norm,
            leading_gaps,
        })
    }

    /// Mark the sequence as indexed by ℤ. Only diffeomorphism sequences qualify.
    pub fn two_sided(mut self) -> Result<Self> {
        if self.space != Space::Torus {
            return Err(Error::WrongFamily {
                expected: "torus-hyperbolic",
                found: "expanding-circle",
            });
        }
        self.two_sided = true;
        Ok(self)
    }

    pub fn is_two_sided(&self) -> bool {
        self.two_sided
    }

    pub fn form(&self) -> &SequenceForm {
        &self.form
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// λ = sup λ_n, M = sup M_n, δ₀ = inf δ₀,n. Tails are bounded by the
    /// limit perturbed at the largest tail weight.
    pub fn rates(&self) -> Rates {
        self.rates
    }

    /// The sequence started at index k: F^(k) = {f_{n+k}}.
    pub fn shifted(&self, k: i64) -> Result<Self> {
        if k < 0 && !self.two_sided && self.start + k < 0 {
            return Err(Error::NegativeIndexOnOneSided(self.start + k));
        }
        let mut s = self.clone();
        s.start += k;
        Ok(s)
    }

    pub fn offset(&self) -> i64 {
        self.start
    }

    /// Short human-readable description.
    pub fn label(&self) -> String {
        let body = match &self.form {
            SequenceForm::Constant(f) => format!("constant {}", f.family()),
            SequenceForm::Periodic(v) => format!("periodic N={}", v.len()),
            SequenceForm::ConvergentTail { leading, law, .. } => {
                format!("convergent-tail leading={} {law:?}", leading.len())
            }
        };
        if self.start != 0 {
            format!("{body} shifted {}", self.start)
        } else {
            body
        }
    }

    /// f_n as a view, n relative to the current shift.
    #[inline]
    pub fn map(&self, n: i64) -> MapView<'_> {
        let m = n + self.start;
        match &self.form {
            SequenceForm::Constant(f) => f.view(),
            SequenceForm::Periodic(v) => v[m.rem_euclid(v.len() as i64) as usize].view(),
            SequenceForm::ConvergentTail {
                leading,
                limit,
                direction,
                law,
            } => {
                if m >= 0 && (m as usize) < leading.len() {
                    leading[m as usize].view()
                } else {
                    MapView {
                        base: limit,
                        extra: direction,
                        weight: law.weight(m.unsigned_abs()),
                    }
                }
            }
        }
    }

    /// F_n(x). Negative n runs the backward orbit f_{−n}^{-1} ∘ … ∘ f_{−1}^{-1}.
    pub fn compose(&self, n: i64, x: &Point) -> Result<Point> {
        if x.space() != self.space {
            return Err(Error::IncompatiblePhaseSpaces);
        }
        let mut p = x.normalized();
        if n >= 0 {
            for j in 0..n {
                p = self.map(j).eval(&p);
            }
        } else {
            if !self.two_sided {
                return Err(Error::NegativeIndexOnOneSided(n));
            }
            for j in 1..=(-n) {
                p = self.map(-j).invert(&p)?;
            }
        }
        Ok(p)
    }

    /// The declared limit map, if any. Constant sequences are their own limit.
    pub fn limit(&self) -> Option<&SmoothMap> {
        match &self.form {
            SequenceForm::Constant(f) => Some(f),
            SequenceForm::Periodic(v) if v.len() == 1 => Some(&v[0]),
            SequenceForm::ConvergentTail { limit, .. } => Some(limit),
            SequenceForm::Periodic(_) => None,
        }
    }

    /// Period of the eventual cycle (1 for constant and convergent-tail forms).
    pub fn period(&self) -> usize {
        match &self.form {
            SequenceForm::Periodic(v) => v.len(),
            _ => 1,
        }
    }

    /// a_n = sup_{ℓ ≥ n} d_{C¹}(f_ℓ, f), n relative to the current shift.
    pub fn tail_decay(&self, n: u64) -> Result<f64> {
        match &self.form {
            SequenceForm::Constant(_) => Ok(0.0),
            SequenceForm::Periodic(v) if v.len() == 1 => Ok(0.0),
            SequenceForm::Periodic(_) => Err(Error::NoDeclaredLimit),
            SequenceForm::ConvergentTail { leading, law, .. } => {
                let m = (n as i64 + self.start).max(0) as usize;
                let lead = self.leading_gaps.iter().skip(m).fold(0.0f64, |a, &b| a.max(b));
                // weights are nonincreasing, so the sup over the tail sits at its first index
                let first_tail = m.max(leading.len()) as u64;
                Ok(lead.max(law.weight(first_tail) * self.psi_norm))
            }
        }
    }

    /// Number of leading explicit maps remaining after the current shift.
    pub(crate) fn explicit_prefix(&self) -> usize {
        match &self.form {
            SequenceForm::ConvergentTail { leading, .. } => {
                (leading.len() as i64 - self.start).max(0) as usize
            }
            _ => 0,
        }
    }

    /// Distinct maps whose rates bound those of every element.
    pub fn representatives(&self) -> Vec<SmoothMap> {
        representatives(&self.form).expect("validated at construction")
    }

    /// ‖ψ‖_{C¹} of the tail direction (0 for other forms).
    pub fn direction_norm(&self) -> f64 {
        self.psi_norm
    }
}

fn representatives(form: &SequenceForm) -> Result<Vec<SmoothMap>> {
    match form {
        SequenceForm::Constant(f) => Ok(vec![f.clone()]),
        SequenceForm::Periodic(v) => {
            if v.is_empty() {
                Err(Error::EmptyList)
            } else {
                Ok(v.clone())
            }
        }
        SequenceForm::ConvergentTail {
            leading,
            limit,
            direction,
            law,
        } => {
            law.validate()?;
            let mut v = leading.clone();
            v.push(limit.clone());
            let w = law.weight(leading.len() as u64);
            if w > 0.0 && !direction.is_empty() {
                v.push(limit.with_perturbation(w, direction)?);
            }
            Ok(v)
        }
    }
}

/// |||F − G||| = sup_n d_{C^r}(f_n, g_n) as grid-certified bounds.
///
/// Indices below the explicit horizon are evaluated directly; beyond it both
/// sequences are an eventual cycle plus a tail bounded by their decay laws.
pub fn seq_distance(
    f: &MapSequence,
    g: &MapSequence,
    order: Order,
    grid: usize,
) -> Result<DistanceBound> {
    if f.space != g.space {
        return Err(Error::IncompatiblePhaseSpaces);
    }
    let lcm = lcm(f.period(), g.period());
    let horizon = f.explicit_prefix().max(g.explicit_prefix()) + 32 * lcm;
    let mut acc = DistanceBound {
        lower: 0.0,
        upper: 0.0,
        grid,
    };
    let two_sided = f.two_sided || g.two_sided;
    let lo = if two_sided { -(horizon as i64) } else { 0 };
    for n in lo..horizon as i64 {
        acc = acc.sup(map_distance(f.map(n), g.map(n), order, grid));
    }
    // beyond the horizon: cycle distance plus tails
    let tail = match (tail_at(f, horizon), tail_at(g, horizon)) {
        (Some(a), Some(b)) => a + b,
        _ => 0.0,
    };
    for i in 0..lcm as i64 {
        let n = horizon as i64 + i;
        let d = map_distance(cycle_map(f, n), cycle_map(g, n), order, grid);
        acc = acc.sup(DistanceBound {
            lower: (d.lower - tail).max(0.0),
            upper: d.upper + tail,
            grid,
        });
    }
    Ok(acc)
}

fn tail_at(s: &MapSequence, n: usize) -> Option<f64> {
    match s.form {
        SequenceForm::ConvergentTail { .. } => s.tail_decay(n as u64).ok(),
        _ => Some(0.0),
    }
}

/// The eventual-cycle element at index n: the limit for tails, f_n otherwise.
fn cycle_map(s: &MapSequence, n: i64) -> MapView<'_> {
    match &s.form {
        SequenceForm::ConvergentTail { limit, .. } => limit.view(),
        _ => s.map(n),
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn compose_examples() {
        let d = MapSequence::constant(SmoothMap::doubling());
        let x = Point::circle(0.1);
        assert_abs_diff_eq!(d.compose(3, &x).unwrap().x(), 0.8, epsilon = 1e-14);
        assert_eq!(d.compose(0, &x).unwrap(), x);
        assert!(matches!(
            d.compose(-1, &x),
            Err(Error::NegativeIndexOnOneSided(-1))
        ));
    }

    #[test]
    fn compose_geometric_tail_matches_folding() {
        let f = MapSequence::convergent_tail(
            vec![],
            SmoothMap::doubling(),
            vec![TrigTerm::circle(0.1, 1)],
            DecayLaw::Geometric {
                scale: 1.0,
                ratio: 0.5,
            },
        )
        .unwrap();
        // independent accumulator on the lift, no reduction until the end
        let mut y = 0.1f64;
        for n in 0..5 {
            y = 2.0 * y + 0.1 / 2f64.powi(n) * (TAU * y).sin();
        }
        let got = f.compose(5, &Point::circle(0.1)).unwrap().x();
        assert_abs_diff_eq!(got, y - y.floor(), epsilon = 1e-14);
    }

    #[test]
    fn two_sided_identity_on_torus() {
        let f = MapSequence::constant(SmoothMap::perturbed_cat_map(0.01).unwrap())
            .two_sided()
            .unwrap();
        let x = Point::torus(0.123, 0.456);
        let y = f.compose(7, &x).unwrap();
        let back = f.compose(-7, &y).unwrap();
        assert!(back.dist(&x) < 1e-10);
    }

    #[test]
    fn tail_decay_examples() {
        let c = MapSequence::constant(SmoothMap::doubling());
        assert_eq!(c.tail_decay(5).unwrap(), 0.0);
        // ‖ψ‖_{C¹} = 1 for ψ = sin(2πx)/(2π)
        let psi = vec![TrigTerm::circle(1.0 / TAU, 1)];
        let geo = MapSequence::convergent_tail(
            vec![SmoothMap::doubling()],
            SmoothMap::doubling(),
            psi.clone(),
            DecayLaw::Geometric {
                scale: 1.0,
                ratio: 0.5,
            },
        )
        .unwrap();
        for n in 1..10 {
            assert_abs_diff_eq!(geo.tail_decay(n).unwrap(), 0.5f64.powi(n as i32), epsilon = 1e-12);
        }
        // the C = 1 schedule itself; a sequence built on it needs ‖ψ‖ < 1 to stay expanding
        let law = DecayLaw::Power {
            scale: 1.0,
            exponent: 0.6,
        };
        assert_abs_diff_eq!(law.weight(4), (-0.6 * 4f64.ln()).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(law.weight(4), 0.4353, epsilon = 1e-4);
        let pow = MapSequence::convergent_tail(
            vec![SmoothMap::doubling()],
            SmoothMap::doubling(),
            vec![TrigTerm::circle(0.5 / TAU, 1)],
            law,
        )
        .unwrap();
        assert_abs_diff_eq!(pow.tail_decay(4).unwrap(), 0.5 * law.weight(4), epsilon = 1e-12);
        let per = MapSequence::periodic(vec![
            SmoothMap::doubling(),
            SmoothMap::perturbed_doubling(0.05).unwrap(),
        ])
        .unwrap();
        assert_eq!(per.tail_decay(0), Err(Error::NoDeclaredLimit));
    }

    #[test]
    fn seq_distance_examples() {
        let f = MapSequence::constant(SmoothMap::doubling());
        let d = seq_distance(&f, &f, Order::C1, 1024).unwrap();
        assert_eq!(d.lower, 0.0);
        let g = MapSequence::constant(SmoothMap::expanding_circle(2, 0.01, vec![]).unwrap());
        for order in [Order::C0, Order::C1] {
            let d = seq_distance(&f, &g, order, 1024).unwrap();
            assert_abs_diff_eq!(d.lower, 0.01, epsilon = 1e-12);
        }
        let eps = 0.02;
        let g = MapSequence::constant(SmoothMap::perturbed_doubling(eps).unwrap());
        let d0 = seq_distance(&f, &g, Order::C0, 1024).unwrap();
        let d1 = seq_distance(&f, &g, Order::C1, 1024).unwrap();
        assert_abs_diff_eq!(d0.lower, eps, epsilon = 1e-12);
        assert_abs_diff_eq!(d1.lower, TAU * eps, epsilon = 1e-12);
        assert!(d0.upper >= d0.lower);
    }

    #[test]
    fn periodic_shift_wraps() {
        let g = SmoothMap::perturbed_doubling(0.05).unwrap();
        let per = MapSequence::periodic(vec![SmoothMap::doubling(), g.clone()]).unwrap();
        let s = per.shifted(3).unwrap();
        let x = Point::circle(0.3);
        assert_eq!(s.map(0).eval(&x), g.eval(&x));
        assert_eq!(s.map(1).eval(&x), SmoothMap::doubling().eval(&x));
    }
}
