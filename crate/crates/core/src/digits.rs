//! Binary digit programs and bit-refreshed circle orbits.
//!
//! An f64 orbit of x ↦ 2x mod 1 loses one mantissa bit per step and reaches 0
//! after about 53 steps. A refreshed orbit keeps the state as a 53-bit dyadic
//! and appends the next digit of a program after every step, so for the
//! doubling map it is the exact shift orbit of the programmed point. For other
//! maps it is a pseudo-orbit with defect below 2^-52.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::phase_maps::MapSequence;

const SCALE_52: f64 = (1u64 << 52) as f64;
const SCALE_53: f64 = (1u64 << 53) as f64;

/// A run of `repeats` copies of `pattern`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub pattern: Vec<u8>,
    pub repeats: u64,
}

impl Block {
    pub fn len(&self) -> u64 {
        self.pattern.len() as u64 * self.repeats
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A point of S¹ given by its binary expansion 0.b₁b₂b₃….
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DigitProgram {
    /// `prefix` followed by `cycle` repeated forever.
    Periodic { prefix: Vec<u8>, cycle: Vec<u8> },
    /// Run-length encoded blocks, then `tail` repeated forever.
    Blocks { blocks: Vec<Block>, tail: Vec<u8> },
    /// Fair coin flips from a ChaCha8 stream: a Lebesgue-distributed point.
    Random { seed: u64, stream: u64 },
}

impl DigitProgram {
    /// 1/3 = 0.(01)
    pub fn one_third() -> Self {
        DigitProgram::Periodic {
            prefix: vec![],
            cycle: vec![0, 1],
        }
    }

    pub fn random(seed: u64, stream: u64) -> Self {
        DigitProgram::Random { seed, stream }
    }

    pub fn digits(&self) -> DigitStream<'_> {
        let rng = match self {
            DigitProgram::Random { seed, stream } => {
                let mut r = ChaCha8Rng::seed_from_u64(*seed);
                r.set_stream(*stream);
                Some(r)
            }
            _ => None,
        };
        DigitStream {
            program: self,
            pos: 0,
            block: 0,
            rng,
            word: 0,
            left: 0,
        }
    }

    /// Nearest f64 below the point: the first 53 digits.
    pub fn to_f64(&self) -> f64 {
        let mut d = self.digits();
        let mut k = 0u64;
        for _ in 0..53 {
            k = (k << 1) | d.next_bit() as u64;
        }
        k as f64 / SCALE_53
    }
}

/// Infinite iterator over the digits of a program.
#[derive(Clone, Debug)]
pub struct DigitStream<'a> {
    program: &'a DigitProgram,
    pos: u64,
    block: usize,
    rng: Option<ChaCha8Rng>,
    word: u64,
    left: u32,
}

impl DigitStream<'_> {
    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        match self.program {
            DigitProgram::Periodic { prefix, cycle } => {
                let p = self.pos as usize;
                self.pos += 1;
                if p < prefix.len() {
                    prefix[p]
                } else if cycle.is_empty() {
                    0
                } else {
                    cycle[(p - prefix.len()) % cycle.len()]
                }
            }
            DigitProgram::Blocks { blocks, tail } => {
                while self.block < blocks.len() && self.pos >= blocks[self.block].len() {
                    self.pos -= blocks[self.block].len();
                    self.block += 1;
                }
                let p = self.pos;
                self.pos += 1;
                if let Some(b) = blocks.get(self.block) {
                    b.pattern[(p % b.pattern.len() as u64) as usize]
                } else if tail.is_empty() {
                    0
                } else {
                    tail[(p % tail.len() as u64) as usize]
                }
            }
            DigitProgram::Random { .. } => {
                if self.left == 0 {
                    self.word = self.rng.as_mut().expect("random stream").next_u64();
                    self.left = 64;
                }
                self.left -= 1;
                ((self.word >> self.left) & 1) as u8
            }
        }
    }
}

impl Iterator for DigitStream<'_> {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.next_bit())
    }
}

/// Forward orbit x_{n+1} ≈ f_n(x_n) on S¹ with digit refresh.
pub struct CircleOrbit<'a> {
    seq: &'a MapSequence,
    n: i64,
    x: f64,
    bits: DigitStream<'a>,
}

impl<'a> CircleOrbit<'a> {
    /// Orbit of the programmed point: the first 53 digits form x_0 and the
    /// remaining digits refill the low bit.
    pub fn new(seq: &'a MapSequence, program: &'a DigitProgram) -> Self {
        let mut bits = program.digits();
        let mut k = 0u64;
        for _ in 0..53 {
            k = (k << 1) | bits.next_bit() as u64;
        }
        CircleOrbit {
            seq,
            n: 0,
            x: k as f64 / SCALE_53,
            bits,
        }
    }

    /// Orbit of x truncated to 53 bits, refilled from `refill`.
    pub fn from_point(seq: &'a MapSequence, x: f64, refill: &'a DigitProgram) -> Self {
        let k = (crate::phase_maps::wrap(x) * SCALE_53).floor();
        CircleOrbit {
            seq,
            n: 0,
            x: k.min(SCALE_53 - 1.0) / SCALE_53,
            bits: refill.digits(),
        }
    }

    #[inline]
    pub fn current(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn time(&self) -> i64 {
        self.n
    }

    #[inline]
    pub fn advance(&mut self) {
        let y = self.seq.map(self.n).eval_circle(self.x);
        let k = (y * SCALE_52).floor();
        let b = self.bits.next_bit() as f64;
        self.x = (2.0 * k + b) / SCALE_53;
        self.n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_maps::SmoothMap;

    #[test]
    fn one_third_digits() {
        let p = DigitProgram::one_third();
        assert!((p.to_f64() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn doubling_refresh_is_exact_shift() {
        let seq = MapSequence::constant(SmoothMap::doubling());
        let p = DigitProgram::one_third();
        let mut o = CircleOrbit::new(&seq, &p);
        for n in 0..10_000 {
            let want = if n % 2 == 0 { 1.0 / 3.0 } else { 2.0 / 3.0 };
            assert!((o.current() - want).abs() < 1e-15, "step {n}");
            o.advance();
        }
    }

    #[test]
    fn blocks_stream_in_order() {
        let p = DigitProgram::Blocks {
            blocks: vec![
                Block {
                    pattern: vec![0],
                    repeats: 2,
                },
                Block {
                    pattern: vec![0, 1],
                    repeats: 2,
                },
            ],
            tail: vec![1],
        };
        let bits: Vec<u8> = p.digits().take(8).collect();
        assert_eq!(bits, vec![0, 0, 0, 1, 0, 1, 1, 1]);
    }

    #[test]
    fn random_stream_is_deterministic_and_balanced() {
        let p = DigitProgram::random(7, 3);
        let a: Vec<u8> = p.digits().take(4096).collect();
        let b: Vec<u8> = p.digits().take(4096).collect();
        assert_eq!(a, b);
        let ones = a.iter().filter(|&&b| b == 1).count();
        assert!((1800..2300).contains(&ones));
    }
}
