//! Phase spaces S¹ and T², closed-form expanding and hyperbolic maps, map
//! sequences and the distances between them.

mod map;
mod norms;
mod observable;
mod point;
mod sequence;

pub use map::{LinearModel, MapView, Rates, SmoothMap, TrigTerm};
pub use norms::{map_distance, op_norm, perturbation_c1_norm, DistanceBound, Order};
pub use observable::{Mode, Observable};
pub use point::{circle_dist, grid_points, wrap, wrap_signed, Point, Space};
pub use sequence::{seq_distance, DecayLaw, MapSequence, SequenceForm};
