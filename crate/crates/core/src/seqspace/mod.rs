//! Finite truncations of `ℓ_p` / `c_0` sequences, weight families and the
//! weighted backward / forward shifts acting on them.

mod logvec;
mod norm;
mod shift;
mod weights;

pub use logvec::{LogCoeff, SparseLogVector};
pub use norm::{product_norm, LogNormAcc, Norm, TruncatedVector};
pub use shift::{
    apply_backward, apply_backward_with, apply_forward, apply_forward_with, product_apply,
    Direction, ShiftConfig, Shifted, DEFAULT_BUDGET, OVERFLOW_GUARD,
};
pub(crate) use weights::NeumaierSum;
pub use weights::{Interval, LogWeightTable, WeightFamily, WeightKind};
