//! Isoperimetric profiles and two-sided isoperimetric ratios on
//! rotationally symmetric manifolds of finite volume.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod lemma_oracle;
pub mod numerics;
pub mod profile;
pub mod ratios;
pub mod warped_geometry;
