//! Interval algebra on the line and the torus, greedy disjointification,
//! block decompositions, the equirepartition norm and tail-union probes.

mod family;
mod interval;
mod measure;
mod ops;

pub use family::IntervalFamily;
pub(crate) use interval::frac;
pub use interval::{difference, normalize, Closure, Interval, IntervalSet, Piece, Space};
pub use measure::{Measure, MeasureSpec};
pub use ops::{
    disjointify, equirep_norm, gamma_blocks, limsup_probe, BlockStop, DisjointCover, GammaBlocks,
    LimsupReport,
};
