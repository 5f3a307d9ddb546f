//! Stable Demers cartograms.
//!
//! Every region becomes an axis-parallel square whose area encodes a data
//! value. Squares are placed by linear programs that keep the relative
//! orientation of regions, optionally across several weight functions at
//! once so the resulting layouts animate smoothly.
//!
//! The numeric core is generic over [`Scalar`] (`f64` or `f32`); the
//! aliases at the crate root fix it to `f64`.

pub mod forcelayout;
pub mod geometry;
pub mod layout;
pub mod leaders;
pub mod lpmodel;
pub mod mapdata;
pub mod metrics;
pub mod render;
mod scalar;
pub mod sepconstraints;
pub mod simplexsolver;

pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type Rect = geometry::Rect<f64>;
pub type Region = mapdata::Region<f64>;
pub type AdjacencyGraph = mapdata::AdjacencyGraph<f64>;
pub type WeightSet = mapdata::WeightSet<f64>;
pub type SideLengthTable = mapdata::SideLengthTable<f64>;
pub type SeparationConstraintSet = sepconstraints::SeparationConstraintSet<f64>;
pub type LpProblem = lpmodel::LpProblem<f64>;
pub type ModelSpec = lpmodel::ModelSpec<f64>;
pub type Solution = simplexsolver::Solution<f64>;
pub type SquareLayout = layout::SquareLayout<f64>;
pub type Leader = leaders::Leader<f64>;
pub type ForceConfig = forcelayout::ForceConfig<f64>;
