//! Numerical laboratory for cyclicity of singular inner functions in
//! weighted Bergman-type spaces.

pub mod bergman;
pub mod corona;
pub mod grid;
pub mod growth;
pub mod pipeline;
pub mod quad;
pub mod report;
pub mod series;
pub mod weights;

pub use num_complex::Complex64;
