//! Numerical toolkit for quantitative compactness in discrete
//! vector-valued L^p spaces: moduli, certificates, subsequence extraction
//! with verified pairwise bounds, and the function-space-norm variants.

pub mod ambient;
pub mod bfspace;
pub mod bochner;
pub mod converse;
pub mod criteria;
pub mod error;
pub mod extraction;
pub mod measure;
pub mod scenarios;

pub use ambient::{AmbientSpace, CompactCover, NormKind, OperatorNormBound};
pub use bochner::{bochner_distance, bochner_norm, FunctionFamily, VectorFunction};
pub use criteria::{TightnessCertificate, UICertificate};
pub use error::{Error, Result};
pub use measure::{MeasureSpace, ScalarSample};
