//! Complex-coefficient rational transfer functions and polynomial roots.

mod poly;
mod rational;
mod roots;

pub use poly::Poly;
pub use rational::{parallel, ComplexRational, RationalDump};
pub use roots::{cluster_roots, poly_roots, RootCluster, DEGREE_CAP};
