//! Dominant-pole stability analysis and PLL-based damping control for
//! grid-connected direct-drive PMSG wind farms.

pub mod calibration;
pub mod config;
pub mod error;
pub mod impedance;
pub mod params;
pub mod scalar;
pub mod sim;
pub mod ssfe;
pub mod stability;
pub mod system;
pub mod tables;
pub mod tf;
pub mod tuner;

pub use config::Config;
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use system::System;

pub type Rational = tf::ComplexRational<f64>;
pub type Rational32 = tf::ComplexRational<f32>;
pub type Poly64 = tf::Poly<f64>;
pub type Complex64 = num_complex::Complex<f64>;
