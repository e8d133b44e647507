//! Local spherical-harmonic features for skeleton-based hand action
//! recognition, with a small graph-convolutional classifier and a
//! synthetic gesture benchmark.
//!
//! Geometry, harmonics and feature assembly are generic over [`Real`]
//! (`f32` or `f64`); the classifier trains in `f64`.

pub mod classifier;
pub mod config;
pub mod error;
pub mod features;
pub mod geometry;
pub mod harmonics;
pub mod scalar;
pub mod skeleton_io;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Sequence = skeleton_io::SkeletonSequence<f64>;
pub type Sequence32 = skeleton_io::SkeletonSequence<f32>;
pub type Spherical = geometry::SphericalPoint<f64>;
pub type Spherical32 = geometry::SphericalPoint<f32>;
pub type LocalField = geometry::LocalSphericalField<f64>;
pub type LocalField32 = geometry::LocalSphericalField<f32>;
pub type Rotation = geometry::Rotation<f64>;
pub type Rotation32 = geometry::Rotation<f32>;
pub type Coefficients = harmonics::HarmonicCoefficients<f64>;
pub type Coefficients32 = harmonics::HarmonicCoefficients<f32>;
pub type Complex = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
pub type Features = features::FeatureTensor<f64>;
pub type Features32 = features::FeatureTensor<f32>;
