//! Spherical harmonics, local embeddings and their real-valued formats.

mod basis;
mod format;
mod legendre;
mod transform;

pub use basis::{sph_harm, BasisEvaluator, DegreeSet, HarmonicIndex};
pub use format::{complex_format, phase, power_spectrum, ComplexFormat};
pub use legendre::{assoc_legendre, MAX_DEGREE};
pub use transform::{lshr_embed, lsht_transform, lsht_transform_mean, HarmonicCoefficients, Provenance};
