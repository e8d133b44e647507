//! Local spherical neighborhoods and rigid rotations.

mod local;
mod rotation;
mod spherical;

pub use local::{to_local, validate_subset, LocalSphericalField};
pub use rotation::{rotate, rotate_frames, sample_rotation, Rotation, RotationMode};
pub use spherical::{cart_to_spherical, wrap_angle, Axis, SphericalPoint};
