use crate::error::{Error, Result};
use crate::scalar::Real;

/// One recording: per-frame, per-body, per-joint 3D coordinates.
///
/// Coordinates are stored frame-major, then body, then joint
/// (`[(t * bodies + m) * joints + v]`). All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSequence<T = f64> {
    frames: usize,
    bodies: usize,
    joints: usize,
    coords: Vec<[T; 3]>,
    pub joint_names: Option<Vec<String>>,
    pub label: Option<usize>,
    pub subject_id: Option<u32>,
    pub setup_id: Option<u32>,
}

impl<T: Real> SkeletonSequence<T> {
    pub fn new(frames: usize, bodies: usize, joints: usize, coords: Vec<[T; 3]>) -> Result<Self> {
        if frames == 0 || bodies == 0 || joints == 0 {
            return Err(Error::shape(format!("sequence needs T, M, V >= 1 (got {frames}x{bodies}x{joints})")));
        }
        if coords.len() != frames * bodies * joints {
            return Err(Error::shape(format!(
                "expected {} points for {frames}x{bodies}x{joints}, got {}",
                frames * bodies * joints,
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::domain(format!("non-finite coordinate at point {i}")));
        }
        Ok(Self { frames, bodies, joints, coords, joint_names: None, label: None, subject_id: None, setup_id: None })
    }

    pub fn zeros(frames: usize, bodies: usize, joints: usize) -> Result<Self> {
        Self::new(frames, bodies, joints, vec![[T::zero(); 3]; frames * bodies * joints])
    }

    pub fn with_label(mut self, label: usize) -> Self {
        self.label = Some(label);
        self
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bodies(&self) -> usize {
        self.bodies
    }

    pub fn joints(&self) -> usize {
        self.joints
    }

    #[inline]
    fn index(&self, t: usize, m: usize, v: usize) -> usize {
        debug_assert!(t < self.frames && m < self.bodies && v < self.joints);
        (t * self.bodies + m) * self.joints + v
    }

    #[inline]
    pub fn point(&self, t: usize, m: usize, v: usize) -> [T; 3] {
        self.coords[self.index(t, m, v)]
    }

    pub fn coords(&self) -> &[[T; 3]] {
        &self.coords
    }

    /// Joints of one body in one frame.
    pub fn frame_body(&self, t: usize, m: usize) -> &[[T; 3]] {
        let start = self.index(t, m, 0);
        &self.coords[start..start + self.joints]
    }

    /// Applies `f` to every point, keeping shape and metadata.
    pub fn map_points(&self, mut f: impl FnMut(usize, [T; 3]) -> [T; 3]) -> Result<Self> {
        let per_frame = self.bodies * self.joints;
        let coords = self.coords.iter().enumerate().map(|(i, &p)| f(i / per_frame, p)).collect();
        self.with_coords(self.frames, self.bodies, coords)
    }

    /// Same metadata, new geometry.
    pub(crate) fn with_coords(&self, frames: usize, bodies: usize, coords: Vec<[T; 3]>) -> Result<Self> {
        let mut out = Self::new(frames, bodies, self.joints, coords)?;
        out.joint_names = self.joint_names.clone();
        out.label = self.label;
        out.subject_id = self.subject_id;
        out.setup_id = self.setup_id;
        Ok(out)
    }

    /// Truncates or zero-pads the body dimension to `bodies`.
    pub fn with_bodies(&self, bodies: usize) -> Result<Self> {
        if bodies == self.bodies {
            return Ok(self.clone());
        }
        let mut coords = Vec::with_capacity(self.frames * bodies * self.joints);
        for t in 0..self.frames {
            for m in 0..bodies {
                if m < self.bodies {
                    coords.extend_from_slice(self.frame_body(t, m));
                } else {
                    coords.extend(std::iter::repeat_n([T::zero(); 3], self.joints));
                }
            }
        }
        self.with_coords(self.frames, bodies, coords)
    }

    pub fn cast<U: Real>(&self) -> SkeletonSequence<U> {
        let coords = self.coords.iter().map(|p| p.map(|c| U::lit(c.as_f64()))).collect();
        SkeletonSequence {
            frames: self.frames,
            bodies: self.bodies,
            joints: self.joints,
            coords,
            joint_names: self.joint_names.clone(),
            label: self.label,
            subject_id: self.subject_id,
            setup_id: self.setup_id,
        }
    }
}
