use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};
use crate::skeleton_io::SkeletonSequence;

/// Linear interpolation onto `target` uniformly spaced frames spanning
/// the first and last input frame. A single frame is broadcast.
pub fn resize_temporal<T: Real>(seq: &SkeletonSequence<T>, target: usize) -> Result<SkeletonSequence<T>> {
    if target == 0 {
        return Err(Error::config("target frame count must be at least 1"));
    }
    let frames = seq.frames();
    if frames == target {
        return Ok(seq.clone());
    }
    let per_frame = seq.bodies() * seq.joints();
    let src = seq.coords();
    let mut coords = Vec::with_capacity(target * per_frame);
    for i in 0..target {
        let (lo, hi, w) = if frames == 1 || target == 1 {
            (0, 0, T::zero())
        } else {
            let pos = from_usize::<T>(i * (frames - 1)) / from_usize::<T>(target - 1);
            let lo = pos.floor().to_usize().unwrap_or(0).min(frames - 1);
            let hi = (lo + 1).min(frames - 1);
            (lo, hi, pos - from_usize::<T>(lo))
        };
        let a = &src[lo * per_frame..(lo + 1) * per_frame];
        let b = &src[hi * per_frame..(hi + 1) * per_frame];
        coords.extend(a.iter().zip(b).map(|(p, q)| {
            if w == T::zero() {
                *p
            } else {
                [0, 1, 2].map(|k| p[k] + (q[k] - p[k]) * w)
            }
        }));
    }
    seq.with_coords(target, seq.bodies(), coords)
}

/// Forward difference `p[t+1] − p[t]`; the last frame is zero.
pub fn velocity<T: Real>(seq: &SkeletonSequence<T>) -> SkeletonSequence<T> {
    let per_frame = seq.bodies() * seq.joints();
    let src = seq.coords();
    let frames = seq.frames();
    let coords = (0..frames * per_frame)
        .map(|i| {
            if i / per_frame + 1 == frames {
                [T::zero(); 3]
            } else {
                let (p, q) = (src[i], src[i + per_frame]);
                [q[0] - p[0], q[1] - p[1], q[2] - p[2]]
            }
        })
        .collect();
    seq.with_coords(frames, seq.bodies(), coords).expect("difference of finite points")
}
