use std::str::FromStr;

use num_complex::Complex;

use super::transform::HarmonicCoefficients;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::skeleton_io::DenseTensor;

/// Real-valued views of complex coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComplexFormat {
    Real,
    Imaginary,
    #[default]
    Magnitude,
    Phase,
    RealAndImag,
    MagAndPhase,
}

impl ComplexFormat {
    pub const ALL: [ComplexFormat; 6] = [
        ComplexFormat::Real,
        ComplexFormat::Imaginary,
        ComplexFormat::Magnitude,
        ComplexFormat::Phase,
        ComplexFormat::RealAndImag,
        ComplexFormat::MagAndPhase,
    ];

    /// Channel multiplier.
    pub fn parts(self) -> usize {
        match self {
            ComplexFormat::RealAndImag | ComplexFormat::MagAndPhase => 2,
            _ => 1,
        }
    }

    /// Short names of the parts, used in channel labels.
    pub fn part_names(self) -> &'static [&'static str] {
        match self {
            ComplexFormat::Real => &["re"],
            ComplexFormat::Imaginary => &["im"],
            ComplexFormat::Magnitude => &["mag"],
            ComplexFormat::Phase => &["phase"],
            ComplexFormat::RealAndImag => &["re", "im"],
            ComplexFormat::MagAndPhase => &["mag", "phase"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComplexFormat::Real => "real",
            ComplexFormat::Imaginary => "imag",
            ComplexFormat::Magnitude => "mag",
            ComplexFormat::Phase => "phase",
            ComplexFormat::RealAndImag => "real-imag",
            ComplexFormat::MagAndPhase => "mag-phase",
        }
    }
}

impl FromStr for ComplexFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "real" | "re" => ComplexFormat::Real,
            "imag" | "imaginary" | "im" => ComplexFormat::Imaginary,
            "mag" | "magnitude" => ComplexFormat::Magnitude,
            "phase" => ComplexFormat::Phase,
            "real-imag" | "real_and_imag" => ComplexFormat::RealAndImag,
            "mag-phase" | "mag_and_phase" => ComplexFormat::MagAndPhase,
            other => return Err(Error::config(format!("unknown complex format {other:?}"))),
        })
    }
}

/// Phase in `(−π, π]`, zero for the zero value.
#[inline]
pub fn phase<T: Real>(z: Complex<T>) -> T {
    if z.re == T::zero() && z.im == T::zero() {
        T::zero()
    } else {
        let a = z.im.atan2(z.re);
        // atan2 returns −π for a negative real with im = −0.
        if a == -T::PI() {
            T::PI()
        } else {
            a
        }
    }
}

#[inline]
fn part<T: Real>(z: Complex<T>, name: &str) -> T {
    match name {
        "re" => z.re,
        "im" => z.im,
        "mag" => z.re.hypot(z.im),
        _ => phase(z),
    }
}

/// Formats `n` complex values into `parts · n` reals, part-major
/// (all first parts, then all second parts).
pub fn complex_format<T: Real>(values: &[Complex<T>], format: ComplexFormat) -> Vec<T> {
    let mut out = Vec::with_capacity(values.len() * format.parts());
    format_into(values, format, &mut out);
    out
}

pub(crate) fn format_into<T: Real>(values: &[Complex<T>], format: ComplexFormat, out: &mut Vec<T>) {
    for name in format.part_names() {
        out.extend(values.iter().map(|&z| part(z, name)));
    }
}

impl<T: Real> HarmonicCoefficients<T> {
    /// Formatted values as a `frames × bodies × centers × (parts·block_len)` tensor.
    pub fn formatted(&self, format: ComplexFormat) -> DenseTensor<T> {
        let mut data = Vec::with_capacity(self.values.len() * format.parts());
        for block in self.values.chunks_exact(self.block_len()) {
            format_into(block, format, &mut data);
        }
        DenseTensor::new(vec![self.frames, self.bodies, self.centers, self.block_len() * format.parts()], data)
            .expect("sized from coefficients")
    }

    /// Per-degree power `Σ_m |a_ℓ^m|²` as a
    /// `frames × bodies × centers × slots × |L|` tensor.
    pub fn power_spectrum(&self) -> DenseTensor<T> {
        let k = self.degrees.coefficient_count();
        let nl = self.degrees.degrees().len();
        let mut data = Vec::with_capacity(self.values.len() / k * nl);
        for coeffs in self.values.chunks_exact(k) {
            data.extend(power_spectrum(coeffs, &self.degrees));
        }
        DenseTensor::new(vec![self.frames, self.bodies, self.centers, self.slots, nl], data)
            .expect("sized from coefficients")
    }
}

/// Per-degree power of one coefficient vector in [`super::DegreeSet::indices`] order.
pub fn power_spectrum<T: Real>(coeffs: &[Complex<T>], degrees: &super::DegreeSet) -> Vec<T> {
    assert_eq!(coeffs.len(), degrees.coefficient_count(), "coefficient count");
    let mut out = Vec::with_capacity(degrees.degrees().len());
    let mut rest = coeffs;
    for &l in degrees.degrees() {
        let (band, tail) = rest.split_at(2 * l as usize + 1);
        out.push(band.iter().map(|z| z.norm_sqr()).sum());
        rest = tail;
    }
    out
}
