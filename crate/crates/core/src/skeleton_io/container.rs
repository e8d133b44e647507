//! The `SKTF` binary tensor container.
//!
//! Layout (all little-endian):
//!
//! | bytes        | field                                  |
//! |--------------|----------------------------------------|
//! | 4            | magic `SKTF`                           |
//! | 4 (u32)      | version, currently 1                   |
//! | 4 (u32)      | dtype code: 1 = f32, 2 = f64           |
//! | 4 (u32)      | number of dims                         |
//! | 8·ndims (u64)| dims                                   |
//! | rest         | row-major payload, last dim fastest    |

use std::io::{Read, Write};

use thiserror::Error;

use crate::scalar::Real;

pub const MAGIC: [u8; 4] = *b"SKTF";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("bad magic {0:?}, expected \"SKTF\"")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u32),
    #[error("dtype mismatch: file holds {found:?}, requested {requested:?}")]
    DtypeMismatch { found: DType, requested: DType },
    #[error("truncated header")]
    TruncatedHeader,
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("{0} unexpected bytes after payload")]
    TrailingBytes(usize),
    #[error("invalid dims {0:?}: every dim must be nonzero and the product must fit in memory")]
    InvalidDims(Vec<u64>),
    #[error("data length {len} does not match dims {dims:?}")]
    LengthMismatch { dims: Vec<usize>, len: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    F32,
    F64,
}

impl DType {
    pub fn code(self) -> u32 {
        match self {
            DType::F32 => 1,
            DType::F64 => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(DType::F32),
            2 => Some(DType::F64),
            _ => None,
        }
    }

    pub fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::F64 => 8,
        }
    }
}

/// Scalars the container can hold.
pub trait Element: Real {
    const DTYPE: DType;
    fn put_le(self, out: &mut Vec<u8>);
    fn get_le(bytes: &[u8]) -> Self;
}

impl Element for f32 {
    const DTYPE: DType = DType::F32;
    fn put_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn get_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl Element for f64 {
    const DTYPE: DType = DType::F64;
    fn put_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn get_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Copy> DenseTensor<T> {
    pub fn new(dims: Vec<usize>, data: Vec<T>) -> Result<Self, ContainerError> {
        if dims.iter().product::<usize>() != data.len() || dims.contains(&0) {
            return Err(ContainerError::LengthMismatch { len: data.len(), dims });
        }
        Ok(Self { dims, data })
    }

    pub fn filled(dims: Vec<usize>, value: T) -> Self {
        let n = dims.iter().product();
        Self { dims, data: vec![value; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }
}

impl<T: Real> DenseTensor<T> {
    pub fn cast<U: Real>(&self) -> DenseTensor<U> {
        DenseTensor { dims: self.dims.clone(), data: self.data.iter().map(|x| U::lit(x.as_f64())).collect() }
    }
}

pub fn encode_tensor<T: Element>(tensor: &DenseTensor<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * tensor.dims.len() + T::DTYPE.size() * tensor.data.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&T::DTYPE.code().to_le_bytes());
    out.extend_from_slice(&(tensor.dims.len() as u32).to_le_bytes());
    for &d in &tensor.dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &x in &tensor.data {
        x.put_le(&mut out);
    }
    out
}

pub fn write_tensor<T: Element, W: Write>(tensor: &DenseTensor<T>, mut sink: W) -> Result<(), ContainerError> {
    sink.write_all(&encode_tensor(tensor))?;
    sink.flush()?;
    Ok(())
}

/// A tensor of whichever dtype the file declares.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTensor {
    F32(DenseTensor<f32>),
    F64(DenseTensor<f64>),
}

impl AnyTensor {
    pub fn to_f64(&self) -> DenseTensor<f64> {
        match self {
            AnyTensor::F32(t) => t.cast(),
            AnyTensor::F64(t) => t.clone(),
        }
    }
}

struct Header {
    dtype: DType,
    dims: Vec<usize>,
    payload_len: usize,
}

fn u32_at(bytes: &[u8], at: usize) -> Option<u32> {
    Some(u32::from_le_bytes(bytes.get(at..at + 4)?.try_into().ok()?))
}

fn u64_at(bytes: &[u8], at: usize) -> Option<u64> {
    Some(u64::from_le_bytes(bytes.get(at..at + 8)?.try_into().ok()?))
}

fn decode_header(bytes: &[u8]) -> Result<(Header, usize), ContainerError> {
    let magic: [u8; 4] = bytes.get(0..4).ok_or(ContainerError::TruncatedHeader)?.try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(ContainerError::BadMagic(magic));
    }
    let version = u32_at(bytes, 4).ok_or(ContainerError::TruncatedHeader)?;
    if version != VERSION {
        return Err(ContainerError::UnsupportedVersion(version));
    }
    let code = u32_at(bytes, 8).ok_or(ContainerError::TruncatedHeader)?;
    let dtype = DType::from_code(code).ok_or(ContainerError::UnsupportedDtype(code))?;
    let ndims = u32_at(bytes, 12).ok_or(ContainerError::TruncatedHeader)? as usize;
    let header_len = ndims.checked_mul(8).and_then(|n| n.checked_add(16)).ok_or(ContainerError::TruncatedHeader)?;
    if bytes.len() < header_len {
        return Err(ContainerError::TruncatedHeader);
    }
    let raw: Vec<u64> = (0..ndims).map(|i| u64_at(bytes, 16 + 8 * i).expect("in bounds")).collect();
    let payload_len = raw
        .iter()
        .try_fold(dtype.size(), |acc, &d| {
            let d = usize::try_from(d).ok().filter(|&d| d > 0)?;
            acc.checked_mul(d)
        })
        .filter(|_| ndims > 0)
        .ok_or_else(|| ContainerError::InvalidDims(raw.clone()))?;
    let dims = raw.iter().map(|&d| d as usize).collect();
    Ok((Header { dtype, dims, payload_len }, header_len))
}

fn decode_payload<T: Element>(header: Header, payload: &[u8]) -> Result<DenseTensor<T>, ContainerError> {
    if header.dtype != T::DTYPE {
        return Err(ContainerError::DtypeMismatch { found: header.dtype, requested: T::DTYPE });
    }
    if payload.len() < header.payload_len {
        return Err(ContainerError::TruncatedPayload { expected: header.payload_len, found: payload.len() });
    }
    if payload.len() > header.payload_len {
        return Err(ContainerError::TrailingBytes(payload.len() - header.payload_len));
    }
    let data = payload.chunks_exact(T::DTYPE.size()).map(T::get_le).collect();
    Ok(DenseTensor { dims: header.dims, data })
}

pub fn decode_any_tensor(bytes: &[u8]) -> Result<AnyTensor, ContainerError> {
    let (header, at) = decode_header(bytes)?;
    Ok(match header.dtype {
        DType::F32 => AnyTensor::F32(decode_payload(header, &bytes[at..])?),
        DType::F64 => AnyTensor::F64(decode_payload(header, &bytes[at..])?),
    })
}

pub fn decode_tensor<T: Element>(bytes: &[u8]) -> Result<DenseTensor<T>, ContainerError> {
    let (header, at) = decode_header(bytes)?;
    decode_payload(header, &bytes[at..])
}

/// Reads a tensor whose dtype must match `T`.
pub fn read_tensor<T: Element, R: Read>(mut source: R) -> Result<DenseTensor<T>, ContainerError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode_tensor(&bytes)
}

pub fn read_any_tensor<R: Read>(mut source: R) -> Result<AnyTensor, ContainerError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode_any_tensor(&bytes)
}
