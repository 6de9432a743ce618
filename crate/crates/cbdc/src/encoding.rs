//! Canonical binary encoding helpers.
//!
//! Every persisted or signed structure uses the same conventions: fixed
//! field order, count-prefixed lists (u32 big-endian), fixed-width
//! big-endian numerics sized from the group parameters. The encodings are
//! byte-exact by construction; transaction ids and signatures are computed
//! over them.

use num_bigint::BigUint;
use thiserror::Error;

use crate::group::{to_fixed_be, GroupElement, GroupParams, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("truncated input at offset {0}")]
    Truncated(usize),
    #[error("malformed frame: {0}")]
    Malformed(&'static str),
    #[error("version mismatch: got {0}")]
    VersionMismatch(u8),
    #[error("digest mismatch")]
    DigestMismatch,
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Writer::default()
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// u32 length-prefixed byte string.
    pub fn put_var_bytes(&mut self, bytes: &[u8]) {
        self.put_u32(bytes.len() as u32);
        self.put_raw(bytes);
    }

    pub fn put_element(&mut self, params: &GroupParams, e: &GroupElement) {
        self.put_raw(&params.element_bytes(e));
    }

    pub fn put_scalar(&mut self, params: &GroupParams, s: &Scalar) {
        self.put_raw(&params.scalar_bytes(s));
    }

    pub fn put_digest(&mut self, d: &[u8; 32]) {
        self.put_raw(d);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }
}

pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.pos + n > self.data.len() {
            return Err(CodecError::Truncated(self.pos));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    pub fn get_u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn get_u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn get_u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn get_raw(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        self.take(n)
    }

    pub fn get_var_bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let n = self.get_u32()? as usize;
        self.take(n)
    }

    pub fn get_element(&mut self, params: &GroupParams) -> Result<GroupElement, CodecError> {
        let bytes = self.take(params.element_width())?;
        Ok(GroupElement(BigUint::from_bytes_be(bytes)))
    }

    pub fn get_scalar(&mut self, params: &GroupParams) -> Result<Scalar, CodecError> {
        let bytes = self.take(params.scalar_width())?;
        Ok(Scalar(BigUint::from_bytes_be(bytes)))
    }

    pub fn get_digest(&mut self) -> Result<[u8; 32], CodecError> {
        Ok(self.take(32)?.try_into().unwrap())
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn finish(&self) -> Result<(), CodecError> {
        if self.remaining() == 0 {
            Ok(())
        } else {
            Err(CodecError::Malformed("trailing bytes"))
        }
    }
}

/// Versioned parameter file: magic, version, profile id, p-width encodings
/// of p, q, g, h, and a SHA-256 digest of everything before it.
pub const PARAMS_MAGIC: &[u8; 4] = b"CBGP";
pub const PARAMS_VERSION: u8 = 1;

pub fn encode_params(params: &GroupParams) -> Vec<u8> {
    use sha2::{Digest, Sha256};
    let mut w = Writer::new();
    w.put_raw(PARAMS_MAGIC);
    w.put_u8(PARAMS_VERSION);
    w.put_u8(params.profile);
    let width = params.element_width() as u32;
    w.put_u32(width);
    w.put_raw(&to_fixed_be(&params.p, width as usize));
    w.put_raw(&to_fixed_be(&params.q, width as usize));
    w.put_raw(&params.element_bytes(&params.g));
    w.put_raw(&params.element_bytes(&params.h));
    let digest: [u8; 32] = Sha256::digest(w.as_bytes()).into();
    w.put_digest(&digest);
    w.into_bytes()
}

pub fn decode_params(bytes: &[u8]) -> Result<GroupParams, CodecError> {
    use sha2::{Digest, Sha256};
    if bytes.len() < 32 {
        return Err(CodecError::Truncated(bytes.len()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    let expected: [u8; 32] = Sha256::digest(body).into();
    if digest != expected {
        return Err(CodecError::DigestMismatch);
    }
    let mut r = Reader::new(body);
    if r.get_raw(4)? != PARAMS_MAGIC {
        return Err(CodecError::Malformed("bad magic"));
    }
    let version = r.get_u8()?;
    if version != PARAMS_VERSION {
        return Err(CodecError::VersionMismatch(version));
    }
    let profile = r.get_u8()?;
    let width = r.get_u32()? as usize;
    let p = BigUint::from_bytes_be(r.get_raw(width)?);
    let q = BigUint::from_bytes_be(r.get_raw(width)?);
    let g = GroupElement(BigUint::from_bytes_be(r.get_raw(width)?));
    let h = GroupElement(BigUint::from_bytes_be(r.get_raw(width)?));
    r.finish()?;
    Ok(GroupParams {
        p,
        q,
        g,
        h,
        profile,
    })
}
