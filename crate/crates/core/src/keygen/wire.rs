//! Length-prefixed big-endian encoding shared by keys, signatures and
//! transaction units.

use num_bigint::BigUint;
use num_traits::Zero;

use super::KeyError;

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    /// `u32` length followed by the bytes.
    pub fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(&(v.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(v);
    }

    /// Minimal big-endian magnitude; zero encodes as the empty string.
    pub fn int(&mut self, v: &BigUint) {
        if v.is_zero() {
            self.bytes(&[]);
        } else {
            self.bytes(&v.to_bytes_be());
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], KeyError> {
        if self.buf.len() < n {
            return Err(KeyError::Encoding("truncated field".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8, KeyError> {
        Ok(self.take(1)?[0])
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], KeyError> {
        let len = u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes"));
        self.take(len as usize)
    }

    /// Rejects non-minimal encodings so that every value has one byte form.
    pub fn int(&mut self) -> Result<BigUint, KeyError> {
        let raw = self.bytes()?;
        if raw.first() == Some(&0) {
            return Err(KeyError::Encoding("integer has a leading zero byte".into()));
        }
        Ok(BigUint::from_bytes_be(raw))
    }

    pub fn end(&self) -> Result<(), KeyError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(KeyError::Encoding(format!("{} trailing bytes", self.buf.len())))
        }
    }
}
