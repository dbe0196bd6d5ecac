//! Little-endian container shared by the model file and the index sidecar:
//! 8-byte magic, u32 version, u64 payload length, payload, u64 FNV-1a checksum.

use std::path::Path;

use crate::error::{AresError, Result};

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn len_u32(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("length fits in u32"));
    }
    /// Shape header followed by the values.
    pub fn tensor(&mut self, rows: usize, cols: usize, values: &[f64]) {
        debug_assert_eq!(rows * cols, values.len());
        self.len_u32(rows);
        self.len_u32(cols);
        for v in values {
            self.f64(*v);
        }
    }
    pub fn bytes(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.buf.extend_from_slice(b);
    }

    pub fn finish(self, magic: &[u8; 8], version: u32) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.buf.len() + 28);
        out.extend_from_slice(magic);
        out.extend_from_slice(&version.to_le_bytes());
        out.extend_from_slice(&(self.buf.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.buf);
        out.extend_from_slice(&fnv1a(&self.buf).to_le_bytes());
        out
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Validates the envelope and returns a reader over the payload.
    pub fn open(bytes: &'a [u8], magic: &[u8; 8], supported: u32) -> Result<Self> {
        if bytes.len() < 20 {
            return Err(AresError::Corrupt("file too short for header".into()));
        }
        if &bytes[..8] != magic {
            return Err(AresError::Corrupt(format!(
                "bad magic, expected {:?}",
                String::from_utf8_lossy(magic)
            )));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != supported {
            return Err(AresError::Version {
                found: version,
                supported,
            });
        }
        let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let end = 20usize
            .checked_add(len)
            .ok_or_else(|| AresError::Corrupt("payload length overflow".into()))?;
        if bytes.len() != end + 8 {
            return Err(AresError::Corrupt(format!(
                "expected {} bytes, file has {}",
                end + 8,
                bytes.len()
            )));
        }
        let payload = &bytes[20..end];
        let checksum = u64::from_le_bytes(bytes[end..end + 8].try_into().unwrap());
        if checksum != fnv1a(payload) {
            return Err(AresError::Corrupt("checksum mismatch".into()));
        }
        Ok(Self {
            buf: payload,
            pos: 0,
        })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(AresError::Corrupt("unexpected end of payload".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn tensor(&mut self) -> Result<(usize, usize, Vec<f64>)> {
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| AresError::Corrupt("tensor shape overflow".into()))?;
        if n.saturating_mul(8) > self.buf.len() - self.pos {
            return Err(AresError::Corrupt("tensor larger than payload".into()));
        }
        let values = (0..n).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Ok((rows, cols, values))
    }
    pub fn vector(&mut self, expected: usize) -> Result<Vec<f64>> {
        let (rows, cols, values) = self.tensor()?;
        if rows != 1 || cols != expected {
            return Err(AresError::Corrupt(format!(
                "expected a 1x{expected} tensor, found {rows}x{cols}"
            )));
        }
        Ok(values)
    }
    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u64()? as usize;
        self.take(n)
    }
    pub fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(AresError::Corrupt("trailing bytes in payload".into()));
        }
        Ok(())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}
