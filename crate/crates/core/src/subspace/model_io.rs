//! Byte-stable model container.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "CVSM"  magic                         4 bytes
//! version u32                           4 bytes
//! method  u8  (0 cca, 1 pls, 2 pca)     1 byte
//! reserved                              3 bytes (zero)
//! k, d_x, d_y  u32 each                12 bytes
//! alpha   f64                           8 bytes
//! w_x     d_x*k f64, row-major
//! w_y     d_y*k f64, row-major
//! rho     k f64
//! x_mean  d_x f64
//! y_mean  d_y f64
//! ```
//!
//! The writer emits a canonical byte stream, so equal models produce equal
//! files on every platform.

use crate::error::{Error, Result};
use crate::subspace::solver::detect_ties;
use crate::subspace::{Method, ModelDiagnostics, PairedSubspaceModel};
use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};
use std::path::Path;

const MAGIC: &[u8; 4] = b"CVSM";
const FORMAT_VERSION: u32 = 1;

impl PairedSubspaceModel {
    /// Serializes the model to its canonical byte representation.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (d_x, d_y) = self.dims();
        let k = self.k();
        let mut out = Vec::with_capacity(32 + 8 * (d_x * k + d_y * k + k + d_x + d_y));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(match self.method {
            Method::Cca => 0,
            Method::Pls => 1,
            Method::Pca => 2,
        });
        out.extend_from_slice(&[0u8; 3]);
        out.extend_from_slice(&(k as u32).to_le_bytes());
        out.extend_from_slice(&(d_x as u32).to_le_bytes());
        out.extend_from_slice(&(d_y as u32).to_le_bytes());
        out.extend_from_slice(&self.alpha.to_le_bytes());
        write_matrix_row_major(&mut out, &self.w_x);
        write_matrix_row_major(&mut out, &self.w_y);
        for v in self.rho.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.x_mean.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.y_mean.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses a model from bytes produced by [`to_bytes`](Self::to_bytes).
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(Error::InvalidModelFile {
                reason: "bad magic".into(),
            });
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::InvalidModelFile {
                reason: format!("unsupported version {version}"),
            });
        }
        let method = match r.u8()? {
            0 => Method::Cca,
            1 => Method::Pls,
            2 => Method::Pca,
            m => {
                return Err(Error::InvalidModelFile {
                    reason: format!("unknown method tag {m}"),
                })
            }
        };
        r.take(3)?;
        let k = r.u32()? as usize;
        let d_x = r.u32()? as usize;
        let d_y = r.u32()? as usize;
        let alpha = r.f64()?;
        let w_x = r.matrix_row_major(d_x, k)?;
        let w_y = r.matrix_row_major(d_y, k)?;
        let rho = r.vector(k)?;
        let x_mean = r.vector(d_x)?;
        let y_mean = r.vector(d_y)?;
        if r.pos != bytes.len() {
            return Err(Error::InvalidModelFile {
                reason: format!("{} trailing bytes", bytes.len() - r.pos),
            });
        }
        let tied_rho = detect_ties(&rho, 1e-10);
        Ok(PairedSubspaceModel {
            w_x,
            w_y,
            rho,
            x_mean,
            y_mean,
            method,
            alpha,
            diagnostics: ModelDiagnostics {
                requested_k: k,
                k_clamped: false,
                tied_rho,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes =
            std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_bytes(&bytes)
    }

    /// SHA-256 of the canonical byte representation, hex-encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }
}

fn write_matrix_row_major(out: &mut Vec<u8>, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::InvalidModelFile {
                reason: "truncated file".into(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn vector(&mut self, len: usize) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(len);
        for i in 0..len {
            v[i] = self.f64()?;
        }
        Ok(v)
    }

    fn matrix_row_major(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.f64()?;
            }
        }
        Ok(m)
    }
}
