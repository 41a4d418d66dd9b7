//! Periodic rectangular grids, scalar fields on them, and the binary field
//! file format.
//!
//! Field files start with an ASCII header line `MCF1 dim nx ny [nz]`,
//! space-padded so that header plus newline occupies a multiple of 16 bytes
//! (16 for every grid up to 5-digit extents in 2-D), followed by the site
//! values as little-endian `f64` in row-major order (last axis fastest).

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const FIELD_MAGIC: &str = "MCF1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    n: [usize; 3],
    spacing: f64,
}

impl GridSpec {
    /// `extents` holds one entry per axis; 2 or 3 axes, each even and ≥ 4.
    pub fn new(extents: &[usize], spacing: f64) -> Result<Self> {
        let dim = extents.len();
        if !(dim == 2 || dim == 3) {
            return Err(Error::invalid(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if let Some(&bad) = extents.iter().find(|&&e| e < 4 || e % 2 != 0) {
            return Err(Error::invalid(format!("grid extent {bad} must be even and >= 4")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!("lattice spacing must be positive, got {spacing}")));
        }
        let mut n = [1; 3];
        n[..dim].copy_from_slice(extents);
        Ok(Self { dim, n, spacing })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(&[n, n], 1.0)
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new(&[n, n, n], 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extents padded with 1 for a 2-D grid.
    pub fn extents(&self) -> [usize; 3] {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn sites(&self) -> usize {
        self.n.iter().product()
    }

    /// Volume of one lattice cell, a^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// |Ω| = N a^d
    pub fn volume(&self) -> f64 {
        self.sites() as f64 * self.cell_volume()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.n[1] + y) * self.n[2] + z
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let z = idx % self.n[2];
        let y = (idx / self.n[2]) % self.n[1];
        let x = idx / (self.n[1] * self.n[2]);
        [x, y, z]
    }

    /// Index of the site displaced from `idx` by `off` with periodic wrap.
    #[inline]
    pub fn shifted(&self, idx: usize, off: [isize; 3]) -> usize {
        let c = self.coords(idx);
        let w = |a: usize| (c[a] as isize + off[a]).rem_euclid(self.n[a] as isize) as usize;
        self.index(w(0), w(1), w(2))
    }

    /// Signed integer frequency of DFT bin `m` along an axis of length `n`,
    /// in (−n/2, n/2].
    #[inline]
    pub fn signed_mode(m: usize, n: usize) -> isize {
        if m <= n / 2 {
            m as isize
        } else {
            m as isize - n as isize
        }
    }

    /// Integer mode triple of a flat DFT index.
    pub fn mode(&self, idx: usize) -> [isize; 3] {
        let c = self.coords(idx);
        [
            Self::signed_mode(c[0], self.n[0]),
            Self::signed_mode(c[1], self.n[1]),
            Self::signed_mode(c[2], self.n[2]),
        ]
    }

    /// Reciprocal-lattice vector of a flat DFT index, k_d = 2π m_d / (n_d a).
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let m = self.mode(idx);
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = 2.0 * PI * m[a] as f64 / (self.n[a] as f64 * self.spacing);
        }
        k
    }

    /// Symbol of the (2d+1)-point finite-difference Laplacian with sign
    /// flipped: Σ_d (4/a²) sin²(k_d a / 2).
    pub fn laplacian_symbol(&self, idx: usize) -> f64 {
        let k = self.wavevector(idx);
        let a = self.spacing;
        (0..self.dim)
            .map(|d| {
                let s = (0.5 * k[d] * a).sin();
                4.0 * s * s / (a * a)
            })
            .sum()
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Real values over every site of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} sites",
                values.len(),
                grid.sites()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: GridSpec, v: f64) -> Self {
        Self {
            grid,
            values: vec![v; grid.sites()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([usize; 3]) -> f64) -> Self {
        let values = (0..grid.sites()).map(|i| f(grid.coords(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64
    }

    /// True if every value is exactly ±1.
    pub fn is_occupation(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0 || v == -1.0)
    }

    pub fn is_concentration(&self) -> bool {
        self.values.iter().all(|&v| (0.0..=1.0).contains(&v))
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let n = self.grid.extents();
        let mut header = match self.grid.dim() {
            2 => format!("{FIELD_MAGIC} 2 {} {}", n[0], n[1]),
            _ => format!("{FIELD_MAGIC} 3 {} {} {}", n[0], n[1], n[2]),
        };
        while (header.len() + 1) % 16 != 0 {
            header.push(' ');
        }
        header.push('\n');
        w.write_all(header.as_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut header = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            r.read_exact(&mut byte)?;
            if byte[0] == b'\n' {
                break;
            }
            header.push(byte[0]);
            if header.len() > 256 {
                return Err(Error::Format("header line too long".into()));
            }
        }
        let text = std::str::from_utf8(&header).map_err(|_| Error::Format("header is not ASCII".into()))?;
        let mut tok = text.split_whitespace();
        if tok.next() != Some(FIELD_MAGIC) {
            return Err(Error::Format(format!("bad magic in header `{text}`")));
        }
        let nums: Vec<usize> = tok
            .map(|t| t.parse().map_err(|_| Error::Format(format!("bad header token `{t}`"))))
            .collect::<Result<_>>()?;
        let (dim, ext) = nums.split_first().ok_or_else(|| Error::Format("empty header".into()))?;
        if *dim != ext.len() {
            return Err(Error::Format(format!("header declares dim {dim} with {} extents", ext.len())));
        }
        let grid = GridSpec::new(ext, 1.0).map_err(|e| Error::Format(e.to_string()))?;
        let mut raw = vec![0u8; grid.sites() * 8];
        r.read_exact(&mut raw)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(Self { grid, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Loads a field; the file carries no spacing, so the grid has a = 1.
    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}
