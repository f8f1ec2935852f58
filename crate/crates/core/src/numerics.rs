//! Dense vectors and matrices over `f64`, plus the project-wide random source.
//!
//! Every random draw in the crate comes from [`RandomSource`], a ChaCha8 stream
//! cipher keyed by `rand_chacha`'s `seed_from_u64(seed)` with its 64-bit stream
//! counter set to `stream_id`. Equal `(seed, stream_id)` pairs replay the same
//! sequence on every platform.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{contract, Error, Result};

/// Euclidean norm of a raw slice, rejecting NaN and infinities.
pub fn euclidean_norm(entries: &[f64]) -> Result<f64> {
    if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "entry {i} is not finite: {}",
            entries[i]
        )));
    }
    Ok(norm_unchecked(entries))
}

fn norm_unchecked(entries: &[f64]) -> f64 {
    entries.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dense product `A v`.
pub fn matvec(a: &DenseMatrix, v: &DenseVector) -> Result<DenseVector> {
    a.matvec(v)
}

/// One draw from `[0, 1)`.
pub fn uniform_unit(r: &mut RandomSource) -> f64 {
    r.uniform_unit()
}

#[derive(Clone, PartialEq)]
pub struct DenseVector {
    entries: Vec<f64>,
}

impl DenseVector {
    /// Builds a vector, checking `len >= 1` and finiteness.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(contract("vector dimension must be at least 1"));
        }
        euclidean_norm(&entries)?;
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![0.0; dim],
        }
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// Unit basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[i] = 1.0;
        v
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn norm(&self) -> f64 {
        norm_unchecked(&self.entries)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, a: f64) -> DenseVector {
        Self::from_vec_unchecked(self.entries.iter().map(|v| a * v).collect())
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &DenseVector) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, xi) in self.entries.iter_mut().zip(&x.entries) {
            *s += a * xi;
        }
    }

    /// `q * self + (1 - q) * other`
    pub fn interpolate(&self, other: &DenseVector, q: f64) -> DenseVector {
        Self::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| q * a + (1.0 - q) * b)
                .collect(),
        )
    }

    /// Indices of nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn check_dim(&self, dim: usize, what: &str) -> Result<()> {
        if self.dim() != dim {
            return Err(contract(format!(
                "{what}: dimension {} does not match expected {dim}",
                self.dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self, what: &str) -> Result<()> {
        if !self.is_finite() {
            return Err(contract(format!("{what}: non-finite entry")));
        }
        Ok(())
    }
}

impl fmt::Debug for DenseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.entries).finish()
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl Add for &DenseVector {
    type Output = DenseVector;
    fn add(self, rhs: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        DenseVector::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &DenseVector {
    type Output = DenseVector;
    fn sub(self, rhs: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        DenseVector::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Neg for &DenseVector {
    type Output = DenseVector;
    fn neg(self) -> DenseVector {
        self.scaled(-1.0)
    }
}

impl Mul<&DenseVector> for f64 {
    type Output = DenseVector;
    fn mul(self, rhs: &DenseVector) -> DenseVector {
        rhs.scaled(self)
    }
}

/// Square row-major matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.entries[i * diag.len() + i] = *d;
        }
        m
    }

    /// Row-major entries of a `dim x dim` matrix.
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(contract(format!(
                "matrix needs {dim}x{dim} entries, got {}",
                entries.len()
            )));
        }
        euclidean_norm(&entries)?;
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(contract("matrix rows must form a square array"));
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `(A + A^T) / 2`; the result is exactly symmetric.
    pub fn symmetrized(&self) -> DenseMatrix {
        let mut s = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        s
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.dim != other.dim {
            return Err(contract("matrix sum: dimension mismatch"));
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn matvec(&self, v: &DenseVector) -> Result<DenseVector> {
        v.check_dim(self.dim, "matvec")?;
        Ok(self.matvec_unchecked(v))
    }

    pub(crate) fn matvec_unchecked(&self, v: &DenseVector) -> DenseVector {
        let x = v.as_slice();
        DenseVector::from_vec_unchecked(
            self.entries
                .chunks_exact(self.dim)
                .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// Largest singular value by power iteration on `A^T A`.
    pub fn spectral_norm(&self) -> f64 {
        let n = self.dim;
        let at = self.transpose();
        // Irregular start vector so it is not orthogonal to the top eigenvector
        // of structured test matrices.
        let mut v = DenseVector::from_vec_unchecked(
            (0..n)
                .map(|i| 1.0 + 0.1 * ((i * 7 + 3) % 11) as f64)
                .collect(),
        );
        let mut v_norm = v.norm();
        v = v.scaled(1.0 / v_norm);
        let mut estimate = 0.0;
        for _ in 0..2000 {
            let w = at.matvec_unchecked(&self.matvec_unchecked(&v));
            v_norm = w.norm();
            if v_norm == 0.0 {
                return 0.0;
            }
            let next = v_norm.sqrt();
            v = w.scaled(1.0 / v_norm);
            if (next - estimate).abs() <= 1e-13 * next {
                return next;
            }
            estimate = next;
        }
        estimate
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.entries.chunks(self.dim.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// Seeded, splittable random source. Single owner; parallel work splits
/// into substreams rather than sharing one source.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Fresh source on a stream derived from this one's stream id and `index`.
    /// Does not advance `self`.
    pub fn substream(&self, index: u64) -> RandomSource {
        let id = splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RandomSource::new(self.seed, id)
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open_closed(&mut self) -> f64 {
        1.0 - self.uniform_unit()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `+1` or `-1` with equal probability.
    pub fn sign(&mut self) -> f64 {
        if self.rng.next_u32() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform_unit() < p
    }

    pub fn standard_normal_vector(&mut self, dim: usize) -> DenseVector {
        DenseVector::from_vec_unchecked((0..dim).map(|_| self.standard_normal()).collect())
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
