//! Dense row-major tensors of f64 values, rank 1 through 4.
//!
//! Activations and gradients use the N×C×H×W convention; vectors and matrices
//! are lower-rank tensors. Values are f64 in memory so finite-difference
//! gradient checks have headroom; the on-disk segment format is f32.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Four positive extents interpreted as batch × channels × height × width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub fn new(n: usize, c: usize, h: usize, w: usize) -> Result<Self> {
        if n == 0 || c == 0 || h == 0 || w == 0 {
            return Err(Error::param("Shape::new", format!("zero extent in {n}x{c}x{h}x{w}")));
        }
        Ok(Shape { n, c, h, w })
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.n, self.c, self.h, self.w]
    }

    pub fn count(&self) -> usize {
        self.n * self.c * self.h * self.w
    }
}

/// Dense tensor; `data.len() == product(shape)`, every extent ≥ 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 4 {
            return Err(Error::shape("Tensor::new", format!("rank {} not in 1..=4", shape.len())));
        }
        if shape.iter().any(|&e| e == 0) {
            return Err(Error::shape("Tensor::new", format!("zero extent in {shape:?}")));
        }
        let count: usize = shape.iter().product();
        if count != data.len() {
            return Err(Error::shape(
                "Tensor::new",
                format!("shape {shape:?} holds {count} values, got {}", data.len()),
            ));
        }
        Ok(Tensor { shape: shape.to_vec(), data })
    }

    /// All-zero tensor. Panics on an invalid shape; shapes here are derived
    /// from already-validated inputs.
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor::fill(shape, 0.0)
    }

    /// Constant tensor.
    pub fn fill(shape: &[usize], value: f64) -> Self {
        let count: usize = shape.iter().product();
        Tensor::new(shape, vec![value; count]).expect("valid shape")
    }

    /// Seeded uniform tensor with every value in [lo, hi).
    pub fn random_uniform(shape: &[usize], seed: u64, lo: f64, hi: f64) -> Result<Self> {
        if lo > hi {
            return Err(Error::param("random_uniform", format!("lo {lo} > hi {hi}")));
        }
        let mut rng = Rng::from_seed(seed);
        let count: usize = shape.iter().product();
        let data: Vec<f64> = (0..count).map(|_| rng.uniform(lo, hi)).collect();
        Tensor::new(shape, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Reinterpret the flat data under a new shape with the same element count.
    pub fn reshaped(&self, shape: &[usize]) -> Result<Tensor> {
        Tensor::new(shape, self.data.clone())
    }

    /// The shape as N×C×H×W; rank-4 tensors only.
    pub fn shape4(&self) -> Result<Shape> {
        if self.rank() != 4 {
            return Err(Error::shape("shape4", format!("rank {} tensor, need 4", self.rank())));
        }
        Shape::new(self.shape[0], self.shape[1], self.shape[2], self.shape[3])
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn at_mut(&mut self, idx: &[usize]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut o = 0;
        for (i, &x) in idx.iter().enumerate() {
            debug_assert!(x < self.shape[i]);
            o = o * self.shape[i] + x;
        }
        o
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    /// True when every value is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise a + b for identical shapes.
    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::shape(
                "add",
                format!("{:?} vs {:?}", self.shape, other.shape),
            ));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Tensor::new(&self.shape, data)
    }

    /// Elementwise scale by a constant.
    pub fn scaled(&self, k: f64) -> Tensor {
        let data = self.data.iter().map(|v| v * k).collect();
        Tensor::new(&self.shape, data).expect("same shape")
    }

    /// Serialize as the checkpoint tensor segment: little-endian u32 rank,
    /// u32 extents, then f32 values row-major.
    pub fn write_segment<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        out.write_all(&(self.rank() as u32).to_le_bytes())?;
        for &e in &self.shape {
            out.write_all(&(e as u32).to_le_bytes())?;
        }
        for &v in &self.data {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        Ok(())
    }

    /// Inverse of [`write_segment`]; f32 on disk widens to f64.
    pub fn read_segment<R: Read>(input: &mut R) -> std::io::Result<Tensor> {
        let rank = read_u32(input)? as usize;
        if rank == 0 || rank > 4 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("tensor segment rank {rank} not in 1..=4"),
            ));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            let e = read_u32(input)? as usize;
            if e == 0 {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    "tensor segment with zero extent",
                ));
            }
            shape.push(e);
        }
        let count: usize = shape.iter().product();
        let mut data = Vec::with_capacity(count);
        let mut buf = [0u8; 4];
        for _ in 0..count {
            input.read_exact(&mut buf)?;
            data.push(f32::from_le_bytes(buf) as f64);
        }
        Ok(Tensor { shape, data })
    }
}

fn read_u32<R: Read>(input: &mut R) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

/// Elementwise product `a[i] * b[broadcast(i)]`.
///
/// `b` must either match `a`'s shape exactly, or broadcast by one of two
/// rules against a rank-3 (C×H×W) or rank-4 (N×C×H×W) `a`:
/// per-channel (`b` rank 1, length C) or per-position (`b` rank 2, H×W).
pub fn hadamard(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() == b.shape() {
        let data = a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect();
        return Tensor::new(a.shape(), data);
    }
    let (n, c, h, w) = match a.rank() {
        3 => (1, a.shape[0], a.shape[1], a.shape[2]),
        4 => (a.shape[0], a.shape[1], a.shape[2], a.shape[3]),
        r => {
            return Err(Error::shape(
                "hadamard",
                format!("broadcast needs rank-3/4 lhs, got rank {r} vs {:?}", b.shape()),
            ))
        }
    };
    let mut out = a.clone();
    if b.rank() == 1 && b.shape[0] == c {
        // per-channel gate
        for ni in 0..n {
            for ci in 0..c {
                let g = b.data[ci];
                let base = (ni * c + ci) * h * w;
                for v in &mut out.data[base..base + h * w] {
                    *v *= g;
                }
            }
        }
        Ok(out)
    } else if b.rank() == 2 && b.shape == [h, w] {
        // per-position gate
        for ni in 0..n {
            for ci in 0..c {
                let base = (ni * c + ci) * h * w;
                for (i, v) in out.data[base..base + h * w].iter_mut().enumerate() {
                    *v *= b.data[i];
                }
            }
        }
        Ok(out)
    } else {
        Err(Error::shape(
            "hadamard",
            format!(
                "rhs {:?} is neither equal to lhs {:?}, per-channel [{c}], nor per-position [{h}, {w}]",
                b.shape(),
                a.shape()
            ),
        ))
    }
}
