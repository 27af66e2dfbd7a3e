//! Linear maps on operators and their Choi representation.

use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{check_range, Error, Result};
use crate::linalg::{c, ComplexMat};
use crate::quantum::{pauli, Axis};

/// A linear map on operators of a fixed dimension.
///
/// `apply` must accept arbitrary (not necessarily Hermitian) operators so the
/// Choi matrix can be built from matrix units.
pub trait Channel {
    fn dim(&self) -> usize;
    fn apply(&self, x: &ComplexMat) -> ComplexMat;
}

impl<C: Channel + ?Sized> Channel for &C {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &ComplexMat) -> ComplexMat {
        (**self).apply(x)
    }
}

impl<C: Channel + ?Sized> Channel for Box<C> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &ComplexMat) -> ComplexMat {
        (**self).apply(x)
    }
}

/// Operator-sum channel `x -> sum_k K_k x K_k^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMat>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMat>) -> Result<Self> {
        let d = ops.first().map(ComplexMat::dim).ok_or(Error::BadSubsystems)?;
        if let Some(bad) = ops.iter().find(|k| k.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(Self { ops })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: alloc::vec![ComplexMat::identity(dim)],
        }
    }

    /// Qubit depolarizing channel `ρ -> (1 - q) ρ + q I/2`.
    pub fn depolarizing(q: f64) -> Result<Self> {
        check_range("depolarizing probability", q, 0.0, 1.0, "[0, 1]")?;
        let mut ops = alloc::vec![ComplexMat::identity(2).scale_re((1.0 - 0.75 * q).sqrt())];
        ops.extend(Axis::ALL.map(|ax| pauli(ax).scale_re((0.25 * q).sqrt())));
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[ComplexMat] {
        &self.ops
    }

    /// `sum_k K_k^dagger K_k`; the identity for trace-preserving maps.
    pub fn completeness(&self) -> ComplexMat {
        self.ops
            .iter()
            .fold(ComplexMat::zeros(self.dim()), |acc, k| &acc + &(&k.adjoint() * k))
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        check_range("mixing weight", w, 0.0, 1.0, "[0, 1]")?;
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let a = w.sqrt();
        let b = (1.0 - w).sqrt();
        let ops = self
            .ops
            .iter()
            .map(|k| k.scale_re(a))
            .chain(other.ops.iter().map(|k| k.scale_re(b)))
            .collect();
        Ok(Self { ops })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(a.tensor(b)?);
            }
        }
        Ok(Self { ops })
    }
}

impl Channel for KrausChannel {
    fn dim(&self) -> usize {
        self.ops[0].dim()
    }
    fn apply(&self, x: &ComplexMat) -> ComplexMat {
        self.ops
            .iter()
            .fold(ComplexMat::zeros(x.dim()), |acc, k| &acc + &(&(k * x) * &k.adjoint()))
    }
}

/// Pointwise convex mixture of two channels, `w * a + (1 - w) * b`.
pub struct Mixture<A, B> {
    pub a: A,
    pub b: B,
    pub w: f64,
}

impl<A: Channel, B: Channel> Channel for Mixture<A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn apply(&self, x: &ComplexMat) -> ComplexMat {
        let ya = self.a.apply(x);
        let yb = self.b.apply(x);
        &ya.scale_re(self.w) + &yb.scale_re(1.0 - self.w)
    }
}

/// Trace-normalised Choi matrix `(1/d) sum_ab |a><b| ⊗ E(|a><b|)` with the
/// input system as the outer tensor factor.
pub fn choi(ch: &impl Channel) -> Result<ComplexMat> {
    let d = ch.dim();
    let big = d * d;
    if big > crate::linalg::MAX_DIM {
        return Err(Error::DimensionOverflow(big));
    }
    let mut out = ComplexMat::zeros(big);
    for a in 0..d {
        for b in 0..d {
            let mut e = ComplexMat::zeros(d);
            e[(a, b)] = c(1.0, 0.0);
            let y = ch.apply(&e);
            for i in 0..d {
                for j in 0..d {
                    out[(a * d + i, b * d + j)] = y[(i, j)] * (1.0 / d as f64);
                }
            }
        }
    }
    Ok(out)
}
